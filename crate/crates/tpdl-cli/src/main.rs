//! Command-line front-end for the Type PDL satisfiability solver.
//!
//! Three subcommands: `check` decides a formula set and optionally exports
//! the witness model, the proof graph, and the rule trace; `verify` decides
//! and then independently validates a satisfiable verdict through the full
//! witness pipeline; `fuzz` runs the differential test driver.
//!
//! The first stdout line of `check` and `verify` is exactly `SAT` or
//! `UNSAT`; everything else goes to stderr. Exit codes: 0 satisfiable (or a
//! clean fuzz run), 1 unsatisfiable (or fuzz violations), 2 input error,
//! 3 resource limit, 4 witness verification failure, 70 internal error.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};

use tpdl::engine::{solve, Answer, Config, SolveError, Stats, Verdict};
use tpdl::oracle::{differential_run, GenConfig};
use tpdl::parser::parse_lines;
use tpdl::syntax::FId;
use tpdl::witness::verify_sat;

const EXIT_SAT: u8 = 0;
const EXIT_UNSAT: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_RESOURCE: u8 = 3;
const EXIT_UNVERIFIED: u8 = 4;
const EXIT_INTERNAL: u8 = 70;

#[derive(Parser)]
#[command(
    name = "tpdl",
    version,
    about = "Satisfiability solver for PDL with process types and agent capabilities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide satisfiability of a formula set
    Check {
        /// Input file, one formula per line (conjoined); `-` reads stdin
        #[arg(value_name = "FILE", required_unless_present = "expr")]
        file: Option<PathBuf>,
        /// Inline formula instead of a file
        #[arg(
            short = 'e',
            long = "expr",
            value_name = "FORMULA",
            conflicts_with = "file"
        )]
        expr: Option<String>,
        /// Write the verified witness model as JSON (satisfiable inputs only)
        #[arg(long, value_name = "PATH")]
        model_out: Option<PathBuf>,
        /// Write the proof graph in DOT format
        #[arg(long, value_name = "PATH")]
        dot: Option<PathBuf>,
        /// Record rule applications and write them as a JSON array
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
        /// Abort after creating this many nodes (default: TPDL_MAX_NODES)
        #[arg(long, value_name = "N")]
        max_nodes: Option<usize>,
        /// Abort after this many seconds
        #[arg(long, value_name = "SECS")]
        time_limit: Option<f64>,
        /// Print search statistics to stderr
        #[arg(long)]
        stats: bool,
    },
    /// Decide satisfiability and independently verify a SAT verdict
    Verify {
        /// Input file, one formula per line (conjoined); `-` reads stdin
        #[arg(value_name = "FILE")]
        file: PathBuf,
    },
    /// Cross-check the solver on random formulas
    Fuzz {
        /// Number of formulas to generate
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Generator seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Size budget per generated formula
        #[arg(long = "max-size", default_value_t = 15)]
        max_size: u64,
        /// State bound for the brute-force structure search
        #[arg(long = "max-states", default_value_t = 3)]
        max_states: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Check {
            file,
            expr,
            model_out,
            dot,
            trace,
            max_nodes,
            time_limit,
            stats,
        } => check(
            file, expr, model_out, dot, trace, max_nodes, time_limit, stats,
        ),
        Command::Verify { file } => verify(&file),
        Command::Fuzz {
            n,
            seed,
            max_size,
            max_states,
        } => fuzz(n, seed, max_size, max_states),
    };
    ExitCode::from(code)
}

fn read_input(file: Option<&Path>, expr: Option<&str>) -> Result<String, String> {
    match (file, expr) {
        (None, Some(e)) => Ok(e.to_string()),
        (Some(p), None) if p.as_os_str() == "-" => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| format!("reading stdin: {e}"))?;
            Ok(buf)
        }
        (Some(p), None) => {
            fs::read_to_string(p).map_err(|e| format!("reading {}: {e}", p.display()))
        }
        _ => Err("exactly one input source is required (FILE or --expr)".into()),
    }
}

fn parse_input(file: Option<&Path>, expr: Option<&str>) -> Result<Vec<FId>, String> {
    let text = read_input(file, expr)?;
    let roots = parse_lines(&text).map_err(|e| e.to_string())?;
    if roots.is_empty() {
        return Err("the input contains no formulas".into());
    }
    Ok(roots)
}

fn node_cap(flag: Option<usize>) -> Result<Option<usize>, String> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("TPDL_MAX_NODES") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| format!("TPDL_MAX_NODES is not a node count: {v:?}")),
        Err(_) => Ok(None),
    }
}

fn run_solver(roots: &[FId], config: Config) -> Result<Verdict, u8> {
    match solve(roots, config) {
        Ok(v) => Ok(v),
        Err(e @ (SolveError::NodeLimit(_) | SolveError::TimeLimit)) => {
            eprintln!("tpdl: {e}");
            Err(EXIT_RESOURCE)
        }
        Err(e) => {
            eprintln!("tpdl: {e}");
            Err(EXIT_INTERNAL)
        }
    }
}

fn print_stats(verdict: &Verdict) {
    let Stats {
        nodes_created,
        cache_hits,
        rule_applications,
        tracking_edges,
    } = verdict.stats;
    let label_formulas: usize = verdict
        .tableau
        .nodes
        .iter()
        .map(|n| n.label.phi.len())
        .sum();
    // rough footprint: per-node bookkeeping plus interned ids per label entry
    let approx_bytes = nodes_created * 160 + label_formulas * 16;
    eprintln!("nodes created:      {nodes_created}");
    eprintln!("cache hits:         {cache_hits}");
    eprintln!("rule applications:  {rule_applications}");
    eprintln!("tracking edges:     {tracking_edges}");
    eprintln!("label formulas:     {label_formulas}");
    eprintln!("approx. memory:     {} KiB", approx_bytes.div_ceil(1024));
}

fn write_file(path: &Path, contents: &str, what: &str) -> Result<(), u8> {
    fs::write(path, contents).map_err(|e| {
        eprintln!("tpdl: writing {what} to {}: {e}", path.display());
        EXIT_INPUT
    })
}

#[allow(clippy::too_many_arguments)]
fn check(
    file: Option<PathBuf>,
    expr: Option<String>,
    model_out: Option<PathBuf>,
    dot: Option<PathBuf>,
    trace: Option<PathBuf>,
    max_nodes: Option<usize>,
    time_limit: Option<f64>,
    stats: bool,
) -> u8 {
    let roots = match parse_input(file.as_deref(), expr.as_deref()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("tpdl: {e}");
            return EXIT_INPUT;
        }
    };
    let max_nodes = match node_cap(max_nodes) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("tpdl: {e}");
            return EXIT_INPUT;
        }
    };
    let time_limit = match time_limit {
        None => None,
        Some(s) if s.is_finite() && s > 0.0 => Some(Duration::from_secs_f64(s)),
        Some(s) => {
            eprintln!("tpdl: --time-limit must be a positive number of seconds, got {s}");
            return EXIT_INPUT;
        }
    };
    let config = Config {
        max_nodes,
        time_limit,
        trace: trace.is_some(),
    };
    let verdict = match run_solver(&roots, config) {
        Ok(v) => v,
        Err(code) => return code,
    };

    println!("{}", verdict.answer);
    if stats {
        print_stats(&verdict);
    }
    if let Some(path) = &dot {
        if let Err(code) = write_file(path, &verdict.tableau.to_dot(), "the proof graph") {
            return code;
        }
    }
    if let Some(path) = &trace {
        let json = serde_json::to_string_pretty(&verdict.trace).expect("trace serialises");
        if let Err(code) = write_file(path, &json, "the trace") {
            return code;
        }
    }
    if let Some(path) = &model_out {
        match verdict.answer {
            Answer::Unsat => eprintln!("tpdl: unsatisfiable input, no model written"),
            Answer::Sat => match verify_sat(&verdict.tableau, &roots, false) {
                Ok((h, _)) => {
                    let json =
                        serde_json::to_string_pretty(&h.to_json()).expect("model serialises");
                    if let Err(code) = write_file(path, &json, "the model") {
                        return code;
                    }
                }
                Err(e) => {
                    eprintln!("tpdl: witness extraction failed on a satisfiable verdict: {e}");
                    return EXIT_INTERNAL;
                }
            },
        }
    }
    match verdict.answer {
        Answer::Sat => EXIT_SAT,
        Answer::Unsat => EXIT_UNSAT,
    }
}

fn verify(file: &Path) -> u8 {
    let roots = match parse_input(Some(file), None) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("tpdl: {e}");
            return EXIT_INPUT;
        }
    };
    let verdict = match run_solver(&roots, Config::default()) {
        Ok(v) => v,
        Err(code) => return code,
    };
    println!("{}", verdict.answer);
    if verdict.answer == Answer::Unsat {
        return EXIT_UNSAT;
    }
    match verify_sat(&verdict.tableau, &roots, true) {
        Ok((_, report)) => {
            eprintln!(
                "verified: {} states ({} shadows), {} transitions, {} formulas model-checked",
                report.states, report.shadows, report.transitions, report.checked_formulas
            );
            EXIT_SAT
        }
        Err(e) => {
            eprintln!("tpdl: verification failed: {e}");
            EXIT_UNVERIFIED
        }
    }
}

fn fuzz(n: usize, seed: u64, max_size: u64, max_states: usize) -> u8 {
    let cfg = GenConfig {
        seed,
        max_size,
        ..GenConfig::default()
    };
    let report = differential_run(n, &cfg, max_states);
    eprintln!("{report}");
    println!(
        "{}",
        serde_json::to_string_pretty(&report.to_json()).expect("report serialises")
    );
    if report.violations.is_empty() {
        EXIT_SAT
    } else {
        EXIT_UNSAT
    }
}
