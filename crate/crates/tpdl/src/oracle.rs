//! Independent cross-checking machinery: a seeded random formula generator,
//! a bounded brute-force search for model graphs, and a differential test
//! driver pitting the solver against both.
//!
//! The bounded search shares no search logic with the solver. It grows
//! candidate structures demand by demand — every diamond needs a successor,
//! every denied capability needs a witnessing state somewhere — over labels
//! saturated under the reduction rules, and accepts a candidate only after
//! the full model-graph check plus a semantic model check of the roots. A
//! found structure is therefore hard evidence of satisfiability; an
//! exhausted search proves nothing (the bound may simply be too small).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thiserror::Error;

use crate::engine::{atp_diamond_parts, contradictory, neg_cap_parts, solve, Answer, Config};
use crate::parser::print_f;
use crate::reduction::reduction_sets;
use crate::syntax::{
    aprog, arrow, atom, boxf, cap, cap_demand_set, choice, closure_of_set, diamond, ff, fview,
    is_alpha_beta, is_omega, norm_top, not, omega, pview, red_set_in, seq, star, sym, test, tt,
    FId, FView, FormulaSet, PId,
};
use crate::witness::{build_model, check_hintikka, verify_sat, Checker, HState, Hintikka};

#[derive(Error, Debug)]
pub enum OracleError {
    #[error("bounded search exceeded its step budget")]
    BudgetExceeded,
}

// ---------------------------------------------------------------------------
// Random formula generation.
// ---------------------------------------------------------------------------

/// Relative probabilities for each constructor. Only affordable constructors
/// (those fitting the remaining size budget) take part in a draw.
#[derive(Clone, Debug)]
pub struct Weights {
    pub atom: f64,
    pub constant: f64,
    pub negation: f64,
    pub box_formula: f64,
    pub diamond: f64,
    pub capability: f64,
    pub atomic_program: f64,
    pub omega_program: f64,
    pub test_program: f64,
    pub arrow_program: f64,
    pub sequence: f64,
    pub choice: f64,
    pub iteration: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            atom: 1.0,
            constant: 0.15,
            negation: 0.9,
            box_formula: 1.1,
            diamond: 1.1,
            capability: 0.5,
            atomic_program: 1.6,
            omega_program: 0.25,
            test_program: 0.55,
            arrow_program: 0.8,
            sequence: 0.5,
            choice: 0.6,
            iteration: 0.8,
        }
    }
}

/// Configuration for the generator: everything is deterministic in `seed`.
#[derive(Clone, Debug)]
pub struct GenConfig {
    pub seed: u64,
    /// Size budget; every generated formula satisfies `size_f(f) <= max_size`.
    pub max_size: u64,
    pub atom_pool: usize,
    pub prog_pool: usize,
    pub agent_pool: usize,
    pub weights: Weights,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            max_size: 15,
            atom_pool: 3,
            prog_pool: 2,
            agent_pool: 2,
            weights: Weights::default(),
        }
    }
}

const ATOM_NAMES: [&str; 5] = ["p", "q", "r", "s", "t"];
const PROG_NAMES: [&str; 5] = ["a", "b", "c", "d", "e"];
const AGENT_NAMES: [&str; 5] = ["i", "j", "k", "l", "m"];

fn pool_name(base: &[&str], idx: usize) -> String {
    if idx < base.len() {
        base[idx].to_string()
    } else {
        format!("{}{}", base[0], idx)
    }
}

fn pick(rng: &mut ChaCha8Rng, options: &[(u8, f64)]) -> u8 {
    let total: f64 = options.iter().map(|&(_, w)| w).sum();
    if total <= 0.0 {
        return options[0].0;
    }
    let mut roll = rng.gen::<f64>() * total;
    for &(kind, w) in options {
        roll -= w;
        if roll <= 0.0 {
            return kind;
        }
    }
    options[options.len() - 1].0
}

// constructor tags for weighted choice
const K_ATOM: u8 = 0;
const K_CONST: u8 = 1;
const K_NEG: u8 = 2;
const K_BOX: u8 = 3;
const K_DIAMOND: u8 = 4;
const K_CAP: u8 = 5;
const K_PATOM: u8 = 6;
const K_POMEGA: u8 = 7;
const K_PTEST: u8 = 8;
const K_PARROW: u8 = 9;
const K_PSEQ: u8 = 10;
const K_PCHOICE: u8 = 11;
const K_PSTAR: u8 = 12;

// Size costs: an atom is 1, negation adds 1, a box adds 1 plus its program,
// a sequence and an iteration double their left operand, and Ω costs 3.
fn gen_f(rng: &mut ChaCha8Rng, cfg: &GenConfig, budget: u64, in_arrow: bool) -> FId {
    debug_assert!(budget >= 1);
    let w = &cfg.weights;
    let mut options: Vec<(u8, f64)> = vec![(K_ATOM, w.atom), (K_CONST, w.constant)];
    if budget >= 2 {
        options.push((K_NEG, w.negation));
        if !in_arrow {
            options.push((K_CAP, w.capability));
        }
    }
    if budget >= 3 {
        options.push((K_BOX, w.box_formula));
    }
    if budget >= 5 {
        options.push((K_DIAMOND, w.diamond));
    }
    match pick(rng, &options) {
        K_ATOM => atom(&pool_name(&ATOM_NAMES, rng.gen_range(0..cfg.atom_pool))),
        K_CONST => {
            if rng.gen::<bool>() {
                tt()
            } else {
                ff()
            }
        }
        K_NEG => not(gen_f(rng, cfg, budget - 1, in_arrow)),
        K_CAP => {
            let agent = sym(&pool_name(&AGENT_NAMES, rng.gen_range(0..cfg.agent_pool)));
            cap(agent, gen_p(rng, cfg, budget - 1, in_arrow))
        }
        K_BOX => {
            let pb = rng.gen_range(1..=budget - 2);
            let p = gen_p(rng, cfg, pb, in_arrow);
            boxf(p, gen_f(rng, cfg, budget - 1 - pb, in_arrow))
        }
        K_DIAMOND => {
            let rem = budget - 3;
            let pb = rng.gen_range(1..=rem - 1);
            let p = gen_p(rng, cfg, pb, in_arrow);
            diamond(p, gen_f(rng, cfg, rem - pb, in_arrow))
        }
        _ => unreachable!("formula constructor"),
    }
}

fn gen_p(rng: &mut ChaCha8Rng, cfg: &GenConfig, budget: u64, in_arrow: bool) -> PId {
    debug_assert!(budget >= 1);
    let w = &cfg.weights;
    let mut options: Vec<(u8, f64)> = vec![(K_PATOM, w.atomic_program)];
    if budget >= 2 {
        options.push((K_PTEST, w.test_program));
    }
    if budget >= 3 {
        options.push((K_POMEGA, w.omega_program));
        options.push((K_PARROW, w.arrow_program));
        options.push((K_PCHOICE, w.choice));
        options.push((K_PSTAR, w.iteration));
    }
    if budget >= 4 {
        options.push((K_PSEQ, w.sequence));
    }
    match pick(rng, &options) {
        K_PATOM => aprog(&pool_name(&PROG_NAMES, rng.gen_range(0..cfg.prog_pool))),
        K_POMEGA => omega(),
        K_PTEST => test(gen_f(rng, cfg, budget - 1, in_arrow)),
        // capability statements inside precondition or effect formulas make
        // the capability interpretation of the extracted models
        // self-referential, so the generator keeps them out of arrows
        K_PARROW => {
            let rem = budget - 1;
            let fb = rng.gen_range(1..=rem - 1);
            arrow(gen_f(rng, cfg, fb, true), gen_f(rng, cfg, rem - fb, true))
        }
        K_PSEQ => {
            let rem = budget - 1;
            let ab = rng.gen_range(1..=(rem - 1) / 2);
            seq(
                gen_p(rng, cfg, ab, in_arrow),
                gen_p(rng, cfg, rem - 2 * ab, in_arrow),
            )
        }
        K_PCHOICE => {
            let rem = budget - 1;
            let ab = rng.gen_range(1..=rem - 1);
            choice(
                gen_p(rng, cfg, ab, in_arrow),
                gen_p(rng, cfg, rem - ab, in_arrow),
            )
        }
        K_PSTAR => {
            let ab = rng.gen_range(1..=(budget - 1) / 2);
            star(gen_p(rng, cfg, ab, in_arrow))
        }
        _ => unreachable!("program constructor"),
    }
}

/// Generate one formula, deterministically in `cfg.seed`.
pub fn random_formula(cfg: &GenConfig) -> FId {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    gen_f(&mut rng, cfg, cfg.max_size.max(1), false)
}

/// Generate a deterministic sequence of `n` formulas from one seed.
pub fn random_formulas(cfg: &GenConfig, n: usize) -> Vec<FId> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..n)
        .map(|_| gen_f(&mut rng, cfg, cfg.max_size.max(1), false))
        .collect()
}

// ---------------------------------------------------------------------------
// Bounded structure search.
// ---------------------------------------------------------------------------

type Trans = BTreeMap<PId, BTreeSet<(usize, usize)>>;

struct Searcher {
    roots: Vec<FId>,
    max_states: usize,
    budget: usize,
}

impl Searcher {
    fn tick(&mut self) -> Result<(), OracleError> {
        if self.budget == 0 {
            return Err(OracleError::BudgetExceeded);
        }
        self.budget -= 1;
        Ok(())
    }

    /// All saturations of `seed`: locally consistent supersets where every
    /// alpha/beta member has a reduction set inside the set and every
    /// universal box has its body present (the latter is forced in any
    /// model graph, so adding it eagerly loses no structures).
    fn saturations(&mut self, seed: &FormulaSet) -> Result<Vec<FormulaSet>, OracleError> {
        let mut out: BTreeSet<FormulaSet> = BTreeSet::new();
        let mut visited: BTreeSet<FormulaSet> = BTreeSet::new();
        self.saturate_into(seed.clone(), &mut visited, &mut out)?;
        Ok(out.into_iter().collect())
    }

    fn saturate_into(
        &mut self,
        mut set: FormulaSet,
        visited: &mut BTreeSet<FormulaSet>,
        out: &mut BTreeSet<FormulaSet>,
    ) -> Result<(), OracleError> {
        self.tick()?;
        loop {
            if contradictory(&set) {
                return Ok(());
            }
            let forced: Vec<FId> = set
                .iter()
                .filter_map(|&f| match fview(f) {
                    FView::Box(p, body) if is_omega(p) => {
                        let nb = norm_top(body);
                        (!set.contains(&nb)).then_some(nb)
                    }
                    _ => None,
                })
                .collect();
            if forced.is_empty() {
                break;
            }
            set.extend(forced);
        }
        let snapshot: Vec<FId> = set.iter().copied().collect();
        for f in snapshot {
            if !is_alpha_beta(f) {
                continue;
            }
            let sets = reduction_sets(f).expect("alpha/beta formula reduces");
            if sets.iter().any(|r| red_set_in(r, &set)) {
                continue;
            }
            for r in &sets {
                let mut next = set.clone();
                next.extend(r.iter().map(|&m| norm_top(m)));
                if visited.insert(next.clone()) {
                    self.saturate_into(next, visited, out)?;
                }
            }
            return Ok(());
        }
        out.insert(set);
        Ok(())
    }

    fn run(&mut self) -> Result<Option<Hintikka>, OracleError> {
        let seed: FormulaSet = self.roots.iter().map(|&f| norm_top(f)).collect();
        for s0 in self.saturations(&seed)? {
            let mut states = vec![s0];
            let mut trans = Trans::new();
            if let Some(h) = self.extend(&mut states, &mut trans)? {
                return Ok(Some(h));
            }
        }
        Ok(None)
    }

    /// Resolve the first unmet demand, branching over every way to do so;
    /// with no demands left, validate the candidate.
    fn extend(
        &mut self,
        states: &mut Vec<FormulaSet>,
        trans: &mut Trans,
    ) -> Result<Option<Hintikka>, OracleError> {
        self.tick()?;
        for i in 0..states.len() {
            let label: Vec<FId> = states[i].iter().copied().collect();
            for f in label {
                if let Some((prog, chi)) = atp_diamond_parts(f) {
                    let want = norm_top(not(chi));
                    let met = trans.get(&prog).is_some_and(|row| {
                        row.iter()
                            .any(|&(a, b)| a == i && states[b].contains(&want))
                    });
                    if !met {
                        return self.meet_diamond(states, trans, i, prog, want);
                    }
                } else if let Some((agent, _)) = neg_cap_parts(f) {
                    let mut gamma: Vec<FId> = states[i]
                        .iter()
                        .copied()
                        .filter(|&g| match fview(g) {
                            FView::Cap(ag, p) => {
                                ag == agent && matches!(pview(p), crate::syntax::PView::Arrow(_, _))
                            }
                            _ => false,
                        })
                        .collect();
                    crate::syntax::canon_sort(&mut gamma);
                    let demand: FormulaSet = cap_demand_set(f, &gamma)
                        .expect("label capability denials are well-formed")
                        .into_iter()
                        .collect();
                    let met = states.iter().any(|s| demand.iter().all(|m| s.contains(m)));
                    if !met {
                        return self.meet_denial(states, trans, &demand);
                    }
                }
            }
        }
        Ok(self.validate(states, trans))
    }

    fn meet_diamond(
        &mut self,
        states: &mut Vec<FormulaSet>,
        trans: &mut Trans,
        i: usize,
        prog: PId,
        want: FId,
    ) -> Result<Option<Hintikka>, OracleError> {
        // the successor carries the diamond continuation plus every box body
        // that crosses an edge with this symbol
        let mut seed = FormulaSet::from([want]);
        for &g in states[i].iter() {
            if let FView::Box(p2, body) = fview(g) {
                if !crate::syntax::in_atp_omega(p2) {
                    continue;
                }
                let include = if is_omega(prog) {
                    is_omega(p2)
                } else {
                    is_omega(p2) || p2 == prog
                };
                if include {
                    seed.insert(norm_top(body));
                }
            }
        }
        let h9_ok = |trans: &Trans, j: usize| {
            trans
                .iter()
                .all(|(&p2, row)| p2 == prog || !row.contains(&(i, j)))
        };
        for j in 0..states.len() {
            if seed.iter().all(|m| states[j].contains(m)) && h9_ok(trans, j) {
                trans.entry(prog).or_default().insert((i, j));
                if let Some(h) = self.extend(states, trans)? {
                    return Ok(Some(h));
                }
                trans.get_mut(&prog).expect("row exists").remove(&(i, j));
            }
        }
        if states.len() < self.max_states {
            for sat in self.saturations(&seed)? {
                states.push(sat);
                let j = states.len() - 1;
                trans.entry(prog).or_default().insert((i, j));
                if let Some(h) = self.extend(states, trans)? {
                    return Ok(Some(h));
                }
                trans.get_mut(&prog).expect("row exists").remove(&(i, j));
                states.pop();
            }
        }
        Ok(None)
    }

    fn meet_denial(
        &mut self,
        states: &mut Vec<FormulaSet>,
        trans: &mut Trans,
        demand: &FormulaSet,
    ) -> Result<Option<Hintikka>, OracleError> {
        // no existing state contains the refutation set, so it needs a fresh
        // one (no transition involved: the witness may sit anywhere)
        if states.len() < self.max_states {
            for sat in self.saturations(demand)? {
                states.push(sat);
                if let Some(h) = self.extend(states, trans)? {
                    return Ok(Some(h));
                }
                states.pop();
            }
        }
        Ok(None)
    }

    fn validate(&mut self, states: &[FormulaSet], trans: &Trans) -> Option<Hintikka> {
        let h = Hintikka {
            states: states
                .iter()
                .map(|l| HState {
                    label: l.clone(),
                    origin: None,
                    shadow_of: None,
                })
                .collect(),
            trans: trans.clone(),
            start: 0,
        };
        if check_hintikka(&h).is_err() {
            return None;
        }
        let model = build_model(&h);
        let mut checker = Checker::new(&model);
        for &r in &self.roots {
            if !matches!(checker.holds(norm_top(r), 0), Ok(true)) {
                return None;
            }
        }
        Some(h)
    }
}

/// Exhaustive-within-bounds search for a model graph whose start state
/// carries all of `roots`. A result is verified (structure checks plus a
/// semantic model check) before being returned; `None` means only that no
/// structure exists within the bounds explored, never unsatisfiability.
pub fn bounded_search(
    roots: &[FId],
    max_states: usize,
    budget: usize,
) -> Result<Option<Hintikka>, OracleError> {
    assert!(
        max_states >= 1,
        "the search needs room for at least one state"
    );
    if closure_of_set(roots).is_err() {
        return Err(OracleError::BudgetExceeded);
    }
    let mut s = Searcher {
        roots: roots.to_vec(),
        max_states,
        budget,
    };
    s.run()
}

// ---------------------------------------------------------------------------
// Differential driver.
// ---------------------------------------------------------------------------

/// Tally of one differential run. Violations carry human-readable
/// descriptions; inconclusive counts formulas where a resource bound (solver
/// node cap or search budget) prevented a verdict comparison.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub total: usize,
    pub sat: usize,
    pub unsat: usize,
    pub inconclusive: usize,
    pub violations: Vec<String>,
}

impl Report {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "total": self.total,
            "sat": self.sat,
            "unsat": self.unsat,
            "inconclusive": self.inconclusive,
            "violations": self.violations,
        })
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "differential run: {} formulas, {} sat, {} unsat, {} inconclusive, {} violations",
            self.total,
            self.sat,
            self.unsat,
            self.inconclusive,
            self.violations.len()
        )?;
        for v in &self.violations {
            write!(f, "\n  violation: {v}")?;
        }
        Ok(())
    }
}

const SOLVE_NODE_CAP: usize = 200_000;
const SEARCH_BUDGET: usize = 100_000;

/// Generate `n` formulas and cross-check the solver on each: satisfiable
/// verdicts must survive the full witness pipeline, and unsatisfiable
/// verdicts must leave the bounded search empty-handed.
pub fn differential_run(n: usize, cfg: &GenConfig, max_states: usize) -> Report {
    let mut report = Report {
        total: n,
        ..Report::default()
    };
    for f in random_formulas(cfg, n) {
        let roots = [f];
        let verdict = match solve(
            &roots,
            Config {
                max_nodes: Some(SOLVE_NODE_CAP),
                ..Config::default()
            },
        ) {
            Ok(v) => v,
            Err(_) => {
                report.inconclusive += 1;
                continue;
            }
        };
        match verdict.answer {
            Answer::Sat => {
                report.sat += 1;
                if let Err(e) = verify_sat(&verdict.tableau, &roots, true) {
                    report
                        .violations
                        .push(format!("SAT unverified for {}: {e}", print_f(f)));
                }
            }
            Answer::Unsat => {
                report.unsat += 1;
                match bounded_search(&roots, max_states, SEARCH_BUDGET) {
                    Ok(Some(h)) => report.violations.push(format!(
                        "UNSAT refuted for {}: a {}-state structure exists",
                        print_f(f),
                        h.states.len()
                    )),
                    Ok(None) => {}
                    Err(OracleError::BudgetExceeded) => report.inconclusive += 1,
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse, parse_lines};
    use crate::syntax::size_f;

    #[test]
    fn trivial_searches() {
        let p = atom("p");
        let found = bounded_search(&[p], 1, 10_000).unwrap().unwrap();
        assert_eq!(found.states.len(), 1);
        assert!(found.states[0].label.contains(&p));

        assert!(bounded_search(&[p, not(p)], 3, 10_000).unwrap().is_none());
    }

    #[test]
    fn diamond_forces_a_successor() {
        let f = parse("<a>~p").unwrap();
        let h = bounded_search(&[f], 2, 10_000).unwrap().unwrap();
        assert_eq!(h.states.len(), 2);
        let row = h.trans.get(&aprog("a")).expect("an a-transition exists");
        let &(s1, s2) = row.iter().next().unwrap();
        assert_eq!(s1, h.start);
        assert!(h.states[s2].label.contains(&not(atom("p"))));
    }

    #[test]
    fn search_honours_its_budget() {
        let f = parse("<a><a><a>p").unwrap();
        match bounded_search(&[f], 4, 3) {
            Err(OracleError::BudgetExceeded) => {}
            other => panic!("expected budget exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn generator_is_deterministic_and_size_bounded() {
        let cfg = GenConfig {
            seed: 11,
            ..GenConfig::default()
        };
        assert_eq!(random_formula(&cfg), random_formula(&cfg));
        for seed in 0..200 {
            let cfg = GenConfig {
                seed,
                ..GenConfig::default()
            };
            let f = random_formula(&cfg);
            assert!(
                size_f(f) <= cfg.max_size,
                "seed {seed} produced oversized {}",
                print_f(f)
            );
        }
    }

    #[test]
    fn generator_reaches_every_constructor() {
        let mut saw = [false; 6]; // arrow, star, cap, omega, test, seq
        for f in random_formulas(&GenConfig::default(), 400) {
            let s = print_f(f);
            saw[0] |= s.contains("=>");
            saw[1] |= s.contains('*');
            saw[2] |= s.contains("cap(");
            saw[3] |= s.contains("omega");
            saw[4] |= s.contains("?(");
            saw[5] |= s.contains(';');
        }
        assert_eq!(saw, [true; 6], "arrow/star/cap/omega/test/seq coverage");
    }

    #[test]
    fn capabilities_never_hide_inside_arrows() {
        for f in random_formulas(&GenConfig::default(), 400) {
            fn scan_f(f: FId, in_arrow: bool) {
                match fview(f) {
                    FView::Not(g) => scan_f(g, in_arrow),
                    FView::Box(p, g) => {
                        scan_p(p, in_arrow);
                        scan_f(g, in_arrow);
                    }
                    FView::Cap(_, p) => {
                        assert!(!in_arrow, "capability generated inside an arrow operand");
                        scan_p(p, in_arrow);
                    }
                    _ => {}
                }
            }
            fn scan_p(p: PId, in_arrow: bool) {
                match pview(p) {
                    crate::syntax::PView::Test(g) => scan_f(g, in_arrow),
                    crate::syntax::PView::Arrow(g, h) => {
                        scan_f(g, true);
                        scan_f(h, true);
                    }
                    crate::syntax::PView::Seq(a, b) | crate::syntax::PView::Choice(a, b) => {
                        scan_p(a, in_arrow);
                        scan_p(b, in_arrow);
                    }
                    crate::syntax::PView::Star(a) => scan_p(a, in_arrow),
                    _ => {}
                }
            }
            scan_f(f, false);
        }
    }

    #[test]
    fn empty_run_reports_nothing() {
        let report = differential_run(0, &GenConfig::default(), 3);
        assert_eq!(report.total, 0);
        assert_eq!(report.sat + report.unsat + report.inconclusive, 0);
        assert!(report.violations.is_empty());
    }

    #[test]
    fn small_differential_run_is_clean() {
        let cfg = GenConfig {
            seed: 7,
            max_size: 12,
            ..GenConfig::default()
        };
        let report = differential_run(40, &cfg, 2);
        assert_eq!(report.total, 40);
        assert!(
            report.violations.is_empty(),
            "violations: {:?}",
            report.violations
        );
        assert!(report.sat > 0, "random formulas should include sat cases");
    }

    #[test]
    fn reference_corpus_agrees() {
        let corpus = [
            ("cap(i, (p & q => r)) & ~cap(i, (p => r))", Answer::Unsat),
            ("<(p => r) + a>p\n[(p & q => r)]p", Answer::Sat),
            ("~[(a + b)*]p\n[a*]p", Answer::Sat),
        ];
        let mut sat_verified = 0;
        for (input, expected) in corpus {
            let roots = parse_lines(input).unwrap();
            let verdict = solve(&roots, Config::default()).unwrap();
            assert_eq!(verdict.answer, expected, "verdict for {input}");
            match expected {
                Answer::Sat => {
                    verify_sat(&verdict.tableau, &roots, true).expect("witness pipeline passes");
                    sat_verified += 1;
                }
                Answer::Unsat => {
                    let found = bounded_search(&roots, 3, 50_000).unwrap();
                    assert!(found.is_none(), "no small structure refutes the verdict");
                }
            }
        }
        assert_eq!(sat_verified, 2);
    }
}
