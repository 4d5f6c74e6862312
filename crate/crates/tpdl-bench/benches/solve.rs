//! Solver benchmarks: the three reference formula sets plus two scaling
//! families (modal depth and choice width under an iterated eventuality).

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tpdl::parser::parse_lines;
use tpdl::{solve, Config};

fn reference_sets(c: &mut Criterion) {
    let corpus = [
        (
            "capability-refutation",
            "cap(i, (p & q => r)) & ~cap(i, (p => r))",
        ),
        ("arrow-choice-diamond", "<(p => r) + a>p\n[(p & q => r)]p"),
        ("looping-eventuality", "~[(a + b)*]p\n[a*]p"),
    ];
    for (name, input) in corpus {
        let roots = parse_lines(input).expect("benchmark input parses");
        c.bench_function(name, |b| {
            b.iter(|| solve(&roots, Config::default()).expect("solver finishes"))
        });
    }
}

fn modal_depth(c: &mut Criterion) {
    let mut group = c.benchmark_group("diamond-chain");
    for depth in [4usize, 8, 12, 16] {
        let mut input = String::new();
        for _ in 0..depth {
            input.push_str("<a>");
        }
        input.push_str("p\n[a*]q");
        let roots = parse_lines(&input).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(depth), &roots, |b, roots| {
            b.iter(|| solve(roots, Config::default()).expect("solver finishes"))
        });
    }
    group.finish();
}

fn choice_width(c: &mut Criterion) {
    let mut group = c.benchmark_group("iterated-choice");
    for width in [2usize, 3, 4, 5] {
        let programs: Vec<String> = (0..width).map(|k| format!("a{k}")).collect();
        let input = format!("~[({})*]p\n[a0*]p", programs.join(" + "));
        let roots = parse_lines(&input).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(width), &roots, |b, roots| {
            b.iter(|| solve(roots, Config::default()).expect("solver finishes"))
        });
    }
    group.finish();
}

criterion_group!(benches, reference_sets, modal_depth, choice_width);
criterion_main!(benches);
