//! Sequential versus parallel runs of the data-parallel stages.
//!
//! "sequential" installs a one-thread rayon pool, "parallel" uses the
//! default pool. Built without the `parallel` feature both run the same
//! sequential code.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion as Bench};
use ddrt_core::critical_pairs::critical_pairs;
use ddrt_core::fixtures;
use ddrt_core::limits::Limits;
use ddrt_core::prover::{prove, Config};
use ddrt_core::rewriting::Trs;
use ddrt_core::rule_labeling::build_rl;
use ddrt_core::term::Term;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_term(rng: &mut ChaCha8Rng, depth: usize, vars: &[&str]) -> Term {
    if depth == 0 || rng.gen_bool(0.25) {
        if !vars.is_empty() && rng.gen_bool(0.5) {
            return Term::var(vars[rng.gen_range(0..vars.len())]);
        }
        return Term::constant(["a", "b"][rng.gen_range(0..2)]);
    }
    match rng.gen_range(0..3) {
        0 => Term::app("g", vec![random_term(rng, depth - 1, vars)]),
        1 => Term::app("h", vec![random_term(rng, depth - 1, vars)]),
        _ => Term::app("f", vec![random_term(rng, depth - 1, vars), random_term(rng, depth - 1, vars)]),
    }
}

/// A left-linear system with many overlaps.
fn overlapping_system(n: usize) -> Trs {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut rules = Vec::new();
    while rules.len() < n {
        let l = random_term(&mut rng, 3, &["x", "y"]);
        if l.is_var() || l.var_occurrences().values().any(|&k| k > 1) {
            continue;
        }
        let vars: Vec<String> = l.vars().iter().map(|v| v.to_string()).collect();
        let names: Vec<&str> = vars.iter().map(String::as_str).collect();
        rules.push((l, random_term(&mut rng, 2, &names)));
    }
    Trs::new(rules).expect("well-formed")
}

fn modes() -> Vec<(&'static str, rayon::ThreadPool)> {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let all = rayon::ThreadPoolBuilder::new().build().unwrap();
    vec![("sequential", one), ("parallel", all)]
}

fn bench_critical_pairs(c: &mut Bench) {
    let r = overlapping_system(40);
    let mut g = c.benchmark_group("critical_pairs");
    for (mode, pool) in modes() {
        g.bench_function(BenchmarkId::new(mode, r.len()), |b| b.iter(|| pool.install(|| critical_pairs(black_box(&r)))));
    }
    g.finish();
}

fn bench_rule_labeling(c: &mut Bench) {
    let r = fixtures::streams();
    let mut g = c.benchmark_group("rule_labeling_constraint");
    for (mode, pool) in modes() {
        g.bench_function(mode, |b| b.iter(|| pool.install(|| build_rl(black_box(&r), 4, 64, &Limits::default()))));
    }
    g.finish();
}

fn bench_portfolio(c: &mut Bench) {
    let systems = fixtures::all();
    let cfg = Config::default();
    let mut g = c.benchmark_group("fixture_portfolio");
    g.sample_size(10);
    for (mode, pool) in modes() {
        g.bench_function(mode, |b| {
            b.iter(|| pool.install(|| systems.iter().map(|(_, r)| prove(r, &cfg).answer()).collect::<Vec<_>>()))
        });
    }
    g.finish();
}

criterion_group!(benches, bench_critical_pairs, bench_rule_labeling, bench_portfolio);
criterion_main!(benches);
