use std::collections::BTreeSet;
use std::time::Duration;

use ddrt_core::checker::check_verdict;
use ddrt_core::fixtures;
use ddrt_core::limits::Limits;
use ddrt_core::prover::{prove, run_criterion, Config, Criterion, Verdict};
use ddrt_core::rewriting::{is_normal_form, Reach, Trs};
use ddrt_core::term::Term;
use ddrt_core::tpdb::{format_trs, parse_trs};
use ddrt_core::trace::trace_json;
use proptest::prelude::*;

fn arb_term(depth: u32, vars: Vec<&'static str>) -> BoxedStrategy<Term> {
    let mut leaves = vec![Just(Term::constant("a")).boxed(), Just(Term::constant("b")).boxed()];
    for v in vars {
        leaves.push(Just(Term::var(v)).boxed());
    }
    let leaf = prop::strategy::Union::new(leaves);
    leaf.prop_recursive(depth, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| Term::app("g", vec![t])),
            (inner.clone(), inner).prop_map(|(s, t)| Term::app("f", vec![s, t])),
        ]
    })
    .boxed()
}

fn arb_rule() -> impl Strategy<Value = (Term, Term)> {
    arb_term(2, vec!["x", "y"]).prop_filter("lhs is a variable", |l| !l.is_var()).prop_flat_map(|l| {
        let vars: Vec<&'static str> = ["x", "y"].into_iter().filter(|v| l.contains_var(v)).collect();
        (Just(l), arb_term(2, vars))
    })
}

fn arb_trs() -> impl Strategy<Value = Trs> {
    prop::collection::vec(arb_rule(), 1..=3).prop_map(|rules| Trs::new(rules).expect("well-formed"))
}

fn ground_terms() -> Vec<Term> {
    let mut out = vec![Term::constant("a"), Term::constant("b")];
    for _ in 0..2 {
        let prev = out.clone();
        for s in &prev {
            out.push(Term::app("g", vec![s.clone()]));
            for t in &prev {
                out.push(Term::app("f", vec![s.clone(), t.clone()]));
            }
        }
        out.sort();
        out.dedup();
        out.truncate(40);
    }
    out
}

fn quick() -> Config {
    Config { timeout: Duration::from_secs(2), node_budget: 5_000, ..Config::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn formatting_round_trips(r in arb_trs()) {
        let again = parse_trs(&format_trs(&r)).unwrap().trs;
        prop_assert_eq!(again, r);
    }

    /// A confluent system never lets a term reach two different normal forms.
    #[test]
    fn yes_verdicts_hold_on_ground_terms(r in arb_trs()) {
        let v = prove(&r, &quick());
        prop_assert_eq!(check_verdict(&r, &v), Ok(()));
        if v.is_yes() {
            for t in ground_terms() {
                // only closed explorations say anything; growing terms are skipped
                let lim = Limits::new(500).with_timeout(Duration::from_millis(100));
                let Ok(reach) = Reach::explore(&r, &t, None, &lim) else { continue };
                let nfs: BTreeSet<&Term> = reach.terms().filter(|u| is_normal_form(&r, u)).collect();
                prop_assert!(nfs.len() <= 1, "{:?} proves {:?} yet {} reaches {:?}", v.answer(), r, t, nfs);
            }
        }
    }
}

#[test]
fn single_criterion_config_matches_direct_call() {
    for (name, r) in fixtures::all() {
        for c in Criterion::ALL {
            let via_prove = prove(&r, &Config::default().only(c));
            let direct = run_criterion(&r, &Config::default(), c);
            assert_eq!(via_prove.answer(), direct.answer(), "{name} {c}");
        }
    }
}

#[test]
fn larger_budgets_keep_every_yes() {
    let big = Config { k: 8, node_budget: 1_000_000, join_cap: 640, ..Config::default() };
    for (name, r) in fixtures::all() {
        for c in Criterion::ALL {
            if run_criterion(&r, &Config::default(), c).is_yes() {
                assert!(run_criterion(&r, &big, c).is_yes(), "{name} {c}");
            }
        }
    }
}

#[test]
fn sequential_and_parallel_runs_agree() {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    for (name, r) in fixtures::all() {
        let seq: Verdict = pool.install(|| prove(&r, &Config::default()));
        let par = prove(&r, &Config::default());
        assert_eq!(trace_json(&r, &seq), trace_json(&r, &par), "{name}");
    }
}

#[test]
fn paper_systems_end_to_end() {
    let cases = [
        ("streams", "YES", Some("rl")),
        ("streams_d", "YES", Some("dd2")),
        ("fgh", "YES", Some("dd1")),
        ("orthogonal_dup", "YES", Some("ortho")),
        ("two_constants", "NO", Some("nc")),
        ("f_aa", "MAYBE", None),
        ("cps_prime", "MAYBE", None),
        ("nonlinear_fx", "MAYBE", None),
    ];
    for (name, answer, criterion) in cases {
        let r = parse_trs(fixtures::source(name).unwrap()).unwrap().trs;
        let v = prove(&r, &Config::default());
        assert_eq!(v.answer(), answer, "{name}");
        let json = trace_json(&r, &v);
        assert_eq!(json["criterion"].as_str(), criterion, "{name}");
    }
}
