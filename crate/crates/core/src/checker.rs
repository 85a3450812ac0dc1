//! Re-checks YES and NO verdicts from their certificates.
//!
//! Nothing here calls the search code that produced a verdict. Rewrite
//! steps are checked by matching and against the one-step reducts, critical
//! pairs by replaying both peak steps, and interpretations by evaluating
//! every rule again.

use std::collections::BTreeSet;

use crate::critical_pairs::{critical_pairs, CriticalPair};
use crate::joinability::JoinInstance;
use crate::matrix::{orient, Orientation};
use crate::prover::{Criterion, JoinedPair, Proof, Verdict, Witness};
use crate::relative_termination::{Closing, RelTermProblem, RelTermProof, RemovalStep};
use crate::rewriting::{classify, one_step_reducts, Step, Trs};
use crate::rule_labeling::{build_phi, Formula};
use crate::term::{canonical_vars, match_term, Position, Term};

pub type CheckResult = Result<(), String>;

fn check_step(trs: &Trs, from: &Term, s: &Step) -> CheckResult {
    let rule = trs.rule(s.rule).ok_or_else(|| format!("no rule {}", s.rule))?;
    let redex = from.subterm_at(&s.pos).map_err(|e| format!("{from} has no position {}: {e}", s.pos))?;
    let sigma = match_term(&rule.lhs, redex).ok_or_else(|| format!("{rule:?} does not match {redex} at {}", s.pos))?;
    let expected = from.replace_at(&s.pos, sigma.apply(&rule.rhs)).map_err(|e| e.to_string())?;
    if expected != s.term {
        return Err(format!("step with {rule:?} at {} gives {expected}, not {}", s.pos, s.term));
    }
    if !one_step_reducts(trs, from).contains(s) {
        return Err(format!("{from} -> {} is missing from the one-step reducts", s.term));
    }
    Ok(())
}

/// Replays a rewrite sequence and returns its last term.
pub fn check_path(trs: &Trs, from: &Term, steps: &[Step]) -> Result<Term, String> {
    let mut cur = from.clone();
    for s in steps {
        check_step(trs, &cur, s)?;
        cur = s.term.clone();
    }
    Ok(cur)
}

fn is_normal(trs: &Trs, t: &Term) -> bool {
    t.function_subterms().iter().all(|(_, u)| trs.rules().iter().all(|r| match_term(&r.lhs, u).is_none()))
}

/// Both sides of the pair are one step away from its source, by the
/// inner rule at the overlap position and by the outer rule at the root.
pub fn check_peak(trs: &Trs, cp: &CriticalPair) -> CheckResult {
    let o = &cp.overlap;
    let inner = Step { rule: o.inner.index, pos: o.pos.clone(), term: cp.left.clone() };
    let outer = Step { rule: o.outer.index, pos: Position::root(), term: cp.right.clone() };
    check_step(trs, &cp.source, &inner)?;
    check_step(trs, &cp.source, &outer)?;
    if cp.source.subterm_at(&o.pos).map_or(true, Term::is_var) {
        return Err(format!("overlap of {cp:?} is at a variable position"));
    }
    Ok(())
}

type PairKey = (usize, usize, Position, Vec<Term>);

fn pair_key(cp: &CriticalPair) -> PairKey {
    let o = &cp.overlap;
    (o.inner.index, o.outer.index, o.pos.clone(), canonical_vars(&[&cp.left, &cp.right]))
}

/// Every critical pair of `trs` appears among `given`, modulo renaming.
fn check_coverage<'a>(trs: &Trs, given: impl Iterator<Item = &'a CriticalPair>) -> CheckResult {
    let have: BTreeSet<PairKey> = given.map(pair_key).collect();
    for cp in critical_pairs(trs) {
        if !have.contains(&pair_key(&cp)) {
            return Err(format!("critical pair {cp:?} is not covered"));
        }
    }
    Ok(())
}

fn check_join(trs: &Trs, s: &Term, t: &Term, j: &JoinInstance) -> CheckResult {
    let labels = |tr: &[Step]| tr.iter().map(|s| s.rule).collect::<Vec<_>>();
    if labels(&j.left_trace) != j.left || labels(&j.right_trace) != j.right {
        return Err("join labels disagree with its steps".into());
    }
    let l = check_path(trs, s, &j.left_trace)?;
    let r = check_path(trs, t, &j.right_trace)?;
    if l != j.meet || r != j.meet {
        return Err(format!("join paths end in {l} and {r}, not {}", j.meet));
    }
    Ok(())
}

fn check_joins(trs: &Trs, joins: &[JoinedPair]) -> CheckResult {
    for jp in joins {
        check_peak(trs, &jp.critical_pair)?;
        check_join(trs, &jp.critical_pair.left, &jp.critical_pair.right, &jp.join)?;
    }
    check_coverage(trs, joins.iter().map(|j| &j.critical_pair))
}

fn check_removal(step: &RemovalStep) -> CheckResult {
    let m = &step.interpretation;
    if !m.is_well_formed() {
        return Err("interpretation is not well formed".into());
    }
    let mut removed = 0;
    for (trs, claimed) in [(&step.problem.strict, &step.removed.strict), (&step.problem.weak, &step.removed.weak)] {
        for r in trs.rules() {
            let o = orient(m, &r.lhs, &r.rhs).map_err(|e| format!("{r:?}: {e}"))?;
            match (o, claimed.contains(&r.index)) {
                (Orientation::Incomparable, _) => return Err(format!("{r:?} is not weakly oriented")),
                (Orientation::Strict, true) | (Orientation::Weak, false) => {}
                (Orientation::Strict, false) => return Err(format!("{r:?} is strict but kept")),
                (Orientation::Weak, true) => return Err(format!("{r:?} is removed but not strict")),
            }
        }
        removed += claimed.len();
    }
    if step.removed.strict.is_empty() {
        return Err(format!("removal step removes no strict rule ({removed} weak)"));
    }
    Ok(())
}

/// Checks a chain of removals starting from `problem` and returns what is left.
fn check_chain(problem: &RelTermProblem, steps: &[RemovalStep]) -> Result<RelTermProblem, String> {
    let mut cur = problem.clone();
    for s in steps {
        if s.problem != cur {
            return Err("removal chain does not continue from the previous problem".into());
        }
        check_removal(s)?;
        cur = RelTermProblem::new(
            cur.strict.filter(|r| !s.removed.strict.contains(&r.index)),
            cur.weak.filter(|r| !s.removed.weak.contains(&r.index)),
        );
    }
    Ok(cur)
}

/// Checks a relative termination certificate. A closing step delegated to
/// an external tool is accepted as an assumption.
pub fn check_termination(problem: &RelTermProblem, proof: &RelTermProof) -> CheckResult {
    let rest = check_chain(problem, &proof.steps)?;
    match &proof.closing {
        Closing::Empty if rest.strict.is_empty() => Ok(()),
        Closing::Empty => Err(format!("{} strict rules remain", rest.strict.len())),
        Closing::Terminating { system, .. } | Closing::External { system, .. } if *system != rest.strict.union(&rest.weak) => {
            Err("closing system is not the union of the remaining rules".into())
        }
        Closing::Terminating { system, steps } => {
            let left = check_chain(&RelTermProblem::new(system.clone(), Trs::empty()), steps)?;
            if left.strict.is_empty() {
                Ok(())
            } else {
                Err(format!("{} rules remain in the termination proof", left.strict.len()))
            }
        }
        Closing::External { .. } => Ok(()),
    }
}

fn canonical_rules<'a>(rules: impl Iterator<Item = (&'a Term, &'a Term)>) -> BTreeSet<Vec<Term>> {
    rules.map(|(l, r)| canonical_vars(&[l, r])).collect()
}

/// The relative termination problem for a decreasing-diagram criterion,
/// rebuilt from the critical peaks.
fn expected_problem(trs: &Trs, c: Criterion) -> (BTreeSet<Vec<Term>>, Trs) {
    let cps = critical_pairs(trs);
    let mut strict: Vec<(&Term, &Term)> = Vec::new();
    for cp in &cps {
        if c == Criterion::DdL2NonTrivial && cp.left == cp.right {
            continue;
        }
        strict.push((&cp.source, &cp.left));
        strict.push((&cp.source, &cp.right));
    }
    let weak = if c == Criterion::DdL1 {
        for r in trs.rules().iter().filter(|r| classify(r).duplicating) {
            strict.push((&r.lhs, &r.rhs));
        }
        trs.filter(|r| !classify(r).duplicating)
    } else {
        trs.clone()
    };
    (canonical_rules(strict.into_iter()), weak)
}

fn check_rule_labeling(trs: &Trs, proof: &Proof) -> CheckResult {
    let Proof::RuleLabeling { levels, formula, overlaps, chosen, .. } = proof else { unreachable!() };
    if !trs.is_linear() {
        return Err("rule labeling needs a linear system".into());
    }
    if overlaps.len() != chosen.len() {
        return Err("one chosen join per overlap expected".into());
    }
    let mut conj = Vec::new();
    for (o, j) in overlaps.iter().zip(chosen) {
        let cp = &o.critical_pair;
        check_peak(trs, cp)?;
        check_join(trs, &cp.left, &cp.right, j)?;
        let (a, b) = (cp.overlap.inner.index, cp.overlap.outer.index);
        let f = Formula::and(vec![build_phi(a, b, &j.left), build_phi(b, a, &j.right)]);
        if !f.eval(levels) {
            return Err(format!("levels do not make the join of {cp:?} decreasing: {f}"));
        }
        conj.push(Formula::or(o.instances.iter().map(|i| Formula::and(vec![build_phi(a, b, &i.left), build_phi(b, a, &i.right)])).collect()));
    }
    check_coverage(trs, overlaps.iter().map(|o| &o.critical_pair))?;
    if Formula::and(conj) != *formula {
        return Err("reported constraint differs from the rebuilt one".into());
    }
    Ok(())
}

fn check_witness(trs: &Trs, w: &Witness) -> CheckResult {
    check_peak(trs, &w.critical_pair)?;
    if !critical_pairs(trs).iter().any(|cp| pair_key(cp) == pair_key(&w.critical_pair)) {
        return Err("witness pair is not a critical pair of the system".into());
    }
    let l = check_path(trs, &w.critical_pair.left, &w.left_steps)?;
    let r = check_path(trs, &w.critical_pair.right, &w.right_steps)?;
    if l != w.left_normal_form || r != w.right_normal_form {
        return Err("witness paths end elsewhere".into());
    }
    if !is_normal(trs, &l) || !is_normal(trs, &r) {
        return Err("witness ends are not normal forms".into());
    }
    if l == r {
        return Err("witness normal forms coincide".into());
    }
    Ok(())
}

/// Checks the certificate of a YES or NO verdict. MAYBE carries nothing to
/// check and is accepted.
pub fn check_verdict(trs: &Trs, v: &Verdict) -> CheckResult {
    match v {
        Verdict::Maybe { .. } => Ok(()),
        Verdict::No { witness, .. } => check_witness(trs, witness),
        Verdict::Yes { criterion, proof } => match proof {
            Proof::Orthogonal => {
                if trs.is_left_linear() && critical_pairs(trs).is_empty() {
                    Ok(())
                } else {
                    Err("system is not orthogonal".into())
                }
            }
            Proof::KnuthBendix { termination, joins } => {
                check_joins(trs, joins)?;
                check_termination(&RelTermProblem::new(trs.clone(), Trs::empty()), termination)
            }
            Proof::RuleLabeling { .. } => check_rule_labeling(trs, proof),
            Proof::Decreasing { joins, problem, termination } => {
                if !trs.is_left_linear() {
                    return Err("decreasing diagrams need a left-linear system".into());
                }
                check_joins(trs, joins)?;
                let (strict, weak) = expected_problem(trs, *criterion);
                let given = canonical_rules(problem.strict.rules().iter().map(|r| (&r.lhs, &r.rhs)));
                if given != strict || problem.weak != weak {
                    return Err("relative termination problem does not match the criterion".into());
                }
                check_termination(problem, termination)
            }
        },
    }
}
