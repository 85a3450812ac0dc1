//! The criterion portfolio and the verdicts it produces.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use crate::critical_pairs::{cps, cps_nontrivial, critical_pairs, CriticalPair};
use crate::joinability::{joinable_within, JoinInstance};
use crate::limits::{LimitError, Limits};
use crate::par;
use crate::relative_termination::{
    prove_relative_termination, RelTermConfig, RelTermOutcome, RelTermProblem, RelTermProof,
};
use crate::rewriting::{is_normal_form, split_duplicating, Reach, Step, Trs};
use crate::rule_labeling::{check_rule_labeling, Formula, LevelMap, OverlapConstraint, RuleLabelingOutcome};
use crate::term::Term;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Criterion {
    NonConfluence,
    Orthogonal,
    RuleLabeling,
    KnuthBendix,
    /// Critical pair steps plus duplicating rules, relative to the rest.
    DdL1,
    /// Critical pair steps relative to the system.
    DdL2,
    /// As `DdL2`, leaving out steps of trivial critical pairs.
    DdL2NonTrivial,
}

impl Criterion {
    /// Portfolio order, cheapest first.
    pub const ALL: [Criterion; 7] = [
        Criterion::NonConfluence,
        Criterion::Orthogonal,
        Criterion::RuleLabeling,
        Criterion::KnuthBendix,
        Criterion::DdL1,
        Criterion::DdL2,
        Criterion::DdL2NonTrivial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::NonConfluence => "nc",
            Criterion::Orthogonal => "ortho",
            Criterion::RuleLabeling => "rl",
            Criterion::KnuthBendix => "kb",
            Criterion::DdL1 => "dd1",
            Criterion::DdL2 => "dd2",
            Criterion::DdL2NonTrivial => "dd2x",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Criterion {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Criterion::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| format!("unknown criterion {s:?}"))
    }
}

#[derive(Clone, Debug)]
pub struct Config {
    /// Steps allowed on each side when joining critical pairs.
    pub k: usize,
    pub termination: RelTermConfig,
    /// Terms explored per search before giving up.
    pub node_budget: usize,
    /// Join instances kept per overlap in the rule labeling constraint.
    pub join_cap: usize,
    pub timeout: Duration,
    /// Criteria to run, in order.
    pub criteria: Vec<Criterion>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            k: 4,
            termination: RelTermConfig::default(),
            node_budget: Limits::DEFAULT_NODE_BUDGET,
            join_cap: 64,
            timeout: Duration::from_secs(60),
            criteria: Criterion::ALL.to_vec(),
        }
    }
}

impl Config {
    pub fn only(mut self, c: Criterion) -> Self {
        self.criteria = vec![c];
        self
    }

    fn limits(&self) -> Limits {
        Limits::new(self.node_budget).with_timeout(self.timeout)
    }
}

/// A critical pair with a join of its two sides.
#[derive(Clone, Debug)]
pub struct JoinedPair {
    pub critical_pair: CriticalPair,
    pub join: JoinInstance,
}

#[derive(Clone, Debug)]
pub enum Proof {
    Orthogonal,
    KnuthBendix { termination: RelTermProof, joins: Vec<JoinedPair> },
    RuleLabeling {
        k: usize,
        levels: LevelMap,
        formula: Formula,
        overlaps: Vec<OverlapConstraint>,
        /// For each overlap, the instance satisfied by `levels`.
        chosen: Vec<JoinInstance>,
    },
    /// Joinable critical pairs plus relative termination of `problem`.
    Decreasing { joins: Vec<JoinedPair>, problem: RelTermProblem, termination: RelTermProof },
}

/// Two distinct normal forms reachable from the sides of a critical pair.
#[derive(Clone, Debug)]
pub struct Witness {
    pub critical_pair: CriticalPair,
    pub left_normal_form: Term,
    pub right_normal_form: Term,
    pub left_steps: Vec<Step>,
    pub right_steps: Vec<Step>,
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Yes { criterion: Criterion, proof: Proof },
    No { criterion: Criterion, witness: Witness },
    Maybe { reasons: Vec<(Criterion, String)> },
}

impl Verdict {
    fn maybe(c: Criterion, why: impl Into<String>) -> Verdict {
        Verdict::Maybe { reasons: vec![(c, why.into())] }
    }

    pub fn answer(&self) -> &'static str {
        match self {
            Verdict::Yes { .. } => "YES",
            Verdict::No { .. } => "NO",
            Verdict::Maybe { .. } => "MAYBE",
        }
    }

    pub fn is_yes(&self) -> bool {
        matches!(self, Verdict::Yes { .. })
    }
}

pub fn check_orthogonal(trs: &Trs) -> Verdict {
    let c = Criterion::Orthogonal;
    if !trs.is_left_linear() {
        return Verdict::maybe(c, "not left-linear");
    }
    let n = critical_pairs(trs).len();
    if n > 0 {
        return Verdict::maybe(c, format!("{n} overlaps"));
    }
    Verdict::Yes { criterion: c, proof: Proof::Orthogonal }
}

/// Joins every critical pair within `k` steps per side.
fn join_all(trs: &Trs, k: usize, limits: &Limits) -> Result<Result<Vec<JoinedPair>, String>, LimitError> {
    let cps = critical_pairs(trs);
    let joins = par::try_map(&cps, |cp| joinable_within(trs, &cp.left, &cp.right, k, limits))?;
    let mut out = Vec::with_capacity(cps.len());
    for (cp, j) in cps.into_iter().zip(joins) {
        match j {
            Some(join) => out.push(JoinedPair { critical_pair: cp, join }),
            None => return Ok(Err(format!("critical pair {cp:?} not joinable within {k} steps"))),
        }
    }
    Ok(Ok(out))
}

enum FullJoin {
    Joined(JoinInstance),
    Apart(Box<Witness>),
    Unknown(String),
}

/// Compares everything reachable from both sides of a critical pair, after
/// a cheap attempt to join them within `k` steps.
fn full_join(trs: &Trs, cp: &CriticalPair, k: usize, limits: &Limits) -> Result<FullJoin, LimitError> {
    match joinable_within(trs, &cp.left, &cp.right, k, limits) {
        Ok(Some(j)) => return Ok(FullJoin::Joined(j)),
        Ok(None) | Err(LimitError::NodeBudget(_)) => {}
        Err(e) => return Err(e),
    }
    let explore = |t: &Term| match Reach::explore(trs, t, None, limits) {
        Ok(r) => Ok(Some(r)),
        Err(LimitError::NodeBudget(_)) => Ok(None),
        Err(e) => Err(e),
    };
    let (Some(left), Some(right)) = (explore(&cp.left)?, explore(&cp.right)?) else {
        return Ok(FullJoin::Unknown(format!("reducts of {cp:?} exceed the node budget")));
    };
    let meet = left
        .terms()
        .filter_map(|u| Some((left.depth(u)? + right.depth(u)?, u)))
        .min_by_key(|(d, _)| *d);
    if let Some((_, u)) = meet {
        let left_trace = left.path_to(u).expect("reachable");
        let right_trace = right.path_to(u).expect("reachable");
        return Ok(FullJoin::Joined(JoinInstance {
            left: left_trace.iter().map(|s| s.rule).collect(),
            right: right_trace.iter().map(|s| s.rule).collect(),
            meet: u.clone(),
            left_trace,
            right_trace,
        }));
    }
    let nf = |r: &Reach| r.terms().find(|u| is_normal_form(trs, u)).cloned();
    match (nf(&left), nf(&right)) {
        (Some(u), Some(v)) => Ok(FullJoin::Apart(Box::new(Witness {
            critical_pair: cp.clone(),
            left_steps: left.path_to(&u).expect("reachable"),
            right_steps: right.path_to(&v).expect("reachable"),
            left_normal_form: u,
            right_normal_form: v,
        }))),
        _ => Ok(FullJoin::Unknown(format!("{cp:?} has disjoint reducts without normal forms"))),
    }
}

fn limit_reason(e: LimitError) -> String {
    e.to_string()
}

pub fn check_knuth_bendix(trs: &Trs, cfg: &Config) -> Verdict {
    let c = Criterion::KnuthBendix;
    let limits = cfg.limits();
    let termination = match prove_relative_termination(&RelTermProblem::new(trs.clone(), Trs::empty()), &cfg.termination, &limits) {
        RelTermOutcome::Proved(p) => p,
        RelTermOutcome::Unknown(why) => return Verdict::maybe(c, format!("termination not shown: {why}")),
    };
    let mut joins = Vec::new();
    for cp in critical_pairs(trs) {
        match full_join(trs, &cp, cfg.k, &limits) {
            Ok(FullJoin::Joined(join)) => joins.push(JoinedPair { critical_pair: cp, join }),
            Ok(FullJoin::Apart(w)) => return Verdict::No { criterion: c, witness: *w },
            Ok(FullJoin::Unknown(why)) => return Verdict::maybe(c, why),
            Err(e) => return Verdict::maybe(c, limit_reason(e)),
        }
    }
    Verdict::Yes { criterion: c, proof: Proof::KnuthBendix { termination, joins } }
}

/// The relative termination problem behind a decreasing-diagram criterion.
pub fn decreasing_problem(trs: &Trs, criterion: Criterion) -> RelTermProblem {
    match criterion {
        Criterion::DdL1 => {
            let (dup, nondup) = split_duplicating(trs);
            RelTermProblem::new(cps(trs).union(&dup), nondup)
        }
        Criterion::DdL2 => RelTermProblem::new(cps(trs), trs.clone()),
        Criterion::DdL2NonTrivial => RelTermProblem::new(cps_nontrivial(trs), trs.clone()),
        other => panic!("{other} is not a decreasing-diagram criterion"),
    }
}

fn check_decreasing(trs: &Trs, cfg: &Config, c: Criterion) -> Verdict {
    if !trs.is_left_linear() {
        return Verdict::maybe(c, "not left-linear");
    }
    let limits = cfg.limits();
    let joins = match join_all(trs, cfg.k, &limits) {
        Ok(Ok(j)) => j,
        Ok(Err(why)) => return Verdict::maybe(c, why),
        Err(e) => return Verdict::maybe(c, limit_reason(e)),
    };
    let problem = decreasing_problem(trs, c);
    match prove_relative_termination(&problem, &cfg.termination, &limits) {
        RelTermOutcome::Proved(termination) => {
            Verdict::Yes { criterion: c, proof: Proof::Decreasing { joins, problem, termination } }
        }
        RelTermOutcome::Unknown(why) => Verdict::maybe(c, format!("relative termination not shown: {why}")),
    }
}

pub fn check_dd_l1(trs: &Trs, cfg: &Config) -> Verdict {
    check_decreasing(trs, cfg, Criterion::DdL1)
}

pub fn check_dd_l2(trs: &Trs, cfg: &Config, exclude_trivial: bool) -> Verdict {
    check_decreasing(trs, cfg, if exclude_trivial { Criterion::DdL2NonTrivial } else { Criterion::DdL2 })
}

pub fn check_rule_labeling_verdict(trs: &Trs, cfg: &Config) -> Verdict {
    let c = Criterion::RuleLabeling;
    match check_rule_labeling(trs, cfg.k, cfg.join_cap, &cfg.limits()) {
        Err(e) => Verdict::maybe(c, limit_reason(e)),
        Ok(RuleLabelingOutcome::NotLinear) => Verdict::maybe(c, "not linear"),
        Ok(RuleLabelingOutcome::Unsatisfiable { k }) => Verdict::maybe(c, format!("unsatisfiable at k = {k}")),
        Ok(RuleLabelingOutcome::Solved { levels, formula, overlaps }) => {
            let chosen = overlaps
                .iter()
                .map(|o| {
                    o.instances
                        .iter()
                        .find(|j| o.instance_formula(j).eval(&levels))
                        .expect("a satisfied disjunction has a satisfied instance")
                        .clone()
                })
                .collect();
            Verdict::Yes { criterion: c, proof: Proof::RuleLabeling { k: cfg.k, levels, formula, overlaps, chosen } }
        }
    }
}

/// Looks for a critical pair whose sides have closed, disjoint sets of
/// reducts with a normal form on each side.
pub fn check_nonconfluence(trs: &Trs, cfg: &Config) -> Verdict {
    let c = Criterion::NonConfluence;
    let limits = cfg.limits();
    for cp in critical_pairs(trs) {
        match full_join(trs, &cp, cfg.k, &limits) {
            Ok(FullJoin::Apart(w)) => return Verdict::No { criterion: c, witness: *w },
            Ok(_) => {}
            Err(e) => return Verdict::maybe(c, limit_reason(e)),
        }
    }
    Verdict::maybe(c, "no critical pair with separated normal forms")
}

pub fn run_criterion(trs: &Trs, cfg: &Config, c: Criterion) -> Verdict {
    match c {
        Criterion::NonConfluence => check_nonconfluence(trs, cfg),
        Criterion::Orthogonal => check_orthogonal(trs),
        Criterion::RuleLabeling => check_rule_labeling_verdict(trs, cfg),
        Criterion::KnuthBendix => check_knuth_bendix(trs, cfg),
        Criterion::DdL1 => check_dd_l1(trs, cfg),
        Criterion::DdL2 => check_dd_l2(trs, cfg, false),
        Criterion::DdL2NonTrivial => check_dd_l2(trs, cfg, true),
    }
}

/// Runs the configured criteria in order under one deadline and returns
/// the first definite answer.
pub fn prove(trs: &Trs, cfg: &Config) -> Verdict {
    let limits = cfg.limits();
    let mut reasons = Vec::new();
    for &c in &cfg.criteria {
        let Some(deadline) = limits.deadline else { unreachable!("limits carry the timeout") };
        let left = deadline.saturating_duration_since(std::time::Instant::now());
        if left.is_zero() {
            reasons.push((c, LimitError::Deadline.to_string()));
            continue;
        }
        let sub = Config { timeout: left, ..cfg.clone() };
        match run_criterion(trs, &sub, c) {
            Verdict::Maybe { reasons: r } => reasons.extend(r),
            v => return v,
        }
    }
    Verdict::Maybe { reasons }
}
