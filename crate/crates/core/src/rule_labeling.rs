//! Precedence constraints from rule-labelled joins, and a complete solver
//! over level maps.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::critical_pairs::{critical_pairs, CriticalPair};
use crate::joinability::{join_instances, JoinInstance};
use crate::limits::{LimitError, Limits};
use crate::par;
use crate::rewriting::Trs;

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    And(Vec<Formula>),
    Or(Vec<Formula>),
    /// Rule `a` is strictly above rule `b`.
    Gt(usize, usize),
    /// Rule `a` is rule `b` or strictly above it.
    Geq(usize, usize),
}

/// Rule label to level; a larger level is a larger label.
pub type LevelMap = BTreeMap<usize, usize>;

impl Formula {
    /// Conjunction; `True` parts are dropped and a `False` part absorbs.
    pub fn and(parts: Vec<Formula>) -> Formula {
        if parts.contains(&Formula::False) {
            return Formula::False;
        }
        let mut parts: Vec<Formula> = parts.into_iter().filter(|p| *p != Formula::True).collect();
        match parts.len() {
            0 => Formula::True,
            1 => parts.pop().expect("one element"),
            _ => Formula::And(parts),
        }
    }

    /// Disjunction; `False` parts are dropped and a `True` part absorbs.
    pub fn or(parts: Vec<Formula>) -> Formula {
        if parts.contains(&Formula::True) {
            return Formula::True;
        }
        let mut parts: Vec<Formula> = parts.into_iter().filter(|p| *p != Formula::False).collect();
        match parts.len() {
            0 => Formula::False,
            1 => parts.pop().expect("one element"),
            _ => Formula::Or(parts),
        }
    }

    /// Rule labels occurring in atoms.
    pub fn rules(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |a, b| {
            out.insert(a);
            out.insert(b);
        });
        out
    }

    fn visit_atoms(&self, f: &mut impl FnMut(usize, usize)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::And(xs) | Formula::Or(xs) => xs.iter().for_each(|x| x.visit_atoms(f)),
            Formula::Gt(a, b) | Formula::Geq(a, b) => f(*a, *b),
        }
    }

    pub fn eval(&self, levels: &LevelMap) -> bool {
        self.eval_partial(&|r| levels.get(&r).copied()).expect("every rule has a level")
    }

    /// Three-valued evaluation: `None` when the answer depends on rules
    /// without a level yet.
    fn eval_partial(&self, level: &impl Fn(usize) -> Option<usize>) -> Option<bool> {
        match self {
            Formula::True => Some(true),
            Formula::False => Some(false),
            Formula::Gt(a, b) => {
                if a == b {
                    return Some(false);
                }
                Some(level(*a)? > level(*b)?)
            }
            Formula::Geq(a, b) => {
                if a == b {
                    return Some(true);
                }
                Some(level(*a)? > level(*b)?)
            }
            Formula::And(xs) => {
                let mut unknown = false;
                for x in xs {
                    match x.eval_partial(level) {
                        Some(false) => return Some(false),
                        None => unknown = true,
                        Some(true) => {}
                    }
                }
                if unknown {
                    None
                } else {
                    Some(true)
                }
            }
            Formula::Or(xs) => {
                let mut unknown = false;
                for x in xs {
                    match x.eval_partial(level) {
                        Some(true) => return Some(true),
                        None => unknown = true,
                        Some(false) => {}
                    }
                }
                if unknown {
                    None
                } else {
                    Some(false)
                }
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, xs: &[Formula], op: &str| -> fmt::Result {
            write!(f, "(")?;
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    write!(f, " {op} ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")
        };
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::And(xs) => join(f, xs, "&"),
            Formula::Or(xs) => join(f, xs, "|"),
            Formula::Gt(a, b) => write!(f, "{a}>{b}"),
            Formula::Geq(a, b) => write!(f, "{a}>={b}"),
        }
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The constraint that the steps `gammas`, closing a peak whose own steps
/// are labelled `alpha` (this side) and `beta` (other side), stay
/// decreasing: a prefix below `alpha`, at most one step not above `beta`
/// (where it may equal `beta`), then steps below `alpha` or `beta`.
pub fn build_phi(alpha: usize, beta: usize, gammas: &[usize]) -> Formula {
    let n = gammas.len();
    let disjuncts = (0..=n)
        .map(|i| {
            let mut conj: Vec<Formula> = gammas[..i].iter().map(|&g| Formula::Gt(alpha, g)).collect();
            if i < n {
                conj.push(Formula::Geq(beta, gammas[i]));
                for &g in &gammas[i + 1..] {
                    conj.push(Formula::or(vec![Formula::Gt(alpha, g), Formula::Gt(beta, g)]));
                }
            }
            Formula::and(conj)
        })
        .collect();
    Formula::or(disjuncts)
}

/// One overlap's share of the constraint.
#[derive(Clone, Debug)]
pub struct OverlapConstraint {
    pub critical_pair: CriticalPair,
    pub instances: Vec<JoinInstance>,
    pub formula: Formula,
}

impl OverlapConstraint {
    pub fn inner(&self) -> usize {
        self.critical_pair.overlap.inner.index
    }

    pub fn outer(&self) -> usize {
        self.critical_pair.overlap.outer.index
    }

    /// The constraint contributed by one join instance.
    pub fn instance_formula(&self, j: &JoinInstance) -> Formula {
        Formula::and(vec![build_phi(self.inner(), self.outer(), &j.left), build_phi(self.outer(), self.inner(), &j.right)])
    }
}

/// The conjunction over all overlaps of the disjunction over their minimal
/// `k`-join instances (at most `cap` per overlap).
pub fn build_rl(trs: &Trs, k: usize, cap: usize, limits: &Limits) -> Result<(Formula, Vec<OverlapConstraint>), LimitError> {
    let cps = critical_pairs(trs);
    let parts = par::try_map(&cps, |cp| {
        let mut instances = join_instances(trs, &cp.left, &cp.right, k, limits)?;
        instances.truncate(cap);
        let mut oc = OverlapConstraint { critical_pair: cp.clone(), instances, formula: Formula::False };
        oc.formula = Formula::or(oc.instances.iter().map(|j| oc.instance_formula(j)).collect());
        Ok(oc)
    })?;
    let formula = Formula::and(parts.iter().map(|p| p.formula.clone()).collect());
    Ok((formula, parts))
}

/// Finds a level map satisfying `f`, with every rule in `0..n_rules` given a
/// level. The search is complete: rules mentioned in `f` range over levels
/// `0..m` for `m` mentioned rules, which is enough to linearise any strict
/// order. Maps are tried in lexicographic order over the mentioned rules.
pub fn solve_precedence(f: &Formula, n_rules: usize, limits: &Limits) -> Result<Option<LevelMap>, LimitError> {
    let rules: Vec<usize> = f.rules().into_iter().collect();
    let m = rules.len();
    let mut levels: Vec<Option<usize>> = vec![None; m];
    let slot: BTreeMap<usize, usize> = rules.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let mut visited = 0usize;
    let found = search(f, &slot, &mut levels, 0, m, limits, &mut visited)?;
    Ok(found.then(|| {
        let mut map: LevelMap = (0..n_rules).map(|r| (r, 0)).collect();
        for (i, &r) in rules.iter().enumerate() {
            map.insert(r, levels[i].expect("assigned"));
        }
        map
    }))
}

fn search(
    f: &Formula,
    slot: &BTreeMap<usize, usize>,
    levels: &mut Vec<Option<usize>>,
    next: usize,
    m: usize,
    limits: &Limits,
    visited: &mut usize,
) -> Result<bool, LimitError> {
    *visited += 1;
    if (*visited).is_multiple_of(1024) {
        limits.check_deadline()?;
    }
    if let Some(v) = f.eval_partial(&|r| levels[slot[&r]]) {
        if v {
            // the remaining rules do not matter any more
            for l in &mut levels[next..] {
                *l = Some(0);
            }
        }
        return Ok(v);
    }
    for lv in 0..m {
        levels[next] = Some(lv);
        if search(f, slot, levels, next + 1, m, limits, visited)? {
            return Ok(true);
        }
    }
    levels[next] = None;
    Ok(false)
}

#[derive(Clone, Debug)]
pub enum RuleLabelingOutcome {
    NotLinear,
    Unsatisfiable { k: usize },
    Solved { levels: LevelMap, formula: Formula, overlaps: Vec<OverlapConstraint> },
}

/// Decides the rule labeling criterion at bound `k` for linear systems.
pub fn check_rule_labeling(trs: &Trs, k: usize, cap: usize, limits: &Limits) -> Result<RuleLabelingOutcome, LimitError> {
    if !trs.is_linear() {
        return Ok(RuleLabelingOutcome::NotLinear);
    }
    let (formula, overlaps) = build_rl(trs, k, cap, limits)?;
    let n = trs.rules().iter().map(|r| r.index + 1).max().unwrap_or(0);
    Ok(match solve_precedence(&formula, n, limits)? {
        Some(levels) => RuleLabelingOutcome::Solved { levels, formula, overlaps },
        None => RuleLabelingOutcome::Unsatisfiable { k },
    })
}
