//! Overlaps, critical pairs and the system of critical pair steps.

use std::collections::HashSet;
use std::fmt;

use crate::par;
use crate::rewriting::{Rule, Trs};
use crate::term::{canonical_vars, unify, Position, Substitution, Term};

/// An overlap `(inner, pos, outer)_mgu`: the left-hand side of `inner`
/// unifies with the subterm of `outer`'s left-hand side at `pos`.
///
/// `inner` is stored renamed apart from `outer`; both keep their labels.
#[derive(Clone, PartialEq, Eq)]
pub struct Overlap {
    pub inner: Rule,
    pub pos: Position,
    pub outer: Rule,
    pub mgu: Substitution,
}

impl Overlap {
    /// The peak's source term `outer.lhs μ`.
    pub fn source(&self) -> Term {
        self.mgu.apply(&self.outer.lhs)
    }

    pub fn critical_pair(&self) -> CriticalPair {
        let source = self.source();
        let left = source
            .replace_at(&self.pos, self.mgu.apply(&self.inner.rhs))
            .expect("overlap position is a function position of the source");
        let right = self.mgu.apply(&self.outer.rhs);
        CriticalPair { left, right, source, overlap: self.clone() }
    }
}

impl fmt::Debug for Overlap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})_{}", self.inner.index, self.pos, self.outer.index, self.mgu)
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct CriticalPair {
    /// `outer.lhs μ [inner.rhs μ]_pos`, the result of the inner step.
    pub left: Term,
    /// `outer.rhs μ`, the result of the outer step.
    pub right: Term,
    pub source: Term,
    pub overlap: Overlap,
}

impl CriticalPair {
    pub fn is_trivial(&self) -> bool {
        self.left == self.right
    }
}

impl fmt::Debug for CriticalPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <- {} -> {}", self.left, self.source, self.right)
    }
}

/// All overlaps of `trs`, ordered by (inner label, outer label, position).
pub fn overlaps(trs: &Trs) -> Vec<Overlap> {
    let pairs: Vec<(&Rule, &Rule)> =
        trs.rules().iter().flat_map(|a| trs.rules().iter().map(move |b| (a, b))).collect();
    par::map(&pairs, |(inner, outer)| overlaps_between(inner, outer)).into_iter().flatten().collect()
}

fn overlaps_between(inner: &Rule, outer: &Rule) -> Vec<Overlap> {
    let renamed = inner.rename_apart(&outer.vars());
    let root_excluded = inner.is_variant_of(outer);
    let mut out = Vec::new();
    for (pos, sub) in outer.lhs.function_subterms() {
        if pos.is_root() && root_excluded {
            continue;
        }
        if let Some(mgu) = unify(&renamed.lhs, sub) {
            out.push(Overlap { inner: renamed.clone(), pos, outer: outer.clone(), mgu });
        }
    }
    out
}

/// One critical pair per overlap, in overlap order.
pub fn critical_pairs(trs: &Trs) -> Vec<CriticalPair> {
    overlaps(trs).iter().map(Overlap::critical_pair).collect()
}

/// The critical pair steps: for every overlap, both `source -> left` and
/// `source -> right`, deduplicated up to variable renaming and labelled from
/// 0 in (outer label, position, inner label) order.
pub fn cps(trs: &Trs) -> Trs {
    steps_of(critical_pairs(trs))
}

/// [`cps`] without the steps of overlaps whose critical pair is trivial.
pub fn cps_nontrivial(trs: &Trs) -> Trs {
    steps_of(critical_pairs(trs).into_iter().filter(|cp| !cp.is_trivial()).collect())
}

fn steps_of(mut cps: Vec<CriticalPair>) -> Trs {
    cps.sort_by(|a, b| {
        let key = |c: &CriticalPair| (c.overlap.outer.index, c.overlap.pos.clone(), c.overlap.inner.index);
        key(a).cmp(&key(b))
    });
    let mut seen: HashSet<Vec<Term>> = HashSet::new();
    let mut rules = Vec::new();
    for cp in cps {
        for rhs in [cp.left, cp.right] {
            if seen.insert(canonical_vars(&[&cp.source, &rhs])) {
                rules.push((cp.source.clone(), rhs));
            }
        }
    }
    Trs::new(rules).expect("critical pair steps are instances of rules")
}
