//! Bounded joins of term pairs and the minimal k-join instances used by the
//! rule labeling encoding.

use indexmap::IndexMap;

use crate::limits::{LimitError, Limits};
use crate::rewriting::{one_step_reducts, Reach, Step, Trs};
use crate::term::Term;

/// A join `s ->γ1 .. ->γm meet <-δn .. <-δ1 t`.
///
/// `right` lists labels in the order they are applied starting from `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinInstance {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub meet: Term,
    pub left_trace: Vec<Step>,
    pub right_trace: Vec<Step>,
}

impl JoinInstance {
    fn trivial(t: &Term) -> Self {
        JoinInstance { left: vec![], right: vec![], meet: t.clone(), left_trace: vec![], right_trace: vec![] }
    }

    /// Both label sequences embed into those of `other`.
    pub fn embeds_into(&self, other: &JoinInstance) -> bool {
        embedding_leq(&self.left, &other.left) && embedding_leq(&self.right, &other.right)
    }
}

/// Whether `a` is a (scattered) subsequence of `b`.
pub fn embedding_leq(a: &[usize], b: &[usize]) -> bool {
    let mut it = b.iter();
    a.iter().all(|x| it.any(|y| y == x))
}

/// Some join of `s` and `t` with at most `k` steps on each side, preferring
/// the smallest total number of steps. `None` says nothing about joinability
/// beyond the bound.
pub fn joinable_within(
    trs: &Trs,
    s: &Term,
    t: &Term,
    k: usize,
    limits: &Limits,
) -> Result<Option<JoinInstance>, LimitError> {
    if s == t {
        return Ok(Some(JoinInstance::trivial(s)));
    }
    let from_s = Reach::explore(trs, s, Some(k), limits)?;
    let from_t = Reach::explore(trs, t, Some(k), limits)?;
    let best = from_s
        .terms()
        .filter_map(|u| Some((from_s.depth(u)? + from_t.depth(u)?, u)))
        .min_by_key(|(d, _)| *d);
    Ok(best.map(|(_, u)| {
        let left_trace = from_s.path_to(u).expect("reachable");
        let right_trace = from_t.path_to(u).expect("reachable");
        JoinInstance {
            left: left_trace.iter().map(|st| st.rule).collect(),
            right: right_trace.iter().map(|st| st.rule).collect(),
            meet: u.clone(),
            left_trace,
            right_trace,
        }
    }))
}

/// Every k-join instance of `(s, t)`, one per pair of label sequences.
pub fn all_join_instances(
    trs: &Trs,
    s: &Term,
    t: &Term,
    k: usize,
    limits: &Limits,
) -> Result<Vec<JoinInstance>, LimitError> {
    let left = label_paths(trs, s, k, limits, false)?;
    let right = label_paths(trs, t, k, limits, false)?;
    Ok(meets(&left, &right))
}

/// The k-join instances of `(s, t)` that are minimal under the product of
/// the embedding order, sorted by total length and then by labels.
pub fn join_instances(
    trs: &Trs,
    s: &Term,
    t: &Term,
    k: usize,
    limits: &Limits,
) -> Result<Vec<JoinInstance>, LimitError> {
    let left = label_paths(trs, s, k, limits, true)?;
    let right = label_paths(trs, t, k, limits, true)?;
    let all = meets(&left, &right);
    let mut minimal: Vec<JoinInstance> = all
        .iter()
        .filter(|i| !all.iter().any(|j| j.embeds_into(i) && (j.left != i.left || j.right != i.right)))
        .cloned()
        .collect();
    minimal.sort_by(|a, b| {
        (a.left.len() + a.right.len(), &a.left, &a.right).cmp(&(b.left.len() + b.right.len(), &b.left, &b.right))
    });
    Ok(minimal)
}

struct Path {
    labels: Vec<usize>,
    trace: Vec<Step>,
}

type Paths = IndexMap<Term, Vec<Path>>;

/// Label sequences of length at most `k` from `start`, grouped by end term.
/// With `prune`, a sequence is dropped when a subsequence of it already
/// reaches the same term: each of its extensions is then dominated too.
fn label_paths(trs: &Trs, start: &Term, k: usize, limits: &Limits, prune: bool) -> Result<Paths, LimitError> {
    let mut paths: Paths = IndexMap::new();
    paths.insert(start.clone(), vec![Path { labels: vec![], trace: vec![] }]);
    let mut count = 1;
    let mut frontier: Vec<(Term, usize)> = vec![(start.clone(), 0)];
    for _ in 0..k {
        let mut next = Vec::new();
        for (term, idx) in frontier {
            limits.check_deadline()?;
            let steps = one_step_reducts(trs, &term);
            for step in steps {
                let base = &paths[&term][idx];
                let mut labels = base.labels.clone();
                labels.push(step.rule);
                let known = paths.get(&step.term).map(Vec::as_slice).unwrap_or(&[]);
                let redundant = if prune {
                    known.iter().any(|p| embedding_leq(&p.labels, &labels))
                } else {
                    known.iter().any(|p| p.labels == labels)
                };
                if redundant {
                    continue;
                }
                count += 1;
                limits.check_nodes(count)?;
                let mut trace = base.trace.clone();
                trace.push(step.clone());
                let entry = paths.entry(step.term.clone()).or_default();
                entry.push(Path { labels, trace });
                next.push((step.term, entry.len() - 1));
            }
        }
        frontier = next;
    }
    Ok(paths)
}

fn meets(left: &Paths, right: &Paths) -> Vec<JoinInstance> {
    let mut out: IndexMap<(Vec<usize>, Vec<usize>), JoinInstance> = IndexMap::new();
    for (u, ls) in left {
        let Some(rs) = right.get(u) else { continue };
        for l in ls {
            for r in rs {
                out.entry((l.labels.clone(), r.labels.clone())).or_insert_with(|| JoinInstance {
                    left: l.labels.clone(),
                    right: r.labels.clone(),
                    meet: u.clone(),
                    left_trace: l.trace.clone(),
                    right_trace: r.trace.clone(),
                });
            }
        }
    }
    out.into_values().collect()
}
