//! Rules, rewrite systems, the one-step rewrite relation, bounded
//! reachability and complete developments (multisteps).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use indexmap::{IndexMap, IndexSet};
use thiserror::Error;

use crate::limits::{LimitError, Limits};
use crate::term::{match_term, Name, Position, Substitution, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrsError {
    #[error("rule {} (index {rule}): left-hand side is a variable", rule + 1)]
    VariableLhs { rule: usize },
    #[error("rule {} (index {rule}): variable {var} occurs only on the right-hand side", rule + 1)]
    ExtraVariable { rule: usize, var: String },
    #[error("rule {} (index {rule}): symbol {symbol} used with arity {found}, earlier with {expected}", rule + 1)]
    ArityClash { rule: usize, symbol: String, expected: usize, found: usize },
    #[error("rule index {0} used twice")]
    DuplicateIndex(usize),
}

/// A rewrite rule `lhs -> rhs` carrying a stable label.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub index: usize,
    pub lhs: Term,
    pub rhs: Term,
}

impl Rule {
    pub fn new(index: usize, lhs: Term, rhs: Term) -> Rule {
        Rule { index, lhs, rhs }
    }

    pub fn vars(&self) -> BTreeSet<Name> {
        let mut v = self.lhs.vars();
        v.extend(self.rhs.vars());
        v
    }

    fn check(&self) -> Result<(), TrsError> {
        if self.lhs.is_var() {
            return Err(TrsError::VariableLhs { rule: self.index });
        }
        let lv = self.lhs.vars();
        if let Some(x) = self.rhs.vars().into_iter().find(|x| !lv.contains(x)) {
            return Err(TrsError::ExtraVariable { rule: self.index, var: x.to_string() });
        }
        Ok(())
    }

    /// A variant of this rule whose variables avoid `taken`. Variables that
    /// are already fresh keep their names; the others get primes appended.
    pub fn rename_apart(&self, taken: &BTreeSet<Name>) -> Rule {
        let own = self.vars();
        let mut used: BTreeSet<Name> = taken.union(&own).cloned().collect();
        let mut map: BTreeMap<Name, Name> = BTreeMap::new();
        for x in self.lhs.vars_ordered() {
            if !taken.contains(&x) {
                map.insert(x.clone(), x);
                continue;
            }
            let mut candidate = format!("{x}'");
            while used.contains(candidate.as_str()) {
                candidate.push('\'');
            }
            let fresh: Name = Arc::from(candidate.as_str());
            used.insert(fresh.clone());
            map.insert(x, fresh);
        }
        let rename = |x: &Name| map.get(x).cloned().unwrap_or_else(|| x.clone());
        Rule { index: self.index, lhs: self.lhs.map_vars(&rename), rhs: self.rhs.map_vars(&rename) }
    }

    /// Whether the two rules are equal up to a bijective variable renaming.
    pub fn is_variant_of(&self, other: &Rule) -> bool {
        let pair = |r: &Rule| Term::app("→", vec![r.lhs.clone(), r.rhs.clone()]);
        let (a, b) = (pair(self), pair(other));
        let (Some(s), Some(t)) = (match_term(&a, &b), match_term(&b, &a)) else {
            return false;
        };
        s.iter().all(|(_, t)| t.is_var()) && t.iter().all(|(_, u)| u.is_var())
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)
    }
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.index, self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuleClass {
    pub left_linear: bool,
    pub right_linear: bool,
    pub duplicating: bool,
}

impl RuleClass {
    pub fn linear(&self) -> bool {
        self.left_linear && self.right_linear
    }
}

pub fn classify(r: &Rule) -> RuleClass {
    let lo = r.lhs.var_occurrences();
    let ro = r.rhs.var_occurrences();
    RuleClass {
        left_linear: lo.values().all(|&n| n <= 1),
        right_linear: ro.values().all(|&n| n <= 1),
        duplicating: ro.iter().any(|(x, &n)| n > lo.get(x).copied().unwrap_or(0)),
    }
}

/// A term rewrite system: labelled rules and the derived signature.
///
/// Labels are distinct; a parsed system uses `0..n`, and subsystems keep
/// the labels of the system they were carved from.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Trs {
    rules: Vec<Rule>,
    signature: BTreeMap<Name, usize>,
}

impl Trs {
    /// Builds a system from `(lhs, rhs)` pairs labelled `0..n`.
    pub fn new(rules: impl IntoIterator<Item = (Term, Term)>) -> Result<Trs, TrsError> {
        Trs::from_rules(rules.into_iter().enumerate().map(|(i, (l, r))| Rule::new(i, l, r)).collect())
    }

    pub fn from_rules(rules: Vec<Rule>) -> Result<Trs, TrsError> {
        let mut signature = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for r in &rules {
            if !seen.insert(r.index) {
                return Err(TrsError::DuplicateIndex(r.index));
            }
            r.check()?;
            for side in [&r.lhs, &r.rhs] {
                side.collect_symbols(&mut signature).map_err(|(f, expected, found)| TrsError::ArityClash {
                    rule: r.index,
                    symbol: f.to_string(),
                    expected,
                    found,
                })?;
            }
        }
        Ok(Trs { rules, signature })
    }

    pub fn empty() -> Trs {
        Trs::default()
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn signature(&self) -> &BTreeMap<Name, usize> {
        &self.signature
    }

    pub fn rule(&self, index: usize) -> Option<&Rule> {
        self.rules.iter().find(|r| r.index == index)
    }

    pub fn is_left_linear(&self) -> bool {
        self.rules.iter().all(|r| classify(r).left_linear)
    }

    pub fn is_linear(&self) -> bool {
        self.rules.iter().all(|r| classify(r).linear())
    }

    /// Keeps the rules satisfying `keep`, labels unchanged.
    pub fn filter(&self, keep: impl Fn(&Rule) -> bool) -> Trs {
        let rules: Vec<Rule> = self.rules.iter().filter(|r| keep(r)).cloned().collect();
        Trs::from_rules(rules).expect("subsystem of a well-formed system")
    }

    /// Concatenation, relabelling the result `0..n`.
    pub fn union(&self, other: &Trs) -> Trs {
        Trs::new(self.rules.iter().chain(other.rules.iter()).map(|r| (r.lhs.clone(), r.rhs.clone())))
            .expect("union of compatible systems")
    }
}

impl fmt::Debug for Trs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rules.iter()).finish()
    }
}

/// Partitions `R` into duplicating and non-duplicating rules, labels kept.
pub fn split_duplicating(trs: &Trs) -> (Trs, Trs) {
    (trs.filter(|r| classify(r).duplicating), trs.filter(|r| !classify(r).duplicating))
}

/// One rewrite step: the rule label, the redex position and the result.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Step {
    pub rule: usize,
    pub pos: Position,
    pub term: Term,
}

/// All one-step reducts, outermost-leftmost positions first and rules in
/// system order within a position.
pub fn one_step_reducts(trs: &Trs, t: &Term) -> Vec<Step> {
    let mut out = Vec::new();
    for (pos, sub) in t.function_subterms() {
        for r in trs.rules() {
            if !same_root(&r.lhs, sub) {
                continue;
            }
            if let Some(sigma) = match_term(&r.lhs, sub) {
                let term = t.replace_at(&pos, sigma.apply(&r.rhs)).expect("position taken from the term");
                out.push(Step { rule: r.index, pos: pos.clone(), term });
            }
        }
    }
    out
}

pub fn is_normal_form(trs: &Trs, t: &Term) -> bool {
    t.function_subterms()
        .iter()
        .all(|(_, sub)| trs.rules().iter().all(|r| !same_root(&r.lhs, sub) || match_term(&r.lhs, sub).is_none()))
}

fn same_root(l: &Term, t: &Term) -> bool {
    match (l, t) {
        (Term::App(f, xs), Term::App(g, ys)) => xs.len() == ys.len() && (Arc::ptr_eq(f, g) || f == g),
        _ => false,
    }
}

#[derive(Debug, Clone)]
struct Node {
    depth: usize,
    parent: Option<(usize, usize, Position)>,
}

/// Breadth-first exploration of the terms reachable from a start term.
#[derive(Debug, Clone)]
pub struct Reach {
    nodes: IndexMap<Term, Node>,
    closed: bool,
}

impl Reach {
    /// Explores from `start` up to `max_depth` steps (unbounded when `None`).
    /// Fails when more than `limits.node_budget` distinct terms are found.
    pub fn explore(trs: &Trs, start: &Term, max_depth: Option<usize>, limits: &Limits) -> Result<Reach, LimitError> {
        let mut nodes: IndexMap<Term, Node> = IndexMap::new();
        nodes.insert(start.clone(), Node { depth: 0, parent: None });
        let mut closed = true;
        let mut next = 0;
        while next < nodes.len() {
            limits.check_deadline()?;
            let (t, node) = nodes.get_index(next).expect("index in range");
            let depth = node.depth;
            if max_depth.is_some_and(|k| depth >= k) {
                if !one_step_reducts(trs, t).is_empty() {
                    closed = false;
                }
                next += 1;
                continue;
            }
            let t = t.clone();
            for step in one_step_reducts(trs, &t) {
                if !nodes.contains_key(&step.term) {
                    limits.check_nodes(nodes.len() + 1)?;
                    nodes.insert(step.term, Node { depth: depth + 1, parent: Some((next, step.rule, step.pos)) });
                }
            }
            next += 1;
        }
        Ok(Reach { nodes, closed })
    }

    /// True when no reachable term was cut off by the depth bound.
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, t: &Term) -> bool {
        self.nodes.contains_key(t)
    }

    pub fn depth(&self, t: &Term) -> Option<usize> {
        self.nodes.get(t).map(|n| n.depth)
    }

    /// Reachable terms in discovery order.
    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.nodes.keys()
    }

    /// A shortest rewrite sequence from the start term to `t`.
    pub fn path_to(&self, t: &Term) -> Option<Vec<Step>> {
        let mut idx = self.nodes.get_index_of(t)?;
        let mut steps = Vec::new();
        while let Some((parent, rule, pos)) = &self.nodes[idx].parent {
            let term = self.nodes.get_index(idx).expect("index in range").0.clone();
            steps.push(Step { rule: *rule, pos: pos.clone(), term });
            idx = *parent;
        }
        steps.reverse();
        Some(steps)
    }
}

/// Every term reachable from `t` in at most `k` steps, `t` included.
pub fn reducts_within(trs: &Trs, t: &Term, k: usize, limits: &Limits) -> Result<IndexSet<Term>, LimitError> {
    Ok(Reach::explore(trs, t, Some(k), limits)?.nodes.into_keys().collect())
}

/// Checks that `steps` is a valid rewrite sequence starting at `from`.
pub fn replay(trs: &Trs, from: &Term, steps: &[Step]) -> bool {
    let mut cur = from.clone();
    for s in steps {
        if !one_step_reducts(trs, &cur).iter().any(|r| r == s) {
            return false;
        }
        cur = s.term.clone();
    }
    true
}

/// The complete-development reducts `{u | t ○→ u}`.
///
/// Variables develop to themselves, developments are closed under
/// congruence, and `lσ ○→ rτ` whenever `σ ○→ τ` pointwise.
pub fn multistep_reducts(trs: &Trs, t: &Term, limits: &Limits) -> Result<IndexSet<Term>, LimitError> {
    let mut dev = Developments { trs, limits, memo: HashMap::new(), produced: 0 };
    Ok(dev.reducts(t)?.iter().cloned().collect())
}

struct Developments<'a> {
    trs: &'a Trs,
    limits: &'a Limits,
    memo: HashMap<Term, Arc<Vec<Term>>>,
    produced: usize,
}

impl Developments<'_> {
    fn reducts(&mut self, t: &Term) -> Result<Arc<Vec<Term>>, LimitError> {
        if let Some(hit) = self.memo.get(t) {
            return Ok(hit.clone());
        }
        let mut out: IndexSet<Term> = IndexSet::new();
        match t {
            Term::Var(_) => {
                out.insert(t.clone());
            }
            Term::App(f, args) => {
                let sets = args.iter().map(|a| self.reducts(a)).collect::<Result<Vec<_>, _>>()?;
                for combo in product(&sets) {
                    self.bump()?;
                    out.insert(Term::App(f.clone(), combo));
                }
                for r in self.trs.rules() {
                    let Some(sigma) = match_term(&r.lhs, t) else { continue };
                    let xs = r.rhs.vars_ordered();
                    let choices = xs
                        .iter()
                        .map(|x| self.reducts(&sigma.apply(&Term::Var(x.clone()))))
                        .collect::<Result<Vec<_>, _>>()?;
                    for combo in product(&choices) {
                        self.bump()?;
                        let mut tau = Substitution::new();
                        for (x, u) in xs.iter().zip(combo) {
                            tau.insert(x.clone(), u);
                        }
                        out.insert(tau.apply(&r.rhs));
                    }
                }
            }
        }
        let out = Arc::new(out.into_iter().collect::<Vec<_>>());
        self.memo.insert(t.clone(), out.clone());
        Ok(out)
    }

    fn bump(&mut self) -> Result<(), LimitError> {
        self.produced += 1;
        self.limits.check_nodes(self.produced)
    }
}

/// Cartesian product of the candidate lists, first list varying slowest.
fn product(sets: &[Arc<Vec<Term>>]) -> Vec<Vec<Term>> {
    let mut acc: Vec<Vec<Term>> = vec![Vec::new()];
    for s in sets {
        let mut next = Vec::with_capacity(acc.len() * s.len());
        for prefix in &acc {
            for u in s.iter() {
                let mut v = prefix.clone();
                v.push(u.clone());
                next.push(v);
            }
        }
        acc = next;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::tpdb::{parse_term, parse_trs};

    fn t(s: &str) -> Term {
        parse_term(s, &["x", "y", "z"]).unwrap()
    }

    fn rule(l: &str, r: &str) -> Rule {
        Rule::new(0, t(l), t(r))
    }

    #[test]
    fn classification() {
        assert_eq!(
            classify(&rule("f(x)", "g(x,x)")),
            RuleClass { left_linear: true, right_linear: false, duplicating: true }
        );
        assert_eq!(
            classify(&rule("a", "b")),
            RuleClass { left_linear: true, right_linear: true, duplicating: false }
        );
        assert_eq!(
            classify(&rule("f(x,x)", "a")),
            RuleClass { left_linear: false, right_linear: true, duplicating: false }
        );
    }

    #[test]
    fn splitting_duplicating_rules() {
        let r = fixtures::streams_with_d();
        let (d, nd) = split_duplicating(&r);
        assert_eq!(d.len(), 1);
        assert_eq!(d.rules()[0].index, 5);
        assert_eq!(d.rules()[0].lhs, t("d(:(x,y))"));
        assert_eq!(nd.len(), 5);
        assert!(nd.rules().iter().all(|r| r.index != 5));

        let ground = parse_trs("(RULES a -> b b -> c)").unwrap().trs;
        let (d, nd) = split_duplicating(&ground);
        assert!(d.is_empty());
        assert_eq!(nd, ground);

        let (d, nd) = split_duplicating(&fixtures::fgh());
        assert_eq!(d.rules().iter().map(|r| r.to_string()).collect::<Vec<_>>(), vec!["f(g(x)) -> f(h(x,x))"]);
        assert_eq!(nd.len(), 2);
    }

    #[test]
    fn well_formedness() {
        assert_eq!(Trs::new([(t("x"), t("a"))]), Err(TrsError::VariableLhs { rule: 0 }));
        assert!(matches!(Trs::new([(t("f(x)"), t("y"))]), Err(TrsError::ExtraVariable { .. })));
        assert!(matches!(Trs::new([(t("f(x)"), t("f(x,x)"))]), Err(TrsError::ArityClash { .. })));
    }

    #[test]
    fn renaming_apart() {
        let r = rule("f(x)", "g(x,x)");
        let taken: BTreeSet<Name> = [Arc::from("x")].into_iter().collect();
        let r2 = r.rename_apart(&taken);
        assert!(r2.vars().is_disjoint(&taken));
        assert!(r2.is_variant_of(&r));
        assert_eq!(r2.to_string(), "f(x') -> g(x',x')");

        let ground = rule("a", "b");
        assert_eq!(ground.rename_apart(&taken), ground);

        let r = rule("f(x,y)", "x");
        let r2 = r.rename_apart(&taken);
        let lv = r2.lhs.vars();
        assert_eq!(lv.len(), 2);
        assert!(lv.is_disjoint(&taken));
        assert!(r2.is_variant_of(&r));
    }

    #[test]
    fn variants() {
        assert!(rule("f(x,y)", "x").is_variant_of(&rule("f(y,x)", "y")));
        assert!(!rule("f(x,y)", "x").is_variant_of(&rule("f(x,y)", "y")));
        assert!(!rule("f(x,x)", "x").is_variant_of(&rule("f(x,y)", "x")));
    }

    #[test]
    fn one_step_on_streams() {
        let r = fixtures::streams();
        let steps = one_step_reducts(&r, &t("tl(inc(nat))"));
        assert!(steps.contains(&Step {
            rule: 0,
            pos: Position(vec![1, 1]),
            term: t("tl(inc(:(0,inc(nat))))"),
        }));
        assert!(one_step_reducts(&r, &t("x")).is_empty());
    }

    #[test]
    fn one_step_count_on_non_right_linear_example() {
        let r = fixtures::f_aa();
        let steps = one_step_reducts(&r, &t("f(a,a)"));
        let got: Vec<(usize, String)> = steps.iter().map(|s| (s.rule, s.pos.to_string())).collect();
        assert_eq!(got, vec![(0, "ε".into()), (3, "1".into()), (3, "2".into())]);
    }

    #[test]
    fn bounded_reachability() {
        let r = fixtures::cps_prime();
        let fa = t("f(a)");
        assert_eq!(reducts_within(&r, &fa, 0, &Limits::default()).unwrap().len(), 1);
        let two = reducts_within(&r, &fa, 2, &Limits::default()).unwrap();
        for u in ["f(a)", "f(b)", "c", "d"] {
            assert!(two.contains(&t(u)), "{u}");
        }
        let s = fixtures::streams();
        let one = reducts_within(&s, &t("inc(tl(:(0,inc(nat))))"), 1, &Limits::default()).unwrap();
        assert!(one.contains(&t("inc(inc(nat))")));
    }

    #[test]
    fn reachability_budget_and_closure() {
        let r = parse_trs("(RULES a -> f(a))").unwrap().trs;
        let err = Reach::explore(&r, &t("a"), None, &Limits::new(10)).unwrap_err();
        assert_eq!(err, LimitError::NodeBudget(10));
        let reach = Reach::explore(&r, &t("a"), Some(3), &Limits::new(10)).unwrap();
        assert!(!reach.is_closed());
        let path = reach.path_to(&t("f(f(a))")).unwrap();
        assert_eq!(path.len(), 2);
        assert!(replay(&r, &t("a"), &path));

        let ab = parse_trs("(RULES a -> b a -> c)").unwrap().trs;
        let reach = Reach::explore(&ab, &t("a"), None, &Limits::default()).unwrap();
        assert!(reach.is_closed());
        assert_eq!(reach.len(), 3);
    }

    #[test]
    fn reducts_within_is_monotone_and_saturates() {
        let r = fixtures::cps_prime();
        let mut prev = 0;
        for k in 0..6 {
            let set = reducts_within(&r, &t("f(a)"), k, &Limits::default()).unwrap();
            assert!(set.len() >= prev);
            prev = set.len();
        }
        let fix = reducts_within(&r, &t("f(a)"), 10, &Limits::default()).unwrap();
        assert_eq!(fix.len(), prev);
    }

    #[test]
    fn multisteps() {
        let r = parse_trs("(VAR x)(RULES f(x) -> g(x,x) a -> b)").unwrap().trs;
        assert_eq!(multistep_reducts(&r, &t("x"), &Limits::default()).unwrap().len(), 1);
        let got: BTreeSet<Term> = multistep_reducts(&r, &t("f(a)"), &Limits::default()).unwrap().into_iter().collect();
        let want: BTreeSet<Term> = ["f(a)", "f(b)", "g(a,a)", "g(b,b)"].iter().map(|s| t(s)).collect();
        assert_eq!(got, want);
        assert!(!got.contains(&t("g(a,b)")));

        let ab = parse_trs("(RULES a -> b)").unwrap().trs;
        let got: BTreeSet<Term> = multistep_reducts(&ab, &t("a"), &Limits::default()).unwrap().into_iter().collect();
        assert_eq!(got, [t("a"), t("b")].into_iter().collect());
    }

    #[test]
    fn multisteps_of_terms_sharing_rule_variables() {
        // Matching f(x) against f(x) binds x to itself, which the
        // substitution stores as no binding at all.
        let r = parse_trs("(VAR x) (RULES f(x) -> g(x,x) a -> b)").unwrap().trs;
        let got: BTreeSet<Term> = multistep_reducts(&r, &t("f(x)"), &Limits::default()).unwrap().into_iter().collect();
        assert_eq!(got, [t("f(x)"), t("g(x,x)")].into_iter().collect());
    }

    #[test]
    fn multistep_budget() {
        let r = parse_trs("(VAR x)(RULES f(x) -> g(x,x) a -> b)").unwrap().trs;
        let deep = t("f(f(f(f(f(a)))))");
        assert!(multistep_reducts(&r, &deep, &Limits::new(20)).is_err());
    }

    #[test]
    fn reducts_stable_under_rule_renaming() {
        let r = fixtures::streams();
        let renamed = Trs::from_rules(
            r.rules()
                .iter()
                .map(|rule| rule.rename_apart(&rule.vars()))
                .collect(),
        )
        .unwrap();
        for s in ["tl(inc(nat))", "inc(:(hd(:(0,nat)),tl(nat)))"] {
            assert_eq!(one_step_reducts(&r, &t(s)), one_step_reducts(&renamed, &t(s)));
        }
    }
}
