//! First-order terms, positions, substitutions, matching and syntactic
//! unification.
//!
//! Terms are plain trees over interned-by-`Arc` names. Everything here is an
//! immutable value; operations build new terms rather than mutating in place.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Symbol and variable names.
pub type Name = Arc<str>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("position {position} does not exist in {term}")]
    InvalidPosition { position: Position, term: String },
}

/// A first-order term: a variable or a function symbol applied to arguments.
///
/// Equality is syntactic, so variable names are significant.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Name),
    App(Name, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Arc::from(name))
    }

    pub fn app(symbol: &str, args: Vec<Term>) -> Term {
        Term::App(Arc::from(symbol), args)
    }

    pub fn constant(symbol: &str) -> Term {
        Term::App(Arc::from(symbol), Vec::new())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Number of symbol and variable occurrences.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.visit_vars(&mut |x| {
            out.insert(x.clone());
        });
        out
    }

    /// Variables in order of first occurrence (left to right).
    pub fn vars_ordered(&self) -> Vec<Name> {
        let mut out: Vec<Name> = Vec::new();
        self.visit_vars(&mut |x| {
            if !out.contains(x) {
                out.push(x.clone());
            }
        });
        out
    }

    /// Occurrence count of every variable.
    pub fn var_occurrences(&self) -> BTreeMap<Name, usize> {
        let mut out = BTreeMap::new();
        self.visit_vars(&mut |x| *out.entry(x.clone()).or_insert(0) += 1);
        out
    }

    pub fn contains_var(&self, x: &str) -> bool {
        match self {
            Term::Var(y) => &**y == x,
            Term::App(_, args) => args.iter().any(|a| a.contains_var(x)),
        }
    }

    fn visit_vars(&self, f: &mut impl FnMut(&Name)) {
        match self {
            Term::Var(x) => f(x),
            Term::App(_, args) => args.iter().for_each(|a| a.visit_vars(f)),
        }
    }

    /// Records `symbol -> arity` for every function symbol, returning the
    /// first symbol seen with two different arities.
    pub fn collect_symbols(&self, sig: &mut BTreeMap<Name, usize>) -> Result<(), (Name, usize, usize)> {
        if let Term::App(f, args) = self {
            match sig.get(f) {
                Some(&n) if n != args.len() => return Err((f.clone(), n, args.len())),
                Some(_) => {}
                None => {
                    sig.insert(f.clone(), args.len());
                }
            }
            for a in args {
                a.collect_symbols(sig)?;
            }
        }
        Ok(())
    }

    /// Function and variable positions, each in pre-order (outermost-leftmost).
    pub fn positions(&self) -> (Vec<Position>, Vec<Position>) {
        let mut fun = Vec::new();
        let mut var = Vec::new();
        let mut path = Vec::new();
        self.walk_positions(&mut path, &mut fun, &mut var);
        (fun, var)
    }

    fn walk_positions(&self, path: &mut Vec<usize>, fun: &mut Vec<Position>, var: &mut Vec<Position>) {
        match self {
            Term::Var(_) => var.push(Position(path.clone())),
            Term::App(_, args) => {
                fun.push(Position(path.clone()));
                for (i, a) in args.iter().enumerate() {
                    path.push(i + 1);
                    a.walk_positions(path, fun, var);
                    path.pop();
                }
            }
        }
    }

    /// Function positions paired with the subterms found there, pre-order.
    pub fn function_subterms(&self) -> Vec<(Position, &Term)> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        fn go<'a>(t: &'a Term, path: &mut Vec<usize>, out: &mut Vec<(Position, &'a Term)>) {
            if let Term::App(_, args) = t {
                out.push((Position(path.clone()), t));
                for (i, a) in args.iter().enumerate() {
                    path.push(i + 1);
                    go(a, path, out);
                    path.pop();
                }
            }
        }
        go(self, &mut path, &mut out);
        out
    }

    pub fn subterm_at(&self, p: &Position) -> Result<&Term, TermError> {
        let mut cur = self;
        for &i in &p.0 {
            cur = match cur {
                Term::App(_, args) if i >= 1 && i <= args.len() => &args[i - 1],
                _ => return Err(self.invalid(p)),
            };
        }
        Ok(cur)
    }

    pub fn replace_at(&self, p: &Position, u: Term) -> Result<Term, TermError> {
        fn go(t: &Term, path: &[usize], u: Term) -> Option<Term> {
            match path.split_first() {
                None => Some(u),
                Some((&i, rest)) => match t {
                    Term::App(f, args) if i >= 1 && i <= args.len() => {
                        // cloning the child on the path would make this quadratic in depth
                        let mut out = Vec::with_capacity(args.len());
                        out.extend_from_slice(&args[..i - 1]);
                        out.push(go(&args[i - 1], rest, u)?);
                        out.extend_from_slice(&args[i..]);
                        Some(Term::App(f.clone(), out))
                    }
                    _ => None,
                },
            }
        }
        go(self, &p.0, u).ok_or_else(|| self.invalid(p))
    }

    fn invalid(&self, p: &Position) -> TermError {
        TermError::InvalidPosition { position: p.clone(), term: self.to_string() }
    }

    /// Renames variables through `f`, leaving the shape untouched.
    pub fn map_vars(&self, f: &impl Fn(&Name) -> Name) -> Term {
        match self {
            Term::Var(x) => Term::Var(f(x)),
            Term::App(g, args) => Term::App(g.clone(), args.iter().map(|a| a.map_vars(f)).collect()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "{x}"),
            Term::App(g, args) if args.is_empty() => write!(f, "{g}"),
            Term::App(g, args) => {
                write!(f, "{g}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A path from the root: 1-based argument indices. The empty path is the root.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Position(pub Vec<usize>);

impl Position {
    pub fn root() -> Position {
        Position(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, i: usize) -> Position {
        let mut v = self.0.clone();
        v.push(i);
        Position(v)
    }

    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl From<&[usize]> for Position {
    fn from(v: &[usize]) -> Self {
        Position(v.to_vec())
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A finite map from variables to terms. Identity bindings are never stored,
/// so two substitutions are equal exactly when their maps are.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Substitution(BTreeMap<Name, Term>);

impl Substitution {
    pub fn new() -> Self {
        Substitution(BTreeMap::new())
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, Term)>) -> Self {
        let mut s = Substitution::new();
        for (x, t) in pairs {
            s.insert(Arc::from(x), t);
        }
        s
    }

    /// Binds `x` to `t`; a binding `x ↦ x` removes `x` instead.
    pub fn insert(&mut self, x: Name, t: Term) {
        if matches!(&t, Term::Var(y) if *y == x) {
            self.0.remove(&x);
        } else {
            self.0.insert(x, t);
        }
    }

    pub fn get(&self, x: &str) -> Option<&Term> {
        self.0.get(x)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Term)> {
        self.0.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Name> {
        self.0.keys()
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.0.is_empty() {
            return t.clone();
        }
        match t {
            Term::Var(x) => self.0.get(x).cloned().unwrap_or_else(|| t.clone()),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| self.apply(a)).collect()),
        }
    }

    /// The substitution `u ↦ (u self) other`.
    pub fn then(&self, other: &Substitution) -> Substitution {
        let mut out = Substitution::new();
        for (x, t) in &self.0 {
            out.insert(x.clone(), other.apply(t));
        }
        for (x, t) in &other.0 {
            if !self.0.contains_key(x) {
                out.insert(x.clone(), t.clone());
            }
        }
        out
    }

    pub fn is_idempotent(&self) -> bool {
        self.0.values().all(|t| t.vars().iter().all(|x| !self.0.contains_key(x)))
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (x, t)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x} ↦ {t}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// One-sided matching: a substitution `σ` over the variables of `pattern`
/// with `pattern σ = subject`, if there is one.
pub fn match_term(pattern: &Term, subject: &Term) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    let mut bound: BTreeMap<Name, &Term> = BTreeMap::new();
    let mut stack = vec![(pattern, subject)];
    while let Some((p, s)) = stack.pop() {
        match p {
            Term::Var(x) => match bound.get(x) {
                Some(prev) if *prev != s => return None,
                Some(_) => {}
                None => {
                    bound.insert(x.clone(), s);
                }
            },
            Term::App(f, pargs) => match s {
                Term::App(g, sargs) if f == g && pargs.len() == sargs.len() => {
                    stack.extend(pargs.iter().zip(sargs.iter()));
                }
                _ => return None,
            },
        }
    }
    for (x, t) in bound {
        sigma.insert(x, t.clone());
    }
    Some(sigma)
}

/// Most general unifier with occurs check. The result is idempotent.
///
/// When two variables meet, the one from `s` is bound to the one from `t`.
pub fn unify(s: &Term, t: &Term) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    let mut stack = vec![(s.clone(), t.clone())];
    while let Some((a, b)) = stack.pop() {
        let a = sigma.apply(&a);
        let b = sigma.apply(&b);
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x == y => {}
            (Term::Var(x), u) | (u, Term::Var(x)) => {
                if u.contains_var(x) {
                    return None;
                }
                let single = Substitution(BTreeMap::from([(x.clone(), u.clone())]));
                sigma = sigma.then(&single);
            }
            (Term::App(f, fargs), Term::App(g, gargs)) => {
                if f != g || fargs.len() != gargs.len() {
                    return None;
                }
                stack.extend(fargs.iter().cloned().zip(gargs.iter().cloned()));
            }
        }
    }
    Some(sigma)
}

/// Renames the variables of `terms` (jointly) to `v0, v1, ...` in order of
/// first occurrence. Two tuples are variants iff their canonical forms agree.
pub fn canonical_vars(terms: &[&Term]) -> Vec<Term> {
    let mut order: Vec<Name> = Vec::new();
    for t in terms {
        for x in t.vars_ordered() {
            if !order.contains(&x) {
                order.push(x);
            }
        }
    }
    let names: BTreeMap<Name, Name> =
        order.iter().enumerate().map(|(i, x)| (x.clone(), Arc::from(format!("v{i}").as_str()))).collect();
    terms.iter().map(|t| t.map_vars(&|x| names[x].clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: &str) -> Term {
        Term::var(x)
    }
    fn c(x: &str) -> Term {
        Term::constant(x)
    }
    fn f(s: &str, args: Vec<Term>) -> Term {
        Term::app(s, args)
    }
    fn pos(p: &[usize]) -> Position {
        Position(p.to_vec())
    }

    #[test]
    fn positions_of_variable() {
        let (fun, var) = v("x").positions();
        assert!(fun.is_empty());
        assert_eq!(var, vec![Position::root()]);
    }

    #[test]
    fn positions_of_ground_nest() {
        let t = f("inc", vec![f("tl", vec![c("nat")])]);
        let (fun, var) = t.positions();
        assert_eq!(fun, vec![pos(&[]), pos(&[1]), pos(&[1, 1])]);
        assert!(var.is_empty());
    }

    #[test]
    fn positions_mixed() {
        let t = f("f", vec![v("x"), f("g", vec![c("a")])]);
        let (fun, var) = t.positions();
        assert_eq!(fun, vec![pos(&[]), pos(&[2]), pos(&[2, 1])]);
        assert_eq!(var, vec![pos(&[1])]);
    }

    #[test]
    fn subterm_and_replace() {
        let t = f("inc", vec![f("tl", vec![c("nat")])]);
        assert_eq!(t.subterm_at(&pos(&[1, 1])).unwrap(), &c("nat"));
        assert_eq!(t.subterm_at(&Position::root()).unwrap(), &t);
        let zero_inc = f(":", vec![c("0"), f("inc", vec![c("nat")])]);
        assert_eq!(
            t.replace_at(&pos(&[1, 1]), zero_inc.clone()).unwrap(),
            f("inc", vec![f("tl", vec![zero_inc])])
        );
        let ab = f("f", vec![c("a"), c("b")]);
        assert_eq!(ab.subterm_at(&pos(&[2])).unwrap(), &c("b"));
        assert_eq!(ab.replace_at(&pos(&[1]), c("c")).unwrap(), f("f", vec![c("c"), c("b")]));
        assert_eq!(ab.replace_at(&Position::root(), c("u")).unwrap(), c("u"));
    }

    #[test]
    fn invalid_positions() {
        let ab = f("f", vec![c("a"), c("b")]);
        assert!(matches!(ab.subterm_at(&pos(&[3])), Err(TermError::InvalidPosition { .. })));
        assert!(ab.subterm_at(&pos(&[0])).is_err());
        assert!(ab.replace_at(&pos(&[1, 1]), c("c")).is_err());
        assert!(v("x").subterm_at(&pos(&[1])).is_err());
    }

    #[test]
    fn apply_substitutions() {
        let t = f("f", vec![v("x"), v("z")]);
        assert_eq!(Substitution::new().apply(&t), t);
        let s = Substitution::from_pairs([("x", c("b"))]);
        assert_eq!(s.apply(&f("f", vec![v("x"), v("x")])), f("f", vec![c("b"), c("b")]));
        let s = Substitution::from_pairs([("x", f("g", vec![v("y")]))]);
        assert_eq!(s.apply(&t), f("f", vec![f("g", vec![v("y")]), v("z")]));
    }

    #[test]
    fn identity_bindings_are_dropped() {
        let s = Substitution::from_pairs([("x", v("x")), ("y", c("a"))]);
        assert_eq!(s.len(), 1);
        assert_eq!(s, Substitution::from_pairs([("y", c("a"))]));
    }

    #[test]
    fn matching() {
        let pat = f("hd", vec![f(":", vec![v("x"), v("y")])]);
        let subj = f("hd", vec![f(":", vec![c("0"), f("inc", vec![c("nat")])])]);
        assert_eq!(
            match_term(&pat, &subj).unwrap(),
            Substitution::from_pairs([("x", c("0")), ("y", f("inc", vec![c("nat")]))])
        );
        assert!(match_term(&f("f", vec![v("x"), v("x")]), &f("f", vec![c("a"), c("b")])).is_none());
        assert_eq!(
            match_term(&v("x"), &f("f", vec![c("a")])).unwrap(),
            Substitution::from_pairs([("x", f("f", vec![c("a")]))])
        );
        // subject variables are constants for matching
        assert!(match_term(&c("a"), &v("x")).is_none());
    }

    #[test]
    fn unification() {
        assert_eq!(unify(&c("nat"), &c("nat")).unwrap(), Substitution::new());
        assert!(unify(&v("x"), &f("f", vec![v("x")])).is_none());
        assert_eq!(
            unify(&f("f", vec![v("x"), c("a")]), &f("f", vec![c("b"), v("y")])).unwrap(),
            Substitution::from_pairs([("x", c("b")), ("y", c("a"))])
        );
        assert!(unify(&f("f", vec![c("a")]), &f("g", vec![c("a")])).is_none());
        // chained bindings are resolved
        let s = f("f", vec![v("x"), v("y"), v("z")]);
        let t = f("f", vec![v("y"), v("z"), c("a")]);
        let mu = unify(&s, &t).unwrap();
        assert!(mu.is_idempotent());
        assert_eq!(mu.apply(&s), mu.apply(&t));
        assert_eq!(mu.apply(&v("x")), c("a"));
    }

    #[test]
    fn canonical_forms_identify_variants() {
        let a = canonical_vars(&[&f("f", vec![v("x"), v("y")]), &v("y")]);
        let b = canonical_vars(&[&f("f", vec![v("u"), v("w")]), &v("w")]);
        let c2 = canonical_vars(&[&f("f", vec![v("u"), v("w")]), &v("u")]);
        assert_eq!(a, b);
        assert_ne!(a, c2);
    }

    fn arb_term() -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![
            Just(v("x")),
            Just(v("y")),
            Just(c("a")),
            Just(c("b")),
        ];
        leaf.prop_recursive(3, 16, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|t| f("g", vec![t])),
                (inner.clone(), inner).prop_map(|(s, t)| f("f", vec![s, t])),
            ]
        })
    }

    proptest! {
        #[test]
        fn replace_with_own_subterm_is_identity(t in arb_term()) {
            let (fun, var) = t.positions();
            for p in fun.iter().chain(var.iter()) {
                let sub = t.subterm_at(p).unwrap().clone();
                prop_assert_eq!(t.replace_at(p, sub).unwrap(), t.clone());
            }
        }

        #[test]
        fn positions_partition_all_subterms(t in arb_term()) {
            let (fun, var) = t.positions();
            prop_assert_eq!(fun.len() + var.len(), t.size());
            for p in &fun { prop_assert!(!t.subterm_at(p).unwrap().is_var()); }
            for p in &var { prop_assert!(t.subterm_at(p).unwrap().is_var()); }
        }

        #[test]
        fn match_inverts_apply_on_linear_patterns(a in arb_term(), b in arb_term()) {
            let pat = f("f", vec![v("x"), f("g", vec![v("y")])]);
            let sigma = Substitution::from_pairs([("x", a), ("y", b)]);
            let inst = sigma.apply(&pat);
            let m = match_term(&pat, &inst).unwrap();
            prop_assert_eq!(m.apply(&pat), inst);
            prop_assert!(m.domain().all(|x| pat.contains_var(x)));
        }

        #[test]
        fn unifiers_are_sound_and_idempotent(s in arb_term(), t in arb_term()) {
            if let Some(mu) = unify(&s, &t) {
                prop_assert_eq!(mu.apply(&s), mu.apply(&t));
                prop_assert!(mu.is_idempotent());
                let u = f("h", vec![s.clone(), t.clone()]);
                prop_assert_eq!(mu.apply(&mu.apply(&u)), mu.apply(&u));
            }
        }
    }
}
