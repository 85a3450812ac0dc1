//! Bounded search for matrix interpretations, encoded into propositional
//! logic over bit vectors.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;
use std::time::Instant;

use batsat::{lbool, Callbacks, Lit, Solver, SolverInterface, SolverOpts};

use super::{orient, MatrixInterpretation, Orientation, SymbolInterpretation};
use crate::limits::{LimitError, Limits};
use crate::relative_termination::{Removal, RelTermProblem};
use crate::term::{Name, Term};

struct Deadline(Option<Instant>);

impl Callbacks for Deadline {
    fn stop(&self) -> bool {
        self.0.is_some_and(|d| Instant::now() >= d)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum Bit {
    Const(bool),
    Lit(Lit),
}

impl std::ops::Not for Bit {
    type Output = Bit;
    fn not(self) -> Bit {
        match self {
            Bit::Const(b) => Bit::Const(!b),
            Bit::Lit(l) => Bit::Lit(!l),
        }
    }
}

const FALSE: Bit = Bit::Const(false);
const TRUE: Bit = Bit::Const(true);

/// Little-endian binary natural number.
type Nat = Vec<Bit>;
type SMat = Vec<Vec<Nat>>;
type SVec = Vec<Nat>;

struct SForm {
    coeffs: BTreeMap<Name, SMat>,
    constant: SVec,
}

struct SSymbol {
    args: Vec<SMat>,
    constant: SVec,
}

struct Enc {
    solver: Solver<Deadline>,
    and_gates: HashMap<(Lit, Lit), Lit>,
    xor_gates: HashMap<(Lit, Lit), Lit>,
}

enum Answer {
    Sat(Vec<bool>),
    Unsat,
}

impl Enc {
    fn new(limits: &Limits) -> Self {
        Enc {
            solver: Solver::new(SolverOpts::default(), Deadline(limits.deadline)),
            and_gates: HashMap::new(),
            xor_gates: HashMap::new(),
        }
    }

    fn fresh(&mut self) -> Lit {
        Lit::new(self.solver.new_var_default(), true)
    }

    fn clause(&mut self, bits: &[Bit]) {
        if bits.contains(&TRUE) {
            return;
        }
        let mut lits: Vec<Lit> = bits
            .iter()
            .filter_map(|b| match b {
                Bit::Lit(l) => Some(*l),
                Bit::Const(_) => None,
            })
            .collect();
        self.solver.add_clause_reuse(&mut lits);
    }

    fn and(&mut self, a: Bit, b: Bit) -> Bit {
        match (a, b) {
            (FALSE, _) | (_, FALSE) => FALSE,
            (TRUE, x) | (x, TRUE) => x,
            (Bit::Lit(x), Bit::Lit(y)) => {
                if x == y {
                    return a;
                }
                if x == !y {
                    return FALSE;
                }
                let key = if x < y { (x, y) } else { (y, x) };
                if let Some(g) = self.and_gates.get(&key) {
                    return Bit::Lit(*g);
                }
                let g = self.fresh();
                let mut c = vec![!g, x];
                self.solver.add_clause_reuse(&mut c);
                let mut c = vec![!g, y];
                self.solver.add_clause_reuse(&mut c);
                let mut c = vec![g, !x, !y];
                self.solver.add_clause_reuse(&mut c);
                self.and_gates.insert(key, g);
                Bit::Lit(g)
            }
        }
    }

    fn or(&mut self, a: Bit, b: Bit) -> Bit {
        let n = self.and(!a, !b);
        !n
    }

    fn xor(&mut self, a: Bit, b: Bit) -> Bit {
        match (a, b) {
            (Bit::Const(c), x) | (x, Bit::Const(c)) => {
                if c {
                    !x
                } else {
                    x
                }
            }
            (Bit::Lit(x), Bit::Lit(y)) => {
                if x == y {
                    return FALSE;
                }
                if x == !y {
                    return TRUE;
                }
                let key = if x < y { (x, y) } else { (y, x) };
                if let Some(g) = self.xor_gates.get(&key) {
                    return Bit::Lit(*g);
                }
                let g = self.fresh();
                for mut c in [vec![!g, x, y], vec![!g, !x, !y], vec![g, !x, y], vec![g, x, !y]] {
                    self.solver.add_clause_reuse(&mut c);
                }
                self.xor_gates.insert(key, g);
                Bit::Lit(g)
            }
        }
    }

    fn and_all(&mut self, bits: impl IntoIterator<Item = Bit>) -> Bit {
        bits.into_iter().fold(TRUE, |acc, b| self.and(acc, b))
    }

    fn constant(mut v: u64) -> Nat {
        let mut out = Vec::new();
        while v > 0 {
            out.push(Bit::Const(v & 1 == 1));
            v >>= 1;
        }
        out
    }

    /// A fresh natural number in `0..=max`.
    fn unknown(&mut self, max: u64) -> Nat {
        let width = (u64::BITS - max.leading_zeros()) as usize;
        let x: Nat = (0..width).map(|_| Bit::Lit(self.fresh())).collect();
        if width < 64 && max != (1 << width) - 1 {
            let le = self.ge(&Self::constant(max), &x);
            self.clause(&[le]);
        }
        x
    }

    fn add(&mut self, a: &Nat, b: &Nat) -> Nat {
        let n = a.len().max(b.len());
        let mut out = Vec::with_capacity(n + 1);
        let mut carry = FALSE;
        for i in 0..n {
            let x = a.get(i).copied().unwrap_or(FALSE);
            let y = b.get(i).copied().unwrap_or(FALSE);
            let xy = self.xor(x, y);
            out.push(self.xor(xy, carry));
            let both = self.and(x, y);
            let prop = self.and(xy, carry);
            carry = self.or(both, prop);
        }
        out.push(carry);
        trim(out)
    }

    fn mul(&mut self, a: &Nat, b: &Nat) -> Nat {
        let mut acc: Nat = Vec::new();
        for (i, &bi) in b.iter().enumerate() {
            if bi == FALSE {
                continue;
            }
            let mut partial: Nat = vec![FALSE; i];
            for &aj in a {
                partial.push(self.and(aj, bi));
            }
            acc = self.add(&acc, &trim(partial));
        }
        acc
    }

    /// `a >= b` (`strict = false`) or `a > b` (`strict = true`).
    fn compare(&mut self, a: &Nat, b: &Nat, strict: bool) -> Bit {
        let n = a.len().max(b.len());
        let mut res = Bit::Const(!strict);
        for i in 0..n {
            let x = a.get(i).copied().unwrap_or(FALSE);
            let y = b.get(i).copied().unwrap_or(FALSE);
            let above = self.and(x, !y);
            let diff = self.xor(x, y);
            let keep = self.and(!diff, res);
            res = self.or(above, keep);
        }
        res
    }

    fn ge(&mut self, a: &Nat, b: &Nat) -> Bit {
        self.compare(a, b, false)
    }

    fn gt(&mut self, a: &Nat, b: &Nat) -> Bit {
        self.compare(a, b, true)
    }

    fn mat_mul(&mut self, a: &SMat, b: &SMat) -> SMat {
        let d = a.len();
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        let mut s = Vec::new();
                        for k in 0..d {
                            let p = self.mul(&a[i][k], &b[k][j]);
                            s = self.add(&s, &p);
                        }
                        s
                    })
                    .collect()
            })
            .collect()
    }

    fn mat_vec(&mut self, a: &SMat, v: &SVec) -> SVec {
        a.iter()
            .map(|row| {
                let mut s = Vec::new();
                for (x, y) in row.iter().zip(v) {
                    let p = self.mul(x, y);
                    s = self.add(&s, &p);
                }
                s
            })
            .collect()
    }

    /// Truth of `b` in the model. Only meaningful right after a successful
    /// solve.
    fn value(&self, b: Bit) -> bool {
        match b {
            Bit::Const(c) => c,
            Bit::Lit(l) => self.solver.value_lit(l) == lbool::TRUE,
        }
    }

    fn solve(&mut self, assume: &[Bit], watch: &[Bit]) -> Result<Answer, LimitError> {
        if assume.contains(&FALSE) {
            return Ok(Answer::Unsat);
        }
        let lits: Vec<Lit> = assume
            .iter()
            .filter_map(|b| match b {
                Bit::Lit(l) => Some(*l),
                Bit::Const(_) => None,
            })
            .collect();
        let r = self.solver.solve_limited(&lits);
        if r == lbool::TRUE {
            Ok(Answer::Sat(watch.iter().map(|b| self.value(*b)).collect()))
        } else if r == lbool::FALSE {
            Ok(Answer::Unsat)
        } else {
            Err(LimitError::Deadline)
        }
    }
}

fn trim(mut n: Nat) -> Nat {
    while n.last() == Some(&FALSE) {
        n.pop();
    }
    n
}

fn sym_identity(d: usize) -> SMat {
    (0..d).map(|i| (0..d).map(|j| if i == j { vec![TRUE] } else { vec![] }).collect()).collect()
}

struct Interpreter<'a> {
    symbols: &'a BTreeMap<Name, SSymbol>,
    dim: usize,
    memo: HashMap<Term, Rc<SForm>>,
}

impl Interpreter<'_> {
    fn form(&mut self, enc: &mut Enc, t: &Term) -> Rc<SForm> {
        if let Some(f) = self.memo.get(t) {
            return f.clone();
        }
        let d = self.dim;
        let form = match t {
            Term::Var(x) => SForm { coeffs: [(x.clone(), sym_identity(d))].into_iter().collect(), constant: vec![vec![]; d] },
            Term::App(f, args) => {
                let symbols = self.symbols;
                let si = &symbols[f];
                let mut constant = si.constant.clone();
                let mut coeffs: BTreeMap<Name, SMat> = BTreeMap::new();
                for (a, arg) in si.args.iter().zip(args) {
                    let sub = self.form(enc, arg);
                    let v = enc.mat_vec(a, &sub.constant);
                    for (c, x) in constant.iter_mut().zip(&v) {
                        *c = enc.add(c, x);
                    }
                    for (x, m) in &sub.coeffs {
                        let p = enc.mat_mul(a, m);
                        match coeffs.get_mut(x) {
                            Some(acc) => {
                                for (ra, rp) in acc.iter_mut().zip(&p) {
                                    for (ea, ep) in ra.iter_mut().zip(rp) {
                                        *ea = enc.add(ea, ep);
                                    }
                                }
                            }
                            None => {
                                coeffs.insert(x.clone(), p);
                            }
                        }
                    }
                }
                SForm { coeffs, constant }
            }
        };
        let rc = Rc::new(form);
        self.memo.insert(t.clone(), rc.clone());
        rc
    }
}

/// Returns `(weak, strict)` bits for `l ⩾ r` and `l > r`.
fn orientation_bits(enc: &mut Enc, l: &SForm, r: &SForm) -> (Bit, Bit) {
    let mut parts = Vec::new();
    for (x, rm) in &r.coeffs {
        let Some(lm) = l.coeffs.get(x) else {
            return (FALSE, FALSE);
        };
        for (lr, rr) in lm.iter().zip(rm) {
            for (a, b) in lr.iter().zip(rr) {
                parts.push(enc.ge(a, b));
            }
        }
    }
    for (a, b) in l.constant.iter().zip(&r.constant) {
        parts.push(enc.ge(a, b));
    }
    let weak = enc.and_all(parts);
    let first = enc.gt(&l.constant[0], &r.constant[0]);
    let strict = enc.and(weak, first);
    (weak, strict)
}

/// Outputs `o[j]` with `o[j] → at least j+1 of inputs hold`.
fn at_least(enc: &mut Enc, inputs: &[Bit]) -> Vec<Bit> {
    if inputs.len() <= 1 {
        return inputs.to_vec();
    }
    let (a, b) = inputs.split_at(inputs.len() / 2);
    let oa = at_least(enc, a);
    let ob = at_least(enc, b);
    let n = inputs.len();
    let out: Vec<Bit> = (0..n).map(|_| Bit::Lit(enc.fresh())).collect();
    for k in 1..=n {
        for i in 0..=oa.len() {
            let Some(j) = (k - 1).checked_sub(i) else { break };
            if j > ob.len() {
                continue;
            }
            let x = oa.get(i).copied().unwrap_or(FALSE);
            let y = ob.get(j).copied().unwrap_or(FALSE);
            enc.clause(&[!out[k - 1], x, y]);
        }
    }
    out
}

/// Looks for a `dim`-dimensional interpretation with entries in
/// `0..=coef_max` that weakly orients every rule of the problem and strictly
/// orients as many rules of its strict component as possible (at least one).
/// Among those, the interpretation with the lexicographically least entries
/// is returned, together with every rule of either component it orients
/// strictly.
pub fn search_interpretation(
    problem: &RelTermProblem,
    dim: usize,
    coef_max: u64,
    limits: &Limits,
) -> Result<Option<(MatrixInterpretation, Removal)>, LimitError> {
    assert!(dim >= 1 && coef_max >= 1);
    if problem.strict.is_empty() {
        return Ok(None);
    }
    limits.check_deadline()?;
    let mut enc = Enc::new(limits);
    let mut signature = problem.strict.signature().clone();
    signature.extend(problem.weak.signature().iter().map(|(f, n)| (f.clone(), *n)));

    let mut symbols: BTreeMap<Name, SSymbol> = BTreeMap::new();
    let mut unknowns: Vec<Nat> = Vec::new();
    for (f, &arity) in &signature {
        let mut args = Vec::new();
        for _ in 0..arity {
            let m: SMat = (0..dim).map(|_| (0..dim).map(|_| enc.unknown(coef_max)).collect()).collect();
            let corner = m[0][0].clone();
            enc.clause(&corner);
            unknowns.extend(m.iter().flatten().cloned());
            args.push(m);
        }
        let constant: SVec = (0..dim).map(|_| enc.unknown(coef_max)).collect();
        unknowns.extend(constant.iter().cloned());
        symbols.insert(f.clone(), SSymbol { args, constant });
    }

    let mut interp = Interpreter { symbols: &symbols, dim, memo: HashMap::new() };
    let mut strict_bits = Vec::new();
    for (side, trs) in [(0, &problem.strict), (1, &problem.weak)] {
        for r in trs.rules() {
            limits.check_deadline()?;
            let l = interp.form(&mut enc, &r.lhs);
            let rf = interp.form(&mut enc, &r.rhs);
            let (weak, strict) = orientation_bits(&mut enc, &l, &rf);
            if weak == FALSE {
                return Ok(None);
            }
            enc.clause(&[weak]);
            if side == 0 {
                strict_bits.push(strict);
            }
        }
    }

    let counts = at_least(&mut enc, &strict_bits);
    let count_of = |model: &[bool]| model.iter().filter(|b| **b).count();
    let mut best = match enc.solve(&counts[..1], &strict_bits)? {
        Answer::Unsat => return Ok(None),
        Answer::Sat(m) => count_of(&m),
    };
    while best < counts.len() {
        match enc.solve(&[counts[best]], &strict_bits)? {
            Answer::Sat(m) => best = count_of(&m).max(best + 1),
            Answer::Unsat => break,
        }
    }
    enc.clause(&[counts[best - 1]]);

    // Fix entry bits most significant first, preferring 0.
    let order: Vec<Bit> = unknowns.iter().flat_map(|n| n.iter().rev().copied()).collect();
    let mut model = match enc.solve(&[], &order)? {
        Answer::Sat(m) => m,
        Answer::Unsat => unreachable!("the optimum was just shown satisfiable"),
    };
    for (i, &bit) in order.iter().enumerate() {
        if model[i] {
            match enc.solve(&[!bit], &order)? {
                Answer::Sat(m) => model = m,
                Answer::Unsat => {
                    enc.clause(&[bit]);
                    continue;
                }
            }
        }
        enc.clause(&[!bit]);
    }

    let mut values = model.iter();
    let mut read = |n: &Nat| n.iter().rev().fold(0u64, |acc, _| acc << 1 | u64::from(*values.next().expect("bit")));
    let mut result = MatrixInterpretation { dim, symbols: BTreeMap::new() };
    for (f, s) in &symbols {
        let args = s.args.iter().map(|m| m.iter().map(|row| row.iter().map(&mut read).collect()).collect()).collect();
        let constant = s.constant.iter().map(&mut read).collect();
        result.symbols.insert(f.clone(), SymbolInterpretation { args, constant });
    }

    let removal = verify(problem, &result);
    assert!(
        removal.strict.len() >= best,
        "model orients {} strict rules, solver promised {best}",
        removal.strict.len()
    );
    Ok(Some((result, removal)))
}

/// Re-derives the orientation of every rule from the concrete
/// interpretation.
fn verify(problem: &RelTermProblem, m: &MatrixInterpretation) -> Removal {
    assert!(m.is_well_formed());
    let mut removal = Removal { strict: BTreeSet::new(), weak: BTreeSet::new() };
    for (trs, set) in [(&problem.strict, &mut removal.strict), (&problem.weak, &mut removal.weak)] {
        for r in trs.rules() {
            match orient(m, &r.lhs, &r.rhs).expect("every symbol is interpreted") {
                Orientation::Strict => {
                    set.insert(r.index);
                }
                Orientation::Weak => {}
                Orientation::Incomparable => panic!("model does not orient {r}"),
            }
        }
    }
    removal
}
