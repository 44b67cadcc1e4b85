//! Terms, identities and the named predicate battery.
//!
//! Identity-shaped predicates run through [`check_identity`]; quasi-identities
//! (the cancellation family and symmetry) are checked by direct loops. Every
//! failing predicate carries the lexicographically least witness tuple.

use std::fmt;
use std::str::FromStr;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::algebra::{Op, SkewLattice};
use crate::elemset::ElemSet;
use crate::greens::{self, Partition, QuotientMap};

/// Largest arity accepted by [`check_identity`].
pub const MAX_ARITY: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VarietyError {
    #[error("assignment has {got} values, term needs {expected}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("identity has arity {arity}, the engine cap is {cap}")]
    ArityTooLarge { arity: usize, cap: usize },
    #[error("element {x} out of range for an algebra of order {n}")]
    ElementOutOfRange { x: usize, n: usize },
    #[error("unknown predicate {0:?}")]
    UnknownPredicate(String),
    #[error("cannot parse term at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(usize),
    Meet(Box<Term>, Box<Term>),
    Join(Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(i: usize) -> Term {
        Term::Var(i)
    }

    pub fn meet(a: Term, b: Term) -> Term {
        Term::Meet(Box::new(a), Box::new(b))
    }

    pub fn join(a: Term, b: Term) -> Term {
        Term::Join(Box::new(a), Box::new(b))
    }

    /// Left-nested `t₀ ⋄ t₁ ⋄ …`.
    pub fn fold(op: Op, terms: impl IntoIterator<Item = Term>) -> Term {
        let mut it = terms.into_iter();
        let first = it.next().expect("at least one term");
        it.fold(first, |acc, t| match op {
            Op::Meet => Term::meet(acc, t),
            Op::Join => Term::join(acc, t),
        })
    }

    /// One more than the largest variable index.
    pub fn arity(&self) -> usize {
        match self {
            Term::Var(i) => i + 1,
            Term::Meet(a, b) | Term::Join(a, b) => a.arity().max(b.arity()),
        }
    }

    /// Horizontal mirror: every `a ⋄ b` becomes `b ⋄ a`.
    pub fn mirrored(&self) -> Term {
        match self {
            Term::Var(i) => Term::Var(*i),
            Term::Meet(a, b) => Term::meet(b.mirrored(), a.mirrored()),
            Term::Join(a, b) => Term::join(b.mirrored(), a.mirrored()),
        }
    }

    /// Swaps the two operations.
    pub fn dualized(&self) -> Term {
        match self {
            Term::Var(i) => Term::Var(*i),
            Term::Meet(a, b) => Term::join(a.dualized(), b.dualized()),
            Term::Join(a, b) => Term::meet(a.dualized(), b.dualized()),
        }
    }

    fn eval_unchecked(&self, s: &SkewLattice, v: &[usize]) -> usize {
        match self {
            Term::Var(i) => v[*i],
            Term::Meet(a, b) => s.meet(a.eval_unchecked(s, v), b.eval_unchecked(s, v)),
            Term::Join(a, b) => s.join(a.eval_unchecked(s, v), b.eval_unchecked(s, v)),
        }
    }

    fn fmt_with(&self, names: &[String], parent: Option<Op>, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (op, a, b) = match self {
            Term::Var(i) => {
                return match names.get(*i) {
                    Some(n) => f.write_str(n),
                    None => write!(f, "v{i}"),
                }
            }
            Term::Meet(a, b) => (Op::Meet, a, b),
            Term::Join(a, b) => (Op::Join, a, b),
        };
        let paren = parent.is_some();
        if paren {
            f.write_str("(")?;
        }
        a.fmt_with(names, if matches!(**a, Term::Var(_)) || a.top_op() == Some(op) { None } else { Some(op) }, f)?;
        write!(f, "{}", op.symbol())?;
        b.fmt_with(names, if matches!(**b, Term::Var(_)) { None } else { Some(op) }, f)?;
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }

    fn top_op(&self) -> Option<Op> {
        match self {
            Term::Var(_) => None,
            Term::Meet(..) => Some(Op::Meet),
            Term::Join(..) => Some(Op::Join),
        }
    }
}

const DEFAULT_NAMES: [&str; 8] = ["x", "y", "z", "w", "a", "b", "c", "d"];

fn default_names(k: usize) -> Vec<String> {
    (0..k)
        .map(|i| DEFAULT_NAMES.get(i).map_or_else(|| format!("v{i}"), |s| s.to_string()))
        .collect()
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(&default_names(self.arity()), None, f)
    }
}

/// Bottom-up evaluation of `t` under `assignment`.
pub fn eval_term(s: &SkewLattice, t: &Term, assignment: &[usize]) -> Result<usize, VarietyError> {
    let k = t.arity();
    if assignment.len() != k {
        return Err(VarietyError::ArityMismatch {
            expected: k,
            got: assignment.len(),
        });
    }
    if let Some(&x) = assignment.iter().find(|&&x| x >= s.n()) {
        return Err(VarietyError::ElementOutOfRange { x, n: s.n() });
    }
    Ok(t.eval_unchecked(s, assignment))
}

/// `lhs = rhs` over variables `0..arity`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Identity {
    pub name: String,
    pub arity: usize,
    pub lhs: Term,
    pub rhs: Term,
    pub var_names: Vec<String>,
}

impl Identity {
    pub fn new(name: impl Into<String>, lhs: Term, rhs: Term) -> Self {
        let arity = lhs.arity().max(rhs.arity());
        Identity {
            name: name.into(),
            arity,
            lhs,
            rhs,
            var_names: default_names(arity),
        }
    }

    /// Parses `"x∧y∧x = x"`; `&` and `|` may stand for `∧` and `∨`.
    /// Variables are numbered by first appearance.
    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self, VarietyError> {
        let mut p = Parser {
            src: text,
            pos: 0,
            vars: Vec::new(),
        };
        let lhs = p.expr()?;
        p.skip_ws();
        if !p.eat('=') {
            return Err(p.error("expected '='"));
        }
        let rhs = p.expr()?;
        p.skip_ws();
        if p.pos != text.len() {
            return Err(p.error("trailing input"));
        }
        let arity = p.vars.len();
        Ok(Identity {
            name: name.into(),
            arity,
            lhs,
            rhs,
            var_names: p.vars,
        })
    }

    pub fn mirrored(&self) -> Identity {
        Identity {
            name: format!("mirror({})", self.name),
            lhs: self.lhs.mirrored(),
            rhs: self.rhs.mirrored(),
            ..self.clone()
        }
    }

    pub fn dualized(&self) -> Identity {
        Identity {
            name: format!("dual({})", self.name),
            lhs: self.lhs.dualized(),
            rhs: self.rhs.dualized(),
            ..self.clone()
        }
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.lhs.fmt_with(&self.var_names, None, f)?;
        f.write_str(" = ")?;
        self.rhs.fmt_with(&self.var_names, None, f)
    }
}

impl FromStr for Identity {
    type Err = VarietyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Identity::parse(s, s)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    vars: Vec<String>,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> VarietyError {
        VarietyError::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn op(&mut self) -> Option<Op> {
        self.skip_ws();
        match self.peek()? {
            '∧' | '&' => Some(Op::Meet),
            '∨' | '|' => Some(Op::Join),
            _ => None,
        }
    }

    /// A chain of atoms joined by a single operation; mixing needs parentheses.
    fn expr(&mut self) -> Result<Term, VarietyError> {
        let mut acc = self.atom()?;
        let mut chain_op: Option<Op> = None;
        while let Some(op) = self.op() {
            if chain_op.is_some_and(|c| c != op) {
                return Err(self.error("mixed operations need parentheses"));
            }
            chain_op = Some(op);
            let c = self.peek().unwrap();
            self.pos += c.len_utf8();
            let rhs = self.atom()?;
            acc = match op {
                Op::Meet => Term::meet(acc, rhs),
                Op::Join => Term::join(acc, rhs),
            };
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<Term, VarietyError> {
        self.skip_ws();
        if self.eat('(') {
            let t = self.expr()?;
            self.skip_ws();
            if !self.eat(')') {
                return Err(self.error("expected ')'"));
            }
            return Ok(t);
        }
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' || c == '\'' || c == '′' {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        if start == self.pos {
            return Err(self.error("expected a variable or '('"));
        }
        let name = &self.src[start..self.pos];
        let idx = match self.vars.iter().position(|v| v == name) {
            Some(i) => i,
            None => {
                self.vars.push(name.to_string());
                self.vars.len() - 1
            }
        };
        Ok(Term::Var(idx))
    }
}

/// Steps `v` to the next tuple of `0..n` in lexicographic order.
fn next_tuple(v: &mut [usize], n: usize) -> bool {
    for i in (0..v.len()).rev() {
        v[i] += 1;
        if v[i] < n {
            return true;
        }
        v[i] = 0;
    }
    false
}

/// Lexicographically least tuple in `(0..n)^k` satisfying `bad`.
pub fn first_tuple(n: usize, k: usize, mut bad: impl FnMut(&[usize]) -> bool) -> Option<Vec<usize>> {
    let mut v = vec![0; k];
    loop {
        if bad(&v) {
            return Some(v);
        }
        if !next_tuple(&mut v, n) {
            return None;
        }
    }
}

/// Exhaustive check; `Ok(None)` when the identity holds, otherwise the first
/// counterexample in lexicographic order.
pub fn check_identity(s: &SkewLattice, id: &Identity) -> Result<Option<Vec<usize>>, VarietyError> {
    if id.arity > MAX_ARITY {
        return Err(VarietyError::ArityTooLarge {
            arity: id.arity,
            cap: MAX_ARITY,
        });
    }
    Ok(first_tuple(s.n(), id.arity, |v| {
        id.lhs.eval_unchecked(s, v) != id.rhs.eval_unchecked(s, v)
    }))
}

/// Outcome of one predicate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<usize>>,
}

impl Verdict {
    pub fn pass() -> Self {
        Verdict {
            holds: true,
            witness: None,
        }
    }

    pub fn from_witness(w: Option<Vec<usize>>) -> Self {
        Verdict {
            holds: w.is_none(),
            witness: w,
        }
    }

    /// First failing verdict, or a pass.
    pub fn all(vs: impl IntoIterator<Item = Verdict>) -> Self {
        vs.into_iter().find(|v| !v.holds).unwrap_or_else(Verdict::pass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredicateKind {
    /// Defined by a single identity.
    Identity,
    /// An implication between equalities, or a conjunction involving one.
    QuasiIdentity,
    /// Defined through Green's relations or the lattice image.
    Structural,
}

pub struct Predicate {
    pub name: &'static str,
    pub kind: PredicateKind,
    /// The defining law, in the notation of [`Identity::parse`] where applicable.
    pub law: &'static str,
    pub eval: fn(&SkewLattice) -> Verdict,
}

impl fmt::Debug for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Predicate").field("name", &self.name).finish()
    }
}

fn by_identity(s: &SkewLattice, law: &str) -> Verdict {
    let id = Identity::parse(law, law).expect("built-in identity parses");
    Verdict::from_witness(check_identity(s, &id).expect("built-in identity within arity cap"))
}

macro_rules! identity_predicate {
    ($fn_name:ident, $law:expr) => {
        pub fn $fn_name(s: &SkewLattice) -> Verdict {
            by_identity(s, $law)
        }
    };
}

pub const LAW_RECTANGULAR: &str = "x∧y = y∨x";
pub const LAW_RIGHT_UPPER_SYMMETRIC: &str = "x∨y∨x = (y∧x)∨y∨x";
pub const LAW_LEFT_UPPER_SYMMETRIC: &str = "x∨y∨x = x∨y∨(x∧y)";
pub const LAW_RIGHT_LOWER_SYMMETRIC: &str = "x∧y∧x = x∧y∧(x∨y)";
pub const LAW_LEFT_LOWER_SYMMETRIC: &str = "x∧y∧x = (y∨x)∧y∧x";
pub const ALT_RIGHT_UPPER_SYMMETRIC: &str = "x∨y∨x = (x∧y∧x)∨y∨x";
pub const ALT_LEFT_UPPER_SYMMETRIC: &str = "x∨y∨x = x∨y∨(x∧y∧x)";
pub const ALT_RIGHT_LOWER_SYMMETRIC: &str = "x∧y∧x = x∧y∧(x∨y∨x)";
pub const ALT_LEFT_LOWER_SYMMETRIC: &str = "x∧y∧x = (x∨y∨x)∧y∧x";
pub const LAW_NORMAL: &str = "x∧y∧z∧w = x∧z∧y∧w";
pub const LAW_CONORMAL: &str = "x∨y∨z∨w = x∨z∨y∨w";
pub const LAW_LEFT_NORMAL: &str = "x∧y∧z = x∧z∧y";
pub const LAW_RIGHT_NORMAL: &str = "y∧z∧x = z∧y∧x";
pub const LAW_RIGHT_QUASI_NORMAL: &str = "y∧x∧a = y∧a∧x∧a";
pub const LAW_LEFT_QUASI_NORMAL: &str = "a∧x∧y = a∧x∧a∧y";
pub const LAW_RIGHT_QUASI_CONORMAL: &str = "y∨x∨a = y∨a∨x∨a";
pub const LAW_LEFT_QUASI_CONORMAL: &str = "a∨x∨y = a∨x∨a∨y";

identity_predicate!(is_rectangular, LAW_RECTANGULAR);
identity_predicate!(is_right_upper_symmetric, LAW_RIGHT_UPPER_SYMMETRIC);
identity_predicate!(is_left_upper_symmetric, LAW_LEFT_UPPER_SYMMETRIC);
identity_predicate!(is_right_lower_symmetric, LAW_RIGHT_LOWER_SYMMETRIC);
identity_predicate!(is_left_lower_symmetric, LAW_LEFT_LOWER_SYMMETRIC);
identity_predicate!(is_normal, LAW_NORMAL);
identity_predicate!(is_conormal, LAW_CONORMAL);
identity_predicate!(is_left_normal, LAW_LEFT_NORMAL);
identity_predicate!(is_right_normal, LAW_RIGHT_NORMAL);
identity_predicate!(is_right_quasi_normal, LAW_RIGHT_QUASI_NORMAL);
identity_predicate!(is_left_quasi_normal, LAW_LEFT_QUASI_NORMAL);
identity_predicate!(is_right_quasi_conormal, LAW_RIGHT_QUASI_CONORMAL);
identity_predicate!(is_left_quasi_conormal, LAW_LEFT_QUASI_CONORMAL);

fn pair_witness(s: &SkewLattice, bad: impl Fn(usize, usize) -> bool) -> Verdict {
    Verdict::from_witness(first_tuple(s.n(), 2, |v| bad(v[0], v[1])))
}

fn triple_witness(s: &SkewLattice, bad: impl Fn(usize, usize, usize) -> bool) -> Verdict {
    Verdict::from_witness(first_tuple(s.n(), 3, |v| bad(v[0], v[1], v[2])))
}

/// `R = D`; witness `(x, y)` with `x D y` but not `x R y`.
pub fn is_right_handed(s: &SkewLattice) -> Verdict {
    let d = greens::green_d(s);
    let r = greens::green_r(s);
    pair_witness(s, |x, y| d.same(x, y) && !r.same(x, y))
}

/// `L = D`; witness `(x, y)` with `x D y` but not `x L y`.
pub fn is_left_handed(s: &SkewLattice) -> Verdict {
    let d = greens::green_d(s);
    let l = greens::green_l(s);
    pair_witness(s, |x, y| d.same(x, y) && !l.same(x, y))
}

fn meet_commute(s: &SkewLattice, x: usize, y: usize) -> bool {
    s.meet(x, y) == s.meet(y, x)
}

fn join_commute(s: &SkewLattice, x: usize, y: usize) -> bool {
    s.join(x, y) == s.join(y, x)
}

/// `x∧y = y∧x ⇔ x∨y = y∨x`.
pub fn is_symmetric(s: &SkewLattice) -> Verdict {
    pair_witness(s, |x, y| meet_commute(s, x, y) != join_commute(s, x, y))
}

/// `x∧y = y∧x ⇒ x∨y = y∨x`.
pub fn is_upper_symmetric(s: &SkewLattice) -> Verdict {
    pair_witness(s, |x, y| meet_commute(s, x, y) && !join_commute(s, x, y))
}

/// `x∨y = y∨x ⇒ x∧y = y∧x`.
pub fn is_lower_symmetric(s: &SkewLattice) -> Verdict {
    pair_witness(s, |x, y| join_commute(s, x, y) && !meet_commute(s, x, y))
}

pub fn is_right_symmetric(s: &SkewLattice) -> Verdict {
    Verdict::all([is_right_upper_symmetric(s), is_right_lower_symmetric(s)])
}

pub fn is_left_symmetric(s: &SkewLattice) -> Verdict {
    Verdict::all([is_left_upper_symmetric(s), is_left_lower_symmetric(s)])
}

/// `z∨x = z∨y ∧ z∧x = z∧y ⇒ x = y`; witness `(x, y, z)`.
pub fn is_left_cancellative(s: &SkewLattice) -> Verdict {
    triple_witness(s, |x, y, z| {
        x != y && s.join(z, x) == s.join(z, y) && s.meet(z, x) == s.meet(z, y)
    })
}

/// `x∨z = y∨z ∧ x∧z = y∧z ⇒ x = y`; witness `(x, y, z)`.
pub fn is_right_cancellative(s: &SkewLattice) -> Verdict {
    triple_witness(s, |x, y, z| {
        x != y && s.join(x, z) == s.join(y, z) && s.meet(x, z) == s.meet(y, z)
    })
}

pub fn is_cancellative(s: &SkewLattice) -> Verdict {
    Verdict::all([is_left_cancellative(s), is_right_cancellative(s)])
}

/// `x∨z∨x = y∨z∨y ∧ x∧z∧x = y∧z∧y ⇒ x = y`; witness `(x, y, z)`.
pub fn is_simply_cancellative(s: &SkewLattice) -> Verdict {
    triple_witness(s, |x, y, z| {
        x != y && s.join3(x, z, x) == s.join3(y, z, y) && s.meet3(x, z, x) == s.meet3(y, z, y)
    })
}

pub fn is_upper_cancellative(s: &SkewLattice) -> Verdict {
    Verdict::all([is_upper_symmetric(s), is_simply_cancellative(s)])
}

pub fn is_lower_cancellative(s: &SkewLattice) -> Verdict {
    Verdict::all([is_lower_symmetric(s), is_simply_cancellative(s)])
}

/// Replaces quotient elements in a witness by the least element of their class.
fn lift_witness(q: &QuotientMap, v: Verdict) -> Verdict {
    let reps: Vec<usize> = (0..q.quotient.n()).map(|c| q.fiber(c).least().unwrap()).collect();
    Verdict {
        holds: v.holds,
        witness: v.witness.map(|w| w.into_iter().map(|c| reps[c]).collect()),
    }
}

/// `S/R` is cancellative.
pub fn is_left_coset_cancellative(s: &SkewLattice) -> Verdict {
    let q = greens::left_image(s);
    let v = is_cancellative(&q.quotient);
    lift_witness(&q, v)
}

/// `S/L` is cancellative.
pub fn is_right_coset_cancellative(s: &SkewLattice) -> Verdict {
    let q = greens::right_image(s);
    let v = is_cancellative(&q.quotient);
    lift_witness(&q, v)
}

/// An `M₃` or `N₅` inside a lattice, as `[bottom, a, b, c, top]`. For `N₅`
/// the chain is `bottom < a < c < top` and `b` is the odd element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ForbiddenSublattice {
    M3([usize; 5]),
    N5([usize; 5]),
}

impl ForbiddenSublattice {
    pub fn elements(self) -> [usize; 5] {
        match self {
            ForbiddenSublattice::M3(e) | ForbiddenSublattice::N5(e) => e,
        }
    }
}

/// Scan of a lattice for a five-element sublattice isomorphic to `M₃` or `N₅`.
/// Every such sublattice arises from an incomparable pair `a, b` completed by
/// `a∧b`, `a∨b` and a fifth element `c`.
pub fn forbidden_sublattice(l: &SkewLattice) -> Option<ForbiddenSublattice> {
    let n = l.n();
    let le = |x: usize, y: usize| l.meet(x, y) == x;
    for a in 0..n {
        for b in 0..n {
            if le(a, b) || le(b, a) {
                continue;
            }
            let (o, t) = (l.meet(a, b), l.join(a, b));
            for c in 0..n {
                if c == a || c == b {
                    continue;
                }
                let beside_b = l.meet(c, b) == o && l.join(c, b) == t;
                if beside_b && a < b && b < c && l.meet(c, a) == o && l.join(c, a) == t {
                    return Some(ForbiddenSublattice::M3([o, a, b, c, t]));
                }
                if beside_b && le(a, c) {
                    return Some(ForbiddenSublattice::N5([o, a, b, c, t]));
                }
            }
        }
    }
    None
}

/// `S/D` is distributive: no `M₃`/`N₅` in the lattice image. The witness lists
/// the least element of each of the five D-classes.
pub fn is_quasi_distributive(s: &SkewLattice) -> Verdict {
    let q = greens::lattice_image(s);
    let v = Verdict::from_witness(forbidden_sublattice(&q.quotient).map(|f| f.elements().to_vec()));
    lift_witness(&q, v)
}

/// The distributive law `x∧(y∨z) = (x∧y)∨(x∧z)` on a lattice; used as an
/// independent check on [`forbidden_sublattice`].
pub fn distributive_law_witness(l: &SkewLattice) -> Option<Vec<usize>> {
    first_tuple(l.n(), 3, |v| {
        let (x, y, z) = (v[0], v[1], v[2]);
        l.meet(x, l.join(y, z)) != l.join(l.meet(x, y), l.meet(x, z))
    })
}

/// The full battery in reporting order.
pub static REGISTRY: &[Predicate] = &[
    Predicate { name: "rectangular", kind: PredicateKind::Identity, law: LAW_RECTANGULAR, eval: is_rectangular },
    Predicate { name: "right-handed", kind: PredicateKind::Structural, law: "R = D", eval: is_right_handed },
    Predicate { name: "left-handed", kind: PredicateKind::Structural, law: "L = D", eval: is_left_handed },
    Predicate { name: "symmetric", kind: PredicateKind::QuasiIdentity, law: "x∧y=y∧x ⇔ x∨y=y∨x", eval: is_symmetric },
    Predicate { name: "upper-symmetric", kind: PredicateKind::QuasiIdentity, law: "x∧y=y∧x ⇒ x∨y=y∨x", eval: is_upper_symmetric },
    Predicate { name: "lower-symmetric", kind: PredicateKind::QuasiIdentity, law: "x∨y=y∨x ⇒ x∧y=y∧x", eval: is_lower_symmetric },
    Predicate { name: "right-upper-symmetric", kind: PredicateKind::Identity, law: LAW_RIGHT_UPPER_SYMMETRIC, eval: is_right_upper_symmetric },
    Predicate { name: "left-upper-symmetric", kind: PredicateKind::Identity, law: LAW_LEFT_UPPER_SYMMETRIC, eval: is_left_upper_symmetric },
    Predicate { name: "right-lower-symmetric", kind: PredicateKind::Identity, law: LAW_RIGHT_LOWER_SYMMETRIC, eval: is_right_lower_symmetric },
    Predicate { name: "left-lower-symmetric", kind: PredicateKind::Identity, law: LAW_LEFT_LOWER_SYMMETRIC, eval: is_left_lower_symmetric },
    Predicate { name: "right-symmetric", kind: PredicateKind::Identity, law: "right upper and right lower symmetric", eval: is_right_symmetric },
    Predicate { name: "left-symmetric", kind: PredicateKind::Identity, law: "left upper and left lower symmetric", eval: is_left_symmetric },
    Predicate { name: "normal", kind: PredicateKind::Identity, law: LAW_NORMAL, eval: is_normal },
    Predicate { name: "conormal", kind: PredicateKind::Identity, law: LAW_CONORMAL, eval: is_conormal },
    Predicate { name: "left-normal", kind: PredicateKind::Identity, law: LAW_LEFT_NORMAL, eval: is_left_normal },
    Predicate { name: "right-normal", kind: PredicateKind::Identity, law: LAW_RIGHT_NORMAL, eval: is_right_normal },
    Predicate { name: "right-quasi-normal", kind: PredicateKind::Identity, law: LAW_RIGHT_QUASI_NORMAL, eval: is_right_quasi_normal },
    Predicate { name: "left-quasi-normal", kind: PredicateKind::Identity, law: LAW_LEFT_QUASI_NORMAL, eval: is_left_quasi_normal },
    Predicate { name: "right-quasi-conormal", kind: PredicateKind::Identity, law: LAW_RIGHT_QUASI_CONORMAL, eval: is_right_quasi_conormal },
    Predicate { name: "left-quasi-conormal", kind: PredicateKind::Identity, law: LAW_LEFT_QUASI_CONORMAL, eval: is_left_quasi_conormal },
    Predicate { name: "cancellative", kind: PredicateKind::QuasiIdentity, law: "left and right cancellative", eval: is_cancellative },
    Predicate { name: "left-cancellative", kind: PredicateKind::QuasiIdentity, law: "z∨x=z∨y ∧ z∧x=z∧y ⇒ x=y", eval: is_left_cancellative },
    Predicate { name: "right-cancellative", kind: PredicateKind::QuasiIdentity, law: "x∨z=y∨z ∧ x∧z=y∧z ⇒ x=y", eval: is_right_cancellative },
    Predicate { name: "simply-cancellative", kind: PredicateKind::QuasiIdentity, law: "x∨z∨x=y∨z∨y ∧ x∧z∧x=y∧z∧y ⇒ x=y", eval: is_simply_cancellative },
    Predicate { name: "upper-cancellative", kind: PredicateKind::QuasiIdentity, law: "upper symmetric and simply cancellative", eval: is_upper_cancellative },
    Predicate { name: "lower-cancellative", kind: PredicateKind::QuasiIdentity, law: "lower symmetric and simply cancellative", eval: is_lower_cancellative },
    Predicate { name: "left-coset-cancellative", kind: PredicateKind::Structural, law: "S/R cancellative", eval: is_left_coset_cancellative },
    Predicate { name: "right-coset-cancellative", kind: PredicateKind::Structural, law: "S/L cancellative", eval: is_right_coset_cancellative },
    Predicate { name: "quasi-distributive", kind: PredicateKind::Structural, law: "S/D distributive", eval: is_quasi_distributive },
];

pub fn predicate(name: &str) -> Option<&'static Predicate> {
    REGISTRY.iter().find(|p| p.name == name)
}

pub fn predicate_names() -> impl Iterator<Item = &'static str> {
    REGISTRY.iter().map(|p| p.name)
}

/// Predicate results in registry (or requested) order; serializes as a JSON object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassificationReport {
    pub results: Vec<(String, Verdict)>,
}

impl ClassificationReport {
    pub fn get(&self, name: &str) -> Option<&Verdict> {
        self.results.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn holds(&self, name: &str) -> Option<bool> {
        self.get(name).map(|v| v.holds)
    }

    /// Names of the predicates that hold, in report order.
    pub fn fingerprint(&self) -> Vec<&str> {
        self.results
            .iter()
            .filter(|(_, v)| v.holds)
            .map(|(n, _)| n.as_str())
            .collect()
    }
}

impl Serialize for ClassificationReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.results.len()))?;
        for (name, v) in &self.results {
            map.serialize_entry(name, v)?;
        }
        map.end()
    }
}

/// Runs the named predicates, or the whole registry when `names` is `None`.
pub fn classify(s: &SkewLattice, names: Option<&[&str]>) -> Result<ClassificationReport, VarietyError> {
    let selected: Vec<&Predicate> = match names {
        None => REGISTRY.iter().collect(),
        Some(ns) => ns
            .iter()
            .map(|n| predicate(n).ok_or_else(|| VarietyError::UnknownPredicate(n.to_string())))
            .collect::<Result<_, _>>()?,
    };
    Ok(ClassificationReport {
        results: selected
            .into_iter()
            .map(|p| (p.name.to_string(), (p.eval)(s)))
            .collect(),
    })
}

/// The four one-sided symmetry flavors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flavor {
    RightUpper,
    LeftUpper,
    RightLower,
    LeftLower,
}

impl Flavor {
    pub const ALL: [Flavor; 4] = [Flavor::RightUpper, Flavor::LeftUpper, Flavor::RightLower, Flavor::LeftLower];

    pub fn name(self) -> &'static str {
        match self {
            Flavor::RightUpper => "right-upper-symmetric",
            Flavor::LeftUpper => "left-upper-symmetric",
            Flavor::RightLower => "right-lower-symmetric",
            Flavor::LeftLower => "left-lower-symmetric",
        }
    }

    pub fn law(self) -> &'static str {
        match self {
            Flavor::RightUpper => LAW_RIGHT_UPPER_SYMMETRIC,
            Flavor::LeftUpper => LAW_LEFT_UPPER_SYMMETRIC,
            Flavor::RightLower => LAW_RIGHT_LOWER_SYMMETRIC,
            Flavor::LeftLower => LAW_LEFT_LOWER_SYMMETRIC,
        }
    }

    /// The variant with `x∧y∧x` (or `x∨y∨x`) in place of the two-letter term.
    pub fn alternative_law(self) -> &'static str {
        match self {
            Flavor::RightUpper => ALT_RIGHT_UPPER_SYMMETRIC,
            Flavor::LeftUpper => ALT_LEFT_UPPER_SYMMETRIC,
            Flavor::RightLower => ALT_RIGHT_LOWER_SYMMETRIC,
            Flavor::LeftLower => ALT_LEFT_LOWER_SYMMETRIC,
        }
    }

    pub fn by_identity(self, s: &SkewLattice) -> bool {
        by_identity(s, self.law()).holds
    }

    pub fn by_alternative_identity(self, s: &SkewLattice) -> bool {
        by_identity(s, self.alternative_law()).holds
    }

    /// Right flavors look at `S/L`, left flavors at `S/R`.
    pub fn by_factor(self, s: &SkewLattice) -> bool {
        let q = match self {
            Flavor::RightUpper | Flavor::RightLower => greens::right_image(s),
            Flavor::LeftUpper | Flavor::LeftLower => greens::left_image(s),
        };
        match self {
            Flavor::RightUpper | Flavor::LeftUpper => is_upper_symmetric(&q.quotient).holds,
            Flavor::RightLower | Flavor::LeftLower => is_lower_symmetric(&q.quotient).holds,
        }
    }

    /// The commutation form, e.g. right-meet commuting pairs right-join commute.
    pub fn by_commutation(self, s: &SkewLattice) -> bool {
        s.elements().all(|x| {
            s.elements().all(|y| {
                let c = commutation_unchecked(s, x, y);
                match self {
                    Flavor::RightUpper => !c.right_meet || c.right_join,
                    Flavor::LeftUpper => !c.left_meet || c.left_join,
                    Flavor::RightLower => !c.right_join || c.right_meet,
                    Flavor::LeftLower => !c.left_join || c.left_meet,
                }
            })
        })
    }
}

/// The six commutation relations between two elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Commutation {
    pub meet_commute: bool,
    pub join_commute: bool,
    /// `x∧y = x∧y∧x`
    pub right_meet: bool,
    /// `x∨y = y∨x∨y`
    pub right_join: bool,
    /// `x∧y = y∧x∧y`
    pub left_meet: bool,
    /// `x∨y = x∨y∨x`
    pub left_join: bool,
}

fn commutation_unchecked(s: &SkewLattice, x: usize, y: usize) -> Commutation {
    let m = s.meet(x, y);
    let j = s.join(x, y);
    Commutation {
        meet_commute: m == s.meet(y, x),
        join_commute: j == s.join(y, x),
        right_meet: m == s.meet(m, x),
        right_join: j == s.join(y, j),
        left_meet: m == s.meet(y, m),
        left_join: j == s.join(j, x),
    }
}

pub fn commutation_classes(s: &SkewLattice, x: usize, y: usize) -> Result<Commutation, VarietyError> {
    for z in [x, y] {
        if z >= s.n() {
            return Err(VarietyError::ElementOutOfRange { x: z, n: s.n() });
        }
    }
    Ok(commutation_unchecked(s, x, y))
}

/// Elements with a trivial D-class.
pub fn center(s: &SkewLattice) -> ElemSet {
    singleton_classes(&greens::green_d(s))
}

/// Elements with a trivial R-class.
pub fn right_center(s: &SkewLattice) -> ElemSet {
    singleton_classes(&greens::green_r(s))
}

/// Elements with a trivial L-class.
pub fn left_center(s: &SkewLattice) -> ElemSet {
    singleton_classes(&greens::green_l(s))
}

fn singleton_classes(p: &Partition) -> ElemSet {
    p.blocks()
        .iter()
        .filter(|b| b.len() == 1)
        .fold(ElemSet::EMPTY, |acc, b| acc.union(*b))
}

/// Equational descriptions of the one-sided centers. Indices 0..4 describe
/// `Z_R`, 4..8 describe `Z_L`; each holds for `a` when it holds for all `b`.
pub const CENTER_CLAUSES: [&str; 8] = [
    "b∨a = a∨b∨a",
    "a∨b = b∨a∨b",
    "a∧b = a∧b∧a",
    "b∧a = b∧a∧b",
    "a∨b = a∨b∨a",
    "b∨a = b∨a∨b",
    "a∧b = b∧a∧b",
    "b∧a = a∧b∧a",
];

/// Elements `a` satisfying clause `i` of [`CENTER_CLAUSES`] for every `b`.
pub fn center_by_clause(s: &SkewLattice, i: usize) -> ElemSet {
    s.elements()
        .filter(|&a| {
            s.elements().all(|b| match i {
                0 => s.join(b, a) == s.join3(a, b, a),
                1 => s.join(a, b) == s.join3(b, a, b),
                2 => s.meet(a, b) == s.meet3(a, b, a),
                3 => s.meet(b, a) == s.meet3(b, a, b),
                4 => s.join(a, b) == s.join3(a, b, a),
                5 => s.join(b, a) == s.join3(b, a, b),
                6 => s.meet(a, b) == s.meet3(b, a, b),
                7 => s.meet(b, a) == s.meet3(a, b, a),
                _ => panic!("center clause {i} out of range"),
            })
        })
        .collect()
}

/// Elements that meet- and join-commute with everything.
pub fn center_by_commutation(s: &SkewLattice) -> ElemSet {
    s.elements()
        .filter(|&a| s.elements().all(|b| meet_commute(s, a, b) && join_commute(s, a, b)))
        .collect()
}

/// First `(y, x)` with `x ∈ y∧S` (or `S∧y` when `left_ideal`) and another
/// member of the ideal in the same block of `classes`.
pub fn ideal_class_witness(s: &SkewLattice, left_ideal: bool, classes: &Partition) -> Option<[usize; 2]> {
    for y in s.elements() {
        let (right, left) = greens::principal_ideals(s, y).expect("in range");
        let ideal = if left_ideal { left } else { right };
        for x in ideal.iter() {
            if classes.class(x).intersection(ideal).len() > 1 {
                return Some([y, x]);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{chain, dual, mirror, rectangular};

    #[test]
    fn eval_basics() {
        let c3 = chain(3).unwrap();
        let t = Identity::parse("t", "x∧y∧z = x").unwrap().lhs;
        assert_eq!(eval_term(&c3, &t, &[2, 1, 0]).unwrap(), 0);
        assert_eq!(eval_term(&c3, &Term::var(0), &[1]).unwrap(), 1);
        let idem = Term::meet(Term::var(0), Term::var(0));
        assert!((0..3).all(|x| eval_term(&c3, &idem, &[x]).unwrap() == x));
        assert_eq!(
            eval_term(&c3, &t, &[0]),
            Err(VarietyError::ArityMismatch { expected: 3, got: 1 })
        );
    }

    #[test]
    fn identity_checks_on_rectangular() {
        let s = rectangular(2, 2).unwrap();
        let normal = Identity::parse("normal", LAW_NORMAL).unwrap();
        assert_eq!(check_identity(&s, &normal).unwrap(), None);
        let comm = Identity::parse("comm", "x∧y = y∧x").unwrap();
        assert_eq!(check_identity(&s, &comm).unwrap(), Some(vec![0, 1]));
        let rect = Identity::parse("rect", "x∧y∧x = x").unwrap();
        for (l, r) in [(1, 1), (1, 3), (2, 2), (3, 2)] {
            assert_eq!(check_identity(&rectangular(l, r).unwrap(), &rect).unwrap(), None);
        }
        let five = Identity::parse("five", "a∧b∧c∧d∧e = a").unwrap();
        assert!(matches!(check_identity(&s, &five), Err(VarietyError::ArityTooLarge { arity: 5, .. })));
    }

    #[test]
    fn parser_round_trips_display() {
        let id = Identity::parse("p", "x ∨ y ∨ x = (y & x) | y | x").unwrap();
        assert_eq!(id.arity, 2);
        assert_eq!(id.to_string(), "x∨y∨x = (y∧x)∨y∨x");
        let again = Identity::parse("p", &id.to_string()).unwrap();
        assert_eq!(again.lhs, id.lhs);
        assert_eq!(again.rhs, id.rhs);
        assert!(matches!(Identity::parse("bad", "x∧y∨z = x"), Err(VarietyError::Parse { .. })));
        assert!(matches!(Identity::parse("bad", "x∧ = x"), Err(VarietyError::Parse { .. })));
        assert!(matches!(Identity::parse("bad", "x∧y"), Err(VarietyError::Parse { .. })));
    }

    #[test]
    fn lattices_satisfy_everything() {
        let c3 = chain(3).unwrap();
        let report = classify(&c3, None).unwrap();
        for (name, v) in &report.results {
            assert_eq!(v.holds, name != "rectangular", "{name} on a chain");
        }
    }

    #[test]
    fn rectangular_2x2_classification() {
        let s = rectangular(2, 2).unwrap();
        let r = classify(&s, None).unwrap();
        assert_eq!(r.holds("symmetric"), Some(true));
        assert_eq!(r.holds("cancellative"), Some(true));
        assert_eq!(r.holds("right-handed"), Some(false));
        assert_eq!(r.get("right-handed").unwrap().witness, Some(vec![0, 2]));
        assert_eq!(r.holds("rectangular"), Some(true));
    }

    #[test]
    fn handedness_and_mirror() {
        let lh = rectangular(2, 1).unwrap();
        let rh = rectangular(1, 2).unwrap();
        assert!(is_left_handed(&lh).holds && !is_right_handed(&lh).holds);
        assert!(is_right_handed(&rh).holds && !is_left_handed(&rh).holds);
        assert_eq!(mirror(&lh), rh);
        assert!(is_right_handed(&dual(&lh)).holds);
    }

    #[test]
    fn centers_of_small_algebras() {
        let lh = rectangular(2, 1).unwrap();
        assert_eq!(right_center(&lh), ElemSet::full(2));
        assert_eq!(left_center(&lh), ElemSet::EMPTY);
        assert_eq!(center(&lh), ElemSet::EMPTY);
        let sq = rectangular(2, 2).unwrap();
        assert!(center(&sq).is_empty() && right_center(&sq).is_empty() && left_center(&sq).is_empty());
        let c = chain(3).unwrap();
        assert_eq!(center(&c), ElemSet::full(3));
        for s in [lh, sq, c] {
            for i in 0..4 {
                assert_eq!(center_by_clause(&s, i), right_center(&s));
                assert_eq!(center_by_clause(&s, i + 4), left_center(&s));
            }
            assert_eq!(center_by_commutation(&s), center(&s));
        }
    }

    #[test]
    fn commutation_flags() {
        let s = rectangular(2, 2).unwrap();
        let c = commutation_classes(&s, 1, 1).unwrap();
        assert!(c.meet_commute && c.join_commute && c.right_meet && c.right_join && c.left_meet && c.left_join);
        assert!(commutation_classes(&s, 0, 9).is_err());
    }

    #[test]
    fn m3_and_n5_are_found() {
        use crate::algebra::{OpTable, SkewLattice};
        // M3 on {0 < 1,2,3 < 4}
        let meet = OpTable::from_fn(5, |x, y| if x == y { x } else if x == 4 { y } else if y == 4 { x } else { 0 });
        let join = OpTable::from_fn(5, |x, y| if x == y { x } else if x == 0 { y } else if y == 0 { x } else { 4 });
        let m3 = SkewLattice::new(meet, join).unwrap();
        assert_eq!(forbidden_sublattice(&m3), Some(ForbiddenSublattice::M3([0, 1, 2, 3, 4])));
        assert!(distributive_law_witness(&m3).is_some());
        // N5 on {0 < 1 < 3 < 4, 0 < 2 < 4}
        let le = |x: usize, y: usize| x == y || x == 0 || y == 4 || (x == 1 && y == 3);
        let glb = |x: usize, y: usize| (0..5).filter(|&z| le(z, x) && le(z, y)).max_by_key(|&z| (0..5).filter(|&w| le(w, z)).count()).unwrap();
        let lub = |x: usize, y: usize| (0..5).filter(|&z| le(x, z) && le(y, z)).min_by_key(|&z| (0..5).filter(|&w| le(w, z)).count()).unwrap();
        let n5 = SkewLattice::new(OpTable::from_fn(5, glb), OpTable::from_fn(5, lub)).unwrap();
        assert!(matches!(forbidden_sublattice(&n5), Some(ForbiddenSublattice::N5(_))));
        assert!(distributive_law_witness(&n5).is_some());
        assert_eq!(forbidden_sublattice(&chain(4).unwrap()), None);
    }

    #[test]
    fn unknown_predicate_is_reported() {
        let s = chain(1).unwrap();
        assert_eq!(
            classify(&s, Some(&["normal", "nope"])),
            Err(VarietyError::UnknownPredicate("nope".into()))
        );
        let r = classify(&s, Some(&["normal"])).unwrap();
        assert_eq!(serde_json::to_string(&r).unwrap(), r#"{"normal":{"holds":true}}"#);
    }
}
