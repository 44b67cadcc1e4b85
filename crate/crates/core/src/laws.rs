//! Executable coset laws: each check evaluates both sides of a stated
//! equivalence or implication on one algebra and records whether they agree.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cosets::{self, comparable_pairs, join_left, join_right, join_sandwich, meet_left, meet_right, meet_sandwich};
use crate::decompose::skew_diamonds;
use crate::greens;
use crate::varieties::{self as v, Verdict};
use crate::{ElemSet, SkewLattice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Assertion {
    /// `lhs ⇔ rhs`.
    Iff,
    /// `lhs ⇒ rhs`.
    Implies,
    /// `lhs` alone; `rhs` is unused.
    Holds,
    /// Recorded for the report only; never discordant.
    Observation,
}

/// One evaluated instance of a clause.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Record {
    pub clause: &'static str,
    pub assertion: Assertion,
    pub hypotheses: Vec<&'static str>,
    pub applicable: bool,
    /// Classes involved: `[J, A, B, M]` for a diamond, `[A, B]` for a pair.
    pub instance: Vec<ElemSet>,
    pub elements: Vec<usize>,
    pub lhs: bool,
    pub rhs: bool,
}

impl Record {
    pub fn new(
        clause: &'static str,
        assertion: Assertion,
        instance: Vec<ElemSet>,
        elements: Vec<usize>,
        lhs: bool,
        rhs: bool,
    ) -> Self {
        Record {
            clause,
            assertion,
            hypotheses: Vec::new(),
            applicable: true,
            instance,
            elements,
            lhs,
            rhs,
        }
    }

    /// The assertion fails on an applicable record.
    pub fn violated(&self) -> bool {
        self.applicable
            && match self.assertion {
                Assertion::Iff => self.lhs != self.rhs,
                Assertion::Implies => self.lhs && !self.rhs,
                Assertion::Holds => !self.lhs,
                Assertion::Observation => false,
            }
    }

    /// The equivalence read from an observation record held.
    pub fn agrees(&self) -> bool {
        self.lhs == self.rhs
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum ReportVerdict {
    Concordant,
    Discordant { witness: Box<Record> },
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConcordanceReport {
    pub theorem: String,
    pub algebra: String,
    pub records: Vec<Record>,
    #[serde(flatten)]
    pub verdict: ReportVerdict,
}

impl ConcordanceReport {
    pub fn new(theorem: impl Into<String>, algebra: impl Into<String>) -> Self {
        ConcordanceReport {
            theorem: theorem.into(),
            algebra: algebra.into(),
            records: Vec::new(),
            verdict: ReportVerdict::NotApplicable,
        }
    }

    pub fn push(&mut self, r: Record) {
        self.records.push(r);
    }

    fn push_gated(&mut self, gate: &Gate, mut r: Record) {
        r.hypotheses = gate.names.clone();
        r.applicable = gate.holds;
        self.records.push(r);
    }

    /// Sets the verdict. The witness is the violated record with the least
    /// element tuple.
    pub fn finish(mut self) -> Self {
        let worst = self
            .records
            .iter()
            .filter(|r| r.violated())
            .min_by(|a, b| (&a.elements, a.clause).cmp(&(&b.elements, b.clause)));
        self.verdict = match worst {
            Some(r) => ReportVerdict::Discordant { witness: Box::new(r.clone()) },
            None if self.records.iter().any(|r| r.applicable && r.assertion != Assertion::Observation) => {
                ReportVerdict::Concordant
            }
            None => ReportVerdict::NotApplicable,
        };
        self
    }

    pub fn is_discordant(&self) -> bool {
        matches!(self.verdict, ReportVerdict::Discordant { .. })
    }

    pub fn observations(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| r.assertion == Assertion::Observation)
    }

    /// The observation record for `clause`, if any instance was recorded.
    pub fn observation(&self, clause: &str) -> Option<&Record> {
        self.observations().find(|r| r.clause == clause)
    }
}

/// `n{order}-{hash}` from the two tables.
pub fn algebra_id(s: &SkewLattice) -> String {
    let mut h = DefaultHasher::new();
    s.meet_table().entries().hash(&mut h);
    s.join_table().entries().hash(&mut h);
    format!("n{}-{:016x}", s.n(), h.finish())
}

struct Gate {
    names: Vec<&'static str>,
    holds: bool,
}

impl Gate {
    fn new(hyps: &[(&'static str, &Verdict)]) -> Self {
        Gate {
            names: hyps.iter().map(|h| h.0).collect(),
            holds: hyps.iter().all(|h| h.1.holds),
        }
    }

    fn none() -> Self {
        Gate { names: Vec::new(), holds: true }
    }
}

/// First instance on which a universally quantified condition fails.
type Witness = Option<(Vec<ElemSet>, Vec<usize>)>;

/// An algebra-level record comparing a predicate with a family condition.
fn family_record(clause: &'static str, assertion: Assertion, pred: &Verdict, fam: &Witness) -> Record {
    let (instance, elements) = match (fam, &pred.witness) {
        (Some((i, e)), _) => (i.clone(), e.clone()),
        (None, Some(w)) => (Vec::new(), w.clone()),
        (None, None) => (Vec::new(), Vec::new()),
    };
    Record::new(clause, assertion, instance, elements, pred.holds, fam.is_none())
}

fn both(x: &Witness, y: &Witness) -> Witness {
    x.clone().or_else(|| y.clone())
}

/// A diamond as `[J, A, B, M]`.
type Quad = [ElemSet; 4];

fn diamonds(s: &SkewLattice) -> Vec<Quad> {
    skew_diamonds(s)
        .expect("diamond construction is internally consistent")
        .into_iter()
        .map(|d| [d.top, d.left, d.right, d.bottom])
        .collect()
}

/// Every diamond in both orientations of its middle classes.
fn oriented_diamonds(s: &SkewLattice) -> Vec<Quad> {
    diamonds(s)
        .into_iter()
        .flat_map(|[j, a, b, m]| [[j, a, b, m], [j, b, a, m]])
        .collect()
}

fn first_single(quads: &[Quad], pick: usize, ok: impl Fn(&Quad, usize) -> bool) -> Witness {
    quads.iter().find_map(|q| q[pick].iter().find(|&x| !ok(q, x)).map(|x| (q.to_vec(), vec![x])))
}

fn first_pair(quads: &[Quad], pick: usize, ok: impl Fn(&Quad, usize, usize) -> bool) -> Witness {
    quads.iter().find_map(|q| {
        let set = q[pick];
        set.iter()
            .flat_map(|x| set.iter().map(move |y| (x, y)))
            .find(|&(x, y)| !ok(q, x, y))
            .map(|(x, y)| (q.to_vec(), vec![x, y]))
    })
}

const J: usize = 0;
const A: usize = 1;
const MID_B: usize = 2;
const M: usize = 3;

pub fn check_symmetry_laws(s: &SkewLattice) -> ConcordanceReport {
    let quads = diamonds(s);
    let mut rep = ConcordanceReport::new("symmetry", algebra_id(s));
    let meet_sets = |q: &Quad, m: usize| {
        (
            meet_sandwich(s, q[J], m),
            meet_sandwich(s, q[A], m).intersection(meet_sandwich(s, q[MID_B], m)),
        )
    };
    let join_sets = |q: &Quad, j: usize| {
        (
            join_sandwich(s, q[M], j),
            join_sandwich(s, q[A], j).intersection(join_sandwich(s, q[MID_B], j)),
        )
    };
    let eq_m = first_single(&quads, M, |q, m| {
        let (l, r) = meet_sets(q, m);
        l == r
    });
    let eq_j = first_single(&quads, J, |q, j| {
        let (l, r) = join_sets(q, j);
        l == r
    });
    let incl_m = first_single(&quads, M, |q, m| {
        let (l, r) = meet_sets(q, m);
        r.is_subset(l)
    });
    let incl_j = first_single(&quads, J, |q, j| {
        let (l, r) = join_sets(q, j);
        r.is_subset(l)
    });
    let clause_i = first_pair(&quads, M, |q, m, m2| {
        let lhs = meet_sandwich(s, q[J], m) == meet_sandwich(s, q[J], m2);
        let rhs = meet_sandwich(s, q[A], m) == meet_sandwich(s, q[A], m2)
            && meet_sandwich(s, q[MID_B], m) == meet_sandwich(s, q[MID_B], m2);
        lhs == rhs
    });
    let clause_ii = first_pair(&quads, J, |q, j, j2| {
        let lhs = join_sandwich(s, q[M], j) == join_sandwich(s, q[M], j2);
        let rhs = join_sandwich(s, q[A], j) == join_sandwich(s, q[A], j2)
            && join_sandwich(s, q[MID_B], j) == join_sandwich(s, q[MID_B], j2);
        lhs == rhs
    });
    let sym = v::is_symmetric(s);
    let lower = v::is_lower_symmetric(s);
    let upper = v::is_upper_symmetric(s);
    use Assertion::Iff;
    rep.push(family_record(
        "symmetric ⇔ J∧m∧J=(A∧m∧A)∩(B∧m∧B) & M∨j∨M=(A∨j∨A)∩(B∨j∨B)",
        Iff,
        &sym,
        &both(&eq_m, &eq_j),
    ));
    rep.push(family_record("symmetric ⇔ (i) & (ii)", Iff, &sym, &both(&clause_i, &clause_ii)));
    rep.push(family_record("lower symmetric ⇔ (A∧m∧A)∩(B∧m∧B) ⊆ J∧m∧J", Iff, &lower, &incl_m));
    rep.push(family_record("upper symmetric ⇔ (A∨j∨A)∩(B∨j∨B) ⊆ M∨j∨M", Iff, &upper, &incl_j));
    rep.push(family_record(
        "lower symmetric ⇔ (i): J∧m∧J=J∧m′∧J ⇔ A∧m∧A=A∧m′∧A & B∧m∧B=B∧m′∧B",
        Iff,
        &lower,
        &clause_i,
    ));
    rep.push(family_record(
        "upper symmetric ⇔ (ii): M∨j∨M=M∨j′∨M ⇔ A∨j∨A=A∨j′∨A & B∨j∨B=B∨j′∨B",
        Iff,
        &upper,
        &clause_ii,
    ));
    rep.finish()
}

pub fn check_flat_symmetry_laws(s: &SkewLattice) -> ConcordanceReport {
    let quads = diamonds(s);
    let mut rep = ConcordanceReport::new("flat-symmetry", algebra_id(s));
    let a = first_pair(&quads, M, |q, m, m2| {
        (meet_right(s, m, q[J]) == meet_right(s, m2, q[J]))
            == (meet_right(s, m, q[A]) == meet_right(s, m2, q[A])
                && meet_right(s, m, q[MID_B]) == meet_right(s, m2, q[MID_B]))
    });
    let b = first_pair(&quads, J, |q, j, j2| {
        (join_left(s, q[M], j) == join_left(s, q[M], j2))
            == (join_left(s, q[A], j) == join_left(s, q[A], j2)
                && join_left(s, q[MID_B], j) == join_left(s, q[MID_B], j2))
    });
    let c = first_pair(&quads, M, |q, m, m2| {
        (meet_left(s, q[J], m) == meet_left(s, q[J], m2))
            == (meet_left(s, q[A], m) == meet_left(s, q[A], m2)
                && meet_left(s, q[MID_B], m) == meet_left(s, q[MID_B], m2))
    });
    let d = first_pair(&quads, J, |q, j, j2| {
        (join_right(s, j, q[M]) == join_right(s, j2, q[M]))
            == (join_right(s, j, q[A]) == join_right(s, j2, q[A])
                && join_right(s, j, q[MID_B]) == join_right(s, j2, q[MID_B]))
    });
    use Assertion::Iff;
    rep.push(family_record(
        "(a) right lower symmetric ⇔ (m∧J=m′∧J ⇔ m∧A=m′∧A & m∧B=m′∧B)",
        Iff,
        &v::is_right_lower_symmetric(s),
        &a,
    ));
    rep.push(family_record(
        "(b) right upper symmetric ⇔ (M∨j=M∨j′ ⇔ A∨j=A∨j′ & B∨j=B∨j′)",
        Iff,
        &v::is_right_upper_symmetric(s),
        &b,
    ));
    rep.push(family_record(
        "(c) left lower symmetric ⇔ (J∧m=J∧m′ ⇔ A∧m=A∧m′ & B∧m=B∧m′)",
        Iff,
        &v::is_left_lower_symmetric(s),
        &c,
    ));
    rep.push(family_record(
        "(d) left upper symmetric ⇔ (j∨M=j′∨M ⇔ j∨A=j′∨A & j∨B=j′∨B)",
        Iff,
        &v::is_left_upper_symmetric(s),
        &d,
    ));
    let sym = v::is_symmetric(s);
    let gate = Gate::new(&[("symmetric", &sym)]);
    let mut all_hold = true;
    for q in &quads {
        for m in q[M] {
            let r1 = meet_right(s, m, q[J]) == meet_right(s, m, q[A]).intersection(meet_right(s, m, q[MID_B]));
            let r2 = meet_left(s, q[J], m) == meet_left(s, q[A], m).intersection(meet_left(s, q[MID_B], m));
            all_hold &= r1 && r2;
            rep.push_gated(&gate, Record::new("m∧J=(m∧A)∩(m∧B)", Assertion::Holds, q.to_vec(), vec![m], r1, true));
            rep.push_gated(&gate, Record::new("J∧m=(A∧m)∩(B∧m)", Assertion::Holds, q.to_vec(), vec![m], r2, true));
        }
        for j in q[J] {
            let r1 = join_left(s, q[M], j) == join_left(s, q[A], j).intersection(join_left(s, q[MID_B], j));
            let r2 = join_right(s, j, q[M]) == join_right(s, j, q[A]).intersection(join_right(s, j, q[MID_B]));
            all_hold &= r1 && r2;
            rep.push_gated(&gate, Record::new("M∨j=(A∨j)∩(B∨j)", Assertion::Holds, q.to_vec(), vec![j], r1, true));
            rep.push_gated(&gate, Record::new("j∨M=(j∨A)∩(j∨B)", Assertion::Holds, q.to_vec(), vec![j], r2, true));
        }
    }
    rep.push(Record::new(
        "symmetric ⇔ all four intersection formulas",
        Assertion::Observation,
        Vec::new(),
        Vec::new(),
        sym.holds,
        all_hold,
    ));
    rep.finish()
}

/// Over comparable pairs `A > B`: the first pair `x, x′ ∈ B` where `ok` fails.
fn first_in_pairs(s: &SkewLattice, lower: bool, ok: impl Fn(ElemSet, ElemSet, usize, usize) -> bool) -> Witness {
    comparable_pairs(s).into_iter().find_map(|p| {
        let set = if lower { p.lower } else { p.upper };
        set.iter()
            .flat_map(|x| set.iter().map(move |y| (x, y)))
            .find(|&(x, y)| !ok(p.upper, p.lower, x, y))
            .map(|(x, y)| (vec![p.upper, p.lower], vec![x, y]))
    })
}

/// The two pairings of a quasi-normal identity with coset conditions.
pub const QN_PAIRINGS: [&str; 4] = [
    "left quasi-normal ⇔ (x R x′ ⇒ x∧A=x′∧A)",
    "left quasi-normal ⇔ (x L x′ ⇒ A∧x=A∧x′)",
    "right quasi-normal ⇔ (x R x′ ⇒ x∧A=x′∧A)",
    "right quasi-normal ⇔ (x L x′ ⇒ A∧x=A∧x′)",
];

/// The two readings of each ideal characterization of quasi-normality.
pub const QN_IDEALS: [&str; 4] = [
    "right quasi-normal ⇔ (y∧S)∩R_x={x}",
    "right quasi-normal ⇔ (y∧S)∩L_x={x}",
    "left quasi-normal ⇔ (S∧y)∩L_x={x}",
    "left quasi-normal ⇔ (S∧y)∩R_x={x}",
];

pub fn check_normality_laws(s: &SkewLattice) -> ConcordanceReport {
    let mut rep = ConcordanceReport::new("normality", algebra_id(s));
    let r = greens::green_r(s);
    let l = greens::green_l(s);
    let single_full = comparable_pairs(s).into_iter().find_map(|p| {
        p.lower
            .iter()
            .find(|&b| meet_sandwich(s, p.upper, b) != p.lower)
            .map(|b| (vec![p.upper, p.lower], vec![b]))
    });
    let single_full_up = comparable_pairs(s).into_iter().find_map(|p| {
        p.upper
            .iter()
            .find(|&a| join_sandwich(s, p.lower, a) != p.upper)
            .map(|a| (vec![p.upper, p.lower], vec![a]))
    });
    let cond_i = first_in_pairs(s, true, |a, _, x, y| !l.same(x, y) || meet_left(s, a, x) == meet_left(s, a, y));
    let cond_ii = first_in_pairs(s, true, |a, _, x, y| !r.same(x, y) || meet_right(s, x, a) == meet_right(s, y, a));
    let cond_iii = first_in_pairs(s, false, |_, b, x, y| !r.same(x, y) || join_right(s, x, b) == join_right(s, y, b));
    let cond_iv = first_in_pairs(s, false, |_, b, x, y| !l.same(x, y) || join_left(s, b, x) == join_left(s, b, y));
    let cond_iii_dual = first_in_pairs(s, false, |_, b, x, y| !l.same(x, y) || join_right(s, x, b) == join_right(s, y, b));
    let cond_iv_dual = first_in_pairs(s, false, |_, b, x, y| !r.same(x, y) || join_left(s, b, x) == join_left(s, b, y));
    let normal = v::is_normal(s);
    let conormal = v::is_conormal(s);
    let rqn = v::is_right_quasi_normal(s);
    let lqn = v::is_left_quasi_normal(s);
    let rqc = v::is_right_quasi_conormal(s);
    let lqc = v::is_left_quasi_conormal(s);
    use Assertion::{Iff, Observation};
    rep.push(family_record("normal ⇔ B=A∧b∧A for every pair A>B", Iff, &normal, &single_full));
    rep.push(family_record("conormal ⇔ A=B∨a∨B for every pair A>B", Iff, &conormal, &single_full_up));
    rep.push(family_record(
        "normal ⇔ (i) x L x′ ⇒ A∧x=A∧x′ & (ii) x R x′ ⇒ x∧A=x′∧A",
        Iff,
        &normal,
        &both(&cond_i, &cond_ii),
    ));
    rep.push(family_record(CONORMAL_AS_STATED, Observation, &conormal, &both(&cond_iii, &cond_iv)));
    rep.push(family_record(CONORMAL_DUAL, Iff, &conormal, &both(&cond_iii_dual, &cond_iv_dual)));
    let conj = |x: &Verdict, y: &Verdict| Verdict::all([x.clone(), y.clone()]);
    let qn = conj(&rqn, &lqn);
    let qc = conj(&rqc, &lqc);
    rep.push(Record::new(
        "normal ⇔ right quasi-normal & left quasi-normal",
        Iff,
        Vec::new(),
        normal.witness.clone().or(qn.witness).unwrap_or_default(),
        normal.holds,
        qn.holds,
    ));
    rep.push(Record::new(
        "conormal ⇔ right quasi-conormal & left quasi-conormal",
        Iff,
        Vec::new(),
        conormal.witness.clone().or(qc.witness).unwrap_or_default(),
        conormal.holds,
        qc.holds,
    ));

    let ideal = |right: bool, rel: &greens::Partition| -> Witness {
        s.elements().find_map(|y| {
            let ideal = if right {
                meet_right(s, y, s.universe())
            } else {
                meet_left(s, s.universe(), y)
            };
            ideal
                .iter()
                .find(|&x| rel.class(x).intersection(ideal) != ElemSet::singleton(x))
                .map(|x| (vec![ideal], vec![y, x]))
        })
    };
    let ideal_rows = [
        (QN_IDEALS[0], &rqn, ideal(true, &r)),
        (QN_IDEALS[1], &rqn, ideal(true, &l)),
        (QN_IDEALS[2], &lqn, ideal(false, &l)),
        (QN_IDEALS[3], &lqn, ideal(false, &r)),
    ];
    for (k, (clause, pred, fam)) in ideal_rows.iter().enumerate() {
        let assertion = if k % 2 == 1 { Iff } else { Observation };
        rep.push(family_record(clause, assertion, pred, fam));
    }

    let pairing = [
        (QN_PAIRINGS[0], &lqn, &cond_ii),
        (QN_PAIRINGS[1], &lqn, &cond_i),
        (QN_PAIRINGS[2], &rqn, &cond_ii),
        (QN_PAIRINGS[3], &rqn, &cond_i),
    ];
    for (clause, pred, fam) in pairing {
        if clause != COSET_LQN && clause != COSET_RQN {
            rep.push(family_record(clause, Observation, pred, fam));
        }
    }
    rep.push(family_record(COSET_LQN, Iff, &lqn, &cond_ii));
    rep.push(family_record(COSET_RQN, Iff, &rqn, &cond_i));
    rep.finish()
}

const COSET_LQN: &str = QN_PAIRINGS[0];
const COSET_RQN: &str = QN_PAIRINGS[3];
pub const CONORMAL_AS_STATED: &str = "conormal ⇔ (iii) x R x′ ⇒ x∨B=x′∨B & (iv) x L x′ ⇒ B∨x=B∨x′";
pub const CONORMAL_DUAL: &str = "conormal ⇔ (iii) x L x′ ⇒ x∨B=x′∨B & (iv) x R x′ ⇒ B∨x=B∨x′";

/// Per-diamond coset equalities for `x, x′` in the middle class `A`.
struct Cosets<'a> {
    s: &'a SkewLattice,
    q: Quad,
}

impl Cosets<'_> {
    fn full_up_m(&self, x: usize, y: usize) -> bool {
        join_sandwich(self.s, self.q[M], x) == join_sandwich(self.s, self.q[M], y)
    }
    fn full_up_b(&self, x: usize, y: usize) -> bool {
        join_sandwich(self.s, self.q[MID_B], x) == join_sandwich(self.s, self.q[MID_B], y)
    }
    fn full_down_j(&self, x: usize, y: usize) -> bool {
        meet_sandwich(self.s, self.q[J], x) == meet_sandwich(self.s, self.q[J], y)
    }
    fn full_down_b(&self, x: usize, y: usize) -> bool {
        meet_sandwich(self.s, self.q[MID_B], x) == meet_sandwich(self.s, self.q[MID_B], y)
    }
    /// `M∨x = M∨x′` or `B∨x = B∨x′`.
    fn join_before(&self, set: usize, x: usize, y: usize) -> bool {
        join_left(self.s, self.q[set], x) == join_left(self.s, self.q[set], y)
    }
    /// `x∨M = x′∨M` or `x∨B = x′∨B`.
    fn join_after(&self, set: usize, x: usize, y: usize) -> bool {
        join_right(self.s, x, self.q[set]) == join_right(self.s, y, self.q[set])
    }
    /// `x∧J = x′∧J` or `x∧B = x′∧B`.
    fn meet_after(&self, set: usize, x: usize, y: usize) -> bool {
        meet_right(self.s, x, self.q[set]) == meet_right(self.s, y, self.q[set])
    }
    /// `J∧x = J∧x′` or `B∧x = B∧x′`.
    fn meet_before(&self, set: usize, x: usize, y: usize) -> bool {
        meet_left(self.s, self.q[set], x) == meet_left(self.s, self.q[set], y)
    }
}

type PairLaw = fn(&Cosets, usize, usize) -> bool;

fn full_i(c: &Cosets, x: usize, y: usize) -> bool {
    c.full_up_m(x, y) == c.full_up_b(x, y)
}
fn full_ii(c: &Cosets, x: usize, y: usize) -> bool {
    c.full_down_b(x, y) == c.full_down_j(x, y)
}
fn right_up(c: &Cosets, x: usize, y: usize) -> bool {
    c.join_before(M, x, y) == c.join_before(MID_B, x, y)
}
fn left_up(c: &Cosets, x: usize, y: usize) -> bool {
    c.join_after(M, x, y) == c.join_after(MID_B, x, y)
}
fn right_down(c: &Cosets, x: usize, y: usize) -> bool {
    c.meet_after(MID_B, x, y) == c.meet_after(J, x, y)
}
fn left_down(c: &Cosets, x: usize, y: usize) -> bool {
    c.meet_before(MID_B, x, y) == c.meet_before(J, x, y)
}

fn family(s: &SkewLattice, quads: &[Quad], laws: &[PairLaw]) -> Witness {
    first_pair(quads, A, |q, x, y| {
        let c = Cosets { s, q: *q };
        laws.iter().all(|law| law(&c, x, y))
    })
}

pub const CANCELLATION_PAIRINGS: [&str; 4] = [
    "left coset cancellative ⇔ (M∨x=M∨x′ ⇔ B∨x=B∨x′) ⇔ (x∧B=x′∧B ⇔ x∧J=x′∧J)",
    "right coset cancellative ⇔ (x∨M=x′∨M ⇔ x∨B=x′∨B) ⇔ (B∧x=B∧x′ ⇔ J∧x=J∧x′)",
    "left coset cancellative ⇔ (x∨M=x′∨M ⇔ x∨B=x′∨B) ⇔ (B∧x=B∧x′ ⇔ J∧x=J∧x′)",
    "right coset cancellative ⇔ (M∨x=M∨x′ ⇔ B∨x=B∨x′) ⇔ (x∧B=x′∧B ⇔ x∧J=x′∧J)",
];

pub const HANDED_CANCELLATION: [&str; 4] = [
    "right cancellative ⇔ simply cancellative & right upper symmetric & left lower symmetric",
    "left cancellative ⇔ simply cancellative & left upper symmetric & right lower symmetric",
    "right cancellative ⇔ simply cancellative & left upper symmetric & right lower symmetric",
    "left cancellative ⇔ simply cancellative & right upper symmetric & left lower symmetric",
];

pub fn check_cancellation_laws(s: &SkewLattice) -> ConcordanceReport {
    let quads = oriented_diamonds(s);
    let mut rep = ConcordanceReport::new("cancellation", algebra_id(s));
    let none = Gate::none();
    use Assertion::{Iff, Implies, Observation};
    for q in &quads {
        let c = Cosets { s, q: *q };
        for x in q[A] {
            for y in q[A] {
                let rows: [(&'static str, bool, bool); 6] = [
                    ("M∨x∨M=M∨x′∨M ⇒ B∨x∨B=B∨x′∨B", c.full_up_m(x, y), c.full_up_b(x, y)),
                    ("J∧x∧J=J∧x′∧J ⇒ B∧x∧B=B∧x′∧B", c.full_down_j(x, y), c.full_down_b(x, y)),
                    ("M∨x=M∨x′ ⇒ B∨x=B∨x′", c.join_before(M, x, y), c.join_before(MID_B, x, y)),
                    ("x∧J=x′∧J ⇒ x∧B=x′∧B", c.meet_after(J, x, y), c.meet_after(MID_B, x, y)),
                    ("x∨M=x′∨M ⇒ x∨B=x′∨B", c.join_after(M, x, y), c.join_after(MID_B, x, y)),
                    ("J∧x=J∧x′ ⇒ B∧x=B∧x′", c.meet_before(J, x, y), c.meet_before(MID_B, x, y)),
                ];
                for (clause, lhs, rhs) in rows {
                    rep.push_gated(&none, Record::new(clause, Implies, q.to_vec(), vec![x, y], lhs, rhs));
                }
            }
        }
    }

    let qd = v::is_quasi_distributive(s);
    let sym = v::is_symmetric(s);
    let lower = v::is_lower_symmetric(s);
    let upper = v::is_upper_symmetric(s);
    let canc = v::is_cancellative(s);
    let left_cc = v::is_left_coset_cancellative(s);
    let right_cc = v::is_right_coset_cancellative(s);

    let fi = family(s, &quads, &[full_i]);
    let fii = family(s, &quads, &[full_ii]);
    let g_qd = Gate::new(&[("quasi-distributive", &qd)]);
    for q in &quads {
        let one = [*q];
        let lhs = family(s, &one, &[full_i]).is_none();
        let rhs = family(s, &one, &[right_up, left_up]).is_none();
        rep.push_gated(
            &g_qd,
            Record::new(
                "(M∨x∨M=M∨x′∨M ⇔ B∨x∨B=B∨x′∨B) ⇔ (M∨x=M∨x′ ⇔ B∨x=B∨x′) & (x∨M=x′∨M ⇔ x∨B=x′∨B)",
                Iff,
                q.to_vec(),
                Vec::new(),
                lhs,
                rhs,
            ),
        );
        let lhs = family(s, &one, &[full_ii]).is_none();
        let rhs = family(s, &one, &[right_down, left_down]).is_none();
        rep.push_gated(
            &g_qd,
            Record::new(
                "(B∧x∧B=B∧x′∧B ⇔ J∧x∧J=J∧x′∧J) ⇔ (x∧B=x′∧B ⇔ x∧J=x′∧J) & (B∧x=B∧x′ ⇔ J∧x=J∧x′)",
                Iff,
                q.to_vec(),
                Vec::new(),
                lhs,
                rhs,
            ),
        );
    }

    let g_lower = Gate::new(&[("quasi-distributive", &qd), ("lower symmetric", &lower)]);
    let g_upper = Gate::new(&[("quasi-distributive", &qd), ("upper symmetric", &upper)]);
    let lower_canc = v::is_lower_cancellative(s);
    let upper_canc = v::is_upper_cancellative(s);
    rep.push_gated(
        &g_lower,
        family_record("lower cancellative ⇔ (M∨x∨M=M∨x′∨M ⇔ B∨x∨B=B∨x′∨B)", Iff, &lower_canc, &fi),
    );
    rep.push_gated(
        &g_upper,
        family_record("upper cancellative ⇔ (B∧x∧B=B∧x′∧B ⇔ J∧x∧J=J∧x′∧J)", Iff, &upper_canc, &fii),
    );
    rep.push(family_record(
        "lower cancellative ⇔ (B∧x∧B=B∧x′∧B ⇔ J∧x∧J=J∧x′∧J)",
        Observation,
        &lower_canc,
        &fii,
    ));
    rep.push(family_record(
        "upper cancellative ⇔ (M∨x∨M=M∨x′∨M ⇔ B∨x∨B=B∨x′∨B)",
        Observation,
        &upper_canc,
        &fi,
    ));

    let g_sym = Gate::new(&[("quasi-distributive", &qd), ("symmetric", &sym)]);
    rep.push_gated(&g_sym, family_record("cancellative ⇔ (M∨x∨M=M∨x′∨M ⇔ B∨x∨B=B∨x′∨B)", Iff, &canc, &fi));
    rep.push_gated(&g_sym, family_record("cancellative ⇔ (B∧x∧B=B∧x′∧B ⇔ J∧x∧J=J∧x′∧J)", Iff, &canc, &fii));

    let ru = family(s, &quads, &[right_up]);
    let rd = family(s, &quads, &[right_down]);
    let lu = family(s, &quads, &[left_up]);
    let ld = family(s, &quads, &[left_down]);
    for (clause, pred, f1, f2) in [
        (CANCELLATION_PAIRINGS[0], &left_cc, &ru, &rd),
        (CANCELLATION_PAIRINGS[1], &right_cc, &lu, &ld),
    ] {
        rep.push_gated(&g_sym, family_record(clause, Iff, pred, f1));
        rep.push_gated(&g_sym, family_record(clause, Iff, pred, f2));
    }
    let ql = greens::left_image(s).quotient;
    let qr = greens::right_image(s).quotient;
    let (lq, rq) = (oriented_diamonds(&ql), oriented_diamonds(&qr));
    let observed = [
        (CANCELLATION_PAIRINGS[2], &left_cc, lu.is_none() && ld.is_none(), lu.is_none() == ld.is_none()),
        (CANCELLATION_PAIRINGS[3], &right_cc, ru.is_none() && rd.is_none(), ru.is_none() == rd.is_none()),
        (CANCELLATION_IN_FACTORS[0], &left_cc, family(&ql, &lq, &[right_up]).is_none(), true),
        (CANCELLATION_IN_FACTORS[1], &left_cc, family(&ql, &lq, &[right_down]).is_none(), true),
        (CANCELLATION_IN_FACTORS[2], &right_cc, family(&qr, &rq, &[left_up]).is_none(), true),
        (CANCELLATION_IN_FACTORS[3], &right_cc, family(&qr, &rq, &[left_down]).is_none(), true),
        (CANCELLATION_PLAIN[0], &canc, ru.is_none(), true),
        (CANCELLATION_PLAIN[1], &canc, rd.is_none(), true),
        (CANCELLATION_PLAIN[2], &canc, lu.is_none(), true),
        (CANCELLATION_PLAIN[3], &canc, ld.is_none(), true),
    ];
    for (clause, pred, fam, consistent) in observed {
        let mut r = Record::new(
            clause,
            Observation,
            Vec::new(),
            pred.witness.clone().unwrap_or_default(),
            pred.holds,
            fam && consistent,
        );
        r.hypotheses = g_sym.names.clone();
        r.applicable = g_sym.holds;
        rep.push(r);
    }

    let both_cc = Verdict::all([left_cc.clone(), right_cc.clone()]);
    rep.push(Record::new(
        "cancellative ⇔ left coset cancellative & right coset cancellative",
        Iff,
        Vec::new(),
        canc.witness.clone().or(both_cc.witness.clone()).unwrap_or_default(),
        canc.holds,
        both_cc.holds,
    ));
    rep.push(Record::new(
        "cancellative ⇒ symmetric",
        Implies,
        Vec::new(),
        sym.witness.clone().unwrap_or_default(),
        canc.holds,
        sym.holds,
    ));
    let simply = v::is_simply_cancellative(s);
    let rus = v::is_right_upper_symmetric(s);
    let lus = v::is_left_upper_symmetric(s);
    let rls = v::is_right_lower_symmetric(s);
    let lls = v::is_left_lower_symmetric(s);
    let rc = v::is_right_cancellative(s);
    let lc = v::is_left_cancellative(s);
    let rhs_a = simply.holds && rus.holds && lls.holds;
    let rhs_b = simply.holds && lus.holds && rls.holds;
    for (clause, pred, rhs) in [
        (HANDED_CANCELLATION[2], &rc, rhs_b),
        (HANDED_CANCELLATION[3], &lc, rhs_a),
    ] {
        rep.push(Record::new(clause, Observation, Vec::new(), pred.witness.clone().unwrap_or_default(), pred.holds, rhs));
    }
    rep.push(Record::new(HANDED_CANCELLATION[0], Iff, Vec::new(), rc.witness.clone().unwrap_or_default(), rc.holds, rhs_a));
    rep.push(Record::new(HANDED_CANCELLATION[1], Iff, Vec::new(), lc.witness.clone().unwrap_or_default(), lc.holds, rhs_b));
    let g_s = Gate::new(&[("symmetric", &sym)]);
    rep.push_gated(
        &g_s,
        Record::new("right cancellative ⇔ left cancellative", Iff, Vec::new(), Vec::new(), rc.holds, lc.holds),
    );
    rep.finish()
}

/// The flat laws evaluated on the diamonds of `S/R` and `S/L`.
pub const CANCELLATION_IN_FACTORS: [&str; 4] = [
    "left coset cancellative ⇔ (M∨x=M∨x′ ⇔ B∨x=B∨x′) in S/R",
    "left coset cancellative ⇔ (x∧B=x′∧B ⇔ x∧J=x′∧J) in S/R",
    "right coset cancellative ⇔ (x∨M=x′∨M ⇔ x∨B=x′∨B) in S/L",
    "right coset cancellative ⇔ (B∧x=B∧x′ ⇔ J∧x=J∧x′) in S/L",
];

pub const CANCELLATION_PLAIN: [&str; 4] = [
    "cancellative ⇔ (M∨x=M∨x′ ⇔ B∨x=B∨x′)",
    "cancellative ⇔ (x∧B=x′∧B ⇔ x∧J=x′∧J)",
    "cancellative ⇔ (x∨M=x′∨M ⇔ x∨B=x′∨B)",
    "cancellative ⇔ (B∧x=B∧x′ ⇔ J∧x=J∧x′)",
];

pub fn check_decomposition_laws(s: &SkewLattice) -> ConcordanceReport {
    let mut rep = ConcordanceReport::new("decomposition", algebra_id(s));
    for pair in comparable_pairs(s) {
        for class in [pair.lower, pair.upper] {
            for x in class {
                for y in class {
                    let eqs = cosets::flat_vs_full_correspondence(s, &pair, x, y)
                        .expect("elements drawn from the pair");
                    for e in eqs {
                        rep.push(Record::new(
                            e.name,
                            Assertion::Iff,
                            vec![pair.upper, pair.lower],
                            vec![x, y],
                            e.lhs,
                            e.rhs,
                        ));
                    }
                }
            }
        }
    }
    rep.finish()
}

/// A theorem check over one algebra.
pub type TheoremCheck = fn(&SkewLattice) -> ConcordanceReport;

/// Named theorem checks in reporting order.
pub const THEOREMS: &[(&str, TheoremCheck)] = &[
    ("symmetry", check_symmetry_laws),
    ("flat-symmetry", check_flat_symmetry_laws),
    ("normality", check_normality_laws),
    ("cancellation", check_cancellation_laws),
    ("decomposition", check_decomposition_laws),
];

pub fn check_all(s: &SkewLattice) -> Vec<ConcordanceReport> {
    THEOREMS.iter().map(|(_, f)| f(s)).collect()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LawsError {
    #[error("unknown theorem {0:?}")]
    UnknownTheorem(String),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

pub fn theorem(name: &str) -> Option<fn(&SkewLattice) -> ConcordanceReport> {
    THEOREMS.iter().find(|(n, _)| *n == name).map(|(_, f)| *f)
}

/// Runs every named theorem on every labeled algebra, algebra-major. Each
/// report carries its label as the algebra id. The output does not depend on
/// `workers`.
pub fn verify_grid(
    algebras: &[(String, SkewLattice)],
    theorems: &[&str],
    workers: usize,
) -> Result<Vec<ConcordanceReport>, LawsError> {
    let checks: Vec<_> = theorems
        .iter()
        .map(|t| theorem(t).ok_or_else(|| LawsError::UnknownTheorem(t.to_string())))
        .collect::<Result<_, _>>()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| LawsError::ThreadPool(e.to_string()))?;
    Ok(pool.install(|| {
        algebras
            .par_iter()
            .flat_map_iter(|(label, s)| {
                checks.iter().map(move |f| ConcordanceReport {
                    algebra: label.clone(),
                    ..f(s)
                })
            })
            .collect()
    }))
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{chain, direct_product, rectangular};
    use crate::enumerate::{enumerate, nc5, nc5_elements, Nc5Variant};

    fn catalog(max: usize) -> Vec<SkewLattice> {
        (1..=max).flat_map(|n| enumerate(n, 1).unwrap().algebras).collect()
    }

    /// The order-5 algebras on which the flat-coset form of coset
    /// cancellation, read over the diamonds of `S`, disagrees with the
    /// cancellativity of the factor.
    fn is_flat_counterexample(s: &SkewLattice) -> bool {
        s.n() == 5
            && v::is_symmetric(s).holds
            && v::is_quasi_distributive(s).holds
            && !v::is_cancellative(s).holds
            && v::is_left_coset_cancellative(s).holds != v::is_right_coset_cancellative(s).holds
    }

    #[test]
    fn record_semantics() {
        let r = |a, l, rr| Record::new("c", a, vec![], vec![], l, rr);
        assert!(r(Assertion::Iff, true, false).violated());
        assert!(!r(Assertion::Implies, false, true).violated());
        assert!(r(Assertion::Implies, true, false).violated());
        assert!(r(Assertion::Holds, false, true).violated());
        assert!(!r(Assertion::Observation, true, false).violated());
        let mut g = r(Assertion::Iff, true, false);
        g.applicable = false;
        assert!(!g.violated());
    }

    #[test]
    fn witness_is_least_tuple() {
        let mut rep = ConcordanceReport::new("t", "a");
        rep.push(Record::new("later", Assertion::Iff, vec![], vec![2, 0], true, false));
        rep.push(Record::new("first", Assertion::Iff, vec![], vec![1, 3], true, false));
        rep.push(Record::new("fine", Assertion::Iff, vec![], vec![0, 0], true, true));
        let rep = rep.finish();
        match rep.verdict {
            ReportVerdict::Discordant { witness } => assert_eq!(witness.clause, "first"),
            other => panic!("{other:?}"),
        }
        let empty = ConcordanceReport::new("t", "a").finish();
        assert_eq!(empty.verdict, ReportVerdict::NotApplicable);
    }

    #[test]
    fn lattices_are_concordant() {
        let two = chain(2).unwrap();
        let square = direct_product(&two, &two).unwrap();
        for s in [chain(1).unwrap(), chain(3).unwrap(), square] {
            for rep in check_all(&s) {
                assert!(!rep.is_discordant(), "{}: {:?}", rep.theorem, rep.verdict);
            }
        }
    }

    #[test]
    fn rectangular_has_no_pairs() {
        let s = rectangular(2, 2).unwrap();
        assert!(check_decomposition_laws(&s).records.is_empty());
        assert!(v::is_normal(&s).holds);
        assert!(!check_normality_laws(&s).is_discordant());
    }

    #[test]
    fn unconditional_implications_everywhere() {
        for s in catalog(5) {
            let rep = check_cancellation_laws(&s);
            for r in rep.records.iter().filter(|r| r.assertion == Assertion::Implies && r.hypotheses.is_empty()) {
                assert!(!r.violated(), "{r:?}");
            }
        }
    }

    #[test]
    fn catalog_concordance() {
        let mut flat_failures = 0;
        for s in catalog(5) {
            for rep in check_all(&s) {
                if let ReportVerdict::Discordant { witness } = &rep.verdict {
                    assert_eq!(rep.theorem, "cancellation", "{:?}", witness);
                    assert!(CANCELLATION_PAIRINGS[..2].contains(&witness.clause), "{witness:?}");
                    assert!(is_flat_counterexample(&s));
                    flat_failures += 1;
                }
            }
        }
        assert_eq!(flat_failures, 2);
    }

    #[test]
    fn flat_law_counterexample_by_hand() {
        // 2×2 lattice 0 < 1, {2,3} < 4 with the class {2,3} right-zero for ∧.
        let s = SkewLattice::from_rows(
            &[
                vec![0, 0, 0, 0, 0],
                vec![0, 1, 0, 0, 1],
                vec![0, 0, 2, 3, 2],
                vec![0, 0, 2, 3, 3],
                vec![0, 1, 2, 3, 4],
            ],
            &[
                vec![0, 1, 2, 3, 4],
                vec![1, 1, 4, 4, 4],
                vec![2, 4, 2, 2, 4],
                vec![3, 4, 3, 3, 4],
                vec![4, 4, 4, 4, 4],
            ],
        )
        .unwrap();
        assert!(v::is_symmetric(&s).holds && v::is_quasi_distributive(&s).holds);
        assert!(v::is_left_coset_cancellative(&s).holds);
        let (a, b, m) = (ElemSet::from_iter([2, 3]), ElemSet::singleton(1), ElemSet::singleton(0));
        assert_ne!(join_left(&s, m, 2), join_left(&s, m, 3));
        assert_eq!(join_left(&s, b, 2), join_left(&s, b, 3));
        assert!(a.contains(2));
        let rep = check_cancellation_laws(&s);
        assert!(rep.is_discordant());
        assert!(crate::enumerate::isomorphic(&s, &nc5(Nc5Variant::RightHanded)).is_some());
        for clause in CANCELLATION_IN_FACTORS.iter().chain(&CANCELLATION_PLAIN) {
            assert!(rep.observation(clause).unwrap().agrees(), "{clause}");
        }
    }

    #[test]
    fn observed_pairings() {
        let algebras = catalog(5);
        let holds_everywhere = |theorem: fn(&SkewLattice) -> ConcordanceReport, clause: &str| {
            algebras.iter().all(|s| {
                let rep = theorem(s);
                let ok = rep.observations().filter(|r| r.clause == clause && r.applicable).all(Record::agrees);
                ok
            })
        };
        assert!(!holds_everywhere(check_normality_laws, QN_IDEALS[0]));
        assert!(!holds_everywhere(check_normality_laws, QN_IDEALS[2]));
        assert!(!holds_everywhere(check_normality_laws, QN_PAIRINGS[1]));
        assert!(!holds_everywhere(check_normality_laws, QN_PAIRINGS[2]));
        assert!(!holds_everywhere(check_normality_laws, CONORMAL_AS_STATED));
        for c in CANCELLATION_IN_FACTORS.iter().chain(&CANCELLATION_PLAIN) {
            assert!(holds_everywhere(check_cancellation_laws, c), "{c}");
        }
        assert!(!holds_everywhere(check_cancellation_laws, CANCELLATION_PAIRINGS[2]));
        assert!(!holds_everywhere(check_cancellation_laws, CANCELLATION_PAIRINGS[3]));
    }

    #[test]
    fn normal_not_right_normal_exists() {
        let found = catalog(5)
            .into_iter()
            .find(|s| v::is_normal(s).holds && !v::is_right_normal(s).holds)
            .expect("a normal algebra that is not right normal");
        let rep = check_normality_laws(&found);
        let clause = rep
            .records
            .iter()
            .find(|r| r.clause.starts_with("normal ⇔ (i)"))
            .unwrap();
        assert!(clause.lhs && clause.rhs);
    }

    #[test]
    fn nc5_lower_flat_law_fails() {
        use nc5_elements::*;
        for variant in [Nc5Variant::RightHanded, Nc5Variant::LeftHanded] {
            let s = nc5(variant);
            let a = ElemSet::from_iter([X1, X2]);
            let b = ElemSet::singleton(Y);
            let m = ElemSet::singleton(V);
            assert_eq!(join_sandwich(&s, b, X1), join_sandwich(&s, b, X2));
            assert_ne!(join_sandwich(&s, m, X1), join_sandwich(&s, m, X2));
            assert!(a.contains(X1));
            assert!(v::is_quasi_distributive(&s).holds);
            assert!(!v::is_simply_cancellative(&s).holds);
            assert!(is_flat_counterexample(&s));
            let rep = check_cancellation_laws(&s);
            let discordant: Vec<&str> = rep.records.iter().filter(|r| r.violated()).map(|r| r.clause).collect();
            assert!(!discordant.is_empty());
            assert!(discordant.iter().all(|c| CANCELLATION_PAIRINGS[..2].contains(c)), "{discordant:?}");
            let sym = check_symmetry_laws(&s);
            assert_eq!(sym.records[0].lhs, v::is_symmetric(&s).holds);
            assert!(!sym.is_discordant());
        }
    }

    #[test]
    fn grid_is_independent_of_workers() {
        let algebras: Vec<(String, SkewLattice)> =
            catalog(4).into_iter().enumerate().map(|(i, s)| (format!("a{i}"), s)).collect();
        let names: Vec<&str> = THEOREMS.iter().map(|t| t.0).collect();
        let one = verify_grid(&algebras, &names, 1).unwrap();
        let four = verify_grid(&algebras, &names, 4).unwrap();
        assert_eq!(one, four);
        assert_eq!(one.len(), algebras.len() * names.len());
        assert_eq!(one[0].algebra, "a0");
        assert_eq!(
            verify_grid(&algebras, &["nope"], 1),
            Err(LawsError::UnknownTheorem("nope".into()))
        );
    }

    #[test]
    fn algebra_id_is_stable() {
        let s = chain(3).unwrap();
        assert_eq!(algebra_id(&s), algebra_id(&s.clone()));
        assert!(algebra_id(&s).starts_with("n3-"));
        assert_ne!(algebra_id(&s), algebra_id(&rectangular(1, 3).unwrap()));
    }
}
