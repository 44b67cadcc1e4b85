//! Operation tables, the skew lattice axioms and the basic constructors.
//!
//! Elements are always the dense range `0..n`. A [`SkewLattice`] can only be
//! obtained through a constructor that has run [`validate`], so every other
//! module may assume the axioms hold.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elemset::ElemSet;
use crate::MAX_ORDER;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("operation tables differ in size ({meet} vs {join})")]
    DimensionMismatch { meet: usize, join: usize },
    #[error("table is not square: row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("entry at ({}, {}) is {value}, outside 0..{n}", index.0, index.1)]
    EntryOutOfRange {
        index: (usize, usize),
        value: usize,
        n: usize,
    },
    #[error("algebra would have {requested} elements, cap is {cap}")]
    CapExceeded { requested: usize, cap: usize },
    #[error("an algebra needs at least one element")]
    Empty,
    #[error("tables do not satisfy the skew lattice axioms: {0}")]
    NotASkewLattice(ValidationReport),
    #[error("subset {0} is not closed under both operations")]
    NotClosed(ElemSet),
    #[error("malformed algebra file: {0}")]
    Parse(String),
}

/// The two operations of a skew lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Meet,
    Join,
}

impl Op {
    pub fn dual(self) -> Op {
        match self {
            Op::Meet => Op::Join,
            Op::Join => Op::Meet,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Op::Meet => '∧',
            Op::Join => '∨',
        }
    }
}

/// An `n × n` table over `0..n`; `get(i, j)` is `i ⋄ j`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OpTable {
    n: usize,
    entries: Vec<u8>,
}

impl OpTable {
    pub fn from_rows(rows: &[Vec<usize>]) -> Result<Self, AlgebraError> {
        let n = rows.len();
        if n == 0 {
            return Err(AlgebraError::Empty);
        }
        if n > MAX_ORDER {
            return Err(AlgebraError::CapExceeded {
                requested: n,
                cap: MAX_ORDER,
            });
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(AlgebraError::NotSquare {
                    row: i,
                    len: row.len(),
                    n,
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v >= n {
                    return Err(AlgebraError::EntryOutOfRange {
                        index: (i, j),
                        value: v,
                        n,
                    });
                }
                entries.push(v as u8);
            }
        }
        Ok(OpTable { n, entries })
    }

    /// Builds a table from a closure. Panics if `f` leaves `0..n`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> usize) -> Self {
        assert!((1..=MAX_ORDER).contains(&n), "table order {n} out of range");
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let v = f(i, j);
                assert!(v < n, "table entry ({i}, {j}) = {v} out of range");
                entries.push(v as u8);
            }
        }
        OpTable { n, entries }
    }

    /// Raw row-major bytes; `len == n * n` and every byte is `< n`.
    pub(crate) fn from_raw(n: usize, entries: Vec<u8>) -> Self {
        debug_assert_eq!(entries.len(), n * n);
        debug_assert!(entries.iter().all(|&v| (v as usize) < n));
        OpTable { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> usize {
        self.entries[i * self.n + j] as usize
    }

    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        self.entries
            .chunks(self.n)
            .map(|r| r.iter().map(|&v| v as usize).collect())
            .collect()
    }

    /// The table of `(i, j) ↦ j ⋄ i`.
    pub fn transposed(&self) -> OpTable {
        OpTable::from_fn(self.n, |i, j| self.get(j, i))
    }
}

impl fmt::Debug for OpTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

/// A finite skew lattice given by its meet and join tables.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SkewLattice {
    meet: OpTable,
    join: OpTable,
}

impl SkewLattice {
    /// Validates the tables and wraps them.
    pub fn new(meet: OpTable, join: OpTable) -> Result<Self, AlgebraError> {
        let report = validate(&meet, &join)?;
        if report.valid {
            Ok(SkewLattice { meet, join })
        } else {
            Err(AlgebraError::NotASkewLattice(report))
        }
    }

    pub fn from_rows(meet: &[Vec<usize>], join: &[Vec<usize>]) -> Result<Self, AlgebraError> {
        SkewLattice::new(OpTable::from_rows(meet)?, OpTable::from_rows(join)?)
    }

    /// Wraps tables already known to satisfy the axioms (checked in debug builds).
    pub(crate) fn from_tables_unchecked(meet: OpTable, join: OpTable) -> Self {
        debug_assert!(validate(&meet, &join).map(|r| r.valid).unwrap_or(false));
        SkewLattice { meet, join }
    }

    pub fn n(&self) -> usize {
        self.meet.n
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.n()
    }

    pub fn universe(&self) -> ElemSet {
        ElemSet::full(self.n())
    }

    #[inline]
    pub fn meet(&self, x: usize, y: usize) -> usize {
        self.meet.get(x, y)
    }

    #[inline]
    pub fn join(&self, x: usize, y: usize) -> usize {
        self.join.get(x, y)
    }

    #[inline]
    pub fn op(&self, op: Op, x: usize, y: usize) -> usize {
        match op {
            Op::Meet => self.meet(x, y),
            Op::Join => self.join(x, y),
        }
    }

    /// `x ∧ y ∧ x`.
    #[inline]
    pub fn meet3(&self, x: usize, y: usize, z: usize) -> usize {
        self.meet(self.meet(x, y), z)
    }

    /// `x ∨ y ∨ z`.
    #[inline]
    pub fn join3(&self, x: usize, y: usize, z: usize) -> usize {
        self.join(self.join(x, y), z)
    }

    pub fn meet_table(&self) -> &OpTable {
        &self.meet
    }

    pub fn join_table(&self) -> &OpTable {
        &self.join
    }

    pub fn table(&self, op: Op) -> &OpTable {
        match op {
            Op::Meet => &self.meet,
            Op::Join => &self.join,
        }
    }

    pub fn into_tables(self) -> (OpTable, OpTable) {
        (self.meet, self.join)
    }

    pub fn is_commutative(&self) -> bool {
        self.elements().all(|x| {
            self.elements()
                .all(|y| self.meet(x, y) == self.meet(y, x) && self.join(x, y) == self.join(y, x))
        })
    }

    /// Image of `set` under `x ↦ x ⋄ y` style closures; true when `set` is a subalgebra.
    pub fn is_closed(&self, set: ElemSet) -> bool {
        set.iter().all(|x| {
            set.iter()
                .all(|y| set.contains(self.meet(x, y)) && set.contains(self.join(x, y)))
        })
    }

    /// The subalgebra on `set`, relabelled `0..|set|` in ascending order.
    pub fn induced(&self, set: ElemSet) -> Result<(SkewLattice, Vec<usize>), AlgebraError> {
        if set.is_empty() {
            return Err(AlgebraError::Empty);
        }
        if !self.is_closed(set) {
            return Err(AlgebraError::NotClosed(set));
        }
        let members = set.to_vec();
        let mut local = vec![usize::MAX; self.n()];
        for (i, &x) in members.iter().enumerate() {
            local[x] = i;
        }
        let k = members.len();
        let meet = OpTable::from_fn(k, |i, j| local[self.meet(members[i], members[j])]);
        let join = OpTable::from_fn(k, |i, j| local[self.join(members[i], members[j])]);
        Ok((SkewLattice::from_tables_unchecked(meet, join), members))
    }

    /// Relabels by `perm`: element `x` becomes `perm[x]`.
    pub fn relabel(&self, perm: &[usize]) -> SkewLattice {
        let n = self.n();
        assert_eq!(perm.len(), n);
        let mut inv = vec![0; n];
        for (x, &p) in perm.iter().enumerate() {
            inv[p] = x;
        }
        let meet = OpTable::from_fn(n, |i, j| perm[self.meet(inv[i], inv[j])]);
        let join = OpTable::from_fn(n, |i, j| perm[self.join(inv[i], inv[j])]);
        SkewLattice { meet, join }
    }
}

impl fmt::Debug for SkewLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SkewLattice")
            .field("n", &self.n())
            .field("meet", &self.meet)
            .field("join", &self.join)
            .finish()
    }
}

/// The eight defining laws, in reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axiom {
    #[serde(rename = "x∧x=x")]
    MeetIdempotent,
    #[serde(rename = "x∨x=x")]
    JoinIdempotent,
    #[serde(rename = "(x∧y)∧z=x∧(y∧z)")]
    MeetAssociative,
    #[serde(rename = "(x∨y)∨z=x∨(y∨z)")]
    JoinAssociative,
    #[serde(rename = "x∧(x∨y)=x")]
    MeetAbsorbsJoinRight,
    #[serde(rename = "(y∨x)∧x=x")]
    MeetAbsorbsJoinLeft,
    #[serde(rename = "x∨(x∧y)=x")]
    JoinAbsorbsMeetRight,
    #[serde(rename = "(y∧x)∨x=x")]
    JoinAbsorbsMeetLeft,
}

impl Axiom {
    pub const ALL: [Axiom; 8] = [
        Axiom::MeetIdempotent,
        Axiom::JoinIdempotent,
        Axiom::MeetAssociative,
        Axiom::JoinAssociative,
        Axiom::MeetAbsorbsJoinRight,
        Axiom::MeetAbsorbsJoinLeft,
        Axiom::JoinAbsorbsMeetRight,
        Axiom::JoinAbsorbsMeetLeft,
    ];

    pub fn law(self) -> &'static str {
        match self {
            Axiom::MeetIdempotent => "x∧x=x",
            Axiom::JoinIdempotent => "x∨x=x",
            Axiom::MeetAssociative => "(x∧y)∧z=x∧(y∧z)",
            Axiom::JoinAssociative => "(x∨y)∨z=x∨(y∨z)",
            Axiom::MeetAbsorbsJoinRight => "x∧(x∨y)=x",
            Axiom::MeetAbsorbsJoinLeft => "(y∨x)∧x=x",
            Axiom::JoinAbsorbsMeetRight => "x∨(x∧y)=x",
            Axiom::JoinAbsorbsMeetLeft => "(y∧x)∨x=x",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.law())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomFailure {
    pub axiom: Axiom,
    /// Lexicographically least violating tuple, in the variable order of the law.
    pub witness: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub failures: Vec<AxiomFailure>,
    /// `x∧y∧x∧z∧x = x∧y∧z∧x`; informational, implied when `valid`.
    pub meet_regular: bool,
    /// `x∨y∨x∨z∨x = x∨y∨z∨x`; informational, implied when `valid`.
    pub join_regular: bool,
}

impl ValidationReport {
    pub fn failure(&self, axiom: Axiom) -> Option<&AxiomFailure> {
        self.failures.iter().find(|f| f.axiom == axiom)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.valid {
            return write!(f, "valid");
        }
        for (i, fail) in self.failures.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{} fails at {:?}", fail.axiom, fail.witness)?;
        }
        Ok(())
    }
}

/// Checks idempotency, associativity and the four absorption laws.
pub fn validate(meet: &OpTable, join: &OpTable) -> Result<ValidationReport, AlgebraError> {
    if meet.n != join.n {
        return Err(AlgebraError::DimensionMismatch {
            meet: meet.n,
            join: join.n,
        });
    }
    let n = meet.n;
    for t in [meet, join] {
        if let Some(pos) = t.entries.iter().position(|&v| v as usize >= n) {
            return Err(AlgebraError::EntryOutOfRange {
                index: (pos / n, pos % n),
                value: t.entries[pos] as usize,
                n,
            });
        }
    }
    let m = |x, y| meet.get(x, y);
    let j = |x, y| join.get(x, y);
    let mut failures = Vec::new();

    let idem = |t: &OpTable| (0..n).find(|&x| t.get(x, x) != x).map(|x| vec![x]);
    let assoc = |t: &OpTable| {
        for x in 0..n {
            for y in 0..n {
                let xy = t.get(x, y);
                for z in 0..n {
                    if t.get(xy, z) != t.get(x, t.get(y, z)) {
                        return Some(vec![x, y, z]);
                    }
                }
            }
        }
        None
    };
    let pairs = |law: &dyn Fn(usize, usize) -> bool| {
        for x in 0..n {
            for y in 0..n {
                if !law(x, y) {
                    return Some(vec![x, y]);
                }
            }
        }
        None
    };

    let checks: [(Axiom, Option<Vec<usize>>); 8] = [
        (Axiom::MeetIdempotent, idem(meet)),
        (Axiom::JoinIdempotent, idem(join)),
        (Axiom::MeetAssociative, assoc(meet)),
        (Axiom::JoinAssociative, assoc(join)),
        (Axiom::MeetAbsorbsJoinRight, pairs(&|x, y| m(x, j(x, y)) == x)),
        (Axiom::MeetAbsorbsJoinLeft, pairs(&|x, y| m(j(y, x), x) == x)),
        (Axiom::JoinAbsorbsMeetRight, pairs(&|x, y| j(x, m(x, y)) == x)),
        (Axiom::JoinAbsorbsMeetLeft, pairs(&|x, y| j(m(y, x), x) == x)),
    ];
    for (axiom, witness) in checks {
        if let Some(witness) = witness {
            failures.push(AxiomFailure { axiom, witness });
        }
    }
    Ok(ValidationReport {
        valid: failures.is_empty(),
        failures,
        meet_regular: is_regular(meet),
        join_regular: is_regular(join),
    })
}

/// `xyxzx = xyzx` for a single table.
fn is_regular(t: &OpTable) -> bool {
    let n = t.n;
    (0..n).all(|x| {
        (0..n).all(|y| {
            let xyx = t.get(t.get(x, y), x);
            let xy = t.get(x, y);
            (0..n).all(|z| {
                let lhs = t.get(t.get(xyx, z), x);
                let rhs = t.get(t.get(xy, z), x);
                lhs == rhs
            })
        })
    })
}

/// The rectangular algebra on `l × r`, pair `(i, j)` encoded as `i·r + j`, with
/// `(x,y)∧(x',y') = (x,y')` and `(x,y)∨(x',y') = (x',y)`.
pub fn rectangular(l: usize, r: usize) -> Result<SkewLattice, AlgebraError> {
    let n = l.checked_mul(r).ok_or(AlgebraError::CapExceeded {
        requested: usize::MAX,
        cap: MAX_ORDER,
    })?;
    if n == 0 {
        return Err(AlgebraError::Empty);
    }
    if n > MAX_ORDER {
        return Err(AlgebraError::CapExceeded {
            requested: n,
            cap: MAX_ORDER,
        });
    }
    let enc = |i: usize, j: usize| i * r + j;
    let meet = OpTable::from_fn(n, |a, b| enc(a / r, b % r));
    let join = OpTable::from_fn(n, |a, b| enc(b / r, a % r));
    Ok(SkewLattice::from_tables_unchecked(meet, join))
}

/// The `k`-element chain `0 < 1 < … < k-1` as a lattice.
pub fn chain(k: usize) -> Result<SkewLattice, AlgebraError> {
    if k == 0 {
        return Err(AlgebraError::Empty);
    }
    if k > MAX_ORDER {
        return Err(AlgebraError::CapExceeded {
            requested: k,
            cap: MAX_ORDER,
        });
    }
    let meet = OpTable::from_fn(k, |a, b| a.min(b));
    let join = OpTable::from_fn(k, |a, b| a.max(b));
    Ok(SkewLattice::from_tables_unchecked(meet, join))
}

/// Componentwise product; pair `(x, y)` is encoded as `x·|b| + y`.
pub fn direct_product(a: &SkewLattice, b: &SkewLattice) -> Result<SkewLattice, AlgebraError> {
    let (na, nb) = (a.n(), b.n());
    let n = na * nb;
    if n > MAX_ORDER {
        return Err(AlgebraError::CapExceeded {
            requested: n,
            cap: MAX_ORDER,
        });
    }
    let meet = OpTable::from_fn(n, |x, y| {
        a.meet(x / nb, y / nb) * nb + b.meet(x % nb, y % nb)
    });
    let join = OpTable::from_fn(n, |x, y| {
        a.join(x / nb, y / nb) * nb + b.join(x % nb, y % nb)
    });
    Ok(SkewLattice::from_tables_unchecked(meet, join))
}

/// Swaps the two operations. The axioms are self-dual, so the result is valid.
pub fn dual(s: &SkewLattice) -> SkewLattice {
    SkewLattice {
        meet: s.join.clone(),
        join: s.meet.clone(),
    }
}

/// The horizontal mirror `x ⋄' y = y ⋄ x` on both operations; exchanges
/// left- and right-handedness.
pub fn mirror(s: &SkewLattice) -> SkewLattice {
    SkewLattice {
        meet: s.meet.transposed(),
        join: s.join.transposed(),
    }
}

/// On-disk algebra format: `{"n": .., "meet": [[..]], "join": [[..]], "names": [..]?}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraFile {
    pub n: usize,
    pub meet: Vec<Vec<usize>>,
    pub join: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
}

impl AlgebraFile {
    pub fn from_algebra(s: &SkewLattice) -> Self {
        AlgebraFile {
            n: s.n(),
            meet: s.meet.rows(),
            join: s.join.rows(),
            names: None,
        }
    }

    pub fn with_names(mut self, names: Vec<String>) -> Self {
        self.names = Some(names);
        self
    }

    pub fn parse(text: &str) -> Result<Self, AlgebraError> {
        serde_json::from_str(text).map_err(|e| AlgebraError::Parse(e.to_string()))
    }

    /// Single-line JSON with fixed key order; `parse` then `to_json` is the identity.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("algebra file serializes")
    }

    /// The two tables, checked for shape and range against `n`.
    pub fn tables(&self) -> Result<(OpTable, OpTable), AlgebraError> {
        let meet = OpTable::from_rows(&self.meet)?;
        let join = OpTable::from_rows(&self.join)?;
        for t in [&meet, &join] {
            if t.n() != self.n {
                return Err(AlgebraError::Parse(format!(
                    "declared n = {} but a table has {} rows",
                    self.n,
                    t.n()
                )));
            }
        }
        if let Some(names) = &self.names {
            if names.len() != self.n {
                return Err(AlgebraError::Parse(format!(
                    "{} names given for {} elements",
                    names.len(),
                    self.n
                )));
            }
        }
        Ok((meet, join))
    }

    pub fn to_algebra(&self) -> Result<SkewLattice, AlgebraError> {
        let (meet, join) = self.tables()?;
        SkewLattice::new(meet, join)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn left_zero_pair() -> (OpTable, OpTable) {
        let t = OpTable::from_rows(&[vec![0, 0], vec![1, 1]]).unwrap();
        (t.clone(), t)
    }

    #[test]
    fn rectangular_2x2_is_valid_and_meets_by_pairs() {
        let s = rectangular(2, 2).unwrap();
        let report = validate(s.meet_table(), s.join_table()).unwrap();
        assert!(report.valid && report.meet_regular && report.join_regular);
        // (0,1) ∧ (1,0) = (0,0)
        assert_eq!(s.meet(1, 2), 0);
        // (0,1) ∨ (1,0) = (1,1)
        assert_eq!(s.join(1, 2), 3);
    }

    #[test]
    fn rectangular_1x2_has_right_zero_meet() {
        let s = rectangular(1, 2).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                assert_eq!(s.meet(x, y), y);
                assert_eq!(s.join(x, y), x);
            }
        }
    }

    #[test]
    fn one_element_algebra() {
        let s = rectangular(1, 1).unwrap();
        assert_eq!(s.n(), 1);
        let t = OpTable::from_rows(&[vec![0]]).unwrap();
        assert!(validate(&t, &t).unwrap().valid);
    }

    #[test]
    fn left_zero_tables_fail_absorption() {
        let (m, j) = left_zero_pair();
        let report = validate(&m, &j).unwrap();
        assert!(!report.valid);
        let fail = report.failure(Axiom::MeetAbsorbsJoinLeft).unwrap();
        assert_eq!(fail.witness, vec![0, 1]);
        assert!(report.failure(Axiom::JoinAbsorbsMeetLeft).is_some());
        assert!(report.failure(Axiom::MeetAbsorbsJoinRight).is_none());
        assert!(report.failure(Axiom::MeetAssociative).is_none());
        assert!(matches!(
            SkewLattice::new(m, j),
            Err(AlgebraError::NotASkewLattice(_))
        ));
    }

    #[test]
    fn witnesses_are_lexicographically_least() {
        // meet = left zero, join = projection that breaks idempotency at 1
        let m = OpTable::from_rows(&[vec![0, 0, 0], vec![1, 1, 1], vec![2, 2, 2]]).unwrap();
        let j = OpTable::from_rows(&[vec![0, 0, 0], vec![0, 0, 0], vec![0, 0, 2]]).unwrap();
        let report = validate(&m, &j).unwrap();
        assert_eq!(report.failure(Axiom::JoinIdempotent).unwrap().witness, vec![1]);
        assert_eq!(report.failure(Axiom::MeetAbsorbsJoinLeft).unwrap().witness, vec![1, 0]);
    }

    #[test]
    fn dimension_and_range_errors() {
        let a = OpTable::from_rows(&[vec![0]]).unwrap();
        let b = OpTable::from_rows(&[vec![0, 1], vec![0, 1]]).unwrap();
        assert_eq!(
            validate(&a, &b),
            Err(AlgebraError::DimensionMismatch { meet: 1, join: 2 })
        );
        assert_eq!(
            OpTable::from_rows(&[vec![0, 2], vec![0, 1]]),
            Err(AlgebraError::EntryOutOfRange {
                index: (0, 1),
                value: 2,
                n: 2
            })
        );
        assert!(matches!(
            OpTable::from_rows(&[vec![0, 1], vec![0]]),
            Err(AlgebraError::NotSquare { row: 1, .. })
        ));
        assert!(matches!(rectangular(8, 9), Err(AlgebraError::CapExceeded { .. })));
    }

    #[test]
    fn dual_is_an_involution_and_rectangular_dual_transposes() {
        let s = rectangular(2, 3).unwrap();
        let d = dual(&s);
        assert!(validate(d.meet_table(), d.join_table()).unwrap().valid);
        assert_eq!(dual(&d), s);
        for x in s.elements() {
            for y in s.elements() {
                assert_eq!(d.meet(x, y), s.meet(y, x));
            }
        }
    }

    #[test]
    fn products_and_chains() {
        let c2 = chain(2).unwrap();
        let sq = direct_product(&c2, &c2).unwrap();
        assert_eq!(sq.n(), 4);
        assert!(sq.is_commutative());
        let one = chain(1).unwrap();
        assert_eq!(direct_product(&one, &c2).unwrap(), c2);
        assert!(dual(&c2).is_commutative());
    }

    #[test]
    fn induced_subalgebra() {
        let s = rectangular(2, 2).unwrap();
        let row: ElemSet = [0, 1].into_iter().collect();
        let (sub, members) = s.induced(row).unwrap();
        assert_eq!(members, vec![0, 1]);
        assert_eq!(sub, rectangular(1, 2).unwrap());
        let diag: ElemSet = [0, 3].into_iter().collect();
        assert_eq!(s.induced(diag), Err(AlgebraError::NotClosed(diag)));
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let s = rectangular(2, 2).unwrap();
        let file = AlgebraFile::from_algebra(&s);
        let text = file.to_json();
        assert_eq!(
            text,
            r#"{"n":4,"meet":[[0,1,0,1],[0,1,0,1],[2,3,2,3],[2,3,2,3]],"join":[[0,0,2,2],[1,1,3,3],[0,0,2,2],[1,1,3,3]]}"#
        );
        let back = AlgebraFile::parse(&text).unwrap();
        assert_eq!(back.to_json(), text);
        assert_eq!(back.to_algebra().unwrap(), s);
        let named = file.with_names(vec!["a".into(), "b".into(), "c".into(), "d".into()]);
        let named_text = named.to_json();
        assert_eq!(AlgebraFile::parse(&named_text).unwrap().to_json(), named_text);
    }

    #[test]
    fn json_errors() {
        assert!(matches!(AlgebraFile::parse("{"), Err(AlgebraError::Parse(_))));
        let f = AlgebraFile::parse(r#"{"n":2,"meet":[[0]],"join":[[0]]}"#).unwrap();
        assert!(matches!(f.tables(), Err(AlgebraError::Parse(_))));
    }
}
