//! Green's relations, the natural and flat preorders, congruence quotients and
//! eggbox views.

use std::fmt::Write as _;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::algebra::{Op, OpTable, SkewLattice};
use crate::elemset::ElemSet;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GreensError {
    #[error("element {x} out of range for an algebra of order {n}")]
    ElementOutOfRange { x: usize, n: usize },
    #[error("partition is not compatible with {op:?}: {} ~ {} but {} {} {} and {} {} {} fall in different blocks",
        witness[0], witness[1], witness[0], op.symbol(), witness[2], witness[1], op.symbol(), witness[3])]
    NotACongruence { op: Op, witness: [usize; 4] },
    #[error("partition covers {got} elements, algebra has {expected}")]
    SizeMismatch { got: usize, expected: usize },
}

/// An equivalence on `0..n`; blocks are numbered by increasing least element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    block_of: Vec<usize>,
    blocks: Vec<ElemSet>,
}

impl Partition {
    /// Elements with equal labels share a block.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut first_seen: Vec<(usize, usize)> = Vec::new();
        let mut block_of = vec![0; labels.len()];
        let mut blocks: Vec<ElemSet> = Vec::new();
        for (x, &l) in labels.iter().enumerate() {
            let id = match first_seen.iter().find(|(lab, _)| *lab == l) {
                Some(&(_, id)) => id,
                None => {
                    first_seen.push((l, blocks.len()));
                    blocks.push(ElemSet::EMPTY);
                    blocks.len() - 1
                }
            };
            block_of[x] = id;
            blocks[id].insert(x);
        }
        Partition { block_of, blocks }
    }

    /// Groups `0..n` under `related`, which must be an equivalence.
    pub fn from_equivalence(n: usize, related: impl Fn(usize, usize) -> bool) -> Self {
        let mut labels = vec![usize::MAX; n];
        for x in 0..n {
            if labels[x] == usize::MAX {
                for (y, label) in labels.iter_mut().enumerate().skip(x) {
                    if *label == usize::MAX && related(x, y) {
                        *label = x;
                    }
                }
            }
        }
        Partition::from_labels(&labels)
    }

    /// Blocks must be disjoint and cover `0..n`; panics otherwise.
    pub fn from_blocks(n: usize, blocks: &[ElemSet]) -> Self {
        let mut labels = vec![usize::MAX; n];
        for (i, b) in blocks.iter().enumerate() {
            for x in b.iter() {
                assert!(labels[x] == usize::MAX, "blocks overlap at {x}");
                labels[x] = i;
            }
        }
        assert!(labels.iter().all(|&l| l != usize::MAX), "blocks do not cover 0..{n}");
        Partition::from_labels(&labels)
    }

    pub fn discrete(n: usize) -> Self {
        Partition::from_labels(&(0..n).collect::<Vec<_>>())
    }

    pub fn indiscrete(n: usize) -> Self {
        Partition::from_labels(&vec![0; n])
    }

    pub fn n(&self) -> usize {
        self.block_of.len()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of(&self, x: usize) -> usize {
        self.block_of[x]
    }

    pub fn block_ids(&self) -> &[usize] {
        &self.block_of
    }

    /// The block containing `x`.
    pub fn class(&self, x: usize) -> ElemSet {
        self.blocks[self.block_of[x]]
    }

    pub fn blocks(&self) -> &[ElemSet] {
        &self.blocks
    }

    pub fn same(&self, x: usize, y: usize) -> bool {
        self.block_of[x] == self.block_of[y]
    }

    pub fn is_discrete(&self) -> bool {
        self.blocks.len() == self.n()
    }

    /// True when every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        self.blocks
            .iter()
            .all(|b| b.is_subset(other.class(b.least().expect("nonempty block"))))
    }

    /// Finest common coarsening, by union-find.
    pub fn join(&self, other: &Partition) -> Partition {
        let n = self.n();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for p in [self, other] {
            for b in &p.blocks {
                let mut it = b.iter();
                let r = it.next().expect("nonempty block");
                for x in it {
                    let (a, c) = (find(&mut parent, r), find(&mut parent, x));
                    if a != c {
                        parent[a.max(c)] = a.min(c);
                    }
                }
            }
        }
        let labels: Vec<usize> = (0..n).map(|x| find(&mut parent, x)).collect();
        Partition::from_labels(&labels)
    }

    /// Common refinement.
    pub fn meet(&self, other: &Partition) -> Partition {
        Partition::from_equivalence(self.n(), |x, y| self.same(x, y) && other.same(x, y))
    }

    /// Restriction to `set`, as blocks intersected with `set`.
    pub fn restrict(&self, set: ElemSet) -> Vec<ElemSet> {
        self.blocks
            .iter()
            .map(|b| b.intersection(set))
            .filter(|b| !b.is_empty())
            .collect()
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.blocks.serialize(serializer)
    }
}

/// A binary relation on `0..n`; `rows[x]` is the set of `y` with `x ρ y`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    rows: Vec<ElemSet>,
}

impl Relation {
    pub fn from_fn(n: usize, holds: impl Fn(usize, usize) -> bool) -> Self {
        Relation {
            rows: (0..n)
                .map(|x| (0..n).filter(|&y| holds(x, y)).collect())
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn holds(&self, x: usize, y: usize) -> bool {
        self.rows[x].contains(y)
    }

    /// `{y : x ρ y}`.
    pub fn row(&self, x: usize) -> ElemSet {
        self.rows[x]
    }

    /// `{x : x ρ y}`.
    pub fn column(&self, y: usize) -> ElemSet {
        (0..self.n()).filter(|&x| self.holds(x, y)).collect()
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.rows
            .iter()
            .zip(&other.rows)
            .all(|(a, b)| a.is_subset(*b))
    }

    pub fn converse(&self) -> Relation {
        Relation::from_fn(self.n(), |x, y| self.holds(y, x))
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.n()).all(|x| self.holds(x, x))
    }

    pub fn is_transitive(&self) -> bool {
        (0..self.n()).all(|x| {
            self.rows[x]
                .iter()
                .all(|y| self.rows[y].is_subset(self.rows[x]))
        })
    }

    pub fn is_antisymmetric(&self) -> bool {
        (0..self.n()).all(|x| self.rows[x].iter().all(|y| x == y || !self.holds(y, x)))
    }

    /// `{(x, y) : x ρ y ∧ y ρ x}` as a partition; requires a preorder.
    pub fn symmetric_kernel(&self) -> Partition {
        Partition::from_equivalence(self.n(), |x, y| self.holds(x, y) && self.holds(y, x))
    }
}

/// `x R y ⇔ x∧y = y ∧ y∧x = x`.
pub fn green_r(s: &SkewLattice) -> Partition {
    Partition::from_equivalence(s.n(), |x, y| s.meet(x, y) == y && s.meet(y, x) == x)
}

/// `x L y ⇔ x∧y = x ∧ y∧x = y`.
pub fn green_l(s: &SkewLattice) -> Partition {
    Partition::from_equivalence(s.n(), |x, y| s.meet(x, y) == x && s.meet(y, x) == y)
}

fn green_d_direct(s: &SkewLattice) -> Partition {
    Partition::from_equivalence(s.n(), |x, y| {
        s.meet3(x, y, x) == x && s.meet3(y, x, y) == y
    })
}

/// `x D y ⇔ x∧y∧x = x ∧ y∧x∧y = y`, computed as the join of `R` and `L` and
/// cross-checked against the direct test.
pub fn green_d(s: &SkewLattice) -> Partition {
    let joined = green_r(s).join(&green_l(s));
    let direct = green_d_direct(s);
    assert_eq!(
        joined, direct,
        "internal inconsistency: R ∨ L differs from the direct D test"
    );
    joined
}

/// `R ∩ L`; the identity on every skew lattice.
pub fn green_h(s: &SkewLattice) -> Partition {
    green_r(s).meet(&green_l(s))
}

/// `x ⪰ y ⇔ y∧x∧y = y`.
pub fn natural_preorder(s: &SkewLattice) -> Relation {
    Relation::from_fn(s.n(), |x, y| s.meet3(y, x, y) == y)
}

/// `x ≥ y ⇔ x∧y = y = y∧x`.
pub fn natural_order(s: &SkewLattice) -> Relation {
    Relation::from_fn(s.n(), |x, y| s.meet(x, y) == y && s.meet(y, x) == y)
}

/// `x ≤_L y ⇔ x = x∧y`.
pub fn flat_preorder_l(s: &SkewLattice) -> Relation {
    Relation::from_fn(s.n(), |x, y| s.meet(x, y) == x)
}

/// `x ≤_R y ⇔ x = y∧x`.
pub fn flat_preorder_r(s: &SkewLattice) -> Relation {
    Relation::from_fn(s.n(), |x, y| s.meet(y, x) == x)
}

/// `(y∧S, S∧y)`.
pub fn principal_ideals(s: &SkewLattice, y: usize) -> Result<(ElemSet, ElemSet), GreensError> {
    if y >= s.n() {
        return Err(GreensError::ElementOutOfRange { x: y, n: s.n() });
    }
    let right = s.elements().map(|x| s.meet(y, x)).collect();
    let left = s.elements().map(|x| s.meet(x, y)).collect();
    Ok((right, left))
}

/// A surjective homomorphism onto a quotient algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientMap {
    pub source: SkewLattice,
    pub quotient: SkewLattice,
    /// Quotient element of each source element; equals the block index.
    pub class_of: Vec<usize>,
}

impl QuotientMap {
    /// Preimage of quotient element `c`.
    pub fn fiber(&self, c: usize) -> ElemSet {
        self.class_of
            .iter()
            .enumerate()
            .filter(|(_, &k)| k == c)
            .map(|(x, _)| x)
            .collect()
    }
}

/// First pair `x ~ x'` and `y` with `x ⋄ y ≁ x' ⋄ y` or `y ⋄ x ≁ y ⋄ x'`.
pub fn congruence_witness(s: &SkewLattice, p: &Partition) -> Option<(Op, [usize; 4])> {
    for op in [Op::Meet, Op::Join] {
        for x in s.elements() {
            for x2 in p.class(x).iter().filter(|&x2| x2 > x) {
                for y in s.elements() {
                    if !p.same(s.op(op, x, y), s.op(op, x2, y)) {
                        return Some((op, [x, x2, y, y]));
                    }
                    if !p.same(s.op(op, y, x), s.op(op, y, x2)) {
                        return Some((op, [y, y, x, x2]));
                    }
                }
            }
        }
    }
    None
}

/// `S/p`, with quotient elements numbered as the blocks of `p`.
pub fn quotient(s: &SkewLattice, p: &Partition) -> Result<QuotientMap, GreensError> {
    if p.n() != s.n() {
        return Err(GreensError::SizeMismatch {
            got: p.n(),
            expected: s.n(),
        });
    }
    if let Some((op, witness)) = congruence_witness(s, p) {
        return Err(GreensError::NotACongruence { op, witness });
    }
    let k = p.len();
    let rep: Vec<usize> = p.blocks().iter().map(|b| b.least().unwrap()).collect();
    let meet = OpTable::from_fn(k, |i, j| p.block_of(s.meet(rep[i], rep[j])));
    let join = OpTable::from_fn(k, |i, j| p.block_of(s.join(rep[i], rep[j])));
    Ok(QuotientMap {
        source: s.clone(),
        quotient: SkewLattice::from_tables_unchecked(meet, join),
        class_of: p.block_ids().to_vec(),
    })
}

fn quotient_by_green(s: &SkewLattice, p: &Partition, name: &str) -> QuotientMap {
    quotient(s, p).unwrap_or_else(|e| panic!("internal inconsistency: {name} is not a congruence: {e}"))
}

/// `S/D`, the maximal lattice image.
pub fn lattice_image(s: &SkewLattice) -> QuotientMap {
    quotient_by_green(s, &green_d(s), "D")
}

/// `S/R`, the maximal left-handed image.
pub fn left_image(s: &SkewLattice) -> QuotientMap {
    quotient_by_green(s, &green_r(s), "R")
}

/// `S/L`, the maximal right-handed image.
pub fn right_image(s: &SkewLattice) -> QuotientMap {
    quotient_by_green(s, &green_l(s), "L")
}

/// True when `s` is commutative and its operations are the infimum and
/// supremum of the order `x ≤ y ⇔ x∧y = x`.
pub fn is_lattice(s: &SkewLattice) -> bool {
    if !s.is_commutative() {
        return false;
    }
    let le = |x: usize, y: usize| s.meet(x, y) == x;
    let n = s.n();
    (0..n).all(|x| {
        (0..n).all(|y| {
            let m = s.meet(x, y);
            let j = s.join(x, y);
            le(m, x)
                && le(m, y)
                && le(x, j)
                && le(y, j)
                && (0..n).all(|z| (!(le(z, x) && le(z, y)) || le(z, m)) && (!(le(x, z) && le(y, z)) || le(j, z)))
        })
    })
}

/// One D-class drawn as a grid of R-class rows and L-class columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Eggbox {
    pub dclass: ElemSet,
    pub rows: Vec<ElemSet>,
    pub cols: Vec<ElemSet>,
    pub grid: Vec<Vec<usize>>,
}

impl Eggbox {
    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.cols.len())
    }
}

/// One eggbox per D-class, in order of least element.
pub fn eggboxes(s: &SkewLattice) -> Vec<Eggbox> {
    let d = green_d(s);
    let r = green_r(s);
    let l = green_l(s);
    d.blocks()
        .iter()
        .map(|&dclass| {
            let rows = r.restrict(dclass);
            let cols = l.restrict(dclass);
            let grid = rows
                .iter()
                .map(|row| {
                    cols.iter()
                        .map(|col| {
                            let cell = row.intersection(*col);
                            assert_eq!(cell.len(), 1, "internal inconsistency: H-class {cell} is not a singleton");
                            cell.least().unwrap()
                        })
                        .collect()
                })
                .collect();
            Eggbox {
                dclass,
                rows,
                cols,
                grid,
            }
        })
        .collect()
}

/// Covering pairs `(upper, lower)` of the D-class order, as block indices of `green_d`.
pub fn dclass_hasse(s: &SkewLattice) -> Vec<(usize, usize)> {
    let q = lattice_image(s).quotient;
    let k = q.n();
    let gt = |a: usize, b: usize| a != b && q.meet(a, b) == b;
    let mut edges = Vec::new();
    for a in 0..k {
        for b in 0..k {
            if gt(a, b) && !(0..k).any(|c| gt(a, c) && gt(c, b)) {
                edges.push((a, b));
            }
        }
    }
    edges
}

/// Eggboxes as DOT clusters laid out on a grid, with dashed edges for the
/// covering relation between D-classes.
pub fn eggbox_dot(s: &SkewLattice, names: Option<&[String]>) -> String {
    let label = |x: usize| match names {
        Some(ns) => ns[x].clone(),
        None => x.to_string(),
    };
    let boxes = eggboxes(s);
    let mut out = String::from("digraph eggbox {\n  rankdir=BT;\n  node [shape=box];\n  compound=true;\n");
    for (i, eb) in boxes.iter().enumerate() {
        let _ = writeln!(out, "  subgraph cluster_d{i} {{");
        let _ = writeln!(out, "    label=\"D{i}\";");
        for (r, row) in eb.grid.iter().enumerate() {
            for (c, &x) in row.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "    e{x} [label=\"{}\", pos=\"{c},{r}!\"];",
                    label(x).replace('"', "\\\"")
                );
            }
        }
        out.push_str("  }\n");
    }
    for (upper, lower) in dclass_hasse(s) {
        let a = boxes[upper].dclass.least().unwrap();
        let b = boxes[lower].dclass.least().unwrap();
        let _ = writeln!(
            out,
            "  e{b} -> e{a} [style=dashed, arrowhead=none, ltail=cluster_d{lower}, lhead=cluster_d{upper}];"
        );
    }
    out.push_str("}\n");
    out
}

/// First `(x₁, x₂, u, v)` with `u ⪯ xᵢ ⪯ v` where `x₁∧v∧x₂ ≠ x₁∧x₂` or
/// `x₁∨u∨x₂ ≠ x₁∨x₂`.
pub fn sandwich_witness(s: &SkewLattice) -> Option<[usize; 4]> {
    let pre = natural_preorder(s);
    for x1 in s.elements() {
        for x2 in s.elements() {
            let below = pre.row(x1).intersection(pre.row(x2));
            let above = pre.column(x1).intersection(pre.column(x2));
            for u in below.iter() {
                for v in above.iter() {
                    if s.meet3(x1, v, x2) != s.meet(x1, x2) || s.join3(x1, u, x2) != s.join(x1, x2) {
                        return Some([x1, x2, u, v]);
                    }
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{chain, rectangular};

    fn set(xs: &[usize]) -> ElemSet {
        xs.iter().copied().collect()
    }

    #[test]
    fn rectangular_classes_are_rows_and_columns() {
        let s = rectangular(2, 2).unwrap();
        assert_eq!(green_r(&s).blocks(), &[set(&[0, 1]), set(&[2, 3])]);
        assert_eq!(green_l(&s).blocks(), &[set(&[0, 2]), set(&[1, 3])]);
        assert_eq!(green_d(&s).len(), 1);
        assert!(green_h(&s).is_discrete());
    }

    #[test]
    fn chain_classes_are_trivial() {
        let s = chain(2).unwrap();
        for p in [green_r(&s), green_l(&s), green_d(&s)] {
            assert!(p.is_discrete());
        }
        let ge = natural_order(&s);
        assert!(ge.holds(1, 0) && !ge.holds(0, 1));
    }

    #[test]
    fn preorders_on_rectangular() {
        let s = rectangular(2, 2).unwrap();
        let pre = natural_preorder(&s);
        assert!((0..4).all(|x| pre.row(x) == ElemSet::full(4)));
        assert_eq!(natural_order(&s), Relation::from_fn(4, |x, y| x == y));
        let rz = rectangular(1, 2).unwrap();
        let lr = flat_preorder_r(&rz);
        let ll = flat_preorder_l(&rz);
        assert!(lr.holds(0, 1) && lr.holds(1, 0));
        assert!(!ll.holds(0, 1));
    }

    #[test]
    fn principal_ideal_of_rectangular() {
        let s = rectangular(2, 2).unwrap();
        assert_eq!(principal_ideals(&s, 0).unwrap(), (set(&[0, 1]), set(&[0, 2])));
        assert_eq!(
            principal_ideals(&s, 4),
            Err(GreensError::ElementOutOfRange { x: 4, n: 4 })
        );
    }

    #[test]
    fn quotients() {
        let s = rectangular(2, 2).unwrap();
        let q = lattice_image(&s);
        assert_eq!(q.quotient.n(), 1);
        let c2 = chain(2).unwrap();
        assert_eq!(quotient(&c2, &Partition::indiscrete(2)).unwrap().quotient.n(), 1);
        assert_eq!(quotient(&c2, &Partition::discrete(2)).unwrap().quotient, c2);
        let c3 = chain(3).unwrap();
        let bad = Partition::from_labels(&[0, 1, 0]);
        assert!(matches!(
            quotient(&c3, &bad),
            Err(GreensError::NotACongruence { op: Op::Meet, .. })
        ));
    }

    #[test]
    fn partition_join_and_refinement() {
        let a = Partition::from_labels(&[0, 0, 1, 2]);
        let b = Partition::from_labels(&[0, 1, 1, 2]);
        let j = a.join(&b);
        assert_eq!(j.blocks(), &[set(&[0, 1, 2]), set(&[3])]);
        assert!(a.refines(&j) && b.refines(&j) && !j.refines(&a));
        assert!(a.meet(&b).is_discrete());
        assert_eq!(serde_json::to_string(&j).unwrap(), "[[0,1,2],[3]]");
    }

    #[test]
    fn eggbox_shapes() {
        let s = rectangular(2, 3).unwrap();
        let eb = eggboxes(&s);
        assert_eq!(eb.len(), 1);
        assert_eq!(eb[0].shape(), (2, 3));
        assert_eq!(eb[0].grid, vec![vec![0, 1, 2], vec![3, 4, 5]]);
        let c = chain(2).unwrap();
        assert_eq!(eggboxes(&c).iter().map(Eggbox::shape).collect::<Vec<_>>(), vec![(1, 1), (1, 1)]);
    }

    #[test]
    fn dot_has_one_cluster_per_dclass() {
        let dot = eggbox_dot(&rectangular(2, 2).unwrap(), None);
        assert_eq!(dot.matches("subgraph cluster").count(), 1);
        let dot = eggbox_dot(&chain(3).unwrap(), None);
        assert_eq!(dot.matches("subgraph cluster").count(), 3);
        assert_eq!(dot.matches("style=dashed").count(), 2);
    }

    #[test]
    fn lattice_checks() {
        assert!(is_lattice(&chain(3).unwrap()));
        assert!(!is_lattice(&rectangular(1, 2).unwrap()));
        assert!(sandwich_witness(&rectangular(2, 2).unwrap()).is_none());
    }
}
