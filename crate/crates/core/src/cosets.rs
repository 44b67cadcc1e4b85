//! Full and flat cosets between comparable D-classes, coset bijections, the
//! rectangular decomposition of a coset and the commuting Kimura diagram.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::algebra::SkewLattice;
use crate::elemset::ElemSet;
use crate::greens::{self, QuotientMap};
use crate::varieties;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CosetError {
    #[error("element {x} is not in the {class} class {set}")]
    ElementNotInClass {
        x: usize,
        class: &'static str,
        set: ElemSet,
    },
    #[error("element {x} lies in neither class of the pair")]
    ElementNotInClasses { x: usize },
    #[error("{upper} > {lower} is not a pair of comparable D-classes")]
    NotAPair { upper: ElemSet, lower: ElemSet },
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

/// Two D-classes `A > B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct DClassPair {
    pub upper: ElemSet,
    pub lower: ElemSet,
}

impl DClassPair {
    /// Checks that both sets are D-classes and that `upper > lower`.
    pub fn new(s: &SkewLattice, upper: ElemSet, lower: ElemSet) -> Result<Self, CosetError> {
        let d = greens::green_d(s);
        let is_class = |set: ElemSet| set.least().is_some_and(|x| d.class(x) == set);
        let above = upper != lower
            && upper
                .iter()
                .all(|a| lower.iter().all(|b| s.meet3(b, a, b) == b));
        if is_class(upper) && is_class(lower) && above {
            Ok(DClassPair { upper, lower })
        } else {
            Err(CosetError::NotAPair { upper, lower })
        }
    }

    fn check_upper(&self, a: usize) -> Result<(), CosetError> {
        if self.upper.contains(a) {
            Ok(())
        } else {
            Err(CosetError::ElementNotInClass {
                x: a,
                class: "upper",
                set: self.upper,
            })
        }
    }

    fn check_lower(&self, b: usize) -> Result<(), CosetError> {
        if self.lower.contains(b) {
            Ok(())
        } else {
            Err(CosetError::ElementNotInClass {
                x: b,
                class: "lower",
                set: self.lower,
            })
        }
    }
}

/// All pairs `A > B` of D-classes, ordered by the least elements of `A` then `B`.
pub fn comparable_pairs(s: &SkewLattice) -> Vec<DClassPair> {
    let d = greens::green_d(s);
    let blocks = d.blocks();
    let mut out = Vec::new();
    for &upper in blocks {
        for &lower in blocks {
            let (a, b) = (upper.least().unwrap(), lower.least().unwrap());
            if upper != lower && s.meet3(b, a, b) == b {
                out.push(DClassPair { upper, lower });
            }
        }
    }
    out
}

/// `{x∧a : a ∈ set}`.
pub fn meet_right(s: &SkewLattice, x: usize, set: ElemSet) -> ElemSet {
    set.iter().map(|a| s.meet(x, a)).collect()
}

/// `{a∧x : a ∈ set}`.
pub fn meet_left(s: &SkewLattice, set: ElemSet, x: usize) -> ElemSet {
    set.iter().map(|a| s.meet(a, x)).collect()
}

/// `{a∧x∧a : a ∈ set}`.
pub fn meet_sandwich(s: &SkewLattice, set: ElemSet, x: usize) -> ElemSet {
    set.iter().map(|a| s.meet3(a, x, a)).collect()
}

/// `{x∨a : a ∈ set}`.
pub fn join_right(s: &SkewLattice, x: usize, set: ElemSet) -> ElemSet {
    set.iter().map(|a| s.join(x, a)).collect()
}

/// `{a∨x : a ∈ set}`.
pub fn join_left(s: &SkewLattice, set: ElemSet, x: usize) -> ElemSet {
    set.iter().map(|a| s.join(a, x)).collect()
}

/// `{a∨x∨a : a ∈ set}`.
pub fn join_sandwich(s: &SkewLattice, set: ElemSet, x: usize) -> ElemSet {
    set.iter().map(|a| s.join3(a, x, a)).collect()
}

/// `A∧b∧A`.
pub fn full_coset(s: &SkewLattice, pair: &DClassPair, b: usize) -> Result<ElemSet, CosetError> {
    pair.check_lower(b)?;
    Ok(meet_sandwich(s, pair.upper, b))
}

/// `B∨a∨B`.
pub fn full_coset_up(s: &SkewLattice, pair: &DClassPair, a: usize) -> Result<ElemSet, CosetError> {
    pair.check_upper(a)?;
    Ok(join_sandwich(s, pair.lower, a))
}

/// `a∧B∧a` for `a ∈ A`, `b∨A∨b` for `b ∈ B`.
pub fn image_set(s: &SkewLattice, pair: &DClassPair, x: usize) -> Result<ElemSet, CosetError> {
    if pair.upper.contains(x) {
        Ok(pair.lower.iter().map(|b| s.meet3(x, b, x)).collect())
    } else if pair.lower.contains(x) {
        Ok(pair.upper.iter().map(|a| s.join3(x, a, x)).collect())
    } else {
        Err(CosetError::ElementNotInClasses { x })
    }
}

/// `B∧a` for `a ∈ A`, `b∨A` for `b ∈ B`.
pub fn right_image_set(s: &SkewLattice, pair: &DClassPair, x: usize) -> Result<ElemSet, CosetError> {
    if pair.upper.contains(x) {
        Ok(meet_left(s, pair.lower, x))
    } else if pair.lower.contains(x) {
        Ok(join_right(s, x, pair.upper))
    } else {
        Err(CosetError::ElementNotInClasses { x })
    }
}

/// `a∧B` for `a ∈ A`, `A∨b` for `b ∈ B`.
pub fn left_image_set(s: &SkewLattice, pair: &DClassPair, x: usize) -> Result<ElemSet, CosetError> {
    if pair.upper.contains(x) {
        Ok(meet_right(s, x, pair.lower))
    } else if pair.lower.contains(x) {
        Ok(join_left(s, pair.upper, x))
    } else {
        Err(CosetError::ElementNotInClasses { x })
    }
}

/// Distinct values of `f` over `class`, ordered by least element, checked to
/// partition `class` with each `x` in its own block.
fn blocks_of(class: ElemSet, f: impl Fn(usize) -> ElemSet, what: &str) -> Result<Vec<ElemSet>, CosetError> {
    let mut blocks: Vec<ElemSet> = Vec::new();
    for x in class {
        let block = f(x);
        if !block.contains(x) || !block.is_subset(class) {
            return Err(CosetError::InternalInconsistency(format!("{what} of {x} is {block}")));
        }
        if !blocks.contains(&block) {
            if let Some(other) = blocks.iter().find(|o| !o.is_disjoint(block)) {
                return Err(CosetError::InternalInconsistency(format!("{what}s {other} and {block} overlap")));
            }
            blocks.push(block);
        }
    }
    blocks.sort_by_key(|b| b.least());
    Ok(blocks)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BijectionKind {
    Full,
    Right,
    Left,
}

/// A verified isomorphism between a coset of `B` in `A` and a coset of `A` in `B`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CosetBijection {
    pub kind: BijectionKind,
    pub from_block: ElemSet,
    pub to_block: ElemSet,
    /// Pairs `(x, φ(x))` sorted by `x`.
    pub map: Vec<(usize, usize)>,
}

impl CosetBijection {
    pub fn apply(&self, x: usize) -> Option<usize> {
        self.map.iter().find(|&&(u, _)| u == x).map(|&(_, v)| v)
    }

    pub fn inverse(&self, y: usize) -> Option<usize> {
        self.map.iter().find(|&&(_, v)| v == y).map(|&(u, _)| u)
    }
}

/// The coset bijection of the given kind for `a ∈ A`, `b ∈ B`:
/// full `B∨a∨B → A∧b∧A`, `x ↦ x∧b∧x`; right `B∨a → b∧A`, `x ↦ b∧x`;
/// left `a∨B → A∧b`, `x ↦ x∧b`.
pub fn coset_bijection(
    s: &SkewLattice,
    pair: &DClassPair,
    a: usize,
    b: usize,
    kind: BijectionKind,
) -> Result<CosetBijection, CosetError> {
    pair.check_upper(a)?;
    pair.check_lower(b)?;
    let (from_block, to_block) = match kind {
        BijectionKind::Full => (join_sandwich(s, pair.lower, a), meet_sandwich(s, pair.upper, b)),
        BijectionKind::Right => (join_left(s, pair.lower, a), meet_right(s, b, pair.upper)),
        BijectionKind::Left => (join_right(s, a, pair.lower), meet_left(s, pair.upper, b)),
    };
    let forward = |x: usize| match kind {
        BijectionKind::Full => s.meet3(x, b, x),
        BijectionKind::Right => s.meet(b, x),
        BijectionKind::Left => s.meet(x, b),
    };
    let backward = |y: usize| match kind {
        BijectionKind::Full => s.join3(y, a, y),
        BijectionKind::Right => s.join(y, a),
        BijectionKind::Left => s.join(a, y),
    };
    // y is paired with x exactly when x ≥ y, x ≥_L y or x ≥_R y respectively.
    let related = |x: usize, y: usize| match kind {
        BijectionKind::Full => s.meet(x, y) == y && s.meet(y, x) == y,
        BijectionKind::Right => s.meet(y, x) == y,
        BijectionKind::Left => s.meet(x, y) == y,
    };
    let fail = |msg: String| Err(CosetError::InternalInconsistency(format!("{kind:?} bijection a={a} b={b}: {msg}")));
    let map: Vec<(usize, usize)> = from_block.iter().map(|x| (x, forward(x))).collect();
    let image: ElemSet = map.iter().map(|&(_, y)| y).collect();
    if image != to_block || from_block.len() != to_block.len() {
        return fail(format!("image {image} differs from target {to_block}"));
    }
    for &(x, y) in &map {
        if backward(y) != x {
            return fail(format!("inverse sends {y} to {} instead of {x}", backward(y)));
        }
        let partners: Vec<usize> = to_block.iter().filter(|&z| related(x, z)).collect();
        if partners != [y] {
            return fail(format!("{x} is related to {partners:?}, expected only {y}"));
        }
    }
    for &(x, fx) in &map {
        for &(x2, fx2) in &map {
            if forward(s.meet(x, x2)) != s.meet(fx, fx2) || forward(s.join(x, x2)) != s.join(fx, fx2) {
                return fail(format!("not a homomorphism at ({x}, {x2})"));
            }
        }
    }
    Ok(CosetBijection {
        kind,
        from_block,
        to_block,
        map,
    })
}

/// The six coset partitions of a comparable pair together with one coset
/// bijection of each kind per pair of blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CosetSystem {
    pub pair: DClassPair,
    pub full_cosets_in_lower: Vec<ElemSet>,
    pub full_cosets_in_upper: Vec<ElemSet>,
    pub right_cosets_in_lower: Vec<ElemSet>,
    pub left_cosets_in_lower: Vec<ElemSet>,
    pub right_cosets_in_upper: Vec<ElemSet>,
    pub left_cosets_in_upper: Vec<ElemSet>,
    pub bijections: Vec<CosetBijection>,
}

/// Builds the [`CosetSystem`] of `pair`, checking that each family of blocks
/// partitions its class.
pub fn flat_cosets(s: &SkewLattice, pair: &DClassPair) -> Result<CosetSystem, CosetError> {
    let (upper, lower) = (pair.upper, pair.lower);
    let full_cosets_in_lower = blocks_of(lower, |b| meet_sandwich(s, upper, b), "full coset")?;
    let full_cosets_in_upper = blocks_of(upper, |a| join_sandwich(s, lower, a), "full coset")?;
    let right_cosets_in_lower = blocks_of(lower, |b| meet_right(s, b, upper), "right coset")?;
    let left_cosets_in_lower = blocks_of(lower, |b| meet_left(s, upper, b), "left coset")?;
    let right_cosets_in_upper = blocks_of(upper, |a| join_left(s, lower, a), "right coset")?;
    let left_cosets_in_upper = blocks_of(upper, |a| join_right(s, a, lower), "left coset")?;
    let mut bijections = Vec::new();
    for (kind, ups, lows) in [
        (BijectionKind::Full, &full_cosets_in_upper, &full_cosets_in_lower),
        (BijectionKind::Right, &right_cosets_in_upper, &right_cosets_in_lower),
        (BijectionKind::Left, &left_cosets_in_upper, &left_cosets_in_lower),
    ] {
        for up in ups {
            for low in lows {
                let (a, b) = (up.least().unwrap(), low.least().unwrap());
                bijections.push(coset_bijection(s, pair, a, b, kind)?);
            }
        }
    }
    Ok(CosetSystem {
        pair: *pair,
        full_cosets_in_lower,
        full_cosets_in_upper,
        right_cosets_in_lower,
        left_cosets_in_lower,
        right_cosets_in_upper,
        left_cosets_in_upper,
        bijections,
    })
}

/// Coset systems of all comparable pairs.
pub fn coset_systems(s: &SkewLattice) -> Result<Vec<CosetSystem>, CosetError> {
    comparable_pairs(s).iter().map(|p| flat_cosets(s, p)).collect()
}

/// `(x∧A) ∩ (A∧x′)`, which is `{x∧x′}` when `x` and `x′` share a full coset
/// and empty otherwise. The literal intersection is compared with that rule.
pub fn coset_intersection(s: &SkewLattice, pair: &DClassPair, x: usize, x2: usize) -> Result<Option<usize>, CosetError> {
    pair.check_lower(x)?;
    pair.check_lower(x2)?;
    let literal = meet_right(s, x, pair.upper).intersection(meet_left(s, pair.upper, x2));
    let same = meet_sandwich(s, pair.upper, x) == meet_sandwich(s, pair.upper, x2);
    let predicted = if same { ElemSet::singleton(s.meet(x, x2)) } else { ElemSet::EMPTY };
    if literal != predicted {
        return Err(CosetError::InternalInconsistency(format!(
            "(x∧A)∩(A∧x′) = {literal} but expected {predicted} for x={x}, x′={x2}"
        )));
    }
    Ok(literal.least())
}

/// For `x, y ∈ B`: whether `A∧x∧A = A∧y∧A`; whether `A∧x∧y = A∧y` and
/// `x∧A = x∧y∧A`; whether `y∧x∧A = y∧A` and `A∧x = A∧y∧x`.
pub fn linking_equivalence(s: &SkewLattice, pair: &DClassPair, x: usize, y: usize) -> Result<[bool; 3], CosetError> {
    pair.check_lower(x)?;
    pair.check_lower(y)?;
    let a = pair.upper;
    let xy = s.meet(x, y);
    let yx = s.meet(y, x);
    Ok([
        meet_sandwich(s, a, x) == meet_sandwich(s, a, y),
        meet_left(s, a, xy) == meet_left(s, a, y) && meet_right(s, x, a) == meet_right(s, xy, a),
        meet_right(s, yx, a) == meet_right(s, y, a) && meet_left(s, a, x) == meet_left(s, a, yx),
    ])
}

/// The linking elements `(x∧y, y∧x)` when `x` and `y` share a full coset.
pub fn linking_elements(s: &SkewLattice, pair: &DClassPair, x: usize, y: usize) -> Result<Option<(usize, usize)>, CosetError> {
    let eq = linking_equivalence(s, pair, x, y)?;
    if eq[0] != eq[1] || eq[0] != eq[2] {
        return Err(CosetError::InternalInconsistency(format!(
            "linking equivalence fails for x={x}, y={y}: {eq:?}"
        )));
    }
    Ok(eq[0].then(|| (s.meet(x, y), s.meet(y, x))))
}

/// For `y, y′ ∈ B`: whether `y∧A = y′∧A`; whether `y∧x = y′∧x` for all `x ∈ A`;
/// whether it holds for some `x ∈ A`.
pub fn right_coset_equivalence(s: &SkewLattice, pair: &DClassPair, y: usize, y2: usize) -> Result<[bool; 3], CosetError> {
    pair.check_lower(y)?;
    pair.check_lower(y2)?;
    let a = pair.upper;
    Ok([
        meet_right(s, y, a) == meet_right(s, y2, a),
        a.iter().all(|x| s.meet(y, x) == s.meet(y2, x)),
        a.iter().any(|x| s.meet(y, x) == s.meet(y2, x)),
    ])
}

/// A verified isomorphism from a full coset onto the rectangular product of
/// two flat cosets, `(u,v)∧(u′,v′) = (u,v′)` and `(u,v)∨(u′,v′) = (u′,v)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeltaMap {
    pub coset: ElemSet,
    pub left_factor: ElemSet,
    pub right_factor: ElemSet,
    /// Triples `(z, u, v)` with `δ(z) = (u, v)`, sorted by `z`.
    pub map: Vec<(usize, usize, usize)>,
}

fn verify_delta(
    s: &SkewLattice,
    coset: ElemSet,
    left_factor: ElemSet,
    right_factor: ElemSet,
    delta: impl Fn(usize) -> (usize, usize),
) -> Result<DeltaMap, CosetError> {
    let fail = |msg: String| Err(CosetError::InternalInconsistency(format!("δ on {coset}: {msg}")));
    let map: Vec<(usize, usize, usize)> = coset
        .iter()
        .map(|z| {
            let (u, v) = delta(z);
            (z, u, v)
        })
        .collect();
    let mut images: Vec<(usize, usize)> = map.iter().map(|&(_, u, v)| (u, v)).collect();
    images.sort();
    images.dedup();
    let product: Vec<(usize, usize)> = left_factor
        .iter()
        .flat_map(|u| right_factor.iter().map(move |v| (u, v)))
        .collect();
    if images != product {
        return fail(format!("image {images:?} is not {left_factor} × {right_factor}"));
    }
    for &(z, u, v) in &map {
        for &(z2, u2, v2) in &map {
            if delta(s.meet(z, z2)) != (u, v2) || delta(s.join(z, z2)) != (u2, v) {
                return fail(format!("not a homomorphism at ({z}, {z2})"));
            }
        }
    }
    for &u in &left_factor.to_vec() {
        for v in right_factor {
            if delta(s.meet(u, v)) != (u, v) {
                return fail(format!("({u}, {v}) is not the image of {u}∧{v}"));
            }
        }
    }
    Ok(DeltaMap {
        coset,
        left_factor,
        right_factor,
        map,
    })
}

/// `δ: A∧x∧A → (A∧x) × (x∧A)`, `z ↦ (z∧x, x∧z)`, for `x ∈ B`.
pub fn delta_decomposition(s: &SkewLattice, pair: &DClassPair, x: usize) -> Result<DeltaMap, CosetError> {
    pair.check_lower(x)?;
    let a = pair.upper;
    verify_delta(
        s,
        meet_sandwich(s, a, x),
        meet_left(s, a, x),
        meet_right(s, x, a),
        |z| (s.meet(z, x), s.meet(x, z)),
    )
}

/// `δ: B∨y∨B → (y∨B) × (B∨y)`, `u ↦ (y∨u, u∨y)`, for `y ∈ A`.
pub fn delta_decomposition_up(s: &SkewLattice, pair: &DClassPair, y: usize) -> Result<DeltaMap, CosetError> {
    pair.check_upper(y)?;
    let b = pair.lower;
    verify_delta(
        s,
        join_sandwich(s, b, y),
        join_right(s, y, b),
        join_left(s, b, y),
        |u| (s.join(y, u), s.join(u, y)),
    )
}

/// First `x ∈ B∨a∨B` where `(φᴸ × φᴿ)∘δ` and `δ∘φ` disagree, or where
/// `(a∨x)∧b = x∧b` or `b∧(x∨a) = b∧x` fails.
pub fn kimura_diagram_check(s: &SkewLattice, pair: &DClassPair, a: usize, b: usize) -> Result<Option<usize>, CosetError> {
    pair.check_upper(a)?;
    pair.check_lower(b)?;
    let phi = coset_bijection(s, pair, a, b, BijectionKind::Full)?;
    let phi_l = coset_bijection(s, pair, a, b, BijectionKind::Left)?;
    let phi_r = coset_bijection(s, pair, a, b, BijectionKind::Right)?;
    let top = delta_decomposition_up(s, pair, a)?;
    let bottom = delta_decomposition(s, pair, b)?;
    let delta_at = |d: &DeltaMap, z: usize| d.map.iter().find(|t| t.0 == z).map(|t| (t.1, t.2));
    for x in phi.from_block {
        let (u, v) = delta_at(&top, x).expect("δ is total on its coset");
        let around = (phi_l.apply(u), phi_r.apply(v));
        let down = phi.apply(x).and_then(|y| delta_at(&bottom, y));
        let identities = s.meet(s.join(a, x), b) == s.meet(x, b) && s.meet(b, s.join(x, a)) == s.meet(b, x);
        if down.map(|(p, q)| (Some(p), Some(q))) != Some(around) || !identities {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

/// One equivalence `lhs ⇔ rhs` evaluated on concrete elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Equivalence {
    pub name: &'static str,
    pub lhs: bool,
    pub rhs: bool,
}

impl Equivalence {
    pub fn agrees(&self) -> bool {
        self.lhs == self.rhs
    }
}

/// Images of a pair in `S/R` and `S/L`.
struct Factors {
    left: QuotientMap,
    right: QuotientMap,
}

impl Factors {
    fn new(s: &SkewLattice) -> Self {
        Factors {
            left: greens::left_image(s),
            right: greens::right_image(s),
        }
    }
}

fn image_of(q: &QuotientMap, set: ElemSet) -> ElemSet {
    set.iter().map(|x| q.class_of[x]).collect()
}

/// The flat-versus-full coset equivalences for `x, y` in the same class of the
/// pair, directly and through the factors `S/R` (subscript L) and `S/L`
/// (subscript R).
pub fn flat_vs_full_correspondence(
    s: &SkewLattice,
    pair: &DClassPair,
    x: usize,
    y: usize,
) -> Result<Vec<Equivalence>, CosetError> {
    flat_vs_full_with(s, &Factors::new(s), pair, x, y)
}

fn flat_vs_full_with(
    s: &SkewLattice,
    f: &Factors,
    pair: &DClassPair,
    x: usize,
    y: usize,
) -> Result<Vec<Equivalence>, CosetError> {
    let r = |u: usize, v: usize| s.meet(u, v) == v && s.meet(v, u) == u;
    let l = |u: usize, v: usize| s.meet(u, v) == u && s.meet(v, u) == v;
    let (ql, qr) = (&f.left, &f.right);
    let (xl, yl, xr, yr) = (ql.class_of[x], ql.class_of[y], qr.class_of[x], qr.class_of[y]);
    let (sl, sr) = (&ql.quotient, &qr.quotient);
    let eq = |name, lhs, rhs| Equivalence { name, lhs, rhs };
    if pair.lower.contains(x) && pair.lower.contains(y) {
        let a = pair.upper;
        let (al, ar) = (image_of(ql, a), image_of(qr, a));
        let full = meet_sandwich(s, a, x) == meet_sandwich(s, a, y);
        let right = meet_right(s, x, a) == meet_right(s, y, a);
        let left = meet_left(s, a, x) == meet_left(s, a, y);
        Ok(vec![
            eq("x∧A=y∧A ⇔ A∧x∧A=A∧y∧A & x R y", right, full && r(x, y)),
            eq("A∧x=A∧y ⇔ A∧x∧A=A∧y∧A & x L y", left, full && l(x, y)),
            eq(
                "x∧A=y∧A ⇔ x_L=y_L & x_R∧A_R=y_R∧A_R",
                right,
                xl == yl && meet_right(sr, xr, ar) == meet_right(sr, yr, ar),
            ),
            eq(
                "A∧x=A∧y ⇔ x_R=y_R & A_L∧x_L=A_L∧y_L",
                left,
                xr == yr && meet_left(sl, al, xl) == meet_left(sl, al, yl),
            ),
            eq(
                "A∧x∧A=A∧y∧A ⇔ A_L∧x_L∧A_L=A_L∧y_L∧A_L & A_R∧x_R∧A_R=A_R∧y_R∧A_R",
                full,
                meet_sandwich(sl, al, xl) == meet_sandwich(sl, al, yl)
                    && meet_sandwich(sr, ar, xr) == meet_sandwich(sr, ar, yr),
            ),
        ])
    } else if pair.upper.contains(x) && pair.upper.contains(y) {
        let b = pair.lower;
        let (bl, br) = (image_of(ql, b), image_of(qr, b));
        let full = join_sandwich(s, b, x) == join_sandwich(s, b, y);
        let right = join_left(s, b, x) == join_left(s, b, y);
        let left = join_right(s, x, b) == join_right(s, y, b);
        Ok(vec![
            eq("B∨u=B∨v ⇔ B∨u∨B=B∨v∨B & u R v", right, full && r(x, y)),
            eq("u∨B=v∨B ⇔ B∨u∨B=B∨v∨B & u L v", left, full && l(x, y)),
            eq(
                "B∨u=B∨v ⇔ u_L=v_L & B_R∨u_R=B_R∨v_R",
                right,
                xl == yl && join_left(sr, br, xr) == join_left(sr, br, yr),
            ),
            eq(
                "u∨B=v∨B ⇔ u_R=v_R & u_L∨B_L=v_L∨B_L",
                left,
                xr == yr && join_right(sl, xl, bl) == join_right(sl, yl, bl),
            ),
            eq(
                "B∨u∨B=B∨v∨B ⇔ B_L∨u_L∨B_L=B_L∨v_L∨B_L & B_R∨u_R∨B_R=B_R∨v_R∨B_R",
                full,
                join_sandwich(sl, bl, xl) == join_sandwich(sl, bl, yl)
                    && join_sandwich(sr, br, xr) == join_sandwich(sr, br, yr),
            ),
        ])
    } else {
        Err(CosetError::ElementNotInClasses {
            x: if pair.upper.union(pair.lower).contains(x) { y } else { x },
        })
    }
}

fn is_transversal(t: ElemSet, blocks: &[ElemSet]) -> bool {
    blocks.iter().all(|b| b.intersection(t).len() == 1) && t.len() == blocks.len()
}

fn equipotent(blocks: &[ElemSet]) -> bool {
    blocks.windows(2).all(|w| w[0].len() == w[1].len())
}

fn is_rectangular_subset(s: &SkewLattice, set: ElemSet) -> bool {
    s.induced(set)
        .map(|(sub, _)| varieties::is_rectangular(&sub).holds)
        .unwrap_or(false)
}

/// Runs every coset check on one pair and returns a description of each failure.
pub fn audit_pair(s: &SkewLattice, pair: &DClassPair) -> Vec<String> {
    let mut out = Vec::new();
    let mut push = |r: Result<(), String>| {
        if let Err(e) = r {
            out.push(e);
        }
    };
    let sys = match flat_cosets(s, pair) {
        Ok(sys) => sys,
        Err(e) => return vec![e.to_string()],
    };
    let (upper, lower) = (pair.upper, pair.lower);
    let check = |ok: bool, msg: String| if ok { Ok(()) } else { Err(msg) };
    let refines = |fine: &[ElemSet], coarse: &[ElemSet]| fine.iter().all(|f| coarse.iter().any(|c| f.is_subset(*c)));
    push(check(
        refines(&sys.right_cosets_in_lower, &sys.full_cosets_in_lower)
            && refines(&sys.left_cosets_in_lower, &sys.full_cosets_in_lower)
            && refines(&sys.right_cosets_in_upper, &sys.full_cosets_in_upper)
            && refines(&sys.left_cosets_in_upper, &sys.full_cosets_in_upper),
        "flat cosets do not refine full cosets".into(),
    ));
    for blocks in [
        &sys.full_cosets_in_lower,
        &sys.full_cosets_in_upper,
        &sys.right_cosets_in_lower,
        &sys.left_cosets_in_lower,
        &sys.right_cosets_in_upper,
        &sys.left_cosets_in_upper,
    ] {
        push(check(equipotent(blocks), format!("blocks {blocks:?} are not equipotent")));
        for &blk in blocks.iter() {
            push(check(is_rectangular_subset(s, blk), format!("coset {blk} is not a rectangular subalgebra")));
        }
    }
    for b in lower {
        let rc = meet_right(s, b, upper);
        for x in lower {
            push(check(
                rc.contains(x) == (meet_right(s, x, upper) == rc),
                format!("x∈b∧A ⇔ x∧A=b∧A fails at b={b}, x={x}"),
            ));
            let eq = right_coset_equivalence(s, pair, b, x).unwrap();
            push(check(eq[0] == eq[1] && eq[1] == eq[2], format!("y∧A=y′∧A equivalence fails at {b}, {x}")));
            push(coset_intersection(s, pair, b, x).map(drop).map_err(|e| e.to_string()));
            push(linking_elements(s, pair, b, x).map(drop).map_err(|e| e.to_string()));
        }
        let ups: ElemSet = upper.iter().filter(|&a| s.meet(b, a) == b).collect();
        push(check(join_right(s, b, upper) == ups, format!("b∨A ≠ {{a : a ≥_L b}} at b={b}")));
        for (t, blocks, what) in [
            (image_set(s, pair, b).unwrap(), &sys.full_cosets_in_upper, "image set"),
            (right_image_set(s, pair, b).unwrap(), &sys.right_cosets_in_upper, "right image set"),
            (left_image_set(s, pair, b).unwrap(), &sys.left_cosets_in_upper, "left image set"),
        ] {
            push(check(is_transversal(t, blocks), format!("{what} of {b} is not a transversal")));
            push(check(is_rectangular_subset(s, t), format!("{what} of {b} is not rectangular")));
        }
        push(delta_decomposition(s, pair, b).map(drop).map_err(|e| e.to_string()));
    }
    for a in upper {
        let downs: ElemSet = lower.iter().filter(|&b| s.meet(b, a) == b).collect();
        push(check(meet_left(s, lower, a) == downs, format!("B∧a ≠ {{b : a ≥_L b}} at a={a}")));
        let image = image_set(s, pair, a).unwrap();
        let ri = right_image_set(s, pair, a).unwrap();
        let li = left_image_set(s, pair, a).unwrap();
        push(check(
            image.is_subset(ri) && image.is_subset(li),
            format!("a∧B∧a is not inside B∧a and a∧B at a={a}"),
        ));
        for (t, blocks, what) in [
            (image, &sys.full_cosets_in_lower, "image set"),
            (ri, &sys.right_cosets_in_lower, "right image set"),
            (li, &sys.left_cosets_in_lower, "left image set"),
        ] {
            push(check(is_transversal(t, blocks), format!("{what} of {a} is not a transversal")));
            push(check(is_rectangular_subset(s, t), format!("{what} of {a} is not rectangular")));
        }
        push(delta_decomposition_up(s, pair, a).map(drop).map_err(|e| e.to_string()));
        for b in lower {
            for kind in [BijectionKind::Full, BijectionKind::Right, BijectionKind::Left] {
                push(coset_bijection(s, pair, a, b, kind).map(drop).map_err(|e| e.to_string()));
            }
            match kimura_diagram_check(s, pair, a, b) {
                Ok(None) => {}
                Ok(Some(x)) => push(Err(format!("Kimura diagram fails at a={a}, b={b}, x={x}"))),
                Err(e) => push(Err(e.to_string())),
            }
        }
    }
    let factors = Factors::new(s);
    for class in [lower, upper] {
        for x in class {
            for y in class {
                for e in flat_vs_full_with(s, &factors, pair, x, y).unwrap() {
                    if !e.agrees() {
                        push(Err(format!("{} fails at x={x}, y={y} ({} vs {})", e.name, e.lhs, e.rhs)));
                    }
                }
            }
        }
    }
    out
}

/// DOT drawing of one pair: one cluster per full coset and an arrow `x → y`
/// whenever `x > y`.
pub fn coset_dot(s: &SkewLattice, sys: &CosetSystem, names: Option<&[String]>) -> String {
    let label = |x: usize| names.and_then(|n| n.get(x).cloned()).unwrap_or_else(|| x.to_string());
    let mut out = String::from("digraph cosets {\n  rankdir=TB;\n  node [shape=box];\n");
    for (side, blocks) in [("upper", &sys.full_cosets_in_upper), ("lower", &sys.full_cosets_in_lower)] {
        let _ = writeln!(out, "  subgraph cluster_{side} {{\n    label=\"{side}\";");
        for (i, blk) in blocks.iter().enumerate() {
            let _ = writeln!(out, "    subgraph cluster_{side}_{i} {{\n      label=\"{blk}\";");
            for x in *blk {
                let _ = writeln!(out, "      e{x} [label=\"{}\"];", label(x));
            }
            out.push_str("    }\n");
        }
        out.push_str("  }\n");
    }
    for a in sys.pair.upper {
        for b in sys.pair.lower {
            if s.meet(a, b) == b && s.meet(b, a) == b {
                let _ = writeln!(out, "  e{a} -> e{b};");
            }
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{chain, direct_product, rectangular};
    use crate::enumerate::{enumerate, nc5, Nc5Variant};

    fn set(xs: &[usize]) -> ElemSet {
        xs.iter().copied().collect()
    }

    #[test]
    fn comparable_pair_counts() {
        assert!(comparable_pairs(&rectangular(2, 3).unwrap()).is_empty());
        assert_eq!(comparable_pairs(&chain(2).unwrap()).len(), 1);
        assert_eq!(comparable_pairs(&chain(3).unwrap()).len(), 3);
    }

    #[test]
    fn chain_two_bijection() {
        let s = chain(2).unwrap();
        let p = comparable_pairs(&s)[0];
        assert_eq!((p.upper, p.lower), (set(&[1]), set(&[0])));
        let phi = coset_bijection(&s, &p, 1, 0, BijectionKind::Full).unwrap();
        assert_eq!(phi.map, vec![(1, 0)]);
        assert_eq!(image_set(&s, &p, 1).unwrap(), set(&[0]));
        assert_eq!(kimura_diagram_check(&s, &p, 1, 0).unwrap(), None);
        let d = delta_decomposition(&s, &p, 0).unwrap();
        assert_eq!(d.map, vec![(0, 0, 0)]);
    }

    #[test]
    fn element_errors() {
        let s = chain(2).unwrap();
        let p = comparable_pairs(&s)[0];
        assert!(matches!(full_coset(&s, &p, 1), Err(CosetError::ElementNotInClass { x: 1, .. })));
        assert!(matches!(full_coset_up(&s, &p, 0), Err(CosetError::ElementNotInClass { x: 0, .. })));
        let c3 = chain(3).unwrap();
        let p3 = DClassPair::new(&c3, set(&[2]), set(&[1])).unwrap();
        assert!(matches!(image_set(&c3, &p3, 0), Err(CosetError::ElementNotInClasses { x: 0 })));
        assert!(DClassPair::new(&c3, set(&[0]), set(&[1])).is_err());
    }

    /// `2 × rect`, with `B = {0, 1}` below `A = {2, 3}`.
    fn two_by_rect(left: bool) -> SkewLattice {
        let rect = if left { rectangular(2, 1) } else { rectangular(1, 2) }.unwrap();
        direct_product(&chain(2).unwrap(), &rect).unwrap()
    }

    #[test]
    fn handed_cosets() {
        for left in [false, true] {
            let s = two_by_rect(left);
            let pairs = comparable_pairs(&s);
            assert_eq!(pairs.len(), 1);
            let sys = flat_cosets(&s, &pairs[0]).unwrap();
            if left {
                assert!(sys.right_cosets_in_lower.iter().all(|b| b.len() == 1));
                assert_eq!(sys.left_cosets_in_lower, sys.full_cosets_in_lower);
            } else {
                assert!(sys.left_cosets_in_lower.iter().all(|b| b.len() == 1));
                assert_eq!(sys.right_cosets_in_lower, sys.full_cosets_in_lower);
            }
        }
    }

    #[test]
    fn nc5_cosets() {
        use crate::enumerate::nc5_elements::*;
        let s = nc5(Nc5Variant::RightHanded);
        let a = set(&[X1, X2]);
        let b = set(&[Y]);
        let m = set(&[V]);
        assert_eq!(join_sandwich(&s, b, X1), join_sandwich(&s, b, X2));
        assert_ne!(join_sandwich(&s, m, X1), join_sandwich(&s, m, X2));
        let p = DClassPair::new(&s, a, m).unwrap();
        assert!(audit_pair(&s, &p).is_empty());
    }

    #[test]
    fn catalog_audit_is_clean() {
        for k in 2..=5 {
            for s in &enumerate(k, 1).unwrap().algebras {
                for p in comparable_pairs(s) {
                    let failures = audit_pair(s, &p);
                    assert!(failures.is_empty(), "{s:?} {p:?}: {failures:?}");
                }
            }
        }
    }

    #[test]
    fn full_coset_oracle() {
        // A∧y∧A = A∧y′∧A iff x∧y∧x = x∧y′∧x for all x ∈ A.
        for s in &enumerate(4, 1).unwrap().algebras {
            for p in comparable_pairs(s) {
                for y in p.lower {
                    for y2 in p.lower {
                        let direct = full_coset(s, &p, y).unwrap() == full_coset(s, &p, y2).unwrap();
                        let pointwise = p.upper.iter().all(|x| s.meet3(x, y, x) == s.meet3(x, y2, x));
                        assert_eq!(direct, pointwise);
                    }
                }
            }
        }
    }

    #[test]
    fn dot_output_mentions_every_element() {
        let s = two_by_rect(false);
        let sys = flat_cosets(&s, &comparable_pairs(&s)[0]).unwrap();
        let dot = coset_dot(&s, &sys, None);
        assert!(dot.starts_with("digraph cosets {"));
        for x in 0..4 {
            assert!(dot.contains(&format!("e{x} [")));
        }
        let json = serde_json::to_value(&sys).unwrap();
        assert_eq!(json["pair"]["upper"], serde_json::json!([2, 3]));
    }
}
