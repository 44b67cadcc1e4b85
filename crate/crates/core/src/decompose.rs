//! The fibered product over `S/D` of `S/R` and `S/L`, lattice sections with
//! the inner factors they induce, and skew diamonds.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::algebra::{AlgebraFile, OpTable, SkewLattice};
use crate::elemset::ElemSet;
use crate::greens::{self, QuotientMap};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecomposeError {
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

/// `S ≅ S/R ×_{S/D} S/L` with the isomorphism made explicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KimuraDecomposition {
    pub left_factor: QuotientMap,
    pub right_factor: QuotientMap,
    pub base: QuotientMap,
    /// Pairs `(x_L, x_R)` over the same point of `S/D`, in lexicographic order.
    pub carrier: Vec<(usize, usize)>,
    /// The fibered product on `carrier`, with componentwise operations.
    pub fibered: SkewLattice,
    /// Carrier index of each element of `S`.
    pub iso: Vec<usize>,
}

/// `x ↦ (x_L, x_R)`: the R-class and the L-class of `x` as elements of `S/R`
/// and `S/L`.
pub fn projections(s: &SkewLattice) -> (Vec<usize>, Vec<usize>) {
    (greens::left_image(s).class_of, greens::right_image(s).class_of)
}

/// Builds the fibered product and checks that `x ↦ (x_L, x_R)` is a bijective
/// homomorphism onto it.
pub fn kimura(s: &SkewLattice) -> Result<KimuraDecomposition, DecomposeError> {
    let left = greens::left_image(s);
    let right = greens::right_image(s);
    let base = greens::lattice_image(s);
    let fail = |msg: String| Err(DecomposeError::InternalInconsistency(msg));
    // p: S/R → S/D and q: S/L → S/D, read off any preimage.
    let through = |q: &QuotientMap| -> Vec<usize> {
        (0..q.quotient.n())
            .map(|c| base.class_of[q.fiber(c).least().expect("quotient maps are onto")])
            .collect()
    };
    let p = through(&left);
    let q = through(&right);
    let mut carrier = Vec::new();
    for (u, pu) in p.iter().enumerate() {
        for (v, qv) in q.iter().enumerate() {
            if pu == qv {
                carrier.push((u, v));
            }
        }
    }
    let index = |pair: (usize, usize)| carrier.binary_search(&pair).ok();
    let k = carrier.len();
    let (ls, rs) = (&left.quotient, &right.quotient);
    let mut bad = None;
    let mut table = |f: &dyn Fn(usize, usize) -> (usize, usize)| {
        OpTable::from_fn(k, |i, j| match index(f(i, j)) {
            Some(c) => c,
            None => {
                bad.get_or_insert((i, j));
                0
            }
        })
    };
    let meet = table(&|i, j| {
        let ((u, v), (u2, v2)) = (carrier[i], carrier[j]);
        (ls.meet(u, u2), rs.meet(v, v2))
    });
    let join = table(&|i, j| {
        let ((u, v), (u2, v2)) = (carrier[i], carrier[j]);
        (ls.join(u, u2), rs.join(v, v2))
    });
    if let Some((i, j)) = bad {
        return fail(format!("carrier is not closed at ({i}, {j})"));
    }
    let fibered = SkewLattice::new(meet, join)
        .map_err(|e| DecomposeError::InternalInconsistency(format!("fibered product: {e}")))?;
    let mut iso = Vec::with_capacity(s.n());
    for x in s.elements() {
        match index((left.class_of[x], right.class_of[x])) {
            Some(c) => iso.push(c),
            None => return fail(format!("{x} does not land in the carrier")),
        }
    }
    let mut hit = vec![false; k];
    for &c in &iso {
        if std::mem::replace(&mut hit[c], true) {
            return fail(format!("carrier element {c} has two preimages"));
        }
    }
    if hit.contains(&false) || iso.len() != k {
        return fail("x ↦ (x_L, x_R) is not onto".into());
    }
    for x in s.elements() {
        for y in s.elements() {
            if iso[s.meet(x, y)] != fibered.meet(iso[x], iso[y]) || iso[s.join(x, y)] != fibered.join(iso[x], iso[y]) {
                return fail(format!("x ↦ (x_L, x_R) is not a homomorphism at ({x}, {y})"));
            }
        }
    }
    Ok(KimuraDecomposition {
        left_factor: left,
        right_factor: right,
        base,
        carrier,
        fibered,
        iso,
    })
}

fn quotient_json(q: &QuotientMap) -> serde_json::Value {
    serde_json::json!({
        "algebra": AlgebraFile::from_algebra(&q.quotient),
        "class_of": q.class_of,
    })
}

impl Serialize for KimuraDecomposition {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("KimuraDecomposition", 6)?;
        st.serialize_field("left_factor", &quotient_json(&self.left_factor))?;
        st.serialize_field("right_factor", &quotient_json(&self.right_factor))?;
        st.serialize_field("base", &quotient_json(&self.base))?;
        st.serialize_field("carrier", &self.carrier)?;
        st.serialize_field("fibered", &AlgebraFile::from_algebra(&self.fibered))?;
        st.serialize_field("iso", &self.iso)?;
        st.end()
    }
}

/// A lattice section with the inner left and right factors it induces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Sections {
    pub lattice_section: Option<ElemSet>,
    /// Union of the L-classes of section members.
    pub left_section: Option<ElemSet>,
    /// Union of the R-classes of section members.
    pub right_section: Option<ElemSet>,
    /// `π_L(x)`: the member of the left section in the R-class of `x`.
    pub pi_left: Option<Vec<usize>>,
    /// `π_R(x)`: the member of the right section in the L-class of `x`.
    pub pi_right: Option<Vec<usize>>,
}

impl Sections {
    fn none() -> Self {
        Sections {
            lattice_section: None,
            left_section: None,
            right_section: None,
            pi_left: None,
            pi_right: None,
        }
    }
}

/// Depth-first search for one element per D-class, taken in a linear extension
/// of `S/D`, such that the chosen set is closed under both operations.
pub fn lattice_section(s: &SkewLattice) -> Option<ElemSet> {
    let base = greens::lattice_image(s);
    let l = &base.quotient;
    let k = l.n();
    // Number of classes above each class orders them top to bottom.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&c| ((0..k).filter(|&d| l.meet(d, c) == c && d != c).count(), c));
    let classes: Vec<ElemSet> = (0..k).map(|c| base.fiber(c)).collect();

    // Products landing in a class that already has a choice must be that choice.
    fn closed_so_far(s: &SkewLattice, chosen: ElemSet) -> bool {
        let clash = |z: usize| {
            !chosen.contains(z) && chosen.iter().any(|c| s.meet3(c, z, c) == c && s.meet3(z, c, z) == z)
        };
        chosen
            .iter()
            .all(|x| chosen.iter().all(|y| !clash(s.meet(x, y)) && !clash(s.join(x, y))))
    }

    fn rec(s: &SkewLattice, order: &[usize], classes: &[ElemSet], i: usize, chosen: ElemSet) -> Option<ElemSet> {
        if i == order.len() {
            return s.is_closed(chosen).then_some(chosen);
        }
        for x in classes[order[i]] {
            let next = chosen.union(ElemSet::singleton(x));
            if closed_so_far(s, next) {
                if let Some(found) = rec(s, order, classes, i + 1, next) {
                    return Some(found);
                }
            }
        }
        None
    }

    rec(s, &order, &classes, 0, ElemSet::EMPTY)
}

/// The lattice section, if any, and the inner factors it induces, checked
/// against the retraction and kernel properties.
pub fn find_lattice_section(s: &SkewLattice) -> Result<Sections, DecomposeError> {
    let Some(section) = lattice_section(s) else {
        return Ok(Sections::none());
    };
    let fail = |msg: String| Err(DecomposeError::InternalInconsistency(format!("lattice section {section}: {msg}")));
    let d = greens::green_d(s);
    let r = greens::green_r(s);
    let l = greens::green_l(s);
    let left_section: ElemSet = section.iter().flat_map(|x| l.class(x)).collect();
    let right_section: ElemSet = section.iter().flat_map(|x| r.class(x)).collect();
    let pick = |set: ElemSet, class: ElemSet| {
        let both = set.intersection(class);
        (both.len() == 1).then(|| both.least().unwrap())
    };
    let mut pi_left = Vec::with_capacity(s.n());
    let mut pi_right = Vec::with_capacity(s.n());
    for x in s.elements() {
        match (pick(left_section, r.class(x)), pick(right_section, l.class(x))) {
            (Some(a), Some(b)) => {
                pi_left.push(a);
                pi_right.push(b);
            }
            _ => return fail(format!("{x} has no unique projection")),
        }
    }
    if !commutative_on(s, section) {
        return fail("section is not commutative".into());
    }
    for (set, name) in [(section, "section"), (left_section, "left section"), (right_section, "right section")] {
        if !s.is_closed(set) {
            return fail(format!("{name} is not a subalgebra"));
        }
    }
    for x in s.elements() {
        let factorizations = left_section
            .intersection(d.class(x))
            .iter()
            .flat_map(|u| right_section.intersection(d.class(x)).iter().map(move |v| (u, v)))
            .filter(|&(u, v)| s.meet(u, v) == x)
            .count();
        if factorizations != 1 || s.meet(pi_left[x], pi_right[x]) != x {
            return fail(format!("{x} does not factor uniquely"));
        }
        if pi_left[pi_right[x]] != pi_right[pi_left[x]] || !section.contains(pi_left[pi_right[x]]) {
            return fail(format!("π_L and π_R do not commute onto the section at {x}"));
        }
        if (left_section.contains(x) && pi_left[x] != x) || (right_section.contains(x) && pi_right[x] != x) {
            return fail(format!("projections are not retractions at {x}"));
        }
        for y in s.elements() {
            let hom = |p: &[usize]| p[s.meet(x, y)] == s.meet(p[x], p[y]) && p[s.join(x, y)] == s.join(p[x], p[y]);
            if !hom(&pi_left) || !hom(&pi_right) {
                return fail(format!("projections are not homomorphisms at ({x}, {y})"));
            }
            if (pi_left[x] == pi_left[y]) != r.same(x, y)
                || (pi_right[x] == pi_right[y]) != l.same(x, y)
                || (pi_left[pi_right[x]] == pi_left[pi_right[y]]) != d.same(x, y)
            {
                return fail(format!("kernels differ from R, L, D at ({x}, {y})"));
            }
        }
    }
    Ok(Sections {
        lattice_section: Some(section),
        left_section: Some(left_section),
        right_section: Some(right_section),
        pi_left: Some(pi_left),
        pi_right: Some(pi_right),
    })
}

/// D-classes `J > A, B > M` with `A`, `B` incomparable, `J = A ∨ B` and `M = A ∧ B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SkewDiamond {
    pub top: ElemSet,
    pub left: ElemSet,
    pub right: ElemSet,
    pub bottom: ElemSet,
}

/// All skew diamonds with `A` before `B` by least element. Each one is checked
/// against `J = {a∨b : a∨b = b∨a}` and `M = {a∧b : a∧b = b∧a}`.
pub fn skew_diamonds(s: &SkewLattice) -> Result<Vec<SkewDiamond>, DecomposeError> {
    let base = greens::lattice_image(s);
    let l = &base.quotient;
    let k = l.n();
    let mut out = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            let (m, j) = (l.meet(a, b), l.join(a, b));
            if m == a || m == b {
                continue;
            }
            let d = SkewDiamond {
                top: base.fiber(j),
                left: base.fiber(a),
                right: base.fiber(b),
                bottom: base.fiber(m),
            };
            let pairs = || d.left.iter().flat_map(|x| d.right.iter().map(move |y| (x, y)));
            let joins: ElemSet = pairs().filter(|&(x, y)| s.join(x, y) == s.join(y, x)).map(|(x, y)| s.join(x, y)).collect();
            let meets: ElemSet = pairs().filter(|&(x, y)| s.meet(x, y) == s.meet(y, x)).map(|(x, y)| s.meet(x, y)).collect();
            if joins != d.top || meets != d.bottom {
                return Err(DecomposeError::InternalInconsistency(format!(
                    "diamond {d:?}: commuting joins {joins}, commuting meets {meets}"
                )));
            }
            out.push(d);
        }
    }
    Ok(out)
}

fn commutative_on(s: &SkewLattice, set: ElemSet) -> bool {
    set.iter()
        .all(|x| set.iter().all(|y| s.meet(x, y) == s.meet(y, x) && s.join(x, y) == s.join(y, x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{chain, direct_product, rectangular};
    use crate::enumerate::{enumerate, isomorphic, nc5, nc5_elements, Nc5Variant};
    use crate::varieties::{self, PredicateKind};

    #[test]
    fn lattice_factors_are_copies() {
        let c = chain(3).unwrap();
        let k = kimura(&c).unwrap();
        assert!(isomorphic(&k.left_factor.quotient, &c).is_some());
        assert!(isomorphic(&k.right_factor.quotient, &c).is_some());
        assert_eq!(find_lattice_section(&c).unwrap().lattice_section, Some(c.universe()));
    }

    #[test]
    fn rectangular_factors() {
        for (l, r) in [(2, 3), (3, 1), (1, 1)] {
            let s = rectangular(l, r).unwrap();
            let k = kimura(&s).unwrap();
            assert!(isomorphic(&k.left_factor.quotient, &rectangular(l, 1).unwrap()).is_some());
            assert!(isomorphic(&k.right_factor.quotient, &rectangular(1, r).unwrap()).is_some());
            assert!(isomorphic(&k.fibered, &s).is_some());
        }
    }

    #[test]
    fn projections_track_green() {
        let s = direct_product(&chain(2).unwrap(), &rectangular(2, 2).unwrap()).unwrap();
        let (xl, xr) = projections(&s);
        let (r, l) = (greens::green_r(&s), greens::green_l(&s));
        for x in s.elements() {
            for y in s.elements() {
                assert_eq!(xl[x] == xl[y], r.same(x, y));
                assert_eq!(xr[x] == xr[y], l.same(x, y));
            }
        }
        let lh = direct_product(&chain(2).unwrap(), &rectangular(3, 1).unwrap()).unwrap();
        let (_, xr) = projections(&lh);
        let d = greens::green_d(&lh);
        assert!(lh.elements().all(|x| lh.elements().all(|y| !d.same(x, y) || xr[x] == xr[y])));
    }

    #[test]
    fn diamonds() {
        assert!(skew_diamonds(&chain(4).unwrap()).unwrap().is_empty());
        let two = chain(2).unwrap();
        let m = direct_product(&two, &two).unwrap();
        assert_eq!(skew_diamonds(&m).unwrap().len(), 1);
        let s = nc5(Nc5Variant::RightHanded);
        let ds = skew_diamonds(&s).unwrap();
        assert_eq!(ds.len(), 1);
        let a: ElemSet = [nc5_elements::X1, nc5_elements::X2].into_iter().collect();
        assert!(ds[0].left == a || ds[0].right == a);
    }

    #[test]
    fn catalog_decompositions() {
        let battery: Vec<_> = varieties::REGISTRY.iter().filter(|p| p.kind == PredicateKind::Identity).collect();
        for k in 1..=5 {
            for s in &enumerate(k, 1).unwrap().algebras {
                let dec = kimura(s).unwrap();
                assert!(varieties::is_left_handed(&dec.left_factor.quotient).holds);
                assert!(varieties::is_right_handed(&dec.right_factor.quotient).holds);
                let total: usize = greens::green_d(s)
                    .blocks()
                    .iter()
                    .map(|&d| {
                        let dl: ElemSet = d.iter().map(|x| dec.left_factor.class_of[x]).collect();
                        let dr: ElemSet = d.iter().map(|x| dec.right_factor.class_of[x]).collect();
                        dl.len() * dr.len()
                    })
                    .sum();
                assert_eq!(total, s.n());
                for p in &battery {
                    let whole = (p.eval)(s).holds;
                    let parts = (p.eval)(&dec.left_factor.quotient).holds && (p.eval)(&dec.right_factor.quotient).holds;
                    assert_eq!(whole, parts, "{} on {s:?}", p.name);
                }
                let sec = find_lattice_section(s).unwrap();
                let primitive = greens::green_d(s).len() == 2;
                if primitive || varieties::is_symmetric(s).holds {
                    assert!(sec.lattice_section.is_some(), "{s:?}");
                }
                skew_diamonds(s).unwrap();
            }
        }
    }

    #[test]
    fn inner_factors_match_quotients() {
        for s in &enumerate(4, 1).unwrap().algebras {
            let sec = find_lattice_section(s).unwrap();
            let (Some(sl), Some(sr)) = (sec.left_section, sec.right_section) else { continue };
            let (left, _) = s.induced(sl).unwrap();
            let (right, _) = s.induced(sr).unwrap();
            assert!(isomorphic(&left, &greens::left_image(s).quotient).is_some());
            assert!(isomorphic(&right, &greens::right_image(s).quotient).is_some());
            assert!(varieties::is_left_handed(&left).holds);
            assert!(varieties::is_right_handed(&right).holds);
            let (pl, pr) = (sec.pi_left.unwrap(), sec.pi_right.unwrap());
            for x in s.elements() {
                for y in s.elements() {
                    let (m1, m2) = (s.meet(pl[x], pl[y]), s.meet(pr[x], pr[y]));
                    let (j1, j2) = (s.join(pl[x], pl[y]), s.join(pr[x], pr[y]));
                    assert_eq!(s.meet(x, y), s.meet(m1, m2));
                    assert_eq!(s.join(x, y), s.meet(j1, j2));
                }
            }
        }
    }

    #[test]
    fn serializes_with_iso_table() {
        let k = kimura(&rectangular(2, 2).unwrap()).unwrap();
        let v = serde_json::to_value(&k).unwrap();
        assert_eq!(v["iso"].as_array().unwrap().len(), 4);
        assert_eq!(v["carrier"][0], serde_json::json!([0, 0]));
    }
}
