//! Skew lattices of idempotent matrices over GF(p), `p` an odd prime, with
//! `x∧y = xy` and `x∨y = x∇y = x + y + yx − xyx − yxy`.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::algebra::{validate, AlgebraError, AlgebraFile, OpTable, SkewLattice, ValidationReport};
use crate::cosets::{self, DClassPair};
use crate::greens;
use crate::laws::{Assertion, ConcordanceReport, Record};
use crate::MAX_ORDER;

/// Largest modulus accepted by [`PrimeField::new`].
pub const MAX_PRIME: u32 = 97;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixError {
    #[error("{p} is not a prime")]
    NotPrime { p: u32 },
    #[error("characteristic 2 is excluded")]
    CharacteristicTwo,
    #[error("modulus {p} exceeds the cap {MAX_PRIME}")]
    PrimeTooLarge { p: u32 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("field mismatch: GF({left}) vs GF({right})")]
    FieldMismatch { left: u32, right: u32 },
    #[error("row {row} has {len} entries, expected {dim}")]
    Ragged { row: usize, len: usize, dim: usize },
    #[error("generator {index} is not idempotent")]
    NotIdempotent { index: usize },
    #[error("closure exceeds {cap} elements")]
    ClosureExceedsCap { cap: usize },
    #[error("closure is not a skew lattice: {0}")]
    NotASkewLattice(ValidationReport),
    #[error("block shapes do not fit: {0}")]
    BadBlocks(String),
    #[error("matrix {index} is not in standard block form")]
    NotInStandardForm { index: usize },
    #[error("closure does not have exactly two comparable D-classes")]
    NotPrimitive,
    #[error("no generators")]
    Empty,
}

/// GF(p) for an odd prime `p ≤ MAX_PRIME`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct PrimeField {
    pub p: u32,
}

impl PrimeField {
    pub fn new(p: u32) -> Result<Self, MatrixError> {
        if p == 2 {
            return Err(MatrixError::CharacteristicTwo);
        }
        if p > MAX_PRIME {
            return Err(MatrixError::PrimeTooLarge { p });
        }
        if p < 2 || (2..p).take_while(|d| d * d <= p).any(|d| p.is_multiple_of(d)) {
            return Err(MatrixError::NotPrime { p });
        }
        Ok(PrimeField { p })
    }

    pub fn reduce(self, v: i64) -> u32 {
        v.rem_euclid(self.p as i64) as u32
    }
}

/// A dense square matrix with entries reduced mod `p`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matrix {
    p: u32,
    dim: usize,
    entries: Vec<u32>,
}

impl Matrix {
    pub fn zeros(field: PrimeField, dim: usize) -> Self {
        Matrix {
            p: field.p,
            dim,
            entries: vec![0; dim * dim],
        }
    }

    pub fn identity(field: PrimeField, dim: usize) -> Self {
        let mut m = Matrix::zeros(field, dim);
        for i in 0..dim {
            m.entries[i * dim + i] = 1 % field.p;
        }
        m
    }

    /// Entries are reduced mod `p`.
    pub fn from_rows(field: PrimeField, rows: &[Vec<i64>]) -> Result<Self, MatrixError> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(MatrixError::Ragged { row, len: r.len(), dim });
            }
            entries.extend(r.iter().map(|&v| field.reduce(v)));
        }
        Ok(Matrix { p: field.p, dim, entries })
    }

    pub fn field(&self) -> PrimeField {
        PrimeField { p: self.p }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.entries[i * self.dim + j] = self.field().reduce(v);
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        self.entries.chunks(self.dim.max(1)).take(self.dim).map(<[u32]>::to_vec).collect()
    }

    fn compatible(&self, other: &Matrix) -> Result<(), MatrixError> {
        if self.p != other.p {
            return Err(MatrixError::FieldMismatch {
                left: self.p,
                right: other.p,
            });
        }
        if self.dim != other.dim {
            return Err(MatrixError::DimMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    fn zip(&self, other: &Matrix, f: impl Fn(i64, i64) -> i64) -> Matrix {
        let field = self.field();
        Matrix {
            p: self.p,
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| field.reduce(f(a as i64, b as i64)))
                .collect(),
        }
    }

    fn mul_unchecked(&self, other: &Matrix) -> Matrix {
        let n = self.dim;
        let p = self.p as u64;
        let mut entries = vec![0u32; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k] as u64;
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    let e = &mut entries[i * n + j];
                    *e = ((*e as u64 + a * other.entries[k * n + j] as u64) % p) as u32;
                }
            }
        }
        Matrix { p: self.p, dim: n, entries }
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, MatrixError> {
        self.compatible(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix, MatrixError> {
        self.compatible(other)?;
        Ok(self.zip(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix, MatrixError> {
        self.compatible(other)?;
        Ok(self.zip(other, |a, b| a - b))
    }

    pub fn is_idempotent(&self) -> bool {
        self.mul_unchecked(self) == *self
    }

    /// The sub-block with rows `r` and columns `c`.
    pub fn block(&self, r: std::ops::Range<usize>, c: std::ops::Range<usize>) -> Vec<Vec<u32>> {
        r.map(|i| c.clone().map(|j| self.get(i, j)).collect()).collect()
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}){:?}", self.p, self.rows())
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("Matrix", 3)?;
        st.serialize_field("p", &self.p)?;
        st.serialize_field("dim", &self.dim)?;
        st.serialize_field("rows", &self.rows())?;
        st.end()
    }
}

/// `x∘y = x + y − xy`.
pub fn circle(x: &Matrix, y: &Matrix) -> Result<Matrix, MatrixError> {
    x.add(y)?.sub(&x.mul(y)?)
}

/// `x∇y = x + y + yx − xyx − yxy`.
pub fn nabla(x: &Matrix, y: &Matrix) -> Result<Matrix, MatrixError> {
    let yx = y.mul(x)?;
    let xyx = x.mul(&yx)?;
    let yxy = yx.mul(y)?;
    x.add(y)?.add(&yx)?.sub(&xyx)?.sub(&yxy)
}

/// Sizes of the three diagonal blocks of the standard basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BlockDims(pub [usize; 3]);

impl BlockDims {
    pub fn dim(self) -> usize {
        self.0.iter().sum()
    }

    fn range(self, i: usize) -> std::ops::Range<usize> {
        let start: usize = self.0[..i].iter().sum();
        start..start + self.0[i]
    }

    fn check(self) -> Result<(), MatrixError> {
        if self.0[1] == 0 {
            return Err(MatrixError::BadBlocks("the middle block must be nonempty".into()));
        }
        Ok(())
    }
}

/// A skew lattice of matrices with its abstract index tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixSkewLattice {
    pub field: PrimeField,
    /// Distinct idempotents in increasing order; index `i` is element `i` of `algebra`.
    pub elements: Vec<Matrix>,
    pub algebra: SkewLattice,
    pub origin: String,
    pub blocks: Option<BlockDims>,
}

impl MatrixSkewLattice {
    pub fn index_of(&self, m: &Matrix) -> Option<usize> {
        self.elements.binary_search(m).ok()
    }
}

impl Serialize for MatrixSkewLattice {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("MatrixSkewLattice", 5)?;
        st.serialize_field("p", &self.field.p)?;
        st.serialize_field("origin", &self.origin)?;
        st.serialize_field("blocks", &self.blocks)?;
        st.serialize_field("matrices", &self.elements)?;
        st.serialize_field("algebra", &AlgebraFile::from_algebra(&self.algebra))?;
        st.end()
    }
}

/// Least set containing `generators` closed under `·` and `∇`, with its
/// abstract tables validated.
pub fn closure(generators: &[Matrix], origin: impl Into<String>) -> Result<MatrixSkewLattice, MatrixError> {
    let first = generators.first().ok_or(MatrixError::Empty)?;
    for (index, g) in generators.iter().enumerate() {
        first.compatible(g)?;
        if !g.is_idempotent() {
            return Err(MatrixError::NotIdempotent { index });
        }
    }
    let mut seen: Vec<Matrix> = Vec::new();
    let mut queue: VecDeque<Matrix> = generators.iter().cloned().collect();
    while let Some(m) = queue.pop_front() {
        if seen.contains(&m) {
            continue;
        }
        seen.push(m.clone());
        if seen.len() > MAX_ORDER {
            return Err(MatrixError::ClosureExceedsCap { cap: MAX_ORDER });
        }
        for other in seen.clone() {
            for r in [
                m.mul_unchecked(&other),
                other.mul_unchecked(&m),
                nabla(&m, &other)?,
                nabla(&other, &m)?,
            ] {
                if !seen.contains(&r) && !queue.contains(&r) {
                    queue.push_back(r);
                }
            }
        }
    }
    seen.sort();
    let index: BTreeMap<&Matrix, usize> = seen.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let n = seen.len();
    let meet = OpTable::from_fn(n, |i, j| index[&seen[i].mul_unchecked(&seen[j])]);
    let join = OpTable::from_fn(n, |i, j| index[&nabla(&seen[i], &seen[j]).expect("same shape")]);
    let report = validate(&meet, &join).map_err(|e| match e {
        AlgebraError::NotASkewLattice(r) => MatrixError::NotASkewLattice(r),
        other => MatrixError::BadBlocks(other.to_string()),
    })?;
    if !report.valid {
        return Err(MatrixError::NotASkewLattice(report));
    }
    let algebra = SkewLattice::new(meet, join).expect("validated");
    Ok(MatrixSkewLattice {
        field: first.field(),
        elements: seen,
        algebra,
        origin: origin.into(),
        blocks: None,
    })
}

/// A rectangular block of parameters, given by rows.
pub type Block = Vec<Vec<i64>>;

fn zero_block(r: usize, c: usize) -> Block {
    vec![vec![0; c]; r]
}

fn check_shape(name: &str, b: &Block, r: usize, c: usize) -> Result<(), MatrixError> {
    if b.len() != r || b.iter().any(|row| row.len() != c) {
        return Err(MatrixError::BadBlocks(format!("{name} must be {r}×{c}")));
    }
    Ok(())
}

/// Parameters of an element of the upper class: `a₁₃, a₂₃, a₃₁, a₃₂`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpperParams {
    pub a13: Block,
    pub a23: Block,
    pub a31: Block,
    pub a32: Block,
}

/// Parameters of an element of the lower class: `b₁₂, b₁₃, b₂₁, b₃₁`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowerParams {
    pub b12: Block,
    pub b13: Block,
    pub b21: Block,
    pub b31: Block,
}

impl UpperParams {
    pub fn zero(d: BlockDims) -> Self {
        let [n1, n2, n3] = d.0;
        UpperParams {
            a13: zero_block(n1, n3),
            a23: zero_block(n2, n3),
            a31: zero_block(n3, n1),
            a32: zero_block(n3, n2),
        }
    }

    /// Only `a₁₃` and `a₂₃`, as in the right-handed form.
    pub fn right(d: BlockDims, a13: Block, a23: Block) -> Self {
        UpperParams { a13, a23, ..UpperParams::zero(d) }
    }

    /// Only `a₃₁` and `a₃₂`, as in the left-handed form.
    pub fn left(d: BlockDims, a31: Block, a32: Block) -> Self {
        UpperParams { a31, a32, ..UpperParams::zero(d) }
    }
}

impl LowerParams {
    pub fn zero(d: BlockDims) -> Self {
        let [n1, n2, n3] = d.0;
        LowerParams {
            b12: zero_block(n1, n2),
            b13: zero_block(n1, n3),
            b21: zero_block(n2, n1),
            b31: zero_block(n3, n1),
        }
    }

    pub fn right(d: BlockDims, b12: Block, b13: Block) -> Self {
        LowerParams { b12, b13, ..LowerParams::zero(d) }
    }

    pub fn left(d: BlockDims, b21: Block, b31: Block) -> Self {
        LowerParams { b21, b31, ..LowerParams::zero(d) }
    }
}

/// Writes `block` at the given block position.
fn place(m: &mut Matrix, d: BlockDims, bi: usize, bj: usize, block: &[Vec<u32>]) {
    for (i, r) in d.range(bi).zip(block) {
        for (j, &v) in d.range(bj).zip(r) {
            m.set(i, j, v as i64);
        }
    }
}

fn to_residues(field: PrimeField, b: &Block) -> Vec<Vec<u32>> {
    b.iter().map(|r| r.iter().map(|&v| field.reduce(v)).collect()).collect()
}

fn block_mul(field: PrimeField, x: &[Vec<u32>], y: &[Vec<u32>], cols: usize) -> Vec<Vec<u32>> {
    x.iter()
        .map(|row| {
            (0..cols)
                .map(|j| field.reduce(row.iter().zip(y).map(|(&a, yr)| a as i64 * yr[j] as i64).sum()))
                .collect()
        })
        .collect()
}

fn block_add(field: PrimeField, x: &[Vec<u32>], y: &[Vec<u32>]) -> Vec<Vec<u32>> {
    x.iter()
        .zip(y)
        .map(|(a, b)| a.iter().zip(b).map(|(&u, &v)| field.reduce(u as i64 + v as i64)).collect())
        .collect()
}

fn identity_block(k: usize) -> Vec<Vec<u32>> {
    (0..k).map(|i| (0..k).map(|j| u32::from(i == j)).collect()).collect()
}

/// `[[I,0,a₁₃],[0,I,a₂₃],[a₃₁,a₃₂,a₃₁a₁₃+a₃₂a₂₃]]`.
pub fn upper_element(field: PrimeField, d: BlockDims, q: &UpperParams) -> Result<Matrix, MatrixError> {
    d.check()?;
    let [n1, n2, n3] = d.0;
    check_shape("a13", &q.a13, n1, n3)?;
    check_shape("a23", &q.a23, n2, n3)?;
    check_shape("a31", &q.a31, n3, n1)?;
    check_shape("a32", &q.a32, n3, n2)?;
    let (a13, a23, a31, a32) = (
        to_residues(field, &q.a13),
        to_residues(field, &q.a23),
        to_residues(field, &q.a31),
        to_residues(field, &q.a32),
    );
    let a33 = block_add(field, &block_mul(field, &a31, &a13, n3), &block_mul(field, &a32, &a23, n3));
    let mut m = Matrix::zeros(field, d.dim());
    place(&mut m, d, 0, 0, &identity_block(n1));
    place(&mut m, d, 1, 1, &identity_block(n2));
    place(&mut m, d, 0, 2, &a13);
    place(&mut m, d, 1, 2, &a23);
    place(&mut m, d, 2, 0, &a31);
    place(&mut m, d, 2, 1, &a32);
    place(&mut m, d, 2, 2, &a33);
    Ok(m)
}

/// `[[I,b₁₂,b₁₃],[b₂₁,b₂₁b₁₂,b₂₁b₁₃],[b₃₁,b₃₁b₁₂,b₃₁b₁₃]]`.
pub fn lower_element(field: PrimeField, d: BlockDims, q: &LowerParams) -> Result<Matrix, MatrixError> {
    d.check()?;
    let [n1, n2, n3] = d.0;
    check_shape("b12", &q.b12, n1, n2)?;
    check_shape("b13", &q.b13, n1, n3)?;
    check_shape("b21", &q.b21, n2, n1)?;
    check_shape("b31", &q.b31, n3, n1)?;
    let (b12, b13, b21, b31) = (
        to_residues(field, &q.b12),
        to_residues(field, &q.b13),
        to_residues(field, &q.b21),
        to_residues(field, &q.b31),
    );
    let mut m = Matrix::zeros(field, d.dim());
    place(&mut m, d, 0, 0, &identity_block(n1));
    place(&mut m, d, 0, 1, &b12);
    place(&mut m, d, 0, 2, &b13);
    place(&mut m, d, 1, 0, &b21);
    place(&mut m, d, 2, 0, &b31);
    place(&mut m, d, 1, 1, &block_mul(field, &b21, &b12, n2));
    place(&mut m, d, 1, 2, &block_mul(field, &b21, &b13, n3));
    place(&mut m, d, 2, 1, &block_mul(field, &b31, &b12, n2));
    place(&mut m, d, 2, 2, &block_mul(field, &b31, &b13, n3));
    Ok(m)
}

/// Closure of the diagonal idempotents `a₀ = diag(I,I,0)`, `b₀ = diag(I,0,0)`
/// and the given upper and lower elements, checked to be primitive.
pub fn primitive_standard(
    field: PrimeField,
    d: BlockDims,
    upper: &[UpperParams],
    lower: &[LowerParams],
    origin: impl Into<String>,
) -> Result<MatrixSkewLattice, MatrixError> {
    let mut gens = vec![
        upper_element(field, d, &UpperParams::zero(d))?,
        lower_element(field, d, &LowerParams::zero(d))?,
    ];
    for q in upper {
        gens.push(upper_element(field, d, q)?);
    }
    for q in lower {
        gens.push(lower_element(field, d, q)?);
    }
    let mut ms = closure(&gens, origin)?;
    ms.blocks = Some(d);
    let pairs = cosets::comparable_pairs(&ms.algebra);
    if greens::green_d(&ms.algebra).len() != 2 || pairs.len() != 1 {
        return Err(MatrixError::NotPrimitive);
    }
    Ok(ms)
}

/// Right-handed form: `a₃₁ = a₃₂ = 0 = b₂₁ = b₃₁`.
pub fn primitive_right_handed(
    p: u32,
    d: BlockDims,
    a: (Block, Block),
    b: (Block, Block),
) -> Result<MatrixSkewLattice, MatrixError> {
    let field = PrimeField::new(p)?;
    let origin = format!("right-handed GF({p}) blocks {:?} a13={:?} a23={:?} b12={:?} b13={:?}", d.0, a.0, a.1, b.0, b.1);
    primitive_standard(field, d, &[UpperParams::right(d, a.0, a.1)], &[LowerParams::right(d, b.0, b.1)], origin)
}

/// Left-handed form: `a₁₃ = a₂₃ = 0 = b₁₂ = b₁₃`.
pub fn primitive_left_handed(
    p: u32,
    d: BlockDims,
    a: (Block, Block),
    b: (Block, Block),
) -> Result<MatrixSkewLattice, MatrixError> {
    let field = PrimeField::new(p)?;
    let origin = format!("left-handed GF({p}) blocks {:?} a31={:?} a32={:?} b21={:?} b31={:?}", d.0, a.0, a.1, b.0, b.1);
    primitive_standard(field, d, &[UpperParams::left(d, a.0, a.1)], &[LowerParams::left(d, b.0, b.1)], origin)
}

/// Which standard form a matrix has, with its parameter blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StandardForm {
    Upper(UpperParams),
    Lower(LowerParams),
}

fn as_block(b: Vec<Vec<u32>>) -> Block {
    b.into_iter().map(|r| r.into_iter().map(i64::from).collect()).collect()
}

/// Reads the parameter blocks of `m` and checks that `m` is exactly the
/// standard-form matrix they determine.
pub fn standard_form(m: &Matrix, d: BlockDims) -> Option<StandardForm> {
    if m.dim() != d.dim() || d.check().is_err() {
        return None;
    }
    let field = m.field();
    let r = |i| d.range(i);
    let upper = UpperParams {
        a13: as_block(m.block(r(0), r(2))),
        a23: as_block(m.block(r(1), r(2))),
        a31: as_block(m.block(r(2), r(0))),
        a32: as_block(m.block(r(2), r(1))),
    };
    if upper_element(field, d, &upper).ok().as_ref() == Some(m) {
        return Some(StandardForm::Upper(upper));
    }
    let lower = LowerParams {
        b12: as_block(m.block(r(0), r(1))),
        b13: as_block(m.block(r(0), r(2))),
        b21: as_block(m.block(r(1), r(0))),
        b31: as_block(m.block(r(2), r(0))),
    };
    if lower_element(field, d, &lower).ok().as_ref() == Some(m) {
        return Some(StandardForm::Lower(lower));
    }
    None
}

/// `m = m_L · m_R` with `m_L` lower and `m_R` upper block-triangular, both idempotent.
pub fn triangular_factorization(m: &Matrix, d: BlockDims) -> Result<(Matrix, Matrix), MatrixError> {
    let field = m.field();
    let (ml, mr) = match standard_form(m, d).ok_or(MatrixError::NotInStandardForm { index: 0 })? {
        StandardForm::Upper(q) => (
            upper_element(field, d, &UpperParams::left(d, q.a31, q.a32))?,
            upper_element(field, d, &UpperParams::right(d, q.a13, q.a23))?,
        ),
        StandardForm::Lower(q) => (
            lower_element(field, d, &LowerParams::left(d, q.b21, q.b31))?,
            lower_element(field, d, &LowerParams::right(d, q.b12, q.b13))?,
        ),
    };
    assert_eq!(ml.mul(&mr)?, *m, "internal inconsistency: factors do not multiply back");
    assert!(ml.is_idempotent() && mr.is_idempotent(), "internal inconsistency: factor not idempotent");
    Ok((ml, mr))
}

/// Compares the coset equalities of the abstract tables with the block-entry
/// equalities they are claimed to match, for every pair in each class.
pub fn matrix_coset_remark_check(ms: &MatrixSkewLattice) -> Result<ConcordanceReport, MatrixError> {
    let d = ms.blocks.ok_or_else(|| MatrixError::BadBlocks("no block structure declared".into()))?;
    let s = &ms.algebra;
    let mut forms = Vec::with_capacity(ms.elements.len());
    for (index, m) in ms.elements.iter().enumerate() {
        forms.push(standard_form(m, d).ok_or(MatrixError::NotInStandardForm { index })?);
    }
    let upper: crate::ElemSet = (0..forms.len()).filter(|&i| matches!(forms[i], StandardForm::Upper(_))).collect();
    let lower: crate::ElemSet = (0..forms.len()).filter(|&i| matches!(forms[i], StandardForm::Lower(_))).collect();
    let pair = DClassPair::new(s, upper, lower).map_err(|_| MatrixError::NotInStandardForm {
        index: upper.union(lower).least().unwrap_or(0),
    })?;
    let mut report = ConcordanceReport::new("matrix coset criteria", &ms.origin);
    let (a, b) = (pair.upper, pair.lower);
    let lo = |i: usize| match &forms[i] {
        StandardForm::Lower(q) => q,
        StandardForm::Upper(_) => unreachable!(),
    };
    let up = |i: usize| match &forms[i] {
        StandardForm::Upper(q) => q,
        StandardForm::Lower(_) => unreachable!(),
    };
    for x in b {
        for y in b {
            let (p, q) = (lo(x), lo(y));
            let rows = [
                (
                    "AxA=AyA ⇔ x21=y21 & x12=y12",
                    cosets::meet_sandwich(s, a, x) == cosets::meet_sandwich(s, a, y),
                    p.b21 == q.b21 && p.b12 == q.b12,
                ),
                (
                    "xA=yA ⇔ x21=y21 & x31=y31 & x12=y12",
                    cosets::meet_right(s, x, a) == cosets::meet_right(s, y, a),
                    p.b21 == q.b21 && p.b31 == q.b31 && p.b12 == q.b12,
                ),
                (
                    "Ax=Ay ⇔ x21=y21 & x12=y12 & x13=y13",
                    cosets::meet_left(s, a, x) == cosets::meet_left(s, a, y),
                    p.b21 == q.b21 && p.b12 == q.b12 && p.b13 == q.b13,
                ),
            ];
            for (clause, lhs, rhs) in rows {
                report.push(Record::new(clause, Assertion::Iff, vec![a, b], vec![x, y], lhs, rhs));
            }
        }
    }
    for u in a {
        for v in a {
            let (p, q) = (up(u), up(v));
            let rows = [
                (
                    "B∇u∇B=B∇v∇B ⇔ u32=v32 & u23=v23",
                    cosets::join_sandwich(s, b, u) == cosets::join_sandwich(s, b, v),
                    p.a32 == q.a32 && p.a23 == q.a23,
                ),
                (
                    "B∇u=B∇v ⇔ u31=v31 & u32=v32 & u23=v23",
                    cosets::join_left(s, b, u) == cosets::join_left(s, b, v),
                    p.a31 == q.a31 && p.a32 == q.a32 && p.a23 == q.a23,
                ),
                (
                    "u∇B=v∇B ⇔ u32=v32 & u13=v13 & u23=v23",
                    cosets::join_right(s, u, b) == cosets::join_right(s, v, b),
                    p.a32 == q.a32 && p.a13 == q.a13 && p.a23 == q.a23,
                ),
            ];
            for (clause, lhs, rhs) in rows {
                report.push(Record::new(clause, Assertion::Iff, vec![a, b], vec![u, v], lhs, rhs));
            }
        }
    }
    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::chain;
    use crate::enumerate::isomorphic;
    use crate::laws::ReportVerdict;
    use crate::varieties;

    fn gf(p: u32) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    const D111: BlockDims = BlockDims([1, 1, 1]);

    #[test]
    fn field_checks() {
        assert_eq!(PrimeField::new(2), Err(MatrixError::CharacteristicTwo));
        assert_eq!(PrimeField::new(9), Err(MatrixError::NotPrime { p: 9 }));
        assert_eq!(PrimeField::new(101), Err(MatrixError::PrimeTooLarge { p: 101 }));
        assert!(PrimeField::new(97).is_ok());
    }

    #[test]
    fn nabla_and_circle() {
        let f = gf(3);
        let e = Matrix::from_rows(f, &[vec![1, 1], vec![0, 0]]).unwrap();
        assert_eq!(nabla(&e, &e).unwrap(), e);
        let d1 = Matrix::from_rows(f, &[vec![1, 0], vec![0, 0]]).unwrap();
        let d2 = Matrix::from_rows(f, &[vec![0, 0], vec![0, 1]]).unwrap();
        assert_eq!(nabla(&d1, &d2).unwrap(), circle(&d1, &d2).unwrap());
        let other = Matrix::zeros(gf(5), 2);
        assert!(matches!(circle(&e, &other), Err(MatrixError::FieldMismatch { .. })));
        assert!(matches!(nabla(&e, &Matrix::zeros(f, 3)), Err(MatrixError::DimMismatch { .. })));
    }

    #[test]
    fn zero_and_identity_give_a_chain() {
        let f = gf(5);
        let ms = closure(&[Matrix::zeros(f, 3), Matrix::identity(f, 3)], "0, I").unwrap();
        assert!(isomorphic(&ms.algebra, &chain(2).unwrap()).is_some());
    }

    #[test]
    fn closure_errors() {
        let f = gf(3);
        let not_idem = Matrix::from_rows(f, &[vec![2, 0], vec![0, 0]]).unwrap();
        assert_eq!(closure(&[not_idem], "x").unwrap_err(), MatrixError::NotIdempotent { index: 0 });
        assert_eq!(closure(&[], "none").unwrap_err(), MatrixError::Empty);
        // Two idempotents whose product is not idempotent.
        let e = Matrix::from_rows(f, &[vec![1, 0], vec![0, 0]]).unwrap();
        let g = Matrix::from_rows(f, &[vec![2, 2], vec![2, 2]]).unwrap();
        assert!(g.is_idempotent());
        assert!(matches!(
            closure(&[e, g], "e, g"),
            Err(MatrixError::NotASkewLattice(_) | MatrixError::ClosureExceedsCap { .. })
        ));
    }

    #[test]
    fn right_handed_example_validates() {
        let ms = primitive_right_handed(3, D111, (vec![vec![1]], vec![vec![1]]), (vec![vec![1]], vec![vec![1]])).unwrap();
        assert!(varieties::is_right_handed(&ms.algebra).holds);
        for x in &ms.elements {
            for y in &ms.elements {
                assert_eq!(nabla(x, y).unwrap(), circle(x, y).unwrap());
                let c = circle(x, y).unwrap();
                assert_eq!(nabla(x, y).unwrap(), c.mul(&c).unwrap());
            }
        }
        let report = matrix_coset_remark_check(&ms).unwrap();
        assert_eq!(report.verdict, ReportVerdict::Concordant);
    }

    #[test]
    fn zero_parameters_give_diagonal_chain() {
        let z = || (vec![vec![0]], vec![vec![0]]);
        for ms in [
            primitive_right_handed(3, D111, z(), z()).unwrap(),
            primitive_left_handed(3, D111, z(), z()).unwrap(),
        ] {
            assert_eq!(ms.elements.len(), 2);
            assert!(isomorphic(&ms.algebra, &chain(2).unwrap()).is_some());
            assert_eq!(matrix_coset_remark_check(&ms).unwrap().verdict, ReportVerdict::Concordant);
        }
    }

    #[test]
    fn sweeps_separate_cosets() {
        for p in [3u32, 5] {
            for t in 0..p as i64 {
                let rh = primitive_right_handed(p, D111, (vec![vec![1]], vec![vec![t]]), (vec![vec![1]], vec![vec![1]])).unwrap();
                assert_eq!(matrix_coset_remark_check(&rh).unwrap().verdict, ReportVerdict::Concordant);
                let rh = primitive_right_handed(p, D111, (vec![vec![1]], vec![vec![1]]), (vec![vec![t]], vec![vec![1]])).unwrap();
                assert_eq!(matrix_coset_remark_check(&rh).unwrap().verdict, ReportVerdict::Concordant);
                let lh = primitive_left_handed(p, D111, (vec![vec![1]], vec![vec![t]]), (vec![vec![1]], vec![vec![1]])).unwrap();
                assert!(varieties::is_left_handed(&lh.algebra).holds);
                assert_eq!(matrix_coset_remark_check(&lh).unwrap().verdict, ReportVerdict::Concordant);
            }
        }
    }

    #[test]
    fn factorization() {
        let f = gf(3);
        let d = D111;
        let a = upper_element(
            f,
            d,
            &UpperParams {
                a13: vec![vec![1]],
                a23: vec![vec![2]],
                a31: vec![vec![1]],
                a32: vec![vec![1]],
            },
        )
        .unwrap();
        assert_eq!(a.get(2, 2), 0);
        let (al, ar) = triangular_factorization(&a, d).unwrap();
        assert_eq!(al.rows(), vec![vec![1, 0, 0], vec![0, 1, 0], vec![1, 1, 0]]);
        assert_eq!(ar.rows(), vec![vec![1, 0, 1], vec![0, 1, 2], vec![0, 0, 0]]);
        let b = lower_element(
            f,
            d,
            &LowerParams {
                b12: vec![vec![1]],
                b13: vec![vec![2]],
                b21: vec![vec![2]],
                b31: vec![vec![1]],
            },
        )
        .unwrap();
        let (bl, br) = triangular_factorization(&b, d).unwrap();
        assert_eq!(bl.mul(&br).unwrap(), b);
        let diag = upper_element(f, d, &UpperParams::zero(d)).unwrap();
        assert_eq!(triangular_factorization(&diag, d).unwrap(), (diag.clone(), diag.clone()));
        let junk = Matrix::from_rows(f, &[vec![0, 1, 0], vec![0, 0, 0], vec![0, 0, 0]]).unwrap();
        assert!(matches!(triangular_factorization(&junk, d), Err(MatrixError::NotInStandardForm { .. })));
    }

    #[test]
    fn json_shape() {
        let m = Matrix::identity(gf(3), 2);
        assert_eq!(serde_json::to_string(&m).unwrap(), r#"{"p":3,"dim":2,"rows":[[1,0],[0,1]]}"#);
    }
}
