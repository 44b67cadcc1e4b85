//! Catalogs of small skew lattices up to isomorphism.
//!
//! The pruned search fills an idempotent meet table cell by cell with
//! incremental associativity checks, keeps only meet tables that are minimal
//! under relabelling, and then searches the join tables allowed by the
//! absorption laws. A join table is kept only when it is minimal in its orbit
//! under the automorphisms of the meet table, which makes every emitted pair
//! the lexicographic minimum of its isomorphism class.
//!
//! The naive oracle scans every pair of idempotent tables and deduplicates by
//! brute-force canonical form; it shares nothing with the pruned search except
//! [`validate`].

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{validate, AlgebraError, AlgebraFile, OpTable, SkewLattice};
use crate::greens;
use crate::varieties;

/// Largest order accepted by [`enumerate`].
pub const MAX_SEARCH_ORDER: usize = 6;
/// Largest order accepted by [`naive_oracle`].
pub const MAX_ORACLE_ORDER: usize = 3;
/// Largest order accepted by [`canonical_form`].
pub const MAX_CANONICAL_ORDER: usize = 8;

#[derive(Debug, Error)]
pub enum EnumerateError {
    #[error("order {order} exceeds the limit {limit} for {method}")]
    OrderTooLarge {
        order: usize,
        limit: usize,
        method: &'static str,
    },
    #[error("order must be at least 1")]
    ZeroOrder,
    #[error("inconsistent coset data: {0}")]
    InconsistentCosetData(String),
    #[error("catalog I/O at {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("catalog file {path}: {msg}")]
    BadCatalog { path: PathBuf, msg: String },
    #[error("cannot build a thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    PrunedSearch,
    NaiveOracle,
}

/// All skew lattices of one order, one canonical representative per
/// isomorphism class, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    pub order: usize,
    pub algebras: Vec<SkewLattice>,
    pub provenance: Provenance,
}

const UNSET: u8 = u8::MAX;

/// Cell-by-cell completion of one associative table.
struct TableSearch<'a> {
    n: usize,
    t: Vec<u8>,
    domains: &'a [u64],
    cells: Vec<usize>,
}

impl TableSearch<'_> {
    #[inline]
    fn get(&self, i: usize, j: usize) -> u8 {
        self.t[i * self.n + j]
    }

    /// Every associativity instance that uses cell `(a, b)` and whose cells are all set.
    fn consistent_at(&self, a: usize, b: usize) -> bool {
        let n = self.n;
        let v = self.get(a, b);
        for z in 0..n {
            // (a b) z = a (b z)
            let bz = self.get(b, z);
            let vz = self.get(v as usize, z);
            if bz != UNSET && vz != UNSET {
                let r = self.get(a, bz as usize);
                if r != UNSET && r != vz {
                    return false;
                }
            }
            // (z a) b = z (a b)
            let za = self.get(z, a);
            let zv = self.get(z, v as usize);
            if za != UNSET && zv != UNSET {
                let l = self.get(za as usize, b);
                if l != UNSET && l != zv {
                    return false;
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                // (x y) b = x (y b) with x y = a
                if self.get(x, y) as usize == a {
                    let yb = self.get(y, b);
                    if yb != UNSET {
                        let r = self.get(x, yb as usize);
                        if r != UNSET && r != v {
                            return false;
                        }
                    }
                }
                // (a x) y = a (x y) with x y = b
                if self.get(x, y) as usize == b {
                    let ax = self.get(a, x);
                    if ax != UNSET {
                        let l = self.get(ax as usize, y);
                        if l != UNSET && l != v {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    fn all_consistent(&self) -> bool {
        (0..self.n * self.n).all(|c| self.t[c] == UNSET || self.consistent_at(c / self.n, c % self.n))
    }

    /// Fills `cells[k..stop]`, calling `emit` on each consistent assignment.
    fn run(&mut self, k: usize, stop: usize, emit: &mut dyn FnMut(&[u8])) {
        if k == stop {
            emit(&self.t);
            return;
        }
        let c = self.cells[k];
        let mut dom = self.domains[c];
        while dom != 0 {
            let v = dom.trailing_zeros() as u8;
            dom &= dom - 1;
            self.t[c] = v;
            if self.consistent_at(c / self.n, c % self.n) {
                self.run(k + 1, stop, emit);
            }
        }
        self.t[c] = UNSET;
    }
}

/// `perm[x]` is the new label of `x`; returns the relabelled table.
fn relabel_entries(n: usize, t: &[u8], perm: &[usize], inv: &[usize]) -> Vec<u8> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(perm[t[inv[i] * n + inv[j]] as usize] as u8);
        }
    }
    out
}

/// Compares the relabelling of `t` under `perm` with `best`, cell by cell.
fn cmp_relabelled(n: usize, t: &[u8], perm: &[usize], inv: &[usize], best: &[u8]) -> std::cmp::Ordering {
    for i in 0..n {
        for j in 0..n {
            let v = perm[t[inv[i] * n + inv[j]] as usize] as u8;
            match v.cmp(&best[i * n + j]) {
                std::cmp::Ordering::Equal => {}
                other => return other,
            }
        }
    }
    std::cmp::Ordering::Equal
}

fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (x, &p) in perm.iter().enumerate() {
        inv[p] = x;
    }
    inv
}

/// All permutations of `0..n` as `(perm, inverse)` pairs.
fn permutations(n: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    (0..n)
        .permutations(n)
        .map(|p| {
            let inv = invert(&p);
            (p, inv)
        })
        .collect()
}

fn is_min_table(n: usize, t: &[u8], perms: &[(Vec<usize>, Vec<usize>)]) -> bool {
    perms
        .iter()
        .all(|(p, inv)| cmp_relabelled(n, t, p, inv, t) != std::cmp::Ordering::Less)
}

fn is_regular_band(n: usize, t: &[u8]) -> bool {
    let g = |i: usize, j: usize| t[i * n + j] as usize;
    (0..n).all(|x| {
        (0..n).all(|y| {
            let xy = g(x, y);
            let xyx = g(xy, x);
            (0..n).all(|z| g(g(xyx, z), x) == g(g(xy, z), x))
        })
    })
}

/// Idempotent associative regular tables on `0..n` that are minimal under
/// relabelling, split across the pool by the first table row.
fn canonical_meets(n: usize, perms: &[(Vec<usize>, Vec<usize>)]) -> Vec<Vec<u8>> {
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut domains = vec![full; n * n];
    let mut t = vec![UNSET; n * n];
    for x in 0..n {
        domains[x * n + x] = 1u64 << x;
        t[x * n + x] = x as u8;
    }
    let cells: Vec<usize> = (0..n * n).filter(|c| c / n != c % n).collect();
    let split = n - 1;
    let mut prefixes = Vec::new();
    {
        let mut search = TableSearch {
            n,
            t: t.clone(),
            domains: &domains,
            cells: cells.clone(),
        };
        search.run(0, split.min(cells.len()), &mut |tab| prefixes.push(tab.to_vec()));
    }
    let mut meets: Vec<Vec<u8>> = prefixes
        .into_par_iter()
        .flat_map_iter(|prefix| {
            let mut found = Vec::new();
            let mut search = TableSearch {
                n,
                t: prefix,
                domains: &domains,
                cells: cells.clone(),
            };
            let total = search.cells.len();
            search.run(split.min(total), total, &mut |tab| {
                if is_regular_band(n, tab) && is_min_table(n, tab, perms) {
                    found.push(tab.to_vec());
                }
            });
            found
        })
        .collect();
    meets.sort();
    meets
}

/// Join tables compatible with `meet`, each minimal in its orbit under the
/// automorphisms of `meet`.
fn joins_for(n: usize, meet: &[u8], perms: &[(Vec<usize>, Vec<usize>)]) -> Vec<SkewLattice> {
    let m = |i: usize, j: usize| meet[i * n + j] as usize;
    let mut domains = vec![0u64; n * n];
    for x in 0..n {
        for y in 0..n {
            domains[x * n + y] = (0..n)
                .filter(|&z| m(x, z) == x && m(z, y) == y)
                .fold(0u64, |acc, z| acc | (1u64 << z));
        }
    }
    let mut t = vec![UNSET; n * n];
    let mut force = |c: usize, v: usize, t: &mut Vec<u8>| -> bool {
        if domains[c] & (1u64 << v) == 0 || (t[c] != UNSET && t[c] as usize != v) {
            return false;
        }
        t[c] = v as u8;
        domains[c] = 1u64 << v;
        true
    };
    for x in 0..n {
        for y in 0..n {
            if !(force(x * n + x, x, &mut t)
                && force(x * n + m(x, y), x, &mut t)
                && force(m(y, x) * n + x, x, &mut t))
            {
                return Vec::new();
            }
        }
    }
    let cells: Vec<usize> = (0..n * n).filter(|&c| t[c] == UNSET).collect();
    let search_probe = TableSearch {
        n,
        t: t.clone(),
        domains: &domains,
        cells: cells.clone(),
    };
    if !search_probe.all_consistent() {
        return Vec::new();
    }
    let automorphisms: Vec<&(Vec<usize>, Vec<usize>)> = perms
        .iter()
        .filter(|(p, inv)| cmp_relabelled(n, meet, p, inv, meet) == std::cmp::Ordering::Equal)
        .collect();
    let mut out = Vec::new();
    let mut search = TableSearch {
        n,
        t,
        domains: &domains,
        cells,
    };
    let total = search.cells.len();
    let meet_table = OpTable::from_raw(n, meet.to_vec());
    search.run(0, total, &mut |join| {
        let minimal = automorphisms
            .iter()
            .all(|(p, inv)| cmp_relabelled(n, join, p, inv, join) != std::cmp::Ordering::Less);
        if minimal {
            let join_table = OpTable::from_raw(n, join.to_vec());
            let report = validate(&meet_table, &join_table).expect("same order");
            assert!(report.valid, "internal inconsistency: search produced invalid tables: {report}");
            out.push(SkewLattice::from_tables_unchecked(meet_table.clone(), join_table));
        }
    });
    out
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, EnumerateError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| EnumerateError::ThreadPool(e.to_string()))
}

/// Pruned search for all skew lattices of the given order. The result does not
/// depend on `workers`.
pub fn enumerate(order: usize, workers: usize) -> Result<Catalog, EnumerateError> {
    if order == 0 {
        return Err(EnumerateError::ZeroOrder);
    }
    if order > MAX_SEARCH_ORDER {
        return Err(EnumerateError::OrderTooLarge {
            order,
            limit: MAX_SEARCH_ORDER,
            method: "pruned search",
        });
    }
    let n = order;
    let perms = permutations(n);
    let algebras = pool(workers)?.install(|| {
        let meets = canonical_meets(n, &perms);
        let mut all: Vec<SkewLattice> = meets
            .par_iter()
            .flat_map_iter(|m| joins_for(n, m, &perms))
            .collect();
        all.sort();
        all
    });
    Ok(Catalog {
        order,
        algebras,
        provenance: Provenance::PrunedSearch,
    })
}

/// Catalogs for every order `1..=max_order`.
pub fn enumerate_up_to(max_order: usize, workers: usize) -> Result<Vec<Catalog>, EnumerateError> {
    (1..=max_order).map(|k| enumerate(k, workers)).collect()
}

/// Lexicographically least relabelling of the concatenated (meet, join) tables.
pub fn canonical_form(s: &SkewLattice) -> Result<SkewLattice, EnumerateError> {
    let n = s.n();
    if n > MAX_CANONICAL_ORDER {
        return Err(EnumerateError::OrderTooLarge {
            order: n,
            limit: MAX_CANONICAL_ORDER,
            method: "canonical form",
        });
    }
    let both: Vec<u8> = s
        .meet_table()
        .entries()
        .iter()
        .chain(s.join_table().entries())
        .copied()
        .collect();
    let relabel_both = |p: &[usize], inv: &[usize]| {
        let mut v = relabel_entries(n, &both[..n * n], p, inv);
        v.extend(relabel_entries(n, &both[n * n..], p, inv));
        v
    };
    let cmp_both = |p: &[usize], inv: &[usize], best: &[u8]| match cmp_relabelled(n, &both[..n * n], p, inv, &best[..n * n]) {
        std::cmp::Ordering::Equal => cmp_relabelled(n, &both[n * n..], p, inv, &best[n * n..]),
        other => other,
    };
    let mut best = both.clone();
    for p in (0..n).permutations(n) {
        let inv = invert(&p);
        if cmp_both(&p, &inv, &best) == std::cmp::Ordering::Less {
            best = relabel_both(&p, &inv);
        }
    }
    Ok(SkewLattice::from_tables_unchecked(
        OpTable::from_raw(n, best[..n * n].to_vec()),
        OpTable::from_raw(n, best[n * n..].to_vec()),
    ))
}

/// Full scan of all idempotent table pairs, filtered by [`validate`] and
/// deduplicated by [`canonical_form`].
pub fn naive_oracle(order: usize) -> Result<Catalog, EnumerateError> {
    if order == 0 {
        return Err(EnumerateError::ZeroOrder);
    }
    if order > MAX_ORACLE_ORDER {
        return Err(EnumerateError::OrderTooLarge {
            order,
            limit: MAX_ORACLE_ORDER,
            method: "naive oracle",
        });
    }
    let n = order;
    let free: Vec<usize> = (0..n * n).filter(|c| c / n != c % n).collect();
    let tables: Vec<OpTable> = std::iter::repeat_n(0..n, free.len())
        .multi_cartesian_product()
        .map(|vals| {
            let mut e: Vec<u8> = (0..n * n).map(|c| if c / n == c % n { (c / n) as u8 } else { 0 }).collect();
            for (&c, &v) in free.iter().zip(&vals) {
                e[c] = v as u8;
            }
            OpTable::from_raw(n, e)
        })
        .collect();
    let tables = if tables.is_empty() {
        vec![OpTable::from_raw(1, vec![0])]
    } else {
        tables
    };
    let mut seen = BTreeSet::new();
    for m in &tables {
        for j in &tables {
            if validate(m, j).expect("same order").valid {
                let s = SkewLattice::from_tables_unchecked(m.clone(), j.clone());
                seen.insert(canonical_form(&s)?);
            }
        }
    }
    Ok(Catalog {
        order,
        algebras: seen.into_iter().collect(),
        provenance: Provenance::NaiveOracle,
    })
}

/// Per-element invariants preserved by isomorphisms.
fn signatures(s: &SkewLattice) -> Vec<[usize; 5]> {
    let d = greens::green_d(s);
    let r = greens::green_r(s);
    let l = greens::green_l(s);
    let ge = greens::natural_order(s);
    s.elements()
        .map(|x| {
            [
                d.class(x).len(),
                r.class(x).len(),
                l.class(x).len(),
                ge.row(x).len(),
                ge.column(x).len(),
            ]
        })
        .collect()
}

/// An operation-preserving bijection `f` with `b = f(a)`, if one exists.
pub fn isomorphic(a: &SkewLattice, b: &SkewLattice) -> Option<Vec<usize>> {
    let n = a.n();
    if b.n() != n {
        return None;
    }
    let sa = signatures(a);
    let sb = signatures(b);
    let mut ka = sa.clone();
    let mut kb = sb.clone();
    ka.sort();
    kb.sort();
    if ka != kb {
        return None;
    }
    let shapes = |s: &SkewLattice| {
        let mut v: Vec<(usize, usize)> = greens::eggboxes(s).iter().map(|e| e.shape()).collect();
        v.sort();
        v
    };
    if shapes(a) != shapes(b) {
        return None;
    }
    let mut f = vec![usize::MAX; n];
    let mut used = vec![false; n];

    fn consistent(a: &SkewLattice, b: &SkewLattice, f: &[usize], x: usize) -> bool {
        for p in 0..=x {
            for (u, v) in [(x, p), (p, x)] {
                for (ra, rb) in [(a.meet(u, v), b.meet(f[u], f[v])), (a.join(u, v), b.join(f[u], f[v]))] {
                    if f[ra] != usize::MAX && f[ra] != rb {
                        return false;
                    }
                    if f[ra] == usize::MAX && ra <= x {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn rec(
        a: &SkewLattice,
        b: &SkewLattice,
        sa: &[[usize; 5]],
        sb: &[[usize; 5]],
        f: &mut Vec<usize>,
        used: &mut Vec<bool>,
        x: usize,
    ) -> bool {
        let n = a.n();
        if x == n {
            return true;
        }
        for y in 0..n {
            if used[y] || sa[x] != sb[y] {
                continue;
            }
            f[x] = y;
            used[y] = true;
            if consistent(a, b, f, x) && rec(a, b, sa, sb, f, used, x + 1) {
                return true;
            }
            used[y] = false;
            f[x] = usize::MAX;
        }
        false
    }

    if rec(a, b, &sa, &sb, &mut f, &mut used, 0) {
        debug_assert!(a.elements().all(|x| a.elements().all(|y| {
            b.meet(f[x], f[y]) == f[a.meet(x, y)] && b.join(f[x], f[y]) == f[a.join(x, y)]
        })));
        Some(f)
    } else {
        None
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct IndexEntry {
    file: String,
    fingerprint: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CatalogIndex {
    order: usize,
    provenance: Provenance,
    count: usize,
    algebras: Vec<IndexEntry>,
}

impl Catalog {
    pub fn len(&self) -> usize {
        self.algebras.len()
    }

    pub fn is_empty(&self) -> bool {
        self.algebras.is_empty()
    }

    /// Writes `index.json` and one algebra file per member into `dir`.
    pub fn save(&self, dir: &Path) -> Result<(), EnumerateError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| EnumerateError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        let mut entries = Vec::new();
        for (i, s) in self.algebras.iter().enumerate() {
            let file = format!("order{}-{:04}.json", self.order, i);
            let path = dir.join(&file);
            fs::write(&path, AlgebraFile::from_algebra(s).to_json() + "\n").map_err(io(&path))?;
            let report = varieties::classify(s, None).expect("registry predicates");
            entries.push(IndexEntry {
                file,
                fingerprint: report.fingerprint().into_iter().map(String::from).collect(),
            });
        }
        let index = CatalogIndex {
            order: self.order,
            provenance: self.provenance,
            count: self.algebras.len(),
            algebras: entries,
        };
        let path = dir.join("index.json");
        let text = serde_json::to_string_pretty(&index).expect("index serializes") + "\n";
        fs::write(&path, text).map_err(io(&path))
    }

    /// Reads a catalog written by [`Catalog::save`], revalidating every member.
    pub fn load(dir: &Path) -> Result<Catalog, EnumerateError> {
        let path = dir.join("index.json");
        let text = fs::read_to_string(&path).map_err(|source| EnumerateError::Io {
            path: path.clone(),
            source,
        })?;
        let index: CatalogIndex = serde_json::from_str(&text).map_err(|e| EnumerateError::BadCatalog {
            path: path.clone(),
            msg: e.to_string(),
        })?;
        if index.count != index.algebras.len() {
            return Err(EnumerateError::BadCatalog {
                path,
                msg: format!("count {} but {} entries", index.count, index.algebras.len()),
            });
        }
        let mut algebras = Vec::with_capacity(index.count);
        for entry in &index.algebras {
            let path = dir.join(&entry.file);
            let text = fs::read_to_string(&path).map_err(|source| EnumerateError::Io {
                path: path.clone(),
                source,
            })?;
            let bad = |e: AlgebraError| EnumerateError::BadCatalog {
                path: path.clone(),
                msg: e.to_string(),
            };
            let s = AlgebraFile::parse(&text).and_then(|f| f.to_algebra()).map_err(bad)?;
            if s.n() != index.order {
                return Err(EnumerateError::BadCatalog {
                    path,
                    msg: format!("order {} in a catalog of order {}", s.n(), index.order),
                });
            }
            algebras.push(s);
        }
        Ok(Catalog {
            order: index.order,
            algebras,
            provenance: index.provenance,
        })
    }
}

/// Which of the two five-element constructions to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Nc5Variant {
    RightHanded,
    LeftHanded,
}

/// Element indices of the five-element algebras from [`nc5`].
pub mod nc5_elements {
    pub const V: usize = 0;
    pub const X1: usize = 1;
    pub const X2: usize = 2;
    pub const Y: usize = 3;
    pub const U: usize = 4;
    pub const NAMES: [&str; 5] = ["v", "x1", "x2", "y", "u"];
}

/// The five-element algebra on `{v, x₁, x₂, y, u}`: `v` is the bottom, `u` the
/// top, `{x₁, x₂}` one D-class incomparable to `{y}`.
pub fn nc5(variant: Nc5Variant) -> SkewLattice {
    use nc5_elements::*;
    let is_x = |e: usize| e == X1 || e == X2;
    let meet = |a: usize, b: usize| -> usize {
        match (a, b) {
            _ if a == b => a,
            (V, _) | (_, V) => V,
            (U, o) | (o, U) => o,
            (p, q) if is_x(p) && is_x(q) => match variant {
                Nc5Variant::RightHanded => q,
                Nc5Variant::LeftHanded => p,
            },
            _ => V,
        }
    };
    let join = |a: usize, b: usize| -> usize {
        match (a, b) {
            _ if a == b => a,
            (U, _) | (_, U) => U,
            (V, o) | (o, V) => o,
            (p, q) if is_x(p) && is_x(q) => match variant {
                Nc5Variant::RightHanded => p,
                Nc5Variant::LeftHanded => q,
            },
            _ => U,
        }
    };
    SkewLattice::new(OpTable::from_fn(5, meet), OpTable::from_fn(5, join))
        .expect("the five-element construction satisfies the axioms")
}

/// Two comparable D-classes described by their rectangular shapes, coset
/// partitions and the bijections between cosets.
///
/// Local indices: an element of a class with shape `(rows, cols)` at row `i`
/// and column `j` has index `i·cols + j`. In the assembled algebra the lower
/// class `B` takes `0..|B|` and the upper class `A` follows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetData {
    pub upper_shape: (usize, usize),
    pub lower_shape: (usize, usize),
    /// Cosets `B∨a∨B` of `B` in `A`, as local indices of `A`.
    pub upper_cosets: Vec<Vec<usize>>,
    /// Cosets `A∧b∧A` of `A` in `B`, as local indices of `B`.
    pub lower_cosets: Vec<Vec<usize>>,
    /// `bijections[i][k]` lists pairs `(a, b)` matching upper coset `i` with
    /// lower coset `k`, where `a > b`.
    pub bijections: Vec<Vec<Vec<(usize, usize)>>>,
}

impl CosetData {
    fn check_partition(blocks: &[Vec<usize>], size: usize, side: &str) -> Result<Vec<usize>, EnumerateError> {
        let mut block_of = vec![usize::MAX; size];
        for (i, b) in blocks.iter().enumerate() {
            if b.is_empty() {
                return Err(EnumerateError::InconsistentCosetData(format!("empty {side} coset {i}")));
            }
            for &x in b {
                if x >= size || block_of[x] != usize::MAX {
                    return Err(EnumerateError::InconsistentCosetData(format!(
                        "{side} cosets do not partition 0..{size} (element {x})"
                    )));
                }
                block_of[x] = i;
            }
        }
        if block_of.contains(&usize::MAX) {
            return Err(EnumerateError::InconsistentCosetData(format!("{side} cosets do not cover 0..{size}")));
        }
        Ok(block_of)
    }
}

/// Assembles the primitive algebra on `B ∪ A` determined by `d`.
///
/// For `a ∈ A` and `b ∈ B`, let `b′` be the partner of `a` in the coset of
/// `b` and `a′` the partner of `b` in the coset of `a`; then `a∧b = b′∧b`,
/// `b∧a = b∧b′`, `a∨b = a∨a′` and `b∨a = a′∨a`. The result is validated.
pub fn primitive_from_coset_data(d: &CosetData) -> Result<SkewLattice, EnumerateError> {
    let (ar, ac) = d.upper_shape;
    let (br, bc) = d.lower_shape;
    let na = ar * ac;
    let nb = br * bc;
    if na == 0 || nb == 0 {
        return Err(EnumerateError::InconsistentCosetData("empty class".into()));
    }
    let n = na + nb;
    if n > crate::MAX_ORDER {
        return Err(EnumerateError::InconsistentCosetData(format!("order {n} exceeds the cap")));
    }
    let up_block = CosetData::check_partition(&d.upper_cosets, na, "upper")?;
    let low_block = CosetData::check_partition(&d.lower_cosets, nb, "lower")?;
    if d.bijections.len() != d.upper_cosets.len()
        || d.bijections.iter().any(|row| row.len() != d.lower_cosets.len())
    {
        return Err(EnumerateError::InconsistentCosetData(
            "need one bijection per (upper coset, lower coset) pair".into(),
        ));
    }
    // partner_down[a][k]: element of lower coset k below a; partner_up[b][i] dually.
    let mut partner_down = vec![vec![usize::MAX; d.lower_cosets.len()]; na];
    let mut partner_up = vec![vec![usize::MAX; d.upper_cosets.len()]; nb];
    for (i, row) in d.bijections.iter().enumerate() {
        for (k, pairs) in row.iter().enumerate() {
            for &(a, b) in pairs {
                if a >= na || b >= nb || up_block[a] != i || low_block[b] != k {
                    return Err(EnumerateError::InconsistentCosetData(format!(
                        "pair ({a}, {b}) does not connect upper coset {i} with lower coset {k}"
                    )));
                }
                if partner_down[a][k] != usize::MAX || partner_up[b][i] != usize::MAX {
                    return Err(EnumerateError::InconsistentCosetData(format!(
                        "bijection {i}->{k} is not injective at ({a}, {b})"
                    )));
                }
                partner_down[a][k] = b;
                partner_up[b][i] = a;
            }
            if pairs.len() != d.upper_cosets[i].len() || pairs.len() != d.lower_cosets[k].len() {
                return Err(EnumerateError::InconsistentCosetData(format!(
                    "bijection {i}->{k} does not cover both cosets"
                )));
            }
        }
    }
    let rect_meet = |cols: usize, x: usize, y: usize| (x / cols) * cols + y % cols;
    let rect_join = |cols: usize, x: usize, y: usize| (y / cols) * cols + x % cols;
    let meet = OpTable::from_fn(n, |x, y| match (x < nb, y < nb) {
        (true, true) => rect_meet(bc, x, y),
        (false, false) => nb + rect_meet(ac, x - nb, y - nb),
        (false, true) => {
            let (a, b) = (x - nb, y);
            rect_meet(bc, partner_down[a][low_block[b]], b)
        }
        (true, false) => {
            let (b, a) = (x, y - nb);
            rect_meet(bc, b, partner_down[a][low_block[b]])
        }
    });
    let join = OpTable::from_fn(n, |x, y| match (x < nb, y < nb) {
        (true, true) => rect_join(bc, x, y),
        (false, false) => nb + rect_join(ac, x - nb, y - nb),
        (false, true) => {
            let (a, b) = (x - nb, y);
            nb + rect_join(ac, a, partner_up[b][up_block[a]])
        }
        (true, false) => {
            let (b, a) = (x, y - nb);
            nb + rect_join(ac, partner_up[b][up_block[a]], a)
        }
    });
    let report = validate(&meet, &join).expect("same order");
    if !report.valid {
        return Err(EnumerateError::InconsistentCosetData(report.to_string()));
    }
    Ok(SkewLattice::from_tables_unchecked(meet, join))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{chain, direct_product, rectangular};

    #[test]
    fn small_counts() {
        assert_eq!(enumerate(1, 1).unwrap().len(), 1);
        let two = enumerate(2, 1).unwrap();
        assert_eq!(two.len(), 3);
        let expected: BTreeSet<SkewLattice> = [chain(2), rectangular(1, 2), rectangular(2, 1)]
            .into_iter()
            .map(|s| canonical_form(&s.unwrap()).unwrap())
            .collect();
        assert_eq!(two.algebras.into_iter().collect::<BTreeSet<_>>(), expected);
    }

    #[test]
    fn oracle_agrees_up_to_three() {
        for k in 1..=3 {
            assert_eq!(enumerate(k, 1).unwrap().algebras, naive_oracle(k).unwrap().algebras, "order {k}");
        }
    }

    #[test]
    fn worker_count_does_not_change_output() {
        assert_eq!(enumerate(4, 1).unwrap(), enumerate(4, 3).unwrap());
    }

    #[test]
    fn members_are_canonical_and_pairwise_distinct() {
        for k in 4..=5 {
            let cat = enumerate(k, 1).unwrap();
            for (i, s) in cat.algebras.iter().enumerate() {
                assert_eq!(&canonical_form(s).unwrap(), s, "order {k} member {i}");
                for t in &cat.algebras[i + 1..] {
                    assert!(isomorphic(s, t).is_none());
                }
            }
        }
    }

    #[test]
    fn canonical_form_is_idempotent_and_label_free() {
        let s = rectangular(2, 3).unwrap();
        let c = canonical_form(&s).unwrap();
        assert_eq!(canonical_form(&c).unwrap(), c);
        let shuffled = s.relabel(&[5, 3, 1, 0, 2, 4]);
        assert_eq!(canonical_form(&shuffled).unwrap(), c);
    }

    #[test]
    fn isomorphism_tests() {
        let lh = rectangular(2, 1).unwrap();
        let rh = rectangular(1, 2).unwrap();
        assert_eq!(isomorphic(&lh, &lh), Some(vec![0, 1]));
        assert_eq!(isomorphic(&lh, &rh), None);
        let s = rectangular(2, 3).unwrap();
        let shuffled = s.relabel(&[5, 3, 1, 0, 2, 4]);
        let f = isomorphic(&s, &shuffled).unwrap();
        assert!((0..6).all(|x| (0..6).all(|y| shuffled.meet(f[x], f[y]) == f[s.meet(x, y)])));
        let prod = direct_product(&lh, &rh).unwrap();
        assert!(isomorphic(&prod, &rectangular(2, 2).unwrap()).is_some());
    }

    #[test]
    fn order_limits() {
        assert!(matches!(enumerate(7, 1), Err(EnumerateError::OrderTooLarge { .. })));
        assert!(matches!(naive_oracle(4), Err(EnumerateError::OrderTooLarge { .. })));
        assert!(matches!(enumerate(0, 1), Err(EnumerateError::ZeroOrder)));
    }

    #[test]
    fn nc5_variants_validate() {
        let r = nc5(Nc5Variant::RightHanded);
        let l = nc5(Nc5Variant::LeftHanded);
        assert_eq!(crate::algebra::mirror(&r), l);
        let q = greens::lattice_image(&r);
        assert_eq!(q.quotient.n(), 4);
    }

    #[test]
    fn coset_data_builds_a_chain() {
        let d = CosetData {
            upper_shape: (1, 1),
            lower_shape: (1, 1),
            upper_cosets: vec![vec![0]],
            lower_cosets: vec![vec![0]],
            bijections: vec![vec![vec![(0, 0)]]],
        };
        let s = primitive_from_coset_data(&d).unwrap();
        assert_eq!(s, chain(2).unwrap());
    }

    #[test]
    fn coset_data_right_handed_rows() {
        let d = CosetData {
            upper_shape: (1, 2),
            lower_shape: (1, 2),
            upper_cosets: vec![vec![0, 1]],
            lower_cosets: vec![vec![0, 1]],
            bijections: vec![vec![vec![(0, 0), (1, 1)]]],
        };
        let s = primitive_from_coset_data(&d).unwrap();
        assert_eq!(s.n(), 4);
        assert!(varieties::is_right_handed(&s).holds);
        let mismatched = CosetData {
            bijections: vec![vec![vec![(0, 0), (0, 1)]]],
            ..d
        };
        assert!(matches!(
            primitive_from_coset_data(&mismatched),
            Err(EnumerateError::InconsistentCosetData(_))
        ));
    }

    #[test]
    fn catalog_round_trip() {
        let dir = std::env::temp_dir().join(format!("skewlat-catalog-test-{}", std::process::id()));
        let cat = enumerate(3, 1).unwrap();
        cat.save(&dir).unwrap();
        let back = Catalog::load(&dir).unwrap();
        assert_eq!(back, cat);
        fs::remove_dir_all(&dir).unwrap();
    }
}
