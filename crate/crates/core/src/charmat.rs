//! Characteristic matrices over Z and over Z/2.
//!
//! Column `j` (1-based) of an `n × m` matrix is the vector assigned to facet
//! `F_j`. A matrix is characteristic when the `n` columns at every vertex
//! form a basis (determinant ±1 over Z, nonzero over Z/2).
//!
//! Classes are taken modulo row operations (GL(n)) and column signs; the
//! canonical representative is in identity form at the base vertex (the
//! lexicographically least vertex, `{1..n}` for all polytopes built here)
//! and is the row-major lexicographic minimum among such forms.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg;
use crate::polytope::{set_of, CombinatorialPolytope, FacetPermutation};

/// Orbit materialization bound for canonical forms.
pub const MAX_CANONICAL_FACETS: usize = 14;

/// Integer enumeration bound on the facet count.
pub const MAX_INTEGER_FACETS: usize = 10;

#[derive(Debug, Clone)]
pub struct CharMatrix {
    polytope: Arc<CombinatorialPolytope>,
    entries: Vec<Vec<i64>>,
}

/// A matrix over Z/2 stored as bit rows (bit `j-1` of row `i` is entry `(i, j)`).
#[derive(Debug, Clone)]
pub struct RealCharMatrix {
    polytope: Arc<CombinatorialPolytope>,
    rows: Vec<u32>,
}

/// Why a candidate matrix fails to be characteristic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// The minor at this vertex is not a unit.
    Vertex { vertex: Vec<usize>, minor: i128 },
    /// Column `j` is not primitive.
    NotPrimitive { column: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Vertex { vertex, minor } => write!(f, "minor at vertex {vertex:?} is {minor}"),
            Violation::NotPrimitive { column } => write!(f, "column {column} is not primitive"),
        }
    }
}

/// Which group action a canonical form quotients by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    /// Row GL(n, Z) and column signs (integer matrices).
    GlSigns,
    /// Row GL(n, Z/2) (real matrices).
    Gl,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct EquivClass<M> {
    pub canonical: M,
    pub action: Action,
    /// Size of the facet-permutation subgroup also quotiented (1 = none).
    pub permutations: usize,
    pub orbit_size: Option<usize>,
}

/// `canonical = row_transform · (perm · λ) · diag(col_signs)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalWitness {
    pub perm: FacetPermutation,
    pub row_transform: Vec<Vec<i64>>,
    pub col_signs: Vec<i64>,
}

fn shape_check(entries_rows: usize, entries_cols: &[usize], p: &CombinatorialPolytope) -> Result<()> {
    let bad_col = entries_cols.iter().find(|&&c| c != p.m());
    if entries_rows != p.n() || bad_col.is_some() {
        return Err(Error::Shape {
            expected_rows: p.n(),
            expected_cols: p.m(),
            rows: entries_rows,
            cols: bad_col.copied().unwrap_or(p.m()),
        });
    }
    Ok(())
}

fn columns_at(entries: &[Vec<i64>], facets: &[usize]) -> Vec<Vec<i64>> {
    entries.iter().map(|row| facets.iter().map(|&j| row[j - 1]).collect()).collect()
}

/// Tests the non-singular condition; `Ok(None)` means characteristic.
pub fn check_characteristic(entries: &[Vec<i64>], p: &CombinatorialPolytope) -> Result<Option<Violation>> {
    shape_check(entries.len(), &entries.iter().map(|r| r.len()).collect::<Vec<_>>(), p)?;
    for j in 1..=p.m() {
        let g = entries.iter().fold(0i64, |acc, r| num_integer::gcd(acc, r[j - 1]));
        if g != 1 {
            return Ok(Some(Violation::NotPrimitive { column: j }));
        }
    }
    for v in p.vertices() {
        let minor = linalg::det(&columns_at(entries, v))?;
        if minor != 1 && minor != -1 {
            return Ok(Some(Violation::Vertex { vertex: v.clone(), minor }));
        }
    }
    Ok(None)
}

/// Tests the non-singular condition over Z/2 (entries read mod 2).
pub fn check_real(rows: &[u32], p: &CombinatorialPolytope) -> Option<Vec<usize>> {
    let cols = bit_columns(rows, p.m());
    p.vertices()
        .iter()
        .find(|v| !linalg::det_gf2(&v.iter().map(|&j| cols[j - 1]).collect::<Vec<_>>()))
        .cloned()
}

fn bit_columns(rows: &[u32], m: usize) -> Vec<u32> {
    (0..m)
        .map(|j| rows.iter().enumerate().fold(0u32, |acc, (i, &r)| acc | ((r >> j & 1) << i)))
        .collect()
}

fn bit_rows(cols: &[u32], n: usize) -> Vec<u32> {
    (0..n)
        .map(|i| cols.iter().enumerate().fold(0u32, |acc, (j, &c)| acc | ((c >> i & 1) << j)))
        .collect()
}

/// Column permutation action: column `i` of `λ` moves to position `perm(i)`.
fn permute_columns(entries: &[Vec<i64>], perm: &FacetPermutation) -> Vec<Vec<i64>> {
    let inv = perm.inverse();
    entries
        .iter()
        .map(|row| (1..=row.len()).map(|j| row[inv.apply(j) - 1]).collect())
        .collect()
}

/// Lexicographic minimum over row signs ε and tail column signs δ of
/// `diag(ε)·T·diag(δ)` for a matrix in identity form at `base`.
/// Returns the minimum and the (ε, full column signs) achieving it.
fn sign_normalize(entries: &[Vec<i64>], base: &[usize]) -> (Vec<Vec<i64>>, Vec<i64>, Vec<i64>) {
    let n = entries.len();
    let m = entries[0].len();
    let mut is_base = vec![false; m + 1];
    for &b in base {
        is_base[b] = true;
    }
    let mut best: Option<(Vec<Vec<i64>>, Vec<i64>, Vec<i64>)> = None;
    for mask in 0u32..1 << n {
        let eps: Vec<i64> = (0..n).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
        let mut cand: Vec<Vec<i64>> = entries.iter().zip(&eps).map(|(r, &e)| r.iter().map(|x| x * e).collect()).collect();
        let mut signs = vec![1i64; m];
        for (k, &b) in base.iter().enumerate() {
            signs[b - 1] = eps[k];
        }
        for j in 0..m {
            if is_base[j + 1] {
                // restore the identity column
                for (i, row) in cand.iter_mut().enumerate() {
                    row[j] = (i == base.iter().position(|&b| b == j + 1).unwrap()) as i64;
                }
                continue;
            }
            if let Some(top) = (0..n).map(|i| cand[i][j]).find(|&x| x != 0) {
                if top > 0 {
                    signs[j] = -1;
                    for row in cand.iter_mut() {
                        row[j] = -row[j];
                    }
                }
            }
        }
        if best.as_ref().map_or(true, |b| cand < b.0) {
            best = Some((cand, eps, signs));
        }
    }
    best.expect("at least one sign choice")
}

impl CharMatrix {
    pub fn new(polytope: Arc<CombinatorialPolytope>, entries: Vec<Vec<i64>>) -> Result<Self> {
        if let Some(v) = check_characteristic(&entries, &polytope)? {
            return Err(Error::NotCharacteristic(v.to_string()));
        }
        Ok(Self { polytope, entries })
    }

    /// `(I | T)` with the identity at the base vertex and `T` filling the
    /// remaining columns in ascending facet order; `tail[i]` is row `i` of T.
    pub fn from_tail(polytope: Arc<CombinatorialPolytope>, tail: &[Vec<i64>]) -> Result<Self> {
        let entries = identity_extended(&polytope, tail)?;
        Self::new(polytope, entries)
    }

    pub(crate) fn new_unchecked(polytope: Arc<CombinatorialPolytope>, entries: Vec<Vec<i64>>) -> Self {
        Self { polytope, entries }
    }

    pub fn polytope(&self) -> &CombinatorialPolytope {
        &self.polytope
    }

    pub fn polytope_arc(&self) -> &Arc<CombinatorialPolytope> {
        &self.polytope
    }

    pub fn entries(&self) -> &[Vec<i64>] {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.polytope.n()
    }

    pub fn m(&self) -> usize {
        self.polytope.m()
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        self.entries.iter().map(|r| r[j - 1]).collect()
    }

    /// The determinant ⟨i_1,…,i_n⟩ of the columns at the given facets.
    pub fn minor(&self, facets: &[usize]) -> Result<i128> {
        linalg::det(&columns_at(&self.entries, facets))
    }

    /// Columns outside the base vertex, as rows of the tail block.
    pub fn tail(&self) -> Vec<Vec<i64>> {
        let tail_cols = tail_columns(&self.polytope);
        self.entries.iter().map(|r| tail_cols.iter().map(|&j| r[j - 1]).collect()).collect()
    }

    /// `A·λ` with `A` the inverse of the column block at `v`, so the columns
    /// at `v` become the standard basis in their natural order.
    pub fn to_identity_form(&self, v: &[usize]) -> Result<Self> {
        let (entries, _) = identity_form_at(&self.entries, v)?;
        Ok(Self { polytope: self.polytope.clone(), entries })
    }

    /// Applies a facet permutation (which must be an automorphism).
    pub fn permute(&self, perm: &FacetPermutation) -> Result<Self> {
        if !self.polytope.is_automorphism(perm) {
            return Err(Error::NotAutomorphism(perm.to_string()));
        }
        Ok(Self { polytope: self.polytope.clone(), entries: permute_columns(&self.entries, perm) })
    }

    pub fn negate_column(&self, j: usize) -> Self {
        let mut e = self.entries.clone();
        for r in e.iter_mut() {
            r[j - 1] = -r[j - 1];
        }
        Self { polytope: self.polytope.clone(), entries: e }
    }

    pub fn left_multiply(&self, a: &[Vec<i64>]) -> Result<Self> {
        let d = linalg::det(a)?;
        if d.abs() != 1 {
            return Err(Error::NotUnimodular);
        }
        Ok(Self { polytope: self.polytope.clone(), entries: linalg::mat_mul(a, &self.entries) })
    }

    /// Canonical representative under GL×signs and the facet permutations
    /// in `h` (pass an empty slice for no permutations).
    pub fn canonical_form(&self, h: &[FacetPermutation]) -> Result<EquivClass<CharMatrix>> {
        Ok(EquivClass {
            canonical: self.canonical_with_witness(h)?.0,
            action: Action::GlSigns,
            permutations: h.len().max(1),
            orbit_size: None,
        })
    }

    pub fn canonical_with_witness(&self, h: &[FacetPermutation]) -> Result<(CharMatrix, CanonicalWitness)> {
        if self.m() > MAX_CANONICAL_FACETS {
            return Err(Error::SearchBound { m: self.m(), bound: MAX_CANONICAL_FACETS });
        }
        let identity = [FacetPermutation::identity(self.m())];
        let perms: &[FacetPermutation] = if h.is_empty() { &identity } else { h };
        let base = self.polytope.base_vertex().to_vec();
        let mut best: Option<(Vec<Vec<i64>>, CanonicalWitness)> = None;
        for p in perms {
            if !self.polytope.is_automorphism(p) {
                return Err(Error::NotAutomorphism(p.to_string()));
            }
            let moved = permute_columns(&self.entries, p);
            let (idf, a) = identity_form_at(&moved, &base)?;
            let (cand, eps, signs) = sign_normalize(&idf, &base);
            if best.as_ref().map_or(true, |b| cand < b.0) {
                let row_transform: Vec<Vec<i64>> =
                    a.iter().zip(&eps).map(|(r, &e)| r.iter().map(|x| x * e).collect()).collect();
                best = Some((cand, CanonicalWitness { perm: p.clone(), row_transform, col_signs: signs }));
            }
        }
        let (entries, w) = best.expect("nonempty permutation list");
        Ok((Self { polytope: self.polytope.clone(), entries }, w))
    }

    pub fn mod2_reduce(&self) -> RealCharMatrix {
        let rows = self
            .entries
            .iter()
            .map(|r| r.iter().enumerate().fold(0u32, |acc, (j, &x)| acc | (((x & 1) as u32) << j)))
            .collect();
        RealCharMatrix { polytope: self.polytope.clone(), rows }
    }

    /// Text form: header `charmat n m Z <label>` then one line per row.
    pub fn to_text(&self) -> String {
        let mut s = format!("charmat {} {} Z {}\n", self.n(), self.m(), self.polytope.label());
        for r in &self.entries {
            let xs: Vec<String> = r.iter().map(|x| x.to_string()).collect();
            s.push_str(&xs.join(" "));
            s.push('\n');
        }
        s
    }

    /// Parses the text form against a given polytope.
    pub fn from_text(polytope: Arc<CombinatorialPolytope>, text: &str) -> Result<Self> {
        let (n, m, kind, rows) = parse_text(text)?;
        if kind != "Z" {
            return Err(Error::Parse(format!("expected Z matrix, got {kind}")));
        }
        shape_check(n, &[m], &polytope)?;
        if rows.len() != n {
            return Err(Error::Parse(format!("expected {n} rows, got {}", rows.len())));
        }
        Self::new(polytope, rows)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": "Z",
            "n": self.n(),
            "m": self.m(),
            "polytope": self.polytope.label(),
            "rows": self.entries,
        })
    }
}

fn parse_text(text: &str) -> Result<(usize, usize, String, Vec<Vec<i64>>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty input".into()))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() < 4 || h[0] != "charmat" {
        return Err(Error::Parse(format!("bad header {header:?}")));
    }
    let n: usize = h[1].parse().map_err(|_| Error::Parse("bad n".into()))?;
    let m: usize = h[2].parse().map_err(|_| Error::Parse("bad m".into()))?;
    let rows = lines
        .map(|l| {
            l.split_whitespace()
                .map(|x| x.parse::<i64>().map_err(|_| Error::Parse(format!("bad entry {x:?}"))))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Parse(format!("rows must have {m} entries")));
    }
    Ok((n, m, h[3].to_string(), rows))
}

/// Facets outside the base vertex, ascending.
pub fn tail_columns(p: &CombinatorialPolytope) -> Vec<usize> {
    let base = p.base_vertex();
    (1..=p.m()).filter(|j| !base.contains(j)).collect()
}

fn identity_extended(p: &CombinatorialPolytope, tail: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    let n = p.n();
    let tc = tail_columns(p);
    if tail.len() != n || tail.iter().any(|r| r.len() != tc.len()) {
        return Err(Error::Shape {
            expected_rows: n,
            expected_cols: tc.len(),
            rows: tail.len(),
            cols: tail.first().map_or(0, |r| r.len()),
        });
    }
    let base = p.base_vertex();
    let mut e = vec![vec![0i64; p.m()]; n];
    for (k, &b) in base.iter().enumerate() {
        e[k][b - 1] = 1;
    }
    for i in 0..n {
        for (t, &j) in tc.iter().enumerate() {
            e[i][j - 1] = tail[i][t];
        }
    }
    Ok(e)
}

/// Returns `(A·λ, A)` with `A` the inverse of the column block at `v`.
fn identity_form_at(entries: &[Vec<i64>], v: &[usize]) -> Result<(Vec<Vec<i64>>, Vec<Vec<i64>>)> {
    let block = columns_at(entries, v);
    let a = linalg::inverse_unimodular(&block)
        .map_err(|_| Error::NotCharacteristic(format!("minor at {v:?} is not ±1")))?;
    Ok((linalg::mat_mul(&a, entries), a))
}

impl PartialEq for CharMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Eq for CharMatrix {}

impl PartialOrd for CharMatrix {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CharMatrix {
    fn cmp(&self, other: &Self) -> Ordering {
        self.entries.cmp(&other.entries)
    }
}

impl std::hash::Hash for CharMatrix {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.entries.hash(state);
    }
}

impl fmt::Display for CharMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.entries.iter().enumerate() {
            let xs: Vec<String> = r.iter().map(|x| format!("{x:>3}")).collect();
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}", xs.join(""))?;
        }
        Ok(())
    }
}

impl RealCharMatrix {
    pub fn new(polytope: Arc<CombinatorialPolytope>, rows: Vec<u32>) -> Result<Self> {
        if rows.len() != polytope.n() || rows.iter().any(|&r| r >> polytope.m() != 0) {
            return Err(Error::Shape {
                expected_rows: polytope.n(),
                expected_cols: polytope.m(),
                rows: rows.len(),
                cols: polytope.m() + 1,
            });
        }
        if let Some(v) = check_real(&rows, &polytope) {
            return Err(Error::NotCharacteristic(format!("Z/2 minor at vertex {v:?} vanishes")));
        }
        Ok(Self { polytope, rows })
    }

    pub fn from_entries(polytope: Arc<CombinatorialPolytope>, entries: &[Vec<i64>]) -> Result<Self> {
        shape_check(entries.len(), &entries.iter().map(|r| r.len()).collect::<Vec<_>>(), &polytope)?;
        let rows = entries
            .iter()
            .map(|r| r.iter().enumerate().fold(0u32, |acc, (j, &x)| acc | (((x & 1) as u32) << j)))
            .collect();
        Self::new(polytope, rows)
    }

    pub fn from_tail(polytope: Arc<CombinatorialPolytope>, tail: &[Vec<i64>]) -> Result<Self> {
        let e = identity_extended(&polytope, tail)?;
        Self::from_entries(polytope, &e)
    }

    pub fn polytope(&self) -> &CombinatorialPolytope {
        &self.polytope
    }

    pub fn polytope_arc(&self) -> &Arc<CombinatorialPolytope> {
        &self.polytope
    }

    pub fn n(&self) -> usize {
        self.polytope.n()
    }

    pub fn m(&self) -> usize {
        self.polytope.m()
    }

    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        (self.rows[i - 1] >> (j - 1) & 1) as i64
    }

    pub fn entries(&self) -> Vec<Vec<i64>> {
        (1..=self.n()).map(|i| (1..=self.m()).map(|j| self.entry(i, j)).collect()).collect()
    }

    pub fn columns(&self) -> Vec<u32> {
        bit_columns(&self.rows, self.m())
    }

    pub fn tail(&self) -> Vec<Vec<i64>> {
        let tc = tail_columns(&self.polytope);
        (1..=self.n()).map(|i| tc.iter().map(|&j| self.entry(i, j)).collect()).collect()
    }

    /// Row reduction making the columns at `v` the standard basis.
    pub fn to_identity_form(&self, v: &[usize]) -> Result<Self> {
        let rows = gf2_identity_form(&self.rows, v)
            .ok_or_else(|| Error::NotCharacteristic(format!("Z/2 minor at {v:?} vanishes")))?;
        Ok(Self { polytope: self.polytope.clone(), rows })
    }

    pub fn permute(&self, perm: &FacetPermutation) -> Result<Self> {
        if !self.polytope.is_automorphism(perm) {
            return Err(Error::NotAutomorphism(perm.to_string()));
        }
        let cols = self.columns();
        let mut new_cols = vec![0u32; cols.len()];
        for (j, &c) in cols.iter().enumerate() {
            new_cols[perm.apply(j + 1) - 1] = c;
        }
        Ok(Self { polytope: self.polytope.clone(), rows: bit_rows(&new_cols, self.n()) })
    }

    pub fn canonical_form(&self, h: &[FacetPermutation]) -> Result<EquivClass<RealCharMatrix>> {
        let identity = [FacetPermutation::identity(self.m())];
        let perms: &[FacetPermutation] = if h.is_empty() { &identity } else { h };
        let base = self.polytope.base_vertex().to_vec();
        let mut best: Option<RealCharMatrix> = None;
        for p in perms {
            let cand = self.permute(p)?.to_identity_form(&base)?;
            if best.as_ref().map_or(true, |b| cand < *b) {
                best = Some(cand);
            }
        }
        Ok(EquivClass {
            canonical: best.expect("nonempty"),
            action: Action::Gl,
            permutations: h.len().max(1),
            orbit_size: None,
        })
    }

    /// The 0/1 lift; characteristic for dimension at most 3.
    pub fn lift_tilde(&self) -> Result<CharMatrix> {
        if self.n() > 3 {
            return Err(Error::Dimension(self.n()));
        }
        CharMatrix::new(self.polytope.clone(), self.entries())
    }

    fn sort_key(&self) -> Vec<u32> {
        let m = self.m() as u32;
        self.rows.iter().map(|r| r.reverse_bits() >> (32 - m)).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("charmat {} {} Z2 {}\n", self.n(), self.m(), self.polytope.label());
        for r in self.entries() {
            let xs: Vec<String> = r.iter().map(|x| x.to_string()).collect();
            s.push_str(&xs.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_text(polytope: Arc<CombinatorialPolytope>, text: &str) -> Result<Self> {
        let (n, m, kind, rows) = parse_text(text)?;
        if kind != "Z2" {
            return Err(Error::Parse(format!("expected Z2 matrix, got {kind}")));
        }
        shape_check(n, &[m], &polytope)?;
        if rows.iter().flatten().any(|&x| !(0..=1).contains(&x)) {
            return Err(Error::Parse("Z2 entries must be 0 or 1".into()));
        }
        Self::from_entries(polytope, &rows)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": "Z2",
            "n": self.n(),
            "m": self.m(),
            "polytope": self.polytope.label(),
            "rows": self.entries(),
        })
    }
}

fn gf2_identity_form(rows: &[u32], v: &[usize]) -> Option<Vec<u32>> {
    let mut r = rows.to_vec();
    for (k, &b) in v.iter().enumerate() {
        let bit = 1u32 << (b - 1);
        let p = (k..r.len()).find(|&i| r[i] & bit != 0)?;
        r.swap(k, p);
        let piv = r[k];
        for (i, x) in r.iter_mut().enumerate() {
            if i != k && *x & bit != 0 {
                *x ^= piv;
            }
        }
    }
    Some(r)
}

impl PartialEq for RealCharMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
    }
}

impl Eq for RealCharMatrix {}

impl PartialOrd for RealCharMatrix {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RealCharMatrix {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl std::hash::Hash for RealCharMatrix {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.rows.hash(state);
    }
}

impl fmt::Display for RealCharMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.entries().iter().enumerate() {
            let xs: Vec<String> = r.iter().map(|x| x.to_string()).collect();
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}", xs.join(" "))?;
        }
        Ok(())
    }
}

/// Vertices grouped by the position (in `order`) of their last-assigned facet.
fn closing_vertices(p: &CombinatorialPolytope, order: &[usize]) -> Vec<Vec<Vec<usize>>> {
    let mut pos = vec![usize::MAX; p.m() + 1];
    for (k, &j) in order.iter().enumerate() {
        pos[j] = k;
    }
    let mut out = vec![Vec::new(); order.len()];
    for v in p.vertices() {
        let last = v.iter().filter(|&&j| pos[j] != usize::MAX).map(|&j| pos[j]).max();
        if let Some(k) = last {
            out[k].push(v.clone());
        }
    }
    out
}

/// All real characteristic matrices in identity form at the base vertex;
/// each is the unique such representative of its GL(n, Z/2) class.
pub fn enumerate_real(p: &Arc<CombinatorialPolytope>) -> Result<Vec<EquivClass<RealCharMatrix>>> {
    if p.m() > crate::polytope::MAX_FACETS {
        return Err(Error::SearchBound { m: p.m(), bound: crate::polytope::MAX_FACETS });
    }
    let n = p.n();
    let m = p.m();
    let tc = tail_columns(p);
    let closing = closing_vertices(p, &tc);
    let mut cols = vec![0u32; m];
    for (k, &b) in p.base_vertex().iter().enumerate() {
        cols[b - 1] = 1 << k;
    }
    let mut found = Vec::new();
    fn rec(t: usize, tc: &[usize], closing: &[Vec<Vec<usize>>], n: usize, cols: &mut Vec<u32>, found: &mut Vec<Vec<u32>>) {
        if t == tc.len() {
            found.push(cols.clone());
            return;
        }
        for c in 1u32..1 << n {
            cols[tc[t] - 1] = c;
            let ok = closing[t]
                .iter()
                .all(|v| linalg::det_gf2(&v.iter().map(|&j| cols[j - 1]).collect::<Vec<_>>()));
            if ok {
                rec(t + 1, tc, closing, n, cols, found);
            }
        }
        cols[tc[t] - 1] = 0;
    }
    rec(0, &tc, &closing, n, &mut cols, &mut found);
    let mut out: Vec<EquivClass<RealCharMatrix>> = found
        .into_iter()
        .map(|c| EquivClass {
            canonical: RealCharMatrix { polytope: p.clone(), rows: bit_rows(&c, n) },
            action: Action::Gl,
            permutations: 1,
            orbit_size: None,
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Integer characteristic matrices with an identity-form representative
/// whose tail entries lie in `[-bound, bound]`, up to GL×signs.
pub fn enumerate_integer(p: &Arc<CombinatorialPolytope>, bound: i64) -> Result<Vec<EquivClass<CharMatrix>>> {
    enumerate_integer_filtered(p, bound, None)
}

/// The classes of [`enumerate_integer`] reducing mod 2 to the class of `real`.
pub fn fiber_over(real: &RealCharMatrix, bound: i64) -> Result<Vec<EquivClass<CharMatrix>>> {
    let base = real.polytope().base_vertex().to_vec();
    let parity = real.to_identity_form(&base)?.tail();
    enumerate_integer_filtered(real.polytope_arc(), bound, Some(parity))
}

fn candidate_values(bound: i64, parity: Option<i64>) -> Vec<i64> {
    (-bound..=bound).filter(|x| parity.map_or(true, |p| x.rem_euclid(2) == p)).collect()
}

struct IntSearch<'a> {
    n: usize,
    tc: &'a [usize],
    closing: &'a [Vec<Vec<usize>>],
    /// per tail column, per row, allowed values
    values: Vec<Vec<Vec<i64>>>,
}

impl IntSearch<'_> {
    /// Candidate columns at tail position `t` given the columns fixed so far.
    fn candidates(&self, t: usize, cols: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
        let j = self.tc[t];
        // each closing vertex imposes cof·c = ±1 for the cofactor vector cof
        let mut cofs: Vec<Vec<i64>> = Vec::new();
        for v in &self.closing[t] {
            let others: Vec<usize> = v.iter().copied().filter(|&x| x != j).collect();
            let pos = v.iter().position(|&x| x == j).unwrap();
            let mut cof = vec![0i64; self.n];
            for (r, c) in cof.iter_mut().enumerate() {
                // expand along the column at `pos`: sign (−1)^{r+pos}
                let minor: Vec<Vec<i64>> = (0..self.n)
                    .filter(|&i| i != r)
                    .map(|i| others.iter().map(|&o| cols[o - 1][i]).collect())
                    .collect();
                let d = linalg::det(&minor)?;
                let s = if (r + pos) % 2 == 0 { 1 } else { -1 };
                *c = i64::try_from(d * s).map_err(|_| Error::Overflow("cofactor"))?;
            }
            cofs.push(cof);
        }
        let mut out = Vec::new();
        let mut c = vec![0i64; self.n];
        self.fill(t, 0, &mut c, &cofs, &mut out);
        Ok(out)
    }

    fn fill(&self, t: usize, i: usize, c: &mut Vec<i64>, cofs: &[Vec<i64>], out: &mut Vec<Vec<i64>>) {
        if i == self.n {
            // sign normalization: first nonzero entry negative
            match c.iter().find(|&&x| x != 0) {
                Some(&x) if x < 0 => {}
                _ => return,
            }
            let ok = cofs.iter().all(|cof| {
                let d: i64 = cof.iter().zip(c.iter()).map(|(a, b)| a * b).sum();
                d == 1 || d == -1
            });
            if ok {
                out.push(c.clone());
            }
            return;
        }
        for &x in &self.values[t][i] {
            c[i] = x;
            self.fill(t, i + 1, c, cofs, out);
        }
    }

    fn run(&self, t: usize, cols: &mut Vec<Vec<i64>>, out: &mut Vec<Vec<Vec<i64>>>) -> Result<()> {
        if t == self.tc.len() {
            out.push(cols.clone());
            return Ok(());
        }
        for c in self.candidates(t, cols)? {
            cols[self.tc[t] - 1] = c;
            self.run(t + 1, cols, out)?;
        }
        cols[self.tc[t] - 1] = vec![0; self.n];
        Ok(())
    }
}

fn enumerate_integer_filtered(
    p: &Arc<CombinatorialPolytope>,
    bound: i64,
    parity: Option<Vec<Vec<i64>>>,
) -> Result<Vec<EquivClass<CharMatrix>>> {
    if p.m() > MAX_INTEGER_FACETS {
        return Err(Error::SearchBound { m: p.m(), bound: MAX_INTEGER_FACETS });
    }
    if bound < 1 {
        return Err(Error::OutOfRange { k: bound.max(0) as usize, lo: 1, hi: usize::MAX });
    }
    let n = p.n();
    let m = p.m();
    let tc = tail_columns(p);
    let closing = closing_vertices(p, &tc);
    let values: Vec<Vec<Vec<i64>>> = (0..tc.len())
        .map(|t| (0..n).map(|i| candidate_values(bound, parity.as_ref().map(|pp| pp[i][t]))).collect())
        .collect();
    let search = IntSearch { n, tc: &tc, closing: &closing, values };
    let mut cols0 = vec![vec![0i64; n]; m];
    for (k, &b) in p.base_vertex().iter().enumerate() {
        cols0[b - 1][k] = 1;
    }
    // the base vertex itself closes before any tail column
    let firsts = if tc.is_empty() { Vec::new() } else { search.candidates(0, &cols0)? };
    let partials: Vec<Result<BTreeSet<Vec<Vec<i64>>>>> = if tc.is_empty() {
        vec![Ok(std::iter::once(transpose(&cols0, n)).collect())]
    } else {
        firsts
            .par_iter()
            .map(|c| {
                let mut cols = cols0.clone();
                cols[tc[0] - 1] = c.clone();
                let mut raw = Vec::new();
                search.run(1, &mut cols, &mut raw)?;
                let base = p.base_vertex();
                Ok(raw
                    .into_iter()
                    .map(|cs| sign_normalize(&transpose(&cs, n), base).0)
                    .collect())
            })
            .collect()
    };
    let mut all = BTreeSet::new();
    for part in partials {
        all.extend(part?);
    }
    Ok(all
        .into_iter()
        .map(|e| EquivClass {
            canonical: CharMatrix::new_unchecked(p.clone(), e),
            action: Action::GlSigns,
            permutations: 1,
            orbit_size: None,
        })
        .collect())
}

fn transpose(cols: &[Vec<i64>], n: usize) -> Vec<Vec<i64>> {
    (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
}

/// Partition of integer classes under the facet permutations generated by
/// `gens`. Returns index lists into `classes`, each sorted by canonical
/// form, orbits ordered by their least member.
pub fn orbits(classes: &[EquivClass<CharMatrix>], gens: &[FacetPermutation]) -> Result<Vec<Vec<usize>>> {
    let index: BTreeMap<&CharMatrix, usize> = classes.iter().enumerate().map(|(i, c)| (&c.canonical, i)).collect();
    let images = |c: &CharMatrix| -> Result<Vec<CharMatrix>> {
        gens.iter().map(|g| Ok(c.permute(g)?.canonical_form(&[])?.canonical)).collect()
    };
    orbit_partition(classes.len(), |i| {
        images(&classes[i].canonical)?
            .iter()
            .map(|img| {
                index
                    .get(img)
                    .copied()
                    .ok_or_else(|| Error::OrbitEscapes(format!("image of class {i} not in the list")))
            })
            .collect()
    }, |i| classes[i].canonical.clone())
}

/// Real-matrix analogue of [`orbits`].
pub fn real_orbits(classes: &[EquivClass<RealCharMatrix>], gens: &[FacetPermutation]) -> Result<Vec<Vec<usize>>> {
    let index: BTreeMap<&RealCharMatrix, usize> = classes.iter().enumerate().map(|(i, c)| (&c.canonical, i)).collect();
    orbit_partition(classes.len(), |i| {
        gens.iter()
            .map(|g| {
                let img = classes[i].canonical.permute(g)?.canonical_form(&[])?.canonical;
                index
                    .get(&img)
                    .copied()
                    .ok_or_else(|| Error::OrbitEscapes(format!("image of class {i} not in the list")))
            })
            .collect()
    }, |i| classes[i].canonical.clone())
}

fn orbit_partition<K: Ord>(
    len: usize,
    neighbours: impl Fn(usize) -> Result<Vec<usize>>,
    key: impl Fn(usize) -> K,
) -> Result<Vec<Vec<usize>>> {
    let mut parent: Vec<usize> = (0..len).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for i in 0..len {
        for j in neighbours(i)? {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..len {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    for g in out.iter_mut() {
        g.sort_by_key(|&i| key(i));
    }
    out.sort_by_key(|g| key(g[0]));
    Ok(out)
}

/// Vertex masks helper for callers that need the facets of a mask.
pub fn facets_of(mask: u32) -> Vec<usize> {
    set_of(mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c47() -> Arc<CombinatorialPolytope> {
        Arc::new(CombinatorialPolytope::dual_cyclic(4, 7).unwrap())
    }

    #[test]
    fn left_real_matrix_is_characteristic() {
        let p = c47();
        let tail = vec![vec![1, 0, 1], vec![1, 1, 1], vec![1, 1, 0], vec![0, 1, 1]];
        assert!(RealCharMatrix::from_tail(p.clone(), &tail).is_ok());
        let mut bad = tail.clone();
        bad[3][1] = 0;
        assert!(RealCharMatrix::from_tail(p, &bad).is_err());
    }

    #[test]
    fn simplex_minus_identity_normalizes() {
        let p = Arc::new(CombinatorialPolytope::simplex(3).unwrap());
        let e = vec![vec![-1, 0, 0, 1], vec![0, -1, 0, 1], vec![0, 0, -1, 1]];
        let l = CharMatrix::new(p, e).unwrap();
        let idf = l.to_identity_form(&[1, 2, 3]).unwrap();
        assert_eq!(idf.tail(), vec![vec![-1], vec![-1], vec![-1]]);
    }

    #[test]
    fn canonical_is_sign_invariant() {
        let p = c47();
        let l = CharMatrix::from_tail(p, &[vec![1, 0, 1], vec![1, 1, 1], vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
        let a = l.canonical_form(&[]).unwrap();
        let neg = l.negate_column(5).left_multiply(&[
            vec![1, 0, 0, 0],
            vec![0, -1, 0, 0],
            vec![0, 0, 1, 0],
            vec![0, 0, 0, 1],
        ]);
        assert_eq!(a.canonical, neg.unwrap().canonical_form(&[]).unwrap().canonical);
    }

    #[test]
    fn witness_reproduces_canonical() {
        let p = c47();
        let aut = p.automorphism_group().unwrap();
        let l = CharMatrix::from_tail(p, &[vec![1, 0, -1], vec![-1, -1, 1], vec![1, 1, 0], vec![2, 1, 1]]).unwrap();
        let (c, w) = l.canonical_with_witness(&aut).unwrap();
        let moved = l.permute(&w.perm).unwrap();
        let mut e = linalg::mat_mul(&w.row_transform, moved.entries());
        for r in e.iter_mut() {
            for (j, x) in r.iter_mut().enumerate() {
                *x *= w.col_signs[j];
            }
        }
        assert_eq!(&e, c.entries());
    }

    #[test]
    fn simplex_has_one_class() {
        for n in 2..=4 {
            let p = Arc::new(CombinatorialPolytope::simplex(n).unwrap());
            assert_eq!(enumerate_integer(&p, 3).unwrap().len(), 1);
            assert_eq!(enumerate_real(&p).unwrap().len(), 1);
        }
    }

    #[test]
    fn text_roundtrip() {
        let p = c47();
        let l = CharMatrix::from_tail(p.clone(), &[vec![1, 0, 1], vec![1, 1, 1], vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
        assert_eq!(CharMatrix::from_text(p.clone(), &l.to_text()).unwrap(), l);
        let r = l.mod2_reduce();
        assert_eq!(RealCharMatrix::from_text(p, &r.to_text()).unwrap(), r);
    }
}
