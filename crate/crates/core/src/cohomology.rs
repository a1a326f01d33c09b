//! Cohomology rings Z[v_{n+1},…,v_m]/I_λ of quasitoric manifolds and small
//! covers, realized degree by degree as quotients of free modules.
//!
//! Degrees below are polynomial degrees in the generators; multiply by two
//! for the cohomological degree of a quasitoric manifold.
//!
//! Substitutions use the unsigned forms v'_i = Σ_j λ_{i,j} v_j for facets of
//! the base vertex. The class of v_i itself is −v'_i; every relation is a
//! product of linear forms, so the ideal is the same either way.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::charmat::{tail_columns, CharMatrix, RealCharMatrix};
use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::{generator_names, Exponent, HomPoly, MonomialTable};
use crate::polytope::CombinatorialPolytope;

/// Prime used to pick pivot monomials before exact verification.
const ECHELON_PRIME: i64 = 1_000_000_007;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Coeff {
    Z,
    Mod(i64),
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coeff::Z => write!(f, "Z"),
            Coeff::Mod(k) => write!(f, "Z/{k}"),
        }
    }
}

/// A relation: the product of the linear forms attached to a missing face.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub facets: Vec<usize>,
    pub factors: Vec<Vec<i64>>,
}

impl Relation {
    pub fn degree(&self) -> usize {
        self.factors.len()
    }
}

/// Integer quotient of one degree: `x ↦ x·cols` with coordinate `i`
/// taken modulo `divisors[i]` (0 = free).
#[derive(Debug, Clone)]
struct IntQuotient {
    cols: Vec<Vec<i64>>,
    divisors: Vec<i64>,
}

/// Coordinates of one degree of the quotient over the presentation's
/// coefficient ring (or a further reduction mod k).
#[derive(Debug, Clone)]
pub struct QuotientView {
    /// `N × q` matrix; coordinate `i` of `x` is `(x·cols)_i mod moduli[i]`.
    pub cols: Vec<Vec<i64>>,
    /// 0 for a free Z-coordinate.
    pub moduli: Vec<i64>,
}

impl QuotientView {
    pub fn coords(&self, x: &[i64]) -> Vec<i64> {
        let q = self.moduli.len();
        let mut out = vec![0i64; q];
        for (xi, row) in x.iter().zip(&self.cols) {
            if *xi != 0 {
                for t in 0..q {
                    out[t] += xi * row[t];
                }
            }
        }
        for (o, &k) in out.iter_mut().zip(&self.moduli) {
            if k > 0 {
                *o = o.rem_euclid(k);
            }
        }
        out
    }

    pub fn is_zero(&self, x: &[i64]) -> bool {
        self.coords(x).iter().all(|&c| c == 0)
    }

    pub fn len(&self) -> usize {
        self.moduli.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moduli.is_empty()
    }

    /// Number of elements when every coordinate is finite.
    pub fn order(&self) -> Option<u64> {
        self.moduli.iter().try_fold(1u64, |acc, &k| if k > 0 { Some(acc * k as u64) } else { None })
    }
}

/// Per-degree monomial basis of the quotient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedBasis {
    pub degree: usize,
    pub rank: usize,
    /// Monomials whose classes form a basis, when such a choice exists.
    pub monomials: Option<Vec<Exponent>>,
}

#[derive(Debug, Clone)]
pub struct RingPresentation {
    n: usize,
    g: usize,
    coeff: Coeff,
    /// Cohomological degree of a generator (2 quasitoric, 1 small cover).
    generator_degree: usize,
    base: Vec<usize>,
    tail: Vec<usize>,
    substitutions: Vec<Vec<i64>>,
    relations: Vec<Relation>,
    table: Arc<MonomialTable>,
    quotients: OnceLock<std::result::Result<Vec<IntQuotient>, Error>>,
    bases: OnceLock<Vec<Option<(Vec<Exponent>, Vec<Vec<i64>>)>>>,
}

impl RingPresentation {
    fn build(
        p: &CombinatorialPolytope,
        tail_rows: Vec<Vec<i64>>,
        coeff: Coeff,
        generator_degree: usize,
    ) -> Result<Self> {
        let n = p.n();
        let base = p.base_vertex().to_vec();
        let tail = tail_columns(p);
        let g = tail.len();
        let form = |facet: usize| -> Vec<i64> {
            if let Some(k) = base.iter().position(|&b| b == facet) {
                tail_rows[k].clone()
            } else {
                let t = tail.iter().position(|&x| x == facet).unwrap();
                (0..g).map(|s| (s == t) as i64).collect()
            }
        };
        let relations = p
            .missing_faces()?
            .into_iter()
            .map(|s| Relation { factors: s.iter().map(|&i| form(i)).collect(), facets: s })
            .collect();
        let mut r = Self::from_parts(n, coeff, generator_degree, base, tail, tail_rows, relations);
        r.reduce_entries();
        Ok(r)
    }

    fn from_parts(
        n: usize,
        coeff: Coeff,
        generator_degree: usize,
        base: Vec<usize>,
        tail: Vec<usize>,
        substitutions: Vec<Vec<i64>>,
        relations: Vec<Relation>,
    ) -> Self {
        let g = tail.len();
        Self {
            n,
            g,
            coeff,
            generator_degree,
            base,
            tail,
            substitutions,
            relations,
            table: Arc::new(MonomialTable::new(g, n)),
            quotients: OnceLock::new(),
            bases: OnceLock::new(),
        }
    }

    fn reduce_entries(&mut self) {
        if let Coeff::Mod(k) = self.coeff {
            for r in self.substitutions.iter_mut() {
                for x in r.iter_mut() {
                    *x = x.rem_euclid(k);
                }
            }
            for rel in self.relations.iter_mut() {
                for f in rel.factors.iter_mut() {
                    for x in f.iter_mut() {
                        *x = x.rem_euclid(k);
                    }
                }
            }
        }
    }

    /// Presentation of the quasitoric ring of λ (brought to identity form at
    /// the base vertex first).
    pub fn quasitoric(lambda: &CharMatrix) -> Result<Self> {
        let p = lambda.polytope();
        let idf = lambda.to_identity_form(p.base_vertex())?;
        Self::build(p, idf.tail(), Coeff::Z, 2)
    }

    /// Presentation of the mod-2 ring of a small cover.
    pub fn small_cover(lambda: &RealCharMatrix) -> Result<Self> {
        let p = lambda.polytope();
        let idf = lambda.to_identity_form(p.base_vertex())?;
        Self::build(p, idf.tail(), Coeff::Mod(2), 1)
    }

    /// The same generators and relations over Z/k.
    pub fn reduce_mod(&self, k: i64) -> Result<Self> {
        if k < 2 {
            return Err(Error::Modulus(k.max(0) as u64));
        }
        let coeff = match self.coeff {
            Coeff::Z => k,
            Coeff::Mod(k0) => num_integer::gcd(k0, k),
        };
        let mut r = Self::from_parts(
            self.n,
            Coeff::Mod(coeff),
            self.generator_degree,
            self.base.clone(),
            self.tail.clone(),
            self.substitutions.clone(),
            self.relations.clone(),
        );
        r.reduce_entries();
        Ok(r)
    }

    /// Keeps only the relations accepted by `keep` (quotients by a partial
    /// ideal; torsion is then allowed).
    pub fn restrict(&self, keep: impl Fn(&Relation) -> bool) -> Self {
        Self::from_parts(
            self.n,
            self.coeff,
            self.generator_degree,
            self.base.clone(),
            self.tail.clone(),
            self.substitutions.clone(),
            self.relations.iter().filter(|r| keep(r)).cloned().collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn coeff(&self) -> Coeff {
        self.coeff
    }

    pub fn generator_degree(&self) -> usize {
        self.generator_degree
    }

    /// Top polynomial degree (= n).
    pub fn top(&self) -> usize {
        self.n
    }

    pub fn substitutions(&self) -> &[Vec<i64>] {
        &self.substitutions
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn table(&self) -> &MonomialTable {
        &self.table
    }

    pub fn tail_facets(&self) -> &[usize] {
        &self.tail
    }

    pub fn generator_names(&self) -> Vec<String> {
        generator_names(self.g, self.n + 1)
    }

    /// Linear form of facet `i` (v'_i for base facets, a generator otherwise).
    pub fn facet_form(&self, facet: usize) -> Vec<i64> {
        if let Some(k) = self.base.iter().position(|&b| b == facet) {
            self.substitutions[k].clone()
        } else {
            let t = self.tail.iter().position(|&x| x == facet).expect("facet label");
            (0..self.g).map(|s| (s == t) as i64).collect()
        }
    }

    pub fn relation_poly(&self, r: &Relation) -> Result<HomPoly> {
        self.table.product(&r.factors)
    }

    fn modulus(&self) -> Option<i64> {
        match self.coeff {
            Coeff::Z => None,
            Coeff::Mod(k) => Some(k),
        }
    }

    fn int_quotients(&self) -> Result<&Vec<IntQuotient>> {
        self.quotients
            .get_or_init(|| (0..=self.n).map(|d| self.compute_quotient(d)).collect())
            .as_ref()
            .map_err(|e| e.clone())
    }

    /// Rows spanning the degree-d part of the ideal.
    pub fn ideal_rows(&self, d: usize) -> Result<Vec<Vec<i64>>> {
        let mut rows = Vec::new();
        for r in &self.relations {
            let e = r.degree();
            if e > d {
                continue;
            }
            let base = self.relation_poly(r)?;
            for mono in self.table.monomials(d - e) {
                rows.push(self.table.mul_monomial(&base, mono)?.coeffs);
            }
        }
        Ok(rows)
    }

    fn compute_quotient(&self, d: usize) -> Result<IntQuotient> {
        let big_n = self.table.count(d);
        let rows = self.ideal_rows(d)?;
        let diag = linalg::diagonalize(&rows, big_n, true)?;
        let mut divisors: Vec<i64> = Vec::new();
        let mut keep: Vec<usize> = Vec::new();
        for (i, &di) in diag.diag.iter().enumerate() {
            if di != 1 {
                keep.push(i);
                divisors.push(i64::try_from(di).map_err(|_| Error::Overflow("divisor"))?);
            }
        }
        for i in diag.rank()..big_n {
            keep.push(i);
            divisors.push(0);
        }
        let cols = (0..big_n)
            .map(|r| {
                keep.iter()
                    .map(|&c| i64::try_from(diag.v[r][c]).map_err(|_| Error::Overflow("quotient transform")))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(IntQuotient { cols, divisors })
    }

    /// Coordinates of degree `d` over the coefficient ring, further reduced
    /// mod `k` when given.
    pub fn view(&self, d: usize, k: Option<i64>) -> Result<QuotientView> {
        let q = &self.int_quotients()?[d];
        let k = match (self.modulus(), k) {
            (Some(a), Some(b)) => Some(num_integer::gcd(a, b)),
            (a, b) => a.or(b),
        };
        let mut cols_keep = Vec::new();
        let mut moduli = Vec::new();
        for (t, &dv) in q.divisors.iter().enumerate() {
            let m = match k {
                None => dv,
                Some(k) => num_integer::gcd(dv, k),
            };
            if m != 1 {
                cols_keep.push(t);
                moduli.push(m);
            }
        }
        let cols = q
            .cols
            .iter()
            .map(|row| {
                cols_keep
                    .iter()
                    .zip(&moduli)
                    .map(|(&t, &m)| if m > 0 { row[t].rem_euclid(m) } else { row[t] })
                    .collect()
            })
            .collect();
        Ok(QuotientView { cols, moduli })
    }

    pub fn views(&self, k: Option<i64>) -> Result<Vec<QuotientView>> {
        (0..=self.n).map(|d| self.view(d, k)).collect()
    }

    /// Torsion check over the presentation's own coefficients.
    pub fn assert_torsion_free(&self) -> Result<()> {
        if self.coeff != Coeff::Z {
            return Ok(());
        }
        for (d, q) in self.int_quotients()?.iter().enumerate() {
            let tors: Vec<i64> = q.divisors.iter().copied().filter(|&x| x > 1).collect();
            if !tors.is_empty() {
                return Err(Error::Torsion { degree: d, divisors: tors });
            }
        }
        Ok(())
    }

    /// Rank of each degree (Betti numbers b_{2d} resp. mod-2 b_d).
    pub fn betti(&self) -> Result<Vec<usize>> {
        self.assert_torsion_free()?;
        (0..=self.n).map(|d| Ok(self.view(d, None)?.len())).collect()
    }

    /// Basis of degree `d`; errors on torsion.
    pub fn graded_basis(&self, d: usize) -> Result<GradedBasis> {
        if d > self.n {
            return Err(Error::OutOfRange { k: d, lo: 0, hi: self.n });
        }
        self.assert_torsion_free()?;
        let rank = self.view(d, None)?.len();
        let monomials = self.monomial_bases()?[d].as_ref().map(|(m, _)| m.clone());
        Ok(GradedBasis { degree: d, rank, monomials })
    }

    fn monomial_bases(&self) -> Result<&Vec<Option<(Vec<Exponent>, Vec<Vec<i64>>)>>> {
        if let Some(b) = self.bases.get() {
            return Ok(b);
        }
        let computed = (0..=self.n).map(|d| self.monomial_basis(d)).collect::<Result<Vec<_>>>()?;
        Ok(self.bases.get_or_init(|| computed))
    }

    /// Non-pivot monomials of a row echelon form (largest monomials are
    /// eliminated first), kept only if their classes form a basis. Returns
    /// the monomials and the inverse of their coordinate matrix.
    fn monomial_basis(&self, d: usize) -> Result<Option<(Vec<Exponent>, Vec<Vec<i64>>)>> {
        let view = self.view(d, None)?;
        if view.moduli.iter().any(|&m| m > 0 && self.modulus().is_none()) {
            return Ok(None);
        }
        let big_n = self.table.count(d);
        let p = ECHELON_PRIME;
        let mut rows: Vec<Vec<i64>> = self
            .ideal_rows(d)?
            .into_iter()
            .map(|r| r.into_iter().map(|x| x.rem_euclid(p)).collect())
            .collect();
        let mut pivots = vec![false; big_n];
        let mut r0 = 0;
        for c in 0..big_n {
            let Some(pr) = (r0..rows.len()).find(|&i| rows[i][c] != 0) else { continue };
            rows.swap(r0, pr);
            let inv = mod_inverse(rows[r0][c], p);
            for x in rows[r0].iter_mut() {
                *x = *x * inv % p;
            }
            for i in 0..rows.len() {
                if i != r0 && rows[i][c] != 0 {
                    let f = rows[i][c];
                    for j in c..big_n {
                        rows[i][j] = (rows[i][j] - f * rows[r0][j]).rem_euclid(p);
                    }
                }
            }
            pivots[c] = true;
            r0 += 1;
        }
        let chosen: Vec<usize> = (0..big_n).filter(|&c| !pivots[c]).collect();
        if chosen.len() != view.len() {
            return Ok(None);
        }
        let unit = |c: usize| -> Vec<i64> { (0..big_n).map(|i| (i == c) as i64).collect() };
        let mat: Vec<Vec<i64>> = chosen.iter().map(|&c| view.coords(&unit(c))).collect();
        let inv = match self.modulus() {
            None => match linalg::inverse_unimodular(&mat) {
                Ok(inv) => inv,
                Err(_) => return Ok(None),
            },
            Some(k) => match inverse_mod(&mat, k) {
                Some(inv) => inv,
                None => return Ok(None),
            },
        };
        let monos = chosen.iter().map(|&c| self.table.monomials(d)[c].clone()).collect();
        Ok(Some((monos, inv)))
    }

    /// Coordinates of a homogeneous polynomial in the monomial basis of its
    /// degree (raw quotient coordinates when no monomial basis exists).
    pub fn normal_form(&self, poly: &HomPoly) -> Result<Vec<i64>> {
        let d = poly.degree;
        if d > self.n || poly.coeffs.len() != self.table.count(d) {
            return Err(Error::Inhomogeneous(d));
        }
        let view = self.view(d, None)?;
        let raw = view.coords(&poly.coeffs);
        Ok(match &self.monomial_bases()?[d] {
            Some((_, inv)) => {
                let mut out: Vec<i64> = (0..raw.len()).map(|j| (0..raw.len()).map(|i| raw[i] * inv[i][j]).sum()).collect();
                if let Some(k) = self.modulus() {
                    for x in out.iter_mut() {
                        *x = x.rem_euclid(k);
                    }
                }
                out
            }
            None => raw,
        })
    }

    /// Human-readable normal form in the monomial basis.
    pub fn format_normal_form(&self, poly: &HomPoly) -> Result<String> {
        let coords = self.normal_form(poly)?;
        let names = self.generator_names();
        let Some((monos, _)) = &self.monomial_bases()?[poly.degree] else {
            return Ok(format!("{coords:?}"));
        };
        let mut p = HomPoly { degree: poly.degree, coeffs: vec![0; self.table.count(poly.degree)] };
        for (c, m) in coords.iter().zip(monos) {
            p.coeffs[self.table.index_of(m).unwrap()] = *c;
        }
        Ok(self.table.format(&p, &names))
    }

    pub fn is_in_ideal(&self, poly: &HomPoly) -> Result<bool> {
        Ok(self.view(poly.degree, None)?.is_zero(&poly.coeffs))
    }

    /// The vertex used to fix the fundamental class: the lexicographically
    /// greatest vertex containing facet 1.
    pub fn orientation_vertex(p: &CombinatorialPolytope) -> Vec<usize> {
        p.vertices().iter().filter(|v| v.contains(&1)).max().cloned().expect("facet 1 meets a vertex")
    }

    /// Top-degree coordinate of the product of the facet forms over `vertex`.
    pub fn vertex_product(&self, vertex: &[usize]) -> Result<i64> {
        let factors: Vec<Vec<i64>> = vertex.iter().map(|&i| self.facet_form(i)).collect();
        let poly = self.table.product(&factors)?;
        let v = self.view(self.n, None)?;
        if v.len() != 1 {
            return Err(Error::Invariant(format!("top degree has rank {}", v.len())));
        }
        Ok(v.coords(&poly.coeffs)[0])
    }
}

fn mod_inverse(a: i64, p: i64) -> i64 {
    let e = num_integer::Integer::extended_gcd(&a.rem_euclid(p), &p);
    e.x.rem_euclid(p)
}

/// Inverse of a square matrix over Z/k when its determinant is a unit.
pub fn inverse_mod(a: &[Vec<i64>], k: i64) -> Option<Vec<Vec<i64>>> {
    let n = a.len();
    let d = linalg::det(a).ok()?;
    let d = (d.rem_euclid(k as i128)) as i64;
    if num_integer::gcd(d, k) != 1 {
        return None;
    }
    // adjugate · det^{-1}
    let dinv = mod_inverse(d, k);
    let mut inv = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<Vec<i64>> = (0..n)
                .filter(|&r| r != j)
                .map(|r| (0..n).filter(|&c| c != i).map(|c| a[r][c]).collect())
                .collect();
            let c = linalg::det(&minor).ok()?.rem_euclid(k as i128) as i64;
            let s = if (i + j) % 2 == 0 { c } else { (k - c) % k };
            inv[i][j] = s * dinv % k;
        }
    }
    Some(inv)
}

/// A quasitoric ring with its orientation fixed.
#[derive(Debug, Clone)]
pub struct OrientedRing {
    pub ring: RingPresentation,
    /// +1 or −1: top coordinate of the orientation-vertex product.
    pub orientation: i64,
    pub orientation_vertex: Vec<usize>,
}

impl OrientedRing {
    pub fn new(lambda: &CharMatrix) -> Result<Self> {
        let ring = RingPresentation::quasitoric(lambda)?;
        ring.assert_torsion_free()?;
        let orientation_vertex = RingPresentation::orientation_vertex(lambda.polytope());
        let s = ring.vertex_product(&orientation_vertex)?;
        if s != 1 && s != -1 {
            return Err(Error::Invariant(format!("vertex product is {s}, not a generator")));
        }
        Ok(Self { ring, orientation: s, orientation_vertex })
    }

    /// ⟨x, [M]⟩ for a top-degree polynomial.
    pub fn pairing(&self, poly: &HomPoly) -> Result<i64> {
        if poly.degree != self.ring.top() {
            return Err(Error::Inhomogeneous(self.ring.top()));
        }
        Ok(self.ring.view(self.ring.top(), None)?.coords(&poly.coeffs)[0] * self.orientation)
    }

    /// Pairing of every top-degree monomial in the generators.
    pub fn pairing_table(&self) -> Result<BTreeMap<Exponent, i64>> {
        let t = self.ring.table();
        t.monomials(self.ring.top())
            .iter()
            .map(|e| Ok((e.clone(), self.pairing(&t.monomial(e))?)))
            .collect()
    }

    /// Matrix of the pairing A^d × A^{top−d} → Z on the monomial bases.
    pub fn duality_matrix(&self, d: usize) -> Result<Vec<Vec<i64>>> {
        let r = &self.ring;
        let bases = r.monomial_bases()?;
        let basis = |deg: usize| {
            bases[deg].as_ref().map(|(m, _)| m.clone()).ok_or_else(|| Error::Invariant(format!("no monomial basis in degree {deg}")))
        };
        let lo = basis(d)?;
        let hi = basis(r.top() - d)?;
        lo.iter()
            .map(|a| {
                hi.iter()
                    .map(|b| {
                        let e: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                        self.pairing(&r.table().monomial(&e))
                    })
                    .collect()
            })
            .collect()
    }
}

/// Total Stiefel–Whitney and Pontrjagin classes as per-degree normal forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharClasses {
    /// `w[d]`: component of polynomial degree d, coordinates mod 2.
    pub w: Vec<Vec<i64>>,
    /// `p[d]`: component of polynomial degree d (nonzero only for even d).
    pub p: Vec<Vec<i64>>,
}

/// Graded components of Π_i (1 + c·ℓ_i^e) truncated at degree `top`.
fn graded_product(t: &MonomialTable, forms: &[Vec<i64>], e: usize, c: i64, top: usize) -> Result<Vec<HomPoly>> {
    let mut comps: Vec<HomPoly> = (0..=top).map(|d| HomPoly { degree: d, coeffs: vec![0; t.count(d)] }).collect();
    comps[0].coeffs[0] = 1;
    for l in forms {
        let mut next = comps.clone();
        for d in e..=top {
            let mut term = comps[d - e].clone();
            for _ in 0..e {
                term = t.mul_linear(&term, l)?;
            }
            next[d] = next[d].add(&term.scale(c))?;
        }
        comps = next;
    }
    Ok(comps)
}

pub fn char_classes(lambda: &CharMatrix) -> Result<CharClasses> {
    let r = RingPresentation::quasitoric(lambda)?;
    let forms: Vec<Vec<i64>> = (1..=lambda.m()).map(|i| r.facet_form(i)).collect();
    let t = r.table();
    let w_polys = graded_product(t, &forms, 1, 1, r.top())?;
    let r2 = r.reduce_mod(2)?;
    let w = w_polys.iter().map(|p| r2.normal_form(p)).collect::<Result<Vec<_>>>()?;
    let p_polys = graded_product(t, &forms, 2, -1, r.top())?;
    let p = p_polys.iter().map(|q| r.normal_form(q)).collect::<Result<Vec<_>>>()?;
    Ok(CharClasses { w, p })
}

/// Small covers: w from the mod-2 presentation, p = 1.
pub fn char_classes_real(lambda: &RealCharMatrix) -> Result<CharClasses> {
    let r = RingPresentation::small_cover(lambda)?;
    let forms: Vec<Vec<i64>> = (1..=lambda.m()).map(|i| r.facet_form(i)).collect();
    let w_polys = graded_product(r.table(), &forms, 1, 1, r.top())?;
    let w = w_polys.iter().map(|p| r.normal_form(p)).collect::<Result<Vec<_>>>()?;
    let p = (0..=r.top())
        .map(|d| {
            let len = r.view(d, None).map(|v| v.len()).unwrap_or(0);
            (0..len).map(|i| (d == 0 && i == 0) as i64).collect()
        })
        .collect();
    Ok(CharClasses { w, p })
}

#[derive(Serialize, Deserialize)]
struct RingJson {
    g: usize,
    coeff: String,
    degrees: Vec<usize>,
    substitutions: Vec<Vec<i64>>,
    relations: Vec<RelationJson>,
}

#[derive(Serialize, Deserialize)]
struct RelationJson {
    factors: Vec<Vec<i64>>,
}

impl RingPresentation {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&RingJson {
            g: self.g,
            coeff: self.coeff.to_string(),
            degrees: vec![self.generator_degree; self.g],
            substitutions: self.substitutions.clone(),
            relations: self.relations.iter().map(|r| RelationJson { factors: r.factors.clone() }).collect(),
        })
        .expect("ring serialization")
    }

    /// Rebuilds a presentation from JSON; `n` is the number of substitutions
    /// and generators are labelled `n+1..n+g`.
    pub fn from_json(s: &str) -> Result<Self> {
        let j: RingJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let coeff = match j.coeff.as_str() {
            "Z" => Coeff::Z,
            other => Coeff::Mod(
                other
                    .strip_prefix("Z/")
                    .and_then(|k| k.parse().ok())
                    .ok_or_else(|| Error::Parse(format!("bad coefficient ring {other}")))?,
            ),
        };
        let n = j.substitutions.len();
        if j.relations.iter().flat_map(|r| &r.factors).any(|f| f.len() != j.g)
            || j.substitutions.iter().any(|s| s.len() != j.g)
        {
            return Err(Error::Parse("linear forms must have g coefficients".into()));
        }
        let relations = j
            .relations
            .into_iter()
            .map(|r| Relation { facets: Vec::new(), factors: r.factors })
            .collect();
        let gdeg = j.degrees.first().copied().unwrap_or(2);
        Ok(Self::from_parts(
            n,
            coeff,
            gdeg,
            (1..=n).collect(),
            (n + 1..=n + j.g).collect(),
            j.substitutions,
            relations,
        ))
    }
}

impl fmt::Display for RingPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.generator_names();
        let rels: Vec<String> = self
            .relations
            .iter()
            .map(|r| {
                r.factors
                    .iter()
                    .map(|l| {
                        let p = HomPoly { degree: 1, coeffs: l.clone() };
                        let s = self.table.format(&p, &names);
                        if l.iter().filter(|&&x| x != 0).count() > 1 {
                            format!("({s})")
                        } else {
                            s
                        }
                    })
                    .collect::<Vec<_>>()
                    .join("")
            })
            .collect();
        write!(f, "{}[{}]/({})", self.coeff, names.join(","), rels.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c36(tail: &[Vec<i64>]) -> CharMatrix {
        let p = Arc::new(CombinatorialPolytope::dual_cyclic(3, 6).unwrap());
        CharMatrix::from_tail(p, tail).unwrap()
    }

    #[test]
    fn cpn_ring() {
        let p = Arc::new(CombinatorialPolytope::simplex(3).unwrap());
        let l = CharMatrix::from_tail(p, &[vec![-1], vec![-1], vec![-1]]).unwrap();
        let r = OrientedRing::new(&l).unwrap();
        assert_eq!(r.ring.betti().unwrap(), vec![1, 1, 1, 1]);
        assert_eq!(r.pairing(&r.ring.table().monomial(&[3])).unwrap().abs(), 1);
    }

    #[test]
    fn a_d_degree_two_basis() {
        let l = c36(&[vec![0, 0, 1], vec![1, 1, 3], vec![1, 0, 1]]);
        let r = RingPresentation::quasitoric(&l).unwrap();
        let b = r.graded_basis(2).unwrap();
        assert_eq!(b.rank, 3);
        let monos = b.monomials.unwrap();
        assert_eq!(monos, vec![vec![1, 0, 1], vec![0, 1, 1], vec![0, 0, 2]]);
    }

    #[test]
    fn inverse_mod_small() {
        let a = vec![vec![1, 2], vec![3, 4]];
        let inv = inverse_mod(&a, 5).unwrap();
        let prod = linalg::mat_mul(&a, &inv);
        assert_eq!(prod.iter().map(|r| r.iter().map(|x| x % 5).collect::<Vec<_>>()).collect::<Vec<_>>(), vec![vec![1, 0], vec![0, 1]]);
        assert!(inverse_mod(&[vec![2, 0], vec![0, 1]], 4).is_none());
    }
}
