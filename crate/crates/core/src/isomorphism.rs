//! Graded-ring isomorphism between cohomology presentations: verification of
//! an explicit generator substitution, complete searches over Z/k, bounded
//! certificate search over Z, characteristic-class checks and invariant
//! fingerprints for bulk pairwise distinction.
//!
//! A g×g matrix M acts on generators by x_i ↦ Σ_j M[i][j]·x′_j, so a linear
//! form ℓ (coefficient row) maps to ℓ·M.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::charmat::CharMatrix;
use crate::cohomology::{Coeff, QuotientView, RingPresentation};
use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::{Exponent, HomPoly};

pub type Matrix = Vec<Vec<i64>>;

pub const DEFAULT_MODULI: [i64; 7] = [2, 3, 4, 5, 8, 9, 16];
pub const DEFAULT_ISO_BOUND: i64 = 10;
/// Largest modulus the complete search accepts.
pub const MAX_MODULUS: i64 = 16;
/// Fingerprints enumerate all of (Z/k)^g; beyond this size the
/// element-counting ingredients are skipped.
const FINGERPRINT_LIMIT: u64 = 1 << 16;

/// Outcome of an isomorphism query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum IsoVerdict {
    /// An integral certificate (det ±1) that passes [`apply_iso_check`].
    Isomorphic { certificate: Matrix },
    /// An isomorphism of the reductions mod k; says nothing over Z.
    IsomorphicModK { k: i64, certificate: Matrix },
    /// A sound obstruction: no isomorphism exists over Z.
    DistinguishedBy { test: String, modulus: Option<i64>, witness: serde_json::Value },
    /// Nothing found within the bound; not a proof of anything.
    Inconclusive { bound: i64 },
}

impl IsoVerdict {
    pub fn is_distinguished(&self) -> bool {
        matches!(self, IsoVerdict::DistinguishedBy { .. })
    }

    pub fn modulus(&self) -> Option<i64> {
        match self {
            IsoVerdict::DistinguishedBy { modulus, .. } => *modulus,
            IsoVerdict::IsomorphicModK { k, .. } => Some(*k),
            _ => None,
        }
    }
}

/// ℓ·M.
pub fn image_form(l: &[i64], m: &[Vec<i64>]) -> Vec<i64> {
    let g = m.first().map_or(0, |r| r.len());
    (0..g).map(|j| l.iter().zip(m).map(|(a, row)| a * row[j]).sum()).collect()
}

fn check_shapes(r: &RingPresentation, r2: &RingPresentation, m: &[Vec<i64>]) -> Result<()> {
    let g = r.g();
    if r2.g() != g || r.top() != r2.top() {
        return Err(Error::Shape { expected_rows: g, expected_cols: r.top(), rows: r2.g(), cols: r2.top() });
    }
    if m.len() != g || m.iter().any(|row| row.len() != g) {
        return Err(Error::Shape { expected_rows: g, expected_cols: g, rows: m.len(), cols: m.first().map_or(0, |r| r.len()) });
    }
    Ok(())
}

fn unit_det(m: &[Vec<i64>], k: Option<i64>) -> Result<bool> {
    let d = linalg::det(m)?;
    Ok(match k {
        None => d.abs() == 1,
        Some(k) => num_integer::gcd(d.rem_euclid(k as i128) as i64, k) == 1,
    })
}

fn modulus_of(r: &RingPresentation) -> Option<i64> {
    match r.coeff() {
        Coeff::Z => None,
        Coeff::Mod(k) => Some(k),
    }
}

/// Index of the first relation of `r` whose image under M is not in the
/// ideal of `r2` (over Z/k when `k` is given).
pub fn first_failing_relation(r: &RingPresentation, r2: &RingPresentation, m: &[Vec<i64>], k: Option<i64>) -> Result<Option<usize>> {
    let t = r2.table();
    for (idx, rel) in r.relations().iter().enumerate() {
        let factors: Vec<Vec<i64>> = rel.factors.iter().map(|f| image_form(f, m)).collect();
        let poly = match k.or(modulus_of(r2)) {
            Some(q) => t.product_mod(&factors, q),
            None => t.product(&factors)?,
        };
        if !r2.view(rel.degree(), k)?.is_zero(&poly.coeffs) {
            return Ok(Some(idx));
        }
    }
    Ok(None)
}

/// Whether x ↦ x·M carries every relation of `r` into the ideal of `r2`.
/// With equal ranks and M invertible this is exactly "M induces a graded
/// ring isomorphism". Restrict both rings first to test a partial ideal.
pub fn apply_iso_check(r: &RingPresentation, r2: &RingPresentation, m: &[Vec<i64>]) -> Result<bool> {
    check_shapes(r, r2, m)?;
    if !unit_det(m, modulus_of(r2))? {
        return Err(Error::NotUnimodular);
    }
    Ok(first_failing_relation(r, r2, m, None)?.is_none())
}

/// Whether the isomorphism M between the rings of λ and λ′ carries w_2 to w_2
/// (mod 2) and p_1 to p_1 (over Z).
pub fn char_class_preserved(m: &[Vec<i64>], lambda: &CharMatrix, lambda2: &CharMatrix) -> Result<bool> {
    let r = RingPresentation::quasitoric(lambda)?;
    let r2 = RingPresentation::quasitoric(lambda2)?;
    if !apply_iso_check(&r, &r2, m)? {
        return Err(Error::NotIsomorphism("relations are not preserved".into()));
    }
    let forms = |ring: &RingPresentation, lam: &CharMatrix| -> Vec<Vec<i64>> {
        (1..=lam.m()).map(|i| ring.facet_form(i)).collect()
    };
    let (f1, f2) = (forms(&r, lambda), forms(&r2, lambda2));
    let t = r2.table();
    // w_2 = Σ v_i, p_1 = −Σ v_i² (the sign of each v_i is irrelevant to both)
    let w = |fs: &[Vec<i64>]| -> Vec<i64> { (0..r2.g()).map(|j| fs.iter().map(|f| f[j]).sum()).collect() };
    let p = |fs: &[Vec<i64>]| -> Result<HomPoly> {
        let mut acc = HomPoly { degree: 2, coeffs: vec![0; t.count(2)] };
        for f in fs {
            acc = acc.add(&t.product(&[f.clone(), f.clone()])?.scale(-1))?;
        }
        Ok(acc)
    };
    let mapped: Vec<Vec<i64>> = f1.iter().map(|f| image_form(f, m)).collect();
    let dw: Vec<i64> = w(&mapped).iter().zip(w(&f2)).map(|(a, b)| a - b).collect();
    let dw_poly = t.mul_linear(&t.one(), &dw)?;
    let w_ok = r2.view(1, Some(2))?.is_zero(&dw_poly.coeffs);
    let dp = p(&mapped)?.add(&p(&f2)?.scale(-1))?;
    let p_ok = r2.view(2, None)?.is_zero(&dp.coeffs);
    Ok(w_ok && p_ok)
}

fn element_order(view: &QuotientView, coords: &[i64]) -> u64 {
    view.moduli.iter().zip(coords).fold(1u64, |acc, (&m, &c)| {
        let o = (m / num_integer::gcd(c, m)) as u64;
        num_integer::lcm(acc, o)
    })
}

/// Monomials of degree 1..=top grouped by their last nonzero generator.
fn monomials_by_last(r: &RingPresentation) -> Vec<Vec<(usize, Exponent)>> {
    let g = r.g();
    let mut out = vec![Vec::new(); g];
    for d in 1..=r.top() {
        for e in r.table().monomials(d) {
            if let Some(last) = (0..g).rev().find(|&i| e[i] > 0) {
                out[last].push((d, e.clone()));
            }
        }
    }
    out
}

fn factors_of(e: &[u8], rows: &[Vec<i64>]) -> Vec<Vec<i64>> {
    e.iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .flat_map(|(i, &c)| std::iter::repeat(rows[i].clone()).take(c as usize))
        .collect()
}

fn all_vectors(g: usize, p: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..g {
        out = out.into_iter().flat_map(|v| (0..p).map(move |x| [v.clone(), vec![x]].concat())).collect();
    }
    out
}

/// Row-by-row search for matrices mod q; rows are pruned by comparing the
/// additive order of every monomial in the rows fixed so far with the order
/// of its image.
struct ModSearch<'a> {
    src: &'a RingPresentation,
    tgt: &'a RingPresentation,
    q: i64,
    by_row: Vec<Vec<(usize, Exponent, u64)>>,
    tgt_views: Vec<QuotientView>,
    nodes: u64,
}

impl<'a> ModSearch<'a> {
    fn new(src: &'a RingPresentation, tgt: &'a RingPresentation, q: i64) -> Result<Self> {
        let src_views = src.views(Some(q))?;
        let tgt_views = tgt.views(Some(q))?;
        let t = src.table();
        let by_row = monomials_by_last(src)
            .into_iter()
            .map(|ms| {
                ms.into_iter()
                    .map(|(d, e)| {
                        let v = &src_views[d];
                        let poly = t.monomial(&e);
                        let c = v.coords(&poly.coeffs);
                        (d, e, element_order(v, &c))
                    })
                    .collect()
            })
            .collect();
        Ok(Self { src, tgt, q, by_row, tgt_views, nodes: 0 })
    }

    fn row_ok(&self, rows: &[Vec<i64>]) -> bool {
        let r = rows.len() - 1;
        let t = self.tgt.table();
        self.by_row[r].iter().all(|(d, e, ord)| {
            let poly = t.product_mod(&factors_of(e, rows), self.q);
            let v = &self.tgt_views[*d];
            element_order(v, &v.coords(&poly.coeffs)) == *ord
        })
    }

    /// All solutions whose row i is drawn from `cands(i)`.
    fn solutions(&mut self, cands: &dyn Fn(usize) -> Vec<Vec<i64>>) -> Result<Vec<Matrix>> {
        let mut out = Vec::new();
        let mut rows = Vec::new();
        self.dfs(&mut rows, cands, &mut out)?;
        Ok(out)
    }

    fn dfs(&mut self, rows: &mut Matrix, cands: &dyn Fn(usize) -> Vec<Vec<i64>>, out: &mut Vec<Matrix>) -> Result<()> {
        let g = self.src.g();
        if rows.len() == g {
            if unit_det(rows, Some(self.q))? && first_failing_relation(self.src, self.tgt, rows, Some(self.q))?.is_none() {
                out.push(rows.clone());
            }
            return Ok(());
        }
        for c in cands(rows.len()) {
            self.nodes += 1;
            rows.push(c);
            if self.row_ok(rows) {
                self.dfs(rows, cands, out)?;
            }
            rows.pop();
        }
        Ok(())
    }
}

fn prime_power_factors(k: i64) -> Vec<(i64, u32)> {
    let mut out = Vec::new();
    let mut n = k;
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Isomorphisms mod p^e, found by searching mod p and lifting one power of
/// p at a time (every solution mod p^{j+1} reduces to one mod p^j).
/// Returns the solutions found (all, or the first when `all` is false) and
/// the number of search nodes visited.
fn prime_power_search(src: &RingPresentation, tgt: &RingPresentation, p: i64, e: u32, all: bool) -> Result<(Vec<Matrix>, u64)> {
    let g = src.g();
    let mut levels = (1..=e).map(|j| ModSearch::new(src, tgt, p.pow(j))).collect::<Result<Vec<_>>>()?;
    let digits = all_vectors(g, p);
    let base = levels[0].solutions(&|_| digits.clone())?;
    let mut out = Vec::new();
    fn lift(levels: &mut [ModSearch], j: usize, m0: Matrix, p: i64, digits: &[Vec<i64>], all: bool, out: &mut Vec<Matrix>) -> Result<bool> {
        if j == levels.len() {
            out.push(m0);
            return Ok(!all);
        }
        let step = p.pow(j as u32);
        let q = levels[j].q;
        let cands = |r: usize| -> Vec<Vec<i64>> {
            digits.iter().map(|n| m0[r].iter().zip(n).map(|(a, b)| (a + step * b).rem_euclid(q)).collect()).collect()
        };
        let lifted = levels[j].solutions(&cands)?;
        for m1 in lifted {
            if lift(levels, j + 1, m1, p, digits, all, out)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
    for m0 in base {
        if lift(&mut levels, 1, m0, p, &digits, all, &mut out)? {
            break;
        }
    }
    let nodes = levels.iter().map(|l| l.nodes).sum();
    Ok((out, nodes))
}

fn check_modulus(k: i64) -> Result<()> {
    if !(2..=MAX_MODULUS).contains(&k) {
        return Err(Error::Modulus(k.max(0) as u64));
    }
    Ok(())
}

/// Every graded isomorphism of the reductions mod a prime power k (as
/// matrices with entries in 0..k).
pub fn isomorphisms_mod(src: &RingPresentation, tgt: &RingPresentation, k: i64) -> Result<Vec<Matrix>> {
    check_modulus(k)?;
    let f = prime_power_factors(k);
    let [(p, e)] = f[..] else {
        return Err(Error::Modulus(k as u64));
    };
    Ok(prime_power_search(src, tgt, p, e, true)?.0)
}

/// Complete search for a graded isomorphism of the reductions mod k. A
/// negative answer proves the integral rings non-isomorphic.
pub fn iso_over_zk(src: &RingPresentation, tgt: &RingPresentation, k: i64) -> Result<IsoVerdict> {
    check_modulus(k)?;
    let g = src.g();
    check_shapes(src, tgt, &vec![vec![0; g]; g])?;
    for d in 0..=src.top() {
        let (a, b) = (src.view(d, Some(k))?.order(), tgt.view(d, Some(k))?.order());
        if a != b {
            return Ok(IsoVerdict::DistinguishedBy {
                test: "group-order".into(),
                modulus: Some(k),
                witness: json!({ "degree": d, "orders": [a, b] }),
            });
        }
    }
    let mut parts = Vec::new();
    for (p, e) in prime_power_factors(k) {
        let (sols, nodes) = prime_power_search(src, tgt, p, e, false)?;
        let q = p.pow(e);
        match sols.into_iter().next() {
            Some(m) => parts.push((q, m)),
            None => {
                return Ok(IsoVerdict::DistinguishedBy {
                    test: "exhaustive".into(),
                    modulus: Some(k),
                    witness: json!({ "component": q, "nodes": nodes }),
                })
            }
        }
    }
    // Chinese remainder: combine the prime-power solutions
    let mut cert = vec![vec![0i64; g]; g];
    for (q, m) in &parts {
        let rest = k / q;
        let e = num_integer::Integer::extended_gcd(&rest, q);
        let unit = (rest * e.x.rem_euclid(*q)).rem_euclid(k);
        for i in 0..g {
            for j in 0..g {
                cert[i][j] = (cert[i][j] + m[i][j] * unit).rem_euclid(k);
            }
        }
    }
    Ok(IsoVerdict::IsomorphicModK { k, certificate: cert })
}

/// Integer vectors with entries in [−B, B] congruent to `res` mod 2, small
/// entries first.
fn lifts_of(res: &[i64], bound: i64) -> Vec<Vec<i64>> {
    let per: Vec<Vec<i64>> = res.iter().map(|&r| (-bound..=bound).filter(|x| x.rem_euclid(2) == r).collect()).collect();
    let mut out = vec![vec![]];
    for choices in per {
        out = out.into_iter().flat_map(|v| choices.iter().map(move |&x| [v.clone(), vec![x]].concat())).collect();
    }
    out.sort_by_key(|v| (v.iter().map(|x| x.abs()).sum::<i64>(), v.iter().map(|x| x.abs()).max(), v.clone()));
    out
}

struct ZSearch<'a> {
    src: &'a RingPresentation,
    tgt: &'a RingPresentation,
    /// (degree, monomial, zero in src, top pairing in src)
    by_row: Vec<Vec<(usize, Exponent, bool, Option<i64>)>>,
    tgt_views: Vec<QuotientView>,
    mod2: Vec<Matrix>,
    bound: i64,
    lift_cache: HashMap<Vec<i64>, Vec<Vec<i64>>>,
}

impl ZSearch<'_> {
    fn row_ok(&self, rows: &[Vec<i64>], eps: i64) -> Result<bool> {
        let r = rows.len() - 1;
        let t = self.tgt.table();
        for (d, e, zero, pair) in &self.by_row[r] {
            let poly = t.product(&factors_of(e, rows))?;
            let c = self.tgt_views[*d].coords(&poly.coeffs);
            let image_zero = c.iter().all(|&x| x == 0);
            if image_zero != *zero {
                return Ok(false);
            }
            if let Some(p) = pair {
                if c[0] != eps * p {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn dfs(&mut self, rows: &mut Matrix, eps: i64) -> Result<Option<Matrix>> {
        let g = self.src.g();
        if rows.len() == g {
            if unit_det(rows, None)? && first_failing_relation(self.src, self.tgt, rows, None)?.is_none() {
                return Ok(Some(rows.clone()));
            }
            return Ok(None);
        }
        let r = rows.len();
        let mut residues: Vec<Vec<i64>> = self
            .mod2
            .iter()
            .filter(|m| m[..r].iter().zip(rows.iter()).all(|(a, b)| a.iter().zip(b).all(|(x, y)| x.rem_euclid(2) == y.rem_euclid(2))))
            .map(|m| m[r].clone())
            .collect();
        residues.sort();
        residues.dedup();
        for res in residues {
            let bound = self.bound;
            let cands = self.lift_cache.entry(res.clone()).or_insert_with(|| lifts_of(&res, bound)).clone();
            for c in cands {
                rows.push(c);
                if self.row_ok(rows, eps)? {
                    if let Some(m) = self.dfs(rows, eps)? {
                        return Ok(Some(m));
                    }
                }
                rows.pop();
            }
        }
        Ok(None)
    }
}

/// Searches integer matrices with entries in [−B, B] that reduce mod 2 to a
/// mod-2 isomorphism. Finds a certificate or reports `Inconclusive(B)`;
/// a missing mod-2 isomorphism is reported as an obstruction.
pub fn iso_over_z_bounded(src: &RingPresentation, tgt: &RingPresentation, bound: i64) -> Result<IsoVerdict> {
    if bound < 1 {
        return Err(Error::Invariant(format!("search bound must be positive, got {bound}")));
    }
    if src.coeff() != Coeff::Z || tgt.coeff() != Coeff::Z {
        return Err(Error::Modulus(0));
    }
    let g = src.g();
    check_shapes(src, tgt, &vec![vec![0; g]; g])?;
    let mod2 = isomorphisms_mod(src, tgt, 2)?;
    if mod2.is_empty() {
        return Ok(IsoVerdict::DistinguishedBy { test: "exhaustive".into(), modulus: Some(2), witness: json!({ "component": 2 }) });
    }
    let top = src.top();
    let src_views = src.views(None)?;
    let tgt_views = tgt.views(None)?;
    let oriented = [&src_views[top], &tgt_views[top]].iter().all(|v| v.moduli == [0]);
    let t = src.table();
    let by_row = monomials_by_last(src)
        .into_iter()
        .map(|ms| {
            ms.into_iter()
                .map(|(d, e)| {
                    let c = src_views[d].coords(&t.monomial(&e).coeffs);
                    let zero = c.iter().all(|&x| x == 0);
                    let pair = (d == top && oriented).then(|| c[0]);
                    (d, e, zero, pair)
                })
                .collect()
        })
        .collect();
    let mut search = ZSearch { src, tgt, by_row, tgt_views, mod2, bound, lift_cache: HashMap::new() };
    for eps in [1, -1] {
        if let Some(m) = search.dfs(&mut Vec::new(), eps)? {
            return Ok(IsoVerdict::Isomorphic { certificate: m });
        }
        if !oriented {
            break;
        }
    }
    Ok(IsoVerdict::Inconclusive { bound })
}

/// Invariants of the reduction mod k.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModFingerprint {
    pub k: i64,
    /// |A^d ⊗ Z/k| per degree.
    pub orders: Vec<Option<u64>>,
    /// Number of degree-one classes x with x² = 0.
    pub square_zero: Option<u64>,
    /// Number with x^top = 0 (x^n for a 2n-manifold).
    pub power_zero: Option<u64>,
    /// Multiset of ⟨x^top, [M]⟩ mod k, normalized over the sign of [M].
    pub top_values: Option<Vec<(i64, u64)>>,
}

/// Isomorphism invariants of a ring: unequal fingerprints prove two rings
/// non-isomorphic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fingerprint {
    /// Elementary divisors (0 = free) of each degree over the coefficients.
    pub groups: Vec<Vec<i64>>,
    pub moduli: Vec<ModFingerprint>,
    /// Integral cubic-form invariants (6-manifolds with b₂ = 3 only).
    pub cubic: Option<CubicInvariants>,
}

impl Fingerprint {
    pub fn at(&self, k: i64) -> Option<&ModFingerprint> {
        self.moduli.iter().find(|f| f.k == k)
    }
}

fn mod_fingerprint(r: &RingPresentation, k: i64) -> Result<ModFingerprint> {
    let views = r.views(Some(k))?;
    let orders = views.iter().map(|v| v.order()).collect();
    let g = r.g();
    let top = r.top();
    let size = (k as u64).checked_pow(g as u32).unwrap_or(u64::MAX);
    if size > FINGERPRINT_LIMIT || top < 2 {
        return Ok(ModFingerprint { k, orders, square_zero: None, power_zero: None, top_values: None });
    }
    let t = r.table();
    let (mut sq, mut pw) = (0u64, 0u64);
    let mut values: BTreeMap<i64, u64> = BTreeMap::new();
    let top_view = &views[top];
    let rank_one = top_view.len() == 1;
    for x in all_vectors(g, k) {
        let mut p = t.mul_linear_mod(&t.one(), &x, k);
        for d in 2..=top {
            p = t.mul_linear_mod(&p, &x, k);
            if d == 2 && views[2].is_zero(&p.coeffs) {
                sq += 1;
            }
        }
        let c = top_view.coords(&p.coeffs);
        if c.iter().all(|&v| v == 0) {
            pw += 1;
        }
        if rank_one {
            *values.entry(c[0]).or_insert(0) += 1;
        }
    }
    let top_values = rank_one.then(|| {
        let m = top_view.moduli[0];
        let plus: Vec<(i64, u64)> = values.iter().map(|(&v, &c)| (v, c)).collect();
        let mut minus: Vec<(i64, u64)> = values.iter().map(|(&v, &c)| ((-v).rem_euclid(m), c)).collect();
        minus.sort();
        plus.min(minus)
    });
    Ok(ModFingerprint { k, orders, square_zero: Some(sq), power_zero: Some(pw), top_values })
}

pub fn fingerprint(r: &RingPresentation, moduli: &[i64]) -> Result<Fingerprint> {
    let groups = r.views(None)?.into_iter().map(|v| v.moduli).collect();
    let moduli = moduli.iter().map(|&k| mod_fingerprint(r, k)).collect::<Result<Vec<_>>>()?;
    Ok(Fingerprint { groups, moduli, cubic: cubic_invariants(r)? })
}

/// A ternary cubic as a coefficient map over monomials x^a y^b z^c.
pub type Cubic = BTreeMap<[u8; 3], i128>;

fn cubic_mul(p: &Cubic, q: &Cubic) -> Result<Cubic> {
    let mut out = Cubic::new();
    for (e, a) in p {
        for (f, b) in q {
            let m = [e[0] + f[0], e[1] + f[1], e[2] + f[2]];
            let v = a.checked_mul(*b).ok_or(Error::Overflow("cubic form arithmetic"))?;
            let slot = out.entry(m).or_insert(0);
            *slot = slot.checked_add(v).ok_or(Error::Overflow("cubic form arithmetic"))?;
        }
    }
    out.retain(|_, v| *v != 0);
    Ok(out)
}

fn cubic_add(p: &Cubic, q: &Cubic, sign: i128) -> Result<Cubic> {
    let mut out = p.clone();
    for (e, b) in q {
        let slot = out.entry(*e).or_insert(0);
        *slot = slot.checked_add(sign * b).ok_or(Error::Overflow("cubic form arithmetic"))?;
    }
    out.retain(|_, v| *v != 0);
    Ok(out)
}

fn second_partial(p: &Cubic, i: usize, j: usize) -> Cubic {
    let mut out = Cubic::new();
    for (e, c) in p {
        let mut e = *e;
        let mut c = *c;
        for v in [i, j] {
            if e[v] == 0 {
                c = 0;
                break;
            }
            c *= e[v] as i128;
            e[v] -= 1;
        }
        if c != 0 {
            *out.entry(e).or_insert(0) += c;
        }
    }
    out
}

/// det(∂_i∂_j p).
fn hessian(p: &Cubic) -> Result<Cubic> {
    let h: Vec<Vec<Cubic>> = (0..3).map(|i| (0..3).map(|j| second_partial(p, i, j)).collect()).collect();
    let mut det = Cubic::new();
    for (perm, sign) in [([0, 1, 2], 1), ([1, 2, 0], 1), ([2, 0, 1], 1), ([0, 2, 1], -1), ([2, 1, 0], -1), ([1, 0, 2], -1)] {
        let term = cubic_mul(&cubic_mul(&h[0][perm[0]], &h[1][perm[1]])?, &h[2][perm[2]])?;
        det = cubic_add(&det, &term, sign)?;
    }
    Ok(det)
}

fn reduced(n: i128, d: i128) -> (i128, i128) {
    let g = num_integer::Integer::gcd(&n, &d).max(1);
    let s = if d < 0 { -1 } else { 1 };
    (s * n / g, s * d / g)
}

/// Exact integral invariants of the cubic form x ↦ ⟨x³, [M]⟩ of a 6-manifold
/// with b₂ = 3. With H the Hessian, H(H) = α·F + β·H; α and β are unchanged
/// by GL₃(Z) substitutions and by the sign of [M], so rings with different
/// (α, β) are not isomorphic over Z.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CubicInvariants {
    /// α and β as reduced fractions (numerator, denominator).
    Pencil { alpha: (i128, i128), beta: (i128, i128) },
    /// H = γ·F.
    Proportional { gamma: (i128, i128) },
    HessianZero,
}

pub fn cubic_form(r: &RingPresentation) -> Result<Option<Cubic>> {
    if r.coeff() != Coeff::Z || r.g() != 3 || r.top() != 3 {
        return Ok(None);
    }
    let view = r.view(3, None)?;
    if view.moduli != [0] {
        return Ok(None);
    }
    let t = r.table();
    let mut f = Cubic::new();
    for e in t.monomials(3) {
        // coefficient of x^e in (Σ x_i X_i)³ is 3!/e! · ⟨X^e, [M]⟩
        let multinomial = 6 / e.iter().map(|&a| [1, 1, 2, 6][a as usize]).product::<i128>();
        let v = multinomial * view.coords(&t.monomial(e).coeffs)[0] as i128;
        if v != 0 {
            f.insert([e[0], e[1], e[2]], v);
        }
    }
    Ok(Some(f))
}

pub fn cubic_invariants(r: &RingPresentation) -> Result<Option<CubicInvariants>> {
    cubic_form(r)?.map(|f| form_invariants(&f)).transpose()
}

/// Hessian-pencil invariants of a nonzero ternary cubic.
pub fn form_invariants(f: &Cubic) -> Result<CubicInvariants> {
    if f.is_empty() {
        return Err(Error::Invariant("zero cubic form".into()));
    }
    let h = hessian(f)?;
    if h.is_empty() {
        return Ok(CubicInvariants::HessianZero);
    }
    let keys: Vec<[u8; 3]> = f.keys().chain(h.keys()).copied().collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let at = |p: &Cubic, e: &[u8; 3]| p.get(e).copied().unwrap_or(0);
    let f = f.clone();
    // H = γF?
    let (e0, f0) = f.iter().next().map(|(e, v)| (*e, *v)).expect("nonzero form");
    let gamma = reduced(at(&h, &e0), f0);
    if keys.iter().all(|e| at(&h, e) * gamma.1 == at(&f, e) * gamma.0) {
        return Ok(CubicInvariants::Proportional { gamma });
    }
    let hh = hessian(&h)?;
    for (i, a) in keys.iter().enumerate() {
        for b in &keys[i + 1..] {
            let det = at(&f, a) * at(&h, b) - at(&f, b) * at(&h, a);
            if det == 0 {
                continue;
            }
            let an = at(&hh, a) * at(&h, b) - at(&hh, b) * at(&h, a);
            let bn = at(&f, a) * at(&hh, b) - at(&f, b) * at(&hh, a);
            let fits = keys.iter().chain(hh.keys()).all(|e| at(&hh, e) * det == an * at(&f, e) + bn * at(&h, e));
            if !fits {
                return Err(Error::Invariant("Hessian of the Hessian left the syzygetic pencil".into()));
            }
            return Ok(CubicInvariants::Pencil { alpha: reduced(an, det), beta: reduced(bn, det) });
        }
    }
    Err(Error::Invariant("Hessian pencil is degenerate".into()))
}

/// Which tests `distinguish_all` runs.
#[derive(Debug, Clone)]
pub struct Battery {
    /// Modulus ladder, tried in order.
    pub moduli: Vec<i64>,
    /// Entry bound of the integral certificate search.
    pub iso_bound: i64,
    pub fingerprints: bool,
}

impl Default for Battery {
    fn default() -> Self {
        Self { moduli: DEFAULT_MODULI.to_vec(), iso_bound: DEFAULT_ISO_BOUND, fingerprints: true }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PairVerdict {
    pub i: usize,
    pub j: usize,
    /// "iso", "distinct" or "unresolved".
    pub outcome: String,
    pub witness: serde_json::Value,
    #[serde(skip)]
    pub verdict: IsoVerdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistinctionReport {
    pub pairs: Vec<PairVerdict>,
    /// Classes of rings joined by integral certificates.
    pub classes: Vec<Vec<usize>>,
}

impl DistinctionReport {
    pub fn unresolved(&self) -> Vec<(usize, usize)> {
        self.pairs.iter().filter(|p| p.outcome == "unresolved").map(|p| (p.i, p.j)).collect()
    }

    /// Distinguishing modulus of each separated pair (None: integral ranks).
    pub fn separating_moduli(&self) -> BTreeMap<(usize, usize), Option<i64>> {
        self.pairs.iter().filter(|p| p.verdict.is_distinguished()).map(|p| ((p.i, p.j), p.verdict.modulus())).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// First ingredient in which two fingerprints at the same modulus differ.
fn fingerprint_difference(a: &ModFingerprint, b: &ModFingerprint) -> Option<serde_json::Value> {
    if a.orders != b.orders {
        return Some(json!({ "ingredient": "orders", "values": [a.orders, b.orders] }));
    }
    if a.square_zero != b.square_zero {
        return Some(json!({ "ingredient": "square-zero", "values": [a.square_zero, b.square_zero] }));
    }
    if a.power_zero != b.power_zero {
        return Some(json!({ "ingredient": "top-power-zero", "values": [a.power_zero, b.power_zero] }));
    }
    if a.top_values != b.top_values {
        return Some(json!({ "ingredient": "top-pairings", "values": [a.top_values, b.top_values] }));
    }
    None
}

/// Runs the battery on one pair: integral groups, then for each modulus of
/// the ladder the fingerprint and the complete mod-k search, then the
/// integral cubic-form invariants, and finally the bounded integral search
/// for a certificate.
pub fn compare(
    src: &RingPresentation,
    tgt: &RingPresentation,
    fps: Option<(&Fingerprint, &Fingerprint)>,
    battery: &Battery,
) -> Result<IsoVerdict> {
    if let Some((a, b)) = fps {
        if a.groups != b.groups {
            return Ok(IsoVerdict::DistinguishedBy {
                test: "integral-groups".into(),
                modulus: None,
                witness: json!({ "groups": [a.groups, b.groups] }),
            });
        }
    }
    for &k in &battery.moduli {
        if let Some((a, b)) = fps {
            if let (Some(fa), Some(fb)) = (a.at(k), b.at(k)) {
                if let Some(w) = fingerprint_difference(fa, fb) {
                    return Ok(IsoVerdict::DistinguishedBy { test: "fingerprint".into(), modulus: Some(k), witness: w });
                }
            }
        }
        let v = iso_over_zk(src, tgt, k)?;
        if v.is_distinguished() {
            return Ok(v);
        }
    }
    let cubic = match fps {
        Some((a, b)) => (a.cubic.clone(), b.cubic.clone()),
        None => (cubic_invariants(src)?, cubic_invariants(tgt)?),
    };
    if let (Some(a), Some(b)) = cubic {
        if a != b {
            return Ok(IsoVerdict::DistinguishedBy {
                test: "cubic-form".into(),
                modulus: None,
                witness: json!({ "invariants": [a, b] }),
            });
        }
    }
    if src.coeff() == Coeff::Z && tgt.coeff() == Coeff::Z {
        iso_over_z_bounded(src, tgt, battery.iso_bound)
    } else {
        Ok(IsoVerdict::Inconclusive { bound: 0 })
    }
}

/// Pairwise classification of a list of rings.
pub fn distinguish_all(rings: &[RingPresentation], battery: &Battery) -> Result<DistinctionReport> {
    let fps: Vec<Option<Fingerprint>> = rings
        .par_iter()
        .map(|r| battery.fingerprints.then(|| fingerprint(r, &battery.moduli)).transpose())
        .collect::<Result<_>>()?;
    let idx: Vec<(usize, usize)> = (0..rings.len()).flat_map(|i| (i + 1..rings.len()).map(move |j| (i, j))).collect();
    let pairs = idx
        .par_iter()
        .map(|&(i, j)| {
            let f = fps[i].as_ref().zip(fps[j].as_ref());
            let verdict = compare(&rings[i], &rings[j], f, battery)?;
            let (outcome, witness) = match &verdict {
                IsoVerdict::Isomorphic { certificate } => ("iso", json!({ "certificate": certificate })),
                IsoVerdict::DistinguishedBy { test, modulus, witness } => {
                    ("distinct", json!({ "test": test, "k": modulus, "detail": witness }))
                }
                IsoVerdict::Inconclusive { bound } => ("unresolved", json!({ "bound": bound })),
                IsoVerdict::IsomorphicModK { k, .. } => ("unresolved", json!({ "k": k })),
            };
            Ok(PairVerdict { i, j, outcome: outcome.into(), witness, verdict })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut parent: Vec<usize> = (0..rings.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for pv in pairs.iter().filter(|p| p.outcome == "iso") {
        let (a, b) = (find(&mut parent, pv.i), find(&mut parent, pv.j));
        parent[a.max(b)] = a.min(b);
    }
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..rings.len() {
        let root = find(&mut parent, i);
        classes.entry(root).or_default().push(i);
    }
    Ok(DistinctionReport { pairs, classes: classes.into_values().collect() })
}
