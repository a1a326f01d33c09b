//! Connected sums of characteristic matrices: splitting along a missing face
//! whose minor is a unit, gluing two matrices at a vertex, and the normal
//! forms obtained by decomposing everything over polygons and C^3(m)*.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::charmat::{self, CharMatrix, RealCharMatrix};
use crate::cohomology::{inverse_mod, OrientedRing, RingPresentation};
use crate::error::{Error, Result};
use crate::linalg;
use crate::polytope::{mask_of, CombinatorialPolytope};

/// Operations shared by integer and mod-2 characteristic matrices.
pub trait Characteristic: Sized + Clone {
    fn polytope_arc(&self) -> &Arc<CombinatorialPolytope>;
    fn int_entries(&self) -> Vec<Vec<i64>>;
    /// Builds and validates a matrix of this kind.
    fn build(p: Arc<CombinatorialPolytope>, entries: Vec<Vec<i64>>) -> Result<Self>;
    /// Whether the columns at `facets` form a basis.
    fn unit_minor(&self, facets: &[usize]) -> Result<bool>;
    /// `A·e` for the row transform making `from` equal `to` (both `n × n`).
    fn align(e: &[Vec<i64>], from: &[Vec<i64>], to: &[Vec<i64>]) -> Result<Vec<Vec<i64>>>;
}

fn cols_at(e: &[Vec<i64>], facets: &[usize]) -> Vec<Vec<i64>> {
    e.iter().map(|r| facets.iter().map(|&j| r[j - 1]).collect()).collect()
}

impl Characteristic for CharMatrix {
    fn polytope_arc(&self) -> &Arc<CombinatorialPolytope> {
        CharMatrix::polytope_arc(self)
    }
    fn int_entries(&self) -> Vec<Vec<i64>> {
        self.entries().to_vec()
    }
    fn build(p: Arc<CombinatorialPolytope>, entries: Vec<Vec<i64>>) -> Result<Self> {
        CharMatrix::new(p, entries)
    }
    fn unit_minor(&self, facets: &[usize]) -> Result<bool> {
        Ok(self.minor(facets)?.abs() == 1)
    }
    fn align(e: &[Vec<i64>], from: &[Vec<i64>], to: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
        let a = linalg::mat_mul(to, &linalg::inverse_unimodular(from)?);
        Ok(linalg::mat_mul(&a, e))
    }
}

impl Characteristic for RealCharMatrix {
    fn polytope_arc(&self) -> &Arc<CombinatorialPolytope> {
        RealCharMatrix::polytope_arc(self)
    }
    fn int_entries(&self) -> Vec<Vec<i64>> {
        self.entries()
    }
    fn build(p: Arc<CombinatorialPolytope>, entries: Vec<Vec<i64>>) -> Result<Self> {
        RealCharMatrix::from_entries(p, &entries)
    }
    fn unit_minor(&self, facets: &[usize]) -> Result<bool> {
        let cols = self.columns();
        Ok(linalg::det_gf2(&facets.iter().map(|&j| cols[j - 1]).collect::<Vec<_>>()))
    }
    fn align(e: &[Vec<i64>], from: &[Vec<i64>], to: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
        let inv = inverse_mod(from, 2).ok_or(Error::NotUnimodular)?;
        let a = linalg::mat_mul(to, &inv);
        Ok(linalg::mat_mul(&a, e).into_iter().map(|r| r.into_iter().map(|x| x.rem_euclid(2)).collect()).collect())
    }
}

/// One side of a split: the matrix on the piece polytope, and the original
/// facet label of each of its columns.
#[derive(Debug, Clone)]
pub struct Piece<M> {
    pub matrix: M,
    pub labels: Vec<usize>,
}

/// A single connected-sum junction.
#[derive(Debug, Clone)]
pub struct SumDecomposition<M> {
    /// The missing face along which the matrix was cut (original labels).
    pub shared: Vec<usize>,
    pub pieces: [Piece<M>; 2],
}

/// Splits λ along `shared`, which must be an `n`-element missing face whose
/// minor is a unit and whose complement falls into two components.
pub fn split<M: Characteristic>(lambda: &M, shared: &[usize]) -> Result<SumDecomposition<M>> {
    if !lambda.unit_minor(shared)? {
        return Err(Error::ConnectedSum(format!("minor at {shared:?} is not a unit")));
    }
    let ps = lambda.polytope_arc().split_at(shared)?;
    let e = lambda.int_entries();
    let [a, b] = ps.pieces;
    let piece = |sp: crate::polytope::SplitPiece| -> Result<Piece<M>> {
        let matrix = M::build(Arc::new(sp.polytope), cols_at(&e, &sp.labels))?;
        Ok(Piece { matrix, labels: sp.labels })
    };
    Ok(SumDecomposition { shared: ps.shared, pieces: [piece(a)?, piece(b)?] })
}

/// λ′ #_τ λ″ glued at vertex `v` of the first polytope and `w` of the second,
/// `tau[k]` being the facet of `w` identified with `v[k]`. The second matrix
/// is first moved by a row transform so the shared columns coincide.
/// Facets of the first polytope keep their labels; the rest of the second
/// follow in increasing order.
pub fn connected_sum<M: Characteristic>(first: &M, second: &M, v: &[usize], w: &[usize], tau: &[usize]) -> Result<M> {
    let p = first.polytope_arc();
    let q = second.polytope_arc();
    let (glued, qmap) = p.connected_sum(q, v, w, tau)?;
    let e1 = first.int_entries();
    let e2 = second.int_entries();
    if !first.unit_minor(v)? || !second.unit_minor(tau)? {
        return Err(Error::ConnectedSum("gluing vertex minors must be units".into()));
    }
    let e2 = M::align(&e2, &cols_at(&e2, tau), &cols_at(&e1, v))?;
    if cols_at(&e2, tau) != cols_at(&e1, v) {
        return Err(Error::ConnectedSum("shared columns disagree under τ".into()));
    }
    let n = p.n();
    let mut e = vec![vec![0i64; glued.m()]; n];
    for i in 0..n {
        e[i][..p.m()].copy_from_slice(&e1[i]);
        for (j, &target) in qmap.iter().enumerate() {
            e[i][target - 1] = e2[i][j];
        }
    }
    M::build(Arc::new(glued), e)
}

fn check_c3(p: &CombinatorialPolytope) -> Result<()> {
    if p.n() != 3 || p.m() < 4 || !p.same_combinatorics(&CombinatorialPolytope::dual_cyclic(3, p.m())?) {
        return Err(Error::InvalidPolytope(format!("{} is not C^3(m)*", p.label())));
    }
    Ok(())
}

/// Whether ⟨1,k,m⟩ is a unit, for 2 < k < m−1 on C^3(m)*.
pub fn decomposable_c3<M: Characteristic>(lambda: &M, k: usize) -> Result<bool> {
    let p = lambda.polytope_arc();
    check_c3(p)?;
    let m = p.m();
    if k <= 2 || k + 1 >= m {
        return Err(Error::OutOfRange { k, lo: 3, hi: m.saturating_sub(2) });
    }
    lambda.unit_minor(&[1, k, m])
}

/// Least k with ⟨1,k,m⟩ a unit, if any.
pub fn first_junction_c3<M: Characteristic>(lambda: &M) -> Result<Option<usize>> {
    let m = lambda.polytope_arc().m();
    for k in 3..m.saturating_sub(1) {
        if decomposable_c3(lambda, k)? {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// Whether every vertex minor except along the C^3(m)* junctions fails; i.e.
/// λ is indecomposable.
pub fn indecomposable_c3<M: Characteristic>(lambda: &M) -> Result<bool> {
    Ok(first_junction_c3(lambda)?.is_none())
}

/// Pairs {i, j} of non-adjacent polygon edges with a unit minor.
pub fn polygon_junctions<M: Characteristic>(lambda: &M) -> Result<Vec<[usize; 2]>> {
    let p = lambda.polytope_arc();
    let mut out = Vec::new();
    for i in 1..=p.m() {
        for j in i + 1..=p.m() {
            if !p.is_face_mask(mask_of(&[i, j])) && lambda.unit_minor(&[i, j])? {
                out.push([i, j]);
            }
        }
    }
    Ok(out)
}

/// Splits a polygon matrix until every piece is a triangle or an
/// indecomposable square. `choose` picks which junction to cut among the
/// admissible ones (index into the list).
pub fn decompose_polygon<M: Characteristic>(lambda: &M, choose: &mut impl FnMut(usize) -> usize) -> Result<Vec<M>> {
    let p = lambda.polytope_arc();
    if p.n() != 2 {
        return Err(Error::Dimension(p.n()));
    }
    let js = polygon_junctions(lambda)?;
    if js.is_empty() {
        if p.m() > 4 {
            return Err(Error::Invariant(format!("{}-gon matrix admits no split", p.m())));
        }
        return Ok(vec![lambda.clone()]);
    }
    let cut = js[choose(js.len()) % js.len()];
    let d = split(lambda, &cut)?;
    let mut out = Vec::new();
    for piece in d.pieces {
        out.extend(decompose_polygon(&piece.matrix, choose)?);
    }
    Ok(out)
}

/// Recursively splits a C^3(m)* matrix at the first admissible junction.
/// Pieces are returned on standard C^3(k)* polytopes.
pub fn decompose_c3<M: Characteristic>(lambda: &M) -> Result<Vec<M>> {
    let Some(k) = first_junction_c3(lambda)? else {
        return Ok(vec![lambda.clone()]);
    };
    let m = lambda.polytope_arc().m();
    let d = split(lambda, &[1, k, m])?;
    let mut out = Vec::new();
    for piece in d.pieces {
        let std = Arc::new(CombinatorialPolytope::dual_cyclic(3, piece.labels.len())?);
        if !std.same_combinatorics(piece.matrix.polytope_arc()) {
            return Err(Error::Invariant(format!("piece {:?} is not a dual cyclic polytope", piece.labels)));
        }
        let rebased = M::build(std, piece.matrix.int_entries())?;
        out.extend(decompose_c3(&rebased)?);
    }
    Ok(out)
}

/// Normal forms of the manifolds obtained from the classifications.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NormalForm {
    /// Connected sum of g copies of S^2×S^2.
    S2xS2(usize),
    /// i copies of CP^2 and j of its conjugate, normalized to i ≥ j.
    Cp { i: usize, j: usize },
    /// Connected sum of k tori.
    Torus(usize),
    /// Connected sum of k real projective planes.
    Rp2(usize),
    /// a copies of RP^3 and b of RP^1×RP^2.
    C3 { rp3: usize, rp1_rp2: usize },
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormalForm::S2xS2(g) => write!(f, "S2xS2#{g}"),
            NormalForm::Cp { i, j } => write!(f, "CP2#{i}+CPbar2#{j}"),
            NormalForm::Torus(k) => write!(f, "T2#{k}"),
            NormalForm::Rp2(k) => write!(f, "RP2#{k}"),
            NormalForm::C3 { rp3, rp1_rp2 } => write!(f, "RP3#{rp3} + RP1xRP2#{rp1_rp2}"),
        }
    }
}

/// Signature of a nondegenerate symmetric integer matrix, by congruence
/// diagonalization over Q carried out with integer row/column operations.
pub fn signature(q: &[Vec<i64>]) -> Result<i64> {
    let n = q.len();
    let mut a: Vec<Vec<i128>> = q.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let ovf = || Error::Overflow("signature");
    let mut sig = 0i64;
    for k in 0..n {
        if a[k][k] == 0 {
            if let Some(j) = (k + 1..n).find(|&j| a[j][j] != 0) {
                a.swap(k, j);
                for r in a.iter_mut() {
                    r.swap(k, j);
                }
            } else if let Some(j) = (k + 1..n).find(|&j| a[k][j] != 0) {
                // row/col k += row/col j makes the pivot 2·a[k][j]
                for c in 0..n {
                    a[k][c] += a[j][c];
                }
                for r in a.iter_mut() {
                    r[k] += r[j];
                }
            } else {
                return Err(Error::Invariant("degenerate form".into()));
            }
        }
        let p = a[k][k];
        for i in k + 1..n {
            let b = a[i][k];
            if b == 0 {
                continue;
            }
            for c in 0..n {
                a[i][c] = p.checked_mul(a[i][c]).and_then(|x| x.checked_sub(b * a[k][c])).ok_or_else(ovf)?;
            }
            for r in a.iter_mut() {
                r[i] = p.checked_mul(r[i]).and_then(|x| x.checked_sub(b * r[k])).ok_or_else(ovf)?;
            }
            // dividing row and column i by g keeps the inertia, provided g² | a_ii
            let mut g = a[i].iter().fold(0i128, |acc, &x| num_integer::gcd(acc, x));
            while g > 1 && a[i][i] % (g * g) != 0 {
                g = num_integer::gcd(g, a[i][i] / g);
            }
            if g > 1 {
                for c in 0..n {
                    a[i][c] /= g;
                }
                for r in a.iter_mut() {
                    r[i] /= g;
                }
            }
        }
        sig += p.signum() as i64;
    }
    Ok(sig)
}

/// Intersection form on H^2 of a polygon quasitoric manifold, oriented so
/// that v_1·v_2 = ⟨1,2⟩[M] (the cyclic facet order fixes the orientation).
pub fn polygon_intersection_form(lambda: &CharMatrix) -> Result<Vec<Vec<i64>>> {
    if lambda.n() != 2 {
        return Err(Error::Dimension(lambda.n()));
    }
    let ring = RingPresentation::quasitoric(lambda)?;
    // v'_1 v'_2 = v_1 v_2: both base facets flip sign
    let c = ring.vertex_product(&[1, 2])?;
    let det = lambda.minor(&[1, 2])? as i64;
    let oriented = OrientedRing { ring, orientation: c * det, orientation_vertex: vec![1, 2] };
    oriented.duality_matrix(1)
}

fn cp_form(i: usize, j: usize) -> NormalForm {
    NormalForm::Cp { i: i.max(j), j: i.min(j) }
}

/// Normal form of one polygon quasitoric class (decomposition into
/// triangles and squares, then the two rewriting relations). The result is
/// checked against the rank, parity and signature of the whole form.
pub fn polygon_quasitoric_form(lambda: &CharMatrix, choose: &mut impl FnMut(usize) -> usize) -> Result<NormalForm> {
    let pieces = decompose_polygon(lambda, choose)?;
    let (mut s2, mut i, mut j) = (0usize, 0usize, 0usize);
    for piece in &pieces {
        let q = polygon_intersection_form(piece)?;
        let even = (0..q.len()).all(|a| q[a][a] % 2 == 0);
        let sig = signature(&q)?;
        match (piece.m(), even, sig) {
            (3, _, 1) => i += 1,
            (3, _, -1) => j += 1,
            (4, true, 0) => s2 += 1,
            (4, false, 0) => {
                i += 1;
                j += 1;
            }
            (4, false, 2) => i += 2,
            (4, false, -2) => j += 2,
            other => return Err(Error::Invariant(format!("unexpected piece invariants {other:?}"))),
        }
    }
    let form = if i + j == 0 {
        NormalForm::S2xS2(s2)
    } else {
        // CP^2 # (S^2×S^2) = CP^2 # CP^2 # CPbar^2 (and its conjugate)
        cp_form(i + s2, j + s2)
    };
    let whole = polygon_intersection_form(lambda)?;
    let even = (0..whole.len()).all(|a| whole[a][a] % 2 == 0);
    let sig = signature(&whole)?;
    let consistent = match form {
        NormalForm::S2xS2(g) => even && sig == 0 && 2 * g == whole.len(),
        NormalForm::Cp { i, j } => !even && sig.unsigned_abs() as usize == i - j && i + j == whole.len(),
        _ => false,
    };
    if !consistent {
        return Err(Error::Invariant(format!("normal form {form} disagrees with the intersection form")));
    }
    Ok(form)
}

/// Distinct homeomorphism normal forms over the m-gon among classes with
/// identity-form entries bounded by `bound`, with the number of classes
/// realizing each.
pub fn classify_polygon_quasitoric(m: usize, bound: i64) -> Result<BTreeMap<NormalForm, usize>> {
    let p = Arc::new(CombinatorialPolytope::polygon(m)?);
    let classes = charmat::enumerate_integer(&p, bound)?;
    let mut out = BTreeMap::new();
    for c in classes {
        *out.entry(polygon_quasitoric_form(&c.canonical, &mut |_| 0)?).or_insert(0) += 1;
    }
    Ok(out)
}

/// Normal form of one polygon small cover.
pub fn polygon_small_cover_form(lambda: &RealCharMatrix, choose: &mut impl FnMut(usize) -> usize) -> Result<NormalForm> {
    let pieces = decompose_polygon(lambda, choose)?;
    let (mut tori, mut rp2) = (0usize, 0usize);
    for piece in &pieces {
        match piece.m() {
            3 => rp2 += 1,
            // the only indecomposable square matrix is (I | I)
            4 => {
                let c = piece.canonical_form(&[])?.canonical;
                if c.tail() != vec![vec![1, 0], vec![0, 1]] {
                    return Err(Error::Invariant(format!("unexpected square piece\n{c}")));
                }
                tori += 1;
            }
            m => return Err(Error::Invariant(format!("undecomposed {m}-gon piece"))),
        }
    }
    let form = if rp2 == 0 { NormalForm::Torus(tori) } else { NormalForm::Rp2(rp2 + 2 * tori) };
    // Euler characteristic of a small cover over the m-gon is 4 − m
    let chi = 4 - lambda.m() as i64;
    let form_chi = match form {
        NormalForm::Torus(k) => 2 - 2 * k as i64,
        NormalForm::Rp2(k) => 2 - k as i64,
        _ => unreachable!(),
    };
    if chi != form_chi {
        return Err(Error::Invariant(format!("{form} has the wrong Euler characteristic")));
    }
    Ok(form)
}

pub fn classify_polygon_small_cover(m: usize) -> Result<BTreeMap<NormalForm, usize>> {
    let p = Arc::new(CombinatorialPolytope::polygon(m)?);
    let mut out = BTreeMap::new();
    for c in charmat::enumerate_real(&p)? {
        *out.entry(polygon_small_cover_form(&c.canonical, &mut |_| 0)?).or_insert(0) += 1;
    }
    Ok(out)
}

/// Pieces of a small cover over C^3(m)*: C^3(4)* ↦ RP^3 and the
/// indecomposable C^3(5)* matrices ↦ RP^1×RP^2.
pub fn c3_small_cover_form(lambda: &RealCharMatrix) -> Result<NormalForm> {
    let (mut rp3, mut rp1_rp2) = (0, 0);
    for piece in decompose_c3(lambda)? {
        match piece.m() {
            4 => rp3 += 1,
            5 => rp1_rp2 += 1,
            m => return Err(Error::Invariant(format!("indecomposable piece over C^3({m})*"))),
        }
    }
    Ok(NormalForm::C3 { rp3, rp1_rp2 })
}

pub fn classify_c3_small_cover(m: usize) -> Result<BTreeMap<NormalForm, usize>> {
    if !(4..=9).contains(&m) {
        return Err(Error::OutOfRange { k: m, lo: 4, hi: 9 });
    }
    let p = Arc::new(CombinatorialPolytope::dual_cyclic(3, m)?);
    let mut out = BTreeMap::new();
    for c in charmat::enumerate_real(&p)? {
        *out.entry(c3_small_cover_form(&c.canonical)?).or_insert(0) += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signature_of_hyperbolic_and_diagonal() {
        assert_eq!(signature(&[vec![0, 1], vec![1, 0]]).unwrap(), 0);
        assert_eq!(signature(&[vec![1, 0], vec![0, -1]]).unwrap(), 0);
        assert_eq!(signature(&[vec![2, 1], vec![1, 1]]).unwrap(), 2);
        assert_eq!(signature(&[vec![-1]]).unwrap(), -1);
    }

    #[test]
    fn triangles_glue_to_a_square() {
        let t = Arc::new(CombinatorialPolytope::polygon(3).unwrap());
        let a = RealCharMatrix::from_tail(t.clone(), &[vec![1], vec![1]]).unwrap();
        let sq = connected_sum(&a, &a, &[1, 2], &[1, 2], &[1, 2]).unwrap();
        assert_eq!(sq.m(), 4);
        // the glued facets 1, 2 no longer meet, and cutting there undoes the sum
        assert_eq!(polygon_junctions(&sq).unwrap(), vec![[1, 2]]);
        let d = split(&sq, &[1, 2]).unwrap();
        assert!(d.pieces.iter().all(|p| p.matrix.m() == 3));
        assert!(split(&sq, &[1, 3]).is_err());
    }
}
