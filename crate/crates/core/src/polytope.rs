//! Combinatorial simple polytopes given by their vertex–facet incidence.
//!
//! A vertex is stored as the sorted n-set of facet labels meeting there
//! (labels are 1-based). Bitmasks use bit `i-1` for facet `i`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest facet count accepted by the exhaustive searches (faces, Aut).
pub const MAX_FACETS: usize = 12;

/// Largest facet count representable at all (bitmask width).
const HARD_MAX_FACETS: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CombinatorialPolytope {
    n: usize,
    m: usize,
    vertices: Vec<Vec<usize>>,
    masks: Vec<u32>,
    sorted_masks: Vec<u32>,
    label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceData {
    pub missing_faces: Vec<Vec<usize>>,
    pub f_vector: Vec<u64>,
    pub h_vector: Vec<i64>,
}

/// A bijection of `{1..m}`; `images[i-1]` is the image of facet `i`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FacetPermutation {
    images: Vec<usize>,
}

pub fn mask_of(set: &[usize]) -> u32 {
    set.iter().fold(0u32, |acc, &i| acc | 1 << (i - 1))
}

pub fn set_of(mask: u32) -> Vec<usize> {
    (0..32).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect()
}

/// Dual evenness predicate: every maximal run of consecutive labels that
/// touches neither 1 nor m has even length.
pub fn satisfies_dual_evenness(set: &[usize], m: usize) -> bool {
    let mut i = 0;
    while i < set.len() {
        let start = set[i];
        let mut j = i;
        while j + 1 < set.len() && set[j + 1] == set[j] + 1 {
            j += 1;
        }
        let end = set[j];
        let len = j - i + 1;
        if start != 1 && end != m && len % 2 == 1 {
            return false;
        }
        i = j + 1;
    }
    true
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..=m {
            if m - x + 1 < k - cur.len() {
                break;
            }
            cur.push(x);
            rec(x + 1, m, k, cur, out);
            cur.pop();
        }
    }
    rec(1, m, k, &mut cur, &mut out);
    out
}

impl CombinatorialPolytope {
    /// Builds a polytope from its vertex family, checking the invariants of a
    /// simple polytope boundary (pure, covering, pseudomanifold).
    pub fn new(n: usize, m: usize, vertices: Vec<Vec<usize>>, label: impl Into<String>) -> Result<Self> {
        if n == 0 || m <= n {
            return Err(Error::InvalidPolytope(format!("need 0 < n < m, got n={n}, m={m}")));
        }
        if m > HARD_MAX_FACETS {
            return Err(Error::SearchBound { m, bound: HARD_MAX_FACETS });
        }
        let mut vs: Vec<Vec<usize>> = vertices
            .into_iter()
            .map(|mut v| {
                v.sort_unstable();
                v
            })
            .collect();
        vs.sort();
        vs.dedup();
        let mut covered = 0u32;
        for v in &vs {
            if v.len() != n {
                return Err(Error::InvalidPolytope(format!("vertex {v:?} does not have {n} facets")));
            }
            if v.windows(2).any(|w| w[0] == w[1]) || v.iter().any(|&i| i == 0 || i > m) {
                return Err(Error::InvalidPolytope(format!("vertex {v:?} has bad labels")));
            }
            covered |= mask_of(v);
        }
        let all = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
        if covered != all {
            return Err(Error::InvalidPolytope("some facet meets no vertex".into()));
        }
        let masks: Vec<u32> = vs.iter().map(|v| mask_of(v)).collect();
        // pseudomanifold: each ridge lies in exactly two vertices
        let mut ridges: std::collections::HashMap<u32, u32> = std::collections::HashMap::new();
        for &vm in &masks {
            let mut bits = vm;
            while bits != 0 {
                let b = bits & bits.wrapping_neg();
                bits ^= b;
                *ridges.entry(vm ^ b).or_default() += 1;
            }
        }
        if let Some((r, c)) = ridges.iter().find(|(_, &c)| c != 2) {
            return Err(Error::InvalidPolytope(format!(
                "ridge {:?} lies in {c} vertices",
                set_of(*r)
            )));
        }
        let mut sorted_masks = masks.clone();
        sorted_masks.sort_unstable();
        Ok(Self { n, m, vertices: vs, masks, sorted_masks, label: label.into() })
    }

    /// C^n(m)^*, vertex family given by the dual evenness rule.
    pub fn dual_cyclic(n: usize, m: usize) -> Result<Self> {
        if n < 2 || m <= n {
            return Err(Error::InvalidPolytope(format!("dual cyclic needs n >= 2, m > n; got ({n},{m})")));
        }
        let vs: Vec<Vec<usize>> = combinations(m, n)
            .into_iter()
            .filter(|s| satisfies_dual_evenness(s, m))
            .collect();
        Self::new(n, m, vs, format!("C^{n}({m})*"))
    }

    /// The n-simplex: every n-subset of {1..n+1} is a vertex.
    pub fn simplex(n: usize) -> Result<Self> {
        Self::new(n, n + 1, combinations(n + 1, n), format!("Δ^{n}"))
    }

    /// The m-gon with vertices {i, i+1} taken cyclically.
    pub fn polygon(m: usize) -> Result<Self> {
        if m < 3 {
            return Err(Error::InvalidPolytope(format!("polygon needs m >= 3, got {m}")));
        }
        let vs = (1..=m).map(|i| if i < m { vec![i, i + 1] } else { vec![1, m] }).collect();
        Self::new(2, m, vs, format!("P_{m}"))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn vertices(&self) -> &[Vec<usize>] {
        &self.vertices
    }

    pub fn vertex_masks(&self) -> &[u32] {
        &self.masks
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn is_vertex(&self, set: &[usize]) -> bool {
        self.is_vertex_mask(mask_of(set))
    }

    pub fn is_vertex_mask(&self, mask: u32) -> bool {
        self.sorted_masks.binary_search(&mask).is_ok()
    }

    pub fn is_face_mask(&self, mask: u32) -> bool {
        self.masks.iter().any(|&v| v & mask == mask)
    }

    /// The lexicographically least vertex ({1..n} for dual cyclic polytopes).
    pub fn base_vertex(&self) -> &[usize] {
        &self.vertices[0]
    }

    /// True when both polytopes have the same dimension, facet count and
    /// vertex family (labels are ignored).
    pub fn same_combinatorics(&self, other: &Self) -> bool {
        self.n == other.n && self.m == other.m && self.vertices == other.vertices
    }

    fn require_searchable(&self) -> Result<()> {
        if self.m > MAX_FACETS {
            Err(Error::SearchBound { m: self.m, bound: MAX_FACETS })
        } else {
            Ok(())
        }
    }

    fn face_table(&self) -> Vec<bool> {
        let mut face = vec![false; 1usize << self.m];
        for &v in &self.masks {
            let mut sub = v;
            loop {
                face[sub as usize] = true;
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & v;
            }
        }
        face
    }

    /// Minimal non-faces of K_P, ordered by size then lexicographically.
    pub fn missing_faces(&self) -> Result<Vec<Vec<usize>>> {
        self.require_searchable()?;
        let face = self.face_table();
        let mut out: Vec<Vec<usize>> = (1u32..1 << self.m)
            .filter(|&s| {
                !face[s as usize] && {
                    let mut bits = s;
                    let mut ok = true;
                    while bits != 0 {
                        let b = bits & bits.wrapping_neg();
                        bits ^= b;
                        ok &= face[(s ^ b) as usize];
                    }
                    ok
                }
            })
            .map(set_of)
            .collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Ok(out)
    }

    pub fn fh_vectors(&self) -> Result<FaceData> {
        let missing_faces = self.missing_faces()?;
        let face = self.face_table();
        let n = self.n;
        let mut f_vector = vec![0u64; n];
        for s in 1u32..1 << self.m {
            if face[s as usize] {
                f_vector[s.count_ones() as usize - 1] += 1;
            }
        }
        Ok(FaceData { missing_faces, h_vector: h_from_f(&f_vector), f_vector })
    }

    /// All of Aut(K_P), by backtracking over facet images with vertex checks
    /// as soon as a vertex's facets are all assigned.
    pub fn automorphism_group(&self) -> Result<Vec<FacetPermutation>> {
        self.require_searchable()?;
        let m = self.m;
        let degree: Vec<usize> = (1..=m)
            .map(|i| self.masks.iter().filter(|&&v| v >> (i - 1) & 1 == 1).count())
            .collect();
        // vertices grouped by their largest facet
        let mut closing: Vec<Vec<u32>> = vec![Vec::new(); m + 1];
        for &v in &self.masks {
            closing[32 - v.leading_zeros() as usize].push(v);
        }
        let mut out = Vec::new();
        let mut images = vec![0usize; m];
        let mut used = 0u32;
        self.aut_rec(1, &degree, &closing, &mut images, &mut used, &mut out);
        out.sort();
        Ok(out)
    }

    fn aut_rec(
        &self,
        i: usize,
        degree: &[usize],
        closing: &[Vec<u32>],
        images: &mut Vec<usize>,
        used: &mut u32,
        out: &mut Vec<FacetPermutation>,
    ) {
        if i > self.m {
            out.push(FacetPermutation { images: images.clone() });
            return;
        }
        for j in 1..=self.m {
            if *used >> (j - 1) & 1 == 1 || degree[j - 1] != degree[i - 1] {
                continue;
            }
            images[i - 1] = j;
            let ok = closing[i].iter().all(|&v| {
                let img = set_of(v).iter().fold(0u32, |acc, &k| acc | 1 << (images[k - 1] - 1));
                self.is_vertex_mask(img)
            });
            if ok {
                *used |= 1 << (j - 1);
                self.aut_rec(i + 1, degree, closing, images, used, out);
                *used &= !(1 << (j - 1));
            }
        }
    }

    /// The polytope with facet `i` renamed to `perm(i)`.
    pub fn relabel(&self, perm: &FacetPermutation) -> Result<Self> {
        if perm.len() != self.m {
            return Err(Error::InvalidPolytope("permutation size differs from m".into()));
        }
        let vs = self.vertices.iter().map(|v| v.iter().map(|&i| perm.apply(i)).collect()).collect();
        Self::new(self.n, self.m, vs, self.label.clone())
    }

    pub fn is_automorphism(&self, perm: &FacetPermutation) -> bool {
        perm.len() == self.m
            && self.masks.iter().all(|&v| self.is_vertex_mask(perm.apply_mask(v)))
    }

    /// P #_τ Q glued at vertex `v` of P and `w` of Q, with `tau[k]` the facet
    /// of `w` identified with `v[k]`. P keeps its labels; the remaining facets
    /// of Q follow in increasing order. Returns the sum and the label map of Q.
    pub fn connected_sum(&self, q: &Self, v: &[usize], w: &[usize], tau: &[usize]) -> Result<(Self, Vec<usize>)> {
        if self.n != q.n {
            return Err(Error::ConnectedSum(format!("dimension mismatch {} vs {}", self.n, q.n)));
        }
        if !self.is_vertex(v) || !q.is_vertex(w) {
            return Err(Error::ConnectedSum("gluing sets must be vertices".into()));
        }
        let tau_set: BTreeSet<usize> = tau.iter().copied().collect();
        let w_set: BTreeSet<usize> = w.iter().copied().collect();
        if tau.len() != v.len() || tau_set != w_set {
            return Err(Error::ConnectedSum("τ is not a bijection v → w".into()));
        }
        let mut qmap = vec![0usize; q.m];
        for (k, &t) in tau.iter().enumerate() {
            qmap[t - 1] = v[k];
        }
        let mut next = self.m;
        for j in 1..=q.m {
            if !w_set.contains(&j) {
                next += 1;
                qmap[j - 1] = next;
            }
        }
        let vm = mask_of(v);
        let wm = mask_of(w);
        let mut vs: Vec<Vec<usize>> = self.vertices.iter().filter(|x| mask_of(x) != vm).cloned().collect();
        vs.extend(
            q.vertices
                .iter()
                .filter(|x| mask_of(x) != wm)
                .map(|x| x.iter().map(|&j| qmap[j - 1]).collect()),
        );
        let label = format!("{}#{}", self.label, q.label);
        Ok((Self::new(self.n, self.m + q.m - self.n, vs, label)?, qmap))
    }

    /// Splits P along an n-element missing face `shared`, the reverse of
    /// [`connected_sum`](Self::connected_sum). Fails unless the facets outside
    /// `shared` fall into exactly two adjacency components.
    pub fn split_at(&self, shared: &[usize]) -> Result<PolytopeSplit> {
        let sm = mask_of(shared);
        if shared.len() != self.n || self.is_face_mask(sm) {
            return Err(Error::ConnectedSum(format!("{shared:?} is not an n-element non-face")));
        }
        let outside: Vec<usize> = (1..=self.m).filter(|i| sm >> (i - 1) & 1 == 0).collect();
        // union-find over facets outside the shared set, joined through vertices
        let mut parent: Vec<usize> = (0..=self.m).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut c = x;
            while p[c] != r {
                let nx = p[c];
                p[c] = r;
                c = nx;
            }
            r
        }
        for v in &self.vertices {
            let out: Vec<usize> = v.iter().copied().filter(|i| sm >> (i - 1) & 1 == 0).collect();
            for w in out.windows(2) {
                let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                parent[a] = b;
            }
        }
        let mut comps: Vec<Vec<usize>> = Vec::new();
        let mut roots: Vec<usize> = Vec::new();
        for &i in &outside {
            let r = find(&mut parent, i);
            match roots.iter().position(|&x| x == r) {
                Some(k) => comps[k].push(i),
                None => {
                    roots.push(r);
                    comps.push(vec![i]);
                }
            }
        }
        if comps.len() != 2 {
            return Err(Error::ConnectedSum(format!(
                "complement of {shared:?} has {} components, need 2",
                comps.len()
            )));
        }
        let mut pieces = Vec::with_capacity(2);
        for comp in comps {
            let mut labels: Vec<usize> = comp.iter().copied().chain(shared.iter().copied()).collect();
            labels.sort_unstable();
            let pm = mask_of(&labels);
            let local = |i: usize| labels.iter().position(|&x| x == i).unwrap() + 1;
            let mut vs: Vec<Vec<usize>> = self
                .vertices
                .iter()
                .filter(|v| mask_of(v) & !pm == 0)
                .map(|v| v.iter().map(|&i| local(i)).collect())
                .collect();
            vs.push(shared.iter().map(|&i| local(i)).collect());
            let label = format!("{}|{}", self.label, labels.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
            let polytope = Self::new(self.n, labels.len(), vs, label)?;
            pieces.push(SplitPiece { polytope, labels });
        }
        let second = pieces.pop().unwrap();
        let first = pieces.pop().unwrap();
        Ok(PolytopeSplit { shared: shared.to_vec(), pieces: [first, second] })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&PolytopeJson {
            n: self.n,
            m: self.m,
            vertices: self.vertices.clone(),
            label: self.label.clone(),
        })
        .expect("polytope serialization")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: PolytopeJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(p.n, p.m, p.vertices, p.label)
    }
}

/// One side of a polytope split: the piece and, for each of its local facets
/// `1..`, the original facet label (`labels[i-1]`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPiece {
    pub polytope: CombinatorialPolytope,
    pub labels: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolytopeSplit {
    pub shared: Vec<usize>,
    pub pieces: [SplitPiece; 2],
}

#[derive(Serialize, Deserialize)]
struct PolytopeJson {
    n: usize,
    m: usize,
    vertices: Vec<Vec<usize>>,
    label: String,
}

impl Serialize for CombinatorialPolytope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolytopeJson { n: self.n, m: self.m, vertices: self.vertices.clone(), label: self.label.clone() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CombinatorialPolytope {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let p = PolytopeJson::deserialize(d)?;
        Self::new(p.n, p.m, p.vertices, p.label).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for CombinatorialPolytope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (n={}, m={}, {} vertices)", self.label, self.n, self.m, self.vertices.len())
    }
}

/// h-vector from f-vector via Σ h_i t^{n-i} = Σ_{i=0}^{n} f_{i-1} (t-1)^{n-i}.
pub fn h_from_f(f: &[u64]) -> Vec<i64> {
    let n = f.len();
    let mut h = vec![0i64; n + 1];
    for i in 0..=n {
        let fi = if i == 0 { 1 } else { f[i - 1] as i64 };
        let e = n - i;
        // (t-1)^e = Σ_k C(e,k) t^k (-1)^{e-k}; t^k contributes to h_{n-k}
        let mut c = 1i64;
        for k in 0..=e {
            let sign = if (e - k) % 2 == 0 { 1 } else { -1 };
            h[n - k] += fi * c * sign;
            c = c * (e - k) as i64 / (k + 1) as i64;
        }
    }
    h
}

impl FacetPermutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let m = images.len();
        let mut seen = vec![false; m + 1];
        for &x in &images {
            if x == 0 || x > m || seen[x] {
                return Err(Error::InvalidPolytope(format!("{images:?} is not a permutation")));
            }
            seen[x] = true;
        }
        Ok(Self { images })
    }

    pub fn identity(m: usize) -> Self {
        Self { images: (1..=m).collect() }
    }

    /// Builds a permutation of {1..m} from disjoint cycles.
    pub fn from_cycles(m: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut images: Vec<usize> = (1..=m).collect();
        for c in cycles {
            for k in 0..c.len() {
                let (a, b) = (c[k], c[(k + 1) % c.len()]);
                if a == 0 || a > m || b == 0 || b > m {
                    return Err(Error::OutOfRange { k: a.max(b), lo: 1, hi: m });
                }
                images[a - 1] = b;
            }
        }
        Self::new(images)
    }

    /// The reversal i ↦ m+1−i.
    pub fn reversal(m: usize) -> Self {
        Self { images: (1..=m).rev().collect() }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    pub fn apply_mask(&self, mask: u32) -> u32 {
        set_of(mask).iter().fold(0u32, |acc, &i| acc | 1 << (self.apply(i) - 1))
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self { images: other.images.iter().map(|&i| self.apply(i)).collect() }
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j - 1] = i + 1;
        }
        Self { images: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i + 1 == j)
    }

    /// The subgroup generated by `gens` (closure under composition).
    pub fn generate(m: usize, gens: &[Self]) -> Vec<Self> {
        let mut seen: BTreeSet<Self> = BTreeSet::new();
        let id = Self::identity(m);
        seen.insert(id.clone());
        let mut frontier = vec![id];
        while let Some(p) = frontier.pop() {
            for g in gens {
                let q = g.compose(&p);
                if seen.insert(q.clone()) {
                    frontier.push(q);
                }
            }
        }
        seen.into_iter().collect()
    }
}

impl fmt::Display for FacetPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let strs: Vec<String> = self.images.iter().map(|x| x.to_string()).collect();
        write!(f, "[{}]", strs.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h_vector_of_simplex_and_square() {
        assert_eq!(h_from_f(&[3, 3]), vec![1, 1, 1]);
        assert_eq!(h_from_f(&[4, 4]), vec![1, 2, 1]);
    }

    #[test]
    fn dual_evenness_small_cases() {
        assert!(satisfies_dual_evenness(&[1, 4, 5, 7], 7));
        assert!(!satisfies_dual_evenness(&[1, 3, 5, 7], 7));
        assert!(satisfies_dual_evenness(&[2, 3], 6));
        assert!(!satisfies_dual_evenness(&[2, 4], 6));
    }

    #[test]
    fn two_dimensional_dual_cyclic_is_polygon() {
        for m in 3..=9 {
            let a = CombinatorialPolytope::dual_cyclic(2, m).unwrap();
            let b = CombinatorialPolytope::polygon(m).unwrap();
            assert!(a.same_combinatorics(&b));
        }
    }

    #[test]
    fn minimal_dual_cyclic_is_simplex() {
        for n in 2..=6 {
            let a = CombinatorialPolytope::dual_cyclic(n, n + 1).unwrap();
            assert!(a.same_combinatorics(&CombinatorialPolytope::simplex(n).unwrap()));
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(CombinatorialPolytope::dual_cyclic(4, 4).is_err());
        assert!(CombinatorialPolytope::dual_cyclic(1, 4).is_err());
        assert!(CombinatorialPolytope::polygon(2).is_err());
        assert!(CombinatorialPolytope::new(2, 4, vec![vec![1, 2], vec![2, 3], vec![3, 4]], "x").is_err());
    }

    #[test]
    fn aut_rejects_large_m() {
        let p = CombinatorialPolytope::dual_cyclic(2, 13).unwrap();
        assert!(matches!(p.automorphism_group(), Err(Error::SearchBound { .. })));
    }

    #[test]
    fn permutation_algebra() {
        let s = FacetPermutation::from_cycles(5, &[&[1, 2, 3, 4, 5]]).unwrap();
        assert_eq!(s.compose(&s.inverse()), FacetPermutation::identity(5));
        assert_eq!(FacetPermutation::generate(5, &[s]).len(), 5);
    }
}
