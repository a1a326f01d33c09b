//! Reference data: the matrices, tables and orbit structure the library is
//! checked against. The raw files live in `data/` and are embedded at
//! compile time.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::charmat::{CharMatrix, RealCharMatrix};
use crate::error::{Error, Result};
use crate::poly::Exponent;
use crate::polytope::CombinatorialPolytope;

pub const C47_LIFTS: &str = include_str!("../data/c47_lifts.txt");
pub const C47_ORBITS: &str = include_str!("../data/c47_orbits.txt");
pub const C58_LIFTS: &str = include_str!("../data/c58_lifts.txt");
pub const TABLE1: &str = include_str!("../data/table1.txt");
pub const REAL: &str = include_str!("../data/real.txt");
pub const C36_INDECOMPOSABLE: &str = include_str!("../data/c36_indecomposable.txt");
pub const C58_AUTOMORPHISMS: &str = include_str!("../data/c58_automorphisms.txt");

fn data_lines(src: &str) -> impl Iterator<Item = &str> {
    src.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn ints(s: &str) -> Result<Vec<i64>> {
    s.split_whitespace()
        .map(|x| x.parse().map_err(|_| Error::Parse(format!("bad integer {x:?}"))))
        .collect()
}

/// `a b c / d e f / ...` → rows.
fn slashed_rows(s: &str) -> Result<Vec<Vec<i64>>> {
    s.split('/').map(ints).collect()
}

fn polytope(n: usize, m: usize) -> Arc<CombinatorialPolytope> {
    Arc::new(CombinatorialPolytope::dual_cyclic(n, m).expect("valid dual cyclic parameters"))
}

/// Tail blocks of the 28 lifts on C^4(7)*, index `k-1`.
pub fn c47_lift_tails() -> Vec<Vec<Vec<i64>>> {
    data_lines(C47_LIFTS)
        .map(|l| {
            let v = ints(l).expect("embedded lift table");
            let (p, q, x, y, s, t, m, n) = (v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]);
            vec![vec![1, p, q], vec![x, y, 1], vec![1, s, t], vec![m, n, 1]]
        })
        .collect()
}

/// λ_k on C^4(7)*, k = 1..28.
pub fn c47_lift(k: usize) -> Result<CharMatrix> {
    let tails = c47_lift_tails();
    let tail = tails.get(k.wrapping_sub(1)).ok_or(Error::OutOfRange { k, lo: 1, hi: 28 })?;
    CharMatrix::from_tail(polytope(4, 7), tail)
}

pub fn c47_lifts() -> Result<Vec<CharMatrix>> {
    (1..=28).map(c47_lift).collect()
}

/// σ-cycles of the lifts on C^4(7)*, as lift indices in cycle order.
pub fn c47_sigma_cycles() -> Vec<Vec<usize>> {
    data_lines(C47_ORBITS)
        .map(|l| l.split_whitespace().map(|x| x.parse().expect("embedded orbit table")).collect())
        .collect()
}

/// Indices of the representatives of the four classes on C^4(7)*, in
/// Table 1 order (A, B, C, D).
pub const C47_REPRESENTATIVES: [usize; 4] = [9, 17, 16, 15];

/// (λ_k; a, b) on C^5(8)*.
pub fn c58_lift(k: usize, a: i64, b: i64) -> Result<CharMatrix> {
    let tails = c47_lift_tails();
    let lower = tails.get(k.wrapping_sub(1)).ok_or(Error::OutOfRange { k, lo: 1, hi: 28 })?;
    let mut tail = vec![vec![a, b, 1]];
    tail.extend(lower.iter().cloned());
    CharMatrix::from_tail(polytope(5, 8), &tail)
}

/// The σ-orbits of the 64 lifts on C^5(8)*, each a list of (k, a, b).
pub fn c58_orbits() -> Vec<Vec<(usize, i64, i64)>> {
    data_lines(C58_LIFTS)
        .map(|l| {
            l.split('|')
                .map(|part| {
                    let v = ints(part).expect("embedded lift table");
                    (v[0] as usize, v[1], v[2])
                })
                .collect()
        })
        .collect()
}

pub fn c58_lifts() -> Vec<(usize, i64, i64)> {
    let mut all: Vec<_> = c58_orbits().into_iter().flatten().collect();
    all.sort();
    all
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table1Row {
    pub name: String,
    /// Index of the lift on C^4(7)* whose ring this row describes.
    pub lift: usize,
    pub values: BTreeMap<Exponent, i64>,
}

/// Table 1: pairings of the top monomials in X, Y, Z = v5, v6, v7.
pub fn table1() -> Vec<Table1Row> {
    let mut lines = data_lines(TABLE1);
    let header: Vec<Exponent> = lines
        .next()
        .expect("table header")
        .split_whitespace()
        .skip(1)
        .map(|e| e.bytes().map(|b| b - b'0').collect())
        .collect();
    lines
        .map(|l| {
            let mut it = l.split_whitespace();
            let name = it.next().expect("row name").to_string();
            let lift = it.next().and_then(|x| x.parse().ok()).expect("lift index");
            let vals: Vec<i64> = it.map(|x| x.parse().expect("table entry")).collect();
            Table1Row { name, lift, values: header.iter().cloned().zip(vals).collect() }
        })
        .collect()
}

/// A named real characteristic matrix from the reference set.
pub fn real_matrix(name: &str) -> Result<RealCharMatrix> {
    for l in data_lines(REAL) {
        let mut it = l.splitn(4, ' ');
        let (Some(key), Some(n), Some(m), Some(rest)) = (it.next(), it.next(), it.next(), it.next()) else {
            continue;
        };
        if key != name {
            continue;
        }
        let n: usize = n.parse().map_err(|_| Error::Parse(n.into()))?;
        let m: usize = m.parse().map_err(|_| Error::Parse(m.into()))?;
        let p = if n == 2 {
            Arc::new(CombinatorialPolytope::polygon(m)?)
        } else {
            polytope(n, m)
        };
        return RealCharMatrix::from_tail(p, &slashed_rows(rest)?);
    }
    Err(Error::Parse(format!("no reference matrix named {name:?}")))
}

/// The indecomposable list on C^3(6)*; the one-parameter family is expanded
/// for `|d| <= d_bound` (d ≤ −2 or d ≥ 3). Names are `l1`, `l1'`, …, `ld[3]`.
pub fn c36_indecomposable(d_bound: i64) -> Result<Vec<(String, CharMatrix)>> {
    let p = polytope(3, 6);
    let mut out = Vec::new();
    for l in data_lines(C36_INDECOMPOSABLE) {
        let (name, rest) = l.split_once(' ').unwrap_or((l, ""));
        if name == "sigma" || name == "tau" {
            continue;
        }
        if name == "ld" {
            for d in (-d_bound..=-2).chain(3..=d_bound) {
                let rows = slashed_rows(&rest.replace('d', &d.to_string()))?;
                out.push((format!("ld[{d}]"), CharMatrix::from_tail(p.clone(), &rows)?));
            }
        } else {
            out.push((name.to_string(), CharMatrix::from_tail(p.clone(), &slashed_rows(rest)?)?));
        }
    }
    Ok(out)
}

/// Pairs of named C^3(6)* matrices exchanged by σ (reversal) or τ = (1 6).
/// The family λ_d ↔ λ_{1−d} under σ is implicit.
pub fn c36_moves() -> Vec<(String, String, String)> {
    data_lines(C36_INDECOMPOSABLE)
        .filter_map(|l| {
            let v: Vec<&str> = l.split_whitespace().collect();
            matches!(v[0], "sigma" | "tau").then(|| (v[0].to_string(), v[1].to_string(), v[2].to_string()))
        })
        .collect()
}

/// The reference matrix defining an isomorphism between the rings of λ'_1 and λ'''_2.
pub fn c36_certificate() -> Vec<Vec<i64>> {
    vec![vec![1, 1, 0], vec![0, -1, 0], vec![0, 1, 1]]
}

/// Named ring automorphisms on C^5(8)* (row i = image of generator i).
pub fn c58_automorphisms() -> BTreeMap<String, Vec<Vec<i64>>> {
    data_lines(C58_AUTOMORPHISMS)
        .filter(|l| !l.starts_with("map"))
        .map(|l| {
            let (name, rest) = l.split_once(' ').expect("named matrix");
            (name.to_string(), slashed_rows(rest).expect("embedded automorphism"))
        })
        .collect()
}

/// (source k, target k, automorphism name), all with a = b = 0.
pub fn c58_degree_three_maps() -> Vec<(usize, usize, String)> {
    data_lines(C58_AUTOMORPHISMS)
        .filter_map(|l| l.strip_prefix("map "))
        .map(|l| {
            let v: Vec<&str> = l.split_whitespace().collect();
            (v[0].parse().expect("source"), v[1].parse().expect("target"), v[2].to_string())
        })
        .collect()
}

/// Hirzebruch-type matrix λ_k on the square: tail ((1, k), (0, 1)).
pub fn p4_lambda(k: i64) -> Result<CharMatrix> {
    CharMatrix::from_tail(Arc::new(CombinatorialPolytope::polygon(4)?), &[vec![1, k], vec![0, 1]])
}

/// λ′ on the square: tail ((1, 2), (1, 1)).
pub fn p4_lambda_prime() -> Result<CharMatrix> {
    CharMatrix::from_tail(Arc::new(CombinatorialPolytope::polygon(4)?), &[vec![1, 2], vec![1, 1]])
}

/// The 14 vertices of C^4(7)* as listed in the reference.
pub const C47_VERTICES: [[usize; 4]; 14] = [
    [1, 2, 3, 4],
    [1, 2, 3, 7],
    [1, 2, 4, 5],
    [1, 2, 5, 6],
    [1, 2, 6, 7],
    [1, 3, 4, 7],
    [1, 4, 5, 7],
    [1, 5, 6, 7],
    [2, 3, 4, 5],
    [2, 3, 5, 6],
    [2, 3, 6, 7],
    [3, 4, 5, 6],
    [3, 4, 6, 7],
    [4, 5, 6, 7],
];
