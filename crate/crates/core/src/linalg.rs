//! Exact integer linear algebra at desk scale.
//!
//! Everything runs in checked `i128`; overflow surfaces as an error rather
//! than a wrong answer.

use num_integer::Integer;

use crate::error::{Error, Result};

/// Determinant by fraction-free (Bareiss) elimination.
pub fn det(a: &[Vec<i64>]) -> Result<i128> {
    let n = a.len();
    if n == 0 {
        return Ok(1);
    }
    let mut m: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&i| m[i][k] != 0) {
                Some(i) => {
                    m.swap(i, k);
                    sign = -sign;
                }
                None => return Ok(0),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = m[i][j]
                    .checked_mul(m[k][k])
                    .and_then(|x| m[i][k].checked_mul(m[k][j]).and_then(|y| x.checked_sub(y)))
                    .ok_or(Error::Overflow("determinant"))?;
                m[i][j] = v / prev;
            }
            m[i][k] = 0;
        }
        prev = m[k][k];
    }
    Ok(sign * m[n - 1][n - 1])
}

/// Determinant of a small matrix over Z/2 given as column bitmasks.
pub fn det_gf2(cols: &[u32]) -> bool {
    let n = cols.len();
    let mut c = cols.to_vec();
    for bit in 0..n {
        let Some(p) = (bit..n).find(|&i| c[i] >> bit & 1 == 1) else {
            return false;
        };
        c.swap(bit, p);
        let piv = c[bit];
        for (i, x) in c.iter_mut().enumerate() {
            if i != bit && *x >> bit & 1 == 1 {
                *x ^= piv;
            }
        }
    }
    true
}

/// Inverse of a square integer matrix with determinant ±1.
pub fn inverse_unimodular(a: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    let n = a.len();
    let d = det(a)?;
    if d != 1 && d != -1 {
        return Err(Error::NotUnimodular);
    }
    // Gauss–Jordan with exact division is safe: the inverse is integral.
    let mut m: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut inv: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i128).collect()).collect();
    // integer row reduction via Euclid steps keeps everything integral
    for col in 0..n {
        loop {
            let piv = (col..n)
                .filter(|&i| m[i][col] != 0)
                .min_by_key(|&i| m[i][col].abs())
                .ok_or(Error::NotUnimodular)?;
            m.swap(col, piv);
            inv.swap(col, piv);
            let mut done = true;
            for i in col + 1..n {
                let q = Integer::div_floor(&m[i][col], &m[col][col]);
                if q != 0 {
                    for j in 0..n {
                        m[i][j] -= q * m[col][j];
                        inv[i][j] -= q * inv[col][j];
                    }
                }
                if m[i][col] != 0 {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
    }
    for col in (0..n).rev() {
        let p = m[col][col];
        if p != 1 && p != -1 {
            return Err(Error::NotUnimodular);
        }
        if p == -1 {
            for j in 0..n {
                m[col][j] = -m[col][j];
                inv[col][j] = -inv[col][j];
            }
        }
        for i in 0..col {
            let q = m[i][col];
            if q != 0 {
                for j in 0..n {
                    m[i][j] -= q * m[col][j];
                    inv[i][j] -= q * inv[col][j];
                }
            }
        }
    }
    inv.into_iter()
        .map(|r| r.into_iter().map(|x| i64::try_from(x).map_err(|_| Error::Overflow("inverse"))).collect())
        .collect()
}

pub fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|r| (0..cols).map(|j| (0..inner).map(|k| r[k] * b[k][j]).sum()).collect())
        .collect()
}

/// Diagonal reduction `U·A·V = diag(d_1..d_r, 0..)` with `V` tracked.
///
/// Only column operations are recorded; the diagonal is not forced into
/// divisibility order (the quotient is `⊕ Z/d_i` either way).
#[derive(Debug, Clone)]
pub struct Diagonalization {
    /// Column transform, `cols × cols`, unimodular.
    pub v: Vec<Vec<i128>>,
    /// Nonzero diagonal entries (positive), in pivot order.
    pub diag: Vec<i128>,
}

impl Diagonalization {
    pub fn rank(&self) -> usize {
        self.diag.len()
    }
}

pub fn diagonalize(rows: &[Vec<i64>], cols: usize, track: bool) -> Result<Diagonalization> {
    let mut a: Vec<Vec<i128>> = rows
        .iter()
        .filter(|r| r.iter().any(|&x| x != 0))
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut v: Vec<Vec<i128>> = if track {
        (0..cols).map(|i| (0..cols).map(|j| (i == j) as i128).collect()).collect()
    } else {
        Vec::new()
    };
    let ovf = || Error::Overflow("diagonalization");
    let mut diag = Vec::new();
    let mut t = 0;
    while t < cols {
        // drop zero rows below t
        let mut k = t;
        while k < a.len() {
            if a[k][t..].iter().all(|&x| x == 0) {
                a.swap_remove(k);
            } else {
                k += 1;
            }
        }
        if t >= a.len() {
            break;
        }
        loop {
            // pivot: smallest nonzero |entry| in the remaining block
            let mut best: Option<(i128, usize, usize)> = None;
            for (i, row) in a.iter().enumerate().skip(t) {
                for (j, &x) in row.iter().enumerate().skip(t) {
                    if x != 0 && best.map_or(true, |(b, _, _)| x.abs() < b) {
                        best = Some((x.abs(), i, j));
                        if x.abs() == 1 {
                            break;
                        }
                    }
                }
                if best.is_some_and(|b| b.0 == 1) {
                    break;
                }
            }
            let (_, pi, pj) = best.expect("nonzero block");
            a.swap(t, pi);
            if pj != t {
                for row in a.iter_mut() {
                    row.swap(t, pj);
                }
                for row in v.iter_mut() {
                    row.swap(t, pj);
                }
            }
            let p = a[t][t];
            let mut clean = true;
            for i in t + 1..a.len() {
                let q = Integer::div_floor(&a[i][t], &p);
                if q != 0 {
                    for j in t..cols {
                        a[i][j] = a[i][j].checked_sub(q.checked_mul(a[t][j]).ok_or_else(ovf)?).ok_or_else(ovf)?;
                    }
                }
                clean &= a[i][t] == 0;
            }
            for j in t + 1..cols {
                let q = Integer::div_floor(&a[t][j], &p);
                if q != 0 {
                    for row in a.iter_mut() {
                        row[j] = row[j].checked_sub(q.checked_mul(row[t]).ok_or_else(ovf)?).ok_or_else(ovf)?;
                    }
                    for row in v.iter_mut() {
                        row[j] = row[j].checked_sub(q.checked_mul(row[t]).ok_or_else(ovf)?).ok_or_else(ovf)?;
                    }
                }
                clean &= a[t][j] == 0;
            }
            if clean {
                break;
            }
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    Ok(Diagonalization { v, diag })
}

/// Number of `y ∈ (Z/k)^r` with `y·A ≡ 0 (mod k)` for an `r × c` matrix `A`.
pub fn kernel_size_mod(a: &[Vec<i64>], r: usize, c: usize, k: i64) -> Result<u64> {
    let d = diagonalize(a, c, false)?;
    let mut size = 1u64;
    for i in 0..r {
        let s = d.diag.get(i).copied().unwrap_or(0);
        size *= (s as i64).gcd(&k) as u64;
    }
    Ok(size)
}

pub fn modp(x: i64, k: i64) -> i64 {
    x.rem_euclid(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_small() {
        assert_eq!(det(&[vec![2, 1], vec![1, 1]]).unwrap(), 1);
        assert_eq!(det(&[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 1]]).unwrap(), -1);
        assert_eq!(det(&[vec![1, 2], vec![2, 4]]).unwrap(), 0);
    }

    #[test]
    fn unimodular_inverse_roundtrip() {
        let a = vec![vec![1, 2, 2], vec![0, 1, 0], vec![0, -2, -1]];
        let inv = inverse_unimodular(&a).unwrap();
        let id = mat_mul(&a, &inv);
        assert_eq!(id, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert!(inverse_unimodular(&[vec![2, 0], vec![0, 1]]).is_err());
    }

    #[test]
    fn diagonal_detects_torsion() {
        let d = diagonalize(&[vec![2, 4], vec![6, 8]], 2, true).unwrap();
        let mut diag = d.diag.clone();
        diag.sort();
        assert_eq!(diag.iter().product::<i128>(), 8);
    }

    #[test]
    fn gf2_det() {
        assert!(det_gf2(&[0b01, 0b10]));
        assert!(!det_gf2(&[0b11, 0b11]));
        assert!(det_gf2(&[0b011, 0b110, 0b001]));
    }

    #[test]
    fn kernel_sizes() {
        // y ↦ 2y on Z/4 has kernel {0,2}
        assert_eq!(kernel_size_mod(&[vec![2]], 1, 1, 4).unwrap(), 2);
        assert_eq!(kernel_size_mod(&[vec![0]], 1, 1, 5).unwrap(), 5);
    }
}
