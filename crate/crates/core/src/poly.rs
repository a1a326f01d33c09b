//! Dense homogeneous polynomials in `g` variables.
//!
//! Monomials of each degree are listed in descending lexicographic order of
//! exponent vectors (so `x_1^d` comes first). Every polynomial the library
//! builds is a product of linear forms, so the only primitive needed is
//! "multiply by a linear form".

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

pub type Exponent = Vec<u8>;

#[derive(Debug, Clone)]
pub struct MonomialTable {
    g: usize,
    monomials: Vec<Vec<Exponent>>,
    index: Vec<HashMap<Exponent, usize>>,
    /// `times_var[d][i][v]`: index in degree d+1 of monomial i times x_v.
    times_var: Vec<Vec<Vec<usize>>>,
}

fn exponents(g: usize, d: usize) -> Vec<Exponent> {
    let mut out = Vec::new();
    let mut cur = vec![0u8; g];
    fn rec(i: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Exponent>) {
        let g = cur.len();
        if i + 1 == g {
            cur[i] = left as u8;
            out.push(cur.clone());
            return;
        }
        for e in (0..=left).rev() {
            cur[i] = e as u8;
            rec(i + 1, left - e, cur, out);
        }
    }
    if g == 0 {
        if d == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(0, d, &mut cur, &mut out);
    out
}

impl MonomialTable {
    pub fn new(g: usize, max_degree: usize) -> Self {
        let monomials: Vec<Vec<Exponent>> = (0..=max_degree).map(|d| exponents(g, d)).collect();
        let index: Vec<HashMap<Exponent, usize>> = monomials
            .iter()
            .map(|ms| ms.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect())
            .collect();
        let mut times_var = Vec::with_capacity(max_degree);
        for d in 0..max_degree {
            let t = monomials[d]
                .iter()
                .map(|e| {
                    (0..g)
                        .map(|v| {
                            let mut f = e.clone();
                            f[v] += 1;
                            index[d + 1][&f]
                        })
                        .collect()
                })
                .collect();
            times_var.push(t);
        }
        Self { g, monomials, index, times_var }
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn max_degree(&self) -> usize {
        self.monomials.len() - 1
    }

    pub fn count(&self, d: usize) -> usize {
        self.monomials[d].len()
    }

    pub fn monomials(&self, d: usize) -> &[Exponent] {
        &self.monomials[d]
    }

    pub fn index_of(&self, e: &[u8]) -> Option<usize> {
        let d: usize = e.iter().map(|&x| x as usize).sum();
        self.index.get(d)?.get(e).copied()
    }

    pub fn one(&self) -> HomPoly {
        HomPoly { degree: 0, coeffs: vec![1] }
    }

    pub fn monomial(&self, e: &[u8]) -> HomPoly {
        let d: usize = e.iter().map(|&x| x as usize).sum();
        let mut coeffs = vec![0; self.count(d)];
        coeffs[self.index[d][e]] = 1;
        HomPoly { degree: d, coeffs }
    }

    /// `p · ℓ` for a linear form `ℓ` (coefficient vector of length g).
    pub fn mul_linear(&self, p: &HomPoly, l: &[i64]) -> Result<HomPoly> {
        let d = p.degree;
        if d >= self.max_degree() {
            return Err(Error::Inhomogeneous(d + 1));
        }
        let mut out = vec![0i64; self.count(d + 1)];
        for (i, &c) in p.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (v, &lv) in l.iter().enumerate() {
                if lv != 0 {
                    let t = &mut out[self.times_var[d][i][v]];
                    *t = c
                        .checked_mul(lv)
                        .and_then(|x| t.checked_add(x))
                        .ok_or(Error::Overflow("polynomial product"))?;
                }
            }
        }
        Ok(HomPoly { degree: d + 1, coeffs: out })
    }

    /// Same as [`mul_linear`](Self::mul_linear) with coefficients reduced mod k.
    pub fn mul_linear_mod(&self, p: &HomPoly, l: &[i64], k: i64) -> HomPoly {
        let d = p.degree;
        let mut out = vec![0i64; self.count(d + 1)];
        for (i, &c) in p.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (v, &lv) in l.iter().enumerate() {
                let lv = lv.rem_euclid(k);
                if lv != 0 {
                    let t = &mut out[self.times_var[d][i][v]];
                    *t = (*t + c.rem_euclid(k) * lv) % k;
                }
            }
        }
        HomPoly { degree: d + 1, coeffs: out }
    }

    pub fn product(&self, factors: &[Vec<i64>]) -> Result<HomPoly> {
        factors.iter().try_fold(self.one(), |acc, l| self.mul_linear(&acc, l))
    }

    pub fn product_mod(&self, factors: &[Vec<i64>], k: i64) -> HomPoly {
        factors.iter().fold(self.one(), |acc, l| self.mul_linear_mod(&acc, l, k))
    }

    /// `p · x^e` for a monomial exponent `e`.
    pub fn mul_monomial(&self, p: &HomPoly, e: &[u8]) -> Result<HomPoly> {
        let mut acc = p.clone();
        for (v, &k) in e.iter().enumerate() {
            let mut unit = vec![0i64; self.g];
            unit[v] = 1;
            for _ in 0..k {
                acc = self.mul_linear(&acc, &unit)?;
            }
        }
        Ok(acc)
    }

    pub fn format(&self, p: &HomPoly, names: &[String]) -> String {
        let mut terms = Vec::new();
        for (i, &c) in p.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let mono = format_monomial(&self.monomials[p.degree][i], names);
            terms.push(match (c, mono.is_empty()) {
                (_, true) => c.to_string(),
                (1, false) => mono,
                (-1, false) => format!("-{mono}"),
                _ => format!("{c}{mono}"),
            });
        }
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ").replace("+ -", "- ")
        }
    }
}

pub fn format_monomial(e: &[u8], names: &[String]) -> String {
    let mut s = String::new();
    for (v, &k) in e.iter().enumerate() {
        match k {
            0 => {}
            1 => s.push_str(&names[v]),
            _ => s.push_str(&format!("{}^{k}", names[v])),
        }
    }
    s
}

/// Default generator names: X, Y, Z when g ≤ 3, else v_{n+1}.. by index.
pub fn generator_names(g: usize, first_index: usize) -> Vec<String> {
    if g <= 3 {
        ["X", "Y", "Z"][..g].iter().map(|s| s.to_string()).collect()
    } else {
        (0..g).map(|i| format!("v{}", first_index + i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HomPoly {
    pub degree: usize,
    pub coeffs: Vec<i64>,
}

impl HomPoly {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.degree != other.degree {
            return Err(Error::Inhomogeneous(self.degree));
        }
        Ok(Self {
            degree: self.degree,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scale(&self, s: i64) -> Self {
        Self { degree: self.degree, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }
}

impl fmt::Display for HomPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "deg {} {:?}", self.degree, self.coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_counts() {
        let t = MonomialTable::new(3, 5);
        assert_eq!(t.count(4), 15);
        assert_eq!(t.monomials(2)[0], vec![2, 0, 0]);
        assert_eq!(t.monomials(2)[5], vec![0, 0, 2]);
    }

    #[test]
    fn binomial_square() {
        let t = MonomialTable::new(2, 2);
        let p = t.product(&[vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(p.coeffs, vec![1, 2, 1]);
        let names = generator_names(2, 1);
        assert_eq!(t.format(&p, &names), "X^2 + 2XY + Y^2");
    }
}
