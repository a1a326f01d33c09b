use std::collections::BTreeSet;
use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use qtcyclic::charmat::{self, tail_columns};
use qtcyclic::{CharMatrix, CombinatorialPolytope, RealCharMatrix};

/// Fraction-free elimination.
fn det(mut a: Vec<Vec<i64>>) -> i64 {
    let n = a.len();
    let (mut sign, mut prev) = (1, 1);
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| a[i][k] != 0) else { return 0 };
        if p != k {
            a.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// Full n×m matrix with the identity at the base vertex and `tail` elsewhere.
fn extend(p: &CombinatorialPolytope, tail: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let tc = tail_columns(p);
    let mut e = vec![vec![0; p.m()]; p.n()];
    for (i, row) in e.iter_mut().enumerate() {
        row[p.base_vertex()[i] - 1] = 1;
        for (k, &j) in tc.iter().enumerate() {
            row[j - 1] = tail[i][k];
        }
    }
    e
}

fn all_minors(p: &CombinatorialPolytope, e: &[Vec<i64>], ok: impl Fn(i64) -> bool) -> bool {
    p.vertices().iter().all(|v| ok(det(e.iter().map(|r| v.iter().map(|&j| r[j - 1]).collect()).collect())))
}

/// Every n×(m−n) tail with entries in `values`.
fn tails(n: usize, t: usize, values: &[i64]) -> Vec<Vec<Vec<i64>>> {
    let cells = n * t;
    let mut out = Vec::new();
    let mut idx = vec![0usize; cells];
    loop {
        out.push((0..n).map(|i| (0..t).map(|k| values[idx[i * t + k]]).collect()).collect());
        let mut c = 0;
        while c < cells && idx[c] + 1 == values.len() {
            idx[c] = 0;
            c += 1;
        }
        if c == cells {
            return out;
        }
        idx[c] += 1;
    }
}

/// Least tail over row and tail-column sign changes: with the identity
/// fixed at the base vertex, these are the only GL×signs moves left.
fn sign_canonical(tail: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let (n, t) = (tail.len(), tail[0].len());
    let mut best: Option<Vec<Vec<i64>>> = None;
    for rs in 0u32..1 << n {
        for cs in 0u32..1 << t {
            let x: Vec<Vec<i64>> = (0..n)
                .map(|i| (0..t).map(|k| if (rs >> i ^ cs >> k) & 1 == 1 { -tail[i][k] } else { tail[i][k] }).collect())
                .collect();
            if best.as_ref().map_or(true, |b| x < *b) {
                best = Some(x);
            }
        }
    }
    best.unwrap()
}

#[test]
fn real_enumeration_matches_exhaustive_search() {
    for (n, m) in [(2, 5), (3, 6), (3, 7), (4, 7), (4, 8), (5, 8)] {
        let p = Arc::new(CombinatorialPolytope::dual_cyclic(n, m).unwrap());
        let want: BTreeSet<Vec<Vec<i64>>> = tails(n, m - n, &[0, 1])
            .into_iter()
            .filter(|t| all_minors(&p, &extend(&p, t), |d| d % 2 != 0))
            .collect();
        let got: BTreeSet<Vec<Vec<i64>>> = charmat::enumerate_real(&p).unwrap().into_iter().map(|c| c.canonical.tail()).collect();
        assert_eq!(got, want, "C^{n}({m})*");
    }
}

#[test]
fn integer_enumeration_matches_exhaustive_search() {
    for (n, m, bound) in [(2, 5, 2), (3, 6, 1), (3, 6, 2), (4, 7, 1)] {
        let p = Arc::new(CombinatorialPolytope::dual_cyclic(n, m).unwrap());
        let values: Vec<i64> = (-bound..=bound).collect();
        let want: BTreeSet<Vec<Vec<i64>>> = tails(n, m - n, &values)
            .into_iter()
            .filter(|t| all_minors(&p, &extend(&p, t), |d| d.abs() == 1))
            .map(|t| sign_canonical(&t))
            .collect();
        let got = charmat::enumerate_integer(&p, bound).unwrap();
        assert_eq!(got.len(), want.len(), "C^{n}({m})* at bound {bound}");
        for c in &got {
            let e = c.canonical.to_identity_form(p.base_vertex()).unwrap();
            assert!(want.contains(&sign_canonical(&e.tail())), "C^{n}({m})*: {:?}", e.tail());
        }
    }
}

#[test]
fn fibers_partition_the_integer_classes() {
    let p = Arc::new(CombinatorialPolytope::dual_cyclic(3, 6).unwrap());
    let all = charmat::enumerate_integer(&p, 2).unwrap();
    let mut total = 0;
    for real in charmat::enumerate_real(&p).unwrap() {
        let fiber = charmat::fiber_over(&real.canonical, 2).unwrap();
        for c in &fiber {
            let r = c.canonical.mod2_reduce().canonical_form(&[]).unwrap().canonical;
            assert_eq!(r, real.canonical);
        }
        total += fiber.len();
    }
    assert_eq!(total, all.len());
}

#[test]
fn real_lift_reduces_back() {
    for m in 4..=9 {
        let p = Arc::new(CombinatorialPolytope::dual_cyclic(3, m).unwrap());
        for real in charmat::enumerate_real(&p).unwrap() {
            let lift = real.canonical.lift_tilde().unwrap();
            assert!(all_minors(&p, lift.entries(), |d| d.abs() == 1));
            assert_eq!(lift.mod2_reduce(), real.canonical);
        }
    }
    let p = Arc::new(CombinatorialPolytope::dual_cyclic(4, 7).unwrap());
    let real = &charmat::enumerate_real(&p).unwrap()[0].canonical;
    assert!(matches!(real.lift_tilde(), Err(qtcyclic::Error::Dimension(4))));
}

#[test]
fn text_round_trip() {
    let p = Arc::new(CombinatorialPolytope::dual_cyclic(4, 7).unwrap());
    for c in charmat::enumerate_integer(&p, 1).unwrap().iter().take(20) {
        assert_eq!(CharMatrix::from_text(p.clone(), &c.canonical.to_text()).unwrap(), c.canonical);
        let r = c.canonical.mod2_reduce();
        assert_eq!(RealCharMatrix::from_text(p.clone(), &r.to_text()).unwrap(), r);
    }
}

fn unimodular(shears: &[(usize, usize, i64)], n: usize) -> Vec<Vec<i64>> {
    let mut a: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    for &(i, j, t) in shears {
        if i % n != j % n {
            let src = a[j % n].clone();
            for (x, s) in a[i % n].iter_mut().zip(src) {
                *x += t * s;
            }
        }
    }
    a
}

fn c47_classes() -> &'static [qtcyclic::EquivClass<CharMatrix>] {
    static CLASSES: OnceLock<Vec<qtcyclic::EquivClass<CharMatrix>>> = OnceLock::new();
    CLASSES.get_or_init(|| {
        let p = Arc::new(CombinatorialPolytope::dual_cyclic(4, 7).unwrap());
        charmat::enumerate_integer(&p, 1).unwrap()
    })
}

proptest! {
    #[test]
    fn canonical_form_is_invariant(
        class in 0usize..1000,
        shears in proptest::collection::vec((0usize..4, 0usize..4, -2i64..=2), 0..6),
        signs in proptest::collection::vec(proptest::bool::ANY, 7),
    ) {
        let classes = c47_classes();
        let c = &classes[class % classes.len()].canonical;
        let mut moved = c.left_multiply(&unimodular(&shears, 4)).unwrap();
        for (j, &s) in signs.iter().enumerate() {
            if s {
                moved = moved.negate_column(j + 1);
            }
        }
        let canon = moved.canonical_form(&[]).unwrap().canonical;
        prop_assert_eq!(&canon, c);
        let (again, w) = moved.canonical_with_witness(&[]).unwrap();
        prop_assert_eq!(&again, c);
        let mut rebuilt = moved.permute(&w.perm).unwrap().left_multiply(&w.row_transform).unwrap();
        for (j, &s) in w.col_signs.iter().enumerate() {
            if s < 0 {
                rebuilt = rebuilt.negate_column(j + 1);
            }
        }
        prop_assert_eq!(&rebuilt, c);
    }
}
