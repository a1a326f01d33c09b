use std::sync::Arc;

use qtcyclic::cohomology::{self, Coeff, OrientedRing};
use qtcyclic::{charmat, golden, linalg, CharMatrix, CombinatorialPolytope, RingPresentation};

fn h_vector(p: &CombinatorialPolytope) -> Vec<usize> {
    p.fh_vectors().unwrap().h_vector.iter().map(|&x| x as usize).collect()
}

fn test_matrices() -> Vec<CharMatrix> {
    let mut out = golden::c47_lifts().unwrap();
    out.extend(golden::c36_indecomposable(4).unwrap().into_iter().map(|(_, l)| l));
    out.extend((-2..=2).map(|k| golden::p4_lambda(k).unwrap()));
    out.push(golden::p4_lambda_prime().unwrap());
    let p = Arc::new(CombinatorialPolytope::dual_cyclic(5, 8).unwrap());
    for real in charmat::enumerate_real(&p).unwrap() {
        out.extend(charmat::fiber_over(&real.canonical, 1).unwrap().into_iter().map(|c| c.canonical).take(4));
    }
    out
}

#[test]
fn betti_numbers_are_the_h_vector() {
    for l in test_matrices() {
        let r = RingPresentation::quasitoric(&l).unwrap();
        r.assert_torsion_free().unwrap();
        assert_eq!(r.betti().unwrap(), h_vector(l.polytope()), "{}", l.to_text());
    }
    for (n, m) in [(2, 6), (3, 7), (4, 7), (5, 8)] {
        let p = Arc::new(CombinatorialPolytope::dual_cyclic(n, m).unwrap());
        for real in charmat::enumerate_real(&p).unwrap() {
            let r = RingPresentation::small_cover(&real.canonical).unwrap();
            assert_eq!(r.coeff(), Coeff::Mod(2));
            assert_eq!(r.betti().unwrap(), h_vector(&p));
        }
    }
}

/// Class of facet `i` under the standard linear relations Σ_i λ_{ji} v_i = 0.
/// The presentation stores v′ = −v at the base facets; the ideal is the same
/// because every relation is a product.
fn facet_class(r: &RingPresentation, p: &CombinatorialPolytope, i: usize) -> Vec<i64> {
    let f = r.facet_form(i);
    if p.base_vertex().contains(&i) { f.iter().map(|x| -x).collect() } else { f }
}

#[test]
fn linear_and_monomial_relations_hold() {
    for l in test_matrices() {
        let r = RingPresentation::quasitoric(&l).unwrap();
        let p = l.polytope();
        let id = l.to_identity_form(p.base_vertex()).unwrap();
        for (k, row) in id.tail().iter().enumerate() {
            assert_eq!(&r.facet_form(p.base_vertex()[k]), row);
        }
        let classes: Vec<Vec<i64>> = (1..=p.m()).map(|i| facet_class(&r, p, i)).collect();
        for row in l.entries() {
            let sum: Vec<i64> = (0..r.g()).map(|c| row.iter().zip(&classes).map(|(a, f)| a * f[c]).sum()).collect();
            assert!(sum.iter().all(|&x| x == 0), "{}", l.to_text());
        }
        // products over non-faces vanish; over vertices they are ± the top class
        for face in p.fh_vectors().unwrap().missing_faces {
            let f: Vec<Vec<i64>> = face.iter().map(|&i| classes[i - 1].clone()).collect();
            assert!(r.is_in_ideal(&r.table().product(&f).unwrap()).unwrap());
        }
        for v in p.vertices() {
            assert_eq!(r.vertex_product(v).unwrap().abs(), 1, "{v:?}");
        }
    }
}

#[test]
fn poincare_duality_is_unimodular() {
    for l in test_matrices() {
        let o = OrientedRing::new(&l).unwrap();
        assert_eq!(o.orientation.abs(), 1);
        let pairing = o.pairing_table().unwrap();
        let t = o.ring.table();
        let betti = o.ring.betti().unwrap();
        for d in 0..=o.ring.top() {
            // Gram matrix on all monomials: rank b_d with unit invariant factors
            let gram: Vec<Vec<i64>> = t
                .monomials(d)
                .iter()
                .map(|a| {
                    t.monomials(o.ring.top() - d)
                        .iter()
                        .map(|b| pairing[&a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<u8>>()])
                        .collect()
                })
                .collect();
            let dz = linalg::diagonalize(&gram, t.count(o.ring.top() - d), false).unwrap();
            assert_eq!(dz.rank(), betti[d], "degree {d} of {}", l.to_text());
            assert!(dz.diag.iter().all(|&x| x == 1), "degree {d} of {}: {:?}", l.to_text(), dz.diag);
            if let Ok(m) = o.duality_matrix(d) {
                assert_eq!(linalg::det(&m).unwrap().abs(), 1);
            }
        }
    }
}

#[test]
fn reduction_mod_k_keeps_ranks() {
    for l in golden::c47_lifts().unwrap().iter().take(5) {
        let r = RingPresentation::quasitoric(l).unwrap();
        for k in [2, 3, 5] {
            let rk = r.reduce_mod(k).unwrap();
            assert_eq!(rk.coeff(), Coeff::Mod(k));
            assert_eq!(rk.betti().unwrap(), r.betti().unwrap());
        }
    }
}

#[test]
fn stiefel_whitney_classes_reduce_from_the_integer_matrix() {
    for l in test_matrices() {
        let a = cohomology::char_classes(&l).unwrap();
        let b = cohomology::char_classes_real(&l.mod2_reduce()).unwrap();
        assert_eq!(a.w, b.w, "{}", l.to_text());
    }
}
