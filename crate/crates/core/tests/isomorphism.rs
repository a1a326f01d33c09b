use qtcyclic::golden;
use qtcyclic::isomorphism::{self, Battery, IsoVerdict};
use qtcyclic::{CharMatrix, RingPresentation};

fn named(name: &str) -> CharMatrix {
    golden::c36_indecomposable(8).unwrap().into_iter().find(|(n, _)| n == name).unwrap().1
}

fn ring(l: &CharMatrix) -> RingPresentation {
    RingPresentation::quasitoric(l).unwrap()
}

fn c47_rings() -> Vec<RingPresentation> {
    golden::C47_REPRESENTATIVES.iter().map(|&k| ring(&golden::c47_lift(k).unwrap())).collect()
}

#[test]
fn reference_certificate_is_an_isomorphism() {
    let (l1, l2) = (named("l1'"), named("l2'''"));
    let m = golden::c36_certificate();
    assert!(isomorphism::apply_iso_check(&ring(&l1), &ring(&l2), &m).unwrap());
    assert!(isomorphism::char_class_preserved(&m, &l1, &l2).unwrap());
    let neg: Vec<Vec<i64>> = m.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
    assert!(isomorphism::char_class_preserved(&neg, &l1, &l2).unwrap());
}

#[test]
fn identity_checks() {
    let rs = c47_rings();
    let id = vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]];
    assert!(isomorphism::apply_iso_check(&rs[0], &rs[0], &id).unwrap());
    assert!(!isomorphism::apply_iso_check(&rs[0], &rs[3], &id).unwrap());
    let sing = vec![vec![1, 0, 0], vec![0, 2, 0], vec![0, 0, 1]];
    assert!(isomorphism::apply_iso_check(&rs[0], &rs[0], &sing).is_err());
}

#[test]
fn c47_pairs_separate_at_the_stated_moduli() {
    let rs = c47_rings();
    let (a, b, c, d) = (&rs[0], &rs[1], &rs[2], &rs[3]);
    for (x, y) in [(a, b), (b, c), (b, d)] {
        assert!(isomorphism::iso_over_zk(x, y, 4).unwrap().is_distinguished());
    }
    for (x, y) in [(a, d), (c, d), (a, c)] {
        assert!(isomorphism::iso_over_zk(x, y, 3).unwrap().is_distinguished());
    }
    for k in [2, 3, 4, 5] {
        let v = isomorphism::iso_over_zk(a, a, k).unwrap();
        assert!(matches!(v, IsoVerdict::IsomorphicModK { .. }), "{k}: {v:?}");
    }
}

#[test]
fn isomorphic_pair_passes_every_modulus() {
    let (r1, r2) = (ring(&named("l1'")), ring(&named("l2'''")));
    for k in [2, 3, 4, 5, 6, 8, 9, 16] {
        let v = isomorphism::iso_over_zk(&r1, &r2, k).unwrap();
        let IsoVerdict::IsomorphicModK { certificate, .. } = v else { panic!("{k}: {v:?}") };
        let (m1, m2) = (r1.reduce_mod(k).unwrap(), r2.reduce_mod(k).unwrap());
        assert!(isomorphism::apply_iso_check(&m1, &m2, &certificate).unwrap());
    }
    let v = isomorphism::iso_over_z_bounded(&r1, &r2, 2).unwrap();
    let IsoVerdict::Isomorphic { certificate } = v else { panic!("{v:?}") };
    assert!(isomorphism::apply_iso_check(&r1, &r2, &certificate).unwrap());
}

#[test]
fn degree_three_ideals_admit_phi1_but_not_the_full_ideal() {
    let src = ring(&golden::c58_lift(21, 0, 0).unwrap());
    let tgt = ring(&golden::c58_lift(23, 0, 0).unwrap());
    let phi1 = golden::c58_automorphisms()["phi1"].clone();
    let cubic = |r: &RingPresentation| r.restrict(|rel| rel.degree() == 3);
    assert!(isomorphism::apply_iso_check(&cubic(&src), &cubic(&tgt), &phi1).unwrap());
    assert!(!isomorphism::apply_iso_check(&src, &tgt, &phi1).unwrap());
}

#[test]
fn distinguish_the_four_c47_rings() {
    let report = isomorphism::distinguish_all(&c47_rings(), &Battery::default()).unwrap();
    eprintln!("{:?}", report.separating_moduli());
    assert_eq!(report.classes.len(), 4);
    assert!(report.unresolved().is_empty());
}

#[test]
fn self_comparison_gives_identity_class() {
    let rs = c47_rings();
    let v = isomorphism::iso_over_z_bounded(&rs[1], &rs[1], 1).unwrap();
    assert!(matches!(v, IsoVerdict::Isomorphic { .. }));
    let f = isomorphism::fingerprint(&rs[1], &[2, 3, 4]).unwrap();
    assert_eq!(f, isomorphism::fingerprint(&rs[1], &[2, 3, 4]).unwrap());
}

#[test]
fn rings_in_one_orbit_are_isomorphic() {
    // λ_9 and λ_5 are consecutive in a σ-cycle
    let (a, b) = (ring(&golden::c47_lift(9).unwrap()), ring(&golden::c47_lift(5).unwrap()));
    for k in [3, 4] {
        assert!(matches!(isomorphism::iso_over_zk(&a, &b, k).unwrap(), IsoVerdict::IsomorphicModK { .. }));
    }
    let IsoVerdict::Isomorphic { certificate } = isomorphism::iso_over_z_bounded(&a, &b, 3).unwrap() else { panic!() };
    assert!(isomorphism::apply_iso_check(&a, &b, &certificate).unwrap());
    let inv = qtcyclic::linalg::inverse_unimodular(&certificate).unwrap();
    assert!(isomorphism::apply_iso_check(&b, &a, &inv).unwrap());
}

#[test]
fn c58_orbit_rings_separate_at_three() {
    let rings: Vec<RingPresentation> =
        golden::c58_orbits().iter().map(|o| { let (k, a, b) = o[0]; ring(&golden::c58_lift(k, a, b).unwrap()) }).collect();
    let report = isomorphism::distinguish_all(&rings, &Battery::default()).unwrap();
    assert_eq!(report.classes.len(), 46);
    assert!(report.unresolved().is_empty());
    assert!(report.separating_moduli().values().all(|&k| k == Some(3)));
}

/// F(g·y) by direct expansion.
fn substitute(f: &isomorphism::Cubic, g: &[[i64; 3]; 3]) -> isomorphism::Cubic {
    let mut out = isomorphism::Cubic::new();
    for (e, &c) in f {
        let vars: Vec<usize> = (0..3).flat_map(|i| std::iter::repeat(i).take(e[i] as usize)).collect();
        for a in 0..3 {
            for b in 0..3 {
                for d in 0..3 {
                    let coef = c * (g[vars[0]][a] * g[vars[1]][b] * g[vars[2]][d]) as i128;
                    let mut k = [0u8; 3];
                    for j in [a, b, d] {
                        k[j] += 1;
                    }
                    *out.entry(k).or_insert(0) += coef;
                }
            }
        }
    }
    out.retain(|_, v| *v != 0);
    out
}

fn invariants(name: &str) -> isomorphism::CubicInvariants {
    isomorphism::cubic_invariants(&ring(&named(name))).unwrap().unwrap()
}

#[test]
fn cubic_invariants_of_indecomposables() {
    assert_eq!(invariants("l1'"), invariants("l2'''"));
    assert_eq!(invariants("l1'"), invariants("ld[3]"));
    assert_ne!(invariants("ld[3]"), invariants("ld[7]"));
    assert_ne!(invariants("ld[4]"), invariants("ld[7]"));
    assert!(isomorphism::cubic_invariants(&c47_rings()[0]).unwrap().is_none());
}

proptest::proptest! {
    #[test]
    fn cubic_invariants_are_unimodular_invariants(
        coeffs in proptest::collection::vec(-3i128..=3, 10),
        shears in proptest::collection::vec((0usize..3, 0usize..3, -2i64..=2), 0..5),
        flip in proptest::bool::ANY,
    ) {
        let monos: Vec<[u8; 3]> = (0..=3u8).flat_map(|a| (0..=3 - a).map(move |b| [a, b, 3 - a - b])).collect();
        let f: isomorphism::Cubic = monos.iter().zip(&coeffs).filter(|(_, &c)| c != 0).map(|(e, &c)| (*e, c)).collect();
        proptest::prop_assume!(!f.is_empty());
        let mut g = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
        for (i, j, t) in shears {
            if i != j {
                for row in g.iter_mut() {
                    row[j] += t * row[i];
                }
            }
        }
        let mut h = substitute(&f, &g);
        if flip {
            h.values_mut().for_each(|v| *v = -*v);
        }
        let (a, b) = (isomorphism::form_invariants(&f), isomorphism::form_invariants(&h));
        match (a, b) {
            (Ok(a), Ok(b)) => proptest::prop_assert_eq!(a, b),
            (Err(_), Err(_)) => {}
            (a, b) => proptest::prop_assert!(false, "{:?} vs {:?}", a, b),
        }
    }
}
