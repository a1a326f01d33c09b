use std::collections::BTreeSet;

use qtcyclic::polytope::{mask_of, satisfies_dual_evenness};
use qtcyclic::{CombinatorialPolytope, FacetPermutation};

fn subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << m).filter(|s| s.count_ones() as usize == k).map(|s| (1..=m).filter(|i| s >> (i - 1) & 1 == 1).collect()).collect()
}

/// Facets of the cyclic polytope by the evenness criterion on gaps: every
/// pair of labels outside `s` is separated by an even number of labels in `s`.
fn gale_facet(s: &[usize], m: usize) -> bool {
    let out: Vec<usize> = (1..=m).filter(|i| !s.contains(i)).collect();
    out.windows(2).all(|w| s.iter().filter(|&&k| w[0] < k && k < w[1]).count() % 2 == 0)
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn rec(rest: &mut Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            cur.push(x);
            rec(rest, cur, out);
            cur.pop();
            rest.insert(i, x);
        }
    }
    let mut out = Vec::new();
    rec(&mut (1..=m).collect(), &mut Vec::new(), &mut out);
    out
}

#[test]
fn vertices_match_the_gap_criterion() {
    for n in 2..=6 {
        for m in n + 1..=10 {
            let p = CombinatorialPolytope::dual_cyclic(n, m).unwrap();
            let want: BTreeSet<Vec<usize>> = subsets(m, n).into_iter().filter(|s| gale_facet(s, m)).collect();
            let got: BTreeSet<Vec<usize>> = p.vertices().iter().cloned().collect();
            assert_eq!(got, want, "C^{n}({m})*");
            for s in subsets(m, n) {
                assert_eq!(satisfies_dual_evenness(&s, m), want.contains(&s), "{s:?} in C^{n}({m})*");
            }
        }
    }
}

#[test]
fn face_numbers_by_counting() {
    for (n, m) in [(2, 5), (3, 6), (3, 8), (4, 7), (4, 9), (5, 8), (6, 10)] {
        let p = CombinatorialPolytope::dual_cyclic(n, m).unwrap();
        let faces = p.fh_vectors().unwrap();
        let counted: Vec<u64> = (1..=n).map(|k| subsets(m, k).iter().filter(|s| p.is_face_mask(mask_of(s))).count() as u64).collect();
        assert_eq!(faces.f_vector, counted, "C^{n}({m})*");

        let h = &faces.h_vector;
        assert_eq!(h.len(), n + 1);
        assert_eq!((h[0], h[1]), (1, (m - n) as i64));
        assert!((0..=n).all(|i| h[i] == h[n - i]), "Dehn–Sommerville fails for C^{n}({m})*: {h:?}");
        assert_eq!(h.iter().sum::<i64>(), p.vertices().len() as i64);

        let minimal_nonfaces: Vec<Vec<usize>> = (1..=m)
            .flat_map(|k| subsets(m, k))
            .filter(|s| !p.is_face_mask(mask_of(s)))
            .filter(|s| (0..s.len()).all(|i| p.is_face_mask(mask_of(&[&s[..i], &s[i + 1..]].concat()))))
            .collect();
        let got: BTreeSet<Vec<usize>> = faces.missing_faces.into_iter().collect();
        assert_eq!(got, minimal_nonfaces.into_iter().collect::<BTreeSet<_>>(), "C^{n}({m})*");
    }
}

#[test]
fn automorphisms_match_exhaustive_search() {
    for (n, m) in [(2, 5), (2, 6), (3, 6), (3, 7), (4, 7)] {
        let p = CombinatorialPolytope::dual_cyclic(n, m).unwrap();
        let want: BTreeSet<FacetPermutation> = permutations(m)
            .into_iter()
            .map(|im| FacetPermutation::new(im).unwrap())
            .filter(|g| p.vertex_masks().iter().all(|&v| p.is_vertex_mask(g.apply_mask(v))))
            .collect();
        let got: BTreeSet<FacetPermutation> = p.automorphism_group().unwrap().into_iter().collect();
        assert_eq!(got, want, "C^{n}({m})*");
        assert!(got.iter().all(|g| p.is_automorphism(g)));
    }
    // polygon: dihedral of order 2m
    assert_eq!(CombinatorialPolytope::polygon(7).unwrap().automorphism_group().unwrap().len(), 14);
}

#[test]
fn json_round_trip() {
    let p = CombinatorialPolytope::dual_cyclic(5, 8).unwrap();
    let q = CombinatorialPolytope::from_json(&p.to_json()).unwrap();
    assert!(p.same_combinatorics(&q));
    assert_eq!(q.label(), p.label());
}
