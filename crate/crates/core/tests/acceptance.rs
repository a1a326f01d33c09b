//! Acceptance suite: one line per criterion, each with its pinned time
//! budget. Run with `cargo test --test acceptance -- --nocapture`.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use qtcyclic::cohomology::RingPresentation;
use qtcyclic::golden;
use qtcyclic::isomorphism::{self, Battery, IsoVerdict};
use qtcyclic::reproduce::{self, RecipeConfig, RecipeReport};

/// Criteria that cannot hold as stated; the suite prints them as FAIL and
/// checks that they fail for the documented reason only.
const KNOWN_RED: [usize; 1] = [13];

struct Line {
    number: usize,
    pass: bool,
    within_budget: bool,
}

fn criterion(number: usize, title: &str, budget_secs: u64, f: impl FnOnce() -> (bool, String)) -> Line {
    let start = Instant::now();
    let (ok, summary) = f();
    let elapsed = start.elapsed();
    let within_budget = elapsed <= Duration::from_secs(budget_secs);
    let pass = ok && within_budget;
    let mark = if pass { "PASS" } else { "FAIL" };
    println!(
        "[{mark}] {number:>2}. {title}: {summary} ({:.1} s, budget {budget_secs} s)",
        elapsed.as_secs_f64()
    );
    Line { number, pass, within_budget }
}

fn recipe(name: &str) -> RecipeReport {
    reproduce::run(name, &RecipeConfig::default()).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// `actual` of the first check whose description starts with `prefix`.
fn actual<'a>(r: &'a RecipeReport, prefix: &str) -> &'a str {
    r.checks.iter().find(|c| c.what.starts_with(prefix)).map_or("?", |c| c.actual.as_str())
}

fn failures(r: &RecipeReport) -> String {
    r.checks.iter().filter(|c| !c.pass).map(|c| format!("{} expected {} got {}", c.what, c.expected, c.actual)).collect::<Vec<_>>().join("; ")
}

fn from_recipes(names: &[&str], summary: impl FnOnce(&[RecipeReport]) -> String) -> (bool, String) {
    let reports: Vec<RecipeReport> = names.iter().map(|n| recipe(n)).collect();
    let ok = reports.iter().all(|r| r.passed());
    let mut s = summary(&reports);
    if !ok {
        s += &format!(" | {}", reports.iter().map(failures).collect::<Vec<_>>().join("; "));
    }
    (ok, s)
}

#[test]
fn acceptance() {
    let mut lines = Vec::new();

    lines.push(criterion(1, "dual evenness oracle", 1, || {
        from_recipes(&["gale-check"], |r| {
            format!("brute-force interval unions agree for n ≤ 6, m ≤ 10; C^4(7)* has {} vertices", golden::C47_VERTICES.len())
                + if r[0].passed() { "" } else { " (mismatch)" }
        })
    }));

    lines.push(criterion(2, "nonexistence", 30, || {
        from_recipes(&["nonexistence"], |_| format!("0 real classes for all {} listed (n, m)", reproduce::NONEXISTENCE_CASES.len()))
    }));

    lines.push(criterion(3, "real classification", 10, || {
        from_recipes(&["c47-real", "c58-real"], |r| {
            format!(
                "C^4(7)*: {} classes, {} orbit; C^5(8)*: {} classes, {} orbit; both match the displayed matrices",
                actual(&r[0], "real classes"),
                actual(&r[0], "orbits"),
                actual(&r[1], "real classes"),
                actual(&r[1], "orbits")
            )
        })
    }));

    lines.push(criterion(4, "lifts over C^4(7)*", 60, || {
        from_recipes(&["c47-lifts"], |r| {
            format!(
                "{} classes at B = 6, bijective with λ_1..λ_28; {} at B = 8",
                actual(&r[0], "lifts at bound"),
                actual(&r[0], "count stable")
            )
        })
    }));

    lines.push(criterion(5, "σ-orbits over C^4(7)*", 10, || {
        from_recipes(&["c47-orbits"], |r| {
            format!("orbit sizes {}; representatives λ_9, λ_17, λ_16, λ_15 in distinct orbits", actual(&r[0], "σ-orbit sizes"))
        })
    }));

    lines.push(criterion(6, "lifts and orbits over C^5(8)*", 120, || {
        from_recipes(&["c58-lifts", "c58-orbits"], |r| {
            format!("{} lifts of shape (λ_k; a, b) at B = 6; {} σ-orbits", actual(&r[0], "lifts at bound"), actual(&r[1], "orbits"))
        })
    }));

    lines.push(criterion(7, "Table 1", 5, || {
        from_recipes(&["table1"], |r| format!("(matched, total) = {}", actual(&r[0], "Table 1")))
    }));

    lines.push(criterion(8, "Betti numbers = h-vector", 120, || {
        from_recipes(&["betti-hvector"], |r| {
            let total: usize = r[0]
                .checks
                .iter()
                .filter_map(|c| c.what.split(": ").nth(1)?.split(' ').next()?.parse::<usize>().ok())
                .sum();
            format!("{total} classes over {} polytopes, torsion-free with b = h", r[0].checks.len())
        })
    }));

    lines.push(criterion(9, "ring distinction over C^4(7)*", 120, || {
        from_recipes(&["c47-rings"], |r| {
            format!(
                "{} singleton classes; stated moduli separate all six pairs; least moduli {}",
                actual(&r[0], "classes"),
                actual(&r[0], "least separating modulus")
            )
        })
    }));

    lines.push(criterion(10, "ring distinction over C^5(8)*", 300, || {
        from_recipes(&["c58-rings"], |r| {
            format!(
                "{} singleton classes, {} unresolved; sufficient ladder (pairs per modulus) {}",
                actual(&r[0], "classes"),
                actual(&r[0], "unresolved"),
                actual(&r[0], "separating moduli")
            )
        })
    }));

    lines.push(criterion(11, "indecomposable list over C^3(6)*", 60, || {
        from_recipes(&["c36-list"], |r| {
            format!(
                "{} classes at B = 8 = the listed families ({} λ_d members); listed σ/τ identifications hold",
                actual(&r[0], "indecomposable classes"),
                actual(&r[0], "λ_d members")
            )
        })
    }));

    lines.push(criterion(12, "A_1 ≅ A_2 certificate", 1, || {
        let named: BTreeMap<String, _> = golden::c36_indecomposable(8).unwrap().into_iter().collect();
        let (l1, l2) = (&named["l1'"], &named["l2'''"]);
        let (a1, a2) = (RingPresentation::quasitoric(l1).unwrap(), RingPresentation::quasitoric(l2).unwrap());
        let m = golden::c36_certificate();
        let iso = isomorphism::apply_iso_check(&a1, &a2, &m).unwrap();
        let classes = isomorphism::char_class_preserved(&m, l1, l2).unwrap();
        (iso && classes, format!("apply_iso_check = {iso}, char_class_preserved = {classes}"))
    }));

    let mut ad = None;
    lines.push(criterion(13, "A_d family separation", 180, || {
        let sep = reproduce::ad_separation(&Battery::default()).unwrap();
        let ok = sep.unresolved.is_empty() && sep.decomposable_failures.is_empty();
        let pairs: Vec<String> = sep
            .unresolved
            .iter()
            .map(|(a, b, v)| match v {
                IsoVerdict::Isomorphic { certificate } => format!("{a} ≅ {b} over Z via {certificate:?}"),
                other => format!("{a} vs {b}: {other:?}"),
            })
            .collect();
        let pairwise = sep.unresolved.iter().filter(|(_, b, _)| !matches!(b.as_str(), "A_1" | "A_2")).count();
        let s = format!(
            "{} of {} decomposable rings unseparated; {pairwise} of 15 A_d/A_d′ pairs unresolved; not separated: [{}]",
            sep.decomposable_failures.len(),
            sep.decomposable,
            pairs.join("; ")
        );
        ad = Some(sep);
        (ok, s)
    }));

    lines.push(criterion(14, "polygon and C^3(m)* classifications", 60, || {
        from_recipes(&["polygon-counts", "c3-smallcovers"], |r| {
            format!(
                "quasitoric counts match for m = 4..9 (B = {}); small covers over m-gons (m ≤ 9) and C^3(m)* (m ≤ 9) fully decomposed ({} checks)",
                reproduce::POLYGON_BOUND,
                r[0].checks.len() + r[1].checks.len()
            )
        })
    }));

    lines.push(criterion(15, "lifting problem", 60, || {
        from_recipes(&["lift-problem"], |r| {
            format!("every real class over C^3(m ≤ 9)*, C^4(7)*, C^5(8)* lifts ({} families)", r[0].checks.len())
        })
    }));

    let red: Vec<usize> = lines.iter().filter(|l| !l.pass).map(|l| l.number).collect();
    println!("acceptance: {}/{} criteria pass; red: {red:?}", lines.len() - red.len(), lines.len());

    for l in &lines {
        assert!(l.within_budget, "criterion {} exceeded its time budget", l.number);
        if !KNOWN_RED.contains(&l.number) {
            assert!(l.pass, "criterion {} failed", l.number);
        }
    }
    // Criterion 13 is red for one documented reason: λ_3 has the ring of
    // λ′_1 (and so of λ‴_2), with an explicit integral certificate. Anything
    // else unresolved would be a regression.
    let sep = ad.expect("criterion 13 ran");
    assert!(sep.decomposable_failures.is_empty());
    let got: Vec<(&str, &str)> = sep.unresolved.iter().map(|(a, b, _)| (a.as_str(), b.as_str())).collect();
    assert_eq!(got, [("A_3", "A_1"), ("A_3", "A_2")]);
    for (_, _, v) in &sep.unresolved {
        assert!(matches!(v, IsoVerdict::Isomorphic { .. }), "{v:?}");
    }
}
