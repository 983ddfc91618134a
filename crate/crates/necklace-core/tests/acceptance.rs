//! End-to-end gate over the bundled specs. Each test checks one headline
//! claim at fixed tolerances, prints a single pass line, and (where a
//! budget is stated) enforces a wall-clock limit. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use necklace_core::builtins;
use necklace_core::class::check_goodness;
use necklace_core::cuts::{cut_report, survey_extremal, verify_theorem_suite};
use necklace_core::geometry::{
    address_point, crowded4_ifs, detect_contacts, gasket_ifs, spec_from_geometry, PairContact,
};
use necklace_core::rigidity::{
    apply_sigma, rigid_maps, spec_isomorphic, verify_nifs_uniqueness, ClosureVerdict,
};
use necklace_core::{
    Address, DihedralElement, Engine, EngineLimits, NecklaceSpec, Point2, Word,
};

const SURVEY_LEVEL: usize = 2;
const THREADS: usize = 2;

fn engine(spec: NecklaceSpec) -> Engine {
    Engine::new(spec, EngineLimits::default())
}

fn addr(text: &str) -> Address {
    text.parse().expect("literal address parses")
}

/// All words of length `0..=max_len` over `1..=n`, shortest first.
fn words_up_to(n: u8, max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(frontier.len() * n as usize);
        for w in &frontier {
            for s in 1..=n {
                let mut e = w.clone();
                e.push(s);
                next.push(e);
            }
        }
        out.extend(next.iter().cloned().map(Word::new));
        frontier = next;
    }
    out
}

/// Asserts that every extremal cut has exactly one component attaining the
/// survey maximum and that this component spans several top-level copies
/// (the external one), returning its cut-point counts.
fn assert_unique_external_extremal(
    survey: &necklace_core::ExtremalSurvey,
    context: &str,
) -> Vec<usize> {
    let mut external_ncps = Vec::new();
    for (report, attaining) in survey.extremal.iter().zip(&survey.extremal_components) {
        assert_eq!(
            attaining.len(),
            1,
            "{context}: cut {:?} should have a unique extremal component",
            report.points
        );
        let comp = &report.components.components[attaining[0]];
        assert!(
            comp.first_symbols.len() >= 2,
            "{context}: the extremal component of {:?} should span several top-level copies, got symbols {:?}",
            report.points,
            comp.first_symbols
        );
        external_ncps.push(comp.ncp);
    }
    external_ncps
}

#[test]
fn gasket_survey_finds_exactly_the_node_pair_cuts() {
    let started = Instant::now();
    let spec = builtins::gasket();
    assert!(spec.validate(6).expect("validation runs").pass);

    let engine = engine(spec);
    let goodness =
        check_goodness(engine.spec(), engine.class_options()).expect("goodness check runs");
    assert!(goodness.good, "witnesses: {:?}", goodness.witnesses);

    // Removing any single junction of any copy up to level 3 must leave
    // the space connected.
    let mut seen = BTreeSet::new();
    for w in words_up_to(3, 3) {
        for class in engine.main_nodes(&w).expect("main nodes resolve") {
            if seen.insert(class.canonical().clone()) {
                let set = engine
                    .components_minus(std::slice::from_ref(&class), None)
                    .expect("components resolve");
                assert_eq!(set.len(), 1, "{} is a cut point", class.canonical());
            }
        }
    }

    let survey = survey_extremal(&engine, SURVEY_LEVEL, THREADS).expect("survey runs");
    assert_eq!(survey.n2, 1, "largest N over the surveyed cuts");
    assert_eq!(survey.extremal.len(), 3);
    assert!(survey.verdicts.good);
    assert!(
        survey.verdicts.matches_prediction,
        "extremal set {:?} differs from the adjacent-node pairs {:?}",
        survey.extremal.iter().map(|r| &r.points).collect::<Vec<_>>(),
        survey.verdicts.predicted_extremal
    );
    for report in &survey.extremal {
        assert!(report.is_cut && report.proper_subsets_connected);
        assert_eq!(report.n, 1);
    }
    let external = assert_unique_external_extremal(&survey, "gasket");
    assert!(external.iter().all(|&ncp| ncp == 1));

    assert!(
        started.elapsed() < Duration::from_secs(10),
        "took {:?}",
        started.elapsed()
    );
    println!("criterion 1: PASS");
}

#[test]
fn good4_survey_attains_the_bound_with_four_extremal_cuts() {
    let started = Instant::now();
    let engine = engine(builtins::good4());
    let survey = survey_extremal(&engine, SURVEY_LEVEL, THREADS).expect("survey runs");

    assert_eq!(survey.n2, 2, "largest N over the surveyed cuts");
    assert_eq!(survey.extremal.len(), 4);
    assert!(survey.verdicts.good && survey.verdicts.matches_prediction);
    let external = assert_unique_external_extremal(&survey, "good4");
    assert!(
        external.iter().all(|&ncp| ncp == 2),
        "external components should each have two cut points, got {external:?}"
    );

    assert!(
        started.elapsed() < Duration::from_secs(10),
        "took {:?}",
        started.elapsed()
    );
    println!("criterion 2: PASS");
}

#[test]
fn crowded4_has_an_extremal_cut_off_the_node_pairs_at_the_known_coordinates() {
    let started = Instant::now();
    let spec = builtins::crowded4();
    let engine = engine(spec);
    let goodness =
        check_goodness(engine.spec(), engine.class_options()).expect("goodness check runs");
    assert!(!goodness.good);
    assert!(
        goodness.witnesses.contains(&(3, 1)),
        "witnesses: {:?}",
        goodness.witnesses
    );

    let survey = survey_extremal(&engine, SURVEY_LEVEL, THREADS).expect("survey runs");
    assert_eq!(survey.n2, 2);

    // One extremal cut lies beyond the main-node pairs; its two points
    // sit at a + a(1-a) on the axis and at a + a(1-a) + (1-a)^2 v.
    let target = vec!["321(3)".to_string(), "3311(3)".to_string()];
    let off_pair = survey
        .extremal
        .iter()
        .find(|r| r.points == target)
        .expect("the off-node extremal cut is reported");
    assert!(off_pair.is_cut);
    assert_eq!(off_pair.n, 2);
    assert!(
        !survey.verdicts.predicted_extremal.contains(&target),
        "the pair should not be an adjacent-node pair"
    );

    let ifs = crowded4_ifs();
    let a = 0.3;
    let alpha = 40.0_f64.to_radians();
    let beta = 12.0_f64.to_radians();
    let gamma = std::f64::consts::PI - alpha - beta;
    let mag = beta.sin() / gamma.sin();
    let v = Point2::new(mag * alpha.cos(), mag * alpha.sin());
    let origin = Point2::new(0.0, 0.0);

    let first = address_point(&ifs, &addr("321(3)"));
    let first_expected = Point2::new(a + a * (1.0 - a), 0.0);
    assert!(
        first.dist(&first_expected) <= 1e-6 * first_expected.dist(&origin),
        "{first:?} vs {first_expected:?}"
    );
    let second = address_point(&ifs, &addr("3311(3)"));
    let base = a + a * (1.0 - a);
    let scale = (1.0 - a) * (1.0 - a);
    let second_expected = Point2::new(base + scale * v.x, scale * v.y);
    assert!(
        second.dist(&second_expected) <= 1e-6 * second_expected.dist(&origin),
        "{second:?} vs {second_expected:?}"
    );

    // Removing the second and third junctions splits the space into three
    // components, exactly two of which attain the maximum.
    let z2 = engine.class(&addr("21(3)")).expect("junction resolves");
    let z3 = engine.class(&addr("311(3)")).expect("junction resolves");
    let report = cut_report(&engine, &[z2, z3]).expect("cut report runs");
    assert_eq!(report.components.components.len(), 3);
    assert_eq!(report.n, 2);
    let attaining = report
        .ncp_per_component
        .iter()
        .filter(|&&ncp| ncp == report.n)
        .count();
    assert_eq!(attaining, 2, "ncp per component: {:?}", report.ncp_per_component);

    assert!(
        started.elapsed() < Duration::from_secs(30),
        "took {:?}",
        started.elapsed()
    );
    println!("criterion 3: PASS");
}

#[test]
fn self_closures_form_the_full_symmetry_groups_and_cross_closures_are_empty() {
    let started = Instant::now();
    let gasket = builtins::gasket();
    let good4 = builtins::good4();

    let check_group = |label: &str, closure: &necklace_core::RigidMapClosure, order: usize| {
        assert_eq!(closure.maps.len(), order, "{label}: admitted map count");
        assert!(
            matches!(closure.verdict, ClosureVerdict::Closed),
            "{label}: exploration should close"
        );
        assert!(closure.undecided.is_empty(), "{label}: {:?}", closure.undecided);
        assert!(!closure.automaton.states.is_empty());
        assert_eq!(closure.automaton.accepting.len(), order);
        let set: BTreeSet<DihedralElement> = closure.maps.iter().copied().collect();
        assert_eq!(set.len(), order);
        for a in &set {
            assert!(set.contains(&a.inverse()), "{label}: {a} lacks its inverse");
            for b in &set {
                assert!(
                    set.contains(&a.compose(b)),
                    "{label}: {a} composed with {b} escapes the set"
                );
            }
        }
    };

    let gg = rigid_maps(&gasket, &gasket, 6).expect("closure runs");
    check_group("gasket", &gg, 6);
    let hh = rigid_maps(&good4, &good4, 6).expect("closure runs");
    check_group("good4", &hh, 8);

    for (f, g) in [(&gasket, &good4), (&good4, &gasket)] {
        let cross = rigid_maps(f, g, 6).expect("closure runs");
        assert!(
            cross.maps.is_empty(),
            "{} -> {}: {:?}",
            f.label(),
            g.label(),
            cross.maps
        );
        assert!(matches!(cross.verdict, ClosureVerdict::Closed));
    }

    assert!(
        started.elapsed() < Duration::from_secs(30),
        "took {:?}",
        started.elapsed()
    );
    println!("criterion 4: PASS");
}

#[test]
fn every_relabeling_is_isomorphic_and_surveys_identically() {
    for spec in [builtins::gasket(), builtins::good4()] {
        let report =
            verify_nifs_uniqueness(&spec, SURVEY_LEVEL, THREADS).expect("uniqueness suite runs");
        assert!(report.applicable, "{}: suite should apply", spec.label());
        assert_eq!(report.entries.len(), 2 * spec.n() as usize);
        for entry in &report.entries {
            assert!(
                entry.isomorphic && entry.validates && entry.good && entry.survey_matches,
                "{}: relabeling {} fails: {entry:?}",
                spec.label(),
                entry.sigma
            );
        }
        assert!(report.pass);

        for sigma in DihedralElement::group(spec.n()) {
            let relabeled = apply_sigma(&spec, &sigma);
            assert!(
                spec_isomorphic(&relabeled, &spec).is_some(),
                "{}: {} breaks isomorphy",
                spec.label(),
                sigma
            );
        }
    }
    println!("criterion 5: PASS");
}

#[test]
fn structural_suites_hold_with_zero_violations() {
    // The full suite on the well-separated specs and a sample of their
    // relabelings; every applicable claim must hold with no witnesses.
    for base in [builtins::gasket(), builtins::good4()] {
        let group = DihedralElement::group(base.n());
        let tau = *group
            .iter()
            .find(|s| s.rotation() == 1 && !s.reflected())
            .expect("the group contains the basic rotation");
        let refl = *group
            .iter()
            .find(|s| s.reflected())
            .expect("the group contains a reflection");
        for spec in [base.clone(), apply_sigma(&base, &tau), apply_sigma(&base, &refl)] {
            let engine = engine(spec);
            let suite =
                verify_theorem_suite(&engine, SURVEY_LEVEL, 3, THREADS).expect("suite runs");
            for claim in &suite.claims {
                if claim.applicable {
                    assert!(
                        claim.pass && claim.witnesses.is_empty(),
                        "{}: claim {} fails: {} {:?}",
                        engine.spec().label(),
                        claim.name,
                        claim.details,
                        claim.witnesses
                    );
                }
            }
            assert!(suite.pass);
        }
    }

    // The boundary law holds on every fully reported cut of every bundled
    // spec, crowded or not: component boundaries are exactly the removed
    // classes that touch the component, and together they exhaust the cut.
    for spec in [builtins::gasket(), builtins::good4(), builtins::crowded4()] {
        let engine = engine(spec);
        let n = engine.spec().n() as usize;
        let cut_point_free = check_goodness(engine.spec(), engine.class_options())
            .expect("goodness check runs")
            .good;
        let survey = survey_extremal(&engine, SURVEY_LEVEL, THREADS).expect("survey runs");
        for report in &survey.extremal {
            let removed: BTreeSet<&String> = report.components.removed.iter().collect();
            let mut union = BTreeSet::new();
            for comp in &report.components.components {
                for b in &comp.boundary {
                    assert!(
                        removed.contains(b),
                        "{}: boundary point {b} of a component is not removed",
                        engine.spec().label()
                    );
                    union.insert(b);
                }
            }
            assert_eq!(
                union, removed,
                "{}: some removed class touches no component",
                engine.spec().label()
            );
        }
        if cut_point_free {
            for entry in &survey.entries {
                assert!(
                    entry.n <= n - 2,
                    "{}: cut {:?} exceeds the bound",
                    engine.spec().label(),
                    entry.points
                );
            }
        }
    }
    println!("criterion 6: PASS");
}

#[test]
fn gasket_geometry_round_trips_to_the_symbolic_spec() {
    let ifs = gasket_ifs();
    let extraction = spec_from_geometry(&ifs, 24, 1e-9).expect("extraction succeeds");
    assert!(
        spec_isomorphic(&extraction.spec, &builtins::gasket()).is_some(),
        "extracted {:?} instead",
        extraction.spec
    );
    for rule in &extraction.confidence {
        assert!(rule.residual <= 1e-9, "rule {}: residual {}", rule.k, rule.residual);
    }

    let scan = detect_contacts(&ifs, 24, 1e-9);
    assert!(scan.necklace_pattern);
    assert_eq!(scan.unresolved, 0);
    let height = 3.0_f64.sqrt() / 4.0;
    let expected = [
        ((1, 2), Point2::new(0.5, 0.0)),
        ((2, 3), Point2::new(0.75, height)),
        ((1, 3), Point2::new(0.25, height)),
    ];
    for ((k, l), want) in expected {
        let entry = scan
            .pairs
            .iter()
            .find(|p| (p.k, p.l) == (k, l))
            .expect("pair is scanned");
        assert!(entry.adjacent);
        let PairContact::Contact { point, .. } = &entry.verdict else {
            panic!("copies {k} and {l} should touch, got {:?}", entry.verdict);
        };
        assert!(
            point.dist(&want) <= 1e-9,
            "contact of {k},{l} at {point:?}, expected {want:?}"
        );
    }
    println!("criterion 7: PASS");
}
