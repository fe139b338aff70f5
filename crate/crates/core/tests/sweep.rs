use proptest::prelude::*;
use slidenodal_core::nodal::*;
use slidenodal_core::sweep::*;

/// A cheaper configuration for tests that do not depend on resolution.
fn quick() -> SweepConfig {
    let mut c = SweepConfig::default();
    c.sizing.base_edge = 0.06;
    c.sizing.ring_layers = 3;
    c.refinement_check = false;
    c
}

#[test]
fn anchors_with_defaults() {
    let c = SweepConfig::default();
    let minus = evaluate_t(&c, c.t_minus).unwrap();
    assert_eq!(minus.label, Some(TouchLabel::RightOnly));
    assert_eq!(minus.refined_label, Some(TouchLabel::RightOnly));
    let plus = evaluate_t(&c, c.t_plus).unwrap();
    assert_eq!(plus.label, Some(TouchLabel::LeftOnly));
    for r in [&minus, &plus] {
        assert_eq!(r.nodal_domains, 2);
        assert_eq!(r.sign_changes % 2, 1);
        assert!(r.symmetry_defect <= 1e-6 && r.nodal_asymmetry <= 1e-9);
        assert!(r.curves_simple && r.impacts_single_loop);
        assert!(r.gap2 >= 1e-3 && r.max_residual <= 1e-8);
    }
}

#[test]
fn evaluation_is_deterministic() {
    let c = quick();
    assert_eq!(evaluate_t(&c, 1.8).unwrap(), evaluate_t(&c, 1.8).unwrap());
}

#[test]
fn single_loop_mode() {
    let mut c = quick();
    c.params.h = 0.0;
    c.n_steps = 3;
    let ev = evaluate(&c, 1.9).unwrap();
    assert_eq!(ev.record.label, None);
    assert_eq!(ev.nodal.chains.len(), 1);
    for p in &ev.nodal.chains[0].points {
        assert!(p.x.abs() <= 2.0 * c.sizing.base_edge, "{p:?}");
    }
    assert_eq!(ev.record.sign_changes, 1);
    let s = scan(&c).unwrap();
    assert!(s.single_loop && s.bracket.is_none());
    assert!(s.records.iter().all(|r| r.label.is_none()));
    assert!(search(&c, &s).unwrap().is_none());
}

#[test]
fn two_right_only_ends_are_an_anchor_mismatch() {
    let c = quick();
    let r = vec![evaluate_t(&c, 1.5).unwrap(), evaluate_t(&c, 1.7).unwrap()];
    assert!(matches!(partition(&r), Err(SweepError::AnchorMismatch { expected: "LeftOnly", .. })));
}

#[test]
fn bisection_preconditions() {
    let c = quick();
    assert!(matches!(bisect(&c, 1.6, 1.65), Err(SweepError::BadBracket { .. })));
    assert!(matches!(bisect(&c, 2.3, 1.6), Err(SweepError::LabelInversion { .. })));
}

#[test]
fn coarse_mesh_narrows_without_a_certificate() {
    let mut c = SweepConfig::default();
    c.sizing.base_edge = 0.15;
    c.sizing.ring_layers = 3;
    let (o, _) = bisect(&c, 1.9261, 1.9739).unwrap();
    let Outcome::Narrowed(n) = o else { panic!("coarse mesh certified") };
    assert!(!n.inconclusive.is_empty());
    assert!(n.ta < n.tb && n.tb - n.ta < 1.9739 - 1.9261);
    for s in &n.steps {
        match s.label {
            Some(TouchLabel::RightOnly) => assert!(s.t <= n.ta),
            Some(TouchLabel::LeftOnly) => assert!(s.t >= n.tb),
            _ => {}
        }
    }
    assert!(!n.candidate.certified);
}

#[test]
fn certificate_round_trip_and_tampering() {
    let c = quick();
    let ev = evaluate(&c, 1.96).unwrap();
    let cert = certificate(&c, &ev);
    assert_eq!(cert.conditions.len(), 11);
    assert_eq!(cert.certified, cert.conditions.iter().all(|k| k.pass));
    let ok = verify_certificate(&cert, &ev.mesh, &ev.u2);
    assert!(ok.passed(), "{:?}", ok.mismatches);

    // noise of relative size 1e-3 on the interior values
    let scale = ev.u2.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut noisy = ev.u2.clone();
    for (i, v) in noisy.iter_mut().enumerate() {
        if *v != 0.0 {
            *v += 1e-3 * scale * (((i * 7919) % 2001) as f64 / 1000.0 - 1.0);
        }
    }
    let r = verify_certificate(&cert, &ev.mesh, &noisy);
    assert!(r.mismatches.iter().any(|m| m.starts_with("residual")), "{:?}", r.mismatches);

    let mut inflated = cert.clone();
    inflated.delta_left *= 2.0;
    let r = verify_certificate(&inflated, &ev.mesh, &ev.u2);
    assert!(r.mismatches.iter().any(|m| m.starts_with("delta_left")), "{:?}", r.mismatches);
}

fn labels() -> impl Strategy<Value = Vec<TouchLabel>> {
    prop::collection::vec(
        prop_oneof![
            Just(TouchLabel::RightOnly),
            Just(TouchLabel::LeftOnly),
            Just(TouchLabel::Inconclusive),
            Just(TouchLabel::Closed)
        ],
        1..30,
    )
}

fn records(ls: &[TouchLabel]) -> Vec<Record> {
    ls.iter()
        .enumerate()
        .map(|(i, &l)| Record {
            t: i as f64,
            lambda: [1.0, 2.0, 3.0],
            gap2: 0.5,
            label: Some(l),
            dist_left: None,
            dist_right: None,
            sign_changes: 1,
            nodal_domains: 2,
            symmetry_defect: 0.0,
            max_residual: 0.0,
            curves_simple: true,
            impacts_single_loop: true,
            nodal_asymmetry: 0.0,
            refined_label: None,
            n_vertices: 0,
        })
        .collect()
}

proptest! {
    #[test]
    fn accepted_partitions_are_one_flip(ls in labels()) {
        if let Ok(p) = partition(&records(&ls)) {
            let (a, b) = p.bracket.unwrap();
            prop_assert!(a < b);
            prop_assert!(p.right_only.iter().all(|&i| (i as f64) <= a));
            prop_assert!(p.left_only.iter().all(|&i| (i as f64) >= b));
            prop_assert!(p.right_only.iter().all(|i| !p.left_only.contains(i)));
            prop_assert_eq!(p.right_only.len() + p.left_only.len(),
                ls.iter().filter(|l| matches!(l, TouchLabel::RightOnly | TouchLabel::LeftOnly)).count());
        }
    }

    #[test]
    fn blocks_with_noise_are_accepted(a in 1usize..8, b in 0usize..5, c in 1usize..8, closed in any::<bool>()) {
        let mut ls = vec![TouchLabel::RightOnly; a];
        ls.extend(std::iter::repeat(if closed { TouchLabel::Closed } else { TouchLabel::Inconclusive }).take(b));
        ls.extend(std::iter::repeat(TouchLabel::LeftOnly).take(c));
        let p = partition(&records(&ls)).unwrap();
        prop_assert_eq!(p.bracket, Some(((a - 1) as f64, (a + b) as f64)));
        prop_assert_eq!(p.closed.len(), if closed { b } else { 0 });
    }
}
