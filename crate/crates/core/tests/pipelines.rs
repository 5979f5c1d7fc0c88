//! Cross-module pipelines: network composition, measurement, membership and
//! serialization working together.

use bellnet::behaviors::{behavior_from_quantum, no_signalling_residual, Behavior, Scenario};
use bellnet::bell::{chsh, chsh_measurements, lift, BellFunctional, PostSelection};
use bellnet::distill::{hashing_bound, isotropic_hashing};
use bellnet::measurements::MeasurementAssignment;
use bellnet::polytope::{deterministic_vertices, membership};
use bellnet::protocols::{lambda_swap, star_conditional};
use bellnet::states::{compose_network, isotropic, IsotropicParams, NetworkLayout, StateSpec};
use proptest::prelude::*;

#[test]
fn layout_json_to_verdict() {
    let layout = NetworkLayout::from_json(
        r#"{"parties":["A","B"],"links":[{"state":"iso","p":0.8,"d":2,"assign":["A","B"]}]}"#,
    )
    .unwrap();
    let (state, map) = compose_network(&layout, &layout.build_states().unwrap()).unwrap();
    assert_eq!(map.subsystems_of("B"), Some(&[1][..]));
    let ma = MeasurementAssignment::from_json(&chsh_measurements().to_json().unwrap()).unwrap();
    let b = behavior_from_quantum(&state, &ma).unwrap();
    let b = Behavior::from_json(&b.to_json().unwrap()).unwrap();
    let verdict = membership(&b, &deterministic_vertices(*b.scenario()).unwrap()).unwrap();
    assert!(!verdict.member);
    let cert = BellFunctional::from_json(&verdict.certificate.unwrap().to_json().unwrap()).unwrap();
    assert!(cert.evaluate(&b).unwrap() > cert.bound);
}

#[test]
fn swapped_state_keeps_hashing_consistency() {
    // the swap output is isotropic(p²), so both hashing routes agree
    for p in [0.8, 0.9, 0.97] {
        let link = isotropic(IsotropicParams::new(p, 2).unwrap()).unwrap();
        let (_, out) = lambda_swap(&link, &link).unwrap();
        let direct = hashing_bound(&out, &[1]).unwrap().value;
        assert!((direct - isotropic_hashing(p * p, 2).unwrap()).abs() < 1e-10);
    }
}

#[test]
fn star_of_two_equals_lambda_swap() {
    let link = isotropic(IsotropicParams::new(0.77, 2).unwrap()).unwrap();
    let (prob, out) = lambda_swap(&link, &link).unwrap();
    let star = star_conditional(0.77, 2).unwrap();
    assert!((star.success_prob - prob).abs() < 1e-12);
    assert!(star.conditional.operator().max_abs_diff(out.operator()) < 1e-12);
}

#[test]
fn lifted_functional_round_trips_through_json() {
    let ps = PostSelection::new(vec![2], vec![1], vec![0]).unwrap();
    let f = lift(&chsh(), &ps, Some(&[1, 0])).unwrap();
    let back = BellFunctional::from_json(&f.to_json().unwrap()).unwrap();
    assert_eq!(f, back);
    assert_eq!(back.scenario, Scenario::new(3, 2, 2).unwrap());
}

#[test]
fn lambda_network_behaviors_are_no_signalling() {
    let layout = NetworkLayout::lambda(
        StateSpec::Iso { p: 0.9, d: 2 },
        StateSpec::Iso { p: 0.7, d: 2 },
    );
    let (state, _) = compose_network(&layout, &layout.build_states().unwrap()).unwrap();
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(4);
    for _ in 0..5 {
        let ma =
            bellnet::bell::random_assignment(&mut rng, &[4, 2, 2], Scenario::new(3, 2, 2).unwrap())
                .unwrap();
        let b = behavior_from_quantum(&state, &ma).unwrap();
        assert!(no_signalling_residual(&b) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn isotropic_chsh_membership_follows_visibility(p in 0.0f64..1.0) {
        let b = behavior_from_quantum(
            &isotropic(IsotropicParams::new(p, 2).unwrap()).unwrap(),
            &chsh_measurements(),
        )
        .unwrap();
        let verdict = membership(&b, &deterministic_vertices(*b.scenario()).unwrap()).unwrap();
        let nonlocal = p * 2f64.sqrt() > 1.0 + 1e-9;
        prop_assert_eq!(verdict.member, !nonlocal);
    }
}
