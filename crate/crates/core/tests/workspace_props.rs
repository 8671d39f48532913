use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wssl_core::datagen::{default_scope, sample_manipulator, spherical_wrist_spec};
use wssl_core::kinematics::{DhRow, IkSettings, Manipulator};
use wssl_core::workspace::{
    build_scope, discretize_workspace, discretize_workspace_with, flatten, unflatten, Prefilter,
    ScopeMode,
};

fn arm() -> impl Strategy<Value = Manipulator> {
    proptest::collection::vec((-PI..PI, -0.4..0.4, -0.4..0.4, -PI..PI), 2..5).prop_map(|rows| {
        Manipulator::new(
            rows.into_iter()
                .map(|(t, d, a, al)| DhRow::new(t, d, a, al))
                .collect(),
        )
        .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn prefilter_does_not_change_labels(m in arm(), orient in (-1.0..1.0, -1.0..1.0, -1.0..1.0)) {
        let scope = build_scope([-1.0; 3], [1.0; 3], [0.5; 3], [orient.0, orient.1, orient.2], ScopeMode::ConstantOrientation).unwrap();
        let ik = IkSettings::default();
        let fast = discretize_workspace_with(&m, &scope, &ik, Prefilter::ReachBound).unwrap();
        let full = discretize_workspace_with(&m, &scope, &ik, Prefilter::None).unwrap();
        prop_assert_eq!(fast, full);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flatten_inverts_unflatten(dims in (1usize..9, 1usize..9, 1usize..9), seed in any::<u64>()) {
        let n = dims.0 * dims.1 * dims.2;
        let bits: Vec<bool> = (0..n).map(|i| (seed.rotate_left(i as u32 % 64) ^ i as u64) & 1 == 1).collect();
        let t = unflatten(dims, bits.clone()).unwrap();
        prop_assert_eq!(flatten(&t), bits);
    }
}

#[test]
fn scaling_lengths_and_scope_keeps_labels() {
    let scope = build_scope(
        [-1.0; 3],
        [1.0; 3],
        [0.25; 3],
        [0.0; 3],
        ScopeMode::ConstantOrientation,
    )
    .unwrap();
    let spec = spherical_wrist_spec(0.5, &default_scope(0.5, 0.5).unwrap()).unwrap();
    let ik = IkSettings::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let (m, _) = sample_manipulator(&spec, &mut rng).unwrap();
        let s: f64 = rng.random_range(0.3..3.0);
        let a = discretize_workspace(&m, &scope, &ik).unwrap();
        let b =
            discretize_workspace(&m.scaled(s), &scope.scaled_positions(s), &ik.scaled(s)).unwrap();
        assert_eq!(a, b, "scale {s}");
    }
}

#[test]
fn planar_annulus_matches_analytic_reach() {
    // Two unit links plus a zero-length link so that the identity
    // orientation is attainable at every position in the annulus.
    let m = Manipulator::new(vec![
        DhRow::new(0.0, 0.0, 1.0, 0.0),
        DhRow::new(0.0, 0.0, 1.0, 0.0),
        DhRow::new(0.0, 0.0, 0.0, 0.0),
    ])
    .unwrap();
    let scope = build_scope(
        [-2.5, -2.5, 0.0],
        [2.5, 2.5, 0.0],
        [0.25, 0.25, 1.0],
        [0.0; 3],
        ScopeMode::ConstantOrientation,
    )
    .unwrap();
    // From the stretched zero start the arm cannot move along its own axis,
    // so start bent.
    let ik = IkSettings {
        q0: vec![0.5, 1.0, -1.5],
        ..Default::default()
    };
    let t = discretize_workspace(&m, &scope, &ik).unwrap();
    let (lx, ly, _) = scope.dims();
    let mut agree = 0;
    for i in 1..=lx {
        for j in 1..=ly {
            let [x, y, _] = scope.node_coords(i, j, 1).unwrap();
            let r = (x * x + y * y).sqrt();
            agree += usize::from(t.get(i, j, 1).unwrap() == (r <= 2.0));
        }
    }
    assert_eq!(agree, lx * ly);
}
