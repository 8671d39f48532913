use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wssl_core::datagen::{
    default_scope, generate_dataset, sample_manipulator, spherical_wrist_spec, split_indices,
    write_dataset, ElementDist, SubspaceDescriptor,
};
use wssl_core::kinematics::IkSettings;

fn draws(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let scope = default_scope(0.5, 0.5).unwrap();
    let spec = spherical_wrist_spec(0.5, &scope).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| sample_manipulator(&spec, &mut rng).unwrap().1)
        .collect()
}

#[test]
fn uniform_elements_pass_kolmogorov_smirnov() {
    let scope = default_scope(0.5, 0.5).unwrap();
    let spec = spherical_wrist_spec(0.5, &scope).unwrap();
    let n = 10_000;
    let xs = draws(n, 21);
    // Asymptotic 1% critical value.
    let critical = 1.628 / (n as f64).sqrt();
    for (idx, dist) in spec.elements().enumerate() {
        let ElementDist::Uniform { lo, hi } = *dist else {
            assert!(xs.iter().all(|x| ElementDist::Dirac(x[idx]) == *dist));
            continue;
        };
        let mut v: Vec<f64> = xs.iter().map(|x| x[idx]).collect();
        v.sort_by(f64::total_cmp);
        let d = v
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let cdf = (x - lo) / (hi - lo);
                (cdf - i as f64 / n as f64).max((i + 1) as f64 / n as f64 - cdf)
            })
            .fold(0.0, f64::max);
        assert!(d < critical, "element {idx}: D = {d}");
    }
}

#[test]
fn d3_mean_is_a_quarter() {
    let n = 100_000;
    let mean = draws(n, 5).iter().map(|x| x[2]).sum::<f64>() / n as f64;
    let stderr = 0.5 / 12f64.sqrt() / (n as f64).sqrt();
    assert!((mean - 0.25).abs() <= 3.0 * stderr, "mean {mean}");
}

#[test]
fn dataset_bytes_depend_only_on_inputs() {
    let scope = default_scope(0.5, 0.5).unwrap();
    let spec = spherical_wrist_spec(0.5, &scope).unwrap();
    let desc = SubspaceDescriptor::full("sw", spec).unwrap();
    let ik = IkSettings::default();
    let bytes = |seed| {
        let mut buf = Vec::new();
        write_dataset(
            &mut buf,
            &generate_dataset(12, &desc, &scope, &ik, seed).unwrap(),
        )
        .unwrap();
        buf
    };
    let a = bytes(4);
    assert_eq!(a, bytes(4));
    assert_ne!(a, bytes(5));
}

proptest! {
    #[test]
    fn splits_partition_the_rows(n in 40usize..500, v in 0.05f64..0.4, t in 0.05f64..0.4, seed in any::<u64>()) {
        let [train, val, test] = split_indices(n, [1.0 - v - t, v, t], seed).unwrap();
        prop_assert_eq!(val.len(), (n as f64 * v).floor() as usize);
        prop_assert_eq!(test.len(), (n as f64 * t).floor() as usize);
        let mut all: Vec<usize> = train.iter().chain(&val).chain(&test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
    }
}
