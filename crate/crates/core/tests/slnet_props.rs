use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wssl_core::datagen::{default_scope, spherical_wrist_spec, SubspaceDescriptor};
use wssl_core::slnet::{
    forward, init_parameters, loss_expectation_check, read_bank, train, write_bank, BankEntry,
    Batch, NetArchitecture, OutputLink, SubspaceBank, TrainConfig,
};

fn descriptor(id: &str, slice: [usize; 2]) -> SubspaceDescriptor {
    let scope = default_scope(0.5, 0.5).unwrap();
    SubspaceDescriptor::new(id, spherical_wrist_spec(0.5, &scope).unwrap(), slice).unwrap()
}

fn random_bank(hidden: Vec<usize>, slices: &[[usize; 2]], seed: u64) -> SubspaceBank {
    let mut bank = SubspaceBank::new(hidden).unwrap();
    for (k, s) in slices.iter().enumerate() {
        let d = descriptor(&format!("s{k}"), *s);
        let params = init_parameters(&bank.architecture(&d), seed + k as u64);
        let link = if k % 2 == 0 {
            OutputLink::Identity
        } else {
            OutputLink::Logistic
        };
        bank.insert(BankEntry {
            descriptor: d,
            link,
            params,
        })
        .unwrap();
    }
    bank
}

fn slices() -> impl Strategy<Value = Vec<[usize; 2]>> {
    proptest::collection::vec((1usize..125, 0usize..20), 1..5).prop_map(|v| {
        v.into_iter()
            .map(|(lo, w)| [lo, (lo + w).min(125)])
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bank_text_round_trips(hidden in proptest::collection::vec(1usize..6, 0..3), s in slices(), seed in any::<u64>()) {
        let bank = random_bank(hidden, &s, seed);
        let text = write_bank(&bank).unwrap();
        let back = read_bank(&text).unwrap();
        prop_assert_eq!(&back, &bank);
        prop_assert_eq!(write_bank(&back).unwrap(), text);
    }

    #[test]
    fn training_one_entry_leaves_the_rest(s in slices(), pick in any::<prop::sample::Index>(), seed in any::<u64>()) {
        let mut bank = random_bank(vec![5], &s, seed);
        let before = bank.clone();
        let k = pick.index(bank.len());
        let d = bank.entries()[k].descriptor.clone();
        let arch = bank.architecture(&d);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 12;
        let x = DMatrix::from_fn(arch.input_dim, n, |_, _| rng.random_range(0.0..0.5));
        let y = DMatrix::from_fn(arch.output_dim, n, |_, _| f64::from(u8::from(rng.random_bool(0.3))));
        let batch = Batch::new(x, y).unwrap();
        let cfg = TrainConfig { epochs: 5, seed, ..Default::default() };
        let out = train(&arch, &batch, &batch, &cfg).unwrap();
        bank.insert(BankEntry { descriptor: d, link: OutputLink::Identity, params: out.params }).unwrap();
        for (i, (a, b)) in bank.entries().iter().zip(before.entries()).enumerate() {
            if i != k {
                prop_assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn forward_is_deterministic(seed in any::<u64>(), x in proptest::collection::vec(-2.0f64..2.0, 4)) {
        let arch = NetArchitecture::new(4, vec![7, 3], 5).unwrap();
        let p = init_parameters(&arch, seed);
        let a = forward(&arch, &p, &x).unwrap();
        let b = forward(&arch, &p.clone(), &x.clone()).unwrap();
        prop_assert!(a.iter().zip(b.iter()).all(|(u, v)| u.to_bits() == v.to_bits()));
    }
}

#[test]
fn subspace_and_full_loss_expectations_agree() {
    let arch = NetArchitecture::new(3, vec![6, 5], 1).unwrap();
    let p = init_parameters(&arch, 17);
    let target = |x: &[f64]| DVector::from_element(1, x[0] * x[1] - 0.5 * x[2]);
    let r = loss_expectation_check(&arch, &p, target, 10_000, 3).unwrap();
    assert!((r.lhs - r.rhs).abs() <= 3.0 * r.stderr, "{r:?}");
}

fn r_squared(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}

#[test]
fn forward_time_is_affine_in_output_width() {
    let widths = [500usize, 1000, 2000, 3000, 4000, 6000, 8000];
    let x = [0.1, 0.2, 0.3, 0.4];
    let mut times = Vec::new();
    for &w in &widths {
        let arch = NetArchitecture::new(4, vec![40, 40], w).unwrap();
        let p = init_parameters(&arch, 1);
        let mut samples: Vec<f64> = (0..31)
            .map(|_| {
                let t = Instant::now();
                for _ in 0..20 {
                    std::hint::black_box(forward(&arch, &p, std::hint::black_box(&x)).unwrap());
                }
                t.elapsed().as_secs_f64()
            })
            .collect();
        samples.sort_by(f64::total_cmp);
        times.push(samples[15]);
    }
    let w: Vec<f64> = widths.iter().map(|v| *v as f64).collect();
    let r2 = r_squared(&w, &times);
    assert!(r2 >= 0.9, "R^2 = {r2}, times {times:?}");
}
