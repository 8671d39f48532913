//! Monte-Carlo comparison of two loss expectations under a Gaussian
//! likelihood with identity covariance: the expectation over subspaces in
//! which `x_1` is pinned to a draw `beta ~ N(0, 1)`, and the expectation
//! over the original space where `x_1 ~ N(0, 1)`.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{forward, NetArchitecture, ParameterSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossExpectation {
    /// Mean loss over pinned-`x_1` subspaces.
    pub lhs: f64,
    /// Mean loss over the original input distribution.
    pub rhs: f64,
    /// Standard error of `lhs - rhs`.
    pub stderr: f64,
}

/// Negative log-likelihood of `y` under `N(a(x), I)`.
fn gaussian_nll(y: &DVector<f64>, a: &DVector<f64>) -> f64 {
    let m = y.len() as f64;
    0.5 * m * (2.0 * std::f64::consts::PI).ln() + 0.5 * (y - a).norm_squared()
}

fn mean_and_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Both sides use independent draws; `target` maps an input to its label.
pub fn loss_expectation_check(
    arch: &NetArchitecture,
    params: &ParameterSet,
    target: impl Fn(&[f64]) -> DVector<f64>,
    n_draws: usize,
    seed: u64,
) -> Result<LossExpectation> {
    if n_draws < 2 {
        return Err(Error::invalid("n_draws", "must be >= 2"));
    }
    let n = arch.input_dim;
    let loss_at = |x: &[f64]| -> Result<f64> {
        let a = forward(arch, params, x)?;
        let y = target(x);
        if y.len() != a.len() {
            return Err(Error::DimensionMismatch {
                context: "target output",
                expected: a.len(),
                actual: y.len(),
            });
        }
        Ok(gaussian_nll(&y, &a))
    };

    let mut sub_rng = ChaCha8Rng::seed_from_u64(seed);
    sub_rng.set_stream(1);
    let mut full_rng = ChaCha8Rng::seed_from_u64(seed);
    full_rng.set_stream(2);

    let mut lhs = Vec::with_capacity(n_draws);
    let mut rhs = Vec::with_capacity(n_draws);
    let mut x = vec![0.0; n];
    for _ in 0..n_draws {
        // Subspace: x_1 follows a Dirac at beta, the rest stay normal.
        let beta: f64 = StandardNormal.sample(&mut sub_rng);
        x[0] = beta;
        for v in &mut x[1..] {
            *v = StandardNormal.sample(&mut sub_rng);
        }
        lhs.push(loss_at(&x)?);

        for v in x.iter_mut() {
            *v = StandardNormal.sample(&mut full_rng);
        }
        rhs.push(loss_at(&x)?);
    }
    let (l, lv) = mean_and_var(&lhs);
    let (r, rv) = mean_and_var(&rhs);
    Ok(LossExpectation {
        lhs: l,
        rhs: r,
        stderr: ((lv + rv) / n_draws as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slnet::init_parameters;

    #[test]
    fn zero_residual_gives_the_constant() {
        let arch = NetArchitecture::new(3, vec![4, 4], 2).unwrap();
        let p = init_parameters(&arch, 5);
        let target = |x: &[f64]| forward(&arch, &p, x).unwrap();
        let r = loss_expectation_check(&arch, &p, target, 200, 1).unwrap();
        let c = (2.0 * std::f64::consts::PI).ln();
        assert!((r.lhs - c).abs() < 1e-12);
        assert!((r.rhs - c).abs() < 1e-12);
    }

    #[test]
    fn seeded() {
        let arch = NetArchitecture::new(3, vec![4, 4], 1).unwrap();
        let p = init_parameters(&arch, 5);
        let target = |x: &[f64]| DVector::from_element(1, x.iter().map(|v| v.sin()).sum::<f64>());
        let a = loss_expectation_check(&arch, &p, target, 500, 9).unwrap();
        let b = loss_expectation_check(&arch, &p, target, 500, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(
            a,
            loss_expectation_check(&arch, &p, target, 500, 10).unwrap()
        );
        assert!(loss_expectation_check(&arch, &p, target, 1, 9).is_err());
    }
}
