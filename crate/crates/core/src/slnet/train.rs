use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::loss::{element_grad, element_loss};
use super::optim::{rprop_update, GdState, RpropState};
use super::{
    forward_batch, init_parameters, LossKind, NetArchitecture, Optimizer, ParameterSet,
    RpropParams, VariableLrParams,
};
use crate::datagen::Dataset;
use crate::error::{Error, Result};

/// Samples stored as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
}

impl Batch {
    pub fn new(x: DMatrix<f64>, y: DMatrix<f64>) -> Result<Self> {
        if x.ncols() != y.ncols() {
            return Err(Error::DimensionMismatch {
                context: "batch sample count",
                expected: x.ncols(),
                actual: y.ncols(),
            });
        }
        Ok(Self { x, y })
    }

    pub fn from_dataset(d: &Dataset) -> Self {
        let y: Vec<f64> = d
            .y_bits()
            .iter()
            .map(|b| if *b { 1.0 } else { 0.0 })
            .collect();
        Self {
            x: DMatrix::from_column_slice(d.x_cols(), d.rows(), d.x_values()),
            y: DMatrix::from_column_slice(d.y_cols(), d.rows(), &y),
        }
    }

    pub fn len(&self) -> usize {
        self.x.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check(&self, arch: &NetArchitecture) -> Result<()> {
        if self.x.nrows() != arch.input_dim {
            return Err(Error::DimensionMismatch {
                context: "batch input rows",
                expected: arch.input_dim,
                actual: self.x.nrows(),
            });
        }
        if self.y.nrows() != arch.output_dim {
            return Err(Error::DimensionMismatch {
                context: "batch target rows",
                expected: arch.output_dim,
                actual: self.y.nrows(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub optimizer: Optimizer,
    pub loss: LossKind,
    pub epochs: usize,
    /// Weight of `0.5 * |theta|^2` in the objective.
    pub l2_coefficient: f64,
    pub rprop: RpropParams,
    pub learning_rate: f64,
    pub variable_lr: VariableLrParams,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            optimizer: Optimizer::Rprop,
            loss: LossKind::Mse,
            epochs: 300,
            l2_coefficient: 0.0,
            rprop: RpropParams::default(),
            learning_rate: 0.01,
            variable_lr: VariableLrParams::default(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::invalid("train.epochs", "must be >= 1"));
        }
        self.validate_numbers()
    }

    fn validate_numbers(&self) -> Result<()> {
        if !(self.l2_coefficient >= 0.0 && self.l2_coefficient.is_finite()) {
            return Err(Error::invalid(
                "train.l2_coefficient",
                "must be finite and >= 0",
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid(
                "train.learning_rate",
                "must be finite and > 0",
            ));
        }
        let v = &self.variable_lr;
        if !(v.increase >= 1.0
            && v.decrease > 0.0
            && v.decrease < 1.0
            && v.max_loss_increase >= 1.0)
        {
            return Err(Error::invalid(
                "train.variable_lr",
                "need increase >= 1, 0 < decrease < 1, max_loss_increase >= 1",
            ));
        }
        self.rprop.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub loss: f64,
    pub grad_norm: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: ParameterSet,
    /// Epoch whose parameters were kept; 0 means the initial ones.
    pub best_epoch: usize,
    pub log: Vec<EpochLog>,
}

impl TrainOutcome {
    pub fn grad_norm_history(&self) -> Vec<f64> {
        self.log.iter().map(|l| l.grad_norm).collect()
    }

    pub fn log_csv(&self) -> String {
        let mut out = String::from("epoch,loss,grad_norm,val_loss\n");
        for l in &self.log {
            out.push_str(&format!(
                "{},{},{},{}\n",
                l.epoch, l.loss, l.grad_norm, l.val_loss
            ));
        }
        out
    }
}

fn half_sq_norm(params: &ParameterSet) -> f64 {
    0.5 * params.to_flat().iter().map(|v| v * v).sum::<f64>()
}

/// Batch-mean loss plus the L2 term.
pub fn objective(
    arch: &NetArchitecture,
    params: &ParameterSet,
    batch: &Batch,
    config: &TrainConfig,
) -> Result<f64> {
    batch.check(arch)?;
    let out = forward_batch(params, &batch.x)
        .pop()
        .expect("at least one layer");
    Ok(mean_loss(config.loss, &out, &batch.y) + config.l2_coefficient * half_sq_norm(params))
}

fn mean_loss(kind: LossKind, out: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    let total: f64 = out
        .iter()
        .zip(y.iter())
        .map(|(a, b)| element_loss(kind, *a, *b))
        .sum();
    total / out.len() as f64
}

/// Objective value and its exact gradient by backpropagation.
pub fn loss_and_gradient(
    arch: &NetArchitecture,
    params: &ParameterSet,
    batch: &Batch,
    config: &TrainConfig,
) -> Result<(f64, ParameterSet)> {
    batch.check(arch)?;
    if batch.is_empty() {
        return Err(Error::invalid("batch", "must contain at least one sample"));
    }
    let mut acts = forward_batch(params, &batch.x);
    let out = acts.pop().expect("at least one layer");
    let n = out.len() as f64;
    let value =
        mean_loss(config.loss, &out, &batch.y) + config.l2_coefficient * half_sq_norm(params);

    let mut delta = out.zip_map(&batch.y, |a, b| element_grad(config.loss, a, b) / n);
    let mut grad = ParameterSet::zeros(arch);
    for j in (0..params.layers.len()).rev() {
        let input = &acts[j];
        let g = &mut grad.layers[j];
        g.weights = &delta * input.transpose();
        g.biases = delta.column_sum();
        if j > 0 {
            let mut back = params.layers[j].weights.transpose() * &delta;
            back.zip_apply(input, |d, h| *d *= 1.0 - h * h);
            delta = back;
        }
    }
    if config.l2_coefficient != 0.0 {
        for (g, p) in grad.iter_mut().zip(params.to_flat()) {
            *g += config.l2_coefficient * p;
        }
    }
    Ok((value, grad))
}

pub fn gradient(
    arch: &NetArchitecture,
    params: &ParameterSet,
    batch: &Batch,
    config: &TrainConfig,
) -> Result<ParameterSet> {
    loss_and_gradient(arch, params, batch, config).map(|(_, g)| g)
}

enum Stepper {
    Rprop(RpropState),
    Fixed(GdState),
    Variable(GdState),
}

/// Full-batch training from seeded initial parameters.
pub fn train(
    arch: &NetArchitecture,
    train_set: &Batch,
    validation: &Batch,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    let init = init_parameters(arch, config.seed);
    train_from(arch, init, train_set, validation, config)
}

/// Full-batch training from the given parameters. Each epoch is one
/// parameter update; the returned parameters are those with the lowest
/// validation loss (training loss when the validation batch is empty).
pub fn train_from(
    arch: &NetArchitecture,
    init: ParameterSet,
    train_set: &Batch,
    validation: &Batch,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    arch.validate()?;
    config.validate_numbers()?;
    if !init.matches(arch) {
        return Err(Error::invalid(
            "parameters",
            "shapes do not match the architecture",
        ));
    }
    train_set.check(arch)?;
    validation.check(arch)?;

    let select = |train_loss: f64, params: &ParameterSet| -> Result<f64> {
        if validation.is_empty() {
            Ok(train_loss)
        } else {
            objective(arch, params, validation, config)
        }
    };

    let mut params = init;
    let (mut loss, mut grad) = loss_and_gradient(arch, &params, train_set, config)?;
    let mut best_val = select(loss, &params)?;
    let mut best = (0, params.clone());
    let mut stepper = match config.optimizer {
        Optimizer::Rprop => Stepper::Rprop(RpropState::new(config.rprop, params.len())),
        Optimizer::GradientDescent => Stepper::Fixed(GdState {
            learning_rate: config.learning_rate,
        }),
        Optimizer::VariableLrGradientDescent => Stepper::Variable(GdState {
            learning_rate: config.learning_rate,
        }),
    };
    let mut log = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        let g = grad.to_flat();
        match &mut stepper {
            Stepper::Rprop(state) => {
                params.add_flat(&rprop_update(state, &g));
                (loss, grad) = loss_and_gradient(arch, &params, train_set, config)?;
            }
            Stepper::Fixed(state) => {
                params.add_flat(&state.step(&g));
                (loss, grad) = loss_and_gradient(arch, &params, train_set, config)?;
            }
            Stepper::Variable(state) => {
                let mut trial = params.clone();
                trial.add_flat(&state.step(&g));
                let (trial_loss, trial_grad) = loss_and_gradient(arch, &trial, train_set, config)?;
                let v = &config.variable_lr;
                if trial_loss > loss * v.max_loss_increase || trial_loss.is_nan() {
                    state.learning_rate *= v.decrease;
                } else {
                    if trial_loss < loss {
                        state.learning_rate *= v.increase;
                    }
                    params = trial;
                    (loss, grad) = (trial_loss, trial_grad);
                }
            }
        }
        if !loss.is_finite() {
            return Err(Error::Divergence { epoch, loss });
        }
        let val_loss = select(loss, &params)?;
        if !val_loss.is_finite() {
            return Err(Error::Divergence {
                epoch,
                loss: val_loss,
            });
        }
        log.push(EpochLog {
            epoch,
            loss,
            grad_norm: grad.norm(),
            val_loss,
        });
        if val_loss < best_val {
            best_val = val_loss;
            best = (epoch, params.clone());
        }
    }
    Ok(TrainOutcome {
        params: best.1,
        best_epoch: best.0,
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slnet::{forward_many, Layer};
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_batch(arch: &NetArchitecture, n: usize, seed: u64, binary: bool) -> Batch {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(arch.input_dim, n, |_, _| rng.random_range(-1.0..1.0));
        let y = DMatrix::from_fn(arch.output_dim, n, |_, _| {
            if binary {
                if rng.random_bool(0.5) {
                    1.0
                } else {
                    0.0
                }
            } else {
                rng.random_range(-1.0..1.0)
            }
        });
        Batch::new(x, y).unwrap()
    }

    #[test]
    fn zero_residual_gives_zero_gradient() {
        let arch = NetArchitecture::new(3, vec![5], 2).unwrap();
        let p = init_parameters(&arch, 4);
        let b = random_batch(&arch, 7, 1, false);
        let y = forward_many(&arch, &p, &b.x).unwrap();
        let b = Batch::new(b.x, y).unwrap();
        let cfg = TrainConfig::default();
        let g = gradient(&arch, &p, &b, &cfg).unwrap();
        assert!(g.to_flat().iter().all(|v| v.abs() < 1e-15));

        let cfg = TrainConfig {
            l2_coefficient: 0.3,
            ..Default::default()
        };
        let g = gradient(&arch, &p, &b, &cfg).unwrap();
        for (a, w) in g.to_flat().iter().zip(p.to_flat()) {
            assert!((a - 0.3 * w).abs() < 1e-15);
        }
    }

    #[test]
    fn matches_finite_differences() {
        let h = 1e-5;
        for (k, hidden) in [vec![4], vec![5, 3], vec![3, 4, 2]].into_iter().enumerate() {
            for loss in [LossKind::Mse, LossKind::Mae, LossKind::CrossEntropy] {
                let arch = NetArchitecture::new(3, hidden.clone(), 2).unwrap();
                let p = init_parameters(&arch, k as u64);
                let b = random_batch(&arch, 6, 10 + k as u64, loss == LossKind::CrossEntropy);
                let cfg = TrainConfig {
                    loss,
                    l2_coefficient: 0.01,
                    ..Default::default()
                };
                let g = gradient(&arch, &p, &b, &cfg).unwrap().to_flat();
                let base = p.to_flat();
                for i in 0..base.len() {
                    let mut step = vec![0.0; base.len()];
                    step[i] = h;
                    let mut plus = p.clone();
                    plus.add_flat(&step);
                    step[i] = -h;
                    let mut minus = p.clone();
                    minus.add_flat(&step);
                    let fd = (objective(&arch, &plus, &b, &cfg).unwrap()
                        - objective(&arch, &minus, &b, &cfg).unwrap())
                        / (2.0 * h);
                    let rel = (fd - g[i]).abs() / g[i].abs().max(fd.abs()).max(1e-3);
                    assert!(
                        rel <= 1e-5,
                        "{loss:?} {hidden:?} param {i}: {} vs {fd}",
                        g[i]
                    );
                }
            }
        }
    }

    #[test]
    fn history_and_best_epoch() {
        let arch = NetArchitecture::new(2, vec![6], 1).unwrap();
        let b = random_batch(&arch, 40, 3, true);
        let cfg = TrainConfig {
            epochs: 25,
            ..Default::default()
        };
        let out = train(&arch, &b, &b, &cfg).unwrap();
        assert_eq!(out.grad_norm_history().len(), 25);
        assert_eq!(out.log.len(), 25);
        let best = out
            .log
            .iter()
            .map(|l| l.val_loss)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(out.log[out.best_epoch - 1].val_loss, best);
        assert!(out
            .log_csv()
            .starts_with("epoch,loss,grad_norm,val_loss\n1,"));
        assert_eq!(out, train(&arch, &b, &b, &cfg).unwrap());
    }

    #[test]
    fn no_epochs_returns_init() {
        let arch = NetArchitecture::new(2, vec![3], 1).unwrap();
        let b = random_batch(&arch, 5, 3, false);
        let cfg = TrainConfig {
            epochs: 0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let out = train(&arch, &b, &b, &cfg).unwrap();
        assert_eq!(out.params, init_parameters(&arch, 0));
        assert_eq!(out.best_epoch, 0);
        assert!(out.log.is_empty());
    }

    #[test]
    fn rprop_reaches_small_gradient_on_quadratic() {
        // Single linear unit, one sample: loss = (w + b - 3)^2.
        let arch = NetArchitecture::new(1, vec![], 1).unwrap();
        let b = Batch::new(
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 3.0),
        )
        .unwrap();
        let mut p = ParameterSet {
            layers: vec![Layer {
                weights: DMatrix::zeros(1, 1),
                biases: DVector::zeros(1),
            }],
        };
        let cfg = TrainConfig::default();
        let mut state = RpropState::new(cfg.rprop, 2);
        let mut reached = false;
        for _ in 0..100 {
            let g = gradient(&arch, &p, &b, &cfg).unwrap();
            if g.norm() < 1e-6 {
                reached = true;
                break;
            }
            p.add_flat(&rprop_update(&mut state, &g.to_flat()));
        }
        assert!(reached);
    }

    #[test]
    fn divergence_names_epoch() {
        let arch = NetArchitecture::new(1, vec![], 1).unwrap();
        let b = Batch::new(
            DMatrix::from_element(1, 1, 1e200),
            DMatrix::from_element(1, 1, 0.0),
        )
        .unwrap();
        let cfg = TrainConfig {
            optimizer: Optimizer::GradientDescent,
            learning_rate: 1.0,
            epochs: 5,
            ..Default::default()
        };
        let init = ParameterSet {
            layers: vec![Layer {
                weights: DMatrix::from_element(1, 1, 1.0),
                biases: DVector::zeros(1),
            }],
        };
        match train_from(
            &arch,
            init,
            &b,
            &Batch::new(DMatrix::zeros(1, 0), DMatrix::zeros(1, 0)).unwrap(),
            &cfg,
        ) {
            Err(Error::Divergence { epoch, .. }) => assert_eq!(epoch, 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn gradient_descent_variants_reduce_loss() {
        let arch = NetArchitecture::new(3, vec![8], 2).unwrap();
        let b = random_batch(&arch, 50, 9, false);
        for optimizer in [
            Optimizer::GradientDescent,
            Optimizer::VariableLrGradientDescent,
            Optimizer::Rprop,
        ] {
            let cfg = TrainConfig {
                optimizer,
                epochs: 50,
                learning_rate: 0.05,
                ..Default::default()
            };
            let out = train(&arch, &b, &b, &cfg).unwrap();
            let first = objective(&arch, &init_parameters(&arch, 0), &b, &cfg).unwrap();
            assert!(out.log.last().unwrap().loss < first, "{optimizer:?}");
        }
    }

    #[test]
    fn batch_dimension_errors() {
        let arch = NetArchitecture::new(2, vec![3], 1).unwrap();
        let b = random_batch(&NetArchitecture::new(3, vec![3], 1).unwrap(), 4, 0, false);
        assert!(gradient(
            &arch,
            &init_parameters(&arch, 0),
            &b,
            &TrainConfig::default()
        )
        .is_err());
        assert!(Batch::new(DMatrix::zeros(2, 3), DMatrix::zeros(1, 2)).is_err());
    }
}
