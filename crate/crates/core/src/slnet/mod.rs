//! Fully connected feedforward networks with tanh hidden layers and an
//! affine output, trained per subspace and stored together in a
//! [`SubspaceBank`].

mod appendix;
mod bank;
mod loss;
mod metrics;
mod optim;
mod train;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use appendix::{loss_expectation_check, LossExpectation};
pub use bank::{
    bank_predict, read_bank, write_bank, BankEntry, BankQuery, Prediction, SubspaceBank,
    BANK_FORMAT,
};
pub use loss::{loss, loss_gradient, LossKind, OutputLink};
pub use metrics::{evaluate, per_sample_f_measure, threshold_filter, Metrics, SampleStats};
pub use optim::{rprop_update, GdState, Optimizer, RpropParams, RpropState, VariableLrParams};
pub use train::{
    gradient, loss_and_gradient, objective, train, train_from, Batch, EpochLog, TrainConfig,
    TrainOutcome,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetArchitecture {
    pub input_dim: usize,
    pub hidden_sizes: Vec<usize>,
    pub output_dim: usize,
}

impl NetArchitecture {
    pub fn new(input_dim: usize, hidden_sizes: Vec<usize>, output_dim: usize) -> Result<Self> {
        let arch = Self {
            input_dim,
            hidden_sizes,
            output_dim,
        };
        arch.validate()?;
        Ok(arch)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 || self.hidden_sizes.contains(&0) {
            return Err(Error::invalid(
                "architecture",
                format!("all layer sizes must be >= 1, got {self:?}"),
            ));
        }
        Ok(())
    }

    /// `(rows, cols)` of each weight matrix, input side first.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut dims = vec![self.input_dim];
        dims.extend(&self.hidden_sizes);
        dims.push(self.output_dim);
        dims.windows(2).map(|w| (w[1], w[0])).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: DMatrix<f64>,
    pub biases: DVector<f64>,
}

/// Weights and biases of every layer. Also used for gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSet {
    pub layers: Vec<Layer>,
}

impl ParameterSet {
    pub fn zeros(arch: &NetArchitecture) -> Self {
        let layers = arch
            .layer_shapes()
            .into_iter()
            .map(|(r, c)| Layer {
                weights: DMatrix::zeros(r, c),
                biases: DVector::zeros(r),
            })
            .collect();
        Self { layers }
    }

    pub fn matches(&self, arch: &NetArchitecture) -> bool {
        let shapes = arch.layer_shapes();
        shapes.len() == self.layers.len()
            && shapes
                .iter()
                .zip(&self.layers)
                .all(|(&(r, c), l)| l.weights.shape() == (r, c) && l.biases.len() == r)
    }

    pub fn len(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every parameter, layer by layer: weights (column-major) then biases.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for l in &self.layers {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(l.biases.as_slice());
        }
        out
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers.iter_mut().flat_map(|l| {
            l.weights
                .as_mut_slice()
                .iter_mut()
                .chain(l.biases.as_mut_slice().iter_mut())
        })
    }

    pub fn add_flat(&mut self, delta: &[f64]) {
        assert_eq!(delta.len(), self.len(), "delta length");
        for (p, d) in self.iter_mut().zip(delta) {
            *p += d;
        }
    }

    pub fn norm(&self) -> f64 {
        self.to_flat().iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Glorot-uniform weights, zero biases.
pub fn init_parameters(arch: &NetArchitecture, seed: u64) -> ParameterSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = ParameterSet::zeros(arch);
    for l in &mut params.layers {
        let (fan_out, fan_in) = l.weights.shape();
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let dist = Uniform::new_inclusive(-limit, limit).expect("finite limit");
        for w in l.weights.as_mut_slice() {
            *w = dist.sample(&mut rng);
        }
    }
    params
}

fn check_input(arch: &NetArchitecture, params: &ParameterSet, input_len: usize) -> Result<()> {
    if !params.matches(arch) {
        return Err(Error::invalid(
            "parameters",
            "shapes do not match the architecture",
        ));
    }
    if input_len != arch.input_dim {
        return Err(Error::DimensionMismatch {
            context: "network input",
            expected: arch.input_dim,
            actual: input_len,
        });
    }
    Ok(())
}

/// Raw (affine) network output for one input vector.
pub fn forward(arch: &NetArchitecture, params: &ParameterSet, x: &[f64]) -> Result<DVector<f64>> {
    check_input(arch, params, x.len())?;
    let last = params.layers.len() - 1;
    let mut h = DVector::from_column_slice(x);
    for (j, l) in params.layers.iter().enumerate() {
        let mut z = &l.biases + &l.weights * &h;
        if j < last {
            z.apply(|v| *v = v.tanh());
        }
        h = z;
    }
    Ok(h)
}

/// Batched forward pass over the columns of `x`; returns the input and the
/// output of every layer.
pub(crate) fn forward_batch(params: &ParameterSet, x: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
    let last = params.layers.len() - 1;
    let mut acts = Vec::with_capacity(params.layers.len() + 1);
    acts.push(x.clone());
    for (j, l) in params.layers.iter().enumerate() {
        let mut z = &l.weights * &acts[j];
        for mut col in z.column_iter_mut() {
            col += &l.biases;
        }
        if j < last {
            z.apply(|v| *v = v.tanh());
        }
        acts.push(z);
    }
    acts
}

/// Raw outputs for every column of `x`.
pub fn forward_many(
    arch: &NetArchitecture,
    params: &ParameterSet,
    x: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    check_input(arch, params, x.nrows())?;
    Ok(forward_batch(params, x).pop().expect("at least one layer"))
}
