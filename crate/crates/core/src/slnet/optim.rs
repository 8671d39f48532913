use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    Rprop,
    GradientDescent,
    VariableLrGradientDescent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RpropParams {
    pub eta_plus: f64,
    pub eta_minus: f64,
    pub delta0: f64,
    pub delta_min: f64,
    pub delta_max: f64,
}

impl Default for RpropParams {
    fn default() -> Self {
        Self {
            eta_plus: 1.2,
            eta_minus: 0.5,
            delta0: 0.07,
            delta_min: 1e-9,
            delta_max: 50.0,
        }
    }
}

impl RpropParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta_plus > 1.0 && self.eta_minus < 1.0 && self.eta_minus > 0.0) {
            return Err(Error::invalid("rprop", "need eta_plus > 1 > eta_minus > 0"));
        }
        if !(self.delta_min > 0.0 && self.delta_min <= self.delta0 && self.delta0 <= self.delta_max)
        {
            return Err(Error::invalid(
                "rprop",
                "need 0 < delta_min <= delta0 <= delta_max",
            ));
        }
        Ok(())
    }
}

/// Per-component step sizes and the gradient remembered from the last step.
#[derive(Debug, Clone, PartialEq)]
pub struct RpropState {
    pub params: RpropParams,
    pub steps: Vec<f64>,
    pub previous: Vec<f64>,
}

impl RpropState {
    pub fn new(params: RpropParams, len: usize) -> Self {
        Self {
            params,
            steps: vec![params.delta0; len],
            previous: vec![0.0; len],
        }
    }
}

/// One Rprop- step (no weight backtracking). On a sign change the step
/// shrinks, the component stays put, and its remembered gradient is zeroed
/// so the next step does not adapt again.
pub fn rprop_update(state: &mut RpropState, gradient: &[f64]) -> Vec<f64> {
    assert_eq!(gradient.len(), state.steps.len(), "gradient length");
    let p = state.params;
    gradient
        .iter()
        .zip(state.steps.iter_mut().zip(state.previous.iter_mut()))
        .map(|(&g, (step, prev))| {
            let trend = g * *prev;
            if trend < 0.0 {
                *step = (*step * p.eta_minus).max(p.delta_min);
                *prev = 0.0;
                return 0.0;
            }
            if trend > 0.0 {
                *step = (*step * p.eta_plus).min(p.delta_max);
            }
            *prev = g;
            if g > 0.0 {
                -*step
            } else if g < 0.0 {
                *step
            } else {
                0.0
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VariableLrParams {
    pub increase: f64,
    pub decrease: f64,
    /// Largest tolerated loss ratio before a step is rejected.
    pub max_loss_increase: f64,
}

impl Default for VariableLrParams {
    fn default() -> Self {
        Self {
            increase: 1.05,
            decrease: 0.7,
            max_loss_increase: 1.04,
        }
    }
}

/// Learning rate of the gradient-descent trainers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdState {
    pub learning_rate: f64,
}

impl GdState {
    pub fn step(&self, gradient: &[f64]) -> Vec<f64> {
        gradient.iter().map(|g| -self.learning_rate * g).collect()
    }
}
