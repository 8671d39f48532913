//! Voxel scopes and binary workspace maps.
//!
//! A [`Scope`] stores one coordinate vector per axis; the grid nodes are all
//! combinations of their entries. Node indices at the public surface are
//! 1-based and flatten with `i` outermost and `k` innermost.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{inverse_kinematics, rpy_to_rotation, IkSettings, Manipulator, Pose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScopeMode {
    /// Grid over positions, orientation fixed to `fixed` (roll, pitch, yaw).
    ConstantOrientation,
    /// Grid over roll/pitch/yaw, position fixed to `fixed`.
    Orientation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scope {
    pub axes: [Vec<f64>; 3],
    pub deltas: [f64; 3],
    pub fixed: [f64; 3],
    pub mode: ScopeMode,
}

pub fn build_scope(
    range_min: [f64; 3],
    range_max: [f64; 3],
    delta: [f64; 3],
    fixed: [f64; 3],
    mode: ScopeMode,
) -> Result<Scope> {
    const AXES: [&str; 3] = ["x", "y", "z"];
    let mut axes: [Vec<f64>; 3] = Default::default();
    for d in 0..3 {
        let (lo, hi, step) = (range_min[d], range_max[d], delta[d]);
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::invalid(
                format!("delta.{}", AXES[d]),
                "must be positive and finite",
            ));
        }
        if !(lo.is_finite() && hi.is_finite()) || hi < lo {
            return Err(Error::invalid(
                format!("range.{}", AXES[d]),
                format!("need finite min <= max, got [{lo}, {hi}]"),
            ));
        }
        let count = ((hi - lo) / step + 0.5).floor() as usize + 1;
        axes[d] = (0..count).map(|i| lo + i as f64 * step).collect();
    }
    if fixed.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("fixed", "entries must be finite"));
    }
    Ok(Scope {
        axes,
        deltas: delta,
        fixed,
        mode,
    })
}

impl Scope {
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.axes[0].len(), self.axes[1].len(), self.axes[2].len())
    }

    pub fn node_count(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    /// Grid coordinates of node `(i, j, k)`, 1-based.
    pub fn node_coords(&self, i: usize, j: usize, k: usize) -> Result<[f64; 3]> {
        let (lx, ly, lz) = self.dims();
        if i == 0 || j == 0 || k == 0 || i > lx || j > ly || k > lz {
            return Err(Error::OutOfRange(format!(
                "node ({i}, {j}, {k}) outside 1..=({lx}, {ly}, {lz})"
            )));
        }
        Ok([
            self.axes[0][i - 1],
            self.axes[1][j - 1],
            self.axes[2][k - 1],
        ])
    }

    /// Scope values in input-vector order: n_x, n_y, n_z, then the fixed element.
    pub fn input_elements(&self) -> Vec<f64> {
        self.axes
            .iter()
            .flatten()
            .chain(self.fixed.iter())
            .copied()
            .collect()
    }

    /// Copy with every position coordinate multiplied by `s`: the grid axes
    /// in constant-orientation mode, the fixed point in orientation mode.
    pub fn scaled_positions(&self, s: f64) -> Scope {
        let mut out = self.clone();
        match self.mode {
            ScopeMode::ConstantOrientation => {
                for axis in out.axes.iter_mut() {
                    axis.iter_mut().for_each(|v| *v *= s);
                }
                out.deltas.iter_mut().for_each(|v| *v *= s);
            }
            ScopeMode::Orientation => out.fixed.iter_mut().for_each(|v| *v *= s),
        }
        out
    }

    fn pose_at(&self, coords: [f64; 3]) -> Pose {
        match self.mode {
            ScopeMode::ConstantOrientation => Pose::new(coords.into(), rpy_to_rotation(self.fixed)),
            ScopeMode::Orientation => Pose::new(self.fixed.into(), rpy_to_rotation(coords)),
        }
    }
}

pub fn node_pose(scope: &Scope, i: usize, j: usize, k: usize) -> Result<Pose> {
    Ok(scope.pose_at(scope.node_coords(i, j, k)?))
}

/// Occupancy over a scope's grid, stored in flatten order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitTensor {
    dims: (usize, usize, usize),
    bits: Vec<bool>,
}

impl BitTensor {
    pub fn zeros(dims: (usize, usize, usize)) -> Self {
        Self {
            dims,
            bits: vec![false; dims.0 * dims.1 * dims.2],
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    fn offset(&self, i: usize, j: usize, k: usize) -> Result<usize> {
        let (lx, ly, lz) = self.dims;
        if i == 0 || j == 0 || k == 0 || i > lx || j > ly || k > lz {
            return Err(Error::OutOfRange(format!(
                "voxel ({i}, {j}, {k}) outside 1..=({lx}, {ly}, {lz})"
            )));
        }
        Ok(((i - 1) * ly + (j - 1)) * lz + (k - 1))
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> Result<bool> {
        Ok(self.bits[self.offset(i, j, k)?])
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, value: bool) -> Result<()> {
        let c = self.offset(i, j, k)?;
        self.bits[c] = value;
        Ok(())
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Text export: one `0`/`1` character per node in flatten order.
    pub fn to_bit_string(&self) -> String {
        self.bits
            .iter()
            .map(|b| if *b { '1' } else { '0' })
            .collect()
    }
}

pub fn flatten(tensor: &BitTensor) -> Vec<bool> {
    tensor.bits.clone()
}

pub fn unflatten(dims: (usize, usize, usize), bits: Vec<bool>) -> Result<BitTensor> {
    let expected = dims.0 * dims.1 * dims.2;
    if bits.len() != expected {
        return Err(Error::DimensionMismatch {
            context: "unflatten",
            expected,
            actual: bits.len(),
        });
    }
    Ok(BitTensor { dims, bits })
}

/// Elements `lo..=hi` of `y`, 1-based.
pub fn slice_output(y: &[bool], lo: usize, hi: usize) -> Result<Vec<bool>> {
    if lo == 0 || lo > hi || hi > y.len() {
        return Err(Error::OutOfRange(format!(
            "slice {lo}..={hi} invalid for length {}",
            y.len()
        )));
    }
    Ok(y[lo - 1..hi].to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prefilter {
    /// Skip IK for nodes farther than reach bound plus tolerance.
    ReachBound,
    None,
}

pub fn discretize_workspace(m: &Manipulator, scope: &Scope, ik: &IkSettings) -> Result<BitTensor> {
    discretize_workspace_with(m, scope, ik, Prefilter::ReachBound)
}

pub fn discretize_workspace_with(
    m: &Manipulator,
    scope: &Scope,
    ik: &IkSettings,
    prefilter: Prefilter,
) -> Result<BitTensor> {
    ik.validate()?;
    let (lx, ly, lz) = scope.dims();
    let limit = m.reach_bound() + ik.tolerance;
    let bits = (0..lx * ly * lz)
        .into_par_iter()
        .map(|c| {
            let (i, rem) = (c / (ly * lz), c % (ly * lz));
            let (j, k) = (rem / lz, rem % lz);
            let pose = scope.pose_at([scope.axes[0][i], scope.axes[1][j], scope.axes[2][k]]);
            if prefilter == Prefilter::ReachBound && pose.position.norm() > limit {
                return Ok(false);
            }
            Ok(inverse_kinematics(m, &pose, ik)?.is_solved())
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(BitTensor {
        dims: (lx, ly, lz),
        bits,
    })
}

/// Point-cloud CSV with header `x,y,z,bit` or `roll,pitch,yaw,bit`.
pub fn point_cloud_csv(scope: &Scope, tensor: &BitTensor) -> Result<String> {
    if scope.dims() != tensor.dims() {
        return Err(Error::DimensionMismatch {
            context: "point cloud",
            expected: scope.node_count(),
            actual: tensor.len(),
        });
    }
    let mut out = String::from(match scope.mode {
        ScopeMode::ConstantOrientation => "x,y,z,bit\n",
        ScopeMode::Orientation => "roll,pitch,yaw,bit\n",
    });
    let (lx, ly, lz) = scope.dims();
    for i in 1..=lx {
        for j in 1..=ly {
            for k in 1..=lz {
                let [x, y, z] = scope.node_coords(i, j, k)?;
                let _ = writeln!(out, "{x},{y},{z},{}", tensor.get(i, j, k)? as u8);
            }
        }
    }
    Ok(out)
}
