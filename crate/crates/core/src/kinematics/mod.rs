//! Denavit-Hartenberg kinematics for all-revolute serial-link arms.
//!
//! Frames follow the standard (distal) convention: joint `i` rotates about
//! the z axis of frame `i-1`, and each row composes as
//! `Rz(theta) * Tz(d) * Tx(a) * Rx(alpha)`.

mod ik;

use std::fmt::Write as _;

use nalgebra::{Matrix3, Matrix4, Matrix6xX, Rotation3, UnitQuaternion, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ik::{
    inverse_kinematics, inverse_kinematics_traced, IkOutcome, IkSettings, NoSolutionReason,
};

/// One row of a DH table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DhRow {
    /// Constant added to the joint variable.
    pub theta_offset: f64,
    pub d: f64,
    pub a: f64,
    pub alpha: f64,
}

impl DhRow {
    pub fn new(theta_offset: f64, d: f64, a: f64, alpha: f64) -> Self {
        Self {
            theta_offset,
            d,
            a,
            alpha,
        }
    }

    fn is_finite(&self) -> bool {
        self.theta_offset.is_finite()
            && self.d.is_finite()
            && self.a.is_finite()
            && self.alpha.is_finite()
    }
}

/// An all-revolute serial-link manipulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<DhRow>", into = "Vec<DhRow>")]
pub struct Manipulator {
    rows: Vec<DhRow>,
}

impl TryFrom<Vec<DhRow>> for Manipulator {
    type Error = Error;

    fn try_from(rows: Vec<DhRow>) -> Result<Self> {
        Manipulator::new(rows)
    }
}

impl From<Manipulator> for Vec<DhRow> {
    fn from(m: Manipulator) -> Self {
        m.rows
    }
}

impl Manipulator {
    pub fn new(rows: Vec<DhRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("manipulator", "needs at least one DH row"));
        }
        if let Some(i) = rows.iter().position(|r| !r.is_finite()) {
            return Err(Error::invalid(
                "manipulator",
                format!("row {} has a non-finite entry", i + 1),
            ));
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[DhRow] {
        &self.rows
    }

    pub fn dof(&self) -> usize {
        self.rows.len()
    }

    /// Upper bound on the distance from the base origin to the end effector.
    pub fn reach_bound(&self) -> f64 {
        self.rows.iter().map(|r| r.a.abs() + r.d.abs()).sum()
    }

    /// Copy with every link offset and length multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|r| DhRow::new(r.theta_offset, r.d * s, r.a * s, r.alpha))
            .collect();
        Self { rows }
    }

    /// Parses a whitespace-separated table, one `theta_offset d a alpha`
    /// row per line. Blank lines and `#` comments are skipped.
    pub fn from_table(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(Error::format(
                    "DH table",
                    format!(
                        "line {} has {} fields, expected 4",
                        lineno + 1,
                        fields.len()
                    ),
                ));
            }
            let mut vals = [0.0; 4];
            for (v, f) in vals.iter_mut().zip(&fields) {
                *v = f.parse().map_err(|_| {
                    Error::format(
                        "DH table",
                        format!("line {}: cannot parse {f:?}", lineno + 1),
                    )
                })?;
            }
            rows.push(DhRow::new(vals[0], vals[1], vals[2], vals[3]));
        }
        Manipulator::new(rows)
    }

    pub fn to_table(&self) -> String {
        let mut out = String::from("# theta_offset d a alpha\n");
        for r in &self.rows {
            let _ = writeln!(out, "{} {} {} {}", r.theta_offset, r.d, r.a, r.alpha);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vector3<f64>,
    pub rotation: Matrix3<f64>,
}

impl Pose {
    pub fn new(position: Vector3<f64>, rotation: Matrix3<f64>) -> Self {
        Self { position, rotation }
    }

    pub fn identity() -> Self {
        Self::new(Vector3::zeros(), Matrix3::identity())
    }

    pub fn from_homogeneous(t: &Matrix4<f64>) -> Self {
        Self {
            position: t.fixed_view::<3, 1>(0, 3).into_owned(),
            rotation: t.fixed_view::<3, 3>(0, 0).into_owned(),
        }
    }

    /// Largest entry of `|R^T R - I|`.
    pub fn orthonormality_error(&self) -> f64 {
        (self.rotation.transpose() * self.rotation - Matrix3::identity()).amax()
    }
}

/// Joint angles in radians, one per DH row.
#[derive(Debug, Clone, PartialEq)]
pub struct JointConfig(pub Vec<f64>);

impl JointConfig {
    pub fn zeros(n: usize) -> Self {
        JointConfig(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for JointConfig {
    fn from(q: Vec<f64>) -> Self {
        JointConfig(q)
    }
}

pub fn dh_transform(row: &DhRow, q: f64) -> Matrix4<f64> {
    let (st, ct) = (row.theta_offset + q).sin_cos();
    let (sa, ca) = row.alpha.sin_cos();
    Matrix4::new(
        ct,
        -st * ca,
        st * sa,
        row.a * ct,
        st,
        ct * ca,
        -ct * sa,
        row.a * st,
        0.0,
        sa,
        ca,
        row.d,
        0.0,
        0.0,
        0.0,
        1.0,
    )
}

fn check_dims(m: &Manipulator, q: &JointConfig) -> Result<()> {
    if q.len() != m.dof() {
        return Err(Error::DimensionMismatch {
            context: "joint configuration",
            expected: m.dof(),
            actual: q.len(),
        });
    }
    Ok(())
}

/// Cumulative base-to-frame transforms; element 0 is the base frame.
pub(crate) fn frames(m: &Manipulator, q: &[f64]) -> Vec<Matrix4<f64>> {
    let mut out = Vec::with_capacity(m.dof() + 1);
    let mut t = Matrix4::identity();
    out.push(t);
    for (row, qi) in m.rows.iter().zip(q) {
        t *= dh_transform(row, *qi);
        out.push(t);
    }
    out
}

pub fn forward_kinematics(m: &Manipulator, q: &JointConfig) -> Result<Pose> {
    check_dims(m, q)?;
    let t = m
        .rows
        .iter()
        .zip(q.as_slice())
        .fold(Matrix4::identity(), |acc, (row, qi)| {
            acc * dh_transform(row, *qi)
        });
    Ok(Pose::from_homogeneous(&t))
}

pub(crate) fn jacobian_from_frames(frames: &[Matrix4<f64>]) -> Matrix6xX<f64> {
    let n = frames.len() - 1;
    let p_end: Vector3<f64> = frames[n].fixed_view::<3, 1>(0, 3).into_owned();
    let mut j = Matrix6xX::zeros(n);
    for (i, f) in frames[..n].iter().enumerate() {
        let z: Vector3<f64> = f.fixed_view::<3, 1>(0, 2).into_owned();
        let p: Vector3<f64> = f.fixed_view::<3, 1>(0, 3).into_owned();
        let lin = z.cross(&(p_end - p));
        j.fixed_view_mut::<3, 1>(0, i).copy_from(&lin);
        j.fixed_view_mut::<3, 1>(3, i).copy_from(&z);
    }
    j
}

/// Geometric Jacobian expressed in the base frame (linear rows first).
pub fn jacobian(m: &Manipulator, q: &JointConfig) -> Result<Matrix6xX<f64>> {
    check_dims(m, q)?;
    Ok(jacobian_from_frames(&frames(m, q.as_slice())))
}

/// `R = Rx(roll) * Ry(pitch) * Rz(yaw)`.
pub fn rpy_to_rotation(rpy: [f64; 3]) -> Matrix3<f64> {
    let (sx, cx) = rpy[0].sin_cos();
    let (sy, cy) = rpy[1].sin_cos();
    let (sz, cz) = rpy[2].sin_cos();
    let rx = Matrix3::new(1.0, 0.0, 0.0, 0.0, cx, -sx, 0.0, sx, cx);
    let ry = Matrix3::new(cy, 0.0, sy, 0.0, 1.0, 0.0, -sy, 0.0, cy);
    let rz = Matrix3::new(cz, -sz, 0.0, sz, cz, 0.0, 0.0, 0.0, 1.0);
    rx * ry * rz
}

/// Pose error taking `current` to `target`: the translation difference
/// stacked over the rotation vector (axis times angle) of `R_t R_c^T`.
/// To first order the rotational part equals `vex` of the skew part of
/// `R_t R_c^T - I`; unlike that expansion it stays monotone in the angle
/// all the way to a half turn.
pub fn differential_motion(current: &Pose, target: &Pose) -> Vector6<f64> {
    let dp = target.position - current.position;
    let r = target.rotation * current.rotation.transpose();
    let w =
        UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(r)).scaled_axis();
    Vector6::new(dp.x, dp.y, dp.z, w.x, w.y, w.z)
}
