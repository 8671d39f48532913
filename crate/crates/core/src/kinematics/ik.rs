//! Damped-least-squares numerical inverse kinematics.

use nalgebra::{DMatrix, DVector, Vector6};
use serde::{Deserialize, Serialize};

use super::{differential_motion, frames, jacobian_from_frames, JointConfig, Manipulator, Pose};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IkSettings {
    /// Convergence threshold on the norm of the differential motion.
    pub tolerance: f64,
    pub lambda0: f64,
    /// Consecutive rejected steps tolerated before giving up.
    pub r_max: usize,
    pub i_max: usize,
    /// Starting configuration; empty means the zero vector.
    pub q0: Vec<f64>,
}

impl Default for IkSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-4,
            lambda0: 0.1,
            r_max: 50,
            i_max: 500,
            q0: Vec::new(),
        }
    }
}

impl IkSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::invalid(
                "ik.tolerance",
                "must be positive and finite",
            ));
        }
        if !(self.lambda0 > 0.0 && self.lambda0.is_finite()) {
            return Err(Error::invalid("ik.lambda0", "must be positive and finite"));
        }
        if self.r_max < 1 {
            return Err(Error::invalid("ik.r_max", "must be at least 1"));
        }
        if self.i_max < 1 {
            return Err(Error::invalid("ik.i_max", "must be at least 1"));
        }
        if self.q0.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("ik.q0", "entries must be finite"));
        }
        Ok(())
    }

    /// Same settings with the tolerance multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            tolerance: self.tolerance * s,
            ..self.clone()
        }
    }

    fn start(&self, n: usize) -> Result<Vec<f64>> {
        if self.q0.is_empty() {
            Ok(vec![0.0; n])
        } else if self.q0.len() == n {
            Ok(self.q0.clone())
        } else {
            Err(Error::DimensionMismatch {
                context: "ik.q0",
                expected: n,
                actual: self.q0.len(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoSolutionReason {
    TooManyRejections,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IkOutcome {
    Solved {
        q: JointConfig,
        iterations: usize,
    },
    NoSolution {
        reason: NoSolutionReason,
        iterations: usize,
    },
}

impl IkOutcome {
    pub fn is_solved(&self) -> bool {
        matches!(self, IkOutcome::Solved { .. })
    }

    pub fn solution(&self) -> Option<&JointConfig> {
        match self {
            IkOutcome::Solved { q, .. } => Some(q),
            IkOutcome::NoSolution { .. } => None,
        }
    }
}

pub fn inverse_kinematics(
    m: &Manipulator,
    target: &Pose,
    settings: &IkSettings,
) -> Result<IkOutcome> {
    solve(m, target, settings, |_| {})
}

/// Like [`inverse_kinematics`], also returning the error norm after every
/// accepted step (the initial error first).
pub fn inverse_kinematics_traced(
    m: &Manipulator,
    target: &Pose,
    settings: &IkSettings,
) -> Result<(IkOutcome, Vec<f64>)> {
    let mut trace = Vec::new();
    let outcome = solve(m, target, settings, |e| trace.push(e))?;
    Ok((outcome, trace))
}

fn pose_error(
    m: &Manipulator,
    q: &[f64],
    target: &Pose,
) -> (Vec<nalgebra::Matrix4<f64>>, Vector6<f64>) {
    let f = frames(m, q);
    let current = Pose::from_homogeneous(&f[f.len() - 1]);
    let e = differential_motion(&current, target);
    (f, e)
}

/// `(J^T J + lambda^2 I)^-1 J^T e` through the singular values of `J`, used
/// when the damping is too small for the normal matrix to factor.
fn damped_svd_solve(j: &DMatrix<f64>, e: &DVector<f64>, lambda: f64) -> DVector<f64> {
    let svd = j.clone().svd(true, true);
    let (u, v_t) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let mut dq = DVector::zeros(j.ncols());
    for (k, s) in svd.singular_values.iter().enumerate() {
        let denom = s * s + lambda * lambda;
        if denom > 0.0 {
            let coef = s / denom * u.column(k).dot(e);
            dq += v_t.row(k).transpose() * coef;
        }
    }
    dq
}

fn solve(
    m: &Manipulator,
    target: &Pose,
    s: &IkSettings,
    mut on_accept: impl FnMut(f64),
) -> Result<IkOutcome> {
    s.validate()?;
    let n = m.dof();
    let mut q = s.start(n)?;
    let mut lambda = s.lambda0;
    let (mut f, mut e) = pose_error(m, &q, target);
    let mut e_norm = e.norm();
    on_accept(e_norm);

    let mut rejections = 0;
    let mut i = 0;
    while i <= s.i_max {
        i += 1;
        if e_norm <= s.tolerance {
            let (_, check) = pose_error(m, &q, target);
            assert!(
                check.norm() <= s.tolerance,
                "returned configuration violates the tolerance"
            );
            return Ok(IkOutcome::Solved {
                q: JointConfig(q),
                iterations: i,
            });
        }

        let j = jacobian_from_frames(&f);
        let jt = j.transpose();
        let mut normal: DMatrix<f64> = &jt * &j;
        let damping = lambda * lambda;
        for d in 0..n {
            normal[(d, d)] += damping;
        }
        let e_vec = DVector::from_column_slice(e.as_slice());
        let dq = match normal.cholesky() {
            Some(chol) => chol.solve(&(&jt * &e_vec)),
            None => damped_svd_solve(
                &DMatrix::from_column_slice(6, n, j.as_slice()),
                &e_vec,
                lambda,
            ),
        };

        let q_next: Vec<f64> = q.iter().zip(dq.iter()).map(|(a, b)| a + b).collect();
        let (f_next, e_next) = pose_error(m, &q_next, target);
        let next_norm = e_next.norm();
        if next_norm < e_norm {
            q = q_next;
            f = f_next;
            e = e_next;
            e_norm = next_norm;
            lambda /= 2.0;
            rejections = 0;
            on_accept(e_norm);
        } else {
            lambda *= 2.0;
            rejections += 1;
            if rejections > s.r_max {
                return Ok(IkOutcome::NoSolution {
                    reason: NoSolutionReason::TooManyRejections,
                    iterations: i,
                });
            }
        }
    }
    Ok(IkOutcome::NoSolution {
        reason: NoSolutionReason::IterationLimit,
        iterations: i,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{forward_kinematics, DhRow};
    use nalgebra::Vector3;

    fn planar_2r() -> Manipulator {
        Manipulator::new(vec![
            DhRow::new(0.0, 0.0, 1.0, 0.0),
            DhRow::new(0.0, 0.0, 1.0, 0.0),
        ])
        .unwrap()
    }

    #[test]
    fn svd_fallback_matches_normal_equations() {
        let j = DMatrix::from_fn(6, 4, |r, c| ((r * 4 + c) as f64 * 0.37).sin());
        let e = DVector::from_fn(6, |r, _| r as f64 - 2.5);
        let lambda = 0.3;
        let normal = j.transpose() * &j + DMatrix::identity(4, 4) * (lambda * lambda);
        let direct = normal.cholesky().unwrap().solve(&(j.transpose() * &e));
        assert!((damped_svd_solve(&j, &e, lambda) - direct).norm() < 1e-12);
        // Rank-deficient with vanishing damping stays finite.
        let mut singular = j.clone();
        singular.set_column(3, &j.column(0).into_owned());
        assert!(damped_svd_solve(&singular, &e, 1e-200)
            .iter()
            .all(|v| v.is_finite()));
    }

    #[test]
    fn zero_initial_error_returns_start() {
        let m = planar_2r();
        let s = IkSettings {
            q0: vec![0.3, -0.7],
            ..IkSettings::default()
        };
        let target = forward_kinematics(&m, &JointConfig(s.q0.clone())).unwrap();
        let out = inverse_kinematics(&m, &target, &s).unwrap();
        assert_eq!(
            out,
            IkOutcome::Solved {
                q: JointConfig(vec![0.3, -0.7]),
                iterations: 1
            }
        );
    }

    #[test]
    fn unreachable_target_has_no_solution() {
        let m = planar_2r();
        let target = Pose::new(Vector3::new(3.0, 0.0, 0.0), nalgebra::Matrix3::identity());
        let out = inverse_kinematics(&m, &target, &IkSettings::default()).unwrap();
        assert!(!out.is_solved());
    }

    #[test]
    fn settings_validation() {
        let bad = [
            IkSettings {
                tolerance: 0.0,
                ..Default::default()
            },
            IkSettings {
                lambda0: -1.0,
                ..Default::default()
            },
            IkSettings {
                r_max: 0,
                ..Default::default()
            },
            IkSettings {
                i_max: 0,
                ..Default::default()
            },
        ];
        for s in bad {
            assert!(s.validate().is_err(), "{s:?}");
        }
        let m = planar_2r();
        let s = IkSettings {
            q0: vec![0.0; 3],
            ..Default::default()
        };
        assert!(inverse_kinematics(&m, &Pose::identity(), &s).is_err());
    }

    #[test]
    fn accepted_errors_strictly_decrease() {
        let m = planar_2r();
        let target = forward_kinematics(&m, &JointConfig(vec![1.2, 0.9])).unwrap();
        // Planar arm: the target orientation is attainable only through q1 + q2.
        let (out, trace) = inverse_kinematics_traced(&m, &target, &IkSettings::default()).unwrap();
        assert!(trace.windows(2).all(|w| w[1] < w[0]));
        if let IkOutcome::Solved { q, .. } = out {
            let p = forward_kinematics(&m, &q).unwrap();
            assert!((p.position - target.position).norm() <= 1e-4);
        }
    }
}
