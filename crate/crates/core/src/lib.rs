//! Serial-link manipulator workspaces, computed classically by numerical
//! inverse kinematics over a voxel grid and learned by a feedforward network
//! that stores one parameter set per input subspace.

pub mod datagen;
pub mod error;
pub mod kinematics;
pub mod slnet;
pub mod workspace;

pub use error::{Error, Result};
