//! Cosserat micropolar kinematics on curvilinear charts and shell surfaces.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix it to `f64`.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod cosserat3d;
pub mod curvilinear3d;
pub mod energy;
pub mod error;
pub mod field;
pub mod harness;
pub mod json;
pub mod micro;
pub mod scalar;
pub mod shell;
pub mod surface;
pub mod tensor;
pub mod validate;

pub use error::{Error, Result};
pub use field::{Deriv, Field};
pub use scalar::Real;

pub type Vec3d = tensor::Vec3<f64>;
pub type Mat3d = tensor::Mat3<f64>;
pub type Rot3d = tensor::Rot3<f64>;
pub type Quatd = tensor::Quat<f64>;
pub type Config3Dd = cosserat3d::Config3D<f64>;
pub type ShellConfigd = shell::ShellConfig<f64>;
pub type EnergyParamsd = energy::EnergyParams<f64>;
pub type ShellStated = energy::ShellState<f64>;
pub type DiscreteShelld = energy::DiscreteShell<f64>;
