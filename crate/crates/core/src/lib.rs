//! Nondestructive identification of Bell diagonal states.
//!
//! * [`qlinalg`]: dense complex matrices, tensor spaces, propagation.
//! * [`bell_protocol`]: the ideal three-step probe protocol.
//! * [`shot_sampler`]: finite-ensemble estimation of the Bell coefficients.
//! * [`cavity_qed`]: two atoms in a driven cavity realizing the step gates.

pub mod bell_protocol;
pub mod cavity_qed;
pub mod checks;
pub mod error;
pub mod qlinalg;
pub mod shot_sampler;

pub use error::{Error, Result};
