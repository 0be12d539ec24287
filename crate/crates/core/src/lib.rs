//! Complex quantum trajectories: wavefunctions, velocity fields,
//! integrators and trajectory analysis.

mod compensated;

pub mod analysis;
pub mod fields;
pub mod integrate;
pub mod scenario;
pub mod specfun;
pub mod states;

pub use num_complex::Complex64;
