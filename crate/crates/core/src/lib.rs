//! Eigenvalue flow of `G_t = H + i t v v*` for Wigner matrices `H` and a unit
//! vector `v`: sampling, spectral data, trajectory computation three ways,
//! and executable checks of the confinement, local-law and outlier results.

pub mod analysis;
pub mod eigen;
pub mod error;
pub mod io;
pub mod parallel;
pub mod resolvent;
pub mod rmt;
pub mod trajectory;

pub use error::{Error, Result};
