// validations use negated comparisons so that NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Solver toolkit for the 1D time-space fractional convection-diffusion
//! equation: a second-order implicit difference scheme together with fast
//! Toeplitz solution paths (FFT matvecs, Strang circulant preconditioning,
//! CGS, and the Gohberg-Semencul inverse for constant coefficients).

pub mod analysis;
pub mod circulant;
pub mod coeffs;
pub mod error;
pub mod gsf;
pub mod krylov;
pub mod scheme;
pub mod toeplitz;

pub use error::{Result, SolverError};
