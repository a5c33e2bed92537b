//! Correlation functions of open quantum systems.
//!
//! The crate computes equilibrium and finite-time two-point correlators (and a
//! pair of three-point correlators) of a damped bosonic or fermionic mode and of
//! the dissipative spin-boson model using
//!
//! * the standard quantum regression theorem (SQRT),
//! * the modified regression theorem (MQRT) that adds the inhomogeneous bath
//!   memory terms obtained under the weak Markov condition,
//! * exact references: the closed-form Langevin result and a star-discretized
//!   bath evolved exactly through its single-particle propagator.
//!
//! On top of these, [`analysis`] measures violations of the KMS condition and the
//! deviation metric used to rank the approximations against the exact result.
//!
//! Module map:
//!
//! * [`mathkit`]: quadrature, principal values, distributions, spectral densities
//! * [`models`]: closed-form correlators
//! * [`engine`]: general finite-dimensional MQRT engine
//! * [`oracle`]: exact discretized-bath reference and dense exact diagonalization
//! * [`analysis`]: KMS residuals, deviation metric, parameter sweeps
//! * [`cli`]: configuration, dispatch and file output for the `qregress` binary

#![forbid(unsafe_code)]

pub mod analysis;
pub mod cli;
pub mod engine;
pub mod error;
pub mod mathkit;
pub mod models;
pub mod oracle;

pub use error::{Error, Result};
pub use num_complex::Complex64;
