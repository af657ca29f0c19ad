//! Simulation and verification toolkit for directed polymers in a fractional
//! Brownian environment.
//!
//! The central object is the partition function u(t) = E^X[exp ∫₀ᵗ dB^{X(s)}_s]
//! of a continuous-time simple random walk X on ℤ^d moving through a family of
//! independent fractional Brownian motions {B^x}. The crate reproduces, at
//! desk scale, every computable quantity attached to that object:
//!
//! * exact fBm covariance algebra and reproducible Gaussian field sampling
//!   ([`env`]);
//! * walk path sampling, grid discretization, and the jump-count truncation
//!   ([`walk`]);
//! * exact per-path action laws and partition-function solvers by dynamic
//!   programming and brute-force enumeration ([`polymer`]);
//! * Monte Carlo estimators for the mean log-partition function, Lyapunov
//!   traces, super-additivity defects, concentration tails, and the
//!   quantization sandwich ([`estimators`]);
//! * the Volterra kernel of fBm, the residue process and its Lipschitz and
//!   variance bounds, and the innovation/residue variance decomposition
//!   ([`residue`]);
//! * closed-form Poisson, variance, Stirling, and first-return bounds plus
//!   the combinatorial lower-bound experiment ([`bounds`]);
//! * the compact-circle variant with a 2π-periodic spatial covariance
//!   ([`circle`]);
//! * a deterministic experiment runner behind the `fbm-polymer` binary
//!   ([`cli`]).
//!
//! Start with the runnable examples in `examples/`, one per capability.

pub mod bounds;
pub mod circle;
pub mod cli;
pub mod config;
pub mod digest;
pub mod env;
pub mod error;
pub mod estimators;
pub mod numeric;
pub mod polymer;
pub mod quad;
pub mod report;
pub mod residue;
pub mod walk;

pub use error::{PolymerError, Result};
