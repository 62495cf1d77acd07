//! Simulation and verification toolkit for repairable systems with
//! virtual-age repair models.
//!
//! A system fails, gets repaired, and fails again. The quality of each
//! repair is captured by a virtual age: after the `n`-th repair the system
//! behaves like a fresh unit that has already survived to age `V_n`. The
//! classical Kijima rules (type I: `V_n = V_{n-1} + A_n X_n`, type II:
//! `V_n = A_n (V_{n-1} + X_n)`) and arbitrary user rules are supported.
//! Counting the failures up to an independent random time `T` yields
//! `N(T)`, and the central quantity everywhere in this crate is the
//! survival sequence `p_n = P(N(T) >= n)`.
//!
//! What lives where:
//!
//! - [`survival`]: lifetime distributions, conditional (residual)
//!   survival, aging-class checks (DFR/IFR/NWU) and the usual stochastic
//!   order on evaluation grids.
//! - [`models`]: repair policies, virtual-age rules, trajectory
//!   simulation, and the history kernels a model induces.
//! - [`kernels`]: conditional laws of the next interarrival given an
//!   observed history, their composition, and a statistical test that the
//!   two-step composition matches direct sampling.
//! - [`estimate`]: Monte Carlo, quadrature, and closed-form estimators
//!   for the survival sequence, plus the discrete log-convexity (DFR)
//!   check on the estimated sequence.
//! - [`hypotheses`]: checkers for the sufficient conditions under which
//!   `N(T)` inherits the DFR property, and empirical association tests.
//! - [`counterexamples`]: reproducible constructions showing the limits
//!   of those sufficient conditions.
//! - [`cli`]: config-driven pipelines behind the `virtage` binary.
//!
//! The `examples/` directory contains one runnable program per capability;
//! `cargo run --example aging_classes` is a good starting point.

pub mod cli;
pub mod counterexamples;
pub mod error;
pub mod estimate;
pub mod hypotheses;
pub mod kernels;
pub mod models;
pub mod quad;
pub mod rngs;
pub mod stats;
pub mod survival;
pub mod tol;

pub use error::{Error, Result};
pub use survival::Lifetime;
