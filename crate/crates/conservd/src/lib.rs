//! conservd: numerical sufficient tests for conservativeness (non-explosion)
//! of diffusions generated by divergence-free perturbations of weighted
//! symmetric energy forms on ℝᵈ.
//!
//! The engine evaluates decay criteria built from gauge-annulus growth
//! quantities — suprema of the energy density Γ(ρ,ρ) along the gauge, annulus
//! measures, and L² norms of the drift projection N(ρ) — and cross-checks the
//! verdicts with two independent oracles: the exact one-dimensional
//! scale/speed test and a Monte-Carlo escape-probability estimator driven by
//! Euler–Maruyama simulation.
//!
//! Start with the runnable examples (`cargo run --release --example ...`) or
//! the `conservd` binary (`analyze`, `feller`, `simulate`, `examples`,
//! `plot-data`); the library modules mirror the pipeline:
//!
//! * [`expr`] / [`field`] — coefficient expressions and evaluable fields;
//! * [`sampling`] — seeded annulus sampling and Monte-Carlo reductions;
//! * [`growth`] — weight families φ and the growth table (a_n, b_n, c_n,
//!   μ(E₄ₙ∖E₂ₙ), ‖N(ρ)‖, Â_n);
//! * [`criteria`] — the sufficient criteria and constant fitting;
//! * [`divergence`] — the divergence-free drift gate;
//! * [`oracle`] — the scale/speed test and the escape estimator;
//! * [`registry`] — six built-in coefficient systems with canonical
//!   pipelines;
//! * [`config`] / [`report`] / [`cli`] — run configuration, versioned JSON
//!   and CSV outputs, and the command-line front end.

pub mod cli;
pub mod config;
pub mod criteria;
pub mod divergence;
pub mod error;
pub mod expr;
pub mod field;
pub mod growth;
pub mod oracle;
pub mod registry;
pub mod report;
pub mod sampling;

pub use error::{Error, Result};
