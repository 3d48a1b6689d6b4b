//! Solver library and Monte Carlo experiment harness for the nonlocal
//! p-Laplacian evolution on inhomogeneous random graphs sampled from a
//! graphon.
//!
//! The crate is organized around the pipeline of a single experiment:
//!
//! * [`graphon`] — kernels, initial data, partitions, projections, and
//!   smoothness estimators;
//! * [`sampling`] — node sets, K-random inhomogeneous graphs, spacing laws;
//! * [`dynamics`] — the forward Euler scheme, space-time extensions, the
//!   linear analytic oracle, and the deviation process;
//! * [`metrics`] — norms, space-time errors, theoretical bound evaluation,
//!   and the rate-regime classifier;
//! * [`experiments`] — seeded Monte Carlo studies with CSV/SVG outputs.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod graphon;
pub mod metrics;
pub mod sampling;

pub use error::{Error, Result};
