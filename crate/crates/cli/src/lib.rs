//! Relative similarity testing: experiment drivers, file formats, and the
//! command-line front end over `relmmd-core`.
//!
//! - [`experiments`]: the synthetic three-Gaussian studies (gamma sweeps,
//!   power comparison, null calibration, iso-curve validation), fully
//!   deterministic given a seed, parallelism-invariant.
//! - [`csvio`]: sample matrices as CSV, bit-faithful round trips.
//! - [`report`]: the JSON result document and CSV report renderers.
//! - [`app`]: clap definitions, dispatch, and the exit-status contract.

pub mod app;
pub mod csvio;
pub mod experiments;
pub mod report;
