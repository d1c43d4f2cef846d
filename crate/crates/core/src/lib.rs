//! Relative similarity testing with the maximum mean discrepancy.
//!
//! Given a reference sample X and two candidate samples Y and Z, this crate
//! answers, with statistical significance, which candidate's distribution
//! is closer to the reference in MMD. Both squared-MMD estimates share the
//! reference sample and are therefore correlated; the test is built on
//! their joint asymptotic Gaussian, using empirical plug-in estimates of
//! the two variances and the covariance.
//!
//! - [`kernels`]: kernel functions, Gram bundles with zeroed diagonals,
//!   and the median / averaged-median bandwidth heuristics.
//! - [`estimators`]: unbiased MMD² estimators and the quadratic-time
//!   variance, covariance, and difference-variance estimators.
//! - [`reltest`]: the one-sided test (p-value, three-way decision) and the
//!   independent split baseline.
//! - [`normal`]: erf/erfc and the standard normal CDF.
//!
//! The crate is `no_std` (with `alloc`); enable the `std` feature to get
//! `std::error::Error` integration.
//!
//! ```
//! use relmmd_core::kernels::{KernelSpec, SampleSet, relative_bandwidth};
//! use relmmd_core::reltest::relative_test_from_samples;
//!
//! let x = SampleSet::from_flat((0..40).map(|i| (i % 5) as f64 * 0.1).collect(), 2).unwrap();
//! let y = SampleSet::from_flat((0..40).map(|i| (i % 5) as f64 * 0.1 + 0.2).collect(), 2).unwrap();
//! let z = SampleSet::from_flat((0..40).map(|i| (i % 7) as f64 + 3.0).collect(), 2).unwrap();
//! let bw = relative_bandwidth(&x, &y, &z).unwrap();
//! let spec = KernelSpec::gaussian_rbf(bw).unwrap();
//! let result = relative_test_from_samples(&x, &y, &z, &spec, 0.05).unwrap();
//! assert!(result.p_value >= 0.95); // Y is far closer to X than Z is
//! ```

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod error;
pub mod estimators;
pub mod kernels;
pub mod mat;
pub mod normal;
pub mod reltest;

pub use error::{Error, Result};
pub use estimators::{
    covariance_zeta1, diff_variance_direct, joint_estimate, mmd2_general, mmd2_paired,
    variance_zeta1, CovarianceForm, EstimatorForm, JointMmdEstimate, MmdEstimate, VarianceScaling,
};
pub use kernels::{
    gram_bundle, gram_pair, median_heuristic, relative_bandwidth, GramBundle, GramPair,
    KernelFamily, KernelSpec, SampleSet,
};
pub use reltest::{relative_test, relative_test_from_samples, split_test, Decision, TestResult};
