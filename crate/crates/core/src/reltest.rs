//! The relative similarity hypothesis test.
//!
//! Given the joint estimate of `MMD²(X,Y)` and `MMD²(X,Z)` with their 2x2
//! covariance, the test statistic is the difference of the two estimates.
//! Rotating the joint Gaussian by pi/4 and projecting onto the first axis
//! turns the null hypothesis "Y is at least as close to X as Z" into a
//! one-sided Gaussian tail:
//!
//! ```text
//! p = Phi( -(mmd_xy - mmd_xz) / sqrt(var_xy + var_xz - 2 cov) )
//! ```
//!
//! Small `p` rejects in favor of Z being significantly closer to the
//! reference; `p` near 1 is symmetric evidence for Y.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::estimators::{
    joint_estimate, mmd2_general, variance_zeta1, CovarianceForm, JointMmdEstimate,
    VarianceScaling,
};
use crate::kernels::{gram_bundle, gram_pair, KernelSpec, SampleSet};
pub use crate::normal::std_normal_cdf;

/// Floor applied to the projected variance before taking square roots.
/// Empirical plug-in variances can drift slightly negative near degeneracy.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Three-way outcome of the relative similarity test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    /// `p <= alpha`: Z is significantly closer to the reference.
    FavorZ,
    /// `p >= 1 - alpha`: Y is significantly closer to the reference.
    FavorY,
    /// Neither tail is significant.
    Inconclusive,
}

impl Decision {
    pub fn as_str(&self) -> &'static str {
        match self {
            Decision::FavorZ => "favor-z",
            Decision::FavorY => "favor-y",
            Decision::Inconclusive => "inconclusive",
        }
    }
}

/// Full result of one relative similarity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub mmd_xy: f64,
    pub mmd_xz: f64,
    /// `mmd_xy - mmd_xz`.
    pub statistic: f64,
    /// `sqrt(var_xy + var_xz - 2 cov)` after flooring.
    pub projected_sd: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub decision: Decision,
    /// Set when the variance floor was applied.
    pub degenerate_variance: bool,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    Ok(())
}

fn decide(p: f64, alpha: f64) -> Decision {
    if p <= alpha {
        Decision::FavorZ
    } else if p >= 1.0 - alpha {
        Decision::FavorY
    } else {
        Decision::Inconclusive
    }
}

fn finish(mmd_xy: f64, mmd_xz: f64, projected_var: f64, alpha: f64) -> TestResult {
    let degenerate = !(projected_var > VARIANCE_FLOOR);
    let floored = projected_var.max(VARIANCE_FLOOR);
    let projected_sd = libm::sqrt(floored);
    let statistic = mmd_xy - mmd_xz;
    let p_value = std_normal_cdf(-statistic / projected_sd);
    TestResult {
        mmd_xy,
        mmd_xz,
        statistic,
        projected_sd,
        p_value,
        alpha,
        decision: decide(p_value, alpha),
        degenerate_variance: degenerate,
    }
}

/// Run the relative similarity test on a joint estimate.
pub fn relative_test(joint: &JointMmdEstimate, alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    Ok(finish(
        joint.mmd_xy.value,
        joint.mmd_xz.value,
        joint.projected_variance(),
        alpha,
    ))
}

/// Convenience path: Gram bundle, joint estimate, and test in one call.
///
/// Uses the exact U-statistic prefactor and the symmetrized covariance,
/// which is what the swap antisymmetry of [`TestResult`] requires.
pub fn relative_test_from_samples(
    x: &SampleSet,
    y: &SampleSet,
    z: &SampleSet,
    spec: &KernelSpec,
    alpha: f64,
) -> Result<TestResult> {
    check_alpha(alpha)?;
    let bundle = gram_bundle(spec, x, y, z)?;
    let joint = joint_estimate(
        &bundle,
        VarianceScaling::ExactUStat,
        CovarianceForm::Symmetrized,
    )?;
    relative_test(&joint, alpha)
}

/// Baseline test that splits the reference sample into two disjoint halves
/// and compares `MMD²(X1, Y)` with `MMD²(X2, Z)`.
///
/// The two estimates are independent, so the covariance term is zero; this
/// is the naive alternative the joint test is measured against. The halves
/// are assigned by even/odd position after a seeded shuffle, making the
/// baseline deterministic given `seed`.
pub fn split_test(
    x: &SampleSet,
    y: &SampleSet,
    z: &SampleSet,
    spec: &KernelSpec,
    alpha: f64,
    seed: u64,
) -> Result<TestResult> {
    check_alpha(alpha)?;
    if x.len() < 6 {
        return Err(Error::SampleTooSmall {
            found: x.len(),
            required: 6,
        });
    }
    let mut indices: Vec<usize> = (0..x.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let first: Vec<usize> = indices.iter().copied().step_by(2).collect();
    let second: Vec<usize> = indices.iter().copied().skip(1).step_by(2).collect();
    let x1 = x.select(&first);
    let x2 = x.select(&second);

    let g1 = gram_pair(spec, &x1, y)?;
    let g2 = gram_pair(spec, &x2, z)?;
    let mmd_xy = mmd2_general(&g1.as_pair())?.value;
    let mmd_xz = mmd2_general(&g2.as_pair())?.value;
    let var_xy =
        (VarianceScaling::ExactUStat.prefactor(x1.len()) * variance_zeta1(&g1.as_pair())?).max(0.0);
    let var_xz =
        (VarianceScaling::ExactUStat.prefactor(x2.len()) * variance_zeta1(&g2.as_pair())?).max(0.0);

    Ok(finish(mmd_xy, mmd_xz, var_xy + var_xz, alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{EstimatorForm, MmdEstimate};
    use alloc::vec::Vec;

    fn joint(mmd_xy: f64, mmd_xz: f64, var_xy: f64, var_xz: f64, cov: f64) -> JointMmdEstimate {
        let mk = |v| MmdEstimate {
            value: v,
            m: 10,
            n: 10,
            form: EstimatorForm::General,
        };
        JointMmdEstimate {
            mmd_xy: mk(mmd_xy),
            mmd_xz: mk(mmd_xz),
            var_xy,
            var_xz,
            cov_xyxz: cov,
            m: 10,
            n: 10,
            r: 10,
        }
    }

    #[test]
    fn zero_statistic_is_inconclusive() {
        let res = relative_test(&joint(0.4, 0.4, 0.01, 0.01, 0.0), 0.05).unwrap();
        assert_eq!(res.p_value, 0.5);
        assert_eq!(res.decision, Decision::Inconclusive);
        assert!(!res.degenerate_variance);
    }

    #[test]
    fn boundary_rejection_near_alpha_05() {
        // statistic / sd = 1.6449 puts p right at the 5% boundary.
        let res = relative_test(&joint(1.6449, 0.0, 0.5, 0.5, 0.0), 0.05).unwrap();
        assert!((res.p_value - 0.05).abs() < 1e-4);
        assert!((res.projected_sd - 1.0).abs() < 1e-15);
    }

    #[test]
    fn decision_trichotomy() {
        let strong_z = relative_test(&joint(1.0, 0.0, 1e-4, 1e-4, 0.0), 0.05).unwrap();
        assert_eq!(strong_z.decision, Decision::FavorZ);
        assert!(strong_z.p_value <= 0.05);

        let strong_y = relative_test(&joint(0.0, 1.0, 1e-4, 1e-4, 0.0), 0.05).unwrap();
        assert_eq!(strong_y.decision, Decision::FavorY);
        assert!(strong_y.p_value >= 0.95);
    }

    #[test]
    fn degenerate_variance_flagged_not_errored() {
        let res = relative_test(&joint(0.0, 0.0, 0.0, 0.0, 0.0), 0.05).unwrap();
        assert!(res.degenerate_variance);
        assert_eq!(res.p_value, 0.5);
        assert_eq!(res.decision, Decision::Inconclusive);
    }

    #[test]
    fn alpha_validation() {
        let j = joint(0.0, 0.0, 1.0, 1.0, 0.0);
        assert!(matches!(
            relative_test(&j, 0.0),
            Err(Error::InvalidAlpha(_))
        ));
        assert!(matches!(
            relative_test(&j, 1.0),
            Err(Error::InvalidAlpha(_))
        ));
        assert!(matches!(
            relative_test(&j, f64::NAN),
            Err(Error::InvalidAlpha(_))
        ));
    }

    #[test]
    fn split_test_requires_six_reference_rows() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| alloc::vec![i as f64]).collect();
        let x = SampleSet::from_rows(&rows).unwrap();
        let k = KernelSpec::linear();
        assert!(matches!(
            split_test(&x, &x, &x, &k, 0.05, 7),
            Err(Error::SampleTooSmall { .. })
        ));
    }

    #[test]
    fn split_test_deterministic_and_balanced() {
        let rows: Vec<Vec<f64>> = (0..9).map(|i| alloc::vec![i as f64, (i * i) as f64]).collect();
        let x = SampleSet::from_rows(&rows).unwrap();
        let y_rows: Vec<Vec<f64>> = (0..4).map(|i| alloc::vec![i as f64 + 10.0, 0.0]).collect();
        let y = SampleSet::from_rows(&y_rows).unwrap();
        let z_rows: Vec<Vec<f64>> = (0..4).map(|i| alloc::vec![i as f64 - 10.0, 1.0]).collect();
        let z = SampleSet::from_rows(&z_rows).unwrap();
        let k = KernelSpec::gaussian_rbf(3.0).unwrap();
        let a = split_test(&x, &y, &z, &k, 0.05, 42).unwrap();
        let b = split_test(&x, &y, &z, &k, 0.05, 42).unwrap();
        assert_eq!(a, b);
        let c = split_test(&x, &y, &z, &k, 0.05, 43).unwrap();
        // A different seed permutes the halves; the result may differ.
        let _ = c;
    }

    #[test]
    fn equal_halves_give_half_p() {
        // Identical Y and Z plus a reference whose shuffled halves see the
        // same candidate: statistic need not be 0 in general, but with a
        // constant-distance construction it is.
        let rows: Vec<Vec<f64>> = (0..6).map(|_| alloc::vec![0.0]).collect();
        let x = SampleSet::from_rows(&rows).unwrap();
        let cand: Vec<Vec<f64>> = (0..3).map(|_| alloc::vec![1.0]).collect();
        let y = SampleSet::from_rows(&cand).unwrap();
        let k = KernelSpec::gaussian_rbf(1.0).unwrap();
        let res = split_test(&x, &y, &y, &k, 0.05, 0).unwrap();
        assert_eq!(res.statistic, 0.0);
        assert_eq!(res.p_value, 0.5);
    }
}
