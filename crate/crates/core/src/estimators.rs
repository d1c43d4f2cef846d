//! Unbiased MMD² estimators and their empirical variance/covariance.
//!
//! Every estimator here is a quadratic-time contraction of Gram-matrix row
//! and column sums. Writing `s_aa = K̃_aa e` (row sums of the zero-diagonal
//! within-sample matrix), `u = K_ab e`, `c = K_ab^T e`, the leading-order
//! variance component of the MMD² U-statistic between samples A and B is
//!
//! ```text
//! zeta1 = |s_aa|^2/(m(m-1)^2) - (S_aa/(m(m-1)))^2
//!       - 2 [ (s_aa . u)/(m(m-1)n) - S_aa S_ab/(m^2(m-1)n) ]
//!       + |s_bb|^2/(n(n-1)^2) - (S_bb/(n(n-1)))^2
//!       - 2 [ (s_bb . c)/(n(n-1)m) - S_bb S_ab/(n^2(n-1)m) ]
//!       + |u|^2/(n^2 m) - 2 (S_ab/(nm))^2 + |c|^2/(m^2 n)
//! ```
//!
//! with `S_*` the grand totals. The covariance of the two estimates that
//! share the reference sample, and the variance of their difference, have
//! the same shape. The full estimator variance is recovered by the order-2
//! U-statistic prefactor `4(m-2)/(m(m-1))`; the second component of that
//! expansion enters at `O(m^-2)` and is not estimated here.

use crate::error::{Error, Result};
use crate::kernels::{GramBundle, GramPair};
use crate::mat::{kahan_dot, kahan_norm_sq, kahan_sum};

/// Which empirical form produced an MMD² estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorForm {
    /// Two U-statistics plus a full cross-sample average; supports `m != n`.
    General,
    /// Order-2 U-statistic over paired observations; requires `m == n`.
    PairedUStat,
}

/// An unbiased MMD² estimate. The value may be negative: the estimator is
/// unbiased for a nonnegative population quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmdEstimate {
    pub value: f64,
    pub m: usize,
    pub n: usize,
    pub form: EstimatorForm,
}

/// Scaling applied to the zeta1 quantities to obtain estimator variances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VarianceScaling {
    /// `4(m-2)/(m(m-1))`, the exact order-2 U-statistic leading prefactor.
    #[default]
    ExactUStat,
    /// `4/m`, keeping only the asymptotic rate.
    LeadingOrder,
}

impl VarianceScaling {
    /// Prefactor value for reference-sample size `m`.
    pub fn prefactor(self, m: usize) -> f64 {
        let mf = m as f64;
        match self {
            VarianceScaling::ExactUStat => 4.0 * (mf - 2.0) / (mf * (mf - 1.0)),
            VarianceScaling::LeadingOrder => 4.0 / mf,
        }
    }
}

/// Which reading of the covariance estimator to use.
///
/// The matrix expression this estimator is usually quoted with carries an
/// asymmetric product term in its second cross bracket (`e^T K_xz e`
/// where the bracket's leading factor pairs with `K_xy`). `AsPrinted`
/// reproduces that expression verbatim. `Symmetrized` replaces it with
/// `e^T K_xy e`, which is the term-by-term empirical estimate of the
/// underlying expectation expansion and is exactly symmetric under
/// exchanging the two candidate samples; the oracle tests pin down that
/// correspondence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CovarianceForm {
    #[default]
    AsPrinted,
    Symmetrized,
}

/// The pair of MMD² estimates sharing a reference sample, with estimated
/// variances and covariance (the mean vector and 2x2 covariance of their
/// joint asymptotic Gaussian).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointMmdEstimate {
    pub mmd_xy: MmdEstimate,
    pub mmd_xz: MmdEstimate,
    /// Estimated variance of `mmd_xy`, floored at zero.
    pub var_xy: f64,
    /// Estimated variance of `mmd_xz`, floored at zero.
    pub var_xz: f64,
    /// Estimated covariance of the two estimates (may be negative).
    pub cov_xyxz: f64,
    pub m: usize,
    pub n: usize,
    pub r: usize,
}

impl JointMmdEstimate {
    /// `var_xy + var_xz - 2 cov`, the variance of the difference statistic,
    /// before any flooring.
    pub fn projected_variance(&self) -> f64 {
        self.var_xy + self.var_xz - 2.0 * self.cov_xyxz
    }
}

/// Sufficient statistics of one Gram pair: totals, row/column sums of the
/// cross matrix, and row sums of the zero-diagonal within-sample matrices.
struct PairSums {
    m: f64,
    n: f64,
    /// `K̃_aa e`
    s_aa: alloc::vec::Vec<f64>,
    /// `K̃_bb e`
    s_bb: alloc::vec::Vec<f64>,
    /// `K_ab e` (row sums, length m)
    u: alloc::vec::Vec<f64>,
    /// `K_ab^T e` (column sums, length n)
    c: alloc::vec::Vec<f64>,
    total_aa: f64,
    total_bb: f64,
    total_ab: f64,
}

impl PairSums {
    fn from_pair(pair: &GramPair<'_>) -> Self {
        let s_aa = pair.ktil_aa.row_sums();
        let s_bb = pair.ktil_bb.row_sums();
        let u = pair.k_ab.row_sums();
        let c = pair.k_ab.col_sums();
        PairSums {
            m: pair.m() as f64,
            n: pair.n() as f64,
            total_aa: kahan_sum(&s_aa),
            total_bb: kahan_sum(&s_bb),
            total_ab: kahan_sum(&u),
            s_aa,
            s_bb,
            u,
            c,
        }
    }
}

#[inline]
fn sq(x: f64) -> f64 {
    x * x
}

fn require_min(len: usize, required: usize) -> Result<()> {
    if len < required {
        return Err(Error::SampleTooSmall {
            found: len,
            required,
        });
    }
    Ok(())
}

/// Unbiased MMD² in the general two-U-statistics-plus-average form:
///
/// ```text
/// S(K̃_aa)/(m(m-1)) + S(K̃_bb)/(n(n-1)) - 2 S(K_ab)/(mn)
/// ```
///
/// where the cross total runs over all `(i, j)` pairs including `i == j`.
pub fn mmd2_general(pair: &GramPair<'_>) -> Result<MmdEstimate> {
    let (m, n) = (pair.m(), pair.n());
    require_min(m, 2)?;
    require_min(n, 2)?;
    let (mf, nf) = (m as f64, n as f64);
    let t_aa = pair.ktil_aa.total();
    let t_bb = pair.ktil_bb.total();
    let t_ab = pair.k_ab.total();
    let value = t_aa / (mf * (mf - 1.0)) + t_bb / (nf * (nf - 1.0)) - 2.0 * t_ab / (mf * nf);
    Ok(MmdEstimate {
        value,
        m,
        n,
        form: EstimatorForm::General,
    })
}

/// Unbiased MMD² as an order-2 U-statistic over paired observations
/// `v_i = (a_i, b_i)`:
///
/// ```text
/// (1/(m(m-1))) sum_{i != j} [ k(a_i,a_j) + k(b_i,b_j) - k(a_i,b_j) - k(a_j,b_i) ]
/// ```
///
/// Unlike the general form, the cross term excludes the `i == j` diagonal.
pub fn mmd2_paired(pair: &GramPair<'_>) -> Result<MmdEstimate> {
    let (m, n) = (pair.m(), pair.n());
    if m != n {
        return Err(Error::UnequalSampleSizes { m, n, r: n });
    }
    require_min(m, 2)?;
    let mf = m as f64;
    // Accumulate h(v_i, v_j) per unordered pair so identical paired
    // observations cancel exactly term by term. h is symmetric in (i, j).
    let mut acc = crate::mat::Kahan::new();
    for i in 0..m {
        for j in (i + 1)..m {
            let h = pair.ktil_aa.get(i, j) + pair.ktil_bb.get(i, j)
                - pair.k_ab.get(i, j)
                - pair.k_ab.get(j, i);
            acc.add(h);
        }
    }
    let value = 2.0 * acc.value() / (mf * (mf - 1.0));
    Ok(MmdEstimate {
        value,
        m,
        n,
        form: EstimatorForm::PairedUStat,
    })
}

/// Empirical leading variance component (zeta1) of the MMD² estimate for
/// one pair, per the nine-group contraction in the module docs.
pub fn variance_zeta1(pair: &GramPair<'_>) -> Result<f64> {
    require_min(pair.m(), 3)?;
    require_min(pair.n(), 3)?;
    let s = PairSums::from_pair(pair);
    let (m, n) = (s.m, s.n);

    let term_aa = kahan_norm_sq(&s.s_aa) / (m * (m - 1.0) * (m - 1.0))
        - sq(s.total_aa / (m * (m - 1.0)));
    let cross_a = kahan_dot(&s.s_aa, &s.u) / (m * (m - 1.0) * n)
        - s.total_aa * s.total_ab / (m * m * (m - 1.0) * n);
    let term_bb = kahan_norm_sq(&s.s_bb) / (n * (n - 1.0) * (n - 1.0))
        - sq(s.total_bb / (n * (n - 1.0)));
    let cross_b = kahan_dot(&s.s_bb, &s.c) / (n * (n - 1.0) * m)
        - s.total_bb * s.total_ab / (n * n * (n - 1.0) * m);
    let mixed = kahan_norm_sq(&s.u) / (n * n * m) - 2.0 * sq(s.total_ab / (n * m))
        + kahan_norm_sq(&s.c) / (m * m * n);

    Ok(term_aa - 2.0 * cross_a + term_bb - 2.0 * cross_b + mixed)
}

/// Empirical leading covariance component (zeta1) between the two MMD²
/// estimates that share the reference sample X.
pub fn covariance_zeta1(bundle: &GramBundle, form: CovarianceForm) -> Result<f64> {
    let (m, n, r) = (bundle.m(), bundle.n(), bundle.r());
    require_min(m, 3)?;
    require_min(n, 3)?;
    require_min(r, 3)?;
    let (mf, nf, rf) = (m as f64, n as f64, r as f64);

    let s_xx = bundle.ktil_xx().row_sums();
    let u = bundle.k_xy().row_sums();
    let w = bundle.k_xz().row_sums();
    let total_xx = kahan_sum(&s_xx);
    let total_xy = kahan_sum(&u);
    let total_xz = kahan_sum(&w);

    let term_xx = kahan_norm_sq(&s_xx) / (mf * (mf - 1.0) * (mf - 1.0))
        - sq(total_xx / (mf * (mf - 1.0)));
    let bracket_xz = kahan_dot(&s_xx, &w) / (mf * (mf - 1.0) * rf)
        - total_xx * total_xz / (mf * mf * (mf - 1.0) * rf);
    // The as-printed form pairs this bracket's leading factor (K_xy)
    // with the product total of K_xz; the symmetrized form uses K_xy.
    let xy_product_total = match form {
        CovarianceForm::AsPrinted => total_xz,
        CovarianceForm::Symmetrized => total_xy,
    };
    let bracket_xy = kahan_dot(&s_xx, &u) / (mf * (mf - 1.0) * nf)
        - total_xx * xy_product_total / (mf * mf * (mf - 1.0) * nf);
    // Associate the candidate sizes together so the whole expression is
    // bit-exactly invariant under exchanging the Y and Z blocks.
    let mixed =
        kahan_dot(&u, &w) / (mf * (nf * rf)) - total_xy * total_xz / (mf * mf * (nf * rf));

    Ok(term_xx - (bracket_xz + bracket_xy) + mixed)
}

/// Empirical leading variance component (zeta1) of the *difference*
/// statistic `MMD²(X,Y) - MMD²(X,Z)`, estimated directly from the order-2
/// U-statistic whose kernel is the difference of the two pair kernels.
/// Requires `m == n == r`.
pub fn diff_variance_direct(bundle: &GramBundle) -> Result<f64> {
    let (m, n, r) = (bundle.m(), bundle.n(), bundle.r());
    if !(m == n && n == r) {
        return Err(Error::UnequalSampleSizes { m, n, r });
    }
    require_min(m, 3)?;
    let (mf, nf, rf) = (m as f64, n as f64, r as f64);

    let s_yy = bundle.ktil_yy().row_sums();
    let s_zz = bundle.ktil_zz().row_sums();
    let u = bundle.k_xy().row_sums();
    let c_y = bundle.k_xy().col_sums();
    let w = bundle.k_xz().row_sums();
    let c_z = bundle.k_xz().col_sums();

    let total_yy = kahan_sum(&s_yy);
    let total_zz = kahan_sum(&s_zz);
    let total_xy = kahan_sum(&u);
    let total_xz = kahan_sum(&w);

    let mean_yy = total_yy / (nf * (nf - 1.0));
    let mean_zz = total_zz / (rf * (rf - 1.0));
    let mean_xy = total_xy / (nf * mf);
    let mean_xz = total_xz / (rf * mf);

    let var_yy = kahan_norm_sq(&s_yy) / (nf * (nf - 1.0) * (nf - 1.0)) - mean_yy * mean_yy;
    let var_xy_on_x = kahan_norm_sq(&u) / (nf * nf * mf) - mean_xy * mean_xy;
    let var_xy_on_y = kahan_norm_sq(&c_y) / (nf * mf * mf) - mean_xy * mean_xy;
    let var_zz = kahan_norm_sq(&s_zz) / (rf * (rf - 1.0) * (rf - 1.0)) - mean_zz * mean_zz;
    let var_xz_on_z = kahan_norm_sq(&c_z) / (rf * mf * mf) - mean_xz * mean_xz;
    let var_xz_on_x = kahan_norm_sq(&w) / (rf * rf * mf) - mean_xz * mean_xz;

    let cross_y = kahan_dot(&s_yy, &c_y) / (nf * (nf - 1.0) * mf) - mean_yy * mean_xy;
    let cross_x = kahan_dot(&u, &w) / (nf * mf * rf) - mean_xy * mean_xz;
    let cross_z = kahan_dot(&s_zz, &c_z) / (rf * (rf - 1.0) * mf) - mean_zz * mean_xz;

    Ok(var_yy + var_xy_on_x + var_xy_on_y + var_zz + var_xz_on_z + var_xz_on_x
        - 2.0 * cross_y
        - 2.0 * cross_x
        - 2.0 * cross_z)
}

/// Assemble the joint estimate: both MMD² values (general form), their
/// scaled variances (floored at zero), and the scaled covariance.
///
/// The prefactor is based on the shared reference size `m` in all three
/// entries; the asymptotics are stated in `sqrt(m)` of the reference
/// sample, and no exact finite-sample prefactor is available when
/// `n != r != m`.
pub fn joint_estimate(
    bundle: &GramBundle,
    scaling: VarianceScaling,
    form: CovarianceForm,
) -> Result<JointMmdEstimate> {
    let (m, n, r) = (bundle.m(), bundle.n(), bundle.r());
    require_min(m, 3)?;
    require_min(n, 3)?;
    require_min(r, 3)?;
    let c = scaling.prefactor(m);
    let mmd_xy = mmd2_general(&bundle.xy())?;
    let mmd_xz = mmd2_general(&bundle.xz())?;
    let var_xy = (c * variance_zeta1(&bundle.xy())?).max(0.0);
    let var_xz = (c * variance_zeta1(&bundle.xz())?).max(0.0);
    let cov_xyxz = c * covariance_zeta1(bundle, form)?;
    Ok(JointMmdEstimate {
        mmd_xy,
        mmd_xz,
        var_xy,
        var_xz,
        cov_xyxz,
        m,
        n,
        r,
    })
}
