//! Kernel functions, Gram-matrix construction, and bandwidth heuristics.
//!
//! The estimators downstream consume a [`GramBundle`]: the within-sample
//! kernel matrices with zeroed diagonals (`K̃_xx`, `K̃_yy`, `K̃_zz`) and the
//! two cross matrices `K_xy`, `K_xz` that couple each candidate to the
//! shared reference sample.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mat::Mat;

/// A set of observations, rows = samples, columns = features.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    data: Vec<f64>,
    rows: usize,
    dim: usize,
}

impl SampleSet {
    /// Build from a flat row-major buffer. Rejects empty sets, ragged
    /// buffers, and non-finite coordinates.
    pub fn from_flat(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || data.is_empty() {
            return Err(Error::EmptySample);
        }
        if data.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                left: data.len(),
                right: dim,
            });
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        let rows = data.len() / dim;
        Ok(SampleSet { data, rows, dim })
    }

    /// Build from per-observation rows, which must all share one length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(|r| r.len()).unwrap_or(0);
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: r.len(),
                });
            }
        }
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            data.extend_from_slice(r);
        }
        SampleSet::from_flat(data, dim)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Row-major view of the whole matrix.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// New set containing the given rows, in order.
    pub fn select(&self, indices: &[usize]) -> SampleSet {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        SampleSet {
            data,
            rows: indices.len(),
            dim: self.dim,
        }
    }
}

/// Kernel family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    /// `k(u,v) = exp(-||u-v||^2 / (2 sigma^2))`, values in (0, 1].
    GaussianRbf,
    /// `k(u,v) = <u, v>`.
    Linear,
}

/// A kernel choice together with its bandwidth, when one applies.
///
/// The Gaussian bandwidth `sigma` is in the distance units of the data and
/// enters as `exp(-d^2 / (2 sigma^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    bandwidth: f64,
}

impl KernelSpec {
    /// Gaussian RBF kernel with bandwidth `sigma > 0`.
    pub fn gaussian_rbf(bandwidth: f64) -> Result<Self> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::InvalidBandwidth(bandwidth));
        }
        Ok(KernelSpec {
            family: KernelFamily::GaussianRbf,
            bandwidth,
        })
    }

    /// Linear (dot-product) kernel.
    pub fn linear() -> Self {
        KernelSpec {
            family: KernelFamily::Linear,
            bandwidth: f64::NAN,
        }
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    /// Bandwidth, for the Gaussian family.
    pub fn bandwidth(&self) -> Option<f64> {
        match self.family {
            KernelFamily::GaussianRbf => Some(self.bandwidth),
            KernelFamily::Linear => None,
        }
    }

    /// Evaluate `k(u, v)`. Errors on dimension mismatch or non-finite input.
    pub fn eval(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch {
                left: u.len(),
                right: v.len(),
            });
        }
        if !(u.iter().all(|x| x.is_finite()) && v.iter().all(|x| x.is_finite())) {
            return Err(Error::NonFiniteInput);
        }
        Ok(self.eval_unchecked(u, v))
    }

    /// Same arithmetic as [`eval`](Self::eval) without the input checks;
    /// Gram construction uses this so bundle entries match `eval` exactly.
    #[inline]
    pub(crate) fn eval_unchecked(&self, u: &[f64], v: &[f64]) -> f64 {
        match self.family {
            KernelFamily::GaussianRbf => {
                let d2 = sq_dist(u, v);
                libm::exp(-d2 / (2.0 * self.bandwidth * self.bandwidth))
            }
            KernelFamily::Linear => {
                let mut acc = 0.0;
                for (&a, &b) in u.iter().zip(v.iter()) {
                    acc += a * b;
                }
                acc
            }
        }
    }
}

#[inline]
fn sq_dist(u: &[f64], v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&a, &b) in u.iter().zip(v.iter()) {
        let d = a - b;
        acc += d * d;
    }
    acc
}

/// The kernel matrices needed by the joint estimators.
///
/// `ktil_*` are within-sample Gram matrices with the diagonal set to zero;
/// `k_xy` and `k_xz` are the dense cross matrices against the reference.
#[derive(Debug, Clone)]
pub struct GramBundle {
    pub(crate) ktil_xx: Mat,
    pub(crate) ktil_yy: Mat,
    pub(crate) ktil_zz: Mat,
    pub(crate) k_xy: Mat,
    pub(crate) k_xz: Mat,
}

/// Borrowed slice of a bundle for one (reference, candidate) pair.
#[derive(Debug, Clone, Copy)]
pub struct GramPair<'a> {
    pub(crate) ktil_aa: &'a Mat,
    pub(crate) ktil_bb: &'a Mat,
    pub(crate) k_ab: &'a Mat,
}

impl GramBundle {
    pub fn m(&self) -> usize {
        self.ktil_xx.rows()
    }

    pub fn n(&self) -> usize {
        self.ktil_yy.rows()
    }

    pub fn r(&self) -> usize {
        self.ktil_zz.rows()
    }

    /// The (X, Y) slice.
    pub fn xy(&self) -> GramPair<'_> {
        GramPair {
            ktil_aa: &self.ktil_xx,
            ktil_bb: &self.ktil_yy,
            k_ab: &self.k_xy,
        }
    }

    /// The (X, Z) slice.
    pub fn xz(&self) -> GramPair<'_> {
        GramPair {
            ktil_aa: &self.ktil_xx,
            ktil_bb: &self.ktil_zz,
            k_ab: &self.k_xz,
        }
    }

    pub fn ktil_xx(&self) -> &Mat {
        &self.ktil_xx
    }

    pub fn ktil_yy(&self) -> &Mat {
        &self.ktil_yy
    }

    pub fn ktil_zz(&self) -> &Mat {
        &self.ktil_zz
    }

    pub fn k_xy(&self) -> &Mat {
        &self.k_xy
    }

    pub fn k_xz(&self) -> &Mat {
        &self.k_xz
    }
}

impl<'a> GramPair<'a> {
    pub fn m(&self) -> usize {
        self.ktil_aa.rows()
    }

    pub fn n(&self) -> usize {
        self.ktil_bb.rows()
    }
}

/// Within-sample Gram matrix with zeroed diagonal. Each unordered pair is
/// evaluated once and mirrored, so symmetry is bit-exact.
fn sym_gram_zero_diag(spec: &KernelSpec, a: &SampleSet) -> Result<Mat> {
    let n = a.len();
    let mut k = Mat::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = spec.eval_unchecked(a.row(i), a.row(j));
            if !v.is_finite() {
                return Err(Error::NonFiniteKernel);
            }
            k.set(i, j, v);
            k.set(j, i, v);
        }
    }
    Ok(k)
}

/// Dense cross Gram matrix `K[i][j] = k(a_i, b_j)`.
fn cross_gram(spec: &KernelSpec, a: &SampleSet, b: &SampleSet) -> Result<Mat> {
    let mut k = Mat::zeros(a.len(), b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            let v = spec.eval_unchecked(a.row(i), b.row(j));
            if !v.is_finite() {
                return Err(Error::NonFiniteKernel);
            }
            k.set(i, j, v);
        }
    }
    Ok(k)
}

fn check_dims(x: &SampleSet, y: &SampleSet) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            left: x.dim(),
            right: y.dim(),
        });
    }
    Ok(())
}

fn check_min_len(s: &SampleSet, required: usize) -> Result<()> {
    if s.len() < required {
        return Err(Error::SampleTooSmall {
            found: s.len(),
            required,
        });
    }
    Ok(())
}

/// Build the full Gram bundle for (X, Y, Z).
///
/// Requires a shared feature dimension and at least three observations per
/// set; the variance prefactor `4(m-2)/(m(m-1))` is undefined below that.
pub fn gram_bundle(
    spec: &KernelSpec,
    x: &SampleSet,
    y: &SampleSet,
    z: &SampleSet,
) -> Result<GramBundle> {
    check_dims(x, y)?;
    check_dims(x, z)?;
    check_min_len(x, 3)?;
    check_min_len(y, 3)?;
    check_min_len(z, 3)?;
    Ok(GramBundle {
        ktil_xx: sym_gram_zero_diag(spec, x)?,
        ktil_yy: sym_gram_zero_diag(spec, y)?,
        ktil_zz: sym_gram_zero_diag(spec, z)?,
        k_xy: cross_gram(spec, x, y)?,
        k_xz: cross_gram(spec, x, z)?,
    })
}

/// Owned Gram data for a single (A, B) pair, used by the split baseline
/// where only two of the three matrices are needed at a time.
#[derive(Debug, Clone)]
pub struct GramPairOwned {
    ktil_aa: Mat,
    ktil_bb: Mat,
    k_ab: Mat,
}

impl GramPairOwned {
    pub fn as_pair(&self) -> GramPair<'_> {
        GramPair {
            ktil_aa: &self.ktil_aa,
            ktil_bb: &self.ktil_bb,
            k_ab: &self.k_ab,
        }
    }
}

/// Build Gram data for one pair of sample sets (minimum two rows each).
pub fn gram_pair(spec: &KernelSpec, a: &SampleSet, b: &SampleSet) -> Result<GramPairOwned> {
    check_dims(a, b)?;
    check_min_len(a, 2)?;
    check_min_len(b, 2)?;
    Ok(GramPairOwned {
        ktil_aa: sym_gram_zero_diag(spec, a)?,
        ktil_bb: sym_gram_zero_diag(spec, b)?,
        k_ab: cross_gram(spec, a, b)?,
    })
}

/// Median of the Euclidean distances over all cross pairs `(a_i, b_j)`.
///
/// An even pair count takes the mean of the two central order statistics.
/// A zero median falls back to the smallest nonzero cross distance so that
/// duplicate-heavy data still yields a usable bandwidth; if every cross
/// distance is zero the heuristic is undefined and an error is returned.
pub fn median_heuristic(a: &SampleSet, b: &SampleSet) -> Result<f64> {
    check_dims(a, b)?;
    let mut d2: Vec<f64> = Vec::with_capacity(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            d2.push(sq_dist(a.row(i), b.row(j)));
        }
    }
    d2.sort_unstable_by(f64::total_cmp);
    let len = d2.len();
    let median = if len % 2 == 1 {
        libm::sqrt(d2[len / 2])
    } else {
        (libm::sqrt(d2[len / 2 - 1]) + libm::sqrt(d2[len / 2])) / 2.0
    };
    if median > 0.0 {
        return Ok(median);
    }
    match d2.iter().find(|&&v| v > 0.0) {
        Some(&v) => Ok(libm::sqrt(v)),
        None => Err(Error::DegenerateDistances),
    }
}

/// Averaged bandwidth for the three-sample setting:
/// the mean of `median_heuristic(X, Y)` and `median_heuristic(X, Z)`.
pub fn relative_bandwidth(x: &SampleSet, y: &SampleSet, z: &SampleSet) -> Result<f64> {
    Ok((median_heuristic(x, y)? + median_heuristic(x, z)?) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(rows: &[&[f64]]) -> SampleSet {
        let v: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        SampleSet::from_rows(&v).unwrap()
    }

    #[test]
    fn rbf_at_zero_distance_is_one() {
        let k = KernelSpec::gaussian_rbf(1.0).unwrap();
        assert_eq!(k.eval(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 1.0);
    }

    #[test]
    fn linear_is_dot_product() {
        let k = KernelSpec::linear();
        assert_eq!(k.eval(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 11.0);
    }

    #[test]
    fn rbf_closed_form() {
        // bw = 2, ||u - v||^2 = 4 -> exp(-4/8)
        let k = KernelSpec::gaussian_rbf(2.0).unwrap();
        let got = k.eval(&[0.0, 0.0], &[2.0, 0.0]).unwrap();
        assert!((got - libm::exp(-0.5)).abs() < 1e-15);
    }

    #[test]
    fn eval_rejects_bad_input() {
        let k = KernelSpec::linear();
        assert_eq!(
            k.eval(&[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { left: 1, right: 2 })
        );
        assert_eq!(k.eval(&[f64::NAN], &[1.0]), Err(Error::NonFiniteInput));
        assert_eq!(
            KernelSpec::gaussian_rbf(0.0),
            Err(Error::InvalidBandwidth(0.0))
        );
    }

    #[test]
    fn bundle_linear_hand_values() {
        // X = Y = Z = {1, 0, 2} in 1-D with the linear kernel.
        let s = set(&[&[1.0], &[0.0], &[2.0]]);
        let k = KernelSpec::linear();
        let b = gram_bundle(&k, &s, &s, &s).unwrap();
        let g = b.ktil_xx();
        assert_eq!(g.get(0, 1), 0.0);
        assert_eq!(g.get(0, 2), 2.0);
        assert_eq!(g.get(1, 2), 0.0);
        for i in 0..3 {
            assert_eq!(g.get(i, i), 0.0);
        }
    }

    #[test]
    fn bundle_duplicated_rows_rbf() {
        let s = set(&[&[1.0], &[1.0], &[5.0]]);
        let k = KernelSpec::gaussian_rbf(1.0).unwrap();
        let b = gram_bundle(&k, &s, &s, &s).unwrap();
        assert_eq!(b.ktil_xx().get(0, 1), 1.0);
        assert_eq!(b.ktil_xx().get(0, 0), 0.0);
    }

    #[test]
    fn bundle_rejects_small_or_mismatched() {
        let k = KernelSpec::linear();
        let small = set(&[&[1.0], &[2.0]]);
        let ok = set(&[&[1.0], &[2.0], &[3.0]]);
        assert!(matches!(
            gram_bundle(&k, &small, &ok, &ok),
            Err(Error::SampleTooSmall { .. })
        ));
        let wide = set(&[&[1.0, 2.0], &[2.0, 3.0], &[3.0, 4.0]]);
        assert!(matches!(
            gram_bundle(&k, &ok, &wide, &ok),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn linear_kernel_can_overflow_to_error() {
        let huge = set(&[&[1e200], &[1e200], &[-1e200]]);
        let k = KernelSpec::linear();
        assert!(matches!(
            gram_bundle(&k, &huge, &huge, &huge),
            Err(Error::NonFiniteKernel)
        ));
    }

    #[test]
    fn median_heuristic_hand_cases() {
        // A = {0}, B = {0, 1, 3}: distances {0, 1, 3}, median 1.
        let a = set(&[&[0.0]]);
        let b = set(&[&[0.0], &[1.0], &[3.0]]);
        assert_eq!(median_heuristic(&a, &b).unwrap(), 1.0);

        // Single 3-4-5 pair.
        let p = set(&[&[0.0, 0.0]]);
        let q = set(&[&[3.0, 4.0]]);
        assert_eq!(median_heuristic(&p, &q).unwrap(), 5.0);
    }

    #[test]
    fn median_heuristic_degenerate_and_fallback() {
        let a = set(&[&[2.0], &[2.0]]);
        assert_eq!(median_heuristic(&a, &a), Err(Error::DegenerateDistances));

        // Majority zeros: median 0, fall back to the smallest nonzero.
        let b = set(&[&[2.0], &[2.0], &[3.0]]);
        assert_eq!(median_heuristic(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn relative_bandwidth_hand_case() {
        // med(X,Y) with X={0}, Y={1,3} -> (1+3)/2 = 2; med(X,Z) with Z={2} -> 2.
        let x = set(&[&[0.0]]);
        let y = set(&[&[1.0], &[3.0]]);
        let z = set(&[&[2.0]]);
        assert_eq!(relative_bandwidth(&x, &y, &z).unwrap(), 2.0);
    }

    #[test]
    fn relative_bandwidth_identical_candidates() {
        let x = set(&[&[0.0], &[1.0]]);
        let y = set(&[&[2.0], &[4.0]]);
        assert_eq!(
            relative_bandwidth(&x, &y, &y).unwrap(),
            median_heuristic(&x, &y).unwrap()
        );
    }
}
