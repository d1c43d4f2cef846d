//! Test-only oracles, deliberately independent of the library under test.
//!
//! Every estimator here is written as plain nested loops over raw samples,
//! with naive summation and its own kernel evaluation. The point is to
//! cross-check the matrix-contraction implementations against something
//! that shares no code path with them.

use rand::Rng;

/// Kernel choice for the oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleKernel {
    Rbf { bandwidth: f64 },
    Linear,
}

impl OracleKernel {
    pub fn eval(&self, u: &[f64], v: &[f64]) -> f64 {
        match *self {
            OracleKernel::Rbf { bandwidth } => {
                let mut d2 = 0.0;
                for (a, b) in u.iter().zip(v.iter()) {
                    d2 += (a - b) * (a - b);
                }
                (-d2 / (2.0 * bandwidth * bandwidth)).exp()
            }
            OracleKernel::Linear => u.iter().zip(v.iter()).map(|(a, b)| a * b).sum(),
        }
    }
}

pub type Sample = Vec<Vec<f64>>;

/// MMD² in the general form: two within-sample U-statistics plus the full
/// cross average (all (i, j) pairs, `i == j` included).
pub fn mmd2_general_oracle(x: &Sample, y: &Sample, k: OracleKernel) -> f64 {
    let (m, n) = (x.len() as f64, y.len() as f64);
    let mut xx = 0.0;
    for i in 0..x.len() {
        for j in 0..x.len() {
            if i != j {
                xx += k.eval(&x[i], &x[j]);
            }
        }
    }
    let mut yy = 0.0;
    for i in 0..y.len() {
        for j in 0..y.len() {
            if i != j {
                yy += k.eval(&y[i], &y[j]);
            }
        }
    }
    let mut xy = 0.0;
    for xi in x {
        for yj in y {
            xy += k.eval(xi, yj);
        }
    }
    xx / (m * (m - 1.0)) + yy / (n * (n - 1.0)) - 2.0 * xy / (m * n)
}

/// MMD² as the order-2 U-statistic over pairs `v_i = (x_i, y_i)` with
/// kernel `h(v_i, v_j) = k(x_i,x_j) + k(y_i,y_j) - k(x_i,y_j) - k(x_j,y_i)`.
pub fn mmd2_paired_oracle(x: &Sample, y: &Sample, k: OracleKernel) -> f64 {
    assert_eq!(x.len(), y.len());
    let m = x.len();
    let mut acc = 0.0;
    for i in 0..m {
        for j in 0..m {
            if i != j {
                acc += k.eval(&x[i], &x[j]) + k.eval(&y[i], &y[j])
                    - k.eval(&x[i], &y[j])
                    - k.eval(&x[j], &y[i]);
            }
        }
    }
    acc / (m as f64 * (m as f64 - 1.0))
}

/// `E_a[<phi(a_i), mu_a>^2]` estimated by explicit triple sums over one
/// sample, self-pairs excluded in the inner means.
fn sq_within(a: &Sample, k: OracleKernel) -> f64 {
    let m = a.len() as f64;
    let mut acc = 0.0;
    for i in 0..a.len() {
        for j in 0..a.len() {
            if j == i {
                continue;
            }
            for l in 0..a.len() {
                if l == i {
                    continue;
                }
                acc += k.eval(&a[i], &a[j]) * k.eval(&a[i], &a[l]);
            }
        }
    }
    acc / (m * (m - 1.0) * (m - 1.0))
}

/// `(1/(m(m-1))) sum_{i != j} k(a_i, a_j)`, the within-sample mean.
fn mean_within(a: &Sample, k: OracleKernel) -> f64 {
    let m = a.len() as f64;
    let mut acc = 0.0;
    for i in 0..a.len() {
        for j in 0..a.len() {
            if i != j {
                acc += k.eval(&a[i], &a[j]);
            }
        }
    }
    acc / (m * (m - 1.0))
}

/// `(1/(mn)) sum_{i,l} k(a_i, b_l)`, the cross mean.
fn mean_cross(a: &Sample, b: &Sample, k: OracleKernel) -> f64 {
    let mut acc = 0.0;
    for ai in a {
        for bl in b {
            acc += k.eval(ai, bl);
        }
    }
    acc / (a.len() as f64 * b.len() as f64)
}

/// `E_a[<phi(a), mu_a><phi(a), mu_b>]` by triple sums: within-mean over
/// `j != i`, cross-mean over all `l`.
fn mixed_within_cross(a: &Sample, b: &Sample, k: OracleKernel) -> f64 {
    let (m, n) = (a.len() as f64, b.len() as f64);
    let mut acc = 0.0;
    for i in 0..a.len() {
        for j in 0..a.len() {
            if j == i {
                continue;
            }
            for bl in b {
                acc += k.eval(&a[i], &a[j]) * k.eval(&a[i], bl);
            }
        }
    }
    acc / (m * (m - 1.0) * n)
}

/// `E_a[<phi(a), mu_b>^2]`: square of the cross mean seen from side `a`.
fn sq_cross_from_a(a: &Sample, b: &Sample, k: OracleKernel) -> f64 {
    let (m, n) = (a.len() as f64, b.len() as f64);
    let mut acc = 0.0;
    for ai in a {
        for bl in b {
            for bl2 in b {
                acc += k.eval(ai, bl) * k.eval(ai, bl2);
            }
        }
    }
    acc / (m * n * n)
}

/// `E_a[<phi(a), mu_b><phi(a), mu_c>]` for two other samples `b`, `c`.
fn mixed_cross_cross(a: &Sample, b: &Sample, c: &Sample, k: OracleKernel) -> f64 {
    let (m, n, r) = (a.len() as f64, b.len() as f64, c.len() as f64);
    let mut acc = 0.0;
    for ai in a {
        for bl in b {
            for cq in c {
                acc += k.eval(ai, bl) * k.eval(ai, cq);
            }
        }
    }
    acc / (m * n * r)
}

/// Leading variance component of MMD²(X, Y), assembled term by term from
/// the expectation expansion.
pub fn variance_zeta1_oracle(x: &Sample, y: &Sample, k: OracleKernel) -> f64 {
    let var_x = sq_within(x, k) - mean_within(x, k).powi(2);
    let cross_x = mixed_within_cross(x, y, k) - mean_within(x, k) * mean_cross(x, y, k);
    let var_y = sq_within(y, k) - mean_within(y, k).powi(2);
    let cross_y = mixed_within_cross(y, x, k) - mean_within(y, k) * mean_cross(x, y, k);
    let sq_xy_on_x = sq_cross_from_a(x, y, k);
    let sq_xy_on_y = sq_cross_from_a(y, x, k);
    let mean_xy = mean_cross(x, y, k);
    var_x - 2.0 * cross_x + var_y - 2.0 * cross_y + sq_xy_on_x - 2.0 * mean_xy * mean_xy
        + sq_xy_on_y
}

/// Raw cross total `sum_{i,l} k(a_i, b_l)`.
fn sum_cross(a: &Sample, b: &Sample, k: OracleKernel) -> f64 {
    let mut acc = 0.0;
    for ai in a {
        for bl in b {
            acc += k.eval(ai, bl);
        }
    }
    acc
}

/// Leading covariance component between MMD²(X, Y) and MMD²(X, Z).
///
/// With `corrected = true` every bracket is the empirical estimate of
/// `E[AB] - E[A]E[B]`; with `false` the second cross bracket's product
/// term reproduces the as-printed expression verbatim, pairing the X-Z
/// cross total with the X-Y bracket under the X-Y normalization
/// `1/(m^2(m-1)n)`.
pub fn covariance_zeta1_oracle(
    x: &Sample,
    y: &Sample,
    z: &Sample,
    k: OracleKernel,
    corrected: bool,
) -> f64 {
    let (m, n) = (x.len() as f64, y.len() as f64);
    let var_x = sq_within(x, k) - mean_within(x, k).powi(2);
    let bracket_xz = mixed_within_cross(x, z, k) - mean_within(x, k) * mean_cross(x, z, k);
    let xy_product_term = if corrected {
        mean_within(x, k) * mean_cross(x, y, k)
    } else {
        mean_within(x, k) * sum_cross(x, z, k) / (m * n)
    };
    let bracket_xy = mixed_within_cross(x, y, k) - xy_product_term;
    let mixed = mixed_cross_cross(x, y, z, k) - mean_cross(x, y, k) * mean_cross(x, z, k);
    var_x - bracket_xz - bracket_xy + mixed
}

/// `E_b[<phi(b), mu_b><phi(b), mu_a>]`: within-mean times cross-mean, both
/// seen from side `b` (triple sums; self-pairs excluded within `b`).
fn mixed_within_cross_other(b: &Sample, a: &Sample, k: OracleKernel) -> f64 {
    let (n, m) = (b.len() as f64, a.len() as f64);
    let mut acc = 0.0;
    for l in 0..b.len() {
        for l2 in 0..b.len() {
            if l2 == l {
                continue;
            }
            for ai in a {
                acc += k.eval(&b[l], &b[l2]) * k.eval(ai, &b[l]);
            }
        }
    }
    acc / (n * (n - 1.0) * m)
}

/// Leading variance component of the difference statistic
/// `MMD²(X,Y) - MMD²(X,Z)`, term by term from its expectation expansion.
pub fn diff_variance_oracle(x: &Sample, y: &Sample, z: &Sample, k: OracleKernel) -> f64 {
    let var_yy = sq_within(y, k) - mean_within(y, k).powi(2);
    let var_xy_on_x = sq_cross_from_a(x, y, k) - mean_cross(x, y, k).powi(2);
    let var_xy_on_y = sq_cross_from_a(y, x, k) - mean_cross(x, y, k).powi(2);
    let var_zz = sq_within(z, k) - mean_within(z, k).powi(2);
    let var_xz_on_x = sq_cross_from_a(x, z, k) - mean_cross(x, z, k).powi(2);
    let var_xz_on_z = sq_cross_from_a(z, x, k) - mean_cross(x, z, k).powi(2);
    let cross_y = mixed_within_cross_other(y, x, k) - mean_within(y, k) * mean_cross(x, y, k);
    let cross_x = mixed_cross_cross(x, y, z, k) - mean_cross(x, y, k) * mean_cross(x, z, k);
    let cross_z = mixed_within_cross_other(z, x, k) - mean_within(z, k) * mean_cross(x, z, k);
    var_yy + var_xy_on_x + var_xy_on_y + var_zz + var_xz_on_x + var_xz_on_z
        - 2.0 * cross_y
        - 2.0 * cross_x
        - 2.0 * cross_z
}

/// Plug-in variance of the conditional expectation of the difference
/// kernel `f(d_i, d_j)`, evaluated directly on paired triples
/// `d_i = (x_i, y_i, z_i)`. When `z_i == y_i` pointwise, `f` vanishes
/// identically and so does this estimate.
pub fn diff_conditional_oracle(x: &Sample, y: &Sample, z: &Sample, k: OracleKernel) -> f64 {
    let m = x.len();
    assert!(y.len() == m && z.len() == m);
    let f = |i: usize, j: usize| -> f64 {
        (k.eval(&y[i], &y[j]) - k.eval(&x[i], &y[j]) - k.eval(&x[j], &y[i]))
            - (k.eval(&z[i], &z[j]) - k.eval(&x[i], &z[j]) - k.eval(&x[j], &z[i]))
    };
    let cond: Vec<f64> = (0..m)
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..m {
                if j != i {
                    acc += f(i, j);
                }
            }
            acc / (m as f64 - 1.0)
        })
        .collect();
    let mean = cond.iter().sum::<f64>() / m as f64;
    cond.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / m as f64
}

// ---------------------------------------------------------------------------
// High-precision standard normal CDF reference.
// ---------------------------------------------------------------------------

/// erf by Maclaurin series; cancellation keeps this below ~1e-14 absolute
/// for `|u| <= 2`.
fn erf_series(u: f64) -> f64 {
    let two_over_sqrt_pi = 1.128_379_167_095_512_6_f64;
    let mut term = u;
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut k = 0u32;
    loop {
        let contrib = term / (2 * k + 1) as f64;
        // Kahan step
        let yv = contrib - comp;
        let t = sum + yv;
        comp = (t - sum) - yv;
        sum = t;
        if contrib.abs() < 1e-20 {
            break;
        }
        k += 1;
        term *= -u * u / k as f64;
    }
    two_over_sqrt_pi * sum
}

/// erfc for `u >= 2` via the Gauss continued fraction
/// `erfc(u) sqrt(pi) exp(u^2) = 1/(u + (1/2)/(u + 1/(u + (3/2)/(u + ...))))`
/// evaluated with the modified Lentz algorithm.
fn erfc_continued_fraction(u: f64) -> f64 {
    let tiny = 1e-300;
    let mut f = u;
    if f == 0.0 {
        f = tiny;
    }
    let mut c = f;
    let mut d = 0.0;
    for k in 1..300 {
        let a = k as f64 / 2.0;
        d = u + a * d;
        if d == 0.0 {
            d = tiny;
        }
        c = u + a / c;
        if c == 0.0 {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-17 {
            break;
        }
    }
    let sqrt_pi = 1.772_453_850_905_516_f64;
    (-u * u).exp() / (sqrt_pi * f)
}

/// Reference complementary error function, independent of the library's
/// rational-minimax port.
pub fn reference_erfc(u: f64) -> f64 {
    if u < 0.0 {
        return 2.0 - reference_erfc(-u);
    }
    if u <= 2.0 {
        1.0 - erf_series(u)
    } else {
        erfc_continued_fraction(u)
    }
}

/// Reference standard normal CDF.
pub fn reference_phi(t: f64) -> f64 {
    0.5 * reference_erfc(-t / core::f64::consts::SQRT_2)
}

// ---------------------------------------------------------------------------
// Random instances for oracle-equivalence sweeps.
// ---------------------------------------------------------------------------

/// One randomly drawn oracle-test instance.
pub struct OracleInstance {
    pub x: Sample,
    pub y: Sample,
    pub z: Sample,
    pub kernel: OracleKernel,
}

fn draw_sample<R: Rng>(rng: &mut R, rows: usize, dim: usize, shift: f64) -> Sample {
    (0..rows)
        .map(|_| {
            (0..dim)
                .map(|_| rng.random::<f64>() * 2.0 - 1.0 + shift)
                .collect()
        })
        .collect()
}

/// Draw an instance with sizes in `[3, 30]`, dimension in `[1, 4]`, and a
/// kernel alternating between RBF (random bandwidth) and linear. With
/// `equal_sizes` the three sets share one size, as the difference-variance
/// estimator requires.
pub fn random_instance<R: Rng>(rng: &mut R, equal_sizes: bool) -> OracleInstance {
    let dim = rng.random_range(1..=4);
    let m = rng.random_range(3..=30);
    let (n, r) = if equal_sizes {
        (m, m)
    } else {
        (rng.random_range(3..=30), rng.random_range(3..=30))
    };
    let kernel = if rng.random::<bool>() {
        OracleKernel::Rbf {
            bandwidth: 0.5 + rng.random::<f64>() * 2.0,
        }
    } else {
        OracleKernel::Linear
    };
    OracleInstance {
        x: draw_sample(rng, m, dim, 0.0),
        y: draw_sample(rng, n, dim, 0.8),
        z: draw_sample(rng, r, dim, -0.6),
        kernel,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_phi_spot_values() {
        // Frozen from 40-digit arithmetic.
        let table = [
            (-8.0_f64, 6.220960574271784123516e-16),
            (-4.0_f64, 0.00003167124183311992125377),
            (-1.96_f64, 0.02499789514822043413658),
            (0.0_f64, 0.5),
            (1.0_f64, 0.8413447460685429485852),
            (1.96_f64, 0.9750021048517795658634),
            (4.0_f64, 0.9999683287581668800787),
            (8.0_f64, 0.9999999999999993779039),
        ];
        for (t, want) in table {
            let got = reference_phi(t);
            assert!(
                (got - want).abs() <= 1e-15 + want.abs() * 1e-13,
                "phi({t}): got {got}, want {want}"
            );
        }
    }

    #[test]
    fn reference_erfc_matches_series_and_cf_at_seam() {
        // Both branches should agree near u = 2.
        let a = 1.0 - erf_series(2.0);
        let b = erfc_continued_fraction(2.0);
        assert!((a - b).abs() < 1e-15, "seam mismatch: {a} vs {b}");
    }

    #[test]
    fn paired_oracle_vanishes_on_identical_samples() {
        let x = vec![vec![0.5], vec![1.5], vec![-0.5]];
        assert_eq!(
            mmd2_paired_oracle(&x, &x, OracleKernel::Rbf { bandwidth: 1.0 }),
            0.0
        );
    }

    #[test]
    fn diff_conditional_vanishes_when_z_equals_y() {
        let x = vec![vec![0.1], vec![0.9], vec![0.4], vec![0.7]];
        let y = vec![vec![1.1], vec![1.9], vec![1.4], vec![1.7]];
        let v = diff_conditional_oracle(&x, &y, &y, OracleKernel::Linear);
        assert_eq!(v, 0.0);
    }
}
