//! Matrix-form estimators against independent nested-loop oracles.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use relmmd_core::estimators::{
    covariance_zeta1, diff_variance_direct, joint_estimate, mmd2_general, mmd2_paired,
    variance_zeta1, CovarianceForm, VarianceScaling,
};
use relmmd_core::kernels::{gram_bundle, KernelSpec, SampleSet};
use relmmd_testkit::{
    covariance_zeta1_oracle, diff_conditional_oracle, diff_variance_oracle, mmd2_general_oracle,
    mmd2_paired_oracle, random_instance, variance_zeta1_oracle, OracleKernel,
};

fn to_set(rows: &[Vec<f64>]) -> SampleSet {
    SampleSet::from_rows(rows).unwrap()
}

fn to_spec(k: OracleKernel) -> KernelSpec {
    match k {
        OracleKernel::Rbf { bandwidth } => KernelSpec::gaussian_rbf(bandwidth).unwrap(),
        OracleKernel::Linear => KernelSpec::linear(),
    }
}

fn assert_rel_close(got: f64, want: f64, tol: f64, what: &str) {
    let scale = got.abs().max(want.abs());
    if scale < 1e-9 {
        assert!(
            (got - want).abs() < 1e-15,
            "{what}: got {got}, want {want} (near-zero absolute check)"
        );
    } else {
        assert!(
            (got - want).abs() <= tol * scale,
            "{what}: got {got}, want {want}, rel err {}",
            (got - want).abs() / scale
        );
    }
}

#[test]
fn estimators_match_nested_loop_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0b5e55ed);
    for case in 0..40 {
        let inst = random_instance(&mut rng, false);
        let spec = to_spec(inst.kernel);
        let (x, y, z) = (to_set(&inst.x), to_set(&inst.y), to_set(&inst.z));
        let bundle = gram_bundle(&spec, &x, &y, &z).unwrap();

        assert_rel_close(
            mmd2_general(&bundle.xy()).unwrap().value,
            mmd2_general_oracle(&inst.x, &inst.y, inst.kernel),
            1e-9,
            &format!("mmd2_general xy case {case}"),
        );
        assert_rel_close(
            mmd2_general(&bundle.xz()).unwrap().value,
            mmd2_general_oracle(&inst.x, &inst.z, inst.kernel),
            1e-9,
            &format!("mmd2_general xz case {case}"),
        );
        assert_rel_close(
            variance_zeta1(&bundle.xy()).unwrap(),
            variance_zeta1_oracle(&inst.x, &inst.y, inst.kernel),
            1e-9,
            &format!("variance_zeta1 xy case {case}"),
        );
        assert_rel_close(
            variance_zeta1(&bundle.xz()).unwrap(),
            variance_zeta1_oracle(&inst.x, &inst.z, inst.kernel),
            1e-9,
            &format!("variance_zeta1 xz case {case}"),
        );
        assert_rel_close(
            covariance_zeta1(&bundle, CovarianceForm::AsPrinted).unwrap(),
            covariance_zeta1_oracle(&inst.x, &inst.y, &inst.z, inst.kernel, false),
            1e-9,
            &format!("covariance as-printed case {case}"),
        );
        assert_rel_close(
            covariance_zeta1(&bundle, CovarianceForm::Symmetrized).unwrap(),
            covariance_zeta1_oracle(&inst.x, &inst.y, &inst.z, inst.kernel, true),
            1e-9,
            &format!("covariance symmetrized case {case}"),
        );
    }
}

#[test]
fn paired_estimators_match_oracles_on_equal_sizes() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9a17ed);
    for case in 0..25 {
        let inst = random_instance(&mut rng, true);
        let spec = to_spec(inst.kernel);
        let (x, y, z) = (to_set(&inst.x), to_set(&inst.y), to_set(&inst.z));
        let bundle = gram_bundle(&spec, &x, &y, &z).unwrap();

        let got = mmd2_paired(&bundle.xy()).unwrap().value;
        let want = mmd2_paired_oracle(&inst.x, &inst.y, inst.kernel);
        assert!(
            (got - want).abs() <= 1e-12 * got.abs().max(want.abs()).max(1.0),
            "mmd2_paired case {case}: {got} vs {want}"
        );

        assert_rel_close(
            diff_variance_direct(&bundle).unwrap(),
            diff_variance_oracle(&inst.x, &inst.y, &inst.z, inst.kernel),
            1e-9,
            &format!("diff_variance case {case}"),
        );
    }
}

/// The as-printed covariance expression has an asymmetric product term in
/// one bracket. Pin down, via the expectation-term oracle, that the
/// symmetrized reading is the one matching the term-by-term expansion and
/// that it alone is invariant under swapping the two candidates.
#[test]
fn covariance_bracket_resolution() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let inst = random_instance(&mut rng, false);
    let spec = to_spec(inst.kernel);
    let (x, y, z) = (to_set(&inst.x), to_set(&inst.y), to_set(&inst.z));
    let bundle = gram_bundle(&spec, &x, &y, &z).unwrap();
    let swapped = gram_bundle(&spec, &x, &z, &y).unwrap();

    let sym = covariance_zeta1(&bundle, CovarianceForm::Symmetrized).unwrap();
    let sym_swapped = covariance_zeta1(&swapped, CovarianceForm::Symmetrized).unwrap();
    assert_eq!(
        sym, sym_swapped,
        "symmetrized covariance must be exactly invariant under Y<->Z"
    );

    let printed = covariance_zeta1(&bundle, CovarianceForm::AsPrinted).unwrap();
    let printed_swapped = covariance_zeta1(&swapped, CovarianceForm::AsPrinted).unwrap();
    assert!(
        (printed - printed_swapped).abs() > 1e-12,
        "as-printed covariance is asymmetric on generic data: {printed} vs {printed_swapped}"
    );

    // Term-by-term expectation oracle agrees with the symmetrized form.
    let oracle = covariance_zeta1_oracle(&inst.x, &inst.y, &inst.z, inst.kernel, true);
    assert_rel_close(sym, oracle, 1e-9, "symmetrized vs expectation oracle");
}

/// The variance of the difference statistic equals
/// `var_xy + var_xz - 2 cov` exactly at the plug-in level when the
/// symmetrized covariance is used: the three formulas share every
/// empirical term, so the identity holds to rounding, not just
/// asymptotically.
#[test]
fn difference_route_plugin_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xd1ff);
    for _ in 0..10 {
        let inst = random_instance(&mut rng, true);
        let spec = to_spec(inst.kernel);
        let (x, y, z) = (to_set(&inst.x), to_set(&inst.y), to_set(&inst.z));
        let bundle = gram_bundle(&spec, &x, &y, &z).unwrap();

        let zeta_xy = variance_zeta1(&bundle.xy()).unwrap();
        let zeta_xz = variance_zeta1(&bundle.xz()).unwrap();
        let zeta_cov = covariance_zeta1(&bundle, CovarianceForm::Symmetrized).unwrap();
        let combined = zeta_xy + zeta_xz - 2.0 * zeta_cov;
        let direct = diff_variance_direct(&bundle).unwrap();
        assert_rel_close(combined, direct, 1e-10, "plug-in identity");
    }
}

#[test]
fn joint_estimate_consistent_with_parts() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let inst = random_instance(&mut rng, true);
    let spec = to_spec(inst.kernel);
    let (x, y, z) = (to_set(&inst.x), to_set(&inst.y), to_set(&inst.z));
    let bundle = gram_bundle(&spec, &x, &y, &z).unwrap();
    let joint = joint_estimate(
        &bundle,
        VarianceScaling::ExactUStat,
        CovarianceForm::Symmetrized,
    )
    .unwrap();
    let c = VarianceScaling::ExactUStat.prefactor(bundle.m());
    assert_eq!(
        joint.mmd_xy.value,
        mmd2_general(&bundle.xy()).unwrap().value
    );
    assert_eq!(
        joint.var_xy,
        (c * variance_zeta1(&bundle.xy()).unwrap()).max(0.0)
    );
    assert_eq!(
        joint.cov_xyxz,
        c * covariance_zeta1(&bundle, CovarianceForm::Symmetrized).unwrap()
    );
}

/// Repeated single point in both samples, checked through the oracle
/// (the general-form estimate is just a kernel-value combination there).
#[test]
fn general_form_single_point_repeated() {
    let a = 1.7;
    let x = vec![vec![a], vec![a]];
    let want = mmd2_general_oracle(&x, &x, OracleKernel::Linear);
    // k == a^2 everywhere, so the estimate is a^2 + a^2 - 2a^2 = 0.
    assert!((want - 0.0).abs() < 1e-15);
    let set = to_set(&x);
    let g = relmmd_core::kernels::gram_pair(&KernelSpec::linear(), &set, &set).unwrap();
    assert_rel_close(
        mmd2_general(&g.as_pair()).unwrap().value,
        want,
        1e-12,
        "repeated point",
    );
}

/// With z_i == y_i the difference kernel vanishes identically, so the
/// direct conditional-expectation estimate of its variance is exactly 0.
#[test]
fn difference_kernel_vanishes_pointwise() {
    let x = vec![vec![0.3, 1.0], vec![0.9, -0.2], vec![0.4, 0.0], vec![1.2, 2.0]];
    let y = vec![vec![1.3, 0.7], vec![1.9, 1.1], vec![1.4, -0.5], vec![0.2, 0.9]];
    let v = diff_conditional_oracle(&x, &y, &y, OracleKernel::Rbf { bandwidth: 1.3 });
    assert_eq!(v, 0.0);
}
