//! Machine-readable output: the JSON result document for single tests and
//! the CSV report files emitted by the experiment commands.
//!
//! Numbers are written in Rust's shortest round-trip representation, so a
//! re-read recovers the exact `f64` bit pattern. Report files carry their
//! full configuration as `#`-prefixed comment lines and contain nothing
//! run-dependent beyond the data, so identical invocations produce
//! byte-identical files.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::experiments::{
    CalibrationReport, ExperimentConfig, IsocurveReport, PowerReport, SweepReport,
};
use relmmd_core::reltest::TestResult;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Echo of everything that went into a single test invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputEcho {
    pub ref_path: String,
    pub y_path: String,
    pub z_path: String,
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub dim: usize,
    /// "gaussian-rbf" or "linear".
    pub kernel: String,
    /// The bandwidth actually used, when the kernel has one. The heuristic
    /// makes results data-dependent, so it is always echoed.
    pub bandwidth: Option<f64>,
    /// "median", "fixed", or "none".
    pub bandwidth_rule: String,
    pub alpha: f64,
    /// Single tests consume no randomness; experiment commands echo theirs.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResultDoc {
    pub mmd_xy: f64,
    pub mmd_xz: f64,
    pub statistic: f64,
    pub projected_sd: f64,
    pub p_value: f64,
    pub alpha: f64,
    /// "favor-z", "favor-y", or "inconclusive".
    pub decision: String,
    pub degenerate_variance: bool,
}

impl From<&TestResult> for TestResultDoc {
    fn from(r: &TestResult) -> Self {
        TestResultDoc {
            mmd_xy: r.mmd_xy,
            mmd_xz: r.mmd_xz,
            statistic: r.statistic,
            projected_sd: r.projected_sd,
            p_value: r.p_value,
            alpha: r.alpha,
            decision: r.decision.as_str().to_string(),
            degenerate_variance: r.degenerate_variance,
        }
    }
}

/// The complete output of `relmmd test`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub version: String,
    pub inputs: InputEcho,
    pub result: TestResultDoc,
    pub warnings: Vec<String>,
}

impl ResultDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    /// One CSV header line plus one data row.
    pub fn to_csv(&self) -> String {
        let r = &self.result;
        let mut out = String::new();
        out.push_str(
            "mmd_xy,mmd_xz,statistic,projected_sd,p_value,alpha,decision,\
             degenerate_variance,kernel,bandwidth\n",
        );
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.mmd_xy,
            r.mmd_xz,
            r.statistic,
            r.projected_sd,
            r.p_value,
            r.alpha,
            r.decision,
            r.degenerate_variance,
            self.inputs.kernel,
            self.inputs
                .bandwidth
                .map(|b| b.to_string())
                .unwrap_or_else(|| "none".to_string()),
        );
        out
    }

    pub fn to_text(&self) -> String {
        let r = &self.result;
        let i = &self.inputs;
        let mut out = String::new();
        let _ = writeln!(out, "relative similarity test (relmmd {})", self.version);
        let _ = writeln!(out, "  reference: {} ({} x {})", i.ref_path, i.m, i.dim);
        let _ = writeln!(out, "  candidate y: {} ({} x {})", i.y_path, i.n, i.dim);
        let _ = writeln!(out, "  candidate z: {} ({} x {})", i.z_path, i.r, i.dim);
        match i.bandwidth {
            Some(bw) => {
                let _ = writeln!(out, "  kernel: {} (bandwidth {} [{}])", i.kernel, bw, i.bandwidth_rule);
            }
            None => {
                let _ = writeln!(out, "  kernel: {}", i.kernel);
            }
        }
        let _ = writeln!(out, "  mmd2(x, y) = {}", r.mmd_xy);
        let _ = writeln!(out, "  mmd2(x, z) = {}", r.mmd_xz);
        let _ = writeln!(out, "  statistic = {}  (projected sd {})", r.statistic, r.projected_sd);
        let _ = writeln!(out, "  p-value = {}  (alpha = {})", r.p_value, r.alpha);
        let explain = match r.decision.as_str() {
            "favor-z" => "z is significantly closer to the reference",
            "favor-y" => "y is significantly closer to the reference",
            _ => "no significant difference detected",
        };
        let _ = writeln!(out, "  decision: {} ({explain})", r.decision);
        for w in &self.warnings {
            let _ = writeln!(out, "  warning: {w}");
        }
        out
    }
}

fn gammas_echo(config: &ExperimentConfig) -> String {
    config
        .gammas
        .iter()
        .map(|g| g.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn vec_echo(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// One `#` comment line with the full configuration.
fn config_comment(config: &ExperimentConfig) -> String {
    format!(
        "# config: mu_y={} mu_z={} gammas={} m={} n={} r={} repetitions={} seed={} \
         kernel={} bandwidth={} alpha={}",
        vec_echo(&config.mu_y),
        vec_echo(&config.mu_z),
        gammas_echo(config),
        config.m,
        config.n,
        config.r,
        config.repetitions,
        config.seed,
        config.kernel.family_name(),
        config.kernel.bandwidth_name(),
        config.alpha,
    )
}

const SWEEP_COLUMNS: &str =
    "gamma,mean_p,favor_z_rate,favor_y_rate,inconclusive_rate,mean_statistic,mean_projected_sd";

pub fn sweep_csv(report: &SweepReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# relmmd sweep v{TOOL_VERSION}");
    let _ = writeln!(out, "{}", config_comment(&report.config));
    let _ = writeln!(out, "{SWEEP_COLUMNS}");
    for row in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.gamma,
            row.mean_p,
            row.favor_z_rate,
            row.favor_y_rate,
            row.inconclusive_rate,
            row.mean_statistic,
            row.mean_projected_sd
        );
    }
    out
}

pub fn power_csv(report: &PowerReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# relmmd power v{TOOL_VERSION}");
    let _ = writeln!(out, "{}", config_comment(&report.joint.config));
    let _ = writeln!(
        out,
        "gamma,joint_power,split_power,joint_mean_p,split_mean_p,\
         joint_inconclusive_rate,split_inconclusive_rate"
    );
    for (j, s) in report.joint.rows.iter().zip(report.split.rows.iter()) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            j.gamma,
            j.favor_z_rate,
            s.favor_z_rate,
            j.mean_p,
            s.mean_p,
            j.inconclusive_rate,
            s.inconclusive_rate
        );
    }
    out
}

pub fn calibration_csv(report: &CalibrationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# relmmd calibrate v{TOOL_VERSION}");
    let _ = writeln!(
        out,
        "{} geometry={}",
        config_comment(&report.config),
        report.geometry.name()
    );
    let _ = writeln!(
        out,
        "# summary: ks_distance={} ks_p_value={}",
        report.ks_distance, report.ks_p_value
    );
    for (alpha, rate) in &report.false_positive {
        let _ = writeln!(out, "# false_positive_rate: alpha={alpha} rate={rate}");
    }
    let _ = writeln!(out, "repetition,p_value");
    for (rep, p) in report.p_values.iter().enumerate() {
        let _ = writeln!(out, "{rep},{p}");
    }
    out
}

pub fn isocurve_csv(report: &IsocurveReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# relmmd isocurve v{TOOL_VERSION}");
    let _ = writeln!(out, "{}", config_comment(&report.config));
    let _ = writeln!(
        out,
        "# summary: coverage_2sigma={} mean_mmd_xy={} mean_mmd_xz={}",
        report.coverage_2sigma, report.mean_pair.0, report.mean_pair.1
    );
    if let Some(bw) = report.resolved_bandwidth {
        let _ = writeln!(out, "# bandwidth_resolved={bw}");
    }
    let _ = writeln!(
        out,
        "# analytic_sigma: var_xy={} var_xz={} cov={}",
        report.analytic_sigma[0][0], report.analytic_sigma[1][1], report.analytic_sigma[0][1]
    );
    let _ = writeln!(
        out,
        "# monte_carlo_sigma: var_xy={} var_xz={} cov={}",
        report.mc_sigma[0][0], report.mc_sigma[1][1], report.mc_sigma[0][1]
    );
    let _ = writeln!(
        out,
        "repetition,mmd_xy,mmd_xz,var_xy,var_xz,cov_xyxz,mahalanobis_sq"
    );
    for row in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.repetition,
            row.mmd_xy,
            row.mmd_xz,
            row.var_xy,
            row.var_xz,
            row.cov_xyxz,
            row.mahalanobis_sq
        );
    }
    out
}
