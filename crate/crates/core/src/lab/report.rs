use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use super::config::{ExperimentConfig, Theorem};
use crate::error::{Error, Result};
use crate::stats::KsResult;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// the hypothesis of the limit theorem is not met; nothing is asserted
    Advisory,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub holds: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginalResult {
    pub statistic: String,
    pub prime: Option<u64>,
    pub u: f64,
    pub steps: u64,
    pub mean: f64,
    pub variance: f64,
    pub target: String,
    /// one-sample test against the analytic target
    pub ks: Option<KsResult>,
    /// two-sample test against simulated oracle draws
    pub ks_oracle: Option<KsResult>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovarianceResult {
    pub statistic: String,
    pub p: u64,
    pub q: u64,
    pub u: f64,
    pub v: f64,
    pub empirical: f64,
    pub predicted: f64,
    pub std_error: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// Empirical and target CDFs on a grid of empirical quantiles.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotRow {
    pub statistic: String,
    pub prime: Option<u64>,
    pub u: f64,
    pub x: f64,
    pub empirical_cdf: f64,
    pub oracle_cdf: f64,
}

/// Per-replica values of one statistic.
#[derive(Clone, Debug, PartialEq)]
pub struct RawSeries {
    pub statistic: String,
    pub prime: Option<u64>,
    pub u: f64,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub theorem: Theorem,
    pub status: Status,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub hypothesis: HypothesisCheck,
    pub ties: String,
    pub notices: Vec<String>,
    pub marginals: Vec<MarginalResult>,
    pub covariances: Vec<CovarianceResult>,
    pub checks: Vec<CheckResult>,
    #[serde(skip)]
    pub plot: Vec<PlotRow>,
    #[serde(skip)]
    pub raw: Vec<RawSeries>,
}

/// Fixed point for moderate magnitudes, scientific otherwise.
fn num(x: f64) -> String {
    if x == 0.0 || (1e-4..1e6).contains(&x.abs()) {
        format!("{x:.5}")
    } else {
        format!("{x:.4e}")
    }
}

impl ExperimentReport {
    /// Every asserted comparison passed.
    pub fn all_passed(&self) -> bool {
        self.marginals.iter().all(|m| m.passed)
            && self.covariances.iter().all(|c| c.passed)
            && self.checks.iter().all(|c| c.passed)
    }

    pub(crate) fn finish(mut self) -> Self {
        self.status = if !self.hypothesis.holds {
            Status::Advisory
        } else if self.all_passed() {
            Status::Pass
        } else {
            Status::Fail
        };
        self
    }

    pub fn marginal(&self, statistic: &str, prime: Option<u64>, u: f64) -> Option<&MarginalResult> {
        self.marginals
            .iter()
            .find(|m| m.statistic == statistic && m.prime == prime && m.u == u)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let status = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Advisory => "ADVISORY (hypothesis unmet, nothing asserted)",
        };
        let _ = writeln!(
            out,
            "experiment {}  seed {}  status {status}",
            self.theorem, self.seed
        );
        let _ = writeln!(out, "hypothesis: {}", self.hypothesis.detail);
        for n in &self.notices {
            let _ = writeln!(out, "notice: {n}");
        }
        if !self.marginals.is_empty() {
            let _ = writeln!(
                out,
                "\n{:<16} {:>6} {:>6} {:>9} {:>11} {:>11} {:>9} {:>9} {:>9}  {:<4} target",
                "statistic", "prime", "u", "steps", "mean", "variance", "ks_D", "ks_p", "oracle_p", "ok"
            );
            for m in &self.marginals {
                let opt = |k: Option<KsResult>, f: fn(&KsResult) -> f64| {
                    k.map_or("-".to_string(), |k| format!("{:.4}", f(&k)))
                };
                let _ = writeln!(
                    out,
                    "{:<16} {:>6} {:>6} {:>9} {:>11} {:>11} {:>9} {:>9} {:>9}  {:<4} {}",
                    m.statistic,
                    m.prime.map_or("-".into(), |p| p.to_string()),
                    m.u,
                    m.steps,
                    num(m.mean),
                    num(m.variance),
                    opt(m.ks, |k| k.statistic),
                    opt(m.ks, |k| k.p_value),
                    opt(m.ks_oracle, |k| k.p_value),
                    if m.passed { "yes" } else { "NO" },
                    m.target
                );
            }
        }
        if !self.covariances.is_empty() {
            let _ = writeln!(
                out,
                "\n{:<16} {:>4} {:>4} {:>6} {:>6} {:>11} {:>11} {:>9}  ok",
                "covariance", "p", "q", "u", "v", "empirical", "predicted", "se"
            );
            for c in &self.covariances {
                let _ = writeln!(
                    out,
                    "{:<16} {:>4} {:>4} {:>6} {:>6} {:>11} {:>11} {:>9}  {}",
                    c.statistic,
                    c.p,
                    c.q,
                    c.u,
                    c.v,
                    num(c.empirical),
                    num(c.predicted),
                    num(c.std_error),
                    if c.passed { "yes" } else { "NO" }
                );
            }
        }
        if !self.checks.is_empty() {
            let _ = writeln!(out);
            for c in &self.checks {
                let _ = writeln!(
                    out,
                    "check {:<48} value {:<12.6e} threshold {:<12.6e} {}",
                    c.name,
                    c.value,
                    c.threshold,
                    if c.passed { "ok" } else { "FAILED" }
                );
            }
        }
        out
    }

    /// Plot data with columns `statistic,prime,u,x,empirical_cdf,oracle_cdf`.
    pub fn write_plot_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["statistic", "prime", "u", "x", "empirical_cdf", "oracle_cdf"])
            .map_err(io)?;
        for r in &self.plot {
            w.write_record([
                r.statistic.clone(),
                r.prime.map_or(String::new(), |p| p.to_string()),
                r.u.to_string(),
                r.x.to_string(),
                r.empirical_cdf.to_string(),
                r.oracle_cdf.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Per-replica statistics with columns `replica,statistic,prime,u,value`.
    pub fn write_raw_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["replica", "statistic", "prime", "u", "value"])
            .map_err(io)?;
        for s in &self.raw {
            for (r, v) in s.values.iter().enumerate() {
                w.write_record([
                    r.to_string(),
                    s.statistic.clone(),
                    s.prime.map_or(String::new(), |p| p.to_string()),
                    s.u.to_string(),
                    v.to_string(),
                ])
                .map_err(io)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}
