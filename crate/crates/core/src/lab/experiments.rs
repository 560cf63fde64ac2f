//! Analyses of the replica statistics against their limit laws.

use super::config::{ExperimentConfig, Theorem};
use super::engine::{simulate, simulate_oracle, OracleSet, ReplicaSet};
use super::report::{
    CheckResult, CovarianceResult, ExperimentReport, HypothesisCheck, MarginalResult, PlotRow, RawSeries,
    Status,
};
use crate::dist::{
    check_main2_conditions, compute_moments, lambda_covariance, lambda_mean_var, JointStepLaw, StepLaw,
};
use crate::error::{Error, Result};
use crate::extreme::frechet_cdf;
use crate::special::normal_cdf;
use crate::stats::{covariance, ecdf, ks_one_sample, ks_two_sample, mean, quantile, variance, KsResult};
use crate::walk::Snapshot;

/// Sample sizes `n` at which the `𝒫₂(n)` remainder is evaluated.
pub const CONDITION_GRID: [u64; 5] = [100, 1_000, 10_000, 100_000, 1_000_000];

const TIES: &str = "integer-valued statistics get one U(-1/2, 1/2) jitter per replica, prime and u \
before one-sample tests against continuous targets (moments use unjittered values); \
two-sample tests evaluate both empirical CDFs at every distinct value";

/// Regularly varying part of the `η` law: the primes of `𝒫₀` and their
/// common index.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularVariation {
    pub primes: Vec<u64>,
    pub alpha: f64,
}

impl RegularVariation {
    pub fn of(eta: &StepLaw) -> Result<Self> {
        let mut parts = eta.regularly_varying_primes();
        if parts.is_empty() {
            return Err(Error::InvalidConfig(
                "limits under regular variation need an η law with a pareto_exponent component".into(),
            ));
        }
        parts.sort_by_key(|&(p, _)| p);
        if parts.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidConfig(
                "each prime may carry at most one pareto_exponent component".into(),
            ));
        }
        let alpha = parts[0].1;
        if parts.iter().any(|&(_, a)| a != alpha) {
            return Err(Error::InvalidConfig(
                "all pareto_exponent components must share one index alpha".into(),
            ));
        }
        Ok(Self {
            primes: parts.into_iter().map(|(p, _)| p).collect(),
            alpha,
        })
    }

    /// `a(t) = t^{1/α}`
    pub fn scale(&self, t: f64) -> f64 {
        t.powf(1.0 / self.alpha)
    }
}

/// Run `cfg.theorem`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    Ok(run_battery(cfg, &[cfg.theorem])?.remove(0))
}

pub fn run_mclt_s(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_as(cfg, Theorem::McltS)
}

pub fn run_mclt_t(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_as(cfg, Theorem::McltT)
}

pub fn run_main1(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_as(cfg, Theorem::Main1)
}

pub fn run_main11(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_as(cfg, Theorem::Main11)
}

pub fn run_logpi_clt(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_as(cfg, Theorem::LogpiClt)
}

pub fn run_main2(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_as(cfg, Theorem::Main2)
}

pub fn run_main21(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_as(cfg, Theorem::Main21)
}

pub fn run_iid_lcm_corollary(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_as(cfg, Theorem::IidLcmCorollary)
}

fn run_as(cfg: &ExperimentConfig, theorem: Theorem) -> Result<ExperimentReport> {
    Ok(run_battery(cfg, &[theorem])?.remove(0))
}

/// Run several analyses on one shared simulation. Every report equals the
/// one a single-theorem run with the same configuration would produce.
pub fn run_battery(cfg: &ExperimentConfig, theorems: &[Theorem]) -> Result<Vec<ExperimentReport>> {
    cfg.validate()?;
    let law = cfg.build_law()?;
    let xi = law.xi_law();
    let eta = law.eta_law();
    if cfg.steps_at(cfg.u_grid[0]) == 0 {
        return Err(Error::InvalidConfig(format!(
            "t · u = {} is below one step",
            cfg.t * cfg.u_grid[0]
        )));
    }

    let extreme = theorems.iter().any(|t| t.is_extreme());
    let rv = if extreme {
        Some(RegularVariation::of(&eta)?)
    } else {
        None
    };
    for &t in theorems {
        if t == Theorem::IidLcmCorollary && !xi.is_unit() {
            return Err(Error::InvalidConfig(
                "iid_lcm_corollary needs ξ ≡ 1 (coupling xi_degenerate_one)".into(),
            ));
        }
    }

    let mut record_at: Vec<u64> = cfg.u_grid.iter().map(|&u| cfg.steps_at(u)).collect();
    if theorems.contains(&Theorem::Main2) {
        let n = cfg.steps_at(cfg.u_grid[cfg.u_grid.len() - 1]);
        record_at.extend(difference_schedule(n));
    }
    let mut primes = cfg.primes.clone();
    if let Some(rv) = &rv {
        primes.extend(&rv.primes);
    }
    let rs = simulate(&law, cfg.seed, cfg.replicas, &record_at, &primes)?;
    let oracle = match &rv {
        Some(rv) => Some(simulate_oracle(
            rv.alpha,
            rv.primes.len(),
            &cfg.u_grid,
            cfg.replicas * cfg.oracle.sample_factor,
            cfg.seed,
            cfg.oracle.r_min,
        )?),
        None => None,
    };

    theorems
        .iter()
        .map(|&t| {
            let ctx = Ctx {
                cfg,
                theorem: t,
                law: &law,
                xi: &xi,
                eta: &eta,
                rs: &rs,
            };
            match t {
                Theorem::McltS | Theorem::McltT | Theorem::Main1 => prime_clt(&ctx),
                Theorem::LogpiClt | Theorem::Main2 => log_clt(&ctx),
                Theorem::Main11 => main11(&ctx, rv.as_ref().expect("set"), oracle.as_ref().expect("set")),
                Theorem::Main21 | Theorem::IidLcmCorollary => {
                    main21(&ctx, rv.as_ref().expect("set"), oracle.as_ref().expect("set"))
                }
            }
        })
        .collect()
}

/// `⌊n/4⌋, ⌊n/2⌋, n`: the doubling schedule for the perturbation difference.
fn difference_schedule(n: u64) -> [u64; 3] {
    [n / 4, n / 2, n]
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    theorem: Theorem,
    law: &'a JointStepLaw,
    xi: &'a StepLaw,
    eta: &'a StepLaw,
    rs: &'a ReplicaSet,
}

impl Ctx<'_> {
    fn report(&self, hypothesis: HypothesisCheck) -> ExperimentReport {
        let mut config = self.cfg.clone();
        config.theorem = self.theorem;
        ExperimentReport {
            theorem: self.theorem,
            status: Status::Pass,
            seed: self.cfg.seed,
            config,
            hypothesis,
            ties: TIES.to_string(),
            notices: Vec::new(),
            marginals: Vec::new(),
            covariances: Vec::new(),
            checks: Vec::new(),
            plot: Vec::new(),
            raw: Vec::new(),
        }
    }

    fn tol(&self) -> f64 {
        self.cfg.oracle.series_tol
    }

    fn ks_pass(&self, k: &KsResult) -> bool {
        k.p_value >= self.cfg.tolerances.ks_alpha
    }

    fn within_band(&self, empirical: f64, predicted: f64, se: f64) -> bool {
        (empirical - predicted).abs() <= self.cfg.tolerances.sigma_band * se + 1e-12
    }
}

fn plot_rows(
    statistic: &str,
    prime: Option<u64>,
    u: f64,
    sample: &[f64],
    target: impl Fn(f64) -> f64,
) -> Vec<PlotRow> {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut xs: Vec<f64> = (0..=100)
        .map(|i| crate::stats::quantile_sorted(&sorted, i as f64 / 100.0))
        .collect();
    xs.dedup();
    xs.into_iter()
        .map(|x| PlotRow {
            statistic: statistic.to_string(),
            prime,
            u,
            x,
            empirical_cdf: ecdf(&sorted, x),
            oracle_cdf: target(x),
        })
        .collect()
}

fn fmt_normal(var: f64) -> String {
    format!("normal(0, {var:.6})")
}

struct PrimeMoments {
    p: u64,
    mean: f64,
    var: f64,
}

/// Prime-count central limit theorems for `S`, `T` and `max T`.
fn prime_clt(ctx: &Ctx) -> Result<ExperimentReport> {
    let cfg = ctx.cfg;
    let (label, pick): (&str, fn(&Snapshot, usize) -> u64) = match ctx.theorem {
        Theorem::McltS => ("S", |s, i| s.s[i]),
        Theorem::McltT => ("T", |s, i| s.t[i]),
        _ => ("max_T", |s, i| s.t_max[i]),
    };
    let mut holds = true;
    let mut detail = Vec::new();
    let mut notices = Vec::new();
    let mut active = Vec::new();
    for &p in &cfg.primes {
        let (mean, var) = match lambda_mean_var(ctx.xi, p, ctx.tol()) {
            Ok(mv) => mv,
            Err(e) => {
                holds = false;
                detail.push(format!("λ_{p}(ξ): {e}"));
                continue;
            }
        };
        if ctx.theorem != Theorem::McltS {
            if let Err(e) = lambda_mean_var(ctx.eta, p, ctx.tol()) {
                holds = false;
                detail.push(format!(
                    "λ_{p}(η) lacks a finite second moment, so t² P{{λ_{p}(η) ≥ t}} need not vanish: {e}"
                ));
            }
        }
        if ctx.theorem == Theorem::Main1 && ctx.xi.lambda_tail(p, 1)? == 0.0 {
            notices.push(format!(
                "prime {p} skipped: P{{λ_{p}(ξ) > 0}} = 0, so it lies outside the full-support set"
            ));
            continue;
        }
        active.push(PrimeMoments { p, mean, var });
    }
    if holds {
        detail.push(match ctx.theorem {
            Theorem::McltS => "λ_p(ξ) has finite variance for every tested prime".to_string(),
            _ => "λ_p(ξ) and λ_p(η) have finite variance for every tested prime".to_string(),
        });
    }
    let mut report = ctx.report(HypothesisCheck {
        holds,
        detail: detail.join("; "),
    });
    report.notices = notices;

    let rs = ctx.rs;
    let sqrt_t = cfg.t.sqrt();
    // centered values per (active prime, u)
    let mut centered: Vec<Vec<Vec<f64>>> = Vec::with_capacity(active.len());
    for pm in &active {
        let pi = rs.prime_index(pm.p);
        let mut per_u = Vec::with_capacity(cfg.u_grid.len());
        for &u in &cfg.u_grid {
            let steps = cfg.steps_at(u);
            let ut_mean = cfg.t * u * pm.mean;
            let counts = rs.column(steps, |s| pick(s, pi) as f64);
            let x: Vec<f64> = counts.iter().map(|c| (c - ut_mean) / sqrt_t).collect();
            report.raw.push(RawSeries {
                statistic: label.to_string(),
                prime: Some(pm.p),
                u,
                values: x.clone(),
            });
            if pm.var <= 0.0 {
                report.notices.push(format!(
                    "{label} at p = {}, u = {u}: Var λ_{}(ξ) = 0, KS skipped; the statistic must vanish",
                    pm.p, pm.p
                ));
                let abs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
                let q99 = quantile(&abs, 0.99);
                let threshold = cfg.t.powf(-0.25);
                report.checks.push(CheckResult {
                    name: format!("q99 |{label}| at p={}, u={u} below t^(-1/4)", pm.p),
                    value: q99,
                    threshold,
                    passed: q99 <= threshold,
                });
                per_u.push(x);
                continue;
            }
            let jit = rs.jitter_column(steps, pm.p);
            let y: Vec<f64> = counts
                .iter()
                .zip(&jit)
                .map(|(c, j)| (c + j - ut_mean) / sqrt_t)
                .collect();
            let sd = (u * pm.var).sqrt();
            let target = |v: f64| normal_cdf(v / sd);
            let ks = ks_one_sample(&y, target)?;
            report.plot.extend(plot_rows(label, Some(pm.p), u, &y, target));
            report.marginals.push(MarginalResult {
                statistic: label.to_string(),
                prime: Some(pm.p),
                u,
                steps,
                mean: mean(&x),
                variance: variance(&x),
                target: fmt_normal(u * pm.var),
                passed: ctx.ks_pass(&ks),
                ks: Some(ks),
                ks_oracle: None,
            });
            per_u.push(x);
        }
        centered.push(per_u);
    }

    // cross-prime covariance at common u
    for a in 0..active.len() {
        for b in a + 1..active.len() {
            if active[a].var <= 0.0 || active[b].var <= 0.0 {
                continue;
            }
            let c = lambda_covariance(ctx.xi, active[a].p, active[b].p, ctx.tol())?;
            for (ui, &u) in cfg.u_grid.iter().enumerate() {
                let est = covariance(&centered[a][ui], &centered[b][ui]);
                report.covariances.push(CovarianceResult {
                    statistic: label.to_string(),
                    p: active[a].p,
                    q: active[b].p,
                    u,
                    v: u,
                    empirical: est.cov,
                    predicted: u * c,
                    std_error: est.std_error,
                    passed: ctx.within_band(est.cov, u * c, est.std_error),
                });
            }
        }
    }
    // Wiener covariance min(u, v) Var across the grid
    for (a, pm) in active.iter().enumerate() {
        if pm.var <= 0.0 {
            continue;
        }
        for i in 0..cfg.u_grid.len() {
            for j in i + 1..cfg.u_grid.len() {
                let (u, v) = (cfg.u_grid[i], cfg.u_grid[j]);
                let est = covariance(&centered[a][i], &centered[a][j]);
                let predicted = u.min(v) * pm.var;
                report.covariances.push(CovarianceResult {
                    statistic: label.to_string(),
                    p: pm.p,
                    q: pm.p,
                    u,
                    v,
                    empirical: est.cov,
                    predicted,
                    std_error: est.std_error,
                    passed: ctx.within_band(est.cov, predicted, est.std_error),
                });
            }
        }
    }
    Ok(report.finish())
}

/// Central limit theorems for `log Π` and `log LCM(Θ)`.
fn log_clt(ctx: &Ctx) -> Result<ExperimentReport> {
    let cfg = ctx.cfg;
    let moments = compute_moments(ctx.xi, 1, ctx.tol())?;
    if moments.sigma2_xi <= 0.0 {
        return Err(Error::DegenerateVariance(format!(
            "Var log ξ = 0 for the {} law; the normal limit is degenerate",
            ctx.xi.name()
        )));
    }
    let (mu, sigma2) = (moments.mu_xi, moments.sigma2_xi);
    let is_lcm = ctx.theorem == Theorem::Main2;
    let label = if is_lcm { "log_lcm_theta" } else { "log_pi" };
    let pick: fn(&Snapshot) -> f64 = if is_lcm { |s| s.log_lcm_theta } else { |s| s.log_pi };

    let hypothesis = if !is_lcm {
        HypothesisCheck {
            holds: true,
            detail: format!("E log ξ = {mu}, Var log ξ = {sigma2} are finite and positive"),
        }
    } else if matches!(ctx.law, JointStepLaw::Identical(_)) {
        HypothesisCheck {
            holds: true,
            detail: "η = ξ, so LCM(Θ_1..Θ_n) = Π_n and the limit is that of log Π_n".into(),
        }
    } else {
        let c = check_main2_conditions(ctx.law, &CONDITION_GRID, cfg.oracle.prime_limit, ctx.tol())?;
        let ratios: Vec<String> = c.rows.iter().map(|r| format!("{:.5}", r.ratio)).collect();
        HypothesisCheck {
            holds: c.holds,
            detail: format!(
                "Σ E[((λ_p(η) − λ_p(ξ))⁺)²] ln p = {:.6}; 𝒫₂(n) remainder · √n over n = 10^2..10^6: [{}] ({:?})",
                c.second_moment_sum,
                ratios.join(", "),
                c.trend
            ),
        }
    };
    let mut report = ctx.report(hypothesis);
    let rs = ctx.rs;
    let sqrt_t = cfg.t.sqrt();
    let mut per_u = Vec::with_capacity(cfg.u_grid.len());
    for &u in &cfg.u_grid {
        let steps = cfg.steps_at(u);
        let x: Vec<f64> = rs.column(steps, |s| (pick(s) - mu * cfg.t * u) / sqrt_t);
        let sd = (u * sigma2).sqrt();
        let target = |v: f64| normal_cdf(v / sd);
        let ks = ks_one_sample(&x, target)?;
        report.plot.extend(plot_rows(label, None, u, &x, target));
        report.marginals.push(MarginalResult {
            statistic: label.to_string(),
            prime: None,
            u,
            steps,
            mean: mean(&x),
            variance: variance(&x),
            target: fmt_normal(u * sigma2),
            passed: ctx.ks_pass(&ks),
            ks: Some(ks),
            ks_oracle: None,
        });
        report.raw.push(RawSeries {
            statistic: label.to_string(),
            prime: None,
            u,
            values: x.clone(),
        });
        per_u.push(x);
    }
    let k = cfg.u_grid.len();
    for i in 0..k {
        for j in i + 1..k {
            let (u, v) = (cfg.u_grid[i], cfg.u_grid[j]);
            let est = covariance(&per_u[i], &per_u[j]);
            let predicted = u.min(v) * sigma2;
            report.covariances.push(CovarianceResult {
                statistic: label.to_string(),
                p: 0,
                q: 0,
                u,
                v,
                empirical: est.cov,
                predicted,
                std_error: est.std_error,
                passed: ctx.within_band(est.cov, predicted, est.std_error),
            });
        }
    }
    // increments over consecutive grid points are uncorrelated with the past
    for i in 0..k.saturating_sub(1) {
        let inc: Vec<f64> = per_u[i + 1].iter().zip(&per_u[i]).map(|(b, a)| b - a).collect();
        let est = covariance(&per_u[i], &inc);
        report.covariances.push(CovarianceResult {
            statistic: format!("{label}_increment"),
            p: 0,
            q: 0,
            u: cfg.u_grid[i],
            v: cfg.u_grid[i + 1],
            empirical: est.cov,
            predicted: 0.0,
            std_error: est.std_error,
            passed: ctx.within_band(est.cov, 0.0, est.std_error),
        });
    }

    if is_lcm {
        let n = cfg.steps_at(cfg.u_grid[k - 1]);
        let schedule = difference_schedule(n);
        let p95: Vec<f64> = schedule
            .iter()
            .map(|&m| {
                if m == 0 {
                    return f64::INFINITY;
                }
                let d = rs.column(m, |s| (s.log_lcm_theta - s.log_pi).abs() / (m as f64).sqrt());
                quantile(&d, 0.95)
            })
            .collect();
        for w in 0..2 {
            report.checks.push(CheckResult {
                name: format!(
                    "p95 |log LCM(Θ) − log Π|/√n at n={} not above n={}",
                    schedule[w + 1],
                    schedule[w]
                ),
                value: p95[w + 1],
                threshold: p95[w],
                passed: p95[w + 1] <= p95[w],
            });
        }
    }
    Ok(report.finish())
}

fn extreme_hypothesis(ctx: &Ctx, rv: &RegularVariation) -> HypothesisCheck {
    let mut problems = Vec::new();
    if let Err(e) = compute_moments(ctx.xi, 1, ctx.tol()) {
        problems.push(format!("ξ: {e}"));
    }
    for &p in &rv.primes {
        if let Err(e) = lambda_mean_var(ctx.xi, p, ctx.tol()) {
            problems.push(format!("λ_{p}(ξ) is not negligible against a(t): {e}"));
        }
    }
    for c in ctx.eta.light_components() {
        if let Err(e) = compute_moments(c, 1, ctx.tol()) {
            problems.push(format!("η off 𝒫₀: Σ E λ_p(η) ln p diverges: {e}"));
        }
    }
    if problems.is_empty() {
        HypothesisCheck {
            holds: true,
            detail: format!(
                "𝒫₀ = {:?} with index α = {} and tail constant 1; a(t) = t^(1/α); ξ and η off 𝒫₀ have finite log-mean",
                rv.primes, rv.alpha
            ),
        }
    } else {
        HypothesisCheck {
            holds: false,
            detail: problems.join("; "),
        }
    }
}

/// Fréchet limits of `max T_k(p)/a(t)`.
fn main11(ctx: &Ctx, rv: &RegularVariation, oracle: &OracleSet) -> Result<ExperimentReport> {
    let cfg = ctx.cfg;
    let mut report = ctx.report(extreme_hypothesis(ctx, rv));
    let rs = ctx.rs;
    let a = rv.scale(cfg.t);
    let label = "max_T/a(t)";
    for &p in &cfg.primes {
        let pi = rs.prime_index(p);
        let coord = rv.primes.iter().position(|&q| q == p);
        for (ui, &u) in cfg.u_grid.iter().enumerate() {
            let steps = cfg.steps_at(u);
            let x = rs.column(steps, |s| s.t_max[pi] as f64 / a);
            report.raw.push(RawSeries {
                statistic: label.into(),
                prime: Some(p),
                u,
                values: x.clone(),
            });
            match coord {
                Some(ci) => {
                    let target = |v: f64| frechet_cdf(v, u, 1.0, rv.alpha);
                    let ks = ks_one_sample(&x, target)?;
                    let ks_o = ks_two_sample(&x, &oracle.coordinate(ui, ci))?;
                    report.plot.extend(plot_rows(label, Some(p), u, &x, target));
                    report.marginals.push(MarginalResult {
                        statistic: label.into(),
                        prime: Some(p),
                        u,
                        steps,
                        mean: mean(&x),
                        variance: variance(&x),
                        target: format!("frechet(u={u}, c=1, alpha={})", rv.alpha),
                        passed: ctx.ks_pass(&ks) && ctx.ks_pass(&ks_o),
                        ks: Some(ks),
                        ks_oracle: Some(ks_o),
                    });
                }
                None => {
                    let threshold = cfg.t.powf(-0.5);
                    for (name, q) in [("median", 0.5), ("q99", 0.99)] {
                        let value = quantile(&x, q);
                        report.checks.push(CheckResult {
                            name: format!("{name} of {label} at p={p} (outside 𝒫₀), u={u} below t^(-1/2)"),
                            value,
                            threshold,
                            passed: value < threshold,
                        });
                    }
                }
            }
        }
    }
    if rv.primes.len() > 1 {
        // joint law through the coordinatewise maximum over 𝒫₀
        let idx: Vec<usize> = rv.primes.iter().map(|&p| rs.prime_index(p)).collect();
        for (ui, &u) in cfg.u_grid.iter().enumerate() {
            let steps = cfg.steps_at(u);
            let x = rs.column(steps, |s| {
                idx.iter().map(|&i| s.t_max[i]).max().unwrap_or(0) as f64 / a
            });
            let y = oracle.map(ui, |m| m.iter().copied().fold(0.0, f64::max));
            let ks_o = ks_two_sample(&x, &y)?;
            let mut sorted_y = y.clone();
            sorted_y.sort_by(f64::total_cmp);
            report
                .plot
                .extend(plot_rows("max_P0 max_T/a(t)", None, u, &x, |v| {
                    ecdf(&sorted_y, v)
                }));
            report.marginals.push(MarginalResult {
                statistic: "max_P0 max_T/a(t)".into(),
                prime: None,
                u,
                steps,
                mean: mean(&x),
                variance: variance(&x),
                target: format!(
                    "max of {} independent frechet coordinates (oracle)",
                    rv.primes.len()
                ),
                passed: ctx.ks_pass(&ks_o),
                ks: None,
                ks_oracle: Some(ks_o),
            });
        }
    }
    Ok(report.finish())
}

/// Limits of `log LCM(Θ)/a(t)`: `Σ_{p∈𝒫₀} M_p(u) ln p`.
fn main21(ctx: &Ctx, rv: &RegularVariation, oracle: &OracleSet) -> Result<ExperimentReport> {
    let cfg = ctx.cfg;
    let mut report = ctx.report(extreme_hypothesis(ctx, rv));
    let rs = ctx.rs;
    let a = rv.scale(cfg.t);
    let label = "log_lcm_theta/a(t)";
    let ln: Vec<f64> = rv.primes.iter().map(|&p| (p as f64).ln()).collect();
    for (ui, &u) in cfg.u_grid.iter().enumerate() {
        let steps = cfg.steps_at(u);
        let x = rs.column(steps, |s| s.log_lcm_theta / a);
        let y = oracle.map(ui, |m| m.iter().zip(&ln).map(|(v, l)| v * l).sum());
        let ks_o = ks_two_sample(&x, &y)?;
        let ks = if rv.primes.len() == 1 {
            let target = |v: f64| frechet_cdf(v / ln[0], u, 1.0, rv.alpha);
            report.plot.extend(plot_rows(label, None, u, &x, target));
            Some(ks_one_sample(&x, target)?)
        } else {
            let mut sorted_y = y.clone();
            sorted_y.sort_by(f64::total_cmp);
            report
                .plot
                .extend(plot_rows(label, None, u, &x, |v| ecdf(&sorted_y, v)));
            None
        };
        let target = if rv.primes.len() == 1 {
            format!("ln({}) · frechet(u={u}, c=1, alpha={})", rv.primes[0], rv.alpha)
        } else {
            format!("Σ ln p · M_p(u) over 𝒫₀ = {:?} (oracle)", rv.primes)
        };
        report.marginals.push(MarginalResult {
            statistic: label.into(),
            prime: None,
            u,
            steps,
            mean: mean(&x),
            variance: variance(&x),
            target,
            passed: ctx.ks_pass(&ks_o) && ks.as_ref().map_or(true, |k| ctx.ks_pass(k)),
            ks,
            ks_oracle: Some(ks_o),
        });
        report.raw.push(RawSeries {
            statistic: label.into(),
            prime: None,
            u,
            values: x,
        });
    }
    Ok(report.finish())
}
