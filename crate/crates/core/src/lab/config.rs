use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::arith::is_prime;
use crate::dist::{JointLawSpec, JointStepLaw};
use crate::error::{Error, Result};
use crate::extreme::DEFAULT_R_MIN;

/// Smallest replica count an experiment accepts.
pub const MIN_REPLICAS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    /// `(S_{⌊ut⌋}(p) - ut E λ_p(ξ))/√t`
    McltS,
    /// `(T_{⌊ut⌋}(p) - ut E λ_p(ξ))/√t`
    McltT,
    /// `(max_{k≤⌊ut⌋} T_k(p) - ut E λ_p(ξ))/√t`
    Main1,
    /// `max_{k≤⌊ut⌋} T_k(p) / a(t)` under regular variation
    Main11,
    /// `(log Π_{⌊ut⌋} - μ ut)/√t`
    LogpiClt,
    /// `(log LCM(Θ_1..Θ_{⌊ut⌋}) - μ ut)/√t`
    Main2,
    /// `log LCM(Θ_1..Θ_{⌊ut⌋}) / a(t)` under regular variation
    Main21,
    /// `log LCM(η_1..η_{⌊ut⌋}) / a(t)`, the `ξ ≡ 1` case
    IidLcmCorollary,
}

impl Theorem {
    pub const ALL: [Theorem; 8] = [
        Theorem::McltS,
        Theorem::McltT,
        Theorem::Main1,
        Theorem::Main11,
        Theorem::LogpiClt,
        Theorem::Main2,
        Theorem::Main21,
        Theorem::IidLcmCorollary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::McltS => "mclt_s",
            Theorem::McltT => "mclt_t",
            Theorem::Main1 => "main1",
            Theorem::Main11 => "main11",
            Theorem::LogpiClt => "logpi_clt",
            Theorem::Main2 => "main2",
            Theorem::Main21 => "main21",
            Theorem::IidLcmCorollary => "iid_lcm_corollary",
        }
    }

    /// Limits under regular variation, normalized by `a(t)`.
    pub fn is_extreme(self) -> bool {
        matches!(self, Theorem::Main11 | Theorem::Main21 | Theorem::IidLcmCorollary)
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Theorem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown theorem `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// KS significance level
    #[serde(default = "default_ks_alpha")]
    pub ks_alpha: f64,
    /// width of moment comparison bands in standard errors
    #[serde(default = "default_sigma_band")]
    pub sigma_band: f64,
}

fn default_ks_alpha() -> f64 {
    0.01
}

fn default_sigma_band() -> f64 {
    4.0
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ks_alpha: default_ks_alpha(),
            sigma_band: default_sigma_band(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleOptions {
    /// cap on the magnitude below which extreme-process atoms are not
    /// simulated; the floor actually used also keeps every oracle coordinate
    /// nonempty at the smallest `u` up to probability 1e-9
    #[serde(default = "default_r_min")]
    pub r_min: f64,
    /// oracle sample size as a multiple of the replica count
    #[serde(default = "default_oracle_factor")]
    pub sample_factor: usize,
    /// upper end of the prime range in series and condition checks
    #[serde(default = "default_prime_limit")]
    pub prime_limit: u64,
    /// truncation tolerance of every series
    #[serde(default = "default_series_tol")]
    pub series_tol: f64,
}

fn default_r_min() -> f64 {
    DEFAULT_R_MIN
}

fn default_oracle_factor() -> usize {
    10
}

fn default_prime_limit() -> u64 {
    100_000
}

fn default_series_tol() -> f64 {
    1e-10
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            r_min: default_r_min(),
            sample_factor: default_oracle_factor(),
            prime_limit: default_prime_limit(),
            series_tol: default_series_tol(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub theorem: Theorem,
    pub law: JointLawSpec,
    /// time scale; the statistic at `u` uses `⌊t u⌋` steps
    pub t: f64,
    pub u_grid: Vec<f64>,
    pub primes: Vec<u64>,
    pub replicas: usize,
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub oracle: OracleOptions,
    /// directory against which relative paths in `law` resolve
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configs serialize")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.replicas < MIN_REPLICAS {
            return bad(format!(
                "replicas = {} is below the minimum {MIN_REPLICAS}",
                self.replicas
            ));
        }
        if !(self.t >= 1.0 && self.t.is_finite()) {
            return bad(format!("t = {} must be a finite number ≥ 1", self.t));
        }
        if self.u_grid.is_empty() {
            return bad("u_grid must be nonempty".into());
        }
        if self.u_grid.iter().any(|&u| !(u > 0.0 && u.is_finite())) {
            return bad("u_grid entries must be positive".into());
        }
        if self.u_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("u_grid must be strictly increasing".into());
        }
        if let Some(&p) = self.primes.iter().find(|&&p| !is_prime(p)) {
            return bad(format!("primes: {p} is not prime"));
        }
        if self.primes.windows(2).any(|w| w[0] >= w[1]) {
            return bad("primes must be strictly increasing".into());
        }
        if !(self.tolerances.ks_alpha > 0.0 && self.tolerances.ks_alpha < 1.0) {
            return bad("tolerances.ks_alpha must lie in (0, 1)".into());
        }
        if !(self.tolerances.sigma_band > 0.0) {
            return bad("tolerances.sigma_band must be positive".into());
        }
        if !(self.oracle.r_min > 0.0) || self.oracle.sample_factor == 0 {
            return bad("oracle.r_min and oracle.sample_factor must be positive".into());
        }
        let steps = self.t * self.u_grid[self.u_grid.len() - 1];
        if steps > 1e12 {
            return bad(format!("t · max(u) = {steps} steps is beyond desk scale"));
        }
        Ok(())
    }

    pub fn build_law(&self) -> Result<JointStepLaw> {
        self.law.build(self.base_dir.as_deref())
    }

    /// `⌊t u⌋`
    pub fn steps_at(&self, u: f64) -> u64 {
        (self.t * u).floor() as u64
    }
}
