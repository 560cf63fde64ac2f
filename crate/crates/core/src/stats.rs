//! Kolmogorov-Smirnov tests and sample summaries.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::kolmogorov_survival;

/// Smallest sample accepted by the KS tests.
pub const KS_MIN_SAMPLE: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

fn sorted(xs: &[f64], min: usize) -> Result<Vec<f64>> {
    if xs.len() < min {
        return Err(Error::SampleTooSmall { len: xs.len(), min });
    }
    if xs.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidConfig("sample contains NaN".into()));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// One-sample test against a continuous CDF; asymptotic p-value.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    let xs = sorted(sample, KS_MIN_SAMPLE)?;
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_survival(n.sqrt() * d),
    })
}

/// Two-sample test. Ties are resolved by evaluating both empirical CDFs at
/// each distinct value, which is the exact supremum for tied data.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    let xa = sorted(a, KS_MIN_SAMPLE)?;
    let xb = sorted(b, KS_MIN_SAMPLE)?;
    let (n, m) = (xa.len(), xb.len());
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < n && j < m {
        let x = xa[i].min(xb[j]);
        while i < n && xa[i] <= x {
            i += 1;
        }
        while j < m && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let n_eff = (n * m) as f64 / (n + m) as f64;
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_survival(n_eff.sqrt() * d),
    })
}

/// Right-continuous empirical CDF of `sorted` at `x`.
pub fn ecdf(sorted: &[f64], x: f64) -> f64 {
    sorted.partition_point(|&v| v <= x) as f64 / sorted.len() as f64
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Linearly interpolated quantile of a sorted sample.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, q)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CovarianceEstimate {
    pub cov: f64,
    /// standard deviation of the centered products over `√n`
    pub std_error: f64,
}

/// Sample covariance with the standard error of the mean of centered
/// products.
pub fn covariance(x: &[f64], y: &[f64]) -> CovarianceEstimate {
    assert_eq!(x.len(), y.len(), "paired samples");
    let (mx, my) = (mean(x), mean(y));
    let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).collect();
    CovarianceEstimate {
        cov: mean(&z),
        std_error: (variance(&z) / z.len() as f64).sqrt(),
    }
}
