//! Two-sample K-S test, moment comparison, log10 delay-spread summaries and
//! empirical CDFs.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("sample set '{0}' is empty")]
    Empty(String),
    #[error("sample set '{label}' contains a non-finite value at index {index}")]
    NonFinite { label: String, index: usize },
    #[error("log10 statistics need at least 2 positive samples, {kept} left after excluding {excluded} non-positive")]
    TooFewPositive { kept: usize, excluded: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    values: Vec<f64>,
    pub label: String,
}

impl SampleSet {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Result<Self, StatsError> {
        let label = label.into();
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite { label, index });
        }
        Ok(SampleSet { values, label })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn require_non_empty(&self) -> Result<(), StatsError> {
        if self.values.is_empty() {
            Err(StatsError::Empty(self.label.clone()))
        } else {
            Ok(())
        }
    }

    fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

impl KsResult {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Survival function of the Kolmogorov distribution,
/// `Q(λ) = 2 Σ_{k≥1} (-1)^{k-1} exp(-2 k² λ²)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    // The alternating series converges poorly for small λ, where Q is 1 to
    // double precision anyway.
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-18 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value at
/// effective size `n_a n_b / (n_a + n_b)`.
pub fn ks_two_sample(a: &SampleSet, b: &SampleSet) -> Result<KsResult, StatsError> {
    a.require_non_empty()?;
    b.require_non_empty()?;
    let xa = a.sorted();
    let xb = b.sorted();
    let (na, nb) = (xa.len(), xb.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let x = xa[i].min(xb[j]);
        while i < na && xa[i] <= x {
            i += 1;
        }
        while j < nb && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na as f64 * nb as f64) / (na + nb) as f64;
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_survival(ne.sqrt() * d),
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Unbiased sample variance; 0 for a single value.
fn variance(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentCheck {
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl MomentCheck {
    fn new(value: f64, reference: f64, rel_tol: f64) -> Self {
        // A zero reference falls back to an absolute tolerance of rel_tol.
        let tolerance = if reference == 0.0 {
            rel_tol
        } else {
            rel_tol * reference.abs()
        };
        MomentCheck {
            value,
            reference,
            tolerance,
            passed: (value - reference).abs() <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentReport {
    pub mean: MomentCheck,
    pub variance: MomentCheck,
}

impl MomentReport {
    pub fn passed(&self) -> bool {
        self.mean.passed && self.variance.passed
    }
}

/// Compares mean and variance of `a` against the reference set `b`.
pub fn moments_compare(a: &SampleSet, b: &SampleSet, rel_tol: f64) -> Result<MomentReport, StatsError> {
    a.require_non_empty()?;
    b.require_non_empty()?;
    Ok(MomentReport {
        mean: MomentCheck::new(mean(&a.values), mean(&b.values), rel_tol),
        variance: MomentCheck::new(variance(&a.values), variance(&b.values), rel_tol),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelaySpreadStats {
    pub mu_log10: f64,
    pub sigma_log10: f64,
    pub n: usize,
    /// Non-positive samples dropped before taking logarithms.
    pub excluded: usize,
}

/// Mean and sample standard deviation of log10 of the positive samples.
pub fn log10_ds_stats(samples_ns: &SampleSet) -> Result<DelaySpreadStats, StatsError> {
    let logs: Vec<f64> = samples_ns
        .values
        .iter()
        .filter(|v| **v > 0.0)
        .map(|v| v.log10())
        .collect();
    let excluded = samples_ns.len() - logs.len();
    if logs.len() < 2 {
        return Err(StatsError::TooFewPositive {
            kept: logs.len(),
            excluded,
        });
    }
    Ok(DelaySpreadStats {
        mu_log10: mean(&logs),
        sigma_log10: variance(&logs).sqrt(),
        n: logs.len(),
        excluded,
    })
}

/// Sorted step points `(x_(i), i / n)`.
pub fn empirical_cdf(samples: &SampleSet) -> Result<Vec<(f64, f64)>, StatsError> {
    samples.require_non_empty()?;
    let n = samples.len() as f64;
    Ok(samples
        .sorted()
        .into_iter()
        .enumerate()
        .map(|(i, x)| (x, (i + 1) as f64 / n))
        .collect())
}

pub fn cdf_csv_string(points: &[(f64, f64)]) -> String {
    let mut out = String::from("value,probability\n");
    for (x, p) in points {
        let _ = writeln!(out, "{x},{p}");
    }
    out
}

pub fn write_cdf_csv(points: &[(f64, f64)], path: impl AsRef<Path>) -> Result<(), StatsError> {
    std::fs::write(path, cdf_csv_string(points))?;
    Ok(())
}
