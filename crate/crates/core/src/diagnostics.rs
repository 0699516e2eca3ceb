//! Goodness-of-fit and forecast-accuracy measures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::ForecastRecord;
use crate::process::ModelSpec;
use crate::simulate::sample_acf;

/// Exponential residuals are capped here, i.e. at `F_ε = 1 − 1e−16`.
pub const RESIDUAL_CAP: f64 = 36.841_361_487_904_734; // −ln(1e−16)

/// Exponential residuals and how many of them hit [`RESIDUAL_CAP`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExpResiduals {
    pub values: Vec<f64>,
    pub clamped: usize,
}

impl ExpResiduals {
    pub fn warning(&self) -> Option<String> {
        (self.clamped > 0).then(|| {
            format!(
                "{} residual(s) clamped at -ln(1e-16): conditional CDF numerically 1",
                self.clamped
            )
        })
    }
}

fn check_durations(durations: &[f64]) -> Result<()> {
    match durations.iter().position(|&t| !(t > 0.0 && t.is_finite())) {
        Some(i) => Err(Error::domain(format!(
            "duration {i} must be positive, got {}",
            durations[i]
        ))),
        None => Ok(()),
    }
}

/// Filters `durations` and returns `Φ(τ_n, X_{n−1})` for each event.
fn compensator_increments(model: &ModelSpec, durations: &[f64], initial_state: f64) -> Result<Vec<f64>> {
    check_durations(durations)?;
    model.dynamics.check_state(initial_state)?;
    let mut x = initial_state;
    Ok(durations
        .iter()
        .map(|&t| {
            let y = model.dynamics.phi(t, x);
            x = model.dynamics.psi(t, x);
            y
        })
        .collect())
}

/// `e_n = −log(1 − F_ε(Φ(τ_n, X_{n−1})))`.
pub fn exp_residuals(model: &ModelSpec, durations: &[f64], initial_state: f64) -> Result<ExpResiduals> {
    let ys = compensator_increments(model, durations, initial_state)?;
    let mut clamped = 0;
    let values = ys
        .iter()
        .map(|&y| {
            let e = model.residual.cum_hazard(y);
            if e >= RESIDUAL_CAP || e.is_nan() {
                clamped += 1;
                RESIDUAL_CAP
            } else {
                e
            }
        })
        .collect();
    Ok(ExpResiduals { values, clamped })
}

/// PIT values `v_n = 1 − e^{−e_n}`.
pub fn pit_values(residuals: &[f64]) -> Vec<f64> {
    residuals.iter().map(|e| -(-e).exp_m1()).collect()
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Kolmogorov–Smirnov distance between the residuals and the unit
/// exponential, evaluated on both sides of every jump.
pub fn ks_statistic(residuals: &[f64]) -> Result<f64> {
    if residuals.is_empty() {
        return Err(Error::domain("ks_statistic needs at least one residual"));
    }
    let n = residuals.len() as f64;
    let u = sorted(&pit_values(residuals));
    Ok(u.iter().enumerate().fold(0.0f64, |d, (i, &f)| {
        let above = (i + 1) as f64 / n - f;
        let below = f - i as f64 / n;
        d.max(above).max(below)
    }))
}

/// Mean squared distance between sorted PIT values and the uniform
/// plotting positions `(i − 0.5)/N`.
pub fn wasserstein_msq(residuals: &[f64]) -> Result<f64> {
    if residuals.is_empty() {
        return Err(Error::domain("wasserstein_msq needs at least one residual"));
    }
    let n = residuals.len() as f64;
    let u = sorted(&pit_values(residuals));
    Ok(u
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let d = v - (i as f64 + 0.5) / n;
            d * d
        })
        .sum::<f64>()
        / n)
}

/// `(v_(i), (i − 0.5)/N)` pairs for a P–P plot.
pub fn pp_points(model: &ModelSpec, durations: &[f64], initial_state: f64) -> Result<Vec<(f64, f64)>> {
    let ys = compensator_increments(model, durations, initial_state)?;
    let v: Vec<f64> = ys.iter().map(|&y| model.residual.cdf(y)).collect();
    Ok(pp_pairs(&v))
}

/// Sorts probabilities and pairs them with the uniform plotting positions.
pub fn pp_pairs(probabilities: &[f64]) -> Vec<(f64, f64)> {
    let n = probabilities.len() as f64;
    sorted(probabilities)
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, (i as f64 + 0.5) / n))
        .collect()
}

/// Relative RMSE and R² of predictions against realized durations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastMetrics {
    pub rrmse: f64,
    pub r_squared: f64,
}

/// `rrmse = RMSE / mean(realized)`, `R² = 1 − SSE/SST`.
pub fn forecast_metrics_from(predicted: &[f64], realized: &[f64]) -> Result<ForecastMetrics> {
    if predicted.len() != realized.len() {
        return Err(Error::domain("predicted and realized lengths differ"));
    }
    if realized.len() < 2 {
        return Err(Error::InsufficientData("forecast metrics need at least 2 records".into()));
    }
    let n = realized.len() as f64;
    let mean = realized.iter().sum::<f64>() / n;
    let sse: f64 = predicted.iter().zip(realized).map(|(p, r)| (r - p) * (r - p)).sum();
    let sst: f64 = realized.iter().map(|r| (r - mean) * (r - mean)).sum();
    if !(sst > 0.0) {
        return Err(Error::Degenerate("realized durations have zero variance".into()));
    }
    Ok(ForecastMetrics {
        rrmse: (sse / n).sqrt() / mean,
        r_squared: 1.0 - sse / sst,
    })
}

pub fn forecast_metrics(records: &[ForecastRecord]) -> Result<ForecastMetrics> {
    let predicted: Vec<f64> = records.iter().map(|r| r.predicted).collect();
    let realized: Vec<f64> = records.iter().map(|r| r.realized).collect();
    forecast_metrics_from(&predicted, &realized)
}

/// The four headline metrics plus the residual ACF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub rrmse: f64,
    pub r_squared: f64,
    pub ks: f64,
    pub wasserstein: f64,
    pub residual_acf: Vec<f64>,
    pub n_forecasts: usize,
}

/// Builds a report from aligned forecast records and residuals.
pub fn diagnostics_report(records: &[ForecastRecord], residuals: &[f64], max_lag: usize) -> Result<DiagnosticsReport> {
    if records.len() != residuals.len() {
        return Err(Error::domain("records and residuals must be aligned"));
    }
    let m = forecast_metrics(records)?;
    let lag = max_lag.min(residuals.len().saturating_sub(1));
    Ok(DiagnosticsReport {
        rrmse: m.rrmse,
        r_squared: m.r_squared,
        ks: ks_statistic(residuals)?,
        wasserstein: wasserstein_msq(residuals)?,
        residual_acf: if lag >= 1 { sample_acf(residuals, lag)? } else { vec![1.0] },
        n_forecasts: records.len(),
    })
}

/// Table-1 style summary of a duration sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub median: f64,
    pub max: f64,
    /// `None` when the sample is constant.
    pub skewness: Option<f64>,
    /// Non-excess; `None` when the sample is constant.
    pub kurtosis: Option<f64>,
    pub overdispersion: f64,
}

impl DescriptiveStats {
    /// Row names and formatted values in table order.
    pub fn rows(&self) -> Vec<(&'static str, String)> {
        let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |v| v.to_string());
        vec![
            ("Number of Observations", self.count.to_string()),
            ("Mean", self.mean.to_string()),
            ("Standard Deviation", self.sd.to_string()),
            ("Minimum", self.min.to_string()),
            ("Median", self.median.to_string()),
            ("Maximum", self.max.to_string()),
            ("Skewness", opt(self.skewness)),
            ("Kurtosis", opt(self.kurtosis)),
            ("Over-dispersion (SD/Mean)", self.overdispersion.to_string()),
        ]
    }
}

/// Two-pass moments; skewness and kurtosis use population central moments.
pub fn descriptive_stats(durations: &[f64]) -> Result<DescriptiveStats> {
    let n = durations.len();
    if n < 2 {
        return Err(Error::InsufficientData("descriptive statistics need at least 2 values".into()));
    }
    if let Some(i) = durations.iter().position(|v| !v.is_finite()) {
        return Err(Error::domain(format!("value {i} is not finite")));
    }
    let nf = n as f64;
    let mean = durations.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in durations {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let sd = (m2 / (nf - 1.0)).sqrt();
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    let (skewness, kurtosis) = if m2 > 0.0 {
        (Some(m3 / m2.powf(1.5)), Some(m4 / (m2 * m2)))
    } else {
        (None, None)
    };
    let s = sorted(durations);
    let median = if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    };
    Ok(DescriptiveStats {
        count: n,
        mean,
        sd,
        min: s[0],
        median,
        max: s[n - 1],
        skewness,
        kurtosis,
        overdispersion: sd / mean,
    })
}
