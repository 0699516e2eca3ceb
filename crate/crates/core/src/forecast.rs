//! One-step conditional expected durations and the rolling-window backtest.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{fit_model, FitConfig, FittedModel, ModelChoice};
use crate::fi_logacd::FiFilter;
use crate::process::{DynamicsSpec, LatentState, ModelSpec};
use crate::quadrature::integrate_survival;
use crate::special::normal_sf;

/// Survival level below which the integrand is truncated.
pub const SURVIVAL_CUTOFF: f64 = 1e-10;
/// Absolute tolerance of the survival integral.
pub const QUADRATURE_TOLERANCE: f64 = 1e-8;

/// `E[τ | state]`: closed form for ACD and LogACD, survival quadrature
/// otherwise.
pub fn expected_duration(model: &ModelSpec, state: LatentState) -> Result<f64> {
    match model.dynamics {
        DynamicsSpec::Acd { .. } | DynamicsSpec::LogAcd { .. } => Ok(state.value() * model.residual.mean()),
        _ => expected_duration_quadrature(model, state),
    }
}

/// `∫_0^∞ [1 − F_ε(Φ(s, x))] ds` by adaptive quadrature, for any dynamics.
pub fn expected_duration_quadrature(model: &ModelSpec, state: LatentState) -> Result<f64> {
    let x = state.value();
    model.dynamics.check_state(x)?;
    let scale = model.dynamics.phi_inverse(1.0, x)?;
    let survival = |s: f64| model.residual.sf(model.dynamics.phi(s, x));
    let q = integrate_survival(survival, scale, SURVIVAL_CUTOFF, QUADRATURE_TOLERANCE)?;
    if !(q.value > 0.0 && q.value.is_finite()) {
        return Err(Error::numerical(format!(
            "expected duration is not positive: {} (error bound {:.3e})",
            q.value, q.error
        )));
    }
    Ok(q.value)
}

/// States `X_0, …, X_N` obtained by filtering `durations` from `initial_state`.
pub fn filter_states(model: &ModelSpec, durations: &[f64], initial_state: LatentState) -> Result<Vec<LatentState>> {
    if let Some(i) = durations.iter().position(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::domain(format!("duration {i} must be positive, got {}", durations[i])));
    }
    let mut out = Vec::with_capacity(durations.len() + 1);
    let mut x = initial_state;
    out.push(x);
    for &t in durations {
        x = model.psi_update(t, x);
        out.push(x);
    }
    Ok(out)
}

/// Window layout of the rolling protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RollingConfig {
    pub window: usize,
    pub horizon: usize,
    pub step: usize,
}

impl Default for RollingConfig {
    fn default() -> Self {
        RollingConfig {
            window: 5_000,
            horizon: 100,
            step: 100,
        }
    }
}

impl RollingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 200 {
            return Err(Error::domain(format!("window must be at least 200, got {}", self.window)));
        }
        if self.horizon == 0 || self.step == 0 {
            return Err(Error::domain("horizon and step must be at least 1"));
        }
        Ok(())
    }

    /// Start offsets of every window that has a full horizon after it.
    pub fn window_starts(&self, len: usize) -> Vec<usize> {
        let span = self.window + self.horizon;
        if len < span {
            return vec![];
        }
        (0..=len - span).step_by(self.step).collect()
    }
}

/// One out-of-sample prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastRecord {
    pub event_index: usize,
    pub window_id: usize,
    pub predicted: f64,
    pub realized: f64,
    pub latent_state: f64,
}

/// Fit summary for one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSummary {
    pub window_id: usize,
    pub start: usize,
    pub converged: bool,
    pub loglik: f64,
    pub params: Vec<f64>,
}

/// Output of [`rolling_backtest`]; the per-record vectors are aligned with
/// `records`.
#[derive(Debug, Clone, PartialEq)]
pub struct Backtest {
    pub model: ModelChoice,
    pub records: Vec<ForecastRecord>,
    /// Out-of-sample exponential residuals under each window's fit.
    pub residuals: Vec<f64>,
    /// Training-window mean duration, the constant-mean benchmark.
    pub baseline: Vec<f64>,
    pub windows: Vec<WindowSummary>,
}

impl Backtest {
    pub fn converged_windows(&self) -> usize {
        self.windows.iter().filter(|w| w.converged).count()
    }
}

struct WindowOutput {
    summary: WindowSummary,
    records: Vec<ForecastRecord>,
    residuals: Vec<f64>,
    baseline: f64,
}

fn run_window(
    durations: &[f64],
    window_id: usize,
    start: usize,
    choice: ModelChoice,
    rolling: &RollingConfig,
    fit_config: &FitConfig,
) -> Result<WindowOutput> {
    let train = &durations[start..start + rolling.window];
    let fitted = fit_model(choice, train, fit_config)?;
    let baseline = train.iter().sum::<f64>() / train.len() as f64;
    let first = start + rolling.window;
    let mut records = Vec::with_capacity(rolling.horizon);
    let mut residuals = Vec::with_capacity(rolling.horizon);
    match &fitted.model {
        FittedModel::Process(model) => {
            let mut x = model.default_initial_state();
            for &t in train {
                x = model.psi_update(t, x);
            }
            for (k, &realized) in durations[first..first + rolling.horizon].iter().enumerate() {
                let predicted = expected_duration(model, x)?;
                records.push(ForecastRecord {
                    event_index: first + k,
                    window_id,
                    predicted,
                    realized,
                    latent_state: x.value(),
                });
                residuals.push(model.residual.cum_hazard(model.phi(realized, x)));
                x = model.psi_update(realized, x);
            }
        }
        FittedModel::FiLogAcd(spec) => {
            let mut filter = FiFilter::new(*spec);
            for &t in train {
                filter.push(t.ln());
            }
            for (k, &realized) in durations[first..first + rolling.horizon].iter().enumerate() {
                let z_hat = filter.forecast_z();
                records.push(ForecastRecord {
                    event_index: first + k,
                    window_id,
                    predicted: filter.forecast(),
                    realized,
                    latent_state: z_hat.exp(),
                });
                let eps = filter.push(realized.ln());
                // Gaussian innovation mapped to the unit-exponential scale
                let tail = if spec.sigma > 0.0 { normal_sf(eps / spec.sigma) } else { 0.5 };
                residuals.push(-tail.ln());
            }
        }
    }
    Ok(WindowOutput {
        summary: WindowSummary {
            window_id,
            start,
            converged: fitted.converged,
            loglik: fitted.loglik,
            params: fitted.params,
        },
        records,
        residuals,
        baseline,
    })
}

/// Rolling estimation and one-step prediction.
///
/// Each window is fitted on its `window` durations, the state is filtered
/// through the window from the default initial state, and the next `horizon`
/// events are predicted one at a time, updating the state with each realized
/// duration. Windows advance by `step` and run in parallel; records come back
/// ordered by event index.
pub fn rolling_backtest(
    durations: &[f64],
    choice: ModelChoice,
    rolling: &RollingConfig,
    fit_config: &FitConfig,
) -> Result<Backtest> {
    rolling.validate()?;
    fit_config.validate()?;
    if durations.len() <= rolling.window + rolling.horizon {
        return Err(Error::InsufficientData(format!(
            "backtest needs more than window + horizon = {} durations, got {}",
            rolling.window + rolling.horizon,
            durations.len()
        )));
    }
    let starts = rolling.window_starts(durations.len());
    let outputs: Vec<WindowOutput> = starts
        .par_iter()
        .enumerate()
        .map(|(id, &start)| run_window(durations, id, start, choice, rolling, fit_config))
        .collect::<Result<_>>()?;

    let mut rows: Vec<(ForecastRecord, f64, f64)> = Vec::new();
    let mut windows = Vec::with_capacity(outputs.len());
    for out in outputs {
        for (r, e) in out.records.into_iter().zip(out.residuals) {
            rows.push((r, e, out.baseline));
        }
        windows.push(out.summary);
    }
    // overlapping windows (step < horizon) predict the same event more than
    // once; order by event, then window
    rows.sort_by_key(|(r, _, _)| (r.event_index, r.window_id));
    Ok(Backtest {
        model: choice,
        records: rows.iter().map(|r| r.0).collect(),
        residuals: rows.iter().map(|r| r.1).collect(),
        baseline: rows.iter().map(|r| r.2).collect(),
        windows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::residual::ResidualSpec;

    fn st(v: f64) -> LatentState {
        LatentState::new(v).unwrap()
    }

    #[test]
    fn acd_closed_form() {
        let m = ModelSpec::new(
            DynamicsSpec::Acd { b0: 0.1, a: 0.2, b1: 0.5 },
            ResidualSpec::burr(4.0, 0.7).unwrap(),
        )
        .unwrap();
        assert_eq!(expected_duration(&m, st(0.5)).unwrap(), 0.5);
        let q = expected_duration_quadrature(&m, st(0.5)).unwrap();
        assert!((q - 0.5).abs() < 1e-6, "{q}");
    }

    #[test]
    fn renewal_exp_mean_is_one() {
        let m = ModelSpec::new(DynamicsSpec::Renewal, ResidualSpec::exponential()).unwrap();
        let e = expected_duration(&m, st(1.0)).unwrap();
        assert!((e - 1.0).abs() < 1e-8);
    }

    #[test]
    fn logaci_exp_is_reciprocal_state() {
        let m = ModelSpec::new(
            DynamicsSpec::LogAci { b0: 0.0, a: 0.1, b1: 0.5 },
            ResidualSpec::exponential(),
        )
        .unwrap();
        let e = expected_duration(&m, st(4.0)).unwrap();
        assert!((e - 0.25).abs() < 1e-8);
    }

    #[test]
    fn filter_examples() {
        let m = ModelSpec::new(
            DynamicsSpec::Se { mu: 1.0, alpha: 0.5, beta: 2.0 },
            ResidualSpec::exponential(),
        )
        .unwrap();
        let path = filter_states(&m, &[0.3], st(1.0)).unwrap();
        assert!((path[1].value() - (1.0 + 0.5 * (-0.6f64).exp())).abs() < 1e-15);
        assert_eq!(filter_states(&m, &[], st(1.2)).unwrap(), vec![st(1.2)]);
    }

    #[test]
    fn window_arithmetic() {
        let r = RollingConfig::default();
        assert_eq!(r.window_starts(30_000).len() * r.horizon, 25_000);
        let one = RollingConfig { window: 200, horizon: 1, step: 1 };
        assert_eq!(one.window_starts(1000).len(), 800);
        assert!(RollingConfig { window: 199, horizon: 1, step: 1 }.validate().is_err());
    }
}
