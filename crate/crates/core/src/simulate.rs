//! Exact simulation by inverse transformation, and sample-path statistics.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::{DynamicsSpec, LatentState, ModelSpec};

/// Burn-in used for stationary-statistics runs.
pub const DEFAULT_BURN_IN: usize = 1_000;

/// Durations with their arrival times and, optionally, the latent path.
///
/// `latent_path[n]` is the state in force while duration `n` elapses, i.e.
/// the state filtered through the first `n` durations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSeries {
    pub durations: Vec<f64>,
    pub arrival_times: Vec<f64>,
    pub latent_path: Option<Vec<f64>>,
}

impl EventSeries {
    /// Builds arrival times as cumulative sums of `durations`.
    pub fn from_durations(durations: Vec<f64>) -> Result<Self> {
        if let Some((i, &d)) = durations.iter().enumerate().find(|(_, &d)| !(d > 0.0 && d.is_finite())) {
            return Err(Error::domain(format!("duration {i} is not positive: {d}")));
        }
        let mut t = 0.0;
        let arrival_times = durations
            .iter()
            .map(|d| {
                t += d;
                t
            })
            .collect();
        Ok(EventSeries {
            durations,
            arrival_times,
            latent_path: None,
        })
    }

    pub fn len(&self) -> usize {
        self.durations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.durations.is_empty()
    }
}

/// Simulated series plus any warnings raised on the way.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub series: EventSeries,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SimulationOptions {
    /// Start state; the model default when `None`.
    pub initial_state: Option<LatentState>,
    /// Events generated and discarded before recording starts.
    pub burn_in: usize,
}

/// Simulates `count` events from `model`.
pub fn simulate(
    model: &ModelSpec,
    count: usize,
    seed: u64,
    initial_state: Option<LatentState>,
) -> Result<Simulation> {
    simulate_with(
        model,
        count,
        seed,
        SimulationOptions {
            initial_state,
            burn_in: 0,
        },
    )
}

pub fn simulate_with(
    model: &ModelSpec,
    count: usize,
    seed: u64,
    options: SimulationOptions,
) -> Result<Simulation> {
    if count == 0 {
        return Err(Error::domain("simulation count must be at least 1"));
    }
    let dynamics = &model.dynamics;
    let mut x = options
        .initial_state
        .unwrap_or_else(|| model.default_initial_state())
        .value();
    dynamics.check_state(x)?;

    let mut warnings = Vec::new();
    let stability = model.check_stability();
    if !stability.stable {
        warnings.push(format!(
            "parameters violate the stationarity condition (margin {:.4}); the path may explode",
            stability.margin
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clamped = 0usize;
    let mut durations = Vec::with_capacity(count);
    let mut path = Vec::with_capacity(count);
    for i in 0..options.burn_in + count {
        if i >= options.burn_in {
            path.push(x);
        }
        let eps = model.residual.sample(&mut rng);
        let tau = dynamics.phi_inverse(eps, x)?.max(f64::MIN_POSITIVE);
        if dynamics.psi_is_clamped(tau, x) {
            clamped += 1;
        }
        x = dynamics.psi(tau, x);
        if i >= options.burn_in {
            durations.push(tau);
        }
    }
    if clamped > 0 {
        warnings.push(format!("logACI log-state clamped at ±50 on {clamped} update(s)"));
    }
    let mut series = EventSeries::from_durations(durations)?;
    series.latent_path = Some(path);
    Ok(Simulation { series, warnings })
}

/// Biased sample autocorrelation `γ̂(k)/γ̂(0)` for `k = 0..=max_lag`.
pub fn sample_acf(values: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = values.len();
    if max_lag < 1 || n <= max_lag {
        return Err(Error::domain(format!(
            "sample_acf needs 1 <= max_lag < length, got max_lag={max_lag}, length={n}"
        )));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let gamma0 = centered.iter().map(|c| c * c).sum::<f64>();
    if !(gamma0 > 0.0) {
        return Err(Error::Degenerate("sample_acf of a constant sequence".into()));
    }
    Ok((0..=max_lag)
        .map(|k| {
            if k == 0 {
                return 1.0;
            }
            let gk: f64 = centered[k..].iter().zip(&centered).map(|(a, b)| a * b).sum();
            gk / gamma0
        })
        .collect())
}

/// Stationary mean duration `(β − α)/(βμ)` of a stable SE model with
/// unit-mean residuals.
pub fn stationary_mean_tau(dynamics: &DynamicsSpec) -> Result<f64> {
    match *dynamics {
        DynamicsSpec::Se { mu, alpha, beta } => {
            dynamics.validate()?;
            if alpha >= beta {
                return Err(Error::domain(format!(
                    "stationary mean requires alpha < beta, got alpha={alpha}, beta={beta}"
                )));
            }
            Ok((beta - alpha) / (beta * mu))
        }
        _ => Err(Error::domain("stationary_mean_tau is defined for SE dynamics")),
    }
}
