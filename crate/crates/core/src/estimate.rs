//! Likelihood evaluation and maximum-likelihood fitting.
//!
//! Every constraint is removed by a smooth bijection so the optimizer runs on
//! an unconstrained vector `θ`:
//!
//! * positives go through `exp`;
//! * SE uses `α = β·σ(η)`, which keeps `α < β`;
//! * ACD and LogACD map `(a, b1)` through a two-simplex logistic so that
//!   `a, b1 > 0` and `a + b1 < 1`;
//! * LogACI uses `b1 = tanh(·)`;
//! * Burr uses `s2 = exp(·)` and `s1·s2 = 1 + exp(·)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fi_logacd::FiLogAcdSpec;
use crate::optim::{minimize, numerical_hessian, OptimOptions, OptimOutcome};
use crate::process::{model_label, DynamicsFamily, DynamicsSpec, ModelSpec};
use crate::residual::{ResidualFamily, ResidualSpec};

/// Smallest sample accepted by [`fit`].
pub const MIN_FIT_OBSERVATIONS: usize = 200;

const HESSIAN_STEP: f64 = 1e-4;
const RESTART_SCATTER: f64 = 0.5;

/// Fitting controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    /// Gradient-norm tolerance on the per-observation log-likelihood.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub restarts: usize,
    /// Lag at which FI-logACD fractional weights are cut.
    pub truncation_lag: usize,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            tolerance: 1e-6,
            max_iterations: 500,
            restarts: 5,
            truncation_lag: 100,
            seed: 0,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::domain(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.max_iterations == 0 {
            return Err(Error::domain("max_iterations must be at least 1"));
        }
        if self.restarts == 0 {
            return Err(Error::domain("restarts must be at least 1"));
        }
        Ok(())
    }

    fn optim_options(&self, dim: usize) -> OptimOptions {
        OptimOptions {
            gradient_tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            simplex_max_evaluations: 150 * (dim + 1),
            simplex_step: 0.3,
        }
    }
}

/// A fitted model of either kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FittedModel {
    Process(ModelSpec),
    FiLogAcd(FiLogAcdSpec),
}

impl FittedModel {
    pub fn label(&self) -> String {
        match self {
            FittedModel::Process(m) => m.label(),
            FittedModel::FiLogAcd(_) => "FI-logACD".to_string(),
        }
    }
}

/// Summary of one optimizer start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartOutcome {
    pub loglik: f64,
    pub converged: bool,
    pub gradient_norm: f64,
    pub params: Vec<f64>,
}

/// Result of a maximum-likelihood fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub label: String,
    pub model: FittedModel,
    pub param_names: Vec<String>,
    pub params: Vec<f64>,
    /// Aligned with `params`; `None` when the observed information is not
    /// positive definite.
    pub std_errors: Option<Vec<f64>>,
    pub loglik: f64,
    pub n_obs: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Infinity norm of the gradient of the per-observation log-likelihood
    /// in the unconstrained parameterization.
    pub final_gradient_norm: f64,
    pub restarts: Vec<RestartOutcome>,
}

impl FitResult {
    pub fn process_model(&self) -> Option<&ModelSpec> {
        match &self.model {
            FittedModel::Process(m) => Some(m),
            FittedModel::FiLogAcd(_) => None,
        }
    }
}

fn check_durations(durations: &[f64]) -> Result<()> {
    match durations.iter().position(|&t| !(t > 0.0 && t.is_finite())) {
        Some(i) => Err(Error::domain(format!(
            "duration {i} must be positive and finite, got {}",
            durations[i]
        ))),
        None => Ok(()),
    }
}

/// Log-likelihood of `durations` under `model`, filtering from `initial_state`.
///
/// The first observation is included.
pub fn loglik(model: &ModelSpec, durations: &[f64], initial_state: f64) -> Result<f64> {
    check_durations(durations)?;
    model.dynamics.check_state(initial_state)?;
    let ln_t: Vec<f64> = durations.iter().map(|t| t.ln()).collect();
    loglik_raw(model, durations, &ln_t, initial_state)
        .map_err(|(index, value)| Error::NonFiniteTerm { index, value })
}

/// Per-observation terms `ℓ_n`.
pub fn loglik_terms(model: &ModelSpec, durations: &[f64], initial_state: f64) -> Result<Vec<f64>> {
    check_durations(durations)?;
    model.dynamics.check_state(initial_state)?;
    let mut x = initial_state;
    let mut out = Vec::with_capacity(durations.len());
    for (index, &t) in durations.iter().enumerate() {
        let value = model.residual.ln_pdf(model.dynamics.phi(t, x)) + model.dynamics.phi_dt(t, x).ln();
        if !value.is_finite() {
            return Err(Error::NonFiniteTerm { index, value });
        }
        out.push(value);
        x = model.dynamics.psi(t, x);
    }
    Ok(out)
}

/// Specialized filter loops; the error carries the offending index and term.
fn loglik_raw(
    model: &ModelSpec,
    tau: &[f64],
    ln_tau: &[f64],
    x0: f64,
) -> std::result::Result<f64, (usize, f64)> {
    let res = &model.residual;
    let mut sum = 0.0;
    macro_rules! add {
        ($i:expr, $term:expr) => {{
            let term = $term;
            if !term.is_finite() {
                return Err(($i, term));
            }
            sum += term;
        }};
    }
    match model.dynamics {
        DynamicsSpec::Se { mu, alpha, beta } => {
            let mut x = x0;
            for (i, &t) in tau.iter().enumerate() {
                let em1 = (-beta * t).exp_m1();
                let a = x - mu + alpha;
                let y = mu * t - a * em1 / beta;
                let next = mu + a * (1.0 + em1);
                add!(i, res.ln_pdf_ln(y, y.ln()) + next.ln());
                x = next;
            }
        }
        DynamicsSpec::Acd { b0, a, b1 } => {
            let mut x = x0;
            for (i, (&t, &lt)) in tau.iter().zip(ln_tau).enumerate() {
                let lx = x.ln();
                add!(i, res.ln_pdf_ln(t / x, lt - lx) - lx);
                x = b0 + a * t + b1 * x;
            }
        }
        DynamicsSpec::LogAcd { b0, a, b1 } => {
            let mut lx = x0.ln();
            for (i, (&t, &lt)) in tau.iter().zip(ln_tau).enumerate() {
                add!(i, res.ln_pdf_ln(t * (-lx).exp(), lt - lx) - lx);
                lx = b0 + a * lt + b1 * lx;
            }
        }
        DynamicsSpec::LogAci { b0, a, b1 } => {
            let clamp = crate::process::LOGACI_LOG_STATE_CLAMP;
            let mut lx = x0.ln();
            for (i, (&t, &lt)) in tau.iter().zip(ln_tau).enumerate() {
                let y = lx.exp() * t;
                add!(i, res.ln_pdf_ln(y, lx + lt) + lx);
                lx = (b0 + a * (y - 1.0) + b1 * lx).clamp(-clamp, clamp);
            }
        }
        DynamicsSpec::Renewal => {
            for (i, (&t, &lt)) in tau.iter().zip(ln_tau).enumerate() {
                add!(i, res.ln_pdf_ln(t, lt));
            }
        }
    }
    Ok(sum)
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// `(a, b1)` from two free coordinates; the slack `1 − a − b1` is the third
/// simplex weight.
fn simplex2(u: f64, v: f64) -> (f64, f64) {
    let m = u.max(v).max(0.0);
    let (eu, ev, e0) = ((u - m).exp(), (v - m).exp(), (-m).exp());
    let total = eu + ev + e0;
    (eu / total, ev / total)
}

fn simplex2_inverse(a: f64, b1: f64) -> (f64, f64) {
    let slack = 1.0 - a - b1;
    ((a / slack).ln(), (b1 / slack).ln())
}

/// Bijection between unconstrained `θ` and a (dynamics, residual) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Parameterization {
    pub dynamics: DynamicsFamily,
    pub residual: ResidualFamily,
}

impl Parameterization {
    pub fn new(dynamics: DynamicsFamily, residual: ResidualFamily) -> Result<Self> {
        if dynamics == DynamicsFamily::LogAci && residual != ResidualFamily::Exponential {
            return Err(Error::domain("logACI is defined with exponential residuals only"));
        }
        Ok(Parameterization { dynamics, residual })
    }

    fn dynamics_dim(&self) -> usize {
        self.dynamics.param_names().len()
    }

    pub fn dim(&self) -> usize {
        self.dynamics_dim() + self.residual.arity()
    }

    pub fn param_names(&self) -> Vec<String> {
        self.dynamics
            .param_names()
            .iter()
            .chain(self.residual.param_names())
            .map(|s| s.to_string())
            .collect()
    }

    /// Natural parameters for `θ`, without validation.
    pub fn natural(&self, theta: &[f64]) -> Vec<f64> {
        let k = self.dynamics_dim();
        let (dt, rt) = theta.split_at(k);
        let mut out = match self.dynamics {
            DynamicsFamily::Se => {
                let beta = dt[1].exp();
                vec![dt[0].exp(), beta * logistic(dt[2]), beta]
            }
            DynamicsFamily::Acd => {
                let (a, b1) = simplex2(dt[1], dt[2]);
                vec![dt[0].exp(), a, b1]
            }
            DynamicsFamily::LogAcd => {
                let (a, b1) = simplex2(dt[1], dt[2]);
                vec![dt[0], a, b1]
            }
            DynamicsFamily::LogAci => vec![dt[0], dt[1], dt[2].tanh()],
            DynamicsFamily::Renewal => vec![],
        };
        match self.residual {
            ResidualFamily::Exponential => {}
            ResidualFamily::Gamma => out.push(rt[0].exp()),
            ResidualFamily::GenGamma => out.extend([rt[0].exp(), rt[1].exp()]),
            ResidualFamily::Burr => {
                let s2 = rt[0].exp();
                out.extend([(1.0 + rt[1].exp()) / s2, s2]);
            }
        }
        out
    }

    pub fn model(&self, theta: &[f64]) -> Result<ModelSpec> {
        if theta.len() != self.dim() {
            return Err(Error::domain(format!(
                "expected {} free parameters, got {}",
                self.dim(),
                theta.len()
            )));
        }
        let p = self.natural(theta);
        let k = self.dynamics_dim();
        let dynamics = DynamicsSpec::from_params(self.dynamics, &p[..k])?;
        let residual = ResidualSpec::from_params(self.residual, &p[k..])?;
        ModelSpec::new(dynamics, residual)
    }

    /// Inverse map from natural parameters.
    pub fn theta(&self, params: &[f64]) -> Vec<f64> {
        let k = self.dynamics_dim();
        let (dp, rp) = params.split_at(k);
        let mut out = match self.dynamics {
            DynamicsFamily::Se => vec![dp[0].ln(), dp[2].ln(), logit(dp[1] / dp[2])],
            DynamicsFamily::Acd => {
                let (u, v) = simplex2_inverse(dp[1], dp[2]);
                vec![dp[0].ln(), u, v]
            }
            DynamicsFamily::LogAcd => {
                let (u, v) = simplex2_inverse(dp[1], dp[2]);
                vec![dp[0], u, v]
            }
            DynamicsFamily::LogAci => vec![dp[0], dp[1], dp[2].atanh()],
            DynamicsFamily::Renewal => vec![],
        };
        match self.residual {
            ResidualFamily::Exponential => {}
            ResidualFamily::Gamma => out.push(rp[0].ln()),
            ResidualFamily::GenGamma => out.extend([rp[0].ln(), rp[1].ln()]),
            ResidualFamily::Burr => out.extend([rp[1].ln(), (rp[0] * rp[1] - 1.0).ln()]),
        }
        out
    }

    /// Data-driven starting point in natural parameters.
    fn start(&self, durations: &[f64]) -> Vec<f64> {
        let n = durations.len() as f64;
        let mean = durations.iter().sum::<f64>() / n;
        let mean_ln = durations.iter().map(|t| t.ln()).sum::<f64>() / n;
        let euler = 0.577_215_664_901_532_9;
        let mut out = match self.dynamics {
            // stationary mean (β − α)/(βμ) matches the sample mean with α = β/2
            DynamicsFamily::Se => vec![0.5 / mean, 0.5 / mean, 1.0 / mean],
            DynamicsFamily::Acd => vec![0.1 * mean, 0.1, 0.8],
            DynamicsFamily::LogAcd => vec![0.1 * (mean_ln + euler) + 0.1 * euler, 0.1, 0.8],
            DynamicsFamily::LogAci => vec![-0.5 * mean.ln(), 0.0, 0.5],
            DynamicsFamily::Renewal => vec![],
        };
        match self.residual {
            ResidualFamily::Exponential => {}
            ResidualFamily::Gamma => out.push(1.0),
            ResidualFamily::GenGamma => out.extend([1.0, 1.0]),
            ResidualFamily::Burr => out.extend([2.0, 1.0]),
        }
        out
    }
}

/// Cached inputs for repeated likelihood evaluation.
struct Objective<'a> {
    param: Parameterization,
    tau: &'a [f64],
    ln_tau: Vec<f64>,
}

impl Objective<'_> {
    /// Negative mean log-likelihood; `+∞` where undefined.
    fn value(&self, theta: &[f64]) -> f64 {
        let Ok(model) = self.param.model(theta) else {
            return f64::INFINITY;
        };
        let x0 = model.default_initial_state().value();
        match loglik_raw(&model, self.tau, &self.ln_tau, x0) {
            Ok(ll) => -ll / self.tau.len() as f64,
            Err(_) => f64::INFINITY,
        }
    }
}

/// Starting points: the data-driven guess, then scattered perturbations.
pub(crate) fn restart_points(theta0: &[f64], restarts: usize, seed: u64) -> Vec<Vec<f64>> {
    let normal = Normal::new(0.0, RESTART_SCATTER).expect("valid normal");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..restarts)
        .map(|k| {
            if k == 0 {
                theta0.to_vec()
            } else {
                theta0.iter().map(|v| v + normal.sample(&mut rng)).collect()
            }
        })
        .collect()
}

/// Runs all restarts in parallel and returns them in start order.
pub(crate) fn run_restarts<F>(f: &F, starts: &[Vec<f64>], opts: &OptimOptions) -> Vec<OptimOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    starts.par_iter().map(|s| minimize(f, s, opts)).collect()
}

/// Picks the best restart; ties resolve to the earliest start.
pub(crate) fn best_outcome(outcomes: &[OptimOutcome]) -> &OptimOutcome {
    outcomes
        .iter()
        .reduce(|best, o| if o.value < best.value { o } else { best })
        .expect("at least one restart")
}

/// Standard errors of `natural(θ)` from the observed information of the
/// total log-likelihood `−n·f(θ)`.
pub(crate) fn delta_method_std_errors<F, N>(f: &F, theta: &[f64], n: usize, natural: N) -> Option<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
    N: Fn(&[f64]) -> Vec<f64>,
{
    let dim = theta.len();
    if dim == 0 {
        return Some(vec![]);
    }
    let info = numerical_hessian(f, theta, HESSIAN_STEP) * n as f64;
    if info.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let cov = info.cholesky()?.inverse();
    // Jacobian of the natural parameters with respect to θ
    let p0 = natural(theta);
    let mut jac = nalgebra::DMatrix::zeros(p0.len(), dim);
    let mut probe = theta.to_vec();
    for j in 0..dim {
        let h = 1e-6 * (1.0 + theta[j].abs());
        probe[j] = theta[j] + h;
        let up = natural(&probe);
        probe[j] = theta[j] - h;
        let down = natural(&probe);
        probe[j] = theta[j];
        for i in 0..p0.len() {
            jac[(i, j)] = (up[i] - down[i]) / (2.0 * h);
        }
    }
    let cov_p = &jac * cov * jac.transpose();
    let se: Vec<f64> = (0..p0.len()).map(|i| cov_p[(i, i)].sqrt()).collect();
    se.iter().all(|s| s.is_finite() && *s > 0.0).then_some(se)
}

/// Maximum-likelihood fit of a (dynamics, residual) pair.
pub fn fit(
    dynamics: DynamicsFamily,
    residual: ResidualFamily,
    durations: &[f64],
    config: &FitConfig,
) -> Result<FitResult> {
    config.validate()?;
    check_durations(durations)?;
    if durations.len() < MIN_FIT_OBSERVATIONS {
        return Err(Error::InsufficientData(format!(
            "fit needs at least {MIN_FIT_OBSERVATIONS} durations, got {}",
            durations.len()
        )));
    }
    let param = Parameterization::new(dynamics, residual)?;
    let objective = Objective {
        param,
        tau: durations,
        ln_tau: durations.iter().map(|t| t.ln()).collect(),
    };
    let f = |theta: &[f64]| objective.value(theta);
    let theta0 = param.theta(&param.start(durations));
    let starts = restart_points(&theta0, config.restarts, config.seed);
    let outcomes = run_restarts(&f, &starts, &config.optim_options(param.dim()));
    let n = durations.len();
    let restarts = outcomes
        .iter()
        .map(|o| RestartOutcome {
            loglik: -o.value * n as f64,
            converged: o.converged,
            gradient_norm: o.gradient_norm,
            params: param.natural(&o.x),
        })
        .collect();
    let best = best_outcome(&outcomes);
    let model = param.model(&best.x).map_err(|_| {
        Error::numerical(format!(
            "no restart of the {} fit reached a feasible point",
            model_label(dynamics, residual)
        ))
    })?;
    let loglik = -best.value * n as f64;
    if !loglik.is_finite() {
        return Err(Error::numerical(format!(
            "log-likelihood is not finite at every start of the {} fit",
            model.label()
        )));
    }
    let std_errors = delta_method_std_errors(&f, &best.x, n, |t| param.natural(t));
    Ok(FitResult {
        label: model.label(),
        param_names: param.param_names(),
        params: param.natural(&best.x),
        model: FittedModel::Process(model),
        std_errors,
        loglik,
        n_obs: n,
        converged: best.converged,
        iterations: best.iterations,
        final_gradient_norm: best.gradient_norm,
        restarts,
    })
}

/// A fittable model: a (dynamics, residual) pair or the FI-logACD benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelChoice {
    Process {
        dynamics: DynamicsFamily,
        residual: ResidualFamily,
    },
    FiLogAcd,
}

impl ModelChoice {
    pub fn process(dynamics: DynamicsFamily, residual: ResidualFamily) -> Result<Self> {
        Parameterization::new(dynamics, residual)?;
        Ok(ModelChoice::Process { dynamics, residual })
    }

    /// The twelve SE/ACD/logACD × residual combinations, then logACI and
    /// FI-logACD.
    pub fn all() -> Vec<ModelChoice> {
        let mut out = Vec::new();
        for dynamics in [DynamicsFamily::Se, DynamicsFamily::Acd, DynamicsFamily::LogAcd] {
            for residual in ResidualFamily::ALL {
                out.push(ModelChoice::Process { dynamics, residual });
            }
        }
        out.push(ModelChoice::Process {
            dynamics: DynamicsFamily::LogAci,
            residual: ResidualFamily::Exponential,
        });
        out.push(ModelChoice::FiLogAcd);
        out
    }

    /// Display label such as `SE-Gamma` or `FI-logACD`.
    pub fn label(&self) -> String {
        match *self {
            ModelChoice::Process { dynamics, residual } => model_label(dynamics, residual),
            ModelChoice::FiLogAcd => "FI-logACD".to_string(),
        }
    }

    /// Lower-case identifier such as `se-gamma`, used in file names and flags.
    pub fn name(&self) -> String {
        match *self {
            ModelChoice::Process { dynamics, residual } => {
                let d = match dynamics {
                    DynamicsFamily::Se => "se",
                    DynamicsFamily::Acd => "acd",
                    DynamicsFamily::LogAcd => "logacd",
                    DynamicsFamily::LogAci => "logaci",
                    DynamicsFamily::Renewal => "renewal",
                };
                let r = match residual {
                    ResidualFamily::Exponential => "exp",
                    ResidualFamily::Gamma => "gamma",
                    ResidualFamily::GenGamma => "ggamma",
                    ResidualFamily::Burr => "burr",
                };
                format!("{d}-{r}")
            }
            ModelChoice::FiLogAcd => "fi-logacd".to_string(),
        }
    }
}

impl std::fmt::Display for ModelChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

impl std::str::FromStr for ModelChoice {
    type Err = Error;

    /// Accepts `se-gamma`, `acd-exp`, `logacd-burr`, `logaci`, `renewal`,
    /// `fi-logacd`; a bare dynamics name means exponential residuals.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "fi-logacd" || s == "filogacd" {
            return Ok(ModelChoice::FiLogAcd);
        }
        for name in ["se", "acd", "logacd", "logaci", "renewal"] {
            let residual = if s == name {
                Some("exp")
            } else {
                s.strip_prefix(name).and_then(|rest| rest.strip_prefix('-'))
            };
            if let Some(residual) = residual {
                return ModelChoice::process(name.parse()?, residual.parse()?);
            }
        }
        Err(Error::domain(format!("unknown model '{s}'")))
    }
}

/// Fits any [`ModelChoice`].
pub fn fit_model(choice: ModelChoice, durations: &[f64], config: &FitConfig) -> Result<FitResult> {
    match choice {
        ModelChoice::Process { dynamics, residual } => fit(dynamics, residual, durations, config),
        ModelChoice::FiLogAcd => crate::fi_logacd::fit_fi_logacd(durations, config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renewal_exp_loglik_is_minus_sum() {
        let m = ModelSpec::new(DynamicsSpec::Renewal, ResidualSpec::exponential()).unwrap();
        assert_eq!(loglik(&m, &[1.0, 2.0, 3.0], 1.0).unwrap(), -6.0);
    }

    #[test]
    fn fast_path_matches_generic_terms() {
        let cases = [
            (DynamicsSpec::Se { mu: 0.3, alpha: 0.1, beta: 0.2 }, ResidualSpec::gamma(0.4).unwrap()),
            (DynamicsSpec::Acd { b0: 0.1, a: 0.2, b1: 0.5 }, ResidualSpec::burr(3.0, 0.9).unwrap()),
            (DynamicsSpec::LogAcd { b0: 0.05, a: 0.1, b1: 0.7 }, ResidualSpec::gen_gamma(1.3, 0.8).unwrap()),
            (DynamicsSpec::LogAci { b0: 0.1, a: -0.05, b1: 0.6 }, ResidualSpec::exponential()),
            (DynamicsSpec::Renewal, ResidualSpec::gamma(2.0).unwrap()),
        ];
        let tau = [0.3, 1.7, 0.01, 2.5, 0.8, 0.05, 4.0];
        for (d, r) in cases {
            let m = ModelSpec::new(d, r).unwrap();
            let x0 = m.default_initial_state().value();
            let fast = loglik(&m, &tau, x0).unwrap();
            let slow: f64 = loglik_terms(&m, &tau, x0).unwrap().iter().sum();
            assert!((fast - slow).abs() < 1e-10 * slow.abs().max(1.0), "{}: {fast} vs {slow}", m.label());
        }
    }

    #[test]
    fn non_finite_term_reports_index() {
        // τ/x overflows to infinity at the second event
        let m = ModelSpec::new(
            DynamicsSpec::Acd { b0: 0.1, a: 0.2, b1: 0.5 },
            ResidualSpec::exponential(),
        )
        .unwrap();
        let err = loglik(&m, &[1.0, 1e308, 1.0], 0.5).unwrap_err();
        assert!(matches!(err, Error::NonFiniteTerm { index: 1, .. }), "{err:?}");
    }

    #[test]
    fn parameterization_round_trips() {
        let cases: [(DynamicsFamily, ResidualFamily, Vec<f64>); 5] = [
            (DynamicsFamily::Se, ResidualFamily::Gamma, vec![0.27, 0.09, 0.1, 0.35]),
            (DynamicsFamily::Acd, ResidualFamily::Burr, vec![1e-4, 0.05, 0.94, 3.0, 0.7]),
            (DynamicsFamily::LogAcd, ResidualFamily::GenGamma, vec![-0.02, 0.04, 0.9, 0.6, 1.4]),
            (DynamicsFamily::LogAci, ResidualFamily::Exponential, vec![0.1, -0.3, -0.6]),
            (DynamicsFamily::Renewal, ResidualFamily::Exponential, vec![]),
        ];
        for (d, r, p) in cases {
            let param = Parameterization::new(d, r).unwrap();
            let back = param.natural(&param.theta(&p));
            for (a, b) in p.iter().zip(&back) {
                assert!((a - b).abs() < 1e-12 * a.abs().max(1e-3), "{d:?}/{r:?}: {a} vs {b}");
            }
            assert!(param.model(&param.theta(&p)).is_ok());
        }
    }

    #[test]
    fn simplex_is_strictly_inside() {
        for &(u, v) in &[(0.0, 0.0), (30.0, -30.0), (-800.0, 800.0), (5.0, 5.0)] {
            let (a, b1) = simplex2(u, v);
            assert!(a >= 0.0 && b1 >= 0.0 && a + b1 <= 1.0);
        }
    }

    #[test]
    fn model_choice_names_round_trip() {
        let all = ModelChoice::all();
        assert_eq!(all.len(), 14);
        for c in all {
            assert_eq!(c.name().parse::<ModelChoice>().unwrap(), c);
        }
        assert_eq!(
            "logaci".parse::<ModelChoice>().unwrap().label(),
            "logACI"
        );
        assert!("logaci-gamma".parse::<ModelChoice>().is_err());
        assert!("garch".parse::<ModelChoice>().is_err());
    }

    #[test]
    fn logaci_requires_exponential() {
        assert!(Parameterization::new(DynamicsFamily::LogAci, ResidualFamily::Gamma).is_err());
    }

    #[test]
    fn fit_rejects_short_samples() {
        let err = fit(DynamicsFamily::Acd, ResidualFamily::Exponential, &[1.0; 199], &FitConfig::default())
            .unwrap_err();
        assert!(matches!(err, Error::InsufficientData(_)));
    }
}
