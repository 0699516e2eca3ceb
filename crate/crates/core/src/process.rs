//! Observation-driven duration processes.
//!
//! Each model is a pair `(Φ, Ψ)` acting on a positive latent state `x`: the
//! next duration is `τ = Φ⁻¹(ε, x)` for a unit-mean residual `ε`, and the
//! state then moves to `Ψ(τ, x)`.
//!
//! | dynamics | `Φ(t, x)`                              | `Ψ(t, x)`                                   |
//! |----------|----------------------------------------|---------------------------------------------|
//! | SE       | `μt + (x − μ + α)(1 − e^{−βt})/β`      | `μ + (x − μ + α)e^{−βt}`                    |
//! | ACD      | `t / x`                                | `b0 + a t + b1 x`                           |
//! | LogACD   | `t / x`                                | `exp(b0 + a log t + b1 log x)`              |
//! | LogACI   | `x t`                                  | `exp(b0 + a(x t − 1) + b1 log x)`           |
//! | Renewal  | `t`                                    | `1`                                         |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::residual::{ResidualFamily, ResidualSpec};

/// Bound on `|log Λ|` for the LogACI recursion.
pub const LOGACI_LOG_STATE_CLAMP: f64 = 50.0;

const PHI_INV_TOL: f64 = 1e-12;
const PHI_INV_MAX_ITER: usize = 100;

/// Dynamics family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DynamicsFamily {
    Se,
    Acd,
    LogAcd,
    LogAci,
    Renewal,
}

impl DynamicsFamily {
    pub fn label(self) -> &'static str {
        match self {
            DynamicsFamily::Se => "SE",
            DynamicsFamily::Acd => "ACD",
            DynamicsFamily::LogAcd => "logACD",
            DynamicsFamily::LogAci => "logACI",
            DynamicsFamily::Renewal => "Renewal",
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            DynamicsFamily::Se => &["mu", "alpha", "beta"],
            DynamicsFamily::Acd | DynamicsFamily::LogAcd | DynamicsFamily::LogAci => {
                &["b0", "a", "b1"]
            }
            DynamicsFamily::Renewal => &[],
        }
    }
}

impl fmt::Display for DynamicsFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for DynamicsFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "se" | "hawkes" => Ok(DynamicsFamily::Se),
            "acd" => Ok(DynamicsFamily::Acd),
            "logacd" | "log-acd" => Ok(DynamicsFamily::LogAcd),
            "logaci" | "log-aci" => Ok(DynamicsFamily::LogAci),
            "renewal" => Ok(DynamicsFamily::Renewal),
            other => Err(Error::domain(format!("unknown dynamics '{other}'"))),
        }
    }
}

/// Dynamics with their parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum DynamicsSpec {
    /// Self-exciting: baseline `mu`, jump `alpha`, decay `beta`.
    Se { mu: f64, alpha: f64, beta: f64 },
    Acd { b0: f64, a: f64, b1: f64 },
    LogAcd { b0: f64, a: f64, b1: f64 },
    LogAci { b0: f64, a: f64, b1: f64 },
    Renewal,
}

/// Outcome of a stationarity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    pub stable: bool,
    /// Distance to the stability boundary; negative when violated.
    pub margin: f64,
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be finite, got {v}")))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive, got {v}")))
    }
}

impl DynamicsSpec {
    pub fn family(&self) -> DynamicsFamily {
        match self {
            DynamicsSpec::Se { .. } => DynamicsFamily::Se,
            DynamicsSpec::Acd { .. } => DynamicsFamily::Acd,
            DynamicsSpec::LogAcd { .. } => DynamicsFamily::LogAcd,
            DynamicsSpec::LogAci { .. } => DynamicsFamily::LogAci,
            DynamicsSpec::Renewal => DynamicsFamily::Renewal,
        }
    }

    pub fn from_params(family: DynamicsFamily, params: &[f64]) -> Result<Self> {
        let expected = family.param_names().len();
        if params.len() != expected {
            return Err(Error::domain(format!(
                "{} dynamics take {expected} parameter(s), got {}",
                family.label(),
                params.len()
            )));
        }
        let spec = match family {
            DynamicsFamily::Se => DynamicsSpec::Se {
                mu: params[0],
                alpha: params[1],
                beta: params[2],
            },
            DynamicsFamily::Acd => DynamicsSpec::Acd {
                b0: params[0],
                a: params[1],
                b1: params[2],
            },
            DynamicsFamily::LogAcd => DynamicsSpec::LogAcd {
                b0: params[0],
                a: params[1],
                b1: params[2],
            },
            DynamicsFamily::LogAci => DynamicsSpec::LogAci {
                b0: params[0],
                a: params[1],
                b1: params[2],
            },
            DynamicsFamily::Renewal => DynamicsSpec::Renewal,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            DynamicsSpec::Se { mu, alpha, beta } => vec![mu, alpha, beta],
            DynamicsSpec::Acd { b0, a, b1 }
            | DynamicsSpec::LogAcd { b0, a, b1 }
            | DynamicsSpec::LogAci { b0, a, b1 } => vec![b0, a, b1],
            DynamicsSpec::Renewal => vec![],
        }
    }

    /// Parameter-domain checks. SE parameters need only be positive; its
    /// stationarity is reported by [`DynamicsSpec::check_stability`] so that
    /// explosive configurations can still be simulated.
    pub fn validate(&self) -> Result<()> {
        match *self {
            DynamicsSpec::Se { mu, alpha, beta } => {
                positive("mu", mu)?;
                positive("alpha", alpha)?;
                positive("beta", beta)
            }
            DynamicsSpec::Acd { b0, a, b1 } => {
                positive("b0", b0)?;
                positive("a", a)?;
                positive("b1", b1)?;
                if a + b1 >= 1.0 {
                    return Err(Error::domain(format!("ACD requires a + b1 < 1, got {}", a + b1)));
                }
                Ok(())
            }
            DynamicsSpec::LogAcd { b0, a, b1 } => {
                finite("b0", b0)?;
                if !(a >= 0.0 && b1 >= 0.0) {
                    return Err(Error::domain("logACD requires a >= 0 and b1 >= 0"));
                }
                if a + b1 >= 1.0 {
                    return Err(Error::domain(format!(
                        "logACD requires a + b1 < 1, got {}",
                        a + b1
                    )));
                }
                Ok(())
            }
            DynamicsSpec::LogAci { b0, a, b1 } => {
                finite("b0", b0)?;
                finite("a", a)?;
                if !(b1.abs() < 1.0) {
                    return Err(Error::domain(format!("logACI requires |b1| < 1, got {b1}")));
                }
                Ok(())
            }
            DynamicsSpec::Renewal => Ok(()),
        }
    }

    /// Stationarity condition for the dynamics under a unit-mean residual.
    pub fn check_stability(&self) -> StabilityReport {
        let margin = match *self {
            DynamicsSpec::Se { alpha, beta, .. } => beta - alpha,
            DynamicsSpec::Acd { a, b1, .. } | DynamicsSpec::LogAcd { a, b1, .. } => 1.0 - (a + b1),
            DynamicsSpec::LogAci { b1, .. } => 1.0 - b1.abs(),
            DynamicsSpec::Renewal => f64::INFINITY,
        };
        StabilityReport {
            stable: margin > 0.0,
            margin,
        }
    }

    /// `Φ(t, x)`.
    #[inline]
    pub fn phi(&self, t: f64, x: f64) -> f64 {
        match *self {
            DynamicsSpec::Se { mu, alpha, beta } => {
                mu * t + (x - mu + alpha) * (-(-beta * t).exp_m1()) / beta
            }
            DynamicsSpec::Acd { .. } | DynamicsSpec::LogAcd { .. } => t / x,
            DynamicsSpec::LogAci { .. } => x * t,
            DynamicsSpec::Renewal => t,
        }
    }

    /// `∂Φ/∂t (t, x)`.
    #[inline]
    pub fn phi_dt(&self, t: f64, x: f64) -> f64 {
        match *self {
            DynamicsSpec::Se { .. } => self.psi(t, x),
            DynamicsSpec::Acd { .. } | DynamicsSpec::LogAcd { .. } => 1.0 / x,
            DynamicsSpec::LogAci { .. } => x,
            DynamicsSpec::Renewal => 1.0,
        }
    }

    /// `Ψ(t, x)`.
    #[inline]
    pub fn psi(&self, t: f64, x: f64) -> f64 {
        match *self {
            DynamicsSpec::Se { mu, alpha, beta } => mu + (x - mu + alpha) * (-beta * t).exp(),
            DynamicsSpec::Acd { b0, a, b1 } => b0 + a * t + b1 * x,
            DynamicsSpec::LogAcd { b0, a, b1 } => (b0 + a * t.ln() + b1 * x.ln()).exp(),
            DynamicsSpec::LogAci { b0, a, b1 } => {
                let log_state = b0 + a * (x * t - 1.0) + b1 * x.ln();
                log_state
                    .clamp(-LOGACI_LOG_STATE_CLAMP, LOGACI_LOG_STATE_CLAMP)
                    .exp()
            }
            DynamicsSpec::Renewal => 1.0,
        }
    }

    /// True when a LogACI update at `(t, x)` hits the log-state clamp.
    pub fn psi_is_clamped(&self, t: f64, x: f64) -> bool {
        match *self {
            DynamicsSpec::LogAci { b0, a, b1 } => {
                let log_state = b0 + a * (x * t - 1.0) + b1 * x.ln();
                !(log_state.abs() < LOGACI_LOG_STATE_CLAMP)
            }
            _ => false,
        }
    }

    /// `Φ⁻¹(y, x)`: the `t` with `Φ(t, x) = y`.
    pub fn phi_inverse(&self, y: f64, x: f64) -> Result<f64> {
        match *self {
            DynamicsSpec::Se { mu, alpha, beta } => se_phi_inverse(mu, alpha, beta, y, x),
            DynamicsSpec::Acd { .. } | DynamicsSpec::LogAcd { .. } => Ok(x * y),
            DynamicsSpec::LogAci { .. } => Ok(y / x),
            DynamicsSpec::Renewal => Ok(y),
        }
    }

    /// Default initial state used by simulation and likelihood filtering.
    ///
    /// SE starts at `μ/(1 − α/β)`; ACD at the unconditional mean
    /// `b0/(1 − a − b1)`; the log models at the stationary mean of their
    /// log-state, which for LogACD involves `E[log ε]` of the residual.
    pub fn default_initial_state(&self, residual: &ResidualSpec) -> f64 {
        match *self {
            DynamicsSpec::Se { mu, alpha, beta } => {
                if alpha < beta {
                    mu / (1.0 - alpha / beta)
                } else {
                    mu
                }
            }
            DynamicsSpec::Acd { b0, a, b1 } => b0 / (1.0 - a - b1),
            DynamicsSpec::LogAcd { b0, a, b1 } => {
                ((b0 + a * residual.mean_ln()) / (1.0 - a - b1)).exp()
            }
            DynamicsSpec::LogAci { b0, b1, .. } => {
                (b0 / (1.0 - b1)).clamp(-LOGACI_LOG_STATE_CLAMP, LOGACI_LOG_STATE_CLAMP).exp()
            }
            DynamicsSpec::Renewal => 1.0,
        }
    }

    /// Checks that `x` is an admissible state for these dynamics.
    pub fn check_state(&self, x: f64) -> Result<()> {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::domain(format!("latent state must be positive, got {x}")));
        }
        if let DynamicsSpec::Se { mu, .. } = *self {
            if x < mu {
                return Err(Error::domain(format!(
                    "self-exciting state {x} lies below the baseline {mu}"
                )));
            }
        }
        Ok(())
    }
}

/// Inverts the SE compensator `μt + A(1 − e^{−βt})/β = y`, `A = x − μ + α`.
///
/// `Φ(·, x)` is concave and increasing, so Newton started left of the root
/// climbs monotonically; both terms of the initial guess are lower bounds.
fn se_phi_inverse(mu: f64, alpha: f64, beta: f64, y: f64, x: f64) -> Result<f64> {
    if y == 0.0 {
        return Ok(0.0);
    }
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::domain(format!("phi_inverse needs y > 0, got {y}")));
    }
    let jump = x - mu + alpha;
    let phi = |t: f64| mu * t + jump * (-(-beta * t).exp_m1()) / beta;
    let tol = PHI_INV_TOL * y.max(1.0);

    let asymptote = y / mu - jump / (beta * mu);
    let mut t = asymptote.max(y / (x + alpha)).max(0.0);
    let mut lo = 0.0_f64;
    let mut hi = y / mu + 1.0;
    let mut gap = phi(t) - y;
    for _ in 0..PHI_INV_MAX_ITER {
        if gap.abs() <= tol {
            return Ok(t);
        }
        if gap < 0.0 {
            lo = lo.max(t);
        } else {
            hi = hi.min(t);
        }
        let slope = mu + jump * (-beta * t).exp();
        let mut next = t - gap / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == t {
            break;
        }
        t = next;
        gap = phi(t) - y;
    }
    if gap.abs() <= tol.max(4.0 * f64::EPSILON * y) {
        return Ok(t);
    }
    Err(Error::numerical(format!(
        "SE phi_inverse did not converge for y={y}, x={x}: residual gap {gap:.3e}"
    )))
}

/// A positive latent state (`X` for ACD-type, `Λ` for intensity-type models).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatentState(f64);

impl LatentState {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(LatentState(value))
        } else {
            Err(Error::domain(format!("latent state must be positive, got {value}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Dynamics paired with a residual law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub dynamics: DynamicsSpec,
    pub residual: ResidualSpec,
}

impl ModelSpec {
    pub fn new(dynamics: DynamicsSpec, residual: ResidualSpec) -> Result<Self> {
        dynamics.validate()?;
        if dynamics.family() == DynamicsFamily::LogAci
            && residual.family() != ResidualFamily::Exponential
        {
            return Err(Error::domain(
                "logACI is defined with unit-exponential residuals only",
            ));
        }
        Ok(ModelSpec { dynamics, residual })
    }

    /// `SE-Gamma`, `logACD-Burr`, `logACI`, ...
    pub fn label(&self) -> String {
        model_label(self.dynamics.family(), self.residual.family())
    }

    pub fn default_initial_state(&self) -> LatentState {
        LatentState(self.dynamics.default_initial_state(&self.residual))
    }

    pub fn phi(&self, t: f64, state: LatentState) -> f64 {
        self.dynamics.phi(t, state.0)
    }

    pub fn phi_inverse(&self, y: f64, state: LatentState) -> Result<f64> {
        self.dynamics.phi_inverse(y, state.0)
    }

    pub fn psi_update(&self, tau: f64, state: LatentState) -> LatentState {
        LatentState(self.dynamics.psi(tau, state.0))
    }

    /// Conditional intensity `h_ε(Φ(t, x)) ∂Φ/∂t (t, x)` at elapsed time `t`.
    pub fn intensity(&self, t: f64, state: LatentState) -> Result<f64> {
        let x = state.0;
        let value = self.residual.hazard(self.dynamics.phi(t, x)) * self.dynamics.phi_dt(t, x);
        if value.is_finite() && value > 0.0 {
            Ok(value)
        } else {
            Err(Error::numerical(format!(
                "intensity evaluates to {value} at t={t}, state={x}"
            )))
        }
    }

    pub fn check_stability(&self) -> StabilityReport {
        self.dynamics.check_stability()
    }

    /// Density of the next SE state `Λ_{n+1} = y` given `Λ_n = x`.
    pub fn transition_density(&self, y: f64, x: f64) -> Result<f64> {
        let DynamicsSpec::Se { mu, alpha, .. } = self.dynamics else {
            return Err(Error::domain("transition density is defined for SE dynamics"));
        };
        if !(y > mu && y <= x + alpha) {
            return Ok(0.0);
        }
        self.transition_density_gaps(y - mu, x + alpha - y, x)
    }

    /// [`ModelSpec::transition_density`] at the point lying `above_mu` above
    /// the lower end `μ` and `below_top` below the upper end `x + α` of the
    /// support. Both distances are taken as exact, so the integrable endpoint
    /// singularities can be resolved below the spacing of representable `y`.
    pub fn transition_density_gaps(&self, above_mu: f64, below_top: f64, x: f64) -> Result<f64> {
        let DynamicsSpec::Se { mu, alpha, beta } = self.dynamics else {
            return Err(Error::domain("transition density is defined for SE dynamics"));
        };
        self.dynamics.check_state(x)?;
        if !(above_mu > 0.0 && below_top >= 0.0) {
            return Ok(0.0);
        }
        let jump = x - mu + alpha;
        // near the top ln(above_mu / jump) = ln(1 − below_top / jump)
        let ln_ratio = if below_top < above_mu {
            (-below_top / jump).ln_1p()
        } else {
            (above_mu / jump).ln()
        };
        let eps = (below_top / beta - (mu / beta) * ln_ratio).max(0.0);
        Ok(self.residual.pdf(eps) * (mu + above_mu) / (beta * above_mu))
    }

    /// Piecewise-linear upper bound `U(y, x)` on `Φ⁻¹(y, x)` for SE models.
    pub fn phi_inverse_upper_bound(&self, y: f64, x: f64, delta0: f64) -> Result<f64> {
        Ok(PhiInverseBound::new(self, x, delta0)?.eval(y))
    }
}

/// Canonical model name used in reports.
pub fn model_label(dynamics: DynamicsFamily, residual: ResidualFamily) -> String {
    match dynamics {
        DynamicsFamily::LogAci => "logACI".to_string(),
        d => format!("{}-{}", d.label(), residual.label()),
    }
}

/// Piecewise-linear majorant of the SE `Φ⁻¹(·, x)`.
///
/// Below the switch point `y0` the chord `U1(y) = Φ⁻¹(y0, x) y / y0` bounds
/// the convex inverse; above it `U2` is the linear asymptote
/// `y/μ − (x − μ + α)/(βμ)` lifted by its deviation at `y0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiInverseBound {
    pub y0: f64,
    /// Offset of `U2` above the linear asymptote; at most `delta0`.
    pub offset: f64,
    /// Slope of `U1`.
    pub chord_slope: f64,
    mu: f64,
    intercept: f64,
}

impl PhiInverseBound {
    pub fn new(model: &ModelSpec, x: f64, delta0: f64) -> Result<Self> {
        let DynamicsSpec::Se { mu, alpha, beta } = model.dynamics else {
            return Err(Error::domain("the Φ⁻¹ upper bound is defined for SE dynamics"));
        };
        if !(delta0 > 0.0) {
            return Err(Error::domain(format!("delta0 must be positive, got {delta0}")));
        }
        model.dynamics.check_state(x)?;
        let jump = x - mu + alpha;
        let intercept = jump / (beta * mu);
        let y0 = jump / beta + (mu / beta) * (jump / (mu * beta * delta0)).ln();
        if y0 <= 0.0 {
            // t* < 0: the deviation stays below delta0 on the whole half-line
            return Ok(PhiInverseBound {
                y0,
                offset: delta0,
                chord_slope: f64::NAN,
                mu,
                intercept,
            });
        }
        let t0 = model.dynamics.phi_inverse(y0, x)?;
        let offset = t0 - y0 / mu + intercept;
        Ok(PhiInverseBound {
            y0,
            offset,
            chord_slope: t0 / y0,
            mu,
            intercept,
        })
    }

    pub fn eval(&self, y: f64) -> f64 {
        if y <= self.y0 {
            self.chord_slope * y
        } else {
            y / self.mu - self.intercept + self.offset
        }
    }

    /// `U2`, defined for every `y`.
    pub fn asymptotic_branch(&self, y: f64) -> f64 {
        y / self.mu - self.intercept + self.offset
    }
}
