//! Unit-mean residual distributions.
//!
//! Every family is scaled so that `E[ε] = 1`; the scale constant is derived
//! from the shape parameters once, at construction. Densities and survival
//! functions are evaluated in log space and exponentiated last.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{digamma, ln_1m_exp, ln_1p_exp, ln_beta, ln_gamma, ln_gamma_pq};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Residual family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResidualFamily {
    Exponential,
    Gamma,
    GenGamma,
    Burr,
}

impl ResidualFamily {
    pub const ALL: [ResidualFamily; 4] = [
        ResidualFamily::Exponential,
        ResidualFamily::Gamma,
        ResidualFamily::GenGamma,
        ResidualFamily::Burr,
    ];

    /// Short label used in model names (`SE-Exp`, `ACD-gGamma`, ...).
    pub fn label(self) -> &'static str {
        match self {
            ResidualFamily::Exponential => "Exp",
            ResidualFamily::Gamma => "Gamma",
            ResidualFamily::GenGamma => "gGamma",
            ResidualFamily::Burr => "Burr",
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            ResidualFamily::Exponential => &[],
            ResidualFamily::Gamma => &["kappa"],
            ResidualFamily::GenGamma => &["d", "p"],
            ResidualFamily::Burr => &["s1", "s2"],
        }
    }

    pub fn arity(self) -> usize {
        self.param_names().len()
    }
}

impl fmt::Display for ResidualFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ResidualFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exp" | "exponential" => Ok(ResidualFamily::Exponential),
            "gamma" => Ok(ResidualFamily::Gamma),
            "ggamma" | "gengamma" | "generalized-gamma" => Ok(ResidualFamily::GenGamma),
            "burr" => Ok(ResidualFamily::Burr),
            other => Err(Error::domain(format!("unknown residual family '{other}'"))),
        }
    }
}

/// Family plus shape parameters; the serialized form of a residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ResidualShape {
    Exponential,
    Gamma { kappa: f64 },
    GenGamma { d: f64, p: f64 },
    Burr { s1: f64, s2: f64 },
}

/// A unit-mean residual distribution with its cached scale constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ResidualShape", into = "ResidualShape")]
pub struct ResidualSpec {
    shape: ResidualShape,
    scale: f64,
    ln_scale: f64,
    /// log of the density's normalizing constant
    ln_norm: f64,
    /// `E[log ε]`
    mean_ln: f64,
}

/// `(pdf, cdf, hazard)` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub pdf: f64,
    pub cdf: f64,
    pub hazard: f64,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be a positive finite number, got {v}")))
    }
}

impl ResidualSpec {
    /// Unit exponential.
    pub fn exponential() -> Self {
        ResidualSpec {
            shape: ResidualShape::Exponential,
            scale: 1.0,
            ln_scale: 0.0,
            ln_norm: 0.0,
            mean_ln: -EULER_GAMMA,
        }
    }

    pub fn gamma(kappa: f64) -> Result<Self> {
        Self::new(ResidualShape::Gamma { kappa })
    }

    pub fn gen_gamma(d: f64, p: f64) -> Result<Self> {
        Self::new(ResidualShape::GenGamma { d, p })
    }

    pub fn burr(s1: f64, s2: f64) -> Result<Self> {
        Self::new(ResidualShape::Burr { s1, s2 })
    }

    pub fn new(shape: ResidualShape) -> Result<Self> {
        match shape {
            ResidualShape::Exponential => Ok(Self::exponential()),
            ResidualShape::Gamma { kappa } => {
                check_positive("kappa", kappa)?;
                Ok(ResidualSpec {
                    shape,
                    scale: 1.0 / kappa,
                    ln_scale: -kappa.ln(),
                    ln_norm: kappa * kappa.ln() - ln_gamma(kappa),
                    mean_ln: digamma(kappa) - kappa.ln(),
                })
            }
            ResidualShape::GenGamma { d, p } => {
                check_positive("d", d)?;
                check_positive("p", p)?;
                let ln_a = ln_gamma(d / p) - ln_gamma((d + 1.0) / p);
                let scale = ln_a.exp();
                if !(scale.is_finite() && scale > 0.0) {
                    return Err(Error::domain(format!(
                        "generalized Gamma scale overflows for d={d}, p={p}"
                    )));
                }
                Ok(ResidualSpec {
                    shape,
                    scale,
                    ln_scale: ln_a,
                    ln_norm: p.ln() - d * ln_a - ln_gamma(d / p),
                    mean_ln: ln_a + digamma(d / p) / p,
                })
            }
            ResidualShape::Burr { s1, s2 } => {
                check_positive("s1", s1)?;
                check_positive("s2", s2)?;
                let product = s1 * s2;
                if product <= 1.0 {
                    return Err(Error::MeanNonexistence { product });
                }
                // c = [s1 B(s1 - 1/s2, 1 + 1/s2)]^{-1}
                let ln_c = -(s1.ln() + ln_beta(s1 - 1.0 / s2, 1.0 + 1.0 / s2));
                let scale = ln_c.exp();
                if !(scale.is_finite() && scale > 0.0) {
                    return Err(Error::domain(format!(
                        "Burr scale overflows for s1={s1}, s2={s2}"
                    )));
                }
                Ok(ResidualSpec {
                    shape,
                    scale,
                    ln_scale: ln_c,
                    ln_norm: product.ln() - ln_c,
                    // (ε/c)^{s2} is beta-prime(1, s1)
                    mean_ln: ln_c + (digamma(1.0) - digamma(s1)) / s2,
                })
            }
        }
    }

    /// Builds a spec from a family tag and its positional shape parameters.
    pub fn from_params(family: ResidualFamily, params: &[f64]) -> Result<Self> {
        if params.len() != family.arity() {
            return Err(Error::domain(format!(
                "{} residual takes {} parameter(s), got {}",
                family.label(),
                family.arity(),
                params.len()
            )));
        }
        let shape = match family {
            ResidualFamily::Exponential => ResidualShape::Exponential,
            ResidualFamily::Gamma => ResidualShape::Gamma { kappa: params[0] },
            ResidualFamily::GenGamma => ResidualShape::GenGamma {
                d: params[0],
                p: params[1],
            },
            ResidualFamily::Burr => ResidualShape::Burr {
                s1: params[0],
                s2: params[1],
            },
        };
        Self::new(shape)
    }

    pub fn shape(&self) -> ResidualShape {
        self.shape
    }

    pub fn family(&self) -> ResidualFamily {
        match self.shape {
            ResidualShape::Exponential => ResidualFamily::Exponential,
            ResidualShape::Gamma { .. } => ResidualFamily::Gamma,
            ResidualShape::GenGamma { .. } => ResidualFamily::GenGamma,
            ResidualShape::Burr { .. } => ResidualFamily::Burr,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self.shape {
            ResidualShape::Exponential => vec![],
            ResidualShape::Gamma { kappa } => vec![kappa],
            ResidualShape::GenGamma { d, p } => vec![d, p],
            ResidualShape::Burr { s1, s2 } => vec![s1, s2],
        }
    }

    /// The derived scale constant (`1/κ`, `a`, or `c`; 1 for the exponential).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `E[log ε]`, used to centre log-scale recursions.
    pub fn mean_ln(&self) -> f64 {
        self.mean_ln
    }

    /// Always 1 by construction.
    pub fn mean(&self) -> f64 {
        1.0
    }

    /// log density; `-inf` for `x <= 0` except where the density has a finite
    /// or infinite limit at the origin.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x < 0.0 || x.is_nan() {
            return f64::NEG_INFINITY;
        }
        if x == 0.0 {
            return self.ln_pdf_at_origin();
        }
        self.ln_pdf_ln(x, x.ln())
    }

    /// `ln_pdf(x)` for `x > 0` when `ln x` is already known.
    #[inline]
    pub fn ln_pdf_ln(&self, x: f64, ln_x: f64) -> f64 {
        match self.shape {
            ResidualShape::Exponential => -x,
            ResidualShape::Gamma { kappa } => self.ln_norm + (kappa - 1.0) * ln_x - kappa * x,
            ResidualShape::GenGamma { d, p } => {
                let ln_z = ln_x - self.ln_scale;
                self.ln_norm + (d - 1.0) * ln_x - (p * ln_z).exp()
            }
            ResidualShape::Burr { s1, s2 } => {
                let ln_z = ln_x - self.ln_scale;
                self.ln_norm + (s2 - 1.0) * ln_z - (s1 + 1.0) * ln_1p_exp(s2 * ln_z)
            }
        }
    }

    fn ln_pdf_at_origin(&self) -> f64 {
        let power = match self.shape {
            ResidualShape::Exponential => return 0.0,
            ResidualShape::Gamma { kappa } => kappa,
            ResidualShape::GenGamma { d, .. } => d,
            ResidualShape::Burr { s2, .. } => s2,
        };
        if power < 1.0 {
            f64::INFINITY
        } else if power == 1.0 {
            self.ln_norm
        } else {
            f64::NEG_INFINITY
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    /// log survival `log(1 - F(x))`.
    pub fn ln_sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self.shape {
            ResidualShape::Exponential => -x,
            ResidualShape::Gamma { kappa } => ln_gamma_pq(kappa, kappa * x).1,
            ResidualShape::GenGamma { d, p } => {
                let z = ((x.ln() - self.ln_scale) * p).exp();
                ln_gamma_pq(d / p, z).1
            }
            ResidualShape::Burr { s1, s2 } => {
                -s1 * ln_1p_exp(s2 * (x.ln() - self.ln_scale))
            }
        }
    }

    /// log CDF.
    pub fn ln_cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        match self.shape {
            ResidualShape::Gamma { kappa } => ln_gamma_pq(kappa, kappa * x).0,
            ResidualShape::GenGamma { d, p } => {
                let z = ((x.ln() - self.ln_scale) * p).exp();
                ln_gamma_pq(d / p, z).0
            }
            _ => ln_1m_exp(self.ln_sf(x)),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.ln_cdf(x).exp()
    }

    pub fn sf(&self, x: f64) -> f64 {
        self.ln_sf(x).exp()
    }

    /// Cumulative hazard `-log(1 - F(x))`.
    pub fn cum_hazard(&self, x: f64) -> f64 {
        -self.ln_sf(x)
    }

    pub fn hazard(&self, x: f64) -> f64 {
        match self.shape {
            ResidualShape::Exponential => 1.0,
            _ => (self.ln_pdf(x) - self.ln_sf(x)).exp(),
        }
    }

    /// Density, CDF and hazard at `x > 0`.
    pub fn evaluate(&self, x: f64) -> Result<Evaluation> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::domain(format!("evaluation point must be positive, got {x}")));
        }
        Ok(Evaluation {
            pdf: self.pdf(x),
            cdf: self.cdf(x),
            hazard: self.hazard(x),
        })
    }

    /// Inverse CDF on `(0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain(format!("quantile level must lie in (0, 1), got {u}")));
        }
        let x = match self.shape {
            ResidualShape::Exponential => -(-u).ln_1p(),
            ResidualShape::Burr { s1, s2 } => {
                let e = -(-u).ln_1p();
                self.burr_from_exponential(e, s1, s2)
            }
            ResidualShape::Gamma { kappa } => inverse_gamma_p(kappa, u)? / kappa,
            ResidualShape::GenGamma { d, p } => {
                let z = inverse_gamma_p(d / p, u)?;
                self.scale * z.powf(1.0 / p)
            }
        };
        Ok(x)
    }

    /// Burr draw from a unit-exponential variate `e = -log(1 - u)`.
    fn burr_from_exponential(&self, e: f64, s1: f64, s2: f64) -> f64 {
        self.scale * (e / s1).exp_m1().powf(1.0 / s2)
    }

    /// One draw using the caller's generator.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let x = match self.shape {
                ResidualShape::Exponential => Exp1.sample(rng),
                ResidualShape::Gamma { kappa } => {
                    let g: f64 = rand_distr::Gamma::new(kappa, 1.0 / kappa)
                        .expect("validated shape")
                        .sample(rng);
                    g
                }
                ResidualShape::GenGamma { d, p } => {
                    let g: f64 = rand_distr::Gamma::new(d / p, 1.0)
                        .expect("validated shape")
                        .sample(rng);
                    self.scale * g.powf(1.0 / p)
                }
                ResidualShape::Burr { s1, s2 } => {
                    let e: f64 = Exp1.sample(rng);
                    self.burr_from_exponential(e, s1, s2)
                }
            };
            if x > 0.0 && x.is_finite() {
                return x;
            }
        }
    }

    /// `count` i.i.d. draws from a ChaCha8 stream seeded with `seed`.
    pub fn sample_n(&self, count: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| self.sample(&mut rng)).collect()
    }
}

impl TryFrom<ResidualShape> for ResidualSpec {
    type Error = Error;

    fn try_from(shape: ResidualShape) -> Result<Self> {
        ResidualSpec::new(shape)
    }
}

impl From<ResidualSpec> for ResidualShape {
    fn from(spec: ResidualSpec) -> Self {
        spec.shape
    }
}

/// Solves `P(s, z) = u` for `z` by a bracketed Newton iteration in log space.
fn inverse_gamma_p(s: f64, u: f64) -> Result<f64> {
    let upper_tail = u > 0.5;
    let target = if upper_tail { (-u).ln_1p() } else { u.ln() };
    // g(z) = log P - log u (or log Q - log(1-u)); increasing for P, decreasing for Q
    let g = |z: f64| -> f64 {
        let (lp, lq) = ln_gamma_pq(s, z);
        if upper_tail {
            target - lq
        } else {
            lp - target
        }
    };
    let ln_density = |z: f64| (s - 1.0) * z.ln() - z - ln_gamma(s);

    let mut lo = 0.0_f64;
    let mut hi = s.max(1.0);
    while g(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::numerical("gamma quantile bracket overflow"));
        }
    }
    // small-z series start: P ~ z^s / Γ(s+1)
    let mut z = if !upper_tail {
        ((target + ln_gamma(s + 1.0)) / s).exp().clamp(lo, hi)
    } else {
        0.5 * (lo + hi)
    };
    if !(z > lo && z < hi) {
        z = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let gz = g(z);
        if gz == 0.0 {
            return Ok(z);
        }
        if gz < 0.0 {
            lo = z;
        } else {
            hi = z;
        }
        let (lp, lq) = ln_gamma_pq(s, z);
        // d/dz log P = f/P, d/dz (-log Q) = f/Q
        let slope = if upper_tail {
            (ln_density(z) - lq).exp()
        } else {
            (ln_density(z) - lp).exp()
        };
        let mut next = z - gz / slope;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = if lo > 0.0 { (lo * hi).sqrt().max(0.5 * (lo + hi).min(hi)) } else { 0.5 * hi };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
        }
        if (next - z).abs() <= 1e-15 * z.abs() || hi - lo <= 1e-15 * hi {
            return Ok(next);
        }
        z = next;
    }
    Err(Error::numerical(format!("gamma quantile did not converge for s={s}, u={u}")))
}
