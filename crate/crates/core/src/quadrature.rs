//! One-dimensional numerical integration.
//!
//! [`integrate`] is a globally adaptive Gauss–Kronrod (7/15) scheme that
//! bisects the interval with the largest error estimate. [`tanh_sinh`] is a
//! double-exponential rule for integrands with integrable endpoint
//! singularities. [`integrate_survival`] handles the half-line integrals of
//! survival functions used for conditional expectations.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Integral estimate with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// Stops once the summed error estimate drops below
/// `max(abs_tol, rel_tol * |value|)`; fails with the achieved bound when
/// `max_segments` is exhausted first.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_segments: usize,
) -> Result<Quadrature> {
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let mut segments = vec![gk15(&f, a, b)];
    let mut evaluations = 15;
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if !value.is_finite() {
            return Err(Error::numerical(format!(
                "quadrature on [{a}, {b}] produced a non-finite value"
            )));
        }
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Quadrature {
                value,
                error,
                evaluations,
            });
        }
        if segments.len() >= max_segments {
            return Err(Error::numerical(format!(
                "quadrature on [{a}, {b}] did not converge: error bound {error:.3e} after {} segments",
                segments.len()
            )));
        }
        let (idx, worst) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, s)| (i, *s))
            .expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::numerical(format!(
                "quadrature on [{a}, {b}] hit interval resolution with error bound {error:.3e}"
            )));
        }
        segments[idx] = gk15(&f, worst.a, mid);
        segments.push(gk15(&f, mid, worst.b));
        evaluations += 30;
    }
}

/// Tanh–sinh quadrature over `[a, b]`.
///
/// `f` receives `(x, distance_to_a, distance_to_b)` so integrands singular at
/// an endpoint can be evaluated without cancellation.
pub fn tanh_sinh<F: Fn(f64, f64, f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    use std::f64::consts::FRAC_PI_2;
    let half = 0.5 * (b - a);
    let center = 0.5 * (a + b);
    let t_max = 6.5;

    // contribution of the node at parameter t (symmetric pair when t > 0)
    let node = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let cosh_u = u.cosh();
        let weight = FRAC_PI_2 * t.cosh() / (cosh_u * cosh_u);
        // 1 - tanh(u) = 2 / (1 + e^{2u})
        let comp = 2.0 / (1.0 + (2.0 * u).exp());
        let dist = half * comp;
        if weight == 0.0 || dist == 0.0 {
            return 0.0;
        }
        let right = f(b - dist, half * 2.0 - dist, dist);
        let left = f(a + dist, dist, half * 2.0 - dist);
        weight * (right + left)
    };

    let mut h = 1.0;
    let mut sum = FRAC_PI_2 * f(center, half, half);
    let mut evaluations = 1;
    let mut k = 1;
    while (k as f64) * h <= t_max {
        sum += node(k as f64 * h);
        evaluations += 2;
        k += 1;
    }
    let mut estimate = sum * h * half;
    for _level in 0..12 {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= t_max {
            sum += node(k as f64 * h);
            evaluations += 2;
            k += 2;
        }
        let next = sum * h * half;
        let error = (next - estimate).abs();
        if !next.is_finite() {
            return Err(Error::numerical("tanh-sinh quadrature produced a non-finite value"));
        }
        estimate = next;
        if error <= tol.max(tol * estimate.abs()) {
            return Ok(Quadrature {
                value: estimate,
                error,
                evaluations,
            });
        }
    }
    Err(Error::numerical(format!(
        "tanh-sinh quadrature on [{a}, {b}] did not converge"
    )))
}

/// `∫_0^∞ s(t) dt` for a nonincreasing integrand `s` with `s(0) <= 1`.
///
/// The upper limit is doubled from `initial_scale` until `s` drops below
/// `cutoff`; the finite part is then integrated adaptively.
pub fn integrate_survival<F: Fn(f64) -> f64>(
    s: F,
    initial_scale: f64,
    cutoff: f64,
    abs_tol: f64,
) -> Result<Quadrature> {
    let mut upper = initial_scale.max(f64::MIN_POSITIVE);
    let mut doublings = 0;
    while s(upper) >= cutoff {
        upper *= 2.0;
        doublings += 1;
        if doublings > 200 || !upper.is_finite() {
            return Err(Error::numerical(
                "survival integrand does not decay below the truncation cutoff",
            ));
        }
    }
    // split at geometric points so the steep early part gets its own panels
    let mut value = 0.0;
    let mut error = 0.0;
    let mut evaluations = 0;
    let mut lo = 0.0;
    let mut hi = upper / 1024.0;
    while lo < upper {
        let r = integrate(&s, lo, hi.min(upper), abs_tol / 16.0, 1e-12, 400)?;
        value += r.value;
        error += r.error;
        evaluations += r.evaluations;
        lo = hi;
        hi *= 4.0;
    }
    Ok(Quadrature {
        value,
        error,
        evaluations,
    })
}
