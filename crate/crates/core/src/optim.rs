//! Unconstrained minimization: Nelder–Mead followed by BFGS on
//! central-difference gradients, plus a finite-difference Hessian.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub struct OptimOptions {
    /// Convergence threshold on the infinity norm of the gradient.
    pub gradient_tolerance: f64,
    /// Cap on BFGS iterations.
    pub max_iterations: usize,
    /// Cap on objective evaluations in the simplex stage.
    pub simplex_max_evaluations: usize,
    /// Edge length of the starting simplex.
    pub simplex_step: f64,
}

impl Default for OptimOptions {
    fn default() -> Self {
        OptimOptions {
            gradient_tolerance: 1e-6,
            max_iterations: 500,
            simplex_max_evaluations: 2_000,
            simplex_step: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Tracks every evaluation so the best point seen is never lost.
struct Counted<'a, F> {
    f: &'a F,
    evaluations: usize,
    best_x: Vec<f64>,
    best_value: f64,
}

impl<'a, F: Fn(&[f64]) -> f64> Counted<'a, F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evaluations += 1;
        let v = (self.f)(x);
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v < self.best_value {
            self.best_value = v;
            self.best_x.clear();
            self.best_x.extend_from_slice(x);
        }
        v
    }
}

fn gradient_step(x: f64) -> f64 {
    1e-5 * x.abs().max(1.0)
}

/// Central-difference gradient; one-sided where a central point is infinite.
pub fn numerical_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], fx: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = gradient_step(x[i]);
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            match (up.is_finite(), down.is_finite()) {
                (true, true) => (up - down) / (2.0 * h),
                (true, false) => (up - fx) / h,
                (false, true) => (fx - down) / h,
                (false, false) => f64::NAN,
            }
        })
        .collect()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, g| if g.is_nan() { f64::INFINITY } else { m.max(g.abs()) })
}

fn nelder_mead<F: Fn(&[f64]) -> f64>(c: &mut Counted<F>, x0: &[f64], opts: &OptimOptions) {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += opts.simplex_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| c.eval(v)).collect();
    let start = c.evaluations;
    while c.evaluations - start < opts.simplex_max_evaluations {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        let size = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread.is_finite() && spread <= 1e-10 * (1.0 + values[0].abs()) && size <= 1e-6 {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let xr = along(-1.0);
        let fr = c.eval(&xr);
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = c.eval(&xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        // outside contraction when the reflection helped at all, inside otherwise
        let xc = along(if fr < values[n] { -0.5 } else { 0.5 });
        let fc = c.eval(&xc);
        if fc < values[n].min(fr) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        // shrink toward the best vertex
        for i in 1..=n {
            let shrunk: Vec<f64> = simplex[i]
                .iter()
                .zip(&simplex[0])
                .map(|(v, b)| b + 0.5 * (v - b))
                .collect();
            values[i] = c.eval(&shrunk);
            simplex[i] = shrunk;
        }
    }
}

/// Minimizes `f` from `x0`. Infinite or NaN values mark infeasible points.
///
/// The returned point is the best one evaluated in either stage.
pub fn minimize<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], opts: &OptimOptions) -> OptimOutcome {
    let n = x0.len();
    let mut c = Counted {
        f,
        evaluations: 0,
        best_x: x0.to_vec(),
        best_value: f64::INFINITY,
    };
    let v0 = c.eval(x0);
    if n == 0 {
        return OptimOutcome {
            x: vec![],
            value: v0,
            gradient_norm: 0.0,
            iterations: 0,
            evaluations: 1,
            converged: v0.is_finite(),
        };
    }
    nelder_mead(&mut c, x0, opts);

    // BFGS on the inverse Hessian
    let mut x = DVector::from_column_slice(&c.best_x);
    let mut fx = c.best_value;
    let mut g = DVector::from_vec(numerical_gradient(f, x.as_slice(), fx));
    c.evaluations += 2 * n;
    let mut h_inv = DMatrix::<f64>::identity(n, n);
    let mut iterations = 0;
    let mut fresh = true;
    while iterations < opts.max_iterations && fx.is_finite() {
        if inf_norm(g.as_slice()) <= opts.gradient_tolerance {
            break;
        }
        iterations += 1;
        let mut d = -(&h_inv * &g);
        let mut slope = g.dot(&d);
        if !(slope < 0.0) {
            h_inv = DMatrix::identity(n, n);
            d = -g.clone();
            slope = g.dot(&d);
            fresh = true;
        }
        if fresh {
            // keep the first trial step modest in the unconstrained space
            let len = d.norm();
            if len > 1.0 {
                d /= len;
                slope /= len;
            }
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let trial = &x + t * &d;
            let ft = c.eval(trial.as_slice());
            if ft.is_finite() && ft <= fx + 1e-4 * t * slope {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            if fresh {
                break;
            }
            h_inv = DMatrix::identity(n, n);
            fresh = true;
            continue;
        };
        let g_new = DVector::from_vec(numerical_gradient(f, x_new.as_slice(), f_new));
        c.evaluations += 2 * n;
        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            if fresh {
                h_inv *= sy / y.dot(&y);
            }
            let rho = 1.0 / sy;
            let hy = &h_inv * &y;
            let yhy = y.dot(&hy);
            h_inv += (rho * rho * yhy + rho) * (&s * s.transpose())
                - rho * (&hy * s.transpose() + &s * hy.transpose());
            fresh = false;
        }
        let stalled = (fx - f_new).abs() <= 1e-16 * fx.abs().max(1.0) && s.amax() < 1e-12;
        x = x_new;
        fx = f_new;
        g = g_new;
        if stalled {
            break;
        }
    }

    // the best evaluated point wins, even if it came from a line-search probe
    let (x, fx, g) = if c.best_value < fx {
        let bx = c.best_x.clone();
        let bg = numerical_gradient(f, &bx, c.best_value);
        (bx, c.best_value, bg)
    } else {
        (x.as_slice().to_vec(), fx, g.as_slice().to_vec())
    };
    let gradient_norm = inf_norm(&g);
    OptimOutcome {
        x,
        value: fx,
        gradient_norm,
        iterations,
        evaluations: c.evaluations,
        converged: fx.is_finite() && gradient_norm <= opts.gradient_tolerance,
    }
}

/// Central-difference Hessian with steps `h_i = rel_step·(1 + |x_i|)`.
pub fn numerical_hessian<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], rel_step: f64) -> DMatrix<f64> {
    let n = x.len();
    let h: Vec<f64> = x.iter().map(|v| rel_step * (1.0 + v.abs())).collect();
    let f0 = f(x);
    let mut probe = x.to_vec();
    let at = |probe: &mut Vec<f64>, moves: &[(usize, f64)]| {
        for &(i, s) in moves {
            probe[i] = x[i] + s * h[i];
        }
        let v = f(probe);
        for &(i, _) in moves {
            probe[i] = x[i];
        }
        v
    };
    let mut hess = DMatrix::zeros(n, n);
    for i in 0..n {
        let up = at(&mut probe, &[(i, 1.0)]);
        let down = at(&mut probe, &[(i, -1.0)]);
        hess[(i, i)] = (up - 2.0 * f0 + down) / (h[i] * h[i]);
        for j in 0..i {
            let pp = at(&mut probe, &[(i, 1.0), (j, 1.0)]);
            let pm = at(&mut probe, &[(i, 1.0), (j, -1.0)]);
            let mp = at(&mut probe, &[(i, -1.0), (j, 1.0)]);
            let mm = at(&mut probe, &[(i, -1.0), (j, -1.0)]);
            let v = (pp - pm - mp + mm) / (4.0 * h[i] * h[j]);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    hess
}
