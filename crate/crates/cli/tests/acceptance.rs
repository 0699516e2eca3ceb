//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so every criterion reports even when an
//! earlier one fails; the process exits non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use flexdur::data_io::{build_durations, read_forecasts, LobEvent};
use flexdur::diagnostics::{exp_residuals, ks_statistic, wasserstein_msq};
use flexdur::estimate::{fit, loglik, FitConfig};
use flexdur::forecast::expected_duration;
use flexdur::process::{DynamicsFamily, DynamicsSpec, LatentState, ModelSpec, PhiInverseBound};
use flexdur::quadrature::tanh_sinh;
use flexdur::residual::{ResidualFamily, ResidualSpec};
use flexdur::simulate::{sample_acf, simulate, simulate_with, stationary_mean_tau, SimulationOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);

fn se(mu: f64, alpha: f64, beta: f64, residual: ResidualSpec) -> ModelSpec {
    ModelSpec::new(DynamicsSpec::Se { mu, alpha, beta }, residual).unwrap()
}

fn families() -> [ResidualSpec; 4] {
    [
        ResidualSpec::exponential(),
        ResidualSpec::gamma(0.35).unwrap(),
        ResidualSpec::gen_gamma(0.334, 1.25).unwrap(),
        ResidualSpec::burr(5.44, 0.507).unwrap(),
    ]
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

/// Standard error of a mean from non-overlapping batch means.
fn batch_se(v: &[f64], batches: usize) -> f64 {
    let size = v.len() / batches;
    let means: Vec<f64> = v
        .chunks_exact(size)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    mean_sd(&means).1 / (means.len() as f64).sqrt()
}

fn stationary_mean() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for (i, r) in families().into_iter().enumerate() {
        let m = se(1.0, 0.07, 0.1, r);
        let target = stationary_mean_tau(&m.dynamics).unwrap();
        let sim = simulate_with(
            &m,
            200_000,
            100 + i as u64,
            SimulationOptions { initial_state: None, burn_in: 1_000 },
        )
        .unwrap();
        let d = &sim.series.durations;
        let (mean, sd) = mean_sd(d);
        let iid = sd / (d.len() as f64).sqrt();
        let batch = batch_se(d, 100);
        // durations are serially correlated, so the standard error of the
        // mean is taken from batch means; the i.i.d. figure is reported too
        let z = (mean - target).abs() / batch;
        ok &= z <= 3.0;
        notes.push(format!(
            "{}: mean {mean:.5} (|z| {z:.2}, i.i.d. |z| {:.2})",
            r.family().label(),
            (mean - target).abs() / iid
        ));
    }
    (ok, notes.join("; "))
}

/// Exponential Hawkes log-likelihood in O(n²).
fn hawkes_direct(mu: f64, alpha: f64, beta: f64, x0: f64, durations: &[f64]) -> f64 {
    let mut times = vec![0.0];
    for d in durations {
        times.push(times.last().unwrap() + d);
    }
    let big_t = *times.last().unwrap();
    let mut ll = 0.0;
    for i in 1..times.len() {
        let t = times[i];
        let mut lambda = mu + (x0 - mu) * (-beta * t).exp();
        for &tj in &times[..i] {
            lambda += alpha * (-beta * (t - tj)).exp();
        }
        ll += lambda.ln();
    }
    let mut compensator = mu * big_t + (x0 - mu) * (1.0 - (-beta * big_t).exp()) / beta;
    for &tj in &times[..times.len() - 1] {
        compensator += alpha / beta * (1.0 - (-beta * (big_t - tj)).exp());
    }
    ll - compensator
}

fn hawkes_equivalence() -> Outcome {
    let (mu, alpha, beta) = (0.5, 0.7, 1.1);
    let m = se(mu, alpha, beta, ResidualSpec::exponential());
    let x0 = m.default_initial_state().value();
    let d = simulate(&m, 10_000, 2, None).unwrap().series.durations;
    let ours = loglik(&m, &d, x0).unwrap();
    let direct = hawkes_direct(mu, alpha, beta, x0, &d);
    let per_obs = (ours - direct).abs() / d.len() as f64;
    (per_obs <= 1e-8, format!("loglik {ours:.6}, direct {direct:.6}, |diff|/n {per_obs:.2e}"))
}

fn parameter_recovery() -> Outcome {
    let cases = [
        (
            DynamicsFamily::Se,
            se(0.2712, 0.0939, 0.1068, ResidualSpec::gamma(0.3511).unwrap()),
        ),
        (
            DynamicsFamily::Acd,
            ModelSpec::new(
                DynamicsSpec::Acd { b0: 9.05e-5, a: 0.0476, b1: 0.9523 },
                ResidualSpec::exponential(),
            )
            .unwrap(),
        ),
        (
            DynamicsFamily::LogAcd,
            ModelSpec::new(
                DynamicsSpec::LogAcd { b0: 0.0270, a: 0.0212, b1: 0.9664 },
                ResidualSpec::gamma(0.3440).unwrap(),
            )
            .unwrap(),
        ),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (i, (family, truth)) in cases.into_iter().enumerate() {
        let sim = simulate_with(
            &truth,
            50_000,
            300 + i as u64,
            SimulationOptions { initial_state: None, burn_in: 1_000 },
        )
        .unwrap();
        let res = fit(family, truth.residual.family(), &sim.series.durations, &FitConfig::default());
        let res = match res {
            Ok(r) => r,
            Err(e) => {
                ok = false;
                notes.push(format!("{}: fit failed: {e}", truth.label()));
                continue;
            }
        };
        let true_params: Vec<f64> = truth.dynamics.params().into_iter().chain(truth.residual.params()).collect();
        let all_restarts = res.restarts.iter().all(|r| r.converged);
        let worst = match &res.std_errors {
            Some(se) => true_params
                .iter()
                .zip(&res.params)
                .zip(se)
                .map(|((t, p), s)| (p - t).abs() / s)
                .fold(0.0, f64::max),
            None => f64::INFINITY,
        };
        ok &= worst <= 3.0 && all_restarts;
        notes.push(format!(
            "{}: max |err|/se {worst:.2}, restarts converged {}/{}",
            truth.label(),
            res.restarts.iter().filter(|r| r.converged).count(),
            res.restarts.len()
        ));
    }
    (ok, notes.join("; "))
}

fn twelve_models() -> Vec<ModelSpec> {
    let dynamics = [
        DynamicsSpec::Se { mu: 1.0, alpha: 0.07, beta: 0.1 },
        DynamicsSpec::Acd { b0: 0.05, a: 0.1, b1: 0.85 },
        DynamicsSpec::LogAcd { b0: 0.02, a: 0.05, b1: 0.9 },
    ];
    dynamics
        .into_iter()
        .flat_map(|d| families().into_iter().map(move |r| ModelSpec::new(d, r).unwrap()))
        .collect()
}

fn residual_calibration() -> Outcome {
    let n = 10_000;
    let critical = 1.36 / (n as f64).sqrt();
    let mut ok = true;
    let mut worst = (0.0f64, 0.0f64);
    let mut failing = Vec::new();
    for (i, m) in twelve_models().iter().enumerate() {
        let d = simulate(m, n, 400 + i as u64, None).unwrap().series.durations;
        let e = exp_residuals(m, &d, m.default_initial_state().value()).unwrap().values;
        let ks = ks_statistic(&e).unwrap();
        let w = wasserstein_msq(&e).unwrap();
        worst = (worst.0.max(ks), worst.1.max(w));
        if !(ks < critical && w < 1e-3) {
            ok = false;
            failing.push(format!("{} (KS {ks:.4}, W {w:.2e})", m.label()));
        }
    }
    let mut note = format!("12 models, max KS {:.4} vs {critical:.4}, max W {:.2e}", worst.0, worst.1);
    if !failing.is_empty() {
        note.push_str(&format!("; failing: {}", failing.join(", ")));
    }
    (ok, note)
}

fn in_sample_gof(family: ResidualFamily, durations: &[f64]) -> Result<(f64, f64), String> {
    let r = fit(DynamicsFamily::Se, family, durations, &FitConfig::default()).map_err(|e| e.to_string())?;
    let m = r.process_model().unwrap();
    let e = exp_residuals(m, durations, m.default_initial_state().value())
        .map_err(|e| e.to_string())?
        .values;
    Ok((ks_statistic(&e).unwrap(), wasserstein_msq(&e).unwrap()))
}

fn misspecification_ordering() -> Outcome {
    let truth = se(1.0, 0.07, 0.1, ResidualSpec::burr(5.44, 0.507).unwrap());
    let reps = 20;
    let mut wins = 0;
    let mut errors = 0;
    for seed in 0..reps {
        let d = simulate_with(
            &truth,
            5_000,
            500 + seed,
            SimulationOptions { initial_state: None, burn_in: 1_000 },
        )
        .unwrap()
        .series
        .durations;
        match (in_sample_gof(ResidualFamily::Exponential, &d), in_sample_gof(ResidualFamily::Burr, &d)) {
            (Ok((ks_exp, w_exp)), Ok((ks_burr, w_burr))) => {
                if ks_exp > ks_burr && w_exp > w_burr {
                    wins += 1;
                }
            }
            _ => errors += 1,
        }
    }
    let ok = wins * 100 >= 95 * reps;
    (ok, format!("SE-Exp worse on both KS and W in {wins}/{reps} replications ({errors} fit errors)"))
}

fn acf_clustering() -> Outcome {
    let reps = 20;
    let mut wins = 0;
    let mut wins_sum = 0;
    let mut gap = 0.0;
    for seed in 0..reps {
        let acf = |alpha: f64| {
            let m = se(1.0, alpha, 0.1, ResidualSpec::gamma(0.35).unwrap());
            let d = simulate_with(&m, 200_000, 600 + seed, SimulationOptions { initial_state: None, burn_in: 1_000 })
                .unwrap()
                .series
                .durations;
            sample_acf(&d, 50).unwrap()
        };
        let (hi, lo) = (acf(0.095), acf(0.07));
        gap += (hi[1] - lo[1]) / reps as f64;
        if hi[1] > lo[1] {
            wins += 1;
        }
        // slower decay shows up in the accumulated ACF; reported only
        if hi[1..].iter().sum::<f64>() > lo[1..].iter().sum::<f64>() {
            wins_sum += 1;
        }
    }
    (
        wins * 100 >= 95 * reps,
        format!(
            "rho(1) higher at alpha = 0.095 in {wins}/{reps} seeds, mean gap {gap:.4}; sum of rho(1..50) higher in {wins_sum}/{reps}"
        ),
    )
}

/// KS distance between sorted draws and the CDF obtained by integrating the
/// transition density, plus the total mass. Segments are integrated in
/// endpoint-distance coordinates.
fn ks_by_integration(m: &ModelSpec, x: f64, mut draws: Vec<f64>) -> (f64, f64) {
    let DynamicsSpec::Se { mu, alpha, .. } = m.dynamics else { unreachable!() };
    let top = x + alpha;
    draws.sort_by(f64::total_cmp);
    // ∫ over [a, b] ⊂ [μ, x + α]
    let seg = |a: f64, b: f64| {
        if b <= a {
            return 0.0;
        }
        let (from_mu, to_top) = (a - mu, top - b);
        let f = |_: f64, da: f64, db: f64| m.transition_density_gaps(from_mu + da, to_top + db, x).unwrap();
        // the KS distance only needs the CDF to ~1e-5, so retry coarser
        tanh_sinh(f, a, b, 1e-10)
            .or_else(|_| tanh_sinh(f, a, b, 1e-7))
            .map(|q| q.value)
            .unwrap_or(f64::NAN)
    };
    let n = draws.len() as f64;
    let mut cdf = seg(mu, draws[0]);
    let mut ks: f64 = 0.0;
    for i in 0..draws.len() {
        if i > 0 {
            cdf += seg(draws[i - 1], draws[i]);
        }
        ks = ks.max((i as f64 + 1.0) / n - cdf).max(cdf - i as f64 / n);
    }
    let total = cdf + seg(*draws.last().unwrap(), top);
    if !total.is_finite() {
        return (f64::NAN, total);
    }
    (ks, total)
}

fn transition_density() -> Outcome {
    let configs = [
        (se(1.0, 0.07, 0.1, ResidualSpec::gamma(0.35).unwrap()), 1.5),
        (se(0.5, 0.8, 1.2, ResidualSpec::exponential()), 2.0),
        (se(0.2712, 0.0939, 0.1068, ResidualSpec::burr(5.44, 0.507).unwrap()), 0.4),
    ];
    let n = 100_000;
    let critical = 1.63 / (n as f64).sqrt();
    let mut ok = true;
    let mut notes = Vec::new();
    for (i, (m, x)) in configs.iter().enumerate() {
        let DynamicsSpec::Se { mu, alpha, .. } = m.dynamics else { unreachable!() };
        let jump = x + alpha - mu;
        let mass = tanh_sinh(
            |_, da, db| m.transition_density_gaps(da, db, *x).unwrap(),
            0.0,
            jump,
            1e-10,
        )
        .map(|q| q.value)
        .unwrap_or(f64::NAN);
        let mut rng = ChaCha8Rng::seed_from_u64(700 + i as u64);
        let draws: Vec<f64> = (0..n)
            .map(|_| {
                let eps = m.residual.sample(&mut rng);
                let tau = m.dynamics.phi_inverse(eps, *x).unwrap();
                m.dynamics.psi(tau, *x)
            })
            .collect();
        let (ks, total) = ks_by_integration(m, *x, draws);
        ok &= (mass - 1.0).abs() <= 1e-6 && (total - 1.0).abs() <= 1e-6 && ks < critical;
        notes.push(format!("{}: mass-1 {:.1e}, KS {ks:.4}", m.label(), mass - 1.0));
    }
    (ok, format!("{} (KS bound {critical:.4})", notes.join("; ")))
}

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn appendix_bounds() -> Outcome {
    let m = se(1.0, 0.07, 0.1, ResidualSpec::exponential());
    let delta0 = 1e-2;
    let ys = logspace(1e-3, 1e3, 100);
    let xs = logspace(1.0, 100.0, 100);
    let mut ok = true;
    let mut min_margin = f64::INFINITY;
    let mut min_convexity = f64::INFINITY;
    let mut max_gap: f64 = 0.0;
    for &x in &xs {
        let bound = PhiInverseBound::new(&m, x, delta0).unwrap();
        let inv: Vec<f64> = ys.iter().map(|&y| m.dynamics.phi_inverse(y, x).unwrap()).collect();
        for (y, t) in ys.iter().zip(&inv) {
            let margin = bound.eval(*y) - t;
            min_margin = min_margin.min(margin / t.max(1.0));
            ok &= margin >= -1e-9 * t.max(1.0);
        }
        if bound.y0 > 0.0 {
            let t0 = m.dynamics.phi_inverse(bound.y0, x).unwrap();
            let gap = bound.asymptotic_branch(bound.y0) - t0;
            // U1 meets Φ⁻¹ at y0 and U2 lies at most delta0 above it there
            ok &= (bound.eval(bound.y0) - t0).abs() <= 1e-9 * t0.max(1.0) && gap.abs() <= delta0 + 1e-12;
            max_gap = max_gap.max(gap.abs());
        }
        for i in 1..ys.len() - 1 {
            let s1 = (inv[i] - inv[i - 1]) / (ys[i] - ys[i - 1]);
            let s2 = (inv[i + 1] - inv[i]) / (ys[i + 1] - ys[i]);
            let second = 2.0 * (s2 - s1) / (ys[i + 1] - ys[i - 1]);
            min_convexity = min_convexity.min(second);
            ok &= second >= -1e-9;
        }
    }
    (
        ok,
        format!(
            "min relative margin U - inverse {min_margin:.2e}, max gap at y0 {max_gap:.2e} (delta0 {delta0}), min second difference {min_convexity:.2e}"
        ),
    )
}

fn forecast_integral() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let n = 10_000_000;
    let cases = [
        (se(1.0, 0.07, 0.1, ResidualSpec::gamma(0.35).unwrap()), 1.5),
        (
            ModelSpec::new(DynamicsSpec::LogAci { b0: 0.0, a: 0.1, b1: 0.6 }, ResidualSpec::exponential()).unwrap(),
            2.0,
        ),
    ];
    for (i, (m, x)) in cases.iter().enumerate() {
        let q = expected_duration(m, LatentState::new(*x).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(900 + i as u64);
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let tau = m.dynamics.phi_inverse(m.residual.sample(&mut rng), *x).unwrap();
            s += tau;
            s2 += tau * tau;
        }
        let mean = s / n as f64;
        let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        let z = (q - mean).abs() / se;
        ok &= z <= 3.0;
        notes.push(format!("{}: quadrature {q:.6}, MC {mean:.6} (|z| {z:.2})", m.label()));
    }
    let mut worst: f64 = 0.0;
    for r in families() {
        for d in [
            DynamicsSpec::Acd { b0: 0.1, a: 0.1, b1: 0.8 },
            DynamicsSpec::LogAcd { b0: 0.1, a: 0.1, b1: 0.8 },
        ] {
            let m = ModelSpec::new(d, r).unwrap();
            for x in [0.01, 0.7, 3.0, 250.0] {
                let e = expected_duration(&m, LatentState::new(x).unwrap()).unwrap();
                worst = worst.max((e - x * r.mean()).abs());
            }
        }
    }
    ok &= worst <= 1e-12;
    notes.push(format!("ACD/logACD max |E - state| {worst:.1e}"));
    (ok, notes.join("; "))
}

fn run_cli(args: &[&str], cwd: &Path) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_flexdur"))
        .args(args)
        .current_dir(cwd)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{} failed: {}", args[0], String::from_utf8_lossy(&out.stderr)))
    }
}

fn end_to_end() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    let steps: [&[&str]; 3] = [
        &["gen-demo", "--seed", "11", "--n", "30000", "--out-dir", "demo"],
        &["build-durations", "--events", "demo/events.csv", "--tick", "0.01", "--out-dir", "durations"],
        &[
            "backtest", "--data", "durations/durations.csv", "--model", "se-gamma", "--window", "5000",
            "--horizon", "100", "--step", "100", "--out-dir", "backtest",
        ],
    ];
    for step in steps {
        if let Err(e) = run_cli(step, cwd) {
            return (false, e);
        }
    }
    let records = match read_forecasts(cwd.join("backtest/forecasts_se-gamma.csv")) {
        Ok(r) => r,
        Err(e) => return (false, e.to_string()),
    };
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(cwd.join("backtest/report_se-gamma.json")).unwrap()).unwrap();
    let r2 = report["diagnostics"]["r_squared"].as_f64().unwrap_or(f64::NAN);
    let rrmse = report["diagnostics"]["rrmse"].as_f64().unwrap_or(f64::NAN);
    let base = report["baseline"]["rrmse"].as_f64().unwrap_or(f64::NAN);
    let metrics = cwd.join("backtest/metrics.csv").exists() && cwd.join("backtest/manifest.json").exists();
    let ok = records.len() == 25_000 && metrics && r2 > 0.0 && rrmse < base;
    (
        ok,
        format!("{} records, R2 {r2:.4}, rRMSE {rrmse:.4} vs baseline {base:.4}", records.len()),
    )
}

/// Random quotes on a 0.01 grid with one- or two-tick spreads.
fn random_quotes(rng: &mut ChaCha8Rng, rows: usize) -> Vec<LobEvent> {
    let mut bid = 10_000i64;
    let mut ask = 10_001i64;
    let mut t = 0.0;
    let mut out = Vec::with_capacity(rows);
    for _ in 0..rows {
        out.push(LobEvent {
            timestamp: t,
            best_bid: bid as f64 * 0.01,
            best_ask: ask as f64 * 0.01,
        });
        t += rng.random::<f64>() * 2.0;
        match rng.random_range(0..4) {
            0 if ask - bid > 1 => bid += 1,
            1 if ask - bid > 1 => ask -= 1,
            2 => {
                bid -= 1;
                ask -= rng.random_range(0..=1);
            }
            _ => {
                ask += 1;
                bid += rng.random_range(0..=1);
            }
        }
        if ask - bid > 2 {
            bid = ask - 2;
        }
    }
    out
}

fn duration_construction() -> Outcome {
    let mids = [0.0, 0.005, 0.0, 0.005, 0.01];
    let fixture: Vec<LobEvent> = mids
        .iter()
        .enumerate()
        .map(|(i, m)| LobEvent {
            timestamp: i as f64,
            best_bid: 100.0 + m - 0.005,
            best_ask: 100.0 + m + 0.005,
        })
        .collect();
    let events = build_durations(&fixture, 0.01).map(|d| d.series.len()).unwrap_or(0);
    let mut ok = events == 1;
    let mut rng = ChaCha8Rng::seed_from_u64(1_100);
    let mut checked = 0;
    for _ in 0..20 {
        let quotes = random_quotes(&mut rng, 1_000);
        let Ok(base) = build_durations(&quotes, 0.01) else { continue };
        checked += 1;
        let dt = rng.random::<f64>() * 1e3;
        let k = rng.random_range(-30i64..30) as f64 * 0.01;
        let shifted: Vec<LobEvent> = quotes
            .iter()
            .map(|q| LobEvent {
                timestamp: q.timestamp + dt,
                best_bid: q.best_bid + k,
                best_ask: q.best_ask + k,
            })
            .collect();
        match build_durations(&shifted, 0.01) {
            Ok(s) => {
                ok &= s.event_indices == base.event_indices
                    && s.series.durations.iter().zip(&base.series.durations).all(|(a, b)| (a - b).abs() < 1e-9);
            }
            Err(_) => ok = false,
        }
        let kept: Vec<LobEvent> = base.event_indices.iter().map(|&i| quotes[i]).collect();
        match build_durations(&kept, 0.01) {
            Ok(again) => ok &= again.series.durations == base.series.durations,
            Err(_) => ok = false,
        }
    }
    ok &= checked > 0;
    (ok, format!("fixture gives {events} event(s); {checked} random 1000-row fixtures shift-invariant and fixed"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("stationary mean", stationary_mean),
        ("Hawkes equivalence", hawkes_equivalence),
        ("parameter recovery", parameter_recovery),
        ("residual calibration", residual_calibration),
        ("misspecification ordering", misspecification_ordering),
        ("ACF clustering", acf_clustering),
        ("transition density", transition_density),
        ("inverse-compensator bounds", appendix_bounds),
        ("forecast integral", forecast_integral),
        ("end-to-end protocol", end_to_end),
        ("duration construction", duration_construction),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.iter().any(|f| *f == id || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let (ok, detail) = check();
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {id:>2} {}: {name}: {detail} [{:.1} s]",
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
