use std::path::{Path, PathBuf};

use flexdur::data_io::{self, deseasonalize, read_events, read_factors, read_series};
use flexdur::diagnostics::{
    descriptive_stats, diagnostics_report, exp_residuals, forecast_metrics_from, ks_statistic,
    pp_pairs, pp_points, wasserstein_msq, RESIDUAL_CAP,
};
use flexdur::estimate::{fit_model, loglik, FitConfig, FitResult, FittedModel, ModelChoice};
use flexdur::fi_logacd::{innovations, FiFilter, FiLogAcdSpec};
use flexdur::forecast::{expected_duration, filter_states, rolling_backtest, RollingConfig};
use flexdur::process::{DynamicsFamily, DynamicsSpec, LatentState, ModelSpec};
use flexdur::residual::{ResidualFamily, ResidualSpec};
use flexdur::simulate::{sample_acf, simulate_with, SimulationOptions, DEFAULT_BURN_IN};
use flexdur::special::{normal_cdf, normal_sf};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::Settings;
use crate::demo::quotes_from_durations;
use crate::error::CliError;
use crate::output::{cell, Run};
use crate::{
    BacktestArgs, BuildArgs, DemoArgs, DescribeArgs, DiagnoseArgs, FitArgs, FitFlags, ModelParams,
    SimulateArgs,
};

const DEFAULT_ACF_LAGS: usize = 20;

fn out_dir(settings: &mut Settings, flag: Option<PathBuf>) -> Result<PathBuf, CliError> {
    settings.get("out_dir", flag, PathBuf::from("out"))
}

fn warn(message: &str) {
    eprintln!("{}", json!({ "warning": message }));
}

fn parse<T>(text: &str) -> Result<T, CliError>
where
    T: std::str::FromStr<Err = flexdur::Error>,
{
    text.parse::<T>().map_err(CliError::from)
}

fn fit_config(settings: &mut Settings, f: FitFlags) -> Result<FitConfig, CliError> {
    let d = FitConfig::default();
    let config = FitConfig {
        tolerance: settings.get("tolerance", f.tolerance, d.tolerance)?,
        max_iterations: settings.get("max_iterations", f.max_iterations, d.max_iterations)?,
        restarts: settings.get("restarts", f.restarts, d.restarts)?,
        truncation_lag: settings.get("truncation_lag", f.truncation_lag, d.truncation_lag)?,
        seed: settings.get("seed", f.seed, d.seed)?,
    };
    config.validate()?;
    Ok(config)
}

fn model_list(text: &str) -> Result<Vec<ModelChoice>, CliError> {
    if text.trim().eq_ignore_ascii_case("all") {
        return Ok(ModelChoice::all());
    }
    let mut out = Vec::new();
    for part in text.split(',').filter(|s| !s.trim().is_empty()) {
        let choice: ModelChoice = parse(part)?;
        if !out.contains(&choice) {
            out.push(choice);
        }
    }
    if out.is_empty() {
        return Err(CliError::usage("--model names no model"));
    }
    Ok(out)
}

fn load_durations(path: &Path) -> Result<Vec<f64>, CliError> {
    if !path.exists() {
        return Err(CliError::usage(format!("input file {} does not exist", path.display())));
    }
    Ok(read_series(path)?.durations)
}

/// Resolves the named parameters of one family from flags and config.
fn family_params(
    settings: &mut Settings,
    names: &[&str],
    p: &ModelParams,
    defaults: &[(&str, f64)],
) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::with_capacity(names.len());
    for &name in names {
        let flag = match name {
            "mu" => p.mu,
            "alpha" => p.alpha,
            "beta" => p.beta,
            "b0" => p.b0,
            "a" => p.a,
            "b1" => p.b1,
            "kappa" => p.kappa,
            "d" => p.d,
            "p" => p.p,
            "s1" => p.s1,
            "s2" => p.s2,
            _ => None,
        };
        let v = match defaults.iter().find(|(n, _)| *n == name) {
            Some(&(_, d)) => settings.get(name, flag, d)?,
            None => settings.require(name, flag)?,
        };
        out.push(v);
    }
    Ok(out)
}

fn build_model(
    settings: &mut Settings,
    dynamics: DynamicsFamily,
    residual: ResidualFamily,
    p: &ModelParams,
    defaults: &[(&str, f64)],
    require_stable: bool,
) -> Result<ModelSpec, CliError> {
    let dp = family_params(settings, dynamics.param_names(), p, defaults)?;
    let rp = family_params(settings, residual.param_names(), p, defaults)?;
    let dynamics = DynamicsSpec::from_params(dynamics, &dp)?;
    if require_stable && !dynamics.check_stability().stable {
        let condition = match dynamics {
            DynamicsSpec::Se { alpha, beta, .. } => {
                format!("SE stationarity requires alpha < beta, got alpha = {alpha}, beta = {beta}")
            }
            DynamicsSpec::LogAci { b1, .. } => format!("logACI stationarity requires |b1| < 1, got {b1}"),
            _ => "parameters violate the stationarity condition".to_string(),
        };
        return Err(CliError::usage(condition));
    }
    let residual = ResidualSpec::from_params(residual, &rp)?;
    Ok(ModelSpec::new(dynamics, residual)?)
}

pub fn simulate(a: SimulateArgs, settings: &mut Settings) -> Result<(), CliError> {
    let dynamics: DynamicsFamily = parse(&settings.require::<String>("dynamics", a.dynamics)?)?;
    let residual: ResidualFamily = parse(&settings.get("residual", a.residual, "exp".to_string())?)?;
    let require_stable = a.require_stable
        || settings.get::<bool>("require_stable", None, false)?;
    let model = build_model(settings, dynamics, residual, &a.params, &[], require_stable)?;
    let n: usize = settings.require("n", a.n)?;
    let seed = settings.get("seed", a.seed, 0u64)?;
    let burn_in = settings.get("burn_in", a.burn_in, DEFAULT_BURN_IN)?;
    let initial_state = settings
        .opt("initial_state", a.initial_state)?
        .map(LatentState::new)
        .transpose()?;
    let dir = out_dir(settings, a.out_dir)?;

    let mut run = Run::new("simulate", &dir)?;
    run.seed("seed", seed);
    let sim = simulate_with(&model, n, seed, SimulationOptions { initial_state, burn_in })?;
    for w in &sim.warnings {
        warn(w);
    }
    let path = run.output("series.csv");
    data_io::write_series(&path, &sim.series)?;
    let mean = sim.series.durations.iter().sum::<f64>() / n as f64;
    println!("{}: {n} durations, mean {mean:.6} -> {}", model.label(), path.display());
    run.finish(
        settings,
        json!({ "model": model, "warnings": sim.warnings, "sample_mean": mean }),
    )
}

/// Contents of `fits.json`.
#[derive(Debug, Serialize, Deserialize)]
struct FitSet {
    fits: Vec<FitResult>,
    #[serde(default)]
    failures: Vec<FitFailure>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FitFailure {
    model: String,
    error: String,
}

fn fit_rows(fits: &[FitResult]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for f in fits {
        let se = f.std_errors.as_ref();
        for (i, (name, v)) in f.param_names.iter().zip(&f.params).enumerate() {
            let s = se.map_or_else(|| "NA".to_string(), |s| s[i].to_string());
            rows.push(vec![cell(&f.label), name.clone(), v.to_string(), s]);
        }
        rows.push(vec![cell(&f.label), "loglik".into(), f.loglik.to_string(), "NA".into()]);
        rows.push(vec![cell(&f.label), "n_obs".into(), f.n_obs.to_string(), "NA".into()]);
        rows.push(vec![
            cell(&f.label),
            "converged".into(),
            u8::from(f.converged).to_string(),
            "NA".into(),
        ]);
    }
    rows
}

pub fn fit(a: FitArgs, settings: &mut Settings) -> Result<(), CliError> {
    let data: PathBuf = settings.require("data", a.data)?;
    let models = model_list(&settings.get("model", a.model, "se-gamma".to_string())?)?;
    let config = fit_config(settings, a.fit)?;
    let dir = out_dir(settings, a.out_dir)?;
    let durations = load_durations(&data)?;

    let mut run = Run::new("fit", &dir)?;
    run.seed("seed", config.seed);
    run.input(&data);
    let mut fits = Vec::new();
    let mut failures = Vec::new();
    for &choice in &models {
        match fit_model(choice, &durations, &config) {
            Ok(f) => {
                if !f.converged {
                    warn(&format!(
                        "{}: optimizer stopped with gradient norm {:.3e} above tolerance",
                        f.label, f.final_gradient_norm
                    ));
                }
                println!("{:<14} loglik {:>16.4}  converged {}", f.label, f.loglik, f.converged);
                fits.push(f);
            }
            Err(e) if models.len() > 1 => {
                warn(&format!("{}: {e}", choice.label()));
                failures.push(FitFailure {
                    model: choice.label(),
                    error: e.to_string(),
                });
            }
            Err(e) => return Err(e.into()),
        }
    }
    if fits.is_empty() {
        return Err(CliError::usage("no model could be fitted"));
    }
    if models.len() == 1 {
        run.write_json("fit.json", &fits[0])?;
    } else {
        run.write_json("fits.json", &FitSet { fits: fits.clone(), failures })?;
    }
    run.write_csv("table.csv", &["model", "parameter", "estimate", "std_error"], &fit_rows(&fits))?;
    run.finish(settings, json!({ "models": models.iter().map(|m| m.name()).collect::<Vec<_>>() }))
}

fn metric_row(name: &str, values: &[f64]) -> Vec<String> {
    std::iter::once(name.to_string())
        .chain(values.iter().map(|v| v.to_string()))
        .collect()
}

pub fn backtest(a: BacktestArgs, settings: &mut Settings) -> Result<(), CliError> {
    let data: PathBuf = settings.require("data", a.data)?;
    let models = model_list(&settings.get("model", a.model, "se-gamma".to_string())?)?;
    let d = RollingConfig::default();
    let rolling = RollingConfig {
        window: settings.get("window", a.window, d.window)?,
        horizon: settings.get("horizon", a.horizon, d.horizon)?,
        step: settings.get("step", a.step, d.step)?,
    };
    rolling.validate()?;
    let acf_lags = settings.get("acf_lags", a.acf_lags, DEFAULT_ACF_LAGS)?;
    let config = fit_config(settings, a.fit)?;
    let dir = out_dir(settings, a.out_dir)?;
    let durations = load_durations(&data)?;

    let mut run = Run::new("backtest", &dir)?;
    run.seed("seed", config.seed);
    run.input(&data);
    let mut table = Vec::new();
    for &choice in &models {
        let bt = rolling_backtest(&durations, choice, &rolling, &config)?;
        let report = diagnostics_report(&bt.records, &bt.residuals, acf_lags)?;
        let realized: Vec<f64> = bt.records.iter().map(|r| r.realized).collect();
        let baseline = forecast_metrics_from(&bt.baseline, &realized)?;
        let clamped = bt.residuals.iter().filter(|&&e| e >= RESIDUAL_CAP).count();
        if clamped > 0 {
            warn(&format!("{}: {clamped} residual(s) clamped at -ln(1e-16)", choice.label()));
        }
        let unconverged = bt.windows.len() - bt.converged_windows();
        if unconverged > 0 {
            warn(&format!(
                "{}: {unconverged} of {} window fits did not reach the gradient tolerance",
                choice.label(),
                bt.windows.len()
            ));
        }
        let name = choice.name();
        let path = run.output(&format!("forecasts_{name}.csv"));
        data_io::write_forecasts(&path, &bt.records)?;
        run.write_json(
            &format!("report_{name}.json"),
            &json!({
                "model": choice.label(),
                "diagnostics": report,
                "baseline": baseline,
                "residuals_clamped": clamped,
                "windows": bt.windows,
                "converged_windows": bt.converged_windows(),
            }),
        )?;
        println!(
            "{:<14} rRMSE {:.4}  R2 {:.4}  KS {:.4}  W {:.3e}  ({} forecasts; baseline rRMSE {:.4})",
            choice.label(),
            report.rrmse,
            report.r_squared,
            report.ks,
            report.wasserstein,
            report.n_forecasts,
            baseline.rrmse
        );
        let mut row = metric_row(
            &choice.label(),
            &[report.rrmse, report.r_squared, report.ks, report.wasserstein],
        );
        row.extend([
            report.n_forecasts.to_string(),
            baseline.rrmse.to_string(),
            baseline.r_squared.to_string(),
            bt.converged_windows().to_string(),
            bt.windows.len().to_string(),
        ]);
        table.push(row);
    }
    run.write_csv(
        "metrics.csv",
        &[
            "model",
            "rrmse",
            "r_squared",
            "ks",
            "wasserstein",
            "n_forecasts",
            "baseline_rrmse",
            "baseline_r_squared",
            "converged_windows",
            "windows",
        ],
        &table,
    )?;
    run.finish(settings, json!({ "rolling": rolling, "models": models.iter().map(|m| m.name()).collect::<Vec<_>>() }))
}

/// Reads `fit.json` or a `fits.json` set, picking `wanted` when given.
fn load_fit(path: &Path, wanted: Option<&str>) -> Result<FitResult, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read fit file {}: {e}", path.display())))?;
    let fits = match serde_json::from_str::<FitResult>(&text) {
        Ok(f) => vec![f],
        Err(_) => serde_json::from_str::<FitSet>(&text)?.fits,
    };
    let matches = |f: &FitResult, w: &str| {
        f.label.eq_ignore_ascii_case(w)
            || w.parse::<ModelChoice>().is_ok_and(|c| c.label() == f.label)
    };
    match wanted {
        Some(w) => fits
            .into_iter()
            .find(|f| matches(f, w))
            .ok_or_else(|| CliError::usage(format!("fit file has no model '{w}'"))),
        None if fits.len() == 1 => Ok(fits.into_iter().next().unwrap()),
        None => Err(CliError::usage("fit file holds several models; pick one with --model")),
    }
}

struct InSample {
    residuals: Vec<f64>,
    clamped: usize,
    pp: Vec<(f64, f64)>,
    predicted: Vec<f64>,
    states: Vec<f64>,
}

fn in_sample_process(model: &ModelSpec, durations: &[f64], x0: LatentState) -> Result<InSample, CliError> {
    let res = exp_residuals(model, durations, x0.value())?;
    let pp = pp_points(model, durations, x0.value())?;
    let path = filter_states(model, durations, x0)?;
    let states = &path[..durations.len()];
    let predicted = states
        .iter()
        .map(|&s| expected_duration(model, s))
        .collect::<flexdur::Result<Vec<_>>>()?;
    Ok(InSample {
        residuals: res.values,
        clamped: res.clamped,
        pp,
        predicted,
        states: states.iter().map(|s| s.value()).collect(),
    })
}

fn in_sample_fi(spec: &FiLogAcdSpec, durations: &[f64]) -> InSample {
    let ln_tau: Vec<f64> = durations.iter().map(|t| t.ln()).collect();
    let eps = innovations(spec, &ln_tau);
    let mut filter = FiFilter::new(*spec);
    let mut predicted = Vec::with_capacity(durations.len());
    let mut states = Vec::with_capacity(durations.len());
    for &l in &ln_tau {
        predicted.push(filter.forecast());
        states.push(filter.forecast_z().exp());
        filter.push(l);
    }
    let mut clamped = 0;
    let residuals = eps
        .iter()
        .map(|e| {
            let r = -normal_sf(e / spec.sigma).ln();
            if r.is_nan() || r >= RESIDUAL_CAP {
                clamped += 1;
                RESIDUAL_CAP
            } else {
                r
            }
        })
        .collect();
    let probs: Vec<f64> = eps.iter().map(|e| normal_cdf(e / spec.sigma)).collect();
    InSample {
        residuals,
        clamped,
        pp: pp_pairs(&probs),
        predicted,
        states,
    }
}

pub fn diagnose(a: DiagnoseArgs, settings: &mut Settings) -> Result<(), CliError> {
    let data: PathBuf = settings.require("data", a.data)?;
    let fit_path: PathBuf = settings.require("fit", a.fit)?;
    let wanted = settings.opt::<String>("model", a.model)?;
    let acf_lags = settings.get("acf_lags", a.acf_lags, DEFAULT_ACF_LAGS)?;
    let initial_state = settings.opt("initial_state", a.initial_state)?;
    let dir = out_dir(settings, a.out_dir)?;
    let durations = load_durations(&data)?;
    let fitted = load_fit(&fit_path, wanted.as_deref())?;

    let mut run = Run::new("diagnose", &dir)?;
    run.input(&data);
    run.input(&fit_path);
    let (ins, ll) = match &fitted.model {
        FittedModel::Process(m) => {
            let x0 = match initial_state {
                Some(v) => LatentState::new(v)?,
                None => m.default_initial_state(),
            };
            let ll = loglik(m, &durations, x0.value())?;
            (in_sample_process(m, &durations, x0)?, Some(ll))
        }
        FittedModel::FiLogAcd(spec) => (in_sample_fi(spec, &durations), None),
    };
    if ins.clamped > 0 {
        warn(&format!("{} residual(s) clamped at -ln(1e-16)", ins.clamped));
    }
    let ks = ks_statistic(&ins.residuals)?;
    let w = wasserstein_msq(&ins.residuals)?;
    let lag = acf_lags.min(ins.residuals.len().saturating_sub(1)).max(1);
    let acf = sample_acf(&ins.residuals, lag)?;
    let metrics = forecast_metrics_from(&ins.predicted, &durations)?;

    let pp_path = run.output("pp.csv");
    data_io::write_pairs(&pp_path, ("theoretical", "empirical"), &ins.pp)?;
    let rows: Vec<Vec<String>> = (0..durations.len())
        .map(|i| {
            vec![
                i.to_string(),
                durations[i].to_string(),
                ins.residuals[i].to_string(),
                ins.predicted[i].to_string(),
                ins.states[i].to_string(),
            ]
        })
        .collect();
    run.write_csv("residuals.csv", &["index", "duration", "residual", "predicted", "latent_state"], &rows)?;
    let acf_rows: Vec<Vec<String>> = acf
        .iter()
        .enumerate()
        .map(|(k, v)| vec![k.to_string(), v.to_string()])
        .collect();
    run.write_csv("acf.csv", &["lag", "acf"], &acf_rows)?;
    let bound = 1.36 / (durations.len() as f64).sqrt();
    run.write_json(
        "report.json",
        &json!({
            "model": fitted.label,
            "n": durations.len(),
            "loglik": ll,
            "ks": ks,
            "ks_critical_5pct": bound,
            "wasserstein": w,
            "rrmse": metrics.rrmse,
            "r_squared": metrics.r_squared,
            "residuals_clamped": ins.clamped,
            "residual_acf": acf,
        }),
    )?;
    println!("{}: KS {ks:.4} (5% bound {bound:.4})  W {w:.3e}  R2 {:.4}", fitted.label, metrics.r_squared);
    run.finish(settings, json!({ "model": fitted.label }))
}

pub fn describe(a: DescribeArgs, settings: &mut Settings) -> Result<(), CliError> {
    let data: PathBuf = settings.require("data", a.data)?;
    let dir = settings.opt("out_dir", a.out_dir)?;
    let durations = load_durations(&data)?;
    let stats = descriptive_stats(&durations)?;
    let rows = stats.rows();
    for (name, value) in &rows {
        println!("{},{value}", cell(name));
    }
    if let Some(dir) = dir {
        let mut run = Run::new("describe", &dir)?;
        run.input(&data);
        let csv: Vec<Vec<String>> = rows.iter().map(|(n, v)| vec![cell(n), v.clone()]).collect();
        run.write_csv("describe.csv", &["statistic", "value"], &csv)?;
        run.write_json("describe.json", &stats)?;
        run.finish(settings, json!({}))?;
    }
    Ok(())
}

pub fn build_durations(a: BuildArgs, settings: &mut Settings) -> Result<(), CliError> {
    let events_path: PathBuf = settings.require("events", a.events)?;
    let tick: f64 = settings.require("tick", a.tick)?;
    let factors_path = settings.opt::<PathBuf>("factors", a.factors)?;
    let dir = out_dir(settings, a.out_dir)?;
    if !events_path.exists() {
        return Err(CliError::usage(format!("input file {} does not exist", events_path.display())));
    }

    let mut run = Run::new("build-durations", &dir)?;
    run.input(&events_path);
    let events = read_events(&events_path)?;
    let mut series = data_io::build_durations(&events, tick)?;
    series.source = Some(events_path.display().to_string());
    if let Some(fp) = &factors_path {
        run.input(fp);
        series = deseasonalize(&series, &read_factors(fp)?)?;
    }
    if series.zero_durations_replaced > 0 {
        warn(&format!(
            "{} zero duration(s) replaced by {}",
            series.zero_durations_replaced,
            data_io::MIN_DURATION
        ));
    }
    let path = run.output("durations.csv");
    data_io::write_series(&path, &series.series)?;
    println!("{} events from {} quotes -> {}", series.series.len(), events.len(), path.display());
    run.finish(
        settings,
        json!({
            "origin_time": series.origin_time,
            "events": series.series.len(),
            "zero_durations_replaced": series.zero_durations_replaced,
            "deseasonalized": factors_path.is_some(),
        }),
    )
}


/// SE-Gamma estimates used as demo defaults.
const DEMO_DEFAULTS: [(&str, f64); 4] = [("mu", 0.2712), ("alpha", 0.0939), ("beta", 0.1068), ("kappa", 0.3511)];

pub fn gen_demo(a: DemoArgs, settings: &mut Settings) -> Result<(), CliError> {
    let seed = settings.get("seed", a.seed, 0u64)?;
    let n = settings.get("n", a.n, 30_000usize)?;
    let tick = settings.get("tick", a.tick, 0.01)?;
    let start_price = settings.get("start_price", a.start_price, 100.0)?;
    let model = build_model(
        settings,
        DynamicsFamily::Se,
        ResidualFamily::Gamma,
        &a.params,
        &DEMO_DEFAULTS,
        true,
    )?;
    let dir = out_dir(settings, a.out_dir)?;
    if !(tick > 0.0 && tick.is_finite() && start_price > 0.0) {
        return Err(CliError::usage("tick and start price must be positive"));
    }

    let mut run = Run::new("gen-demo", &dir)?;
    run.seed("seed", seed);
    let sim = simulate_with(
        &model,
        n,
        seed,
        SimulationOptions {
            initial_state: None,
            burn_in: DEFAULT_BURN_IN,
        },
    )?;
    let quotes = quotes_from_durations(&sim.series.durations, tick, start_price, seed.wrapping_add(1));
    let path = run.output("events.csv");
    data_io::write_events(&path, &quotes)?;
    let truth = run.output("true_series.csv");
    data_io::write_series(&truth, &sim.series)?;
    println!("{} quotes carrying {n} one-tick events -> {}", quotes.len(), path.display());
    run.finish(settings, json!({ "model": model, "tick": tick }))
}
