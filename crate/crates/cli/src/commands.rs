//! Command implementations behind the CLI surface.

use std::fs;
use std::path::Path;

use tradetail_core::tail::{self, ReportOptions, TimingModel};
use tradetail_core::{montecarlo, tailstat, ReflectedExponent, SampleBatch};

use crate::config::{RunConfig, ToleranceOverride};
use crate::report::{render_report, render_validation, ARTIFACT_VERSION};

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or invalid configuration; exit code 2.
    Config(String),
    /// Analysis or simulation failure; exit code 3.
    Analysis(String),
    /// Estimators disagreed with the analytic report; exit code 4.
    ValidationFailed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Analysis(_) => 3,
            CliError::ValidationFailed => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Analysis(m) => write!(f, "analysis error: {m}"),
            CliError::ValidationFailed => write!(f, "validation failed"),
        }
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    RunConfig::parse(&text).map_err(|e| CliError::Config(e.to_string()))
}

fn write_or_print(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| CliError::Analysis(format!("{}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn analyze_report(config: &RunConfig) -> Result<tradetail_core::TailReport, CliError> {
    let model = config
        .build_model()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let timing = config
        .build_timing()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let opts = ReportOptions {
        alpha_max: config.analysis.alpha_max,
        ..ReportOptions::default()
    };
    tail::analyze(&model, &timing, config.analysis.tail_side.to_core(), &opts)
        .map_err(|e| CliError::Analysis(e.to_string()))
}

pub fn cmd_analyze(config_path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let config = load_config(config_path)?;
    let report = analyze_report(&config)?;
    write_or_print(out, &render_report(&report, config.config_hash()))
}

fn run_configured_batch(
    config: &RunConfig,
    seed: Option<u64>,
    samples: Option<usize>,
) -> Result<SampleBatch, CliError> {
    let model = config
        .build_model()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let timing = config
        .build_timing()
        .map_err(|e| CliError::Config(e.to_string()))?;
    montecarlo::run_batch(
        &model,
        &timing,
        samples.unwrap_or(config.simulation.count),
        seed.unwrap_or(config.simulation.seed),
        config.simulation.streams,
        config.simulation.grid_step,
    )
    .map_err(|e| CliError::Analysis(e.to_string()))
}

fn render_samples(config: &RunConfig, batch: &SampleBatch) -> String {
    let mut out = String::with_capacity(batch.len() * 24 + 128);
    out.push_str(&format!(
        "# tradetail-samples version={} seed={} streams={} count={} model_hash={:#018x}\n",
        ARTIFACT_VERSION,
        batch.seed,
        batch.streams,
        batch.len(),
        config.model_hash(),
    ));
    out.push_str("x_t,trade_time,stream\n");
    let ranges = montecarlo::stream_ranges(batch.len(), batch.streams);
    for (stream, range) in ranges.into_iter().enumerate() {
        for i in range {
            out.push_str(&format!(
                "{},{},{}\n",
                batch.log_prices[i], batch.trade_times[i], stream
            ));
        }
    }
    out
}

pub fn cmd_simulate(
    config_path: &Path,
    out: &Path,
    seed: Option<u64>,
    samples: Option<usize>,
) -> Result<(), CliError> {
    let config = load_config(config_path)?;
    let batch = run_configured_batch(&config, seed, samples)?;
    let content = render_samples(&config, &batch);
    fs::write(out, content).map_err(|e| CliError::Analysis(format!("{}: {e}", out.display())))
}

pub fn cmd_validate(
    config_path: &Path,
    out: Option<&Path>,
    seed: Option<u64>,
    samples: Option<usize>,
    tolerance_json: Option<&str>,
) -> Result<(), CliError> {
    let config = load_config(config_path)?;
    let overrides = match tolerance_json {
        Some(text) => serde_json::from_str::<ToleranceOverride>(text)
            .map_err(|e| CliError::Config(format!("--tolerance-json: {e}")))?,
        None => ToleranceOverride::default(),
    };
    let tolerances = config.analysis.tolerances.merged(&overrides).to_core();

    let report = analyze_report(&config)?;
    println!(
        "analysis: side={} case={} alpha={:.6} correction_order={} scale={:.6} paretian_limit={}",
        report.tail_side,
        report.case,
        report.alpha,
        report.correction_order,
        report.scale,
        report
            .paretian_limit
            .map(|v| format!("{v:.6}"))
            .unwrap_or_else(|| "unavailable".into()),
    );

    let batch = run_configured_batch(&config, seed, samples)?;
    let summary = tailstat::validate(&report, &batch, &tolerances);
    print!("{}", render_validation(&summary));

    if let Some(path) = out {
        let curve = survival_curve(&report, &batch);
        fs::write(path, curve)
            .map_err(|e| CliError::Analysis(format!("{}: {e}", path.display())))?;
    }

    if summary.passed {
        Ok(())
    } else {
        Err(CliError::ValidationFailed)
    }
}

/// CSV of (threshold, threshold^alpha * empirical survival) over the tail.
fn survival_curve(report: &tradetail_core::TailReport, batch: &SampleBatch) -> String {
    let mut prices: Vec<f64> = match report.tail_side {
        tail::TailSide::Upper => batch.log_prices.iter().map(|x| x.exp()).collect(),
        tail::TailSide::Lower => batch.log_prices.iter().map(|x| (-x).exp()).collect(),
    };
    prices.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let n = prices.len();
    let mut out = String::from("y,y_pow_alpha_survival\n");
    let deep = (20.0 / n as f64).max(1e-7).ln();
    let shallow = 0.05f64.ln();
    let points = 200;
    for i in 0..points {
        let level = (deep + (shallow - deep) * i as f64 / (points - 1) as f64).exp();
        let rank = ((level * n as f64) as usize).clamp(1, n);
        let y = prices[rank - 1];
        if y <= 0.0 {
            continue;
        }
        let survival = rank as f64 / n as f64;
        out.push_str(&format!("{},{}\n", y, y.powf(report.alpha) * survival));
    }
    out
}

pub fn cmd_density(config_path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let config = load_config(config_path)?;
    let timing = config
        .build_timing()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut text = String::new();
    match &timing {
        TimingModel::Itm(itm) => {
            text.push_str("t,density\n");
            let specs: Vec<_> = (0..itm.type_count())
                .map(|j| itm.type_spec(j))
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::Analysis(e.to_string()))?;
            let horizon = specs
                .iter()
                .map(|s: &tradetail_core::ErlangSpec| s.quantile(0.999))
                .fold(0.0f64, f64::max);
            let points = 512;
            for i in 1..=points {
                let t = horizon * i as f64 / points as f64;
                let f: f64 = itm
                    .weights()
                    .iter()
                    .zip(&specs)
                    .map(|(&q, spec)| q * spec.density(t))
                    .sum();
                text.push_str(&format!("{t},{f}\n"));
            }
        }
        TimingModel::Iim(iim) => {
            text.push_str("t,probability\n");
            let step = config.simulation.grid_step;
            let n = iim.trade_count();
            // per-type pmf recursion: pmf(n) = p^n, then
            // pmf(t+1) = pmf(t) * (1-p) * t / (t - n + 1)
            let mut pmfs: Vec<f64> = iim
                .probabilities()
                .iter()
                .map(|&p| p.powi(n as i32))
                .collect();
            let mut cumulative = 0.0;
            let mut t = n as u64;
            while cumulative < 1.0 - 1e-9 && t < 1_000_000 {
                let mixture: f64 = iim
                    .weights()
                    .iter()
                    .zip(&pmfs)
                    .map(|(&q, &pm)| q * pm)
                    .sum();
                cumulative += mixture;
                text.push_str(&format!("{},{}\n", step * t as f64, mixture));
                for (pm, &p) in pmfs.iter_mut().zip(iim.probabilities()) {
                    *pm *= (1.0 - p) * t as f64 / (t + 1 - n as u64) as f64;
                }
                t += 1;
            }
        }
    }
    write_or_print(out, &text)
}

pub fn cmd_mgf(config_path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let config = load_config(config_path)?;
    let model = config
        .build_model()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let timing = config
        .build_timing()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let target = match &timing {
        TimingModel::Iim(t) => t.pole_target(),
        TimingModel::Itm(t) => tail::itm_classify(t).lambda_min,
    };
    let alpha_max = config.analysis.alpha_max;
    let upper = tradetail_core::solve_alpha(&model, target, alpha_max).unwrap_or(alpha_max);
    let lower = tradetail_core::solve_alpha(&ReflectedExponent(&model), target, alpha_max)
        .unwrap_or(alpha_max);

    let mut text = String::from("s,mgf\n");
    let points = 41;
    for i in 0..points {
        let s = -0.95 * lower + (0.95 * lower + 0.95 * upper) * i as f64 / (points - 1) as f64;
        if let Ok(v) = tail::trade_time_mgf(&model, &timing, s) {
            text.push_str(&format!("{s},{v}\n"));
        }
    }
    write_or_print(out, &text)
}
