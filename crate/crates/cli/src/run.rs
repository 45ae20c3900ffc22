//! Experiment bundles, period scans, depth reports and circuit dumps.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use qwalk::circuit::{build_walk_circuit, depth_report, text::to_text, Circuit};
use qwalk::distribution::Distribution;
use qwalk::metrics::{fmt_real, hellinger_fidelity, FidelitySeries, NORMALIZATION_TOL};
use qwalk::simulator::{
    derive_seed, measure_positions, readout_distribution, run_exact, run_noisy_scheduled, DensityMatrix,
};
use qwalk::transpiler::{insert_dd, schedule, transpile, DdSequence, OptLevel, ScheduledCircuit};
use qwalk::walk::{
    find_period_eigen, find_period_power, initial_state, step_operator, CoinParams, CoinSchedule, Embedding,
    PeriodResult, PhaseMode,
};

use crate::config::{Dd, ExperimentConfig};
use crate::svg::{self, Chart, Series};
use crate::ExperimentError;

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub t: usize,
    pub exact: Distribution,
    pub sampled: Option<Distribution>,
    pub noisy: Option<Distribution>,
}

fn origin(d: &Distribution) -> Result<f64, ExperimentError> {
    Ok(d.probabilities(NORMALIZATION_TOL)?.get(&0).copied().unwrap_or(0.0))
}

impl StepResult {
    pub fn exact_origin(&self) -> Result<f64, ExperimentError> {
        origin(&self.exact)
    }
}

fn walk_circuit(cfg: &ExperimentConfig, sched: &CoinSchedule, t: usize) -> Result<Circuit, ExperimentError> {
    Ok(build_walk_circuit(cfg.cycle, sched, t)?)
}

/// Native circuit with timing under the configured (or default) durations,
/// XY4-filled when requested.
pub fn scheduled_native(cfg: &ExperimentConfig, c: &Circuit) -> Result<ScheduledCircuit, ExperimentError> {
    let durations = cfg.timing_model().durations();
    let sc = schedule(&transpile(c, cfg.opt_level)?, &durations)?;
    Ok(match cfg.dd {
        Dd::None => sc,
        Dd::Xy4 => insert_dd(&sc, DdSequence::Xy4, cfg.min_window(), &durations)?,
    })
}

fn run_step(cfg: &ExperimentConfig, sched: &CoinSchedule, t: usize) -> Result<StepResult, ExperimentError> {
    let c = walk_circuit(cfg, sched, t)?;
    let psi0 = initial_state(cfg.theta, cfg.phi, cfg.cycle, Embedding::Padded)?;
    let psi = run_exact(&c, &psi0)?;
    let exact = measure_positions(&psi, c.measured(), 0, 0)?;
    let sampled = match cfg.shots {
        0 => None,
        n => Some(measure_positions(&psi, c.measured(), n, derive_seed(cfg.seed, t as u64))?),
    };
    let noisy = match &cfg.noise {
        None => None,
        Some(nm) => {
            let sc = scheduled_native(cfg, &c)?;
            let rho = run_noisy_scheduled(&sc, &DensityMatrix::from_pure(&psi0), nm)?;
            Some(readout_distribution(&rho, c.measured(), nm)?)
        }
    };
    Ok(StepResult { t, exact, sampled, noisy })
}

/// Simulates t = 1..=t_max in parallel; results come back in step order.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Vec<StepResult>, ExperimentError> {
    cfg.validate()?;
    let sched = cfg.schedule()?;
    (1..=cfg.t_max).into_par_iter().map(|t| run_step(cfg, &sched, t)).collect()
}

pub fn probability_csv(steps: &[StepResult]) -> Result<String, ExperimentError> {
    let has_s = steps.iter().any(|s| s.sampled.is_some());
    let has_n = steps.iter().any(|s| s.noisy.is_some());
    let mut out = String::from("t,exact");
    if has_s {
        out.push_str(",sampled");
    }
    if has_n {
        out.push_str(",noisy");
    }
    out.push('\n');
    for s in steps {
        write!(out, "{},{}", s.t, fmt_real(s.exact_origin()?)).unwrap();
        for d in [&s.sampled, &s.noisy].into_iter().flatten() {
            write!(out, ",{}", fmt_real(origin(d)?)).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

/// Fidelity of each secondary series against the exact one.
pub fn fidelity_series(steps: &[StepResult]) -> Result<Vec<FidelitySeries>, ExperimentError> {
    let mut out = Vec::new();
    for (label, pick) in [
        ("sampled", (|s: &StepResult| s.sampled.clone()) as fn(&StepResult) -> Option<Distribution>),
        ("noisy", |s: &StepResult| s.noisy.clone()),
    ] {
        let mut ts = Vec::new();
        let mut vs = Vec::new();
        for s in steps {
            if let Some(d) = pick(s) {
                ts.push(s.t);
                vs.push(hellinger_fidelity(&d, &s.exact)?.clamp(0.0, 1.0));
            }
        }
        if !ts.is_empty() {
            out.push(FidelitySeries::new(ts, vs, (label.into(), "exact".into()))?);
        }
    }
    Ok(out)
}

pub fn fidelity_csv(series: &[FidelitySeries]) -> String {
    if series.is_empty() {
        return "# no sampled or noisy series\n".into();
    }
    series.iter().map(FidelitySeries::to_csv).collect::<Vec<_>>().join("\n")
}

/// Reads a user overlay: `t,value` rows, `#` comments and one header line
/// allowed.
pub fn read_overlay(path: &Path) -> Result<Vec<(f64, f64)>, ExperimentError> {
    let text = fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
    let mut pts = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split(',').map(str::trim);
        let parsed = (cols.next().map(str::parse::<f64>), cols.next().map(str::parse::<f64>));
        match parsed {
            (Some(Ok(t)), Some(Ok(v))) => pts.push((t, v)),
            _ if pts.is_empty() && i == 0 => {}
            _ => return Err(ExperimentError::Overlay(format!("{}:{}: bad row '{line}'", path.display(), i + 1))),
        }
    }
    Ok(pts)
}

fn probability_chart(
    cfg: &ExperimentConfig,
    steps: &[StepResult],
    overlays: &BTreeMap<String, Vec<(f64, f64)>>,
) -> Result<Chart, ExperimentError> {
    let mut series = vec![Series::new(
        "exact",
        steps.iter().map(|s| Ok((s.t as f64, s.exact_origin()?))).collect::<Result<_, ExperimentError>>()?,
    )];
    for (label, pick) in [
        ("sampled", (|s: &StepResult| s.sampled.as_ref()) as fn(&StepResult) -> Option<&Distribution>),
        ("noisy", |s: &StepResult| s.noisy.as_ref()),
    ] {
        let pts: Vec<(f64, f64)> = steps
            .iter()
            .filter_map(|s| pick(s).map(|d| Ok((s.t as f64, origin(d)?))))
            .collect::<Result<_, ExperimentError>>()?;
        if !pts.is_empty() {
            series.push(Series::new(label, pts));
        }
    }
    for (label, pts) in overlays {
        series.push(Series { dashed: true, ..Series::new(label.clone(), pts.clone()) });
    }
    Ok(Chart {
        title: format!("{}-cycle {}: probability at origin", cfg.cycle, cfg.pattern),
        x_label: "t".into(),
        y_label: "probability".into(),
        x_range: (0.0, cfg.t_max as f64),
        y_range: (0.0, 1.0),
        series,
    })
}

fn fidelity_chart(cfg: &ExperimentConfig, series: &[FidelitySeries]) -> Chart {
    let lo = series.iter().flat_map(|s| s.values()).copied().fold(1.0, f64::min);
    let y0 = if lo > 0.9 { ((lo - 0.005) * 100.0).floor() / 100.0 } else { 0.0 };
    Chart {
        title: format!("{}-cycle {}: Hellinger fidelity vs exact", cfg.cycle, cfg.pattern),
        x_label: "t".into(),
        y_label: "fidelity".into(),
        x_range: (0.0, cfg.t_max as f64),
        y_range: (y0.max(0.0), 1.0),
        series: series
            .iter()
            .map(|s| {
                Series::new(
                    s.labels().0,
                    s.steps().iter().zip(s.values()).map(|(&t, &v)| (t as f64, v)).collect(),
                )
            })
            .collect(),
    }
}

fn write(dir: &Path, name: &str, body: &str, files: &mut Vec<PathBuf>) -> Result<(), ExperimentError> {
    let p = dir.join(name);
    fs::write(&p, body).map_err(|e| ExperimentError::io(&p, e))?;
    files.push(p);
    Ok(())
}

fn manifest(cfg: &ExperimentConfig, command: &str, files: &[PathBuf]) -> String {
    let mut m = toml::Table::new();
    m.insert("command".into(), command.into());
    m.insert("qwalk_version".into(), qwalk::VERSION.into());
    m.insert("cli_version".into(), env!("CARGO_PKG_VERSION").into());
    m.insert("seed".into(), toml::Value::Integer(cfg.seed as i64));
    let names: Vec<toml::Value> = files
        .iter()
        .filter_map(|p| p.file_name())
        .map(|n| n.to_string_lossy().into_owned().into())
        .collect();
    m.insert("files".into(), toml::Value::Array(names));
    let mut root = cfg.to_table();
    root.insert("manifest".into(), toml::Value::Table(m));
    toml::to_string(&root).expect("manifest serializes")
}

pub const MANIFEST: &str = "manifest.toml";

#[derive(Debug, Clone)]
pub struct Bundle {
    pub steps: Vec<StepResult>,
    pub fidelity: Vec<FidelitySeries>,
    pub files: Vec<PathBuf>,
}

/// Runs the experiment and writes `probability.csv`, `fidelity.csv`, both
/// plots and the manifest into `cfg.outputs`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Bundle, ExperimentError> {
    cfg.validate()?;
    let overlays: BTreeMap<String, Vec<(f64, f64)>> = cfg
        .overlays
        .iter()
        .map(|(k, p)| Ok((k.clone(), read_overlay(p)?)))
        .collect::<Result<_, ExperimentError>>()?;
    let steps = simulate(cfg)?;
    let fidelity = fidelity_series(&steps)?;

    let dir = &cfg.outputs;
    fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
    let mut files = Vec::new();
    write(dir, "probability.csv", &probability_csv(&steps)?, &mut files)?;
    write(dir, "fidelity.csv", &fidelity_csv(&fidelity), &mut files)?;
    write(dir, "probability.svg", &svg::render(&probability_chart(cfg, &steps, &overlays)?), &mut files)?;
    write(dir, "fidelity.svg", &svg::render(&fidelity_chart(cfg, &fidelity)), &mut files)?;
    let body = manifest(cfg, "run", &files);
    write(dir, MANIFEST, &body, &mut files)?;
    Ok(Bundle { steps, fidelity, files })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeriodMethod {
    Power,
    Eigen,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodScan {
    pub cycle: usize,
    pub coin: CoinParams,
    pub rows: Vec<(PeriodMethod, PhaseMode, PeriodResult)>,
}

impl PeriodScan {
    /// The phase-insensitive power-method result.
    pub fn period(&self) -> Option<u32> {
        self.rows
            .iter()
            .find(|(m, p, _)| *m == PeriodMethod::Power && *p == PhaseMode::Insensitive)
            .and_then(|r| r.2.period)
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("# cycle={} coin={}\nmethod,mode,period,residual,bound\n", self.cycle, self.coin);
        for (m, p, r) in &self.rows {
            let period = r.period.map_or("none".to_string(), |t| t.to_string());
            writeln!(s, "{},{},{period},{:e},{}", method_name(*m), mode_name(*p), r.residual, r.bound).unwrap();
        }
        s
    }

    pub fn summary(&self) -> String {
        let mut s = format!("{}-cycle, coin {}\n", self.cycle, self.coin);
        for (m, p, r) in &self.rows {
            let period = r.period.map_or(format!("none up to {}", r.bound), |t| t.to_string());
            writeln!(s, "  {:<5} {:<11} period {period} (residual {:.2e})", method_name(*m), mode_name(*p), r.residual)
                .unwrap();
        }
        s
    }
}

fn method_name(m: PeriodMethod) -> &'static str {
    match m {
        PeriodMethod::Power => "power",
        PeriodMethod::Eigen => "eigen",
    }
}

fn mode_name(p: PhaseMode) -> &'static str {
    match p {
        PhaseMode::Strict => "strict",
        PhaseMode::Insensitive => "insensitive",
    }
}

/// Period of the single-coin step operator on the exact `2N` space, by both
/// finders, strict and up to global phase.
pub fn run_period_scan(cycle: usize, coin: CoinParams, t_max: u32, tol: f64) -> Result<PeriodScan, ExperimentError> {
    let u = step_operator(cycle, Embedding::Exact, &coin)?;
    let mut rows = Vec::new();
    for mode in [PhaseMode::Strict, PhaseMode::Insensitive] {
        rows.push((PeriodMethod::Power, mode, find_period_power(&u, t_max, tol, mode)?));
        rows.push((PeriodMethod::Eigen, mode, find_period_eigen(&u, t_max, tol, mode)?));
    }
    Ok(PeriodScan { cycle, coin, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DepthRow {
    pub t: usize,
    pub logical_depth: usize,
    pub native_depth: usize,
    pub count_1q: usize,
    pub count_2q: usize,
}

/// Logical and native depth for t = 1..=t_max.
pub fn run_depth_report(
    cycle: usize,
    sched: &CoinSchedule,
    t_max: usize,
    level: OptLevel,
) -> Result<Vec<DepthRow>, ExperimentError> {
    let sched = sched.with_length(t_max);
    (1..=t_max)
        .into_par_iter()
        .map(|t| {
            let c = build_walk_circuit(cycle, &sched, t)?;
            let native = depth_report(&transpile(&c, level)?);
            Ok(DepthRow {
                t,
                logical_depth: c.depth(),
                native_depth: native.depth,
                count_1q: native.counts_1q,
                count_2q: native.counts_2q,
            })
        })
        .collect()
}

pub fn depth_csv(rows: &[DepthRow]) -> String {
    let mut s = String::from("t,logical_depth,native_depth,count_1q,count_2q\n");
    for r in rows {
        writeln!(s, "{},{},{},{},{}", r.t, r.logical_depth, r.native_depth, r.count_1q, r.count_2q).unwrap();
    }
    s
}

/// Circuit text for step `t`: logical, or native with start times.
pub fn dump_circuit(cfg: &ExperimentConfig, t: usize, native: bool) -> Result<String, ExperimentError> {
    cfg.validate()?;
    let c = walk_circuit(cfg, &cfg.schedule()?.with_length(t.max(cfg.t_max)), t)?;
    if !native {
        return Ok(to_text(&c, None));
    }
    let sc = scheduled_native(cfg, &c)?;
    Ok(to_text(&sc.circuit, Some(&sc.start_times)))
}
