use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qwalk::transpiler::OptLevel;
use qwalk::walk::{CoinParams, DEFAULT_PERIOD_TOL, DEFAULT_T_MAX};
use qwalk_cli::config::parse_noise_file;
use qwalk_cli::run::{depth_csv, dump_circuit, run_depth_report, run_experiment, run_period_scan};
use qwalk_cli::{ConfigError, Dd, ExperimentConfig, ExperimentError};

#[derive(Parser)]
#[command(name = "qwalk", version, about = "Discrete-time quantum walks on cycle graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate t = 1..t_max and write CSV tables, SVG plots and a manifest.
    Run(Overrides),
    /// Period of a single-coin walk, strict and up to global phase.
    PeriodScan(PeriodArgs),
    /// Logical and native depth for t = 1..t_max.
    DepthReport(Overrides),
    /// Write the circuit for one step in the text format.
    DumpCircuit {
        #[command(flatten)]
        overrides: Overrides,
        /// Step count.
        #[arg(long)]
        t: usize,
        /// Transpile to native gates (with start times) first.
        #[arg(long)]
        native: bool,
    },
}

#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    shots: Option<u64>,
    /// File with a `[noise]` section or bare noise keys.
    #[arg(long)]
    noise: Option<PathBuf>,
    /// `none` or `xy4`.
    #[arg(long, value_parser = parse_dd)]
    dd: Option<Dd>,
    /// Optimization level: 0, 1 or 3.
    #[arg(long, value_parser = parse_opt)]
    opt: Option<OptLevel>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    cycle: Option<usize>,
    #[arg(long)]
    pattern: Option<String>,
    #[arg(long)]
    t_max: Option<usize>,
    /// `LABEL=r` or `LABEL=r,a,b`; repeatable.
    #[arg(long = "coin", value_parser = parse_labeled_coin)]
    coins: Vec<(String, CoinParams)>,
}

#[derive(Args)]
struct PeriodArgs {
    #[arg(long)]
    cycle: usize,
    /// `hadamard`, `r` or `r,a,b`.
    #[arg(long, default_value = "hadamard", value_parser = parse_coin)]
    coin: CoinParams,
    #[arg(long, default_value_t = DEFAULT_T_MAX)]
    t_max: u32,
    #[arg(long, default_value_t = DEFAULT_PERIOD_TOL)]
    tol: f64,
    /// Directory for `period.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_dd(s: &str) -> Result<Dd, String> {
    Dd::parse(s).ok_or_else(|| format!("expected none or xy4, got '{s}'"))
}

fn parse_opt(s: &str) -> Result<OptLevel, String> {
    s.parse::<u8>().ok().and_then(OptLevel::from_number).ok_or_else(|| format!("expected 0, 1 or 3, got '{s}'"))
}

fn parse_coin(s: &str) -> Result<CoinParams, String> {
    if s.eq_ignore_ascii_case("hadamard") {
        return Ok(CoinParams::hadamard());
    }
    let xs: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("bad coin '{s}': {e}"))?;
    let (r, a, b) = match xs[..] {
        [r] => (r, 0.0, 0.0),
        [r, a, b] => (r, a, b),
        _ => return Err(format!("expected r or r,a,b, got '{s}'")),
    };
    CoinParams::new(r, a, b).map_err(|e| e.to_string())
}

fn parse_labeled_coin(s: &str) -> Result<(String, CoinParams), String> {
    let (label, coin) = s.split_once('=').ok_or_else(|| format!("expected LABEL=r[,a,b], got '{s}'"))?;
    Ok((label.trim().to_string(), parse_coin(coin)?))
}

impl Overrides {
    fn resolve(&self) -> Result<ExperimentConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(p) = &self.noise {
            let text = std::fs::read_to_string(p)
                .map_err(|e| ConfigError::new("--noise", format!("cannot read {}: {e}", p.display())))?;
            cfg.noise = Some(parse_noise_file(&text)?);
        }
        if let Some(c) = self.cycle {
            cfg.cycle = c;
            if self.pattern.is_none() && self.config.is_none() && c == 3 {
                cfg.pattern = "A'A'B'B'".into();
            }
        }
        for (l, c) in &self.coins {
            cfg.coins.insert(l.clone(), *c);
        }
        macro_rules! set {
            ($($f:ident => $g:ident),*) => {$(if let Some(v) = self.$f.clone() { cfg.$g = v; })*};
        }
        set!(seed => seed, shots => shots, dd => dd, opt => opt_level, out => outputs, pattern => pattern, t_max => t_max);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write_or_print(dir: Option<&Path>, name: &str, body: &str) -> Result<(), ExperimentError> {
    match dir {
        None => print!("{body}"),
        Some(d) => {
            std::fs::create_dir_all(d).map_err(|e| ExperimentError::io(d, e))?;
            let p = d.join(name);
            std::fs::write(&p, body).map_err(|e| ExperimentError::io(&p, e))?;
            println!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn execute(cmd: Command) -> Result<(), ExperimentError> {
    match cmd {
        Command::Run(o) => {
            let cfg = o.resolve()?;
            let bundle = run_experiment(&cfg)?;
            for f in &bundle.files {
                println!("wrote {}", f.display());
            }
        }
        Command::PeriodScan(a) => {
            if !(3..=64).contains(&a.cycle) {
                return Err(ConfigError::new("--cycle", format!("expected 3..=64, got {}", a.cycle)).into());
            }
            let scan = run_period_scan(a.cycle, a.coin, a.t_max, a.tol)?;
            print!("{}", scan.summary());
            if let Some(d) = &a.out {
                write_or_print(Some(d), "period.csv", &scan.to_csv())?;
            }
        }
        Command::DepthReport(o) => {
            let cfg = o.resolve()?;
            let rows = run_depth_report(cfg.cycle, &cfg.schedule()?, cfg.t_max, cfg.opt_level)?;
            write_or_print(o.out.as_deref(), "depth.csv", &depth_csv(&rows))?;
        }
        Command::DumpCircuit { overrides, t, native } => {
            let cfg = overrides.resolve()?;
            let text = dump_circuit(&cfg, t, native)?;
            let name = format!("circuit_{}cycle_t{t}{}.txt", cfg.cycle, if native { "_native" } else { "" });
            write_or_print(overrides.out.as_deref(), &name, &text)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
