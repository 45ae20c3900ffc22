//! Experiment configuration files.
//!
//! The format is TOML restricted to flat `key = value` lines under section
//! headers:
//!
//! ```toml
//! [walk]
//! cycle = 4
//! pattern = "AABB"
//! t_max = 25
//! theta = 0.0
//! phi = 0.0
//!
//! [coins]
//! A = 0.998489                 # r, with a = b = 0
//! B = [0.119545, 0.0, 0.0]     # r, a, b
//!
//! [run]
//! shots = 100000
//! seed = 7
//! opt_level = 3
//! dd = "none"                  # or "xy4"
//! outputs = "out"
//!
//! [noise]                      # optional; absent means no noisy run
//! p1 = 0.0002
//! t1 = 300.0
//!
//! [overlays]                   # optional user CSVs, `t,probability`
//! device = "hw/device.csv"
//! ```
//!
//! Every key is optional. Missing `[coins]` binds A, B, A' and B' to the
//! standard Parrondo coins. A `[manifest]` section is accepted and ignored,
//! so a run's manifest is itself a valid config.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::path::{Path, PathBuf};

use qwalk::simulator::NoiseModel;
use qwalk::transpiler::OptLevel;
use qwalk::walk::{parrondo_schedule, CoinParams, CoinSchedule};
use toml::{Table, Value};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// Dotted key, e.g. `run.shots`, or a section name.
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { field: field.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dd {
    #[default]
    None,
    Xy4,
}

impl Dd {
    pub fn parse(s: &str) -> Option<Dd> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Some(Dd::None),
            "xy4" => Some(Dd::Xy4),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Dd::None => "none",
            Dd::Xy4 => "xy4",
        }
    }
}

pub const CYCLES: [usize; 3] = [3, 4, 8];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub cycle: usize,
    pub pattern: String,
    pub coins: BTreeMap<String, CoinParams>,
    pub t_max: usize,
    /// Initial coin state angles.
    pub theta: f64,
    pub phi: f64,
    /// Zero disables the sampled series.
    pub shots: u64,
    pub seed: u64,
    pub opt_level: OptLevel,
    pub noise: Option<NoiseModel>,
    pub dd: Dd,
    /// Shortest idle window that receives DD pulses; `4·dur_1q` when unset.
    pub dd_min_window: Option<f64>,
    pub outputs: PathBuf,
    pub overlays: BTreeMap<String, PathBuf>,
}

/// A, B for the 4-cycle and A', B' for the 3-cycle.
pub fn standard_coins() -> BTreeMap<String, CoinParams> {
    [("A", 0.998489), ("B", 0.119545), ("A'", 0.264734), ("B'", 0.801571)]
        .into_iter()
        .map(|(l, r)| (l.to_string(), CoinParams::real(r).expect("valid r")))
        .collect()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            cycle: 4,
            pattern: "AABB".into(),
            coins: standard_coins(),
            t_max: 25,
            theta: 0.0,
            phi: 0.0,
            shots: 100_000,
            seed: 0,
            opt_level: OptLevel::L3,
            noise: None,
            dd: Dd::None,
            dd_min_window: None,
            outputs: PathBuf::from("out"),
            overlays: BTreeMap::new(),
        }
    }
}

fn type_name(v: &Value) -> &'static str {
    v.type_str()
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

/// Pulls typed keys out of one section and reports leftovers as unknown.
struct Section {
    name: &'static str,
    table: Table,
}

impl Section {
    fn take(root: &mut Table, name: &'static str) -> Result<Option<Section>, ConfigError> {
        match root.remove(name) {
            None => Ok(None),
            Some(Value::Table(table)) => Ok(Some(Section { name, table })),
            Some(v) => Err(ConfigError::new(name, format!("expected a section, got {}", type_name(&v)))),
        }
    }

    fn field(&self, key: &str) -> String {
        format!("{}.{key}", self.name)
    }

    fn get<T>(&mut self, key: &str, want: &str, conv: impl Fn(&Value) -> Option<T>) -> Result<Option<T>, ConfigError> {
        match self.table.remove(key) {
            None => Ok(None),
            Some(v) => conv(&v)
                .map(Some)
                .ok_or_else(|| ConfigError::new(self.field(key), format!("expected {want}, got {v}"))),
        }
    }

    fn float(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.get(key, "a number", as_f64)
    }

    fn uint(&mut self, key: &str) -> Result<Option<u64>, ConfigError> {
        self.get(key, "a non-negative integer", |v| v.as_integer().and_then(|i| u64::try_from(i).ok()))
    }

    fn string(&mut self, key: &str) -> Result<Option<String>, ConfigError> {
        self.get(key, "a string", |v| v.as_str().map(str::to_string))
    }

    fn finish(self) -> Result<(), ConfigError> {
        match self.table.keys().next() {
            Some(k) => Err(ConfigError::new(self.field(k), "unknown key")),
            None => Ok(()),
        }
    }
}

fn parse_coin(field: &str, v: &Value) -> Result<CoinParams, ConfigError> {
    let bad = |m: String| ConfigError::new(field, m);
    let (r, a, b) = match v {
        Value::Array(xs) => {
            let xs: Vec<f64> = xs
                .iter()
                .map(as_f64)
                .collect::<Option<_>>()
                .ok_or_else(|| bad(format!("expected numbers, got {v}")))?;
            match xs[..] {
                [r] => (r, 0.0, 0.0),
                [r, a, b] => (r, a, b),
                _ => return Err(bad(format!("expected [r] or [r, a, b], got {} values", xs.len()))),
            }
        }
        v => (as_f64(v).ok_or_else(|| bad(format!("expected r or [r, a, b], got {v}")))?, 0.0, 0.0),
    };
    CoinParams::new(r, a, b).map_err(|e| bad(e.to_string()))
}

fn parse_noise(mut s: Section) -> Result<NoiseModel, ConfigError> {
    let mut nm = NoiseModel::default();
    for (key, slot) in [
        ("p1", &mut nm.p1),
        ("p2", &mut nm.p2),
        ("t1", &mut nm.t1),
        ("t2", &mut nm.t2),
        ("dur_1q", &mut nm.dur_1q),
        ("dur_2q", &mut nm.dur_2q),
        ("dur_idle_unit", &mut nm.dur_idle_unit),
        ("readout_flip", &mut nm.readout_flip),
    ] {
        if let Some(x) = s.float(key)? {
            *slot = x;
        }
    }
    let name = s.name;
    s.finish()?;
    nm.validate().map_err(|e| ConfigError::new(name, e.to_string()))?;
    Ok(nm)
}

fn parse_root(text: &str) -> Result<Table, ConfigError> {
    text.parse::<Table>().map_err(|e| ConfigError::new("syntax", e.to_string().trim_end().to_string()))
}

/// Reads a noise model from a file holding a `[noise]` section or bare
/// noise keys.
pub fn parse_noise_file(text: &str) -> Result<NoiseModel, ConfigError> {
    let mut root = parse_root(text)?;
    let s = match Section::take(&mut root, "noise")? {
        Some(s) => {
            if let Some(k) = root.keys().next() {
                return Err(ConfigError::new(k.clone(), "unknown section"));
            }
            s
        }
        None => Section { name: "noise", table: root },
    };
    parse_noise(s)
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut root = parse_root(text)?;
        let mut cfg = ExperimentConfig::default();

        if let Some(mut s) = Section::take(&mut root, "walk")? {
            if let Some(c) = s.uint("cycle")? {
                cfg.cycle = c as usize;
            }
            if let Some(p) = s.string("pattern")? {
                cfg.pattern = p;
            }
            if let Some(t) = s.uint("t_max")? {
                cfg.t_max = t as usize;
            }
            if let Some(x) = s.float("theta")? {
                cfg.theta = x;
            }
            if let Some(x) = s.float("phi")? {
                cfg.phi = x;
            }
            s.finish()?;
        }
        if let Some(s) = Section::take(&mut root, "coins")? {
            cfg.coins = s
                .table
                .iter()
                .map(|(k, v)| Ok((k.clone(), parse_coin(&format!("coins.{k}"), v)?)))
                .collect::<Result<_, ConfigError>>()?;
        }
        if let Some(mut s) = Section::take(&mut root, "run")? {
            if let Some(n) = s.uint("shots")? {
                cfg.shots = n;
            }
            if let Some(n) = s.uint("seed")? {
                cfg.seed = n;
            }
            if let Some(n) = s.uint("opt_level")? {
                cfg.opt_level = u8::try_from(n)
                    .ok()
                    .and_then(OptLevel::from_number)
                    .ok_or_else(|| ConfigError::new("run.opt_level", format!("expected 0, 1 or 3, got {n}")))?;
            }
            if let Some(d) = s.string("dd")? {
                cfg.dd = Dd::parse(&d)
                    .ok_or_else(|| ConfigError::new("run.dd", format!("expected \"none\" or \"xy4\", got \"{d}\"")))?;
            }
            cfg.dd_min_window = s.float("dd_min_window")?;
            if let Some(o) = s.string("outputs")? {
                cfg.outputs = PathBuf::from(o);
            }
            s.finish()?;
        }
        if let Some(s) = Section::take(&mut root, "noise")? {
            cfg.noise = Some(parse_noise(s)?);
        }
        if let Some(s) = Section::take(&mut root, "overlays")? {
            for (k, v) in s.table {
                let p = v
                    .as_str()
                    .ok_or_else(|| ConfigError::new(format!("overlays.{k}"), format!("expected a path string, got {v}")))?;
                cfg.overlays.insert(k, PathBuf::from(p));
            }
        }
        root.remove("manifest");
        if let Some(k) = root.keys().next() {
            return Err(ConfigError::new(k.clone(), "unknown section"));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !CYCLES.contains(&self.cycle) {
            return Err(ConfigError::new("walk.cycle", format!("expected 3, 4 or 8, got {}", self.cycle)));
        }
        if self.t_max < 1 {
            return Err(ConfigError::new("walk.t_max", "must be at least 1"));
        }
        if !(0.0..=PI).contains(&self.theta) {
            return Err(ConfigError::new("walk.theta", format!("{} outside [0, pi]", self.theta)));
        }
        if !(0.0..TAU).contains(&self.phi) {
            return Err(ConfigError::new("walk.phi", format!("{} outside [0, 2pi)", self.phi)));
        }
        self.schedule().map_err(|e| ConfigError::new("walk.pattern", e.to_string()))?;
        if i64::try_from(self.seed).is_err() {
            return Err(ConfigError::new("run.seed", format!("{} exceeds {}", self.seed, i64::MAX)));
        }
        if i64::try_from(self.shots).is_err() {
            return Err(ConfigError::new("run.shots", format!("{} exceeds {}", self.shots, i64::MAX)));
        }
        if let Some(nm) = &self.noise {
            nm.validate().map_err(|e| ConfigError::new("noise", e.to_string()))?;
        }
        if let Some(w) = self.dd_min_window {
            let d = self.noise.unwrap_or_default().dur_1q;
            if w.is_nan() || w < 4.0 * d {
                return Err(ConfigError::new("run.dd_min_window", format!("{w} shorter than four pulses ({})", 4.0 * d)));
            }
        }
        Ok(())
    }

    /// The coin schedule over `t_max` steps.
    pub fn schedule(&self) -> Result<CoinSchedule, qwalk::WalkError> {
        parrondo_schedule(&self.pattern, &self.coins, self.t_max)
    }

    /// Noise model used for timing: the configured one, else defaults.
    pub fn timing_model(&self) -> NoiseModel {
        self.noise.unwrap_or_default()
    }

    pub fn min_window(&self) -> f64 {
        self.dd_min_window.unwrap_or(4.0 * self.timing_model().dur_1q)
    }

    pub fn to_table(&self) -> Table {
        let mut root = Table::new();
        let mut walk = Table::new();
        walk.insert("cycle".into(), Value::Integer(self.cycle as i64));
        walk.insert("pattern".into(), Value::String(self.pattern.clone()));
        walk.insert("t_max".into(), Value::Integer(self.t_max as i64));
        walk.insert("theta".into(), Value::Float(self.theta));
        walk.insert("phi".into(), Value::Float(self.phi));
        root.insert("walk".into(), Value::Table(walk));

        let coins: Table = self
            .coins
            .iter()
            .map(|(k, c)| {
                let v = if c.a() == 0.0 && c.b() == 0.0 {
                    Value::Float(c.r())
                } else {
                    Value::Array(vec![Value::Float(c.r()), Value::Float(c.a()), Value::Float(c.b())])
                };
                (k.clone(), v)
            })
            .collect();
        root.insert("coins".into(), Value::Table(coins));

        let mut run = Table::new();
        run.insert("shots".into(), Value::Integer(self.shots as i64));
        run.insert("seed".into(), Value::Integer(self.seed as i64));
        run.insert("opt_level".into(), Value::Integer(self.opt_level.number() as i64));
        run.insert("dd".into(), Value::String(self.dd.name().into()));
        if let Some(w) = self.dd_min_window {
            run.insert("dd_min_window".into(), Value::Float(w));
        }
        run.insert("outputs".into(), Value::String(self.outputs.display().to_string()));
        root.insert("run".into(), Value::Table(run));

        if let Some(nm) = &self.noise {
            let noise: Table = [
                ("p1", nm.p1),
                ("p2", nm.p2),
                ("t1", nm.t1),
                ("t2", nm.t2),
                ("dur_1q", nm.dur_1q),
                ("dur_2q", nm.dur_2q),
                ("dur_idle_unit", nm.dur_idle_unit),
                ("readout_flip", nm.readout_flip),
            ]
            .into_iter()
            .map(|(k, x)| (k.to_string(), Value::Float(x)))
            .collect();
            root.insert("noise".into(), Value::Table(noise));
        }
        if !self.overlays.is_empty() {
            let ov: Table = self
                .overlays
                .iter()
                .map(|(k, p)| (k.clone(), Value::String(p.display().to_string())))
                .collect();
            root.insert("overlays".into(), Value::Table(ov));
        }
        root
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_table()).expect("config tables serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(ExperimentConfig::parse("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn round_trip() {
        let mut cfg = ExperimentConfig {
            cycle: 3,
            pattern: "A'A'B'B'".into(),
            seed: 42,
            shots: 0,
            opt_level: OptLevel::L1,
            noise: Some(NoiseModel { p1: 1e-3, t1: f64::INFINITY, t2: f64::INFINITY, ..NoiseModel::default() }),
            dd: Dd::Xy4,
            dd_min_window: Some(8.0),
            theta: 1.25,
            ..ExperimentConfig::default()
        };
        cfg.coins.insert("C".into(), CoinParams::new(0.5, 0.3, 2.0).unwrap());
        cfg.overlays.insert("hw".into(), PathBuf::from("data/hw.csv"));
        let back = ExperimentConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_toml(), cfg.to_toml());
    }

    #[test]
    fn coin_forms() {
        let cfg = ExperimentConfig::parse("[coins]\nA = 0.5\nB = [0.25]\nC = [0.5, 1, 2]\n[walk]\npattern = \"ABC\"").unwrap();
        assert_eq!(cfg.coins["A"], CoinParams::real(0.5).unwrap());
        assert_eq!(cfg.coins["B"], CoinParams::real(0.25).unwrap());
        assert_eq!(cfg.coins["C"], CoinParams::new(0.5, 1.0, 2.0).unwrap());
    }

    fn field_of(text: &str) -> String {
        ExperimentConfig::parse(text).unwrap_err().field
    }

    #[test]
    fn errors_name_the_field() {
        assert_eq!(field_of("[run]\nshots = -1"), "run.shots");
        assert_eq!(field_of("[run]\nshots = \"many\""), "run.shots");
        assert_eq!(field_of("[run]\nopt_level = 2"), "run.opt_level");
        assert_eq!(field_of("[run]\ndd = \"xy8\""), "run.dd");
        assert_eq!(field_of("[run]\nshot = 5"), "run.shot");
        assert_eq!(field_of("[walk]\ncycle = 5"), "walk.cycle");
        assert_eq!(field_of("[walk]\nt_max = 0"), "walk.t_max");
        assert_eq!(field_of("[walk]\ntheta = 4.0"), "walk.theta");
        assert_eq!(field_of("[walk]\npattern = \"AAC\""), "walk.pattern");
        assert_eq!(field_of("[coins]\nA = 1.5"), "coins.A");
        assert_eq!(field_of("[coins]\nA = [0.5, 1]"), "coins.A");
        assert_eq!(field_of("[noise]\nt2 = 700"), "noise");
        assert_eq!(field_of("[noise]\np3 = 0.1"), "noise.p3");
        assert_eq!(field_of("[extra]\nx = 1"), "extra");
        assert_eq!(field_of("walk = 3"), "walk");
        assert_eq!(field_of("[walk\n"), "syntax");
        assert_eq!(field_of("[run]\ndd_min_window = 2.0"), "run.dd_min_window");
    }

    #[test]
    fn noise_file_forms() {
        let a = parse_noise_file("[noise]\np1 = 0.01").unwrap();
        let b = parse_noise_file("p1 = 0.01").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.p1, 0.01);
        assert_eq!(a.p2, NoiseModel::default().p2);
        assert_eq!(parse_noise_file("[noise]\np1 = 2").unwrap_err().field, "noise");
    }

    #[test]
    fn manifest_section_is_ignored() {
        let cfg = ExperimentConfig::parse("[manifest]\nversion = \"0.1.0\"\nfiles = [\"a\"]").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
    }
}
