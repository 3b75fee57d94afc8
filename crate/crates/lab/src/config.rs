//! `key = value` run configuration with documented defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use nudd_core::errortypes::MoosPreset;
use nudd_core::NuddSpec;

/// Every recognized key with its default (`None` = required for `simulate`).
pub const KEYS: &[(&str, Option<&str>, &str)] = &[
    ("orders", Some("1,1,1,3"), "sequence orders N_1..N_l, innermost first"),
    ("moos", Some("single-qubit-4layer"), "control set preset: single-qubit-4layer | two-body-4layer"),
    ("log10_jtau_min", Some("-10"), "lower end of the log10(J tau) sweep"),
    ("log10_jtau_max", Some("-2"), "upper end of the log10(J tau) sweep"),
    ("points", Some("17"), "number of tau points, evenly spaced in log10"),
    ("realizations", Some("15"), "random bath realizations averaged per point"),
    ("digits", Some("120"), "working precision in decimal digits"),
    ("seed", None, "master seed (required)"),
    ("fit_min", Some("-8"), "lower end of the fit window in log10(J tau)"),
    ("fit_max", Some("-4"), "upper end of the fit window in log10(J tau)"),
    ("n_bath_spins", Some("4"), "bath spins"),
    ("j", Some("1"), "system-bath coupling J; tau = 10^x / J (J = 0: tau = 10^x)"),
    ("j00", Some("0.001"), "pure-bath strength J00"),
    ("normalize_bath", Some("true"), "rescale each bath operator to unit spectral norm"),
    ("error_measures", Some("true"), "also compute E_r for every error type (false: D only)"),
    ("workers", Some("0"), "worker threads, 0 = available parallelism"),
    ("out_dir", Some("nudd-out"), "directory for CSV, Markdown and manifest"),
];

/// Overrides applied by `--fast`.
pub const FAST_PROFILE: &[(&str, &str)] = &[("realizations", "3")];

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    UnknownKey(String),
    Missing(Vec<String>),
    Invalid { key: String, value: String, reason: String },
    Syntax { line: usize, text: String },
    Io(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::UnknownKey(k) => write!(f, "unknown config key `{k}`"),
            ConfigError::Missing(keys) => write!(f, "missing required config key(s): {}", keys.join(", ")),
            ConfigError::Invalid { key, value, reason } => write!(f, "invalid value `{value}` for `{key}`: {reason}"),
            ConfigError::Syntax { line, text } => write!(f, "line {line}: expected `key = value`, got `{text}`"),
            ConfigError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Raw key/value pairs layered as defaults < file < overrides.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn with_defaults() -> Self {
        let values =
            KEYS.iter().filter_map(|(k, d, _)| d.map(|d| (k.to_string(), d.to_string()))).collect();
        Self { values }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = key.trim();
        if !KEYS.iter().any(|(k, _, _)| *k == key) {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        self.values.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn merge_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: n + 1, text: line.to_string() })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        self.merge_text(&text)
    }

    /// Applies `key=value` override strings.
    pub fn merge_overrides<S: AsRef<str>>(&mut self, items: &[S]) -> Result<(), ConfigError> {
        for item in items {
            let item = item.as_ref();
            let (k, v) = item.split_once('=').ok_or_else(|| ConfigError::Syntax { line: 0, text: item.to_string() })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn apply_fast(&mut self) {
        for (k, v) in FAST_PROFILE {
            self.values.insert(k.to_string(), v.to_string());
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub spec: NuddSpec,
    pub moos: MoosPreset,
    pub log10_jtau_min: f64,
    pub log10_jtau_max: f64,
    pub points: usize,
    pub realizations: usize,
    pub digits: u32,
    pub seed: u64,
    pub fit_min: f64,
    pub fit_max: f64,
    pub n_bath_spins: usize,
    pub j: f64,
    pub j00: f64,
    pub normalize_bath: bool,
    pub error_measures: bool,
    pub workers: usize,
    pub out_dir: PathBuf,
}

fn parse<T: std::str::FromStr>(raw: &RawConfig, key: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    let v = raw.get(key).ok_or_else(|| ConfigError::Missing(vec![key.to_string()]))?;
    v.parse().map_err(|e: T::Err| ConfigError::Invalid {
        key: key.to_string(),
        value: v.to_string(),
        reason: e.to_string(),
    })
}

fn invalid(raw: &RawConfig, key: &str, reason: &str) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        value: raw.get(key).unwrap_or("").to_string(),
        reason: reason.to_string(),
    }
}

/// Parses `2,4,1,6` (spaces and a surrounding pair of parentheses allowed).
pub fn parse_orders(s: &str) -> Result<Vec<u32>, String> {
    s.trim()
        .trim_start_matches('(')
        .trim_end_matches(')')
        .split(',')
        .map(|t| t.trim().parse::<u32>().map_err(|e| format!("`{}`: {e}", t.trim())))
        .collect()
}

impl SweepConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        let missing: Vec<String> =
            KEYS.iter().filter(|(k, _, _)| raw.get(k).is_none()).map(|(k, _, _)| k.to_string()).collect();
        if !missing.is_empty() {
            return Err(ConfigError::Missing(missing));
        }
        let orders = parse_orders(raw.get("orders").unwrap()).map_err(|e| invalid(raw, "orders", &e))?;
        let spec = NuddSpec::new(&orders).map_err(|e| invalid(raw, "orders", &e.to_string()))?;
        let moos = MoosPreset::from_name(raw.get("moos").unwrap())
            .ok_or_else(|| invalid(raw, "moos", "expected single-qubit-4layer or two-body-4layer"))?;
        let cfg = Self {
            spec,
            moos,
            log10_jtau_min: parse(raw, "log10_jtau_min")?,
            log10_jtau_max: parse(raw, "log10_jtau_max")?,
            points: parse(raw, "points")?,
            realizations: parse(raw, "realizations")?,
            digits: parse(raw, "digits")?,
            seed: parse(raw, "seed")?,
            fit_min: parse(raw, "fit_min")?,
            fit_max: parse(raw, "fit_max")?,
            n_bath_spins: parse(raw, "n_bath_spins")?,
            j: parse(raw, "j")?,
            j00: parse(raw, "j00")?,
            normalize_bath: parse(raw, "normalize_bath")?,
            error_measures: parse(raw, "error_measures")?,
            workers: parse(raw, "workers")?,
            out_dir: PathBuf::from(raw.get("out_dir").unwrap()),
        };
        cfg.validate(raw)?;
        Ok(cfg)
    }

    fn validate(&self, raw: &RawConfig) -> Result<(), ConfigError> {
        if self.spec.ell() != 4 {
            return Err(invalid(raw, "orders", "the two-qubit control sets have exactly 4 layers"));
        }
        if !(self.log10_jtau_min < self.log10_jtau_max) {
            return Err(invalid(raw, "log10_jtau_max", "must exceed log10_jtau_min"));
        }
        if self.points < 4 {
            return Err(invalid(raw, "points", "need at least 4 points"));
        }
        if self.realizations == 0 {
            return Err(invalid(raw, "realizations", "need at least one realization"));
        }
        if self.digits < nudd_core::Precision::MIN_DIGITS {
            return Err(invalid(raw, "digits", "below the 30-digit minimum"));
        }
        if !(self.fit_min < self.fit_max) || self.fit_min < self.log10_jtau_min || self.fit_max > self.log10_jtau_max {
            return Err(invalid(raw, "fit_min", "fit window must be a non-empty sub-range of the sweep"));
        }
        if !(self.j >= 0.0) {
            return Err(invalid(raw, "j", "must be non-negative"));
        }
        if !(self.j00 >= 0.0) {
            return Err(invalid(raw, "j00", "must be non-negative"));
        }
        if self.n_bath_spins == 0 || self.n_bath_spins > 6 {
            return Err(invalid(raw, "n_bath_spins", "supported range is 1..=6"));
        }
        Ok(())
    }

    /// The sweep abscissae `log10(J tau)`, endpoints included.
    pub fn grid(&self) -> Vec<f64> {
        let step = (self.log10_jtau_max - self.log10_jtau_min) / (self.points - 1) as f64;
        (0..self.points)
            .map(|k| if k + 1 == self.points { self.log10_jtau_max } else { self.log10_jtau_min + step * k as f64 })
            .collect()
    }

    /// Time unit: `1/J`, or 1 for the degenerate `J = 0` model.
    pub fn time_unit(&self) -> f64 {
        if self.j > 0.0 {
            1.0 / self.j
        } else {
            1.0
        }
    }

    pub fn worker_count(&self) -> usize {
        if self.workers > 0 {
            self.workers
        } else {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        }
    }
}
