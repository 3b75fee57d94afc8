//! Subcommands of the `nudd` binary.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use nudd_core::coefficients::{lemma_checks, predict_order, vanishing_order};
use nudd_core::errortypes::ErrorVector;
use nudd_core::schedule::build_timeline;
use nudd_core::{NuddSpec, Precision};

use crate::config::{parse_orders, ConfigError, RawConfig, SweepConfig};
use crate::fit::fit_orders;
use crate::{manifest, sweep, tables, verify};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "nudd", version, about = "Nested Uhrig dynamical decoupling laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Pulse timeline as CSV (time, layers_fired, interval_length).
    Schedule(ScheduleArgs),
    /// Predicted decoupling orders for every error type.
    Predict(PredictArgs),
    /// Exhaustive coefficient-vanishing audit.
    Coeffs(CoeffsArgs),
    /// Lemma, decomposition, Fourier and oracle checks.
    Verify(VerifyArgs),
    /// Spin-bath simulation sweep, order fits and tables.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
pub struct ScheduleArgs {
    /// Sequence orders, innermost first, e.g. 2,4,1,6.
    #[arg(long)]
    pub orders: String,
    #[arg(long, default_value_t = 40)]
    pub digits: u32,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Markdown,
    Csv,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long)]
    pub orders: String,
    #[arg(long, value_enum, default_value_t = Format::Markdown)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CoeffsArgs {
    #[arg(long)]
    pub orders: String,
    #[arg(long, default_value_t = 60)]
    pub digits: u32,
    /// Highest word length scanned (default: prediction + 1 per error type).
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Restrict to one error type, e.g. 01 (r1 first).
    #[arg(long)]
    pub r: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub orders: String,
    /// Random decompositions for the subadditivity lemma.
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Random words for the decomposition identity and the oracle.
    #[arg(long, default_value_t = 20)]
    pub words: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 60)]
    pub digits: u32,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Desk-scale profile (3 realizations).
    #[arg(long)]
    pub fast: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub orders: Option<String>,
    #[arg(long)]
    pub moos: Option<String>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Core(nudd_core::Error),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<nudd_core::Error> for CliError {
    fn from(e: nudd_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            // Bad command-line specs are configuration problems too.
            CliError::Core(nudd_core::Error::InvalidSpec(_) | nudd_core::Error::PrecisionTooLow(_)) => EXIT_CONFIG,
            _ => EXIT_RUNTIME,
        }
    }
}

type CmdResult = Result<i32, CliError>;

/// Parses `args` and runs the command, writing human output to `out`.
/// Returns the process exit code.
pub fn run_from<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_CONFIG;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "nudd: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> CmdResult {
    match cmd {
        Command::Schedule(a) => schedule(a, out),
        Command::Predict(a) => predict(a, out),
        Command::Coeffs(a) => coeffs(a, out),
        Command::Verify(a) => verify_cmd(a, out),
        Command::Simulate(a) => simulate(a, out),
    }
}

fn spec_arg(s: &str) -> Result<NuddSpec, CliError> {
    let orders = parse_orders(s).map_err(|reason| ConfigError::Invalid {
        key: "orders".into(),
        value: s.into(),
        reason,
    })?;
    Ok(NuddSpec::new(&orders)?)
}

fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn schedule_csv(spec: &NuddSpec, prec: Precision) -> String {
    let tl = build_timeline(spec, prec);
    let mut s = String::from("time,layers_fired,interval_length\n");
    for (k, iv) in tl.intervals.iter().enumerate() {
        let end = match tl.intervals.get(k + 1) {
            Some(next) => next.start.to_sci(16),
            None => nudd_core::MpReal::one(prec).to_sci(16),
        };
        let layers: Vec<String> =
            (0..spec.ell()).filter(|&i| iv.fires >> i & 1 == 1).map(|i| (i + 1).to_string()).collect();
        let _ = writeln!(s, "{end},{},{}", layers.join(";"), iv.length.to_sci(16));
    }
    s
}

fn schedule(a: ScheduleArgs, out: &mut dyn Write) -> CmdResult {
    let spec = spec_arg(&a.orders)?;
    let prec = Precision::new(a.digits)?;
    emit(&schedule_csv(&spec, prec), a.out.as_deref(), out)?;
    Ok(EXIT_OK)
}

fn predict(a: PredictArgs, out: &mut dyn Write) -> CmdResult {
    let spec = spec_arg(&a.orders)?;
    let text = match a.format {
        Format::Markdown => tables::predict_markdown(&spec)?,
        Format::Csv => tables::predict_csv(&spec)?,
    };
    emit(&text, a.out.as_deref(), out)?;
    Ok(EXIT_OK)
}

fn coeffs(a: CoeffsArgs, out: &mut dyn Write) -> CmdResult {
    let spec = spec_arg(&a.orders)?;
    let prec = Precision::new(a.digits)?;
    let types: Vec<ErrorVector> = match &a.r {
        Some(r) => {
            let v: ErrorVector = r
                .parse()
                .map_err(|_| ConfigError::Invalid { key: "r".into(), value: r.clone(), reason: "not a 0/1 vector".into() })?;
            if v.len() != spec.ell() {
                return Err(nudd_core::Error::LengthMismatch { left: spec.ell(), right: v.len() }.into());
            }
            vec![v]
        }
        None => ErrorVector::all(spec.ell()).filter(|r| !r.is_zero()).collect(),
    };
    let orders: Vec<String> = spec.orders().iter().map(u32::to_string).collect();
    let orders = orders.join(";");
    let mut s = String::from("ell,orders,r,n,word_count,max_abs_F,verdict\n");
    let mut violated = false;
    for r in types {
        let predicted = predict_order(&spec, r)?;
        let n_max = a.n_max.unwrap_or(predicted as usize + 1).max(1);
        let v = vanishing_order(&spec, r, n_max, prec)?;
        for l in &v.levels {
            let verdict = if l.vanishes { "vanishes" } else { "nonzero" };
            let _ = writeln!(
                s,
                "{},{orders},{},{},{},{},{verdict}",
                spec.ell(),
                r.compact(),
                l.n,
                l.words,
                l.max_abs.to_sci(6)
            );
        }
        // Only a violation when the scan reached the prediction.
        if (v.order as usize) < n_max.min(predicted as usize) && v.order < predicted {
            violated = true;
        }
    }
    emit(&s, a.out.as_deref(), out)?;
    Ok(if violated { EXIT_VIOLATION } else { EXIT_OK })
}

fn verify_cmd(a: VerifyArgs, out: &mut dyn Write) -> CmdResult {
    let spec = spec_arg(&a.orders)?;
    let prec = Precision::new(a.digits)?;
    let mut failed = false;
    let mut line = |ok: bool, name: &str, detail: String, out: &mut dyn Write| -> Result<(), CliError> {
        failed |= !ok;
        writeln!(out, "{} {name}: {detail}", if ok { "PASS" } else { "FAIL" })?;
        Ok(())
    };

    if spec.ell() >= 2 {
        let rep = lemma_checks(&spec, a.trials, a.seed)?;
        line(
            rep.subadditivity_violations == 0,
            "lemma-subadditivity",
            format!("{} violations in {} trials", rep.subadditivity_violations, rep.subadditivity_trials),
            out,
        )?;
        line(rep.odd_parity_minimum.holds(), "lemma-odd-minimum", format!("{:?}", rep.odd_parity_minimum), out)?;

        let tol = prec.tolerance(15);
        let checks = verify::decomposition_checks(a.words, a.seed, prec, |_| spec.clone())?;
        let worst = checks.iter().map(|c| c.relative.clone()).fold(nudd_core::MpReal::zero(prec), |m, v| m.max(&v));
        line(worst <= tol, "outer-decomposition", format!("max relative gap {} over {} words", worst.to_sci(3), checks.len()), out)?;
    } else {
        writeln!(out, "SKIP lemmas and outer decomposition: need at least two layers")?;
    }

    for rep in verify::fourier_checks(&spec, prec)? {
        line(
            rep.passes(1e-10),
            "fourier-classes",
            format!("{:?}: {}; max forbidden weight {:.2e}", rep.target, rep.expected, rep.max_forbidden_relative),
            out,
        )?;
    }

    let oracle = verify::oracle_checks(a.words, a.seed, prec, 16, |_| spec.clone())?;
    let min_order = oracle.iter().map(|c| c.observed_order).fold(f64::INFINITY, f64::min);
    line(min_order >= 1.9, "oracle-convergence", format!("min observed order {min_order:.3} over {} words", oracle.len()), out)?;

    Ok(if failed { EXIT_VIOLATION } else { EXIT_OK })
}

/// Layers defaults, config file, `--fast`, `--set` and direct flags.
pub fn simulate_config(a: &SimulateArgs) -> Result<(RawConfig, SweepConfig), ConfigError> {
    let mut raw = RawConfig::with_defaults();
    if let Some(p) = &a.config {
        raw.merge_file(p)?;
    }
    if a.fast {
        raw.apply_fast();
    }
    raw.merge_overrides(&a.set)?;
    if let Some(s) = a.seed {
        raw.set("seed", &s.to_string())?;
    }
    if let Some(o) = &a.orders {
        raw.set("orders", o)?;
    }
    if let Some(m) = &a.moos {
        raw.set("moos", m)?;
    }
    if let Some(w) = a.workers {
        raw.set("workers", &w.to_string())?;
    }
    if let Some(d) = &a.out_dir {
        raw.set("out_dir", &d.display().to_string())?;
    }
    let cfg = SweepConfig::from_raw(&raw)?;
    Ok((raw, cfg))
}

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> CmdResult {
    let (raw, cfg) = simulate_config(&a)?;
    let results = sweep::run_sweep(&cfg)?;
    let report = fit_orders(&results, &cfg.spec, (cfg.fit_min, cfg.fit_max))?;
    let md = if report.per_error.is_empty() {
        tables::overall_markdown(&report)
    } else {
        tables::report_markdown(&report)?
    };

    std::fs::create_dir_all(&cfg.out_dir)?;
    let names = ["sweep.csv", "orders.md", "orders.csv", "manifest.json"];
    std::fs::write(cfg.out_dir.join(names[0]), sweep::csv_string(&results))?;
    std::fs::write(cfg.out_dir.join(names[1]), &md)?;
    std::fs::write(cfg.out_dir.join(names[2]), tables::report_csv(&report))?;
    let outputs: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    let m = manifest::manifest("simulate", &raw, &outputs, Some(&report));
    let json = serde_json::to_string_pretty(&m).expect("manifest serializes");
    std::fs::write(cfg.out_dir.join(names[3]), json + "\n")?;

    writeln!(out, "{md}")?;
    let bad = report.violations();
    if !bad.is_empty() || report.overall_violates() {
        let list: Vec<String> = bad.iter().map(|r| r.compact()).collect();
        writeln!(out, "VIOLATION: numeric order below prediction for [{}]", list.join(", "))?;
        return Ok(EXIT_VIOLATION);
    }
    Ok(EXIT_OK)
}
