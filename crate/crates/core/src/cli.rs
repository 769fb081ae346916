//! Command-line surface: `simulate`, `reproduce`, `verify`, `channel-info`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or configuration
//! error, 3 numeric or runtime error.
//!
//! `simulate` takes its parameters from flags, from a JSON file given with
//! `--config`, or both; a flag always wins over the file. JSON keys are the
//! snake_case field names of [`ExperimentConfig`]. `theta` accepts radians or
//! the exact tokens `pi`, `pi/N` and `K*pi/N`.

use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::Value;
use thiserror::Error;

use crate::channel::{self, ChannelError, ChannelKind, ChannelSpec, CustomChannel};
use crate::csv::{format_number, TrajectoryCsv};
use crate::cxmat::ComplexMatrix;
use crate::firstlaw::{self, EnergeticsLedger, FirstLawError, TimeGrid};
use crate::oracle::{self, OracleConfig, OracleError};
use crate::qstate::{prepare_pure_state, DensityOperator, Hamiltonian, InitialStatePrep, StateError};
use crate::verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

pub const MIN_STEPS: usize = 10;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("no channel given (use --channel or the \"channel\" key)")]
    MissingChannel,
    #[error("bad channel: {0}")]
    Channel(#[from] ChannelError),
    #[error("cannot parse theta {0:?}: expected radians, pi, pi/N or K*pi/N")]
    Theta(String),
    #[error("steps must be at least {MIN_STEPS}, got {0}")]
    TooFewSteps(usize),
    #[error("tau_max must be positive and finite, got {0}")]
    BadTauMax(f64),
    #[error("bad Hamiltonian: {0}")]
    Hamiltonian(#[source] StateError),
    #[error("oracle columns unavailable: {0}")]
    Oracle(String),
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numeric failure {0}")]
    Numeric(#[from] FirstLawError),
    #[error("oracle failure: {0}")]
    Oracle(#[from] OracleError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_USAGE,
            _ => EXIT_NUMERIC,
        }
    }
}

/// Where the Kraus operators come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelDescriptor {
    Builtin(ChannelKind),
    CustomFile(PathBuf),
    Inline(Value),
}

impl ChannelDescriptor {
    /// `phase-damping`, `phase-flip`, `bit-flip`, `bit-phase-flip` or `custom:<file>`.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        if let Some(path) = text.strip_prefix("custom:") {
            return Ok(ChannelDescriptor::CustomFile(PathBuf::from(path)));
        }
        let kind: ChannelKind = text.parse()?;
        Ok(ChannelDescriptor::Builtin(kind))
    }

    /// Builds the channel. A rate given here wins over one stored in a custom file.
    pub fn resolve(&self, rate: Option<f64>) -> Result<ChannelSpec, ConfigError> {
        let (kind, file_rate) = match self {
            ChannelDescriptor::Builtin(kind) => (kind.clone(), None),
            ChannelDescriptor::CustomFile(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                    path: path.clone(),
                    source,
                })?;
                let (c, r) = CustomChannel::from_json(&text)?;
                (ChannelKind::Custom(c), r)
            }
            ChannelDescriptor::Inline(value) => {
                let (c, r) = CustomChannel::from_json_value(value.clone())?;
                (ChannelKind::Custom(c), r)
            }
        };
        Ok(ChannelSpec::new(kind, rate.or(file_rate).unwrap_or(1.0))?)
    }
}

/// θ in radians, or `pi`, `pi/N`, `K*pi`, `K*pi/N`.
pub fn parse_theta(text: &str) -> Result<f64, ConfigError> {
    let bad = || ConfigError::Theta(text.to_string());
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if let Ok(x) = s.parse::<f64>() {
        return if x.is_finite() { Ok(x) } else { Err(bad()) };
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().map_err(|_| bad())?),
        None => (s.as_str(), 1.0),
    };
    let k = match num {
        "pi" => 1.0,
        _ => num
            .strip_suffix("*pi")
            .and_then(|k| k.parse::<f64>().ok())
            .ok_or_else(bad)?,
    };
    if den == 0.0 || !den.is_finite() || !k.is_finite() {
        return Err(bad());
    }
    Ok(k * PI / den)
}

/// A fully specified run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub channel: ChannelDescriptor,
    /// Γ; defaults to 1 (or to the custom file's rate).
    pub rate: Option<f64>,
    pub theta: f64,
    pub phi: f64,
    pub e_g: f64,
    pub e_e: f64,
    /// Replaces diag(e_g, e_e) with expression entries in t when present.
    pub hamiltonian_diagonal: Option<Vec<String>>,
    pub tau_max: f64,
    pub steps: usize,
    pub emit_oracle: bool,
}

impl ExperimentConfig {
    pub fn new(channel: ChannelDescriptor) -> Self {
        Self {
            channel,
            rate: None,
            theta: PI / 6.0,
            phi: 0.0,
            e_g: 0.0,
            e_e: 1.0,
            hamiltonian_diagonal: None,
            tau_max: firstlaw::DEFAULT_TAU_MAX,
            steps: firstlaw::DEFAULT_STEPS,
            emit_oracle: false,
        }
    }

    pub fn builtin(kind: ChannelKind) -> Self {
        Self::new(ChannelDescriptor::Builtin(kind))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.steps < MIN_STEPS {
            return Err(ConfigError::TooFewSteps(self.steps));
        }
        if !(self.tau_max.is_finite() && self.tau_max > 0.0) {
            return Err(ConfigError::BadTauMax(self.tau_max));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TimeGrid, ConfigError> {
        self.validate()?;
        TimeGrid::new(self.tau_max, self.steps).map_err(|_| ConfigError::BadTauMax(self.tau_max))
    }

    pub fn hamiltonian(&self) -> Result<Hamiltonian, ConfigError> {
        match &self.hamiltonian_diagonal {
            Some(entries) => Hamiltonian::parse_diagonal(entries).map_err(ConfigError::Hamiltonian),
            None => Ok(Hamiltonian::two_level(self.e_g, self.e_e)),
        }
    }

    pub fn initial_state(&self) -> DensityOperator {
        prepare_pure_state(InitialStatePrep::new(self.theta, self.phi))
    }

    /// The closed-form (heat, coherence) at τ, when the setup has one.
    fn oracle(&self, spec: &ChannelSpec) -> Result<impl Fn(f64) -> Result<(f64, f64), OracleError>, ConfigError> {
        if self.hamiltonian_diagonal.is_some() {
            return Err(ConfigError::Oracle("only for the static two-level Hamiltonian".into()));
        }
        let cfg = OracleConfig::new(self.e_g, self.e_e, self.theta).map_err(|e| ConfigError::Oracle(e.to_string()))?;
        let phase_damping = match spec.kind {
            ChannelKind::PhaseDamping => true,
            ChannelKind::PhaseFlip => false,
            _ => {
                return Err(ConfigError::Oracle(format!(
                    "closed forms exist for phase-damping and phase-flip, not {}",
                    spec.name()
                )))
            }
        };
        Ok(move |tau: f64| {
            if phase_damping {
                Ok((oracle::pd_heat(tau, &cfg), oracle::pd_coherence(tau, &cfg)))
            } else {
                Ok((oracle::pf_heat(tau, &cfg)?, oracle::pf_coherence(tau, &cfg)?))
            }
        })
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    channel: Option<Value>,
    rate: Option<f64>,
    theta: Option<Value>,
    phi: Option<f64>,
    e_g: Option<f64>,
    e_e: Option<f64>,
    hamiltonian_diagonal: Option<Vec<String>>,
    tau_max: Option<f64>,
    steps: Option<usize>,
    emit_oracle: Option<bool>,
}

fn channel_from_value(value: Value, base: &Path) -> Result<ChannelDescriptor, ConfigError> {
    match value {
        Value::String(s) => match ChannelDescriptor::parse(&s)? {
            ChannelDescriptor::CustomFile(p) if p.is_relative() => Ok(ChannelDescriptor::CustomFile(base.join(p))),
            other => Ok(other),
        },
        obj @ Value::Object(_) => Ok(ChannelDescriptor::Inline(obj)),
        other => Err(ConfigError::Channel(ChannelError::Schema(format!(
            "channel must be a name or an object, got {other}"
        )))),
    }
}

fn theta_from_value(value: &Value) -> Result<f64, ConfigError> {
    match value {
        Value::Number(n) => n.as_f64().ok_or_else(|| ConfigError::Theta(n.to_string())),
        Value::String(s) => parse_theta(s),
        other => Err(ConfigError::Theta(other.to_string())),
    }
}

#[derive(Debug, Parser)]
#[command(name = "qfirstlaw", version, about = "Work, heat and coherence of a qubit under Kraus channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment and write its trajectory CSV.
    Simulate(SimulateArgs),
    /// Regenerate the data behind a figure, with oracle columns and a report.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Run every acceptance check and print one line per check.
    Verify {
        /// Tolerance for the quadrature checks instead of their defaults.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Print the Kraus operators at time t and their completeness deviation.
    ChannelInfo {
        #[arg(long)]
        channel: String,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long)]
        rate: Option<f64>,
    },
}

#[derive(Debug, Default, clap::Args)]
pub struct SimulateArgs {
    /// JSON file with ExperimentConfig fields; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// phase-damping, phase-flip, bit-flip, bit-phase-flip or custom:<file>
    #[arg(long)]
    pub channel: Option<String>,
    #[arg(long)]
    pub rate: Option<f64>,
    /// Radians, or pi/N
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub eg: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub ee: Option<f64>,
    #[arg(long)]
    pub tau_max: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub emit_oracle: bool,
    #[arg(long)]
    pub out: PathBuf,
}

impl SimulateArgs {
    /// File values first, then flags on top, then defaults for the rest.
    pub fn to_config(&self) -> Result<ExperimentConfig, ConfigError> {
        let (file, base) = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                    path: path.clone(),
                    source,
                })?;
                let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
                (serde_json::from_str::<FileConfig>(&text)?, base)
            }
            None => (FileConfig::default(), PathBuf::new()),
        };
        let channel = match (&self.channel, file.channel) {
            (Some(s), _) => ChannelDescriptor::parse(s)?,
            (None, Some(v)) => channel_from_value(v, &base)?,
            (None, None) => return Err(ConfigError::MissingChannel),
        };
        let mut cfg = ExperimentConfig::new(channel);
        cfg.rate = self.rate.or(file.rate);
        cfg.theta = match (&self.theta, &file.theta) {
            (Some(s), _) => parse_theta(s)?,
            (None, Some(v)) => theta_from_value(v)?,
            (None, None) => cfg.theta,
        };
        cfg.phi = self.phi.or(file.phi).unwrap_or(cfg.phi);
        cfg.e_g = self.eg.or(file.e_g).unwrap_or(cfg.e_g);
        cfg.e_e = self.ee.or(file.e_e).unwrap_or(cfg.e_e);
        cfg.hamiltonian_diagonal = file.hamiltonian_diagonal;
        cfg.tau_max = self.tau_max.or(file.tau_max).unwrap_or(cfg.tau_max);
        cfg.steps = self.steps.or(file.steps).unwrap_or(cfg.steps);
        cfg.emit_oracle = self.emit_oracle || file.emit_oracle.unwrap_or(false);
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// Phase damping.
    Fig2,
    /// Phase flip.
    Fig3,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
        }
    }

    pub fn config(self) -> ExperimentConfig {
        let kind = match self {
            Figure::Fig2 => ChannelKind::PhaseDamping,
            Figure::Fig3 => ChannelKind::PhaseFlip,
        };
        ExperimentConfig {
            emit_oracle: true,
            ..ExperimentConfig::builtin(kind)
        }
    }
}

/// Result of one run.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub ledger: EnergeticsLedger,
    pub csv: TrajectoryCsv,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Experiment, RunError> {
    let grid = config.grid()?;
    let spec = config.channel.resolve(config.rate)?;
    let h = config.hamiltonian()?;
    let rho0 = config.initial_state();
    let oracle = if config.emit_oracle { Some(config.oracle(&spec)?) } else { None };
    let (_, ledger) = firstlaw::run(&spec, &rho0, &h, &grid)?;
    let mut csv = TrajectoryCsv::from_ledger(&ledger);
    if let Some(f) = oracle {
        csv = csv.with_oracle(f)?;
    }
    Ok(Experiment {
        config: config.clone(),
        ledger,
        csv,
    })
}

/// The text report written next to a reproduced figure.
pub fn figure_report(figure: Figure, exp: &Experiment) -> String {
    let rows = exp.csv.rows();
    let max_by = |f: &dyn Fn(&crate::csv::CsvRow) -> f64| rows.iter().map(|r| f(r).abs()).fold(0.0, f64::max);
    let heat_dev = max_by(&|r| r.heat - r.oracle.map_or(f64::NAN, |o| o.0));
    let coh_dev = max_by(&|r| r.coherence - r.oracle.map_or(f64::NAN, |o| o.1));
    let peak = rows
        .iter()
        .max_by(|a, b| a.heat.total_cmp(&b.heat))
        .expect("non-empty trajectory");
    let last = exp.ledger.last();
    let mut s = String::new();
    s.push_str(&format!("figure: {} ({})\n", figure.name(), exp.config.channel_name()));
    s.push_str(&format!(
        "grid: tau in [0, {}], {} steps\n",
        exp.config.tau_max, exp.config.steps
    ));
    s.push_str(&format!("max |heat - heat_oracle|: {}\n", format_number(heat_dev)));
    s.push_str(&format!("max |coherence - coherence_oracle|: {}\n", format_number(coh_dev)));
    s.push_str(&format!("max |heat + coherence|: {}\n", format_number(max_by(&|r| r.heat + r.coherence))));
    s.push_str(&format!("max |delta_u|: {}\n", format_number(max_by(&|r| r.delta_u))));
    s.push_str(&format!("max |work|: {}\n", format_number(max_by(&|r| r.work))));
    s.push_str(&format!(
        "max |delta_u - (work + heat + coherence)|: {}\n",
        format_number(exp.ledger.max_closure_residual())
    ));
    s.push_str(&format!("heat peak: {} at tau = {}\n", format_number(peak.heat), format_number(peak.tau)));
    s.push_str(&format!("final heat: {}\n", format_number(last.heat)));
    s
}

impl ExperimentConfig {
    fn channel_name(&self) -> String {
        match &self.channel {
            ChannelDescriptor::Builtin(k) => ChannelSpec::new(k.clone(), 1.0).map(|s| s.name().to_string()).unwrap_or_default(),
            ChannelDescriptor::CustomFile(p) => format!("custom:{}", p.display()),
            ChannelDescriptor::Inline(_) => "custom".to_string(),
        }
    }
}

/// Renders one Kraus operator, one row per line.
pub fn format_matrix(m: &ComplexMatrix) -> String {
    let real = m.as_slice().iter().all(|z| z.im == 0.0);
    let mut out = String::new();
    for i in 0..m.rows() {
        let cells: Vec<String> = (0..m.cols())
            .map(|j| {
                let z = m[(i, j)];
                if real {
                    format!("{:>11.7}", z.re + 0.0)
                } else {
                    format!("{:>11.7}{:+.7}i", z.re + 0.0, z.im + 0.0)
                }
            })
            .collect();
        out.push_str(&format!("  [{}]\n", cells.join(", ")));
    }
    out
}

fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = args
        .to_config()
        .map_err(RunError::from)
        .and_then(|cfg| run_experiment(&cfg));
    let exp = match result {
        Ok(exp) => exp,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return e.exit_code();
        }
    };
    if let Err(source) = exp.csv.write_to(&args.out) {
        let _ = writeln!(err, "error: cannot write {}: {source}", args.out.display());
        return EXIT_NUMERIC;
    }
    let last = exp.ledger.last();
    let _ = writeln!(
        out,
        "tau={} delta_u={} work={} heat={} coherence={} residual={}",
        format_number(last.tau),
        format_number(last.delta_u),
        format_number(last.work),
        format_number(last.heat),
        format_number(last.coherence),
        format_number(exp.ledger.max_closure_residual()),
    );
    EXIT_OK
}

fn cmd_reproduce(figure: Figure, out_dir: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let exp = match run_experiment(&figure.config()) {
        Ok(exp) => exp,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return e.exit_code();
        }
    };
    let csv_path = out_dir.join(format!("{}.csv", figure.name()));
    let report_path = out_dir.join(format!("{}_report.txt", figure.name()));
    let report = figure_report(figure, &exp);
    let written = std::fs::create_dir_all(out_dir)
        .and_then(|_| exp.csv.write_to(&csv_path))
        .and_then(|_| std::fs::write(&report_path, &report));
    if let Err(source) = written {
        let _ = writeln!(err, "error: cannot write to {}: {source}", out_dir.display());
        return EXIT_NUMERIC;
    }
    let _ = write!(out, "{report}");
    let _ = writeln!(out, "wrote {} and {}", csv_path.display(), report_path.display());
    EXIT_OK
}

fn cmd_verify(tol: Option<f64>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    if let Some(t) = tol {
        if !(t.is_finite() && t > 0.0) {
            let _ = writeln!(err, "error: --tol must be positive, got {t}");
            return EXIT_USAGE;
        }
    }
    let results = verify::run_all(&verify::VerifyOptions { quadrature_tol: tol });
    for r in &results {
        let _ = writeln!(out, "{r}");
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    let _ = writeln!(out, "{} checks, {} failed", results.len(), failed);
    if failed == 0 {
        EXIT_OK
    } else {
        EXIT_VERIFY
    }
}

fn cmd_channel_info(channel: &str, t: f64, rate: Option<f64>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let spec = match ChannelDescriptor::parse(channel).and_then(|d| d.resolve(rate)) {
        Ok(spec) => spec,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let set = match channel::kraus_at(&spec, t) {
        Ok(set) => set,
        Err(e @ ChannelError::NegativeTime(_)) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_NUMERIC;
        }
    };
    let _ = writeln!(out, "channel: {} rate={} t={}", spec.name(), spec.rate, t);
    for (i, k) in set.operators.iter().enumerate() {
        let _ = writeln!(out, "K{i} =");
        let _ = write!(out, "{}", format_matrix(k));
    }
    let report = channel::validate_cptp(&set, verify::CPTP_TOLERANCE);
    let deviation = report.checks.iter().map(|c| c.deviation).fold(0.0, f64::max);
    let status = if report.passed() { "ok" } else { "FAILED" };
    let _ = writeln!(out, "cptp deviation: {deviation:.3e} ({status})");
    if report.passed() {
        EXIT_OK
    } else {
        EXIT_VERIFY
    }
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match cli.command {
        Command::Simulate(args) => cmd_simulate(&args, out, err),
        Command::Reproduce { figure, out_dir } => cmd_reproduce(figure, &out_dir, out, err),
        Command::Verify { tol } => cmd_verify(tol, out, err),
        Command::ChannelInfo { channel, t, rate } => cmd_channel_info(&channel, t, rate, out, err),
    }
}

/// Parses `args` (program name first) and runs the command on stdout/stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock()),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_OK
            }
        }
    }
}
