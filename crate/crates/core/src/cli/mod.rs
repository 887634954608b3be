//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when input cannot be read or parsed, 2 when
//! parsed input violates a domain invariant.

mod figures;
mod scan;

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::channels::ChannelSpec;
use crate::dynamics::{detect_events, sweep_spec, Event};
use crate::measures::{correlation_report, CorrelationReport};
use crate::numerics::fmt_sig12;
use crate::states::StateSpec;

pub use figures::FIGURE_NAMES;
pub use scan::{bounds_scan, ScanSummary};

/// Default sample count for `bounds-scan`.
pub const DEFAULT_SAMPLES: usize = 100_000;

#[derive(Debug, Parser)]
#[command(name = "qcorr", version, about = "Bell violation and geometric discord of two-qubit states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report B, D_G and concurrence for one state.
    Measure,
    /// Sample Bell-diagonal states and check the B–D_G corridor.
    BoundsScan,
    /// Evolve a state through a channel over a parameter grid.
    Evolve,
    /// Detect violation death/revival, discord zeros and maxima.
    Events,
    /// Write the datasets behind one figure.
    Figure {
        /// fig1 … fig6
        name: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Default, Args)]
pub struct Opts {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// State spec JSON file.
    #[arg(long, global = true)]
    pub state: Option<PathBuf>,
    /// Channel spec JSON file.
    #[arg(long, global = true)]
    pub channel: Option<PathBuf>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (figure: output directory).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

/// Fields of a `--config` file. State and channel specs are inline objects.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default)]
    pub state: Option<StateSpec>,
    #[serde(default)]
    pub channel: Option<ChannelSpec>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input.
    Input(String),
    /// Well-formed input outside the model's domain.
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Domain(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Domain(m) => write!(f, "domain error: {m}"),
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    configure_threads();
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qcorr: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() {
    let Ok(v) = std::env::var("QCORR_THREADS") else {
        return;
    };
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        _ => eprintln!("qcorr: ignoring QCORR_THREADS={v:?} (expected a positive integer)"),
    }
}

/// Resolved settings after merging the config file and flags.
struct Settings {
    state: Option<StateSpec>,
    channel: Option<ChannelSpec>,
    samples: Option<usize>,
    seed: u64,
    out: Option<PathBuf>,
    format: Option<Format>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> CliResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {what} file {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{what} file {}: {e}", path.display())))
}

fn settings(cli: &Cli) -> CliResult<Settings> {
    let cfg: RunConfig = match &cli.opts.config {
        Some(p) => read_json(p, "config")?,
        None => RunConfig::default(),
    };
    if let Some(c) = &cfg.command {
        let actual = command_name(&cli.command);
        if c != actual {
            return Err(CliError::Input(format!("config is for `{c}` but `{actual}` was invoked")));
        }
    }
    let state = match &cli.opts.state {
        Some(p) => Some(read_json(p, "state")?),
        None => cfg.state,
    };
    let channel = match &cli.opts.channel {
        Some(p) => Some(read_json(p, "channel")?),
        None => cfg.channel,
    };
    Ok(Settings {
        state,
        channel,
        samples: cli.opts.samples.or(cfg.samples),
        seed: cli.opts.seed.or(cfg.seed).unwrap_or(0),
        out: cli.opts.out.clone().or(cfg.output),
        format: cli.opts.format.or(cfg.format),
    })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Measure => "measure",
        Command::BoundsScan => "bounds-scan",
        Command::Evolve => "evolve",
        Command::Events => "events",
        Command::Figure { .. } => "figure",
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let s = settings(cli)?;
    match &cli.command {
        Command::Measure => cmd_measure(&s),
        Command::BoundsScan => cmd_bounds_scan(&s),
        Command::Evolve => cmd_evolve(&s),
        Command::Events => cmd_events(&s),
        Command::Figure { name } => {
            let dir = s.out.clone().unwrap_or_else(|| PathBuf::from(name));
            figures::write_figure(name, &dir, s.samples, s.seed)
        }
    }
}

fn require_state(s: &Settings) -> CliResult<&StateSpec> {
    s.state
        .as_ref()
        .ok_or_else(|| CliError::Input("a state spec is required (--state or config `state`)".into()))
}

fn require_channel(s: &Settings) -> CliResult<&ChannelSpec> {
    s.channel
        .as_ref()
        .ok_or_else(|| CliError::Input("a channel spec is required (--channel or config `channel`)".into()))
}

/// Writes to the output file if one is set, otherwise to stdout.
fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut so = io::stdout().lock();
            so.write_all(text.as_bytes())
                .and_then(|_| so.flush())
                .map_err(|e| CliError::Input(format!("cannot write to stdout: {e}")))
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}

pub const REPORT_CSV_HEADER: &str = "B,m_rho,u1,u2,u3,D_G,k_max,C";

pub fn report_csv(r: &CorrelationReport) -> String {
    let c = r.c.map_or_else(|| "NaN".to_string(), fmt_sig12);
    format!(
        "{REPORT_CSV_HEADER}\n{},{},{},{},{},{},{},{}\n",
        fmt_sig12(r.b),
        fmt_sig12(r.m_rho),
        fmt_sig12(r.u.u1),
        fmt_sig12(r.u.u2),
        fmt_sig12(r.u.u3),
        fmt_sig12(r.d_g),
        fmt_sig12(r.k_max),
        c
    )
}

fn cmd_measure(s: &Settings) -> CliResult<()> {
    let state = require_state(s)?.build()?;
    let report = correlation_report(&state.density());
    let text = match s.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&report),
        Format::Csv => report_csv(&report),
    };
    emit(s.out.as_deref(), &text)
}

fn cmd_bounds_scan(s: &Settings) -> CliResult<()> {
    let n = s.samples.unwrap_or(DEFAULT_SAMPLES);
    if n == 0 {
        return Err(CliError::Domain("samples must be at least 1".into()));
    }
    let (summary, cloud) = bounds_scan(n, s.seed);
    if let Some(p) = &s.out {
        emit(Some(p), &scan::cloud_csv(&cloud))?;
    }
    emit(None, &to_json(&summary))
}

fn cmd_evolve(s: &Settings) -> CliResult<()> {
    let traj = sweep_spec(require_state(s)?, require_channel(s)?)?;
    let text = match s.format.unwrap_or(Format::Csv) {
        Format::Csv => traj.to_csv(),
        Format::Json => to_json(&traj),
    };
    emit(s.out.as_deref(), &text)
}

pub fn events_csv(events: &[Event]) -> String {
    let mut out = String::from("kind,time,value\n");
    for e in events {
        let kind = serde_json::to_value(e.kind).expect("serialisable");
        out.push_str(&format!(
            "{},{},{}\n",
            kind.as_str().unwrap_or_default(),
            fmt_sig12(e.time),
            fmt_sig12(e.value)
        ));
    }
    out
}

fn cmd_events(s: &Settings) -> CliResult<()> {
    let traj = sweep_spec(require_state(s)?, require_channel(s)?)?;
    if traj.len() < 3 {
        return Err(CliError::Domain("event detection needs a grid of at least 3 points".into()));
    }
    let events = detect_events(&traj);
    let text = match s.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&events),
        Format::Csv => events_csv(&events),
    };
    emit(s.out.as_deref(), &text)
}
