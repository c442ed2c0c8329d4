//! Command-line experiments.
//!
//! Exit codes: 0 when every check passes, 1 when a scientific check fails,
//! 2 on usage, configuration or I/O errors.

mod commands;
mod output;

use std::ffi::OsString;
use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::lattice::Placement;

pub use commands::{scaling_study, ScalingRow, ScalingStudy, FIDELITY_FLOOR, SCHEDULE_TEXT_CAP};
pub use output::to_json;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Default `n` samples for scaling runs: `2^4 .. 2^16`.
pub fn default_samples() -> Vec<usize> {
    (4..=16).map(|k| 1usize << k).collect()
}

#[derive(Debug, Parser)]
#[command(name = "fanout", version, about = "Fanout and broadcast schedules under power-law interactions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plan a fanout schedule and, for small n, verify it by simulation.
    Fanout {
        #[command(flatten)]
        common: CommonArgs,
        /// Skip simulation; write plan-level artifacts only.
        #[arg(long)]
        schedule_only: bool,
    },
    /// Check the operator-spreading weights of the Fourier transform and fanout.
    VerifyLemma {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Measure broadcast makespans over n and compare with the expected regime.
    Scaling {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated qubit counts.
        #[arg(long, value_delimiter = ',')]
        samples: Option<Vec<usize>>,
    },
    /// Correlation-versus-distance profile of the Fourier transform output.
    Correlation {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        placement: Option<Placement>,
        /// Product input: zero, plus or random.
        #[arg(long)]
        input: Option<String>,
    },
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub dimension: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated approximation bands.
    #[arg(long, value_delimiter = ',')]
    pub band: Option<Vec<usize>>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Contents of a configuration file. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub lattice: LatticeSection,
    pub protocol: ProtocolSection,
    pub analysis: AnalysisSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSection {
    pub dimension: Option<usize>,
    pub extents: Option<Vec<usize>>,
    pub placement: Option<Placement>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolSection {
    pub alpha: Option<f64>,
    pub n: Option<usize>,
    pub root: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    pub bands: Option<Vec<usize>>,
    pub region_radius: Option<f64>,
    pub samples: Option<Vec<usize>>,
    pub input: Option<String>,
    pub schedule_only: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Settings after merging defaults, the config file and flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub seed: u64,
    pub dimension: usize,
    pub extents: Option<Vec<usize>>,
    pub placement: Placement,
    pub alpha: f64,
    pub n: usize,
    pub root: usize,
    pub bands: Option<Vec<usize>>,
    pub region_radius: Option<f64>,
    pub samples: Vec<usize>,
    pub input: String,
    pub schedule_only: bool,
    pub out: PathBuf,
}

impl Settings {
    pub fn resolve(config: ExperimentConfig, flags: &CommonArgs) -> Result<Self, CliError> {
        let extents = config.lattice.extents;
        let dimension = flags
            .dimension
            .or(config.lattice.dimension)
            .or(extents.as_ref().map(Vec::len))
            .unwrap_or(1);
        if let Some(e) = &extents {
            if e.len() != dimension {
                return Err(CliError::Usage(format!(
                    "{} extents given for dimension {dimension}",
                    e.len()
                )));
            }
        }
        Ok(Settings {
            seed: flags.seed.or(config.seed).unwrap_or(0),
            dimension,
            extents,
            placement: config.lattice.placement.unwrap_or(Placement::Canonical),
            alpha: flags.alpha.or(config.protocol.alpha).unwrap_or(1.0),
            n: flags.n.or(config.protocol.n).unwrap_or(3),
            root: config.protocol.root.unwrap_or(0),
            bands: flags.band.clone().or(config.analysis.bands),
            region_radius: config.analysis.region_radius,
            samples: config.analysis.samples.unwrap_or_else(default_samples),
            input: config.analysis.input.unwrap_or_else(|| "random".into()),
            schedule_only: config.analysis.schedule_only.unwrap_or(false),
            out: flags
                .out
                .clone()
                .or(config.output.dir)
                .unwrap_or_else(|| PathBuf::from("out")),
        })
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(crate::Error),
    Io(io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o: {e}"),
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    fn from_pass(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

fn load_settings(common: &CommonArgs) -> Result<Settings, CliError> {
    let config = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    Settings::resolve(config, common)
}

/// Runs one command and returns its exit code.
pub fn execute(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Fanout { common, schedule_only } => load_settings(common).and_then(|mut s| {
            s.schedule_only |= *schedule_only;
            commands::cmd_fanout(&s)
        }),
        Command::VerifyLemma { common } => load_settings(common).and_then(|s| commands::cmd_verify_lemma(&s)),
        Command::Scaling { common, samples } => load_settings(common).and_then(|mut s| {
            if let Some(list) = samples {
                s.samples = list.clone();
            }
            commands::cmd_scaling(&s)
        }),
        Command::Correlation { common, placement, input } => load_settings(common).and_then(|mut s| {
            if let Some(p) = placement {
                s.placement = *p;
            }
            if let Some(i) = input {
                s.input = i.clone();
            }
            commands::cmd_correlation(&s)
        }),
    };
    match result {
        Ok(Verdict::Pass) => EXIT_PASS,
        Ok(Verdict::Fail) => EXIT_FAIL,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            code
        }
    }
}
