//! Command-line harness for the coherent-state NOMA rate and allocation library.
//!
//! Every run resolves one scenario (preset, then file, then flags), executes a
//! subcommand on a dedicated thread pool and writes CSV tables plus
//! `manifest.json` into the output directory.

pub mod output;
pub mod presets;
pub mod run;
pub mod scenario;

use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use output::{write_run, Manifest, RunOutput};
use scenario::{Overrides, Scenario};

pub const OUT_ENV: &str = "NOMA_OQC_OUT";

#[derive(Debug, Parser)]
#[command(
    name = "noma-oqc",
    version,
    about = "Sum-rate and power allocation for coherent-state NOMA links"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Scenario TOML file; its values override the preset.
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,
    /// Built-in scenario (fig2 .. fig9).
    #[arg(long, global = true)]
    pub preset: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, env = OUT_ENV, default_value = "out")]
    pub out: PathBuf,
    /// sca, sampled, oma, enp or ia.
    #[arg(long, global = true)]
    pub algorithm: Option<String>,
    /// Channel realizations per point.
    #[arg(long, global = true)]
    pub realizations: Option<usize>,
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact rate, Gaussian bounds and asymptotic value for one allocation.
    Rate,
    /// Power allocation per channel realization.
    Allocate,
    /// Rate against power or user count for several algorithms.
    Sweep,
    /// Two-user achievable region and the orthogonal-access point.
    Region,
    /// Holevo, SQL and AWGN reference capacities.
    Limits,
    /// Square-root-measurement sum-rate of superposed QAM.
    Qam {
        /// Single constellation order instead of the scenario list.
        #[arg(long)]
        order: Option<usize>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Rate => "rate",
            Self::Allocate => "allocate",
            Self::Sweep => "sweep",
            Self::Region => "region",
            Self::Limits => "limits",
            Self::Qam { .. } => "qam",
        }
    }
}

/// Resolves the scenario for `common`.
pub fn load_scenario(common: &CommonArgs) -> Result<Scenario> {
    if common.preset.is_none() && common.scenario.is_none() {
        bail!("pass --preset NAME or --scenario FILE");
    }
    let text = match &common.scenario {
        Some(p) => Some(std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?),
        None => None,
    };
    let overrides = Overrides {
        seed: common.seed,
        algorithm: common.algorithm.clone(),
        realizations: common.realizations,
    };
    Scenario::load(common.preset.as_deref(), text.as_deref(), &overrides)
}

/// Runs `command` on a pool of `threads` workers.
pub fn execute(command: &Command, scenario: &Scenario, threads: usize) -> Result<RunOutput> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    let order = match command {
        Command::Qam { order } => *order,
        _ => None,
    };
    pool.install(|| run::execute(command.name(), scenario, order))
}

/// Full CLI run: resolve, execute, write. Returns the manifest path.
pub fn run_cli(cli: &Cli) -> Result<PathBuf> {
    let scenario = load_scenario(&cli.common)?;
    let threads = match cli.common.threads {
        Some(0) => bail!("--threads must be at least 1"),
        Some(n) => n,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    let started = Instant::now();
    let started_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let out = execute(&cli.command, &scenario, threads)?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name().into(),
        preset: scenario.preset.clone(),
        seed: scenario.seed,
        threads,
        realizations: scenario.channel.realizations,
        scenario_file: String::new(),
        scenario_sha256: String::new(),
        started_unix_seconds: started_unix,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        warnings: Vec::new(),
        outputs: Vec::new(),
    };
    write_run(&cli.common.out, &out, manifest, &scenario.to_toml())
}
