//! Command-line front end for the cvqkd simulator.
//!
//! Subcommands: `fig3` (full-interception excess noise vs transmission),
//! `fig4` (excess noise vs interception fraction), `fig5` (information rates
//! vs excess noise) and `run` (one end-to-end transmission from a config
//! file). Exit codes: 0 success, 2 invalid configuration, 3 estimation
//! failure.

mod runfile;

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cvqkd::estimation::EstimationError;
use cvqkd::experiment::{
    fig3_csv, fig4_csv, fig5_csv, run_report, BlockConfig, RunError, Scenario, SecurityParams,
};
use cvqkd::{AttackSpec, DetectorModel, ModulationParams};

const EXIT_CONFIG: u8 = 2;
const EXIT_ESTIMATION: u8 = 3;

#[derive(Parser)]
#[command(
    name = "cvqkd",
    version,
    about = "Coherent-state CV-QKD attack simulator: parameter sweeps, channel estimation and key-rate verdicts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Base RNG seed
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Blocks per sweep point (default: 20 for fig3, 50 for fig4, 10 for fig5)
    #[arg(long)]
    blocks: Option<usize>,
    /// Alice's modulation variance V_A, in shot-noise units
    #[arg(long, default_value_t = 36.6)]
    va: f64,
    /// Bob's homodyne detector efficiency, in (0, 1]
    #[arg(long, default_value_t = 0.6)]
    eta: f64,
    /// Technical excess noise eps_T, input-referred shot-noise units
    #[arg(long = "eps-t", default_value_t = 0.1)]
    eps_t: f64,
    /// Pulses revealed per block for channel estimation
    #[arg(long = "reveal-m", default_value_t = 5000)]
    reveal_m: usize,
    /// Reconciliation efficiency beta, in [0, 1]
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Excess-noise security margin, in standard errors
    #[arg(long, default_value_t = 1.0)]
    nsigma: f64,
    /// Write the CSV to this path instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Excess noise measured under full interception, swept over channel
    /// transmission. CSV: T,chi_hat,chi0_hat,eps_hat,se_eps
    Fig3 {
        #[command(flatten)]
        common: CommonArgs,
        /// Transmission grid (comma separated, each in (0, 1])
        #[arg(long = "t-grid", value_delimiter = ',')]
        t_grid: Option<Vec<f64>>,
    },
    /// Excess noise versus interception fraction, averaged over a
    /// transmission grid. CSV: mu,eps_mean,eps_spread
    Fig4 {
        #[command(flatten)]
        common: CommonArgs,
        /// Interception-fraction grid (comma separated, each in [0, 1])
        #[arg(long = "mu-grid", value_delimiter = ',')]
        mu_grid: Option<Vec<f64>>,
        /// Transmission grid averaged over per point
        #[arg(long = "t-grid", value_delimiter = ',')]
        t_grid: Option<Vec<f64>>,
    },
    /// Information rates versus excess noise (eps = 2*mu + eps_T) per
    /// transmission. CSV: T,mu,eps,i_ab,i_be_bs,i_be_partial,
    /// i_be_partial_mc,i_be_partial_mc_se,i_be_g
    Fig5 {
        #[command(flatten)]
        common: CommonArgs,
        /// Transmission grid
        #[arg(long = "t-grid", value_delimiter = ',')]
        t_grid: Option<Vec<f64>>,
        /// Interception-fraction grid driving the excess-noise axis
        #[arg(long = "mu-grid", value_delimiter = ',')]
        mu_grid: Option<Vec<f64>>,
    },
    /// One end-to-end transmission from a flat key-value config file;
    /// flags override file values
    Run {
        /// Config file (keys mirror the flag names, plus `t` and `mu`)
        config: PathBuf,
        #[command(flatten)]
        overrides: RunOverrides,
    },
}

#[derive(Args)]
struct RunOverrides {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    blocks: Option<usize>,
    /// Pulses per block
    #[arg(long)]
    pulses: Option<usize>,
    /// Synchronization pulses reserved per block
    #[arg(long = "test-pulses")]
    test_pulses: Option<usize>,
    #[arg(long)]
    va: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long = "eps-t")]
    eps_t: Option<f64>,
    #[arg(long = "reveal-m")]
    reveal_m: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    nsigma: Option<f64>,
    /// Channel transmission T
    #[arg(long)]
    t: Option<f64>,
    /// Interception fraction mu
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    Config(String),
    Estimation(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Estimation(_) => EXIT_ESTIMATION,
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) | CliError::Estimation(msg) | CliError::Io(msg) => {
                write!(f, "{msg}")
            }
        }
    }
}

impl From<RunError> for CliError {
    fn from(err: RunError) -> Self {
        match &err {
            RunError::Estimation(inner) => {
                // data-dependent failures are a separate exit code so sweep
                // harnesses can tell them from bad invocations
                if matches!(inner, EstimationError::UnmeasurableTransmission) {
                    CliError::Estimation(err.to_string())
                } else {
                    CliError::Config(err.to_string())
                }
            }
            _ => CliError::Config(err.to_string()),
        }
    }
}

impl From<cvqkd::ParamError> for CliError {
    fn from(err: cvqkd::ParamError) -> Self {
        CliError::Config(err.to_string())
    }
}

fn grid(step_milli: u64, from_milli: u64, to_milli: u64) -> Vec<f64> {
    (from_milli..=to_milli)
        .step_by(step_milli as usize)
        .map(|m| m as f64 / 1000.0)
        .collect()
}

fn emit(csv: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, csv)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn scenario_for_sweeps(common: &CommonArgs) -> Result<Scenario, CliError> {
    // sweep engines override mu and T per grid point; only eps_t matters here
    Ok(Scenario {
        attack: AttackSpec::new(0.0, 1.0, common.eps_t)?,
        modulation: ModulationParams::new(common.va)?,
        detector: DetectorModel::new(common.eta)?,
        security: SecurityParams::new(common.beta, common.nsigma)?,
    })
}

fn block_config(common: &CommonArgs, default_blocks: usize) -> Result<BlockConfig, CliError> {
    Ok(BlockConfig::new(
        50_000,
        10_000,
        common.reveal_m,
        common.blocks.unwrap_or(default_blocks),
        common.seed,
    )?)
}

fn cmd_fig3(common: CommonArgs, t_grid: Option<Vec<f64>>) -> Result<(), CliError> {
    let cfg = block_config(&common, 20)?;
    let scenario = scenario_for_sweeps(&common)?;
    let t_grid = t_grid.unwrap_or_else(|| grid(100, 100, 1000));
    let csv = fig3_csv(&cfg, &scenario, &t_grid)?;
    emit(&csv, common.out.as_ref())
}

fn cmd_fig4(
    common: CommonArgs,
    mu_grid: Option<Vec<f64>>,
    t_grid: Option<Vec<f64>>,
) -> Result<(), CliError> {
    let cfg = block_config(&common, 50)?;
    let scenario = scenario_for_sweeps(&common)?;
    let mu_grid = mu_grid.unwrap_or_else(|| vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    let t_grid = t_grid.unwrap_or_else(|| vec![0.25, 0.5, 0.75, 0.9]);
    let csv = fig4_csv(&cfg, &scenario, &mu_grid, &t_grid)?;
    emit(&csv, common.out.as_ref())
}

fn cmd_fig5(
    common: CommonArgs,
    t_grid: Option<Vec<f64>>,
    mu_grid: Option<Vec<f64>>,
) -> Result<(), CliError> {
    let cfg = block_config(&common, 10)?;
    let scenario = scenario_for_sweeps(&common)?;
    let t_grid = t_grid.unwrap_or_else(|| vec![0.1, 0.25, 0.9]);
    let mu_grid = mu_grid.unwrap_or_else(|| grid(100, 0, 1000));
    let csv = fig5_csv(&cfg, &scenario, &t_grid, &mu_grid)?;
    emit(&csv, common.out.as_ref())
}

fn cmd_run(config_path: PathBuf, overrides: RunOverrides) -> Result<(), CliError> {
    let text = fs::read_to_string(&config_path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", config_path.display())))?;
    let file = runfile::parse(&text).map_err(|e| {
        CliError::Config(format!("config {}: {e}", config_path.display()))
    })?;

    let t = overrides.t.or(file.t).ok_or_else(|| {
        CliError::Config("channel transmission `t` must be set in the config or via --t".into())
    })?;
    let mu = overrides.mu.or(file.mu).ok_or_else(|| {
        CliError::Config("interception fraction `mu` must be set in the config or via --mu".into())
    })?;

    let cfg = BlockConfig::new(
        overrides.pulses.or(file.pulses).unwrap_or(50_000),
        overrides.test_pulses.or(file.test_pulses).unwrap_or(10_000),
        overrides.reveal_m.or(file.reveal_m).unwrap_or(5_000),
        overrides.blocks.or(file.blocks).unwrap_or(1),
        overrides.seed.or(file.seed).unwrap_or(1),
    )?;
    let scenario = Scenario {
        attack: AttackSpec::new(mu, t, overrides.eps_t.or(file.eps_t).unwrap_or(0.1))?,
        modulation: ModulationParams::new(overrides.va.or(file.va).unwrap_or(36.6))?,
        detector: DetectorModel::new(overrides.eta.or(file.eta).unwrap_or(0.6))?,
        security: SecurityParams::new(
            overrides.beta.or(file.beta).unwrap_or(1.0),
            overrides.nsigma.or(file.nsigma).unwrap_or(1.0),
        )?,
    };

    let summary = run_report(&cfg, &scenario)?;
    print!("{}", summary.report);

    let out = overrides.out.or(file.out.map(PathBuf::from));
    match out {
        Some(path) => {
            fs::write(&path, &summary.csv)
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
            println!("\nper-block CSV written to {}", path.display());
        }
        None => {
            println!("\nper-block CSV:");
            print!("{}", summary.csv);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fig3 { common, t_grid } => cmd_fig3(common, t_grid),
        Command::Fig4 {
            common,
            mu_grid,
            t_grid,
        } => cmd_fig4(common, mu_grid, t_grid),
        Command::Fig5 {
            common,
            t_grid,
            mu_grid,
        } => cmd_fig5(common, t_grid, mu_grid),
        Command::Run { config, overrides } => cmd_run(config, overrides),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
