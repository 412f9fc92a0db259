// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod format;

use commands::CliError;
use config::RawConfig;

#[derive(Parser)]
#[command(
    name = "hisam",
    version,
    about = "Mean-field authentication frequency negotiation and DTR-MAC tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the per-round negotiation error (round, error, X).
    Negotiate,
    /// Run one policy over all seeds.
    Simulate,
    /// Run every policy across a parameter sweep.
    Grid,
    /// Start the access-point service.
    ServeAp,
    /// Connect as one device.
    RunUe,
    /// Write DTR-MAC conformance vectors, or check a file with --check.
    GenVectors {
        #[arg(long)]
        check: Option<PathBuf>,
    },
}

/// Every option may also come from the --config file; flags win.
#[derive(Args, Default)]
struct Opts {
    /// key = value file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    n: Option<String>,
    #[arg(long, global = true)]
    fp: Option<String>,
    #[arg(long, global = true)]
    fi: Option<String>,
    /// Time unit T in seconds.
    #[arg(long, global = true)]
    time_unit: Option<String>,
    #[arg(long, global = true)]
    mean: Option<String>,
    /// Demand variance; the standard deviation is its square root.
    #[arg(long, global = true)]
    variance: Option<String>,
    /// hisam | fixed_high | fixed_low | demand_driven
    #[arg(long, global = true)]
    policy: Option<String>,
    /// mean | variance | size
    #[arg(long, global = true)]
    sweep: Option<String>,
    /// Comma list overriding the default sweep points.
    #[arg(long, global = true)]
    sweep_values: Option<String>,
    /// Comma list of RNG seeds.
    #[arg(long, global = true)]
    seeds: Option<String>,
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true)]
    listen: Option<String>,
    #[arg(long, global = true)]
    connect: Option<String>,
    /// Simulated span in seconds.
    #[arg(long, global = true)]
    horizon: Option<String>,
    /// population_max | upper_bound
    #[arg(long, global = true)]
    demand_scale: Option<String>,
    /// Device id for run-ue.
    #[arg(long, global = true)]
    id: Option<String>,
    /// Device demand for run-ue.
    #[arg(long, global = true)]
    demand: Option<String>,
    #[arg(long, global = true)]
    auth_rounds: Option<String>,
    #[arg(long, global = true)]
    credential_seed: Option<String>,
    /// Number of conformance vectors.
    #[arg(long, global = true)]
    steps: Option<String>,
    #[arg(long, global = true)]
    vector_seed: Option<String>,
}

impl Opts {
    fn raw(self) -> Result<RawConfig, CliError> {
        let mut raw = match &self.config {
            Some(p) => RawConfig::load(p)?,
            None => RawConfig::default(),
        };
        let pairs = [
            ("n", self.n),
            ("fp", self.fp),
            ("fi", self.fi),
            ("time_unit", self.time_unit),
            ("mean", self.mean),
            ("variance", self.variance),
            ("policy", self.policy),
            ("sweep", self.sweep),
            ("sweep_values", self.sweep_values),
            ("seeds", self.seeds),
            ("out", self.out),
            ("listen", self.listen),
            ("connect", self.connect),
            ("horizon", self.horizon),
            ("demand_scale", self.demand_scale),
            ("id", self.id),
            ("demand", self.demand),
            ("auth_rounds", self.auth_rounds),
            ("credential_seed", self.credential_seed),
            ("steps", self.steps),
            ("vector_seed", self.vector_seed),
        ];
        for (k, v) in pairs {
            raw.set(k, v);
        }
        Ok(raw)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = cli.opts.raw()?.resolve()?;
    match cli.command {
        Command::Negotiate => commands::negotiate(&cfg).map(drop),
        Command::Simulate => commands::simulate(&cfg).map(drop),
        Command::Grid => commands::grid(&cfg).map(drop),
        Command::ServeAp => commands::serve_ap(&cfg).map(drop),
        Command::RunUe => commands::run_ue(&cfg).map(drop),
        Command::GenVectors { check: Some(path) } => {
            let n = commands::check_vectors(&path)?;
            println!("{n} records replay");
            Ok(())
        }
        Command::GenVectors { check: None } => commands::gen_vectors(&cfg).map(drop),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hisam: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
