// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};
use lpvar::Origin;
use lpvar_cli::{
    cmd_calibrate, cmd_cpstudy, cmd_cptest, cmd_pvar, cmd_regress_study, cmd_simulate,
    version_banner, CliError, CliResult, ScaleArg,
};

/// p-variation statistics for short-memory linear processes.
#[derive(Parser, Debug)]
#[command(name = "lpvar")]
struct Cli {
    /// Worker threads for replicate-parallel commands (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a series (linproc, cpm or regression mode) to CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// p-variation of a series read from CSV.
    Pvar {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        p: f64,
        /// Values are observations; the path is their partial sums.
        #[arg(long, conflicts_with = "cumulative")]
        raw: bool,
        /// Values are the path S_1..S_n, anchored at S_0 = 0 (default).
        #[arg(long)]
        cumulative: bool,
        #[arg(long)]
        emit_partition: bool,
    },
    /// Build a critical-value table for ||W||_(p).
    Calibrate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Change-point test on a series.
    Cptest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        cv: PathBuf,
        #[arg(
            long,
            required_unless_present = "estimate_lrv",
            conflicts_with = "estimate_lrv"
        )]
        sigma_eta: Option<f64>,
        #[arg(
            long,
            required_unless_present = "estimate_lrv",
            conflicts_with = "estimate_lrv"
        )]
        a_psi: Option<f64>,
        /// Replace sigma_eta |A_psi| by a Bartlett long-run variance estimate.
        #[arg(long)]
        estimate_lrv: bool,
        #[arg(long, requires = "estimate_lrv")]
        bandwidth: Option<usize>,
    },
    /// Size/power study of the change-point test.
    Cpstudy {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo study of the regression estimator.
    RegressStudy {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

fn run(command: Command) -> CliResult<Option<String>> {
    match command {
        Command::Simulate { config, out } => cmd_simulate(&config, &out).map(|_| None),
        Command::Pvar {
            input,
            p,
            raw,
            cumulative: _,
            emit_partition,
        } => {
            let origin = if raw { Origin::Raw } else { Origin::Cumulative };
            cmd_pvar(&input, p, origin, emit_partition).map(Some)
        }
        Command::Calibrate { config, out } => cmd_calibrate(&config, &out).map(|_| None),
        Command::Cptest {
            input,
            p,
            alpha,
            cv,
            sigma_eta,
            a_psi,
            estimate_lrv,
            bandwidth,
        } => {
            let scale = match (estimate_lrv, sigma_eta, a_psi) {
                (true, ..) => ScaleArg::LongRun { bandwidth },
                (false, Some(sigma_eta), Some(a_psi)) => ScaleArg::Known { sigma_eta, a_psi },
                _ => unreachable!("clap enforces the scale arguments"),
            };
            cmd_cptest(&input, p, alpha, &cv, scale).map(Some)
        }
        Command::Cpstudy { config, out } => cmd_cpstudy(&config, &out).map(|_| None),
        Command::RegressStudy {
            config,
            out,
            summary,
        } => cmd_regress_study(&config, &out, summary.as_deref()),
    }
}

fn main() -> ExitCode {
    let matches = Cli::command().version(version_banner()).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = match cli.workers {
        Some(0) => Err(CliError::Validation("--workers must be positive".into())),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| CliError::Runtime(e.to_string()))
            .and_then(|pool| pool.install(|| run(cli.command))),
        None => run(cli.command),
    };
    match result {
        Ok(Some(text)) => {
            println!("{text}");
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
