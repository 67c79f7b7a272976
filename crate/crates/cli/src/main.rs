use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nfb_cli::{
    cmd_bound, cmd_exponents, cmd_optimize, cmd_simulate, emit, CliError, CliResult, ExponentsOpts,
    SimulateOpts, FIG1_K_MAX,
};
use nfb_core::feedback_exponent::DEFAULT_K_MAX;
use nfb_core::{ExpurgationEval, FeedbackOptimizer};

/// Error exponents and Monte-Carlo campaigns for interactive AWGN feedback.
#[derive(Debug, Parser)]
#[command(name = "nfb", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exponent curves normalized by snr, as CSV.
    Exponents {
        #[arg(long, allow_hyphen_values = true)]
        snr_db: f64,
        #[arg(long, allow_hyphen_values = true)]
        dsnr_db: f64,
        /// Number of uniformly spaced R/C points over [0, 1].
        #[arg(long, default_value_t = 50)]
        grid: usize,
        /// Use the two fixed 50-point grids of the reference figure.
        #[arg(long)]
        fig1: bool,
        /// Evaluate the expurgation branch in cancellation-free form.
        #[arg(long)]
        compensated: bool,
        /// Largest number of rounds searched (default 64, or 11 with --fig1).
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimize rounds and looseness at one rate.
    Optimize {
        #[arg(long, allow_hyphen_values = true)]
        snr_db: f64,
        #[arg(long, allow_hyphen_values = true)]
        dsnr_db: f64,
        /// Rate in bits per channel use.
        #[arg(long, default_value_t = 0.0)]
        rate: f64,
        #[arg(long)]
        compensated: bool,
        #[arg(long, default_value_t = DEFAULT_K_MAX)]
        k_max: usize,
    },
    /// High-snr closed-form lower bound.
    Bound {
        #[arg(long, allow_hyphen_values = true)]
        snr_db: f64,
        #[arg(long, allow_hyphen_values = true)]
        dsnr_db: f64,
        #[arg(long, default_value_t = 0.0)]
        rate: f64,
        /// Number of rounds (> 1); defaults to the zero-rate rule.
        #[arg(long)]
        rounds: Option<usize>,
    },
    /// Monte-Carlo campaign from a configuration file, as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// Overrides the seed in the configuration file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn optimizer(compensated: bool, k_max: usize) -> FeedbackOptimizer {
    let eval = if compensated {
        ExpurgationEval::Compensated
    } else {
        ExpurgationEval::Direct
    };
    FeedbackOptimizer::new(k_max).with_eval(eval)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Exponents {
            snr_db,
            dsnr_db,
            grid,
            fig1,
            compensated,
            k_max,
            out,
        } => {
            let k_max = k_max.unwrap_or(if fig1 { FIG1_K_MAX } else { DEFAULT_K_MAX });
            if k_max == 0 {
                return Err(CliError::Usage("--k-max must be >= 1".into()));
            }
            let csv = cmd_exponents(&ExponentsOpts {
                snr_db,
                dsnr_db,
                grid,
                fig1,
                optimizer: optimizer(compensated, k_max),
            })?;
            emit(out.as_deref(), &csv)
        }
        Command::Optimize {
            snr_db,
            dsnr_db,
            rate,
            compensated,
            k_max,
        } => emit(
            None,
            &cmd_optimize(snr_db, dsnr_db, rate, optimizer(compensated, k_max))?.render(),
        ),
        Command::Bound {
            snr_db,
            dsnr_db,
            rate,
            rounds,
        } => emit(None, &cmd_bound(snr_db, dsnr_db, rate, rounds)?.render()),
        Command::Simulate {
            config,
            trials,
            seed,
            out,
        } => {
            let (csv, report) = cmd_simulate(&SimulateOpts {
                config,
                trials,
                seed,
            })?;
            match out {
                Some(path) => {
                    emit(Some(&path), &csv)?;
                    emit(None, &report.render())
                }
                None => emit(None, &csv),
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::debug!("{e:?}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
