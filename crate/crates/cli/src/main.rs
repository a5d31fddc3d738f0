//! Command-line front end: analytic sweeps, Monte-Carlo sweeps, figure
//! reproduction and the oracle self-test.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ris_secrecy::AngleMode;

use output::Format;

/// Exit codes.
pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;
pub const EXIT_SELFTEST: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "ris-secrecy",
    version,
    about = "Secrecy outage of surface-assisted links with Poisson eavesdroppers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the outage probability by quadrature, closed form and asymptote over a grid.
    Analyze(RunArgs),
    /// Estimate the outage probability by Monte-Carlo over a grid.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Regenerate the built-in figure scenarios as per-curve tables.
    Reproduce {
        figure: Figure,
        /// Output directory.
        #[arg(long, default_value = "reproduce")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Run the oracle suite and print a pass/fail table.
    Selftest {
        /// Monte-Carlo trials for the simulation checks.
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 20_240_601)]
        seed: u64,
        /// Also write the full report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// JSON configuration; angles in degrees, c_th in nats unless --cth-bits.
    #[arg(long)]
    config: PathBuf,
    /// Grid over one field: <field>=<start>:<stop>:<step>, stop inclusive.
    #[arg(long)]
    sweep: Option<String>,
    /// Output file; stdout when omitted (no sidecar).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Read c_th (and a c_th sweep) in bits per channel use.
    #[arg(long)]
    cth_bits: bool,
}

#[derive(Args, Debug, Clone)]
struct McArgs {
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = AngleArg::Locked)]
    angle_mode: AngleArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AngleArg {
    Locked,
    Geometric,
}

impl From<AngleArg> for AngleMode {
    fn from(a: AngleArg) -> Self {
        match a {
            AngleArg::Locked => AngleMode::Locked,
            AngleArg::Geometric => AngleMode::Geometric,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig3,
    Fig7,
}

/// Maps an error chain to an exit code: numerical failures from the core
/// library give 2, everything else (bad input, I/O) gives 1.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<ris_secrecy::Error>() {
            return if e.is_validation() {
                EXIT_VALIDATION
            } else {
                EXIT_NUMERICAL
            };
        }
    }
    EXIT_VALIDATION
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Analyze(run) => commands::analyze(&run),
        Command::Simulate { run, mc } => commands::simulate(&run, &mc),
        Command::Reproduce {
            figure,
            out,
            format,
            mc,
        } => commands::reproduce(figure, &out, format, &mc),
        Command::Selftest { trials, seed, out } => commands::selftest(trials, seed, out.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
