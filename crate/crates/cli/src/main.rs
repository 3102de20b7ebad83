//! `entrate`: compression-based tests for serial dependence.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};
use entrate::{Error, ErrorKind};

use commands::{
    AcfCmd, CalibrateCmd, DiscretizeCmd, EntropyCmd, GenerateCmd, PipelineCmd, RankplotCmd, SdfCmd,
    TestCmd,
};

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_CODEC: u8 = 3;
pub const EXIT_PRECONDITION: u8 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "entrate",
    about = "Entropy-rate estimation and serial-dependence tests via LZMA compression"
)]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Measure codec overhead on incompressible input and write a calibration table.
    Calibrate(CalibrateCmd),
    /// Rank-discretize a series and write raw symbols.
    Discretize(DiscretizeCmd),
    /// Write rank-plot data (index,state) for a series.
    Rankplot(RankplotCmd),
    /// Generate a synthetic series.
    Generate(GenerateCmd),
    /// Block-versus-full shuffle test of serial independence.
    Test(TestCmd),
    /// Shuffled compression ratios across block sizes, serial dependence function and gaps.
    Sdf(SdfCmd),
    /// Sample autocorrelation function.
    Acf(AcfCmd),
    /// Exact entropy of a pmf, entropy rate of a Markov chain, or CR conversion.
    Entropy(EntropyCmd),
    /// Run a sequence of subcommands from a JSON file.
    Pipeline(PipelineCmd),
}

pub fn command() -> clap::Command {
    let version: &'static str = Box::leak(
        format!(
            "{} codec={}/{}",
            env!("CARGO_PKG_VERSION"),
            entrate::compress::LZMA,
            entrate::compress::codec_version()
        )
        .into_boxed_str(),
    );
    Cli::command().version(version)
}

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Input => EXIT_INPUT,
        ErrorKind::Codec => EXIT_CODEC,
        ErrorKind::Precondition => EXIT_PRECONDITION,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let matches = command().get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
