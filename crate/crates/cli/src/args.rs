use std::path::PathBuf;

use clap::{Args, ValueEnum};
use entrate::ingest::IngestOptions;
use entrate::{CodecConfig, Container};
use serde::Serialize;

#[derive(Debug, Clone, Args, Serialize)]
pub struct InputArgs {
    /// Series file: one number per line, or comma-separated columns.
    #[arg(long)]
    pub input: PathBuf,
    /// 1-based column holding the values.
    #[arg(long, default_value_t = 1)]
    pub column: usize,
    /// 1-based column holding numeric, strictly increasing timestamps.
    #[arg(long)]
    pub time_column: Option<usize>,
    /// Treat values as prices and use log(p_t / p_{t-1}).
    #[arg(long)]
    pub log_returns: bool,
    /// Skip the first record (column names).
    #[arg(long)]
    pub header: bool,
    /// Values are already integer symbols; skip rank discretization.
    #[arg(long)]
    pub symbols: bool,
}

impl InputArgs {
    pub fn ingest_options(&self) -> IngestOptions {
        IngestOptions {
            column: self.column,
            time_column: self.time_column,
            log_returns: self.log_returns,
            header: self.header,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ContainerArg {
    Raw,
    Alone,
    Xz,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CodecArgs {
    /// LZMA preset level (0-9).
    #[arg(long, default_value_t = 9)]
    pub preset: u32,
    /// Use the extreme variant of the preset.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub extreme: bool,
    #[arg(long, value_enum, default_value_t = ContainerArg::Raw)]
    pub container: ContainerArg,
    /// Literal context bits.
    #[arg(long, default_value_t = 4)]
    pub lc: u32,
    /// Literal position bits.
    #[arg(long, default_value_t = 0)]
    pub lp: u32,
    /// Position bits.
    #[arg(long, default_value_t = 0)]
    pub pb: u32,
}

impl CodecArgs {
    pub fn config(&self) -> CodecConfig {
        CodecConfig {
            preset: self.preset,
            extreme: self.extreme,
            container: match self.container {
                ContainerArg::Raw => Container::Raw,
                ContainerArg::Alone => Container::Alone,
                ContainerArg::Xz => Container::Xz,
            },
            lc: self.lc,
            lp: self.lp,
            pb: self.pb,
            ..CodecConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CalibrationArgs {
    /// Calibration table written by `entrate calibrate`.
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    /// Directory searched for `<codec key>.json` when --calibration is absent.
    #[arg(long, env = "ENTRATE_CALIBRATION_DIR")]
    pub calibration_dir: Option<PathBuf>,
    #[command(flatten)]
    pub codec: CodecArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    IidCategorical,
    IidUniformBytes,
    IidGaussian,
    Markov,
    HiddenDependence,
    RandomWalkReturns,
    Garch11,
}
