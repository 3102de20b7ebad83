//! Serial-dependence testing through compression.
//!
//! A real-valued series is rank-discretized into equally populated bins so
//! that only its temporal structure remains compressible. A universal
//! compressor (LZMA) then serves as an entropy-rate estimator once its
//! fixed overhead has been calibrated away, and block-shuffle resampling
//! turns those estimates into a test for dependence at a chosen lag.
//!
//! Module map:
//!
//! - [`info`]: exact entropies, Markov entropy rates, CR/entropy-rate conversion.
//! - [`discretize`]: empirical CDF and rank discretization into symbols.
//! - [`compress`]: codec wrapper, overhead calibration, bias-corrected estimates.
//! - [`shuffle`]: block shuffling, the independence test, the serial dependence curve.
//! - [`acf`]: the sample autocorrelation function, for comparison.
//! - [`synth`]: seeded generators for every synthetic process used in validation.
//! - [`ingest`]: reading return or price series from text and CSV files.

pub mod acf;
pub mod compress;
pub mod discretize;
pub mod error;
pub mod info;
pub mod ingest;
pub mod rng;
pub mod shuffle;
pub mod stats;
pub mod synth;

pub use compress::{
    calibrate_overhead, compress_size, estimate, CalibrationTable, CodecConfig,
    CompressionEstimate, Container,
};
pub use discretize::{discretize, empirical_cdf, rank_plot_data, RealSeries, SymbolSeries};
pub use error::{Error, ErrorKind, Result};
pub use info::{
    cr_from_entropy_rate, entropy, entropy_rate_from_cr, joint_entropy_bound_check,
    markov_entropy_rate, MarkovModel, Pmf, RateQuote,
};
pub use shuffle::{
    block_shuffle, independence_test, independence_test_symbols, select_lag,
    serial_dependence_curve, serial_dependence_curve_symbols, shuffle_distribution,
    DependenceTestResult, SerialDependenceCurve, ShuffleDistribution, ShufflePlan, TestParams,
};
