//! Serial dependence function and compression-ratio gaps.

use serde::{Deserialize, Serialize};

use super::{shuffle_distribution, ShuffleDistribution, ShufflePlan};
use crate::compress::{estimate, CalibrationTable, CompressionEstimate};
use crate::discretize::{discretize, RealSeries, SymbolSeries};
use crate::error::{Error, Result};

/// Approximate band for one increment, from differenced quantiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncrementBand {
    pub min: f64,
    pub q25: f64,
    pub q75: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerialDependenceCurve {
    pub block_sizes: Vec<usize>,
    pub observed: CompressionEstimate,
    pub distributions: Vec<ShuffleDistribution>,
    /// `mean_cr[i + 1] − mean_cr[i]`, one per adjacent pair of block sizes.
    pub increments: Vec<f64>,
    pub increment_bands: Vec<IncrementBand>,
    /// Unshuffled corrected ratio minus mean shuffled ratio, per block size.
    pub gaps: Vec<f64>,
}

/// One CSV row of a curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveRow {
    pub block_size: usize,
    pub mean_cr: f64,
    pub q00: f64,
    pub q25: f64,
    pub q75: f64,
    pub q100: f64,
    /// Increment from the previous block size; absent on the first row.
    pub sdf_increment: Option<f64>,
    pub gap: f64,
}

impl SerialDependenceCurve {
    pub fn mean_crs(&self) -> Vec<f64> {
        self.distributions.iter().map(|d| d.summary.mean).collect()
    }

    pub fn rows(&self) -> Vec<CurveRow> {
        self.distributions
            .iter()
            .enumerate()
            .map(|(i, d)| CurveRow {
                block_size: d.block_size,
                mean_cr: d.summary.mean,
                q00: d.summary.min,
                q25: d.summary.q25,
                q75: d.summary.q75,
                q100: d.summary.max,
                sdf_increment: i.checked_sub(1).map(|p| self.increments[p]),
                gap: self.gaps[i],
            })
            .collect()
    }
}

fn check_grid(block_sizes: &[usize], n: usize) -> Result<()> {
    match (block_sizes.first(), block_sizes.last()) {
        (Some(&first), Some(&last)) => {
            if first < 1 {
                return Err(Error::precondition("block sizes must be at least 1"));
            }
            if last > n {
                return Err(Error::precondition(format!(
                    "block size {last} exceeds series length {n}"
                )));
            }
        }
        _ => return Err(Error::precondition("no block sizes given")),
    }
    if block_sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::precondition(
            "block sizes must be strictly increasing",
        ));
    }
    Ok(())
}

pub fn serial_dependence_curve(
    s: &RealSeries,
    block_sizes: &[usize],
    repetitions: usize,
    bits: u8,
    seed: u64,
    table: &CalibrationTable,
) -> Result<SerialDependenceCurve> {
    check_grid(block_sizes, s.len())?;
    let sym = discretize(s, bits)?;
    serial_dependence_curve_symbols(&sym, block_sizes, repetitions, seed, 0, table)
}

/// Curve for an already discretized series. Every block size uses the
/// same master seed, so repetition `j` draws from the same stream at each `k`.
pub fn serial_dependence_curve_symbols(
    sym: &SymbolSeries,
    block_sizes: &[usize],
    repetitions: usize,
    seed: u64,
    phase: usize,
    table: &CalibrationTable,
) -> Result<SerialDependenceCurve> {
    check_grid(block_sizes, sym.len())?;
    let observed = estimate(sym, table)?;
    let distributions = block_sizes
        .iter()
        .map(|&k| {
            let plan = ShufflePlan {
                block_size: k,
                repetitions,
                seed,
                bits: sym.bits(),
                phase: if phase < k { phase } else { 0 },
            };
            shuffle_distribution(sym, &plan, table)
        })
        .collect::<Result<Vec<_>>>()?;

    let increments = distributions
        .windows(2)
        .map(|w| w[1].summary.mean - w[0].summary.mean)
        .collect();
    // q_τ(Δc) ≈ Δq_τ(c)
    let increment_bands = distributions
        .windows(2)
        .map(|w| {
            let (a, b) = (&w[0].summary, &w[1].summary);
            IncrementBand {
                min: b.min - a.min,
                q25: b.q25 - a.q25,
                q75: b.q75 - a.q75,
                max: b.max - a.max,
            }
        })
        .collect();
    let gaps = distributions
        .iter()
        .map(|d| observed.corrected_cr - d.summary.mean)
        .collect();
    Ok(SerialDependenceCurve {
        block_sizes: block_sizes.to_vec(),
        observed,
        distributions,
        increments,
        increment_bands,
        gaps,
    })
}

/// Smallest recorded block size whose gap is at most `tolerance`.
pub fn select_lag(curve: &SerialDependenceCurve, tolerance: f64) -> Option<usize> {
    select_lag_from(&curve.block_sizes, &curve.gaps, tolerance)
}

pub fn select_lag_from(block_sizes: &[usize], gaps: &[f64], tolerance: f64) -> Option<usize> {
    block_sizes
        .iter()
        .zip(gaps)
        .find(|(_, &g)| g <= tolerance)
        .map(|(&k, _)| k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compress::{calibrate_overhead, CodecConfig};
    use rand::RngCore;

    #[test]
    fn select_lag_examples() {
        assert_eq!(select_lag_from(&[1, 2, 4], &[0.0, 0.0, 0.0], 0.0), Some(1));
        assert_eq!(
            select_lag_from(&[1, 2, 5, 10], &[0.5, 0.2, 0.05, 0.001], 0.01),
            Some(10)
        );
        assert_eq!(select_lag_from(&[1, 2], &[0.5, 0.2], 0.01), None);
    }

    #[test]
    fn grid_validation() {
        let table = calibrate_overhead(&[64], 1, &CodecConfig::default(), 0).unwrap();
        let sym = SymbolSeries::from_u8(&[0u8; 64]);
        for grid in [&[][..], &[0, 2][..], &[2, 2][..], &[3, 1][..], &[1, 65][..]] {
            let err = serial_dependence_curve_symbols(&sym, grid, 2, 0, 0, &table).unwrap_err();
            assert!(matches!(err, Error::Precondition(_)), "{grid:?}");
        }
    }

    #[test]
    fn telescoping_and_rows() {
        let mut bytes = vec![0u8; 3000];
        crate::rng::stream_rng(6, &[]).fill_bytes(&mut bytes);
        let sym = SymbolSeries::from_u8(&bytes);
        let table = calibrate_overhead(&[1000, 3000], 4, &CodecConfig::default(), 1).unwrap();
        let c = serial_dependence_curve_symbols(&sym, &[1, 2, 5, 3000], 8, 2, 0, &table).unwrap();
        let means = c.mean_crs();
        let total: f64 = c.increments.iter().sum();
        assert!((total - (means[3] - means[0])).abs() < 1e-12);
        let rows = c.rows();
        assert_eq!(rows.len(), 4);
        assert!(rows[0].sdf_increment.is_none());
        assert_eq!(rows[2].sdf_increment, Some(c.increments[1]));
        // k = n does not shuffle: gap is exactly zero
        assert_eq!(c.gaps[3], 0.0);
        assert_eq!(c.distributions[3].summary.sd, 0.0);
        assert_eq!(select_lag(&c, 1.0), Some(1));
    }
}
