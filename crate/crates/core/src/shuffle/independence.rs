//! The block-versus-full shuffle test for serial independence.
//!
//! Under H0 (the first `k` observations are jointly independent) a
//! block-shuffled and a fully shuffled copy of the discretized series have
//! the same law, so the difference of their compression ratios is centred
//! on zero. Dependence inside blocks makes the block-shuffled copy more
//! compressible and pushes the differences up; H0 is rejected when even the
//! α-quantile of the differences is positive.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{apply_block_order, block_span, check_blocks};
use crate::compress::{estimate, CalibrationTable, CompressionEstimate};
use crate::discretize::{discretize, RealSeries, SymbolSeries};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, tag};
use crate::stats::{order_statistic, Summary};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestParams {
    pub block_size: usize,
    pub repetitions: usize,
    pub alpha: f64,
    pub bits: u8,
    pub seed: u64,
    #[serde(default)]
    pub phase: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Reject,
    FailToReject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceTestResult {
    pub params: TestParams,
    /// Estimate for the unshuffled discretized series.
    pub observed: CompressionEstimate,
    /// Per-repetition corrected ratios of the block-shuffled arm.
    pub block_crs: Vec<f64>,
    /// Per-repetition corrected ratios of the fully shuffled arm.
    pub full_crs: Vec<f64>,
    /// `block_crs[j] − full_crs[j]`.
    pub differences: Vec<f64>,
    pub difference_summary: Summary,
    /// Empirical α-quantile of the differences (⌈α·m⌉-th order statistic).
    pub q_alpha: f64,
    pub decision: Decision,
    /// (#{difference ≤ 0} + 1) / (m + 1).
    pub p_value: f64,
}

impl DependenceTestResult {
    pub fn rejects(&self) -> bool {
        self.decision == Decision::Reject
    }
}

impl TestParams {
    fn validate(&self, n: usize) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::precondition(format!(
                "alpha {} outside (0, 1)",
                self.alpha
            )));
        }
        if self.block_size < 2 {
            return Err(Error::precondition("block size must be at least 2"));
        }
        check_blocks(n, self.block_size, self.phase)?;
        let needed = (1.0 / self.alpha - 1e-9).ceil() as usize;
        if self.repetitions < needed {
            return Err(Error::precondition(format!(
                "{} repetitions cannot resolve the {} quantile; need at least {needed}",
                self.repetitions, self.alpha
            )));
        }
        Ok(())
    }
}

/// Discretize `s` at `params.bits` and run [`independence_test_symbols`].
pub fn independence_test(
    s: &RealSeries,
    params: &TestParams,
    table: &CalibrationTable,
) -> Result<DependenceTestResult> {
    params.validate(s.len())?;
    let sym = discretize(s, params.bits)?;
    independence_test_symbols(&sym, params, table)
}

/// Test on an already discretized series.
pub fn independence_test_symbols(
    sym: &SymbolSeries,
    params: &TestParams,
    table: &CalibrationTable,
) -> Result<DependenceTestResult> {
    params.validate(sym.len())?;
    if params.bits != sym.bits() {
        return Err(Error::precondition(format!(
            "test expects {}-bit symbols, series has {}",
            params.bits,
            sym.bits()
        )));
    }
    let k = params.block_size;
    let span = block_span(sym, k, params.phase)?;
    let blocks = span.len() / k;
    let observed = estimate(sym, table)?;

    // Both arms use the same truncated span so their overheads match.
    let arms: Vec<(f64, f64)> = (0..params.repetitions)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream_rng(params.seed, &[tag::INDEPENDENCE, j as u64]);
            let mut order: Vec<usize> = (0..blocks).collect();
            order.shuffle(&mut rng);
            let block_arm = apply_block_order(sym, k, params.phase, &order)?;
            let mut full = span.to_vec();
            full.shuffle(&mut rng);
            let full_arm = sym.with_symbols(full);
            Ok((
                estimate(&block_arm, table)?.corrected_cr,
                estimate(&full_arm, table)?.corrected_cr,
            ))
        })
        .collect::<Result<_>>()?;

    let (block_crs, full_crs): (Vec<f64>, Vec<f64>) = arms.into_iter().unzip();
    let differences: Vec<f64> = block_crs
        .iter()
        .zip(&full_crs)
        .map(|(b, f)| b - f)
        .collect();
    let mut sorted = differences.clone();
    sorted.sort_by(f64::total_cmp);
    let q_alpha = order_statistic(&sorted, params.alpha);
    let m = differences.len();
    let at_or_below = differences.iter().filter(|&&d| d <= 0.0).count();
    Ok(DependenceTestResult {
        params: *params,
        observed,
        difference_summary: Summary::of(&differences),
        block_crs,
        full_crs,
        differences,
        q_alpha,
        decision: if q_alpha > 0.0 {
            Decision::Reject
        } else {
            Decision::FailToReject
        },
        p_value: (at_or_below + 1) as f64 / (m + 1) as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compress::{calibrate_overhead, CodecConfig};

    fn params(k: usize, m: usize, alpha: f64) -> TestParams {
        TestParams {
            block_size: k,
            repetitions: m,
            alpha,
            bits: 8,
            seed: 1,
            phase: 0,
        }
    }

    #[test]
    fn precondition_errors() {
        let table = calibrate_overhead(&[100], 1, &CodecConfig::default(), 0).unwrap();
        let s = RealSeries::new((0..100).map(f64::from).collect()).unwrap();
        let cases = [
            params(1, 100, 0.05),
            params(101, 100, 0.05),
            params(2, 100, 0.0),
            params(2, 100, 1.0),
            params(2, 19, 0.05),
            params(2, 99, 0.01),
        ];
        for p in cases {
            let err = independence_test(&s, &p, &table).unwrap_err();
            assert!(matches!(err, Error::Precondition(_)), "{p:?}: {err}");
        }
        // exactly ⌈1/α⌉ repetitions is enough
        assert!(params(2, 20, 0.05).validate(100).is_ok());
    }

    #[test]
    fn alternating_pattern_is_rejected() {
        // pairs (x, 255 − x): the second symbol is a function of the first
        let mut rng = stream_rng(8, &[]);
        let mut v = Vec::new();
        for _ in 0..2000 {
            let x: u16 = rand::Rng::gen_range(&mut rng, 0..256);
            v.push(x);
            v.push(255 - x);
        }
        let sym = SymbolSeries::new(v, 8).unwrap();
        let table = calibrate_overhead(&[4000], 5, &CodecConfig::default(), 0).unwrap();
        let r = independence_test_symbols(&sym, &params(2, 100, 0.05), &table).unwrap();
        assert!(r.rejects(), "q_alpha {}", r.q_alpha);
        assert_eq!(r.differences.len(), 100);
        assert!(r.p_value > 0.0 && r.p_value <= 1.0);
        assert_eq!(r.p_value, 1.0 / 101.0);
        assert_eq!(r.decision == Decision::Reject, r.q_alpha > 0.0);
    }
}
