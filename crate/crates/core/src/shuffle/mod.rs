//! Block-shuffle resampling.
//!
//! Cutting a series into consecutive blocks of `k` symbols and permuting
//! the blocks destroys dependence across block boundaries while keeping it
//! inside each block. Comparing compression ratios across block sizes is
//! the basis of the independence test and of the serial dependence curve.

mod curve;
mod independence;

pub use curve::{
    select_lag, select_lag_from, serial_dependence_curve, serial_dependence_curve_symbols,
    CurveRow, IncrementBand, SerialDependenceCurve,
};
pub use independence::{
    independence_test, independence_test_symbols, Decision, DependenceTestResult, TestParams,
};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compress::{estimate, CalibrationTable};
use crate::discretize::SymbolSeries;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, tag};
use crate::stats::Summary;

/// Block size, repetition count and seeding for one resampling experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShufflePlan {
    pub block_size: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub bits: u8,
    /// Offset of the first block; symbols before it are dropped.
    #[serde(default)]
    pub phase: usize,
}

impl ShufflePlan {
    pub fn new(block_size: usize, repetitions: usize, seed: u64, bits: u8) -> Self {
        ShufflePlan {
            block_size,
            repetitions,
            seed,
            bits,
            phase: 0,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::precondition("at least one repetition is required"));
        }
        check_blocks(n, self.block_size, self.phase).map(|_| ())
    }
}

/// Number of whole blocks, after checking 1 ≤ k ≤ n − phase and phase < k.
fn check_blocks(n: usize, k: usize, phase: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::precondition("block size must be at least 1"));
    }
    if phase >= k && phase != 0 {
        return Err(Error::precondition(format!(
            "phase {phase} must be smaller than the block size {k}"
        )));
    }
    if k > n.saturating_sub(phase) {
        return Err(Error::precondition(format!(
            "block size {k} exceeds the {} usable symbols",
            n.saturating_sub(phase)
        )));
    }
    Ok((n - phase) / k)
}

/// The symbols covered by whole blocks: `[phase, phase + k·⌊(n − phase)/k⌋)`.
pub fn block_span(sym: &SymbolSeries, k: usize, phase: usize) -> Result<&[u16]> {
    let blocks = check_blocks(sym.len(), k, phase)?;
    Ok(&sym.symbols()[phase..phase + blocks * k])
}

/// Concatenate whole blocks in the given order. `order[i]` is the index of
/// the block written in position `i`.
pub fn apply_block_order(
    sym: &SymbolSeries,
    k: usize,
    phase: usize,
    order: &[usize],
) -> Result<SymbolSeries> {
    let span = block_span(sym, k, phase)?;
    let blocks = span.len() / k;
    let mut seen = vec![false; blocks];
    for &b in order {
        if b >= blocks || std::mem::replace(&mut seen[b], true) {
            return Err(Error::invalid("block order is not a permutation"));
        }
    }
    if order.len() != blocks {
        return Err(Error::invalid("block order is not a permutation"));
    }
    let mut out = Vec::with_capacity(span.len());
    for &b in order {
        out.extend_from_slice(&span[b * k..(b + 1) * k]);
    }
    Ok(sym.with_symbols(out))
}

/// Split into ⌊n/k⌋ blocks from index 0, permute them uniformly, drop the
/// `n mod k` trailing symbols.
pub fn block_shuffle<R: Rng + ?Sized>(
    sym: &SymbolSeries,
    k: usize,
    rng: &mut R,
) -> Result<SymbolSeries> {
    block_shuffle_phased(sym, k, 0, rng)
}

/// [`block_shuffle`] with blocks starting at `phase`.
pub fn block_shuffle_phased<R: Rng + ?Sized>(
    sym: &SymbolSeries,
    k: usize,
    phase: usize,
    rng: &mut R,
) -> Result<SymbolSeries> {
    let blocks = check_blocks(sym.len(), k, phase)?;
    let mut order: Vec<usize> = (0..blocks).collect();
    order.shuffle(rng);
    apply_block_order(sym, k, phase, &order)
}

/// Corrected compression ratios of repeated block shuffles at one block size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShuffleDistribution {
    pub block_size: usize,
    /// One corrected ratio per repetition, in repetition order.
    pub crs: Vec<f64>,
    pub summary: Summary,
}

/// Repetition `j` shuffles with the stream derived from `(plan.seed, j)`.
pub fn shuffle_distribution(
    sym: &SymbolSeries,
    plan: &ShufflePlan,
    table: &CalibrationTable,
) -> Result<ShuffleDistribution> {
    if plan.bits != sym.bits() {
        return Err(Error::precondition(format!(
            "plan expects {}-bit symbols, series has {}",
            plan.bits,
            sym.bits()
        )));
    }
    plan.validate(sym.len())?;
    let crs: Vec<f64> = (0..plan.repetitions)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream_rng(plan.seed, &[tag::SHUFFLE, j as u64]);
            let shuffled = block_shuffle_phased(sym, plan.block_size, plan.phase, &mut rng)?;
            Ok(estimate(&shuffled, table)?.corrected_cr)
        })
        .collect::<Result<_>>()?;
    let summary = Summary::of(&crs);
    Ok(ShuffleDistribution {
        block_size: plan.block_size,
        crs,
        summary,
    })
}
