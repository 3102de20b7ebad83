//! Rank discretization.
//!
//! Each observation is replaced by the index of the equally populated
//! quantile bin its rank falls into. The resulting symbols are uniform on
//! {0, …, 2^b − 1} whatever the marginal law of the input, so a compressor
//! can only exploit temporal structure.

use crate::error::{Error, Result};

pub const MIN_BITS: u8 = 1;
pub const MAX_BITS: u8 = 16;

/// A time-ordered real-valued sample, all values finite.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSeries {
    values: Vec<f64>,
    timestamps: Option<Vec<f64>>,
}

impl RealSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("series is empty"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite value {} at index {i}",
                values[i]
            )));
        }
        Ok(RealSeries {
            values,
            timestamps: None,
        })
    }

    pub fn with_timestamps(values: Vec<f64>, timestamps: Vec<f64>) -> Result<Self> {
        let mut s = Self::new(values)?;
        if timestamps.len() != s.values.len() {
            return Err(Error::invalid("timestamps and values differ in length"));
        }
        if let Some(i) = timestamps
            .windows(2)
            .position(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        {
            return Err(Error::invalid(format!(
                "timestamps not strictly increasing at index {}",
                i + 1
            )));
        }
        s.timestamps = Some(timestamps);
        Ok(s)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn timestamps(&self) -> Option<&[f64]> {
        self.timestamps.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// A time-ordered sequence of symbols in {0, …, 2^bits − 1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolSeries {
    symbols: Vec<u16>,
    bits: u8,
}

impl SymbolSeries {
    pub fn new(symbols: Vec<u16>, bits: u8) -> Result<Self> {
        check_bits(bits)?;
        let limit = 1u32 << bits;
        if let Some(i) = symbols.iter().position(|&s| u32::from(s) >= limit) {
            return Err(Error::invalid(format!(
                "symbol {} at index {i} does not fit in {bits} bits",
                symbols[i]
            )));
        }
        Ok(SymbolSeries { symbols, bits })
    }

    /// Bytes are taken as 8-bit symbols.
    pub fn from_u8(bytes: &[u8]) -> Self {
        SymbolSeries {
            symbols: bytes.iter().map(|&b| u16::from(b)).collect(),
            bits: 8,
        }
    }

    /// Decode the raw on-disk layout written by [`SymbolSeries::to_bytes`].
    pub fn from_bytes(bytes: &[u8], bits: u8) -> Result<Self> {
        check_bits(bits)?;
        let symbols = if bits <= 8 {
            bytes.iter().map(|&b| u16::from(b)).collect()
        } else {
            if !bytes.len().is_multiple_of(2) {
                return Err(Error::invalid("odd byte count for 16-bit symbols"));
            }
            bytes
                .chunks_exact(2)
                .map(|c| u16::from_le_bytes([c[0], c[1]]))
                .collect()
        };
        Self::new(symbols, bits)
    }

    pub fn symbols(&self) -> &[u16] {
        &self.symbols
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// One byte per symbol up to 8 bits, two little-endian bytes above.
    pub fn bytes_per_symbol(&self) -> usize {
        if self.bits <= 8 {
            1
        } else {
            2
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        if self.bits <= 8 {
            self.symbols.iter().map(|&s| s as u8).collect()
        } else {
            self.symbols.iter().flat_map(|s| s.to_le_bytes()).collect()
        }
    }

    /// Same resolution, different contents. Caller guarantees the range.
    pub(crate) fn with_symbols(&self, symbols: Vec<u16>) -> Self {
        SymbolSeries {
            symbols,
            bits: self.bits,
        }
    }
}

fn check_bits(bits: u8) -> Result<()> {
    if (MIN_BITS..=MAX_BITS).contains(&bits) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "resolution of {bits} bits outside [{MIN_BITS}, {MAX_BITS}]"
        )))
    }
}

/// F̂(x) = (1/n)·#{i : x_i ≤ x}.
pub fn empirical_cdf(s: &RealSeries, x: f64) -> f64 {
    let below = s.values().iter().filter(|&&v| v <= x).count();
    below as f64 / s.len() as f64
}

/// Map each observation to ⌊2^b·(rank − 1)/n⌋, ranks taken in ascending
/// order with ties broken by time.
///
/// With distinct values this is ⌊2^b·F̂(x)⌋ with the top value clamped into
/// the last bin. Ties are spread across consecutive bins so every bin keeps
/// its share of observations.
pub fn discretize(s: &RealSeries, bits: u8) -> Result<SymbolSeries> {
    check_bits(bits)?;
    let values = s.values();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("non-finite value at index {i}")));
    }
    let n = values.len();
    if n < (1usize << bits) {
        log::warn!(
            "{n} observations for {} bins: bins cannot be equally populated",
            1usize << bits
        );
    }
    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps time order among ties
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut symbols = vec![0u16; n];
    for (rank, &i) in order.iter().enumerate() {
        symbols[i] = (((rank as u64) << bits) / n as u64) as u16;
    }
    Ok(SymbolSeries { symbols, bits })
}

/// (index, state) pairs for a rank plot.
pub fn rank_plot_data(sym: &SymbolSeries) -> Vec<(usize, u16)> {
    sym.symbols().iter().copied().enumerate().collect()
}

/// Number of observations per symbol value.
pub fn occupancy(sym: &SymbolSeries) -> Vec<usize> {
    let mut counts = vec![0usize; 1 << sym.bits()];
    for &s in sym.symbols() {
        counts[usize::from(s)] += 1;
    }
    counts
}
