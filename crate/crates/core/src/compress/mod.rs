//! LZMA as an entropy-rate estimator.
//!
//! A symbol series is serialized to bytes, compressed, and the compressed
//! size is turned into a compression ratio. Real codecs spend bytes on
//! headers, range-coder flush and probability adaptation, so the raw ratio
//! is biased low; [`calibration`] measures that overhead on incompressible
//! input and [`estimate`] subtracts it.

mod calibration;

pub use calibration::{calibrate_overhead, CalibrationTable, OverheadEntry, CALIBRATION_SCHEMA};

use std::ffi::CStr;

use liblzma::stream::{Action, Check, Filters, LzmaOptions, Status, Stream};
use serde::{Deserialize, Serialize};

use crate::discretize::SymbolSeries;
use crate::error::{Error, Result};

pub const LZMA: &str = "lzma";

const PRESET_EXTREME: u32 = 0x8000_0000;
const MIN_DICT: usize = 4096;
const MAX_DICT: usize = 1536 << 20;
const SCRATCH: usize = 1 << 16;

/// How the compressed stream is framed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Container {
    /// Bare LZMA1 stream, no header.
    Raw,
    /// LZMA1 with the 13-byte `.lzma` header.
    Alone,
    /// `.xz` container around LZMA2, no integrity check.
    Xz,
}

impl std::str::FromStr for Container {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Container::Raw),
            "alone" => Ok(Container::Alone),
            "xz" => Ok(Container::Xz),
            other => Err(Error::invalid(format!("unknown container {other:?}"))),
        }
    }
}

/// Everything that determines the compressed bytes for a given input.
///
/// The dictionary is sized per input (smallest power of two covering it),
/// which never changes which matches are reachable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodecConfig {
    pub codec: String,
    pub version: String,
    pub preset: u32,
    pub extreme: bool,
    pub container: Container,
    /// Literal context bits.
    pub lc: u32,
    /// Literal position bits.
    pub lp: u32,
    /// Position bits.
    pub pb: u32,
}

impl Default for CodecConfig {
    /// Maximum-effort raw LZMA1 with the widest literal context the codec accepts.
    fn default() -> Self {
        CodecConfig {
            codec: LZMA.to_string(),
            version: codec_version(),
            preset: 9,
            extreme: true,
            container: Container::Raw,
            lc: 4,
            lp: 0,
            pb: 0,
        }
    }
}

impl CodecConfig {
    pub fn validate(&self) -> Result<()> {
        if self.codec != LZMA {
            return Err(Error::invalid(format!(
                "unsupported codec {:?}",
                self.codec
            )));
        }
        if self.preset > 9 {
            return Err(Error::invalid(format!(
                "preset {} outside 0..=9",
                self.preset
            )));
        }
        if self.lc + self.lp > 4 || self.pb > 4 {
            return Err(Error::invalid(format!(
                "lc={} lp={} pb={}: need lc + lp <= 4 and pb <= 4",
                self.lc, self.lp, self.pb
            )));
        }
        Ok(())
    }

    /// Short key naming this configuration, used for cache file names.
    pub fn key(&self) -> String {
        format!(
            "{}-{}-p{}{}-{}-lc{}lp{}pb{}",
            self.codec,
            self.version,
            self.preset,
            if self.extreme { "e" } else { "" },
            serde_json::to_value(self.container)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_default(),
            self.lc,
            self.lp,
            self.pb
        )
    }

    fn options(&self, input_len: usize) -> Result<LzmaOptions> {
        let level = self.preset | if self.extreme { PRESET_EXTREME } else { 0 };
        let mut opts = LzmaOptions::new_preset(level).map_err(codec_err)?;
        let dict = input_len.max(MIN_DICT).next_power_of_two().min(MAX_DICT);
        opts.dict_size(dict as u32)
            .literal_context_bits(self.lc)
            .literal_position_bits(self.lp)
            .position_bits(self.pb);
        Ok(opts)
    }

    fn stream(&self, input_len: usize) -> Result<Stream> {
        self.validate()?;
        let opts = self.options(input_len)?;
        match self.container {
            Container::Raw => {
                let mut f = Filters::new();
                f.lzma1(&opts);
                Stream::new_raw_encoder(&f)
            }
            Container::Alone => Stream::new_lzma_encoder(&opts),
            Container::Xz => {
                let mut f = Filters::new();
                f.lzma2(&opts);
                Stream::new_stream_encoder(&f, Check::None)
            }
        }
        .map_err(codec_err)
    }
}

/// Version string of the linked liblzma.
pub fn codec_version() -> String {
    // SAFETY: liblzma returns a pointer to a static NUL-terminated string.
    unsafe { CStr::from_ptr(liblzma_sys::lzma_version_string()) }
        .to_string_lossy()
        .into_owned()
}

fn codec_err(e: liblzma::stream::Error) -> Error {
    Error::Codec(e.to_string())
}

/// Incremental compressor. Feeding the same bytes in any chunking yields
/// the same output as a single call.
pub struct Compressor {
    stream: Stream,
    scratch: Vec<u8>,
    kept: Option<Vec<u8>>,
    written: u64,
}

impl Compressor {
    /// `total_len` is the number of bytes that will be fed; it sizes the dictionary.
    pub fn new(cfg: &CodecConfig, total_len: usize) -> Result<Self> {
        Ok(Compressor {
            stream: cfg.stream(total_len)?,
            scratch: vec![0; SCRATCH],
            kept: None,
            written: 0,
        })
    }

    /// Retain the compressed bytes instead of only counting them.
    pub fn keep_output(mut self) -> Self {
        self.kept = Some(Vec::new());
        self
    }

    fn step(&mut self, input: &[u8], action: Action) -> Result<(usize, Status)> {
        let (in0, out0) = (self.stream.total_in(), self.stream.total_out());
        let status = self
            .stream
            .process(input, &mut self.scratch, action)
            .map_err(codec_err)?;
        let consumed = (self.stream.total_in() - in0) as usize;
        let produced = (self.stream.total_out() - out0) as usize;
        self.written += produced as u64;
        if let Some(kept) = &mut self.kept {
            kept.extend_from_slice(&self.scratch[..produced]);
        }
        if status == Status::MemNeeded {
            return Err(Error::Codec("encoder made no progress".into()));
        }
        Ok((consumed, status))
    }

    pub fn feed(&mut self, mut input: &[u8]) -> Result<()> {
        while !input.is_empty() {
            let (consumed, _) = self.step(input, Action::Run)?;
            input = &input[consumed..];
        }
        Ok(())
    }

    /// Flush the stream; returns the compressed size and, if kept, the bytes.
    pub fn finish(mut self) -> Result<(u64, Option<Vec<u8>>)> {
        loop {
            let (_, status) = self.step(&[], Action::Finish)?;
            if status == Status::StreamEnd {
                break;
            }
        }
        Ok((self.written, self.kept))
    }
}

/// Compress `data` in one call and return the compressed bytes.
pub fn compress_bytes(data: &[u8], cfg: &CodecConfig) -> Result<Vec<u8>> {
    let mut c = Compressor::new(cfg, data.len())?.keep_output();
    c.feed(data)?;
    let (_, bytes) = c.finish()?;
    Ok(bytes.unwrap_or_default())
}

/// Compressed size of raw bytes.
pub fn compressed_len(data: &[u8], cfg: &CodecConfig) -> Result<u64> {
    let mut c = Compressor::new(cfg, data.len())?;
    c.feed(data)?;
    Ok(c.finish()?.0)
}

/// Compressed size of the byte serialization of `sym`.
pub fn compress_size(sym: &SymbolSeries, cfg: &CodecConfig) -> Result<u64> {
    if sym.is_empty() {
        return Err(Error::invalid("cannot compress an empty series"));
    }
    compressed_len(&sym.to_bytes(), cfg)
}

/// Raw and overhead-corrected compression ratios of one series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompressionEstimate {
    pub input_bytes: u64,
    pub compressed_bytes: u64,
    pub raw_cr: f64,
    pub overhead_bytes: f64,
    pub corrected_cr: f64,
    /// Bits per symbol implied by the corrected ratio.
    pub entropy_rate_bits: f64,
}

impl CompressionEstimate {
    fn from_sizes(input: u64, compressed: u64, overhead: f64, bytes_per_symbol: usize) -> Self {
        let n = input as f64;
        let net = (compressed as f64 - overhead).max(0.0);
        let corrected_cr = 1.0 - net / n;
        CompressionEstimate {
            input_bytes: input,
            compressed_bytes: compressed,
            raw_cr: 1.0 - compressed as f64 / n,
            overhead_bytes: overhead,
            corrected_cr,
            entropy_rate_bits: (1.0 - corrected_cr) * 8.0 * bytes_per_symbol as f64,
        }
    }
}

/// Bias-corrected compression estimate for `sym`, using the table's codec.
pub fn estimate(sym: &SymbolSeries, table: &CalibrationTable) -> Result<CompressionEstimate> {
    if sym.is_empty() {
        return Err(Error::invalid("cannot estimate an empty series"));
    }
    let bytes = sym.to_bytes();
    let overhead = table.overhead_at(bytes.len())?;
    let compressed = compressed_len(&bytes, &table.codec)?;
    Ok(CompressionEstimate::from_sizes(
        bytes.len() as u64,
        compressed,
        overhead,
        sym.bytes_per_symbol(),
    ))
}

/// Same as [`estimate`] with the input supplied in chunks.
pub fn estimate_chunked<'a>(
    chunks: impl IntoIterator<Item = &'a [u8]>,
    total_len: usize,
    bytes_per_symbol: usize,
    table: &CalibrationTable,
) -> Result<CompressionEstimate> {
    if total_len == 0 {
        return Err(Error::invalid("cannot estimate an empty series"));
    }
    let overhead = table.overhead_at(total_len)?;
    let mut c = Compressor::new(&table.codec, total_len)?;
    let mut fed = 0usize;
    for chunk in chunks {
        fed += chunk.len();
        c.feed(chunk)?;
    }
    if fed != total_len {
        return Err(Error::invalid(format!(
            "declared {total_len} bytes but {fed} were supplied"
        )));
    }
    let (compressed, _) = c.finish()?;
    Ok(CompressionEstimate::from_sizes(
        total_len as u64,
        compressed,
        overhead,
        bytes_per_symbol,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    fn uniform(n: usize, seed: u64) -> Vec<u8> {
        let mut v = vec![0u8; n];
        crate::rng::stream_rng(seed, &[]).fill_bytes(&mut v);
        v
    }

    #[test]
    fn uniform_bytes_expand() {
        let data = uniform(1_000_000, 1);
        let size = compressed_len(&data, &CodecConfig::default()).unwrap();
        assert!(size > 1_000_000, "size {size}");
    }

    #[test]
    fn constant_bytes_collapse() {
        let data = vec![0u8; 100_000];
        assert!(compressed_len(&data, &CodecConfig::default()).unwrap() < 1000);
    }

    #[test]
    fn compression_is_deterministic() {
        let data = uniform(50_000, 2);
        let cfg = CodecConfig::default();
        assert_eq!(
            compress_bytes(&data, &cfg).unwrap(),
            compress_bytes(&data, &cfg).unwrap()
        );
    }

    #[test]
    fn chunked_feeding_matches_single_shot() {
        let mut data = uniform(30_000, 3);
        data.extend(std::iter::repeat_n(7u8, 20_000));
        let cfg = CodecConfig::default();
        let single = compress_bytes(&data, &cfg).unwrap();
        let mut c = Compressor::new(&cfg, data.len()).unwrap().keep_output();
        for chunk in data.chunks(777) {
            c.feed(chunk).unwrap();
        }
        let (n, bytes) = c.finish().unwrap();
        assert_eq!(bytes.unwrap(), single);
        assert_eq!(n as usize, single.len());
    }

    #[test]
    fn every_container_works() {
        let data = uniform(5_000, 4);
        for container in [Container::Raw, Container::Alone, Container::Xz] {
            let cfg = CodecConfig {
                container,
                ..CodecConfig::default()
            };
            assert!(compressed_len(&data, &cfg).unwrap() > 0);
        }
        let raw = compressed_len(&data, &CodecConfig::default()).unwrap();
        let alone = compressed_len(
            &data,
            &CodecConfig {
                container: Container::Alone,
                ..CodecConfig::default()
            },
        )
        .unwrap();
        assert_eq!(alone, raw + 13);
    }

    #[test]
    fn rejects_invalid_configs() {
        let bad = CodecConfig {
            lc: 4,
            lp: 1,
            ..CodecConfig::default()
        };
        assert!(matches!(
            compressed_len(b"abc", &bad),
            Err(Error::InvalidInput(_))
        ));
        let bad = CodecConfig {
            codec: "zip".into(),
            ..CodecConfig::default()
        };
        assert!(bad.validate().is_err());
        let empty = SymbolSeries::new(vec![], 8).unwrap();
        assert!(compress_size(&empty, &CodecConfig::default()).is_err());
    }

    #[test]
    fn sixteen_bit_symbols_use_two_bytes() {
        let s = SymbolSeries::new((0..1000u16).collect(), 10).unwrap();
        assert_eq!(s.to_bytes().len(), 2000);
        assert!(compress_size(&s, &CodecConfig::default()).unwrap() > 0);
    }

    #[test]
    fn estimate_arithmetic() {
        let e = CompressionEstimate::from_sizes(1000, 1100, 150.0, 1);
        assert!((e.raw_cr - (-0.1)).abs() < 1e-12);
        assert!((e.corrected_cr - 0.05).abs() < 1e-12);
        assert!((e.entropy_rate_bits - 7.6).abs() < 1e-12);
        // overhead larger than the output clamps at a perfect ratio
        let e = CompressionEstimate::from_sizes(1000, 100, 150.0, 1);
        assert_eq!(e.corrected_cr, 1.0);
        assert!(e.corrected_cr >= e.raw_cr);
    }

    #[test]
    fn key_names_every_setting() {
        let k = CodecConfig::default().key();
        assert!(k.starts_with("lzma-"));
        assert!(k.ends_with("-p9e-raw-lc4lp0pb0"));
    }
}
