//! Overhead calibration on incompressible input.
//!
//! iid uniform bytes have entropy 8 bits/byte, so anything the codec
//! emits beyond the input length is overhead. Measuring that at several
//! lengths and interpolating between them on log-log axes gives the correction applied to
//! every estimate.

use std::path::Path;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{codec_version, compressed_len, CodecConfig};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, tag};
use crate::stats::{mean, sample_sd};

pub const CALIBRATION_SCHEMA: u32 = 1;

/// Overhead statistics for one input length, in bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverheadEntry {
    pub length: u64,
    pub mean_overhead: f64,
    pub sd: f64,
    pub reps: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub schema: u32,
    #[serde(flatten)]
    pub codec: CodecConfig,
    pub seed: u64,
    pub entries: Vec<OverheadEntry>,
}

/// Measure codec overhead at each length over `reps` independent uniform inputs.
///
/// Each (length, repetition) pair draws from its own RNG stream, so the
/// table does not depend on thread scheduling.
pub fn calibrate_overhead(
    lengths: &[u64],
    reps: u32,
    cfg: &CodecConfig,
    seed: u64,
) -> Result<CalibrationTable> {
    if lengths.is_empty() {
        return Err(Error::invalid("no calibration lengths given"));
    }
    if reps == 0 {
        return Err(Error::invalid("calibration needs at least one repetition"));
    }
    if lengths.contains(&0) {
        return Err(Error::invalid("calibration length must be positive"));
    }
    cfg.validate()?;
    let mut lengths = lengths.to_vec();
    lengths.sort_unstable();
    lengths.dedup();

    let pairs: Vec<(u64, u32)> = lengths
        .iter()
        .flat_map(|&l| (0..reps).map(move |r| (l, r)))
        .collect();
    let samples: Vec<f64> = pairs
        .par_iter()
        .map(|&(len, rep)| {
            let mut data = vec![0u8; len as usize];
            stream_rng(seed, &[tag::CALIBRATION, len, u64::from(rep)]).fill_bytes(&mut data);
            let size = compressed_len(&data, cfg)?;
            Ok(size as f64 - len as f64)
        })
        .collect::<Result<_>>()?;

    let entries = lengths
        .iter()
        .zip(samples.chunks(reps as usize))
        .map(|(&length, s)| OverheadEntry {
            length,
            mean_overhead: mean(s).max(0.0),
            sd: sample_sd(s),
            reps,
        })
        .collect();
    Ok(CalibrationTable {
        schema: CALIBRATION_SCHEMA,
        codec: cfg.clone(),
        seed,
        entries,
    })
}

impl CalibrationTable {
    /// Overhead in bytes for an input of `len` bytes, flat beyond either end.
    ///
    /// Between the two nearest calibrated lengths, log overhead is linear in
    /// log length (a power law through both points). Overhead on
    /// incompressible input grows nearly in proportion to length, so plain
    /// linear-in-log-length interpolation of the byte count would overshoot
    /// by up to ~2x mid-interval. If either endpoint is zero the byte count is
    /// interpolated linearly in log length instead.
    pub fn overhead_at(&self, len: usize) -> Result<f64> {
        let e = &self.entries;
        let (first, last) = match (e.first(), e.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(Error::invalid("calibration table is empty")),
        };
        let len = len as u64;
        if len <= first.length {
            return Ok(first.mean_overhead);
        }
        if len >= last.length {
            return Ok(last.mean_overhead);
        }
        let hi = e.partition_point(|x| x.length < len);
        let (a, b) = (&e[hi - 1], &e[hi]);
        if b.length == len {
            return Ok(b.mean_overhead);
        }
        let t = ((len as f64).ln() - (a.length as f64).ln())
            / ((b.length as f64).ln() - (a.length as f64).ln());
        let (oa, ob) = (a.mean_overhead, b.mean_overhead);
        if oa > 0.0 && ob > 0.0 {
            Ok((oa.ln() + t * (ob.ln() - oa.ln())).exp())
        } else {
            Ok(oa + t * (ob - oa))
        }
    }

    /// Overhead as a fraction of length never rises by more than one
    /// standard deviation between consecutive entries.
    pub fn overhead_fraction_monotone(&self) -> bool {
        self.entries.windows(2).all(|w| {
            let (a, b) = (&w[0], &w[1]);
            b.mean_overhead / b.length as f64
                <= (a.mean_overhead + a.sd.max(b.sd)) / a.length as f64
        })
    }

    /// Reject tables produced by a different codec, setting or library version.
    pub fn ensure_matches(&self, cfg: &CodecConfig) -> Result<()> {
        if self.schema != CALIBRATION_SCHEMA {
            return Err(Error::StaleCalibration(format!(
                "schema {} (expected {CALIBRATION_SCHEMA})",
                self.schema
            )));
        }
        if &self.codec != cfg {
            return Err(Error::StaleCalibration(format!(
                "table is for {}, requested {}",
                self.codec.key(),
                cfg.key()
            )));
        }
        Ok(())
    }

    /// Reject tables calibrated against another liblzma version.
    pub fn ensure_current(&self) -> Result<()> {
        let running = codec_version();
        if self.codec.version != running {
            return Err(Error::StaleCalibration(format!(
                "calibrated with liblzma {}, running {running}; recalibrate",
                self.codec.version
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut t: CalibrationTable = serde_json::from_str(text)?;
        t.codec.validate()?;
        t.entries.sort_by_key(|e| e.length);
        Ok(t)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    /// Load a table and check it against the running codec.
    pub fn load(path: &Path) -> Result<Self> {
        let t = Self::from_json(&std::fs::read_to_string(path)?)?;
        t.ensure_current()?;
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(entries: &[(u64, f64)]) -> CalibrationTable {
        CalibrationTable {
            schema: CALIBRATION_SCHEMA,
            codec: CodecConfig::default(),
            seed: 0,
            entries: entries
                .iter()
                .map(|&(length, mean_overhead)| OverheadEntry {
                    length,
                    mean_overhead,
                    sd: 0.0,
                    reps: 1,
                })
                .collect(),
        }
    }

    #[test]
    fn interpolates_as_power_law_between_entries() {
        let t = table(&[(100, 100.0), (10_000, 300.0)]);
        assert_eq!(t.overhead_at(10).unwrap(), 100.0);
        assert_eq!(t.overhead_at(100).unwrap(), 100.0);
        // geometric midpoint of 100 and 300 at the log-midpoint of the lengths
        assert!((t.overhead_at(1000).unwrap() - 300f64.sqrt() * 10.0).abs() < 1e-9);
        assert_eq!(t.overhead_at(10_000).unwrap(), 300.0);
        assert_eq!(t.overhead_at(1_000_000).unwrap(), 300.0);
        assert!(table(&[]).overhead_at(5).is_err());
        // proportional growth is reproduced exactly between grid points
        let t = table(&[(10_000, 120.0), (100_000, 1200.0)]);
        assert!((t.overhead_at(20_000).unwrap() - 240.0).abs() < 1e-9);
        // a zero endpoint falls back to linear in log length
        let t = table(&[(100, 0.0), (10_000, 300.0)]);
        assert!((t.overhead_at(1000).unwrap() - 150.0).abs() < 1e-9);
    }

    #[test]
    fn small_calibration_is_reproducible() {
        let cfg = CodecConfig::default();
        let a = calibrate_overhead(&[1000, 100], 5, &cfg, 9).unwrap();
        let b = calibrate_overhead(&[100, 1000], 5, &cfg, 9).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.entries[0].length, 100);
        assert!(a
            .entries
            .iter()
            .all(|e| e.mean_overhead >= 0.0 && e.reps == 5));
        assert!(a.overhead_fraction_monotone());
        let c = calibrate_overhead(&[100, 1000], 5, &cfg, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn overhead_at_1000_is_on_the_reference_scale() {
        let t = calibrate_overhead(&[1000], 10, &CodecConfig::default(), 1).unwrap();
        let m = t.entries[0].mean_overhead;
        // reference magnitude 135 bytes, tolerance ±100%
        assert!((0.0..=270.0).contains(&m) && m > 0.0, "overhead {m}");
    }

    #[test]
    fn rejects_bad_arguments() {
        let cfg = CodecConfig::default();
        assert!(calibrate_overhead(&[], 1, &cfg, 0).is_err());
        assert!(calibrate_overhead(&[10], 0, &cfg, 0).is_err());
        assert!(calibrate_overhead(&[0], 1, &cfg, 0).is_err());
    }

    #[test]
    fn json_round_trip_and_staleness() {
        let t = calibrate_overhead(&[200], 2, &CodecConfig::default(), 4).unwrap();
        let json = t.to_json().unwrap();
        for key in [
            "\"codec\": \"lzma\"",
            "\"version\"",
            "\"preset\": 9",
            "\"seed\": 4",
            "\"mean_overhead\"",
        ] {
            assert!(json.contains(key), "{key} missing from {json}");
        }
        let back = CalibrationTable::from_json(&json).unwrap();
        assert_eq!(back, t);
        back.ensure_current().unwrap();
        back.ensure_matches(&CodecConfig::default()).unwrap();

        let mut old = back.clone();
        old.codec.version = "4.0.0".into();
        assert!(matches!(
            old.ensure_current(),
            Err(Error::StaleCalibration(_))
        ));
        let other = CodecConfig {
            preset: 6,
            ..CodecConfig::default()
        };
        assert!(back.ensure_matches(&other).is_err());
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.json");
        let t = calibrate_overhead(&[300], 1, &CodecConfig::default(), 5).unwrap();
        t.save(&path).unwrap();
        assert_eq!(CalibrationTable::load(&path).unwrap(), t);
    }
}
