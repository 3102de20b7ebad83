//! Provenance envelopes and file writers.

use std::fmt::Write as _;
use std::path::Path;

use entrate::compress::codec_version;
use entrate::Result;
use serde::Serialize;

pub const SCHEMA: u32 = 1;
pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Serialize)]
pub struct Provenance {
    pub schema: u32,
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub codec: &'static str,
    pub codec_version: String,
    pub command: &'static str,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
}

impl Provenance {
    pub fn new(command: &'static str, seed: Option<u64>, config: &impl Serialize) -> Self {
        Provenance {
            schema: SCHEMA,
            tool: TOOL,
            tool_version: TOOL_VERSION,
            codec: entrate::compress::LZMA,
            codec_version: codec_version(),
            command,
            seed,
            config: serde_json::to_value(config).unwrap_or(serde_json::Value::Null),
        }
    }

    /// `#`-prefixed header lines for CSV outputs.
    pub fn csv_header(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {} {} {}", self.tool, self.tool_version, self.command);
        let _ = writeln!(
            s,
            "# schema={} codec={}/{}",
            self.schema, self.codec, self.codec_version
        );
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "# seed={seed}");
        }
        let _ = writeln!(s, "# config={}", self.config);
        s
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    #[serde(flatten)]
    provenance: &'a Provenance,
    result: &'a T,
}

pub fn write_json<T: Serialize>(path: &Path, prov: &Provenance, result: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(&Envelope {
        provenance: prov,
        result,
    })?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

pub fn write_csv(path: &Path, prov: &Provenance, header: &str, rows: &[String]) -> Result<()> {
    let mut out = prov.csv_header();
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(row);
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Shortest round-trip representation of a float.
pub fn num(x: f64) -> String {
    format!("{x}")
}
