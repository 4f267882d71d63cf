//! CSV and JSON output with reproducibility metadata.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::spherical::KType;
use crate::transforms::RadialProfile;
use crate::INVERSION_CALIBRATION;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `x,re,im` rows under the header `x_name,re,im`.
pub fn write_complex_csv<W: Write>(w: W, x_name: &str, xs: &[f64], values: &[Complex64]) -> Result<()> {
    if xs.len() != values.len() {
        return Err(Error::domain("csv columns differ in length"));
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record([x_name, "re", "im"])?;
    for (x, v) in xs.iter().zip(values) {
        out.write_record([fmt_f64(*x), fmt_f64(v.re), fmt_f64(v.im)])?;
    }
    out.flush()?;
    Ok(())
}

/// Writes a table with arbitrary real columns.
pub fn write_table_csv<W: Write>(w: W, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::domain("csv row length differs from header"));
        }
        out.write_record(row.iter().map(|x| fmt_f64(*x)))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads three-column `x,re,im` data (header required; a two-column file is read as real).
pub fn read_complex_csv<R: Read>(r: R) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec.get(i)
                .ok_or_else(|| Error::domain(format!("row {}: missing column {i}", line + 2)))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::domain(format!("row {}: {e}", line + 2)))
        };
        xs.push(parse(0)?);
        let im = if rec.len() >= 3 { parse(2)? } else { 0.0 };
        vs.push(Complex64::new(parse(1)?, im));
    }
    Ok((xs, vs))
}

pub fn read_profile(path: &Path, n: i64) -> Result<RadialProfile> {
    let (t, v) = read_complex_csv(fs::File::open(path)?)?;
    RadialProfile::new(KType::new(n), t, v)
}

/// SHA-256 of the canonical JSON of a configuration (object keys sorted).
pub fn config_hash(config: &serde_json::Value) -> String {
    let canonical = serde_json::to_string(config).expect("json values serialize");
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Sidecar written next to every CSV output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub command: String,
    pub version: String,
    pub config: serde_json::Value,
    pub config_hash: String,
    pub calibration: f64,
    pub tolerances: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub results: serde_json::Value,
}

impl RunMetadata {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        RunMetadata {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config_hash(&config),
            config,
            calibration: INVERSION_CALIBRATION,
            tolerances: BTreeMap::new(),
            notes: Vec::new(),
            results: serde_json::Value::Null,
        }
    }

    pub fn tolerance(mut self, name: &str, value: f64) -> Self {
        self.tolerances.insert(name.to_string(), value);
        self
    }

    pub fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }

    pub fn results(mut self, results: serde_json::Value) -> Self {
        self.results = results;
        self
    }
}

/// Paths written by [`write_outputs`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutputPaths {
    pub csv: PathBuf,
    pub json: PathBuf,
}

/// Writes `<dir>/<stem>.csv` from `write_csv` and `<dir>/<stem>.json` from `meta`.
pub fn write_outputs<F>(dir: &Path, stem: &str, meta: &RunMetadata, write_csv: F) -> Result<OutputPaths>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    let mut f = fs::File::create(&csv_path)?;
    write_csv(&mut f)?;
    f.flush()?;
    fs::write(&json_path, serde_json::to_string_pretty(meta)?)?;
    Ok(OutputPaths {
        csv: csv_path,
        json: json_path,
    })
}
