//! Reproducible JSON and CSV reports.
//!
//! A JSON report is a document `{schema_version, manifest, payload}`. Every
//! floating-point number in the payload is written with 17 significant
//! digits, so it parses back to the identical `f64`. The manifest echoes the
//! parameters as decimal strings and carries the SHA-256 of the compact
//! payload; the timestamp lives in its own manifest field so that payloads
//! of two runs with the same parameters and seed compare byte for byte.
//!
//! CSV output carries 12 significant digits.

mod csv_out;
mod payload;

use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{Number, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use csv_out::{emit_fig5_sweep, write_csv, CsvTable};
pub use payload::{
    extended_payload, fig5_payload, flip_payload, protocol_payload, simple_payload, verification_payload, SampledRuns,
};

pub const SCHEMA_VERSION: &str = "1";
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// The JSON schema every report validates against.
pub const REPORT_SCHEMA: &str = include_str!("../../schema/report.v1.schema.json");

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Flip(#[from] crate::flip::FlipError),
    #[error(transparent)]
    Scenario(#[from] crate::scenarios::ScenarioError),
}

/// `v` with 17 significant digits in scientific notation.
pub fn decimal(v: f64) -> String {
    format!("{v:.16e}")
}

/// `v` with 12 significant digits in scientific notation.
pub fn csv_decimal(v: f64) -> String {
    format!("{v:.11e}")
}

/// An `f64` that serializes as a JSON number with 17 significant digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decimal(pub f64);

impl Serialize for Decimal {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match decimal_number(self.0) {
            Some(n) => n.serialize(serializer),
            None => serializer.serialize_none(),
        }
    }
}

fn decimal_number(v: f64) -> Option<Number> {
    if !v.is_finite() {
        return None;
    }
    decimal(v).parse().ok()
}

/// Rewrites every non-integer number in `value` with 17 significant digits.
pub fn canonicalize(value: Value) -> Value {
    match value {
        Value::Number(n) if !(n.is_u64() || n.is_i64()) => n
            .as_f64()
            .and_then(decimal_number)
            .map(Value::Number)
            .unwrap_or(Value::Null),
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, canonicalize(v))).collect()),
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub subcommand: String,
    /// Every input parameter; numbers as 17-digit decimal strings.
    pub parameters: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub artifact_version: String,
    pub checksums: BTreeMap<String, String>,
    /// Seconds since the Unix epoch. The only field that varies between reruns.
    pub generated_at: Option<u64>,
}

impl Manifest {
    pub fn new(subcommand: &str) -> Self {
        Manifest {
            subcommand: subcommand.to_owned(),
            parameters: BTreeMap::new(),
            seed: None,
            artifact_version: ARTIFACT_VERSION.to_owned(),
            checksums: BTreeMap::new(),
            generated_at: None,
        }
    }

    pub fn number(mut self, name: &str, value: f64) -> Self {
        self.parameters.insert(name.to_owned(), decimal(value));
        self
    }

    pub fn text(mut self, name: &str, value: impl Into<String>) -> Self {
        self.parameters.insert(name.to_owned(), value.into());
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn stamped(mut self) -> Self {
        self.generated_at = SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs());
        self
    }

    /// Records the SHA-256 of an output written outside the JSON report.
    pub fn checksum(mut self, name: &str, bytes: &[u8]) -> Self {
        self.checksums
            .insert(name.to_owned(), hex::encode(Sha256::digest(bytes)));
        self
    }

    pub fn to_json(&self) -> Result<String, ReportError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    /// Numeric parameter parsed back from its echo.
    pub fn parameter_value(&self, name: &str) -> Option<f64> {
        self.parameters.get(name).and_then(|s| s.parse().ok())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub manifest: Manifest,
    pub payload: Value,
}

impl Report {
    /// Canonicalizes the payload and records its checksum in the manifest.
    pub fn new(mut manifest: Manifest, payload: Value) -> Result<Self, ReportError> {
        let payload = canonicalize(payload);
        manifest
            .checksums
            .insert("payload".to_owned(), payload_checksum(&payload)?);
        Ok(Report {
            schema_version: SCHEMA_VERSION.to_owned(),
            manifest,
            payload,
        })
    }

    pub fn to_json(&self) -> Result<String, ReportError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    /// Compact payload text; identical across reruns with equal inputs.
    pub fn payload_text(&self) -> Result<String, ReportError> {
        Ok(serde_json::to_string(&self.payload)?)
    }

    pub fn verify_checksum(&self) -> Result<bool, ReportError> {
        Ok(self.manifest.checksums.get("payload") == Some(&payload_checksum(&self.payload)?))
    }
}

fn payload_checksum(payload: &Value) -> Result<String, ReportError> {
    let text = serde_json::to_string(payload)?;
    Ok(hex::encode(Sha256::digest(text.as_bytes())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn decimals_round_trip() {
        for v in [
            0.1,
            1.0 / 3.0,
            0.25 + std::f64::consts::FRAC_1_SQRT_2,
            -0.0927,
            1e-300,
            0.0,
        ] {
            assert_eq!(decimal(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(decimal(0.25), "2.5000000000000000e-1");
        assert_eq!(csv_decimal(0.25), "2.50000000000e-1");
    }

    #[test]
    fn canonical_numbers() {
        let v = canonicalize(json!({"a": 0.1, "n": 3, "xs": [1.5, -2]}));
        assert_eq!(
            serde_json::to_string(&v).unwrap(),
            r#"{"a":1.0000000000000001e-1,"n":3,"xs":[1.5000000000000000e+0,-2]}"#
        );
        let back: f64 = v["a"].as_f64().unwrap();
        assert_eq!(back, 0.1);
    }

    #[test]
    fn checksum_ignores_timestamp() {
        let payload = json!({"kind": "fig5", "q": 0.5});
        let a = Report::new(Manifest::new("fig5").number("x", 0.3).stamped(), payload.clone()).unwrap();
        let mut b = Report::new(Manifest::new("fig5").number("x", 0.3), payload).unwrap();
        b.manifest.generated_at = Some(1);
        assert_eq!(a.manifest.checksums, b.manifest.checksums);
        assert_eq!(a.payload_text().unwrap(), b.payload_text().unwrap());
        assert!(a.verify_checksum().unwrap());
        assert_eq!(a.manifest.parameter_value("x"), Some(0.3));
    }
}
