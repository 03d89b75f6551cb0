//! Result rows, the CSV schema and the JSON sidecar.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{QrcError, Result};
use crate::harness::spec::SweepSpec;

/// Bumped whenever the column list or a column's meaning changes.
pub const SCHEMA_VERSION: u32 = 1;
pub const SOFTWARE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Columns before the per-delay block.
const HEAD: [&str; 10] = [
    "n_qubits",
    "j0",
    "gamma",
    "realization_index",
    "coupling_seed",
    "input_seed",
    "mean_negativity",
    "d_c",
    "d_c_fraction",
    "c_stm",
];

/// Columns after the per-delay block.
const TAIL: [&str; 6] = [
    "max_trace_error",
    "max_hermiticity_error",
    "min_eigenvalue",
    "runtime_ms",
    "software_version",
    "error",
];

/// Excluded from the determinism hash.
pub const RUNTIME_COLUMN: &str = "runtime_ms";

/// Full column list for capacities `c_tau_0..=c_tau_{tau_max}`.
pub fn columns(tau_max: usize) -> Vec<String> {
    HEAD.iter()
        .map(|s| s.to_string())
        .chain((0..=tau_max).map(tau_column))
        .chain(TAIL.iter().map(|s| s.to_string()))
        .collect()
}

pub fn tau_column(tau: usize) -> String {
    format!("c_tau_{tau}")
}

/// One realization at one grid point. Disabled or failed measurements are
/// `None` and serialize as empty cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub n_qubits: usize,
    pub j0: f64,
    pub gamma: f64,
    pub realization_index: usize,
    pub coupling_seed: u64,
    pub input_seed: u64,
    pub mean_negativity: Option<f64>,
    pub d_c: Option<f64>,
    pub d_c_fraction: Option<f64>,
    pub c_stm: Option<f64>,
    /// Empty when the memory task is off, else `tau_max + 1` entries.
    pub c_tau: Vec<f64>,
    pub max_trace_error: Option<f64>,
    pub max_hermiticity_error: Option<f64>,
    pub min_eigenvalue: Option<f64>,
    pub runtime_ms: u64,
    pub software_version: String,
    pub error: Option<String>,
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl ResultRow {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }

    /// CSV record in [`columns`] order.
    pub fn record(&self, tau_max: usize) -> Vec<String> {
        let mut out = vec![
            self.n_qubits.to_string(),
            self.j0.to_string(),
            self.gamma.to_string(),
            self.realization_index.to_string(),
            self.coupling_seed.to_string(),
            self.input_seed.to_string(),
            cell(self.mean_negativity),
            cell(self.d_c),
            cell(self.d_c_fraction),
            cell(self.c_stm),
        ];
        out.extend((0..=tau_max).map(|t| cell(self.c_tau.get(t).copied())));
        out.extend([
            cell(self.max_trace_error),
            cell(self.max_hermiticity_error),
            cell(self.min_eigenvalue),
            self.runtime_ms.to_string(),
            self.software_version.clone(),
            self.error.clone().unwrap_or_default(),
        ]);
        out
    }
}

fn csv_err(e: impl std::fmt::Display) -> QrcError {
    QrcError::InvalidConfig(format!("csv: {e}"))
}

pub fn write_csv<W: Write>(out: W, rows: &[ResultRow], tau_max: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns(tau_max)).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.record(tau_max)).map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

/// SHA-256 over the header and every record with the runtime column removed.
pub fn determinism_hash(rows: &[ResultRow], tau_max: usize) -> String {
    let cols = columns(tau_max);
    let skip = cols.iter().position(|c| c == RUNTIME_COLUMN);
    let mut hasher = Sha256::new();
    let mut feed = |fields: &[String]| {
        for (i, f) in fields.iter().enumerate() {
            if Some(i) != skip {
                hasher.update(f.as_bytes());
                hasher.update([0x1f]);
            }
        }
        hasher.update([0x1e]);
    };
    feed(&cols);
    for row in rows {
        feed(&row.record(tau_max));
    }
    hex::encode(hasher.finalize())
}

/// Same hash computed from a CSV file already on disk.
pub fn determinism_hash_of_csv<R: Read>(input: R) -> Result<String> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers().map_err(csv_err)?.iter().map(String::from).collect();
    let skip = header.iter().position(|c| c == RUNTIME_COLUMN);
    let mut hasher = Sha256::new();
    let mut feed = |fields: &mut dyn Iterator<Item = &str>| {
        for (i, f) in fields.enumerate() {
            if Some(i) != skip {
                hasher.update(f.as_bytes());
                hasher.update([0x1f]);
            }
        }
        hasher.update([0x1e]);
    };
    feed(&mut header.iter().map(String::as_str));
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        feed(&mut rec.iter());
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Metadata written next to every results CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub schema_version: u32,
    pub software_version: String,
    pub columns: Vec<String>,
    pub rows: usize,
    pub failed_rows: usize,
    pub determinism_hash: String,
    /// The spec with every default filled in.
    pub spec: SweepSpec,
}

impl Sidecar {
    pub fn new(spec: &SweepSpec, rows: &[ResultRow]) -> Self {
        let tau_max = spec.task.tau_max;
        Self {
            schema_version: SCHEMA_VERSION,
            software_version: SOFTWARE_VERSION.to_string(),
            columns: columns(tau_max),
            rows: rows.len(),
            failed_rows: rows.iter().filter(|r| !r.is_ok()).count(),
            determinism_hash: determinism_hash(rows, tau_max),
            spec: spec.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sidecar serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let car: Self = serde_json::from_str(text).map_err(|e| QrcError::SchemaMismatch(e.to_string()))?;
        if car.schema_version != SCHEMA_VERSION {
            return Err(QrcError::SchemaMismatch(format!(
                "schema version {} (expected {SCHEMA_VERSION})",
                car.schema_version
            )));
        }
        Ok(car)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(c: f64, runtime_ms: u64) -> ResultRow {
        ResultRow {
            n_qubits: 3,
            j0: 0.2,
            gamma: 0.0,
            realization_index: 1,
            coupling_seed: 11,
            input_seed: 12,
            mean_negativity: Some(0.125),
            d_c: None,
            d_c_fraction: None,
            c_stm: Some(c),
            c_tau: vec![1.0, c - 1.0],
            max_trace_error: None,
            max_hermiticity_error: None,
            min_eigenvalue: None,
            runtime_ms,
            software_version: SOFTWARE_VERSION.into(),
            error: None,
        }
    }

    #[test]
    fn column_layout() {
        let cols = columns(2);
        assert_eq!(cols.len(), 10 + 3 + 6);
        assert_eq!(cols[0], "n_qubits");
        assert_eq!(cols[10], "c_tau_0");
        assert_eq!(cols.last().unwrap(), "error");
        assert_eq!(row(1.5, 0).record(2).len(), cols.len());
    }

    #[test]
    fn missing_values_are_empty_cells() {
        let rec = row(1.5, 0).record(3);
        assert_eq!(rec[7], "");
        assert_eq!(rec[13], "");
        assert_eq!(rec[6], "0.125");
    }

    #[test]
    fn hash_ignores_runtime_only() {
        let a = determinism_hash(&[row(1.5, 10)], 1);
        assert_eq!(a, determinism_hash(&[row(1.5, 99)], 1));
        assert_ne!(a, determinism_hash(&[row(1.6, 10)], 1));
    }

    #[test]
    fn hash_of_written_csv_matches() {
        let rows = vec![row(1.5, 3), row(2.5, 4)];
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows, 1).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("n_qubits,j0,gamma,"));
        assert_eq!(determinism_hash_of_csv(buf.as_slice()).unwrap(), determinism_hash(&rows, 1));
    }
}
