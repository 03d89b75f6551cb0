//! Ensemble statistics over result tables.

use std::io::{Read, Write};

use crate::error::{QrcError, Result};
use crate::harness::results::{columns, ResultRow};

/// Columns that identify a row rather than measure something.
const NON_METRIC: [&str; 6] = [
    "realization_index",
    "coupling_seed",
    "input_seed",
    "runtime_ms",
    "software_version",
    "error",
];

/// A header plus string cells, as read from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read<R: Read>(input: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(input);
        let headers: Vec<String> = rd
            .headers()
            .map_err(|e| QrcError::SchemaMismatch(e.to_string()))?
            .iter()
            .map(String::from)
            .collect();
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(|e| QrcError::SchemaMismatch(e.to_string()))?;
            rows.push(rec.iter().map(String::from).collect());
        }
        Ok(Self { headers, rows })
    }

    pub fn from_rows(rows: &[ResultRow], tau_max: usize) -> Self {
        Self {
            headers: columns(tau_max),
            rows: rows.iter().map(|r| r.record(tau_max)).collect(),
        }
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| QrcError::SchemaMismatch(format!("missing column {name:?}")))
    }
}

/// Mean and sample standard deviation over the non-empty cells of a column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Self> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, std, n })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    /// Group-by column values, in group-by order.
    pub key: Vec<String>,
    /// Rows in the group, failed ones included.
    pub count: usize,
    /// Rows whose error cell is non-empty; they are left out of the stats.
    pub failed: usize,
    /// `(column, stat)` per metric column; `None` when no cell had a value.
    pub stats: Vec<(String, Option<Stat>)>,
}

impl GroupSummary {
    pub fn stat(&self, column: &str) -> Option<Stat> {
        self.stats.iter().find(|(c, _)| c == column).and_then(|(_, s)| *s)
    }
}

/// Groups rows by `group_by` (first-appearance order) and summarizes every
/// numeric metric column.
pub fn aggregate(table: &Table, group_by: &[&str]) -> Result<Vec<GroupSummary>> {
    if group_by.is_empty() {
        return Err(QrcError::InvalidConfig("group_by is empty".into()));
    }
    let keys: Vec<usize> = group_by.iter().map(|c| table.column(c)).collect::<Result<_>>()?;
    let error_col = table.headers.iter().position(|h| h == "error");
    let metrics: Vec<usize> = (0..table.headers.len())
        .filter(|i| !keys.contains(i) && !NON_METRIC.contains(&table.headers[*i].as_str()))
        .collect();

    let mut groups: Vec<(Vec<String>, Vec<&Vec<String>>)> = Vec::new();
    for (line, row) in table.rows.iter().enumerate() {
        if row.len() != table.headers.len() {
            return Err(QrcError::SchemaMismatch(format!(
                "row {} has {} cells, header has {}",
                line + 1,
                row.len(),
                table.headers.len()
            )));
        }
        let key: Vec<String> = keys.iter().map(|&k| row[k].clone()).collect();
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(row),
            None => groups.push((key, vec![row])),
        }
    }

    groups
        .into_iter()
        .map(|(key, members)| {
            let failed_row = |r: &&Vec<String>| error_col.is_some_and(|e| !r[e].is_empty());
            let ok: Vec<&Vec<String>> = members.iter().copied().filter(|r| !failed_row(r)).collect();
            let stats = metrics
                .iter()
                .map(|&m| {
                    let mut values = Vec::with_capacity(ok.len());
                    for r in &ok {
                        let cell = r[m].trim();
                        if cell.is_empty() {
                            continue;
                        }
                        let v: f64 = cell.parse().map_err(|_| {
                            QrcError::SchemaMismatch(format!(
                                "column {:?} holds non-numeric {cell:?}",
                                table.headers[m]
                            ))
                        })?;
                        values.push(v);
                    }
                    Ok((table.headers[m].clone(), Stat::of(&values)))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(GroupSummary {
                key,
                count: members.len(),
                failed: members.len() - ok.len(),
                stats,
            })
        })
        .collect()
}

/// Writes summaries as CSV: group columns, `count`, `failed`, then
/// `<metric>_mean` and `<metric>_std` per metric.
pub fn write_summary<W: Write>(out: W, group_by: &[&str], groups: &[GroupSummary]) -> Result<()> {
    let err = |e: csv::Error| QrcError::InvalidConfig(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = group_by.iter().map(|s| s.to_string()).collect();
    header.push("count".into());
    header.push("failed".into());
    if let Some(first) = groups.first() {
        for (name, _) in &first.stats {
            header.push(format!("{name}_mean"));
            header.push(format!("{name}_std"));
        }
    }
    w.write_record(&header).map_err(err)?;
    for g in groups {
        let mut rec = g.key.clone();
        rec.push(g.count.to_string());
        rec.push(g.failed.to_string());
        for (_, s) in &g.stats {
            match s {
                Some(s) => {
                    rec.push(s.mean.to_string());
                    rec.push(s.std.to_string());
                }
                None => rec.extend([String::new(), String::new()]),
            }
        }
        w.write_record(&rec).map_err(err)?;
    }
    w.flush().map_err(|e| QrcError::InvalidConfig(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[(&str, &str, &str)]) -> Table {
        Table {
            headers: vec!["j0".into(), "c_stm".into(), "error".into()],
            rows: rows
                .iter()
                .map(|(a, b, c)| vec![a.to_string(), b.to_string(), c.to_string()])
                .collect(),
        }
    }

    #[test]
    fn single_row_has_zero_spread() {
        let g = aggregate(&table(&[("0.1", "5", "")]), &["j0"]).unwrap();
        assert_eq!(g[0].stat("c_stm"), Some(Stat { mean: 5.0, std: 0.0, n: 1 }));
    }

    #[test]
    fn two_rows_sample_std() {
        let g = aggregate(&table(&[("0.1", "2", ""), ("0.1", "4", "")]), &["j0"]).unwrap();
        let s = g[0].stat("c_stm").unwrap();
        assert_eq!(s.mean, 3.0);
        assert!((s.std - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(g[0].count, 2);
    }

    #[test]
    fn failed_rows_counted_not_averaged() {
        let t = table(&[("0.1", "2", ""), ("0.1", "", "boom"), ("0.2", "7", "")]);
        let g = aggregate(&t, &["j0"]).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!((g[0].count, g[0].failed), (2, 1));
        assert_eq!(g[0].stat("c_stm").unwrap().mean, 2.0);
        assert_eq!(g[1].key, vec!["0.2".to_string()]);
    }

    #[test]
    fn schema_problems_are_reported() {
        let t = table(&[("0.1", "2", "")]);
        assert!(matches!(aggregate(&t, &["gamma"]), Err(QrcError::SchemaMismatch(_))));
        let ragged = Table { rows: vec![vec!["0.1".into()]], ..t.clone() };
        assert!(matches!(aggregate(&ragged, &["j0"]), Err(QrcError::SchemaMismatch(_))));
        let text = table(&[("0.1", "abc", "")]);
        assert!(matches!(aggregate(&text, &["j0"]), Err(QrcError::SchemaMismatch(_))));
    }

    #[test]
    fn summary_csv_layout() {
        let g = aggregate(&table(&[("0.1", "2", ""), ("0.1", "4", "")]), &["j0"]).unwrap();
        let mut buf = Vec::new();
        write_summary(&mut buf, &["j0"], &g).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("j0,count,failed,c_stm_mean,c_stm_std"));
        assert!(lines.next().unwrap().starts_with("0.1,2,0,3,1.414"));
    }
}
