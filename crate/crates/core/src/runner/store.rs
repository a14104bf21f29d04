//! The append-only evaluation log and its recovery rules.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::Metric;
use crate::util::{fmt_f64, parse_f64};

/// Identifies one optimizer run: (sample, problem, run).
pub type CellKey = (usize, String, usize);

/// One row of `evals.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub sample_id: usize,
    pub problem: String,
    pub run: usize,
    pub seed: u64,
    pub evals_used: usize,
    pub failed: bool,
    pub values: Vec<f64>,
}

impl EvalRow {
    pub fn key(&self) -> CellKey {
        (self.sample_id, self.problem.clone(), self.run)
    }

    fn to_line(&self) -> String {
        let mut fields = vec![
            self.sample_id.to_string(),
            self.problem.clone(),
            self.run.to_string(),
            self.seed.to_string(),
            self.evals_used.to_string(),
            u8::from(self.failed).to_string(),
        ];
        fields.extend(self.values.iter().map(|&v| fmt_f64(v)));
        fields.join(",") + "\n"
    }

    fn parse(line: &str, n_metrics: usize) -> Option<Self> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 + n_metrics || f[1].is_empty() {
            return None;
        }
        let failed = match f[5] {
            "0" => false,
            "1" => true,
            _ => return None,
        };
        Some(Self {
            sample_id: f[0].parse().ok()?,
            problem: f[1].to_string(),
            run: f[2].parse().ok()?,
            seed: f[3].parse().ok()?,
            evals_used: f[4].parse().ok()?,
            failed,
            values: f[6..].iter().map(|s| parse_f64(s)).collect::<Option<_>>()?,
        })
    }
}

pub fn header(metrics: &[Metric]) -> String {
    let mut cols = vec!["sample_id", "problem", "run", "seed", "evals_used", "failed"];
    cols.extend(metrics.iter().map(|m| m.as_str()));
    cols.join(",") + "\n"
}

/// Evaluation log: completed rows keyed by cell, backed by `evals.csv`.
#[derive(Debug)]
pub struct EvalStore {
    file: File,
    pub rows: BTreeMap<CellKey, EvalRow>,
}

impl EvalStore {
    /// Opens or creates the log. A trailing line without a newline is the
    /// remains of an interrupted write and is truncated away; any other
    /// malformed line makes the store unusable.
    pub fn open(path: &Path, metrics: &[Metric]) -> Result<Self> {
        let head = header(metrics);
        let mut rows = BTreeMap::new();
        if path.exists() {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::CorruptStore(format!("{}: {e}", path.display())))?;
            let complete = match text.rfind('\n') {
                Some(i) => i + 1,
                None => 0,
            };
            if complete == 0 {
                std::fs::write(path, &head)?;
            } else {
                if !text.starts_with(&head) {
                    return Err(Error::CorruptStore(format!("{}: unexpected header", path.display())));
                }
                for (no, line) in text[head.len()..complete].lines().enumerate() {
                    let row = EvalRow::parse(line, metrics.len()).ok_or_else(|| {
                        Error::CorruptStore(format!("{}: malformed line {}", path.display(), no + 2))
                    })?;
                    if rows.insert(row.key(), row).is_some() {
                        return Err(Error::CorruptStore(format!("{}: duplicate cell on line {}", path.display(), no + 2)));
                    }
                }
                if complete < text.len() {
                    OpenOptions::new().write(true).open(path)?.set_len(complete as u64)?;
                }
            }
        } else {
            std::fs::write(path, &head)?;
        }
        let file = OpenOptions::new().append(true).open(path)?;
        Ok(Self { file, rows })
    }

    /// Appends a batch with a single write.
    pub fn append(&mut self, batch: Vec<EvalRow>) -> Result<()> {
        let text: String = batch.iter().map(EvalRow::to_line).collect();
        self.file.write_all(text.as_bytes())?;
        self.file.flush()?;
        for row in batch {
            self.rows.insert(row.key(), row);
        }
        Ok(())
    }

    /// Rewrites the log in canonical (sample, problem, run) order.
    pub fn canonicalize(&mut self, path: &Path, metrics: &[Metric]) -> Result<()> {
        let mut text = header(metrics);
        text.extend(self.rows.values().map(EvalRow::to_line));
        let tmp = path.with_extension("csv.tmp");
        std::fs::write(&tmp, text)?;
        std::fs::rename(&tmp, path)?;
        self.file = OpenOptions::new().append(true).open(path)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(s: usize, v: f64) -> EvalRow {
        EvalRow { sample_id: s, problem: "sphere".into(), run: 0, seed: 9, evals_used: 10, failed: !v.is_finite(), values: vec![v] }
    }

    #[test]
    fn round_trip_and_recovery() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("evals.csv");
        let m = [Metric::Best];
        let mut s = EvalStore::open(&path, &m).unwrap();
        s.append(vec![row(1, 0.1), row(0, f64::NAN)]).unwrap();
        drop(s);
        let s = EvalStore::open(&path, &m).unwrap();
        assert_eq!(s.rows.len(), 2);
        assert!(s.rows[&(0, "sphere".into(), 0)].values[0].is_nan());
        assert_eq!(s.rows[&(1, "sphere".into(), 0)].values[0], 0.1);
        drop(s);

        // torn final write
        let mut text = std::fs::read_to_string(&path).unwrap();
        text.push_str("2,sphere,0,9,1");
        std::fs::write(&path, &text).unwrap();
        let s = EvalStore::open(&path, &m).unwrap();
        assert_eq!(s.rows.len(), 2);
        assert!(std::fs::read_to_string(&path).unwrap().ends_with('\n'));
        drop(s);

        // damage in the middle
        let text = std::fs::read_to_string(&path).unwrap().replacen("1,sphere", "1,,", 1);
        std::fs::write(&path, text).unwrap();
        assert!(matches!(EvalStore::open(&path, &m), Err(Error::CorruptStore(_))));
    }

    #[test]
    fn header_mismatch_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("evals.csv");
        EvalStore::open(&path, &[Metric::Igd]).unwrap();
        assert!(matches!(EvalStore::open(&path, &[Metric::Hv]), Err(Error::CorruptStore(_))));
    }

    #[test]
    fn canonical_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("evals.csv");
        let m = [Metric::Best];
        let mut s = EvalStore::open(&path, &m).unwrap();
        s.append(vec![row(3, 1.0)]).unwrap();
        s.append(vec![row(1, 2.0)]).unwrap();
        s.canonicalize(&path, &m).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let ids: Vec<&str> = text.lines().skip(1).map(|l| &l[..1]).collect();
        assert_eq!(ids, ["1", "3"]);
    }
}
