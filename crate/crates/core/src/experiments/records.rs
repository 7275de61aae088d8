//! CSV rows written by the runner and the aggregation over them.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::plan::CellKey;
use super::stats::summarize;
use crate::error::Result;
use crate::strategies::{InitKind, RunRecord, Strategy};

/// One finished run. Column order is the raw CSV schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRow {
    pub strategy: Strategy,
    pub n: usize,
    #[serde(rename = "L")]
    pub layers: usize,
    pub init: InitKind,
    pub alpha_init: Option<f64>,
    pub alpha_step: Option<f64>,
    pub sample: usize,
    pub seed: u64,
    pub instance_hash: String,
    pub final_energy: f64,
    pub e_norm: f64,
    pub iterations_total: usize,
    pub wall_ms: Option<u64>,
}

impl RawRow {
    pub fn cell(&self) -> CellKey {
        CellKey {
            n: self.n,
            layers: self.layers,
            strategy: self.strategy,
            init: self.init,
            alpha_init: self.alpha_init,
            alpha_step: self.alpha_step,
        }
    }
}

/// One homotopy loop of one run, in long format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub strategy: Strategy,
    pub n: usize,
    #[serde(rename = "L")]
    pub layers: usize,
    pub init: InitKind,
    pub alpha_init: Option<f64>,
    pub alpha_step: Option<f64>,
    pub sample: usize,
    pub seed: u64,
    pub instance_hash: String,
    pub loop_alpha: f64,
    pub loop_energy: f64,
    pub loop_e_norm: Option<f64>,
    pub loop_iters: usize,
}

/// Raw and trace rows of a run.
pub fn rows_for(cell: &CellKey, sample: usize, record: &RunRecord, wall_time: bool) -> (RawRow, Vec<TraceRow>) {
    let raw = RawRow {
        strategy: cell.strategy,
        n: cell.n,
        layers: cell.layers,
        init: cell.init,
        alpha_init: cell.alpha_init,
        alpha_step: cell.alpha_step,
        sample,
        seed: record.seed,
        instance_hash: record.instance_id.clone(),
        final_energy: record.final_energy,
        e_norm: record.e_norm,
        iterations_total: record.iterations_total(),
        wall_ms: wall_time.then_some(record.wall_ms),
    };
    let trace = if cell.strategy == Strategy::Hoho {
        record
            .loops
            .iter()
            .map(|l| TraceRow {
                strategy: cell.strategy,
                n: cell.n,
                layers: cell.layers,
                init: cell.init,
                alpha_init: cell.alpha_init,
                alpha_step: cell.alpha_step,
                sample,
                seed: record.seed,
                instance_hash: record.instance_id.clone(),
                loop_alpha: l.alpha,
                loop_energy: l.energy_star,
                loop_e_norm: l.e_norm_star,
                loop_iters: l.iterations,
            })
            .collect()
    } else {
        Vec::new()
    };
    (raw, trace)
}

/// Summary of one cell of the raw table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub n: usize,
    #[serde(rename = "L")]
    pub layers: usize,
    pub strategy: Strategy,
    pub init: InitKind,
    pub alpha_init: Option<f64>,
    pub alpha_step: Option<f64>,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub best: f64,
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

impl AggregateRow {
    pub fn cell(&self) -> CellKey {
        CellKey {
            n: self.n,
            layers: self.layers,
            strategy: self.strategy,
            init: self.init,
            alpha_init: self.alpha_init,
            alpha_step: self.alpha_step,
        }
    }
}

/// Groups rows by cell and summarizes `e_norm`. Output is sorted by cell key.
pub fn aggregate(rows: &[RawRow]) -> Vec<AggregateRow> {
    let mut cells: BTreeMap<CellKey, Vec<f64>> = BTreeMap::new();
    for r in rows {
        cells.entry(r.cell()).or_default().push(r.e_norm);
    }
    cells
        .into_iter()
        .filter_map(|(c, values)| {
            let Some(s) = summarize(&values) else {
                log::warn!("skipping empty cell {c:?}");
                return None;
            };
            Some(AggregateRow {
                n: c.n,
                layers: c.layers,
                strategy: c.strategy,
                init: c.init,
                alpha_init: c.alpha_init,
                alpha_step: c.alpha_step,
                median: s.median,
                q1: s.q1,
                q3: s.q3,
                best: s.best,
                mean: s.mean,
                std: s.std,
                count: s.count,
            })
        })
        .collect()
}

/// Serializes rows to CSV bytes. Floats use the shortest round-trip form.
pub fn to_csv_bytes<T: Serialize>(rows: &[T], header: &[&str]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

pub const RAW_HEADER: &[&str] = &[
    "strategy", "n", "L", "init", "alpha_init", "alpha_step", "sample", "seed", "instance_hash",
    "final_energy", "e_norm", "iterations_total", "wall_ms",
];

pub const TRACE_HEADER: &[&str] = &[
    "strategy", "n", "L", "init", "alpha_init", "alpha_step", "sample", "seed", "instance_hash",
    "loop_alpha", "loop_energy", "loop_e_norm", "loop_iters",
];

pub const AGGREGATE_HEADER: &[&str] = &[
    "n", "L", "strategy", "init", "alpha_init", "alpha_step", "median", "q1", "q3", "best", "mean",
    "std", "count",
];

/// Writes `bytes` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_raw_csv(path: &Path, rows: &[RawRow]) -> Result<()> {
    write_atomic(path, &to_csv_bytes(rows, RAW_HEADER)?)
}

pub fn write_trace_csv(path: &Path, rows: &[TraceRow]) -> Result<()> {
    write_atomic(path, &to_csv_bytes(rows, TRACE_HEADER)?)
}

pub fn write_aggregate_csv(path: &Path, rows: &[AggregateRow]) -> Result<()> {
    write_atomic(path, &to_csv_bytes(rows, AGGREGATE_HEADER)?)
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

pub fn read_raw_csv(path: &Path) -> Result<Vec<RawRow>> {
    read_csv(path)
}

pub fn read_aggregate_csv(path: &Path) -> Result<Vec<AggregateRow>> {
    read_csv(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(strategy: Strategy, n: usize, sample: usize, e: f64) -> RawRow {
        let hoho = strategy == Strategy::Hoho;
        RawRow {
            strategy,
            n,
            layers: 3,
            init: InitKind::Zr,
            alpha_init: hoho.then_some(0.0),
            alpha_step: hoho.then_some(0.01),
            sample,
            seed: 17 + sample as u64,
            instance_hash: format!("{n:04}{sample:012}"),
            final_energy: -10.0 * (1.0 - e),
            e_norm: e,
            iterations_total: 40,
            wall_ms: None,
        }
    }

    #[test]
    fn single_cell_summary() {
        let rows: Vec<_> = [0.1, 0.2, 0.3, 0.4].iter().enumerate().map(|(i, &e)| row(Strategy::Qaoa, 6, i, e)).collect();
        let agg = aggregate(&rows);
        assert_eq!(agg.len(), 1);
        let a = &agg[0];
        assert!((a.median - 0.25).abs() < 1e-15 && (a.q1 - 0.175).abs() < 1e-15 && (a.q3 - 0.325).abs() < 1e-15);
        assert_eq!((a.best, a.count), (0.1, 4));
    }

    #[test]
    fn merged_inputs_aggregate_like_the_whole() {
        let mut rows = Vec::new();
        for (k, s) in [Strategy::Hoho, Strategy::Qaoa, Strategy::Tqaoa].into_iter().enumerate() {
            for n in [6, 8] {
                for i in 0..7 {
                    rows.push(row(s, n, i, ((i * 37 + k * 11 + n) % 13) as f64 / 13.0));
                }
            }
        }
        let whole = aggregate(&rows);
        let (a, b): (Vec<_>, Vec<_>) = rows.iter().cloned().partition(|r| r.sample % 2 == 0);
        let merged: Vec<_> = b.into_iter().chain(a).collect();
        assert_eq!(aggregate(&merged), whole);
        assert_eq!(whole.len(), 6);
        assert!(whole.windows(2).all(|w| w[0].cell() < w[1].cell()));
        assert_eq!(whole[0].strategy, Strategy::Qaoa);
    }

    #[test]
    fn csv_round_trip_and_schema() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![row(Strategy::Hoho, 6, 0, 0.123456789012345), row(Strategy::Qaoa, 6, 1, 1.0 / 3.0)];
        let path = dir.path().join("raw.csv");
        write_raw_csv(&path, &rows).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), RAW_HEADER.join(","));
        assert!(lines.next().unwrap().starts_with("hoho,6,3,zr,0.0,0.01,0,17,"));
        // Non-homotopy rows leave the alpha columns and the unrecorded wall time empty.
        let qaoa = lines.next().unwrap();
        assert!(qaoa.starts_with("qaoa,6,3,zr,,,1,18,"), "{qaoa}");
        assert!(qaoa.ends_with(",40,"), "{qaoa}");
        assert_eq!(read_raw_csv(&path).unwrap(), rows);

        let agg = aggregate(&rows);
        let apath = dir.path().join("agg.csv");
        write_aggregate_csv(&apath, &agg).unwrap();
        assert_eq!(read_aggregate_csv(&apath).unwrap(), agg);
        assert!(!dir.path().join("agg.csv.tmp").exists());
    }
}
