//! Parallel plan execution with a resumable journal.
//!
//! Workers send finished jobs over a channel to a single collector, which
//! appends them to `journal.jsonl` and keeps `manifest.json` current. Final
//! CSVs are rebuilt from the journal in plan order, so their bytes do not
//! depend on scheduling or on how many times the plan was resumed.

use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::plan::{ExperimentPlan, Job};
use super::records::{
    aggregate, rows_for, write_aggregate_csv, write_atomic, write_raw_csv, write_trace_csv, RawRow, TraceRow,
};
use crate::error::{Error, Result};
use crate::graph::generate_ba_graph;
use crate::hamiltonian::{maxcut_objective, EigenCache};
use crate::strategies::{run_hoho, run_qaoa, run_tqaoa, HomotopyConfig, Problem, RunRecord, Strategy};

/// Environment variable that overrides the worker count.
pub const WORKERS_ENV: &str = "HOHO_WORKERS";

pub const JOURNAL_FILE: &str = "journal.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const RAW_FILE: &str = "raw.csv";
pub const TRACE_FILE: &str = "traces.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const PLAN_FILE: &str = "plan.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Status {
    Done,
    Failed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct JournalEntry {
    fingerprint: String,
    job: String,
    status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    row: Option<RawRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    trace: Vec<TraceRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedJob {
    pub job: String,
    pub error: String,
}

/// Job ids of a plan split by state; every job appears in exactly one list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub fingerprint: String,
    pub total: usize,
    pub done: Vec<String>,
    pub failed: Vec<FailedJob>,
    pub pending: Vec<String>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

/// What a call to [`run_plan`] did.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub total: usize,
    /// Jobs already done before this call.
    pub skipped: usize,
    /// Jobs executed by this call.
    pub executed: usize,
    pub failed: usize,
    pub raw_csv: PathBuf,
    pub trace_csv: PathBuf,
    pub aggregate_csv: PathBuf,
}

/// Worker count: `HOHO_WORKERS`, else the plan, else every available core.
pub fn worker_count(plan: &ExperimentPlan) -> Result<usize> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        return match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(k),
            _ => Err(Error::InvalidArgument(format!("{WORKERS_ENV} must be a positive integer, got '{v}'"))),
        };
    }
    Ok(plan
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |k| k.get())))
}

/// Runs one job to completion.
pub fn execute_job(plan: &ExperimentPlan, job: &Job, cache: &EigenCache) -> Result<RunRecord> {
    let c = &job.cell;
    let graph = generate_ba_graph(c.n, plan.m, job.graph_seed)?;
    let diag = maxcut_objective(&graph)?;
    let id = graph.instance_hash();
    let problem = Problem::new(&id, &diag).with_cache(cache);
    let init = plan.init_strategy(c.init);
    match c.strategy {
        Strategy::Qaoa => run_qaoa(&problem, c.layers, &init, &plan.optimizer, job.seed),
        Strategy::Tqaoa => {
            let l0 = plan.tqaoa_l0.min(c.layers);
            run_tqaoa(&problem, l0, c.layers, &init, &plan.optimizer, job.seed)
        }
        Strategy::Hoho => {
            let (Some(alpha_init), Some(alpha_step)) = (c.alpha_init, c.alpha_step) else {
                return Err(Error::InvalidArgument("homotopy cell without alpha settings".into()));
            };
            let cfg = HomotopyConfig {
                init,
                optimizer: plan.optimizer.clone(),
                eig_tol: plan.eig_tol,
                loop_normalization: plan.loop_normalization,
                ..HomotopyConfig::new(alpha_init, alpha_step, c.layers)
            };
            run_hoho(&problem, &cfg, job.seed)
        }
    }
}

fn read_journal(path: &Path, fingerprint: &str) -> Result<HashMap<String, JournalEntry>> {
    let mut out = HashMap::new();
    if !path.exists() {
        return Ok(out);
    }
    for (k, line) in BufReader::new(fs::File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<JournalEntry>(&line) {
            Ok(e) if e.fingerprint == fingerprint => {
                // A later success replaces an earlier failure, never the reverse.
                if !(e.status == Status::Failed && out.get(&e.job).is_some_and(|p: &JournalEntry| p.status == Status::Done)) {
                    out.insert(e.job.clone(), e);
                }
            }
            Ok(_) => {}
            Err(err) => log::warn!("{}:{}: ignoring unreadable journal line: {err}", path.display(), k + 1),
        }
    }
    Ok(out)
}

fn manifest(fingerprint: &str, jobs: &[Job], entries: &HashMap<String, JournalEntry>) -> Manifest {
    let mut m = Manifest {
        fingerprint: fingerprint.to_owned(),
        total: jobs.len(),
        done: Vec::new(),
        failed: Vec::new(),
        pending: Vec::new(),
    };
    for job in jobs {
        let id = job.id();
        match entries.get(&id) {
            Some(e) if e.status == Status::Done => m.done.push(id),
            Some(e) => m.failed.push(FailedJob { job: id, error: e.error.clone().unwrap_or_default() }),
            None => m.pending.push(id),
        }
    }
    m
}

fn write_manifest(dir: &Path, m: &Manifest) -> Result<()> {
    let mut text = serde_json::to_string_pretty(m)?;
    text.push('\n');
    write_atomic(&dir.join(MANIFEST_FILE), text.as_bytes())
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>()
        .map(|s| (*s).to_owned())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "panic".into())
}

/// Executes every job of `plan` not yet done, then writes the raw, trace
/// and aggregate CSVs. Failed jobs are recorded and retried on the next call.
pub fn run_plan(plan: &ExperimentPlan) -> Result<RunSummary> {
    plan.validate()?;
    let dir = &plan.out_dir;
    fs::create_dir_all(dir)?;
    let fingerprint = plan.fingerprint();
    let jobs = plan.jobs();
    let journal_path = dir.join(JOURNAL_FILE);
    let mut entries = read_journal(&journal_path, &fingerprint)?;

    let mut plan_text = serde_json::to_string_pretty(plan)?;
    plan_text.push('\n');
    write_atomic(&dir.join(PLAN_FILE), plan_text.as_bytes())?;

    let pending: Vec<&Job> = jobs
        .iter()
        .filter(|j| entries.get(&j.id()).is_none_or(|e| e.status != Status::Done))
        .collect();
    let skipped = jobs.len() - pending.len();
    write_manifest(dir, &manifest(&fingerprint, &jobs, &entries))?;

    let workers = worker_count(plan)?;
    log::info!(
        "{} jobs, {} already done, running {} on {workers} workers",
        jobs.len(),
        skipped,
        pending.len()
    );

    let mut executed = 0;
    if !pending.is_empty() {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))?;
        let cache = EigenCache::new();
        let mut journal = OpenOptions::new().create(true).append(true).open(&journal_path)?;
        let (tx, rx) = mpsc::channel::<JournalEntry>();
        let fp = fingerprint.as_str();

        std::thread::scope(|scope| -> Result<()> {
            let cache = &cache;
            scope.spawn(move || {
                pool.install(|| {
                    pending.par_iter().for_each_with(tx, |tx, job| {
                        let outcome = catch_unwind(AssertUnwindSafe(|| execute_job(plan, job, cache)))
                            .unwrap_or_else(|p| Err(Error::Resource(panic_message(p))));
                        let entry = match outcome {
                            Ok(record) => {
                                let (row, trace) = rows_for(&job.cell, job.sample, &record, plan.record_wall_time);
                                JournalEntry { fingerprint: fp.to_owned(), job: job.id(), status: Status::Done, error: None, row: Some(row), trace }
                            }
                            Err(e) => {
                                log::warn!("job {} failed: {e}", job.id());
                                JournalEntry { fingerprint: fp.to_owned(), job: job.id(), status: Status::Failed, error: Some(e.to_string()), row: None, trace: Vec::new() }
                            }
                        };
                        // The collector only goes away on an I/O error, which it reports itself.
                        let _ = tx.send(entry);
                    });
                });
            });

            let mut last_manifest = Instant::now();
            for entry in rx {
                let mut line = serde_json::to_string(&entry)?;
                line.push('\n');
                journal.write_all(line.as_bytes())?;
                journal.flush()?;
                executed += 1;
                entries.insert(entry.job.clone(), entry);
                if last_manifest.elapsed() > Duration::from_secs(2) {
                    write_manifest(dir, &manifest(&fingerprint, &jobs, &entries))?;
                    last_manifest = Instant::now();
                }
            }
            Ok(())
        })?;
    }

    let m = manifest(&fingerprint, &jobs, &entries);
    write_manifest(dir, &m)?;

    let mut raw = Vec::with_capacity(m.done.len());
    let mut trace = Vec::new();
    for job in &jobs {
        if let Some(JournalEntry { status: Status::Done, row: Some(r), trace: t, .. }) = entries.get(&job.id()) {
            raw.push(r.clone());
            trace.extend(t.iter().cloned());
        }
    }
    let agg = aggregate(&raw);
    for cell in plan.cells() {
        if !agg.iter().any(|a| a.cell() == cell) {
            log::warn!("no finished runs for cell {cell:?}; left out of the aggregate");
        }
    }
    let summary = RunSummary {
        total: jobs.len(),
        skipped,
        executed,
        failed: m.failed.len(),
        raw_csv: dir.join(RAW_FILE),
        trace_csv: dir.join(TRACE_FILE),
        aggregate_csv: dir.join(AGGREGATE_FILE),
    };
    write_raw_csv(&summary.raw_csv, &raw)?;
    write_trace_csv(&summary.trace_csv, &trace)?;
    write_aggregate_csv(&summary.aggregate_csv, &agg)?;
    Ok(summary)
}
