use std::fs;
use std::path::Path;

use hoho_core::experiments::runner::{JOURNAL_FILE, MANIFEST_FILE};
use hoho_core::experiments::{read_aggregate_csv, read_raw_csv, run_plan, ExperimentPlan, GraphPolicy, Manifest};
use hoho_core::{InitKind, Strategy};

fn plan(dir: &Path) -> ExperimentPlan {
    let mut p = ExperimentPlan::new(vec![5], vec![2], vec![Strategy::Qaoa, Strategy::Tqaoa, Strategy::Hoho], dir);
    p.alpha_inits = vec![0.0, 0.5];
    p.alpha_steps = vec![0.25];
    p.samples = 3;
    p.master_seed = 42;
    p.workers = Some(2);
    p
}

fn read(p: &Path) -> Vec<u8> {
    fs::read(p).unwrap()
}

#[test]
fn single_cell_single_sample() {
    let dir = tempfile::tempdir().unwrap();
    let mut p = ExperimentPlan::new(vec![4], vec![1], vec![Strategy::Qaoa], dir.path());
    p.samples = 1;
    let s = run_plan(&p).unwrap();
    assert_eq!((s.total, s.executed, s.failed), (1, 1, 0));
    assert_eq!(read_raw_csv(&s.raw_csv).unwrap().len(), 1);
    let agg = read_aggregate_csv(&s.aggregate_csv).unwrap();
    assert_eq!(agg.len(), 1);
    assert_eq!(agg[0].count, 1);
    // Plain QAOA leaves the trace file with only its header.
    assert_eq!(fs::read_to_string(&s.trace_csv).unwrap().lines().count(), 1);
}

#[test]
fn rerun_is_idempotent_and_worker_count_does_not_matter() {
    let dir = tempfile::tempdir().unwrap();
    let p = plan(dir.path());
    let first = run_plan(&p).unwrap();
    assert_eq!(first.total, 3 * (1 + 1 + 2));
    assert_eq!((first.skipped, first.executed, first.failed), (0, first.total, 0));
    let raw = read(&first.raw_csv);
    let agg = read(&first.aggregate_csv);
    let trace = read(&first.trace_csv);
    let journal = read(&dir.path().join(JOURNAL_FILE));

    let again = run_plan(&p).unwrap();
    assert_eq!((again.skipped, again.executed), (again.total, 0));
    assert_eq!(read(&again.raw_csv), raw);
    assert_eq!(read(&again.aggregate_csv), agg);
    assert_eq!(read(&again.trace_csv), trace);
    assert_eq!(read(&dir.path().join(JOURNAL_FILE)), journal);

    let other = tempfile::tempdir().unwrap();
    let mut q = plan(other.path());
    q.workers = Some(1);
    let s = run_plan(&q).unwrap();
    assert_eq!(read(&s.raw_csv), raw);
    assert_eq!(read(&s.trace_csv), trace);
}

#[test]
fn raw_rows_and_traces_are_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let s = run_plan(&plan(dir.path())).unwrap();
    let rows = read_raw_csv(&s.raw_csv).unwrap();
    for r in &rows {
        assert!((-1e-12..=1.0 + 1e-12).contains(&r.e_norm), "{r:?}");
        assert_eq!(r.wall_ms, None);
        assert_eq!(r.alpha_init.is_some(), r.strategy == Strategy::Hoho);
    }
    // Every strategy on a given sample sees the same instance.
    for sample in 0..3 {
        let hashes: std::collections::BTreeSet<_> =
            rows.iter().filter(|r| r.sample == sample).map(|r| r.instance_hash.clone()).collect();
        assert_eq!(hashes.len(), 1);
    }
    let trace = fs::read_to_string(&s.trace_csv).unwrap();
    let header = trace.lines().next().unwrap();
    assert!(header.ends_with("loop_alpha,loop_energy,loop_e_norm,loop_iters"));
    // alpha_init 0: 5 loops, alpha_init 0.5: 3 loops; 3 samples each.
    assert_eq!(trace.lines().count() - 1, 3 * (5 + 3));
    for agg in read_aggregate_csv(&s.aggregate_csv).unwrap() {
        assert!(agg.best <= agg.q1 && agg.q1 <= agg.median && agg.median <= agg.q3);
        assert_eq!(agg.count, 3);
    }
}

#[test]
fn failures_are_recorded_without_aborting() {
    let dir = tempfile::tempdir().unwrap();
    // 21 qubits exceeds the simulator limit, so those jobs fail.
    let mut p = ExperimentPlan::new(vec![4, 21], vec![1], vec![Strategy::Qaoa], dir.path());
    p.samples = 2;
    let s = run_plan(&p).unwrap();
    assert_eq!((s.executed, s.failed), (4, 2));
    let m = Manifest::load(&dir.path().join(MANIFEST_FILE)).unwrap();
    assert_eq!((m.done.len(), m.failed.len(), m.pending.len()), (2, 2, 0));
    assert!(m.failed.iter().all(|f| f.job.contains("-n21-") && !f.error.is_empty()));
    assert_eq!(read_raw_csv(&s.raw_csv).unwrap().len(), 2);

    // Failed jobs are retried, done jobs are not.
    let again = run_plan(&p).unwrap();
    assert_eq!((again.skipped, again.executed, again.failed), (2, 2, 2));
}

#[test]
fn interrupted_run_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let p = plan(dir.path());
    let full = run_plan(&p).unwrap();
    let raw = read(&full.raw_csv);

    // Keep only the first few journal lines, as if the process had been killed.
    let journal = dir.path().join(JOURNAL_FILE);
    let text = fs::read_to_string(&journal).unwrap();
    let kept: String = text.lines().take(4).map(|l| format!("{l}\n")).collect();
    fs::write(&journal, kept + "{\"fingerprint\":").unwrap();
    fs::remove_file(&full.raw_csv).unwrap();

    let resumed = run_plan(&p).unwrap();
    assert_eq!((resumed.skipped, resumed.executed), (4, full.total - 4));
    assert_eq!(read(&resumed.raw_csv), raw);
}

#[test]
fn seed_and_graph_policy_change_outputs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let mut p = ExperimentPlan::new(vec![5], vec![1], vec![Strategy::Qaoa], a.path());
    p.samples = 3;
    p.inits = vec![InitKind::Rr];
    let base = read_raw_csv(&run_plan(&p).unwrap().raw_csv).unwrap();

    let mut q = p.clone();
    q.out_dir = b.path().into();
    q.master_seed = 9;
    let reseeded = read_raw_csv(&run_plan(&q).unwrap().raw_csv).unwrap();
    assert_ne!(base[0].instance_hash, reseeded[0].instance_hash);

    let mut s = p.clone();
    s.out_dir = c.path().into();
    s.graph_policy = GraphPolicy::Shared;
    let shared = read_raw_csv(&run_plan(&s).unwrap().raw_csv).unwrap();
    assert!(shared.iter().all(|r| r.instance_hash == shared[0].instance_hash));
    assert!(base.iter().any(|r| r.instance_hash != base[0].instance_hash));
}
