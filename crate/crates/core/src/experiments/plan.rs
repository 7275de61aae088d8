//! Experiment plans, their cells and jobs, and the seeds that pin every job down.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::optimize::OptimizerConfig;
use crate::rng::{derive_seed, tag_hash};
use crate::strategies::{InitKind, InitStrategy, Strategy, DEFAULT_NZR_WIDTH, DEFAULT_TQAOA_L0};

/// How instances are assigned to samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphPolicy {
    /// A fresh graph for every sample index.
    #[default]
    Resample,
    /// One graph per node count, shared by all samples.
    Shared,
}

/// Declarative description of a batch of runs. Every combination of
/// node count, depth, strategy, init and (for the homotopy strategy)
/// `α_init`/`α_step` forms a cell, and each cell is run `samples` times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub nodes: Vec<usize>,
    pub layers: Vec<usize>,
    pub strategies: Vec<Strategy>,
    #[serde(default = "default_inits")]
    pub inits: Vec<InitKind>,
    #[serde(default = "default_alpha_inits")]
    pub alpha_inits: Vec<f64>,
    #[serde(default = "default_alpha_steps")]
    pub alpha_steps: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub graph_policy: GraphPolicy,
    pub out_dir: PathBuf,
    /// Edges attached per new node in the Barabási–Albert generator.
    #[serde(default = "default_m")]
    pub m: usize,
    /// Starting depth of T-QAOA, lowered to `L` when larger.
    #[serde(default = "default_tqaoa_l0")]
    pub tqaoa_l0: usize,
    #[serde(default = "default_nzr_width")]
    pub nzr_width: f64,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default = "default_eig_tol")]
    pub eig_tol: f64,
    /// Normalize every intermediate homotopy loop (costs one eigensolve per `α`).
    #[serde(default = "default_true")]
    pub loop_normalization: bool,
    /// Worker threads; `None` uses all cores. `HOHO_WORKERS` overrides both.
    #[serde(default)]
    pub workers: Option<usize>,
    /// Fill the `wall_ms` column. Off by default so outputs stay byte-identical.
    #[serde(default)]
    pub record_wall_time: bool,
}

fn default_inits() -> Vec<InitKind> {
    vec![InitKind::Zr]
}
fn default_alpha_inits() -> Vec<f64> {
    vec![0.0]
}
fn default_alpha_steps() -> Vec<f64> {
    vec![0.01]
}
fn default_samples() -> usize {
    100
}
fn default_m() -> usize {
    2
}
fn default_tqaoa_l0() -> usize {
    DEFAULT_TQAOA_L0
}
fn default_nzr_width() -> f64 {
    DEFAULT_NZR_WIDTH
}
fn default_eig_tol() -> f64 {
    1e-10
}
fn default_true() -> bool {
    true
}

/// Identifies the population a run belongs to. Non-homotopy strategies have no `α` fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellKey {
    pub n: usize,
    #[serde(rename = "L")]
    pub layers: usize,
    pub strategy: Strategy,
    pub init: InitKind,
    pub alpha_init: Option<f64>,
    pub alpha_step: Option<f64>,
}

impl CellKey {
    fn cmp_key(&self, other: &Self) -> std::cmp::Ordering {
        let opt = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(x), Some(y)) => x.total_cmp(&y),
            (a, b) => a.is_some().cmp(&b.is_some()),
        };
        (self.n, self.layers, self.strategy, self.init)
            .cmp(&(other.n, other.layers, other.strategy, other.init))
            .then_with(|| opt(self.alpha_init, other.alpha_init))
            .then_with(|| opt(self.alpha_step, other.alpha_step))
    }
}

impl Eq for CellKey {}

impl PartialOrd for CellKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CellKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.cmp_key(other)
    }
}

/// One unit of work: a cell and a sample index, with derived seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub cell: CellKey,
    pub sample: usize,
    pub graph_seed: u64,
    pub seed: u64,
}

impl Job {
    /// Stable textual id used by the journal and manifest.
    pub fn id(&self) -> String {
        let c = &self.cell;
        let alpha = match (c.alpha_init, c.alpha_step) {
            (Some(a), Some(s)) => format!("-a{a}-s{s}"),
            _ => String::new(),
        };
        format!(
            "{}-n{}-L{}-{}{alpha}-i{}-{:016x}",
            c.strategy, c.n, c.layers, c.init, self.sample, self.seed
        )
    }
}

/// Seed of the graph for sample `sample` at `n` nodes.
pub fn graph_seed(master: u64, policy: GraphPolicy, n: usize, sample: usize) -> u64 {
    match policy {
        GraphPolicy::Resample => derive_seed(master, &[tag_hash("graph"), n as u64, sample as u64]),
        GraphPolicy::Shared => derive_seed(master, &[tag_hash("graph"), n as u64]),
    }
}

/// Seed of a strategy's own stream on instance `(n, sample)`. Other cell
/// fields are left out so that runs on one instance are paired.
pub fn run_seed(master: u64, n: usize, sample: usize, strategy: Strategy) -> u64 {
    derive_seed(master, &[tag_hash("run"), n as u64, sample as u64, tag_hash(strategy.tag())])
}

impl ExperimentPlan {
    /// A plan with the given grid and defaults everywhere else.
    pub fn new(
        nodes: Vec<usize>,
        layers: Vec<usize>,
        strategies: Vec<Strategy>,
        out_dir: impl Into<PathBuf>,
    ) -> Self {
        ExperimentPlan {
            nodes,
            layers,
            strategies,
            inits: default_inits(),
            alpha_inits: default_alpha_inits(),
            alpha_steps: default_alpha_steps(),
            samples: default_samples(),
            master_seed: 0,
            graph_policy: GraphPolicy::Resample,
            out_dir: out_dir.into(),
            m: default_m(),
            tqaoa_l0: default_tqaoa_l0(),
            nzr_width: default_nzr_width(),
            optimizer: OptimizerConfig::default(),
            eig_tol: default_eig_tol(),
            loop_normalization: true,
            workers: None,
            record_wall_time: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let plan: ExperimentPlan = serde_json::from_str(text)?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        for (name, empty) in [
            ("nodes", self.nodes.is_empty()),
            ("layers", self.layers.is_empty()),
            ("strategies", self.strategies.is_empty()),
            ("inits", self.inits.is_empty()),
        ] {
            if empty {
                return bad(format!("plan field '{name}' must be nonempty"));
            }
        }
        if self.strategies.contains(&Strategy::Hoho) && (self.alpha_inits.is_empty() || self.alpha_steps.is_empty()) {
            return bad("homotopy runs need nonempty alpha_inits and alpha_steps".into());
        }
        if self.samples == 0 {
            return bad("samples must be at least 1".into());
        }
        if self.layers.contains(&0) {
            return bad("layer counts must be at least 1".into());
        }
        if self.m == 0 || self.nodes.iter().any(|&n| n <= self.m) {
            return bad(format!("every node count must exceed m = {}", self.m));
        }
        if self.tqaoa_l0 == 0 {
            return bad("tqaoa_l0 must be at least 1".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        if !(self.eig_tol > 0.0) {
            return bad(format!("eig_tol must be positive, got {}", self.eig_tol));
        }
        if self.strategies.contains(&Strategy::Hoho) {
            for &a in &self.alpha_inits {
                for &s in &self.alpha_steps {
                    crate::strategies::alpha_schedule(a, s)?;
                }
            }
        }
        InitStrategy::nzr(self.nzr_width).validate()?;
        self.optimizer.validate()
    }

    pub fn init_strategy(&self, kind: InitKind) -> InitStrategy {
        InitStrategy { kind, v: self.nzr_width }
    }

    /// All cells in plan order (nodes, layers, strategies, inits, `α_init`, `α_step`).
    pub fn cells(&self) -> Vec<CellKey> {
        let mut out = Vec::new();
        for &n in &self.nodes {
            for &layers in &self.layers {
                for &strategy in &self.strategies {
                    for &init in &self.inits {
                        let base = CellKey { n, layers, strategy, init, alpha_init: None, alpha_step: None };
                        if strategy != Strategy::Hoho {
                            out.push(base);
                            continue;
                        }
                        for &a in &self.alpha_inits {
                            for &s in &self.alpha_steps {
                                out.push(CellKey { alpha_init: Some(a), alpha_step: Some(s), ..base });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Every `(cell, sample)` job in plan order.
    pub fn jobs(&self) -> Vec<Job> {
        self.cells()
            .into_iter()
            .flat_map(|cell| {
                (0..self.samples).map(move |sample| Job {
                    cell,
                    sample,
                    graph_seed: graph_seed(self.master_seed, self.graph_policy, cell.n, sample),
                    seed: run_seed(self.master_seed, cell.n, sample, cell.strategy),
                })
            })
            .collect()
    }

    /// Hash of every field that influences results; journal entries from a
    /// plan with a different fingerprint are ignored.
    pub fn fingerprint(&self) -> String {
        let mut scientific = self.clone();
        scientific.out_dir = PathBuf::new();
        scientific.workers = None;
        let json = serde_json::to_string(&scientific).expect("plan serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Ready-made plans for the standard figure classes.
pub mod presets {
    use super::*;

    /// Final energy against `α_init` at depth 3 (full scale: 100 samples, nodes 6..16).
    pub fn sweep_alpha_init(out_dir: impl Into<PathBuf>, full_scale: bool) -> ExperimentPlan {
        let nodes = if full_scale { vec![6, 8, 10, 12, 14, 16] } else { vec![6, 10] };
        let mut p = ExperimentPlan::new(nodes, vec![3], vec![Strategy::Hoho], out_dir);
        p.alpha_inits = (0..10).map(|k| k as f64 / 10.0).collect();
        p.alpha_steps = vec![0.05];
        p.samples = if full_scale { 100 } else { 30 };
        p
    }

    /// Final energy against `α_step` at depth 10.
    pub fn sweep_alpha_step(out_dir: impl Into<PathBuf>, full_scale: bool) -> ExperimentPlan {
        let nodes = if full_scale { vec![6, 10, 16] } else { vec![6, 10] };
        let mut p = ExperimentPlan::new(nodes, vec![10], vec![Strategy::Hoho], out_dir);
        p.alpha_steps = if full_scale {
            vec![0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001, 0.0005, 0.0002, 0.0001]
        } else {
            vec![0.5, 0.2, 0.1, 0.05, 0.02, 0.01]
        };
        p.samples = if full_scale { 100 } else { 30 };
        p
    }

    /// The three initializations side by side for the homotopy strategy.
    pub fn init_comparison(out_dir: impl Into<PathBuf>, full_scale: bool) -> ExperimentPlan {
        let mut p = ExperimentPlan::new(vec![10], vec![3], vec![Strategy::Hoho], out_dir);
        p.inits = vec![InitKind::Zr, InitKind::Nzr, InitKind::Rr];
        p.alpha_inits = (0..10).map(|k| k as f64 / 10.0).collect();
        p.alpha_steps = vec![0.05];
        p.samples = if full_scale { 100 } else { 30 };
        p
    }

    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub enum BenchmarkSweep {
        /// Fixed 10 nodes, growing depth.
        Layers,
        /// Fixed depth 5, growing node count.
        Nodes,
    }

    /// All three strategies under ZR with `α_init = 0`, `α_step = 0.01`.
    pub fn benchmark(out_dir: impl Into<PathBuf>, sweep: BenchmarkSweep, full_scale: bool) -> ExperimentPlan {
        let all = vec![Strategy::Qaoa, Strategy::Tqaoa, Strategy::Hoho];
        let mut p = match sweep {
            BenchmarkSweep::Layers => {
                let layers = if full_scale { (1..=20).map(|k| 5 * k).collect() } else { vec![5, 10, 20, 40] };
                let mut p = ExperimentPlan::new(vec![10], layers, all, out_dir);
                p.samples = if full_scale { 100 } else { 50 };
                p
            }
            BenchmarkSweep::Nodes => {
                let mut p = ExperimentPlan::new((6..=18).step_by(2).collect(), vec![5], all, out_dir);
                p.samples = 50;
                p
            }
        };
        p.alpha_inits = vec![0.0];
        p.alpha_steps = vec![0.01];
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentPlan {
        let mut p = ExperimentPlan::new(vec![4, 6], vec![2], vec![Strategy::Qaoa, Strategy::Hoho], "out");
        p.alpha_inits = vec![0.0, 0.5];
        p.alpha_steps = vec![0.25];
        p.samples = 3;
        p
    }

    #[test]
    fn cells_and_jobs() {
        let p = small();
        let cells = p.cells();
        // Per n: one QAOA cell plus two homotopy cells.
        assert_eq!(cells.len(), 6);
        assert_eq!(cells[0].alpha_init, None);
        assert_eq!(cells[1].alpha_init, Some(0.0));
        let jobs = p.jobs();
        assert_eq!(jobs.len(), 18);
        let ids: std::collections::BTreeSet<_> = jobs.iter().map(Job::id).collect();
        assert_eq!(ids.len(), jobs.len());
        assert!(jobs[3].id().starts_with("hoho-n4-L2-zr-a0-s0.25-i0-"), "{}", jobs[3].id());
    }

    #[test]
    fn seeds_are_paired_across_cells() {
        let jobs = small().jobs();
        let hoho: Vec<_> = jobs.iter().filter(|j| j.cell.strategy == Strategy::Hoho && j.cell.n == 4).collect();
        // Same sample at two alpha_init values: same instance, same stream.
        assert_eq!(hoho[0].seed, hoho[3].seed);
        assert_eq!(hoho[0].graph_seed, hoho[3].graph_seed);
        let qaoa = &jobs[0];
        assert_eq!(qaoa.graph_seed, hoho[0].graph_seed);
        assert_ne!(qaoa.seed, hoho[0].seed);
        assert_ne!(jobs[0].graph_seed, jobs[1].graph_seed);
    }

    #[test]
    fn shared_policy_reuses_graph() {
        assert_eq!(graph_seed(3, GraphPolicy::Shared, 8, 0), graph_seed(3, GraphPolicy::Shared, 8, 7));
        assert_ne!(graph_seed(3, GraphPolicy::Resample, 8, 0), graph_seed(3, GraphPolicy::Resample, 8, 7));
    }

    #[test]
    fn json_defaults_and_validation() {
        let p = ExperimentPlan::from_json(r#"{"nodes":[6],"layers":[3],"strategies":["hoho"],"out_dir":"x"}"#).unwrap();
        assert_eq!(p.samples, 100);
        assert_eq!(p.inits, vec![InitKind::Zr]);
        assert_eq!(p.alpha_steps, vec![0.01]);
        assert_eq!(p.m, 2);
        let back = ExperimentPlan::from_json(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);

        for bad in [
            r#"{"nodes":[],"layers":[3],"strategies":["qaoa"],"out_dir":"x"}"#,
            r#"{"nodes":[6],"layers":[3],"strategies":["qaoa"],"out_dir":"x","samples":0}"#,
            r#"{"nodes":[2],"layers":[3],"strategies":["qaoa"],"out_dir":"x"}"#,
            r#"{"nodes":[6],"layers":[3],"strategies":["hoho"],"out_dir":"x","alpha_steps":[0]}"#,
            r#"{"nodes":[6],"layers":[3],"strategies":["qaoa"],"out_dir":"x","colour":1}"#,
        ] {
            assert!(ExperimentPlan::from_json(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn fingerprint_ignores_execution_details() {
        let a = small();
        let mut b = small();
        b.out_dir = "elsewhere".into();
        b.workers = Some(3);
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.master_seed = 1;
        assert_ne!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn cell_order() {
        let mut cells = small().cells();
        cells.reverse();
        cells.sort();
        assert_eq!(cells, small().cells());
    }

    #[test]
    fn presets_validate() {
        use presets::*;
        for p in [
            sweep_alpha_init("o", false),
            sweep_alpha_step("o", true),
            init_comparison("o", false),
            benchmark("o", BenchmarkSweep::Layers, false),
            benchmark("o", BenchmarkSweep::Nodes, true),
        ] {
            p.validate().unwrap();
        }
    }
}
