//! End-to-end optimization strategies: plain QAOA, layer-growing T-QAOA and
//! the homotopy variant that moves the observable from the mixer to the
//! objective while warm-starting each loop from the previous optimum.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{normalize_energy, EigenCache, HomotopyHamiltonian, IsingDiagonal};
use crate::optimize::{minimize_energy, ConvergedBy, OptimizerConfig};
use crate::rng::{self, Rng};
use crate::simulator::{energy, QaoaParams};

/// Default width of the near-zero objective-angle interval.
pub const DEFAULT_NZR_WIDTH: f64 = 0.05;
/// Default starting depth of T-QAOA.
pub const DEFAULT_TQAOA_L0: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitKind {
    /// Both angle vectors uniform on `[0, 2π)`.
    Rr,
    /// Objective angles uniform on `[0, v)`, mixer angles on `[0, 2π)`.
    Nzr,
    /// Objective angles zero, mixer angles on `[0, 2π)`.
    Zr,
}

impl InitKind {
    pub fn tag(self) -> &'static str {
        match self {
            InitKind::Rr => "rr",
            InitKind::Nzr => "nzr",
            InitKind::Zr => "zr",
        }
    }
}

impl fmt::Display for InitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for InitKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rr" => Ok(InitKind::Rr),
            "nzr" => Ok(InitKind::Nzr),
            "zr" => Ok(InitKind::Zr),
            other => Err(Error::Parse(format!("unknown initialization '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitStrategy {
    pub kind: InitKind,
    /// Width of the NZR interval; ignored for the other kinds.
    #[serde(default = "default_nzr_width")]
    pub v: f64,
}

fn default_nzr_width() -> f64 {
    DEFAULT_NZR_WIDTH
}

impl InitStrategy {
    pub fn new(kind: InitKind) -> Self {
        InitStrategy { kind, v: DEFAULT_NZR_WIDTH }
    }

    pub fn zr() -> Self {
        Self::new(InitKind::Zr)
    }

    pub fn rr() -> Self {
        Self::new(InitKind::Rr)
    }

    pub fn nzr(v: f64) -> Self {
        InitStrategy { kind: InitKind::Nzr, v }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == InitKind::Nzr && !(self.v > 0.0) {
            return Err(Error::InvalidArgument(format!("NZR width must be positive, got {}", self.v)));
        }
        Ok(())
    }
}

/// Draws starting angles. Objective angles are drawn before mixer angles.
pub fn init_params(s: &InitStrategy, layers: usize, rng: &mut Rng) -> Result<QaoaParams> {
    s.validate()?;
    if layers == 0 {
        return Err(Error::InvalidArgument("need at least one layer".into()));
    }
    let gammas = match s.kind {
        InitKind::Rr => (0..layers).map(|_| rng.gen_range(0.0..TAU)).collect(),
        InitKind::Nzr => (0..layers).map(|_| rng.gen_range(0.0..s.v)).collect(),
        InitKind::Zr => vec![0.0; layers],
    };
    let betas = (0..layers).map(|_| rng.gen_range(0.0..TAU)).collect();
    QaoaParams::new(gammas, betas)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Qaoa,
    Tqaoa,
    Hoho,
}

impl Strategy {
    pub fn tag(self) -> &'static str {
        match self {
            Strategy::Qaoa => "qaoa",
            Strategy::Tqaoa => "tqaoa",
            Strategy::Hoho => "hoho",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "qaoa" => Ok(Strategy::Qaoa),
            "tqaoa" => Ok(Strategy::Tqaoa),
            "hoho" | "hohoqaoa" => Ok(Strategy::Hoho),
            other => Err(Error::Parse(format!("unknown strategy '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotopyConfig {
    pub alpha_init: f64,
    pub alpha_step: f64,
    pub layers: usize,
    pub init: InitStrategy,
    pub optimizer: OptimizerConfig,
    /// Accuracy of the per-loop extreme eigenvalues.
    pub eig_tol: f64,
    /// Compute `E_norm` at every intermediate `α`, not just at `α = 1`.
    pub loop_normalization: bool,
}

impl HomotopyConfig {
    pub fn new(alpha_init: f64, alpha_step: f64, layers: usize) -> Self {
        HomotopyConfig {
            alpha_init,
            alpha_step,
            layers,
            init: InitStrategy::zr(),
            optimizer: OptimizerConfig::default(),
            eig_tol: 1e-10,
            loop_normalization: true,
        }
    }

    pub fn schedule(&self) -> Result<Vec<f64>> {
        alpha_schedule(self.alpha_init, self.alpha_step)
    }
}

/// `α_init, α_init + step, …`, with the last loop clamped to exactly 1.
///
/// Values are rounded to 12 decimals so that e.g. `0.1 + 2·0.1` is stored as `0.3`.
pub fn alpha_schedule(alpha_init: f64, alpha_step: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&alpha_init) {
        return Err(Error::InvalidArgument(format!("alpha_init must lie in [0, 1], got {alpha_init}")));
    }
    if !(alpha_step > 0.0 && alpha_step <= 1.0) {
        return Err(Error::InvalidArgument(format!("alpha_step must lie in (0, 1], got {alpha_step}")));
    }
    let mut out = Vec::new();
    for k in 0.. {
        let a = ((alpha_init + k as f64 * alpha_step) * 1e12).round() / 1e12;
        if a >= 1.0 - 1e-12 {
            break;
        }
        out.push(a);
    }
    out.push(1.0);
    Ok(out)
}

/// One optimization loop inside a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopRecord {
    pub alpha: f64,
    pub layers: usize,
    pub initial_energy: f64,
    pub energy_star: f64,
    /// `None` when the eigenvalue window at this `α` was not available.
    pub e_norm_star: Option<f64>,
    pub iterations: usize,
    pub converged_by: ConvergedBy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub strategy: Strategy,
    pub init: InitKind,
    pub instance_id: String,
    pub seed: u64,
    pub loops: Vec<LoopRecord>,
    pub params_star: QaoaParams,
    /// `E_1` at the final parameters.
    pub final_energy: f64,
    /// `final_energy` normalized by the objective's extreme eigenvalues.
    pub e_norm: f64,
    pub wall_ms: u64,
}

impl RunRecord {
    pub fn iterations_total(&self) -> usize {
        self.loops.iter().map(|l| l.iterations).sum()
    }
}

/// A problem instance as seen by the strategies.
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a> {
    pub id: &'a str,
    pub diag: &'a IsingDiagonal,
    pub cache: Option<&'a EigenCache>,
}

impl<'a> Problem<'a> {
    pub fn new(id: &'a str, diag: &'a IsingDiagonal) -> Self {
        Problem { id, diag, cache: None }
    }

    pub fn with_cache(mut self, cache: &'a EigenCache) -> Self {
        self.cache = Some(cache);
        self
    }

    /// `(emin_α, emax_α)`, memoized when a cache is attached.
    pub fn window(&self, alpha: f64, tol: f64) -> Result<(f64, f64)> {
        let h = HomotopyHamiltonian::new(alpha, self.diag)?;
        match self.cache {
            Some(c) => c.get_or_compute(self.id, &h, tol),
            None => h.extreme_eigenvalues(tol),
        }
    }

    fn final_normalized(&self, params: &QaoaParams) -> Result<(f64, f64)> {
        let e = energy(params, 1.0, self.diag)?;
        Ok((e, normalize_energy(e, self.diag.emin(), self.diag.emax())?))
    }
}

fn optimize_loop(
    problem: &Problem<'_>,
    start: &QaoaParams,
    alpha: f64,
    cfg: &OptimizerConfig,
    e_norm: impl FnOnce(f64) -> Option<f64>,
) -> Result<(QaoaParams, LoopRecord)> {
    let r = minimize_energy(start, alpha, problem.diag, cfg)?;
    let record = LoopRecord {
        alpha,
        layers: start.layers(),
        initial_energy: r.energy_trace[0],
        energy_star: r.energy_star,
        e_norm_star: e_norm(r.energy_star),
        iterations: r.iterations,
        converged_by: r.converged_by,
    };
    Ok((r.params_star, record))
}

fn objective_norm(diag: &IsingDiagonal) -> impl Fn(f64) -> Option<f64> + '_ {
    move |e| normalize_energy(e, diag.emin(), diag.emax()).ok()
}

/// Plain QAOA: one minimization of `E_1` from fresh angles.
pub fn run_qaoa(
    problem: &Problem<'_>,
    layers: usize,
    init: &InitStrategy,
    cfg: &OptimizerConfig,
    seed: u64,
) -> Result<RunRecord> {
    let started = Instant::now();
    let mut rng = rng::from_seed(seed);
    let p0 = init_params(init, layers, &mut rng)?;
    let (params, record) = optimize_loop(problem, &p0, 1.0, cfg, objective_norm(problem.diag))?;
    let (final_energy, e_norm) = problem.final_normalized(&params)?;
    Ok(RunRecord {
        strategy: Strategy::Qaoa,
        init: init.kind,
        instance_id: problem.id.to_owned(),
        seed,
        loops: vec![record],
        params_star: params,
        final_energy,
        e_norm,
        wall_ms: started.elapsed().as_millis() as u64,
    })
}

/// T-QAOA: optimize at depth `l0`, then grow one layer at a time up to
/// `l_final`, appending `γ ~ U(0, 2π)` and `β = 0` before each re-optimization.
pub fn run_tqaoa(
    problem: &Problem<'_>,
    l0: usize,
    l_final: usize,
    init: &InitStrategy,
    cfg: &OptimizerConfig,
    seed: u64,
) -> Result<RunRecord> {
    if l0 == 0 || l_final < l0 {
        return Err(Error::InvalidArgument(format!(
            "T-QAOA needs l_final >= l0 >= 1, got l0 = {l0}, l_final = {l_final}"
        )));
    }
    let started = Instant::now();
    let mut rng = rng::from_seed(seed);
    let p0 = init_params(init, l0, &mut rng)?;
    let (mut params, first) = optimize_loop(problem, &p0, 1.0, cfg, objective_norm(problem.diag))?;
    let mut loops = vec![first];
    for _ in l0..l_final {
        params.gammas.push(rng.gen_range(0.0..TAU));
        params.betas.push(0.0);
        let (next, record) = optimize_loop(problem, &params, 1.0, cfg, objective_norm(problem.diag))?;
        params = next;
        loops.push(record);
    }
    let (final_energy, e_norm) = problem.final_normalized(&params)?;
    Ok(RunRecord {
        strategy: Strategy::Tqaoa,
        init: init.kind,
        instance_id: problem.id.to_owned(),
        seed,
        loops,
        params_star: params,
        final_energy,
        e_norm,
        wall_ms: started.elapsed().as_millis() as u64,
    })
}

/// Homotopy QAOA: minimize `E_α` for each `α` of the schedule, each loop
/// starting from the previous loop's optimum; the circuit depth never changes.
pub fn run_hoho(problem: &Problem<'_>, cfg: &HomotopyConfig, seed: u64) -> Result<RunRecord> {
    let schedule = cfg.schedule()?;
    let started = Instant::now();
    let mut rng = rng::from_seed(seed);
    let mut params = init_params(&cfg.init, cfg.layers, &mut rng)?;
    let mut loops = Vec::with_capacity(schedule.len());
    for &alpha in &schedule {
        let norm = |e: f64| {
            if alpha == 1.0 {
                return normalize_energy(e, problem.diag.emin(), problem.diag.emax()).ok();
            }
            if !cfg.loop_normalization {
                return None;
            }
            match problem.window(alpha, cfg.eig_tol) {
                Ok((lo, hi)) => normalize_energy(e, lo, hi).ok(),
                Err(err) => {
                    log::warn!("no eigenvalue window for {} at alpha {alpha}: {err}", problem.id);
                    None
                }
            }
        };
        let (next, record) = optimize_loop(problem, &params, alpha, &cfg.optimizer, norm)?;
        params = next;
        loops.push(record);
    }
    let (final_energy, e_norm) = problem.final_normalized(&params)?;
    Ok(RunRecord {
        strategy: Strategy::Hoho,
        init: cfg.init.kind,
        instance_id: problem.id.to_owned(),
        seed,
        loops,
        params_star: params,
        final_energy,
        e_norm,
        wall_ms: started.elapsed().as_millis() as u64,
    })
}
