use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng as _;

use hoho_core::experiments::plan::presets::{self, BenchmarkSweep};
use hoho_core::experiments::plan::graph_seed;
use hoho_core::experiments::records::write_atomic;
use hoho_core::experiments::{aggregate, read_raw_csv, run_plan, write_aggregate_csv, ExperimentPlan, GraphPolicy};
use hoho_core::graph::generate_ba_graph;
use hoho_core::hamiltonian::{maxcut_objective, normalize_energy};
use hoho_core::landscape::{period_grid, scan_ansatz_parameter, Role};
use hoho_core::{rng, HomotopyHamiltonian, InitKind, QaoaParams, WeightedGraph};

#[derive(Parser)]
#[command(name = "hoho", version, about = "Homotopy QAOA experiments for weighted Max-Cut")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write seeded Barabási–Albert instances as JSON files.
    GenGraphs {
        #[arg(long)]
        nodes: usize,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Execute a plan file, resuming from its journal if present.
    Run {
        #[arg(long)]
        plan: PathBuf,
        /// Overrides the plan's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Final energy against the initial homotopy parameter.
    SweepAlphaInit(PresetArgs),
    /// Final energy against the homotopy step.
    SweepAlphaStep(PresetArgs),
    /// QAOA, T-QAOA and the homotopy variant side by side.
    Benchmark {
        #[arg(long, value_enum, default_value_t = Sweep::Layers)]
        sweep: Sweep,
        #[command(flatten)]
        preset: PresetArgs,
    },
    /// Energy along one angle of the ansatz, the others frozen at a seeded draw.
    ScanLandscape {
        #[arg(long)]
        instance: PathBuf,
        /// 1-based layer index.
        #[arg(long)]
        layer: usize,
        /// gamma or beta.
        #[arg(long)]
        param: String,
        #[arg(long, default_value_t = 256)]
        grid_size: usize,
        #[arg(long)]
        out: PathBuf,
        /// Circuit depth; defaults to the scanned layer, so the last layer is scanned.
        #[arg(long)]
        layers: Option<usize>,
        /// Seed for the frozen angles.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Observable `H(α)`.
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
    },
    /// Summarize a raw CSV into per-cell statistics.
    Aggregate {
        #[arg(long)]
        raw: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Sweep {
    Layers,
    Nodes,
}

#[derive(Args)]
struct PresetArgs {
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Use the full grids and sample counts instead of the reduced defaults.
    #[arg(long)]
    full_scale: bool,
    /// Comma-separated node counts.
    #[arg(long, value_delimiter = ',')]
    nodes: Option<Vec<usize>>,
    /// Comma-separated circuit depths.
    #[arg(long, value_delimiter = ',')]
    layers: Option<Vec<usize>>,
    /// Comma-separated initializations (zr, nzr, rr).
    #[arg(long, value_delimiter = ',')]
    inits: Option<Vec<InitKind>>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// One instance per node count instead of one per sample.
    #[arg(long)]
    shared_graphs: bool,
    /// Fill the wall_ms column (makes outputs run-dependent).
    #[arg(long)]
    wall_time: bool,
    /// Print the plan as JSON and exit.
    #[arg(long)]
    print_plan: bool,
}

impl PresetArgs {
    fn apply(&self, mut plan: ExperimentPlan) -> ExperimentPlan {
        if let Some(n) = &self.nodes {
            plan.nodes = n.clone();
        }
        if let Some(l) = &self.layers {
            plan.layers = l.clone();
        }
        if let Some(i) = &self.inits {
            plan.inits = i.clone();
        }
        if let Some(s) = self.samples {
            plan.samples = s;
        }
        if let Some(s) = self.seed {
            plan.master_seed = s;
        }
        if self.workers.is_some() {
            plan.workers = self.workers;
        }
        if self.shared_graphs {
            plan.graph_policy = GraphPolicy::Shared;
        }
        plan.record_wall_time = self.wall_time;
        plan
    }
}

fn execute(plan: &ExperimentPlan) -> Result<()> {
    plan.validate()?;
    let s = run_plan(plan)?;
    println!(
        "{} jobs: {} already done, {} run, {} failed",
        s.total, s.skipped, s.executed, s.failed
    );
    println!("raw:       {}", s.raw_csv.display());
    println!("traces:    {}", s.trace_csv.display());
    println!("aggregate: {}", s.aggregate_csv.display());
    if s.failed > 0 {
        bail!("{} jobs failed; see {}", s.failed, plan.out_dir.join("manifest.json").display());
    }
    Ok(())
}

fn preset(args: &PresetArgs, plan: ExperimentPlan) -> Result<()> {
    let plan = args.apply(plan);
    if args.print_plan {
        println!("{}", serde_json::to_string_pretty(&plan)?);
        return Ok(());
    }
    execute(&plan)
}

fn gen_graphs(nodes: usize, m: usize, count: usize, seed: u64, out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for i in 0..count {
        // Same seeds as sample `i` of a plan with master seed `seed`.
        let g = generate_ba_graph(nodes, m, graph_seed(seed, GraphPolicy::Resample, nodes, i))?;
        let path = out.join(format!("ba_n{nodes}_s{seed}_{i}.json"));
        write_atomic(&path, format!("{}\n", g.to_json()).as_bytes())?;
        println!("{} {}", path.display(), g.instance_hash());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn scan_landscape(
    instance: &Path,
    layer: usize,
    param: &str,
    grid_size: usize,
    out: &Path,
    layers: Option<usize>,
    seed: u64,
    alpha: f64,
) -> Result<()> {
    let text = fs::read_to_string(instance).with_context(|| format!("reading {}", instance.display()))?;
    let g = WeightedGraph::from_json(&text)?;
    let d = maxcut_objective(&g)?;
    let role: Role = param.parse()?;
    let depth = layers.unwrap_or(layer);
    if layer == 0 || layer > depth {
        bail!("--layer must lie in 1..={depth}, got {layer}");
    }
    if grid_size == 0 {
        bail!("--grid-size must be positive");
    }
    let mut r = rng::from_seed(seed);
    let params = QaoaParams::new(
        (0..depth).map(|_| r.gen_range(0.0..std::f64::consts::TAU)).collect(),
        (0..depth).map(|_| r.gen_range(0.0..std::f64::consts::TAU)).collect(),
    )?;
    let h = HomotopyHamiltonian::new(alpha, &d)?;
    let (lo, hi) = h.extreme_eigenvalues(1e-10)?;
    let scan = scan_ansatz_parameter(&params, layer - 1, role, &h, &period_grid(grid_size))?;

    let mut csv = String::from("theta,energy,e_norm\n");
    for (t, e) in scan.theta_grid.iter().zip(&scan.energies) {
        csv.push_str(&format!("{t},{e},{}\n", normalize_energy(*e, lo, hi)?));
    }
    write_atomic(out, csv.as_bytes())?;
    let mut frozen = out.as_os_str().to_owned();
    frozen.push(".params.json");
    write_atomic(Path::new(&frozen), format!("{}\n", serde_json::to_string_pretty(&params)?).as_bytes())?;
    println!("{} points written to {}", grid_size, out.display());
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::GenGraphs { nodes, m, count, seed, out } => gen_graphs(nodes, m, count, seed, &out),
        Command::Run { plan, out, workers } => {
            let text = fs::read_to_string(&plan).with_context(|| format!("reading {}", plan.display()))?;
            let mut p = ExperimentPlan::from_json(&text).with_context(|| format!("parsing {}", plan.display()))?;
            if let Some(o) = out {
                p.out_dir = o;
            }
            if workers.is_some() {
                p.workers = workers;
            }
            execute(&p)
        }
        Command::SweepAlphaInit(a) => {
            let plan = presets::sweep_alpha_init(a.out.clone(), a.full_scale);
            preset(&a, plan)
        }
        Command::SweepAlphaStep(a) => {
            let plan = presets::sweep_alpha_step(a.out.clone(), a.full_scale);
            preset(&a, plan)
        }
        Command::Benchmark { sweep, preset: a } => {
            let sweep = match sweep {
                Sweep::Layers => BenchmarkSweep::Layers,
                Sweep::Nodes => BenchmarkSweep::Nodes,
            };
            let plan = presets::benchmark(a.out.clone(), sweep, a.full_scale);
            preset(&a, plan)
        }
        Command::ScanLandscape { instance, layer, param, grid_size, out, layers, seed, alpha } => {
            scan_landscape(&instance, layer, &param, grid_size, &out, layers, seed, alpha)
        }
        Command::Aggregate { raw, out } => {
            let rows = read_raw_csv(&raw).with_context(|| format!("reading {}", raw.display()))?;
            let agg = aggregate(&rows);
            write_aggregate_csv(&out, &agg)?;
            println!("{} rows -> {} cells in {}", rows.len(), agg.len(), out.display());
            Ok(())
        }
    }
}
