//! Runs the three strategies on one 10-node instance and prints their final
//! normalized energies.
//!
//! ```text
//! cargo run --release -p hoho-core --example compare_strategies -- [seed]
//! ```

use std::time::Instant;

use hoho_core::graph::generate_ba_graph;
use hoho_core::hamiltonian::{maxcut_objective, EigenCache};
use hoho_core::strategies::{run_hoho, run_qaoa, run_tqaoa, Problem};
use hoho_core::{HomotopyConfig, InitStrategy, OptimizerConfig};

fn main() -> hoho_core::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let g = generate_ba_graph(10, 2, seed)?;
    let d = maxcut_objective(&g)?;
    let id = g.instance_hash();
    let cache = EigenCache::new();
    let problem = Problem::new(&id, &d).with_cache(&cache);
    let opt = OptimizerConfig::default();
    let zr = InitStrategy::zr();
    println!("instance {id}: {} edges, energies in [{}, {}]", g.edges().len(), d.emin(), d.emax());

    let t = Instant::now();
    let r = run_qaoa(&problem, 5, &zr, &opt, seed)?;
    println!("qaoa   L=5          e_norm {:.6}  iters {:5}  {:?}", r.e_norm, r.iterations_total(), t.elapsed());

    let t = Instant::now();
    let r = run_tqaoa(&problem, 4, 5, &zr, &opt, seed)?;
    println!("tqaoa  L=4->5       e_norm {:.6}  iters {:5}  {:?}", r.e_norm, r.iterations_total(), t.elapsed());

    let t = Instant::now();
    let r = run_hoho(&problem, &HomotopyConfig::new(0.0, 0.01, 5), seed)?;
    println!("hoho   L=5 step .01 e_norm {:.6}  iters {:5}  {:?}", r.e_norm, r.iterations_total(), t.elapsed());
    Ok(())
}
