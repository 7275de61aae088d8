//! Fixtures shared by the benchmarks.

use std::f64::consts::TAU;

use hoho_core::graph::generate_ba_graph;
use hoho_core::hamiltonian::maxcut_objective;
use hoho_core::{rng, IsingDiagonal, QaoaParams};
use rand::Rng as _;

/// A seeded `n`-node instance with uniformly drawn `layers`-deep angles.
pub fn fixture(n: usize, layers: usize, seed: u64) -> (IsingDiagonal, QaoaParams) {
    let g = generate_ba_graph(n, 2, seed).expect("valid instance");
    let d = maxcut_objective(&g).expect("within qubit limit");
    let mut r = rng::from_seed(seed);
    let gammas = (0..layers).map(|_| r.gen_range(0.0..TAU)).collect();
    let betas = (0..layers).map(|_| r.gen_range(0.0..TAU)).collect();
    (d, QaoaParams::new(gammas, betas).expect("nonzero depth"))
}
