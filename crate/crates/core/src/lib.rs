//! Hamiltonian-oriented homotopy QAOA for weighted Max-Cut.
//!
//! The crate bundles everything needed to run and compare three QAOA
//! optimization strategies on an exact state-vector simulator:
//!
//! * [`graph`]: seeded Barabási–Albert instances with integer weights and their JSON form.
//! * [`hamiltonian`]: the Max-Cut Ising diagonal, the interpolated observable
//!   `H(α) = (1-α)·H_mix + α·H_obj`, its extreme eigenvalues and energy normalization.
//! * [`simulator`]: ansatz preparation, exact expectations and adjoint gradients.
//! * [`optimize`]: an L-BFGS minimizer with a strong-Wolfe line search.
//! * [`strategies`]: plain QAOA, layer-growing T-QAOA and the homotopy variant.
//! * [`landscape`]: single-parameter energy scans and their Fourier analysis.
//! * [`experiments`]: plans, seeding, parallel execution, CSV output and aggregation.

// Range checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod graph;
pub mod hamiltonian;
pub mod landscape;
pub mod optimize;
pub mod rng;
pub mod simulator;
pub mod strategies;

pub use error::{Error, Result};
pub use graph::WeightedGraph;
pub use hamiltonian::{HomotopyHamiltonian, IsingDiagonal};
pub use optimize::{ConvergedBy, OptimizationResult, OptimizerConfig};
pub use simulator::{QaoaParams, StateVector};
pub use strategies::{HomotopyConfig, InitKind, InitStrategy, RunRecord, Strategy};
