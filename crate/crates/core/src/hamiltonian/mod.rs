//! Max-Cut objective, transverse-field mixer and their linear interpolation.
//!
//! The objective is stored as the diagonal of `Σ w·Z_u Z_v` over the graph's
//! edges. The mixer `-Σ X_i` is never materialized; it acts on a vector by
//! summing bit-flipped copies of the amplitudes.

mod cache;
mod lanczos;

use num_complex::Complex64;

pub use cache::EigenCache;
pub use lanczos::{lanczos_extremes, LanczosConfig};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::simulator::StateVector;

/// Largest qubit count accepted by default (16 MiB of amplitudes per state at 20 qubits).
pub const DEFAULT_MAX_QUBITS: usize = 20;

/// Diagonal of the Max-Cut Ising Hamiltonian in the computational basis.
///
/// Bit `i` of the basis index is qubit `i`; bit value 0 means `Z = +1`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingDiagonal {
    n: usize,
    energies: Vec<f64>,
    emin: f64,
    emax: f64,
    /// Distinct energies, ascending.
    levels: Vec<f64>,
    /// Position of each basis state's energy in `levels`.
    level_of: Vec<u32>,
}

impl IsingDiagonal {
    /// Wraps a precomputed diagonal of length `2^n`.
    pub fn from_energies(n: usize, energies: Vec<f64>) -> Result<Self> {
        if energies.len() != 1usize << n {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                got: energies.len(),
            });
        }
        let mut levels = energies.clone();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        let level_of = energies
            .iter()
            .map(|e| levels.partition_point(|l| l < e) as u32)
            .collect();
        let emin = levels[0];
        let emax = levels[levels.len() - 1];
        Ok(IsingDiagonal { n, energies, emin, emax, levels, level_of })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Distinct eigenvalues, ascending.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub(crate) fn level_of(&self) -> &[u32] {
        &self.level_of
    }

    pub fn emin(&self) -> f64 {
        self.emin
    }

    pub fn emax(&self) -> f64 {
        self.emax
    }

    /// Weight of the cut encoded by basis state `k`, given the graph's total weight.
    ///
    /// `energy = total - 2·cut`, so the cut is `(total - energy) / 2`.
    pub fn cut_value(&self, k: usize, total_weight: u64) -> f64 {
        (total_weight as f64 - self.energies[k]) / 2.0
    }
}

/// Builds the Max-Cut diagonal `Σ_{(u,v,w)} w·z_u·z_v`.
pub fn maxcut_objective(g: &WeightedGraph) -> Result<IsingDiagonal> {
    maxcut_objective_with_limit(g, DEFAULT_MAX_QUBITS)
}

pub fn maxcut_objective_with_limit(g: &WeightedGraph, max_qubits: usize) -> Result<IsingDiagonal> {
    let n = g.n();
    if n > max_qubits {
        return Err(Error::Resource(format!(
            "{n} qubits exceed the configured limit of {max_qubits}"
        )));
    }
    let energies = (0..1usize << n)
        .map(|k| {
            g.edges()
                .iter()
                .map(|e| {
                    let parity = ((k >> e.u) ^ (k >> e.v)) & 1;
                    if parity == 0 {
                        f64::from(e.w)
                    } else {
                        -f64::from(e.w)
                    }
                })
                .sum()
        })
        .collect();
    IsingDiagonal::from_energies(n, energies)
}

/// `H(α) = (1-α)·H_mix + α·H_obj` with `H_mix = -Σ X_i`.
#[derive(Debug, Clone, Copy)]
pub struct HomotopyHamiltonian<'a> {
    alpha: f64,
    diag: &'a IsingDiagonal,
}

impl<'a> HomotopyHamiltonian<'a> {
    pub fn new(alpha: f64, diag: &'a IsingDiagonal) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(HomotopyHamiltonian { alpha, diag })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn diag(&self) -> &'a IsingDiagonal {
        self.diag
    }

    pub fn n(&self) -> usize {
        self.diag.n
    }

    /// Weight of the mixer term, `1 - α`.
    pub fn mixer_weight(&self) -> f64 {
        1.0 - self.alpha
    }

    /// Weight of the objective term, `α`.
    pub fn objective_weight(&self) -> f64 {
        self.alpha
    }

    /// `H(α)·ψ` without building a matrix.
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.diag.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.diag.dim(),
                got: psi.dim(),
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); psi.dim()];
        self.apply_into(psi.amps(), &mut out);
        Ok(StateVector::from_amps_unchecked(self.n(), out))
    }

    pub(crate) fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        let a = self.objective_weight();
        for ((yk, xk), d) in y.iter_mut().zip(x).zip(self.diag.energies()) {
            *yk = xk * (a * d);
        }
        subtract_flips(x, y, self.n(), self.mixer_weight());
    }

    /// Real-arithmetic matvec; the operator is real symmetric in the computational basis.
    pub(crate) fn apply_real(&self, x: &[f64], y: &mut [f64]) {
        let a = self.objective_weight();
        for ((yk, xk), d) in y.iter_mut().zip(x).zip(self.diag.energies()) {
            *yk = a * d * xk;
        }
        subtract_flips(x, y, self.n(), self.mixer_weight());
    }

    /// Smallest and largest eigenvalue of `H(α)`.
    ///
    /// Closed forms at the endpoints; Lanczos in between.
    pub fn extreme_eigenvalues(&self, tol: f64) -> Result<(f64, f64)> {
        self.extreme_eigenvalues_with(&LanczosConfig { tol, ..LanczosConfig::default() })
    }

    pub fn extreme_eigenvalues_with(&self, cfg: &LanczosConfig) -> Result<(f64, f64)> {
        if !(cfg.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", cfg.tol)));
        }
        if self.alpha == 1.0 {
            return Ok((self.diag.emin, self.diag.emax));
        }
        if self.alpha == 0.0 {
            let n = self.n() as f64;
            return Ok((-n, n));
        }
        lanczos_extremes(self.diag.dim(), |x, y| self.apply_real(x, y), cfg)
    }
}

/// `y ← y - b·Σ_i flip_i(x)`.
fn subtract_flips<T>(x: &[T], y: &mut [T], n: usize, b: f64)
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::SubAssign,
{
    if b == 0.0 {
        return;
    }
    for q in 0..n {
        let bit = 1usize << q;
        for (xb, yb) in x.chunks_exact(2 * bit).zip(y.chunks_exact_mut(2 * bit)) {
            let (xl, xh) = xb.split_at(bit);
            let (yl, yh) = yb.split_at_mut(bit);
            for (((yl, yh), &xl), &xh) in yl.iter_mut().zip(yh.iter_mut()).zip(xl).zip(xh) {
                *yl -= xh * b;
                *yh -= xl * b;
            }
        }
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("alpha must lie in [0, 1], got {alpha}")))
    }
}

/// Affine rescaling that maps `emin` to 0 and `emax` to 1.
pub fn normalize_energy(energy: f64, emin: f64, emax: f64) -> Result<f64> {
    if !(emax > emin) {
        return Err(Error::InvalidArgument(format!(
            "degenerate energy window [{emin}, {emax}]"
        )));
    }
    Ok((energy - emin) / (emax - emin))
}
