//! Exact state-vector simulation of the QAOA ansatz.
//!
//! A depth-`L` circuit applied to `|+⟩^⊗n` alternates the objective phase
//! `exp(-iγ_j H_obj)` and the mixer `exp(-iβ_j H_mix)`, objective first in
//! every layer. With `H_mix = -Σ X_i` the mixer factorizes into single-qubit
//! `exp(+iβ X)` rotations.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{check_alpha, HomotopyHamiltonian, IsingDiagonal, DEFAULT_MAX_QUBITS};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Uniform superposition, the ground state of the mixer.
    pub fn plus(n: usize) -> Result<Self> {
        Self::plus_with_limit(n, DEFAULT_MAX_QUBITS)
    }

    pub fn plus_with_limit(n: usize, max_qubits: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("state needs at least one qubit".into()));
        }
        if n > max_qubits {
            return Err(Error::Resource(format!(
                "{n} qubits exceed the configured limit of {max_qubits}"
            )));
        }
        let dim = 1usize << n;
        let a = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        Ok(StateVector { n, amps: vec![a; dim] })
    }

    /// Computational basis state `|k⟩`.
    pub fn basis(n: usize, k: usize) -> Result<Self> {
        if k >= 1 << n {
            return Err(Error::InvalidArgument(format!("basis index {k} out of range for {n} qubits")));
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[k] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    /// Rescales arbitrary amplitudes to unit norm.
    pub fn normalized(n: usize, mut amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, got: amps.len() });
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero or non-finite vector".into()));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(StateVector { n, amps })
    }

    /// Wraps amplitudes without normalizing; used for operator images like `H·ψ`.
    pub fn from_amps_unchecked(n: usize, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n);
        StateVector { n, amps }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        inner(&self.amps, &other.amps)
    }

    /// `|⟨self|other⟩|`, the phase-insensitive overlap.
    pub fn overlap(&self, other: &StateVector) -> f64 {
        self.inner(other).norm()
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() == dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: dim, got: self.dim() })
        }
    }
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Angles of a depth-`L` ansatz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl QaoaParams {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() || gammas.len() != betas.len() {
            return Err(Error::InvalidArgument(format!(
                "need equal, nonzero numbers of angles, got {} gammas and {} betas",
                gammas.len(),
                betas.len()
            )));
        }
        Ok(QaoaParams { gammas, betas })
    }

    pub fn layers(&self) -> usize {
        self.gammas.len()
    }

    /// Flat layout `[γ_1..γ_L, β_1..β_L]`, the optimizer's coordinate order.
    pub fn to_flat(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }

    pub fn from_flat(x: &[f64]) -> Result<Self> {
        if !x.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("flat parameter vector has odd length {}", x.len())));
        }
        let (g, b) = x.split_at(x.len() / 2);
        Self::new(g.to_vec(), b.to_vec())
    }
}

/// `amps[k] ← exp(-iγ·E_k)·amps[k]`.
pub fn apply_objective_layer(psi: &mut StateVector, gamma: f64, diag: &IsingDiagonal) -> Result<()> {
    psi.check_dim(diag.dim())?;
    phase_layer(&mut psi.amps, &phase_table(gamma, diag), diag);
    Ok(())
}

/// `exp(-iγE)` for every distinct energy `E`.
fn phase_table(gamma: f64, diag: &IsingDiagonal) -> Vec<Complex64> {
    diag.levels()
        .iter()
        .map(|&e| Complex64::from_polar(1.0, -gamma * e))
        .collect()
}

fn phase_layer(amps: &mut [Complex64], table: &[Complex64], diag: &IsingDiagonal) {
    for (a, &l) in amps.iter_mut().zip(diag.level_of()) {
        *a *= table[l as usize];
    }
}

/// `exp(-iβ·H_mix) = ⊗_i exp(+iβ X_i)`.
pub fn apply_mixer_layer(psi: &mut StateVector, beta: f64) {
    mixer_layer(&mut psi.amps, psi.n, beta);
}

fn mixer_layer(amps: &mut [Complex64], n: usize, beta: f64) {
    let (s, c) = beta.sin_cos();
    for q in 0..n {
        let bit = 1usize << q;
        for block in amps.chunks_exact_mut(2 * bit) {
            let (lo, hi) = block.split_at_mut(bit);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                // (a, b) ← (c·a + i·s·b, i·s·a + c·b)
                let (ar, ai, br, bi) = (a.re, a.im, b.re, b.im);
                *a = Complex64::new(c * ar - s * bi, c * ai + s * br);
                *b = Complex64::new(c * br - s * ai, c * bi + s * ar);
            }
        }
    }
}

/// `H_mix·x = -Σ_i flip_i(x)`.
fn apply_mixer_hamiltonian(x: &[Complex64], n: usize, y: &mut [Complex64]) {
    y.iter_mut().for_each(|v| *v = ZERO);
    for q in 0..n {
        let bit = 1usize << q;
        for (xb, yb) in x.chunks_exact(2 * bit).zip(y.chunks_exact_mut(2 * bit)) {
            let (xl, xh) = xb.split_at(bit);
            let (yl, yh) = yb.split_at_mut(bit);
            for (((yl, yh), xl), xh) in yl.iter_mut().zip(yh.iter_mut()).zip(xl).zip(xh) {
                *yl -= xh;
                *yh -= xl;
            }
        }
    }
}

/// `⟨ψ|H_mix|ψ⟩ = -Σ_i Re⟨ψ|flip_i ψ⟩`.
pub fn mixer_expectation(psi: &StateVector) -> f64 {
    let mut total = 0.0;
    for q in 0..psi.n {
        let bit = 1usize << q;
        for block in psi.amps.chunks_exact(2 * bit) {
            let (lo, hi) = block.split_at(bit);
            total -= 2.0 * lo.iter().zip(hi).map(|(a, b)| a.re * b.re + a.im * b.im).sum::<f64>();
        }
    }
    total
}

/// `Σ_k E_k·|amps_k|²`.
pub fn objective_expectation(psi: &StateVector, diag: &IsingDiagonal) -> f64 {
    psi.amps
        .iter()
        .zip(diag.energies())
        .map(|(a, e)| e * a.norm_sqr())
        .sum()
}

/// `⟨ψ|H(α)|ψ⟩` from the two term expectations.
pub fn expectation(psi: &StateVector, alpha: f64, diag: &IsingDiagonal) -> Result<f64> {
    check_alpha(alpha)?;
    psi.check_dim(diag.dim())?;
    let mix = if alpha < 1.0 { mixer_expectation(psi) } else { 0.0 };
    let obj = if alpha > 0.0 { objective_expectation(psi, diag) } else { 0.0 };
    Ok((1.0 - alpha) * mix + alpha * obj)
}

/// Applies the full ansatz to `|+⟩^⊗n`.
pub fn prepare_state(p: &QaoaParams, diag: &IsingDiagonal) -> Result<StateVector> {
    let mut psi = StateVector::plus(diag.n())?;
    for (&g, &b) in p.gammas.iter().zip(&p.betas) {
        phase_layer(&mut psi.amps, &phase_table(g, diag), diag);
        mixer_layer(&mut psi.amps, psi.n, b);
    }
    Ok(psi)
}

/// `E_α(γ, β) = ⟨γ,β|H(α)|γ,β⟩`.
pub fn energy(p: &QaoaParams, alpha: f64, diag: &IsingDiagonal) -> Result<f64> {
    check_alpha(alpha)?;
    expectation(&prepare_state(p, diag)?, alpha, diag)
}

/// How the backward pass obtains intermediate states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientMode {
    /// Undo layers one at a time; `O(2^n)` memory.
    #[default]
    Recompute,
    /// Keep every intermediate state from the forward pass; `O(L·2^n)` memory.
    Stored,
}

/// Gradient `[∂E/∂γ_1..∂E/∂γ_L, ∂E/∂β_1..∂E/∂β_L]` by the adjoint method.
pub fn gradient(p: &QaoaParams, alpha: f64, diag: &IsingDiagonal) -> Result<Vec<f64>> {
    Ok(energy_and_gradient(p, alpha, diag, GradientMode::Recompute)?.1)
}

/// Energy and adjoint gradient from one forward and one backward sweep.
///
/// For a gate `exp(-iθG)` with state `φ` just after it and co-state
/// `λ = (later gates)†·H(α)·ψ`, the derivative is `2·Im⟨λ|G|φ⟩`.
pub fn energy_and_gradient(
    p: &QaoaParams,
    alpha: f64,
    diag: &IsingDiagonal,
    mode: GradientMode,
) -> Result<(f64, Vec<f64>)> {
    let h = HomotopyHamiltonian::new(alpha, diag)?;
    let n = diag.n();
    let layers = p.layers();
    let energies = diag.energies();

    // Forward sweep; in stored mode keep the state after each gate.
    let mut phi = StateVector::plus(n)?.amps;
    let mut after_phase: Vec<Vec<Complex64>> = Vec::new();
    let mut after_mixer: Vec<Vec<Complex64>> = Vec::new();
    for (&g, &b) in p.gammas.iter().zip(&p.betas) {
        phase_layer(&mut phi, &phase_table(g, diag), diag);
        if mode == GradientMode::Stored {
            after_phase.push(phi.clone());
        }
        mixer_layer(&mut phi, n, b);
        if mode == GradientMode::Stored {
            after_mixer.push(phi.clone());
        }
    }

    let mut lambda = vec![ZERO; phi.len()];
    h.apply_into(&phi, &mut lambda);
    let value = inner(&phi, &lambda).re;

    let mut grad = vec![0.0; 2 * layers];
    let mut scratch = vec![ZERO; phi.len()];
    for j in (0..layers).rev() {
        let state = match mode {
            GradientMode::Recompute => &phi,
            GradientMode::Stored => &after_mixer[j],
        };
        apply_mixer_hamiltonian(state, n, &mut scratch);
        grad[layers + j] = 2.0 * inner(&lambda, &scratch).im;

        mixer_layer(&mut lambda, n, -p.betas[j]);
        if mode == GradientMode::Recompute {
            mixer_layer(&mut phi, n, -p.betas[j]);
        }
        let state = match mode {
            GradientMode::Recompute => &phi,
            GradientMode::Stored => &after_phase[j],
        };
        grad[j] = 2.0
            * lambda
                .iter()
                .zip(state)
                .zip(energies)
                .map(|((l, f), e)| l.conj() * f * e)
                .sum::<Complex64>()
                .im;

        let undo = phase_table(-p.gammas[j], diag);
        phase_layer(&mut lambda, &undo, diag);
        if mode == GradientMode::Recompute {
            phase_layer(&mut phi, &undo, diag);
        }
    }
    Ok((value, grad))
}
