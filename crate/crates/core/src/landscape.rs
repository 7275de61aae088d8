//! Single-parameter energy scans and their Fourier content.
//!
//! Freezing every angle but one, the energy as a function of the remaining
//! angle `θ` of a gate `exp(-iθH)` is a finite cosine series
//! `C + Σ A·cos(θ·Δ + B)` whose frequencies `Δ` are differences between
//! eigenvalues of `H`. For integer spectra the series is `2π`-periodic, so a
//! DFT over one exact period resolves every term into its own bin.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{HomotopyHamiltonian, IsingDiagonal};
use crate::simulator::{apply_mixer_layer, apply_objective_layer, expectation, QaoaParams, StateVector};

/// Which Hamiltonian generates the scanned gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// `exp(-iγ H_obj)`.
    Objective,
    /// `exp(-iβ H_mix)`.
    Mixer,
}

impl std::str::FromStr for Role {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gamma" | "objective" => Ok(Role::Objective),
            "beta" | "mixer" => Ok(Role::Mixer),
            other => Err(Error::Parse(format!("unknown parameter kind '{other}', expected gamma or beta"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Objective(f64),
    Mixer(f64),
}

impl Gate {
    fn of(role: Role, theta: f64) -> Self {
        match role {
            Role::Objective => Gate::Objective(theta),
            Role::Mixer => Gate::Mixer(theta),
        }
    }

    fn apply(self, psi: &mut StateVector, diag: &IsingDiagonal) -> Result<()> {
        match self {
            Gate::Objective(g) => apply_objective_layer(psi, g, diag),
            Gate::Mixer(b) => {
                apply_mixer_layer(psi, b);
                Ok(())
            }
        }
    }
}

/// The ansatz as a gate list: `γ_1, β_1, γ_2, β_2, …`.
pub fn ansatz_gates(p: &QaoaParams) -> Vec<Gate> {
    p.gammas
        .iter()
        .zip(&p.betas)
        .flat_map(|(&g, &b)| [Gate::Objective(g), Gate::Mixer(b)])
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanContext {
    /// Zero-based layer index of the scanned angle.
    pub layer: usize,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub theta_grid: Vec<f64>,
    pub energies: Vec<f64>,
    pub context: Option<ScanContext>,
}

/// `M` equally spaced angles covering `[0, 2π)`.
pub fn period_grid(size: usize) -> Vec<f64> {
    (0..size).map(|k| TAU * k as f64 / size as f64).collect()
}

/// Energy of `observable` after `exp(-iθH)` and the `suffix` gates act on `prefix`, for every `θ`.
pub fn scan_parameter(
    prefix: &StateVector,
    role: Role,
    observable: &HomotopyHamiltonian<'_>,
    suffix: &[Gate],
    grid: &[f64],
) -> Result<ScanResult> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("scan grid is empty".into()));
    }
    let diag = observable.diag();
    if prefix.dim() != diag.dim() {
        return Err(Error::DimensionMismatch { expected: diag.dim(), got: prefix.dim() });
    }
    let energies = grid
        .par_iter()
        .map(|&theta| {
            let mut psi = prefix.clone();
            Gate::of(role, theta).apply(&mut psi, diag)?;
            for g in suffix {
                g.apply(&mut psi, diag)?;
            }
            expectation(&psi, observable.alpha(), diag)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ScanResult {
        theta_grid: grid.to_vec(),
        energies,
        context: None,
    })
}

/// Scans one angle of an ansatz while the others stay at `p`.
pub fn scan_ansatz_parameter(
    p: &QaoaParams,
    layer: usize,
    role: Role,
    observable: &HomotopyHamiltonian<'_>,
    grid: &[f64],
) -> Result<ScanResult> {
    if layer >= p.layers() {
        return Err(Error::InvalidArgument(format!(
            "layer {layer} out of range for a {}-layer ansatz",
            p.layers()
        )));
    }
    let gates = ansatz_gates(p);
    let position = 2 * layer + usize::from(role == Role::Mixer);
    let diag = observable.diag();
    let mut prefix = StateVector::plus(diag.n())?;
    for g in &gates[..position] {
        g.apply(&mut prefix, diag)?;
    }
    let mut scan = scan_parameter(&prefix, role, observable, &gates[position + 1..], grid)?;
    scan.context = Some(ScanContext { layer, role });
    Ok(scan)
}

/// Distinct positive differences between eigenvalues of the scanned Hamiltonian, ascending.
pub fn eigenvalue_gaps(role: Role, diag: &IsingDiagonal) -> Vec<f64> {
    let spectrum: Vec<f64> = match role {
        Role::Mixer => (0..=diag.n()).map(|k| 2.0 * k as f64 - diag.n() as f64).collect(),
        Role::Objective => dedup_sorted(diag.energies().to_vec()),
    };
    let mut gaps = Vec::with_capacity(spectrum.len() * spectrum.len() / 2);
    for (i, a) in spectrum.iter().enumerate() {
        for b in &spectrum[..i] {
            if a - b > 1e-9 {
                gaps.push(a - b);
            }
        }
    }
    dedup_sorted(gaps)
}

fn dedup_sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);
    v
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineTerm {
    pub frequency: f64,
    pub amplitude: f64,
    pub phase: f64,
}

/// `C + Σ A·cos(Δ·θ + B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineModel {
    pub constant: f64,
    pub terms: Vec<CosineTerm>,
}

impl CosineModel {
    pub fn eval(&self, theta: f64) -> f64 {
        self.constant
            + self
                .terms
                .iter()
                .map(|t| t.amplitude * (t.frequency * theta + t.phase).cos())
                .sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyBin {
    pub frequency: f64,
    pub amplitude: f64,
    pub in_gaps: bool,
    pub surviving: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CosineReport {
    pub bins: Vec<FrequencyBin>,
    /// Frequencies whose amplitude exceeds `tol` times the largest amplitude.
    pub surviving: Vec<f64>,
    /// True when every surviving frequency is an eigenvalue gap.
    pub contained: bool,
    /// Largest amplitude at a frequency that is not a gap.
    pub containment_residual: f64,
    /// Largest deviation between the fitted model and the scan on the grid.
    pub reconstruction_residual: f64,
    /// Fitted from the DFT; only gap frequencies carry terms.
    pub model: CosineModel,
}

/// DFT-based check that a `2π`-periodic scan contains only gap frequencies.
pub fn verify_cosine_structure(scan: &ScanResult, gaps: &[f64], tol: f64) -> Result<CosineReport> {
    let m = scan.theta_grid.len();
    if m != scan.energies.len() {
        return Err(Error::DimensionMismatch { expected: m, got: scan.energies.len() });
    }
    if m < 3 {
        return Err(Error::InvalidArgument("grid does not cover a full period: fewer than 3 points".into()));
    }
    let h = TAU / m as f64;
    let uniform = scan
        .theta_grid
        .windows(2)
        .all(|w| (w[1] - w[0] - h).abs() <= 1e-9);
    if !uniform {
        return Err(Error::InvalidArgument(
            "grid does not cover a full period: spacing must be uniform and equal to 2π/M".into(),
        ));
    }
    for &g in gaps {
        if (g - g.round()).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("gap {g} is not an integer; the scan is not 2π-periodic")));
        }
        if 2.0 * g.round() >= m as f64 {
            return Err(Error::InvalidArgument(format!(
                "grid of {m} points aliases gap {g}; need more than {} points",
                2.0 * g.round()
            )));
        }
    }

    let half = (m - 1) / 2;
    let spectrum: Vec<Complex64> = (0..=half)
        .map(|k| {
            scan.theta_grid
                .iter()
                .zip(&scan.energies)
                .map(|(&t, &e)| Complex64::from_polar(e, -(k as f64) * t))
                .sum()
        })
        .collect();
    let constant = spectrum[0].re / m as f64;
    let amplitude = |k: usize| 2.0 * spectrum[k].norm() / m as f64;
    let scale = (1..=half).map(amplitude).fold(constant.abs(), f64::max);
    let is_gap = |k: usize| gaps.iter().any(|g| (g - k as f64).abs() <= 1e-9);

    let mut bins = Vec::with_capacity(half);
    let mut terms = Vec::new();
    let mut containment_residual: f64 = 0.0;
    for (k, x) in spectrum.iter().enumerate().skip(1) {
        let a = amplitude(k);
        let in_gaps = is_gap(k);
        let surviving = a > tol * scale;
        if in_gaps {
            terms.push(CosineTerm { frequency: k as f64, amplitude: a, phase: x.arg() });
        } else {
            containment_residual = containment_residual.max(a);
        }
        bins.push(FrequencyBin { frequency: k as f64, amplitude: a, in_gaps, surviving });
    }
    let model = CosineModel { constant, terms };
    let reconstruction_residual = scan
        .theta_grid
        .iter()
        .zip(&scan.energies)
        .map(|(&t, &e)| (model.eval(t) - e).abs())
        .fold(0.0, f64::max);
    let surviving: Vec<f64> = bins.iter().filter(|b| b.surviving).map(|b| b.frequency).collect();
    let contained = bins.iter().all(|b| !b.surviving || b.in_gaps);
    Ok(CosineReport {
        bins,
        surviving,
        contained,
        containment_residual,
        reconstruction_residual,
        model,
    })
}

/// Smallest grid size whose DFT resolves every gap into its own bin.
pub fn exact_period_grid_size(gaps: &[f64]) -> usize {
    let max_gap = gaps.iter().copied().fold(0.0, f64::max).round() as usize;
    2 * max_gap + 2
}
