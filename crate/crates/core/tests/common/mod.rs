//! Dense-matrix reference implementations used by the integration tests.
//!
//! Everything here is built from scratch with explicit Kronecker products and
//! a full eigendecomposition, without going through the crate's simulator.

#![allow(dead_code)]

use hoho_core::WeightedGraph;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

fn pauli_x() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

fn pauli_z() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

/// `op` on qubit `q` of `n`, identity elsewhere. Qubit `q` is bit `q` of the
/// basis index, so it is the `q`-th factor counted from the right.
pub fn single_site(op: &DMatrix<f64>, q: usize, n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::identity(1, 1);
    for k in (0..n).rev() {
        let f = if k == q { op.clone() } else { DMatrix::identity(2, 2) };
        m = kron(&m, &f);
    }
    m
}

/// `-Σ X_i`.
pub fn mixer(n: usize) -> DMatrix<f64> {
    let x = pauli_x();
    let mut m = DMatrix::zeros(1 << n, 1 << n);
    for q in 0..n {
        m -= single_site(&x, q, n);
    }
    m
}

/// `Σ w Z_u Z_v` as a dense matrix.
pub fn objective(g: &WeightedGraph) -> DMatrix<f64> {
    let z = pauli_z();
    let n = g.n();
    let mut m = DMatrix::zeros(1 << n, 1 << n);
    for e in g.edges() {
        // Both factors are diagonal, so the matrix product is elementwise.
        m += single_site(&z, e.u, n).component_mul(&single_site(&z, e.v, n)) * f64::from(e.w);
    }
    m
}

pub fn homotopy(alpha: f64, g: &WeightedGraph) -> DMatrix<f64> {
    mixer(g.n()) * (1.0 - alpha) + objective(g) * alpha
}

/// `exp(-i t H)` for real symmetric `H`.
pub fn evolution(h: &DMatrix<f64>, t: f64) -> CMatrix {
    let eig = SymmetricEigen::new(h.clone());
    let v = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
    let phases = CMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -t * l)));
    &v * phases * v.adjoint()
}

pub fn plus(n: usize) -> CVector {
    let d = 1 << n;
    CVector::from_element(d, Complex64::new(1.0 / (d as f64).sqrt(), 0.0))
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// The ansatz state by dense matrix exponentials, objective gate first in each layer.
pub fn prepare(gammas: &[f64], betas: &[f64], g: &WeightedGraph) -> CVector {
    let hobj = objective(g);
    let hmix = mixer(g.n());
    let mut psi = plus(g.n());
    for (&gm, &bt) in gammas.iter().zip(betas) {
        psi = evolution(&hobj, gm) * psi;
        psi = evolution(&hmix, bt) * psi;
    }
    psi
}

pub fn expectation(h: &DMatrix<f64>, psi: &CVector) -> f64 {
    (psi.adjoint() * to_complex(h) * psi)[(0, 0)].re
}

/// Smallest and largest eigenvalue by full diagonalization.
pub fn extremes(h: &DMatrix<f64>) -> (f64, f64) {
    let ev = SymmetricEigen::new(h.clone()).eigenvalues;
    (ev.min(), ev.max())
}

/// Central finite-difference gradient of `f` with step `h`.
pub fn central_diff(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|k| {
            let mut a = x.to_vec();
            let mut b = x.to_vec();
            a[k] += h;
            b[k] -= h;
            (f(&a) - f(&b)) / (2.0 * h)
        })
        .collect()
}

/// Random connected weighted graph that is not necessarily Barabási–Albert:
/// a random spanning tree plus extra edges.
pub fn random_graph(n: usize, extra: usize, rng: &mut impl rand::Rng) -> WeightedGraph {
    let mut edges = std::collections::BTreeMap::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.insert((u, v), rng.gen_range(1..=10u32));
    }
    for _ in 0..extra {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            edges.insert((u.min(v), u.max(v)), rng.gen_range(1..=10u32));
        }
    }
    WeightedGraph::new(n, edges.into_iter().map(|((u, v), w)| (u, v, w))).unwrap()
}
