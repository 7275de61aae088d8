use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng;

/// Settings for [`lanczos_extremes`].
#[derive(Debug, Clone)]
pub struct LanczosConfig {
    /// Residual bound `|β_j·s_j|` both extreme Ritz pairs must reach.
    pub tol: f64,
    pub max_iters: usize,
    /// Seed for the random start vector.
    pub seed: u64,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        LanczosConfig {
            tol: 1e-10,
            max_iters: 300,
            seed: 0x5eed_1a2c,
        }
    }
}

/// Ritz values are extracted every few steps; the tridiagonal eigensolve dominates otherwise.
const CHECK_EVERY: usize = 4;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    // Two passes of classical Gram-Schmidt.
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, w);
            w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
        }
    }
}

fn random_unit(dim: usize, rng: &mut rng::Rng, basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    orthogonalize(&mut v, basis);
    let nv = norm(&v);
    (nv > 1e-8).then(|| v.into_iter().map(|x| x / nv).collect())
}

struct Ritz {
    min: f64,
    max: f64,
    res_min: f64,
    res_max: f64,
}

fn ritz_extremes(alphas: &[f64], betas: &[f64], next_beta: f64) -> Ritz {
    let k = alphas.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j {
            betas[i]
        } else if j + 1 == i {
            betas[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let (mut imin, mut imax) = (0, 0);
    for i in 0..k {
        if eig.eigenvalues[i] < eig.eigenvalues[imin] {
            imin = i;
        }
        if eig.eigenvalues[i] > eig.eigenvalues[imax] {
            imax = i;
        }
    }
    Ritz {
        min: eig.eigenvalues[imin],
        max: eig.eigenvalues[imax],
        res_min: (next_beta * eig.eigenvectors[(k - 1, imin)]).abs(),
        res_max: (next_beta * eig.eigenvectors[(k - 1, imax)]).abs(),
    }
}

/// Extreme eigenvalues of a real symmetric operator given only its matvec.
///
/// Lanczos with full reorthogonalization from a seeded random start. When the
/// Krylov space becomes invariant before covering the whole space, iteration
/// restarts once from a fresh random vector orthogonal to the current basis.
pub fn lanczos_extremes<F>(dim: usize, matvec: F, cfg: &LanczosConfig) -> Result<(f64, f64)>
where
    F: Fn(&[f64], &mut [f64]),
{
    if dim == 0 {
        return Err(Error::InvalidArgument("empty operator".into()));
    }
    let mut rng = rng::from_seed(cfg.seed);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut q = random_unit(dim, &mut rng, &basis).expect("nonzero start vector");
    let mut w = vec![0.0; dim];
    let mut restarted = false;
    let limit = cfg.max_iters.min(dim).max(1);
    let mut best = (f64::NAN, f64::NAN);

    for _ in 0..limit {
        matvec(&q, &mut w);
        let a = dot(&q, &w);
        basis.push(q);
        alphas.push(a);
        orthogonalize(&mut w, &basis);
        let b = norm(&w);
        let scale = alphas.iter().map(|x| x.abs()).fold(1.0, f64::max);
        let breakdown = b <= 1e-12 * scale;

        let last = basis.len() == dim || basis.len() == limit;
        if !(breakdown || last || basis.len().is_multiple_of(CHECK_EVERY)) {
            betas.push(b);
            q = w.iter().map(|x| x / b).collect();
            continue;
        }
        let ritz = ritz_extremes(&alphas, &betas, if breakdown { 0.0 } else { b });
        best = (ritz.min, ritz.max);
        if basis.len() == dim {
            return Ok(best);
        }
        if breakdown {
            if restarted {
                return Ok(best);
            }
            restarted = true;
            match random_unit(dim, &mut rng, &basis) {
                Some(fresh) => {
                    q = fresh;
                    betas.push(0.0);
                    continue;
                }
                None => return Ok(best),
            }
        }
        if ritz.res_min < cfg.tol && ritz.res_max < cfg.tol {
            return Ok(best);
        }
        betas.push(b);
        q = w.iter().map(|x| x / b).collect();
    }
    Err(Error::EigenNotConverged {
        iterations: limit,
        emin: best.0,
        emax: best.1,
    })
}
