//! Limited-memory BFGS over an unbounded parameter domain.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::IsingDiagonal;
use crate::simulator::{energy, energy_and_gradient, GradientMode, QaoaParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// Stop when `|f_k - f_{k-1}| <= abs_tol`.
    pub abs_tol: f64,
    /// Stop when `|f_k - f_{k-1}| / max(|f_k|, 1) <= rel_tol`.
    pub rel_tol: f64,
    /// Stop when the gradient's infinity norm is `<= grad_tol`.
    pub grad_tol: f64,
    pub max_iters: usize,
    /// Accept a non-decreasing step when the line search fails instead of stopping.
    pub allow_increase: bool,
    /// Number of curvature pairs kept.
    pub history_size: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            grad_tol: 1e-9,
            max_iters: 10_000,
            allow_increase: true,
            history_size: 10,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.abs_tol, self.rel_tol, self.grad_tol];
        if positive.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::InvalidArgument("optimizer tolerances must be positive".into()));
        }
        if self.max_iters == 0 || self.history_size == 0 {
            return Err(Error::InvalidArgument(
                "max_iters and history_size must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergedBy {
    AbsTol,
    RelTol,
    GradTol,
    MaxIters,
    /// No acceptable step could be found along the search direction.
    LineSearchFailed,
}

/// Outcome of [`minimize`] on flat coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged_by: ConvergedBy,
    /// Objective after each iteration; the first entry is the starting value.
    pub trace: Vec<f64>,
}

/// Outcome of [`minimize_energy`].
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub params_star: QaoaParams,
    pub energy_star: f64,
    pub iterations: usize,
    pub converged_by: ConvergedBy,
    pub energy_trace: Vec<f64>,
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;
const MAX_LINE_EVALS: usize = 30;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn finite(f: f64, g: &[f64]) -> bool {
    f.is_finite() && g.iter().all(|x| x.is_finite())
}

struct Point {
    t: f64,
    f: f64,
    g: Vec<f64>,
    slope: f64,
}

struct LineSearch<'a, F> {
    objective: &'a mut F,
    x: &'a [f64],
    d: &'a [f64],
    f0: f64,
    slope0: f64,
    evals: usize,
    best: Option<Point>,
}

impl<F> LineSearch<'_, F>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    fn eval(&mut self, t: f64) -> Result<Point> {
        let xt: Vec<f64> = self.x.iter().zip(self.d).map(|(x, d)| x + t * d).collect();
        let (f, g) = (self.objective)(&xt)?;
        self.evals += 1;
        let (f, slope) = if finite(f, &g) { (f, dot(&g, self.d)) } else { (f64::INFINITY, f64::NAN) };
        let p = Point { t, f, g, slope };
        if p.f.is_finite() && self.best.as_ref().is_none_or(|b| p.f < b.f) {
            self.best = Some(Point { t, f: p.f, g: p.g.clone(), slope });
        }
        Ok(p)
    }

    fn armijo(&self, p: &Point) -> bool {
        p.f <= self.f0 + C1 * p.t * self.slope0
    }

    fn curvature(&self, p: &Point) -> bool {
        p.slope.abs() <= -C2 * self.slope0
    }

    /// Strong-Wolfe search by bracketing and zooming.
    fn run(&mut self, t_init: f64) -> Result<Option<Point>> {
        let mut prev = Point { t: 0.0, f: self.f0, g: Vec::new(), slope: self.slope0 };
        let mut t = t_init;
        for i in 0..MAX_LINE_EVALS {
            let p = self.eval(t)?;
            if !self.armijo(&p) || (i > 0 && p.f >= prev.f) {
                return self.zoom(prev, p);
            }
            if self.curvature(&p) {
                return Ok(Some(p));
            }
            if p.slope >= 0.0 {
                return self.zoom(p, prev);
            }
            t *= 2.0;
            prev = p;
        }
        Ok(None)
    }

    fn zoom(&mut self, mut lo: Point, mut hi: Point) -> Result<Option<Point>> {
        while self.evals < MAX_LINE_EVALS {
            let t = interpolate(&lo, &hi);
            if (hi.t - lo.t).abs() <= 1e-14 * lo.t.abs().max(1.0) {
                return Ok(None);
            }
            let p = self.eval(t)?;
            if !self.armijo(&p) || p.f >= lo.f {
                hi = p;
            } else {
                if self.curvature(&p) {
                    return Ok(Some(p));
                }
                if p.slope * (hi.t - lo.t) >= 0.0 {
                    hi = lo;
                }
                lo = p;
            }
        }
        Ok(None)
    }
}

/// Safeguarded cubic interpolation inside the bracket, bisection as fallback.
fn interpolate(lo: &Point, hi: &Point) -> f64 {
    let (a, b) = (lo.t, hi.t);
    let (left, right) = if a < b { (a, b) } else { (b, a) };
    let margin = 0.1 * (right - left);
    let mid = 0.5 * (a + b);
    if !(hi.f.is_finite() && hi.slope.is_finite() && lo.slope.is_finite()) {
        return mid;
    }
    let d1 = lo.slope + hi.slope - 3.0 * (lo.f - hi.f) / (a - b);
    let disc = d1 * d1 - lo.slope * hi.slope;
    if disc < 0.0 {
        return mid;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let t = b - (b - a) * (hi.slope + d2 - d1) / (hi.slope - lo.slope + 2.0 * d2);
    if t.is_finite() && t >= left + margin && t <= right - margin {
        t
    } else {
        mid
    }
}

/// Minimizes `objective`, which returns the value and gradient at a point.
///
/// Returns the best iterate seen. The objective must be finite at `x0`.
pub fn minimize<F>(mut objective: F, x0: &[f64], cfg: &OptimizerConfig) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    cfg.validate()?;
    let mut x = x0.to_vec();
    let (mut f, mut g) = objective(&x)?;
    let mut evaluations = 1;
    if !finite(f, &g) {
        return Err(Error::NonFinite { iteration: 0, last_good: x });
    }
    let mut trace = vec![f];
    let mut best = (x.clone(), f);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(cfg.history_size);
    let mut failures = 0;
    let mut iterations = 0;

    let finish = |best: (Vec<f64>, f64), iterations, evaluations, converged_by, trace| Minimum {
        x: best.0,
        f: best.1,
        iterations,
        evaluations,
        converged_by,
        trace,
    };

    if inf_norm(&g) <= cfg.grad_tol {
        return Ok(finish(best, 0, evaluations, ConvergedBy::GradTol, trace));
    }

    while iterations < cfg.max_iters {
        iterations += 1;
        let mut d = two_loop(&g, &history);
        if dot(&d, &g) >= 0.0 {
            history.clear();
            d = g.iter().map(|v| -v).collect();
        }
        let t_init = if history.is_empty() { (1.0 / inf_norm(&g)).min(1.0) } else { 1.0 };
        let slope0 = dot(&g, &d);
        let mut search = LineSearch {
            objective: &mut objective,
            x: &x,
            d: &d,
            f0: f,
            slope0,
            evals: 0,
            best: None,
        };
        let accepted = search.run(t_init)?;
        evaluations += search.evals;
        let p = match accepted {
            Some(p) => {
                failures = 0;
                p
            }
            None => {
                failures += 1;
                history.clear();
                match search.best.take() {
                    Some(p) if p.f < f || (cfg.allow_increase && failures < 2) => p,
                    Some(_) => {
                        return Ok(finish(best, iterations, evaluations, ConvergedBy::LineSearchFailed, trace));
                    }
                    None => return Err(Error::NonFinite { iteration: iterations, last_good: x }),
                }
            }
        };

        let x_new: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + p.t * di).collect();
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = p.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() && sy > 0.0 {
            if history.len() == cfg.history_size {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        let f_prev = f;
        x = x_new;
        f = p.f;
        g = p.g;
        trace.push(f);
        if f < best.1 {
            best = (x.clone(), f);
        }

        let change = (f - f_prev).abs();
        if inf_norm(&g) <= cfg.grad_tol {
            return Ok(finish(best, iterations, evaluations, ConvergedBy::GradTol, trace));
        }
        if failures == 0 {
            if change <= cfg.abs_tol {
                return Ok(finish(best, iterations, evaluations, ConvergedBy::AbsTol, trace));
            }
            if change / f.abs().max(1.0) <= cfg.rel_tol {
                return Ok(finish(best, iterations, evaluations, ConvergedBy::RelTol, trace));
            }
        }
    }
    Ok(finish(best, iterations, evaluations, ConvergedBy::MaxIters, trace))
}

/// `-H·g` from the stored curvature pairs.
fn two_loop(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut coeffs = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        coeffs.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let scale = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= scale);
    }
    for ((s, y, rho), a) in history.iter().zip(coeffs.into_iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

/// Minimizes `E_α` over the ansatz angles starting from `p0`.
pub fn minimize_energy(
    p0: &QaoaParams,
    alpha: f64,
    diag: &IsingDiagonal,
    cfg: &OptimizerConfig,
) -> Result<OptimizationResult> {
    let layers = p0.layers();
    let m = minimize(
        |x| {
            let p = QaoaParams::from_flat(x)?;
            energy_and_gradient(&p, alpha, diag, GradientMode::Recompute)
        },
        &p0.to_flat(),
        cfg,
    )?;
    let params_star = QaoaParams::from_flat(&m.x)?;
    debug_assert_eq!(params_star.layers(), layers);
    let energy_star = energy(&params_star, alpha, diag)?;
    Ok(OptimizationResult {
        params_star,
        energy_star,
        iterations: m.iterations,
        converged_by: m.converged_by,
        energy_trace: m.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightedGraph;
    use crate::hamiltonian::maxcut_objective;
    use crate::simulator::gradient;
    use std::f64::consts::PI;

    fn quadratic() -> impl FnMut(&[f64]) -> Result<(f64, Vec<f64>)> {
        // A is SPD with condition number ~ 40.
        let a = [
            [4.0, 1.0, 0.0, 0.5],
            [1.0, 3.0, 0.2, 0.0],
            [0.0, 0.2, 10.0, 1.0],
            [0.5, 0.0, 1.0, 0.3],
        ];
        let b = [1.0, -2.0, 0.5, 3.0];
        move |x: &[f64]| {
            let ax: Vec<f64> = (0..4).map(|i| (0..4).map(|j| a[i][j] * x[j]).sum()).collect();
            let f = 0.5 * dot(x, &ax) - dot(&b, x);
            let g = ax.iter().zip(b).map(|(p, q)| p - q).collect();
            Ok((f, g))
        }
    }

    #[test]
    fn convex_quadratic() {
        let xs = solve4();
        let (f_star, _) = quadratic()(&xs).unwrap();
        let tight = OptimizerConfig { abs_tol: 1e-30, rel_tol: 1e-30, grad_tol: 1e-12, ..OptimizerConfig::default() };
        for x0 in [[0.0; 4], [5.0, -3.0, 2.0, 10.0], [-7.0, 1.0, 1.0, -1.0]] {
            let m = minimize(quadratic(), &x0, &OptimizerConfig::default()).unwrap();
            assert!(m.iterations <= 50, "{} iterations", m.iterations);
            assert!(m.f - f_star < 1e-8, "{} vs {f_star}", m.f);

            let m = minimize(quadratic(), &x0, &tight).unwrap();
            assert!(m.iterations <= 50, "{} iterations", m.iterations);
            for (a, b) in m.x.iter().zip(xs) {
                assert!((a - b).abs() < 1e-8, "{a} vs {b}");
            }
        }
    }

    fn solve4() -> [f64; 4] {
        let mut m: [[f64; 5]; 4] = [
            [4.0, 1.0, 0.0, 0.5, 1.0],
            [1.0, 3.0, 0.2, 0.0, -2.0],
            [0.0, 0.2, 10.0, 1.0, 0.5],
            [0.5, 0.0, 1.0, 0.3, 3.0],
        ];
        for c in 0..4 {
            let piv = (c..4).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
            m.swap(c, piv);
            for r in 0..4 {
                if r != c {
                    let k = m[r][c] / m[c][c];
                    let pivot = m[c];
                    for (x, p) in m[r][c..].iter_mut().zip(&pivot[c..]) {
                        *x -= k * p;
                    }
                }
            }
        }
        [0, 1, 2, 3].map(|i| m[i][4] / m[i][i])
    }

    #[test]
    fn trace_and_best_iterate() {
        let m = minimize(quadratic(), &[3.0, 3.0, 3.0, 3.0], &OptimizerConfig::default()).unwrap();
        let min = m.trace.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((min - m.f).abs() < 1e-12);
        assert_eq!(m.trace.len(), m.iterations + 1);
        let again = minimize(quadratic(), &[3.0, 3.0, 3.0, 3.0], &OptimizerConfig::default()).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn stops_immediately_at_mixer_ground_state() {
        let d = maxcut_objective(&WeightedGraph::new(3, [(0, 1, 2), (1, 2, 5)]).unwrap()).unwrap();
        let p0 = QaoaParams::new(vec![0.0, 0.0], vec![0.4, 2.2]).unwrap();
        assert!(gradient(&p0, 0.0, &d).unwrap().iter().all(|g| g.abs() < 1e-12));
        let r = minimize_energy(&p0, 0.0, &d, &OptimizerConfig::default()).unwrap();
        assert_eq!(r.converged_by, ConvergedBy::GradTol);
        assert_eq!(r.iterations, 0);
        assert_eq!(r.params_star, p0);
        assert_eq!(r.energy_trace.len(), 1);
        assert!((r.energy_star + 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_edge_reaches_ground_energy() {
        // Grid-search oracle over [0, 2π)² first: the p = 1 minimum of one edge is -1.
        let d = maxcut_objective(&WeightedGraph::new(2, [(0, 1, 1)]).unwrap()).unwrap();
        let eval = |g: f64, b: f64| energy(&QaoaParams::new(vec![g], vec![b]).unwrap(), 1.0, &d).unwrap();
        let steps = 400;
        let h = 2.0 * PI / steps as f64;
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 0..steps {
            for j in 0..steps {
                let (g, b) = (h * i as f64, h * j as f64);
                let e = eval(g, b);
                if e < best.0 {
                    best = (e, g, b);
                }
            }
        }
        // Refine around the coarse minimum at resolution 1e-3.
        let (_, g0, b0) = best;
        for i in -20..=20 {
            for j in -20..=20 {
                let e = eval(g0 + 1e-3 * i as f64, b0 + 1e-3 * j as f64);
                best.0 = best.0.min(e);
            }
        }
        let grid_min = best.0;
        assert!((grid_min + 1.0).abs() < 1e-5, "{grid_min}");

        let p0 = QaoaParams::new(vec![0.3], vec![0.2]).unwrap();
        let r = minimize_energy(&p0, 1.0, &d, &OptimizerConfig::default()).unwrap();
        assert!((r.energy_star + 1.0).abs() < 1e-6, "{}", r.energy_star);
        assert!(r.energy_star <= grid_min + 1e-9);
    }

    #[test]
    fn non_finite_start_is_an_error() {
        let f = |_: &[f64]| Ok((f64::NAN, vec![0.0]));
        assert!(matches!(
            minimize(f, &[1.0], &OptimizerConfig::default()),
            Err(Error::NonFinite { iteration: 0, .. })
        ));
    }

    #[test]
    fn line_search_backs_off_from_non_finite_region() {
        // f = x²  for x < 1.5, NaN beyond; the first trial step from x = 1 overshoots into NaN.
        let f = |x: &[f64]| {
            if x[0] > 1.5 || x[0] < -1.5 {
                Ok((f64::NAN, vec![f64::NAN]))
            } else {
                Ok((x[0] * x[0], vec![2.0 * x[0]]))
            }
        };
        let m = minimize(f, &[1.2], &OptimizerConfig::default()).unwrap();
        assert!(m.f < 1e-12);
    }

    #[test]
    fn max_iters_is_respected() {
        let cfg = OptimizerConfig { max_iters: 2, ..OptimizerConfig::default() };
        let rosen = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
            Ok((f, g))
        };
        let m = minimize(rosen, &[-1.2, 1.0], &cfg).unwrap();
        assert_eq!(m.converged_by, ConvergedBy::MaxIters);
        assert_eq!(m.iterations, 2);

        let m = minimize(rosen, &[-1.2, 1.0], &OptimizerConfig::default()).unwrap();
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4, "{:?}", m.x);
    }

    #[test]
    fn config_validation() {
        let bad = OptimizerConfig { grad_tol: 0.0, ..OptimizerConfig::default() };
        assert!(bad.validate().is_err());
        let bad = OptimizerConfig { max_iters: 0, ..OptimizerConfig::default() };
        assert!(bad.validate().is_err());
    }
}
