//! Inner problem: the weighted equilibrium measure of a fixed discretized
//! contour, as a convex quadratic program over the probability simplex.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Contour, NodeLayout};
use crate::measure::{active_threshold, self_term, smeared_potential, DiscreteMeasure};
use crate::Poly;

#[derive(Clone, Debug)]
pub struct EquilibriumOptions {
    /// Target for both Euler–Lagrange residuals on the nodes.
    pub tol: f64,
    pub max_iter: usize,
    /// One refinement pass splitting the heaviest segments.
    pub remesh: bool,
}

impl Default for EquilibriumOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 2000,
            remesh: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EquilibriumResult {
    pub mu: DiscreteMeasure<f64>,
    pub l: f64,
    /// `max |U + phi/2 - l|` over active nodes.
    pub el_residual_supp: f64,
    /// `max (l - U - phi/2)_+` over inactive nodes.
    pub el_residual_off: f64,
    pub iterations: usize,
    pub energy: f64,
    /// Objective value after every iteration (non-increasing).
    pub history: Vec<f64>,
}

/// Residuals of the Euler–Lagrange conditions recomputed on probe points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElReport {
    pub l: f64,
    pub supp: f64,
    pub off: f64,
}

struct Qp {
    k: DMatrix<f64>,
    phi: DVector<f64>,
}

impl Qp {
    fn new(layout: &NodeLayout, v: &Poly) -> Self {
        let n = layout.len();
        let pts = &layout.points;
        let cols: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                (0..n)
                    .map(|i| {
                        if i == j {
                            self_term(layout.seg[i])
                        } else {
                            -(pts[i] - pts[j]).norm().ln()
                        }
                    })
                    .collect()
            })
            .collect();
        let k = DMatrix::from_fn(n, n, |i, j| cols[j][i]);
        let phi = DVector::from_iterator(n, pts.iter().map(|&z| v.re_at(z)));
        Self { k, phi }
    }

    fn objective(&self, w: &DVector<f64>) -> f64 {
        w.dot(&(&self.k * w)) + self.phi.dot(w)
    }

    fn gradient(&self, w: &DVector<f64>) -> DVector<f64> {
        2.0 * (&self.k * w) + &self.phi
    }
}

/// Euclidean projection onto `{w >= 0, sum w = 1}`.
pub fn project_simplex(y: &[f64]) -> Vec<f64> {
    let mut u = y.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    y.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Discretizes `contour` into `n` nodes and minimizes the discrete energy.
pub fn solve_equilibrium(contour: &Contour, v: &Poly, n: usize, tol: f64) -> Result<EquilibriumResult> {
    if n < 50 {
        return Err(Error::Validation(format!("need at least 50 nodes, got {n}")));
    }
    let opts = EquilibriumOptions {
        tol,
        ..Default::default()
    };
    let layout = contour.resample(n).layout();
    let res = solve_on_layout(&layout, v, &opts, None)?;
    if !opts.remesh {
        return Ok(res);
    }
    remesh_and_resolve(&layout, v, &opts, &res)
}

/// Splits segments whose weight exceeds the 90th percentile and re-solves.
pub fn remesh_and_resolve(
    layout: &NodeLayout,
    v: &Poly,
    opts: &EquilibriumOptions,
    res: &EquilibriumResult,
) -> Result<EquilibriumResult> {
    let mut sorted = res.mu.weights.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cut = sorted[(sorted.len() * 9) / 10];
    let mut fine = NodeLayout {
        points: vec![],
        seg: vec![],
        tangents: vec![],
        arc_of: vec![],
    };
    let mut warm = vec![];
    for i in 0..layout.len() {
        let w = res.mu.weights[i];
        if w > cut {
            let (x, t, l) = (layout.points[i], layout.tangents[i], layout.seg[i]);
            for s in [-0.25, 0.25] {
                fine.points.push(x + t * (s * l));
                fine.seg.push(0.5 * l);
                fine.tangents.push(t);
                fine.arc_of.push(layout.arc_of[i]);
                warm.push(0.5 * w);
            }
        } else {
            fine.points.push(layout.points[i]);
            fine.seg.push(layout.seg[i]);
            fine.tangents.push(layout.tangents[i]);
            fine.arc_of.push(layout.arc_of[i]);
            warm.push(w);
        }
    }
    solve_on_layout(&fine, v, opts, Some(&warm))
}

/// Minimizes `w^T K w + phi^T w` on the simplex for the nodes of `layout`:
/// Barzilai–Borwein projected gradient to find the support, then an
/// active-set pass solving the KKT system on it exactly.
pub fn solve_on_layout(
    layout: &NodeLayout,
    v: &Poly,
    opts: &EquilibriumOptions,
    warm: Option<&[f64]>,
) -> Result<EquilibriumResult> {
    let n = layout.len();
    let qp = Qp::new(layout, v);
    let thr = active_threshold::<f64>(n);
    let mut w = match warm {
        Some(w0) if w0.len() == n => DVector::from_vec(project_simplex(w0)),
        _ => {
            let total: f64 = layout.seg.iter().sum();
            DVector::from_iterator(n, layout.seg.iter().map(|l| l / total))
        }
    };
    let mut f = qp.objective(&w);
    let mut history = vec![f];
    if !f.is_finite() {
        return Err(Error::UnboundedEnergy);
    }

    // projected gradient with Barzilai–Borwein steps
    let pg_iters = if warm.is_some() { 40 } else { 400 }.min(opts.max_iter);
    let mut g = qp.gradient(&w);
    let mut alpha = 1.0 / (2.0 * qp.k.diagonal().amax().max(1.0));
    let mut iterations = 0;
    for _ in 0..pg_iters {
        iterations += 1;
        let mut step = alpha;
        let (w_new, f_new) = loop {
            let trial = DVector::from_vec(project_simplex((&w - step * &g).as_slice()));
            let ft = qp.objective(&trial);
            if ft <= f || step < 1e-16 {
                break (trial, ft);
            }
            step *= 0.5;
        };
        let s = &w_new - &w;
        if f_new > f || s.amax() < 1e-15 {
            break;
        }
        let g_new = qp.gradient(&w_new);
        let y = &g_new - &g;
        let sy = s.dot(&y);
        alpha = if sy > 0.0 { s.dot(&s) / sy } else { alpha * 2.0 };
        w = w_new;
        g = g_new;
        f = f_new;
        history.push(f);
    }
    if !f.is_finite() || f < -1e12 {
        return Err(Error::UnboundedEnergy);
    }

    // active-set refinement
    let mut active: Vec<bool> = w.iter().map(|&x| x > thr).collect();
    if !active.iter().any(|&a| a) {
        active[w.imax()] = true;
    }
    let mut converged = false;
    for _ in 0..opts.max_iter.saturating_sub(iterations).max(1) {
        iterations += 1;
        let idx: Vec<usize> = (0..n).filter(|&i| active[i]).collect();
        let m = idx.len();
        let mut a = DMatrix::zeros(m + 1, m + 1);
        let mut b = DVector::zeros(m + 1);
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                a[(r, c)] = 2.0 * qp.k[(i, j)];
            }
            a[(r, m)] = -1.0;
            a[(m, r)] = 1.0;
            b[r] = -qp.phi[i];
        }
        b[m] = 1.0;
        let sol = match a.lu().solve(&b) {
            Some(s) if s.iter().all(|x| x.is_finite()) => s,
            _ => return Err(Error::UnboundedEnergy),
        };
        let mut target = DVector::zeros(n);
        for (r, &i) in idx.iter().enumerate() {
            target[i] = sol[r];
        }
        let blocking = idx
            .iter()
            .filter(|&&i| target[i] < 0.0)
            .map(|&i| (w[i] / (w[i] - target[i]), i))
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if let Some((t, i)) = blocking {
            w = &w + t * (&target - &w);
            w[i] = 0.0;
            for &j in &idx {
                if w[j] <= 0.0 {
                    w[j] = 0.0;
                    active[j] = false;
                }
            }
            active[i] = false;
            let s = w.sum();
            w /= s;
            f = qp.objective(&w);
            history.push(f);
            continue;
        }
        w = target;
        let lambda = sol[m];
        f = qp.objective(&w);
        history.push(f);
        let g = qp.gradient(&w);
        // most violating inactive node enters the support
        let worst = (0..n)
            .filter(|&j| !active[j])
            .map(|j| (lambda - g[j], j))
            .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        match worst {
            Some((viol, j)) if 0.5 * viol > opts.tol => active[j] = true,
            _ => {
                converged = true;
                break;
            }
        }
    }

    let mu = DiscreteMeasure::on_layout(layout, w.iter().map(|&x| x.max(0.0)).collect::<Vec<_>>())
        .or_else(|_| {
            let s: f64 = w.iter().map(|x| x.max(0.0)).sum();
            DiscreteMeasure::on_layout(layout, w.iter().map(|&x| x.max(0.0) / s).collect())
        })?;
    let g = qp.gradient(&DVector::from_vec(mu.weights.clone()));
    let field: Vec<f64> = g.iter().map(|x| 0.5 * x).collect();
    let l: f64 = mu.weights.iter().zip(&field).map(|(w, u)| w * u).sum();
    let (mut supp, mut off) = (0.0f64, 0.0f64);
    for (&w, &f) in mu.weights.iter().zip(&field) {
        if w > thr {
            supp = supp.max((f - l).abs());
        } else {
            off = off.max(l - f);
        }
    }
    if !converged || supp > opts.tol.max(1e-8) || off > opts.tol {
        return Err(Error::Convergence {
            iterations,
            residual: supp.max(off),
        });
    }
    let energy = qp.objective(&DVector::from_vec(mu.weights.clone()));
    Ok(EquilibriumResult {
        mu,
        l,
        el_residual_supp: supp,
        el_residual_off: off,
        iterations,
        energy,
        history,
    })
}

/// `U + phi/2` of the piecewise-uniform charge, at `z`.
pub fn el_field(mu: &DiscreteMeasure<f64>, v: &Poly, z: Complex64) -> f64 {
    smeared_potential(mu, z) + 0.5 * v.re_at(z)
}

/// Recomputes both Euler–Lagrange residuals at the segment midpoints of the
/// contour resampled with `2n` segments. A probe counts as on the support
/// when its nearest measure node is active.
pub fn check_euler_lagrange(res: &EquilibriumResult, contour: &Contour, v: &Poly) -> ElReport {
    el_report(&res.mu, res.l, contour, v)
}

/// [`check_euler_lagrange`] from raw data.
pub fn el_report(mu: &DiscreteMeasure<f64>, l: f64, contour: &Contour, v: &Poly) -> ElReport {
    let n = mu.len();
    let thr = active_threshold::<f64>(n);
    let probes = contour.resample(2 * n).layout();
    let vals: Vec<(bool, f64)> = probes
        .points
        .par_iter()
        .map(|&z| {
            let nearest = (0..n)
                .min_by(|&a, &b| {
                    (mu.points[a] - z)
                        .norm()
                        .partial_cmp(&(mu.points[b] - z).norm())
                        .unwrap()
                })
                .unwrap();
            (mu.weights[nearest] > thr, el_field(mu, v, z))
        })
        .collect();
    let on: Vec<f64> = vals.iter().filter(|p| p.0).map(|p| p.1).collect();
    let supp = on.iter().map(|u| (u - l).abs()).fold(0.0, f64::max);
    let off = vals
        .iter()
        .filter(|p| !p.0)
        .map(|p| (l - p.1).max(0.0))
        .fold(0.0, f64::max);
    ElReport { l, supp, off }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_projection() {
        let p = project_simplex(&[0.5, 0.5]);
        assert_eq!(p, vec![0.5, 0.5]);
        let p = project_simplex(&[2.0, 0.0, -1.0]);
        assert_eq!(p, vec![1.0, 0.0, 0.0]);
        let p = project_simplex(&[0.3, 0.3, 0.3]);
        assert!(p.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
    }
}
