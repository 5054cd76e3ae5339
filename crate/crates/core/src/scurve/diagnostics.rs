//! Post-solve certificates: `R` from moments, the algebraic identity, the
//! per-arc variational constants, the S-property and criticality residuals.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equilibrium::el_field;
use crate::measure::{
    active_threshold, energy_derivative_with, node_forces, DiscreteMeasure, PerturbationField,
};
use crate::Poly;

/// Maximal run of consecutive active nodes on one contour arc.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportArc {
    /// Contour arc the run lies on.
    pub arc: usize,
    /// Node index range `[start, end)` into the measure.
    pub start: usize,
    pub end: usize,
    #[serde(with = "crate::serde_pts::points")]
    pub polyline: Vec<Complex64>,
    /// Sampled density `w_i / seg_i` at the run's nodes.
    pub density: Vec<f64>,
    pub omega: Option<f64>,
    pub omega_std: Option<f64>,
}

/// `R(z) = (V'(z)/2)^2 - int (V'(x) - V'(z))/(x - z) dmu(x)`, built exactly
/// from the moments: the `z^b` coefficient of the integral is
/// `sum_{j > b} c_j m_{j-1-b}` for `V' = sum c_j z^j`.
pub fn r_from_measure(mu: &DiscreteMeasure<f64>, v: &Poly) -> Poly {
    let dv = v.derivative();
    let d = dv.degree().unwrap_or(0);
    let m = mu.moments(d.max(1));
    let integral: Vec<Complex64> = (0..d)
        .map(|b| ((b + 1)..=d).map(|j| dv.coeff(j) * m[j - 1 - b]).sum())
        .collect();
    let half = dv.scale(Complex64::new(0.5, 0.0));
    half.clone() * half - Poly::new(integral)
}

/// `T = R - (V'/2)^2`.
pub fn t_polynomial(r: &Poly, v: &Poly) -> Poly {
    let half = v.derivative().scale(Complex64::new(0.5, 0.0));
    r.clone() - half.clone() * half
}

/// Median segment length of the measure's nodes.
pub fn node_spacing(mu: &DiscreteMeasure<f64>) -> f64 {
    let mut s = mu.seg.clone();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    s[s.len() / 2]
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraicReport {
    pub residual: f64,
    pub used: usize,
    pub rejected: usize,
}

/// `max |(C^mu(z) + V'(z)/2)^2 - R(z)| / (1 + |R(z)|)` over probes at least
/// five node spacings away from the support; closer probes are rejected.
pub fn algebraic_residual(mu: &DiscreteMeasure<f64>, v: &Poly, r: &Poly, probes: &[Complex64]) -> AlgebraicReport {
    let dv = v.derivative();
    let min_dist = 5.0 * node_spacing(mu);
    let support: Vec<Complex64> = mu.active().into_iter().map(|i| mu.points[i]).collect();
    let mut out = AlgebraicReport {
        residual: 0.0,
        used: 0,
        rejected: 0,
    };
    for &z in probes {
        let d = support.iter().map(|x| (x - z).norm()).fold(f64::INFINITY, f64::min);
        if d < min_dist {
            out.rejected += 1;
            continue;
        }
        let c: Complex64 = mu
            .points
            .iter()
            .zip(&mu.weights)
            .map(|(&x, &w)| w / (x - z))
            .sum();
        let lhs = (c + 0.5 * dv.eval(z)).powu(2);
        let rz = r.eval(z);
        out.residual = out.residual.max((lhs - rz).norm() / (1.0 + rz.norm()));
        out.used += 1;
    }
    out
}

/// `k` equally spaced points on the circle `|z - center| = radius`.
pub fn probe_circle(center: Complex64, radius: f64, k: usize) -> Vec<Complex64> {
    (0..k)
        .map(|j| center + Complex64::from_polar(radius, std::f64::consts::TAU * j as f64 / k as f64))
        .collect()
}

/// Runs of consecutive active nodes, split where the contour arc changes.
pub fn support_arcs(mu: &DiscreteMeasure<f64>, arc_of: &[usize]) -> Vec<SupportArc> {
    let thr = active_threshold::<f64>(mu.len());
    let mut out = Vec::new();
    let mut i = 0;
    while i < mu.len() {
        if mu.weights[i] <= thr {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < mu.len() && mu.weights[i + 1] > thr && arc_of[i + 1] == arc_of[start] {
            i += 1;
        }
        let end = i + 1;
        out.push(SupportArc {
            arc: arc_of[start],
            start,
            end,
            polyline: mu.points[start..end].to_vec(),
            density: (start..end).map(|k| mu.weights[k] / mu.seg[k]).collect(),
            omega: None,
            omega_std: None,
        });
        i = end;
    }
    out
}

/// Mean and standard deviation of `U + phi/2` over the interior nodes of
/// each arc; `None` (with a warning) for arcs with fewer than three.
pub fn omega_constants(mu: &DiscreteMeasure<f64>, v: &Poly, arcs: &[SupportArc]) -> Vec<Option<(f64, f64)>> {
    arcs.iter()
        .enumerate()
        .map(|(j, a)| {
            if a.end - a.start < 5 {
                eprintln!("warning: support arc {j} has fewer than 3 interior nodes; skipped");
                return None;
            }
            let vals: Vec<f64> = (a.start + 1..a.end - 1)
                .map(|i| el_field(mu, v, mu.points[i]))
                .collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let var = vals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / vals.len() as f64;
            Some((mean, var.sqrt()))
        })
        .collect()
}

/// Fills the `omega` fields in place.
pub fn attach_omegas(mu: &DiscreteMeasure<f64>, v: &Poly, arcs: &mut [SupportArc]) {
    let om = omega_constants(mu, v, arcs);
    for (arc, o) in arcs.iter_mut().zip(om) {
        arc.omega = o.map(|x| x.0);
        arc.omega_std = o.map(|x| x.1);
    }
}

/// `max |d_{n+} f - d_{n-} f|` over interior support nodes, where
/// `f = U + phi/2` of the piecewise-uniform charge and each outward normal
/// derivative uses the one-sided second-order stencil
/// `(4 f(z +- s n) - f(z +- 2 s n) - 3 f(z)) / (2 s)`. The `f(z)` terms cancel
/// in the difference.
///
/// Skipped: nodes within `2 s` of an arc end (the stencil would straddle the
/// square-root branch point there) and nodes whose neighbors turn by more
/// than 30 degrees.
pub fn s_residual(mu: &DiscreteMeasure<f64>, v: &Poly, arcs: &[SupportArc], step: f64) -> f64 {
    let max_turn = 30f64.to_radians();
    let f = |z: Complex64| el_field(mu, v, z);
    let mut worst = 0.0f64;
    for a in arcs {
        if a.end - a.start < 3 {
            continue;
        }
        let mut s = vec![0.0];
        for k in a.start + 1..a.end {
            s.push(s.last().unwrap() + 0.5 * (mu.seg[k - 1] + mu.seg[k]));
        }
        let total = s.last().unwrap() + 0.5 * (mu.seg[a.start] + mu.seg[a.end - 1]);
        let from_start = |k: usize| s[k - a.start] + 0.5 * mu.seg[a.start];
        for i in a.start + 1..a.end - 1 {
            let d = from_start(i);
            if d.min(total - d) < 2.0 * step {
                continue;
            }
            let turn = (mu.tangents[i + 1] / mu.tangents[i - 1]).arg().abs();
            if turn > max_turn {
                continue;
            }
            let z = mu.points[i];
            let n = mu.tangents[i] * Complex64::i();
            let plus = 4.0 * f(z + n * step) - f(z + n * (2.0 * step));
            let minus = 4.0 * f(z - n * step) - f(z - n * (2.0 * step));
            worst = worst.max((plus - minus).abs() / (2.0 * step));
        }
    }
    worst
}

/// `max |V'|` over the active nodes: the scale the S-residual is judged on.
pub fn field_scale(mu: &DiscreteMeasure<f64>, v: &Poly) -> f64 {
    let dv = v.derivative();
    mu.active()
        .into_iter()
        .map(|i| dv.eval(mu.points[i]).norm())
        .fold(0.0, f64::max)
}

/// Normal and tangential bumps of the given bandwidth centered at every
/// `stride`-th active node.
pub fn perturbation_basis(mu: &DiscreteMeasure<f64>, bandwidth: f64, stride: usize, tangential: bool) -> Vec<PerturbationField<f64>> {
    let active = mu.active();
    let mut out = Vec::new();
    for &i in active.iter().step_by(stride.max(1)) {
        let tau = mu.tangents[i];
        out.push(PerturbationField::single(mu.points[i], tau * Complex64::i(), bandwidth));
        if tangential {
            out.push(PerturbationField::single(mu.points[i], tau, bandwidth));
        }
    }
    out
}

/// `max_h |D_h I| / ||h||_inf` over the basis.
pub fn criticality_residual(mu: &DiscreteMeasure<f64>, v: &Poly, basis: &[PerturbationField<f64>]) -> f64 {
    let f = node_forces(mu, v);
    basis
        .iter()
        .map(|h| energy_derivative_with(mu, &f, h).abs() / h.sup_norm().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}
