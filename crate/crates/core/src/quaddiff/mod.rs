//! Trajectories of the quadratic differential `-R(z) dz^2`.
//!
//! With `xi(z) = int^z sqrt(R(s)) ds`, horizontal trajectories are the level
//! curves of `Re xi` and vertical ones those of `Im xi`. The tracer carries a
//! continuous branch of `sqrt(R)` along the path and re-projects every
//! accepted step onto the starting level.

mod tracer;

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::hausdorff_finite;
use crate::poly::{normalize_angle, roots};
use crate::Poly;
use tracer::{deflate_zero, follow, regular_segment, zero_segment, Tracer};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// `-R dz^2 > 0`, i.e. `Re xi` constant.
    Horizontal,
    /// `R dz^2 > 0`, i.e. `Im xi` constant.
    Vertical,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Anchor {
    Zero {
        index: usize,
        #[serde(with = "crate::serde_pts::point")]
        z: Complex64,
        order: usize,
    },
    Infinity {
        index: usize,
        angle: f64,
    },
    /// Regular starting point.
    Point(#[serde(with = "crate::serde_pts::point")] Complex64),
    Truncated,
}

/// A (possibly merged) zero of `R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Zero {
    #[serde(with = "crate::serde_pts::point")]
    pub z: Complex64,
    pub order: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    #[serde(with = "crate::serde_pts::points")]
    pub nodes: Vec<Complex64>,
    pub start: Anchor,
    pub end: Anchor,
    pub kind: Kind,
    pub arclength: f64,
    /// Largest deviation of the conserved part of `xi` seen by the tracer.
    pub level_drift: f64,
    pub diagnostic: Option<String>,
}

impl Trajectory {
    fn zero_index(a: &Anchor) -> Option<usize> {
        match a {
            Anchor::Zero { index, .. } => Some(*index),
            _ => None,
        }
    }

    /// Zero-to-zero between two distinct zeros: a support candidate.
    pub fn is_bounded(&self) -> bool {
        matches!(
            (Self::zero_index(&self.start), Self::zero_index(&self.end)),
            (Some(a), Some(b)) if a != b
        )
    }

    pub fn is_truncated(&self) -> bool {
        self.end == Anchor::Truncated
    }

    pub fn reversed(&self) -> Trajectory {
        let mut t = self.clone();
        t.nodes.reverse();
        std::mem::swap(&mut t.start, &mut t.end);
        t
    }

    /// Conserved-level drift recomputed from the nodes alone, with an
    /// independent quadrature (each segment split in two).
    pub fn recompute_drift(&self, r: &Poly) -> f64 {
        let level = |x: Complex64| match self.kind {
            Kind::Horizontal => x.re,
            Kind::Vertical => x.im,
        };
        let n = self.nodes.len();
        if n < 2 {
            return 0.0;
        }
        let (mut xi, mut q, first) = match self.start {
            Anchor::Zero { z, order, .. } => {
                let g = deflate_zero(r, z, order);
                let w = self.nodes[1];
                let qw = r.eval(w).sqrt();
                (zero_segment(&g, z, order, w, qw), qw, 1)
            }
            _ => (Complex64::new(0.0, 0.0), r.eval(self.nodes[0]).sqrt(), 0),
        };
        let last = match self.end {
            Anchor::Zero { .. } => n - 2,
            _ => n - 1,
        };
        let mut worst = level(xi).abs();
        for k in first..last {
            let (a, b) = (self.nodes[k], self.nodes[k + 1]);
            let m = (a + b) * 0.5;
            let (d1, qm) = regular_segment(r, a, q, m);
            let (d2, qb) = regular_segment(r, m, qm, b);
            xi += d1 + d2;
            q = qb;
            worst = worst.max(level(xi).abs());
        }
        if let Anchor::Zero { z, order, .. } = self.end {
            let g = deflate_zero(r, z, order);
            xi -= zero_segment(&g, z, order, self.nodes[last], q);
            worst = worst.max(level(xi).abs());
        }
        worst
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TraceOptions {
    pub kind: Kind,
    /// Initial (and nominal) arclength step.
    pub h0: f64,
    pub h_min: f64,
    pub h_max: f64,
    /// Local error tolerance of the embedded pair.
    pub rk_tol: f64,
    /// Target accuracy of the level re-projection.
    pub level_tol: f64,
    /// Escape radius about the centroid of the zeros; derived when absent.
    pub r_max: Option<f64>,
    pub max_arclength: f64,
    pub max_steps: usize,
    /// Capture radius at zeros in multiples of `h0`; steps are kept below a
    /// quarter of the distance to the nearest zero, so this is also the
    /// local step there.
    pub capture: f64,
    /// A zero within the capture radius ends the trajectory only if its
    /// level matches to this tolerance.
    pub capture_level_tol: f64,
    /// Zeros closer than this are merged into one zero of summed order.
    pub cluster_radius: f64,
    /// Hausdorff tolerance for deduplicating zero-to-zero trajectories.
    pub merge_tol: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            kind: Kind::Horizontal,
            h0: 1e-2,
            h_min: 1e-10,
            h_max: 5e-2,
            rk_tol: 1e-10,
            level_tol: 1e-10,
            r_max: None,
            max_arclength: 100.0,
            max_steps: 200_000,
            capture: 10.0,
            capture_level_tol: 1e-3,
            cluster_radius: 5e-2,
            merge_tol: 5e-2,
        }
    }
}

/// Zeros of `R` with multiplicities, clusters within `radius` merged at
/// their centroid.
pub fn cluster_zeros(r: &Poly, radius: f64) -> Result<Vec<Zero>> {
    if r.degree().unwrap_or(0) == 0 {
        return Ok(vec![]);
    }
    let raw = roots(r, 1e-12)?;
    let mut groups: Vec<Vec<(Complex64, usize)>> = Vec::new();
    for root in raw {
        let hits: Vec<usize> = groups
            .iter()
            .enumerate()
            .filter(|(_, g)| g.iter().any(|(z, _)| (z - root.z).norm() < radius))
            .map(|(i, _)| i)
            .collect();
        let mut merged = vec![(root.z, root.multiplicity)];
        for &i in hits.iter().rev() {
            merged.extend(groups.remove(i));
        }
        groups.push(merged);
    }
    let mut zeros: Vec<Zero> = groups
        .into_iter()
        .map(|g| {
            let order: usize = g.iter().map(|p| p.1).sum();
            let z = g.iter().map(|(z, m)| z * *m as f64).sum::<Complex64>() / order as f64;
            Zero { z, order }
        })
        .collect();
    zeros.sort_by(|a, b| (a.z.re, a.z.im).partial_cmp(&(b.z.re, b.z.im)).unwrap());
    Ok(zeros)
}

/// `R^(p)(z0) / p!`.
fn taylor_coeff(r: &Poly, z0: Complex64, p: usize) -> Complex64 {
    let mut d = r.clone();
    let mut fact = 1.0;
    for k in 1..=p {
        d = d.derivative();
        fact *= k as f64;
    }
    d.eval(z0) / fact
}

/// Directions leaving a zero of order `p` along trajectories of `kind`.
fn local_directions(r: &Poly, z0: Complex64, p: usize, kind: Kind) -> Vec<f64> {
    let c = taylor_coeff(r, z0, p);
    let c = match kind {
        Kind::Horizontal => -c,
        Kind::Vertical => c,
    };
    let m = (p + 2) as f64;
    (0..p + 2)
        .map(|k| normalize_angle((-c.arg() + TAU * k as f64) / m))
        .collect()
}

/// The `p + 2` directions in which horizontal trajectories leave the zero
/// `z0` of order `p`: solutions of `arg(-R^(p)(z0)/p!) + (p+2) a = 0 mod 2 pi`.
pub fn critical_directions(r: &Poly, z0: Complex64, p: usize) -> Result<Vec<f64>> {
    if p == 0 {
        return Err(Error::Validation(
            "order 0 is a regular point; use trace directly".into(),
        ));
    }
    if r.degree().is_none_or(|d| d < p) {
        return Err(Error::Validation(format!("R has no zero of order {p}")));
    }
    let scale = 1.0 + r.magnitude_at(Complex64::new(1.0 + z0.norm(), 0.0));
    for k in 0..p {
        let t = taylor_coeff(r, z0, k);
        if t.norm() > 1e-6 * scale {
            return Err(Error::Validation(format!(
                "{z0} is not a zero of order {p}: |R^({k})/{k}!| = {:.3e}",
                t.norm()
            )));
        }
    }
    if taylor_coeff(r, z0, p).norm() <= 1e-12 * scale {
        return Err(Error::Validation(format!("{z0} is a zero of order above {p}")));
    }
    Ok(local_directions(r, z0, p, Kind::Horizontal))
}

/// The `2N` asymptotic directions of horizontal trajectories at infinity for
/// `deg R = 2N - 2`: `arg sqrt(r_lead) + N a = pi/2 mod pi`.
pub fn infinity_directions(r: &Poly) -> Result<Vec<f64>> {
    let d = r
        .degree()
        .ok_or_else(|| Error::Validation("R is identically zero".into()))?;
    if d % 2 == 1 {
        return Err(Error::Validation(format!("deg R = {d} is odd")));
    }
    let n = d / 2 + 1;
    let half = 0.5 * r.leading().unwrap().arg();
    Ok((0..2 * n)
        .map(|k| normalize_angle((0.5 * PI - half + PI * k as f64) / n as f64))
        .collect())
}

fn centroid(zeros: &[Zero]) -> Complex64 {
    let total: usize = zeros.iter().map(|z| z.order).sum();
    if total == 0 {
        return Complex64::new(0.0, 0.0);
    }
    zeros.iter().map(|z| z.z * z.order as f64).sum::<Complex64>() / total as f64
}

fn tracer<'a>(r: &'a Poly, zeros: &'a [Zero], opts: &'a TraceOptions) -> Result<Tracer<'a>> {
    let center = centroid(zeros);
    let spread = zeros.iter().map(|z| (z.z - center).norm()).fold(0.0, f64::max);
    let infinity = if r.degree().unwrap_or(0).is_multiple_of(2) {
        infinity_directions(r)?
    } else {
        vec![]
    };
    Ok(Tracer {
        r,
        zeros,
        deflated: zeros.iter().map(|z| deflate_zero(r, z.z, z.order)).collect(),
        infinity,
        center,
        r_max: opts.r_max.unwrap_or(2.0 * spread + 2.0),
        opts,
    })
}

/// Traces one trajectory of `opts.kind` from `z0`. At a zero the direction
/// is snapped to the nearest admissible one; at a regular point it picks
/// the orientation of the line field closest to `direction`.
pub fn trace(r: &Poly, z0: Complex64, direction: f64, opts: &TraceOptions) -> Result<Trajectory> {
    if r.is_zero() {
        return Err(Error::Validation("R is identically zero".into()));
    }
    let zeros = cluster_zeros(r, opts.cluster_radius)?;
    Ok(tracer(r, &zeros, opts)?.run(z0, direction))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalGraph {
    pub zeros: Vec<Zero>,
    /// Asymptotic directions at infinity.
    pub infinity: Vec<f64>,
    pub trajectories: Vec<Trajectory>,
}

impl CriticalGraph {
    pub fn bounded(&self) -> impl Iterator<Item = &Trajectory> {
        self.trajectories.iter().filter(|t| t.is_bounded())
    }

    pub fn truncated(&self) -> impl Iterator<Item = &Trajectory> {
        self.trajectories.iter().filter(|t| t.is_truncated())
    }
}

/// All critical trajectories: every admissible direction from every zero,
/// traced in parallel; zero-to-zero trajectories found from both ends are
/// kept once.
pub fn critical_graph(r: &Poly, opts: &TraceOptions) -> Result<CriticalGraph> {
    if r.is_zero() {
        return Err(Error::Validation("R is identically zero".into()));
    }
    let zeros = cluster_zeros(r, opts.cluster_radius)?;
    let t = tracer(r, &zeros, opts)?;
    let jobs: Vec<(usize, f64)> = zeros
        .iter()
        .enumerate()
        .flat_map(|(j, z)| {
            local_directions(r, z.z, z.order, opts.kind)
                .into_iter()
                .map(move |a| (j, a))
        })
        .collect();
    let traced: Vec<Trajectory> = jobs
        .par_iter()
        .map(|&(j, a)| t.run(zeros[j].z, a))
        .collect();
    let mut kept: Vec<Trajectory> = Vec::new();
    for tr in traced {
        let dup = tr.is_bounded()
            && kept.iter().any(|k| {
                k.is_bounded()
                    && same_ends(k, &tr)
                    && hausdorff_finite(&k.nodes, &tr.nodes).is_ok_and(|d| d < opts.merge_tol)
            });
        if !dup {
            kept.push(tr);
        }
    }
    Ok(CriticalGraph {
        infinity: t.infinity.clone(),
        zeros,
        trajectories: kept,
    })
}

fn same_ends(a: &Trajectory, b: &Trajectory) -> bool {
    let ends = |t: &Trajectory| {
        let (x, y) = (
            Trajectory::zero_index(&t.start),
            Trajectory::zero_index(&t.end),
        );
        (x.min(y), x.max(y))
    };
    ends(a) == ends(b)
}

/// `(1/(pi i)) int_arc sqrt(R) ds` along a zero-to-zero trajectory.
///
/// The branch is fixed at the middle node so that the density is positive
/// for the arc's canonical orientation (from the lexicographically smaller
/// end zero to the larger one) and continued along the arc from there.
/// Hence the canonically oriented arc yields `+mass` and the reversed one
/// `-mass`.
pub fn support_mass(r: &Poly, arc: &Trajectory) -> Result<Complex64> {
    let (a, b) = match (arc.start, arc.end) {
        (Anchor::Zero { z: a, .. }, Anchor::Zero { z: b, .. }) if arc.is_bounded() => (a, b),
        _ => {
            return Err(Error::Validation(
                "support mass needs a zero-to-zero trajectory".into(),
            ))
        }
    };
    let nodes = densified(&arc.nodes);
    let m = nodes.len() / 2;
    let tangent = nodes[m + 1] - nodes[m - 1];
    let canonical = if (a.re, a.im) <= (b.re, b.im) { 1.0 } else { -1.0 };
    let q = r.eval(nodes[m]).sqrt();
    let density = q * tangent * canonical / Complex64::new(0.0, PI);
    let q_mid = if density.re >= 0.0 { q } else { -q };
    support_mass_with_branch(r, arc, q_mid)
}

/// Inserts midpoints into arcs too short to have a distinct middle node.
fn densified(nodes: &[Complex64]) -> Vec<Complex64> {
    let mut out = nodes.to_vec();
    while out.len() < 5 {
        out = out
            .windows(2)
            .flat_map(|w| [w[0], (w[0] + w[1]) * 0.5])
            .chain(std::iter::once(*out.last().unwrap()))
            .collect();
    }
    out
}

/// As [`support_mass`] but with the branch at the middle node taken as the
/// square root of `R` closest to `q_mid`.
pub fn support_mass_with_branch(r: &Poly, arc: &Trajectory, q_mid: Complex64) -> Result<Complex64> {
    let (za, pa, zb, pb) = match (arc.start, arc.end) {
        (Anchor::Zero { z: za, order: pa, .. }, Anchor::Zero { z: zb, order: pb, .. }) => (za, pa, zb, pb),
        _ => {
            return Err(Error::Validation(
                "support mass needs a zero-to-zero trajectory".into(),
            ))
        }
    };
    let nodes = densified(&arc.nodes);
    let n = nodes.len();
    let m = n / 2;
    let q_m = follow(r.eval(nodes[m]), q_mid);
    let check = |q: Complex64, z: Complex64| {
        if q.is_finite() {
            Ok(())
        } else {
            Err(Error::BranchTracking(z))
        }
    };

    // middle -> end
    let mut fwd = Complex64::new(0.0, 0.0);
    let mut q = q_m;
    for k in m..n - 2 {
        let (d, qn) = regular_segment(r, nodes[k], q, nodes[k + 1]);
        fwd += d;
        q = qn;
        check(q, nodes[k + 1])?;
    }
    let gb = deflate_zero(r, zb, pb);
    fwd -= zero_segment(&gb, zb, pb, nodes[n - 2], q);

    // middle -> start
    let mut back = Complex64::new(0.0, 0.0);
    let mut q = q_m;
    for k in (2..=m).rev() {
        let (d, qn) = regular_segment(r, nodes[k], q, nodes[k - 1]);
        back += d;
        q = qn;
        check(q, nodes[k - 1])?;
    }
    let ga = deflate_zero(r, za, pa);
    back -= zero_segment(&ga, za, pa, nodes[1], q);

    Ok((fwd - back) / Complex64::new(0.0, PI))
}
