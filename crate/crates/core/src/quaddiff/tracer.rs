//! Level-set-constrained integration of the trajectory line field.

use num_complex::Complex64;

use super::{Anchor, Kind, TraceOptions, Trajectory, Zero};
use crate::poly::angle_distance;
use crate::Poly;

/// 8-point Gauss–Legendre on `[0, 1]`.
#[allow(clippy::excessive_precision)]
const GL_X: [f64; 8] = [
    0.019855071751231856,
    0.10166676129318664,
    0.2372337950418355,
    0.4082826787521751,
    0.5917173212478249,
    0.7627662049581645,
    0.8983332387068134,
    0.9801449282487681,
];
#[allow(clippy::excessive_precision)]
const GL_W: [f64; 8] = [
    0.05061426814518813,
    0.11119051722668724,
    0.15685332293894363,
    0.18134189168918100,
    0.18134189168918100,
    0.15685332293894363,
    0.11119051722668724,
    0.05061426814518813,
];

/// Root of `w` closest to `prev` (continuous branch tracking).
pub(super) fn follow(w: Complex64, prev: Complex64) -> Complex64 {
    let s = w.sqrt();
    if (s - prev).norm_sqr() <= (s + prev).norm_sqr() {
        s
    } else {
        -s
    }
}

/// `int_a^b sqrt(R)` along the segment, starting from the branch value
/// `qa` at `a`. Returns the integral and the branch value at `b`.
pub(super) fn regular_segment(r: &Poly, a: Complex64, qa: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let d = b - a;
    let mut q = qa;
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, w) in GL_X.iter().zip(GL_W) {
        q = follow(r.eval(a + d * *x), q);
        acc += q * w;
    }
    (acc * d, follow(r.eval(b), q))
}

/// `int_{z0}^{w} sqrt(R)` from a zero `z0` of order `p`, where `qw` fixes the
/// branch at `w`. Uses `z = z0 + (w - z0) u^2`, which makes the integrand
/// smooth in `u`; `g = R / (z - z0)^p` comes from the deflated polynomial.
pub(super) fn zero_segment(g: &Poly, z0: Complex64, p: usize, w: Complex64, qw: Complex64) -> Complex64 {
    let d = w - z0;
    let half = d.powf(0.5 * p as f64);
    if half.norm() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    // branch of sqrt(g) matching qw at u = 1, then followed towards u = 0
    let mut sg = qw / half;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in (0..8).rev() {
        let u = GL_X[k];
        sg = follow(g.eval(z0 + d * (u * u)), sg);
        acc += sg * (GL_W[k] * u.powi(p as i32) * 2.0 * u);
    }
    acc * half * d
}

/// `R / (z - z0)^p` by repeated synthetic division.
pub(super) fn deflate_zero(r: &Poly, z0: Complex64, p: usize) -> Poly {
    (0..p).fold(r.clone(), |acc, _| acc.deflate(z0))
}

pub(super) struct Tracer<'a> {
    pub r: &'a Poly,
    pub zeros: &'a [Zero],
    pub deflated: Vec<Poly>,
    pub infinity: Vec<f64>,
    pub center: Complex64,
    pub r_max: f64,
    pub opts: &'a TraceOptions,
}

impl Tracer<'_> {
    fn level(&self, xi: Complex64) -> f64 {
        match self.opts.kind {
            Kind::Horizontal => xi.re,
            Kind::Vertical => xi.im,
        }
    }

    /// Unit field direction at `z`, sign-aligned with `heading`.
    fn field(&self, z: Complex64, heading: Complex64) -> Complex64 {
        let q = self.r.eval(z).sqrt();
        let n = q.norm();
        if n == 0.0 {
            return heading;
        }
        let mut v = q.conj() / n;
        if self.opts.kind == Kind::Horizontal {
            v *= Complex64::i();
        }
        if (v * heading.conj()).re < 0.0 {
            -v
        } else {
            v
        }
    }

    /// One Dormand–Prince 5(4) step; returns the 5th-order point and the
    /// error estimate.
    fn dp45(&self, z: Complex64, h: f64, heading: Complex64) -> (Complex64, f64) {
        const A: [[f64; 6]; 6] = [
            [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
            [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
            [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
            [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
            [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
        ];
        const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
        const B4: [f64; 7] = [
            5179.0 / 57600.0,
            0.0,
            7571.0 / 16695.0,
            393.0 / 640.0,
            -92097.0 / 339200.0,
            187.0 / 2100.0,
            1.0 / 40.0,
        ];
        let mut k = [Complex64::new(0.0, 0.0); 7];
        k[0] = self.field(z, heading);
        for s in 1..7 {
            let zs = z + (0..s).map(|j| k[j] * A[s - 1][j]).sum::<Complex64>() * h;
            k[s] = self.field(zs, heading);
        }
        let z5 = z + (0..7).map(|j| k[j] * B5[j]).sum::<Complex64>() * h;
        let err = ((0..7).map(|j| k[j] * (B5[j] - B4[j])).sum::<Complex64>() * h).norm();
        (z5, err)
    }

    /// Snap direction `alpha` at zero `j` to the nearest critical direction.
    fn start_direction(&self, j: usize, alpha: f64) -> f64 {
        let zero = &self.zeros[j];
        let dirs = super::local_directions(self.r, zero.z, zero.order, self.opts.kind);
        *dirs
            .iter()
            .min_by(|a, b| angle_distance(**a, alpha).partial_cmp(&angle_distance(**b, alpha)).unwrap())
            .unwrap()
    }

    /// Newton re-projection of `w` onto the level `c`, with `xi`/`q` at `w`
    /// recomputed by `eval` after every correction.
    fn project(
        &self,
        mut w: Complex64,
        c: f64,
        eval: impl Fn(Complex64) -> (Complex64, Complex64),
    ) -> (Complex64, Complex64, Complex64) {
        let (mut xi, mut q) = eval(w);
        for _ in 0..6 {
            let e = self.level(xi) - c;
            if e.abs() <= 1e-3 * self.opts.level_tol || q.norm() == 0.0 {
                break;
            }
            let mut dz = -q.conj() * e / q.norm_sqr();
            if self.opts.kind == Kind::Vertical {
                dz *= Complex64::i();
            }
            w += dz;
            (xi, q) = eval(w);
        }
        (w, xi, q)
    }

    fn infinity_anchor(&self, z: Complex64) -> Anchor {
        let a = (z - self.center).arg();
        let k = (0..self.infinity.len())
            .min_by(|&i, &j| {
                angle_distance(self.infinity[i], a)
                    .partial_cmp(&angle_distance(self.infinity[j], a))
                    .unwrap()
            })
            .unwrap_or(0);
        Anchor::Infinity { index: k, angle: self.infinity.get(k).copied().unwrap_or(a) }
    }

    pub fn run(&self, z0: Complex64, direction: f64) -> Trajectory {
        let o = self.opts;
        let start_zero = self
            .zeros
            .iter()
            .position(|zr| (zr.z - z0).norm() <= 1e-9 * (1.0 + zr.z.norm()));
        let mut nodes = vec![z0];
        let mut xi = Complex64::new(0.0, 0.0);
        let c = 0.0;
        let (start, mut z, mut q, mut heading);
        match start_zero {
            Some(j) => {
                let zr = self.zeros[j];
                let alpha = self.start_direction(j, direction);
                let dir = Complex64::from_polar(1.0, alpha);
                let w = zr.z + dir * o.h0;
                let q0 = self.r.eval(w).sqrt();
                let g = &self.deflated[j];
                let eval = |w: Complex64| {
                    let qw = follow(self.r.eval(w), q0);
                    (zero_segment(g, zr.z, zr.order, w, qw), qw)
                };
                let (w, x, qw) = self.project(w, c, eval);
                start = Anchor::Zero { index: j, z: zr.z, order: zr.order };
                nodes[0] = zr.z;
                nodes.push(w);
                z = w;
                xi = x;
                q = qw;
                heading = dir;
            }
            None => {
                start = Anchor::Point(z0);
                z = z0;
                q = self.r.eval(z0).sqrt();
                heading = self.field(z0, Complex64::from_polar(1.0, direction));
            }
        }

        let mut h = o.h0;
        let reach = o.capture * o.h0;
        let mut arclength = (z - nodes[0]).norm();
        let mut drift = self.level(xi).abs();
        let mut steps = 0usize;
        let mut diagnostic = None;
        let end = loop {
            if steps >= o.max_steps || arclength >= o.max_arclength {
                diagnostic = Some(format!("stopped after {steps} steps, arclength {arclength:.3}"));
                break Anchor::Truncated;
            }
            steps += 1;
            // resolve the approach to zeros so the final snap stays short
            let near = self
                .zeros
                .iter()
                .enumerate()
                .filter(|(j, _)| Some(*j) != start_zero || arclength > 2.0 * reach)
                .map(|(_, zr)| (z - zr.z).norm())
                .fold(f64::INFINITY, f64::min);
            h = h.min(0.25 * near.max(o.h0));
            let (zt, err) = self.dp45(z, h, heading);
            if err > o.rk_tol {
                if h <= o.h_min {
                    diagnostic = Some(format!("step underflow near {z}"));
                    break Anchor::Truncated;
                }
                h = (h * (0.9 * (o.rk_tol / err).powf(0.2)).max(0.2)).max(o.h_min);
                continue;
            }
            let (za, qa, xa) = (z, q, xi);
            let (zn, xn, qn) = self.project(zt, c, |w| {
                let (dxi, qw) = regular_segment(self.r, za, qa, w);
                (xa + dxi, qw)
            });
            let step = zn - z;
            if step.norm() == 0.0 {
                diagnostic = Some(format!("stalled at {z}"));
                break Anchor::Truncated;
            }
            heading = step / step.norm();
            arclength += step.norm();
            z = zn;
            xi = xn;
            q = qn;
            nodes.push(z);
            drift = drift.max((self.level(xi) - c).abs());
            let grow = if err > 0.0 { 0.9 * (o.rk_tol / err).powf(0.2) } else { 5.0 };
            h = (h * grow.clamp(0.2, 5.0)).clamp(o.h_min, o.h_max);

            if (z - self.center).norm() > self.r_max {
                break self.infinity_anchor(z);
            }
            let hit = self.zeros.iter().enumerate().find_map(|(j, zr)| {
                let d = (z - zr.z).norm();
                if d >= reach || (Some(j) == start_zero && arclength < 2.0 * reach) {
                    return None;
                }
                let tail = zero_segment(&self.deflated[j], zr.z, zr.order, z, q);
                let at_zero = xi - tail;
                let mismatch = (self.level(at_zero) - c).abs();
                (mismatch <= o.capture_level_tol).then_some((j, mismatch, d))
            });
            if let Some((j, mismatch, d)) = hit {
                let zr = self.zeros[j];
                arclength += d;
                drift = drift.max(mismatch);
                nodes.push(zr.z);
                break Anchor::Zero { index: j, z: zr.z, order: zr.order };
            }
        };
        Trajectory {
            nodes,
            start,
            end,
            kind: o.kind,
            arclength,
            level_drift: drift,
            diagnostic,
        }
    }
}
