#![allow(dead_code)]

use scurve_core::geometry::{ArcEnd, Contour, RayTag};
use scurve_core::{Poly, C64};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn quadratic() -> Poly {
    Poly::from_real(&[0.0, 0.0, 1.0])
}

/// Straight segment `[a, b]` tagged as a contour through sectors `s1` (at
/// `a`) and `s2` (at `b`).
pub fn segment(a: C64, b: C64, pieces: usize, s1: usize, s2: usize) -> Contour {
    let arc = (0..=pieces)
        .map(|k| a + (b - a) * (k as f64 / pieces as f64))
        .collect();
    Contour {
        arcs: vec![arc],
        rays: vec![
            RayTag { arc: 0, end: ArcEnd::Tail, sector: s1 },
            RayTag { arc: 0, end: ArcEnd::Head, sector: s2 },
        ],
        components: vec![0],
    }
}

/// `[-3, 3]`, the natural truncated real axis for `V = z^2`.
pub fn real_segment() -> Contour {
    segment(c(-3.0, 0.0), c(3.0, 0.0), 1, 2, 1)
}

/// Semicircle density `(1/pi) sqrt(2 - x^2)`.
pub fn semicircle(x: f64) -> f64 {
    (2.0 - x * x).max(0.0).sqrt() / std::f64::consts::PI
}

/// `int f dmu` for the semicircle law by Gauss–Chebyshev quadrature of the
/// second kind with `m` nodes.
pub fn semicircle_integral(f: impl Fn(f64) -> f64, m: usize) -> f64 {
    let r = 2f64.sqrt();
    let pi = std::f64::consts::PI;
    (1..=m)
        .map(|k| {
            let t = k as f64 * pi / (m + 1) as f64;
            let w = pi / (m + 1) as f64 * t.sin().powi(2);
            // x = r cos t, density (2/(pi r^2)) sqrt(r^2 - x^2) dx
            w * f(r * t.cos()) * 2.0 / pi
        })
        .sum()
}

/// Semicircle distribution function on `[-sqrt 2, sqrt 2]`.
pub fn semicircle_cdf(x: f64) -> f64 {
    let r = 2f64.sqrt();
    let x = x.clamp(-r, r);
    0.5 + (x * (2.0 - x * x).max(0.0).sqrt() + 2.0 * (x / r).asin()) / (2.0 * std::f64::consts::PI)
}

/// `m` equal cells of `[-sqrt 2, sqrt 2]` carrying their exact semicircle mass.
pub fn semicircle_measure(m: usize) -> scurve_core::Measure {
    let r = 2f64.sqrt();
    let dx = 2.0 * r / m as f64;
    let w: Vec<f64> = (0..m)
        .map(|i| semicircle_cdf(-r + (i + 1) as f64 * dx) - semicircle_cdf(-r + i as f64 * dx))
        .collect();
    let total: f64 = w.iter().sum();
    scurve_core::Measure::new(
        (0..m).map(|i| c(-r + (i as f64 + 0.5) * dx, 0.0)).collect(),
        w.iter().map(|w| w / total).collect(),
        vec![dx; m],
        Some(vec![c(1.0, 0.0); m]),
    )
    .unwrap()
}

/// Equal-mass quantile points of the semicircle law.
pub fn semicircle_quantiles(m: usize) -> Vec<C64> {
    let r = 2f64.sqrt();
    (0..m)
        .map(|i| {
            let target = (i as f64 + 0.5) / m as f64;
            let (mut lo, mut hi) = (-r, r);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if semicircle_cdf(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            c(0.5 * (lo + hi), 0.0)
        })
        .collect()
}

/// `U(x) = int log(1/|x - y|) dmu(y)` for the semicircle law and real `x`,
/// by Gauss–Legendre in `y = sqrt2 cos t` with a cubic grading towards the
/// logarithmic singularity.
pub fn semicircle_potential(x: f64) -> f64 {
    let r = 2f64.sqrt();
    let pi = std::f64::consts::PI;
    let (gx, gw) = scurve_core::ortho::gauss_legendre::<f64>(64);
    let f = |t: f64| 2.0 / pi * t.sin().powi(2) * -(x - r * t.cos()).abs().ln();
    // integral of f over [a, a + len] graded towards a
    let graded = |a: f64, len: f64| {
        gx.iter()
            .zip(&gw)
            .map(|(&s, &w)| {
                let u = 0.5 * (s + 1.0);
                let t = a + len * u * u * u;
                0.5 * w * f(t) * 3.0 * len * u * u
            })
            .sum::<f64>()
    };
    if x.abs() >= r {
        return semicircle_integral(|y| -(x - y).abs().ln(), 4000);
    }
    let t0 = (x / r).acos();
    -graded(t0, -t0) + graded(t0, pi - t0)
}
