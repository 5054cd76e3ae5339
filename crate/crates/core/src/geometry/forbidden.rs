use std::f64::consts::TAU;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::ComplexPolynomial;

/// Deep sublevel set `{Re V < -M}` minus a `margin`-neighborhood of its
/// boundary. Contours must stay out of it.
#[derive(Debug)]
pub struct ForbiddenRegion {
    v: ComplexPolynomial<f64>,
    m: f64,
    margin: f64,
    radius: f64,
    level: OnceLock<Vec<Complex64>>,
}

impl Clone for ForbiddenRegion {
    fn clone(&self) -> Self {
        Self {
            v: self.v.clone(),
            m: self.m,
            margin: self.margin,
            radius: self.radius,
            level: self.level.clone(),
        }
    }
}

/// Radius beyond which the leading term dominates: `|a_k| r^k <= |a_0| r^N / (2N)`.
fn dominance_radius(v: &ComplexPolynomial<f64>) -> f64 {
    let n = v.degree().unwrap_or(0);
    let a0 = v.leading().map_or(1.0, |a| a.norm());
    (0..n)
        .map(|k| (2.0 * n as f64 * v.coeff(k).norm() / a0).powf(1.0 / (n - k) as f64))
        .fold(1.0, f64::max)
}

impl ForbiddenRegion {
    /// Fails unless `{Re V < -M}` has exactly `N = deg V` components.
    pub fn new(v: &ComplexPolynomial<f64>, m: f64, margin: f64) -> Result<Self> {
        let n = match v.degree() {
            Some(n) if n >= 2 => n,
            _ => return Err(Error::InvalidField("forbidden region needs deg V >= 2".into())),
        };
        if !(m > 0.0 && margin > 0.0) {
            return Err(Error::Configuration(format!(
                "M and margin must be positive, got {m} and {margin}"
            )));
        }
        let a0 = v.leading().unwrap().norm();
        let r_m = (2.0 * m / a0).powf(1.0 / n as f64);
        let radius = 2.0 * dominance_radius(v).max(r_m) + 2.0 * margin;
        let fr = Self {
            v: v.clone(),
            m,
            margin,
            radius,
            level: OnceLock::new(),
        };
        let count = fr.component_count();
        if count != n {
            return Err(Error::Configuration(format!(
                "{{Re V < -{m}}} has {count} components inside |z| < {radius:.3}, expected {n}; increase M"
            )));
        }
        Ok(fr)
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    fn phi(&self, z: Complex64) -> f64 {
        self.v.re_at(z)
    }

    /// Membership test. Since `Re V` is harmonic, `dist(z, {Re V = -M}) > margin`
    /// for a point of the sublevel set is equivalent to `Re V < -M` on the
    /// whole circle of radius `margin` around `z` (maximum principle), which
    /// is what gets sampled.
    pub fn contains(&self, z: Complex64) -> bool {
        if self.phi(z) >= -self.m {
            return false;
        }
        let n = self.v.degree().unwrap();
        let k = 64 * n.max(4);
        let mut best = (f64::NEG_INFINITY, 0.0);
        for j in 0..k {
            let t = TAU * j as f64 / k as f64;
            let p = self.phi(z + Complex64::from_polar(self.margin, t));
            if p > best.0 {
                best = (p, t);
            }
        }
        // golden-section refinement of the sampled maximum
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (best.1 - TAU / k as f64, best.1 + TAU / k as f64);
        let f = |t: f64| self.phi(z + Complex64::from_polar(self.margin, t));
        for _ in 0..40 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if f(c) > f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        best.0.max(f(0.5 * (a + b))) < -self.m
    }

    /// Points of `{Re V = -M}` inside the working disk, found by bisection
    /// along circles spaced `margin / 10` apart.
    pub fn level_set(&self) -> &[Complex64] {
        self.level.get_or_init(|| {
            let h = self.margin / 10.0;
            let mut out = Vec::new();
            let rings = (self.radius / h).ceil().min(400.0) as usize;
            for i in 1..=rings {
                let r = self.radius * i as f64 / rings as f64;
                let k = ((TAU * r / h).ceil() as usize).clamp(64, 4096);
                let g = |t: f64| self.phi(Complex64::from_polar(r, t)) + self.m;
                let mut prev = g(0.0);
                for j in 1..=k {
                    let t = TAU * j as f64 / k as f64;
                    let cur = g(t);
                    if (prev < 0.0) != (cur < 0.0) {
                        let (mut a, mut b) = (TAU * (j - 1) as f64 / k as f64, t);
                        let sa = prev < 0.0;
                        for _ in 0..50 {
                            let c = 0.5 * (a + b);
                            if (g(c) < 0.0) == sa {
                                a = c;
                            } else {
                                b = c;
                            }
                        }
                        out.push(Complex64::from_polar(r, 0.5 * (a + b)));
                    }
                    prev = cur;
                }
            }
            out
        })
    }

    /// Distance from `z` to the sampled level set.
    pub fn distance_to_level(&self, z: Complex64) -> f64 {
        self.level_set()
            .iter()
            .map(|&w| (w - z).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Connected components of `{Re V < -M}` on a polar grid of the working
    /// disk, merged with union-find.
    fn component_count(&self) -> usize {
        let (nr, nt) = (160usize, 720usize);
        let idx = |i: usize, j: usize| i * nt + j;
        let mut inside = vec![false; nr * nt];
        for i in 0..nr {
            let r = self.radius * (i + 1) as f64 / nr as f64;
            for j in 0..nt {
                let z = Complex64::from_polar(r, TAU * j as f64 / nt as f64);
                inside[idx(i, j)] = self.phi(z) < -self.m;
            }
        }
        let mut parent: Vec<usize> = (0..nr * nt).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        let union = |p: &mut Vec<usize>, a: usize, b: usize| {
            let (ra, rb) = (find(p, a), find(p, b));
            if ra != rb {
                p[ra] = rb;
            }
        };
        for i in 0..nr {
            for j in 0..nt {
                if !inside[idx(i, j)] {
                    continue;
                }
                let jn = (j + 1) % nt;
                if inside[idx(i, jn)] {
                    union(&mut parent, idx(i, j), idx(i, jn));
                }
                if i + 1 < nr && inside[idx(i + 1, j)] {
                    union(&mut parent, idx(i, j), idx(i + 1, j));
                }
            }
        }
        let mut roots: Vec<usize> = (0..nr * nt)
            .filter(|&k| inside[k])
            .map(|k| find(&mut parent, k))
            .collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }
}

pub fn in_forbidden_region(fr: &ForbiddenRegion, z: Complex64) -> bool {
    fr.contains(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad() -> ComplexPolynomial<f64> {
        ComplexPolynomial::from_real(&[0.0, 0.0, 1.0])
    }

    #[test]
    fn deep_point_depends_on_margin() {
        // z = 5i has Re V = -25, but the curve y^2 - x^2 = 10 passes within
        // about 1.84 of it, so membership flips with the margin
        let z = Complex64::new(0.0, 5.0);
        let narrow = ForbiddenRegion::new(&quad(), 10.0, 1.0).unwrap();
        assert!(narrow.contains(z));
        let wide = ForbiddenRegion::new(&quad(), 10.0, 8.0).unwrap();
        assert!(!wide.contains(z));
        let d = narrow.distance_to_level(z);
        assert!((d - 1.838).abs() < 0.01, "{d}");
    }

    #[test]
    fn positive_field_and_level_curve_are_outside() {
        let fr = ForbiddenRegion::new(&quad(), 10.0, 1.0).unwrap();
        assert!(!fr.contains(Complex64::new(5.0, 0.0)));
        assert!(!fr.contains(Complex64::new(0.0, 10f64.sqrt())));
    }

    #[test]
    fn level_points_lie_on_the_curve() {
        let fr = ForbiddenRegion::new(&quad(), 10.0, 2.0).unwrap();
        let pts = fr.level_set();
        assert!(!pts.is_empty());
        assert!(pts.iter().all(|&w| (quad().re_at(w) + 10.0).abs() < 1e-8));
    }

    #[test]
    fn component_count_matches_degree() {
        let v = ComplexPolynomial::from_real(&[0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(ForbiddenRegion::new(&v, 20.0, 1.0).is_ok());
    }

    #[test]
    fn distance_oracle_agrees_with_dense_sampling() {
        let fr = ForbiddenRegion::new(&quad(), 10.0, 1.0).unwrap();
        // dense parametrization of y^2 - x^2 = 10 (upper branch)
        let z = Complex64::new(0.7, 5.0);
        let dense = (-40000..=40000)
            .map(|k| {
                let x = k as f64 * 2.5e-4;
                Complex64::new(x, (10.0 + x * x).sqrt())
            })
            .map(|w| (w - z).norm())
            .fold(f64::INFINITY, f64::min);
        assert!((fr.distance_to_level(z) - dense).abs() < 0.02);
    }
}
