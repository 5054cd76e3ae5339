//! Discrete measures on contours: potentials, energy, Cauchy transform and
//! the first variation of the energy under a smooth deformation `z + t h(z)`.

use num_complex::{Complex, Complex64};
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::NodeLayout;
use crate::poly::ComplexPolynomial;
use crate::scalar::{cabs, cfrom, cto64, Real};

/// Point masses `w_i` at `x_i`, each standing for a uniform charge on a
/// straight piece of contour of length `seg_i` with unit tangent `tangent_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure<T: Real> {
    pub points: Vec<Complex<T>>,
    pub weights: Vec<T>,
    pub seg: Vec<T>,
    pub tangents: Vec<Complex<T>>,
}

fn mass_tol<T: Real>(n: usize) -> T {
    T::from_f64_lossy(1e-12).max_of(T::epsilon() * T::from_usize(10 * n.max(1)).unwrap())
}

impl<T: Real> DiscreteMeasure<T> {
    /// Validates lengths, positivity, unit mass and distinct support. Missing
    /// tangents are estimated from neighboring points.
    pub fn new(
        points: Vec<Complex<T>>,
        weights: Vec<T>,
        seg: Vec<T>,
        tangents: Option<Vec<Complex<T>>>,
    ) -> Result<Self> {
        let n = points.len();
        if n == 0 || weights.len() != n || seg.len() != n {
            return Err(Error::Validation(format!(
                "measure arrays disagree: {} points, {} weights, {} lengths",
                n,
                weights.len(),
                seg.len()
            )));
        }
        if let Some(i) = weights.iter().position(|w| *w < T::zero()) {
            return Err(Error::Validation(format!("negative weight at node {i}")));
        }
        if let Some(i) = seg.iter().position(|l| *l <= T::zero()) {
            return Err(Error::Validation(format!("nonpositive segment length at node {i}")));
        }
        let total = weights.iter().fold(T::zero(), |a, &w| a + w);
        if (total - T::one()).abs() > mass_tol(n) {
            return Err(Error::Validation(format!(
                "weights sum to {:.15}, not 1",
                total.to_f64()
            )));
        }
        let mut keyed: Vec<(f64, f64, usize)> = points
            .iter()
            .enumerate()
            .map(|(i, z)| (z.re.to_f64(), z.im.to_f64(), i))
            .collect();
        keyed.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if let Some(w) = keyed.windows(2).find(|w| w[0].0 == w[1].0 && w[0].1 == w[1].1) {
            return Err(Error::Validation(format!(
                "nodes {} and {} coincide",
                w[0].2, w[1].2
            )));
        }
        let tangents = match tangents {
            Some(t) if t.len() == n => t,
            Some(t) => {
                return Err(Error::Validation(format!(
                    "{} tangents for {n} points",
                    t.len()
                )))
            }
            None => estimate_tangents(&points),
        };
        Ok(Self {
            points,
            weights,
            seg,
            tangents,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `sum w_i x_i^k` for `k = 0..=k_max`.
    pub fn moments(&self, k_max: usize) -> Vec<Complex<T>> {
        let mut m = vec![Complex::zero(); k_max + 1];
        for (&x, &w) in self.points.iter().zip(&self.weights) {
            let mut p = Complex::new(w, T::zero());
            for mk in m.iter_mut() {
                *mk += p;
                p *= x;
            }
        }
        m
    }

    /// Indices with weight above `1e-10 / n`.
    pub fn active(&self) -> Vec<usize> {
        let thr = active_threshold::<T>(self.len());
        (0..self.len()).filter(|&i| self.weights[i] > thr).collect()
    }
}

pub fn active_threshold<T: Real>(n: usize) -> T {
    T::from_f64_lossy(1e-10) / T::from_usize(n.max(1)).unwrap()
}

fn estimate_tangents<T: Real>(points: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = points.len();
    (0..n)
        .map(|i| {
            let d = if n == 1 {
                Complex::new(T::one(), T::zero())
            } else if i == 0 {
                points[1] - points[0]
            } else if i + 1 == n {
                points[n - 1] - points[n - 2]
            } else {
                points[i + 1] - points[i - 1]
            };
            let r = cabs(d);
            if r.is_zero() {
                Complex::new(T::one(), T::zero())
            } else {
                d / r
            }
        })
        .collect()
}

impl DiscreteMeasure<f64> {
    /// Measure with the given weights on the nodes of a contour layout.
    pub fn on_layout(layout: &NodeLayout, weights: Vec<f64>) -> Result<Self> {
        Self::new(
            layout.points.clone(),
            weights,
            layout.seg.clone(),
            Some(layout.tangents.clone()),
        )
    }

    /// Weights proportional to segment length.
    pub fn uniform(layout: &NodeLayout) -> Result<Self> {
        let total: f64 = layout.seg.iter().sum();
        Self::on_layout(layout, layout.seg.iter().map(|l| l / total).collect())
    }
}

#[derive(Serialize, Deserialize)]
struct MeasureRepr {
    #[serde(with = "crate::serde_pts::points")]
    points: Vec<Complex64>,
    weights: Vec<f64>,
    seg: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tangents: Option<Tangents>,
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct Tangents(#[serde(with = "crate::serde_pts::points")] Vec<Complex64>);

impl<T: Real> Serialize for DiscreteMeasure<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MeasureRepr {
            points: self.points.iter().map(|&z| cto64(z)).collect(),
            weights: self.weights.iter().map(|w| w.to_f64()).collect(),
            seg: self.seg.iter().map(|l| l.to_f64()).collect(),
            tangents: Some(Tangents(self.tangents.iter().map(|&z| cto64(z)).collect())),
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for DiscreteMeasure<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MeasureRepr::deserialize(d)?;
        Self::new(
            r.points.into_iter().map(cfrom).collect(),
            r.weights.into_iter().map(T::from_f64_lossy).collect(),
            r.seg.into_iter().map(T::from_f64_lossy).collect(),
            r.tangents.map(|t| t.0.into_iter().map(cfrom).collect()),
        )
        .map_err(serde::de::Error::custom)
    }
}

/// `h(z) = sum_k a_k f(|z - c_k| / (3 b))` with the quintic C^2 cutoff
/// `f(s) = 1 - 10 s^3 + 15 s^4 - 6 s^5` on `s < 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationField<T: Real> {
    pub centers: Vec<Complex<T>>,
    pub amplitudes: Vec<Complex<T>>,
    pub bandwidth: T,
}

impl<T: Real> PerturbationField<T> {
    pub fn new(centers: Vec<Complex<T>>, amplitudes: Vec<Complex<T>>, bandwidth: T) -> Result<Self> {
        if centers.len() != amplitudes.len() {
            return Err(Error::Validation("one amplitude per bump center".into()));
        }
        if bandwidth <= T::zero() {
            return Err(Error::Validation("bump bandwidth must be positive".into()));
        }
        Ok(Self {
            centers,
            amplitudes,
            bandwidth,
        })
    }

    pub fn single(center: Complex<T>, amplitude: Complex<T>, bandwidth: T) -> Self {
        Self {
            centers: vec![center],
            amplitudes: vec![amplitude],
            bandwidth,
        }
    }

    pub fn radius(&self) -> T {
        T::from_f64_lossy(3.0) * self.bandwidth
    }

    /// Profile value and `f'(s) / s` at `z` for bump `k`.
    fn profile(&self, k: usize, z: Complex<T>) -> Option<(T, T)> {
        let rho = self.radius();
        let s = cabs(z - self.centers[k]) / rho;
        if s >= T::one() {
            return None;
        }
        let c = |x: f64| T::from_f64_lossy(x);
        let s2 = s * s;
        let f = T::one() - c(10.0) * s2 * s + c(15.0) * s2 * s2 - c(6.0) * s2 * s2 * s;
        let u = T::one() - s;
        Some((f, -c(30.0) * s * u * u))
    }

    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        (0..self.centers.len())
            .filter_map(|k| self.profile(k, z).map(|(f, _)| self.amplitudes[k] * f))
            .fold(Complex::zero(), |a, b| a + b)
    }

    /// Derivative of `h` along the real direction `tau` (unit complex).
    pub fn directional(&self, z: Complex<T>, tau: Complex<T>) -> Complex<T> {
        let rho2 = self.radius() * self.radius();
        (0..self.centers.len())
            .filter_map(|k| {
                self.profile(k, z).map(|(_, g)| {
                    let proj = ((z - self.centers[k]).conj() * tau).re;
                    self.amplitudes[k] * (g * proj / rho2)
                })
            })
            .fold(Complex::zero(), |a, b| a + b)
    }

    /// Bound on the Lipschitz constant of `h` near `z`: `sum_k |a_k| |grad f_k(z)|`.
    pub fn local_lipschitz(&self, z: Complex<T>) -> T {
        let rho2 = self.radius() * self.radius();
        (0..self.centers.len())
            .filter_map(|k| {
                self.profile(k, z)
                    .map(|(_, g)| cabs(self.amplitudes[k]) * g.abs() * cabs(z - self.centers[k]) / rho2)
            })
            .fold(T::zero(), |a, b| a + b)
    }

    /// `max |h|`, sampled at the bump centers (exact for disjoint bumps).
    pub fn sup_norm(&self) -> T {
        self.centers
            .iter()
            .map(|&c| cabs(self.eval(c)))
            .fold(T::zero(), T::max_of)
    }
}

fn check_node<T: Real>(mu: &DiscreteMeasure<T>, z: Complex<T>) -> Result<()> {
    match mu.points.iter().position(|&x| x == z) {
        Some(index) => Err(Error::SingularEvaluation {
            index,
            point: cto64(z),
        }),
        None => Ok(()),
    }
}

/// `U^mu(z) = sum w_i log 1/|z - x_i|`.
pub fn log_potential<T: Real>(mu: &DiscreteMeasure<T>, z: Complex<T>) -> Result<T> {
    check_node(mu, z)?;
    Ok(mu
        .points
        .iter()
        .zip(&mu.weights)
        .fold(T::zero(), |acc, (&x, &w)| acc - w * cabs(z - x).ln()))
}

/// `(1/2)[t log(t^2 + b^2) - 2t + 2|b| atan(t/|b|)]`, an antiderivative of
/// `(1/2) log(t^2 + b^2)`.
fn seg_antiderivative<T: Real>(t: T, b: T) -> T {
    let two = T::one() + T::one();
    let r2 = t * t + b * b;
    let log_term = if t.is_zero() { T::zero() } else { t * r2.ln() };
    let atan_term = if b.is_zero() {
        T::zero()
    } else {
        two * b.abs() * t.atan2(b.abs())
    };
    (log_term - two * t + atan_term) / two
}

/// Potential at `z` of a unit charge spread uniformly over the segment of
/// length `len` centered at `x` with direction `tau`.
pub fn segment_potential<T: Real>(x: Complex<T>, tau: Complex<T>, len: T, z: Complex<T>) -> T {
    let local = (z - x) * tau.conj();
    let half = len / (T::one() + T::one());
    let (a, b) = (local.re, local.im);
    -(seg_antiderivative(a + half, b) - seg_antiderivative(a - half, b)) / len
}

/// Potential of the piecewise-uniform charge the measure represents; finite
/// everywhere, equal to `1 - log(seg_i / 2)` self-interaction at node `i`.
pub fn smeared_potential<T: Real>(mu: &DiscreteMeasure<T>, z: Complex<T>) -> T {
    (0..mu.len()).fold(T::zero(), |acc, i| {
        acc + mu.weights[i] * segment_potential(mu.points[i], mu.tangents[i], mu.seg[i], z)
    })
}

/// `1 - log(L / 2)`: self-interaction of a uniform unit charge on a segment
/// of length `L`, evaluated at its midpoint.
pub fn self_term<T: Real>(len: T) -> T {
    T::one() - (len / (T::one() + T::one())).ln()
}

/// Discrete potential at every node: off-diagonal point interactions plus
/// the segment self-term.
pub fn node_potentials<T: Real>(mu: &DiscreteMeasure<T>) -> Vec<T> {
    (0..mu.len())
        .into_par_iter()
        .map(|i| {
            let xi = mu.points[i];
            let mut acc = mu.weights[i] * self_term(mu.seg[i]);
            for j in 0..mu.len() {
                if j != i {
                    acc -= mu.weights[j] * cabs(xi - mu.points[j]).ln();
                }
            }
            acc
        })
        .collect()
}

/// `sum_{i != j} w_i w_j log 1/|x_i - x_j| + sum w_i^2 (1 - log(seg_i/2)) + sum w_i Re V(x_i)`.
pub fn weighted_energy<T: Real>(mu: &DiscreteMeasure<T>, v: &ComplexPolynomial<T>) -> T {
    let u = node_potentials(mu);
    (0..mu.len()).fold(T::zero(), |acc, i| {
        acc + mu.weights[i] * (u[i] + v.eval(mu.points[i]).re)
    })
}

/// `C^mu(z) = sum w_i / (x_i - z)`.
pub fn cauchy_transform<T: Real>(mu: &DiscreteMeasure<T>, z: Complex<T>) -> Result<Complex<T>> {
    check_node(mu, z)?;
    Ok(mu
        .points
        .iter()
        .zip(&mu.weights)
        .fold(Complex::zero(), |acc, (&x, &w)| acc + Complex::new(w, T::zero()) / (x - z)))
}

/// Principal-value Cauchy transform at node `i` (self term dropped).
pub fn cauchy_pv<T: Real>(mu: &DiscreteMeasure<T>, i: usize) -> Complex<T> {
    let xi = mu.points[i];
    (0..mu.len())
        .filter(|&j| j != i)
        .fold(Complex::zero(), |acc, j| {
            acc + Complex::new(mu.weights[j], T::zero()) / (mu.points[j] - xi)
        })
}

/// Image of `mu` under `z -> z + t h(z)`. Segment lengths stretch by
/// `|1 + t D_tau h / tau|` and tangents turn with the deformation.
pub fn pushforward<T: Real>(
    mu: &DiscreteMeasure<T>,
    h: &PerturbationField<T>,
    t: T,
) -> Result<DiscreteMeasure<T>> {
    let lip = mu
        .points
        .iter()
        .map(|&x| h.local_lipschitz(x))
        .fold(T::zero(), T::max_of);
    let step = t.abs() * lip;
    if step >= T::one() {
        return Err(Error::StepTooLarge(step.to_f64()));
    }
    let mut out = mu.clone();
    if t.is_zero() {
        return Ok(out);
    }
    for i in 0..mu.len() {
        let x = mu.points[i];
        let tau = mu.tangents[i];
        out.points[i] = x + h.eval(x) * t;
        let stretched = tau + h.directional(x, tau) * t;
        let s = cabs(stretched);
        out.seg[i] = mu.seg[i] * s;
        out.tangents[i] = stretched / s;
    }
    Ok(out)
}

/// First variation `D_h I = -Re( sum_{i != j} w_i w_j (h_i - h_j)/(x_i - x_j)
/// + sum w_i^2 (D_tau h / tau)(x_i) - sum w_i V'(x_i) h_i )`.
pub fn energy_derivative<T: Real>(
    mu: &DiscreteMeasure<T>,
    v: &ComplexPolynomial<T>,
    h: &PerturbationField<T>,
) -> T {
    let dv = v.derivative();
    let hv: Vec<Complex<T>> = mu.points.iter().map(|&x| h.eval(x)).collect();
    let rows: Vec<Complex<T>> = (0..mu.len())
        .into_par_iter()
        .map(|i| {
            let (xi, wi) = (mu.points[i], mu.weights[i]);
            let mut acc = Complex::zero();
            for j in 0..mu.len() {
                if j != i {
                    acc += (hv[i] - hv[j]) / (xi - mu.points[j]) * mu.weights[j];
                }
            }
            let tau = mu.tangents[i];
            acc += h.directional(xi, tau) / tau * wi;
            acc -= dv.eval(xi) * hv[i];
            acc * wi
        })
        .collect();
    -rows.iter().fold(Complex::<T>::zero(), |a, &b| a + b).re
}

/// Per-node forces `G_i = w_i (2 C_pv(x_i) + V'(x_i))`. With them
/// `D_h I = Re sum G_i h(x_i) - Re sum w_i^2 (D_tau h / tau)(x_i)`, which is
/// [`energy_derivative`] rearranged to cost `O(n)` per field.
pub fn node_forces<T: Real>(mu: &DiscreteMeasure<T>, v: &ComplexPolynomial<T>) -> Vec<Complex<T>> {
    let dv = v.derivative();
    let two = T::one() + T::one();
    (0..mu.len())
        .into_par_iter()
        .map(|i| (cauchy_pv(mu, i) * two + dv.eval(mu.points[i])) * mu.weights[i])
        .collect()
}

/// [`energy_derivative`] from precomputed [`node_forces`].
pub fn energy_derivative_with<T: Real>(
    mu: &DiscreteMeasure<T>,
    forces: &[Complex<T>],
    h: &PerturbationField<T>,
) -> T {
    (0..mu.len()).fold(T::zero(), |acc, i| {
        let (x, tau, w) = (mu.points[i], mu.tangents[i], mu.weights[i]);
        acc + (forces[i] * h.eval(x)).re - (h.directional(x, tau) / tau).re * w * w
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    type M = DiscreteMeasure<f64>;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_atoms() -> M {
        M::new(vec![c(1.0, 0.0), c(-1.0, 0.0)], vec![0.5, 0.5], vec![1e-3; 2], None).unwrap()
    }

    #[test]
    fn potential_examples() {
        let mu = M::new(vec![c(0.0, 0.0)], vec![1.0], vec![1.0], None).unwrap();
        let e = std::f64::consts::E;
        assert!((log_potential(&mu, c(e, 0.0)).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(log_potential(&two_atoms(), c(0.0, 0.0)).unwrap(), 0.0);
        assert!(matches!(
            log_potential(&mu, c(0.0, 0.0)),
            Err(Error::SingularEvaluation { index: 0, .. })
        ));
    }

    #[test]
    fn energy_examples() {
        let mu = M::new(vec![c(0.0, 0.0)], vec![1.0], vec![2.0], None).unwrap();
        let zero = ComplexPolynomial::zero();
        assert!((weighted_energy(&mu, &zero) - 1.0).abs() < 1e-15);
        // off-diagonal part of two atoms at distance 2 is 2 * 1/4 * log(1/2)
        let two = two_atoms();
        let diag = 2.0 * 0.25 * self_term(1e-3);
        let off = weighted_energy(&two, &zero) - diag;
        assert!((off - 0.5 * (0.5f64).ln()).abs() < 1e-14);
    }

    #[test]
    fn smeared_potential_matches_self_term_at_center() {
        let x = c(0.3, -0.2);
        let tau = Complex64::from_polar(1.0, 0.7);
        let len = 0.01;
        assert!((segment_potential(x, tau, len, x) - self_term(len)).abs() < 1e-12);
        // far away it is the point potential
        let z = c(3.0, 1.0);
        let far = segment_potential(x, tau, len, z);
        assert!((far + (z - x).norm().ln()).abs() < 1e-6);
    }

    #[test]
    fn cauchy_examples() {
        assert_eq!(cauchy_transform(&two_atoms(), c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        let z = c(1e6, 0.0);
        let cz = cauchy_transform(&two_atoms(), z).unwrap();
        assert!((cz * z + 1.0).norm() < 1e-5);
    }

    #[test]
    fn pushforward_identity_and_translation() {
        let mu = two_atoms();
        let h = PerturbationField::single(c(0.0, 0.0), c(0.3, 0.1), 10.0);
        assert_eq!(pushforward(&mu, &h, 0.0).unwrap(), mu);
        let moved = pushforward(&mu, &h, 1.0).unwrap();
        let s: f64 = moved.weights.iter().sum();
        assert_eq!(s, 1.0);
        // the bump is nearly flat near its center, so this is close to rigid
        for (a, b) in mu.points.iter().zip(&moved.points) {
            assert!((b - a - c(0.3, 0.1)).norm() < 1e-2);
        }
        assert!(matches!(
            pushforward(&mu, &PerturbationField::single(c(0.0, 0.0), c(100.0, 0.0), 0.5), 1.0),
            Err(Error::StepTooLarge(_))
        ));
    }

    #[test]
    fn single_atom_derivative() {
        let mu = M::new(vec![c(0.0, 0.0)], vec![1.0], vec![0.1], Some(vec![c(1.0, 0.0)])).unwrap();
        let v = ComplexPolynomial::from_real(&[0.0, 0.0, 1.0]);
        let h = PerturbationField::single(c(0.2, 0.0), c(1.0, 0.0), 0.2);
        let expected = -(h.directional(c(0.0, 0.0), c(1.0, 0.0)).re);
        assert!((energy_derivative(&mu, &v, &h) - expected).abs() < 1e-15);
    }

    #[test]
    fn bump_directional_derivative_matches_difference() {
        let h = PerturbationField::single(c(0.1, 0.2), c(0.7, -0.4), 0.3);
        let z = c(0.4, 0.05);
        let tau = Complex64::from_polar(1.0, 1.1);
        let eps = 1e-6;
        let fd = (h.eval(z + tau * eps) - h.eval(z - tau * eps)) / (2.0 * eps);
        assert!((fd - h.directional(z, tau)).norm() < 1e-8);
    }

    #[test]
    fn force_form_matches_double_sum() {
        let pts: Vec<Complex64> = (0..30).map(|k| c(-1.5 + 0.1 * k as f64, 0.05 * (k as f64).sin())).collect();
        let w: Vec<f64> = (0..30).map(|k| 1.0 + (k as f64 * 0.7).cos().abs()).collect();
        let s: f64 = w.iter().sum();
        let mu = M::new(pts, w.iter().map(|x| x / s).collect(), vec![0.1; 30], None).unwrap();
        let v = ComplexPolynomial::from_real(&[0.3, -1.0, 0.0, 0.5]);
        let h = PerturbationField::new(vec![c(0.2, 0.0), c(-0.6, 0.1)], vec![c(0.0, 1.0), c(0.4, -0.2)], 0.2).unwrap();
        let f = node_forces(&mu, &v);
        let a = energy_derivative(&mu, &v, &h);
        let b = energy_derivative_with(&mu, &f, &h);
        assert!((a - b).abs() < 1e-13, "{a} {b}");
    }

    #[test]
    fn rejects_bad_measures() {
        assert!(M::new(vec![c(0.0, 0.0)], vec![0.9], vec![1.0], None).is_err());
        assert!(M::new(vec![c(0.0, 0.0); 2], vec![0.5; 2], vec![1.0; 2], None).is_err());
        assert!(M::new(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![1.5, -0.5], vec![1.0; 2], None).is_err());
    }

    #[test]
    fn json_round_trip() {
        let mu = two_atoms();
        let s = serde_json::to_string(&mu).unwrap();
        let back: M = serde_json::from_str(&s).unwrap();
        assert_eq!(back, mu);
        let bad = r#"{"points":[[0,0]],"weights":[0.5],"seg":[1]}"#;
        assert!(serde_json::from_str::<M>(bad).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let mu = DiscreteMeasure::<f32>::new(
            vec![Complex::new(1.0, 0.0), Complex::new(-1.0, 0.0)],
            vec![0.5, 0.5],
            vec![0.01, 0.01],
            None,
        )
        .unwrap();
        let c0 = cauchy_transform(&mu, Complex::new(0.0f32, 1.0)).unwrap();
        assert!(c0.re.abs() < 1e-6 && (c0.im - 0.5).abs() < 1e-6);
    }
}
