//! Complex polynomials, simultaneous root finding and the growth sectors of
//! a polynomial external field.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::{Complex, Complex64};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{cabs, cfrom, cto64, Real};

/// Polynomial with complex coefficients in ascending powers.
///
/// Trailing zero coefficients are trimmed on construction, so the zero
/// polynomial is the empty coefficient vector and has no degree.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexPolynomial<T: Real> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> ComplexPolynomial<T> {
    pub fn new(mut coeffs: Vec<Complex<T>>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex<T>) -> Self {
        Self::new(vec![c])
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(
            coeffs
                .iter()
                .map(|&c| Complex::new(T::from_f64_lossy(c), T::zero()))
                .collect(),
        )
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex<T>]) -> Self {
        roots.iter().fold(Self::constant(Complex::one()), |p, &r| {
            p * Self::new(vec![-r, Complex::one()])
        })
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<Complex<T>> {
        self.coeffs.last().copied()
    }

    /// Coefficient of `z^k`, zero beyond the degree.
    pub fn coeff(&self, k: usize) -> Complex<T> {
        self.coeffs.get(k).copied().unwrap_or_else(Complex::zero)
    }

    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::zero(), |acc, &c| acc * z + c)
    }

    /// Value and first derivative from a single Horner pass.
    pub fn eval_with_derivative(&self, z: Complex<T>) -> (Complex<T>, Complex<T>) {
        let mut p = Complex::zero();
        let mut dp = Complex::zero();
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * T::from_usize(k).unwrap())
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// `sum |c_k| |z|^k`, the natural size against which `|p(z)|` is judged.
    pub fn magnitude_at(&self, z: Complex<T>) -> T {
        let r = cabs(z);
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * r + cabs(c))
    }

    /// Divide by `(z - r)` with synthetic division, dropping the remainder.
    pub fn deflate(&self, r: Complex<T>) -> Self {
        let n = self.coeffs.len();
        if n < 2 {
            return Self::zero();
        }
        let mut out = vec![Complex::zero(); n - 1];
        let mut acc = Complex::zero();
        for k in (1..n).rev() {
            acc = acc * r + self.coeffs[k];
            out[k - 1] = acc;
        }
        Self::new(out)
    }
}

impl ComplexPolynomial<f64> {
    /// Real-valued external field `Re p(z)`.
    pub fn re_at(&self, z: Complex64) -> f64 {
        self.eval(z).re
    }
}

impl<T: Real> Add for ComplexPolynomial<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl<T: Real> Sub for ComplexPolynomial<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl<T: Real> Neg for ComplexPolynomial<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

impl<T: Real> Mul for ComplexPolynomial<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Complex::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }
}

impl<T: Real> Serialize for ComplexPolynomial<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self
            .coeffs
            .iter()
            .map(|c| [c.re.to_f64(), c.im.to_f64()])
            .collect();
        pairs.serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for ComplexPolynomial<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(Self::new(
            pairs
                .into_iter()
                .map(|[re, im]| cfrom(Complex64::new(re, im)))
                .collect(),
        ))
    }
}

/// A root together with its multiplicity after clustering.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Root<T: Real> {
    pub z: Complex<T>,
    pub multiplicity: usize,
}

#[derive(Clone, Debug)]
pub struct RootOptions {
    /// Acceptance tolerance for `|p(root)|` relative to [`ComplexPolynomial::magnitude_at`]
    /// and base of the clustering radius `tol^(1/m)`.
    pub tol: f64,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 500,
            restarts: 4,
            seed: 0x5eed,
        }
    }
}

impl RootOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// All roots of `p` with multiplicities, using the Aberth–Ehrlich
/// simultaneous iteration.
///
/// Roots closer than `tol^(1/m) * max(1, |z|)` are merged into one root of
/// multiplicity `m`.
pub fn roots<T: Real>(p: &ComplexPolynomial<T>, tol: f64) -> Result<Vec<Root<T>>> {
    roots_with(p, &RootOptions::with_tol(tol))
}

pub fn roots_with<T: Real>(p: &ComplexPolynomial<T>, opts: &RootOptions) -> Result<Vec<Root<T>>> {
    let deg = match p.degree() {
        Some(d) if d >= 1 => d,
        _ => {
            return Err(Error::Validation(
                "root finding needs a polynomial of degree >= 1".into(),
            ))
        }
    };
    // strip zeros at the origin exactly
    let lead_zeros = p.coeffs().iter().take_while(|c| c.is_zero()).count();
    let reduced = ComplexPolynomial::new(p.coeffs()[lead_zeros..].to_vec());
    let mut found: Vec<Complex<T>> = vec![Complex::zero(); lead_zeros];
    if reduced.degree().unwrap_or(0) > 0 {
        found.extend(aberth(&reduced, opts)?);
    }
    debug_assert_eq!(found.len(), deg);
    let polished: Vec<Complex<T>> = found.iter().map(|&z| newton_polish(p, z)).collect();
    Ok(cluster(&polished, opts.tol))
}

fn initial_guesses<T: Real>(p: &ComplexPolynomial<T>, phase: f64) -> Vec<Complex<T>> {
    let c = p.coeffs();
    let n = c.len() - 1;
    let lead = cabs(c[n]).to_f64();
    // geometric mean of the roots' moduli, offset to avoid symmetric traps
    let r = (cabs(c[0]).to_f64() / lead).powf(1.0 / n as f64).max(1e-3);
    let centroid = cto64(-c[n - 1] / (c[n] * T::from_usize(n).unwrap()));
    (0..n)
        .map(|k| {
            let ang = TAU * k as f64 / n as f64 + phase;
            cfrom(centroid + Complex64::from_polar(r, ang))
        })
        .collect()
}

fn aberth<T: Real>(p: &ComplexPolynomial<T>, opts: &RootOptions) -> Result<Vec<Complex<T>>> {
    let n = p.degree().unwrap();
    let eps = T::from_f64_lossy(4.0) * T::epsilon();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best = Vec::new();
    for attempt in 0..=opts.restarts {
        let phase = if attempt == 0 {
            0.4
        } else {
            rng.random_range(0.0..TAU)
        };
        let mut z = initial_guesses(p, phase);
        if attempt > 0 {
            for zk in z.iter_mut() {
                let kick = Complex64::new(rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1));
                *zk += cfrom(kick * (1.0 + cto64(*zk).norm()));
            }
        }
        let mut converged = vec![false; n];
        for _ in 0..opts.max_iter {
            for k in 0..n {
                if converged[k] {
                    continue;
                }
                let (v, dv) = p.eval_with_derivative(z[k]);
                if v.is_zero() {
                    converged[k] = true;
                    continue;
                }
                let ratio = v / dv;
                let mut s = Complex::<T>::zero();
                for j in 0..n {
                    if j != k {
                        s += Complex::<T>::one() / (z[k] - z[j]);
                    }
                }
                let step: Complex<T> = ratio / (Complex::<T>::one() - ratio * s);
                if !(step.re.to_f64().is_finite() && step.im.to_f64().is_finite()) {
                    break;
                }
                z[k] -= step;
                if cabs(step) <= eps * (T::one() + cabs(z[k])) {
                    converged[k] = true;
                }
            }
            if converged.iter().all(|&c| c) {
                return Ok(z);
            }
        }
        // accept stalled iterates whose residual is already at rounding level
        let ok = z.iter().all(|&zk| {
            let r = cabs(p.eval(zk));
            r <= T::from_f64_lossy(1e3) * T::epsilon() * p.magnitude_at(zk)
        });
        if ok {
            return Ok(z);
        }
        best = z.iter().map(|&zk| cto64(zk)).collect();
    }
    Err(Error::IterationFailure {
        iterations: opts.max_iter * (opts.restarts + 1),
        best,
    })
}

fn newton_polish<T: Real>(p: &ComplexPolynomial<T>, mut z: Complex<T>) -> Complex<T> {
    for _ in 0..3 {
        let (v, dv) = p.eval_with_derivative(z);
        if dv.is_zero() || v.is_zero() {
            break;
        }
        let step = v / dv;
        let next = z - step;
        if cabs(p.eval(next)) < cabs(v) {
            z = next;
        } else {
            break;
        }
    }
    z
}

fn cluster<T: Real>(zs: &[Complex<T>], tol: f64) -> Vec<Root<T>> {
    let pts: Vec<Complex64> = zs.iter().map(|&z| cto64(z)).collect();
    let mut taken = vec![false; pts.len()];
    let mut out = Vec::new();
    for i in 0..pts.len() {
        if taken[i] {
            continue;
        }
        let mut members = vec![i];
        let mut center = pts[i];
        loop {
            let m = members.len() + 1;
            let radius = tol.powf(1.0 / m as f64) * center.norm().max(1.0);
            let next: Vec<usize> = (0..pts.len())
                .filter(|&j| !taken[j] && (pts[j] - center).norm() <= radius)
                .collect();
            if next.len() <= members.len() {
                break;
            }
            center = next.iter().map(|&j| pts[j]).sum::<Complex64>() / next.len() as f64;
            members = next;
        }
        for &j in &members {
            taken[j] = true;
        }
        let z = if members.len() == 1 {
            zs[i]
        } else {
            cfrom(center)
        };
        out.push(Root {
            z,
            multiplicity: members.len(),
        });
    }
    out
}

/// Growth sectors of `Re V`: `S_j = { |arg z - theta_j| < pi / (2N) }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorSet {
    pub degree: usize,
    /// `theta_1 .. theta_N`, normalized to `[0, 2 pi)`.
    pub angles: Vec<f64>,
    pub half_width: f64,
}

impl SectorSet {
    /// Index (0-based) of the sector whose center is closest to `angle`.
    pub fn nearest(&self, angle: f64) -> usize {
        let mut best = (0, f64::INFINITY);
        for (j, &t) in self.angles.iter().enumerate() {
            let d = angle_distance(angle, t);
            if d < best.1 {
                best = (j, d);
            }
        }
        best.0
    }

    /// `true` if `angle` lies strictly inside sector `j` (0-based).
    pub fn contains(&self, j: usize, angle: f64) -> bool {
        angle_distance(angle, self.angles[j]) < self.half_width
    }
}

pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if (TAU - r).abs() < 1e-12 {
        0.0
    } else {
        r
    }
}

/// Distance between two angles on the circle, in `[0, pi]`.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

pub fn sectors(v: &ComplexPolynomial<f64>) -> Result<SectorSet> {
    let n = match v.degree() {
        Some(n) if n >= 2 => n,
        d => {
            return Err(Error::InvalidField(format!(
                "external field needs degree >= 2, got {d:?}"
            )))
        }
    };
    let a0 = v.leading().unwrap();
    let base = -a0.arg() / n as f64;
    let angles = (0..n)
        .map(|j| normalize_angle(base + TAU * j as f64 / n as f64))
        .collect();
    Ok(SectorSet {
        degree: n,
        angles,
        half_width: PI / (2.0 * n as f64),
    })
}
