//! Non-hermitian orthogonal polynomials for the bilinear form
//! `<p, q> = ∫_Γ p q e^{-nV} dz` and a weak-* comparison of their zero
//! counting measures with a computed equilibrium measure.
//!
//! Moments are accumulated from a single adaptive Gauss–Legendre rule for
//! all powers at once, so the Hankel matrix is the exact Gram matrix of one
//! discrete weight; extended precision (see [`crate::dd`]) then pays off in
//! the elimination even though the contour itself is only known in `f64`.

use num_complex::{Complex, Complex64};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ArcEnd, Contour};
use crate::measure::DiscreteMeasure;
use crate::poly::{roots, ComplexPolynomial};
use crate::scalar::{cabs, cexp, cfrom, cto64, Real};

/// Degree above which machine precision is not expected to be enough.
pub const F64_DEGREE_CAP: usize = 12;

/// Moments `m_k = ∫_Γ ((z - center)/scale)^k e^{-nV(z)} dz`, `k = 0..=k_max`.
#[derive(Clone, Debug)]
pub struct MomentTable<T: Real> {
    pub n: usize,
    pub moments: Vec<Complex<T>>,
    pub scale: T,
    pub center: Complex<T>,
    /// Quadrature nodes used, tails included.
    pub nodes: usize,
}

/// Rough radius of the equilibrium support of `e^{-nV}`: exact for
/// quadratic `V`, within ~15% for the monomial benchmarks.
pub fn support_scale(v: &ComplexPolynomial<f64>) -> Result<(Complex64, f64)> {
    let deg = v.degree().filter(|&d| d >= 1).ok_or_else(|| {
        Error::InvalidField("moments need a non-constant field".into())
    })?;
    let lead = v.coeff(deg);
    let center = -v.coeff(deg - 1) / (lead * deg as f64);
    let scale = (4.0 / (deg as f64 * lead.norm())).powf(1.0 / deg as f64);
    Ok((center, scale))
}

/// Gauss–Legendre nodes and weights on [-1, 1], refined by Newton in `T`.
pub fn gauss_legendre<T: Real>(m: usize) -> (Vec<T>, Vec<T>) {
    let one = T::one();
    let two = one + one;
    let mut x = Vec::with_capacity(m);
    let mut w = Vec::with_capacity(m);
    for i in 0..m {
        let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut t = T::from_f64_lossy(guess);
        let mut dp = T::zero();
        for _ in 0..100 {
            let (p, d) = legendre(m, t);
            dp = d;
            let step = p / d;
            t -= step;
            if step.abs() <= T::epsilon() * two {
                break;
            }
        }
        let (_, d) = legendre(m, t);
        if d != T::zero() {
            dp = d;
        }
        x.push(t);
        w.push(two / ((one - t * t) * dp * dp));
    }
    (x, w)
}

fn legendre<T: Real>(m: usize, t: T) -> (T, T) {
    let (mut p0, mut p1) = (T::one(), t);
    if m == 0 {
        return (p0, T::zero());
    }
    for k in 2..=m {
        let kk = T::from_f64_lossy(k as f64);
        let p2 = ((kk + kk - T::one()) * t * p1 - (kk - T::one()) * p0) / kk;
        p0 = p1;
        p1 = p2;
    }
    let mm = T::from_f64_lossy(m as f64);
    (p1, mm * (t * p1 - p0) / (t * t - T::one()))
}

struct Integrand<'a, T: Real> {
    v: ComplexPolynomial<T>,
    n: T,
    k_max: usize,
    center: Complex<T>,
    scale: T,
    gl: &'a (Vec<T>, Vec<T>),
}

impl<T: Real> Integrand<'_, T> {
    fn weight(&self, z: Complex<T>) -> Complex<T> {
        cexp(-self.v.eval(z) * self.n)
    }

    /// Max over powers of the integrand modulus at `z`.
    fn envelope(&self, z: Complex<T>) -> f64 {
        let w = cabs(self.weight(z)).to_f64();
        let r = cabs((z - self.center) / self.scale).to_f64();
        w * r.max(1.0).powi(self.k_max as i32)
    }

    fn panel(&self, a: Complex<T>, b: Complex<T>, out: &mut [Complex<T>]) {
        let half = (b - a) / (T::one() + T::one());
        let mid = (a + b) / (T::one() + T::one());
        for o in out.iter_mut() {
            *o = Complex::zero();
        }
        for (&x, &wq) in self.gl.0.iter().zip(&self.gl.1) {
            let z = mid + half * x;
            let mut term = self.weight(z) * half * wq;
            let s = (z - self.center) / self.scale;
            for o in out.iter_mut() {
                *o += term;
                term *= s;
            }
        }
    }

    /// Adaptive bisection of `[a, b]`; returns the number of panels used.
    fn adaptive(
        &self,
        a: Complex<T>,
        b: Complex<T>,
        coarse: Vec<Complex<T>>,
        tol: f64,
        depth: usize,
        acc: &mut [Complex<T>],
    ) -> Result<usize> {
        let two = T::one() + T::one();
        let m = (a + b) / two;
        let mut left = vec![Complex::zero(); acc.len()];
        let mut right = vec![Complex::zero(); acc.len()];
        self.panel(a, m, &mut left);
        self.panel(m, b, &mut right);
        let err = coarse
            .iter()
            .zip(left.iter().zip(&right))
            .map(|(c, (l, r))| cabs(*l + *r - *c).to_f64())
            .fold(0.0, f64::max);
        if !err.is_finite() {
            return Err(Error::Configuration(
                "moment integrand overflowed; contour leaves the decay sectors".into(),
            ));
        }
        let mag = left
            .iter()
            .zip(&right)
            .map(|(l, r)| cabs(*l + *r).to_f64())
            .fold(0.0, f64::max);
        let floor = 64.0 * T::epsilon().to_f64() * mag;
        if err <= tol.max(floor) || depth == 0 {
            for (o, (l, r)) in acc.iter_mut().zip(left.iter().zip(&right)) {
                *o += *l + *r;
            }
            return Ok(2);
        }
        let na = self.adaptive(a, m, left, tol / 2.0, depth - 1, acc)?;
        let nb = self.adaptive(m, b, right, tol / 2.0, depth - 1, acc)?;
        Ok(na + nb)
    }

    fn segment(&self, a: Complex<T>, b: Complex<T>, tol: f64, acc: &mut [Complex<T>]) -> Result<usize> {
        let mut coarse = vec![Complex::zero(); acc.len()];
        self.panel(a, b, &mut coarse);
        self.adaptive(a, b, coarse, tol, 30, acc)
    }
}

const GL_POINTS: usize = 16;
const TAIL_PANELS: usize = 400;

/// Moments of `e^{-nV}` along `contour`, rays continued straight out of
/// their tagged ends until the integrand drops below `quad_tol`.
///
/// Only arcs take part: a partition with one pair and singletons yields a
/// single arc, which is the case the bilinear form is defined for.
pub fn moments<T: Real>(
    contour: &Contour,
    v: &ComplexPolynomial<f64>,
    n: usize,
    k_max: usize,
    quad_tol: f64,
) -> Result<MomentTable<T>> {
    if contour.arcs.is_empty() {
        return Err(Error::Configuration("moments need at least one arc".into()));
    }
    let (c64, s64) = support_scale(v)?;
    let gl = gauss_legendre::<T>(GL_POINTS);
    let f = Integrand {
        v: ComplexPolynomial::new(v.coeffs().iter().map(|&c| cfrom(c)).collect()),
        n: T::from_f64_lossy(n as f64),
        k_max,
        center: cfrom(c64),
        scale: T::from_f64_lossy(s64),
        gl: &gl,
    };
    let mut acc = vec![Complex::zero(); k_max + 1];
    let total_len = contour.total_length().max(s64);
    let mut nodes = 0;
    for arc in &contour.arcs {
        for w in arc.windows(2) {
            let tol = quad_tol * (w[1] - w[0]).norm() / total_len;
            nodes += GL_POINTS * f.segment(cfrom(w[0]), cfrom(w[1]), tol, &mut acc)?;
        }
    }
    for tag in &contour.rays {
        let start = contour.end_point(tag.arc, tag.end);
        let dir = contour.outward(tag.arc, tag.end);
        let mut tail = vec![Complex::zero(); k_max + 1];
        nodes += tail_integral(&f, start, dir, s64, quad_tol, &mut tail)?;
        // the tail ray runs into the arc, the head ray out of it
        let sign = if tag.end == ArcEnd::Tail { -T::one() } else { T::one() };
        for (a, t) in acc.iter_mut().zip(tail) {
            *a += t * sign;
        }
    }
    Ok(MomentTable {
        n,
        moments: acc,
        scale: f.scale,
        center: f.center,
        nodes,
    })
}

fn tail_integral<T: Real>(
    f: &Integrand<'_, T>,
    start: Complex64,
    dir: Complex64,
    scale: f64,
    quad_tol: f64,
    acc: &mut [Complex<T>],
) -> Result<usize> {
    let mut len = 0.05 * scale;
    let mut a = start;
    let mut nodes = 0;
    let first = f.envelope(cfrom(a));
    let mut prev = first;
    for _ in 0..TAIL_PANELS {
        let b = a + dir * len;
        let env = f.envelope(cfrom(b));
        // growth by many orders of magnitude means the ray is in a sector
        // where e^{-nV} blows up
        if !env.is_finite() || env > 1e8 * first.max(quad_tol) {
            break;
        }
        nodes += GL_POINTS * f.segment(cfrom(a), cfrom(b), quad_tol * 1e-2, acc)?;
        if env < quad_tol * 1e-3 && env <= prev {
            return Ok(nodes);
        }
        prev = env;
        a = b;
        len = (len * 1.25).min(scale);
    }
    Err(Error::Configuration(format!(
        "moment tail from {start} along {dir} does not decay below {quad_tol:e}"
    )))
}

/// Monic orthogonal polynomial together with its quality indicators.
#[derive(Clone, Debug)]
pub struct OrthogonalPolynomial<T: Real> {
    /// In the original variable `z`.
    pub poly: ComplexPolynomial<T>,
    /// In the rescaled variable `(z - center)/scale`.
    pub scaled: ComplexPolynomial<T>,
    /// `max_k |<p, s^k>| / Σ_j |p_j m_{j+k}|` over `k < degree`.
    pub residual: f64,
    /// 1-norm condition estimate of the row/column equilibrated Hankel matrix.
    pub condition: f64,
}

/// Solves the Hankel system `Σ_j c_j m_{j+k} = -m_{d+k}`, `k < d`, for the
/// monic degree-`d` orthogonal polynomial.
///
/// Fails with [`Error::IllConditioned`] when the condition estimate exceeds
/// `ε^{-1/2}` of the working precision.
pub fn orthogonal_poly<T: Real>(table: &MomentTable<T>, degree: usize) -> Result<OrthogonalPolynomial<T>> {
    if table.moments.len() < 2 * degree + 1 {
        return Err(Error::Validation(format!(
            "degree {degree} needs {} moments, table has {}",
            2 * degree + 1,
            table.moments.len()
        )));
    }
    let m = &table.moments;
    let one = Complex::<T>::one();
    if degree == 0 {
        let p = ComplexPolynomial::constant(one);
        return Ok(OrthogonalPolynomial {
            poly: p.clone(),
            scaled: p,
            residual: 0.0,
            condition: 1.0,
        });
    }
    let d = degree;
    // symmetric diagonal equilibration keeps the Hankel structure visible
    let eq: Vec<T> = (0..d)
        .map(|k| {
            let h = cabs(m[2 * k]);
            if h.is_zero() {
                T::one()
            } else {
                T::one() / h.sqrt()
            }
        })
        .collect();
    let a: Vec<Vec<Complex<T>>> = (0..d)
        .map(|k| (0..d).map(|j| m[j + k] * eq[k] * eq[j]).collect())
        .collect();
    let lu = Lu::factor(a.clone())?;
    let condition = lu.condition_1(&a);
    let limit = 1.0 / T::epsilon().to_f64().sqrt();
    // NaN is refused as well
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(condition <= limit) {
        return Err(Error::IllConditioned { condition, limit });
    }
    let rhs: Vec<Complex<T>> = (0..d).map(|k| -m[d + k] * eq[k]).collect();
    let y = lu.solve(rhs);
    let mut c: Vec<Complex<T>> = y.iter().zip(&eq).map(|(&y, &e)| y * e).collect();
    c.push(one);
    let residual = (0..d)
        .map(|k| {
            let (mut s, mut mag) = (Complex::<T>::zero(), 0.0);
            for (j, cj) in c.iter().enumerate() {
                s += *cj * m[j + k];
                mag += cabs(*cj * m[j + k]).to_f64();
            }
            if mag == 0.0 {
                0.0
            } else {
                cabs(s).to_f64() / mag
            }
        })
        .fold(0.0, f64::max);
    let scaled = ComplexPolynomial::new(c);
    let poly = unscale(&scaled, table.center, table.scale);
    Ok(OrthogonalPolynomial {
        poly,
        scaled,
        residual,
        condition,
    })
}

/// `scale^d · q((z - center)/scale)`, which stays monic.
fn unscale<T: Real>(q: &ComplexPolynomial<T>, center: Complex<T>, scale: T) -> ComplexPolynomial<T> {
    let s = Complex::new(scale, T::zero());
    let lin = ComplexPolynomial::new(vec![-center, Complex::one()]);
    let d = q.degree().unwrap_or(0);
    // Horner on q(x)·s^d = Σ q_j s^{d-j} (z - c)^j
    let mut acc = ComplexPolynomial::zero();
    let mut spow = vec![Complex::<T>::one(); d + 1];
    for i in 1..=d {
        spow[i] = spow[i - 1] * s;
    }
    for j in (0..=d).rev() {
        acc = acc * lin.clone() + ComplexPolynomial::constant(q.coeff(j) * spow[d - j]);
    }
    acc
}

struct Lu<T: Real> {
    a: Vec<Vec<Complex<T>>>,
    piv: Vec<usize>,
}

impl<T: Real> Lu<T> {
    fn factor(mut a: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let n = a.len();
        let mut piv: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let p = (col..n)
                .max_by(|&i, &j| {
                    cabs(a[i][col])
                        .partial_cmp(&cabs(a[j][col]))
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(col);
            if cabs(a[p][col]).is_zero() {
                return Err(Error::IllConditioned {
                    condition: f64::INFINITY,
                    limit: 1.0 / T::epsilon().to_f64().sqrt(),
                });
            }
            a.swap(col, p);
            piv.swap(col, p);
            let (top, rest) = a.split_at_mut(col + 1);
            let pivot = &top[col];
            for row in rest.iter_mut() {
                let f = row[col] / pivot[col];
                row[col] = f;
                for (x, &t) in row[col + 1..].iter_mut().zip(&pivot[col + 1..]) {
                    *x -= f * t;
                }
            }
        }
        Ok(Self { a, piv })
    }

    fn solve(&self, b: Vec<Complex<T>>) -> Vec<Complex<T>> {
        let n = self.a.len();
        let mut x: Vec<Complex<T>> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let t = self.a[i][j] * x[j];
                x[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = self.a[i][j] * x[j];
                x[i] -= t;
            }
            x[i] /= self.a[i][i];
        }
        x
    }

    /// Exact `‖A‖₁ ‖A⁻¹‖₁` from all columns of the inverse; the systems
    /// here are tiny.
    fn condition_1(&self, a: &[Vec<Complex<T>>]) -> f64 {
        let n = a.len();
        let norm = |cols: &dyn Fn(usize) -> Vec<Complex<T>>| {
            (0..n)
                .map(|j| cols(j).iter().map(|z| cabs(*z).to_f64()).sum::<f64>())
                .fold(0.0, f64::max)
        };
        let a_norm = norm(&|j| (0..n).map(|i| a[i][j]).collect());
        let inv_norm = norm(&|j| {
            let mut e = vec![Complex::zero(); n];
            e[j] = Complex::one();
            self.solve(e)
        });
        a_norm * inv_norm
    }
}

/// Smooth real test function `exp(-|z-c|²/2σ²) · Re(e^{iθ} ((z-o)/ρ)^k)`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TestFunction {
    pub c: Complex64,
    pub sigma: f64,
    pub origin: Complex64,
    pub rho: f64,
    pub k: u32,
    pub theta: f64,
}

impl TestFunction {
    pub fn eval(&self, z: Complex64) -> f64 {
        let g = (-(z - self.c).norm_sqr() / (2.0 * self.sigma * self.sigma)).exp();
        let h = (Complex64::from_polar(1.0, self.theta) * ((z - self.origin) / self.rho).powu(self.k)).re;
        g * h
    }
}

pub const DICTIONARY_SIZE: usize = 20;
pub const DICTIONARY_SEED: u64 = 0x0047_524f;

/// Fixed dictionary on the disk `|z - origin| ≤ rho`: Gaussian centres
/// uniform in the disk, widths in `[0.25, 0.75]·rho`, harmonic degree 0..=2.
pub fn test_dictionary(origin: Complex64, rho: f64, seed: u64) -> Vec<TestFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..DICTIONARY_SIZE)
        .map(|i| {
            let r = rho * rng.random::<f64>().sqrt();
            let a = rng.random::<f64>() * std::f64::consts::TAU;
            TestFunction {
                c: origin + Complex64::from_polar(r, a),
                sigma: rho * rng.random_range(0.25..0.75),
                origin,
                rho,
                k: (i % 3) as u32,
                theta: rng.random::<f64>() * std::f64::consts::TAU,
            }
        })
        .collect()
}

/// Disk covering the support of `mu` (weighted centroid, farthest node).
pub fn covering_disk(mu: &DiscreteMeasure<f64>) -> (Complex64, f64) {
    let total: f64 = mu.weights.iter().sum();
    let c = mu
        .points
        .iter()
        .zip(&mu.weights)
        .map(|(z, w)| z * *w)
        .sum::<Complex64>()
        / total;
    let rho = mu.points.iter().map(|z| (z - c).norm()).fold(0.0, f64::max);
    (c, rho.max(f64::MIN_POSITIVE))
}

/// Weak-* discrepancy `max_f |<χ, f> - <μ₀, f>|` over the fixed dictionary,
/// `χ` the normalized zero counting measure of `p`.
pub fn zero_counting_compare<T: Real>(p: &ComplexPolynomial<T>, mu0: &DiscreteMeasure<f64>) -> Result<f64> {
    let zs: Vec<Complex64> = roots(p, 1e-12)?
        .into_iter()
        .flat_map(|r| std::iter::repeat_n(cto64(r.z), r.multiplicity))
        .collect();
    Ok(discrepancy(&zs, mu0))
}

/// Discrepancy of equal-mass points `zs` against `mu0`.
pub fn discrepancy(zs: &[Complex64], mu0: &DiscreteMeasure<f64>) -> f64 {
    let (c, rho) = covering_disk(mu0);
    let dict = test_dictionary(c, rho, DICTIONARY_SEED);
    let total: f64 = mu0.weights.iter().sum();
    dict.iter()
        .map(|f| {
            let chi = zs.iter().map(|&z| f.eval(z)).sum::<f64>() / zs.len() as f64;
            let m = mu0
                .points
                .iter()
                .zip(&mu0.weights)
                .map(|(&z, &w)| w * f.eval(z))
                .sum::<f64>()
                / total;
            (chi - m).abs()
        })
        .fold(0.0, f64::max)
}

/// Zeros of `p` in `f64`.
pub fn zeros_f64<T: Real>(p: &ComplexPolynomial<T>) -> Result<Vec<Complex64>> {
    Ok(roots(p, 1e-12)?
        .into_iter()
        .flat_map(|r| std::iter::repeat_n(cto64(r.z), r.multiplicity))
        .collect())
}
