//! Chordal (spherical) distance and the Hausdorff distance it induces on
//! finite point clouds.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{cabs, Real};

/// Point of the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpherePoint<T: Real> {
    Finite(Complex<T>),
    Infinity,
}

impl<T: Real> From<Complex<T>> for SpherePoint<T> {
    fn from(z: Complex<T>) -> Self {
        SpherePoint::Finite(z)
    }
}

/// `|z - w| / (sqrt(1 + |z|^2) sqrt(1 + |w|^2))`, with the limits at infinity.
pub fn chordal_distance<T: Real>(z: SpherePoint<T>, w: SpherePoint<T>) -> T {
    use SpherePoint::*;
    match (z, w) {
        (Infinity, Infinity) => T::zero(),
        (Finite(z), Infinity) | (Infinity, Finite(z)) => T::one() / T::one().hypot(cabs(z)),
        (Finite(z), Finite(w)) => {
            cabs(z - w) / (T::one().hypot(cabs(z)) * T::one().hypot(cabs(w)))
        }
    }
}

pub fn chordal<T: Real>(z: Complex<T>, w: Complex<T>) -> T {
    chordal_distance(z.into(), w.into())
}

fn directed<T: Real>(a: &[SpherePoint<T>], b: &[SpherePoint<T>]) -> T {
    a.iter()
        .map(|&p| {
            b.iter()
                .map(|&q| chordal_distance(p, q))
                .fold(T::one() + T::one(), T::min_of)
        })
        .fold(T::zero(), T::max_of)
}

/// Hausdorff distance in the chordal metric.
pub fn hausdorff_distance<T: Real>(a: &[SpherePoint<T>], b: &[SpherePoint<T>]) -> Result<T> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Validation(
            "Hausdorff distance needs two nonempty point sets".into(),
        ));
    }
    Ok(directed(a, b).max_of(directed(b, a)))
}

/// Convenience wrapper for finite clouds.
pub fn hausdorff_finite<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Result<T> {
    let a: Vec<_> = a.iter().map(|&z| SpherePoint::Finite(z)).collect();
    let b: Vec<_> = b.iter().map(|&z| SpherePoint::Finite(z)).collect();
    hausdorff_distance(&a, &b)
}

/// Directed Euclidean sup-inf distance from `a` to the polyline through `b`.
pub fn directed_to_polyline(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    a.iter()
        .map(|&p| point_polyline_distance(p, b))
        .fold(0.0, f64::max)
}

pub fn point_polyline_distance(p: Complex<f64>, line: &[Complex<f64>]) -> f64 {
    if line.len() == 1 {
        return (p - line[0]).norm();
    }
    line.windows(2)
        .map(|w| point_segment_distance(p, w[0], w[1]))
        .fold(f64::INFINITY, f64::min)
}

pub fn point_segment_distance(p: Complex<f64>, a: Complex<f64>, b: Complex<f64>) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2.is_zero() {
        return (p - a).norm();
    }
    let t = ((p - a) * d.conj()).re / len2;
    let t = t.clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn f(re: f64, im: f64) -> SpherePoint<f64> {
        SpherePoint::Finite(Complex64::new(re, im))
    }

    #[test]
    fn chordal_examples() {
        assert!((chordal_distance(f(0.0, 0.0), SpherePoint::Infinity) - 1.0).abs() < 1e-15);
        assert!((chordal_distance(f(0.0, 0.0), f(1.0, 0.0)) - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(chordal_distance(f(0.3, -2.0), f(0.3, -2.0)), 0.0);
        assert_eq!(
            chordal_distance::<f64>(SpherePoint::Infinity, SpherePoint::Infinity),
            0.0
        );
    }

    #[test]
    fn hausdorff_examples() {
        let a = [f(0.0, 0.0), f(1.0, 0.0)];
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        let d = hausdorff_distance(&[f(0.0, 0.0)], &[f(1.0, 0.0)]).unwrap();
        assert!((d - 0.5f64.sqrt()).abs() < 1e-15);
        let d = hausdorff_distance(&a, &[f(0.0, 0.0)]).unwrap();
        assert!((d - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(hausdorff_distance::<f64>(&[], &a).is_err());
    }

    #[test]
    fn polyline_distance() {
        let line = [Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)];
        assert!((point_polyline_distance(Complex64::new(0.2, 0.5), &line) - 0.5).abs() < 1e-15);
        assert!((point_polyline_distance(Complex64::new(2.0, 0.0), &line) - 1.0).abs() < 1e-15);
    }

    fn cloud() -> impl Strategy<Value = Vec<SpherePoint<f64>>> {
        prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..6)
            .prop_map(|v| v.into_iter().map(|(a, b)| f(a, b)).collect())
    }

    proptest! {
        #[test]
        fn hausdorff_is_a_metric(a in cloud(), b in cloud(), c in cloud()) {
            let ab = hausdorff_distance(&a, &b).unwrap();
            let ba = hausdorff_distance(&b, &a).unwrap();
            let ac = hausdorff_distance(&a, &c).unwrap();
            let cb = hausdorff_distance(&c, &b).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
            prop_assert!(ab <= ac + cb + 1e-12);
        }
    }
}
