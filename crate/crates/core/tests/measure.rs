mod common;

use common::{c, quadratic, semicircle_integral, semicircle_measure, semicircle_potential};
use num_complex::Complex64;
use proptest::prelude::*;
use scurve_core::measure::{
    cauchy_transform, energy_derivative, log_potential, pushforward, weighted_energy, PerturbationField,
};
use scurve_core::{Measure, Poly};

#[test]
fn potential_oracle_is_flat_plus_field_on_the_support() {
    // U + x^2/2 is constant on [-sqrt2, sqrt2]; checks the oracle itself
    let l0 = semicircle_potential(0.0);
    for x in [-1.3, -0.7, 0.2, 0.9, 1.35] {
        assert!((semicircle_potential(x) + x * x / 2.0 - l0).abs() < 1e-6, "x={x}");
    }
}

#[test]
fn semicircle_potential_outside_the_support() {
    let mu = semicircle_measure(400);
    let u = log_potential(&mu, c(2.0, 0.0)).unwrap();
    assert!((u - semicircle_potential(2.0)).abs() < 1e-3, "{u}");
}

#[test]
fn semicircle_energy_against_quadrature_oracle() {
    let oracle = semicircle_integral(|x| semicircle_potential(x) + x * x, 400);
    let mu = semicircle_measure(400);
    let e = weighted_energy(&mu, &quadratic());
    assert!((e - oracle).abs() < 5e-3, "{e} vs {oracle}");
}

#[test]
fn semicircle_resolvent() {
    let mu = semicircle_measure(400);
    let z = c(2.0, 0.0);
    // C(z) = -(z - sqrt(z^2 - 2)) for the semicircle law
    let exact = -(z - (z * z - 2.0).sqrt());
    let got = cauchy_transform(&mu, z).unwrap();
    assert!((got - exact).norm() < 1e-3, "{got}");
    assert!((exact.re - (2f64.sqrt() - 2.0)).abs() < 1e-15);
}

#[test]
fn cauchy_transform_decays_like_minus_one_over_z() {
    let mu = semicircle_measure(50);
    for arg in [0.3, 1.7, -2.5] {
        let z = Complex64::from_polar(1e6, arg);
        let got = cauchy_transform(&mu, z).unwrap() * z;
        assert!((got + 1.0).norm() < 1e-5);
    }
}

#[test]
fn spreading_a_cluster_lowers_the_energy() {
    let flat = Poly::zero();
    let mk = |gap: f64| {
        Measure::new(
            vec![c(0.0, 0.0), c(gap, 0.0), c(2.0 * gap, 0.0)],
            vec![1.0 / 3.0; 3],
            vec![0.01; 3],
            None,
        )
        .unwrap()
    };
    let mut prev = f64::INFINITY;
    for gap in [0.05, 0.1, 0.2, 0.4] {
        let e = weighted_energy(&mk(gap), &flat);
        assert!(e < prev);
        prev = e;
    }
}

fn random_measure(pts: &[(f64, f64)], w: &[f64]) -> Option<Measure> {
    // nodes along a gently curved path so that tangents are meaningful
    let n = pts.len().min(w.len());
    let total: f64 = w[..n].iter().sum();
    let points: Vec<Complex64> = (0..n)
        .map(|k| c(-1.0 + 2.0 * k as f64 / n as f64 + 0.3 * pts[k].0 / n as f64, 0.3 * pts[k].1))
        .collect();
    Measure::new(points, w[..n].iter().map(|x| x / total).collect(), vec![0.5 / n as f64; n], None).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn derivative_matches_central_difference(
        pts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 20..40),
        w in prop::collection::vec(0.1f64..1.0, 40),
        centre in (-1.0f64..1.0, -0.3f64..0.3),
        amp in (-1.0f64..1.0, -1.0f64..1.0),
        bw in 0.2f64..0.8,
        v in prop::collection::vec(-1.0f64..1.0, 4),
    ) {
        let Some(mu) = random_measure(&pts, &w) else { return Ok(()); };
        let v = Poly::from_real(&[v[0], v[1], v[2], v[3], 0.25]);
        let h = PerturbationField::single(c(centre.0, centre.1), c(amp.0, amp.1), bw);
        let t = 1e-5;
        let e = |s: f64| weighted_energy(&pushforward(&mu, &h, s).unwrap(), &v);
        let fd = (e(t) - e(-t)) / (2.0 * t);
        let an = energy_derivative(&mu, &v, &h);
        prop_assert!((fd - an).abs() <= 1e-4 * (1.0 + an.abs()), "fd {} analytic {}", fd, an);
    }

    #[test]
    fn energy_ignores_node_order(
        pts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 10..30),
        w in prop::collection::vec(0.1f64..1.0, 30),
        shift in 1usize..29,
    ) {
        let Some(mu) = random_measure(&pts, &w) else { return Ok(()); };
        let n = mu.len();
        let perm: Vec<usize> = (0..n).map(|i| (i * 7 + shift) % n).collect();
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != n { return Ok(()); }
        let shuffled = Measure::new(
            perm.iter().map(|&i| mu.points[i]).collect(),
            perm.iter().map(|&i| mu.weights[i]).collect(),
            perm.iter().map(|&i| mu.seg[i]).collect(),
            Some(perm.iter().map(|&i| mu.tangents[i]).collect()),
        ).unwrap();
        let v = Poly::from_real(&[0.0, 0.3, 1.0]);
        prop_assert!((weighted_energy(&mu, &v) - weighted_energy(&shuffled, &v)).abs() < 1e-12);
    }

    #[test]
    fn pushforward_keeps_mass_and_is_identity_at_zero(
        pts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 5..20),
        w in prop::collection::vec(0.1f64..1.0, 20),
        t in -0.2f64..0.2,
    ) {
        let Some(mu) = random_measure(&pts, &w) else { return Ok(()); };
        let h = PerturbationField::single(c(0.0, 0.0), c(0.3, 0.2), 0.5);
        prop_assert_eq!(&pushforward(&mu, &h, 0.0).unwrap(), &mu);
        if let Ok(m) = pushforward(&mu, &h, t) {
            prop_assert!((m.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert_eq!(&m.weights, &mu.weights);
        }
    }
}
