mod common;

use common::*;
use scurve_core::equilibrium::{check_euler_lagrange, solve_equilibrium};
use std::time::Instant;

#[test]
fn semicircle_on_real_segment() {
    let t = Instant::now();
    let res = solve_equilibrium(&real_segment(), &quadratic(), 400, 1e-9).unwrap();
    eprintln!("n=400 solve {:?}, {} iterations", t.elapsed(), res.iterations);
    let active = res.mu.active();
    let lo = res.mu.points[active[0]].re;
    let hi = res.mu.points[*active.last().unwrap()].re;
    eprintln!("support [{lo}, {hi}], l = {}, energy = {}", res.l, res.energy);
    assert!((lo + 2f64.sqrt()).abs() < 0.05 && (hi - 2f64.sqrt()).abs() < 0.05);
    let mid = res.mu.len() / 2;
    let dens = 0.5 * (res.mu.weights[mid - 1] / res.mu.seg[mid - 1] + res.mu.weights[mid] / res.mu.seg[mid]);
    eprintln!("density at 0: {dens}");
    assert!((dens - 2f64.sqrt() / std::f64::consts::PI).abs() < 2e-2);
    let s: f64 = res.mu.weights.iter().sum();
    assert!((s - 1.0).abs() < 1e-12 && res.mu.weights.iter().all(|&w| w >= 0.0));
    let rep = check_euler_lagrange(&res, &real_segment(), &quadratic());
    eprintln!("EL report {rep:?}");
    assert!(rep.supp <= 5e-3 && rep.off <= 5e-3);
}

use scurve_core::equilibrium::{el_field, el_report, solve_on_layout, EquilibriumOptions};
use scurve_core::Measure;

fn weighted_l(mu: &Measure) -> f64 {
    let v = quadratic();
    mu.points.iter().zip(&mu.weights).map(|(&z, &w)| w * el_field(mu, &v, z)).sum()
}

#[test]
fn uniform_weights_fail_the_el_check() {
    let contour = real_segment();
    let layout = contour.resample(400).layout();
    let mu = Measure::uniform(&layout).unwrap();
    let rep = el_report(&mu, weighted_l(&mu), &contour, &quadratic());
    assert!(rep.supp > 0.1, "{rep:?}");
}

#[test]
fn truncated_equilibrium_violates_the_off_support_inequality() {
    let contour = real_segment();
    let res = solve_equilibrium(&contour, &quadratic(), 400, 1e-9).unwrap();
    let mut w: Vec<f64> = res.mu.points.iter().zip(&res.mu.weights).map(|(z, &w)| if z.re < 0.0 { w } else { 0.0 }).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    let half = Measure::new(res.mu.points.clone(), w, res.mu.seg.clone(), Some(res.mu.tangents.clone())).unwrap();
    // constant fixed on the remaining support
    let active = half.active();
    let v = quadratic();
    let l = active.iter().map(|&i| half.weights[i] * el_field(&half, &v, half.points[i])).sum::<f64>();
    let rep = el_report(&half, l, &contour, &v);
    assert!(rep.off > 1e-2, "{rep:?}");
}

#[test]
fn energy_history_is_non_increasing() {
    let res = solve_equilibrium(&real_segment(), &quadratic(), 300, 1e-9).unwrap();
    assert!(res.history.windows(2).all(|p| p[1] <= p[0] + 1e-12 * p[0].abs().max(1.0)));
}

#[test]
fn refinement_consistency() {
    let e = |n: usize| solve_equilibrium(&real_segment(), &quadratic(), n, 1e-10).unwrap().energy;
    let (a, b) = (e(200), e(400));
    let n = 200.0f64;
    assert!((a - b).abs() <= n.ln() / n, "{a} {b}");
}

#[test]
fn translation_equivariance() {
    let shifted = segment(c(-2.0, 0.0), c(4.0, 0.0), 1, 2, 1);
    let v = scurve_core::Poly::from_real(&[1.0, -2.0, 1.0]);
    let a = solve_equilibrium(&real_segment(), &quadratic(), 400, 1e-9).unwrap();
    let b = solve_equilibrium(&shifted, &v, 400, 1e-9).unwrap();
    let ends = |mu: &Measure| {
        let act = mu.active();
        (mu.points[act[0]].re, mu.points[*act.last().unwrap()].re)
    };
    let (a0, a1) = ends(&a.mu);
    let (b0, b1) = ends(&b.mu);
    assert!((b0 - a0 - 1.0).abs() < 0.05 && (b1 - a1 - 1.0).abs() < 0.05);
    assert!((a.energy - b.energy).abs() < 1e-6);
}

#[test]
fn random_starts_reach_the_same_energy() {
    use rand::{Rng, SeedableRng};
    let layout = real_segment().resample(300).layout();
    let opts = EquilibriumOptions { tol: 1e-11, ..Default::default() };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let energies: Vec<f64> = (0..2)
        .map(|_| {
            let w: Vec<f64> = (0..layout.len()).map(|_| rng.random::<f64>()).collect();
            let s: f64 = w.iter().sum();
            let w: Vec<f64> = w.iter().map(|x| x / s).collect();
            solve_on_layout(&layout, &quadratic(), &opts, Some(&w)).unwrap().energy
        })
        .collect();
    assert!((energies[0] - energies[1]).abs() < 1e-8, "{energies:?}");
}

#[test]
fn too_few_nodes_is_a_validation_error() {
    assert!(solve_equilibrium(&real_segment(), &quadratic(), 20, 1e-9).is_err());
}
