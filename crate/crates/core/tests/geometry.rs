mod common;

use common::c;
use num_complex::Complex64;
use proptest::prelude::*;
use scurve_core::geometry::{
    chordal_distance, hausdorff_distance, initial_contour, is_noncrossing, ForbiddenRegion, JoinParams,
    NoncrossingPartition, SpherePoint,
};
use scurve_core::poly::sectors;
use scurve_core::Poly;

/// All set partitions of `1..=n` via restricted growth strings.
fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(i: usize, n: usize, rgs: &mut Vec<usize>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == n {
            let k = rgs.iter().max().map_or(0, |m| m + 1);
            let mut blocks = vec![Vec::new(); k];
            for (j, &b) in rgs.iter().enumerate() {
                blocks[b].push(j + 1);
            }
            out.push(blocks);
            return;
        }
        let m = rgs.iter().max().map_or(0, |m| m + 1);
        for b in 0..=m {
            rgs.push(b);
            rec(i + 1, n, rgs, out);
            rgs.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, &mut Vec::new(), &mut out);
    out
}

/// Exhaustive check over all quadruples `a < b < c < d`.
fn crosses(blocks: &[Vec<usize>], n: usize) -> bool {
    let mut label = vec![0; n + 1];
    for (i, b) in blocks.iter().enumerate() {
        for &j in b {
            label[j] = i;
        }
    }
    for a in 1..=n {
        for b in a + 1..=n {
            for c in b + 1..=n {
                for d in c + 1..=n {
                    if label[a] == label[c] && label[b] == label[d] && label[a] != label[b] {
                        return true;
                    }
                }
            }
        }
    }
    false
}

#[test]
fn noncrossing_matches_brute_force_up_to_seven() {
    let bell = [1, 2, 5, 15, 52, 203, 877];
    let catalan = [1, 2, 5, 14, 42, 132, 429];
    for n in 1..=7 {
        let all = set_partitions(n);
        assert_eq!(all.len(), bell[n - 1]);
        let mut count = 0;
        for p in &all {
            let fast = is_noncrossing(p, n).unwrap();
            assert_eq!(fast, !crosses(p, n), "{p:?}");
            count += fast as usize;
        }
        assert_eq!(count, catalan[n - 1], "n={n}");
    }
}

#[test]
fn not_a_partition_is_rejected() {
    assert!(is_noncrossing(&[vec![1, 2], vec![2, 3]], 3).is_err());
    assert!(is_noncrossing(&[vec![1, 2]], 3).is_err());
    assert!(is_noncrossing(&[vec![1, 4]], 3).is_err());
}

#[test]
fn chordal_and_hausdorff_examples() {
    let zero = SpherePoint::Finite(c(0.0, 0.0));
    let one = SpherePoint::Finite(c(1.0, 0.0));
    assert!((chordal_distance(zero, SpherePoint::Infinity) - 1.0).abs() < 1e-15);
    assert!((chordal_distance(zero, one) - 0.5f64.sqrt()).abs() < 1e-15);
    assert_eq!(hausdorff_distance(&[zero, one], &[zero, one]).unwrap(), 0.0);
    let h = hausdorff_distance(&[zero, one], &[zero]).unwrap();
    assert!((h - 0.5f64.sqrt()).abs() < 1e-15);
    assert!(hausdorff_distance::<f64>(&[], &[zero]).is_err());
}

#[test]
fn forbidden_region_example_against_dense_sampling() {
    let v = common::quadratic();
    let fr = ForbiddenRegion::new(&v, 10.0, 1.0).unwrap();
    assert!(fr.contains(c(0.0, 5.0)));
    assert!(!fr.contains(c(5.0, 0.0)));
    assert!(!fr.contains(c(0.0, 10f64.sqrt())));
    // Re z^2 = -10 is the hyperbola y = ±sqrt(x^2 + 10)
    let dense = (-200_000..=200_000)
        .map(|k| {
            let x = k as f64 * 1e-4;
            (c(x, (x * x + 10.0).sqrt()) - c(0.0, 5.0)).norm()
        })
        .fold(f64::INFINITY, f64::min);
    // the level set is sampled at resolution margin / 10
    let d = fr.distance_to_level(c(0.0, 5.0));
    assert!((d - dense).abs() < 0.1, "{d} vs {dense}");
    // with the margin 8 used in the existence proof the same point is not deep enough
    let wide = ForbiddenRegion::new(&v, 10.0, 8.0).unwrap();
    assert!(!wide.contains(c(0.0, 5.0)));
}

fn noncrossing_with_pair(n: usize) -> Vec<Vec<Vec<usize>>> {
    set_partitions(n)
        .into_iter()
        .filter(|p| !crosses(p, n) && p.iter().any(|b| b.len() >= 2))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn initial_contours_are_admissible(
        n in 2usize..=5,
        pick in 0usize..1000,
        arg in 0.0f64..std::f64::consts::TAU,
        lower in prop::collection::vec((-0.3f64..0.3, -0.3f64..0.3), 4),
    ) {
        let parts = noncrossing_with_pair(n);
        let blocks = parts[pick % parts.len()].clone();
        let mut coeffs: Vec<Complex64> = lower.iter().take(n).map(|&(a, b)| c(a, b)).collect();
        coeffs.resize(n, c(0.0, 0.0));
        coeffs.push(Complex64::from_polar(1.0, arg));
        let v = Poly::new(coeffs);
        let part = NoncrossingPartition::new(n, blocks).unwrap();
        let sec = sectors(&v).unwrap();
        let r_est = 4f64.powf(1.0 / n as f64) + 1.0;
        let r_trunc = 3.0 * r_est;
        let ring = (0..256)
            .map(|k| v.re_at(Complex64::from_polar(r_trunc, std::f64::consts::TAU * k as f64 / 256.0)).abs())
            .fold(1.0, f64::max);
        let fr = ForbiddenRegion::new(&v, 2.0 * ring, 1.0).unwrap();
        let params = JoinParams { center: c(0.0, 0.0), r_join: 0.5 * r_est, r_trunc, spacing: r_trunc / 200.0 };
        let contour = initial_contour(&part, &sec, &params, Some(&fr)).unwrap();
        prop_assert!(contour.validate(&part, &sec).is_ok());
        prop_assert!(contour.nodes().all(|&z| !fr.contains(z)));
        prop_assert_eq!(contour.components.iter().max().unwrap() + 1, part.nontrivial_blocks().count());
    }
}
