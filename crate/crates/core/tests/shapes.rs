mod common;

use std::f64::consts::{SQRT_2, TAU};

use common::arb_isometry;
use hyperlune::bounds::{classical_defect, max_length, reverse_bound};
use hyperlune::hyperbolic::{CyclePlane, HPoint, Isometry};
use hyperlune::shapes::circle_half_separation;
use hyperlune::{build_lune, lune_for_length, polygon_from_regions, random_polygon, LambdaPolygon};
use proptest::prelude::*;

fn cycle_at(lambda: f64, phi: f64, r: f64) -> CyclePlane {
    let base = CyclePlane::through_origin(lambda).unwrap();
    Isometry::rotation(phi).compose(&Isometry::boost_x(r)).apply_cycle(&base)
}

fn length_grid(lambda: f64, n: usize) -> Vec<f64> {
    let top = max_length(lambda, 1.0).unwrap().min(12.0);
    (1..=n).map(|i| top * i as f64 / n as f64).collect()
}

fn centered(p: &LambdaPolygon) -> LambdaPolygon {
    p.transformed(&Isometry::translation_to(&p.center).inverse()).unwrap()
}

#[test]
fn lunes_attain_the_bound_on_a_dense_grid() {
    let lambdas = [0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 1.0, 1.01, 1.2, SQRT_2, 2.0, 3.0, 5.0];
    for lambda in lambdas {
        for l in length_grid(lambda, 25) {
            let lune = lune_for_length(lambda, l).unwrap();
            let bound = reverse_bound(lambda, 1.0, l).unwrap().bound;
            assert!(
                (lune.area - bound).abs() < 1e-7,
                "λ={lambda} L={l}: lune {} bound {bound}",
                lune.area
            );
            assert!((lune.length - l).abs() < 1e-9 * l.max(1.0));
        }
    }
}

#[test]
fn gauss_bonnet_matches_quadrature() {
    for lambda in [0.5, 1.0, SQRT_2] {
        for sep in [0.2, 0.8, 1.5] {
            let lune = build_lune(lambda, sep).unwrap();
            assert!((lune.area - lune.quadrature_area).abs() < 1e-8 * lune.area.max(1.0));
        }
        for n in 2..=8 {
            for seed in 0..5 {
                let p = random_polygon(lambda, n, seed).unwrap();
                let turning: f64 = p.exterior_angles.iter().sum();
                assert!((p.area - (lambda * p.length + turning - TAU)).abs() < 1e-12 * p.area.max(1.0));
                assert!(
                    (p.area - p.quadrature_area).abs() < 1e-8 * p.area.max(1.0),
                    "λ={lambda} n={n} seed={seed}: {} vs {}",
                    p.area,
                    p.quadrature_area
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn measurements_are_congruence_invariant(
        iso in arb_isometry(2.0),
        seed in 0u64..1000,
        n in 2usize..7,
        lambda in prop::sample::select(vec![0.6, 1.0, 1.7]),
    ) {
        let p = random_polygon(lambda, n, seed).unwrap();
        let q = p.transformed(&iso).unwrap();
        prop_assert_eq!(q.arcs.len(), p.arcs.len());
        prop_assert!((q.length - p.length).abs() < 1e-9 * p.length.max(1.0));
        prop_assert!((q.area - p.area).abs() < 1e-9 * p.area.max(1.0));
        let mut a = p.arc_lengths.clone();
        let mut b = q.arc_lengths.clone();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }
}

#[test]
fn classical_defect_is_nonnegative_and_vanishes_for_circles() {
    for lambda in [0.4, 1.0, 1.3, 2.5] {
        for l in length_grid(lambda, 10) {
            let lune = lune_for_length(lambda, l).unwrap();
            let d = classical_defect(lune.length, lune.area, -1.0);
            assert!(d >= -1e-8, "λ={lambda} L={l}: {d}");
            if !lune.is_circle() {
                assert!(d > 1e-9);
            }
        }
        for n in 2..=8 {
            let p = random_polygon(lambda, n, 11 * n as u64).unwrap();
            assert!(classical_defect(p.length, p.area, -1.0) > 1e-9);
        }
    }
    for lambda in [1.2, SQRT_2, 3.0] {
        let rho = circle_half_separation(lambda).unwrap();
        let circle = build_lune(lambda, 2.0 * rho).unwrap();
        assert!(circle.is_circle());
        assert!(classical_defect(circle.length, circle.area, -1.0).abs() < 1e-9);
    }
}

#[test]
fn symmetric_triangle_is_strictly_above_the_bound() {
    for lambda in [0.8, 1.0, SQRT_2] {
        let cycles: Vec<_> = (0..3).map(|i| cycle_at(lambda, TAU * i as f64 / 3.0, 0.7)).collect();
        let p = polygon_from_regions(&cycles).unwrap();
        assert_eq!(p.arcs.len(), 3);
        let bound = reverse_bound(lambda, 1.0, p.length).unwrap().bound;
        assert!(p.area - bound > 1e-4, "λ={lambda}: {} vs {bound}", p.area);
    }
}

#[test]
fn many_tangent_cycles_approach_a_circle() {
    let (lambda, r) = (SQRT_2, 0.5);
    let mut last = f64::INFINITY;
    for n in [8, 32, 128] {
        let cycles: Vec<_> = (0..n).map(|i| cycle_at(lambda, TAU * i as f64 / n as f64, r)).collect();
        let p = polygon_from_regions(&cycles).unwrap();
        assert_eq!(p.arcs.len(), n);
        let err = (p.area / p.length - (r / 2.0).tanh()).abs();
        assert!(err < last);
        last = err;
        let bound = reverse_bound(lambda, 1.0, p.length).unwrap().bound;
        assert!(p.area > bound);
    }
    assert!(last < 1e-4, "{last}");
}

#[test]
fn random_polygons_dominate_the_bound() {
    for lambda in [0.5, 1.0, SQRT_2] {
        let mut worst_lune = f64::INFINITY;
        let mut worst_other = f64::INFINITY;
        for seed in 0..140u64 {
            let n = 2 + (seed % 7) as usize;
            let p = random_polygon(lambda, n, seed).unwrap();
            let deficiency = p.area - reverse_bound(lambda, 1.0, p.length).unwrap().bound;
            assert!(deficiency >= -1e-9, "λ={lambda} seed={seed}: {deficiency}");
            if n == 2 {
                worst_lune = worst_lune.min(deficiency);
            } else {
                worst_other = worst_other.min(deficiency);
            }
        }
        assert!(worst_lune < 1e-6);
        assert!(worst_lune <= worst_other);
    }
}

#[test]
fn lune_profile_is_bang_bang() {
    let lambda = SQRT_2;
    let lune = lune_for_length(lambda, 3.0).unwrap();
    let prof = lune.support_profile(2048).unwrap();
    assert_eq!(prof.breaks().len(), 4);
    let step = prof.step();
    let radii = prof.radii().unwrap();
    let near_break = |t: f64| {
        prof.breaks().iter().any(|&b| {
            let d = (t - b).rem_euclid(TAU);
            d.min(TAU - d) < 2.0 * step
        })
    };
    let (mut arcs, mut corners) = (0, 0);
    for (j, &r) in radii.iter().enumerate() {
        if near_break(prof.theta(j)) {
            continue;
        }
        if (r - 1.0 / lambda).abs() < 1e-5 {
            arcs += 1;
        } else {
            assert!(r.abs() < 1e-6, "θ={}: R={r}", prof.theta(j));
            corners += 1;
        }
    }
    assert!(arcs > 0 && corners > 0);
}

#[test]
fn circle_profile_has_constant_radius() {
    let lambda = 1.5;
    let rho = circle_half_separation(lambda).unwrap();
    let circle = build_lune(lambda, 2.0 * rho).unwrap();
    let prof = circle.support_profile(512).unwrap();
    assert!(prof.breaks().is_empty());
    for r in prof.radii().unwrap() {
        assert!((r - 1.0 / lambda).abs() < 1e-9);
    }
}

#[test]
fn support_function_matches_dense_boundary() {
    for (lambda, n, seed) in [(SQRT_2, 3, 1u64), (0.7, 5, 2), (1.0, 2, 3)] {
        let p = centered(&random_polygon(lambda, n, seed).unwrap());
        let prof = p.support_profile_about(&HPoint::origin(), 256).unwrap();
        let klein: Vec<(f64, f64)> = p
            .polyline(4000)
            .into_iter()
            .map(|(u, v)| {
                let s = 1.0 + u * u + v * v;
                (2.0 * u / s, 2.0 * v / s)
            })
            .collect();
        for j in 0..prof.len() {
            let (s, c) = prof.theta(j).sin_cos();
            let best = klein.iter().map(|k| k.0 * c + k.1 * s).fold(f64::NEG_INFINITY, f64::max);
            assert!(
                (prof.g()[j] - best).abs() < 1e-5,
                "θ={}: {} vs {best}",
                prof.theta(j),
                prof.g()[j]
            );
        }
    }
}

#[test]
fn export_round_trips_through_json() {
    let p = random_polygon(1.2, 4, 5).unwrap();
    let js: serde_json::Value = serde_json::from_str(&p.export().to_json().unwrap()).unwrap();
    assert_eq!(js["shape"], "polygon");
    assert_eq!(js["cycles"].as_array().unwrap().len(), 4);
    assert_eq!(js["vertices"].as_array().unwrap().len(), 4);
    assert!((js["area"].as_f64().unwrap() - p.area).abs() < 1e-15);
    let lune = build_lune(0.6, 1.0).unwrap();
    let js: serde_json::Value = serde_json::from_str(&lune.export().to_json().unwrap()).unwrap();
    assert_eq!(js["cycles"][0]["kind"], "equidistant");
}
