#![allow(dead_code)]

use hyperlune::hyperbolic::{CyclePlane, HPoint, Isometry};
use proptest::prelude::*;

fn sub(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 - b.0, a.1 - b.1)
}

fn norm(a: (f64, f64)) -> f64 {
    a.0.hypot(a.1)
}

/// Geodesic curvature at `b` of the Poincaré-disk polyline `a, b, c`,
/// positive when the curve turns left. Uses the conformal factor
/// `2/(1 − |z|²)`: `κ = (1 − |z|²) κ_e / 2 − z·n` with `n` the left normal.
pub fn poincare_curvature(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    let (ab, bc, ca) = (sub(b, a), sub(c, b), sub(a, c));
    let cross = ab.0 * bc.1 - ab.1 * bc.0;
    let ke = 2.0 * cross / (norm(ab) * norm(bc) * norm(ca));
    let t = sub(c, a);
    let tn = norm(t);
    let n = (-t.1 / tn, t.0 / tn);
    (1.0 - b.0 * b.0 - b.1 * b.1) * ke / 2.0 - (b.0 * n.0 + b.1 * n.1)
}

/// Curvature of a cycle estimated from three points `step` apart in arc length.
pub fn sampled_curvature(cycle: &CyclePlane, t: f64, step: f64) -> f64 {
    let dt = step / cycle.speed();
    let z = |s: f64| cycle.point_at(s).to_poincare_disk();
    poincare_curvature(z(t - dt), z(t), z(t + dt))
}

pub fn arb_point(max_r: f64) -> impl Strategy<Value = HPoint> {
    (0.0..max_r, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| HPoint::from_polar(r, t))
}

pub fn arb_isometry(max_shift: f64) -> impl Strategy<Value = Isometry> {
    (
        -std::f64::consts::PI..std::f64::consts::PI,
        0.0..max_shift,
        -std::f64::consts::PI..std::f64::consts::PI,
    )
        .prop_map(|(a, s, b)| {
            Isometry::rotation(a)
                .compose(&Isometry::boost_x(s))
                .compose(&Isometry::rotation(b))
        })
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
