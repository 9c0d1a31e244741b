//! Sharp lower bounds on the area enclosed by a λ-convex curve of given
//! length on the plane of curvature `−k²`.
//!
//! Every evaluator reduces to `k = 1` (`λ → λ/k`, `L → kL`, area `× 1/k²`).
//! With `s = √|λ² − 1|` the unit-curvature bounds are
//!
//! ```text
//! λ > 1:  λL − 4 arctan(λ/s · tan(sL/4))
//! λ = 1:  L − 4 arctan(L/4)
//! λ < 1:  λL − 4 arctan(λ/s · tanh(sL/4))
//! ```

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};

const CRITICAL_REL_TOL: f64 = 1e-12;
/// Supercritical arguments this close to `π/2` evaluate to the circle area.
const CLAMP_TOL: f64 = 1e-9;
/// Relative slack accepted above the maximal length.
const LENGTH_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `λ > k`: arcs are circles.
    Supercritical,
    /// `λ = k`: arcs are horocycles.
    Critical,
    /// `0 < λ < k`: arcs are equidistants.
    Subcritical,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Supercritical => "supercritical",
            Regime::Critical => "critical",
            Regime::Subcritical => "subcritical",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundResult {
    pub regime: Regime,
    pub lambda: f64,
    pub k: f64,
    pub length: f64,
    pub bound: f64,
    /// `+∞` outside the supercritical regime; serialized as `null`.
    pub max_length: f64,
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {x} must be positive and finite")))
    }
}

pub fn classify(lambda: f64, k: f64) -> Result<Regime> {
    check_positive("λ", lambda)?;
    check_positive("k", k)?;
    Ok(if (lambda - k).abs() <= CRITICAL_REL_TOL * lambda.max(k) {
        Regime::Critical
    } else if lambda > k {
        Regime::Supercritical
    } else {
        Regime::Subcritical
    })
}

/// Length of the circle of geodesic curvature `λ`; unbounded otherwise.
pub fn max_length(lambda: f64, k: f64) -> Result<f64> {
    Ok(match classify(lambda, k)? {
        Regime::Supercritical => TAU / (lambda * lambda - k * k).sqrt(),
        _ => f64::INFINITY,
    })
}

/// Area of the circle of geodesic curvature `λ > k`.
pub fn circle_area(lambda: f64, k: f64) -> Result<f64> {
    if classify(lambda, k)? != Regime::Supercritical {
        return Err(Error::Domain(format!("no circle of curvature {lambda} when k = {k}")));
    }
    Ok(TAU / (k * k) * (lambda / (lambda * lambda - k * k).sqrt() - 1.0))
}

/// Unit-curvature supercritical bound, `λ > 1`. Arguments at or beyond
/// `π/2` (within the clamp tolerance) return the circle area.
pub fn supercritical_unit(lambda: f64, length: f64) -> f64 {
    let s = (lambda * lambda - 1.0).sqrt();
    let x = s * length / 4.0;
    if x >= FRAC_PI_2 - CLAMP_TOL {
        return TAU * (lambda / s - 1.0);
    }
    // with q = λ/s = 1 + ε, λL = 4qx and atan(qt) − atan(t) = atan(εt/(1 + qt²)),
    // which avoids cancelling λL against the arctangent when λ ≫ 1
    let eps = 1.0 / (s * (lambda + s));
    let t = x.tan();
    4.0 * (eps * x - (eps * t / (1.0 + (1.0 + eps) * t * t)).atan())
}

/// `z − arctan z` without cancellation near zero.
fn z_minus_atan(z: f64) -> f64 {
    if z.abs() < 0.1 {
        let z2 = z * z;
        let mut term = z * z2;
        let mut sum = 0.0;
        for n in 1..=8 {
            sum += term / (2 * n + 1) as f64;
            term *= -z2;
        }
        sum
    } else {
        z - z.atan()
    }
}

/// `x − tanh x` without cancellation near zero.
fn x_minus_tanh(x: f64) -> f64 {
    const TAYLOR: [f64; 6] = [
        1.0 / 3.0,
        -2.0 / 15.0,
        17.0 / 315.0,
        -62.0 / 2835.0,
        1382.0 / 155_925.0,
        -21_844.0 / 6_081_075.0,
    ];
    if x.abs() < 0.05 {
        let x2 = x * x;
        TAYLOR.iter().rev().fold(0.0, |acc, c| acc * x2 + c) * x * x2
    } else {
        x - x.tanh()
    }
}

/// Unit-curvature horocyclic bound; valid for every `λ ≥ 1`.
pub fn critical_unit(length: f64) -> f64 {
    4.0 * z_minus_atan(length / 4.0)
}

/// Unit-curvature subcritical bound, `0 < λ < 1`.
pub fn subcritical_unit(lambda: f64, length: f64) -> f64 {
    let s = (1.0 - lambda * lambda).sqrt();
    let q = lambda / s;
    let x = s * length / 4.0;
    // λL = 4qx, split as q(x − tanh x) + (q tanh x − arctan(q tanh x))
    4.0 * (q * x_minus_tanh(x) + z_minus_atan(q * x.tanh()))
}

/// Minimal area among λ-convex curves of length `L`, attained by lunes.
pub fn reverse_bound(lambda: f64, k: f64, length: f64) -> Result<BoundResult> {
    let regime = classify(lambda, k)?;
    let l_max = max_length(lambda, k)?;
    if !(length >= 0.0) {
        return Err(Error::Domain(format!("length {length} < 0")));
    }
    if length > l_max * (1.0 + LENGTH_SLACK) {
        return Err(Error::Domain(format!(
            "length {length} exceeds the maximal λ-convex length {l_max} (admissible: [0, {l_max}])"
        )));
    }
    let (lu, len) = (lambda / k, k * length);
    let unit = match regime {
        Regime::Supercritical => supercritical_unit(lu, len),
        Regime::Critical => critical_unit(len),
        Regime::Subcritical => subcritical_unit(lu, len),
    };
    Ok(BoundResult {
        regime,
        lambda,
        k,
        length,
        bound: unit.max(0.0) / (k * k),
        max_length: l_max,
    })
}

/// The horocyclic bound `(kL − 4 arctan(kL/4))/k²`, a uniform (weaker) bound
/// for all `λ ≥ k`.
pub fn horocyclic_bound(k: f64, length: f64) -> Result<f64> {
    check_positive("k", k)?;
    if !(length >= 0.0) {
        return Err(Error::Domain(format!("length {length} < 0")));
    }
    Ok(critical_unit(k * length) / (k * k))
}

/// Isoperimetric defect `L² − 4πA + cA²` on the plane of curvature `c`.
pub fn classical_defect(length: f64, area: f64, c: f64) -> f64 {
    length * length - 4.0 * PI * area + c * area * area
}

/// Area of the Euclidean λ-lune of length `L`.
pub fn planar_lune_area(lambda: f64, length: f64) -> f64 {
    let phi = lambda * length / 2.0;
    (phi - phi.sin()) / (lambda * lambda)
}

/// Relative deviation of the bound at curvature `−k²` from the Euclidean lune.
pub fn euclidean_limit_deviation(lambda: f64, k: f64, length: f64) -> Result<f64> {
    let planar = planar_lune_area(lambda, length);
    let b = reverse_bound(lambda, k, length)?.bound;
    Ok(((b - planar) / planar).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitRow {
    pub epsilon: f64,
    pub critical: f64,
    pub above: f64,
    pub below: f64,
    pub deviation_above: f64,
    pub deviation_below: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitsReport {
    pub k: f64,
    pub length: f64,
    pub rows: Vec<LimitRow>,
    /// Deviations strictly decrease as `ε` decreases.
    pub converging: bool,
}

pub const LIMIT_EPSILONS: [f64; 2] = [1e-3, 1e-5];

/// Evaluates the bound at `λ = k(1 ± ε)` against the critical value.
pub fn regime_limits_check(k: f64, length: f64) -> Result<LimitsReport> {
    limits_at(k, length, &LIMIT_EPSILONS)
}

pub fn limits_at(k: f64, length: f64, epsilons: &[f64]) -> Result<LimitsReport> {
    let critical = reverse_bound(k, k, length)?.bound;
    let mut rows = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let above = reverse_bound(k * (1.0 + eps), k, length)?.bound;
        let below = reverse_bound(k * (1.0 - eps), k, length)?.bound;
        rows.push(LimitRow {
            epsilon: eps,
            critical,
            above,
            below,
            deviation_above: (above - critical).abs(),
            deviation_below: (below - critical).abs(),
        });
    }
    let mut order: Vec<&LimitRow> = rows.iter().collect();
    order.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
    let converging = order.windows(2).all(|w| {
        w[1].deviation_above < w[0].deviation_above && w[1].deviation_below < w[0].deviation_below
    });
    Ok(LimitsReport {
        k,
        length,
        rows,
        converging,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[allow(clippy::excessive_precision)]
    fn series_branches_are_continuous() {
        // 40-digit references on both sides of each branch point
        for (z, exact) in [(0.0999999, 3.313465187399430163e-4), (0.1, 3.3134750883797262155e-4)] {
            assert!((z_minus_atan(z) - exact).abs() < 1e-13 * exact);
        }
        for (x, exact) in [(0.0499999, 4.162479253660329494e-5), (0.05, 4.1625042120027801614e-5)] {
            assert!((x_minus_tanh(x) - exact).abs() < 1e-12 * exact);
        }
        let exact = 3.333332000000539682321e-10;
        assert!((x_minus_tanh(1e-3) - exact).abs() < 1e-15 * exact);
    }

    #[test]
    fn classification() {
        assert_eq!(classify(2.0, 1.0).unwrap(), Regime::Supercritical);
        assert_eq!(classify(1.0, 1.0).unwrap(), Regime::Critical);
        assert_eq!(classify(0.5, 1.0).unwrap(), Regime::Subcritical);
        assert_eq!(classify(1.0 + 1e-14, 1.0).unwrap(), Regime::Critical);
        assert!(classify(0.0, 1.0).is_err());
        assert!(classify(1.0, -1.0).is_err());
    }

    #[test]
    fn maximal_length() {
        assert!((max_length(2f64.sqrt(), 1.0).unwrap() - TAU).abs() < 1e-14);
        assert_eq!(max_length(1.0, 1.0).unwrap(), f64::INFINITY);
        assert_eq!(max_length(0.3, 1.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn anchors() {
        assert_eq!(reverse_bound(1.0, 1.0, 0.0).unwrap().bound, 0.0);
        assert_eq!(reverse_bound(0.5, 1.0, 0.0).unwrap().bound, 0.0);
        assert_eq!(reverse_bound(3.0, 1.0, 0.0).unwrap().bound, 0.0);
        assert!((reverse_bound(1.0, 1.0, 4.0).unwrap().bound - (4.0 - PI)).abs() < 1e-12);
        let top = reverse_bound(2f64.sqrt(), 1.0, TAU).unwrap().bound;
        assert!((top - TAU * (2f64.sqrt() - 1.0)).abs() < 1e-9);
        assert!((top - circle_area(2f64.sqrt(), 1.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn subcritical_asymptote() {
        let l = 200.0;
        let b = reverse_bound(0.5, 1.0, l).unwrap().bound;
        assert!((b - l / 2.0 + TAU / 3.0).abs() < 1e-10);
    }

    #[test]
    fn too_long_is_rejected_with_the_interval() {
        let err = reverse_bound(2.0, 1.0, 4.0).unwrap_err().to_string();
        assert!(err.contains(&format!("{}", TAU / 3f64.sqrt())), "{err}");
        assert!(reverse_bound(2.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn scaling_example() {
        let a = reverse_bound(2.0, 2.0, 3.0).unwrap().bound;
        let b = reverse_bound(1.0, 1.0, 6.0).unwrap().bound;
        assert!((a - b / 4.0).abs() < 1e-15);
    }

    #[test]
    fn defect_vanishes_on_circles() {
        assert_eq!(classical_defect(TAU, PI, 0.0), 0.0);
        let r = 1.0f64;
        let d = classical_defect(TAU * r.sinh(), TAU * (r.cosh() - 1.0), -1.0);
        assert!(d.abs() < 1e-9);
    }

    #[test]
    fn horocyclic_bound_is_weaker() {
        for l in [0.5, 2.0, 4.0] {
            assert!(horocyclic_bound(1.0, l).unwrap() <= reverse_bound(1.5, 1.0, l).unwrap().bound);
        }
    }

    #[test]
    fn cross_regime_continuity() {
        let rep = regime_limits_check(1.0, 4.0).unwrap();
        assert!(rep.converging);
        let fine = rep.rows.iter().find(|r| r.epsilon == 1e-5).unwrap();
        assert!(fine.deviation_above < 1e-4 && fine.deviation_below < 1e-4);
    }

    #[test]
    fn euclidean_limit() {
        for l in [0.5, 1.0, 2.0, 3.0] {
            assert!(euclidean_limit_deviation(1.0, 1e-3, l).unwrap() < 1e-5);
        }
        let coarse = euclidean_limit_deviation(1.0, 1e-2, 2.0).unwrap();
        let fine = euclidean_limit_deviation(1.0, 1e-3, 2.0).unwrap();
        assert!(coarse / fine > 50.0, "{coarse} {fine}");
    }
}
