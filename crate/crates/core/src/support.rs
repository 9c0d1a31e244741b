//! Support functions of convex curves and the length/area functionals.
//!
//! A convex curve around an interior origin is described by its support
//! function `h(θ)` (distance to the supporting geodesic perpendicular to the
//! ray at angle `θ`) or equivalently by its contact radius
//! `g = tanh(k h)/k`. In the Klein model, `k·g` is the Euclidean support
//! function of the curve's image, which gives the boundary reconstruction
//! `K(θ) = k g u(θ) + k g′ u⊥(θ)`.

use std::f64::consts::TAU;
use std::io::{BufRead, Write};
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use serde::Serialize;

use crate::control::{dynamics, rk4_periodic, ControlLaw, ControlState};
use crate::error::{Error, Result};
use crate::hyperbolic::HPoint;

pub const MIN_SAMPLES: usize = 64;
/// Default RK4 step count for [`profile_from_control`].
pub const DEFAULT_STEPS: usize = 4096;
/// A profile integrated from a control is closed when its residual is below this.
pub const CLOSURE_TOL: f64 = 1e-8;

const ADMISSIBLE_TOL: f64 = 1e-12;
const CONVEX_TOL: f64 = 1e-9;

/// `g = tanh(k h)/k`.
pub fn contact_radius(h: f64, k: f64) -> Result<f64> {
    if !(h >= 0.0) {
        return Err(Error::Domain(format!("support distance {h} < 0")));
    }
    if !(k > 0.0) {
        return Err(Error::Domain(format!("curvature scale {k} ≤ 0")));
    }
    Ok((k * h).tanh() / k)
}

/// Radius of curvature from the contact radius and its derivatives (k = 1):
/// `R = (g″ + g) / (1 − g′²/(1 − g²))^{3/2}`.
pub fn radius_of_curvature(g: f64, g1: f64, g2: f64) -> Result<f64> {
    let d = 1.0 - g * g;
    if !(d > 0.0) {
        return Err(Error::Domain(format!("|g| = {} ≥ 1", g.abs())));
    }
    let base = 1.0 - g1 * g1 / d;
    if !(base > 0.0) {
        return Err(Error::Domain(format!(
            "1 − g′²/(1 − g²) = {base} ≤ 0"
        )));
    }
    Ok((g2 + g) / base.powf(1.5))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveMeasurements {
    pub length: f64,
    pub area: f64,
}

/// Sampled support function on the uniform grid `θ_j = 2πj/N`.
///
/// `breaks` lists angles where `g″` jumps (switches between arcs and
/// corners); quadrature treats the windows between them separately.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportProfile {
    h: Vec<f64>,
    g: Vec<f64>,
    g1: Vec<f64>,
    g2: Vec<f64>,
    k: f64,
    breaks: Vec<f64>,
}

impl SupportProfile {
    /// Builds a profile from the contact radius and its two derivatives.
    pub fn from_contact(
        g: Vec<f64>,
        g1: Vec<f64>,
        g2: Vec<f64>,
        k: f64,
        breaks: Vec<f64>,
    ) -> Result<Self> {
        let n = g.len();
        if n < MIN_SAMPLES {
            return Err(Error::Domain(format!(
                "profile needs at least {MIN_SAMPLES} samples, got {n}"
            )));
        }
        if g1.len() != n || g2.len() != n {
            return Err(Error::Domain("profile columns differ in length".into()));
        }
        if !(k > 0.0) {
            return Err(Error::Domain(format!("curvature scale {k} ≤ 0")));
        }
        let mut h = Vec::with_capacity(n);
        for (j, gj) in g.iter().enumerate() {
            let s = k * gj;
            if !(s.abs() < 1.0) {
                return Err(Error::Admissibility {
                    theta: theta_at(j, n),
                    reason: format!("|k g| = {} ≥ 1", s.abs()),
                });
            }
            h.push(s.atanh() / k);
        }
        let mut breaks: Vec<f64> = breaks.into_iter().map(|b| b.rem_euclid(TAU)).collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        Ok(Self {
            h,
            g,
            g1,
            g2,
            k,
            breaks,
        })
    }

    /// Builds a profile from support distances, differentiating with
    /// fourth-order periodic central differences.
    pub fn from_support(h: Vec<f64>, k: f64) -> Result<Self> {
        let n = h.len();
        if n < MIN_SAMPLES {
            return Err(Error::Domain(format!(
                "profile needs at least {MIN_SAMPLES} samples, got {n}"
            )));
        }
        if !(k > 0.0) {
            return Err(Error::Domain(format!("curvature scale {k} ≤ 0")));
        }
        let g: Vec<f64> = h.iter().map(|x| (k * x).tanh() / k).collect();
        let (g1, g2) = periodic_derivatives(&g);
        Ok(Self {
            h,
            g,
            g1,
            g2,
            k,
            breaks: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn theta(&self, j: usize) -> f64 {
        theta_at(j, self.len())
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.theta(j)).collect()
    }

    pub fn step(&self) -> f64 {
        TAU / self.len() as f64
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn g1(&self) -> &[f64] {
        &self.g1
    }

    pub fn g2(&self) -> &[f64] {
        &self.g2
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    /// Unit-curvature samples `(k g, k g′, k g″)`.
    fn unit_sample(&self, j: usize) -> (f64, f64, f64) {
        (self.k * self.g[j], self.k * self.g1[j], self.k * self.g2[j])
    }

    /// Checks the square roots of the functionals are real and `R ≥ 0`,
    /// reporting the first offending angle.
    pub fn check_admissible(&self) -> Result<()> {
        for j in 0..self.len() {
            let (g, g1, g2) = self.unit_sample(j);
            let q = 1.0 - g * g - g1 * g1;
            if q < -ADMISSIBLE_TOL {
                return Err(Error::Admissibility {
                    theta: self.theta(j),
                    reason: format!("1 − g² − g′² = {q}"),
                });
            }
            if g2 + g < -CONVEX_TOL {
                return Err(Error::Admissibility {
                    theta: self.theta(j),
                    reason: format!("g″ + g = {} < 0", g2 + g),
                });
            }
        }
        Ok(())
    }

    /// Radius of curvature at every sample, in the profile's length units.
    pub fn radii(&self) -> Result<Vec<f64>> {
        (0..self.len())
            .map(|j| {
                let (g, g1, g2) = self.unit_sample(j);
                radius_of_curvature(g, g1, g2)
                    .map(|r| r / self.k)
                    .map_err(|e| Error::Admissibility {
                        theta: self.theta(j),
                        reason: e.to_string(),
                    })
            })
            .collect()
    }

    /// Boundary points (unit-curvature model) touched by the supporting geodesics.
    pub fn reconstruct_boundary(&self) -> Result<Vec<HPoint>> {
        (0..self.len())
            .map(|j| {
                let (g, g1, _) = self.unit_sample(j);
                let (s, c) = self.theta(j).sin_cos();
                HPoint::from_klein(g * c - g1 * s, g * s + g1 * c)
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# hyperlune support-profile v1")?;
        writeln!(out, "# k={}", self.k)?;
        let breaks: Vec<String> = self.breaks.iter().map(|b| b.to_string()).collect();
        writeln!(out, "# breaks={}", breaks.join(";"))?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["theta", "h", "g", "g1", "g2"])?;
        for j in 0..self.len() {
            w.write_record(&[
                self.theta(j).to_string(),
                self.h[j].to_string(),
                self.g[j].to_string(),
                self.g1[j].to_string(),
                self.g2[j].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format produced by [`Self::write_csv`]. Rows must be on the
    /// uniform grid starting at `θ = 0`.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut k = 1.0;
        let mut breaks = Vec::new();
        let mut body = String::new();
        for line in input.lines() {
            let line = line?;
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(v) = rest.strip_prefix("k=") {
                    k = v.trim().parse().map_err(|e| Error::Parse(format!("k: {e}")))?;
                } else if let Some(v) = rest.strip_prefix("breaks=") {
                    for b in v.split(';').filter(|s| !s.trim().is_empty()) {
                        breaks.push(
                            b.trim()
                                .parse()
                                .map_err(|e| Error::Parse(format!("break: {e}")))?,
                        );
                    }
                }
                continue;
            }
            body.push_str(&line);
            body.push('\n');
        }
        let mut rdr = csv::Reader::from_reader(body.as_bytes());
        let mut g = Vec::new();
        let mut g1 = Vec::new();
        let mut g2 = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let field = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Parse(format!("missing column {i}")))?
                    .trim()
                    .parse()
                    .map_err(|e| Error::Parse(format!("column {i}: {e}")))
            };
            g.push(field(2)?);
            g1.push(field(3)?);
            g2.push(field(4)?);
        }
        Self::from_contact(g, g1, g2, k, breaks)
    }
}

fn theta_at(j: usize, n: usize) -> f64 {
    TAU * j as f64 / n as f64
}

/// Fourth-order central differences on a periodic grid.
fn periodic_derivatives(f: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = f.len();
    let h = TAU / n as f64;
    let at = |j: isize| f[j.rem_euclid(n as isize) as usize];
    let mut d1 = Vec::with_capacity(n);
    let mut d2 = Vec::with_capacity(n);
    for j in 0..n as isize {
        let (m2, m1, p1, p2) = (at(j - 2), at(j - 1), at(j + 1), at(j + 2));
        d1.push((m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h));
        d2.push((-m2 + 16.0 * m1 - 30.0 * at(j) + 16.0 * p1 - p2) / (12.0 * h * h));
    }
    (d1, d2)
}

/// Integral over `[0, 2π)` of samples on the uniform grid. Without breaks
/// this is the periodic trapezoid rule; with breaks each smooth window is
/// integrated by a piecewise-cubic interpolant of its own samples.
pub(crate) fn periodic_integral(values: &[f64], breaks: &[f64]) -> f64 {
    let n = values.len();
    let h = TAU / n as f64;
    if breaks.is_empty() {
        return h * values.iter().sum::<f64>();
    }
    let quad = GaussLegendre::new(NonZeroUsize::new(3).expect("nonzero"));
    let mut total = 0.0;
    let nb = breaks.len();
    for i in 0..nb {
        let a = breaks[i];
        let b = if i + 1 < nb { breaks[i + 1] } else { breaks[0] + TAU };
        if b <= a {
            continue;
        }
        // samples θ_j + 2πm inside [a, b)
        let first = (a / h - 1e-9).ceil() as i64;
        let mut xs = Vec::new();
        let mut fs = Vec::new();
        let mut j = first;
        loop {
            let x = j as f64 * h;
            if x >= b - 1e-12 * h {
                break;
            }
            if x >= a - 1e-9 * h {
                xs.push(x);
                fs.push(values[(j.rem_euclid(n as i64)) as usize]);
            }
            j += 1;
        }
        total += window_integral(&quad, a, b, &xs, &fs, values, h);
    }
    total
}

fn window_integral(quad: &GaussLegendre, a: f64, b: f64, xs: &[f64], fs: &[f64], all: &[f64], h: f64) -> f64 {
    let m = xs.len();
    if m == 0 {
        // window narrower than the grid: interpolate the bracketing samples
        let n = all.len() as i64;
        let jl = (a / h).floor() as i64;
        let fl = all[jl.rem_euclid(n) as usize];
        let fr = all[(jl + 1).rem_euclid(n) as usize];
        let mid = 0.5 * (a + b);
        let w = (mid - jl as f64 * h) / h;
        return (b - a) * ((1.0 - w) * fl + w * fr);
    }
    let deg = m.min(4);
    let stencil = |center: usize| -> usize {
        let start = center.saturating_sub(1);
        start.min(m - deg)
    };
    let mut total = 0.0;
    let mut piece = |lo: f64, hi: f64, s: usize| {
        if hi > lo {
            total += quad.integrate(lo, hi, |x| lagrange(&xs[s..s + deg], &fs[s..s + deg], x));
        }
    };
    piece(a, xs[0], 0);
    for i in 0..m - 1 {
        piece(xs[i], xs[i + 1], stencil(i));
    }
    piece(xs[m - 1], b, m - deg);
    total
}

fn lagrange(xs: &[f64], fs: &[f64], x: f64) -> f64 {
    let mut sum = 0.0;
    for i in 0..xs.len() {
        let mut w = 1.0;
        for j in 0..xs.len() {
            if i != j {
                w *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
        sum += w * fs[i];
    }
    sum
}


/// Length and enclosed area from the support profile:
/// `L = ∫ R √(1−g²−g′²)/(1−g²) dθ`, `A = ∫ (√(1−g²−g′²)/(1−g²) − 1) dθ`
/// at unit curvature, rescaled by `1/k` and `1/k²`.
pub fn length_and_area(profile: &SupportProfile) -> Result<CurveMeasurements> {
    profile.check_admissible()?;
    let n = profile.len();
    let mut fl = Vec::with_capacity(n);
    let mut fa = Vec::with_capacity(n);
    for j in 0..n {
        let (g, g1, g2) = profile.unit_sample(j);
        let d = 1.0 - g * g;
        let q = (d - g1 * g1).max(0.0);
        let w = q.sqrt() / d;
        let base = q / d;
        // corners have R = 0; guard 0/0 where the profile touches q = 0
        let r = if base > 0.0 { ((g2 + g) / base.powf(1.5)).max(0.0) } else { 0.0 };
        fl.push(r * w);
        fa.push(w - 1.0);
    }
    let k = profile.k;
    Ok(CurveMeasurements {
        length: periodic_integral(&fl, &profile.breaks) / k,
        area: periodic_integral(&fa, &profile.breaks) / (k * k),
    })
}

/// Reduces `(λ, k, L, A)` to curvature −1: `(λ/k, k L, k² A)`.
pub fn rescale(lambda: f64, k: f64, length: f64, area: f64) -> Result<(f64, f64, f64)> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("curvature scale {k} ≤ 0")));
    }
    Ok((lambda / k, k * length, k * k * area))
}

/// Inverse of [`rescale`].
pub fn unscale(lambda: f64, k: f64, length: f64, area: f64) -> Result<(f64, f64, f64)> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("curvature scale {k} ≤ 0")));
    }
    Ok((lambda * k, length / k, area / (k * k)))
}

/// Integrates the state equation `(g, g′)` over `[0, 2π]` under the given
/// radius-of-curvature control with `steps` RK4 cells (sub-divided at the
/// law's breakpoints). Returns the profile sampled at the cell boundaries
/// and the closure residual `x(2π) − x(0)`.
pub fn profile_from_control<L: ControlLaw + ?Sized>(
    law: &L,
    g0: f64,
    g1_0: f64,
    steps: usize,
) -> Result<(SupportProfile, [f64; 2])> {
    let x0 = ControlState::new(g0, g1_0)?;
    let mut g = vec![0.0; steps];
    let mut g1 = vec![0.0; steps];
    let end = rk4_periodic(
        [x0.x1, x0.x2],
        law,
        steps,
        |t, y, u| {
            let x = ControlState { x1: y[0], x2: y[1] };
            dynamics(&x, u)
                .map(|(a, b)| [a, b])
                .map_err(|_| Error::Integration { theta: t })
        },
        |j, y| {
            if j < steps {
                g[j] = y[0];
                g1[j] = y[1];
            }
        },
        |_, _| {},
    )?;
    let mut g2 = Vec::with_capacity(steps);
    for j in 0..steps {
        let t = theta_at(j, steps);
        let x = ControlState { x1: g[j], x2: g1[j] };
        let (_, d2) = dynamics(&x, law.value(t)).map_err(|_| Error::Integration { theta: t })?;
        g2.push(d2);
    }
    let residual = [end[0] - x0.x1, end[1] - x0.x2];
    let profile = SupportProfile::from_contact(g, g1, g2, 1.0, law.breakpoints())?;
    Ok((profile, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::ConstantControl;

    fn circle_profile(r: f64, n: usize) -> SupportProfile {
        SupportProfile::from_support(vec![r; n], 1.0).unwrap()
    }

    #[test]
    fn contact_radius_values() {
        assert_eq!(contact_radius(0.0, 1.0).unwrap(), 0.0);
        assert!((contact_radius(1.0, 1.0).unwrap() - 0.7615941559557649).abs() < 1e-15);
        assert!(contact_radius(-0.1, 1.0).is_err());
        assert!(contact_radius(1.0, 0.0).is_err());
    }

    #[test]
    fn radius_of_constant_profile() {
        let r = 0.8f64;
        let rr = radius_of_curvature(r.tanh(), 0.0, 0.0).unwrap();
        assert!((rr - r.tanh()).abs() < 1e-15);
        assert_eq!(radius_of_curvature(0.0, 0.0, 0.0).unwrap(), 0.0);
        assert!(radius_of_curvature(0.6, 0.8, 0.0).is_err());
    }

    #[test]
    fn circle_functionals() {
        for r in [0.25, 0.5, 1.0, 2.0] {
            let m = length_and_area(&circle_profile(r, 2048)).unwrap();
            assert!((m.length - TAU * f64::sinh(r)).abs() < 1e-8, "L r={r}");
            assert!((m.area - TAU * (f64::cosh(r) - 1.0)).abs() < 1e-8, "A r={r}");
        }
    }

    #[test]
    fn point_profile_has_no_length_or_area() {
        let p = SupportProfile::from_contact(vec![0.0; 128], vec![0.0; 128], vec![0.0; 128], 1.0, vec![])
            .unwrap();
        let m = length_and_area(&p).unwrap();
        assert_eq!((m.length, m.area), (0.0, 0.0));
    }

    #[test]
    fn inadmissible_profile_names_theta() {
        let n = 64;
        let mut g1 = vec![0.0; n];
        g1[5] = 0.9;
        let p = SupportProfile::from_contact(vec![0.5; n], g1, vec![0.0; n], 1.0, vec![]).unwrap();
        match length_and_area(&p) {
            Err(Error::Admissibility { theta, .. }) => {
                assert!((theta - TAU * 5.0 / 64.0).abs() < 1e-15)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn too_few_samples() {
        assert!(SupportProfile::from_support(vec![0.3; 32], 1.0).is_err());
    }

    #[test]
    fn rescale_examples() {
        assert_eq!(rescale(0.7, 1.0, 2.0, 3.0).unwrap(), (0.7, 2.0, 3.0));
        assert_eq!(rescale(2.0, 2.0, 3.0, 1.0).unwrap(), (1.0, 6.0, 4.0));
        assert!(rescale(1.0, 0.0, 1.0, 1.0).is_err());
        let (l, len, a) = rescale(1.3, 0.4, 2.2, 0.9).unwrap();
        let back = unscale(l, 0.4, len, a).unwrap();
        assert!((back.0 - 1.3).abs() < 1e-15 && (back.1 - 2.2).abs() < 1e-15);
    }

    #[test]
    fn circle_is_an_equilibrium_of_the_control_system() {
        let r = 0.7f64;
        let (p, res) = profile_from_control(&ConstantControl(r.tanh()), r.tanh(), 0.0, 512).unwrap();
        assert_eq!(res, [0.0, 0.0]);
        assert!(p.g().iter().all(|g| *g == r.tanh()));
    }

    #[test]
    fn zero_control_is_a_harmonic_oscillation() {
        let (a, b) = (0.3, -0.2);
        let (p, res) = profile_from_control(&ConstantControl(0.0), a, b, 1024).unwrap();
        assert!(res[0].abs() < 1e-9 && res[1].abs() < 1e-9);
        for j in (0..1024).step_by(37) {
            let t = p.theta(j);
            assert!((p.g()[j] - (a * t.cos() + b * t.sin())).abs() < 1e-9);
        }
    }

    #[test]
    fn integration_blowup_reports_theta() {
        let r = profile_from_control(&ConstantControl(50.0), 0.9, 0.0, 256);
        assert!(matches!(r, Err(Error::Integration { .. })), "{r:?}");
    }

    #[test]
    fn windowed_quadrature_is_exact_for_piecewise_cubics() {
        let n = 256;
        let brk = [0.7, 2.9];
        let f = |t: f64| if (0.7..2.9).contains(&t) { t * t * t - t } else { 2.0 + t.cos() };
        let vals: Vec<f64> = (0..n).map(|j| f(TAU * j as f64 / n as f64)).collect();
        let exact = {
            let inner = |t: f64| t.powi(4) / 4.0 - t * t / 2.0;
            let outer = |t: f64| 2.0 * t + t.sin();
            (inner(2.9) - inner(0.7)) + (outer(0.7 + TAU) - outer(2.9))
        };
        let got = periodic_integral(&vals, &brk);
        assert!((got - exact).abs() < 1e-8, "{got} vs {exact}");
    }

    #[test]
    fn csv_round_trip() {
        let p = SupportProfile::from_support(
            (0..96).map(|j| 0.5 + 0.05 * (TAU * j as f64 / 96.0).cos()).collect(),
            1.0,
        )
        .unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# hyperlune support-profile v1\n"));
        assert!(text.contains("theta,h,g,g1,g2"));
        let q = SupportProfile::read_csv(&buf[..]).unwrap();
        assert_eq!(q.len(), p.len());
        for j in 0..p.len() {
            assert_eq!(q.g()[j], p.g()[j]);
            assert_eq!(q.g2()[j], p.g2()[j]);
        }
    }
}
