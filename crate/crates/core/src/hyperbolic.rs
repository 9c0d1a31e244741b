//! Hyperboloid model of the hyperbolic plane of curvature −1.
//!
//! Points live on the upper sheet `⟨p,p⟩ = −1, x0 > 0` of Minkowski space with
//! `⟨a,b⟩ = −a0 b0 + a1 b1 + a2 b2`. A constant-curvature curve is the slice
//! `{p : ⟨p,v⟩ = c}` of the sheet by an affine plane, stored so that its convex
//! side is the sub-level set `{⟨p,v⟩ ≤ c}`.
//!
//! Normalized forms:
//!
//! | kind        | `⟨v,v⟩` | `v0`  | `c`            | curvature    |
//! |-------------|---------|-------|----------------|--------------|
//! | Circle      | −1      | < 0   | `cosh r > 1`   | `coth r`     |
//! | Horocycle   | 0       | < 0   | 1              | 1            |
//! | Equidistant | +1      | any   | `sinh d > 0`   | `tanh d`     |
//! | Geodesic    | +1      | any   | 0              | 0            |

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

const POINT_TOL: f64 = 1e-9;
const LIGHTLIKE_TOL: f64 = 1e-9;

/// Minkowski bilinear form of signature (−, +, +).
pub fn minkowski(a: &Vec3, b: &Vec3) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Vector `w` with `⟨w, x⟩ = det[a, b, x]` for all `x`.
pub fn minkowski_cross(a: &Vec3, b: &Vec3) -> Vec3 {
    let e = a.cross(b);
    Vec3::new(-e[0], e[1], e[2])
}

fn signature() -> Matrix3<f64> {
    Matrix3::from_diagonal(&Vec3::new(-1.0, 1.0, 1.0))
}

/// A point on the upper sheet of the hyperboloid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HPoint(Vec3);

impl HPoint {
    /// Validates and renormalizes raw coordinates.
    pub fn new(x0: f64, x1: f64, x2: f64) -> Result<Self> {
        Self::from_vector(Vec3::new(x0, x1, x2))
    }

    pub fn from_vector(v: Vec3) -> Result<Self> {
        if !v.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidPoint(format!("non-finite coordinates {v:?}")));
        }
        let q = minkowski(&v, &v);
        let scale = v[0] * v[0];
        if v[0] <= 0.0 || (q + 1.0).abs() > POINT_TOL * scale.max(1.0) {
            return Err(Error::InvalidPoint(format!(
                "⟨p,p⟩ = {q}, x0 = {} (expected −1 and x0 ≥ 1)",
                v[0]
            )));
        }
        Ok(Self(v / (-q).sqrt()))
    }

    /// Projects any future timelike vector onto the sheet.
    pub fn normalize(v: Vec3) -> Result<Self> {
        let q = minkowski(&v, &v);
        if v[0] <= 0.0 || q >= 0.0 {
            return Err(Error::InvalidPoint(format!(
                "not future timelike: {v:?}"
            )));
        }
        Ok(Self(v / (-q).sqrt()))
    }

    pub(crate) fn from_unchecked(v: Vec3) -> Self {
        Self(v)
    }

    pub fn origin() -> Self {
        Self(Vec3::new(1.0, 0.0, 0.0))
    }

    /// Point at distance `r` from the origin in direction `theta`.
    pub fn from_polar(r: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self(Vec3::new(r.cosh(), r.sinh() * c, r.sinh() * s))
    }

    pub fn coords(&self) -> &Vec3 {
        &self.0
    }

    pub fn distance(&self, other: &HPoint) -> Result<f64> {
        distance(self, other)
    }

    /// Coordinates in the Poincaré disk.
    pub fn to_poincare_disk(&self) -> (f64, f64) {
        let d = 1.0 + self.0[0];
        (self.0[1] / d, self.0[2] / d)
    }

    pub fn from_poincare_disk(u: f64, v: f64) -> Result<Self> {
        let r2 = u * u + v * v;
        if r2 >= 1.0 {
            return Err(Error::InvalidPoint(format!(
                "({u}, {v}) is outside the unit disk"
            )));
        }
        let d = 1.0 - r2;
        Ok(Self(Vec3::new((1.0 + r2) / d, 2.0 * u / d, 2.0 * v / d)))
    }

    /// Coordinates in the Klein disk, where geodesics are straight chords.
    pub fn to_klein(&self) -> (f64, f64) {
        (self.0[1] / self.0[0], self.0[2] / self.0[0])
    }

    pub fn from_klein(u: f64, v: f64) -> Result<Self> {
        let r2 = u * u + v * v;
        if r2 >= 1.0 {
            return Err(Error::InvalidPoint(format!(
                "({u}, {v}) is outside the unit disk"
            )));
        }
        let s = 1.0 / (1.0 - r2).sqrt();
        Ok(Self(Vec3::new(s, u * s, v * s)))
    }

    /// Polar angle of the point as seen from the origin.
    pub fn polar_angle(&self) -> f64 {
        self.0[2].atan2(self.0[1])
    }
}

/// Hyperbolic distance, `arccosh(−⟨p,q⟩)` evaluated through the chord
/// `⟨p−q, p−q⟩ = 4 sinh²(d/2)` to keep precision for nearby points.
pub fn distance(p: &HPoint, q: &HPoint) -> Result<f64> {
    let ip = minkowski(&p.0, &q.0);
    if ip > -1.0 + POINT_TOL {
        return Err(Error::InvalidPoint(format!("⟨p,q⟩ = {ip} > −1")));
    }
    let diff = p.0 - q.0;
    let chord2 = minkowski(&diff, &diff).max(0.0);
    Ok(2.0 * (chord2.sqrt() / 2.0).asinh())
}

/// An orientation-preserving isometry: a proper orthochronous Lorentz matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry(Matrix3<f64>);

impl Isometry {
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        let j = signature();
        let defect = (m.transpose() * j * m - j).abs().max();
        if defect > 1e-10 || m[(0, 0)] <= 0.0 || m.determinant() <= 0.0 {
            return Err(Error::Domain(format!(
                "matrix is not a proper orthochronous Lorentz transform (defect {defect:e})"
            )));
        }
        Ok(Self(m))
    }

    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self(Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c))
    }

    /// Translation by `s` along the geodesic through the origin in the x1 direction.
    pub fn boost_x(s: f64) -> Self {
        let (ch, sh) = (s.cosh(), s.sinh());
        Self(Matrix3::new(ch, sh, 0.0, sh, ch, 0.0, 0.0, 0.0, 1.0))
    }

    /// The pure translation taking the origin to `p`.
    pub fn translation_to(p: &HPoint) -> Self {
        let o = p.coords();
        let w = Vector3::new(0.0, o[1], o[2]);
        let mut m = Matrix3::identity();
        m[(0, 0)] = o[0];
        for i in 1..3 {
            m[(0, i)] = o[i];
            m[(i, 0)] = o[i];
            for j in 1..3 {
                m[(i, j)] += w[i] * w[j] / (1.0 + o[0]);
            }
        }
        Self(m)
    }

    pub(crate) fn from_columns_unchecked(c0: Vec3, c1: Vec3, c2: Vec3) -> Self {
        Self(Matrix3::from_columns(&[c0, c1, c2]))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        let j = signature();
        Self(j * self.0.transpose() * j)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Isometry) -> Self {
        Self(self.0 * other.0)
    }

    pub fn apply(&self, p: &HPoint) -> HPoint {
        let v = self.0 * p.0;
        // re-project to absorb rounding drift
        let q = minkowski(&v, &v);
        HPoint(v / (-q).sqrt())
    }

    pub fn apply_vector(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    pub fn apply_cycle(&self, s: &CyclePlane) -> CyclePlane {
        CyclePlane {
            normal: self.0 * s.normal,
            offset: s.offset,
            kind: s.kind,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CycleKind {
    Circle,
    Horocycle,
    Equidistant,
    Geodesic,
}

impl CycleKind {
    pub fn sigma(self) -> f64 {
        match self {
            CycleKind::Circle => -1.0,
            CycleKind::Horocycle => 0.0,
            CycleKind::Equidistant | CycleKind::Geodesic => 1.0,
        }
    }
}

/// A curve of constant geodesic curvature together with its convex side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CyclePlane {
    normal: Vec3,
    offset: f64,
    kind: CycleKind,
}

/// Offset `c` of the normalized plane of a cycle with curvature `kappa`.
pub fn offset_for_curvature(kappa: f64) -> (CycleKind, f64) {
    if (kappa - 1.0).abs() <= 1e-12 {
        (CycleKind::Horocycle, 1.0)
    } else if kappa > 1.0 {
        (CycleKind::Circle, kappa / (kappa * kappa - 1.0).sqrt())
    } else if kappa > 0.0 {
        (CycleKind::Equidistant, kappa / (1.0 - kappa * kappa).sqrt())
    } else {
        (CycleKind::Geodesic, 0.0)
    }
}

impl CyclePlane {
    /// Builds a cycle from an arbitrary plane `⟨p,v⟩ = c`, flipping `(v, c)`
    /// jointly when needed so that `{⟨p,v⟩ ≤ c}` is the convex side.
    pub fn from_plane(v: Vec3, c: f64) -> Result<Self> {
        if !v.iter().all(|x| x.is_finite()) || !c.is_finite() {
            return Err(Error::DegenerateCycle("non-finite plane".into()));
        }
        let n2 = v.norm_squared();
        if n2 == 0.0 {
            return Err(Error::DegenerateCycle("zero normal".into()));
        }
        let sigma = minkowski(&v, &v);
        if sigma.abs() < LIGHTLIKE_TOL * n2 {
            let (v, c) = if v[0] > 0.0 { (-v, -c) } else { (v, c) };
            if c <= 0.0 {
                return Err(Error::DegenerateCycle(
                    "lightlike plane does not meet the hyperboloid in a horocycle".into(),
                ));
            }
            // snap onto the light cone and absorb the scale into c = 1
            let sp = Vec3::new(0.0, v[1], v[2]);
            let r = sp.norm();
            let v = Vec3::new(-r, v[1], v[2]) / c;
            return Ok(Self {
                normal: v,
                offset: 1.0,
                kind: CycleKind::Horocycle,
            });
        }
        let scale = sigma.abs().sqrt();
        let (v, c) = (v / scale, c / scale);
        if sigma < 0.0 {
            let (v, c) = if v[0] > 0.0 { (-v, -c) } else { (v, c) };
            if c <= 1.0 {
                return Err(Error::DegenerateCycle(format!(
                    "circle plane needs |c| > 1 after normalization, got {c}"
                )));
            }
            Ok(Self {
                normal: v,
                offset: c,
                kind: CycleKind::Circle,
            })
        } else if c.abs() < 1e-12 {
            Ok(Self {
                normal: v,
                offset: 0.0,
                kind: CycleKind::Geodesic,
            })
        } else {
            let (v, c) = if c < 0.0 { (-v, -c) } else { (v, c) };
            Ok(Self {
                normal: v,
                offset: c,
                kind: CycleKind::Equidistant,
            })
        }
    }

    /// Circle of the given center and radius.
    pub fn circle(center: &HPoint, radius: f64) -> Result<Self> {
        if radius <= 0.0 {
            return Err(Error::DegenerateCycle(format!("radius {radius}")));
        }
        Self::from_plane(-center.coords(), radius.cosh())
    }

    /// Curve at signed distance `distance` from the geodesic with unit
    /// spacelike normal `n`; the convex side contains the geodesic.
    pub fn equidistant(n: Vec3, distance: f64) -> Result<Self> {
        Self::from_plane(n, distance.sinh())
    }

    /// The cycle of curvature `kappa` through the origin, tangent to the x2
    /// axis there, with its convex side towards −x1.
    pub fn through_origin(kappa: f64) -> Result<Self> {
        if kappa <= 0.0 {
            return Err(Error::DegenerateCycle(format!("curvature {kappa}")));
        }
        let (kind, c) = offset_for_curvature(kappa);
        let v = Vec3::new(-c, (c * c + kind.sigma()).sqrt(), 0.0);
        Ok(Self {
            normal: v,
            offset: c,
            kind,
        })
    }

    pub fn normal(&self) -> &Vec3 {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn kind(&self) -> CycleKind {
        self.kind
    }

    pub fn sigma(&self) -> f64 {
        self.kind.sigma()
    }

    /// Geodesic curvature of the cycle.
    pub fn curvature(&self) -> f64 {
        match self.kind {
            CycleKind::Horocycle => 1.0,
            CycleKind::Geodesic => 0.0,
            _ => self.offset.abs() / (self.offset * self.offset + self.sigma()).sqrt(),
        }
    }

    /// `⟨p,v⟩ − c`: negative inside the convex side, zero on the curve.
    pub fn level(&self, p: &HPoint) -> f64 {
        minkowski(p.coords(), &self.normal) - self.offset
    }

    pub fn contains(&self, p: &HPoint, tol: f64) -> bool {
        self.level(p) <= tol
    }

    /// Unit outward normal (a tangent vector of the sheet) at a curve point.
    pub fn outward_normal(&self, p: &HPoint) -> Vec3 {
        let ip = minkowski(p.coords(), &self.normal);
        let w = self.normal + ip * p.coords();
        w / minkowski(&w, &w).sqrt()
    }

    /// Unit tangent at a curve point, oriented with the convex side on the left.
    pub fn unit_tangent(&self, p: &HPoint) -> Vec3 {
        minkowski_cross(p.coords(), &self.outward_normal(p))
    }

    /// Isometry carrying the standard cycle of this kind onto `self`.
    pub fn frame(&self) -> Isometry {
        let v = self.normal;
        match self.kind {
            CycleKind::Circle => {
                let center = HPoint::from_unchecked(-v);
                Isometry::translation_to(&center)
            }
            CycleKind::Horocycle => {
                let ell = -v;
                let s = ell[0].ln();
                let dir = Vec3::new(0.0, ell[1], ell[2]) / ell[0];
                let f0 = Vec3::new(s.cosh(), s.sinh() * dir[1], s.sinh() * dir[2]);
                let f1 = ell - f0;
                let f2 = minkowski_cross(&f0, &f1);
                Isometry::from_columns_unchecked(f0, f1, f2)
            }
            CycleKind::Equidistant | CycleKind::Geodesic => {
                let e0 = Vec3::new(1.0, 0.0, 0.0);
                let w = e0 - minkowski(&e0, &v) * v;
                let f0 = w / (-minkowski(&w, &w)).sqrt();
                let f1 = minkowski_cross(&v, &f0);
                Isometry::from_columns_unchecked(f0, f1, v)
            }
        }
    }

    /// Speed of the standard parameterization (arc length per unit parameter).
    pub fn speed(&self) -> f64 {
        match self.kind {
            CycleKind::Circle => (self.offset * self.offset - 1.0).sqrt(),
            CycleKind::Horocycle => 1.0,
            CycleKind::Equidistant | CycleKind::Geodesic => {
                (1.0 + self.offset * self.offset).sqrt()
            }
        }
    }

    fn standard_point(&self, t: f64) -> Vec3 {
        match self.kind {
            CycleKind::Circle => {
                let ch = self.offset;
                let sh = (ch * ch - 1.0).sqrt();
                Vec3::new(ch, sh * t.cos(), sh * t.sin())
            }
            CycleKind::Horocycle => Vec3::new(1.0 + 0.5 * t * t, 0.5 * t * t, -t),
            CycleKind::Equidistant | CycleKind::Geodesic => {
                let sh = self.offset;
                let ch = (1.0 + sh * sh).sqrt();
                Vec3::new(ch * t.cosh(), -ch * t.sinh(), sh)
            }
        }
    }

    /// Point with parameter `t`; increasing `t` runs with the convex side on the left.
    pub fn point_at(&self, t: f64) -> HPoint {
        self.frame().apply(&HPoint::from_unchecked(self.standard_point(t)))
    }

    /// Parameter of a point lying on the curve (inverse of [`Self::point_at`]).
    pub fn parameter_of(&self, p: &HPoint) -> f64 {
        let q = self.frame().inverse().apply(p);
        let q = q.coords();
        match self.kind {
            CycleKind::Circle => q[2].atan2(q[1]),
            CycleKind::Horocycle => -q[2],
            CycleKind::Equidistant | CycleKind::Geodesic => {
                let ch = (1.0 + self.offset * self.offset).sqrt();
                (-q[1] / ch).asinh()
            }
        }
    }

    /// Length of the arc running from `from` to `to` with the convex side on the left.
    pub fn arc_length(&self, from: &HPoint, to: &HPoint) -> f64 {
        let t0 = self.parameter_of(from);
        let t1 = self.parameter_of(to);
        let dt = match self.kind {
            CycleKind::Circle => (t1 - t0).rem_euclid(std::f64::consts::TAU),
            _ => t1 - t0,
        };
        dt * self.speed()
    }

    /// Distance from the origin to the curve along the ray in direction
    /// `theta`, assuming the origin lies strictly inside the convex side.
    /// Returns `None` when the ray never leaves the region.
    pub fn radial_exit(&self, theta: f64) -> Option<f64> {
        let (s, c) = theta.sin_cos();
        let a = -self.normal[0];
        let b = self.normal[1] * c + self.normal[2] * s;
        // a cosh r + b sinh r = offset, with y = e^r:
        // (a + b) y² − 2 offset y + (a − b) = 0
        let qa = a + b;
        let qb = -2.0 * self.offset;
        let qc = a - b;
        let mut best: Option<f64> = None;
        let mut consider = |y: f64| {
            if y > 1.0 && y.is_finite() {
                let r = y.ln();
                best = Some(best.map_or(r, |b: f64| b.min(r)));
            }
        };
        if qa.abs() <= 1e-14 * (qb.abs() + qc.abs()) {
            consider(-qc / qb);
        } else {
            let disc = qb * qb - 4.0 * qa * qc;
            if disc >= 0.0 {
                let sq = disc.sqrt();
                let q = -0.5 * (qb + qb.signum() * sq);
                consider(q / qa);
                if q != 0.0 {
                    consider(qc / q);
                }
            }
        }
        best
    }

    /// The curve point whose outward normal is parallel to the ray direction
    /// `theta` seen from the origin: the contact point of the supporting
    /// geodesic perpendicular to that ray. Returns the point and the signed
    /// distance from the origin to that geodesic.
    pub fn support_point(&self, theta: f64) -> Option<(HPoint, f64)> {
        let (sn, cs) = theta.sin_cos();
        let v = self.normal;
        let c = self.offset;
        if c == 0.0 {
            return None;
        }
        let big_c = (self.sigma() + c * c).sqrt();
        let a = v[1] * cs + v[2] * sn;
        let b = -v[0];
        let qa = a + b;
        let qb = -2.0 * big_c;
        let qc = a - b;
        let mut roots = Vec::with_capacity(2);
        if qa.abs() <= 1e-14 * (qb.abs() + qc.abs()) {
            roots.push(-qc / qb);
        } else {
            let disc = qb * qb - 4.0 * qa * qc;
            if disc < 0.0 {
                return None;
            }
            let sq = disc.sqrt();
            let q = -0.5 * (qb + qb.signum() * sq);
            roots.push(q / qa);
            if q != 0.0 {
                roots.push(qc / q);
            }
        }
        roots
            .into_iter()
            .filter(|y| *y > 0.0 && y.is_finite())
            .filter_map(|y| {
                let s = y.ln();
                let n = Vec3::new(s.sinh(), s.cosh() * cs, s.cosh() * sn);
                let p = (big_c * n - v) / c;
                (p[0] > 0.0).then(|| (HPoint::from_unchecked(p / (-minkowski(&p, &p)).sqrt()), s))
            })
            .next()
    }

    /// Ideal-boundary directions reached by the convex side, as an arc
    /// `(center, half_width)` of angles; `None` when the region is bounded.
    pub(crate) fn ideal_arc(&self) -> Option<(f64, f64)> {
        // ideal point ξ(α) = (1, cos α, sin α) is reached iff ⟨ξ, v⟩ ≤ 0
        let v = self.normal;
        let rho = v[1].hypot(v[2]);
        if rho == 0.0 {
            return None;
        }
        let ratio = v[0] / rho;
        if ratio < -1.0 {
            return None;
        }
        let beta = v[2].atan2(v[1]);
        let half = ratio.clamp(-1.0, 1.0).acos();
        Some((beta + std::f64::consts::PI, std::f64::consts::PI - half))
    }
}

/// Intersection of two cycles on the upper sheet: zero, one (tangency) or two points.
pub fn intersect_cycles(a: &CyclePlane, b: &CyclePlane) -> Result<Vec<HPoint>> {
    // Euclidean duals: na·p = ca, nb·p = cb
    let j = Vec3::new(-1.0, 1.0, 1.0);
    let na = a.normal.component_mul(&j);
    let nb = b.normal.component_mul(&j);
    let (ca, cb) = (a.offset, b.offset);
    let d = na.cross(&nb);
    let dn = d.norm();
    if dn <= 1e-12 * na.norm() * nb.norm() {
        // parallel planes
        let ratio = nb.norm() / na.norm();
        let same_dir = na.dot(&nb) > 0.0;
        let sign = if same_dir { 1.0 } else { -1.0 };
        if (cb - sign * ratio * ca).abs() <= 1e-12 * (1.0 + cb.abs()) {
            return Err(Error::IdenticalCycles);
        }
        return Ok(Vec::new());
    }
    let d = d / dn;
    let g11 = na.dot(&na);
    let g12 = na.dot(&nb);
    let g22 = nb.dot(&nb);
    let det = g11 * g22 - g12 * g12;
    let alpha = (ca * g22 - cb * g12) / det;
    let beta = (cb * g11 - ca * g12) / det;
    let p0 = alpha * na + beta * nb;
    // ⟨p0 + t d, p0 + t d⟩ = −1
    let qa = minkowski(&d, &d);
    let qb = 2.0 * minkowski(&p0, &d);
    let qc = minkowski(&p0, &p0) + 1.0;
    let scale = 1.0 + p0.norm_squared();
    let mut ts = Vec::new();
    if qa.abs() <= 1e-14 {
        if qb.abs() > 1e-14 {
            ts.push(-qc / qb);
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        let tol = 1e-12 * scale * scale;
        if disc < -tol {
            return Ok(Vec::new());
        } else if disc <= tol {
            ts.push(-qb / (2.0 * qa));
        } else {
            let sq = disc.sqrt();
            let q = -0.5 * (qb + qb.signum() * sq);
            ts.push(q / qa);
            ts.push(qc / q);
        }
    }
    let mut out = Vec::new();
    for t in ts {
        let p = p0 + t * d;
        if p[0] <= 0.0 {
            continue;
        }
        let q = minkowski(&p, &p);
        if q >= 0.0 {
            continue;
        }
        out.push(HPoint::from_unchecked(p / (-q).sqrt()));
    }
    Ok(out)
}
