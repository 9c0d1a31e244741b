//! λ-convex lunes and polygons: intersections of convex regions bounded by
//! cycles of a common curvature λ, measured on the unit-curvature plane.
//!
//! Area is taken from Gauss–Bonnet, `A = λL + Σ ext − 2π`, and cross-checked
//! by polar quadrature `∫ (cosh ρ(θ) − 1) dθ` of the radial function around
//! an interior point.

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hyperbolic::{
    intersect_cycles, minkowski, offset_for_curvature, CycleKind, CyclePlane, HPoint, Isometry,
    Vec3,
};
use crate::support::SupportProfile;

const CURVATURE_TOL: f64 = 1e-10;
const INSIDE_TOL: f64 = 1e-9;
const VERTEX_MERGE: f64 = 1e-9;
const QUAD_PANELS: usize = 8;
const QUAD_ORDER: usize = 24;
/// Step of the central difference used for `g″` on arc windows.
const PROFILE_DELTA: f64 = 1e-5;

fn gauss(order: usize) -> GaussLegendre {
    GaussLegendre::new(NonZeroUsize::new(order).expect("positive order"))
}

/// Angle between two unit tangent vectors at `p`.
fn tangent_angle(p: &HPoint, a: &Vec3, b: &Vec3) -> f64 {
    let sin = Matrix3::from_columns(&[*p.coords(), *a, *b]).determinant().abs();
    sin.atan2(minkowski(a, b))
}

/// Symmetric λ-lune centered at the origin with vertices `(cosh a, 0, ±sinh a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lune {
    pub lambda: f64,
    /// Distance between the two vertices.
    pub separation: f64,
    /// `arcs[0]` bounds the `x1 > 0` side, running from the lower vertex to the upper.
    pub arcs: [CyclePlane; 2],
    /// `[lower, upper]`.
    pub vertices: [HPoint; 2],
    pub exterior_angle: f64,
    pub arc_lengths: [f64; 2],
    pub length: f64,
    pub area: f64,
    pub quadrature_area: f64,
}

/// Half the vertex distance at which the lune becomes the full circle
/// (supercritical only).
pub fn circle_half_separation(lambda: f64) -> Option<f64> {
    (lambda > 1.0).then(|| (1.0 / lambda).atanh())
}

/// Builds the symmetric λ-lune whose vertices are `separation` apart.
pub fn build_lune(lambda: f64, separation: f64) -> Result<Lune> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("λ = {lambda} must be positive")));
    }
    if !(separation > 0.0 && separation.is_finite()) {
        return Err(Error::Domain(format!("separation {separation} must be positive")));
    }
    let mut a = 0.5 * separation;
    let mut full = false;
    if let Some(rho) = circle_half_separation(lambda) {
        if a > rho * (1.0 + 1e-12) {
            return Err(Error::NoLune(format!(
                "vertex separation {separation} exceeds the circle diameter {}",
                2.0 * rho
            )));
        }
        if a >= rho * (1.0 - 1e-12) {
            a = rho;
            full = true;
        }
    }
    let (kind, c) = offset_for_curvature(lambda);
    let v0 = if full { -1.0 } else { -c / a.cosh() };
    let v1 = if full { 0.0 } else { (v0 * v0 + kind.sigma()).max(0.0).sqrt() };
    let right = CyclePlane::from_plane(Vec3::new(v0, v1, 0.0), c)?;
    let left = CyclePlane::from_plane(Vec3::new(v0, -v1, 0.0), c)?;
    let lower = HPoint::new(a.cosh(), 0.0, -a.sinh())?;
    let upper = HPoint::new(a.cosh(), 0.0, a.sinh())?;
    let arc_lengths = [
        right.arc_length(&lower, &upper),
        left.arc_length(&upper, &lower),
    ];
    let length = arc_lengths[0] + arc_lengths[1];
    let exterior_angle = tangent_angle(&upper, &right.unit_tangent(&upper), &left.unit_tangent(&upper));
    let area = lambda * length + 2.0 * exterior_angle - TAU;
    let arcs = [right, left];
    let windows = [
        (0, -0.5 * PI, 0.5 * PI),
        (1, 0.5 * PI, 1.5 * PI),
    ];
    let quadrature_area = polar_area(&arcs, &windows)?;
    Ok(Lune {
        lambda,
        separation,
        arcs,
        vertices: [lower, upper],
        exterior_angle,
        arc_lengths,
        length,
        area,
        quadrature_area,
    })
}

/// The λ-lune of prescribed length, by bisection on the separation.
pub fn lune_for_length(lambda: f64, length: f64) -> Result<Lune> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("λ = {lambda} must be positive")));
    }
    let top = circle_half_separation(lambda);
    if let Some(rho) = top {
        let l_max = TAU * rho.sinh();
        if !(length > 0.0 && length <= l_max * (1.0 + 1e-12)) {
            return Err(Error::Domain(format!(
                "length {length} outside (0, {l_max}] for λ = {lambda}"
            )));
        }
    } else if !(length > 0.0 && length.is_finite()) {
        return Err(Error::Domain(format!("length {length} must be positive")));
    }
    let len = |a: f64| build_lune(lambda, 2.0 * a).map(|l| l.length);
    let mut lo = 0.0;
    let mut hi = match top {
        Some(rho) => rho,
        None => {
            let mut hi = 1.0;
            while len(hi)? < length {
                hi *= 2.0;
                if hi > 300.0 {
                    return Err(Error::Domain(format!("length {length} too large")));
                }
            }
            hi
        }
    };
    if let Some(rho) = top {
        if len(rho)? <= length {
            return build_lune(lambda, 2.0 * rho);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if len(mid)? < length {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let a = if (len(lo)? - length).abs() < (len(hi)? - length).abs() && lo > 0.0 { lo } else { hi };
    build_lune(lambda, 2.0 * a)
}

/// One boundary arc of a polygon: cycle index and its end points.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Arc {
    cycle: usize,
    start: usize,
    end: usize,
}

/// Intersection of finitely many λ-convex regions.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaPolygon {
    pub lambda: f64,
    /// Contributing cycles in counterclockwise boundary order.
    pub arcs: Vec<CyclePlane>,
    /// `vertices[i]` is where `arcs[i]` ends and `arcs[i + 1]` begins.
    pub vertices: Vec<HPoint>,
    pub exterior_angles: Vec<f64>,
    pub arc_lengths: Vec<f64>,
    pub length: f64,
    pub area: f64,
    pub quadrature_area: f64,
    /// Interior point used as origin for radial and support functions.
    pub center: HPoint,
    /// Indices of input cycles that contribute no arc.
    pub dropped: Vec<usize>,
}

/// Whether the common ideal boundary of the regions is nonempty.
fn reaches_infinity(cycles: &[CyclePlane]) -> bool {
    let arcs: Vec<(f64, f64)> = match cycles.iter().map(|c| c.ideal_arc()).collect() {
        Some(a) => a,
        None => return false,
    };
    let within = |t: f64, (c, h): (f64, f64)| {
        let d = (t - c).rem_euclid(TAU);
        d.min(TAU - d) <= h + 1e-12
    };
    // a nonempty intersection of closed arcs contains an endpoint of one of them
    arcs.iter()
        .flat_map(|&(c, h)| [c - h, c + h])
        .any(|t| arcs.iter().all(|&a| within(t, a)))
}

fn klein_normal_angle(cycle: &CyclePlane, p: &HPoint) -> f64 {
    let t = cycle.unit_tangent(p);
    let x = p.coords();
    let dk = (t[1] * x[0] - x[1] * t[0], t[2] * x[0] - x[2] * t[0]);
    // outward normal lies to the right of the counterclockwise tangent
    (-dk.0).atan2(dk.1)
}

/// `∫ (cosh ρ(θ) − 1) dθ` over windows `(cycle, from, to)` in which a single
/// cycle bounds the region seen from the origin.
fn polar_area(cycles: &[CyclePlane], windows: &[(usize, f64, f64)]) -> Result<f64> {
    let quad = gauss(QUAD_ORDER);
    let mut total = 0.0;
    for &(i, a, b) in windows {
        let w = (b - a) / QUAD_PANELS as f64;
        for p in 0..QUAD_PANELS {
            let lo = a + p as f64 * w;
            let mut failed = false;
            total += quad.integrate(lo, lo + w, |t| match cycles[i].radial_exit(t) {
                Some(r) => r.cosh() - 1.0,
                None => {
                    failed = true;
                    0.0
                }
            });
            if failed {
                return Err(Error::UnboundedRegion);
            }
        }
    }
    Ok(total)
}

/// Builds the polygon bounded by the given regions `{⟨p,v⟩ ≤ c}`.
pub fn polygon_from_regions(cycles: &[CyclePlane]) -> Result<LambdaPolygon> {
    if cycles.len() < 2 {
        return Err(Error::Domain("a polygon needs at least two cycles".into()));
    }
    let lambda = cycles[0].curvature();
    for (i, c) in cycles.iter().enumerate().skip(1) {
        if (c.curvature() - lambda).abs() > CURVATURE_TOL * lambda.max(1.0) {
            return Err(Error::CurvatureMismatch {
                expected: lambda,
                found: c.curvature(),
                index: i,
            });
        }
    }
    if reaches_infinity(cycles) {
        return Err(Error::UnboundedRegion);
    }
    let mut raw = Vec::new();
    for i in 0..cycles.len() {
        for j in i + 1..cycles.len() {
            for p in intersect_cycles(&cycles[i], &cycles[j])? {
                if cycles.iter().all(|c| c.contains(&p, INSIDE_TOL)) {
                    raw.push(p);
                }
            }
        }
    }
    if raw.is_empty() {
        return Err(Error::EmptyRegion("no boundary vertices".into()));
    }
    let sum = raw.iter().fold(Vec3::zeros(), |acc, p| acc + p.coords());
    let center = HPoint::normalize(sum)?;
    if cycles.iter().any(|c| c.level(&center) >= -1e-12) {
        return Err(Error::EmptyRegion("region has empty interior".into()));
    }
    let to_origin = Isometry::translation_to(&center).inverse();
    let local: Vec<CyclePlane> = cycles.iter().map(|c| to_origin.apply_cycle(c)).collect();

    // vertices in angular order around the center, merged when coincident
    let mut verts: Vec<(f64, HPoint)> = raw
        .iter()
        .map(|p| {
            let q = to_origin.apply(p);
            (q.polar_angle(), q)
        })
        .collect();
    verts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, HPoint)> = Vec::new();
    for (t, p) in verts {
        if let Some((_, q)) = merged.last() {
            if q.distance(&p).unwrap_or(0.0) < VERTEX_MERGE {
                continue;
            }
        }
        merged.push((t, p));
    }
    if merged.len() > 1 && merged[0].1.distance(&merged[merged.len() - 1].1).unwrap_or(0.0) < VERTEX_MERGE {
        merged.pop();
    }
    if merged.len() < 2 {
        return Err(Error::EmptyRegion("fewer than two distinct vertices".into()));
    }

    // the active cycle between consecutive vertices is the nearest exit
    let m = merged.len();
    let mut arcs: Vec<Arc> = Vec::with_capacity(m);
    for s in 0..m {
        let e = (s + 1) % m;
        let a = merged[s].0;
        let mut b = merged[e].0;
        if b <= a {
            b += TAU;
        }
        let mid = 0.5 * (a + b);
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in local.iter().enumerate() {
            if let Some(r) = c.radial_exit(mid) {
                if best.is_none_or(|(_, rb)| r < rb) {
                    best = Some((i, r));
                }
            }
        }
        let (cycle, _) = best.ok_or(Error::UnboundedRegion)?;
        match arcs.last_mut() {
            Some(last) if last.cycle == cycle => last.end = e,
            _ => arcs.push(Arc { cycle, start: s, end: e }),
        }
    }
    if arcs.len() > 1 && arcs[0].cycle == arcs[arcs.len() - 1].cycle {
        let last = arcs.pop().unwrap();
        arcs[0].start = last.start;
    }
    if arcs.len() < 2 {
        return Err(Error::EmptyRegion("boundary is a single cycle".into()));
    }

    let n = arcs.len();
    let mut arc_lengths = Vec::with_capacity(n);
    let mut exterior_angles = Vec::with_capacity(n);
    let mut windows = Vec::with_capacity(n);
    for (i, arc) in arcs.iter().enumerate() {
        let c = &local[arc.cycle];
        let (p, q) = (&merged[arc.start].1, &merged[arc.end].1);
        arc_lengths.push(c.arc_length(p, q));
        let next = &local[arcs[(i + 1) % n].cycle];
        exterior_angles.push(tangent_angle(q, &c.unit_tangent(q), &next.unit_tangent(q)));
        let a = merged[arc.start].0;
        let mut b = merged[arc.end].0;
        if b <= a {
            b += TAU;
        }
        windows.push((arc.cycle, a, b));
    }
    let length: f64 = arc_lengths.iter().sum();
    let area = lambda * length + exterior_angles.iter().sum::<f64>() - TAU;
    let quadrature_area = polar_area(&local, &windows)?;
    let used: Vec<usize> = arcs.iter().map(|a| a.cycle).collect();
    let back = Isometry::translation_to(&center);
    Ok(LambdaPolygon {
        lambda,
        arcs: used.iter().map(|&i| cycles[i]).collect(),
        vertices: arcs.iter().map(|a| back.apply(&merged[a.end].1)).collect(),
        exterior_angles,
        arc_lengths,
        length,
        area,
        quadrature_area,
        center,
        dropped: (0..cycles.len()).filter(|i| !used.contains(i)).collect(),
    })
}

impl Lune {
    pub fn as_polygon(&self) -> Result<LambdaPolygon> {
        polygon_from_regions(&self.arcs)
    }

    /// Whether both arcs lie on the same circle.
    pub fn is_circle(&self) -> bool {
        self.arcs[0] == self.arcs[1]
    }

    /// Support profile about the lune's center on `n` uniform angles; the
    /// four switch angles between arc and corner windows are its breaks.
    pub fn support_profile(&self, n: usize) -> Result<SupportProfile> {
        if self.is_circle() {
            let rho = circle_half_separation(self.lambda).expect("circle lune is supercritical");
            return SupportProfile::from_support(vec![rho; n], 1.0);
        }
        let arcs = [
            (self.arcs[0], self.vertices[0], self.vertices[1]),
            (self.arcs[1], self.vertices[1], self.vertices[0]),
        ];
        arcs_support_profile(&arcs, n)
    }

    pub fn export(&self) -> ShapeExport {
        ShapeExport::new(
            "lune",
            self.lambda,
            &self.arcs,
            &self.vertices,
            vec![self.exterior_angle; 2],
            self.arc_lengths.to_vec(),
            self.length,
            self.area,
        )
    }

    /// Poincaré-disk samples of the boundary, `per_arc` points per arc.
    pub fn polyline(&self, per_arc: usize) -> Vec<(f64, f64)> {
        let arcs = [
            (self.arcs[0], self.vertices[0], self.vertices[1]),
            (self.arcs[1], self.vertices[1], self.vertices[0]),
        ];
        sample_arcs(&arcs, per_arc)
    }
}

pub fn lune_support_profile(lune: &Lune, n: usize) -> Result<SupportProfile> {
    lune.support_profile(n)
}

impl LambdaPolygon {
    fn arc_triples(&self) -> Vec<(CyclePlane, HPoint, HPoint)> {
        let n = self.arcs.len();
        (0..n)
            .map(|i| (self.arcs[i], self.vertices[(i + n - 1) % n], self.vertices[i]))
            .collect()
    }

    /// Support profile about [`Self::center`].
    pub fn support_profile(&self, n: usize) -> Result<SupportProfile> {
        self.support_profile_about(&self.center, n)
    }

    /// Support profile about an interior point `origin`.
    pub fn support_profile_about(&self, origin: &HPoint, n: usize) -> Result<SupportProfile> {
        if self.arcs.iter().any(|c| c.level(origin) >= 0.0) {
            return Err(Error::Domain("support origin must be interior".into()));
        }
        let to_origin = Isometry::translation_to(origin).inverse();
        let local: Vec<_> = self
            .arc_triples()
            .into_iter()
            .map(|(c, p, q)| (to_origin.apply_cycle(&c), to_origin.apply(&p), to_origin.apply(&q)))
            .collect();
        arcs_support_profile(&local, n)
    }

    /// Re-measures the image under an isometry.
    pub fn transformed(&self, iso: &Isometry) -> Result<LambdaPolygon> {
        let cycles: Vec<CyclePlane> = self.arcs.iter().map(|c| iso.apply_cycle(c)).collect();
        polygon_from_regions(&cycles)
    }

    pub fn export(&self) -> ShapeExport {
        ShapeExport::new(
            "polygon",
            self.lambda,
            &self.arcs,
            &self.vertices,
            self.exterior_angles.clone(),
            self.arc_lengths.clone(),
            self.length,
            self.area,
        )
    }

    pub fn polyline(&self, per_arc: usize) -> Vec<(f64, f64)> {
        sample_arcs(&self.arc_triples(), per_arc)
    }

    pub fn min_arc_fraction(&self) -> f64 {
        self.arc_lengths.iter().cloned().fold(f64::INFINITY, f64::min) / self.length
    }
}

fn sample_arcs(arcs: &[(CyclePlane, HPoint, HPoint)], per_arc: usize) -> Vec<(f64, f64)> {
    let per_arc = per_arc.max(2);
    let mut out = Vec::with_capacity(arcs.len() * per_arc + 1);
    for (c, p, q) in arcs {
        let t0 = c.parameter_of(p);
        let mut t1 = c.parameter_of(q);
        if c.kind() == CycleKind::Circle && t1 <= t0 {
            t1 += TAU;
        }
        for s in 0..per_arc {
            let t = t0 + (t1 - t0) * s as f64 / per_arc as f64;
            out.push(c.point_at(t).to_poincare_disk());
        }
    }
    if let Some(first) = out.first().copied() {
        out.push(first);
    }
    out
}

/// Support profile of an origin-centered polygon given by counterclockwise
/// arcs `(cycle, start, end)`.
fn arcs_support_profile(arcs: &[(CyclePlane, HPoint, HPoint)], n: usize) -> Result<SupportProfile> {
    let m = arcs.len();
    // arc i occupies normal angles [start_i, end_i]; vertex i (end of arc i)
    // occupies [end_i, start_{i+1}]
    let mut spans = Vec::with_capacity(m);
    for (c, p, q) in arcs {
        let a = klein_normal_angle(c, p);
        let mut b = klein_normal_angle(c, q);
        if b < a {
            b += TAU;
        }
        spans.push((a, b));
    }
    let mut breaks = Vec::with_capacity(2 * m);
    for &(a, b) in &spans {
        breaks.push(a.rem_euclid(TAU));
        breaks.push(b.rem_euclid(TAU));
    }
    let klein = |p: &HPoint| p.to_klein();
    let mut g = Vec::with_capacity(n);
    let mut g1 = Vec::with_capacity(n);
    let mut g2 = Vec::with_capacity(n);
    for j in 0..n {
        let t = TAU * j as f64 / n as f64;
        let (s, cs) = t.sin_cos();
        let on_arc = spans
            .iter()
            .position(|&(a, b)| (t - a).rem_euclid(TAU) <= b - a);
        let (k, second) = match on_arc {
            Some(i) => {
                let c = &arcs[i].0;
                let at = |theta: f64| -> Result<(f64, f64)> {
                    c.support_point(theta)
                        .map(|(p, _)| klein(&p))
                        .ok_or_else(|| Error::Domain(format!("no support point at θ = {theta}")))
                };
                let k0 = at(t)?;
                let kp = at(t + PROFILE_DELTA)?;
                let km = at(t - PROFILE_DELTA)?;
                let dk = (
                    (kp.0 - km.0) / (2.0 * PROFILE_DELTA),
                    (kp.1 - km.1) / (2.0 * PROFILE_DELTA),
                );
                // g″ = K′·u⊥ − K·u
                let second = -dk.0 * s + dk.1 * cs - (k0.0 * cs + k0.1 * s);
                (k0, Some(second))
            }
            None => {
                let i = spans
                    .iter()
                    .enumerate()
                    .min_by(|x, y| {
                        let dx = (t - x.1 .1).rem_euclid(TAU);
                        let dy = (t - y.1 .1).rem_euclid(TAU);
                        dx.total_cmp(&dy)
                    })
                    .map(|(i, _)| i)
                    .expect("at least one arc");
                (klein(&arcs[i].2), None)
            }
        };
        let gj = k.0 * cs + k.1 * s;
        g.push(gj);
        g1.push(-k.0 * s + k.1 * cs);
        g2.push(second.unwrap_or(-gj));
    }
    SupportProfile::from_contact(g, g1, g2, 1.0, breaks)
}

/// Cycle of curvature λ supporting the origin-side region at distance `r`
/// along the ray `phi`.
fn supporting_cycle(lambda: f64, phi: f64, r: f64) -> Result<CyclePlane> {
    let base = CyclePlane::through_origin(lambda)?;
    let iso = Isometry::rotation(phi).compose(&Isometry::boost_x(r));
    Ok(iso.apply_cycle(&base))
}

/// Samples attempted by [`random_polygon`] before giving up.
pub const MAX_ATTEMPTS: usize = 500;
/// Generated polygons reject arcs shorter than this fraction of the length.
pub const MIN_ARC_FRACTION: f64 = 1e-3;

/// Seeded random λ-polygon with exactly `n_arcs` contributing arcs.
pub fn random_polygon(lambda: f64, n_arcs: usize, seed: u64) -> Result<LambdaPolygon> {
    if n_arcs < 2 {
        return Err(Error::Domain("a polygon needs at least two arcs".into()));
    }
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("λ = {lambda} must be positive")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reach = match circle_half_separation(lambda) {
        Some(rho) => rho.min(1.5),
        None => 1.5,
    };
    for attempt in 0..MAX_ATTEMPTS {
        // many-arc samples often leave a cycle redundant, so offsets and
        // directions drift toward a symmetric configuration as attempts accumulate
        let tighten = attempt as f64 / MAX_ATTEMPTS as f64;
        let jitter = 0.35 * (1.0 - tighten);
        let shared = rng.random_range(0.1..1.0);
        let turn = rng.random_range(0.0..TAU);
        let cycles: Result<Vec<CyclePlane>> = (0..n_arcs)
            .map(|i| {
                let phi = turn + TAU * (i as f64 + rng.random_range(-jitter..=jitter)) / n_arcs as f64;
                let own: f64 = rng.random_range(0.1..1.0);
                let r = reach * (own + tighten * (shared - own));
                supporting_cycle(lambda, phi, r)
            })
            .collect();
        let Ok(cycles) = cycles else { continue };
        match polygon_from_regions(&cycles) {
            Ok(p) if p.dropped.is_empty() && p.min_arc_fraction() >= MIN_ARC_FRACTION => {
                return Ok(p)
            }
            _ => continue,
        }
    }
    Err(Error::Generation {
        attempts: MAX_ATTEMPTS,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CycleExport {
    pub kind: CycleKind,
    pub normal: [f64; 3],
    pub offset: f64,
    pub curvature: f64,
}

/// Machine-readable description of a lune or polygon.
#[derive(Debug, Clone, Serialize)]
pub struct ShapeExport {
    pub shape: &'static str,
    pub lambda: f64,
    pub cycles: Vec<CycleExport>,
    pub vertices: Vec<[f64; 3]>,
    pub exterior_angles: Vec<f64>,
    pub arc_lengths: Vec<f64>,
    pub length: f64,
    pub area: f64,
}

impl ShapeExport {
    #[allow(clippy::too_many_arguments)]
    fn new(
        shape: &'static str,
        lambda: f64,
        cycles: &[CyclePlane],
        vertices: &[HPoint],
        exterior_angles: Vec<f64>,
        arc_lengths: Vec<f64>,
        length: f64,
        area: f64,
    ) -> Self {
        Self {
            shape,
            lambda,
            cycles: cycles
                .iter()
                .map(|c| CycleExport {
                    kind: c.kind(),
                    normal: [c.normal()[0], c.normal()[1], c.normal()[2]],
                    offset: c.offset(),
                    curvature: c.curvature(),
                })
                .collect(),
            vertices: vertices
                .iter()
                .map(|p| [p.coords()[0], p.coords()[1], p.coords()[2]])
                .collect(),
            exterior_angles,
            arc_lengths,
            length,
            area,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Writes `u,v` Poincaré-disk samples under a versioned header.
pub fn write_polyline_csv<W: Write>(points: &[(f64, f64)], mut out: W) -> Result<()> {
    writeln!(out, "# hyperlune boundary-polyline v1")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["u", "v"])?;
    for (u, v) in points {
        w.write_record(&[u.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::reverse_bound;

    #[test]
    fn lune_gauss_bonnet_and_quadrature() {
        for (lambda, sep) in [(2f64.sqrt(), 1.0), (1.0, 1.5), (0.5, 2.0), (3.0, 0.4)] {
            let l = build_lune(lambda, sep).unwrap();
            let gb = -l.area + lambda * l.length + 2.0 * l.exterior_angle - TAU;
            assert!(gb.abs() < 1e-8);
            assert!((l.area - l.quadrature_area).abs() < 1e-8, "{} vs {}", l.area, l.quadrature_area);
            assert!((l.arc_lengths[0] - l.arc_lengths[1]).abs() < 1e-10);
            assert!(l.exterior_angle > 0.0 && l.exterior_angle < PI);
        }
    }

    #[test]
    fn lune_arcs_have_curvature_lambda() {
        for lambda in [0.3, 1.0, 2.5] {
            let l = build_lune(lambda, 0.6).unwrap();
            for c in &l.arcs {
                assert!((c.curvature() - lambda).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn full_separation_gives_the_circle() {
        let lambda = 2f64.sqrt();
        let rho = circle_half_separation(lambda).unwrap();
        let l = build_lune(lambda, 2.0 * rho).unwrap();
        assert!(l.is_circle());
        assert!((l.length - TAU).abs() < 1e-9);
        assert!((l.area - TAU * (2f64.sqrt() - 1.0)).abs() < 1e-9);
        assert!(matches!(build_lune(lambda, 2.0 * rho + 0.1), Err(Error::NoLune(_))));
    }

    #[test]
    fn lune_is_sharp() {
        for lambda in [0.7, 1.0, 2.0] {
            let l = build_lune(lambda, 0.9).unwrap();
            let b = reverse_bound(lambda, 1.0, l.length).unwrap().bound;
            assert!((l.area - b).abs() < 1e-9, "λ={lambda}: {} vs {b}", l.area);
        }
    }

    #[test]
    fn lune_for_length_hits_target() {
        let l = lune_for_length(2f64.sqrt(), 2.0).unwrap();
        assert!((l.length - 2.0).abs() < 1e-9);
        let l = lune_for_length(1.0, 4.0).unwrap();
        assert!((l.area - (4.0 - PI)).abs() < 1e-7);
        assert!(lune_for_length(2f64.sqrt(), 7.0).is_err());
        assert!(lune_for_length(0.5, 0.0).is_err());
    }

    #[test]
    fn two_regions_reproduce_the_lune() {
        let l = build_lune(1.3, 1.1).unwrap();
        let p = l.as_polygon().unwrap();
        assert_eq!(p.arcs.len(), 2);
        assert!((p.length - l.length).abs() < 1e-10);
        assert!((p.area - l.area).abs() < 1e-10);
        assert!(p.dropped.is_empty());
    }

    #[test]
    fn curvature_mismatch_is_reported() {
        let a = CyclePlane::through_origin(1.5).unwrap();
        let b = supporting_cycle(1.6, PI, 0.3).unwrap();
        assert!(matches!(
            polygon_from_regions(&[a, b]),
            Err(Error::CurvatureMismatch { index: 1, .. })
        ));
    }

    #[test]
    fn unbounded_equidistant_pair() {
        // two equidistant regions side by side share ideal points
        let a = supporting_cycle(0.5, 0.0, 0.5).unwrap();
        let b = supporting_cycle(0.5, 0.3, 0.5).unwrap();
        assert!(matches!(polygon_from_regions(&[a, b]), Err(Error::UnboundedRegion)));
    }

    #[test]
    fn disjoint_regions_are_empty() {
        let a = Isometry::boost_x(2.0).apply_cycle(&CyclePlane::circle(&HPoint::origin(), 0.5).unwrap());
        let b = CyclePlane::circle(&HPoint::origin(), 0.5).unwrap();
        assert!(matches!(polygon_from_regions(&[a, b]), Err(Error::EmptyRegion(_))));
    }

    #[test]
    fn redundant_cycle_is_dropped() {
        let lambda = 1.5;
        let a = supporting_cycle(lambda, 0.0, 0.3).unwrap();
        let b = supporting_cycle(lambda, PI, 0.3).unwrap();
        // centered disk of radius ρ contains the lens a ∩ b
        let far = supporting_cycle(lambda, 0.5 * PI, circle_half_separation(lambda).unwrap()).unwrap();
        let p = polygon_from_regions(&[a, b, far]).unwrap();
        assert_eq!(p.dropped, vec![2]);
    }

    #[test]
    fn random_polygons_are_deterministic() {
        let a = random_polygon(2f64.sqrt(), 4, 7).unwrap();
        let b = random_polygon(2f64.sqrt(), 4, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.arcs.len(), 4);
    }

    #[test]
    fn export_is_json() {
        let l = build_lune(2.0, 0.5).unwrap();
        let js = l.export().to_json().unwrap();
        assert!(js.contains("\"shape\": \"lune\""));
        let pts = l.polyline(16);
        assert_eq!(pts.len(), 33);
        assert!(pts.iter().all(|(u, v)| u * u + v * v < 1.0));
    }
}
