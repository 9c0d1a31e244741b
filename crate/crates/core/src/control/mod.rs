//! Optimal-control formulation of the minimal-area problem.
//!
//! Time is the support angle `t = θ`, the state is `x = (g, g′)`, the control
//! is the radius of curvature `u = R ∈ [0, 1/λ]`. With `D = 1 − x1²` and
//! `Q = 1 − x1² − x2²`:
//!
//! ```text
//! ẋ1 = x2
//! ẋ2 = u (Q/D)^{3/2} − x1
//! area integrand   √Q/D − 1
//! length integrand u √Q/D
//! H  = p1 x2 + p2 (u (Q/D)^{3/2} − x1) + μ1 u √Q/D − μ0 (√Q/D − 1)
//! H1 = μ1 √Q/D + p2 (Q/D)^{3/2}
//! ```
//!
//! The adjoint is `ṗ = −∂H/∂x`, with closed forms derived from `H`.

mod certificate;

pub use certificate::{
    pmp_certificate, CertificateOptions, CertificateReport, CertificateStatus, PieceCheck,
};

use serde::Serialize;

use crate::error::{Error, Result};

/// `|H1|` below this selects the singular branch of the control law.
pub const SWITCH_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlState {
    pub x1: f64,
    pub x2: f64,
}

impl ControlState {
    pub fn new(x1: f64, x2: f64) -> Result<Self> {
        let s = Self { x1, x2 };
        s.check()?;
        Ok(s)
    }

    fn check(&self) -> Result<(f64, f64)> {
        let d = 1.0 - self.x1 * self.x1;
        let q = d - self.x2 * self.x2;
        if !(q > 0.0 && d > 0.0) {
            return Err(Error::Domain(format!(
                "state ({}, {}) outside 1 − x1² − x2² > 0",
                self.x1, self.x2
            )));
        }
        Ok((d, q))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Adjoint {
    pub p1: f64,
    pub p2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Multipliers {
    pub mu0: f64,
    pub mu1: f64,
}

impl Multipliers {
    /// Normal multipliers, `μ0 = 1`.
    pub fn normal(mu1: f64) -> Self {
        Self { mu0: 1.0, mu1 }
    }
}

/// Right-hand side of the state equation.
pub fn dynamics(x: &ControlState, u: f64) -> Result<(f64, f64)> {
    let (d, q) = x.check()?;
    Ok((x.x2, u * (q / d).powf(1.5) - x.x1))
}

/// `(area integrand, length integrand)`.
pub fn integrands(x: &ControlState, u: f64) -> Result<(f64, f64)> {
    let (d, q) = x.check()?;
    let w = q.sqrt() / d;
    Ok((w - 1.0, u * w))
}

/// Pontryagin function.
pub fn pontryagin_h(x: &ControlState, u: f64, p: &Adjoint, mu: &Multipliers) -> Result<f64> {
    let (d, q) = x.check()?;
    let w = q.sqrt() / d;
    let f = (q / d).powf(1.5);
    Ok(p.p1 * x.x2 + p.p2 * (u * f - x.x1) + mu.mu1 * u * w - mu.mu0 * (w - 1.0))
}

/// Switching function: the coefficient of `u` in the Pontryagin function.
pub fn switching_h1(x: &ControlState, p2: f64, mu1: f64) -> Result<f64> {
    let (d, q) = x.check()?;
    Ok(mu1 * q.sqrt() / d + p2 * (q / d).powf(1.5))
}

/// Adjoint right-hand side `(ṗ1, ṗ2) = −(∂H/∂x1, ∂H/∂x2)`.
pub fn adjoint_rhs(x: &ControlState, u: f64, p: &Adjoint, mu: &Multipliers) -> Result<(f64, f64)> {
    let (d, q) = x.check()?;
    let (x1, x2) = (x.x1, x.x2);
    let sq = q.sqrt();
    let drive = mu.mu0 - mu.mu1 * u;
    let dp1 = p.p2 * (1.0 + 3.0 * u * x1 * x2 * x2 * sq / d.powf(2.5))
        + drive * x1 * (1.0 - x1 * x1 - 2.0 * x2 * x2) / (d * d * sq);
    let dp2 = -p.p1 + p.p2 * 3.0 * u * x2 * sq / d.powf(1.5) - drive * x2 / (d * sq);
    Ok((dp1, dp2))
}

/// `p2` on a singular arc, from `H1 = 0`.
pub fn singular_p2(x: &ControlState, mu1: f64) -> Result<f64> {
    let (d, q) = x.check()?;
    Ok(-mu1 * d.sqrt() / q)
}

/// `p1` on a singular arc, from `dH1/dt = 0`.
pub fn singular_p1(x: &ControlState, mu0: f64, mu1: f64) -> Result<f64> {
    let (d, q) = x.check()?;
    Ok(-x.x2 * (mu1 * x.x1 * d.sqrt() + mu0 * q.sqrt()) / (d * q))
}

/// `−∂/∂u (d²H1/dt²)` along a singular arc. It is positive on the whole
/// admissible set, so the order-one Legendre–Clebsch condition
/// `(−1) ∂/∂u (d²H1/dt²) ≤ 0` fails and singular arcs cannot be optimal.
pub fn legendre_clebsch_quantity(x: &ControlState) -> Result<f64> {
    let (d, q) = x.check()?;
    Ok(q.powf(1.5) / d.powi(3))
}

/// Control law maximizing `H`: `1/λ` when `H1 > 0`, `0` when `H1 < 0`, and the
/// singular value `μ1` when `|H1| < SWITCH_TOL`.
pub fn synthesize_control(h1: f64, mu1: f64, lambda: f64) -> f64 {
    if h1.abs() < SWITCH_TOL {
        mu1
    } else if h1 > 0.0 {
        1.0 / lambda
    } else {
        0.0
    }
}

/// A control as a function of the angle, with optional discontinuities.
pub trait ControlLaw {
    fn value(&self, theta: f64) -> f64;

    /// Angles in `[0, 2π)` where the law may jump.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl<F: Fn(f64) -> f64> ControlLaw for F {
    fn value(&self, theta: f64) -> f64 {
        self(theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantControl(pub f64);

impl ControlLaw for ConstantControl {
    fn value(&self, _theta: f64) -> f64 {
        self.0
    }
}

/// Piecewise-constant periodic control: `values[i]` holds on
/// `[switches[i], switches[i+1])`, the last piece wrapping through `2π`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseControl {
    switches: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseControl {
    pub fn new(switches: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if switches.is_empty() || switches.len() != values.len() {
            return Err(Error::Domain(
                "piecewise control needs one value per switch angle".into(),
            ));
        }
        let tau = std::f64::consts::TAU;
        let mut pairs: Vec<(f64, f64)> = switches
            .into_iter()
            .map(|s| s.rem_euclid(tau))
            .zip(values)
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (switches, values) = pairs.into_iter().unzip();
        Ok(Self { switches, values })
    }

    pub fn switches(&self) -> &[f64] {
        &self.switches
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl ControlLaw for PiecewiseControl {
    fn value(&self, theta: f64) -> f64 {
        let t = theta.rem_euclid(std::f64::consts::TAU);
        match self.switches.iter().rposition(|s| *s <= t) {
            Some(i) => self.values[i],
            None => *self.values.last().unwrap(),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.switches.clone()
    }
}

/// Fixed-step RK4 over `[0, 2π]` with `steps` uniform cells, each cell split
/// at the law's breakpoints so no step straddles a discontinuity. Calls
/// `sample(j, state)` at every grid angle `2πj/steps` for `j = 0..=steps` and
/// `on_break(theta, state)` at interior breakpoints.
pub(crate) fn rk4_periodic<const D: usize, L, F, S, B>(
    state0: [f64; D],
    law: &L,
    steps: usize,
    rhs: F,
    mut sample: S,
    mut on_break: B,
) -> Result<[f64; D]>
where
    L: ControlLaw + ?Sized,
    F: Fn(f64, &[f64; D], f64) -> Result<[f64; D]>,
    S: FnMut(usize, &[f64; D]),
    B: FnMut(f64, &[f64; D]),
{
    let tau = std::f64::consts::TAU;
    let mut breaks: Vec<f64> = law
        .breakpoints()
        .into_iter()
        .map(|b| b.rem_euclid(tau))
        .filter(|b| *b > 0.0)
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let h = tau / steps as f64;
    let mut y = state0;
    sample(0, &y);
    let mut next_break = 0;
    for j in 0..steps {
        let t0 = j as f64 * h;
        let t1 = if j + 1 == steps { tau } else { (j + 1) as f64 * h };
        let mut a = t0;
        loop {
            while next_break < breaks.len() && breaks[next_break] <= a + 1e-14 {
                next_break += 1;
            }
            let b = if next_break < breaks.len() && breaks[next_break] < t1 - 1e-14 {
                breaks[next_break]
            } else {
                t1
            };
            y = rk4_step(&y, a, b, law, &rhs)?;
            if b < t1 {
                on_break(b, &y);
                a = b;
            } else {
                break;
            }
        }
        sample(j + 1, &y);
    }
    Ok(y)
}

fn rk4_step<const D: usize, L, F>(y: &[f64; D], a: f64, b: f64, law: &L, rhs: &F) -> Result<[f64; D]>
where
    L: ControlLaw + ?Sized,
    F: Fn(f64, &[f64; D], f64) -> Result<[f64; D]>,
{
    let h = b - a;
    // evaluate the control strictly inside the sub-interval so that a
    // discontinuous law is read on the correct side
    let nudge = 1e-9 * h;
    let u0 = law.value(a + nudge);
    let um = law.value(a + 0.5 * h);
    let u1 = law.value(b - nudge);
    let add = |y: &[f64; D], k: &[f64; D], s: f64| {
        let mut out = *y;
        for i in 0..D {
            out[i] += s * k[i];
        }
        out
    };
    let k1 = rhs(a, y, u0)?;
    let k2 = rhs(a + 0.5 * h, &add(y, &k1, 0.5 * h), um)?;
    let k3 = rhs(a + 0.5 * h, &add(y, &k2, 0.5 * h), um)?;
    let k4 = rhs(b, &add(y, &k3, h), u1)?;
    let mut out = *y;
    for i in 0..D {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

/// Joint state/adjoint right-hand side used by trajectory integration.
pub(crate) fn joint_rhs(y: &[f64; 4], u: f64, mu: &Multipliers) -> Result<[f64; 4]> {
    let x = ControlState { x1: y[0], x2: y[1] };
    let (dx1, dx2) = dynamics(&x, u)?;
    let (dp1, dp2) = adjoint_rhs(&x, u, &Adjoint { p1: y[2], p2: y[3] }, mu)?;
    Ok([dx1, dx2, dp1, dp2])
}

/// Sampled solution of the state/adjoint system with its switching function.
#[derive(Debug, Clone, Serialize)]
pub struct ControlTrajectory {
    pub lambda: f64,
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub x: Vec<ControlState>,
    pub p: Vec<Adjoint>,
    pub multipliers: Multipliers,
    pub h1: Vec<f64>,
    pub hamiltonian: Vec<f64>,
}

impl ControlTrajectory {
    /// Integrates state and adjoint together over `[0, 2π]`.
    pub fn integrate<L: ControlLaw + ?Sized>(
        lambda: f64,
        law: &L,
        x0: ControlState,
        p0: Adjoint,
        multipliers: Multipliers,
        steps: usize,
    ) -> Result<Self> {
        let tau = std::f64::consts::TAU;
        let mut samples: Vec<(usize, [f64; 4])> = Vec::with_capacity(steps + 1);
        rk4_periodic(
            [x0.x1, x0.x2, p0.p1, p0.p2],
            law,
            steps,
            |t, y, u| {
                joint_rhs(y, u, &multipliers).map_err(|_| Error::Integration { theta: t })
            },
            |j, y| samples.push((j, *y)),
            |_, _| {},
        )?;
        let mut traj = Self {
            lambda,
            t: Vec::with_capacity(samples.len()),
            u: Vec::with_capacity(samples.len()),
            x: Vec::with_capacity(samples.len()),
            p: Vec::with_capacity(samples.len()),
            multipliers,
            h1: Vec::with_capacity(samples.len()),
            hamiltonian: Vec::with_capacity(samples.len()),
        };
        for (j, y) in samples {
            let t = tau * j as f64 / steps as f64;
            let x = ControlState { x1: y[0], x2: y[1] };
            let p = Adjoint { p1: y[2], p2: y[3] };
            let u = law.value(t);
            traj.h1.push(switching_h1(&x, p.p2, multipliers.mu1)?);
            traj.hamiltonian.push(pontryagin_h(&x, u, &p, &multipliers)?);
            traj.t.push(t);
            traj.u.push(u);
            traj.x.push(x);
            traj.p.push(p);
        }
        Ok(traj)
    }

    /// Largest deviation of `H` from its initial value.
    pub fn hamiltonian_drift(&self) -> f64 {
        let h0 = self.hamiltonian[0];
        self.hamiltonian
            .iter()
            .map(|h| (h - h0).abs())
            .fold(0.0, f64::max)
    }

    /// Writes `theta,u,x1,x2,p1,p2,H1,H` rows.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# hyperlune control-trajectory v1")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["theta", "u", "x1", "x2", "p1", "p2", "H1", "H"])?;
        for i in 0..self.t.len() {
            w.write_record(&[
                self.t[i].to_string(),
                self.u[i].to_string(),
                self.x[i].x1.to_string(),
                self.x[i].x2.to_string(),
                self.p[i].p1.to_string(),
                self.p[i].p2.to_string(),
                self.h1[i].to_string(),
                self.hamiltonian[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
