//! Numerical Pontryagin certificate for a closed bang-bang support profile.
//!
//! The adjoint system is linear in `(p(0), μ1)` once the state trajectory is
//! fixed, so four integrations span every candidate. The multipliers are
//! then chosen in three stages:
//!
//! 1. least squares on the periodicity `p(2π) = p(0)`;
//! 2. `H1 = 0` at the control's switch angles, inside the periodic family;
//! 3. a linear program maximizing the sign margin of `H1` against the
//!    control over whatever freedom is left.

use std::f64::consts::TAU;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{
    joint_rhs, legendre_clebsch_quantity, rk4_periodic, switching_h1, Adjoint, ConstantControl,
    ControlLaw, ControlState, ControlTrajectory, Multipliers, PiecewiseControl,
};
use crate::error::{Error, Result};
use crate::support::SupportProfile;

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateOptions {
    /// Integration grid; defaults to the profile's sample count.
    pub steps: Option<usize>,
    /// Relative tolerance for reading `R ∈ {0, 1/λ}` off the profile.
    pub snap_tol: f64,
    pub closure_tol: f64,
    pub periodicity_tol: f64,
    pub switch_tol: f64,
    /// Allowed distance between switches and `H1` zero crossings.
    pub alignment_steps: f64,
    /// Samples this close to a switch are left out of the sign check.
    pub exclusion_steps: usize,
    pub sign_tol: f64,
    pub max_lp_rows: usize,
    pub multiplier_bound: f64,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        Self {
            steps: None,
            snap_tol: 1e-4,
            closure_tol: 1e-6,
            periodicity_tol: 1e-6,
            switch_tol: 1e-6,
            alignment_steps: 2.0,
            exclusion_steps: 2,
            sign_tol: 1e-9,
            max_lp_rows: 512,
            multiplier_bound: 1e3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateStatus {
    /// Periodic multipliers exist and `H1` has the sign of the control everywhere.
    Certified,
    /// Periodic multipliers exist but no choice matches the control.
    SignPatternViolated,
    /// No periodic adjoint (or the profile does not close).
    NoCertificate,
}

/// Sign check of `H1` on one constant piece of the control.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PieceCheck {
    pub start: f64,
    pub end: f64,
    pub control: f64,
    pub samples: usize,
    /// Minimum of `H1` (arcs) or `−H1` (corners) over the checked samples.
    pub min_signed_h1: f64,
    pub consistent: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub status: CertificateStatus,
    pub lambda: f64,
    pub steps: usize,
    pub state_closure: f64,
    pub periodicity_residual: f64,
    pub switch_residual: f64,
    pub p0: Adjoint,
    pub multipliers: Multipliers,
    pub switch_angles: Vec<f64>,
    pub zero_crossings: Vec<f64>,
    pub max_alignment_steps: f64,
    pub pieces: Vec<PieceCheck>,
    pub sign_margin: f64,
    pub legendre_clebsch_min: f64,
    pub hamiltonian_drift: f64,
    pub nontriviality: f64,
    pub message: String,
    #[serde(skip)]
    pub trajectory: Option<ControlTrajectory>,
}

enum Law {
    Constant(ConstantControl),
    Piecewise(PiecewiseControl),
}

impl ControlLaw for Law {
    fn value(&self, theta: f64) -> f64 {
        match self {
            Law::Constant(c) => c.value(theta),
            Law::Piecewise(p) => p.value(theta),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Law::Constant(_) => Vec::new(),
            Law::Piecewise(p) => p.breakpoints(),
        }
    }
}

/// Reads the bang-bang control off the profile's radius of curvature.
fn recover_control(profile: &SupportProfile, lambda: f64, tol: f64) -> Result<(Vec<f64>, Law)> {
    let top = 1.0 / lambda;
    let radii = profile.radii()?;
    let k = profile.k();
    let mut u = Vec::with_capacity(radii.len());
    for (j, r) in radii.iter().enumerate() {
        let r = r * k;
        let snapped = if r.abs() <= tol * top {
            0.0
        } else if (r - top).abs() <= tol * top {
            top
        } else {
            return Err(Error::NotBangBang {
                theta: profile.theta(j),
                radius: r,
            });
        };
        u.push(snapped);
    }
    let n = u.len();
    let step = profile.step();
    let switches: Vec<f64> = if profile.breaks().is_empty() {
        (0..n)
            .filter(|&j| u[j] != u[(j + n - 1) % n])
            .map(|j| (j as f64 - 0.5).rem_euclid(n as f64) * step)
            .collect()
    } else {
        profile.breaks().to_vec()
    };
    if switches.is_empty() {
        return Ok((switches, Law::Constant(ConstantControl(u[0]))));
    }
    // value of each piece read at the sample nearest its midpoint
    let m = switches.len();
    let values: Vec<f64> = (0..m)
        .map(|i| {
            let a = switches[i];
            let b = if i + 1 < m { switches[i + 1] } else { switches[0] + TAU };
            let mid = 0.5 * (a + b);
            u[((mid / step).round() as usize) % n]
        })
        .collect();
    let law = PiecewiseControl::new(switches.clone(), values)?;
    Ok((law.switches().to_vec(), Law::Piecewise(law)))
}

struct Run {
    grid: Vec<[f64; 4]>,
    at_switch: Vec<[f64; 4]>,
}

fn run(
    law: &Law,
    x0: [f64; 2],
    p0: [f64; 2],
    mu1: f64,
    steps: usize,
    switches: &[f64],
) -> Result<Run> {
    let mu = Multipliers::normal(mu1);
    let mut grid = Vec::with_capacity(steps + 1);
    let mut breaks: Vec<(f64, [f64; 4])> = Vec::new();
    rk4_periodic(
        [x0[0], x0[1], p0[0], p0[1]],
        law,
        steps,
        |t, y, u| joint_rhs(y, u, &mu).map_err(|_| Error::Integration { theta: t }),
        |_, y| grid.push(*y),
        |t, y| breaks.push((t, *y)),
    )?;
    let h = TAU / steps as f64;
    let at_switch = switches
        .iter()
        .map(|&s| {
            if let Some((_, y)) = breaks.iter().find(|(t, _)| (t - s).abs() < 1e-12) {
                *y
            } else {
                // switch on a grid node
                grid[((s / h).round() as usize) % steps]
            }
        })
        .collect();
    Ok(Run { grid, at_switch })
}

/// Orthonormal basis of the null space of `m`, as columns.
fn null_space(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = m.ncols();
    let rows = m.nrows().max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= tol)
        .map(|(i, _)| vt.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

fn least_squares(m: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return DVector::zeros(m.ncols());
    }
    m.clone()
        .svd(true, true)
        .solve(rhs, 1e-12)
        .expect("both factors requested")
}

/// Affine model `value(z) = c + a·z` of a scalar along the basis runs.
fn affine(base: f64, probes: [f64; 3]) -> (f64, [f64; 3]) {
    (base, [probes[0] - base, probes[1] - base, probes[2] - base])
}

/// Searches for periodic multipliers making the profile's control satisfy
/// the maximum principle; see the module documentation.
pub fn pmp_certificate(
    profile: &SupportProfile,
    lambda: f64,
    opts: &CertificateOptions,
) -> Result<CertificateReport> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("λ = {lambda} ≤ 0")));
    }
    let lambda_unit = lambda / profile.k();
    let (switches, law) = recover_control(profile, lambda_unit, opts.snap_tol)?;
    let steps = opts.steps.unwrap_or(profile.len());
    let h = TAU / steps as f64;
    let k = profile.k();
    let x0 = [k * profile.g()[0], k * profile.g1()[0]];
    ControlState::new(x0[0], x0[1])?;

    let unit = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let runs = unit
        .iter()
        .map(|z| run(&law, x0, [z[0], z[1]], z[2], steps, &switches))
        .collect::<Result<Vec<_>>>()?;
    let base = &runs[0];
    let end = base.grid[steps];
    let state_closure = (end[0] - x0[0]).hypot(end[1] - x0[1]);

    let mut report = CertificateReport {
        status: CertificateStatus::NoCertificate,
        lambda,
        steps,
        state_closure,
        periodicity_residual: f64::INFINITY,
        switch_residual: f64::INFINITY,
        p0: Adjoint { p1: 0.0, p2: 0.0 },
        multipliers: Multipliers::normal(0.0),
        switch_angles: switches.clone(),
        zero_crossings: Vec::new(),
        max_alignment_steps: f64::INFINITY,
        pieces: Vec::new(),
        sign_margin: f64::NEG_INFINITY,
        legendre_clebsch_min: f64::NAN,
        hamiltonian_drift: f64::NAN,
        nontriviality: 0.0,
        message: String::new(),
        trajectory: None,
    };
    if state_closure > opts.closure_tol {
        report.message = format!("profile does not close under its control ({state_closure:.3e})");
        return Ok(report);
    }

    // H1 at a state sample, affine in z = (p1(0), p2(0), μ1)
    let h1_model = |pick: &dyn Fn(&Run) -> [f64; 4]| -> Result<(f64, [f64; 3])> {
        let y = pick(base);
        let x = ControlState { x1: y[0], x2: y[1] };
        let b = switching_h1(&x, y[3], 0.0)?;
        let probes = [
            switching_h1(&x, pick(&runs[1])[3], 0.0)?,
            switching_h1(&x, pick(&runs[2])[3], 0.0)?,
            switching_h1(&x, pick(&runs[3])[3], 1.0)?,
        ];
        Ok(affine(b, probes))
    };

    // stage 1: periodicity
    let mut per = DMatrix::zeros(2, 3);
    let mut per_rhs = DVector::zeros(2);
    for r in 0..2 {
        let gap = |run: &Run| run.grid[steps][2 + r] - run.grid[0][2 + r];
        let (c, a) = affine(gap(base), [gap(&runs[1]), gap(&runs[2]), gap(&runs[3])]);
        for i in 0..3 {
            per[(r, i)] = a[i];
        }
        per_rhs[r] = -c;
    }
    let mut z = least_squares(&per, &per_rhs);
    report.periodicity_residual = (&per * &z - &per_rhs).norm();
    if report.periodicity_residual > opts.periodicity_tol {
        report.message = "no periodic adjoint".into();
        return Ok(report);
    }
    let mut free = null_space(&per, 1e-8);

    // stage 2: switching conditions
    let mut sw = DMatrix::zeros(switches.len(), 3);
    let mut sw_rhs = DVector::zeros(switches.len());
    for i in 0..switches.len() {
        let (c, a) = h1_model(&|r: &Run| r.at_switch[i])?;
        for j in 0..3 {
            sw[(i, j)] = a[j];
        }
        sw_rhs[i] = -c;
    }
    let mut stage2_ok = true;
    if !switches.is_empty() {
        let reduced = &sw * &free;
        let candidate = if free.ncols() > 0 {
            let w = least_squares(&reduced, &(&sw_rhs - &sw * &z));
            &z + &free * &w
        } else {
            z.clone()
        };
        let residual = (&sw * &candidate - &sw_rhs).amax();
        if residual <= opts.switch_tol {
            z = candidate;
            if free.ncols() > 0 {
                free = &free * null_space(&reduced, 1e-8);
            }
        } else {
            stage2_ok = false;
        }
    }

    // stage 3: sign margin over the remaining freedom
    let excluded = |t: f64| {
        switches.iter().any(|s| {
            let d = (t - s).rem_euclid(TAU);
            d.min(TAU - d) <= opts.exclusion_steps as f64 * h + 1e-12
        })
    };
    let eligible: Vec<usize> = (0..steps).filter(|&j| !excluded(j as f64 * h)).collect();
    if free.ncols() > 0 && !eligible.is_empty() {
        let stride = eligible.len().div_ceil(opts.max_lp_rows.max(1));
        let mut problem = Problem::new(OptimizationDirection::Maximize);
        let ws: Vec<_> = (0..free.ncols())
            .map(|_| problem.add_var(0.0, (-opts.multiplier_bound, opts.multiplier_bound)))
            .collect();
        let m = problem.add_var(1.0, (-1e6, 1.0));
        for &j in eligible.iter().step_by(stride) {
            let (c, a) = h1_model(&|r: &Run| r.grid[j])?;
            let sigma = if law.value(j as f64 * h) > 0.0 { 1.0 } else { -1.0 };
            let a = DVector::from_row_slice(&a);
            let coeff = free.transpose() * &a;
            let mut terms: Vec<_> = ws.iter().zip(coeff.iter()).map(|(v, c)| (*v, sigma * c)).collect();
            terms.push((m, -1.0));
            problem.add_constraint(&terms, ComparisonOp::Ge, -sigma * (c + a.dot(&z)));
        }
        let solution = problem
            .solve()
            .map_err(|e| Error::LinearProgram(e.to_string()))?;
        let w = DVector::from_iterator(ws.len(), ws.iter().map(|v| solution[*v]));
        z += &free * w;
    }

    report.p0 = Adjoint { p1: z[0], p2: z[1] };
    report.multipliers = Multipliers::normal(z[2]);
    report.nontriviality = z[0].abs() + z[1].abs() + z[2].abs();
    let sw_res = &sw * &z - &sw_rhs;
    report.switch_residual = if switches.is_empty() { 0.0 } else { sw_res.amax() };

    let traj = ControlTrajectory::integrate(
        lambda_unit,
        &law,
        ControlState { x1: x0[0], x2: x0[1] },
        report.p0,
        report.multipliers,
        steps,
    )?;
    let last = traj.p.len() - 1;
    report.periodicity_residual =
        (traj.p[last].p1 - traj.p[0].p1).hypot(traj.p[last].p2 - traj.p[0].p2);
    report.hamiltonian_drift = traj.hamiltonian_drift();
    report.legendre_clebsch_min = traj
        .x
        .iter()
        .map(legendre_clebsch_quantity)
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);

    // zero crossings and their alignment with the switches
    for j in 0..steps {
        let (a, b) = (traj.h1[j], traj.h1[j + 1]);
        if (a > 0.0) != (b > 0.0) && a != b {
            report.zero_crossings.push((j as f64 + a / (a - b)) * h);
        }
    }
    let circ = |a: f64, b: f64| {
        let d = (a - b).rem_euclid(TAU);
        d.min(TAU - d) / h
    };
    let nearest = |t: f64, set: &[f64]| set.iter().map(|s| circ(t, *s)).fold(f64::INFINITY, f64::min);
    report.max_alignment_steps = if switches.is_empty() && report.zero_crossings.is_empty() {
        0.0
    } else {
        switches
            .iter()
            .map(|s| nearest(*s, &report.zero_crossings))
            .chain(report.zero_crossings.iter().map(|c| nearest(*c, &switches)))
            .fold(0.0, f64::max)
    };

    // per-piece sign table
    let bounds: Vec<(f64, f64)> = if switches.is_empty() {
        vec![(0.0, TAU)]
    } else {
        (0..switches.len())
            .map(|i| {
                let a = switches[i];
                let b = if i + 1 < switches.len() { switches[i + 1] } else { switches[0] + TAU };
                (a, b)
            })
            .collect()
    };
    for (a, b) in bounds {
        let control = law.value(0.5 * (a + b));
        let sigma = if control > 0.0 { 1.0 } else { -1.0 };
        let mut count = 0;
        let mut min = f64::INFINITY;
        for j in 0..steps {
            let t = j as f64 * h;
            let inside = (t - a).rem_euclid(TAU) < b - a;
            if inside && !excluded(t) {
                count += 1;
                min = min.min(sigma * traj.h1[j]);
            }
        }
        report.pieces.push(PieceCheck {
            start: a,
            end: b.rem_euclid(TAU),
            control,
            samples: count,
            min_signed_h1: min,
            consistent: min > -opts.sign_tol,
        });
    }
    report.sign_margin = report
        .pieces
        .iter()
        .map(|p| p.min_signed_h1)
        .fold(f64::INFINITY, f64::min);

    let signs_ok = report.pieces.iter().all(|p| p.consistent);
    let aligned = report.max_alignment_steps <= opts.alignment_steps;
    report.status = if report.periodicity_residual > opts.periodicity_tol {
        report.message = "adjoint drifted off periodicity after the sign fit".into();
        CertificateStatus::NoCertificate
    } else if signs_ok && aligned && stage2_ok {
        report.message = "H1 matches the control on every piece".into();
        CertificateStatus::Certified
    } else {
        report.message = if !stage2_ok {
            "switching conditions H1 = 0 inconsistent with periodicity".into()
        } else if !signs_ok {
            "H1 sign disagrees with the control".into()
        } else {
            "H1 zero crossings do not align with the switches".into()
        };
        CertificateStatus::SignPatternViolated
    };
    report.trajectory = Some(traj);
    Ok(report)
}
