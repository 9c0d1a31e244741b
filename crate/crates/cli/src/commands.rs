use std::f64::consts::SQRT_2;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::{ensure, Context, Result};
use hyperlune::bounds::{euclidean_limit_deviation, limits_at, max_length, reverse_bound};
use hyperlune::control::{pmp_certificate, CertificateOptions, CertificateStatus};
use hyperlune::shapes::{circle_half_separation, write_polyline_csv};
use hyperlune::support::SupportProfile;
use hyperlune::{build_lune, lune_for_length, random_polygon, LambdaPolygon};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{csv_table, json_table, Format};
use crate::svg::{poincare_disk, Curve};
use crate::{Lengths, Shape};

const POLYLINE_SAMPLES: usize = 96;

#[derive(Serialize)]
struct BoundRow {
    lambda: f64,
    k: f64,
    #[serde(rename = "L")]
    length: f64,
    regime: String,
    bound: f64,
    /// Empty when lengths are unbounded.
    #[serde(rename = "L_max")]
    max_length: Option<f64>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub fn bound(cfg: &RunConfig, lambda: f64, k: f64, lengths: &[f64]) -> Result<bool> {
    let rows = lengths
        .iter()
        .map(|&l| {
            let b = reverse_bound(lambda, k, l)?;
            Ok(BoundRow {
                lambda,
                k,
                length: l,
                regime: b.regime.to_string(),
                bound: b.bound,
                max_length: finite(b.max_length),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sink = cfg.sink()?;
    sink.emit(cfg.command, Format::Csv, &csv_table("bound-table", &rows)?)?;
    sink.emit(cfg.command, Format::Json, &json_table("bound-table", &(), &rows)?)?;
    Ok(true)
}

#[derive(Serialize)]
struct SharpnessRow {
    lambda: f64,
    #[serde(rename = "L")]
    length: f64,
    regime: String,
    area: Option<f64>,
    bound: Option<f64>,
    abs_error: Option<f64>,
    status: &'static str,
    message: String,
}

#[derive(Serialize)]
struct SharpnessSummary {
    cells: usize,
    failures: usize,
    errors: usize,
    max_abs_error: f64,
    tol: f64,
    perturb: Option<f64>,
}

const DEFAULT_SHARPNESS_LAMBDAS: [f64; 3] = [0.7, 1.0, SQRT_2];

/// Ten lengths up to the circle for λ > 1, otherwise `0.5, 1, …, 5`.
fn default_lengths(lambda: f64) -> Vec<f64> {
    let top = max_length(lambda, 1.0).unwrap_or(f64::INFINITY);
    (1..=10)
        .map(|i| if top.is_finite() { top * i as f64 / 10.0 } else { 0.5 * i as f64 })
        .collect()
}

pub fn sharpness(cfg: &RunConfig, lambdas: &[f64], lengths: &Lengths, perturb: Option<f64>) -> Result<bool> {
    let lambdas = if lambdas.is_empty() { DEFAULT_SHARPNESS_LAMBDAS.to_vec() } else { lambdas.to_vec() };
    for &l in &lambdas {
        ensure!(l > 0.0 && l.is_finite(), "λ = {l} must be positive");
    }
    let explicit = if lengths.is_empty() { None } else { Some(lengths.resolve(None)?) };
    let cells: Vec<(f64, f64)> = lambdas
        .iter()
        .flat_map(|&lam| {
            let ls = explicit.clone().unwrap_or_else(|| default_lengths(lam));
            ls.into_iter().map(move |l| (lam, l))
        })
        .collect();
    let tol = cfg.tol();
    let rows: Vec<SharpnessRow> = cells
        .par_iter()
        .map(|&(lambda, l)| {
            let measured = (|| -> Result<(f64, f64, String)> {
                let b = reverse_bound(lambda, 1.0, l)?;
                let mut lune = lune_for_length(lambda, l)?;
                if let Some(d) = perturb {
                    lune = build_lune(lambda, lune.separation * (1.0 + d))?;
                }
                Ok((lune.area, b.bound, b.regime.to_string()))
            })();
            match measured {
                Ok((area, bound, regime)) => {
                    let err = (area - bound).abs();
                    SharpnessRow {
                        lambda,
                        length: l,
                        regime,
                        area: Some(area),
                        bound: Some(bound),
                        abs_error: Some(err),
                        status: if err < tol { "pass" } else { "fail" },
                        message: String::new(),
                    }
                }
                Err(e) => SharpnessRow {
                    lambda,
                    length: l,
                    regime: String::new(),
                    area: None,
                    bound: None,
                    abs_error: None,
                    status: "error",
                    message: format!("{e:#}"),
                },
            }
        })
        .collect();
    for r in rows.iter().filter(|r| r.status == "error") {
        eprintln!("sharpness: λ={} L={}: {}", r.lambda, r.length, r.message);
    }
    let summary = SharpnessSummary {
        cells: rows.len(),
        failures: rows.iter().filter(|r| r.status == "fail").count(),
        errors: rows.iter().filter(|r| r.status == "error").count(),
        max_abs_error: rows.iter().filter_map(|r| r.abs_error).fold(0.0, f64::max),
        tol,
        perturb,
    };
    let sink = cfg.sink()?;
    sink.emit(cfg.command, Format::Csv, &csv_table("sharpness", &rows)?)?;
    sink.emit(cfg.command, Format::Json, &json_table("sharpness", &summary, &rows)?)?;
    if sink.wants(Format::Svg) {
        let curves = lambdas
            .iter()
            .filter_map(|&lam| {
                let ls = explicit.clone().unwrap_or_else(|| default_lengths(lam));
                let l = ls[ls.len() / 2];
                let lune = lune_for_length(lam, l).ok()?;
                Some(Curve { label: format!("lune λ={lam} L={l:.4}"), points: lune.polyline(POLYLINE_SAMPLES) })
            })
            .collect::<Vec<_>>();
        sink.emit(cfg.command, Format::Svg, &poincare_disk("λ-lunes", &curves))?;
    }
    eprintln!(
        "sharpness: {} cells, {} failures, {} errors, max |A − bound| = {:e}",
        summary.cells, summary.failures, summary.errors, summary.max_abs_error
    );
    Ok(summary.failures == 0 && summary.errors == 0)
}

#[derive(Serialize)]
struct DominanceRow {
    index: usize,
    seed: u64,
    n_arcs: usize,
    #[serde(rename = "L")]
    length: f64,
    area: f64,
    bound: f64,
    deficiency: f64,
}

#[derive(Serialize)]
struct ArcSummary {
    n_arcs: usize,
    samples: usize,
    min_deficiency: f64,
    max_deficiency: f64,
}

#[derive(Serialize)]
struct DominanceSummary {
    lambda: f64,
    count: usize,
    generated: usize,
    generation_failures: usize,
    violations: usize,
    min_deficiency: f64,
    tol: f64,
    seed: u64,
    by_arcs: Vec<ArcSummary>,
}

#[derive(Serialize)]
struct HistogramRow {
    lo: f64,
    hi: f64,
    count: usize,
}

const HISTOGRAM_BINS: usize = 20;
const WORST_SHOWN: usize = 4;
/// 2-arc samples are lunes and must sit on the bound.
const LUNE_DEFICIENCY: f64 = 1e-6;

fn sample_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index as u64)
}

fn histogram(values: &[f64]) -> Vec<HistogramRow> {
    if values.is_empty() {
        return Vec::new();
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = ((hi - lo) / HISTOGRAM_BINS as f64).max(f64::MIN_POSITIVE);
    let mut counts = vec![0usize; HISTOGRAM_BINS];
    for v in values {
        let b = (((v - lo) / width) as usize).min(HISTOGRAM_BINS - 1);
        counts[b] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramRow { lo: lo + width * i as f64, hi: lo + width * (i + 1) as f64, count })
        .collect()
}

pub fn dominance(cfg: &RunConfig, lambda: f64, count: usize, max_arcs: usize) -> Result<bool> {
    ensure!(lambda > 0.0 && lambda.is_finite(), "λ = {lambda} must be positive");
    ensure!(max_arcs >= 2, "--arcs must be at least 2");
    ensure!(count >= 1, "--count must be at least 1");
    let seed = cfg.seed.unwrap_or(0);
    let tol = cfg.tol();
    let samples: Vec<(usize, u64, usize, Option<LambdaPolygon>)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let n = 2 + i % (max_arcs - 1);
            let s = sample_seed(seed, i);
            (i, s, n, random_polygon(lambda, n, s).ok())
        })
        .collect();
    let mut rows = Vec::with_capacity(count);
    let mut polygons = Vec::with_capacity(count);
    let mut failures = 0;
    for (index, s, n, p) in samples {
        let Some(p) = p else {
            eprintln!("dominance: no polygon for sample {index} (seed {s}, {n} arcs)");
            failures += 1;
            continue;
        };
        let bound = reverse_bound(lambda, 1.0, p.length)?.bound;
        rows.push(DominanceRow {
            index,
            seed: s,
            n_arcs: n,
            length: p.length,
            area: p.area,
            bound,
            deficiency: p.area - bound,
        });
        polygons.push(p);
    }
    let by_arcs: Vec<ArcSummary> = (2..=max_arcs)
        .filter_map(|n| {
            let ds: Vec<f64> = rows.iter().filter(|r| r.n_arcs == n).map(|r| r.deficiency).collect();
            (!ds.is_empty()).then(|| ArcSummary {
                n_arcs: n,
                samples: ds.len(),
                min_deficiency: ds.iter().cloned().fold(f64::INFINITY, f64::min),
                max_deficiency: ds.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            })
        })
        .collect();
    let summary = DominanceSummary {
        lambda,
        count,
        generated: rows.len(),
        generation_failures: failures,
        violations: rows.iter().filter(|r| r.deficiency < -tol).count(),
        min_deficiency: rows.iter().map(|r| r.deficiency).fold(f64::INFINITY, f64::min),
        tol,
        seed,
        by_arcs,
    };
    let lunes_sharp = summary
        .by_arcs
        .iter()
        .filter(|a| a.n_arcs == 2)
        .all(|a| a.max_deficiency.abs() < LUNE_DEFICIENCY && a.min_deficiency.abs() < LUNE_DEFICIENCY);

    let sink = cfg.sink()?;
    sink.emit(cfg.command, Format::Csv, &csv_table("dominance", &rows)?)?;
    sink.emit(cfg.command, Format::Json, &json_table("dominance", &summary, &rows)?)?;
    let deficiencies: Vec<f64> = rows.iter().map(|r| r.deficiency).collect();
    sink.attach("dominance_histogram.csv", &csv_table("dominance-histogram", &histogram(&deficiencies))?)?;
    if sink.wants(Format::Svg) {
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.sort_by(|&a, &b| rows[a].deficiency.total_cmp(&rows[b].deficiency).then(a.cmp(&b)));
        let curves: Vec<Curve> = order
            .iter()
            .take(WORST_SHOWN)
            .map(|&i| {
                let p = polygons[i].transformed(&hyperlune::Isometry::translation_to(&polygons[i].center).inverse());
                let points = p.as_ref().unwrap_or(&polygons[i]).polyline(POLYLINE_SAMPLES);
                Curve {
                    label: format!(
                        "#{} {} arcs, deficiency {:.3e}",
                        rows[i].index, rows[i].n_arcs, rows[i].deficiency
                    ),
                    points,
                }
            })
            .collect();
        sink.emit(cfg.command, Format::Svg, &poincare_disk("smallest deficiencies", &curves))?;
    }
    eprintln!(
        "dominance: λ={lambda}, {} polygons, {} violations, {} generation failures, min deficiency {:e}",
        summary.generated, summary.violations, failures, summary.min_deficiency
    );
    Ok(summary.violations == 0 && failures == 0 && lunes_sharp)
}

#[derive(Serialize)]
struct PmpDocument<'a> {
    schema: &'static str,
    shape: String,
    report: &'a hyperlune::control::CertificateReport,
}

pub fn pmp(
    cfg: &RunConfig,
    lambda: f64,
    shape: Shape,
    length: f64,
    profile_path: Option<&Path>,
    arcs: usize,
    steps: usize,
) -> Result<bool> {
    ensure!(lambda > 0.0 && lambda.is_finite(), "λ = {lambda} must be positive");
    ensure!(steps >= 64, "--steps must be at least 64");
    let (label, profile, outline) = if let Some(path) = profile_path {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let prof = SupportProfile::read_csv(BufReader::new(file))?;
        let outline = prof
            .reconstruct_boundary()
            .map(|pts| pts.iter().map(|p| p.to_poincare_disk()).collect())
            .unwrap_or_default();
        (format!("profile {}", path.display()), prof, outline)
    } else {
        match shape {
            Shape::Circle => {
                let rho = circle_half_separation(lambda)
                    .with_context(|| format!("no circle of curvature λ = {lambda} ≤ 1"))?;
                let circle = build_lune(lambda, 2.0 * rho)?;
                ("circle".to_string(), circle.support_profile(steps)?, circle.polyline(POLYLINE_SAMPLES))
            }
            Shape::Lune => {
                let lune = lune_for_length(lambda, length)?;
                (format!("lune L={length}"), lune.support_profile(steps)?, lune.polyline(POLYLINE_SAMPLES))
            }
            Shape::Polygon => {
                let seed = cfg.seed.unwrap_or(0);
                let p = random_polygon(lambda, arcs, seed)?;
                let p = p.transformed(&hyperlune::Isometry::translation_to(&p.center).inverse())?;
                (
                    format!("polygon {arcs} arcs seed {seed}"),
                    p.support_profile(steps)?,
                    p.polyline(POLYLINE_SAMPLES),
                )
            }
        }
    };
    let report = pmp_certificate(&profile, lambda, &CertificateOptions::default())?;
    let sink = cfg.sink()?;
    let doc = PmpDocument { schema: "hyperlune pmp-certificate v1", shape: label.clone(), report: &report };
    sink.emit(cfg.command, Format::Json, &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    if let Some(traj) = &report.trajectory {
        let mut buf = Vec::new();
        traj.write_csv(&mut buf)?;
        sink.emit(cfg.command, Format::Csv, &String::from_utf8(buf)?)?;
    }
    if sink.wants(Format::Svg) {
        let curves = [Curve { label: format!("{label}: {:?}", report.status), points: outline.clone() }];
        sink.emit(cfg.command, Format::Svg, &poincare_disk("certificate shape", &curves))?;
    }
    if sink.writes_files() {
        let mut buf = Vec::new();
        profile.write_csv(&mut buf)?;
        sink.attach("pmp_profile.csv", &String::from_utf8(buf)?)?;
        let mut buf = Vec::new();
        write_polyline_csv(&outline, &mut buf)?;
        sink.attach("pmp_boundary.csv", &String::from_utf8(buf)?)?;
    }
    eprintln!(
        "pmp: {label}: {:?}, {} switches, alignment {:.3} steps, sign margin {:e} — {}",
        report.status,
        report.switch_angles.len(),
        report.max_alignment_steps,
        report.sign_margin,
        report.message
    );
    Ok(report.status == CertificateStatus::Certified)
}

#[derive(Serialize)]
struct LimitRow {
    kind: &'static str,
    k: f64,
    #[serde(rename = "L")]
    length: f64,
    lambda: Option<f64>,
    epsilon: Option<f64>,
    deviation_above: Option<f64>,
    deviation_below: Option<f64>,
    /// Deviation relative to the reference value.
    relative: f64,
    note: String,
}

#[derive(Serialize)]
struct LimitsSummary {
    tol: f64,
    cross_regime_max_relative: f64,
    cross_regime_converging: bool,
    euclidean_shrinking: bool,
}

const EPSILONS: [f64; 3] = [1e-3, 1e-4, 1e-5];

pub fn limits(cfg: &RunConfig, ks: &[f64], lambda: f64, lengths: &[f64]) -> Result<bool> {
    ensure!(!ks.is_empty(), "--k needs at least one value");
    for &k in ks {
        ensure!(k > 0.0 && k.is_finite(), "k = {k} must be positive");
    }
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    let mut converging = true;
    for &k in ks {
        for &l in lengths {
            let report = limits_at(k, l, &EPSILONS)?;
            converging &= report.converging;
            for r in &report.rows {
                let rel = r.deviation_above.max(r.deviation_below) / r.critical.abs().max(f64::MIN_POSITIVE);
                if r.epsilon == EPSILONS[EPSILONS.len() - 1] {
                    worst = worst.max(rel);
                }
                rows.push(LimitRow {
                    kind: "cross-regime",
                    k,
                    length: l,
                    lambda: None,
                    epsilon: Some(r.epsilon),
                    deviation_above: Some(r.deviation_above),
                    deviation_below: Some(r.deviation_below),
                    relative: rel,
                    note: String::new(),
                });
            }
        }
    }
    // Euclidean comparison, per length, ordered by decreasing k
    let mut ks_desc = ks.to_vec();
    ks_desc.sort_by(|a, b| b.total_cmp(a));
    ks_desc.dedup();
    let mut shrinking = true;
    for &l in lengths {
        let mut previous = f64::INFINITY;
        for &k in &ks_desc {
            match euclidean_limit_deviation(lambda, k, l) {
                Ok(d) => {
                    shrinking &= d < previous || ks_desc.len() == 1;
                    previous = d;
                    rows.push(LimitRow {
                        kind: "euclidean",
                        k,
                        length: l,
                        lambda: Some(lambda),
                        epsilon: None,
                        deviation_above: None,
                        deviation_below: None,
                        relative: d,
                        note: String::new(),
                    });
                }
                Err(e) => rows.push(LimitRow {
                    kind: "euclidean",
                    k,
                    length: l,
                    lambda: Some(lambda),
                    epsilon: None,
                    deviation_above: None,
                    deviation_below: None,
                    relative: f64::NAN,
                    note: format!("{e}"),
                }),
            }
        }
    }
    let summary = LimitsSummary {
        tol: cfg.tol(),
        cross_regime_max_relative: worst,
        cross_regime_converging: converging,
        euclidean_shrinking: shrinking,
    };
    let sink = cfg.sink()?;
    sink.emit(cfg.command, Format::Csv, &csv_table("limits", &rows)?)?;
    sink.emit(cfg.command, Format::Json, &json_table("limits", &summary, &rows)?)?;
    eprintln!(
        "limits: cross-regime relative deviation {:e} at ε = {:e} ({}), Euclidean deviation {} as k decreases",
        worst,
        EPSILONS[EPSILONS.len() - 1],
        if converging { "converging" } else { "NOT converging" },
        if shrinking { "shrinks" } else { "does NOT shrink" }
    );
    Ok(worst < summary.tol && converging && shrinking)
}
