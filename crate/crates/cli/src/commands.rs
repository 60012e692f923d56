//! Subcommand bodies.

use std::path::{Path, PathBuf};

use cpsurf::geometry::{analyze_point, Christoffel, MetricSample};
use cpsurf::immersion::{
    anchor_path, closed_form_at, cp2_standard_coordinates, immersion_polyline, Cp2Frame, SuNBasis, DEFAULT_NODES,
    DEFAULT_SEGMENTS,
};
use cpsurf::meron::{default_step, quad_diff_report, trace_trajectory, QuadDiffReport, StopReason};
use cpsurf::model::{charge_and_action, el_residual};
use cpsurf::verify::{run_all, CriterionResult};
use cpsurf::{Complex64, CoreError, Solution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{is_singular, CliError, CliResult};
use crate::model_file::{ModelSpecFile, FORMAT_VERSION};
use crate::output::{cx, emit_json, matrix, num, write_text, SurfaceGrid};

/// Evaluation points: an explicit list or a rectangular grid.
#[derive(Clone, Debug, PartialEq)]
pub enum Points {
    List(Vec<Complex64>),
    Grid { nx: usize, ny: usize, x: (f64, f64), y: (f64, f64) },
}

fn parse_f64(field: &str, s: &str) -> CliResult<f64> {
    let v: f64 = s.trim().parse().map_err(|_| CliError::input(format!("{field}: cannot parse '{s}' as a number")))?;
    if !v.is_finite() {
        return Err(CliError::input(format!("{field}: non-finite value '{s}'")));
    }
    Ok(v)
}

fn parse_usize(field: &str, s: &str) -> CliResult<usize> {
    s.trim().parse().map_err(|_| CliError::input(format!("{field}: cannot parse '{s}' as a count")))
}

impl Points {
    /// `"x,y;x,y"` or `"grid:NX,NY,XMIN,XMAX,YMIN,YMAX"`.
    pub fn parse(field: &str, s: &str) -> CliResult<Points> {
        if let Some(rest) = s.strip_prefix("grid:") {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 6 {
                return Err(CliError::input(format!("{field}: grid needs NX,NY,XMIN,XMAX,YMIN,YMAX")));
            }
            let nx = parse_usize(field, parts[0])?;
            let ny = parse_usize(field, parts[1])?;
            let v: Vec<f64> = parts[2..].iter().map(|p| parse_f64(field, p)).collect::<CliResult<_>>()?;
            return Points::grid(field, nx, ny, &v);
        }
        let pts = s
            .split(';')
            .filter(|p| !p.trim().is_empty())
            .map(|p| {
                let xy: Vec<&str> = p.split(',').collect();
                if xy.len() != 2 {
                    return Err(CliError::input(format!("{field}: point '{p}' is not of the form x,y")));
                }
                Ok(Complex64::new(parse_f64(field, xy[0])?, parse_f64(field, xy[1])?))
            })
            .collect::<CliResult<Vec<_>>>()?;
        if pts.is_empty() {
            return Err(CliError::input(format!("{field}: no points given")));
        }
        Ok(Points::List(pts))
    }

    /// `nx × ny` nodes spanning `[xmin, xmax] × [ymin, ymax]`.
    pub fn grid(field: &str, nx: usize, ny: usize, range: &[f64]) -> CliResult<Points> {
        if nx == 0 || ny == 0 {
            return Err(CliError::input(format!("{field}: grid dimensions must be positive")));
        }
        if range.len() != 4 || range.iter().any(|v| !v.is_finite()) {
            return Err(CliError::input("--range: expected four finite values XMIN XMAX YMIN YMAX"));
        }
        Ok(Points::Grid { nx, ny, x: (range[0], range[1]), y: (range[2], range[3]) })
    }

    /// Grid dimensions and points in row-major order, `y` outer.
    pub fn expand(&self) -> (usize, usize, Vec<Complex64>) {
        match self {
            Points::List(p) => (p.len(), 1, p.clone()),
            Points::Grid { nx, ny, x, y } => {
                let at = |lo: f64, hi: f64, i: usize, n: usize| {
                    if n == 1 {
                        lo
                    } else {
                        lo + (hi - lo) * i as f64 / (n - 1) as f64
                    }
                };
                let pts = (0..*ny)
                    .flat_map(|j| (0..*nx).map(move |i| Complex64::new(at(x.0, x.1, i, *nx), at(y.0, y.1, j, *ny))))
                    .collect();
                (*nx, *ny, pts)
            }
        }
    }
}

pub fn veronese(n: usize, out: Option<&Path>) -> CliResult<()> {
    emit_json(&ModelSpecFile::veronese(n)?, out)
}

#[derive(Serialize)]
struct SecondFormOut {
    dxi2: Vec<Vec<[f64; 2]>>,
    dxi_dxibar: Vec<Vec<[f64; 2]>>,
    dxibar2: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize)]
struct PointOut {
    point: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    singular: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    metric: Option<MetricSample>,
    #[serde(skip_serializing_if = "Option::is_none")]
    christoffel: Option<Christoffel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gaussian_curvature: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    second_fundamental_form: Option<SecondFormOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_curvature: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(rename = "J", skip_serializing_if = "Option::is_none")]
    j: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    el_residual: Option<f64>,
}

impl PointOut {
    fn singular(z: Complex64, e: &CoreError) -> Self {
        PointOut {
            point: cx(z),
            singular: Some(e.to_string()),
            metric: None,
            christoffel: None,
            gaussian_curvature: None,
            second_fundamental_form: None,
            mean_curvature: None,
            j: None,
            el_residual: None,
        }
    }
}

#[derive(Serialize)]
struct AnalyzeReport {
    format_version: u32,
    #[serde(rename = "N")]
    n: usize,
    k: usize,
    chirality: cpsurf::Chirality,
    singular_count: usize,
    points: Vec<PointOut>,
}

fn analyze_one(solution: &Solution, z: Complex64) -> cpsurf::Result<PointOut> {
    let g = analyze_point(solution, z)?;
    let el = el_residual(&solution.projector(z, 2)?)?;
    Ok(PointOut {
        point: cx(z),
        singular: None,
        metric: Some(g.metric),
        christoffel: Some(g.christoffel),
        gaussian_curvature: Some(g.gaussian),
        second_fundamental_form: Some(SecondFormOut {
            dxi2: matrix(&g.second_form.dxi2),
            dxi_dxibar: matrix(&g.second_form.dxi_dxibar),
            dxibar2: matrix(&g.second_form.dxibar2),
        }),
        mean_curvature: Some(matrix(&g.mean_curvature)),
        j: Some(cx(-g.metric.g11)),
        el_residual: Some(el),
    })
}

/// Singular points are recorded in the report; any other failure aborts.
fn per_point<T, F>(points: &[Complex64], f: F, singular: impl Fn(Complex64, &CoreError) -> T + Sync) -> CliResult<Vec<T>>
where
    T: Send,
    F: Fn(Complex64) -> cpsurf::Result<T> + Sync,
{
    points
        .par_iter()
        .map(|&z| match f(z) {
            Ok(v) => Ok(v),
            Err(e) if is_singular(&e) => Ok(singular(z, &e)),
            Err(e) => Err(CliError::core(format!("point ({}, {})", z.re, z.im), e)),
        })
        .collect()
}

pub fn analyze(model: &ModelSpecFile, k: Option<usize>, points: &Points, out: Option<&Path>) -> CliResult<()> {
    let solution = model.solution(k)?;
    let (_, _, pts) = points.expand();
    let results = per_point(&pts, |z| analyze_one(&solution, z), PointOut::singular)?;
    let report = AnalyzeReport {
        format_version: FORMAT_VERSION,
        n: solution.dim(),
        k: solution.k,
        chirality: solution.chirality,
        singular_count: results.iter().filter(|p| p.singular.is_some()).count(),
        points: results,
    };
    emit_json(&report, out)
}

/// Coordinates of `X(ξ)`. Depth 0 uses the closed form; deeper members
/// integrate along the anchor path from `ξ = 1`, where `X` is set to zero.
fn immersion_coords(solution: &Solution, basis: &SuNBasis, z: Complex64) -> cpsurf::Result<Vec<f64>> {
    let three = solution.dim() == 3;
    if solution.k == 0 {
        let x = closed_form_at(solution, z)?;
        if three {
            return Ok(cp2_standard_coordinates(&x)?.to_vec());
        }
        return basis.coordinates(&x);
    }
    let x = immersion_polyline(solution, &anchor_path(z), DEFAULT_SEGMENTS, DEFAULT_NODES)?;
    let gm = basis.coordinates(&x)?;
    if three {
        return Ok(Cp2Frame::global().to_standard_linear(&gm).to_vec());
    }
    Ok(gm)
}

pub fn immerse(
    model: &ModelSpecFile,
    k: Option<usize>,
    points: &Points,
    out: &Path,
    obj: Option<&Path>,
    project: [usize; 3],
) -> CliResult<()> {
    let solution = model.solution(k)?;
    let basis = SuNBasis::gell_mann(solution.dim()).map_err(|e| CliError::core("N", e))?;
    let d = basis.generators().len();
    for (i, &c) in project.iter().enumerate() {
        if c == 0 || c > d {
            return Err(CliError::input(format!("--project[{i}]: coordinate {c} outside 1..={d}")));
        }
    }
    let (nx, ny, pts) = points.expand();
    let coords = per_point(&pts, |z| immersion_coords(&solution, &basis, z).map(Some), |_, _| None)?;
    let (labels, name) = if solution.dim() == 3 {
        ((1..=8).map(|i| format!("X{i}")).collect(), "cp2-standard")
    } else {
        (basis.labels(), "gell-mann")
    };
    let grid = SurfaceGrid { nx, ny, points: pts, coords, labels, basis: name.to_string() };
    write_text(out, &grid.csv())?;
    if let Some(obj) = obj {
        write_text(obj, &grid.obj([project[0] - 1, project[1] - 1, project[2] - 1]))?;
    }
    Ok(())
}

pub fn charge(model: &ModelSpecFile, k: Option<usize>, order: usize, out: Option<&Path>) -> CliResult<()> {
    let solution = model.solution(k)?;
    let r = charge_and_action(&solution, order).map_err(|e| CliError::core("charge", e))?;
    #[derive(Serialize)]
    struct ChargeOut {
        format_version: u32,
        #[serde(rename = "Q")]
        q: f64,
        action_energy: f64,
        q_refinement_error: f64,
        action_refinement_error: f64,
        quadrature_order: usize,
        charts_used: usize,
    }
    emit_json(
        &ChargeOut {
            format_version: FORMAT_VERSION,
            q: r.q,
            action_energy: r.action_energy,
            q_refinement_error: r.q_refinement_error,
            action_refinement_error: r.action_refinement_error,
            quadrature_order: r.quadrature_order,
            charts_used: r.charts_used,
        },
        out,
    )
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeedsFile {
    format_version: u32,
    seeds: Vec<[f64; 2]>,
    #[serde(default)]
    step: Option<f64>,
    #[serde(default)]
    max_steps: Option<usize>,
}

const DEFAULT_MAX_STEPS: usize = 200_000;

#[derive(Serialize)]
struct TrajectoryOut {
    seed: [f64; 2],
    step: f64,
    closed: bool,
    stop: StopReason,
    period_error: f64,
    arc_length: f64,
    omega_perimeter: f64,
    max_invariant_drift: f64,
    points: usize,
}

#[derive(Serialize)]
struct MeronOut {
    format_version: u32,
    c: [f64; 2],
    branch: i32,
    quadratic_differential: QuadDiffReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    trajectories: Option<Vec<TrajectoryOut>>,
}

fn read_seeds(path: &Path) -> CliResult<SeedsFile> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let s: SeedsFile = serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    if s.format_version != FORMAT_VERSION {
        return Err(CliError::input(format!("seeds.format_version: expected {FORMAT_VERSION}, got {}", s.format_version)));
    }
    if s.seeds.iter().flatten().any(|v| !v.is_finite()) {
        return Err(CliError::input("seeds: non-finite coordinate"));
    }
    Ok(s)
}

pub fn meron(
    model: &ModelSpecFile,
    report: Option<&Path>,
    seeds: Option<&Path>,
    out: Option<&Path>,
) -> CliResult<()> {
    let spec = model.meron_spec()?;
    let block = model.meron.as_ref().expect("validated meron block");
    let f = spec.f();
    let quad = quad_diff_report(f).map_err(|e| CliError::core("meron.F", e))?;
    let trajectories = match seeds {
        None => None,
        Some(path) => {
            let file = read_seeds(path)?;
            let max_steps = file.max_steps.unwrap_or(DEFAULT_MAX_STEPS);
            let traced = file
                .seeds
                .par_iter()
                .enumerate()
                .map(|(i, s)| {
                    let seed = Complex64::new(s[0], s[1]);
                    let ctx = format!("seeds[{i}]");
                    let step = match file.step {
                        Some(h) => h,
                        None => default_step(f, seed).map_err(|e| CliError::core(&ctx, e))?,
                    };
                    let t = trace_trajectory(f, seed, step, max_steps).map_err(|e| CliError::core(&ctx, e))?;
                    Ok((step, t))
                })
                .collect::<CliResult<Vec<_>>>()?;
            if let Some(out) = out {
                let mut csv = String::from("trajectory,index,x,y\n");
                for (i, (_, t)) in traced.iter().enumerate() {
                    for (j, p) in t.points.iter().enumerate() {
                        csv.push_str(&format!("{i},{j},{},{}\n", num(p.re), num(p.im)));
                    }
                }
                write_text(out, &csv)?;
            }
            Some(
                traced
                    .into_iter()
                    .map(|(step, t)| TrajectoryOut {
                        seed: cx(t.seed),
                        step,
                        closed: t.closed,
                        stop: t.stop,
                        period_error: t.period_error,
                        arc_length: t.arc_length,
                        omega_perimeter: t.omega_perimeter,
                        max_invariant_drift: t.max_invariant_drift,
                        points: t.points.len(),
                    })
                    .collect(),
            )
        }
    };
    emit_json(
        &MeronOut { format_version: FORMAT_VERSION, c: block.c, branch: block.branch, quadratic_differential: quad, trajectories },
        report,
    )
}

/// Prints one line per criterion; fails with exit code 1 if any criterion fails.
pub fn verify(json: Option<&PathBuf>) -> CliResult<()> {
    let results: Vec<CriterionResult> = run_all();
    for r in &results {
        println!("{}", r.line());
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if let Some(path) = json {
        write_text(path, &crate::output::to_json(&results))?;
    }
    if failed > 0 {
        return Err(CliError::Verification(format!("{failed} criteria failed")));
    }
    Ok(())
}
