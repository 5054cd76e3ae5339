use std::fs;
use std::path::{Path, PathBuf};

use scurve_core::dd::DoubleDouble;
use scurve_core::geometry::directed_to_polyline;
use scurve_core::ortho::{moments, orthogonal_poly, zero_counting_compare, zeros_f64, F64_DEGREE_CAP};
use scurve_core::quaddiff::{critical_graph, trace as trace_one, CriticalGraph, Kind};
use scurve_core::scalar::Real;
use scurve_core::scurve::{maxmin_solve, recheck, Residuals, SCurveSolution, Tolerances, SCHEMA};
use scurve_core::{Error, Poly, C64};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::plot::{graph_plot, solution_plot};
use crate::spec::{check_schema, Grid, Precision, ProblemSpec, TraceSpec};
use crate::{CliError, Outcome, EXIT_INVALID, EXIT_OK, EXIT_UNCERTIFIED};

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.display().to_string(), e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    Ok(path)
}

fn to_json<T: Serialize>(x: &T) -> String {
    serde_json::to_string_pretty(x).expect("serializable")
}

/// A stalled ascent still yields its best iterate.
fn solve_spec(spec: &ProblemSpec, seed: Option<u64>) -> Result<SCurveSolution, CliError> {
    let p = spec.prepare(seed)?;
    match maxmin_solve(&p.v, &p.partition, &p.params) {
        Ok(sol) => Ok(sol),
        Err(Error::Stagnation { best, .. }) => Ok(*best),
        Err(e) => Err(e.into()),
    }
}

fn solution_summary(sol: &SCurveSolution, files: &[PathBuf]) -> serde_json::Value {
    json!({
        "schema": SCHEMA,
        "status": if sol.certified() { "certified" } else if sol.converged { "uncertified" } else { "not_converged" },
        "energy": sol.energy,
        "l": sol.l,
        "R": sol.r,
        "residuals": sol.residuals,
        "outer_iterations": sol.outer_iterations,
        "seed": sol.params.seed,
        "files": files,
    })
}

/// `solve`: max-min solve, solution JSON, optional SVG and moment report.
/// Exit 0 iff the solution is certified; 2 with partial output otherwise.
pub fn solve(spec_path: &Path, out: &Path, seed: Option<u64>, svg: bool) -> Result<Outcome, CliError> {
    let spec = ProblemSpec::load(spec_path)?;
    let sol = solve_spec(&spec, seed)?;
    let mut files = Vec::new();
    if spec.outputs.solution {
        files.push(write(out, "solution.json", &to_json(&sol))?);
    }
    if svg || spec.outputs.svg {
        files.push(write(out, "solution.svg", &solution_plot(&sol).render())?);
    }
    let mut code = if sol.certified() { EXIT_OK } else { EXIT_UNCERTIFIED };
    let mut summary = solution_summary(&sol, &files);
    if spec.outputs.ortho_report {
        let report = ortho_report(&sol, &spec);
        if !report.complete() {
            code = EXIT_UNCERTIFIED;
        }
        let path = write(out, "ortho.json", &to_json(&report))?;
        summary["files"].as_array_mut().unwrap().push(json!(path));
    }
    Ok(Outcome { code, summary })
}

/// `ortho`: solve, then orthogonal polynomials of the requested degrees on
/// the computed contour with zero-counting discrepancies against `mu`.
pub fn ortho(spec_path: &Path, out: &Path, seed: Option<u64>, svg: bool) -> Result<Outcome, CliError> {
    let spec = ProblemSpec::load(spec_path)?;
    let sol = solve_spec(&spec, seed)?;
    let report = ortho_report(&sol, &spec);
    let mut files = vec![write(out, "ortho.json", &to_json(&report))?];
    if svg || spec.outputs.svg {
        let mut plot = solution_plot(&sol);
        for e in &report.degrees {
            for z in &e.zeros {
                plot.marker(C64::new(z[0], z[1]), "#2a9d3a");
            }
        }
        files.push(write(out, "ortho.svg", &plot.render())?);
    }
    let code = if sol.certified() && report.complete() { EXIT_OK } else { EXIT_UNCERTIFIED };
    Ok(Outcome {
        code,
        summary: json!({ "schema": SCHEMA, "solution_certified": sol.certified(), "report": report, "files": files }),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrthoEntry {
    pub degree: usize,
    pub precision: Precision,
    pub condition: Option<f64>,
    pub residual: Option<f64>,
    pub discrepancy: Option<f64>,
    /// Largest distance from a zero to the support.
    pub max_zero_distance: Option<f64>,
    pub zeros: Vec<[f64; 2]>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrthoReport {
    pub schema: String,
    pub degrees: Vec<OrthoEntry>,
    /// Discrepancy strictly decreasing along the successful degrees.
    pub decreasing: bool,
}

impl OrthoReport {
    pub fn complete(&self) -> bool {
        self.degrees.iter().all(|e| e.error.is_none())
    }
}

struct OrthoData {
    condition: f64,
    residual: f64,
    discrepancy: f64,
    zeros: Vec<C64>,
}

fn ortho_at<T: Real>(sol: &SCurveSolution, degree: usize, quad_tol: f64) -> Result<OrthoData, Error> {
    let table = moments::<T>(&sol.contour, &sol.v, degree, 2 * degree, quad_tol)?;
    let p = orthogonal_poly(&table, degree)?;
    Ok(OrthoData {
        condition: p.condition,
        residual: p.residual,
        discrepancy: zero_counting_compare(&p.poly, &sol.mu)?,
        zeros: zeros_f64(&p.poly)?,
    })
}

pub fn ortho_report(sol: &SCurveSolution, spec: &ProblemSpec) -> OrthoReport {
    let opts = &spec.ortho;
    let support: Vec<&[C64]> = sol.arcs.iter().map(|a| a.polyline.as_slice()).collect();
    let degrees: Vec<OrthoEntry> = opts
        .degrees
        .iter()
        .map(|&d| {
            let precision = match opts.precision {
                Precision::Auto if d > F64_DEGREE_CAP => Precision::DoubleDouble,
                Precision::Auto => Precision::F64,
                p => p,
            };
            let res = match precision {
                Precision::DoubleDouble => ortho_at::<DoubleDouble>(sol, d, opts.quad_tol),
                _ => ortho_at::<f64>(sol, d, opts.quad_tol),
            };
            match res {
                Ok(o) => OrthoEntry {
                    degree: d,
                    precision,
                    condition: Some(o.condition),
                    residual: Some(o.residual),
                    discrepancy: Some(o.discrepancy),
                    max_zero_distance: Some(
                        o.zeros
                            .iter()
                            .map(|z| {
                                support
                                    .iter()
                                    .map(|arc| directed_to_polyline(std::slice::from_ref(z), arc))
                                    .fold(f64::INFINITY, f64::min)
                            })
                            .fold(0.0, f64::max),
                    ),
                    zeros: o.zeros.iter().map(|z| [z.re, z.im]).collect(),
                    error: None,
                },
                Err(e) => OrthoEntry {
                    degree: d,
                    precision,
                    condition: None,
                    residual: None,
                    discrepancy: None,
                    max_zero_distance: None,
                    zeros: Vec::new(),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let ds: Vec<f64> = degrees.iter().filter_map(|e| e.discrepancy).collect();
    OrthoReport {
        schema: SCHEMA.into(),
        decreasing: ds.windows(2).all(|w| w[1] < w[0]),
        degrees,
    }
}

/// Trajectories through regular points, each traced both ways and joined.
fn grid_lines(r: &Poly, grid: &Grid, spec: &TraceSpec) -> Result<Vec<scurve_core::quaddiff::Trajectory>, Error> {
    let pts = grid.points();
    let mut opts = spec.options.clone();
    // the default escape radius only knows about the zeros
    let reach = pts.iter().map(|z| z.norm()).fold(0.0, f64::max);
    opts.r_max = Some(opts.r_max.unwrap_or(0.0).max(2.0 * reach + 2.0));
    let mut out = Vec::new();
    for z0 in pts {
        let q = r.eval(z0).sqrt();
        let dir = match opts.kind {
            // -R dz^2 > 0  <=>  dz parallel to i / sqrt(R)
            Kind::Horizontal => (C64::i() / q).arg(),
            Kind::Vertical => (C64::new(1.0, 0.0) / q).arg(),
        };
        let fwd = trace_one(r, z0, dir, &opts)?;
        let back = trace_one(r, z0, dir + std::f64::consts::PI, &opts)?;
        let mut line = back.reversed();
        line.nodes.extend(fwd.nodes.iter().skip(1));
        line.end = fwd.end;
        line.arclength += fwd.arclength;
        line.level_drift = line.level_drift.max(fwd.level_drift);
        out.push(line);
    }
    Ok(out)
}

/// `trace`: critical graph of `-R dz^2` as JSON and SVG.
pub fn trace(spec_path: &Path, out: &Path) -> Result<Outcome, CliError> {
    let spec = TraceSpec::load(spec_path)?;
    let r = &spec.r;
    let mut graph = if r.degree() == Some(0) {
        CriticalGraph { zeros: Vec::new(), infinity: Vec::new(), trajectories: Vec::new() }
    } else {
        critical_graph(r, &spec.options)?
    };
    let grid = match (&spec.grid, r.degree()) {
        (Some(g), _) => Some(g.clone()),
        (None, Some(0)) => Some(Grid::default()),
        _ => None,
    };
    if let Some(g) = grid {
        graph.trajectories.extend(grid_lines(r, &g, &spec)?);
    }
    let doc = json!({ "schema": SCHEMA, "R": r, "graph": graph });
    let files = vec![
        write(out, "trace.json", &to_json(&doc))?,
        write(out, "trace.svg", &graph_plot(&graph).render())?,
    ];
    Ok(Outcome {
        code: EXIT_OK,
        summary: json!({
            "schema": SCHEMA,
            "zeros": graph.zeros.len(),
            "infinity_directions": graph.infinity,
            "trajectories": graph.trajectories.len(),
            "bounded": graph.bounded().count(),
            "truncated": graph.truncated().count(),
            "files": files,
        }),
    })
}

/// Relative disagreement above which `check` flags a residual.
pub const MISMATCH: f64 = 0.1;

fn mismatch(stored: f64, fresh: f64) -> bool {
    let scale = stored.abs().max(fresh.abs());
    (stored - fresh).abs() > MISMATCH * scale && (stored - fresh).abs() > 1e-12
}

#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub schema: &'static str,
    pub stored: Residuals,
    pub recomputed: Residuals,
    /// Residuals whose stored and recomputed values differ by more than 10%.
    pub flags: Vec<&'static str>,
    /// Recomputed residuals within the solver's tolerances.
    pub within_tolerance: bool,
}

pub fn check_solution(sol: &SCurveSolution) -> CheckReport {
    let fresh = recheck(sol);
    let s = &sol.residuals;
    let flags = [
        ("el", s.el, fresh.el),
        ("criticality", s.criticality, fresh.criticality),
        ("algebraic", s.algebraic, fresh.algebraic),
        ("s_property", s.s_property, fresh.s_property),
    ]
    .into_iter()
    .filter(|&(_, a, b)| mismatch(a, b))
    .map(|(name, ..)| name)
    .collect();
    CheckReport {
        schema: SCHEMA,
        stored: *s,
        within_tolerance: Tolerances::for_params(&sol.params).accepts(&fresh),
        recomputed: fresh,
        flags,
    }
}

/// `check`: recompute every residual of a stored solution. Exit 0 when all
/// four agree with the stored values, 2 when any is flagged.
pub fn check(path: &Path) -> Result<Outcome, CliError> {
    let sol: SCurveSolution = crate::spec::read_json(path)?;
    check_schema(&sol.schema)?;
    let report = check_solution(&sol);
    let code = if report.flags.is_empty() { EXIT_OK } else { EXIT_UNCERTIFIED };
    Ok(Outcome { code, summary: serde_json::to_value(&report).expect("serializable") })
}

/// Maps a command result onto an exit code and the JSON lines for stdout
/// and stderr.
pub fn finish(res: Result<Outcome, CliError>) -> (i32, Option<String>, Option<String>) {
    match res {
        Ok(o) => (o.code, Some(o.summary.to_string()), None),
        Err(e) => (EXIT_INVALID, None, Some(serde_json::to_string(&crate::Diagnostic::from(&e)).unwrap())),
    }
}
