//! Outer max-min problem: deform the contour until the equilibrium energy is
//! stationary under every local perturbation, then certify the result.

mod diagnostics;

pub use diagnostics::{
    algebraic_residual, attach_omegas, criticality_residual, field_scale, node_spacing,
    omega_constants, perturbation_basis, probe_circle, r_from_measure, s_residual, support_arcs,
    t_polynomial, AlgebraicReport, SupportArc,
};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{el_report, solve_on_layout, EquilibriumOptions, EquilibriumResult};
use crate::error::{Error, Result};
use crate::geometry::{initial_contour, Contour, ForbiddenRegion, JoinParams, NoncrossingPartition};
use crate::measure::{
    active_threshold, energy_derivative_with, node_forces, weighted_energy, PerturbationField,
};
use crate::poly::{sectors, SectorSet};
use crate::{Measure, Poly};

pub const SCHEMA: &str = "scurve/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    /// Number of measure nodes.
    pub n: usize,
    /// Inner Euler–Lagrange tolerance.
    pub tol: f64,
    /// Outer stopping threshold on the criticality residual.
    pub crit_tol: f64,
    #[serde(alias = "max_iter")]
    pub max_outer: usize,
    /// Independent starts; the first one is unperturbed.
    pub restarts: usize,
    /// Depth of the forbidden sublevel set; derived from the field when absent.
    #[serde(rename = "M")]
    pub m: Option<f64>,
    pub margin: f64,
    #[serde(rename = "R_trunc")]
    pub r_trunc: Option<f64>,
    pub seed: u64,
    /// Resample to equal arclength after this many accepted steps.
    pub remesh_every: usize,
    /// Width, in node spacings, of the Gaussian smoothing applied at every
    /// resample.
    pub smoothing: f64,
    /// Bump bandwidth in node spacings.
    pub bandwidth: f64,
    /// Bumps sit on every `stride`-th active node.
    pub stride: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            n: 400,
            tol: 1e-9,
            crit_tol: 5e-4,
            max_outer: 400,
            restarts: 3,
            m: None,
            margin: 1.0,
            r_trunc: None,
            seed: 0,
            remesh_every: 5,
            smoothing: 6.0,
            bandwidth: 6.0,
            stride: 4,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// Euler–Lagrange residual on probes between the nodes.
    pub el: f64,
    pub criticality: f64,
    pub algebraic: f64,
    pub s_property: f64,
    /// `max |V'|` over the support; `s_property` is judged relative to it.
    pub field_scale: f64,
    /// `max_j |omega_j - l|`.
    pub omega_spread: f64,
}

/// Thresholds a solution has to meet to be reported as certified.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub el: f64,
    pub criticality: f64,
    pub algebraic: f64,
    /// Relative to `field_scale`.
    pub s_property: f64,
}

impl Tolerances {
    pub fn for_params(p: &SolverParams) -> Self {
        Self {
            el: 1e-2,
            criticality: p.crit_tol,
            algebraic: 1e-2,
            s_property: 5e-2,
        }
    }

    pub fn accepts(&self, r: &Residuals) -> bool {
        r.el <= self.el
            && r.criticality <= self.criticality
            && r.algebraic <= self.algebraic
            && r.s_property <= self.s_property * r.field_scale.max(1e-12)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SCurveSolution {
    pub schema: String,
    #[serde(rename = "V")]
    pub v: Poly,
    pub partition: NoncrossingPartition,
    pub params: SolverParams,
    pub contour: Contour,
    pub mu: Measure,
    pub l: f64,
    #[serde(rename = "R")]
    pub r: Poly,
    #[serde(rename = "T")]
    pub t: Poly,
    pub arcs: Vec<SupportArc>,
    pub residuals: Residuals,
    pub energy: f64,
    pub converged: bool,
    pub outer_iterations: usize,
    /// Inner energy after every accepted outer step.
    pub energy_history: Vec<f64>,
    /// Index of the start that produced this solution.
    pub restart: usize,
}

impl SCurveSolution {
    pub fn spacing(&self) -> f64 {
        node_spacing(&self.mu)
    }

    /// Endpoints of every support arc.
    pub fn endpoints(&self) -> Vec<Complex64> {
        self.arcs
            .iter()
            .flat_map(|a| [a.polyline[0], *a.polyline.last().unwrap()])
            .collect()
    }

    pub fn support_points(&self) -> Vec<Complex64> {
        self.mu.active().into_iter().map(|i| self.mu.points[i]).collect()
    }

    pub fn certified(&self) -> bool {
        self.converged && Tolerances::for_params(&self.params).accepts(&self.residuals)
    }
}

/// Bundle of everything derived from a field and its constraint set.
struct Setup {
    v: Poly,
    partition: NoncrossingPartition,
    sectors: SectorSet,
    forbidden: ForbiddenRegion,
    join: JoinParams,
}

impl Setup {
    fn new(v: &Poly, partition: &NoncrossingPartition, p: &SolverParams) -> Result<Self> {
        let sectors = sectors(v)?;
        let n = sectors.degree;
        if partition.n() != n {
            return Err(Error::Validation(format!(
                "partition is over {} sectors but deg V = {n}",
                partition.n()
            )));
        }
        if p.n < 50 {
            return Err(Error::Validation(format!("need at least 50 nodes, got {}", p.n)));
        }
        let a0 = v.leading().unwrap();
        let center = -v.coeff(n - 1) / (a0 * n as f64);
        let r_est = (4.0 / a0.norm()).powf(1.0 / n as f64)
            + (0..n - 1)
                .map(|k| (v.coeff(k).norm() / a0.norm()).powf(1.0 / (n - k) as f64))
                .fold(0.0, f64::max);
        let r_trunc = p.r_trunc.unwrap_or(1.5 * r_est);
        let r_join = 0.5 * r_est.min(r_trunc);
        let mut m = p.m.unwrap_or_else(|| {
            // well below the field anywhere near the initial contour
            let deepest = (0..64)
                .map(|k| v.re_at(center + Complex64::from_polar(r_trunc, std::f64::consts::TAU * k as f64 / 64.0)))
                .fold(0.0f64, |a, x| a.max(x.abs()));
            2.0 * deepest.max(1.0)
        });
        let forbidden = loop {
            match ForbiddenRegion::new(v, m, p.margin) {
                Ok(f) => break f,
                Err(Error::Configuration(_)) if p.m.is_none() && m < 1e12 => m *= 2.0,
                Err(e) => return Err(e),
            }
        };
        let join = JoinParams {
            center,
            r_join,
            r_trunc,
            spacing: r_trunc / p.n as f64,
        };
        Ok(Self {
            v: v.clone(),
            partition: partition.clone(),
            sectors,
            forbidden,
            join,
        })
    }

    fn admissible(&self, c: &Contour) -> Result<()> {
        if let Some(&z) = c.nodes().find(|&&z| self.forbidden.contains(z)) {
            return Err(Error::ConstraintViolation(z));
        }
        Ok(())
    }
}

/// State of one ascent run.
struct Run {
    contour: Contour,
    eq: EquilibriumResult,
    iterations: usize,
    history: Vec<f64>,
    crit: f64,
    converged: bool,
}

fn inner(contour: &Contour, v: &Poly, p: &SolverParams, warm: Option<&[f64]>) -> Result<EquilibriumResult> {
    let opts = EquilibriumOptions {
        tol: p.tol,
        ..Default::default()
    };
    solve_on_layout(&contour.layout(), v, &opts, warm)
}

/// Normal and tangential bumps the criticality residual is measured on.
fn full_basis(mu: &Measure, p: &SolverParams) -> Vec<PerturbationField<f64>> {
    perturbation_basis(mu, p.bandwidth * node_spacing(mu), p.stride, true)
}

/// Moves ray tips outward while the support reaches into the last tenth of
/// a ray.
fn ensure_slack(setup: &Setup, run: &mut Run, p: &SolverParams) -> Result<()> {
    for _ in 0..3 {
        let thr = active_threshold::<f64>(run.eq.mu.len());
        let c = setup.join.center;
        let reach = run
            .eq
            .mu
            .points
            .iter()
            .zip(&run.eq.mu.weights)
            .filter(|(_, &w)| w > thr)
            .map(|(z, _)| (z - c).norm())
            .fold(0.0, f64::max);
        let tips = run
            .contour
            .rays
            .iter()
            .map(|t| (run.contour.end_point(t.arc, t.end) - c).norm())
            .fold(f64::INFINITY, f64::min);
        if reach < 0.9 * tips {
            return Ok(());
        }
        let longer = run
            .contour
            .extend_rays(c, 1.5, setup.join.spacing)
            .resample(p.n);
        setup.admissible(&longer)?;
        run.eq = inner(&longer, &setup.v, p, None)?;
        run.contour = longer;
    }
    Ok(())
}

/// Steepest ascent of the inner energy in the span of normal bumps.
fn ascend(setup: &Setup, start: Contour, p: &SolverParams) -> Result<Run> {
    let v = &setup.v;
    let contour = start.resample(p.n);
    setup.admissible(&contour)?;
    let eq = inner(&contour, v, p, None)?;
    let mut run = Run {
        history: vec![eq.energy],
        contour,
        eq,
        iterations: 0,
        crit: f64::INFINITY,
        converged: false,
    };
    ensure_slack(setup, &mut run, p)?;

    let mut t_disp = node_spacing(&run.eq.mu);
    let mut accepted = 0usize;
    while run.iterations < p.max_outer {
        let mu = &run.eq.mu;
        let h = node_spacing(mu);
        run.crit = criticality_residual(mu, v, &full_basis(mu, p));
        if run.crit <= p.crit_tol {
            run.converged = true;
            break;
        }
        run.iterations += 1;

        let forces = node_forces(mu, v);
        let basis = perturbation_basis(mu, p.bandwidth * h, p.stride, false);
        let coeffs: Vec<f64> = basis
            .iter()
            .map(|b| energy_derivative_with(mu, &forces, b))
            .collect();
        let field = |z: Complex64| -> Complex64 {
            basis
                .iter()
                .zip(&coeffs)
                .map(|(b, &c)| b.eval(z) * c)
                .sum()
        };
        let peak = run
            .contour
            .nodes()
            .map(|&z| field(z).norm())
            .fold(0.0, f64::max);
        if peak == 0.0 {
            break;
        }
        let t_max = p.bandwidth * h;
        t_disp = t_disp.min(t_max);
        let scale = t_disp / peak;
        let trial = displace_normal(&run.contour, |z| field(z) * scale);
        let outcome = setup
            .admissible(&trial)
            .and_then(|_| inner(&trial, v, p, Some(&run.eq.mu.weights)));
        match outcome {
            Ok(eq) if eq.energy > run.eq.energy => {
                run.contour = trial;
                run.eq = eq;
                accepted += 1;
                t_disp *= 1.5;
                if accepted.is_multiple_of(p.remesh_every.max(1)) {
                    let fresh = run.contour.smooth(p.smoothing * h).resample(p.n);
                    // a remesh is not an outer step: keep it only if the energy does not drop
                    if let Some(eq) = inner(&fresh, v, p, Some(&run.eq.mu.weights)).ok().filter(|eq| eq.energy >= run.eq.energy) {
                        run.eq = eq;
                        run.contour = fresh;
                        ensure_slack(setup, &mut run, p)?;
                    }
                }
                run.history.push(run.eq.energy);
            }
            _ => {
                t_disp *= 0.5;
                if t_disp < 1e-6 * h {
                    break;
                }
            }
        }
    }
    if !run.converged {
        let mu = &run.eq.mu;
        run.crit = criticality_residual(mu, v, &full_basis(mu, p));
        run.converged = run.crit <= p.crit_tol;
    }
    Ok(run)
}

/// Moves every interior vertex by the normal component of `d`; arc ends
/// move by the full field.
fn displace_normal(c: &Contour, d: impl Fn(Complex64) -> Complex64) -> Contour {
    let mut out = c.clone();
    for (arc, src) in out.arcs.iter_mut().zip(&c.arcs) {
        for i in 0..src.len() {
            let dz = d(src[i]);
            arc[i] = if i == 0 || i + 1 == src.len() {
                src[i] + dz
            } else {
                let t = src[i + 1] - src[i - 1];
                let n = t.unscale(t.norm()) * Complex64::i();
                src[i] + n * (dz * n.conj()).re
            };
        }
    }
    out
}

/// Initial contour, randomly dented by a few normal bumps for `restart > 0`.
fn start_contour(setup: &Setup, restart: usize, seed: u64) -> Result<Contour> {
    let raw = initial_contour(&setup.partition, &setup.sectors, &setup.join, Some(&setup.forbidden))?;
    // round the joins; the corners only slow the ascent down
    let rounded = raw.smooth(0.5 * setup.join.r_join);
    let base = if setup.admissible(&rounded).is_ok() { rounded } else { raw };
    if restart == 0 {
        return Ok(base);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (restart as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let j = &setup.join;
    let near: Vec<Complex64> = base
        .nodes()
        .copied()
        .filter(|z| (z - j.center).norm() < 1.5 * j.r_join)
        .collect();
    let mut amp = 0.3 * j.r_join;
    for _ in 0..6 {
        let centers: Vec<Complex64> = (0..3).map(|_| near[rng.random_range(0..near.len())]).collect();
        let dirs: Vec<Complex64> = (0..3)
            .map(|_| Complex64::from_polar(amp * rng.random_range(-1.0..1.0), rng.random_range(0.0..std::f64::consts::TAU)))
            .collect();
        let bumps = PerturbationField::new(centers, dirs, j.r_join / 3.0)?;
        let dented = base.map_nodes(|z| z + bumps.eval(z));
        if setup.admissible(&dented).is_ok() && dented.max_turning_angle() < 2.0 {
            return Ok(dented);
        }
        amp *= 0.5;
    }
    Ok(base)
}

/// Max-min solve: several independent ascents, best energy among the
/// converged ones (or overall if none converged).
///
/// A run that stalls above `crit_tol` yields [`Error::Stagnation`] carrying
/// the assembled best iterate.
pub fn maxmin_solve(v: &Poly, partition: &NoncrossingPartition, params: &SolverParams) -> Result<SCurveSolution> {
    let setup = Setup::new(v, partition, params)?;
    let runs: Vec<(usize, Result<Run>)> = (0..params.restarts.max(1))
        .into_par_iter()
        .map(|k| (k, start_contour(&setup, k, params.seed).and_then(|c| ascend(&setup, c, params))))
        .collect();
    let mut ok: Vec<(usize, Run)> = Vec::new();
    let mut first_err = None;
    for (k, r) in runs {
        match r {
            Ok(run) => ok.push((k, run)),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    let best = ok.into_iter().max_by(|a, b| {
        (a.1.converged, a.1.eq.energy)
            .partial_cmp(&(b.1.converged, b.1.eq.energy))
            .unwrap()
    });
    let Some((k, run)) = best else {
        return Err(first_err.unwrap());
    };
    let sol = assemble(&setup, params, run, k);
    if sol.converged {
        Ok(sol)
    } else {
        Err(Error::Stagnation {
            residual: sol.residuals.criticality,
            best: Box::new(sol),
        })
    }
}

fn assemble(setup: &Setup, params: &SolverParams, run: Run, restart: usize) -> SCurveSolution {
    let v = &setup.v;
    let mu = run.eq.mu;
    let layout = run.contour.layout();
    let r = r_from_measure(&mu, v);
    let t = t_polynomial(&r, v);
    let mut arcs = support_arcs(&mu, &layout.arc_of);
    attach_omegas(&mu, v, &mut arcs);
    let residuals = compute_residuals(v, &run.contour, &mu, run.eq.l, &r, &arcs, params, Some(run.crit));
    SCurveSolution {
        schema: SCHEMA.into(),
        v: v.clone(),
        partition: setup.partition.clone(),
        params: params.clone(),
        contour: run.contour,
        energy: weighted_energy(&mu, v),
        mu,
        l: run.eq.l,
        r,
        t,
        arcs,
        residuals,
        converged: run.converged,
        outer_iterations: run.iterations,
        energy_history: run.history,
        restart,
    }
}

/// Default probe circle for the algebraic residual: radius twice the
/// support radius about its centroid, 32 points.
pub fn default_probes(mu: &Measure) -> Vec<Complex64> {
    let act = mu.active();
    let c = act.iter().map(|&i| mu.points[i]).sum::<Complex64>() / act.len().max(1) as f64;
    let rad = act.iter().map(|&i| (mu.points[i] - c).norm()).fold(0.0, f64::max);
    probe_circle(c, 2.0 * rad.max(0.5), 32)
}

/// Every residual recomputed from raw solution data. `criticality`, when
/// already known, is reused.
#[allow(clippy::too_many_arguments)]
pub fn compute_residuals(
    v: &Poly,
    contour: &Contour,
    mu: &Measure,
    l: f64,
    r: &Poly,
    arcs: &[SupportArc],
    params: &SolverParams,
    criticality: Option<f64>,
) -> Residuals {
    let el = el_report(mu, l, contour, v);
    let h = node_spacing(mu);
    Residuals {
        el: el.supp.max(el.off),
        criticality: criticality.unwrap_or_else(|| criticality_residual(mu, v, &full_basis(mu, params))),
        algebraic: algebraic_residual(mu, v, r, &default_probes(mu)).residual,
        s_property: s_residual(mu, v, arcs, 3.0 * h),
        field_scale: field_scale(mu, v),
        omega_spread: arcs
            .iter()
            .filter_map(|a| a.omega)
            .map(|o| (o - l).abs())
            .fold(0.0, f64::max),
    }
}

/// Residuals of a stored solution, recomputed from its contour, measure and
/// field only.
pub fn recheck(sol: &SCurveSolution) -> Residuals {
    let r = r_from_measure(&sol.mu, &sol.v);
    let layout = sol.contour.layout();
    let mut arcs = support_arcs(&sol.mu, &layout.arc_of);
    attach_omegas(&sol.mu, &sol.v, &mut arcs);
    compute_residuals(&sol.v, &sol.contour, &sol.mu, sol.l, &r, &arcs, &sol.params, None)
}

/// Equilibrium of `contour` at `params.n` nodes, packaged like a max-min
/// solution but without any outer iteration. Useful as a negative control.
pub fn evaluate_contour(v: &Poly, partition: &NoncrossingPartition, contour: &Contour, params: &SolverParams) -> Result<SCurveSolution> {
    let setup = Setup::new(v, partition, params)?;
    let contour = contour.resample(params.n);
    let eq = inner(&contour, v, params, None)?;
    let crit = criticality_residual(&eq.mu, v, &full_basis(&eq.mu, params));
    let run = Run {
        history: vec![eq.energy],
        contour,
        eq,
        iterations: 0,
        crit,
        converged: crit <= params.crit_tol,
    };
    Ok(assemble(&setup, params, run, 0))
}
