//! Time integration of `∂ₜf = −θʳ W(f)`; without a cutoff `θ ≡ 1`.
//!
//! Vertices are frozen (never moved) where `θʳ = 0` or where the analysis
//! marks them unreliable, i.e. inside the boundary collar.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::curvature::{analyze_surface, AnalysisOptions, SurfaceAnalysis};
use crate::cutoff::{weight_field, RadialCutoff};
use crate::error::{Error, Result};
use crate::mesh::ImmersedMesh;
use crate::monitor::{report, EnergyReport, ReportOptions};
use crate::numeric::canonical_sum;
use crate::sparse::Biharmonic;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ExplicitEuler,
    /// Componentwise bi-Laplacian implicit, the remainder of `W` explicit.
    SemiImplicit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtPolicy {
    Fixed(f64),
    /// `dt = c_stab · h_min⁴`, re-evaluated every step.
    Auto { c_stab: f64 },
}

pub const DEFAULT_C_STAB: f64 = 0.05;
pub const DEFAULT_Q_MIN: f64 = 0.1;
/// Relative residual the implicit solves must reach.
pub const SOLVE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbortCriteria {
    /// Minimum triangle quality `2r/R`.
    pub q_min: f64,
    pub max_sup_a: f64,
}

impl Default for AbortCriteria {
    fn default() -> Self {
        AbortCriteria { q_min: DEFAULT_Q_MIN, max_sup_a: f64::INFINITY }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub scheme: Scheme,
    pub dt_policy: DtPolicy,
    pub t_end: f64,
    pub cutoff: Option<RadialCutoff>,
    /// Reports and snapshots every this many steps (and at the end).
    pub record_every: usize,
    pub abort: AbortCriteria,
    pub analysis: AnalysisOptions,
    pub report: ReportOptions,
}

impl FlowConfig {
    pub fn new(scheme: Scheme, dt_policy: DtPolicy, t_end: f64) -> Self {
        FlowConfig {
            scheme,
            dt_policy,
            t_end,
            cutoff: None,
            record_every: 1,
            abort: AbortCriteria::default(),
            analysis: AnalysisOptions::default(),
            report: ReportOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::invalid("t_end must be positive and finite"));
        }
        match self.dt_policy {
            DtPolicy::Fixed(dt) if !(dt > 0.0) || !dt.is_finite() => {
                return Err(Error::invalid("fixed dt must be positive and finite"))
            }
            DtPolicy::Auto { c_stab } if !(c_stab > 0.0 && c_stab <= 1.0) => {
                return Err(Error::invalid("c_stab must lie in (0, 1]"))
            }
            _ => {}
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record_every must be at least 1"));
        }
        if !(self.abort.q_min > 0.0 && self.abort.q_min < 1.0) {
            return Err(Error::invalid("q_min must lie in (0, 1)"));
        }
        if !(self.abort.max_sup_a > 0.0) {
            return Err(Error::invalid("max_sup_a must be positive"));
        }
        if self.analysis.collar < 1 {
            return Err(Error::invalid("boundary collar must be at least one ring"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FlowState {
    pub mesh: ImmersedMesh,
    pub t: f64,
    pub step_count: usize,
    pub last_report: EnergyReport,
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    /// `(step, t, mesh)` at recording steps.
    pub snapshots: Vec<(usize, f64, ImmersedMesh)>,
    pub reports: Vec<EnergyReport>,
    /// Accumulated dissipation at the time of each report.
    pub dissipation: Vec<f64>,
    /// `∫₀ᵗ Σᵢ θᵢʳ |Wᵢ|² μᵢ dt'`, trapezoid rule.
    pub dissipation_accum: f64,
}

impl Trajectory {
    pub fn final_mesh(&self) -> Option<&ImmersedMesh> {
        self.snapshots.last().map(|s| &s.2)
    }

    fn record(&mut self, step: usize, mesh: &ImmersedMesh, report: EnergyReport) {
        self.snapshots.push((step, report.t, mesh.clone()));
        self.reports.push(report);
        self.dissipation.push(self.dissipation_accum);
    }
}

/// A run stopped before `t_end`; carries everything recorded so far.
#[derive(Debug)]
pub struct Aborted {
    pub reason: String,
    pub cause: Error,
    pub trajectory: Trajectory,
}

pub(crate) fn weights(mesh: &ImmersedMesh, cutoff: Option<&RadialCutoff>) -> Result<Vec<f64>> {
    match cutoff {
        Some(c) => weight_field(mesh, c),
        None => Ok(vec![1.0; mesh.vertex_count()]),
    }
}

/// `c_stab · h_min⁴` with `h_min` the shortest edge touching a vertex where
/// `θʳ > 0`. `remaining` is reported back when the whole mesh is frozen.
pub fn stable_dt(mesh: &ImmersedMesh, cutoff: Option<&RadialCutoff>, c_stab: f64, remaining: f64) -> Result<f64> {
    let w = weights(mesh, cutoff)?;
    stable_dt_with(mesh, &w, c_stab, remaining)
}

fn stable_dt_with(mesh: &ImmersedMesh, w: &[f64], c_stab: f64, remaining: f64) -> Result<f64> {
    let mut h_min = f64::INFINITY;
    for (e, edge) in mesh.edges().iter().enumerate() {
        let [a, b] = edge.vertices;
        if w[a] > 0.0 || w[b] > 0.0 {
            h_min = h_min.min(mesh.edge_length(e));
        }
    }
    if !h_min.is_finite() {
        return Err(Error::EmptyActiveSet { remaining });
    }
    Ok(c_stab * h_min.powi(4))
}

/// `Σᵢ θᵢʳ |Wᵢ|² μᵢ` over reliable vertices.
pub fn dissipation_rate(analysis: &SurfaceAnalysis, weights: &[f64]) -> f64 {
    let s = &analysis.shape;
    canonical_sum(
        (0..s.vertex_count())
            .filter(|&i| s.reliable[i] && weights[i] > 0.0)
            .map(|i| {
                let w = s.w(i);
                weights[i] * crate::linalg::dot(w, w) * analysis.frames.dual_area(i)
            })
            .collect(),
    )
}

/// One step of the flow from an already analysed mesh.
fn advance(mesh: &ImmersedMesh, analysis: &SurfaceAnalysis, w: &[f64], dt: f64, scheme: Scheme) -> Result<ImmersedMesh> {
    let n = mesh.dim();
    let nv = mesh.vertex_count();
    let shape = &analysis.shape;
    let active: Vec<bool> = (0..nv).map(|i| shape.reliable[i] && w[i] > 0.0).collect();
    let mut pos = mesh.positions().to_vec();
    match scheme {
        Scheme::ExplicitEuler => {
            for i in (0..nv).filter(|&i| active[i]) {
                let wi = shape.w(i);
                for d in 0..n {
                    pos[i * n + d] -= dt * w[i] * wi[d];
                }
            }
        }
        Scheme::SemiImplicit => {
            // (M/Θ + dt·(L M⁻¹ L)_AA) δ = −dt·M W on the active set,
            // δ = 0 elsewhere; all coordinates solved as one block system
            let cotan = &analysis.cotan;
            let mass = cotan.mass();
            let index: Vec<usize> = (0..nv).filter(|&i| active[i]).collect();
            if index.is_empty() {
                return Ok(mesh.clone());
            }
            let k = index.len();
            let mut d = vec![0.0; k * n];
            let mut rhs = vec![0.0; k * n];
            for (r, &i) in index.iter().enumerate() {
                let wi = shape.w(i);
                for c in 0..n {
                    d[r * n + c] = mass[i] / w[i];
                    rhs[r * n + c] = -dt * mass[i] * wi[c];
                }
            }
            let stiffness = cotan.stiffness_matrix(mesh);
            let kdiag = stiffness.diagonal();
            let system = Biharmonic {
                index: &index,
                stride: n,
                mass,
                d: &d,
                kdiag: &kdiag,
                dt,
                stiffness: |x: &[f64], out: &mut [f64]| stiffness.apply(x, n, out),
            };
            let delta = system.solve(&rhs, SOLVE_TOLERANCE)?;
            for (r, &i) in index.iter().enumerate() {
                for d in 0..n {
                    pos[i * n + d] += delta[r * n + d];
                }
            }
        }
    }
    Ok(mesh.with_positions(pos))
}

/// Advances `state` by `dt`, recomputing the analysis of its mesh.
pub fn step(state: &FlowState, dt: f64, config: &FlowConfig) -> Result<FlowState> {
    if !(dt > 0.0) {
        return Err(Error::invalid("dt must be positive"));
    }
    let analysis = analyze_surface(&state.mesh, &config.analysis)?;
    let w = weights(&state.mesh, config.cutoff.as_ref())?;
    let mesh = advance(&state.mesh, &analysis, &w, dt, config.scheme)?;
    check_quality(&mesh, config)?;
    let next = analyze_surface(&mesh, &config.analysis)?;
    let t = state.t + dt;
    let last_report = report(&mesh, &next, t, &config.report)?;
    Ok(FlowState { mesh, t, step_count: state.step_count + 1, last_report })
}

fn check_quality(mesh: &ImmersedMesh, config: &FlowConfig) -> Result<()> {
    let q = mesh.min_triangle_quality();
    if !(q >= config.abort.q_min) {
        return Err(Error::MeshDegenerated { quality: q });
    }
    Ok(())
}

/// Runs the flow from `mesh0` until `config.t_end`.
///
/// Failures after the first step come back as [`Error::Aborted`] carrying the
/// partial trajectory.
pub fn run(config: &FlowConfig, mesh0: &ImmersedMesh) -> Result<Trajectory> {
    drive(config, mesh0, |mesh, analysis, w, dt| advance(mesh, analysis, w, dt, config.scheme))
}

/// The time loop shared by the direct and graph flows. `advance` maps the
/// current mesh, its analysis, the weights `θʳ` and `dt` to the next mesh.
pub(crate) fn drive<F>(config: &FlowConfig, mesh0: &ImmersedMesh, mut advance: F) -> Result<Trajectory>
where
    F: FnMut(&ImmersedMesh, &SurfaceAnalysis, &[f64], f64) -> Result<ImmersedMesh>,
{
    config.validate()?;
    let mut traj = Trajectory::default();
    let mut mesh = mesh0.clone();
    let mut analysis = analyze_surface(&mesh, &config.analysis)?;
    let mut w = weights(&mesh, config.cutoff.as_ref())?;
    let mut rate = dissipation_rate(&analysis, &w);
    let rep = report(&mesh, &analysis, 0.0, &config.report)?;
    traj.record(0, &mesh, rep);

    let mut t = 0.0;
    let mut steps = 0usize;
    let abort = |traj: Trajectory, cause: Error| -> Error {
        Error::Aborted(alloc::boxed::Box::new(Aborted { reason: cause.to_string(), cause, trajectory: traj }))
    };
    while t < config.t_end {
        let remaining = config.t_end - t;
        let dt_nominal = match config.dt_policy {
            DtPolicy::Fixed(dt) => dt,
            DtPolicy::Auto { c_stab } => match stable_dt_with(&mesh, &w, c_stab, remaining) {
                Ok(dt) => dt,
                Err(e) => return Err(abort(traj, e)),
            },
        };
        // finish exactly at t_end rather than leaving a sliver
        let last = dt_nominal >= remaining * (1.0 - 1e-12);
        let dt = if last { remaining } else { dt_nominal };
        let outcome = advance(&mesh, &analysis, &w, dt)
            .and_then(|m| check_quality(&m, config).map(|_| m))
            .and_then(|m| analyze_surface(&m, &config.analysis).map(|a| (m, a)));
        let (next_mesh, next_analysis) = match outcome {
            Ok(v) => v,
            Err(e) => return Err(abort(traj, e)),
        };
        mesh = next_mesh;
        analysis = next_analysis;
        w = match weights(&mesh, config.cutoff.as_ref()) {
            Ok(w) => w,
            Err(e) => return Err(abort(traj, e)),
        };
        let next_rate = dissipation_rate(&analysis, &w);
        traj.dissipation_accum += 0.5 * dt * (rate + next_rate);
        rate = next_rate;
        t = if last { config.t_end } else { t + dt };
        steps += 1;

        let sup_a = analysis.shape.sup_a();
        if steps.is_multiple_of(config.record_every) || last || !(sup_a <= config.abort.max_sup_a) {
            match report(&mesh, &analysis, t, &config.report) {
                Ok(r) => traj.record(steps, &mesh, r),
                Err(e) => return Err(abort(traj, e)),
            }
        }
        if !(sup_a <= config.abort.max_sup_a) {
            let cause = Error::InvalidParams(alloc::format!(
                "sup |A| = {sup_a:.6e} exceeded the abort threshold {:.6e}",
                config.abort.max_sup_a
            ));
            return Err(abort(traj, cause));
        }
    }
    Ok(traj)
}
