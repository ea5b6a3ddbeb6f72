//! Empirical constants for Sobolev-type inequalities on discrete surfaces.
//!
//! Each probe evaluates both sides of an inequality `lhs ≤ c·rhs` and records
//! the ratio; corpora of meshes and fields then give empirical suprema. No
//! constant is ever asserted here.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::concentration::local_concentration;
use crate::curvature::{analyze_surface, AnalysisOptions, SurfaceAnalysis};
use crate::cutoff::RadialCutoff;
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::mesh::{ImmersedMesh, MAX_DIM};
use crate::monitor::ConstantsLedger;
use crate::numeric::canonical_sum;
use crate::primitives;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InequalityId {
    /// `‖u‖₂ ≤ c (‖∇u‖₁ + ‖H u‖₁)`.
    MichaelSimon,
    /// `‖u‖_p ≤ c ‖u‖₂^{2/p} (‖∇u‖₂ + ‖H u‖₂)^{1−2/p}`.
    LpInterpolation { p: f64 },
    /// `sup_{γ=1} |A|⁴ ≤ c ‖A‖₂² (‖ΔH‖₂² + K⁴‖A‖₂²)` on `[γ > 0]`, with the
    /// normal Laplacian of `H` standing in for `∇²A`.
    SupBoundProxy,
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InequalityId::MichaelSimon => write!(f, "ms_sobolev"),
            InequalityId::LpInterpolation { p } => write!(f, "lp_interp_p{p}"),
            InequalityId::SupBoundProxy => write!(f, "sup_bound_proxy"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioRecord {
    pub inequality: InequalityId,
    pub mesh_id: String,
    pub field_id: String,
    pub lhs: f64,
    pub rhs_without_constant: f64,
    pub ratio: f64,
}

impl RatioRecord {
    /// The sup-norm record measures a proxy, not the inequality itself.
    pub fn is_proxy(&self) -> bool {
        self.inequality == InequalityId::SupBoundProxy
    }

    fn new(inequality: InequalityId, lhs: f64, rhs: f64) -> Result<Self> {
        if !(rhs > 0.0) || !(lhs / rhs).is_finite() {
            return Err(Error::ZeroField);
        }
        Ok(RatioRecord {
            inequality,
            mesh_id: String::new(),
            field_id: String::new(),
            lhs,
            rhs_without_constant: rhs,
            ratio: lhs / rhs,
        })
    }

    pub fn labeled(mut self, mesh_id: &str, field_id: &str) -> Self {
        self.mesh_id = mesh_id.into();
        self.field_id = field_id.into();
        self
    }
}

/// Per-face `|∇u|²` of the piecewise-linear interpolant, with face areas.
fn face_gradients(mesh: &ImmersedMesh, u: &[f64]) -> Vec<(f64, f64)> {
    let n = mesh.dim();
    let mut e1 = [0.0; MAX_DIM];
    let mut e2 = [0.0; MAX_DIM];
    mesh.triangles()
        .iter()
        .enumerate()
        .map(|(t, tri)| {
            mesh.triangle_edge_vectors(t, 0, &mut e1, &mut e2);
            let (a, b, c) = (dot(&e1[..n], &e1[..n]), dot(&e1[..n], &e2[..n]), dot(&e2[..n], &e2[..n]));
            let det = a * c - b * b;
            let (d1, d2) = (u[tri[1]] - u[tri[0]], u[tri[2]] - u[tri[0]]);
            // |∇u|² = dᵀ G⁻¹ d
            let g2 = if det > 0.0 { (c * d1 * d1 - 2.0 * b * d1 * d2 + a * d2 * d2) / det } else { 0.0 };
            (g2.max(0.0), 0.5 * det.max(0.0).sqrt())
        })
        .collect()
}

/// Checks the support condition: on a surface with boundary, `u` must vanish
/// on every vertex the analysis does not trust.
fn check_field(mesh: &ImmersedMesh, analysis: &SurfaceAnalysis, u: &[f64]) -> Result<()> {
    if u.len() != mesh.vertex_count() {
        return Err(Error::DimensionMismatch { expected: mesh.vertex_count(), found: u.len() });
    }
    if u.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("field values must be finite"));
    }
    if u.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroField);
    }
    if let Some(i) = (0..u.len()).find(|&i| !analysis.shape.reliable[i] && u[i] != 0.0) {
        return Err(Error::InvalidParams(format!("field must vanish near the boundary (vertex {i})")));
    }
    Ok(())
}

fn h_norm(analysis: &SurfaceAnalysis, i: usize) -> f64 {
    analysis.shape.h_sq(i).sqrt()
}

pub fn ms_sobolev_ratio(mesh: &ImmersedMesh, u: &[f64], options: &AnalysisOptions) -> Result<RatioRecord> {
    let analysis = analyze_surface(mesh, options)?;
    ms_sobolev_with(mesh, &analysis, u)
}

pub fn ms_sobolev_with(mesh: &ImmersedMesh, analysis: &SurfaceAnalysis, u: &[f64]) -> Result<RatioRecord> {
    check_field(mesh, analysis, u)?;
    let mu = analysis.frames.dual_areas();
    let lhs = canonical_sum((0..u.len()).map(|i| u[i] * u[i] * mu[i]).collect()).sqrt();
    let grad = canonical_sum(face_gradients(mesh, u).iter().map(|(g2, a)| g2.sqrt() * a).collect());
    let hu = canonical_sum((0..u.len()).map(|i| h_norm(analysis, i) * u[i].abs() * mu[i]).collect());
    RatioRecord::new(InequalityId::MichaelSimon, lhs, grad + hu)
}

pub fn lp_interp_ratio(mesh: &ImmersedMesh, u: &[f64], p: f64, options: &AnalysisOptions) -> Result<RatioRecord> {
    let analysis = analyze_surface(mesh, options)?;
    lp_interp_with(mesh, &analysis, u, p)
}

pub fn lp_interp_with(mesh: &ImmersedMesh, analysis: &SurfaceAnalysis, u: &[f64], p: f64) -> Result<RatioRecord> {
    if !(p > 2.0) || !p.is_finite() {
        return Err(Error::BadExponent(p));
    }
    check_field(mesh, analysis, u)?;
    let mu = analysis.frames.dual_areas();
    let lp = canonical_sum((0..u.len()).map(|i| u[i].abs().powf(p) * mu[i]).collect()).powf(1.0 / p);
    let l2 = canonical_sum((0..u.len()).map(|i| u[i] * u[i] * mu[i]).collect()).sqrt();
    let grad = canonical_sum(face_gradients(mesh, u).iter().map(|(g2, a)| g2 * a).collect()).sqrt();
    let hu = canonical_sum((0..u.len()).map(|i| analysis.shape.h_sq(i) * u[i] * u[i] * mu[i]).collect()).sqrt();
    let rhs = l2.powf(2.0 / p) * (grad + hu).powf(1.0 - 2.0 / p);
    RatioRecord::new(InequalityId::LpInterpolation { p }, lp, rhs)
}

/// Smallness check for [`sup_bound_ratio`]: the local concentration at
/// radius `rho` must not exceed `ε₀` of the ledger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Smallness {
    pub rho: f64,
    pub ledger: ConstantsLedger,
}

pub fn sup_bound_ratio(mesh: &ImmersedMesh, gamma: &RadialCutoff, smallness: &Smallness, options: &AnalysisOptions) -> Result<RatioRecord> {
    let analysis = analyze_surface(mesh, options)?;
    sup_bound_with(mesh, &analysis, gamma, smallness)
}

pub fn sup_bound_with(mesh: &ImmersedMesh, analysis: &SurfaceAnalysis, gamma: &RadialCutoff, smallness: &Smallness) -> Result<RatioRecord> {
    if gamma.center().len() != mesh.dim() {
        return Err(Error::DimensionMismatch { expected: mesh.dim(), found: gamma.center().len() });
    }
    let conc = local_concentration(mesh, analysis, smallness.rho)?;
    let bound = smallness.ledger.eps0.value;
    if conc.sup_value > bound {
        return Err(Error::ConcentrationTooLarge { value: conc.sup_value, bound });
    }
    let shape = &analysis.shape;
    let nv = mesh.vertex_count();
    let m = shape.codim;
    let g: Vec<f64> = (0..nv).map(|i| gamma.value(mesh.position(i))).collect();
    let inner = |i: usize| shape.reliable[i] && g[i] >= 1.0;
    let support = |i: usize| shape.reliable[i] && g[i] > 0.0;
    let sup_a = (0..nv).filter(|&i| inner(i)).map(|i| shape.a_sq[i].sqrt()).fold(0.0, f64::max);
    let mu = analysis.frames.dual_areas();
    let mut lap_h = vec![0.0; nv * m];
    analysis.connection.apply_laplacian(mesh, &analysis.cotan, &shape.h_normal, &mut lap_h);
    let a2 = canonical_sum((0..nv).filter(|&i| support(i)).map(|i| shape.a_sq[i] * mu[i]).collect());
    let lap2 = canonical_sum(
        (0..nv)
            .filter(|&i| support(i))
            .map(|i| dot(&lap_h[i * m..(i + 1) * m], &lap_h[i * m..(i + 1) * m]) * mu[i])
            .collect(),
    );
    let k4 = gamma.k().powi(4);
    let lhs = sup_a.powi(4);
    let rhs = a2 * (lap2 + k4 * a2);
    if lhs == 0.0 && rhs == 0.0 {
        // flat: both sides vanish, the inequality holds with any constant
        return Ok(RatioRecord {
            inequality: InequalityId::SupBoundProxy,
            mesh_id: String::new(),
            field_id: String::new(),
            lhs,
            rhs_without_constant: rhs,
            ratio: 0.0,
        });
    }
    RatioRecord::new(InequalityId::SupBoundProxy, lhs, rhs)
}

/// Corpus of meshes and fields, fully determined by `seed`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub seed: u64,
    /// Grid resolution of the flat and torus meshes.
    pub resolution: usize,
    /// Icosphere subdivision level.
    pub sphere_level: u32,
    /// Random fields per mesh.
    pub fields_per_mesh: usize,
    pub p: f64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec { seed: 1, resolution: 48, sphere_level: 4, fields_per_mesh: 8, p: 4.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusReport {
    pub records: Vec<RatioRecord>,
}

impl CorpusReport {
    /// Largest ratio recorded for inequalities of the same kind as `id`.
    pub fn max_ratio(&self, id: InequalityId) -> Option<f64> {
        self.records
            .iter()
            .filter(|r| core::mem::discriminant(&r.inequality) == core::mem::discriminant(&id))
            .map(|r| r.ratio)
            .fold(None, |acc, r| Some(acc.map_or(r, |a: f64| a.max(r))))
    }
}

/// A sum of Gaussian bumps, periodic over the flat square of side `size`.
fn gaussian_field(mesh: &ImmersedMesh, rng: &mut ChaCha8Rng, size: f64) -> Vec<f64> {
    let count = rng.random_range(1..=3usize);
    let bumps: Vec<(f64, f64, f64, f64)> = (0..count)
        .map(|_| {
            (
                rng.random_range(0.0..size),
                rng.random_range(0.0..size),
                rng.random_range(0.05 * size..0.2 * size),
                rng.random_range(0.2..1.0),
            )
        })
        .collect();
    (0..mesh.vertex_count())
        .map(|i| {
            let p = mesh.position(i);
            let mut v = 0.0;
            for &(cx, cy, w, a) in &bumps {
                for ox in [-1.0, 0.0, 1.0] {
                    for oy in [-1.0, 0.0, 1.0] {
                        let dx = p[0] - cx - ox * size;
                        let dy = p[1] - cy - oy * size;
                        v += a * (-(dx * dx + dy * dy) / (2.0 * w * w)).exp();
                    }
                }
            }
            v
        })
        .collect()
}

/// A random combination of low-degree polynomials of the ambient coordinates.
fn polynomial_field(mesh: &ImmersedMesh, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = mesh.dim();
    let c0 = rng.random_range(-1.0..1.0);
    let lin: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let quad: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    (0..mesh.vertex_count())
        .map(|i| {
            let p = mesh.position(i);
            c0 + (0..n).map(|d| lin[d] * p[d] + quad[d] * p[d] * p[d]).sum::<f64>()
        })
        .collect()
}

/// Evaluates the Michael-Simon and `Lᵖ` probes over a seeded corpus of flat
/// tori with Gaussian bumps, tori of revolution and icospheres with polynomial
/// fields, plus the sup-norm proxy once per curved mesh.
pub fn run_corpus(spec: &CorpusSpec, options: &AnalysisOptions) -> Result<CorpusReport> {
    if spec.resolution < 8 || spec.fields_per_mesh == 0 {
        return Err(Error::invalid("corpus needs resolution ≥ 8 and at least one field per mesh"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let size = 1.0;
    let r = spec.resolution;
    let meshes: Vec<(String, ImmersedMesh, bool)> = vec![
        (format!("flat_{r}"), primitives::flat_torus_grid(r, r, size, size, 3)?, true),
        (format!("torus_{}x{}", 2 * r, r), primitives::torus(2.0, 1.0, 2 * r, r)?, false),
        (format!("icosphere_{}", spec.sphere_level), primitives::icosphere(spec.sphere_level, 1.0)?, false),
    ];
    let mut records = Vec::new();
    for (mesh_id, mesh, flat) in &meshes {
        let analysis = analyze_surface(mesh, options)?;
        for k in 0..spec.fields_per_mesh {
            let u = if *flat { gaussian_field(mesh, &mut rng, size) } else { polynomial_field(mesh, &mut rng) };
            let field_id = format!("{}_{k}", if *flat { "gauss" } else { "poly" });
            records.push(ms_sobolev_with(mesh, &analysis, &u)?.labeled(mesh_id, &field_id));
            records.push(lp_interp_with(mesh, &analysis, &u, spec.p)?.labeled(mesh_id, &field_id));
        }
        if !*flat {
            let gamma = RadialCutoff::new(vec![0.0; mesh.dim()], 100.0, 1.0, 1)?;
            let small = Smallness { rho: 0.2, ledger: ConstantsLedger::default() };
            records.push(sup_bound_with(mesh, &analysis, &gamma, &small)?.labeled(mesh_id, "A"));
        }
    }
    Ok(CorpusReport { records })
}
