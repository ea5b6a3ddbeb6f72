//! The normal-graph gauge `f = f₀ + η` over a fixed base surface.
//!
//! The graph stores `η` as coefficients in the base normal frames. A step
//! computes `W` on the immersed surface, splits the velocity `−θʳW` into a
//! part tangent to the current surface and a part in the base normal space,
//! and advances `η` with the latter. The tangential part only relabels points
//! and is dropped.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::curvature::{analyze_surface, AnalysisOptions, SurfaceAnalysis};
use crate::error::{Error, Result};
use crate::flow::{self, FlowConfig, Scheme, Trajectory, SOLVE_TOLERANCE};
use crate::frames::{vertex_frames, VertexFrames};
use crate::linalg::{condition_number, dot, lu_solve, sym_eigen};
use crate::mesh::{ImmersedMesh, MAX_DIM};
use crate::sparse::{Biharmonic, StiffnessMatrix};

/// Initial graphs with steeper `∇η` or larger `b` are rejected.
pub const SLOPE_LIMIT: f64 = 0.2;
/// Largest condition number of the tangent/normal splitting system.
pub const GAUGE_CONDITION_LIMIT: f64 = 1e8;

#[derive(Debug, Clone)]
pub struct NormalGraph {
    base: ImmersedMesh,
    analysis: Arc<SurfaceAnalysis>,
    /// Connection stiffness of the base.
    stiffness: Arc<StiffnessMatrix>,
    /// `codim` coefficients per vertex.
    eta: Vec<f64>,
}

impl NormalGraph {
    pub fn new(base: ImmersedMesh, eta: Vec<f64>, options: &AnalysisOptions) -> Result<Self> {
        NormalGraph::zero(base, options)?.with_eta(eta)
    }

    /// `η = 0` over `base`.
    pub fn zero(base: ImmersedMesh, options: &AnalysisOptions) -> Result<Self> {
        let n = base.vertex_count();
        let analysis = analyze_surface(&base, options)?;
        let m = analysis.frames.codim();
        let stiffness = Arc::new(analysis.connection.stiffness_matrix(&base, &analysis.cotan));
        Ok(NormalGraph { base, analysis: Arc::new(analysis), stiffness, eta: vec![0.0; n * m] })
    }

    /// Writes `mesh` as a graph over its flattening: the plane through the
    /// centroid spanned by the lattice generators of a periodic mesh, or by
    /// the two principal directions of the vertex cloud otherwise.
    ///
    /// Fails unless `‖∇η‖∞ ≤ SLOPE_LIMIT` and `b ≤ SLOPE_LIMIT`.
    pub fn from_mesh(mesh: &ImmersedMesh, options: &AnalysisOptions) -> Result<Self> {
        let n = mesh.dim();
        let nv = mesh.vertex_count();
        let mut centroid = vec![0.0; n];
        for i in 0..nv {
            for (c, x) in centroid.iter_mut().zip(mesh.position(i)) {
                *c += x / nv as f64;
            }
        }
        let plane = flattening_plane(mesh, &centroid)?;
        let mut pos = vec![0.0; nv * n];
        for i in 0..nv {
            let p = mesh.position(i);
            let rel: Vec<f64> = p.iter().zip(&centroid).map(|(a, b)| a - b).collect();
            let out = &mut pos[i * n..(i + 1) * n];
            out.copy_from_slice(&centroid);
            for axis in &plane {
                let s = dot(axis, &rel);
                for d in 0..n {
                    out[d] += s * axis[d];
                }
            }
        }
        let base = mesh.with_positions(pos);
        base.check_nondegenerate()?;
        let mut graph = NormalGraph::zero(base, options)?;
        let m = graph.codim();
        let mut eta = vec![0.0; nv * m];
        let mut diff = [0.0; MAX_DIM];
        for i in 0..nv {
            for d in 0..n {
                diff[d] = mesh.position(i)[d] - graph.base.position(i)[d];
            }
            graph.analysis.frames.to_normal(i, &diff[..n], &mut eta[i * m..(i + 1) * m]);
        }
        graph.eta = eta;
        let slope = graph.max_slope();
        if slope > SLOPE_LIMIT {
            return Err(Error::InvalidParams(alloc::format!(
                "graph slope {slope:.3e} exceeds the admission limit {SLOPE_LIMIT}"
            )));
        }
        let metric = graph_metric(&graph)?;
        if metric.b_estimate > SLOPE_LIMIT {
            return Err(Error::InvalidParams(alloc::format!(
                "metric deviation {:.3e} exceeds the admission limit {SLOPE_LIMIT}",
                metric.b_estimate
            )));
        }
        Ok(graph)
    }

    pub fn base(&self) -> &ImmersedMesh {
        &self.base
    }

    /// Frames, operators and the second fundamental form `B` of the base.
    pub fn base_analysis(&self) -> &SurfaceAnalysis {
        &self.analysis
    }

    pub fn codim(&self) -> usize {
        self.analysis.frames.codim()
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn eta_at(&self, i: usize) -> &[f64] {
        let m = self.codim();
        &self.eta[i * m..(i + 1) * m]
    }

    pub fn with_eta(&self, eta: Vec<f64>) -> Result<Self> {
        if eta.len() != self.eta.len() {
            return Err(Error::DimensionMismatch { expected: self.eta.len(), found: eta.len() });
        }
        Ok(NormalGraph { base: self.base.clone(), analysis: self.analysis.clone(), stiffness: self.stiffness.clone(), eta })
    }

    /// `η` at vertex `i` as an ambient vector.
    pub fn eta_vector(&self, i: usize, out: &mut [f64]) {
        self.analysis.frames.from_normal(i, self.eta_at(i), out);
    }

    /// Largest Frobenius norm of the vertex-averaged `∇η`.
    pub fn max_slope(&self) -> f64 {
        let n = self.base.dim();
        let grad = eta_gradient(self);
        (0..self.base.vertex_count())
            .map(|i| dot(&grad[i * 2 * n..(i + 1) * 2 * n], &grad[i * 2 * n..(i + 1) * 2 * n]).sqrt())
            .fold(0.0, f64::max)
    }
}

fn flattening_plane(mesh: &ImmersedMesh, centroid: &[f64]) -> Result<[Vec<f64>; 2]> {
    let n = mesh.dim();
    let raw: Vec<Vec<f64>> = match mesh.lattice() {
        Some(lat) if lat.generator_count() == 2 => (0..2).map(|k| lat.generator(k).to_vec()).collect(),
        _ => {
            let mut cov = vec![0.0; n * n];
            for i in 0..mesh.vertex_count() {
                let p = mesh.position(i);
                for a in 0..n {
                    for b in 0..n {
                        cov[a * n + b] += (p[a] - centroid[a]) * (p[b] - centroid[b]);
                    }
                }
            }
            let (_, vecs) = sym_eigen(&cov, n);
            (0..2).map(|k| vecs[k * n..(k + 1) * n].to_vec()).collect()
        }
    };
    // Gram-Schmidt
    let len0 = dot(&raw[0], &raw[0]).sqrt();
    let e0: Vec<f64> = raw[0].iter().map(|x| x / len0).collect();
    let s = dot(&e0, &raw[1]);
    let mut e1: Vec<f64> = raw[1].iter().zip(&e0).map(|(x, e)| x - s * e).collect();
    let len1 = dot(&e1, &e1).sqrt();
    if !(len0 > 0.0) || !(len1 > 1e-12 * len0) {
        return Err(Error::RankDeficient { vertex: 0 });
    }
    e1.iter_mut().for_each(|x| *x /= len1);
    Ok([e0, e1])
}

/// Positions `f₀ + η`, connectivity of the base.
pub fn immerse(graph: &NormalGraph) -> Result<ImmersedMesh> {
    let n = graph.base.dim();
    let mut pos = graph.base.positions().to_vec();
    let mut v = [0.0; MAX_DIM];
    for i in 0..graph.base.vertex_count() {
        graph.eta_vector(i, &mut v);
        for d in 0..n {
            pos[i * n + d] += v[d];
        }
    }
    let mesh = graph.base.with_positions(pos);
    mesh.check_nondegenerate()?;
    Ok(mesh)
}

/// Ambient derivatives `(∂₁η, ∂₂η)` along the base tangent frame, `2·dim`
/// values per vertex: per-face affine gradients averaged with face areas.
pub fn eta_gradient(graph: &NormalGraph) -> Vec<f64> {
    let mesh = &graph.base;
    let frames = &graph.analysis.frames;
    let n = mesh.dim();
    let nv = mesh.vertex_count();
    let mut grad = vec![0.0; nv * 2 * n];
    let mut weight = vec![0.0; nv];
    let mut e1 = [0.0; MAX_DIM];
    let mut e2 = [0.0; MAX_DIM];
    let mut vals = [[0.0; MAX_DIM]; 3];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        mesh.triangle_edge_vectors(t, 0, &mut e1, &mut e2);
        let (e1, e2) = (&e1[..n], &e2[..n]);
        let g11 = dot(e1, e1);
        let g12 = dot(e1, e2);
        let g22 = dot(e2, e2);
        let det = g11 * g22 - g12 * g12;
        let area = 0.5 * det.max(0.0).sqrt();
        if !(det > 0.0) {
            continue;
        }
        for (c, &v) in tri.iter().enumerate() {
            graph.eta_vector(v, &mut vals[c]);
        }
        for &v in tri {
            for j in 0..2 {
                let w = frames.tangent(v, j);
                let (a, b) = (dot(e1, w), dot(e2, w));
                let alpha = (g22 * a - g12 * b) / det;
                let beta = (g11 * b - g12 * a) / det;
                let out = &mut grad[(v * 2 + j) * n..(v * 2 + j + 1) * n];
                for d in 0..n {
                    out[d] += area * (alpha * (vals[1][d] - vals[0][d]) + beta * (vals[2][d] - vals[0][d]));
                }
            }
            weight[v] += area;
        }
    }
    for i in 0..nv {
        if weight[i] > 0.0 {
            grad[i * 2 * n..(i + 1) * 2 * n].iter_mut().for_each(|x| *x /= weight[i]);
        }
    }
    grad
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphMetric {
    /// Pulled-back metric in the base tangent frame, where `g₀ = I`.
    pub g: Vec<[[f64; 2]; 2]>,
    pub det_ratio: Vec<f64>,
    /// Largest operator norm of `g − g₀`.
    pub b_estimate: f64,
}

/// `g_ij = δ_ij − 2⟨η,B_ij⟩ + Σ_k ⟨η,B_ik⟩⟨η,B_jk⟩ + ⟨∇⊥_iη, ∇⊥_jη⟩`.
pub fn graph_metric(graph: &NormalGraph) -> Result<GraphMetric> {
    let mesh = &graph.base;
    let frames = &graph.analysis.frames;
    let shape = &graph.analysis.shape;
    let n = mesh.dim();
    let m = graph.codim();
    let grad = eta_gradient(graph);
    let nv = mesh.vertex_count();
    let mut g = Vec::with_capacity(nv);
    let mut det_ratio = Vec::with_capacity(nv);
    let mut b_est = 0.0f64;
    let mut dn = [[0.0; MAX_DIM]; 2];
    for i in 0..nv {
        let eta = graph.eta_at(i);
        let b = shape.a_packed(i);
        let mut e = [[0.0; 2]; 2];
        for k in 0..m {
            e[0][0] += eta[k] * b[3 * k];
            e[0][1] += eta[k] * b[3 * k + 1];
            e[1][1] += eta[k] * b[3 * k + 2];
        }
        e[1][0] = e[0][1];
        for j in 0..2 {
            frames.project_normal(i, &grad[(i * 2 + j) * n..(i * 2 + j + 1) * n], &mut dn[j]);
        }
        let mut gi = [[0.0; 2]; 2];
        for a in 0..2 {
            for c in 0..2 {
                let id = if a == c { 1.0 } else { 0.0 };
                gi[a][c] = id - 2.0 * e[a][c] + e[a][0] * e[c][0] + e[a][1] * e[c][1] + dot(&dn[a][..n], &dn[c][..n]);
            }
        }
        let det = gi[0][0] * gi[1][1] - gi[0][1] * gi[1][0];
        if !(det > 0.0) {
            return Err(Error::ImmersionLost { vertex: i, det_ratio: det });
        }
        // eigenvalues of the symmetric deviation g − I
        let p = 0.5 * (gi[0][0] + gi[1][1]) - 1.0;
        let q = (0.25 * (gi[0][0] - gi[1][1]).powi(2) + gi[0][1] * gi[0][1]).sqrt();
        b_est = b_est.max((p + q).abs()).max((p - q).abs());
        g.push(gi);
        det_ratio.push(det);
    }
    Ok(GraphMetric { g, det_ratio, b_estimate: b_est })
}

/// Splits an ambient field `v` (`dim` values per vertex) into base-normal
/// coefficients `η̇` and a part `φ̇` tangent to the immersed surface.
pub fn split_velocity(graph: &NormalGraph, v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = graph.base.dim();
    if v.len() != graph.base.vertex_count() * n {
        return Err(Error::DimensionMismatch { expected: graph.base.vertex_count() * n, found: v.len() });
    }
    let current = vertex_frames(&immerse(graph)?)?;
    split_with(graph, &current, v, None)
}

fn split_with(graph: &NormalGraph, current: &VertexFrames, v: &[f64], active: Option<&[bool]>) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = graph.base.dim();
    let m = graph.codim();
    let nv = graph.base.vertex_count();
    let base = &graph.analysis.frames;
    let mut eta_dot = vec![0.0; nv * m];
    let mut phi_dot = vec![0.0; nv * n];
    let mut s = [0.0; MAX_DIM * MAX_DIM];
    for i in 0..nv {
        if active.is_some_and(|a| !a[i]) {
            continue;
        }
        let vi = &v[i * n..(i + 1) * n];
        if vi.iter().all(|x| *x == 0.0) {
            continue;
        }
        // columns: current tangents, then base normals
        for r in 0..n {
            s[r * n] = current.tangent(i, 0)[r];
            s[r * n + 1] = current.tangent(i, 1)[r];
            for k in 0..m {
                s[r * n + 2 + k] = base.normal(i, k)[r];
            }
        }
        let cond = condition_number(&s[..n * n], n);
        if !(cond <= GAUGE_CONDITION_LIMIT) {
            return Err(Error::GaugeDegenerate { vertex: i, condition: cond });
        }
        let x = lu_solve(&s[..n * n], n, vi, 0.0).ok_or(Error::GaugeDegenerate { vertex: i, condition: cond })?;
        eta_dot[i * m..(i + 1) * m].copy_from_slice(&x[2..]);
        for d in 0..n {
            phi_dot[i * n + d] = x[0] * current.tangent(i, 0)[d] + x[1] * current.tangent(i, 1)[d];
        }
    }
    Ok((eta_dot, phi_dot))
}

/// New `η` after one step from `mesh = immerse(graph)` with its analysis.
fn advance_eta(
    graph: &NormalGraph,
    mesh: &ImmersedMesh,
    analysis: &SurfaceAnalysis,
    w: &[f64],
    dt: f64,
    scheme: Scheme,
) -> Result<Vec<f64>> {
    let n = mesh.dim();
    let m = graph.codim();
    let nv = mesh.vertex_count();
    let shape = &analysis.shape;
    let active: Vec<bool> = (0..nv).map(|i| shape.reliable[i] && w[i] > 0.0).collect();
    // −W at active vertices; θʳ enters through the scheme
    let mut v = vec![0.0; nv * n];
    for i in (0..nv).filter(|&i| active[i]) {
        for (d, x) in shape.w(i).iter().enumerate() {
            v[i * n + d] = -x;
        }
    }
    let (u, _) = split_with(graph, &analysis.frames, &v, Some(&active))?;
    let mut eta = graph.eta.clone();
    match scheme {
        Scheme::ExplicitEuler => {
            for i in (0..nv).filter(|&i| active[i]) {
                for k in 0..m {
                    eta[i * m + k] += dt * w[i] * u[i * m + k];
                }
            }
        }
        Scheme::SemiImplicit => {
            // (M/Θ + dt·(K M⁻¹ K)_AA) δ = dt·M u with the base connection stiffness K
            let cotan = &graph.analysis.cotan;
            let mass = cotan.mass();
            let index: Vec<usize> = (0..nv).filter(|&i| active[i]).collect();
            if index.is_empty() {
                return Ok(eta);
            }
            let k = index.len();
            let mut d = vec![0.0; k * m];
            let mut rhs = vec![0.0; k * m];
            for (r, &i) in index.iter().enumerate() {
                for c in 0..m {
                    d[r * m + c] = mass[i] / w[i];
                    rhs[r * m + c] = dt * mass[i] * u[i * m + c];
                }
            }
            let stiffness = &graph.stiffness;
            let kdiag = stiffness.diagonal();
            let system = Biharmonic {
                index: &index,
                stride: m,
                mass,
                d: &d,
                kdiag: &kdiag,
                dt,
                stiffness: |x: &[f64], out: &mut [f64]| stiffness.apply(x, m, out),
            };
            let delta = system.solve(&rhs, SOLVE_TOLERANCE)?;
            for (r, &i) in index.iter().enumerate() {
                for c in 0..m {
                    eta[i * m + c] += delta[r * m + c];
                }
            }
        }
    }
    Ok(eta)
}

/// One step of the graph flow `∂ₜη = −(θʳW)_N`.
pub fn graph_step(graph: &NormalGraph, dt: f64, config: &FlowConfig) -> Result<NormalGraph> {
    if !(dt > 0.0) {
        return Err(Error::invalid("dt must be positive"));
    }
    let mesh = immerse(graph)?;
    let analysis = analyze_surface(&mesh, &config.analysis)?;
    let w = flow::weights(&mesh, config.cutoff.as_ref())?;
    let next = graph.with_eta(advance_eta(graph, &mesh, &analysis, &w, dt, config.scheme)?)?;
    graph_metric(&next)?;
    Ok(next)
}

/// Runs the graph flow to `config.t_end`; snapshots hold the immersed meshes.
pub fn graph_run(config: &FlowConfig, graph: &NormalGraph) -> Result<(NormalGraph, Trajectory)> {
    let mut current = graph.clone();
    let mesh0 = immerse(&current)?;
    let traj = flow::drive(config, &mesh0, |mesh, analysis, w, dt| {
        let next = current.with_eta(advance_eta(&current, mesh, analysis, w, dt, config.scheme)?)?;
        graph_metric(&next)?;
        let m = immerse(&next)?;
        current = next;
        Ok(m)
    })?;
    Ok((current, traj))
}

/// Closest point of the segment `a b` to `p` as the parameter `t ∈ [0, 1]`.
fn segment_parameter(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let n = p.len();
    let mut ab = [0.0; MAX_DIM];
    let mut ap = [0.0; MAX_DIM];
    for d in 0..n {
        ab[d] = b[d] - a[d];
        ap[d] = p[d] - a[d];
    }
    let l = dot(&ab[..n], &ab[..n]);
    if l > 0.0 {
        (dot(&ap[..n], &ab[..n]) / l).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Barycentric coordinates of the point of triangle `q` closest to `p`.
pub fn closest_barycentric(p: &[f64], q: &[[f64; MAX_DIM]; 3]) -> [f64; 3] {
    let n = p.len();
    let mut e1 = [0.0; MAX_DIM];
    let mut e2 = [0.0; MAX_DIM];
    let mut r = [0.0; MAX_DIM];
    for d in 0..n {
        e1[d] = q[1][d] - q[0][d];
        e2[d] = q[2][d] - q[0][d];
        r[d] = p[d] - q[0][d];
    }
    let (a, b, c) = (dot(&e1[..n], &e1[..n]), dot(&e1[..n], &e2[..n]), dot(&e2[..n], &e2[..n]));
    let (d1, d2) = (dot(&r[..n], &e1[..n]), dot(&r[..n], &e2[..n]));
    let det = a * c - b * b;
    if det > 0.0 {
        let s = (c * d1 - b * d2) / det;
        let t = (a * d2 - b * d1) / det;
        if s >= 0.0 && t >= 0.0 && s + t <= 1.0 {
            return [1.0 - s - t, s, t];
        }
    }
    let mut best = [1.0, 0.0, 0.0];
    let mut best_d = f64::INFINITY;
    for k in 0..3 {
        let (i, j) = (k, (k + 1) % 3);
        let t = segment_parameter(p, &q[i][..n], &q[j][..n]);
        let mut lam = [0.0; 3];
        lam[i] = 1.0 - t;
        lam[j] = t;
        let dd: f64 = (0..n).map(|d| (p[d] - lam[i] * q[i][d] - lam[j] * q[j][d]).powi(2)).sum();
        if dd < best_d {
            best_d = dd;
            best = lam;
        }
    }
    best
}

/// Squared distance from `p` to the triangle `q` in `ℝⁿ`.
pub fn point_triangle_distance_sq(p: &[f64], q: &[[f64; MAX_DIM]; 3]) -> f64 {
    let lam = closest_barycentric(p, q);
    (0..p.len()).map(|d| (p[d] - lam[0] * q[0][d] - lam[1] * q[1][d] - lam[2] * q[2][d]).powi(2)).sum()
}

/// How [`surface_distance`] represents the triangles it measures against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangleModel {
    /// Flat triangles.
    Linear,
    /// Triangles bent by the vertex second fundamental forms, exact for
    /// quadratic patches: the linear foot point is moved by
    /// `−½ Σ_{a<b} λ_a λ_b A(e_ab, e_ab)`.
    Curved,
}

/// Largest distance from a vertex of `a` to the triangles of `b` around the
/// same vertex (its faces and those of its two-ring), symmetrised. Both meshes
/// must share connectivity.
pub fn surface_distance(a: &ImmersedMesh, b: &ImmersedMesh, model: TriangleModel, options: &AnalysisOptions) -> Result<f64> {
    if a.vertex_count() != b.vertex_count() || a.triangles() != b.triangles() || a.dim() != b.dim() {
        return Err(Error::invalid("surface distance needs meshes with equal connectivity"));
    }
    let (sa, sb) = match model {
        TriangleModel::Linear => (None, None),
        TriangleModel::Curved => (Some(analyze_surface(a, options)?), Some(analyze_surface(b, options)?)),
    };
    Ok(one_sided(a, b, sb.as_ref()).max(one_sided(b, a, sa.as_ref())))
}

/// `A_v(e, e)` as an ambient normal vector.
fn second_form_along(analysis: &SurfaceAnalysis, v: usize, e: &[f64], out: &mut [f64]) {
    let frames = &analysis.frames;
    let t = frames.to_tangent(v, e);
    let a = analysis.shape.a_packed(v);
    let m = frames.codim();
    let mut c = [0.0; MAX_DIM];
    for k in 0..m {
        c[k] = a[3 * k] * t[0] * t[0] + 2.0 * a[3 * k + 1] * t[0] * t[1] + a[3 * k + 2] * t[1] * t[1];
    }
    frames.from_normal(v, &c[..m], out);
}

fn one_sided(a: &ImmersedMesh, b: &ImmersedMesh, curved: Option<&SurfaceAnalysis>) -> f64 {
    let n = a.dim();
    let mut worst = 0.0f64;
    let mut q = [[0.0; MAX_DIM]; 3];
    let mut tr = [0.0; MAX_DIM];
    let mut e = [0.0; MAX_DIM];
    let mut av = [0.0; MAX_DIM];
    let shifts = b.lattice().map(|l| l.neighbour_shifts()).unwrap_or_default();
    let mut faces: Vec<usize> = Vec::new();
    for i in 0..a.vertex_count() {
        let p = a.position(i);
        faces.clear();
        faces.extend_from_slice(b.vertex_faces(i));
        for entry in b.two_ring(i) {
            faces.extend_from_slice(b.vertex_faces(entry.vertex));
        }
        faces.sort_unstable();
        faces.dedup();
        let mut best = f64::INFINITY;
        for &t in &faces {
            b.triangle_corners(t, &mut q);
            // bring the triangle to the lattice image nearest p
            if let Some(lat) = b.lattice() {
                let mut best_shift = None;
                let mut best_d = (0..n).map(|d| (p[d] - q[0][d]).powi(2)).sum::<f64>();
                for &sh in &shifts {
                    lat.translation(sh, &mut tr);
                    let dd = (0..n).map(|d| (p[d] - q[0][d] - tr[d]).powi(2)).sum::<f64>();
                    if dd < best_d {
                        best_d = dd;
                        best_shift = Some(sh);
                    }
                }
                if let Some(sh) = best_shift {
                    lat.translation(sh, &mut tr);
                    for c in q.iter_mut() {
                        for d in 0..n {
                            c[d] += tr[d];
                        }
                    }
                }
            }
            let lam = closest_barycentric(&p[..n], &q);
            let mut foot = [0.0; MAX_DIM];
            for d in 0..n {
                foot[d] = lam[0] * q[0][d] + lam[1] * q[1][d] + lam[2] * q[2][d];
            }
            if let Some(an) = curved {
                let tri = b.triangles()[t];
                for k in 0..3 {
                    let (x, y) = (k, (k + 1) % 3);
                    let w = lam[x] * lam[y];
                    if w == 0.0 {
                        continue;
                    }
                    for d in 0..n {
                        e[d] = q[y][d] - q[x][d];
                    }
                    // second fundamental form averaged over the corners
                    for &v in &tri {
                        second_form_along(an, v, &e[..n], &mut av);
                        for d in 0..n {
                            foot[d] -= 0.5 * w * av[d] / 3.0;
                        }
                    }
                }
            }
            best = best.min((0..n).map(|d| (p[d] - foot[d]).powi(2)).sum::<f64>());
        }
        worst = worst.max(best);
    }
    worst.sqrt()
}

/// Runs the direct flow on `mesh0` and the graph flow over its flattening
/// with the same configuration and returns `(t, distance)` per snapshot.
pub fn two_solver_divergence(mesh0: &ImmersedMesh, config: &FlowConfig, model: TriangleModel) -> Result<Vec<(f64, f64)>> {
    let graph = NormalGraph::from_mesh(mesh0, &config.analysis)?;
    let direct = flow::run(config, mesh0)?;
    let (_, gauged) = graph_run(config, &graph)?;
    if direct.snapshots.len() != gauged.snapshots.len() {
        return Err(Error::invalid("the two runs recorded different snapshot times"));
    }
    let mut out = Vec::with_capacity(direct.snapshots.len());
    for ((_, t1, m1), (_, t2, m2)) in direct.snapshots.iter().zip(&gauged.snapshots) {
        if t1 != t2 {
            return Err(Error::invalid("the two runs recorded different snapshot times; use a fixed dt"));
        }
        out.push((*t1, surface_distance(m1, m2, model, &config.analysis)?));
    }
    Ok(out)
}
