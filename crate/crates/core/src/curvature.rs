//! Mean curvature, second fundamental form, the Willmore tensor and energy.
//!
//! Conventions: `H = tr A`, so the cotangent identity `Δf = H` holds and a
//! round sphere of radius `R` has `|H| = 2/R` with `H` pointing inward.
//! The Willmore tensor is `W = ΔH + Q(A⁰)H` with `Δ` the normal-connection
//! Laplacian.
//!
//! Second fundamental form coefficients are stored per vertex and per normal
//! direction `k` as the triple `(a, b, c)` of the symmetric matrix
//! `[[a, b], [b, c]]` in the vertex tangent frame.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::frames::{vertex_frames, VertexFrames};
use crate::linalg::{dot, lu_solve};
use crate::mesh::{ImmersedMesh, MAX_DIM};
use crate::numeric::{canonical_sum, sup};
use crate::operators::{CotanLaplacian, NormalConnection};

/// Mean curvature vectors `H_i = (Δf)_i` projected onto the normal spaces,
/// `dim` ambient coordinates per vertex.
pub fn mean_curvature_vector(mesh: &ImmersedMesh, frames: &VertexFrames) -> Vec<f64> {
    let cotan = CotanLaplacian::new(mesh, frames);
    mean_curvature_with(mesh, frames, &cotan)
}

fn mean_curvature_with(mesh: &ImmersedMesh, frames: &VertexFrames, cotan: &CotanLaplacian) -> Vec<f64> {
    let n = mesh.dim();
    let mut lap = vec![0.0; mesh.vertex_count() * n];
    cotan.laplacian_of_positions(mesh, &mut lap);
    let mut h = vec![0.0; lap.len()];
    for i in 0..mesh.vertex_count() {
        frames.project_normal(i, &lap[i * n..(i + 1) * n], &mut h[i * n..(i + 1) * n]);
    }
    h
}

/// A symmetric 2-tensor with values in a normal space, stored as the full
/// `2 × 2 × codim` array `η[i][j][k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalTensor {
    codim: usize,
    comps: Vec<f64>,
}

impl NormalTensor {
    pub fn zeros(codim: usize) -> Self {
        NormalTensor { codim, comps: vec![0.0; 4 * codim] }
    }

    /// Builds the tensor from its four normal-vector entries.
    pub fn from_entries(e11: &[f64], e12: &[f64], e21: &[f64], e22: &[f64]) -> Result<Self> {
        let m = e11.len();
        for e in [e12, e21, e22] {
            if e.len() != m {
                return Err(Error::DimensionMismatch { expected: m, found: e.len() });
            }
        }
        let mut comps = Vec::with_capacity(4 * m);
        for e in [e11, e12, e21, e22] {
            comps.extend_from_slice(e);
        }
        Ok(NormalTensor { codim: m, comps })
    }

    /// From packed `(a, b, c)` triples per normal direction.
    pub fn from_packed(packed: &[f64]) -> Self {
        let m = packed.len() / 3;
        let mut t = Self::zeros(m);
        for k in 0..m {
            let (a, b, c) = (packed[3 * k], packed[3 * k + 1], packed[3 * k + 2]);
            t.comps[k] = a;
            t.comps[m + k] = b;
            t.comps[2 * m + k] = b;
            t.comps[3 * m + k] = c;
        }
        t
    }

    pub fn codim(&self) -> usize {
        self.codim
    }

    pub fn entry(&self, i: usize, j: usize) -> &[f64] {
        let o = (2 * i + j) * self.codim;
        &self.comps[o..o + self.codim]
    }

    pub fn entry_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let o = (2 * i + j) * self.codim;
        &mut self.comps[o..o + self.codim]
    }
}

/// `Q(η)φ = g^{ik} g^{jl} η_ij ⟨η_kl, φ⟩`.
pub fn q_apply(eta: &NormalTensor, phi: &[f64], metric: &[[f64; 2]; 2]) -> Result<Vec<f64>> {
    let m = eta.codim;
    if phi.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: phi.len() });
    }
    let scale = eta.comps.iter().fold(0.0f64, |s, x| s.max(x.abs()));
    for k in 0..m {
        if (eta.entry(0, 1)[k] - eta.entry(1, 0)[k]).abs() > 1e-12 * scale {
            return Err(Error::NonSymmetricInput);
        }
    }
    let gscale = metric[0][0].abs().max(metric[1][1].abs());
    if (metric[0][1] - metric[1][0]).abs() > 1e-12 * gscale {
        return Err(Error::NonSymmetricInput);
    }
    let det = metric[0][0] * metric[1][1] - metric[0][1] * metric[1][0];
    if !(det > 0.0) || !(metric[0][0] > 0.0) {
        return Err(Error::invalid("metric is not positive definite"));
    }
    let ginv = [[metric[1][1] / det, -metric[0][1] / det], [-metric[1][0] / det, metric[0][0] / det]];
    let mut proj = [[0.0; 2]; 2];
    for k in 0..2 {
        for l in 0..2 {
            proj[k][l] = dot(eta.entry(k, l), phi);
        }
    }
    let mut out = vec![0.0; m];
    for i in 0..2 {
        for j in 0..2 {
            let mut s = 0.0;
            for k in 0..2 {
                for l in 0..2 {
                    s += ginv[i][k] * ginv[j][l] * proj[k][l];
                }
            }
            for (o, e) in out.iter_mut().zip(eta.entry(i, j)) {
                *o += s * e;
            }
        }
    }
    Ok(out)
}

/// `Q(η)φ` in an orthonormal frame for packed `(a, b, c)` coefficients.
pub(crate) fn q_orthonormal(packed: &[f64], phi: &[f64], out: &mut [f64]) {
    let m = phi.len();
    let (mut pa, mut pb, mut pc) = (0.0, 0.0, 0.0);
    for k in 0..m {
        pa += packed[3 * k] * phi[k];
        pb += packed[3 * k + 1] * phi[k];
        pc += packed[3 * k + 2] * phi[k];
    }
    for k in 0..m {
        out[k] = packed[3 * k] * pa + 2.0 * packed[3 * k + 1] * pb + packed[3 * k + 2] * pc;
    }
}

fn packed_norm_sq(packed: &[f64]) -> f64 {
    let mut s = 0.0;
    for t in packed.chunks_exact(3) {
        s += t[0] * t[0] + 2.0 * t[1] * t[1] + t[2] * t[2];
    }
    s
}

/// Weighted least-squares fit of `h_k ≈ p u + q v + ½(a u² + 2b uv + c v²)`
/// over the two-ring of vertex `i`, returning packed `(a, b, c)` per normal.
pub fn fit_second_fundamental_form(mesh: &ImmersedMesh, frames: &VertexFrames, i: usize) -> Result<Vec<f64>> {
    let n = mesh.dim();
    let m = frames.codim();
    let ring = mesh.two_ring(i);
    if ring.len() < 5 {
        return Err(Error::FitUnderdetermined { vertex: i });
    }
    let mut uv = Vec::with_capacity(ring.len());
    let mut heights = Vec::with_capacity(ring.len() * m);
    let mut off = [0.0; MAX_DIM];
    let mut mean = 0.0;
    for entry in ring {
        mesh.ring_offset(entry, &mut off);
        let t = frames.to_tangent(i, &off[..n]);
        mean += (t[0] * t[0] + t[1] * t[1]).sqrt();
        uv.push(t);
        for k in 0..m {
            heights.push(dot(frames.normal(i, k), &off[..n]));
        }
    }
    let s = mean / ring.len() as f64;
    if !(s > 0.0) {
        return Err(Error::FitUnderdetermined { vertex: i });
    }
    let mut normal = [0.0; 25];
    let mut rhs = vec![0.0; 5 * m];
    for (r, t) in uv.iter().enumerate() {
        let (u, v) = (t[0] / s, t[1] / s);
        let rr = u * u + v * v;
        if !(rr > 0.0) {
            continue;
        }
        let w = 1.0 / rr;
        let basis = [u, v, 0.5 * u * u, u * v, 0.5 * v * v];
        for a in 0..5 {
            for b in 0..5 {
                normal[a * 5 + b] += w * basis[a] * basis[b];
            }
            for k in 0..m {
                rhs[k * 5 + a] += w * basis[a] * heights[r * m + k] / s;
            }
        }
    }
    let mut out = vec![0.0; 3 * m];
    for k in 0..m {
        let x = lu_solve(&normal, 5, &rhs[k * 5..(k + 1) * 5], 1e-10).ok_or(Error::FitUnderdetermined { vertex: i })?;
        // scaled coordinates: heights were divided by s, second derivatives by s again
        out[3 * k] = x[2] / s;
        out[3 * k + 1] = x[3] / s;
        out[3 * k + 2] = x[4] / s;
    }
    Ok(out)
}

/// Per-vertex `A` and `A⁰`, with the trace of `A` taken from the cotangent `H`.
#[derive(Debug, Clone)]
pub struct ShapeFields {
    pub codim: usize,
    /// Packed `(a, b, c)` per normal direction, `3·codim` values per vertex.
    pub a: Vec<f64>,
    pub a0: Vec<f64>,
    /// Normal coefficients of `H`, `codim` values per vertex.
    pub h_normal: Vec<f64>,
    /// Whether the quadratic fit succeeded.
    pub fitted: Vec<bool>,
}

/// Quadratic-fit second fundamental form reconciled with the cotangent `H`.
///
/// Vertices where the fit is underdetermined get zero coefficients and
/// `fitted = false`.
pub fn shape_tensor(mesh: &ImmersedMesh, frames: &VertexFrames) -> ShapeFields {
    let h = mean_curvature_vector(mesh, frames);
    shape_tensor_with(mesh, frames, &h)
}

fn shape_tensor_with(mesh: &ImmersedMesh, frames: &VertexFrames, h: &[f64]) -> ShapeFields {
    let n = mesh.dim();
    let m = frames.codim();
    let nv = mesh.vertex_count();
    let mut a = vec![0.0; nv * 3 * m];
    let mut a0 = vec![0.0; nv * 3 * m];
    let mut h_normal = vec![0.0; nv * m];
    let mut fitted = vec![false; nv];
    for i in 0..nv {
        frames.to_normal(i, &h[i * n..(i + 1) * n], &mut h_normal[i * m..(i + 1) * m]);
        let Ok(fit) = fit_second_fundamental_form(mesh, frames, i) else {
            continue;
        };
        fitted[i] = true;
        for k in 0..m {
            let o = (i * m + k) * 3;
            let half_trace = 0.5 * (fit[3 * k] + fit[3 * k + 2]);
            a0[o] = fit[3 * k] - half_trace;
            a0[o + 1] = fit[3 * k + 1];
            a0[o + 2] = -a0[o];
            let hk = 0.5 * h_normal[i * m + k];
            a[o] = a0[o] + hk;
            a[o + 1] = a0[o + 1];
            a[o + 2] = a0[o + 2] + hk;
        }
    }
    ShapeFields { codim: m, a, a0, h_normal, fitted }
}

/// Curvature state of a surface at one instant.
#[derive(Debug, Clone)]
pub struct ShapeState {
    pub dim: usize,
    pub codim: usize,
    /// Packed `(a, b, c)` per normal direction, `3·codim` values per vertex.
    pub a: Vec<f64>,
    pub a0: Vec<f64>,
    /// Ambient mean curvature vectors, `dim` values per vertex.
    pub h: Vec<f64>,
    pub h_normal: Vec<f64>,
    /// Ambient Willmore tensor, `dim` values per vertex (zero where unreliable).
    pub w: Vec<f64>,
    pub w_normal: Vec<f64>,
    /// `|A|²` per vertex.
    pub a_sq: Vec<f64>,
    /// Vertices outside the boundary collar with a well-posed fit.
    pub reliable: Vec<bool>,
}

impl ShapeState {
    pub fn vertex_count(&self) -> usize {
        self.reliable.len()
    }

    pub fn a_packed(&self, i: usize) -> &[f64] {
        &self.a[i * 3 * self.codim..(i + 1) * 3 * self.codim]
    }

    pub fn a0_packed(&self, i: usize) -> &[f64] {
        &self.a0[i * 3 * self.codim..(i + 1) * 3 * self.codim]
    }

    pub fn a_tensor(&self, i: usize) -> NormalTensor {
        NormalTensor::from_packed(self.a_packed(i))
    }

    pub fn a0_tensor(&self, i: usize) -> NormalTensor {
        NormalTensor::from_packed(self.a0_packed(i))
    }

    pub fn h(&self, i: usize) -> &[f64] {
        &self.h[i * self.dim..(i + 1) * self.dim]
    }

    pub fn w(&self, i: usize) -> &[f64] {
        &self.w[i * self.dim..(i + 1) * self.dim]
    }

    pub fn a0_sq(&self, i: usize) -> f64 {
        packed_norm_sq(self.a0_packed(i))
    }

    pub fn h_sq(&self, i: usize) -> f64 {
        let h = self.h(i);
        dot(h, h)
    }

    pub fn w_norm(&self, i: usize) -> f64 {
        let w = self.w(i);
        dot(w, w).sqrt()
    }

    /// Max `|A|` over reliable vertices.
    pub fn sup_a(&self) -> f64 {
        sup((0..self.vertex_count()).filter(|&i| self.reliable[i]).map(|i| self.a_sq[i].sqrt()))
    }

    /// Max `|W|` over reliable vertices.
    pub fn sup_w(&self) -> f64 {
        sup((0..self.vertex_count()).filter(|&i| self.reliable[i]).map(|i| self.w_norm(i)))
    }
}

/// Options for [`analyze_surface`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalysisOptions {
    /// Vertices closer than this many edges to the boundary are unreliable.
    pub collar: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions { collar: 2 }
    }
}

/// Frames, operators and curvature of one mesh snapshot.
#[derive(Debug, Clone)]
pub struct SurfaceAnalysis {
    pub frames: VertexFrames,
    pub cotan: CotanLaplacian,
    pub connection: NormalConnection,
    pub shape: ShapeState,
}

impl SurfaceAnalysis {
    pub fn reliable(&self) -> &[bool] {
        &self.shape.reliable
    }
}

/// Computes frames, `H`, `A`, `A⁰` and `W = ΔH + Q(A⁰)H` for a mesh.
pub fn analyze_surface(mesh: &ImmersedMesh, options: &AnalysisOptions) -> Result<SurfaceAnalysis> {
    if options.collar < 1 {
        return Err(Error::invalid("boundary collar must be at least one ring"));
    }
    let n = mesh.dim();
    let nv = mesh.vertex_count();
    let frames = vertex_frames(mesh)?;
    let m = frames.codim();
    let cotan = CotanLaplacian::new(mesh, &frames);
    let connection = NormalConnection::new(mesh, &frames)?;
    let h = mean_curvature_with(mesh, &frames, &cotan);
    let fields = shape_tensor_with(mesh, &frames, &h);

    let reliable: Vec<bool> =
        (0..nv).map(|i| fields.fitted[i] && mesh.boundary_distance(i) >= options.collar).collect();

    let mut lap_h = vec![0.0; nv * m];
    connection.apply_laplacian(mesh, &cotan, &fields.h_normal, &mut lap_h);
    let mut w_normal = vec![0.0; nv * m];
    let mut w = vec![0.0; nv * n];
    let mut q = [0.0; MAX_DIM];
    let mut a_sq = vec![0.0; nv];
    for i in 0..nv {
        a_sq[i] = packed_norm_sq(&fields.a[i * 3 * m..(i + 1) * 3 * m]);
        if !reliable[i] {
            continue;
        }
        q_orthonormal(&fields.a0[i * 3 * m..(i + 1) * 3 * m], &fields.h_normal[i * m..(i + 1) * m], &mut q[..m]);
        for k in 0..m {
            w_normal[i * m + k] = lap_h[i * m + k] + q[k];
        }
        frames.from_normal(i, &w_normal[i * m..(i + 1) * m], &mut w[i * n..(i + 1) * n]);
    }

    let shape = ShapeState {
        dim: n,
        codim: m,
        a: fields.a,
        a0: fields.a0,
        h,
        h_normal: fields.h_normal,
        w,
        w_normal,
        a_sq,
        reliable,
    };
    Ok(SurfaceAnalysis { frames, cotan, connection, shape })
}

/// Per-vertex Willmore tensor, `dim` ambient values per vertex.
pub fn willmore_tensor(mesh: &ImmersedMesh, options: &AnalysisOptions) -> Result<Vec<f64>> {
    Ok(analyze_surface(mesh, options)?.shape.w)
}

/// `(½∫|A|², ∫|A|²)` summed over reliable vertices.
pub fn willmore_energy(frames: &VertexFrames, shape: &ShapeState) -> (f64, f64) {
    let total = canonical_sum(
        (0..shape.vertex_count())
            .filter(|&i| shape.reliable[i])
            .map(|i| shape.a_sq[i] * frames.dual_area(i))
            .collect(),
    );
    (0.5 * total, total)
}
