//! Cotangent Laplacian and the normal-connection Laplacian.
//!
//! Sign conventions: `Δ = −∇*∇` is negative semidefinite. The stiffness
//! operator `L = −M Δ` (with `M` the diagonal of dual areas) is symmetric
//! positive semidefinite whenever the cotangent weights are nonnegative.
//! Cotangent weights can be negative on meshes with obtuse pairs; this is
//! accepted, the operators stay symmetric.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::frames::{corner_cot, VertexFrames};
use crate::linalg::{dot, polar_factor};
use crate::mesh::{ImmersedMesh, MAX_DIM};
use crate::sparse::StiffnessMatrix;

/// Edge weights `½(cot α + cot β)` and the lumped mass (dual areas).
#[derive(Debug, Clone)]
pub struct CotanLaplacian {
    weights: Vec<f64>,
    mass: Vec<f64>,
}

impl CotanLaplacian {
    pub fn new(mesh: &ImmersedMesh, frames: &VertexFrames) -> Self {
        let mut weights = vec![0.0; mesh.edges().len()];
        for t in 0..mesh.triangle_count() {
            let te = mesh.triangle_edges(t);
            for c in 0..3 {
                // side (c+1 → c+2) is opposite corner c
                weights[te[(c + 1) % 3]] += 0.5 * corner_cot(mesh, t, c);
            }
        }
        CotanLaplacian { weights, mass: frames.dual_areas().to_vec() }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn has_nonnegative_weights(&self) -> bool {
        self.weights.iter().all(|&w| w >= 0.0)
    }

    /// `(Δf)_i` of the embedding itself, using unwrapped edge vectors.
    pub fn laplacian_of_positions(&self, mesh: &ImmersedMesh, out: &mut [f64]) {
        let n = mesh.dim();
        out.iter_mut().for_each(|x| *x = 0.0);
        let mut ev = [0.0; MAX_DIM];
        for (e, edge) in mesh.edges().iter().enumerate() {
            mesh.edge_vector(e, &mut ev);
            let w = self.weights[e];
            let [a, b] = edge.vertices;
            for d in 0..n {
                out[a * n + d] += w * ev[d];
                out[b * n + d] -= w * ev[d];
            }
        }
        for (i, m) in self.mass.iter().enumerate() {
            for d in 0..n {
                out[i * n + d] /= m;
            }
        }
    }

    /// `out = L x` for a field with `stride` components per vertex.
    pub fn apply_stiffness(&self, mesh: &ImmersedMesh, x: &[f64], stride: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (e, edge) in mesh.edges().iter().enumerate() {
            let w = self.weights[e];
            let [a, b] = edge.vertices;
            for d in 0..stride {
                let diff = w * (x[a * stride + d] - x[b * stride + d]);
                out[a * stride + d] += diff;
                out[b * stride + d] -= diff;
            }
        }
    }

    /// Componentwise `Δx = −M⁻¹ L x`.
    pub fn apply_laplacian(&self, mesh: &ImmersedMesh, x: &[f64], stride: usize, out: &mut [f64]) {
        self.apply_stiffness(mesh, x, stride, out);
        for (i, m) in self.mass.iter().enumerate() {
            for d in 0..stride {
                out[i * stride + d] /= -m;
            }
        }
    }

    /// `L` assembled as a sparse matrix.
    pub(crate) fn stiffness_matrix(&self, mesh: &ImmersedMesh) -> StiffnessMatrix {
        let edges = mesh.edges().iter().zip(&self.weights).map(|(e, &w)| (e.vertices[0], e.vertices[1], w, None));
        StiffnessMatrix::from_edges(mesh.vertex_count(), 1, edges)
    }

    /// Diagonal of `L`, also the diagonal of the connection stiffness.
    pub fn stiffness_diagonal(&self, mesh: &ImmersedMesh) -> Vec<f64> {
        let mut ldiag = vec![0.0; mesh.vertex_count()];
        for (e, edge) in mesh.edges().iter().enumerate() {
            ldiag[edge.vertices[0]] += self.weights[e];
            ldiag[edge.vertices[1]] += self.weights[e];
        }
        ldiag
    }

    /// Diagonal of `L M⁻¹ L`.
    pub fn bilaplacian_diagonal(&self, mesh: &ImmersedMesh) -> Vec<f64> {
        let nv = mesh.vertex_count();
        let ldiag = self.stiffness_diagonal(mesh);
        let mut out: Vec<f64> = (0..nv).map(|i| ldiag[i] * ldiag[i] / self.mass[i]).collect();
        for (e, edge) in mesh.edges().iter().enumerate() {
            let w = self.weights[e];
            let [a, b] = edge.vertices;
            out[a] += w * w / self.mass[b];
            out[b] += w * w / self.mass[a];
        }
        out
    }
}

/// Orthogonal transports between the normal spaces of adjacent vertices.
#[derive(Debug, Clone)]
pub struct NormalConnection {
    codim: usize,
    /// Per edge, the `codim × codim` map from coefficients at `vertices[1]`
    /// to coefficients at `vertices[0]`.
    transports: Vec<f64>,
}

/// Smallest singular value of the basis overlap tolerated across an edge.
pub const MIN_OVERLAP: f64 = 0.1;

impl NormalConnection {
    pub fn new(mesh: &ImmersedMesh, frames: &VertexFrames) -> Result<Self> {
        let m = frames.codim();
        let mut transports = vec![0.0; mesh.edges().len() * m * m];
        let mut overlap = [0.0; MAX_DIM * MAX_DIM];
        for (e, edge) in mesh.edges().iter().enumerate() {
            let [a, b] = edge.vertices;
            for r in 0..m {
                for c in 0..m {
                    overlap[r * m + c] = dot(frames.normal(a, r), frames.normal(b, c));
                }
            }
            let (p, min_sv) = polar_factor(&overlap[..m * m], m);
            if min_sv < MIN_OVERLAP {
                return Err(Error::TransportIllConditioned { a, b, singular_value: min_sv });
            }
            transports[e * m * m..(e + 1) * m * m].copy_from_slice(&p);
        }
        Ok(NormalConnection { codim: m, transports })
    }

    pub fn codim(&self) -> usize {
        self.codim
    }

    pub fn transport(&self, e: usize) -> &[f64] {
        let m = self.codim;
        &self.transports[e * m * m..(e + 1) * m * m]
    }

    /// `out = L_∇ φ`, the connection stiffness `Σ_j w_ij (φ_i − P_{j→i} φ_j)`.
    pub fn apply_stiffness(&self, mesh: &ImmersedMesh, cotan: &CotanLaplacian, phi: &[f64], out: &mut [f64]) {
        let m = self.codim;
        out.iter_mut().for_each(|v| *v = 0.0);
        for (e, edge) in mesh.edges().iter().enumerate() {
            let w = cotan.weights()[e];
            let p = self.transport(e);
            let [a, b] = edge.vertices;
            for r in 0..m {
                // P φ_b at a, Pᵀ φ_a at b
                let mut pb = 0.0;
                let mut pta = 0.0;
                for c in 0..m {
                    pb += p[r * m + c] * phi[b * m + c];
                    pta += p[c * m + r] * phi[a * m + c];
                }
                out[a * m + r] += w * (phi[a * m + r] - pb);
                out[b * m + r] += w * (phi[b * m + r] - pta);
            }
        }
    }

    /// The connection stiffness assembled as a sparse block matrix.
    pub(crate) fn stiffness_matrix(&self, mesh: &ImmersedMesh, cotan: &CotanLaplacian) -> StiffnessMatrix {
        let m = self.codim;
        let edges = mesh
            .edges()
            .iter()
            .enumerate()
            .map(move |(e, edge)| (edge.vertices[0], edge.vertices[1], cotan.weights()[e], Some(&self.transports[e * m * m..(e + 1) * m * m])));
        StiffnessMatrix::from_edges(mesh.vertex_count(), m, edges)
    }

    /// `(Δφ)_i = (1/μ_i) Σ_j w_ij (P_{j→i} φ_j − φ_i)` on normal-coefficient fields.
    pub fn apply_laplacian(&self, mesh: &ImmersedMesh, cotan: &CotanLaplacian, phi: &[f64], out: &mut [f64]) {
        let m = self.codim;
        self.apply_stiffness(mesh, cotan, phi, out);
        for (i, mass) in cotan.mass().iter().enumerate() {
            for r in 0..m {
                out[i * m + r] /= -mass;
            }
        }
    }

    /// Diagonal of `L_∇ M⁻¹ L_∇` (per component), used as a preconditioner.
    pub fn bilaplacian_diagonal(&self, mesh: &ImmersedMesh, cotan: &CotanLaplacian) -> Vec<f64> {
        let m = self.codim;
        let d = cotan.bilaplacian_diagonal(mesh);
        let mut out = vec![0.0; d.len() * m];
        for (i, v) in d.iter().enumerate() {
            for r in 0..m {
                out[i * m + r] = *v;
            }
        }
        out
    }
}

/// Normal-connection Laplacian of a normal-coefficient field.
pub fn normal_connection_laplacian(mesh: &ImmersedMesh, frames: &VertexFrames, phi: &[f64]) -> Result<Vec<f64>> {
    let m = frames.codim();
    if phi.len() != mesh.vertex_count() * m {
        return Err(Error::DimensionMismatch { expected: mesh.vertex_count() * m, found: phi.len() });
    }
    let cotan = CotanLaplacian::new(mesh, frames);
    let conn = NormalConnection::new(mesh, frames)?;
    let mut out = vec![0.0; phi.len()];
    conn.apply_laplacian(mesh, &cotan, phi, &mut out);
    Ok(out)
}
