//! Per-vertex tangent/normal frames and mixed-Voronoi dual areas.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, sym_eigen, wedge_norm};
use crate::mesh::{ImmersedMesh, MAX_DIM};

/// Orthonormal splitting `T ⊕ N = R^n` at one vertex plus its share of area.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFrame {
    pub tangent_basis: [Vec<f64>; 2],
    pub normal_basis: Vec<Vec<f64>>,
    pub dual_area: f64,
}

/// Frames of all vertices, stored flat.
#[derive(Debug, Clone)]
pub struct VertexFrames {
    dim: usize,
    codim: usize,
    tangent: Vec<f64>,
    normal: Vec<f64>,
    dual_area: Vec<f64>,
}

impl VertexFrames {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn codim(&self) -> usize {
        self.codim
    }

    pub fn len(&self) -> usize {
        self.dual_area.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dual_area.is_empty()
    }

    pub fn tangent(&self, i: usize, k: usize) -> &[f64] {
        let o = (i * 2 + k) * self.dim;
        &self.tangent[o..o + self.dim]
    }

    pub fn normal(&self, i: usize, k: usize) -> &[f64] {
        let o = (i * self.codim + k) * self.dim;
        &self.normal[o..o + self.dim]
    }

    pub fn dual_area(&self, i: usize) -> f64 {
        self.dual_area[i]
    }

    pub fn dual_areas(&self) -> &[f64] {
        &self.dual_area
    }

    pub fn frame(&self, i: usize) -> VertexFrame {
        VertexFrame {
            tangent_basis: [self.tangent(i, 0).to_vec(), self.tangent(i, 1).to_vec()],
            normal_basis: (0..self.codim).map(|k| self.normal(i, k).to_vec()).collect(),
            dual_area: self.dual_area[i],
        }
    }

    /// Coefficients of the normal projection of `v` in the normal basis of vertex `i`.
    pub fn to_normal(&self, i: usize, v: &[f64], out: &mut [f64]) {
        for k in 0..self.codim {
            out[k] = dot(self.normal(i, k), v);
        }
    }

    /// Ambient vector with normal coefficients `c` at vertex `i`.
    pub fn from_normal(&self, i: usize, c: &[f64], out: &mut [f64]) {
        out[..self.dim].iter_mut().for_each(|x| *x = 0.0);
        for k in 0..self.codim {
            let nu = self.normal(i, k);
            for d in 0..self.dim {
                out[d] += c[k] * nu[d];
            }
        }
    }

    /// Orthogonal projection onto the normal space at vertex `i`.
    pub fn project_normal(&self, i: usize, v: &[f64], out: &mut [f64]) {
        let mut c = [0.0; MAX_DIM];
        self.to_normal(i, v, &mut c);
        self.from_normal(i, &c, out);
    }

    /// Tangential coordinates of `v` in the tangent basis of vertex `i`.
    pub fn to_tangent(&self, i: usize, v: &[f64]) -> [f64; 2] {
        [dot(self.tangent(i, 0), v), dot(self.tangent(i, 1), v)]
    }
}

/// Cotangent of the angle at corner `c` of triangle `t`.
pub(crate) fn corner_cot(mesh: &ImmersedMesh, t: usize, c: usize) -> f64 {
    let n = mesh.dim();
    let mut u = [0.0; MAX_DIM];
    let mut v = [0.0; MAX_DIM];
    mesh.triangle_edge_vectors(t, c, &mut u, &mut v);
    dot(&u[..n], &v[..n]) / wedge_norm(&u[..n], &v[..n])
}

/// Mixed-Voronoi dual areas (Voronoi cells, clamped to barycentric-style
/// shares on obtuse triangles).
pub fn mixed_voronoi_areas(mesh: &ImmersedMesh) -> Vec<f64> {
    let n = mesh.dim();
    let mut area = vec![0.0; mesh.vertex_count()];
    let mut u = [[0.0; MAX_DIM]; 3];
    let mut v = [[0.0; MAX_DIM]; 3];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let mut cot = [0.0; 3];
        let mut obtuse = None;
        for c in 0..3 {
            mesh.triangle_edge_vectors(t, c, &mut u[c], &mut v[c]);
            let uv = dot(&u[c][..n], &v[c][..n]);
            cot[c] = uv / wedge_norm(&u[c][..n], &v[c][..n]);
            if uv < 0.0 {
                obtuse = Some(c);
            }
        }
        let tri_area = 0.5 * wedge_norm(&u[0][..n], &v[0][..n]);
        match obtuse {
            None => {
                for c in 0..3 {
                    let uu = dot(&u[c][..n], &u[c][..n]);
                    let vv = dot(&v[c][..n], &v[c][..n]);
                    area[tri[c]] += (vv * cot[(c + 1) % 3] + uu * cot[(c + 2) % 3]) / 8.0;
                }
            }
            Some(o) => {
                for c in 0..3 {
                    area[tri[c]] += if c == o { tri_area / 2.0 } else { tri_area / 4.0 };
                }
            }
        }
    }
    area
}

/// Tangent planes from the weighted covariance of incident face planes,
/// normal spaces as their orthogonal complements, and mixed-Voronoi areas.
pub fn vertex_frames(mesh: &ImmersedMesh) -> Result<VertexFrames> {
    let n = mesh.dim();
    let codim = n - 2;
    let nv = mesh.vertex_count();
    let mut tangent = vec![0.0; nv * 2 * n];
    let mut normal = vec![0.0; nv * codim * n];
    let mut cov = vec![0.0; nv * n * n];

    let mut u = [0.0; MAX_DIM];
    let mut v = [0.0; MAX_DIM];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        mesh.triangle_edge_vectors(t, 0, &mut u, &mut v);
        let area = 0.5 * wedge_norm(&u[..n], &v[..n]);
        let lu = norm(&u[..n]);
        let mut e1 = [0.0; MAX_DIM];
        let mut e2 = [0.0; MAX_DIM];
        for d in 0..n {
            e1[d] = u[d] / lu;
        }
        let p = dot(&v[..n], &e1[..n]);
        for d in 0..n {
            e2[d] = v[d] - p * e1[d];
        }
        let l2 = norm(&e2[..n]);
        for d in 0..n {
            e2[d] /= l2;
        }
        for (c, &vi) in tri.iter().enumerate() {
            // Max's weights: area over the squared lengths of the two edges at
            // the corner, exact for vertices on a common sphere
            mesh.triangle_edge_vectors(t, c, &mut u, &mut v);
            let w = area / (dot(&u[..n], &u[..n]) * dot(&v[..n], &v[..n]));
            let cv = &mut cov[vi * n * n..(vi + 1) * n * n];
            for a in 0..n {
                for b in 0..n {
                    cv[a * n + b] += w * (e1[a] * e1[b] + e2[a] * e2[b]);
                }
            }
        }
    }

    for i in 0..nv {
        let (vals, vecs) = sym_eigen(&cov[i * n * n..(i + 1) * n * n], n);
        let top = vals[0];
        if !(vals[1] > 1e-3 * top) || !(vals[1] - vals[2] > 1e-3 * top) {
            return Err(Error::RankDeficient { vertex: i });
        }
        tangent[i * 2 * n..(i + 1) * 2 * n].copy_from_slice(&vecs[..2 * n]);
        normal[i * codim * n..(i + 1) * codim * n].copy_from_slice(&vecs[2 * n..]);
    }

    Ok(VertexFrames { dim: n, codim, tangent, normal, dual_area: mixed_voronoi_areas(mesh) })
}
