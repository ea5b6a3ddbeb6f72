//! Conjugate-gradient solver for the symmetric positive definite systems of
//! the semi-implicit schemes.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::dot;

/// A symmetric stiffness assembled row-wise, with `block × block` entries.
#[derive(Debug, Clone)]
pub(crate) struct StiffnessMatrix {
    block: usize,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl StiffnessMatrix {
    /// Assembles `Σ_e w_e (φ_a − P_e φ_b)` and its mirror at `b` from
    /// `(a, b, w, P)` per edge, `P` row-major `block × block` (identity when `None`).
    pub fn from_edges<'p, I>(nv: usize, block: usize, edges: I) -> Self
    where
        I: Iterator<Item = (usize, usize, f64, Option<&'p [f64]>)> + Clone,
    {
        let bb = block * block;
        let mut count = vec![1usize; nv];
        for (a, b, _, _) in edges.clone() {
            count[a] += 1;
            count[b] += 1;
        }
        let mut offsets = vec![0usize; nv + 1];
        for i in 0..nv {
            offsets[i + 1] = offsets[i] + count[i];
        }
        let total = offsets[nv];
        let mut cols = vec![0usize; total];
        let mut vals = vec![0.0; total * bb];
        // slot 0 of every row is the diagonal
        let mut fill: Vec<usize> = (0..nv).map(|i| offsets[i] + 1).collect();
        for i in 0..nv {
            cols[offsets[i]] = i;
        }
        for (a, b, w, p) in edges {
            for r in 0..block {
                vals[offsets[a] * bb + r * block + r] += w;
                vals[offsets[b] * bb + r * block + r] += w;
            }
            let (sa, sb) = (fill[a], fill[b]);
            fill[a] += 1;
            fill[b] += 1;
            cols[sa] = b;
            cols[sb] = a;
            for r in 0..block {
                for c in 0..block {
                    let prc = match p {
                        Some(p) => p[r * block + c],
                        None => if r == c { 1.0 } else { 0.0 },
                    };
                    vals[sa * bb + r * block + c] -= w * prc;
                    vals[sb * bb + c * block + r] -= w * prc;
                }
            }
        }
        StiffnessMatrix { block, offsets, cols, vals }
    }

    /// Per-vertex diagonal (first diagonal entry of each block).
    pub fn diagonal(&self) -> Vec<f64> {
        let bb = self.block * self.block;
        (0..self.offsets.len() - 1).map(|i| self.vals[self.offsets[i] * bb]).collect()
    }

    /// `out = K x`; with scalar blocks `stride` components are treated
    /// independently, otherwise `stride` must equal the block size.
    pub fn apply(&self, x: &[f64], stride: usize, out: &mut [f64]) {
        let nv = self.offsets.len() - 1;
        if self.block == 1 {
            for i in 0..nv {
                let o = &mut out[i * stride..(i + 1) * stride];
                o.iter_mut().for_each(|v| *v = 0.0);
                for s in self.offsets[i]..self.offsets[i + 1] {
                    let j = self.cols[s];
                    let w = self.vals[s];
                    for (d, od) in o.iter_mut().enumerate() {
                        *od += w * x[j * stride + d];
                    }
                }
            }
        } else {
            let m = self.block;
            debug_assert_eq!(stride, m);
            for i in 0..nv {
                let o = &mut out[i * m..(i + 1) * m];
                o.iter_mut().for_each(|v| *v = 0.0);
                for s in self.offsets[i]..self.offsets[i + 1] {
                    let j = self.cols[s];
                    let blk = &self.vals[s * m * m..(s + 1) * m * m];
                    for r in 0..m {
                        let mut acc = 0.0;
                        for c in 0..m {
                            acc += blk[r * m + c] * x[j * m + c];
                        }
                        o[r] += acc;
                    }
                }
            }
        }
    }
}

/// `(D + dt·(K M⁻¹ K)_AA) x = b` on the rows `index` of a field with
/// `stride` components per vertex, all other rows held at zero.
///
/// `D` is a positive diagonal (one entry per active component), `K` a
/// Laplacian-type stiffness applied through `stiffness` on full fields and
/// `kdiag` its per-vertex diagonal. The outer solve is flexible CG
/// preconditioned with `P = B D⁻¹ B`, `B = D + √dt·K_AA`, which satisfies
/// `A ≤ P ≤ 2A` when `D = M`; the two `B` solves are inexact Jacobi CG.
pub(crate) struct Biharmonic<'a, F: Fn(&[f64], &mut [f64])> {
    pub index: &'a [usize],
    pub stride: usize,
    pub mass: &'a [f64],
    pub d: &'a [f64],
    pub kdiag: &'a [f64],
    pub dt: f64,
    pub stiffness: F,
}

const INNER_TOLERANCE: f64 = 1e-3;
const INNER_MAX_ITER: usize = 400;
const OUTER_MAX_ITER: usize = 2000;

impl<F: Fn(&[f64], &mut [f64])> Biharmonic<'_, F> {
    fn embed(&self, x: &[f64], full: &mut [f64]) {
        let m = self.stride;
        full.iter_mut().for_each(|v| *v = 0.0);
        for (r, &i) in self.index.iter().enumerate() {
            full[i * m..(i + 1) * m].copy_from_slice(&x[r * m..(r + 1) * m]);
        }
    }

    fn apply(&self, x: &[f64], out: &mut [f64], s1: &mut [f64], s2: &mut [f64]) {
        let m = self.stride;
        self.embed(x, s1);
        (self.stiffness)(s1, s2);
        for (i, mi) in self.mass.iter().enumerate() {
            s2[i * m..(i + 1) * m].iter_mut().for_each(|v| *v /= mi);
        }
        (self.stiffness)(s2, s1);
        for (r, &i) in self.index.iter().enumerate() {
            for c in 0..m {
                out[r * m + c] = self.d[r * m + c] * x[r * m + c] + self.dt * s1[i * m + c];
            }
        }
    }

    fn apply_inner(&self, x: &[f64], out: &mut [f64], s1: &mut [f64], s2: &mut [f64]) {
        let m = self.stride;
        let sq = self.dt.sqrt();
        self.embed(x, s1);
        (self.stiffness)(s1, s2);
        for (r, &i) in self.index.iter().enumerate() {
            for c in 0..m {
                out[r * m + c] = self.d[r * m + c] * x[r * m + c] + sq * s2[i * m + c];
            }
        }
    }

    /// Approximate `B⁻¹ b` by Jacobi CG from zero.
    fn inner_solve(&self, b: &[f64], x: &mut [f64], s1: &mut [f64], s2: &mut [f64]) {
        let m = self.stride;
        let sq = self.dt.sqrt();
        let k = b.len();
        let diag: Vec<f64> = (0..k).map(|j| self.d[j] + sq * self.kdiag[self.index[j / m]]).collect();
        x.iter_mut().for_each(|v| *v = 0.0);
        let bnorm = dot(b, b).sqrt();
        if bnorm == 0.0 {
            return;
        }
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&diag).map(|(a, d)| a / d).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; k];
        let mut rz = dot(&r, &z);
        for _ in 0..INNER_MAX_ITER {
            self.apply_inner(&p, &mut ap, s1, s2);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                break;
            }
            let alpha = rz / pap;
            for j in 0..k {
                x[j] += alpha * p[j];
                r[j] -= alpha * ap[j];
            }
            if dot(&r, &r).sqrt() <= INNER_TOLERANCE * bnorm {
                break;
            }
            for j in 0..k {
                z[j] = r[j] / diag[j];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for j in 0..k {
                p[j] = z[j] + beta * p[j];
            }
        }
    }

    fn precondition(&self, r: &[f64], z: &mut [f64], tmp: &mut [f64], s1: &mut [f64], s2: &mut [f64]) {
        self.inner_solve(r, tmp, s1, s2);
        for (t, d) in tmp.iter_mut().zip(self.d) {
            *t *= d;
        }
        let rhs = tmp.to_vec();
        self.inner_solve(&rhs, z, s1, s2);
    }

    /// Solves to relative residual `tol`, starting from zero.
    pub fn solve(&self, b: &[f64], tol: f64) -> Result<Vec<f64>> {
        let k = b.len();
        let full = self.mass.len() * self.stride;
        let mut s1 = vec![0.0; full];
        let mut s2 = vec![0.0; full];
        let mut x = vec![0.0; k];
        let bnorm = dot(b, b).sqrt();
        if bnorm == 0.0 {
            return Ok(x);
        }
        let mut r = b.to_vec();
        let mut z = vec![0.0; k];
        let mut tmp = vec![0.0; k];
        self.precondition(&r, &mut z, &mut tmp, &mut s1, &mut s2);
        let mut p = z.clone();
        let mut ap = vec![0.0; k];
        let mut rz = dot(&r, &z);
        let mut z_old = z.clone();
        for _ in 0..OUTER_MAX_ITER {
            self.apply(&p, &mut ap, &mut s1, &mut s2);
            let pap = dot(&p, &ap);
            let rnorm = dot(&r, &r).sqrt();
            if !(pap > 0.0) {
                return Err(Error::SolveFailed { residual: rnorm / bnorm });
            }
            let alpha = rz / pap;
            for j in 0..k {
                x[j] += alpha * p[j];
                r[j] -= alpha * ap[j];
            }
            if dot(&r, &r).sqrt() <= tol * bnorm {
                return Ok(x);
            }
            z_old.copy_from_slice(&z);
            self.precondition(&r, &mut z, &mut tmp, &mut s1, &mut s2);
            // Polak-Ribière form tolerates the inexact preconditioner
            let num: f64 = (0..k).map(|j| r[j] * (z[j] - z_old[j])).sum();
            let beta = (num / rz).max(0.0);
            rz = dot(&r, &z);
            for j in 0..k {
                p[j] = z[j] + beta * p[j];
            }
        }
        let rnorm = dot(&r, &r).sqrt();
        Err(Error::SolveFailed { residual: rnorm / bnorm })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn biharmonic_on_a_ring() {
        // periodic 1D chain, K = path Laplacian
        let nv = 64;
        let stiffness = |x: &[f64], out: &mut [f64]| {
            for i in 0..nv {
                out[i] = 2.0 * x[i] - x[(i + 1) % nv] - x[(i + nv - 1) % nv];
            }
        };
        let mass = vec![0.5; nv];
        let index: Vec<usize> = (0..nv).filter(|i| i % 7 != 3).collect();
        let d: Vec<f64> = index.iter().map(|&i| 0.5 / (0.2 + (i % 5) as f64 * 0.2)).collect();
        let kdiag = vec![2.0; nv];
        let sys = Biharmonic { index: &index, stride: 1, mass: &mass, d: &d, kdiag: &kdiag, dt: 3.0, stiffness };
        let b: Vec<f64> = (0..index.len()).map(|j| (j as f64 * 0.3).cos()).collect();
        let x = sys.solve(&b, 1e-12).unwrap();
        let mut ax = vec![0.0; b.len()];
        let (mut s1, mut s2) = (vec![0.0; nv], vec![0.0; nv]);
        sys.apply(&x, &mut ax, &mut s1, &mut s2);
        for j in 0..b.len() {
            assert!((ax[j] - b[j]).abs() < 1e-10);
        }
    }
}
