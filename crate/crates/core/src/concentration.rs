//! Local curvature concentration `∫_{Σ∩B_ϱ(x)} |A|² dμ` over vertex centres.
//!
//! The supremum is taken over vertex-positioned centres only, so it is a lower
//! bound for the supremum over all of `R^n`. Balls are extrinsic. On periodic
//! meshes a vertex counts once if any of its nearby lattice images is inside.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::curvature::SurfaceAnalysis;
use crate::error::{Error, Result};
use crate::mesh::{ImmersedMesh, MAX_DIM};
use crate::numeric::canonical_sum;
use crate::spatial::Grid;

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationProfile {
    pub radius: f64,
    pub per_center: BTreeMap<usize, f64>,
    pub sup_value: f64,
}

/// Calls `visit(j)` once for every vertex `j` with some image within `radius` of `q`.
pub(crate) fn for_each_in_ball(mesh: &ImmersedMesh, grid: &Grid, q: &[f64], radius: f64, mut visit: impl FnMut(usize)) {
    let n = mesh.dim();
    let r2 = radius * radius;
    let dist2 = |p: &[f64], q: &[f64]| {
        let mut s = 0.0;
        for d in 0..n {
            s += (p[d] - q[d]) * (p[d] - q[d]);
        }
        s
    };
    match mesh.lattice() {
        None => grid.candidates(q, |j| {
            if dist2(mesh.position(j), q) <= r2 {
                visit(j);
            }
        }),
        Some(lat) => {
            let mut seen: BTreeMap<usize, ()> = BTreeMap::new();
            let mut tr = [0.0; MAX_DIM];
            let mut qs = [0.0; MAX_DIM];
            for sh in lat.neighbour_shifts() {
                lat.translation(sh, &mut tr);
                for d in 0..n {
                    qs[d] = q[d] - tr[d];
                }
                grid.candidates(&qs[..n], |j| {
                    if dist2(mesh.position(j), &qs[..n]) <= r2 {
                        seen.insert(j, ());
                    }
                });
            }
            seen.keys().for_each(|&j| visit(j));
        }
    }
}

/// Per-centre energy in balls of radius `radius` around reliable vertices,
/// counting contributions `|A_j|² μ_j` of reliable vertices.
pub fn local_concentration(mesh: &ImmersedMesh, analysis: &SurfaceAnalysis, radius: f64) -> Result<ConcentrationProfile> {
    if !(radius > 0.0) {
        return Err(Error::invalid("concentration radius must be positive"));
    }
    let shape = &analysis.shape;
    let nv = mesh.vertex_count();
    let contrib: Vec<f64> =
        (0..nv).map(|j| if shape.reliable[j] { shape.a_sq[j] * analysis.frames.dual_area(j) } else { 0.0 }).collect();
    let grid = Grid::new(mesh.positions(), mesh.dim(), radius);
    let mut per_center = BTreeMap::new();
    let mut sup_value = 0.0f64;
    let mut members = vec![];
    for i in (0..nv).filter(|&i| shape.reliable[i]) {
        members.clear();
        for_each_in_ball(mesh, &grid, mesh.position(i), radius, |j| members.push(contrib[j]));
        let e = canonical_sum(members.clone());
        sup_value = sup_value.max(e);
        per_center.insert(i, e);
    }
    Ok(ConcentrationProfile { radius, per_center, sup_value })
}

/// `μ(B_R(center))` for each radius, summing dual areas of vertices inside
/// the (non-periodic) ball.
pub fn area_by_radius(mesh: &ImmersedMesh, dual_areas: &[f64], radii: &[f64], center: &[f64]) -> Result<Vec<(f64, f64)>> {
    let n = mesh.dim();
    if center.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: center.len() });
    }
    let dist: Vec<f64> = (0..mesh.vertex_count())
        .map(|i| {
            let p = mesh.position(i);
            let mut s = 0.0;
            for d in 0..n {
                s += (p[d] - center[d]) * (p[d] - center[d]);
            }
            s
        })
        .collect();
    Ok(radii
        .iter()
        .map(|&r| {
            let inside = (0..dist.len()).filter(|&i| dist[i] <= r * r).map(|i| dual_areas[i]).collect();
            (r, canonical_sum(inside))
        })
        .collect())
}
