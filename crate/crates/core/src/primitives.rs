//! Generators for reference geometries with known curvature.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::mesh::{ImmersedMesh, PeriodicLattice};

/// Triangles of an `nx × ny` cell grid, each cell split along its
/// `(i, j) → (i+1, j+1)` diagonal. Wrapped directions reuse the first column
/// or row; the returned shifts record which corners crossed the seam.
fn grid_triangles(nx: usize, ny: usize, wrap_x: bool, wrap_y: bool) -> (Vec<[usize; 3]>, Vec<[[i32; 2]; 3]>) {
    let cols = if wrap_x { nx } else { nx + 1 };
    let index = |i: usize, j: usize| -> (usize, [i32; 2]) {
        let (ii, sx) = if wrap_x && i == nx { (0, 1) } else { (i, 0) };
        let (jj, sy) = if wrap_y && j == ny { (0, 1) } else { (j, 0) };
        (jj * cols + ii, [sx, sy])
    };
    let mut tris = Vec::with_capacity(2 * nx * ny);
    let mut shifts = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let a = index(i, j);
            let b = index(i + 1, j);
            let c = index(i + 1, j + 1);
            let d = index(i, j + 1);
            tris.push([a.0, b.0, c.0]);
            shifts.push([a.1, b.1, c.1]);
            tris.push([a.0, c.0, d.0]);
            shifts.push([a.1, c.1, d.1]);
        }
    }
    (tris, shifts)
}

fn check(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::invalid(msg))
    }
}

/// Periodic grid on `[0, lx) × [0, ly)` in the first two coordinates of `R^dim`.
///
/// With square cells the cotangent weights reproduce the five-point stencil.
pub fn flat_torus_grid(nx: usize, ny: usize, lx: f64, ly: f64, dim: usize) -> Result<ImmersedMesh> {
    check(nx >= 3 && ny >= 3, "flat torus grid needs at least 3 cells per direction")?;
    check(lx > 0.0 && ly > 0.0, "flat torus grid needs positive periods")?;
    check(dim >= 3, "ambient dimension must be at least 3")?;
    periodic_graph(nx, ny, lx, ly, dim, &|_, _| 0.0)
}

fn periodic_graph(nx: usize, ny: usize, lx: f64, ly: f64, dim: usize, height: &dyn Fn(f64, f64) -> f64) -> Result<ImmersedMesh> {
    let mut pos = vec![0.0; nx * ny * dim];
    for j in 0..ny {
        for i in 0..nx {
            let x = lx * i as f64 / nx as f64;
            let y = ly * j as f64 / ny as f64;
            let p = &mut pos[(j * nx + i) * dim..(j * nx + i + 1) * dim];
            p[0] = x;
            p[1] = y;
            p[2] = height(x, y);
        }
    }
    let (tris, shifts) = grid_triangles(nx, ny, true, true);
    let mut g0 = vec![0.0; dim];
    let mut g1 = vec![0.0; dim];
    g0[0] = lx;
    g1[1] = ly;
    let lattice = PeriodicLattice::new(dim, vec![g0, g1], shifts)?;
    ImmersedMesh::new_periodic(dim, pos, tris, lattice)
}

/// Icosahedron subdivided `level` times by edge midpoints, projected to the sphere.
pub fn icosphere(level: u32, radius: f64) -> Result<ImmersedMesh> {
    check(level <= 8, "icosphere level above 8 is not supported")?;
    check(radius > 0.0, "sphere radius must be positive")?;
    let t = (1.0 + 5.0.sqrt()) / 2.0;
    let mut pts: Vec<[f64; 3]> = vec![
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let mut tris: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let unit = |p: [f64; 3]| {
        let l = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        [p[0] / l, p[1] / l, p[2] / l]
    };
    for p in pts.iter_mut() {
        *p = unit(*p);
    }
    for _ in 0..level {
        let mut mid: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut next = Vec::with_capacity(tris.len() * 4);
        for tri in &tris {
            let mut m = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                m[k] = *mid.entry(key).or_insert_with(|| {
                    let (pa, pb) = (pts[a], pts[b]);
                    pts.push(unit([pa[0] + pb[0], pa[1] + pb[1], pa[2] + pb[2]]));
                    pts.len() - 1
                });
            }
            next.push([tri[0], m[0], m[2]]);
            next.push([tri[1], m[1], m[0]]);
            next.push([tri[2], m[2], m[1]]);
            next.push(m);
        }
        tris = next;
    }
    let pos = pts.iter().flat_map(|p| p.iter().map(|x| x * radius)).collect();
    ImmersedMesh::new(3, pos, tris)
}

/// Open cylinder of the given radius along the z axis, `n_around` vertices per
/// ring, consecutive rings offset by half a step so triangles are close to
/// equilateral.
pub fn tube(radius: f64, length: f64, n_around: usize) -> Result<ImmersedMesh> {
    check(radius > 0.0 && length > 0.0, "tube radius and length must be positive")?;
    check(n_around >= 6, "tube needs at least 6 vertices per ring")?;
    let step = 2.0 * PI / n_around as f64;
    let h = radius * step * 3.0.sqrt() / 2.0;
    let rings = ((length / h).round() as usize).max(2) + 1;
    let dz = length / (rings - 1) as f64;
    let mut pos = Vec::with_capacity(rings * n_around * 3);
    for r in 0..rings {
        let off = if r % 2 == 1 { 0.5 } else { 0.0 };
        for k in 0..n_around {
            let th = (k as f64 + off) * step;
            pos.extend_from_slice(&[radius * th.cos(), radius * th.sin(), r as f64 * dz - 0.5 * length]);
        }
    }
    let id = |r: usize, k: usize| r * n_around + k % n_around;
    let mut tris = Vec::new();
    for r in 0..rings - 1 {
        for k in 0..n_around {
            if r % 2 == 0 {
                tris.push([id(r, k), id(r, k + 1), id(r + 1, k)]);
                tris.push([id(r, k + 1), id(r + 1, k + 1), id(r + 1, k)]);
            } else {
                tris.push([id(r, k), id(r + 1, k + 1), id(r + 1, k)]);
                tris.push([id(r, k), id(r, k + 1), id(r + 1, k + 1)]);
            }
        }
    }
    ImmersedMesh::new(3, pos, tris)
}

/// Torus of revolution `((R + r cos v) cos u, (R + r cos v) sin u, r sin v)`.
pub fn torus(major: f64, minor: f64, nu: usize, nv: usize) -> Result<ImmersedMesh> {
    check(major > minor && minor > 0.0, "torus needs 0 < r < R")?;
    check(nu >= 3 && nv >= 3, "torus needs at least 3 cells per direction")?;
    closed_grid(nu, nv, 3, &|u, v, p| {
        p[0] = (major + minor * v.cos()) * u.cos();
        p[1] = (major + minor * v.cos()) * u.sin();
        p[2] = minor * v.sin();
    })
}

/// Clifford torus `(cos u, sin u, cos v, sin v)` in `R⁴`: `H` has length `√2`,
/// `|A⁰|² = 1` and the surface is Willmore.
pub fn clifford_torus(nu: usize, nv: usize) -> Result<ImmersedMesh> {
    check(nu >= 3 && nv >= 3, "clifford torus needs at least 3 cells per direction")?;
    closed_grid(nu, nv, 4, &|u, v, p| {
        p[0] = u.cos();
        p[1] = u.sin();
        p[2] = v.cos();
        p[3] = v.sin();
    })
}

fn closed_grid(nu: usize, nv: usize, dim: usize, map: &dyn Fn(f64, f64, &mut [f64])) -> Result<ImmersedMesh> {
    let mut pos = vec![0.0; nu * nv * dim];
    for j in 0..nv {
        for i in 0..nu {
            let u = 2.0 * PI * i as f64 / nu as f64;
            let v = 2.0 * PI * j as f64 / nv as f64;
            map(u, v, &mut pos[(j * nu + i) * dim..(j * nu + i + 1) * dim]);
        }
    }
    let (tris, _) = grid_triangles(nu, nv, true, true);
    ImmersedMesh::new(dim, pos, tris)
}

/// Disk of the given radius in the `xy` plane, cut from an equilateral lattice
/// of spacing `h`.
pub fn plane_disk(radius: f64, h: f64, dim: usize) -> Result<ImmersedMesh> {
    check(radius > 0.0 && h > 0.0 && h < radius, "plane disk needs 0 < h < radius")?;
    check(dim >= 3, "ambient dimension must be at least 3")?;
    let rows = (radius / (h * 3.0.sqrt() / 2.0)).ceil() as i64 + 1;
    let cols = (radius / h).ceil() as i64 + rows + 1;
    let lattice_pt = |i: i64, j: i64| -> [f64; 2] {
        [h * (i as f64 + 0.5 * j as f64), h * 3.0.sqrt() / 2.0 * j as f64]
    };
    let inside = |(i, j): (i64, i64)| {
        let p = lattice_pt(i, j);
        p[0] * p[0] + p[1] * p[1] <= radius * radius * (1.0 + 1e-12)
    };
    let mut ids: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    let mut pos = Vec::new();
    let mut tris = Vec::new();
    for j in -rows..rows {
        for i in -cols..cols {
            let (a, b, c, d) = ((i, j), (i + 1, j), (i, j + 1), (i - 1, j + 1));
            for tri in [[a, b, c], [a, c, d]] {
                if !tri.iter().all(|&v| inside(v)) {
                    continue;
                }
                let mut t = [0usize; 3];
                for (k, &(x, y)) in tri.iter().enumerate() {
                    let next = ids.len();
                    t[k] = *ids.entry((x, y)).or_insert_with(|| {
                        let p = lattice_pt(x, y);
                        pos.push(p[0]);
                        pos.push(p[1]);
                        pos.extend(core::iter::repeat_n(0.0, dim - 2));
                        next
                    });
                }
                tris.push(t);
            }
        }
    }
    ImmersedMesh::new(dim, pos, tris)
}

/// Height perturbation of a plane in the `e_z` direction.
#[derive(Debug, Clone, PartialEq)]
pub enum Perturbation {
    None,
    /// `amplitude · exp(−|x − center|² / (2 width²))`.
    Bump { amplitude: f64, width: f64, center: [f64; 2] },
    /// `Σ amplitude · sin(kx·x + ky·y + phase)`.
    Fourier(Vec<FourierMode>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierMode {
    pub kx: f64,
    pub ky: f64,
    pub amplitude: f64,
    pub phase: f64,
}

impl Perturbation {
    fn height(&self, x: f64, y: f64, period: Option<f64>) -> f64 {
        match self {
            Perturbation::None => 0.0,
            Perturbation::Bump { amplitude, width, center } => {
                let g = |dx: f64, dy: f64| (-(dx * dx + dy * dy) / (2.0 * width * width)).exp();
                match period {
                    // sum over the nearest images so the field is periodic
                    Some(l) => {
                        let mut s = 0.0;
                        for a in -1..=1 {
                            for b in -1..=1 {
                                s += g(x - center[0] + a as f64 * l, y - center[1] + b as f64 * l);
                            }
                        }
                        amplitude * s
                    }
                    None => amplitude * g(x - center[0], y - center[1]),
                }
            }
            Perturbation::Fourier(modes) => {
                modes.iter().map(|m| m.amplitude * (m.kx * x + m.ky * y + m.phase).sin()).sum()
            }
        }
    }
}

/// A graph `z = height(x, y)` over a square of side `size` with `resolution`
/// cells per side. Periodic planes live on `[0, size)²`; open ones on
/// `[−size/2, size/2]²`.
pub fn perturbed_plane(size: f64, resolution: usize, periodic: bool, dim: usize, perturbation: &Perturbation) -> Result<ImmersedMesh> {
    check(size > 0.0, "plane size must be positive")?;
    check(resolution >= 3, "plane needs at least 3 cells per side")?;
    check(dim >= 3, "ambient dimension must be at least 3")?;
    if let Perturbation::Bump { width, .. } = perturbation {
        check(*width > 0.0, "bump width must be positive")?;
    }
    if periodic {
        return periodic_graph(resolution, resolution, size, size, dim, &|x, y| perturbation.height(x, y, Some(size)));
    }
    let cols = resolution + 1;
    let mut pos = vec![0.0; cols * cols * dim];
    for j in 0..cols {
        for i in 0..cols {
            let x = size * (i as f64 / resolution as f64 - 0.5);
            let y = size * (j as f64 / resolution as f64 - 0.5);
            let p = &mut pos[(j * cols + i) * dim..(j * cols + i + 1) * dim];
            p[0] = x;
            p[1] = y;
            p[2] = perturbation.height(x, y, None);
        }
    }
    let (tris, _) = grid_triangles(resolution, resolution, false, false);
    ImmersedMesh::new(dim, pos, tris)
}

/// The same surface in `R^dim`, padded with zero coordinates.
pub fn embed_in_dim(mesh: &ImmersedMesh, dim: usize) -> Result<ImmersedMesh> {
    let old = mesh.dim();
    check(dim >= old, "cannot embed into a smaller dimension")?;
    let pad = |p: &[f64]| {
        let mut v = p.to_vec();
        v.resize(dim, 0.0);
        v
    };
    let pos: Vec<f64> = (0..mesh.vertex_count()).flat_map(|i| pad(mesh.position(i))).collect();
    match mesh.lattice() {
        Some(l) => {
            let gens = (0..l.generator_count()).map(|k| pad(l.generator(k))).collect();
            let lattice = PeriodicLattice::new(dim, gens, l.corner_shifts().to_vec())?;
            ImmersedMesh::new_periodic(dim, pos, mesh.triangles().to_vec(), lattice)
        }
        None => ImmersedMesh::new(dim, pos, mesh.triangles().to_vec()),
    }
}

/// A named generator with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Primitive {
    PlaneDisk { radius: f64, h: f64 },
    FlatTorusGrid { nx: usize, ny: usize, lx: f64, ly: f64 },
    Icosphere { level: u32, radius: f64 },
    Tube { radius: f64, length: f64, n_around: usize },
    Torus { major: f64, minor: f64, nu: usize, nv: usize },
    PerturbedPlane { size: f64, resolution: usize, periodic: bool, perturbation: Perturbation },
    CliffordTorus { nu: usize, nv: usize },
}

/// Builds `kind` and pads it to `R^dim`.
pub fn make_primitive(kind: &Primitive, dim: usize) -> Result<ImmersedMesh> {
    check(dim >= 3, "ambient dimension must be at least 3")?;
    let mesh = match kind {
        Primitive::PlaneDisk { radius, h } => plane_disk(*radius, *h, 3)?,
        Primitive::FlatTorusGrid { nx, ny, lx, ly } => flat_torus_grid(*nx, *ny, *lx, *ly, 3)?,
        Primitive::Icosphere { level, radius } => icosphere(*level, *radius)?,
        Primitive::Tube { radius, length, n_around } => tube(*radius, *length, *n_around)?,
        Primitive::Torus { major, minor, nu, nv } => torus(*major, *minor, *nu, *nv)?,
        Primitive::PerturbedPlane { size, resolution, periodic, perturbation } => {
            perturbed_plane(*size, *resolution, *periodic, 3, perturbation)?
        }
        Primitive::CliffordTorus { nu, nv } => {
            check(dim >= 4, "the clifford torus needs dimension at least 4")?;
            clifford_torus(*nu, *nv)?
        }
    };
    if mesh.dim() == dim {
        Ok(mesh)
    } else {
        embed_in_dim(&mesh, dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_zero_is_icosahedron() {
        let m = icosphere(0, 1.0).unwrap();
        assert_eq!((m.vertex_count(), m.triangle_count()), (12, 20));
        let m = icosphere(2, 1.0).unwrap();
        assert_eq!(m.vertex_count() as i64 - m.edges().len() as i64 + m.triangle_count() as i64, 2);
        assert!(m.is_closed());
    }

    #[test]
    fn zero_amplitude_plane_is_flat_grid() {
        let flat = flat_torus_grid(8, 8, 2.0, 2.0, 3).unwrap();
        let p = perturbed_plane(2.0, 8, true, 3, &Perturbation::Bump { amplitude: 0.0, width: 0.3, center: [1.0, 1.0] }).unwrap();
        assert_eq!(flat.positions(), p.positions());
        assert_eq!(flat.triangles(), p.triangles());
    }

    #[test]
    fn tube_has_interior() {
        let m = tube(1.0, 20.0, 24).unwrap();
        assert!((0..m.vertex_count()).any(|i| m.boundary_distance(i) >= 2));
        for i in 0..m.vertex_count() {
            let p = m.position(i);
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn disk_is_a_disk() {
        let m = plane_disk(1.0, 0.1, 3).unwrap();
        let chi = m.vertex_count() as i64 - m.edges().len() as i64 + m.triangle_count() as i64;
        assert_eq!(chi, 1);
        let area = m.total_area();
        assert!((area - PI).abs() < 0.1 * PI);
    }

    #[test]
    fn clifford_and_embedding() {
        let c = clifford_torus(12, 12).unwrap();
        assert_eq!(c.dim(), 4);
        let e = embed_in_dim(&flat_torus_grid(4, 4, 1.0, 1.0, 3).unwrap(), 5).unwrap();
        assert_eq!(e.dim(), 5);
        assert!(e.is_periodic());
        assert!(make_primitive(&Primitive::CliffordTorus { nu: 8, nv: 8 }, 3).is_err());
    }
}
