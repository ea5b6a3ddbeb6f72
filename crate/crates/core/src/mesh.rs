//! Immersed triangle meshes in `R^n`.
//!
//! Positions are stored flat (`dim` coordinates per vertex). Connectivity is
//! derived once and shared between meshes that only differ in their positions,
//! which is what every flow step produces.
//!
//! A mesh may carry a [`PeriodicLattice`]: a set of ambient translations that
//! identify the surface with a quotient, e.g. a flat torus `R²/2πZ²` sitting in
//! a plane of `R^n`. Every triangle corner then carries integer lattice
//! coordinates and all geometric quantities are computed from unwrapped edge
//! vectors.

use alloc::collections::BTreeMap;
use alloc::collections::VecDeque;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm_sq, wedge_norm};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 8;

/// Compressed rows of variable length.
#[derive(Debug, Clone, Default)]
pub struct Csr<T> {
    offsets: Vec<usize>,
    items: Vec<T>,
}

impl<T: Clone> Csr<T> {
    fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        let mut items = Vec::new();
        offsets.push(0);
        for row in rows {
            items.extend(row);
            offsets.push(items.len());
        }
        Csr { offsets, items }
    }
}

impl<T> Csr<T> {
    pub fn row(&self, i: usize) -> &[T] {
        &self.items[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// An undirected edge, oriented as first traversed by its first face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub vertices: [usize; 2],
    /// Lattice coordinates of the image of `vertices[1]` relative to `vertices[0]`.
    pub shift: [i32; 2],
    pub faces: [Option<usize>; 2],
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.faces[1].is_none()
    }

    pub fn other(&self, v: usize) -> usize {
        if self.vertices[0] == v {
            self.vertices[1]
        } else {
            self.vertices[0]
        }
    }
}

/// One hop of a path in the vertex graph: an edge and whether it is walked
/// from `vertices[0]` to `vertices[1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hop {
    pub edge: usize,
    pub forward: bool,
}

/// A vertex of the two-ring of some center together with a path to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingEntry {
    pub vertex: usize,
    pub hops: [Hop; 2],
    pub len: u8,
}

#[derive(Debug)]
pub struct Topology {
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    /// Edge of side `k` (corner `k` to corner `k+1`) of each triangle.
    triangle_edges: Vec<[usize; 3]>,
    vertex_edges: Csr<usize>,
    vertex_faces: Csr<usize>,
    boundary: Vec<bool>,
    boundary_distance: Vec<usize>,
    two_ring: Csr<RingEntry>,
}

/// Translations identifying the surface with a quotient.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicLattice {
    dim: usize,
    /// One or two generators, `dim` coordinates each.
    generators: Vec<f64>,
    /// Lattice coordinates of each triangle corner.
    corner_shifts: Vec<[[i32; 2]; 3]>,
}

impl PeriodicLattice {
    pub fn new(dim: usize, generators: Vec<Vec<f64>>, corner_shifts: Vec<[[i32; 2]; 3]>) -> Result<Self> {
        if generators.is_empty() || generators.len() > 2 {
            return Err(Error::invalid("a periodic lattice needs one or two generators"));
        }
        let mut flat = Vec::with_capacity(2 * dim);
        for g in &generators {
            if g.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: g.len() });
            }
            flat.extend_from_slice(g);
        }
        if generators.len() == 1 {
            flat.extend(core::iter::repeat_n(0.0, dim));
        }
        Ok(PeriodicLattice { dim, generators: flat, corner_shifts })
    }

    pub fn generator_count(&self) -> usize {
        if self.generators[self.dim..].iter().all(|&g| g == 0.0) {
            1
        } else {
            2
        }
    }

    pub fn generator(&self, k: usize) -> &[f64] {
        &self.generators[k * self.dim..(k + 1) * self.dim]
    }

    pub fn corner_shifts(&self) -> &[[[i32; 2]; 3]] {
        &self.corner_shifts
    }

    /// Writes `s₀·g₀ + s₁·g₁` into `out`.
    pub fn translation(&self, shift: [i32; 2], out: &mut [f64]) {
        for d in 0..self.dim {
            out[d] = shift[0] as f64 * self.generators[d] + shift[1] as f64 * self.generators[self.dim + d];
        }
    }

    /// Lattice coordinates in `{-1, 0, 1}²` used for nearest-image searches.
    pub fn neighbour_shifts(&self) -> Vec<[i32; 2]> {
        let range: &[i32] = &[-1, 0, 1];
        let second: &[i32] = if self.generator_count() == 2 { range } else { &[0] };
        let mut out = Vec::new();
        for &a in range {
            for &b in second {
                out.push([a, b]);
            }
        }
        out
    }

    fn transformed(&self, linear: &dyn Fn(&[f64], &mut [f64])) -> Self {
        let mut g = self.generators.clone();
        for k in 0..2 {
            let src = &self.generators[k * self.dim..(k + 1) * self.dim];
            linear(src, &mut g[k * self.dim..(k + 1) * self.dim]);
        }
        PeriodicLattice { dim: self.dim, generators: g, corner_shifts: self.corner_shifts.clone() }
    }
}

/// A triangulated surface with vertex positions in `R^n`.
#[derive(Debug, Clone)]
pub struct ImmersedMesh {
    dim: usize,
    positions: Vec<f64>,
    lattice: Option<Arc<PeriodicLattice>>,
    topology: Arc<Topology>,
}

/// Builds a mesh from per-vertex coordinate lists.
pub fn build_mesh(points: &[Vec<f64>], triangles: &[[usize; 3]], ambient_dim: usize) -> Result<ImmersedMesh> {
    let mut flat = Vec::with_capacity(points.len() * ambient_dim);
    for p in points {
        if p.len() != ambient_dim {
            return Err(Error::DimensionMismatch { expected: ambient_dim, found: p.len() });
        }
        flat.extend_from_slice(p);
    }
    ImmersedMesh::new(ambient_dim, flat, triangles.to_vec())
}

impl ImmersedMesh {
    /// Builds and validates a mesh from flat positions.
    pub fn new(dim: usize, positions: Vec<f64>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        Self::build(dim, positions, triangles, None)
    }

    /// Builds a mesh whose triangles may straddle the cell of a periodic lattice.
    pub fn new_periodic(
        dim: usize,
        positions: Vec<f64>,
        triangles: Vec<[usize; 3]>,
        lattice: PeriodicLattice,
    ) -> Result<Self> {
        if lattice.corner_shifts.len() != triangles.len() {
            return Err(Error::DimensionMismatch { expected: triangles.len(), found: lattice.corner_shifts.len() });
        }
        if lattice.dim != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: lattice.dim });
        }
        Self::build(dim, positions, triangles, Some(lattice))
    }

    fn build(dim: usize, positions: Vec<f64>, triangles: Vec<[usize; 3]>, lattice: Option<PeriodicLattice>) -> Result<Self> {
        if dim < 3 {
            return Err(Error::DimensionMismatch { expected: 3, found: dim });
        }
        if dim > MAX_DIM {
            return Err(Error::DimensionMismatch { expected: MAX_DIM, found: dim });
        }
        if !positions.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: positions.len() % dim });
        }
        if triangles.is_empty() {
            return Err(Error::invalid("mesh has no triangles"));
        }
        let nv = positions.len() / dim;
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    return Err(Error::IndexOutOfRange { triangle: t, index: v });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::NonManifold { a: tri[0], b: tri[1], reason: "triangle repeats a vertex" });
            }
        }
        let topology = Topology::build(nv, triangles, lattice.as_ref())?;
        let mesh = ImmersedMesh { dim, positions, lattice: lattice.map(Arc::new), topology: Arc::new(topology) };
        mesh.check_nondegenerate()?;
        Ok(mesh)
    }

    /// Fails with `DegenerateTriangle` if some triangle has (relative) zero area.
    pub fn check_nondegenerate(&self) -> Result<()> {
        let scale_sq = self.mean_edge_length_sq();
        let mut u = [0.0; MAX_DIM];
        let mut v = [0.0; MAX_DIM];
        for t in 0..self.triangle_count() {
            self.triangle_edge_vectors(t, 0, &mut u, &mut v);
            let area = 0.5 * wedge_norm(&u[..self.dim], &v[..self.dim]);
            if !(area > 1e-14 * scale_sq) {
                return Err(Error::DegenerateTriangle { triangle: t });
            }
        }
        Ok(())
    }

    /// Same connectivity (and lattice), new positions. Geometry is not revalidated.
    pub fn with_positions(&self, positions: Vec<f64>) -> Self {
        assert_eq!(positions.len(), self.positions.len());
        ImmersedMesh { dim: self.dim, positions, lattice: self.lattice.clone(), topology: self.topology.clone() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn codim(&self) -> usize {
        self.dim - 2
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len() / self.dim
    }

    pub fn triangle_count(&self) -> usize {
        self.topology.triangles.len()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.topology.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.topology.edges
    }

    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.topology.triangle_edges[t]
    }

    pub fn vertex_edges(&self, v: usize) -> &[usize] {
        self.topology.vertex_edges.row(v)
    }

    pub fn vertex_faces(&self, v: usize) -> &[usize] {
        self.topology.vertex_faces.row(v)
    }

    pub fn two_ring(&self, v: usize) -> &[RingEntry] {
        self.topology.two_ring.row(v)
    }

    pub fn lattice(&self) -> Option<&PeriodicLattice> {
        self.lattice.as_deref()
    }

    pub fn is_periodic(&self) -> bool {
        self.lattice.is_some()
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.topology.boundary
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.topology.boundary[v]
    }

    pub fn is_closed(&self) -> bool {
        !self.topology.boundary.iter().any(|&b| b)
    }

    /// Number of edges on a shortest path to the boundary (`usize::MAX` on closed meshes).
    pub fn boundary_distance(&self, v: usize) -> usize {
        self.topology.boundary_distance[v]
    }

    /// Unwrapped vector from `vertices[0]` to `vertices[1]` of edge `e`.
    pub fn edge_vector(&self, e: usize, out: &mut [f64]) {
        let edge = &self.topology.edges[e];
        let a = self.position(edge.vertices[0]);
        let b = self.position(edge.vertices[1]);
        for d in 0..self.dim {
            out[d] = b[d] - a[d];
        }
        if let Some(lat) = &self.lattice {
            if edge.shift != [0, 0] {
                let mut t = [0.0; MAX_DIM];
                lat.translation(edge.shift, &mut t);
                for d in 0..self.dim {
                    out[d] += t[d];
                }
            }
        }
    }

    /// Vector along a hop, respecting the walking direction.
    pub fn hop_vector(&self, hop: Hop, out: &mut [f64]) {
        self.edge_vector(hop.edge, out);
        if !hop.forward {
            for x in out[..self.dim].iter_mut() {
                *x = -*x;
            }
        }
    }

    /// Offset from a center vertex to an entry of its two-ring.
    pub fn ring_offset(&self, entry: &RingEntry, out: &mut [f64]) {
        let mut tmp = [0.0; MAX_DIM];
        self.hop_vector(entry.hops[0], out);
        if entry.len == 2 {
            self.hop_vector(entry.hops[1], &mut tmp);
            for d in 0..self.dim {
                out[d] += tmp[d];
            }
        }
    }

    /// Unwrapped corner positions of triangle `t`, relative to the stored
    /// position of corner 0.
    pub fn triangle_corners(&self, t: usize, out: &mut [[f64; MAX_DIM]; 3]) {
        let tri = self.topology.triangles[t];
        for (c, &v) in tri.iter().enumerate() {
            out[c][..self.dim].copy_from_slice(self.position(v));
        }
        if let Some(lat) = &self.lattice {
            let shifts = lat.corner_shifts[t];
            let mut tr = [0.0; MAX_DIM];
            for c in 0..3 {
                if shifts[c] != [0, 0] {
                    lat.translation(shifts[c], &mut tr);
                    for d in 0..self.dim {
                        out[c][d] += tr[d];
                    }
                }
            }
        }
    }

    /// The two edge vectors leaving corner `c` of triangle `t`
    /// (towards corners `c+1` and `c+2`).
    pub fn triangle_edge_vectors(&self, t: usize, c: usize, u: &mut [f64], v: &mut [f64]) {
        let mut p = [[0.0; MAX_DIM]; 3];
        self.triangle_corners(t, &mut p);
        let a = c;
        let b = (c + 1) % 3;
        let d = (c + 2) % 3;
        for k in 0..self.dim {
            u[k] = p[b][k] - p[a][k];
            v[k] = p[d][k] - p[a][k];
        }
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let mut u = [0.0; MAX_DIM];
        let mut v = [0.0; MAX_DIM];
        self.triangle_edge_vectors(t, 0, &mut u, &mut v);
        0.5 * wedge_norm(&u[..self.dim], &v[..self.dim])
    }

    pub fn total_area(&self) -> f64 {
        crate::numeric::canonical_sum((0..self.triangle_count()).map(|t| self.triangle_area(t)).collect())
    }

    /// Ratio `2r/R` of in- and circumradius, `1` for equilateral triangles.
    pub fn triangle_quality(&self, t: usize) -> f64 {
        let mut p = [[0.0; MAX_DIM]; 3];
        self.triangle_corners(t, &mut p);
        let mut len = [0.0; 3];
        for k in 0..3 {
            let a = &p[k];
            let b = &p[(k + 1) % 3];
            let mut s = 0.0;
            for d in 0..self.dim {
                s += (b[d] - a[d]) * (b[d] - a[d]);
            }
            len[k] = s.sqrt();
        }
        let (a, b, c) = (len[0], len[1], len[2]);
        let denom = a * b * c;
        if denom == 0.0 {
            return 0.0;
        }
        // 2r/R = (b+c-a)(c+a-b)(a+b-c) / (abc)
        ((b + c - a) * (c + a - b) * (a + b - c) / denom).max(0.0)
    }

    pub fn min_triangle_quality(&self) -> f64 {
        (0..self.triangle_count()).map(|t| self.triangle_quality(t)).fold(f64::INFINITY, f64::min)
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let mut v = [0.0; MAX_DIM];
        self.edge_vector(e, &mut v);
        norm_sq(&v[..self.dim]).sqrt()
    }

    pub fn mean_edge_length_sq(&self) -> f64 {
        let mut s = 0.0;
        let mut v = [0.0; MAX_DIM];
        for e in 0..self.edges().len() {
            self.edge_vector(e, &mut v);
            s += norm_sq(&v[..self.dim]);
        }
        s / self.edges().len() as f64
    }

    /// Diagonal of the axis-aligned bounding box of the vertex positions.
    pub fn diameter(&self) -> f64 {
        let mut lo = [f64::INFINITY; MAX_DIM];
        let mut hi = [f64::NEG_INFINITY; MAX_DIM];
        for i in 0..self.vertex_count() {
            for (d, &x) in self.position(i).iter().enumerate() {
                lo[d] = lo[d].min(x);
                hi[d] = hi[d].max(x);
            }
        }
        let mut s = 0.0;
        for d in 0..self.dim {
            s += (hi[d] - lo[d]) * (hi[d] - lo[d]);
        }
        s.sqrt()
    }

    /// Smallest distance `|p − q − τ|` over the lattice images `τ` of `q` near `p`.
    pub fn image_distance(&self, p: &[f64], q: &[f64]) -> f64 {
        let mut best = {
            let mut s = 0.0;
            for d in 0..self.dim {
                s += (p[d] - q[d]) * (p[d] - q[d]);
            }
            s
        };
        if let Some(lat) = &self.lattice {
            let mut tr = [0.0; MAX_DIM];
            for sh in lat.neighbour_shifts() {
                if sh == [0, 0] {
                    continue;
                }
                lat.translation(sh, &mut tr);
                let mut s = 0.0;
                for d in 0..self.dim {
                    let x = p[d] - q[d] - tr[d];
                    s += x * x;
                }
                best = best.min(s);
            }
        }
        best.sqrt()
    }

    /// Applies `x ↦ λ·x`.
    pub fn scaled(&self, lambda: f64) -> Self {
        self.affine(&|x: &[f64], out: &mut [f64]| {
            for d in 0..x.len() {
                out[d] = lambda * x[d];
            }
        }, None)
    }

    /// Applies `x ↦ Q·x + b` for a `dim × dim` row-major matrix `Q`.
    pub fn transformed(&self, q: &[f64], b: &[f64]) -> Result<Self> {
        let n = self.dim;
        if q.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: q.len() });
        }
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.len() });
        }
        Ok(self.affine(&|x: &[f64], out: &mut [f64]| {
            for i in 0..n {
                out[i] = dot(&q[i * n..(i + 1) * n], x);
            }
        }, Some(b)))
    }

    fn affine(&self, linear: &dyn Fn(&[f64], &mut [f64]), offset: Option<&[f64]>) -> Self {
        let mut positions = vec![0.0; self.positions.len()];
        for i in 0..self.vertex_count() {
            let out = &mut positions[i * self.dim..(i + 1) * self.dim];
            linear(self.position(i), out);
            if let Some(b) = offset {
                for d in 0..self.dim {
                    out[d] += b[d];
                }
            }
        }
        ImmersedMesh {
            dim: self.dim,
            positions,
            lattice: self.lattice.as_ref().map(|l| Arc::new(l.transformed(linear))),
            topology: self.topology.clone(),
        }
    }

    /// Renames vertex `i` to `perm[i]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        let nv = self.vertex_count();
        if perm.len() != nv {
            return Err(Error::DimensionMismatch { expected: nv, found: perm.len() });
        }
        let mut positions = vec![0.0; self.positions.len()];
        for i in 0..nv {
            positions[perm[i] * self.dim..(perm[i] + 1) * self.dim].copy_from_slice(self.position(i));
        }
        let triangles = self.triangles().iter().map(|t| [perm[t[0]], perm[t[1]], perm[t[2]]]).collect();
        match self.lattice() {
            Some(l) => Self::new_periodic(self.dim, positions, triangles, l.clone()),
            None => Self::new(self.dim, positions, triangles),
        }
    }
}

impl Topology {
    fn build(nv: usize, triangles: Vec<[usize; 3]>, lattice: Option<&PeriodicLattice>) -> Result<Self> {
        let nt = triangles.len();
        let mut edges: Vec<Edge> = Vec::new();
        let mut lookup: BTreeMap<(usize, usize, i32, i32), usize> = BTreeMap::new();
        let mut triangle_edges = vec![[0usize; 3]; nt];
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                let rel = match lattice {
                    Some(l) => {
                        let s = l.corner_shifts[t];
                        let (sa, sb) = (s[k], s[(k + 1) % 3]);
                        [sb[0] - sa[0], sb[1] - sa[1]]
                    }
                    None => [0, 0],
                };
                let key = if a < b { (a, b, rel[0], rel[1]) } else { (b, a, -rel[0], -rel[1]) };
                match lookup.get(&key) {
                    None => {
                        lookup.insert(key, edges.len());
                        triangle_edges[t][k] = edges.len();
                        edges.push(Edge { vertices: [a, b], shift: rel, faces: [Some(t), None] });
                    }
                    Some(&id) => {
                        let e = &mut edges[id];
                        if e.faces[1].is_some() {
                            return Err(Error::NonManifold { a, b, reason: "edge shared by more than two triangles" });
                        }
                        if e.vertices == [a, b] {
                            return Err(Error::NonManifold { a, b, reason: "adjacent triangles are oriented incoherently" });
                        }
                        e.faces[1] = Some(t);
                        triangle_edges[t][k] = id;
                    }
                }
            }
        }

        let mut vertex_edges = vec![Vec::new(); nv];
        for (id, e) in edges.iter().enumerate() {
            vertex_edges[e.vertices[0]].push(id);
            vertex_edges[e.vertices[1]].push(id);
        }
        let mut vertex_faces = vec![Vec::new(); nv];
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                vertex_faces[v].push(t);
            }
        }
        let mut boundary = vec![false; nv];
        for e in &edges {
            if e.is_boundary() {
                boundary[e.vertices[0]] = true;
                boundary[e.vertices[1]] = true;
            }
        }

        // every vertex star must be a single fan (disk or half-disk)
        for v in 0..nv {
            let faces = &vertex_faces[v];
            if faces.is_empty() {
                return Err(Error::NonManifold { a: v, b: v, reason: "vertex belongs to no triangle" });
            }
            let n_boundary = vertex_edges[v].iter().filter(|&&e| edges[e].is_boundary()).count();
            if n_boundary != 0 && n_boundary != 2 {
                return Err(Error::NonManifold { a: v, b: v, reason: "vertex star is not a single fan" });
            }
            let mut seen = vec![false; faces.len()];
            let mut stack = vec![0usize];
            seen[0] = true;
            let mut reached = 1;
            while let Some(k) = stack.pop() {
                let t = faces[k];
                for &e in &triangle_edges[t] {
                    let edge = &edges[e];
                    if edge.vertices[0] != v && edge.vertices[1] != v {
                        continue;
                    }
                    for f in edge.faces.iter().flatten() {
                        if let Some(pos) = faces.iter().position(|x| x == f) {
                            if !seen[pos] {
                                seen[pos] = true;
                                reached += 1;
                                stack.push(pos);
                            }
                        }
                    }
                }
            }
            if reached != faces.len() {
                return Err(Error::NonManifold { a: v, b: v, reason: "vertex star is not a single fan" });
            }
        }

        let mut boundary_distance = vec![usize::MAX; nv];
        let mut queue = VecDeque::new();
        for v in 0..nv {
            if boundary[v] {
                boundary_distance[v] = 0;
                queue.push_back(v);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &e in &vertex_edges[v] {
                let w = edges[e].other(v);
                if boundary_distance[w] == usize::MAX {
                    boundary_distance[w] = boundary_distance[v] + 1;
                    queue.push_back(w);
                }
            }
        }

        let hop = |e: usize, from: usize| Hop { edge: e, forward: edges[e].vertices[0] == from };
        let mut rings = Vec::with_capacity(nv);
        let mut mark = vec![usize::MAX; nv];
        for c in 0..nv {
            let mut ring: Vec<RingEntry> = Vec::new();
            mark[c] = c;
            for &e in &vertex_edges[c] {
                let w = edges[e].other(c);
                if mark[w] != c {
                    mark[w] = c;
                    ring.push(RingEntry { vertex: w, hops: [hop(e, c), hop(e, c)], len: 1 });
                }
            }
            let first = ring.len();
            for k in 0..first {
                let mid = ring[k];
                for &e in &vertex_edges[mid.vertex] {
                    let w = edges[e].other(mid.vertex);
                    if mark[w] != c {
                        mark[w] = c;
                        ring.push(RingEntry { vertex: w, hops: [mid.hops[0], hop(e, mid.vertex)], len: 2 });
                    }
                }
            }
            rings.push(ring);
        }

        Ok(Topology {
            triangles,
            edges,
            triangle_edges,
            vertex_edges: Csr::from_rows(vertex_edges),
            vertex_faces: Csr::from_rows(vertex_faces),
            boundary,
            boundary_distance,
            two_ring: Csr::from_rows(rings),
        })
    }
}
