//! Uniform grid over the first three ambient coordinates for ball queries.
//!
//! Distances in the projected coordinates never exceed ambient distances, so
//! candidates from neighbouring cells are a superset of every ball's members.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

pub(crate) struct Grid {
    cell: f64,
    bins: BTreeMap<[i64; 3], Vec<usize>>,
}

fn key(p: &[f64], cell: f64) -> [i64; 3] {
    let mut k = [0i64; 3];
    for d in 0..3.min(p.len()) {
        k[d] = (p[d] / cell).floor() as i64;
    }
    k
}

impl Grid {
    /// `points` holds `dim` coordinates per point.
    pub fn new(points: &[f64], dim: usize, cell: f64) -> Self {
        let mut bins: BTreeMap<[i64; 3], Vec<usize>> = BTreeMap::new();
        for (i, p) in points.chunks_exact(dim).enumerate() {
            bins.entry(key(p, cell)).or_default().push(i);
        }
        Grid { cell, bins }
    }

    /// Calls `visit` for every stored index whose cell neighbours the cell of `q`.
    pub fn candidates(&self, q: &[f64], mut visit: impl FnMut(usize)) {
        let k = key(q, self.cell);
        for a in -1..=1 {
            for b in -1..=1 {
                for c in -1..=1 {
                    if let Some(v) = self.bins.get(&[k[0] + a, k[1] + b, k[2] + c]) {
                        v.iter().for_each(|&i| visit(i));
                    }
                }
            }
        }
    }
}
