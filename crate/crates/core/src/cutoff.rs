//! The smooth step `χ` and radial ambient cutoffs built from it.
//!
//! `χ(x) = φ(1−x) / (φ(x) + φ(1−x))` with `φ(s) = exp(−1/s)` for `s > 0`,
//! so `χ = 1` on `x ≤ 0`, `χ = 0` on `x ≥ 1`, `χ` is decreasing and
//! `χ(x) + χ(1−x) = 1`. Derivatives up to order four are exact, computed
//! with truncated Taylor arithmetic.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::mesh::ImmersedMesh;

pub const MAX_ORDER: u32 = 4;

/// Taylor coefficients `f(x₀ + h) = Σ c_k h^k`, truncated after `h⁴`.
#[derive(Debug, Clone, Copy)]
struct Jet([f64; 5]);

impl Jet {
    fn var(x: f64) -> Self {
        Jet([x, 1.0, 0.0, 0.0, 0.0])
    }

    fn constant(c: f64) -> Self {
        Jet([c, 0.0, 0.0, 0.0, 0.0])
    }

    fn add(self, o: Jet) -> Jet {
        let mut r = [0.0; 5];
        for k in 0..5 {
            r[k] = self.0[k] + o.0[k];
        }
        Jet(r)
    }

    fn sub(self, o: Jet) -> Jet {
        let mut r = [0.0; 5];
        for k in 0..5 {
            r[k] = self.0[k] - o.0[k];
        }
        Jet(r)
    }

    fn recip(self) -> Jet {
        let a = self.0;
        let mut r = [0.0; 5];
        r[0] = 1.0 / a[0];
        for k in 1..5 {
            let mut s = 0.0;
            for j in 1..=k {
                s += a[j] * r[k - j];
            }
            r[k] = -s / a[0];
        }
        Jet(r)
    }

    fn exp(self) -> Jet {
        let a = self.0;
        let mut r = [0.0; 5];
        r[0] = a[0].exp();
        // r' = a' r  ⇒  k r_k = Σ_{j=1..k} j a_j r_{k−j}
        for k in 1..5 {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * a[j] * r[k - j];
            }
            r[k] = s / k as f64;
        }
        Jet(r)
    }

    fn derivative(&self, k: usize) -> f64 {
        const FACT: [f64; 5] = [1.0, 1.0, 2.0, 6.0, 24.0];
        self.0[k] * FACT[k]
    }
}

/// `χ` on `0 < x ≤ ½` as `1 / (1 + exp(1/(1−x) − 1/x))`; the exponent is ≤ 0.
fn chi_left(x: f64) -> Jet {
    let t = Jet::var(x);
    let g = Jet::constant(1.0).sub(t).recip().sub(t.recip());
    Jet::constant(1.0).add(g.exp()).recip()
}

/// `k`-th derivative of `χ` at `x`, `k ≤ 4`.
pub fn chi_eval(x: f64, order: u32) -> Result<f64> {
    if order > MAX_ORDER {
        return Err(Error::UnsupportedOrder(order));
    }
    let k = order as usize;
    if x <= 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    if x >= 1.0 {
        return Ok(0.0);
    }
    if x <= 0.5 {
        return Ok(chi_left(x).derivative(k));
    }
    // χ(x) = 1 − χ(1−x)
    let mirrored = chi_left(1.0 - x).derivative(k);
    Ok(if k == 0 {
        1.0 - mirrored
    } else if k.is_multiple_of(2) {
        -mirrored
    } else {
        mirrored
    })
}

/// `sup |χ^(k)|` over `[0, 1]`, estimated on a uniform grid of `2·10⁴` cells.
pub fn chi_derivative_sup(order: u32) -> Result<f64> {
    if order > MAX_ORDER {
        return Err(Error::UnsupportedOrder(order));
    }
    let n = 20_000;
    let mut best = 0.0f64;
    for i in 0..=n {
        best = best.max(chi_eval(i as f64 / n as f64, order)?.abs());
    }
    Ok(best)
}

/// `θ̂(x) = χ((|x − center| − R) / width)`, raised to `exponent` in weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialCutoff {
    center: Vec<f64>,
    radius: f64,
    width: f64,
    exponent: u32,
}

impl RadialCutoff {
    pub fn new(center: Vec<f64>, radius: f64, width: f64, exponent: u32) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::invalid("cutoff radius must be finite and nonnegative"));
        }
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::invalid("cutoff width must be finite and positive"));
        }
        if exponent == 0 {
            return Err(Error::invalid("cutoff exponent must be a positive integer"));
        }
        Ok(RadialCutoff { center, radius, width, exponent })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    /// The Lipschitz scale `K = 1/width`.
    pub fn k(&self) -> f64 {
        1.0 / self.width
    }

    fn distance(&self, p: &[f64]) -> f64 {
        let mut s = 0.0;
        for (a, b) in p.iter().zip(&self.center) {
            s += (a - b) * (a - b);
        }
        s.sqrt()
    }

    /// Profile argument, or `None` on the plateaus.
    fn argument(&self, rho: f64) -> Option<f64> {
        if rho <= self.radius || rho >= self.radius + self.width {
            None
        } else {
            Some((rho - self.radius) / self.width)
        }
    }

    pub fn value(&self, p: &[f64]) -> f64 {
        let rho = self.distance(p);
        if rho <= self.radius {
            return 1.0;
        }
        if rho >= self.radius + self.width {
            return 0.0;
        }
        chi_eval((rho - self.radius) / self.width, 0).unwrap_or(0.0)
    }

    /// `θ̂(p)^r`.
    pub fn weight(&self, p: &[f64]) -> f64 {
        self.value(p).powi(self.exponent as i32)
    }

    pub fn gradient(&self, p: &[f64]) -> Vec<f64> {
        let rho = self.distance(p);
        let mut g = vec![0.0; p.len()];
        if let Some(x) = self.argument(rho) {
            let d1 = chi_eval(x, 1).unwrap_or(0.0) / self.width;
            for (gi, (a, b)) in g.iter_mut().zip(p.iter().zip(&self.center)) {
                *gi = d1 * (a - b) / rho;
            }
        }
        g
    }

    /// Row-major `n × n` Hessian `χ''/w² u uᵀ + χ'/(w ρ) (I − u uᵀ)`.
    pub fn hessian(&self, p: &[f64]) -> Vec<f64> {
        let n = p.len();
        let rho = self.distance(p);
        let mut h = vec![0.0; n * n];
        if let Some(x) = self.argument(rho) {
            let d1 = chi_eval(x, 1).unwrap_or(0.0) / self.width;
            let d2 = chi_eval(x, 2).unwrap_or(0.0) / (self.width * self.width);
            let u: Vec<f64> = p.iter().zip(&self.center).map(|(a, b)| (a - b) / rho).collect();
            for i in 0..n {
                for j in 0..n {
                    let uu = u[i] * u[j];
                    let id = if i == j { 1.0 } else { 0.0 };
                    h[i * n + j] = d2 * uu + d1 / rho * (id - uu);
                }
            }
        }
        h
    }
}

/// Result of [`cutoff_eval`].
#[derive(Debug, Clone, PartialEq)]
pub enum CutoffValue {
    Value(f64),
    Gradient(Vec<f64>),
    /// Row-major `n × n`.
    Hessian(Vec<f64>),
}

pub fn cutoff_eval(cutoff: &RadialCutoff, point: &[f64], order: u32) -> Result<CutoffValue> {
    if point.len() != cutoff.center.len() {
        return Err(Error::DimensionMismatch { expected: cutoff.center.len(), found: point.len() });
    }
    match order {
        0 => Ok(CutoffValue::Value(cutoff.value(point))),
        1 => Ok(CutoffValue::Gradient(cutoff.gradient(point))),
        2 => Ok(CutoffValue::Hessian(cutoff.hessian(point))),
        k => Err(Error::UnsupportedOrder(k)),
    }
}

/// Per-vertex `θ^r`.
pub fn weight_field(mesh: &ImmersedMesh, cutoff: &RadialCutoff) -> Result<Vec<f64>> {
    if mesh.dim() != cutoff.center.len() {
        return Err(Error::DimensionMismatch { expected: mesh.dim(), found: cutoff.center.len() });
    }
    Ok((0..mesh.vertex_count()).map(|i| cutoff.weight(mesh.position(i))).collect())
}
