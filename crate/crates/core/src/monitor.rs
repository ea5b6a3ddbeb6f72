//! Energy reports and the diagnostics built on them.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::concentration::{area_by_radius, local_concentration, ConcentrationProfile};
use crate::curvature::{willmore_energy, SurfaceAnalysis};
use crate::error::{Error, Result};
use crate::flow::Trajectory;
use crate::mesh::ImmersedMesh;

/// What [`report`] measures besides the always-present energies and sup-norms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportOptions {
    /// Ball radius for the concentration profile; skipped when `None`.
    pub rho: Option<f64>,
    /// Radii for `μ(B_R(center))`.
    pub radii: Vec<f64>,
    /// Centre of the area balls, the origin when `None`.
    pub center: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub t: f64,
    pub w_energy: f64,
    pub a_sq_total: f64,
    pub sup_a: f64,
    pub sup_w: f64,
    pub concentration: Option<ConcentrationProfile>,
    pub area_by_radius: Vec<(f64, f64)>,
}

impl EnergyReport {
    pub fn concentration_sup(&self) -> Option<f64> {
        self.concentration.as_ref().map(|c| c.sup_value)
    }
}

pub fn report(mesh: &ImmersedMesh, analysis: &SurfaceAnalysis, t: f64, options: &ReportOptions) -> Result<EnergyReport> {
    let (w_energy, a_sq_total) = willmore_energy(&analysis.frames, &analysis.shape);
    let concentration = match options.rho {
        Some(r) => Some(local_concentration(mesh, analysis, r)?),
        None => None,
    };
    let origin = alloc::vec![0.0; mesh.dim()];
    let center = options.center.as_deref().unwrap_or(&origin);
    let area_by_radius = area_by_radius(mesh, analysis.frames.dual_areas(), &options.radii, center)?;
    Ok(EnergyReport {
        t,
        w_energy,
        a_sq_total,
        sup_a: analysis.shape.sup_a(),
        sup_w: analysis.shape.sup_w(),
        concentration,
        area_by_radius,
    })
}

/// `∫|A|²(0) − ∫|A|²(t_end) − 2·∫₀^t_end ∫θʳ|W|²`.
pub fn energy_identity_residual(trajectory: &Trajectory) -> Result<f64> {
    let n = trajectory.reports.len();
    if n < 2 {
        return Err(Error::InsufficientData { required: 2, found: n });
    }
    let first = trajectory.reports[0].a_sq_total;
    let last = trajectory.reports[n - 1].a_sq_total;
    Ok(first - last - 2.0 * trajectory.dissipation_accum)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    UserSet,
    Calibrated,
    /// Computed from other ledger entries.
    Derived,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant {
    pub value: f64,
    pub provenance: Provenance,
}

/// The small-energy and existence-time constants, which the theory only
/// asserts to exist.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantsLedger {
    pub eps0: Constant,
    pub eps1: Constant,
    pub a_n: Constant,
    pub c0: Constant,
    pub c1: Constant,
}

impl ConstantsLedger {
    /// Sets `ε₀`, `a_n`, `c₀` and derives `ε₁ = ε₀/(2a_n)` and
    /// `c₁ = 32 a_n c₀ / ε₀` from `c₀⁻¹(2/ϱ)⁻⁴ ε₁ = c₁⁻¹ ϱ⁴`.
    pub fn new(eps0: f64, a_n: f64, c0: f64) -> Result<Self> {
        for (name, v) in [("eps0", eps0), ("a_n", a_n), ("c0", c0)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParams(alloc::format!("{name} must be positive and finite")));
            }
        }
        let user = |value| Constant { value, provenance: Provenance::UserSet };
        let derived = |value| Constant { value, provenance: Provenance::Derived };
        Ok(ConstantsLedger {
            eps0: user(eps0),
            eps1: derived(eps0 / (2.0 * a_n)),
            a_n: user(a_n),
            c0: user(c0),
            c1: derived(32.0 * a_n * c0 / eps0),
        })
    }

    pub fn with_eps1(mut self, eps1: f64, provenance: Provenance) -> Result<Self> {
        if !(eps1 > 0.0) || eps1 > self.eps0.value / self.a_n.value {
            return Err(Error::invalid("eps1 must lie in (0, eps0/a_n]"));
        }
        self.eps1 = Constant { value: eps1, provenance };
        Ok(self)
    }

    pub fn with_c1(mut self, c1: f64, provenance: Provenance) -> Result<Self> {
        if !(c1 > 0.0) || !c1.is_finite() {
            return Err(Error::invalid("c1 must be positive and finite"));
        }
        self.c1 = Constant { value: c1, provenance };
        Ok(self)
    }

    /// `ε₀/a_n`, the admissible concentration bound.
    pub fn threshold(&self) -> f64 {
        self.eps0.value / self.a_n.value
    }
}

impl Default for ConstantsLedger {
    fn default() -> Self {
        ConstantsLedger::new(1.0, 2.0, 1.0).expect("default constants are valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExistencePrediction {
    /// `(ε₀/a_n − e₀)·ϱ⁴ / (16 c₀)`.
    pub t_pred: f64,
    /// `c₁⁻¹ ϱ⁴`, available when `e₀ ≤ ε₁`.
    pub t_simplified: Option<f64>,
}

pub fn existence_time_prediction(e0: f64, rho: f64, ledger: &ConstantsLedger) -> Result<ExistencePrediction> {
    if !(rho > 0.0) {
        return Err(Error::invalid("radius must be positive"));
    }
    if !(e0 >= 0.0) {
        return Err(Error::invalid("concentration must be nonnegative"));
    }
    let bound = ledger.threshold();
    if e0 > bound {
        return Err(Error::ConcentrationTooLarge { value: e0, bound });
    }
    let rho4 = rho.powi(4);
    let t_pred = (bound - e0) * rho4 / (16.0 * ledger.c0.value);
    let t_simplified = if e0 <= ledger.eps1.value { Some(rho4 / ledger.c1.value) } else { None };
    Ok(ExistencePrediction { t_pred, t_simplified })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub exponent: f64,
    pub amplitude: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
    pub samples: usize,
}

/// Least-squares fit `sup_A ≈ amplitude · t^exponent` over the part of the
/// series after the first `skip_fraction` of its time span.
pub fn decay_fit_series(times: &[f64], values: &[f64], skip_fraction: f64) -> Result<DecayFit> {
    if !(0.0..1.0).contains(&skip_fraction) {
        return Err(Error::invalid("skip fraction must lie in [0, 1)"));
    }
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), found: values.len() });
    }
    if times.is_empty() {
        return Err(Error::InsufficientData { required: 5, found: 0 });
    }
    let t0 = times[0];
    let t1 = times[times.len() - 1];
    let start = t0 + skip_fraction * (t1 - t0);
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(&t, &v)| t >= start && t > 0.0 && v > 0.0)
        .map(|(&t, &v)| (t.ln(), v.ln()))
        .collect();
    if pts.len() < 5 {
        return Err(Error::InsufficientData { required: 5, found: pts.len() });
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InsufficientData { required: 5, found: pts.len() });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(DecayFit { exponent: slope, amplitude: intercept.exp(), residual: (rss / k).sqrt(), samples: pts.len() })
}

/// [`decay_fit_series`] on the `sup_A` column of a trajectory.
pub fn decay_fit(trajectory: &Trajectory, skip_fraction: f64) -> Result<DecayFit> {
    let t: Vec<f64> = trajectory.reports.iter().map(|r| r.t).collect();
    let v: Vec<f64> = trajectory.reports.iter().map(|r| r.sup_a).collect();
    decay_fit_series(&t, &v, skip_fraction)
}
