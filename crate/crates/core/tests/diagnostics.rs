use proptest::prelude::*;
use willmore_core::cutoff::RadialCutoff;
use willmore_core::inequality::{
    lp_interp_ratio, ms_sobolev_ratio, run_corpus, sup_bound_ratio, CorpusSpec, InequalityId, Smallness,
};
use willmore_core::monitor::{decay_fit_series, existence_time_prediction, report, ConstantsLedger, ReportOptions};
use willmore_core::primitives::{flat_torus_grid, icosphere, torus};
use willmore_core::{analyze_surface, AnalysisOptions, Error, ImmersedMesh};

fn opts() -> AnalysisOptions {
    AnalysisOptions::default()
}

fn rotation_z(a: f64) -> Vec<f64> {
    let (s, c) = a.sin_cos();
    vec![c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// A smooth field of the ambient coordinates, so it moves with the mesh.
fn field(mesh: &ImmersedMesh, c: &[f64]) -> Vec<f64> {
    (0..mesh.vertex_count())
        .map(|i| {
            let p = mesh.position(i);
            1.0 + c[0] * p[0] + c[1] * p[1] * p[2] + c[2] * (p[0] * p[0] - p[2])
        })
        .collect()
}

#[test]
fn report_scaling() {
    let mesh = torus(2.0, 0.7, 32, 16).unwrap();
    let radii = vec![0.5, 1.5, 2.5];
    for lambda in [0.5, 3.0] {
        let scaled = mesh.scaled(lambda);
        let a = report(&mesh, &analyze_surface(&mesh, &opts()).unwrap(), 0.0, &ReportOptions { radii: radii.clone(), ..Default::default() }).unwrap();
        let scaled_radii: Vec<f64> = radii.iter().map(|r| lambda * r).collect();
        let b = report(&scaled, &analyze_surface(&scaled, &opts()).unwrap(), 0.0, &ReportOptions { radii: scaled_radii, ..Default::default() }).unwrap();
        assert!(rel(a.a_sq_total, b.a_sq_total) <= 1e-10);
        assert!(rel(a.sup_a / lambda, b.sup_a) <= 1e-10);
        for (x, y) in a.area_by_radius.iter().zip(&b.area_by_radius) {
            assert!(rel(lambda * lambda * x.1, y.1) <= 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn existence_time_structure(e0 in 0.0..0.5f64, frac in 0.0..1.0f64, rho in 0.01..10.0f64) {
        let ledger = ConstantsLedger::default();
        let de = frac * (ledger.threshold() - e0);
        let a = existence_time_prediction(e0, rho, &ledger).unwrap();
        let b = existence_time_prediction(e0 + de, rho, &ledger).unwrap();
        let c = existence_time_prediction(e0, 2.0 * rho, &ledger).unwrap();
        prop_assert!(b.t_pred <= a.t_pred);
        prop_assert_eq!(c.t_pred, 16.0 * a.t_pred);
        if let (Some(x), Some(y)) = (a.t_simplified, c.t_simplified) {
            prop_assert_eq!(y, 16.0 * x);
        }
    }

    #[test]
    fn decay_fit_ignores_time_units(scale in 0.01..100.0f64, k in -1.0..0.0f64, noise in prop::collection::vec(-0.05..0.05f64, 30)) {
        let t: Vec<f64> = (1..=30).map(|i| 0.1 * i as f64).collect();
        let v: Vec<f64> = t.iter().zip(&noise).map(|(t, e)| t.powf(k) * (1.0 + e)).collect();
        let ts: Vec<f64> = t.iter().map(|x| x * scale).collect();
        let a = decay_fit_series(&t, &v, 0.2).unwrap();
        let b = decay_fit_series(&ts, &v, 0.2).unwrap();
        prop_assert!((a.exponent - b.exponent).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn ratios_are_rigid_and_scale_invariant(angle in 0.0..6.3f64, shift in prop::collection::vec(-3.0..3.0f64, 3), lambda in 0.3..4.0f64, c in prop::collection::vec(-0.5..0.5f64, 3)) {
        let mesh = torus(2.0, 0.7, 24, 12).unwrap();
        let u = field(&mesh, &c);
        let moved = mesh.transformed(&rotation_z(angle), &shift).unwrap();
        let scaled = mesh.scaled(lambda);
        for other in [&moved, &scaled] {
            let a = ms_sobolev_ratio(&mesh, &u, &opts()).unwrap();
            let b = ms_sobolev_ratio(other, &u, &opts()).unwrap();
            prop_assert!(rel(a.ratio, b.ratio) <= 1e-10);
            let a = lp_interp_ratio(&mesh, &u, 4.0, &opts()).unwrap();
            let b = lp_interp_ratio(other, &u, 4.0, &opts()).unwrap();
            prop_assert!(rel(a.ratio, b.ratio) <= 1e-10);
        }
        let small = Smallness { rho: 0.3, ledger: ConstantsLedger::new(5.0, 2.0, 1.0).unwrap() };
        let gamma = RadialCutoff::new(vec![2.0, 0.0, 0.0], 0.8, 0.8, 1).unwrap();
        let a = sup_bound_ratio(&mesh, &gamma, &small, &opts()).unwrap();
        let rot = rotation_z(angle);
        let center: Vec<f64> = (0..3).map(|r| rot[r * 3] * 2.0 + shift[r]).collect();
        let moved_gamma = RadialCutoff::new(center, 0.8, 0.8, 1).unwrap();
        let b = sup_bound_ratio(&moved, &moved_gamma, &small, &opts()).unwrap();
        prop_assert!(rel(a.ratio, b.ratio) <= 1e-10);
        let scaled_gamma = RadialCutoff::new(vec![2.0 * lambda, 0.0, 0.0], 0.8 * lambda, 0.8 * lambda, 1).unwrap();
        let scaled_small = Smallness { rho: 0.3 * lambda, ..small };
        let b = sup_bound_ratio(&scaled, &scaled_gamma, &scaled_small, &opts()).unwrap();
        prop_assert!(rel(a.ratio, b.ratio) <= 1e-10);
    }
}

#[test]
fn scaled_sphere_keeps_its_ratio() {
    let unit = icosphere(3, 1.0).unwrap();
    let big = icosphere(3, 3.0).unwrap();
    let ones = vec![1.0; unit.vertex_count()];
    let a = ms_sobolev_ratio(&unit, &ones, &opts()).unwrap();
    let b = ms_sobolev_ratio(&big, &ones, &opts()).unwrap();
    assert!(rel(a.ratio, b.ratio) <= 1e-10);
}

#[test]
fn ms_ratio_converges_on_spheres() {
    let c = [0.3, -0.4, 0.2];
    let r: Vec<f64> = (3..=5)
        .map(|l| {
            let m = icosphere(l, 1.0).unwrap();
            ms_sobolev_ratio(&m, &field(&m, &c), &opts()).unwrap().ratio
        })
        .collect();
    assert!(rel(r[0], r[1]) <= 0.1 && rel(r[1], r[2]) <= 0.1, "{r:?}");
}

#[test]
fn corpus_is_reproducible_and_bounded() {
    let spec = CorpusSpec { resolution: 24, sphere_level: 3, fields_per_mesh: 6, ..Default::default() };
    let a = run_corpus(&spec, &opts()).unwrap();
    let b = run_corpus(&spec, &opts()).unwrap();
    assert_eq!(a, b);
    let ms = a.max_ratio(InequalityId::MichaelSimon).unwrap();
    assert!(ms.is_finite() && ms > 0.0);
    let flat_ms = a
        .records
        .iter()
        .filter(|r| r.inequality == InequalityId::MichaelSimon && r.mesh_id.starts_with("flat"))
        .map(|r| r.ratio)
        .fold(0.0, f64::max);
    assert!(flat_ms > 0.0 && flat_ms <= 0.6, "flat Gaussian corpus maximum {flat_ms}");
    assert!(a.records.iter().any(|r| r.is_proxy()));
    let other = run_corpus(&CorpusSpec { seed: 2, ..spec }, &opts()).unwrap();
    assert_ne!(a, other);
}

#[test]
fn torus_fields_are_stable_under_refinement() {
    let c = [0.3, 0.2, -0.1];
    let ratios: Vec<(f64, f64)> = [(24usize, 12usize), (48, 24)]
        .iter()
        .map(|&(nu, nv)| {
            let m = torus(2.0, 0.7, nu, nv).unwrap();
            let u = field(&m, &c);
            (ms_sobolev_ratio(&m, &u, &opts()).unwrap().ratio, lp_interp_ratio(&m, &u, 4.0, &opts()).unwrap().ratio)
        })
        .collect();
    assert!(rel(ratios[0].0, ratios[1].0) <= 0.1, "{ratios:?}");
    assert!(rel(ratios[0].1, ratios[1].1) <= 0.1, "{ratios:?}");
}

#[test]
fn sphere_sup_bound_is_stable() {
    let gamma = RadialCutoff::new(vec![0.0; 3], 10.0, 1.0, 1).unwrap();
    let small = Smallness { rho: 0.2, ledger: ConstantsLedger::default() };
    let r: Vec<f64> = (3..=5)
        .map(|l| sup_bound_ratio(&icosphere(l, 1.0).unwrap(), &gamma, &small, &opts()).unwrap().ratio)
        .collect();
    assert!(r.iter().all(|x| x.is_finite() && *x > 0.0));
    assert!(rel(r[1], r[2]) <= 0.15, "{r:?}");
}

#[test]
fn inequality_errors() {
    let m = flat_torus_grid(8, 8, 1.0, 1.0, 3).unwrap();
    let u = vec![1.0; m.vertex_count()];
    for p in [1.0, 2.0, f64::INFINITY, f64::NAN] {
        assert!(matches!(lp_interp_ratio(&m, &u, p, &opts()), Err(Error::BadExponent(_))));
    }
    // flat and constant: only the left side is nonzero
    assert!(matches!(ms_sobolev_ratio(&m, &u, &opts()), Err(Error::ZeroField)));
    let sphere = icosphere(2, 1.0).unwrap();
    let gamma = RadialCutoff::new(vec![0.0; 3], 10.0, 1.0, 1).unwrap();
    let small = Smallness { rho: 2.5, ledger: ConstantsLedger::default() };
    assert!(matches!(sup_bound_ratio(&sphere, &gamma, &small, &opts()), Err(Error::ConcentrationTooLarge { .. })));
}
