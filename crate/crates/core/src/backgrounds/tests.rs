use std::f64::consts::FRAC_PI_2;

use approx::assert_relative_eq;
use nalgebra::DMatrix;
use num_dual::DualNum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::*;
use crate::geometry::{curvature, inner, ChartPoint, ClosedFormScalar};

fn pt(c: &[f64]) -> ChartPoint {
    ChartPoint::new(c.to_vec()).unwrap()
}

fn sphere(direction: &str) -> CatalogBackground {
    model_background("round_sphere", &json!({"dim": 3, "r0": 1.0, "direction": direction})).unwrap()
}

fn sample(rng: &mut ChaCha8Rng, bx: &[(f64, f64)]) -> ChartPoint {
    pt(&bx.iter().map(|&(a, b)| rng.random_range(a..b)).collect::<Vec<_>>())
}

#[test]
fn euclidean_is_ricci_flat() {
    let bg = model_background("euclidean_static", &serde_json::Value::Null).unwrap();
    let c = curvature(&Snapshot::new(&bg, 0.4), &pt(&[0.1, -0.3, 0.9])).unwrap();
    assert_eq!(c.ricci.max_abs(), 0.0);
    assert_eq!(c.scalar, 0.0);
}

#[test]
fn forward_sphere_scalar_curvature() {
    let bg = sphere("forward");
    let y = pt(&[1.0, 2.0, 0.5]);
    let c = curvature(&Snapshot::new(&bg, 0.1), &y).unwrap();
    assert_relative_eq!(c.scalar, 10.0, max_relative = 1e-12);
    let r: f64 = bg.scalar_curvature(0.1, y.coords());
    assert_relative_eq!(r, 10.0, max_relative = 1e-15);
    // Ric = (d−1)/φ · g
    let expected = &c.metric * (2.0 / 0.6);
    assert!((c.ricci.entries() - expected).amax() < 1e-11);
}

#[test]
fn catalog_flows_are_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let models = [
        model_background("euclidean_static", &json!({"dim": 2})).unwrap(),
        sphere("forward"),
        sphere("backward"),
        model_background("round_sphere", &json!({"dim": 2, "r0": 2.0})).unwrap(),
        model_background("gaussian_shrinker_flat", &json!({"dim": 3})).unwrap(),
    ];
    for bg in &models {
        for _ in 0..50 {
            let y = sample(&mut rng, &bg.sample_box());
            let t = rng.random_range(0.05 * bg.horizon()..bg.horizon());
            let res = ricci_flow_residual(bg, &y, t).unwrap();
            assert!(res.max_abs() < 1e-8, "{} at {:?}", bg.name(), y);
        }
    }
}

#[test]
fn dt_metric_matches_time_differences() {
    let bg = sphere("forward");
    let y = pt(&[0.7, 1.9, 4.0]);
    let (t, h) = (0.12, 1e-6);
    let exact = dt_metric(&bg, &y, t).unwrap();
    let at = |s: f64| DMatrix::from_row_slice(3, 3, &bg.metric(s, y.coords()));
    let fd = (at(t + h) - at(t - h)) / (2.0 * h);
    assert!((exact - &fd).amax() <= 1e-6 * fd.amax());
}

/// Forward round 3-sphere with its metric multiplied by `1 + t²`.
struct Corrupted(CatalogBackground);

impl RicciFlowBackground for Corrupted {
    fn name(&self) -> &str {
        "corrupted"
    }
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn direction(&self) -> FlowDirection {
        FlowDirection::Forward
    }
    fn horizon(&self) -> f64 {
        self.0.horizon()
    }
    fn check_point(&self, t: f64, y: &[f64]) -> crate::Result<()> {
        self.0.check_point(t, y)
    }
    fn metric<D: DualNum<Primitive = f64>>(&self, t: D, y: &[D]) -> Vec<D> {
        let s = t.clone() * t.clone() + 1.0;
        self.0.metric(t, y).into_iter().map(|g| g * s.clone()).collect()
    }
    fn scalar_curvature<D: DualNum<Primitive = f64>>(&self, t: D, y: &[D]) -> D {
        let s = t.clone() * t.clone() + 1.0;
        self.0.scalar_curvature(t, y) / s
    }
    fn sample_box(&self) -> Vec<(f64, f64)> {
        self.0.sample_box()
    }
}

#[test]
fn corrupted_flow_has_the_hand_residual() {
    let bg = Corrupted(sphere("forward"));
    let (t, y) = (0.1, pt(&[0.8, 1.2, 0.3]));
    let res = ricci_flow_residual(&bg, &y, t).unwrap();
    // unit-sphere metric at y
    let (s1, s2) = (0.8f64.sin().powi(2), 1.2f64.sin().powi(2));
    let unit = [1.0, s1, s1 * s2];
    // ∂_t[(1+t²)(1−4t)] g₁ + 2·2·g₁ = (2t(1−4t) − 4(1+t²) + 4) g₁
    let phi = 1.0 - 4.0 * t;
    let factor = 2.0 * t * phi - 4.0 * (1.0 + t * t) + 4.0;
    for k in 0..3 {
        assert_relative_eq!(res.get(k, k), factor * unit[k], max_relative = 1e-10);
    }
    assert!(factor.abs() > 0.05);
}

#[test]
fn gaussian_shrinker_is_an_exact_soliton() {
    let bg = model_background("gaussian_shrinker_flat", &json!({"dim": 3})).unwrap();
    let sol = bg.soliton_data().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let y = sample(&mut rng, &bg.sample_box());
        let tau = rng.random_range(0.05..1.0);
        let res = gradient_soliton_residual(&bg, &sol, &y, tau).unwrap();
        assert!(res.max_abs() < 1e-12);
    }
    assert!(gradient_soliton_residual(&bg, &sol, &pt(&[0.0; 3]), 0.0).is_err());
}

#[test]
fn steady_residuals_of_simple_potentials() {
    let bg = model_background("euclidean_static", &json!({"dim": 3})).unwrap();
    let y = pt(&[0.3, 0.2, 0.1]);
    let steady = |potential| GradientSolitonData {
        potential,
        class: SolitonClass::Steady,
    };
    let zero = gradient_soliton_residual(&bg, &steady(Potential::Zero), &y, 0.5).unwrap();
    assert_eq!(zero.max_abs(), 0.0);
    let linear = Potential::Polynomial(vec![Monomial { coef: 1.0, powers: vec![1, 0, 0] }]);
    let res = gradient_soliton_residual(&bg, &steady(linear), &y, 0.5).unwrap();
    assert_eq!(res.max_abs(), 0.0);
    let square = Potential::Polynomial(vec![Monomial { coef: 1.0, powers: vec![2, 0, 0] }]);
    let res = gradient_soliton_residual(&bg, &steady(square), &y, 0.5).unwrap();
    assert_eq!(res.get(0, 0), 2.0);
    assert_eq!(res.max_abs(), 2.0);
}

#[test]
fn model_background_rejects_bad_input() {
    assert!(matches!(
        model_background("torus", &serde_json::Value::Null),
        Err(crate::Error::UnknownModel(_))
    ));
    assert!(model_background("round_sphere", &json!({"r0": -1.0})).is_err());
    assert!(model_background("round_sphere", &json!({"dim": 3, "horizon": 0.3})).is_err());
    assert!(model_background("round_sphere", &json!({"radius": 1.0})).is_err());
    assert!(model_background("gaussian_shrinker_flat", &json!({"direction": "forward"})).is_err());
}

#[test]
fn shrinking_sphere_radius_and_curvature() {
    let bg = model_background("euclidean_static", &json!({"dim": 3})).unwrap();
    let mcf = model_mcf("shrinking_sphere_flat", &json!({"r0": 1.0}), &bg).unwrap();
    let r = match &mcf {
        CatalogMcf::ShrinkingSphere { .. } => mcf.radius(0.1).unwrap(),
        _ => unreachable!(),
    };
    assert_relative_eq!(r, 0.774_596_669_241_483, max_relative = 1e-14);
    let data = flow_point_data(&bg, &mcf, &pt(&[1.0, 2.0]), 0.1).unwrap();
    assert_relative_eq!(data.surface.mean_curvature, 2.0 / r, max_relative = 1e-12);
    assert_relative_eq!(data.mean_curvature, 2.0 / r, max_relative = 1e-14);
    assert_relative_eq!(data.dh_dt, 4.0 / r.powi(3), max_relative = 1e-12);
    assert!(data.dh_dx.amax() < 1e-15);
}

#[test]
fn equator_and_plane_are_static_and_minimal() {
    let sph = sphere("forward");
    let eq = model_mcf("equator_in_sphere", &serde_json::Value::Null, &sph).unwrap();
    let d = flow_point_data(&sph, &eq, &pt(&[1.3, 0.4]), 0.1).unwrap();
    assert_eq!(d.velocity.amax(), 0.0);
    assert!(d.surface.mean_curvature.abs() < 1e-14);
    assert_eq!(d.surface.point[0], FRAC_PI_2);

    let flat = model_background("euclidean_static", &serde_json::Value::Null).unwrap();
    let plane = model_mcf("static_plane_flat", &serde_json::Value::Null, &flat).unwrap();
    let d = flow_point_data(&flat, &plane, &pt(&[0.2, -0.5]), 0.3).unwrap();
    assert_eq!(d.velocity.amax(), 0.0);
    assert_eq!(d.surface.mean_curvature, 0.0);
}

#[test]
fn model_mcf_checks_compatibility() {
    let sph = sphere("forward");
    let flat = model_background("euclidean_static", &serde_json::Value::Null).unwrap();
    assert!(model_mcf("shrinking_sphere_flat", &serde_json::Value::Null, &sph).is_err());
    assert!(model_mcf("equator_in_sphere", &serde_json::Value::Null, &flat).is_err());
    assert!(model_mcf("static_plane_flat", &json!({"n": 3}), &flat).is_err());
    assert!(matches!(
        model_mcf("helicoid", &serde_json::Value::Null, &flat),
        Err(crate::Error::UnknownModel(_))
    ));
}

#[test]
fn catalog_flows_move_by_mean_curvature() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let flat = model_background("euclidean_static", &json!({"dim": 3})).unwrap();
    let flat_back = model_background("euclidean_static", &json!({"dim": 3, "direction": "backward"})).unwrap();
    let sph = sphere("forward");
    let sph_back = sphere("backward");
    let cases: Vec<(&CatalogBackground, CatalogMcf)> = vec![
        (&flat, model_mcf("shrinking_sphere_flat", &json!({"r0": 1.2}), &flat).unwrap()),
        (&flat_back, model_mcf("shrinking_sphere_flat", &serde_json::Value::Null, &flat_back).unwrap()),
        (&flat, model_mcf("static_plane_flat", &serde_json::Value::Null, &flat).unwrap()),
        (&sph, model_mcf("equator_in_sphere", &serde_json::Value::Null, &sph).unwrap()),
        (&sph_back, model_mcf("equator_in_sphere", &serde_json::Value::Null, &sph_back).unwrap()),
    ];
    for (bg, mcf) in &cases {
        let top = bg.horizon().min(0.8 * mcf.horizon());
        for _ in 0..50 {
            let x = sample(&mut rng, &mcf.sample_box());
            let t = rng.random_range(0.05 * top..top);
            let d = flow_point_data(*bg, mcf, &x, t).unwrap();
            let g = &d.surface.ambient_metric;
            let normal_speed = inner(g, &d.velocity, &d.surface.normal);
            assert!((normal_speed + d.mean_curvature).abs() < 1e-8);
            assert!((d.surface.mean_curvature - d.mean_curvature).abs() < 1e-10);
        }
    }
}

#[test]
fn self_similar_sphere_solves_the_soliton_equation() {
    let bg = model_background("gaussian_shrinker_flat", &json!({"dim": 3})).unwrap();
    let pot = bg.soliton_data().unwrap().potential;
    for k in 1..=10 {
        let tau = 0.1 * k as f64;
        let s = SphereSurface::self_similar(2, tau);
        let res = mcf_soliton_residual(&Snapshot::new(&bg, tau), &s, &pot.at(3, tau), -1.0, &pt(&[0.9, 2.0]))
            .unwrap();
        assert!(res.abs() < 1e-10, "τ = {tau}: {res}");
    }
}

#[test]
fn soliton_residual_without_potential_is_h() {
    let flat = model_background("euclidean_static", &json!({"dim": 3})).unwrap();
    let unit = SphereSurface { n: 2, radius: 1.0 };
    let zero = Potential::Zero;
    let res = mcf_soliton_residual(&Snapshot::new(&flat, 0.5), &unit, &zero.at(3, 0.5), 1.0, &pt(&[0.4, 0.1]))
        .unwrap();
    assert_relative_eq!(res, 2.0, max_relative = 1e-13);

    let sph = sphere("forward");
    let eq = model_mcf("equator_in_sphere", &serde_json::Value::Null, &sph).unwrap();
    let slice = McfSlice::new(&eq, 0.1);
    let res = mcf_soliton_residual(&Snapshot::new(&sph, 0.1), &slice, &zero.at(3, 0.1), -1.0, &pt(&[1.0, 1.0]))
        .unwrap();
    assert!(res.abs() < 1e-14);
    assert!(mcf_soliton_residual(&Snapshot::new(&flat, 0.5), &unit, &zero.at(3, 0.5), 0.5, &pt(&[0.4, 0.1])).is_err());
}

#[test]
fn snapshot_metric_matches_closed_form_scalar_curvature() {
    let bg = sphere("backward");
    let y = pt(&[0.5, 2.5, 1.0]);
    let p = background_point(&bg, &y, 0.5).unwrap();
    assert_relative_eq!(p.scalar, 2.0, max_relative = 1e-14);
    let c = curvature(&Snapshot::new(&bg, 0.5), &y).unwrap();
    assert_relative_eq!(c.scalar, p.scalar, max_relative = 1e-12);
    // dR/dτ = −d(d−1)·2(d−1)/φ² = −24/9
    assert_relative_eq!(p.dr_dt, -24.0 / 9.0, max_relative = 1e-14);
    let f = Potential::Zero.at(3, 0.5);
    assert_eq!(ClosedFormScalar::dim(&f), 3);
}
