use hullform_core::analyze::{pearson, polyfit, polyval, sensitivity_report};
use hullform_core::doe::sobol_generate;
use hullform_core::fields::{integrate_forces, FieldSample, ForceOptions, WaterConstants};
use hullform_core::mesh::{icosphere, unit_cube};
use hullform_core::morph::{apply_morph, DesignBounds, DesignParams, MorphConfig};
use hullform_core::optimize::{non_dominated, pareto_front_brute_force, EvaluationRecord, EvaluatorKind};
use hullform_core::oracle::{make_baseline_hull, OracleConfig};
use hullform_core::surrogate::{split_dataset, DesignFrame, FeatureScaling, surface_features};
use hullform_core::Vec3;
use proptest::prelude::*;
use std::sync::OnceLock;

fn hull() -> &'static hullform_core::HullMesh {
    static HULL: OnceLock<hullform_core::HullMesh> = OnceLock::new();
    HULL.get_or_init(|| make_baseline_hull(&OracleConfig::default()))
}

fn design() -> impl Strategy<Value = DesignParams> {
    let b = DesignBounds::default();
    (
        b.lower[0]..=b.upper[0],
        b.lower[1]..=b.upper[1],
        b.lower[2]..=b.upper[2],
        b.lower[3]..=b.upper[3],
        b.lower[4]..=b.upper[4],
    )
        .prop_map(|(a, b, c, d, e)| DesignParams::from_array([a, b, c, d, e]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn volume_follows_the_scale_product(sx in 0.2f64..5.0, sy in 0.2f64..5.0, sz in 0.2f64..5.0) {
        let h = hull();
        let v = h.enclosed_volume().unwrap();
        let scaled = h.scaled(sx, sy, sz).unwrap().enclosed_volume().unwrap();
        prop_assert!((scaled - sx * sy * sz * v).abs() <= 1e-9 * scaled.abs());
    }

    #[test]
    fn translation_keeps_volume_and_area(dx in -10.0f64..10.0, dy in -10.0f64..10.0, dz in -10.0f64..10.0) {
        let m = icosphere(1.3, 2);
        let t = m.translated(Vec3::new(dx, dy, dz)).unwrap();
        prop_assert!((t.enclosed_volume().unwrap() - m.enclosed_volume().unwrap()).abs() < 1e-9);
        prop_assert!((t.total_area() - m.total_area()).abs() < 1e-9);
    }

    #[test]
    fn uniform_pressure_cancels_on_closed_meshes(p in -1e6f64..1e6, level in 0u32..3) {
        let c = WaterConstants::default();
        let mesh = icosphere(0.7, level);
        // absolute pressure whose dynamic part is the constant p
        let samples: Vec<FieldSample> = mesh
            .face_geometry()
            .iter()
            .map(|g| FieldSample::surface(g.centroid, c.hydrostatic(g.centroid.z) + p, 1.0, Vec3::ZERO))
            .collect();
        let f = integrate_forces(&mesh, &samples, &c, ForceOptions::default()).unwrap();
        prop_assert!(f.norm() <= 1e-9 * p.abs().max(1.0) * mesh.total_area());
    }

    #[test]
    fn morph_keeps_the_hull_closed_and_ordered(params in design()) {
        let cfg = OracleConfig::default();
        let morph = MorphConfig { baseline: cfg.baseline_ratios(), ..MorphConfig::default() };
        let m = apply_morph(hull(), &params, &morph).unwrap();
        prop_assert!(m.topology().is_watertight());
        prop_assert!(m.enclosed_volume().unwrap() > 0.0);
        let b = m.bounds();
        prop_assert!((b.max.x - b.min.x - params.scale_x * cfg.length).abs() < 1e-9);
    }

    #[test]
    fn sobol_points_stay_in_the_unit_cube(dim in 1usize..=16, skip in 0u64..1000) {
        for p in sobol_generate(dim, 64, skip).unwrap() {
            prop_assert!(p.iter().all(|x| (0.0..1.0).contains(x)));
        }
    }

    #[test]
    fn splits_partition_the_ids(n in 3usize..300, seed in any::<u64>()) {
        let s = split_dataset(n, [0.8, 0.1, 0.1], seed);
        if let Ok(s) = s {
            let mut all: Vec<usize> = s.train.iter().chain(&s.validation).chain(&s.test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn features_are_bounded_and_idempotent(params in design()) {
        let cfg = OracleConfig::default();
        let morph = MorphConfig { baseline: cfg.baseline_ratios(), ..MorphConfig::default() };
        let m = apply_morph(hull(), &params, &morph).unwrap();
        let scaling = FeatureScaling::default();
        let frame = DesignFrame::new(&m, &params, &scaling);
        let a = surface_features(&m, &frame);
        prop_assert_eq!(&a, &surface_features(&m, &DesignFrame::new(&m, &params, &scaling)));
        prop_assert!(a.iter().all(|f| f.0.iter().all(|v| v.is_finite() && (-2.0..=2.0).contains(v))));
    }

    #[test]
    fn pearson_symmetry_scale_and_sign(
        xs in prop::collection::vec(-100.0f64..100.0, 3..40),
        noise in prop::collection::vec(-1.0f64..1.0, 40),
        a in 0.1f64..10.0,
        b in -50.0f64..50.0,
    ) {
        let ys: Vec<f64> = xs.iter().zip(&noise).map(|(x, n)| 0.3 * x + 20.0 * n).collect();
        let Ok(r) = pearson(&xs, &ys) else { return Ok(()) };
        prop_assert!(r.abs() <= 1.0);
        prop_assert!((r - pearson(&ys, &xs).unwrap()).abs() < 1e-12);
        let scaled: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        prop_assert!((r - pearson(&scaled, &ys).unwrap()).abs() < 1e-9);
        let neg: Vec<f64> = ys.iter().map(|y| -y).collect();
        prop_assert!((r + pearson(&xs, &neg).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn polyfit_residuals_are_orthogonal_and_nested(
        xs in prop::collection::vec(-3.0f64..3.0, 6..40),
        noise in prop::collection::vec(-1.0f64..1.0, 40),
    ) {
        let ys: Vec<f64> = xs.iter().zip(&noise).map(|(x, n)| 1.0 + x - 0.4 * x * x + n).collect();
        let (Ok(c1), Ok(c2)) = (polyfit(&xs, &ys, 1), polyfit(&xs, &ys, 2)) else { return Ok(()) };
        let res = |c: &[f64]| xs.iter().zip(&ys).map(|(x, y)| y - polyval(c, *x)).collect::<Vec<f64>>();
        let (r1, r2) = (res(&c1), res(&c2));
        let ss = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();
        prop_assert!(ss(&r2) <= ss(&r1) + 1e-9);
        let scale = ys.iter().map(|y| y.abs()).sum::<f64>() * 9.0;
        for k in 0..3 {
            let dot: f64 = xs.iter().zip(&r2).map(|(x, r)| x.powi(k) * r).sum();
            prop_assert!(dot.abs() < 1e-8 * scale, "basis {} dot {}", k, dot);
        }
    }

    #[test]
    fn ranking_ignores_affine_parameter_rescaling(
        rows in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0), 5..30),
        a in 0.5f64..3.0,
        b in -1.0f64..1.0,
    ) {
        let make = |t: f64| -> Vec<EvaluationRecord> {
            rows.iter().enumerate().map(|(i, &(x, y, n))| EvaluationRecord {
                id: i as u64,
                params: DesignParams::from_array([1.0, 7.0, a * t * x + b * t + x * (1.0 - t), y, 1.5]),
                objectives: vec![3.0 * x - y + 0.5 * n],
                feasible: true,
                violations: vec![],
                evaluator: EvaluatorKind::Oracle,
                wall_time_s: 0.0,
            }).collect()
        };
        let (Ok(r0), Ok(r1)) = (sensitivity_report(&make(0.0), 0, "f"), sensitivity_report(&make(1.0), 0, "f")) else {
            return Ok(());
        };
        let names = |r: &hullform_core::analyze::SensitivityReport| r.ranking.iter().map(|p| p.0.clone()).collect::<Vec<_>>();
        let gap = (r0.ranking[0].1.abs() - r0.ranking[1].1.abs()).abs();
        if gap > 1e-9 {
            prop_assert_eq!(names(&r0), names(&r1));
        }
    }

    #[test]
    fn pareto_filters_agree(points in prop::collection::vec((0u8..30, 0u8..30), 1..200)) {
        let pts: Vec<Vec<f64>> = points.iter().map(|&(a, b)| vec![f64::from(a), f64::from(b)]).collect();
        let mut fast = non_dominated(&pts);
        fast.sort_unstable();
        prop_assert_eq!(fast, pareto_front_brute_force(&pts));
    }
}

#[test]
fn identity_morph_is_bit_exact() {
    let cfg = OracleConfig::default();
    let morph = MorphConfig { baseline: cfg.baseline_ratios(), ..MorphConfig::default() };
    let p = DesignParams::baseline(&cfg.baseline_ratios(), 0.5, 1.5);
    let m = apply_morph(hull(), &p, &MorphConfig { shift_amplitude: 0.0, ..morph }).unwrap();
    assert_eq!(m.vertices(), hull().vertices());
    let cube = unit_cube();
    assert_eq!(cube.scaled(1.0, 1.0, 1.0).unwrap().vertices(), cube.vertices());
}
