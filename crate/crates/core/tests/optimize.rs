use hullform_core::doe::DesignSpace;
use hullform_core::fields::speed_from_froude;
use hullform_core::morph::{DesignBounds, DesignParams, MorphConfig, Parameter};
use hullform_core::optimize::*;
use hullform_core::oracle::{make_baseline_hull, OracleConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit_bounds() -> DesignBounds {
    DesignBounds::new([0.0; 5], [1.0; 5]).unwrap()
}

fn archive(names: &[&str]) -> Archive {
    Archive::new(RunMetadata::new(0, unit_bounds(), 0, names.iter().map(|s| s.to_string()).collect()))
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn sphere_run(c: [f64; 5], config: &TSearchConfig) -> (DesignParams, usize) {
    let mut ev = FnEvaluator::new(&["f"], move |p: &DesignParams| {
        Outcome::Feasible(vec![p.to_array().iter().zip(&c).map(|(x, c)| (x - c) * (x - c)).sum()])
    });
    let mut ar = archive(&["f"]);
    let space = DesignSpace::all_free(unit_bounds());
    let x0 = DesignParams::from_array([0.5; 5]);
    let best = t_search(&mut ev, &[1.0], &space, &[], &x0, config, &mut ar).unwrap();
    (best.params, ar.len())
}

#[test]
fn sphere_default_tolerance_bounds_each_coordinate() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let c: [f64; 5] = std::array::from_fn(|_| rng.random_range(0.05..0.95));
        let (best, evals) = sphere_run(c, &TSearchConfig::default());
        let worst = best.to_array().iter().zip(&c).map(|(x, c)| (x - c).abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-4, "coordinate error {worst}");
        assert!(evals <= 500);
    }
}

#[test]
fn sphere_converges_within_euclidean_tolerance() {
    let config = TSearchConfig {
        tolerance: 1e-5,
        budget: 2000,
        ..TSearchConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let c: [f64; 5] = std::array::from_fn(|_| rng.random_range(0.05..0.95));
        let (best, evals) = sphere_run(c, &config);
        let d = dist(&best.to_array(), &c);
        assert!(d < 1e-4, "distance {d}");
        assert!(evals <= 2000);
    }
}

fn constrained_problem() -> (impl FnMut(&DesignParams) -> Outcome, LinearConstraint) {
    let f = |p: &DesignParams| {
        let x = p.to_array();
        Outcome::Feasible(vec![
            (x[0] - 0.8).powi(2) + 2.0 * (x[1] - 0.7).powi(2) + (x[2] - 0.4).powi(2) + (x[3] - 0.6).powi(2) + (x[4] - 0.3).powi(2),
        ])
    };
    let c = LinearConstraint {
        name: "x1+x2<=1".into(),
        coefficients: [1.0, 1.0, 0.0, 0.0, 0.0],
        rhs: 1.0,
    };
    (f, c)
}

#[test]
fn constrained_quadratic_matches_grid_brute_force() {
    // On x1 + x2 = 1 only (x1 - 0.8)² + 2 (x1 - 0.3)² matters; the other
    // coordinates sit at their unconstrained optimum.
    let mut best_x1 = 0.0;
    let mut best_f = f64::INFINITY;
    for i in 0..=1000 {
        let x1 = i as f64 * 1e-3;
        for j in 0..=1000 {
            let x2 = j as f64 * 1e-3;
            if x1 + x2 > 1.0 + 1e-12 {
                break;
            }
            let f = (x1 - 0.8f64).powi(2) + 2.0 * (x2 - 0.7f64).powi(2);
            if f < best_f {
                best_f = f;
                best_x1 = x1;
            }
        }
    }
    let reference = [best_x1, 1.0 - best_x1, 0.4, 0.6, 0.3];
    let (f, c) = constrained_problem();
    let mut ev = FnEvaluator::new(&["f"], f);
    let mut ar = archive(&["f"]);
    let space = DesignSpace::all_free(unit_bounds());
    let x0 = DesignParams::from_array([0.3, 0.3, 0.5, 0.5, 0.5]);
    let best = t_search(&mut ev, &[1.0], &space, &[&c], &x0, &TSearchConfig::default(), &mut ar).unwrap();
    let x = best.params.to_array();
    assert!(x[0] + x[1] <= 1.0 + 1e-12);
    assert!(dist(&x, &reference) < 1e-3, "{x:?} vs {reference:?}");
    assert!(ar.records().iter().any(|r| !r.feasible));
}

#[test]
fn search_invariants_hold() {
    let (f, c) = constrained_problem();
    let mut ev = FnEvaluator::new(&["f"], f);
    let mut ar = archive(&["f"]);
    let space = DesignSpace::all_free(unit_bounds());
    let x0 = DesignParams::from_array([0.1, 0.2, 0.9, 0.1, 0.5]);
    let best = t_search(&mut ev, &[1.0], &space, &[&c], &x0, &TSearchConfig::default(), &mut ar).unwrap();
    assert!(best.feasible);
    // each design appears once
    let mut keys: Vec<[u64; 5]> = ar.records().iter().map(|r| r.params.to_array().map(f64::to_bits)).collect();
    keys.sort_unstable();
    let n = keys.len();
    keys.dedup();
    assert_eq!(keys.len(), n);
    // running best is non-increasing and ends at the returned record
    let mut running = f64::INFINITY;
    for r in ar.records().iter().filter(|r| r.feasible) {
        running = running.min(r.objectives[0]);
    }
    assert_eq!(running, best.objectives[0]);
    // infeasible records carry no objectives
    assert!(ar.records().iter().filter(|r| !r.feasible).all(|r| r.objectives.is_empty() && !r.violations.is_empty()));
}

#[test]
fn pareto_sweep_matches_brute_force_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for trial in 0..5 {
        // coarse values in later trials to force ties
        let pts: Vec<Vec<f64>> = (0..1000)
            .map(|_| {
                let (a, b): (f64, f64) = (rng.random(), rng.random());
                if trial % 2 == 1 {
                    vec![(a * 20.0).floor(), (b * 20.0).floor()]
                } else {
                    vec![a, b]
                }
            })
            .collect();
        let mut fast = non_dominated(&pts);
        let brute = pareto_front_brute_force(&pts);
        // sorted by first objective
        assert!(fast.windows(2).all(|w| pts[w[0]][0] <= pts[w[1]][0]));
        fast.sort_unstable();
        assert_eq!(fast, brute);
    }
}

#[test]
fn pareto_membership_survives_affine_rescaling() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let pts: Vec<Vec<f64>> = (0..1000).map(|_| vec![rng.random(), rng.random()]).collect();
    let scaled: Vec<Vec<f64>> = pts.iter().map(|p| vec![3.5 * p[0] - 2.0, p[1]]).collect();
    let scaled2: Vec<Vec<f64>> = pts.iter().map(|p| vec![p[0], 0.01 * p[1] + 100.0]).collect();
    assert_eq!(non_dominated(&pts), non_dominated(&scaled));
    assert_eq!(non_dominated(&pts), non_dominated(&scaled2));
}

#[test]
fn scalarized_argmin_ignores_weight_scale() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let set: Vec<[f64; 2]> = (0..100).map(|_| [rng.random(), rng.random()]).collect();
    let argmin = |w: [f64; 2]| {
        (0..set.len())
            .min_by(|&a, &b| {
                scalarize(&set[a], &w).unwrap().total_cmp(&scalarize(&set[b], &w).unwrap())
            })
            .unwrap()
    };
    for w in [[1.0, 0.0], [0.3, 0.7], [0.5, 0.5]] {
        assert_eq!(argmin(w), argmin([3.0 * w[0], 3.0 * w[1]]));
    }
}

#[test]
fn front_is_mutually_non_dominating_and_covers_the_rest() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let mut ar = archive(&["a", "b"]);
    for _ in 0..300 {
        let p = DesignParams::from_array(std::array::from_fn(|_| rng.random()));
        let (a, b): (f64, f64) = (rng.random(), rng.random());
        ar.append(p, Evaluation { outcome: Outcome::Feasible(vec![a, b + a * a]), wall_time_s: 0.0 }, EvaluatorKind::Oracle)
            .unwrap();
    }
    let front = pareto_front(ar.records(), &[0, 1]).unwrap();
    let dominates = |x: &[f64], y: &[f64]| x[0] <= y[0] && x[1] <= y[1] && (x[0] < y[0] || x[1] < y[1]);
    for a in &front {
        assert!(front.iter().all(|b| !dominates(&b.objectives, &a.objectives)));
    }
    for r in ar.records() {
        if !front.iter().any(|f| f.id == r.id) {
            assert!(front.iter().any(|f| dominates(&f.objectives, &r.objectives)));
        }
    }
}

fn midship_only(config: &OracleConfig) -> DesignSpace {
    let ratios = config.baseline_ratios();
    DesignSpace::new(
        DesignBounds::default(),
        vec![
            (Parameter::ScaleX, 1.0),
            (Parameter::LengthOverBeam, ratios.length_over_beam),
            (Parameter::BeamOverDraught, ratios.beam_over_draught),
            (Parameter::Speed, speed_from_froude(0.18, config.constants.gravity, config.length)),
        ],
    )
    .unwrap()
}

fn oracle_evaluator(config: &OracleConfig, objectives: Vec<ObjectiveSpec>) -> OracleEvaluator {
    OracleEvaluator {
        baseline: make_baseline_hull(config),
        morph: MorphConfig {
            baseline: config.baseline_ratios(),
            ..MorphConfig::default()
        },
        config: config.clone(),
        objectives,
    }
}

#[test]
fn shared_minimizer_gives_a_single_front_point() {
    let config = OracleConfig::default();
    let space = midship_only(&config);
    let mut ev = oracle_evaluator(&config, vec![ObjectiveSpec::Froude(0.2), ObjectiveSpec::Froude(0.2)]);
    let mut ar = Archive::new(RunMetadata::new(0, DesignBounds::default(), 0, ev.objective_names()));
    let x0 = space.scale_to_bounds(&[0.5]).unwrap();
    let run = multi_objective_run(&mut ev, &space, &x0, &default_weight_sets(), &[], &TSearchConfig::default(), &mut ar).unwrap();
    assert_eq!(run.front.len(), 1);
    assert_eq!(run.best.len(), 5);
}

#[test]
fn two_speed_front_matches_dense_sweep() {
    let config = OracleConfig::default();
    let space = midship_only(&config);
    let mut ev = oracle_evaluator(&config, ObjectiveSpec::two_speed());
    let mut ar = Archive::new(RunMetadata::new(0, DesignBounds::default(), 0, ev.objective_names()));
    let x0 = space.scale_to_bounds(&[0.5]).unwrap();
    let run = multi_objective_run(&mut ev, &space, &x0, &default_weight_sets(), &[], &TSearchConfig::default(), &mut ar).unwrap();
    assert!(run.front.len() >= 2);
    let (a, b) = (&run.front[0].objectives, &run.front[run.front.len() - 1].objectives);
    assert!(a[0] < b[0] && a[1] > b[1], "front shows no trade-off");

    let mut sweep = Vec::new();
    for i in 0..200 {
        let p = space.scale_to_bounds(&[i as f64 / 199.0]).unwrap();
        match ev.evaluate(&p).unwrap().outcome {
            Outcome::Feasible(v) => sweep.push(v),
            Outcome::Infeasible(why) => panic!("{why:?}"),
        }
    }
    let reference: Vec<Vec<f64>> = non_dominated(&sweep).into_iter().map(|i| sweep[i].clone()).collect();
    assert!(reference.len() >= 2);
    for r in &run.front {
        // no sweep front point beats it by more than 1% in the first objective
        // at equal or better second objective
        let gap = reference
            .iter()
            .filter(|q| q[1] <= r.objectives[1])
            .map(|q| (r.objectives[0] - q[0]) / q[0])
            .fold(0.0, f64::max);
        assert!(gap <= 0.01, "front point {:?} is {gap} behind the sweep", r.objectives);
    }
}
