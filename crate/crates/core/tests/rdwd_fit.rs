mod common;

use rdwd_core::rdwd::{
    dual_diagnostics, fit, kkt_check, ClassWeights, InitMode, Penalty, RdwdConfig, RdwdError,
};
use rdwd_core::{Label, Scorer, TrainingSet};

fn unit_weights() -> RdwdConfig {
    RdwdConfig {
        weights: ClassWeights::Fixed {
            plus: 1.0,
            minus: 1.0,
        },
        ..Default::default()
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[test]
fn toy_fit_matches_brute_force_sphere() {
    let data = common::toy_2d();
    let result = fit(&data, &unit_weights()).unwrap();
    let model = &result.model;
    assert!(model.converged);
    assert!(model.radius > 0.0);
    for i in 0..data.n() {
        let r = data.label(i).sign() * model.score_point(data.point(i));
        assert!(r > 0.0, "point {i} has residual {r}");
    }
    let (center, radius, best) = common::oracle_sphere_2d(&data, model.penalty, (1.0, 1.0));
    let fitted = common::oracle_objective(&data, &model.center, model.radius, model.penalty, (1.0, 1.0));
    assert!(
        dist(&model.center, &center) <= 0.05,
        "center {:?} vs oracle {:?} (R {} vs {})",
        model.center,
        center,
        model.radius,
        radius
    );
    assert!(fitted <= best * (1.0 + 1e-3), "objective {fitted} vs oracle {best}");
}

#[test]
fn objective_is_reported_with_exact_distances() {
    let data = common::toy_2d();
    let result = fit(&data, &RdwdConfig::default()).unwrap();
    let m = &result.model;
    let oracle = common::oracle_objective(&data, &m.center, m.radius, m.penalty, m.weights);
    assert!((m.objective - oracle).abs() <= 1e-10 * oracle);
    let last = result.history.last().unwrap();
    assert_eq!(last.objective, m.objective);
}

#[test]
fn trust_region_bounds_every_step() {
    let data = common::toy_2d();
    let result = fit(&data, &RdwdConfig::default()).unwrap();
    let mut prev = vec![0.5, 0.5];
    for s in &result.history {
        assert!(dist(&s.center, &prev) <= s.step_length + 1e-10);
        prev = s.center.clone();
    }
}

#[test]
fn identical_positive_points_pull_center_onto_them() {
    let p = [0.3, 0.2, 0.5];
    let mut points = vec![p.to_vec(); 3];
    points.extend([vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
    let labels = (0..6)
        .map(|i| if i < 3 { Label::Positive } else { Label::Negative })
        .collect();
    let data = TrainingSet::new(points, labels).unwrap();
    let result = fit(&data, &RdwdConfig::default()).unwrap();
    assert!(dist(&result.model.center, &p) <= 1e-3, "{:?}", result.model.center);
    for i in 0..data.n() {
        assert_eq!(
            result.model.classify_point(data.point(i)).unwrap().predicted,
            data.label(i)
        );
    }
}

#[test]
fn kkt_passes_and_detects_corruption() {
    let data = common::toy_2d();
    let result = fit(&data, &RdwdConfig::default()).unwrap();
    let report = kkt_check(&data, &result.model, &result.certificate, 1e-4);
    assert!(report.passed, "{report:?}");

    let mut bad = result.certificate.clone();
    bad.z[2] += 0.1;
    let report = kkt_check(&data, &result.model, &bad, 1e-4);
    assert!(!report.passed);
    assert!(report.get("cone_complementarity").unwrap() > 1e-4);
}

#[test]
fn dual_diagnostics_on_separable_toy() {
    let data = common::toy_2d();
    let result = fit(&data, &RdwdConfig::default()).unwrap();
    let diag = dual_diagnostics(&result.certificate, 1e-6).unwrap();
    assert!(diag.separability > 0.0);
    let plus: f64 = (0..4).map(|i| diag.z_star[i]).sum();
    let minus: f64 = (4..7).map(|i| diag.z_star[i]).sum();
    assert!((plus - 1.0).abs() <= 1e-12 && (minus - 1.0).abs() <= 1e-12);
    // z = eta z*: exact on the +1 class, up to |y^T z| on the −1 class
    let z = &result.certificate.z;
    let ytz: f64 = (0..7).map(|i| data.label(i).sign() * z[i]).sum();
    for (i, (z, zs)) in z.iter().zip(&diag.z_star).enumerate() {
        let scaled = diag.eta_hat * zs;
        let tol = if i < 4 { 1e-12 * z.abs().max(1.0) } else { ytz.abs() + 1e-12 };
        assert!((z - scaled).abs() <= tol);
    }
    // round trip: z' = eta z*, then e_+^T z'_+ recovers eta
    let eta = diag.eta_from_objective;
    let back: f64 = (0..4).map(|i| eta * diag.z_star[i]).sum();
    assert!((back - eta).abs() <= 1e-8 * eta);
    // the maximizer along z* agrees with the solver's scale; the dual
    // objective is flat in eta, so only to the precision the solve allows
    let rel = (eta - diag.eta_hat).abs() / diag.eta_hat;
    assert!(rel <= 1e-4, "eta {eta} vs {} (rel {rel:e})", diag.eta_hat);
}

#[test]
fn far_negative_duplicate_barely_moves_the_center() {
    let base = common::toy_2d();
    let mut points = base.points().to_vec();
    let mut labels = base.labels().to_vec();
    points.push(vec![6.0, 6.0]);
    labels.push(Label::Negative);
    let one = TrainingSet::new(points.clone(), labels.clone()).unwrap();
    points.push(vec![6.0, 6.0]);
    labels.push(Label::Negative);
    let two = TrainingSet::new(points, labels).unwrap();

    let cfg = unit_weights();
    let a = fit(&one, &cfg).unwrap().model;
    let b = fit(&two, &cfg).unwrap().model;
    assert!(-a.score_point(&[6.0, 6.0]) >= 10.0 * a.radius);
    let moved = dist(&a.center, &b.center);
    assert!(moved <= 1e-3, "center moved by {moved}");
}

#[test]
fn default_penalty_exceeds_inverse_squared_distances() {
    for seed in 0..5 {
        let data = common::simplex_classes(seed, 20, 6, 6);
        let result = fit(&data, &RdwdConfig::default()).unwrap();
        let c = result.model.penalty;
        let center = rdwd_core::rdwd::initialize_center(&data, &InitMode::MeanPlus).unwrap();
        for &i in data.neg_index() {
            let d0 = dist(data.point(i), &center);
            assert!(c * d0 * d0 > 1.0);
        }
    }
}

#[test]
fn converges_on_small_simplex_fixtures() {
    for seed in 0..5 {
        let data = common::simplex_classes(100 + seed, 10, 8, 8);
        let result = fit(&data, &RdwdConfig::default()).unwrap();
        assert!(result.model.converged, "seed {seed}");
        assert!(result.history.len() < RdwdConfig::default().max_outer_iters);
    }
}

#[test]
fn explicit_center_and_fixed_penalty_are_honored() {
    let data = common::toy_2d();
    let cfg = RdwdConfig {
        init: InitMode::Explicit(vec![0.45, 0.55]),
        penalty: Penalty::Fixed(50.0),
        ..Default::default()
    };
    let result = fit(&data, &cfg).unwrap();
    assert_eq!(result.model.penalty, 50.0);
    let first = &result.history[0];
    assert!(dist(&first.center, &[0.45, 0.55]) <= cfg.step_length + 1e-10);
}

#[test]
fn empty_positive_class_is_rejected() {
    let data = TrainingSet::new(
        vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        vec![Label::Negative, Label::Negative],
    );
    // the training set itself may already refuse this
    if let Ok(data) = data {
        assert_eq!(
            fit(&data, &RdwdConfig::default()).unwrap_err(),
            RdwdError::EmptyPositiveClass
        );
    }
}

#[test]
fn iteration_cap_returns_best_iterate_unconverged() {
    let data = common::toy_2d();
    let cfg = RdwdConfig {
        max_outer_iters: 3,
        stop_eps: 1e-14,
        ..Default::default()
    };
    let result = fit(&data, &cfg).unwrap();
    assert!(!result.model.converged);
    assert_eq!(result.history.len(), 3);
    assert!(!result.warnings.is_empty());
    let best = result
        .history
        .iter()
        .map(|s| s.objective)
        .fold(f64::INFINITY, f64::min);
    assert_eq!(result.model.objective, best);
}

#[test]
fn kkt_detects_a_misdirected_step() {
    let data = common::simplex_classes(100, 20, 6, 6);
    let result = fit(&data, &RdwdConfig::default()).unwrap();
    let report = kkt_check(&data, &result.model, &result.certificate, 1e-4);
    assert!(report.passed, "{report:?}");

    let mut bad = result.certificate.clone();
    for v in bad.step.delta.iter_mut() {
        *v = -*v;
    }
    let report = kkt_check(&data, &result.model, &bad, 1e-4);
    assert!(report.get("trust_region").unwrap() > 1e-4, "{report:?}");
}
