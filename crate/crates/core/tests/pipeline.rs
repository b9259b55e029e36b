mod common;

use std::sync::Arc;

use sleeve_core::geometry::{
    hausdorff_distance, HalfEllipse, HausdorffSettings, PointSet, Segment,
};
use sleeve_core::learner::{approximate_sleeve, SleeveConfig};
use sleeve_core::oracle::{case_by_name, default_start, experiment_catalog, Profile, SleeveOracle};
use sleeve_core::step::chord_error_bound_inexact;
use sleeve_core::tracer::{trace, ProfileInverse, QueryProjector, StepKind, TraceConfig};

use common::{arc_chord_deviation, nearest_param};

#[test]
fn query_bookkeeping_is_exact() {
    let o = SleeveOracle::new(
        Arc::new(Segment::new(vec![-0.4, -0.1], vec![0.4, 0.2])),
        Profile::identity(),
        0.25,
    );
    let mut cfg = SleeveConfig::new(0.25, 1e-3, 1e-3, vec![0.05, 0.2]);
    cfg.evaluation.enabled = false;
    let a = approximate_sleeve(&o, &cfg).unwrap();
    let q = a.report.queries;
    let scan = a.report.scan.as_ref().unwrap();
    let ext = a.report.extension.as_ref().unwrap();

    // Scan: f(x0) and the inward samples, one value per Newton iteration, the resamples.
    assert_eq!(q.scan.value_queries as usize, scan.scan_samples + scan.newton_iterations + scan.resamples);
    // Trace: one value and one gradient query per projection: P0 = proj(x0), then one
    // projection per recorded step.
    assert_eq!(q.trace.value_queries as usize, 1 + a.trace.steps.len());
    assert_eq!(q.trace.gradient_queries as usize, 1 + a.trace.steps.len());
    // Extension: the projection of y, one value per Newton iteration, the new knots.
    assert!(!ext.newton_failed);
    assert_eq!(q.extend.value_queries as usize, 1 + ext.newton_iterations + ext.samples);
    assert_eq!(q.total.value_queries, o.counts().value_queries);
    assert_eq!(q.total.gradient_queries, o.counts().gradient_queries);
    assert_eq!(q.total, q.scan + q.trace + q.extend);
    // Spline knots are exactly the samples taken.
    assert_eq!(a.report.spline_knots, 1 + scan.resamples + ext.samples);
}

#[test]
fn injected_profile_reproduces_direct_trace() {
    let case = case_by_name("spiral").unwrap();
    let oracle = case.oracle();
    let mut cfg = SleeveConfig::new(case.rho, 1e-2, case.sigma, case.x0.clone());
    cfg.exact_profile = Some(case.profile.clone());
    cfg.evaluation.enabled = false;
    let via_pipeline = approximate_sleeve(&oracle, &cfg).unwrap();

    let fresh = case.oracle();
    let prof = fresh.profile().clone();
    let proj = QueryProjector::new(&fresh, ProfileInverse::Exact(&prof));
    let direct = trace(&fresh, &proj, &cfg.trace_config(), &case.x0).unwrap();
    assert_eq!(via_pipeline.trace, direct);
    assert_eq!(via_pipeline.report.queries.trace, fresh.counts());
}

#[test]
fn reversal_symmetry() {
    let case = case_by_name("spiral").unwrap();
    let e = 1e-2;
    let oracle = case.oracle();
    let prof = oracle.profile().clone();
    let proj = QueryProjector::new(&oracle, ProfileInverse::Exact(&prof));
    let cfg = TraceConfig::exact(case.rho, e);
    let a = trace(&oracle, &proj, &cfg, &case.x0).unwrap();
    // Start near the far end instead.
    let c = case.curve.as_ref();
    let p = c.position(0.95);
    let x1: Vec<f64> = p.iter().map(|v| v * (1.0 + 0.3 * case.rho / 0.5)).collect();
    let b = trace(&oracle, &proj, &cfg, &x1).unwrap();
    let h = hausdorff_distance(PointSet::Chain(&a.chain), PointSet::Chain(&b.chain), &HausdorffSettings::default());
    assert!(h.distance <= 2.0 * e, "{}", h.distance);
}

#[test]
fn noisy_chain_stays_near_curve_and_within_segment_bound() {
    let (rho, e, eps) = (0.125, 1e-2, 2e-6);
    let curve = Arc::new(HalfEllipse { a: 0.5, b: 0.25 });
    let profile = Profile::identity();
    let oracle = SleeveOracle::new(curve.clone(), profile.clone(), rho).with_projection_noise(eps, 5);
    let proj = QueryProjector::new(&oracle, ProfileInverse::Exact(&profile));
    let x0 = default_start(curve.as_ref(), rho);
    let r = trace(&oracle, &proj, &TraceConfig::inexact(rho, e, eps), &x0).unwrap();
    let again = trace(&oracle, &proj, &TraceConfig::inexact(rho, e, eps), &x0).unwrap();
    assert_eq!(r, again);
    for w in r.chain.vertices().windows(2) {
        let (ta, da) = nearest_param(curve.as_ref(), &w[0], 4000);
        let (tb, _) = nearest_param(curve.as_ref(), &w[1], 4000);
        assert!(da <= eps + 1e-10, "vertex {da:e} off the curve");
        let h = common::dist(&w[0], &w[1]);
        let dev = arc_chord_deviation(curve.as_ref(), ta.min(tb), ta.max(tb), &w[0], &w[1], 400);
        assert!(dev <= chord_error_bound_inexact(rho, h, eps).unwrap() + 1e-10);
    }
    // Inexact sandwich with the audit slack.
    for s in r.steps.iter().filter(|s| matches!(s.kind, StepKind::Forward | StepKind::Backward) && !s.terminal) {
        assert!(s.step_length <= r.eta + 2.0 * eps, "{}", s.step_length);
        assert!(s.step_length >= s.lower_bound - 1e-12, "{} < {}", s.step_length, s.lower_bound);
    }
}

#[test]
fn catalog_runs_respect_budget_and_spline_error() {
    for case in experiment_catalog() {
        let oracle = case.oracle();
        let mut cfg = SleeveConfig::new(case.rho, case.target_error, case.sigma, case.x0.clone());
        cfg.evaluation.points = 20_000;
        let a = approximate_sleeve(&oracle, &cfg).unwrap();
        let sup = a.report.sup_error.unwrap();
        assert!(sup <= a.report.budget.bound, "{}: {sup:e} > {:e}", case.name, a.report.budget.bound);

        // Interpolation error on a 10× finer grid, against σ² sup|g̈₂| / 8.
        let s = &a.spline;
        let n = ((1.0 / s.sigma()).ceil() as usize) * 10;
        let h = 1e-4;
        let g2dd = (1..n)
            .map(|i| i as f64 / n as f64)
            .map(|t| ((case.profile.g2(t + h) - 2.0 * case.profile.g2(t) + case.profile.g2(t - h)) / (h * h)).abs())
            .fold(0.0, f64::max);
        let bound = s.sigma() * s.sigma() * g2dd / 8.0 + 1e-9;
        let worst = (0..=n)
            .map(|i| i as f64 / n as f64)
            .map(|t| (s.eval(t) - case.profile.g2(t)).abs())
            .fold(0.0, f64::max);
        assert!(worst <= bound, "{}: interpolation error {worst:e} > {bound:e}", case.name);
    }
}
