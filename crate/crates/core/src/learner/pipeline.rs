use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    error_budget, extend_profile, initial_profile_scan, ErrorBudget, Extension, InitialScan,
    LearnError, MonotoneLinearSpline,
};
use crate::geometry::{
    hausdorff_distance, GeometryError, HausdorffMeasurement, HausdorffSettings, PointSet,
    PolygonalChain,
};
use crate::oracle::{OracleError, Profile, QueryCounts, SleeveOracle};
use crate::point::{norm, Point};
use crate::tracer::{trace, ProfileInverse, QueryProjector, TraceConfig, TraceError, TraceResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Validate,
    Scan,
    Trace,
    Extend,
    Evaluate,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Validate => "validate",
            Stage::Scan => "scan",
            Stage::Trace => "trace",
            Stage::Extend => "extend",
            Stage::Evaluate => "evaluate",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StageError {
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("{0}")]
    Config(String),
}

#[derive(Debug, thiserror::Error)]
#[error("{stage} stage failed: {source}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: StageError,
}

fn at<E: Into<StageError>>(stage: Stage) -> impl FnOnce(E) -> PipelineError {
    move |e| PipelineError {
        stage,
        source: e.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationSettings {
    /// Skip the ground-truth comparison entirely.
    pub enabled: bool,
    /// Number of points in `B_{1/2}` for the sup-error.
    pub points: usize,
    /// Keep the per-point errors in the result.
    pub keep_grid: bool,
    pub hausdorff_bias: f64,
}

impl Default for EvaluationSettings {
    fn default() -> Self {
        Self {
            enabled: true,
            points: 100_000,
            keep_grid: true,
            hausdorff_bias: 1e-7,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SleeveConfig {
    pub rho: f64,
    pub target_error: f64,
    pub epsilon: f64,
    pub sigma: f64,
    pub x0: Point,
    /// Defaults to inexact tracing iff `ε > 0`.
    pub inexact_mode: Option<bool>,
    pub force: bool,
    pub endpoint_tol: Option<f64>,
    pub max_steps: Option<usize>,
    /// Skip profile learning and project with this profile instead.
    pub exact_profile: Option<Profile>,
    pub evaluation: EvaluationSettings,
}

impl SleeveConfig {
    pub fn new(rho: f64, target_error: f64, sigma: f64, x0: Point) -> Self {
        Self {
            rho,
            target_error,
            epsilon: 0.0,
            sigma,
            x0,
            inexact_mode: None,
            force: false,
            endpoint_tol: None,
            max_steps: None,
            exact_profile: None,
            evaluation: EvaluationSettings::default(),
        }
    }

    pub fn trace_config(&self) -> TraceConfig {
        TraceConfig {
            rho: self.rho,
            target_error: self.target_error,
            epsilon: self.epsilon,
            endpoint_tol: self.endpoint_tol,
            max_steps: self.max_steps,
            inexact_mode: self.inexact_mode.unwrap_or(self.epsilon > 0.0),
            force: self.force,
        }
    }

    fn validate(&self, dim: usize) -> Result<(), StageError> {
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(StageError::Config(format!("σ = {} must lie in (0, 1)", self.sigma)));
        }
        if self.x0.len() != dim || self.x0.iter().any(|v| !v.is_finite()) {
            return Err(StageError::Config(format!(
                "start point must be a finite point of dimension {dim}"
            )));
        }
        self.trace_config().validate()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageQueries {
    pub scan: QueryCounts,
    pub trace: QueryCounts,
    pub extend: QueryCounts,
    pub total: QueryCounts,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorSample {
    pub point: [f64; 3],
    pub dim: usize,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupError {
    pub max: f64,
    pub at: Point,
    pub evaluated: usize,
    /// Points skipped because their projection onto the curve is ambiguous.
    pub ambiguous_skipped: usize,
    #[serde(skip)]
    pub grid: Vec<ErrorSample>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SleeveReport {
    pub queries: StageQueries,
    pub eta: f64,
    pub vertices: usize,
    pub forward_steps: usize,
    pub backward_steps: usize,
    pub inexact_mode: bool,
    pub trace_warnings: Vec<String>,
    pub scan: Option<InitialScanSummary>,
    pub extension: Option<ExtensionSummary>,
    pub spline_knots: usize,
    pub spline_repairs: usize,
    pub clamped_inversions: u64,
    pub budget: ErrorBudget,
    pub hausdorff: Option<HausdorffMeasurement>,
    pub sup_error: Option<f64>,
    pub sup_error_at: Option<Point>,
    pub grid_points: usize,
    pub ambiguous_skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialScanSummary {
    pub root_t: f64,
    pub scan_samples: usize,
    pub resamples: usize,
    pub newton_iterations: usize,
    pub newton_failed: bool,
}

impl From<&InitialScan> for InitialScanSummary {
    fn from(s: &InitialScan) -> Self {
        Self {
            root_t: s.root_t,
            scan_samples: s.scan_samples,
            resamples: s.resamples,
            newton_iterations: s.refinement.map_or(0, |r| r.newton_iterations),
            newton_failed: s.refinement.is_some_and(|r| r.newton_failed),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionSummary {
    pub vertex: Point,
    pub samples: usize,
    pub newton_iterations: usize,
    pub newton_failed: bool,
}

impl From<&Extension> for ExtensionSummary {
    fn from(e: &Extension) -> Self {
        Self {
            vertex: e.vertex.clone(),
            samples: e.samples,
            newton_iterations: e.refinement.map_or(0, |r| r.newton_iterations),
            newton_failed: e.refinement.is_some_and(|r| r.newton_failed),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SleeveApproximation {
    pub chain: PolygonalChain,
    pub spline: MonotoneLinearSpline,
    pub budget: ErrorBudget,
    pub report: SleeveReport,
    pub trace: TraceResult,
    pub error_grid: Vec<ErrorSample>,
}

impl SleeveApproximation {
    /// `f̃(x) = g̃₂(dist(x, γ̃))`
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.spline.eval(self.chain.distance(x))
    }
}

/// Samples `g₂` exactly at the knots `jσ` on `[0, 1]` (no queries).
fn sampled_profile(profile: &Profile, sigma: f64) -> Result<MonotoneLinearSpline, LearnError> {
    let n = (1.0 / sigma).ceil() as usize;
    MonotoneLinearSpline::from_samples(sigma, (0..=n).map(|j| profile.g2(j as f64 * sigma)).collect())
}

/// Learns the profile and traces the curve from queries, then (optionally) compares against
/// the ground truth.
pub fn approximate_sleeve(
    oracle: &SleeveOracle,
    config: &SleeveConfig,
) -> Result<SleeveApproximation, PipelineError> {
    config.validate(oracle.dim()).map_err(at(Stage::Validate))?;
    let start = oracle.counts();
    let trace_config = config.trace_config();

    let (scan, trace_result, spline, extension, clamped, marks) = match &config.exact_profile {
        Some(profile) => {
            let projector = QueryProjector::new(oracle, ProfileInverse::Exact(profile));
            let t0 = oracle.counts();
            let tr = trace(oracle, &projector, &trace_config, &config.x0).map_err(at(Stage::Trace))?;
            let t1 = oracle.counts();
            let spline = sampled_profile(profile, config.sigma).map_err(at(Stage::Extend))?;
            (None, tr, spline, None, 0, [t0, t0, t1, t1])
        }
        None => {
            let s0 = oracle.counts();
            let scan = initial_profile_scan(oracle, &config.x0, config.sigma, config.rho)
                .map_err(at(Stage::Scan))?;
            let s1 = oracle.counts();
            let projector = QueryProjector::new(oracle, ProfileInverse::Spline(&scan.spline));
            let tr = trace(oracle, &projector, &trace_config, &config.x0).map_err(at(Stage::Trace))?;
            let s2 = oracle.counts();
            let ext = extend_profile(oracle, &tr.chain, &projector, &scan.spline, config.rho)
                .map_err(at(Stage::Extend))?;
            let s3 = oracle.counts();
            let clamped = projector.clamped();
            let spline = ext.spline.clone();
            (Some(scan), tr, spline, Some(ext), clamped, [s0, s1, s2, s3])
        }
    };
    let queries = StageQueries {
        scan: marks[1] - marks[0],
        trace: marks[2] - marks[1],
        extend: marks[3] - marks[2],
        total: marks[3] - start,
    };

    let budget = error_budget(oracle.profile(), config.target_error, config.sigma);
    let chain = trace_result.chain.clone();
    let mut report = SleeveReport {
        queries,
        eta: trace_result.eta,
        vertices: chain.vertices().len(),
        forward_steps: trace_result.forward_steps,
        backward_steps: trace_result.backward_steps,
        inexact_mode: trace_result.inexact_mode,
        trace_warnings: trace_result.warnings.clone(),
        scan: scan.as_ref().map(InitialScanSummary::from),
        extension: extension.as_ref().map(ExtensionSummary::from),
        spline_knots: spline.values().len(),
        spline_repairs: spline.repairs(),
        clamped_inversions: clamped,
        budget,
        hausdorff: None,
        sup_error: None,
        sup_error_at: None,
        grid_points: 0,
        ambiguous_skipped: 0,
    };

    let mut error_grid = Vec::new();
    if config.evaluation.enabled {
        let h = hausdorff_distance(
            PointSet::Curve {
                curve: oracle.curve().as_ref(),
                rho: config.rho,
            },
            PointSet::Chain(&chain),
            &HausdorffSettings {
                bias: config.evaluation.hausdorff_bias,
                ..HausdorffSettings::default()
            },
        );
        report.hausdorff = Some(h);
        let points = evaluation_points(oracle.dim(), config.evaluation.points);
        let sup = measure_sup_error(oracle, &chain, &spline, &points, config.evaluation.keep_grid)
            .map_err(at(Stage::Evaluate))?;
        report.sup_error = Some(sup.max);
        report.sup_error_at = Some(sup.at.clone());
        report.grid_points = sup.evaluated;
        report.ambiguous_skipped = sup.ambiguous_skipped;
        error_grid = sup.grid;
    }

    Ok(SleeveApproximation {
        chain,
        spline,
        budget,
        report,
        trace: trace_result,
        error_grid,
    })
}

/// About `n` points in `B_{1/2}`: a square grid in the plane, Halton points otherwise.
pub fn evaluation_points(dim: usize, n: usize) -> Vec<Point> {
    if dim == 2 {
        let m = ((n as f64 * 4.0 / std::f64::consts::PI).sqrt()).ceil() as usize;
        let mut pts = Vec::with_capacity(n + m);
        for i in 0..m {
            for j in 0..m {
                let p = vec![-0.5 + (i as f64 + 0.5) / m as f64, -0.5 + (j as f64 + 0.5) / m as f64];
                if norm(&p) <= 0.5 {
                    pts.push(p);
                }
            }
        }
        return pts;
    }
    const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
    assert!(dim <= PRIMES.len(), "quasi-random grid supports up to {} dimensions", PRIMES.len());
    let mut pts = Vec::with_capacity(n);
    let mut i = 1u64;
    while pts.len() < n {
        let p: Point = PRIMES[..dim].iter().map(|&b| radical_inverse(i, b) - 0.5).collect();
        if norm(&p) <= 0.5 {
            pts.push(p);
        }
        i += 1;
    }
    pts
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let (mut f, mut r) = (inv, 0.0);
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// `max |g̃₂(dist(x, γ̃)) − f(x)|` over `points`, with `f` from the noise-free ground truth.
pub fn measure_sup_error(
    oracle: &SleeveOracle,
    chain: &PolygonalChain,
    spline: &MonotoneLinearSpline,
    points: &[Point],
    keep_grid: bool,
) -> Result<SupError, LearnError> {
    let tol = oracle.projection_settings().tolerance;
    let results: Vec<Option<(f64, usize)>> = points
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let p = match oracle.true_projection(x) {
                Ok(p) => p,
                Err(OracleError::Geometry(GeometryError::NonConvergence { fallback })) => *fallback,
                Err(e) => return Err(e),
            };
            if p.is_ambiguous(tol) {
                return Ok(None);
            }
            let f = oracle.profile().g(p.distance * p.distance);
            let approx = spline.eval(chain.distance(x));
            Ok(Some(((approx - f).abs(), i)))
        })
        .collect::<Result<_, _>>()?;
    let mut sup = SupError {
        max: 0.0,
        at: points.first().cloned().unwrap_or_default(),
        evaluated: 0,
        ambiguous_skipped: 0,
        grid: Vec::new(),
    };
    for (x, r) in points.iter().zip(&results) {
        match r {
            None => sup.ambiguous_skipped += 1,
            Some((e, i)) => {
                sup.evaluated += 1;
                if *e > sup.max {
                    sup.max = *e;
                    sup.at = points[*i].clone();
                }
                if keep_grid {
                    let mut point = [0.0; 3];
                    for (dst, src) in point.iter_mut().zip(x) {
                        *dst = *src;
                    }
                    sup.grid.push(ErrorSample {
                        point,
                        dim: x.len(),
                        error: *e,
                    });
                }
            }
        }
    }
    Ok(sup)
}
