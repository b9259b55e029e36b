//! Learning the profile `g₂(t) = g(t²)` as a linear spline and the end-to-end pipeline.

mod budget;
mod pipeline;
mod scan;
mod spline;

pub use budget::{error_budget, ErrorBudget, BUDGET_GRID};
pub use pipeline::{
    approximate_sleeve, evaluation_points, measure_sup_error, ErrorSample, EvaluationSettings,
    PipelineError, SleeveApproximation, SleeveConfig, SleeveReport, Stage, StageError,
    StageQueries, SupError,
};
pub use scan::{
    extend_profile, initial_profile_scan, refine_ray_root, Extension, InitialScan, RootRefinement,
    NEWTON_MAX_ITER, NEWTON_TOL,
};
pub use spline::MonotoneLinearSpline;

use crate::oracle::OracleError;
use crate::point::Point;
use crate::tracer::TraceError;

#[derive(Debug, thiserror::Error)]
pub enum LearnError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("f does not decrease along −∇f within {steps} samples")]
    NoDescent { steps: usize },
    #[error("root refinement failed: {0}")]
    NewtonFailed(String),
    #[error("ambiguity point on the extension ray at {point:?}")]
    AmbiguityOnRay { point: Point },
    #[error("value {value:e} outside the spline range (max {max:e}, overshoot {overshoot:e})")]
    InverseOutOfRange { value: f64, max: f64, overshoot: f64 },
    #[error("invalid spline: {0}")]
    InvalidSpline(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
