//! Sleeve functions `f(x) = g(dist(x, γ)²)` with counted value and gradient queries.

mod catalog;
mod profile;
mod sleeve;

pub use catalog::{case_by_name, default_start, experiment_catalog, knot_scale, ExperimentCase, CASE_NAMES};
pub use profile::Profile;
pub use sleeve::{GradientMode, ProjectionNoise, QueryCounts, SleeveOracle, ON_CURVE_TOL};

use crate::geometry::GeometryError;
use crate::point::Point;

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("query point lies on the curve (distance {distance:e}); gradient direction undefined")]
    OnCurve { distance: f64 },
    #[error("query point {point:?} has several nearest curve points")]
    AmbiguitySuspected { point: Point },
    #[error("expected a point of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("query point is not finite")]
    NonFinite,
}
