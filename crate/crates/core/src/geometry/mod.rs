//! Curves, polygonal chains, projections, Hausdorff distances and separation checks.

pub mod chain;
pub mod curve;
pub mod hausdorff;
pub mod projection;
pub mod separation;

use thiserror::Error;

pub use chain::{ChainProjection, PolygonalChain};
pub use curve::{
    curvature, tangential_cone_direction, ArchimedeanSpiral, Bezier, CircleArc, CurveRef,
    HalfEllipse, ParametricCurve, Scaled, Segment, SpaceKnot, TangentCone,
};
pub use hausdorff::{hausdorff_distance, HausdorffMeasurement, HausdorffSettings, PointSet};
pub use projection::{project_to_curve, Candidate, Projection, ProjectionSettings};
pub use separation::{
    estimate_separation, verify_separation, SeparationReport, SeparationSettings, WorstPair,
};

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("projection did not converge (best candidate at t = {}, distance {})", .fallback.t, .fallback.distance)]
    NonConvergence { fallback: Box<Projection> },
    #[error("separation radius must be positive, got {0}")]
    InvalidRho(f64),
    #[error("invalid sampling: {0}")]
    InvalidSampling(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("degenerate polygonal chain: {0}")]
    DegenerateChain(String),
    #[error("non-finite query point")]
    NonFinite,
}
