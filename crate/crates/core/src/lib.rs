//! Recovery of curve-based sleeve functions `f(x) = g(dist(x, γ)²)` from value and
//! gradient queries.
//!
//! The crate is organised bottom up:
//!
//! * [`geometry`]: analytic curves, polygonal chains, ground-truth projection, Hausdorff
//!   distances and sampled ρ-separation checks.
//! * [`oracle`]: profiles, the query oracle and the experiment catalog.
//! * [`step`]: closed-form chord bounds and step sizes for exact and inexact projections.
//! * [`tracer`]: query-based projection and the polygonal chain tracer.
//! * [`learner`]: profile learning, the end-to-end pipeline and its error budget.
//! * [`export`]: CSV and JSON writers for the run artifacts.

pub mod export;
pub mod geometry;
pub mod learner;
pub mod oracle;
pub mod point;
pub mod step;
pub mod tracer;
