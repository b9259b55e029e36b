//! Query-based projection onto the unknown curve and the polygonal chain tracer.
//!
//! The tracer walks along the curve in both directions from a start point. Each step
//! extends the last chain segment by a step `s` and projects back onto the curve; the step
//! size is chosen so that the new chord is at most `η` long (keeping the chord error below
//! `E`) and at least `6/80·η` unless an end point was reached.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::geometry::{GeometryError, PolygonalChain};
use crate::learner::MonotoneLinearSpline;
use crate::oracle::{OracleError, Profile, SleeveOracle};
use crate::point::{axpy, dist, norm, scale, sub, Point};
use crate::step::{
    inexact_feasibility, max_step_exact, max_step_inexact, step_size_exact, step_size_inexact,
    Feasibility, StepError, MIN_STEP_RATIO,
};

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("gradient vanishes at {point:?}")]
    ZeroGradient { point: Point },
    #[error("value {value:e} exceeds the profile inverse range (max {max:e}, overshoot {overshoot:e})")]
    InverseOutOfRange { value: f64, max: f64, overshoot: f64 },
    #[error("initialization failed: all {probes} probes returned the start point")]
    InitializationFailed { probes: usize },
    #[error("no end point reached within {max_steps} steps; ρ may be overstated")]
    MaxStepsExceeded { max_steps: usize },
    #[error("step hypothesis violated: {0}")]
    StepHypothesisViolated(StepError),
    #[error("invalid trace parameters: {0}")]
    InvalidConfig(String),
    #[error(
        "inexact tracing is infeasible for ρ = {rho}, E = {target_error}, ε = {epsilon} \
         (needs {lhs:e} ≥ {rhs:e})"
    )]
    Infeasible {
        rho: f64,
        target_error: f64,
        epsilon: f64,
        lhs: f64,
        rhs: f64,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl From<StepError> for TraceError {
    fn from(e: StepError) -> Self {
        match e {
            StepError::HypothesisViolated { .. } => TraceError::StepHypothesisViolated(e),
            StepError::DomainError { .. } => TraceError::InvalidConfig(e.to_string()),
        }
    }
}

/// Anything that maps a point near the curve to (an approximation of) its foot.
pub trait Projector {
    fn project(&self, x: &[f64]) -> Result<Point, TraceError>;
}

/// Inverse of the profile used to turn `f(x)` back into a distance.
#[derive(Clone, Copy, Debug)]
pub enum ProfileInverse<'a> {
    /// True profile: `dist = √(g⁻¹(z))`.
    Exact(&'a Profile),
    /// Learned `g̃₂`: `dist = g̃₂⁻¹(z)`, clamped to the last knot when out of range.
    Spline(&'a MonotoneLinearSpline),
}

/// Projection computed from one value query and one gradient query.
#[derive(Debug)]
pub struct QueryProjector<'a> {
    oracle: &'a SleeveOracle,
    inverse: ProfileInverse<'a>,
    clamped: AtomicU64,
}

impl<'a> QueryProjector<'a> {
    pub fn new(oracle: &'a SleeveOracle, inverse: ProfileInverse<'a>) -> Self {
        Self {
            oracle,
            inverse,
            clamped: AtomicU64::new(0),
        }
    }

    /// Number of spline inversions that had to be clamped to the last knot.
    pub fn clamped(&self) -> u64 {
        self.clamped.load(Ordering::Relaxed)
    }

    fn distance(&self, z: f64) -> Result<f64, TraceError> {
        match self.inverse {
            ProfileInverse::Exact(p) => match p.inverse(z) {
                Some(t) => Ok(t.sqrt()),
                None => {
                    let max = p.g(p.domain_max);
                    Err(TraceError::InverseOutOfRange {
                        value: z,
                        max,
                        overshoot: z - max,
                    })
                }
            },
            ProfileInverse::Spline(s) => match s.invert(z) {
                Ok(t) => Ok(t),
                Err(_) if z > 0.0 => {
                    self.clamped.fetch_add(1, Ordering::Relaxed);
                    Ok(s.last_knot())
                }
                Err(_) => Ok(0.0),
            },
        }
    }
}

impl Projector for QueryProjector<'_> {
    fn project(&self, x: &[f64]) -> Result<Point, TraceError> {
        project_via_queries(self, x)
    }
}

/// `y = x − d·∇f(x)/‖∇f(x)‖` with `d` recovered from `f(x)` through the profile inverse.
pub fn project_via_queries(p: &QueryProjector<'_>, x: &[f64]) -> Result<Point, TraceError> {
    let z = p.oracle.eval(x)?;
    if z == 0.0 {
        return Ok(x.to_vec());
    }
    let d = p.distance(z)?;
    let v = match p.oracle.grad(x) {
        Ok(v) => v,
        Err(OracleError::OnCurve { .. }) => return Ok(x.to_vec()),
        Err(e) => return Err(e.into()),
    };
    let n = norm(&v);
    if !(n > 0.0) {
        return Err(TraceError::ZeroGradient { point: x.to_vec() });
    }
    Ok(axpy(x, -d / n, &v))
}

/// Projection through the oracle's ground-truth foot (noisy if the oracle injects noise).
/// Uncounted; meant for audits of the step geometry independent of the query machinery.
#[derive(Debug)]
pub struct FootProjector<'a>(pub &'a SleeveOracle);

impl Projector for FootProjector<'_> {
    fn project(&self, x: &[f64]) -> Result<Point, TraceError> {
        Ok(self.0.foot(x)?)
    }
}

/// `dist(P_prev, P_new) < tol`.
pub fn endpoint_test(prev: &[f64], new: &[f64], tol: f64) -> bool {
    dist(prev, new) < tol
}

/// Default end point tolerance, half the guaranteed minimal step.
pub fn default_endpoint_tol(eta: f64) -> f64 {
    0.5 * MIN_STEP_RATIO * eta
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceConfig {
    pub rho: f64,
    pub target_error: f64,
    pub epsilon: f64,
    /// Defaults to `6/80·η/2`.
    pub endpoint_tol: Option<f64>,
    /// Defaults to `⌈10ℓ/(6/80·η)⌉` (curve length estimate) or `10⁵`.
    pub max_steps: Option<usize>,
    pub inexact_mode: bool,
    /// Run in inexact mode even if the feasibility condition fails.
    pub force: bool,
}

impl TraceConfig {
    pub fn exact(rho: f64, target_error: f64) -> Self {
        Self {
            rho,
            target_error,
            epsilon: 0.0,
            endpoint_tol: None,
            max_steps: None,
            inexact_mode: false,
            force: false,
        }
    }

    pub fn inexact(rho: f64, target_error: f64, epsilon: f64) -> Self {
        Self {
            epsilon,
            inexact_mode: true,
            ..Self::exact(rho, target_error)
        }
    }

    pub fn validate(&self) -> Result<(), TraceError> {
        let bad = |m: String| Err(TraceError::InvalidConfig(m));
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad(format!("ρ = {} must be positive", self.rho));
        }
        if !(self.epsilon >= 0.0) {
            return bad(format!("ε = {} must be non-negative", self.epsilon));
        }
        if self.inexact_mode && self.epsilon > self.rho / 4.0 {
            return bad(format!("ε = {} exceeds ρ/4", self.epsilon));
        }
        if !(self.target_error > self.epsilon && self.target_error < self.rho) {
            return bad(format!(
                "E = {} must lie in (ε, ρ) = ({}, {})",
                self.target_error, self.epsilon, self.rho
            ));
        }
        if let Some(t) = self.endpoint_tol {
            if !(t > 0.0) {
                return bad(format!("endpoint tolerance {t} must be positive"));
            }
        }
        Ok(())
    }

    /// Maximal chord length `η` for the configured mode.
    pub fn eta(&self) -> Result<f64, TraceError> {
        Ok(if self.inexact_mode {
            max_step_inexact(self.rho, self.target_error, self.epsilon)?
        } else {
            max_step_exact(self.rho, self.target_error)?
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    /// First probe of the initialization.
    Probe,
    /// Re-probe at `0.6η` along the discovered direction.
    Reprobe,
    Forward,
    Backward,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Index of the new vertex `P_k` (negative on the backward pass).
    pub k: i64,
    pub kind: StepKind,
    /// Length of the previous chord.
    pub h: f64,
    /// Step along the previous chord direction (probe radius for initialization records).
    pub s: f64,
    /// `dist(P_{k∓1}, P_k)`.
    pub step_length: f64,
    /// Guaranteed minimal step for this `h`.
    pub lower_bound: f64,
    pub vertex: Point,
    pub direction: Point,
    /// The end point test fired on this step.
    pub endpoint_flag: bool,
    /// This step produced or confirmed the last vertex of its direction; the lower step
    /// bound does not apply.
    pub terminal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceResult {
    pub chain: PolygonalChain,
    pub steps: Vec<StepRecord>,
    pub forward_steps: usize,
    pub backward_steps: usize,
    pub terminated: bool,
    pub eta: f64,
    pub endpoint_tol: f64,
    pub inexact_mode: bool,
    pub feasibility: Option<Feasibility>,
    /// Set when an infeasible inexact run was forced.
    pub warnings: Vec<String>,
}

/// Finds `P0 = proj(x0)` and a distinct second vertex `P1`.
///
/// Probes `P0 ± (η/2)eₙ` for `n = 1, …, d`; after the first success, re-probes at `0.6η`
/// along the discovered direction so that `6/80·η ≤ dist(P0, P1) ≤ η` holds. Returns the
/// vertices and the probe records.
pub fn initialize(
    projector: &dyn Projector,
    x0: &[f64],
    eta: f64,
    endpoint_tol: f64,
) -> Result<(Point, Point, Vec<StepRecord>), TraceError> {
    let p0 = projector.project(x0)?;
    let d = x0.len();
    let mut records = Vec::new();
    for n in 0..d {
        for sign in [1.0, -1.0] {
            let mut v = vec![0.0; d];
            v[n] = sign * 0.5 * eta;
            let p1 = projector.project(&axpy(&p0, 1.0, &v))?;
            let step = dist(&p0, &p1);
            records.push(StepRecord {
                k: 1,
                kind: StepKind::Probe,
                h: 0.0,
                s: 0.5 * eta,
                step_length: step,
                lower_bound: 0.0,
                vertex: p1.clone(),
                direction: scale(&v, 2.0 / eta),
                endpoint_flag: step < endpoint_tol,
                terminal: false,
            });
            if step < endpoint_tol {
                continue;
            }
            let u = scale(&sub(&p1, &p0), 1.0 / step);
            let p1b = projector.project(&axpy(&p0, 0.6 * eta, &u))?;
            let step_b = dist(&p0, &p1b);
            records.push(StepRecord {
                k: 1,
                kind: StepKind::Reprobe,
                h: 0.0,
                s: 0.6 * eta,
                step_length: step_b,
                lower_bound: MIN_STEP_RATIO * eta,
                vertex: p1b.clone(),
                direction: u,
                endpoint_flag: step_b < endpoint_tol,
                terminal: false,
            });
            let in_window = |s: f64| s >= MIN_STEP_RATIO * eta && s <= eta;
            let p1 = if in_window(step_b) || !in_window(step) && step_b >= step {
                p1b
            } else {
                p1
            };
            return Ok((p0, p1, records));
        }
    }
    Err(TraceError::InitializationFailed { probes: 2 * d })
}

struct Walk<'a> {
    projector: &'a dyn Projector,
    config: &'a TraceConfig,
    eta: f64,
    endpoint_tol: f64,
    max_steps: usize,
}

impl Walk<'_> {
    /// Extends `[prev, cur]` until an end point is found. Returns the new vertices in order.
    fn run(
        &self,
        mut prev: Point,
        mut cur: Point,
        kind: StepKind,
        budget_used: &mut usize,
        records: &mut Vec<StepRecord>,
    ) -> Result<Vec<Point>, TraceError> {
        let sign: i64 = if kind == StepKind::Backward { -1 } else { 1 };
        let mut k: i64 = if kind == StepKind::Backward { -1 } else { 2 };
        let mut out = Vec::new();
        let first_record = records.len();
        loop {
            if *budget_used >= self.max_steps {
                return Err(TraceError::MaxStepsExceeded {
                    max_steps: self.max_steps,
                });
            }
            *budget_used += 1;
            let h = dist(&prev, &cur);
            let (s, lower_bound) = if self.config.inexact_mode {
                let st = step_size_inexact(self.config.rho, self.eta, h, self.config.epsilon)?;
                (st.s, st.lower_bound)
            } else {
                (
                    step_size_exact(self.config.rho, self.eta, h.min(self.eta))?,
                    MIN_STEP_RATIO * self.eta,
                )
            };
            let v = scale(&sub(&cur, &prev), 1.0 / h);
            let next = self.projector.project(&axpy(&cur, s, &v))?;
            let step = dist(&cur, &next);
            // Inexact mode: a step below the guaranteed minimum marks an approximate end point.
            let tol = if self.config.inexact_mode {
                self.endpoint_tol.max(lower_bound)
            } else {
                self.endpoint_tol
            };
            let at_end = endpoint_test(&cur, &next, tol);
            records.push(StepRecord {
                k,
                kind,
                h,
                s,
                step_length: step,
                lower_bound,
                vertex: next.clone(),
                direction: v,
                endpoint_flag: at_end,
                terminal: at_end,
            });
            if at_end {
                // A genuine short step onto the end point is kept; a repeat of the last
                // vertex is not.
                if step > 1e-3 * tol {
                    out.push(next);
                } else if records.len() - first_record >= 2 {
                    let n = records.len();
                    records[n - 2].terminal = true;
                }
                return Ok(out);
            }
            out.push(next.clone());
            prev = std::mem::replace(&mut cur, next);
            k += sign;
        }
    }
}

/// Traces the curve through the projector starting near `x0`.
///
/// The chain is `P_{−m+1}, …, P_{n−1}`: both passes stop when the projection no longer
/// moves (end point test), and short final steps onto an end point are kept.
pub fn trace(
    oracle: &SleeveOracle,
    projector: &dyn Projector,
    config: &TraceConfig,
    x0: &[f64],
) -> Result<TraceResult, TraceError> {
    config.validate()?;
    let mut warnings = Vec::new();
    let feasibility = if config.inexact_mode {
        let f = inexact_feasibility(config.rho, config.target_error, config.epsilon)?;
        if !f.feasible {
            let err = TraceError::Infeasible {
                rho: config.rho,
                target_error: config.target_error,
                epsilon: config.epsilon,
                lhs: f.lhs,
                rhs: f.rhs,
            };
            if !config.force {
                return Err(err);
            }
            warnings.push(format!("forced: {err}"));
        }
        Some(f)
    } else {
        None
    };
    let eta = config.eta()?;
    if !(eta > 0.0) {
        return Err(TraceError::InvalidConfig(format!("maximal step η = {eta} is not positive")));
    }
    let endpoint_tol = config.endpoint_tol.unwrap_or_else(|| match feasibility {
        Some(f) if f.feasible && config.epsilon > 0.0 => f.h_tilde / 2.0,
        _ => default_endpoint_tol(eta),
    });
    let max_steps = config.max_steps.unwrap_or_else(|| {
        let len = oracle.curve().length_estimate();
        if len.is_finite() && len > 0.0 {
            (10.0 * len / (MIN_STEP_RATIO * eta)).ceil() as usize
        } else {
            100_000
        }
    });

    let (p0, p1, mut steps) = initialize(projector, x0, eta, endpoint_tol)?;
    let walk = Walk {
        projector,
        config,
        eta,
        endpoint_tol,
        max_steps,
    };
    let mut used = 0;
    let forward = walk.run(p0.clone(), p1.clone(), StepKind::Forward, &mut used, &mut steps)?;
    let backward = walk.run(p1.clone(), p0.clone(), StepKind::Backward, &mut used, &mut steps)?;

    let mut vertices: Vec<Point> = backward.iter().rev().cloned().collect();
    vertices.push(p0);
    vertices.push(p1);
    vertices.extend(forward.iter().cloned());
    // Noisy projections can land two vertices on the same point at an end.
    vertices.dedup_by(|a, b| a == b);
    Ok(TraceResult {
        chain: PolygonalChain::new(vertices)?,
        forward_steps: forward.len() + 1,
        backward_steps: backward.len(),
        steps,
        terminated: true,
        eta,
        endpoint_tol,
        inexact_mode: config.inexact_mode,
        feasibility,
        warnings,
    })
}
