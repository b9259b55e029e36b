//! Closed-form step geometry for the curve tracer.
//!
//! Chord error bounds, the maximal step `η`, the step size `s*` that keeps the next vertex
//! within `[6/80·η, η]` of the current one, and the inflated quantities used when the
//! projection onto the curve is only accurate up to `ε`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Guaranteed relative minimal step `6/80`.
pub const MIN_STEP_RATIO: f64 = 6.0 / 80.0;
/// Inflation factor `86/80` of the uncertainty in the inexact lower step bound.
pub const UNCERTAINTY_RATIO: f64 = 86.0 / 80.0;

const SQRT_SLACK: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StepError {
    #[error("{op}: argument outside its domain ({detail})")]
    DomainError { op: &'static str, detail: String },
    #[error("step hypothesis violated: {inequality}")]
    HypothesisViolated { inequality: String },
}

fn domain(op: &'static str, detail: impl Into<String>) -> StepError {
    StepError::DomainError {
        op,
        detail: detail.into(),
    }
}

fn guarded_sqrt(op: &'static str, arg: f64) -> Result<f64, StepError> {
    if arg >= 0.0 {
        Ok(arg.sqrt())
    } else if arg > -SQRT_SLACK {
        Ok(0.0)
    } else {
        Err(domain(op, format!("negative square-root argument {arg:e}")))
    }
}

fn positive(op: &'static str, name: &str, v: f64) -> Result<(), StepError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(domain(op, format!("{name} = {v} must be positive")))
    }
}

/// Largest distance between a ρ-separated arc and its chord of length `h`:
/// `ρ − √(ρ² − h²/4)`, valid for `0 ≤ h < 2ρ`.
pub fn chord_error_bound(rho: f64, h: f64) -> Result<f64, StepError> {
    const OP: &str = "chord_error_bound";
    positive(OP, "rho", rho)?;
    if !(0.0..2.0 * rho).contains(&h) {
        return Err(domain(OP, format!("h = {h} outside [0, 2ρ = {})", 2.0 * rho)));
    }
    Ok(rho - guarded_sqrt(OP, rho * rho - h * h / 4.0)?)
}

/// Chord error when both chord ends are only known up to `ε`:
/// `ρ + ε − √(ρ² − (h + 2ε)²/4)`, valid for `h < 2(ρ − ε)`.
pub fn chord_error_bound_inexact(rho: f64, h: f64, epsilon: f64) -> Result<f64, StepError> {
    const OP: &str = "chord_error_bound_inexact";
    positive(OP, "rho", rho)?;
    if !(epsilon >= 0.0) {
        return Err(domain(OP, format!("epsilon = {epsilon} must be non-negative")));
    }
    if !(h >= 0.0 && h < 2.0 * (rho - epsilon)) {
        return Err(domain(
            OP,
            format!("h = {h} outside [0, 2(ρ − ε) = {})", 2.0 * (rho - epsilon)),
        ));
    }
    let w = h + 2.0 * epsilon;
    Ok(rho + epsilon - guarded_sqrt(OP, rho * rho - w * w / 4.0)?)
}

/// `η = min{ρ, 2√(ρ² − (ρ − E)²)}`; chords of length `η` deviate at most `E`.
pub fn max_step_exact(rho: f64, target_error: f64) -> Result<f64, StepError> {
    const OP: &str = "max_step_exact";
    positive(OP, "rho", rho)?;
    if !(target_error > 0.0 && target_error < rho) {
        return Err(domain(OP, format!("E = {target_error} outside (0, ρ = {rho})")));
    }
    let r = rho - target_error;
    Ok(rho.min(2.0 * guarded_sqrt(OP, rho * rho - r * r)?))
}

/// `s* = (η² + 2ηρ) / (2ρ + 2η + h)`, the unique solution of
/// `√(ρ² + hs + s²) = η + ρ − s`.
///
/// Accepts `0 ≤ h ≤ η ≤ ρ`; `η = ρ` is the boundary value produced by [`max_step_exact`].
pub fn step_size_exact(rho: f64, eta: f64, h: f64) -> Result<f64, StepError> {
    const OP: &str = "step_size_exact";
    positive(OP, "rho", rho)?;
    positive(OP, "eta", eta)?;
    if eta > rho {
        return Err(domain(OP, format!("eta = {eta} exceeds rho = {rho}")));
    }
    if !(h >= 0.0 && h <= eta) {
        return Err(domain(OP, format!("h = {h} outside [0, η = {eta}]")));
    }
    Ok(s_star(rho, eta, h))
}

fn s_star(rho: f64, eta: f64, h: f64) -> f64 {
    (eta * eta + 2.0 * eta * rho) / (2.0 * rho + 2.0 * eta + h)
}

/// Residual `√(ρ² + hs + s²) − (η + ρ − s)` of the equation that defines `s*`.
pub fn step_equation_residual(rho: f64, eta: f64, h: f64, s: f64) -> f64 {
    (rho * rho + h * s + s * s).sqrt() - (eta + rho - s)
}

/// `δ_h(ε) = (√32 ρ/h + 2√2) ε`, the growth of the maximal projection distance when the
/// last two vertices are only known up to `ε`.
pub fn delta_h(rho: f64, h: f64, epsilon: f64) -> Result<f64, StepError> {
    const OP: &str = "delta_h";
    positive(OP, "h", h)?;
    positive(OP, "rho", rho)?;
    if !(epsilon >= 0.0) {
        return Err(domain(OP, format!("epsilon = {epsilon} must be non-negative")));
    }
    Ok((32f64.sqrt() * rho / h + 2.0 * 2f64.sqrt()) * epsilon)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InexactStep {
    /// `η̃ = η − δ_h(ε) − ε`
    pub eta_tilde: f64,
    /// `s* = (η̃² + 2η̃ρ) / (2ρ + 2η̃ + h)`
    pub s: f64,
    pub delta_h: f64,
    /// `6/80·η − 86/80·(δ_h + ε)`, the guaranteed minimal step.
    pub lower_bound: f64,
}

/// Step size under projection error `ε`.
///
/// For `ε > 0` the hypotheses `√10 (h + 2ε)/2 ≤ ρ`, `ε ≤ h/4` and `s* ≥ ε` are enforced;
/// at `ε = 0` all inflation terms vanish and the result equals [`step_size_exact`].
pub fn step_size_inexact(
    rho: f64,
    eta: f64,
    h: f64,
    epsilon: f64,
) -> Result<InexactStep, StepError> {
    const OP: &str = "step_size_inexact";
    if epsilon == 0.0 {
        let s = step_size_exact(rho, eta, h)?;
        return Ok(InexactStep {
            eta_tilde: eta,
            s,
            delta_h: 0.0,
            lower_bound: MIN_STEP_RATIO * eta,
        });
    }
    positive(OP, "rho", rho)?;
    positive(OP, "eta", eta)?;
    if !(epsilon > 0.0) {
        return Err(domain(OP, format!("epsilon = {epsilon} must be non-negative")));
    }
    if !(h > 0.0 && h <= eta) {
        return Err(domain(OP, format!("h = {h} outside (0, η = {eta}]")));
    }
    let lhs = 10f64.sqrt() * (h + 2.0 * epsilon) / 2.0;
    if lhs > rho {
        return Err(StepError::HypothesisViolated {
            inequality: format!("√10·(h + 2ε)/2 = {lhs} ≤ ρ = {rho}"),
        });
    }
    if epsilon > h / 4.0 {
        return Err(StepError::HypothesisViolated {
            inequality: format!("ε = {epsilon} ≤ h/4 = {}", h / 4.0),
        });
    }
    let dh = delta_h(rho, h, epsilon)?;
    let eta_tilde = eta - dh - epsilon;
    if !(eta_tilde > 0.0) {
        return Err(StepError::HypothesisViolated {
            inequality: format!("η̃ = η − δ_h − ε = {eta_tilde} > 0"),
        });
    }
    let s = s_star(rho, eta_tilde, h);
    if s < epsilon {
        return Err(StepError::HypothesisViolated {
            inequality: format!("s* = {s} ≥ ε = {epsilon}"),
        });
    }
    Ok(InexactStep {
        eta_tilde,
        s,
        delta_h: dh,
        lower_bound: MIN_STEP_RATIO * eta - UNCERTAINTY_RATIO * (dh + epsilon),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    pub eta: f64,
    /// `6/80·η − 86/80·(2√2 + 1)·ε`
    pub lhs: f64,
    /// `(86/20·√32·ρε)^{1/2}`
    pub rhs: f64,
    pub feasible: bool,
    /// Centre of the admissible interval, `lhs/2`; only meaningful when feasible.
    pub h_tilde: f64,
}

/// Maximal step for the inexact tracer:
/// `η = 2·min{ρ/√10, √(ρ² − (ρ + ε − E)²)} − 2ε`.
///
/// Both terms keep `h + 2ε` inside the limits required by the inexact step guarantee
/// (`√10 (h + 2ε)/2 ≤ ρ`) and the inexact chord bound (`ρ + ε − √(ρ² − (h+2ε)²/4) ≤ E`).
pub fn max_step_inexact(rho: f64, target_error: f64, epsilon: f64) -> Result<f64, StepError> {
    const OP: &str = "max_step_inexact";
    positive(OP, "rho", rho)?;
    if !(epsilon >= 0.0 && epsilon <= rho / 4.0) {
        return Err(domain(OP, format!("epsilon = {epsilon} outside [0, ρ/4]")));
    }
    if !(target_error > epsilon && target_error < rho) {
        return Err(domain(
            OP,
            format!("E = {target_error} outside (ε = {epsilon}, ρ = {rho})"),
        ));
    }
    let r = rho + epsilon - target_error;
    let chord = guarded_sqrt(OP, rho * rho - r * r)?;
    Ok(2.0 * (rho / 10f64.sqrt()).min(chord) - 2.0 * epsilon)
}

/// Evaluates the extra hypothesis of the inexact termination guarantee.
pub fn inexact_feasibility(
    rho: f64,
    target_error: f64,
    epsilon: f64,
) -> Result<Feasibility, StepError> {
    let eta = max_step_inexact(rho, target_error, epsilon)?;
    let lhs = MIN_STEP_RATIO * eta - UNCERTAINTY_RATIO * (2.0 * 2f64.sqrt() + 1.0) * epsilon;
    let rhs = (86.0 / 20.0 * 32f64.sqrt() * rho * epsilon).sqrt();
    Ok(Feasibility {
        eta,
        lhs,
        rhs,
        feasible: eta > 0.0 && lhs >= rhs,
        h_tilde: 0.5 * lhs,
    })
}

/// Largest `ε` for which [`inexact_feasibility`] holds.
///
/// While the `ρ/√10` term defines `η`, the condition reads `A − Bε ≥ √(Cε)`, a quadratic in
/// `√ε` with root `√ε = (−√C + √(C + 4AB)) / 2B`. If the chord term is active at that root
/// the monotone condition is bisected instead.
pub fn max_feasible_epsilon(rho: f64, target_error: f64) -> Result<f64, StepError> {
    const OP: &str = "max_feasible_epsilon";
    positive(OP, "rho", rho)?;
    if !(target_error > 0.0 && target_error < rho) {
        return Err(domain(OP, format!("E = {target_error} outside (0, ρ = {rho})")));
    }
    let a = MIN_STEP_RATIO * 2.0 * rho / 10f64.sqrt();
    let b = 2.0 * MIN_STEP_RATIO + UNCERTAINTY_RATIO * (2.0 * 2f64.sqrt() + 1.0);
    let c = 86.0 / 20.0 * 32f64.sqrt() * rho;
    let u = (-(c.sqrt()) + (c + 4.0 * a * b).sqrt()) / (2.0 * b);
    let cap = (rho / 4.0).min(target_error);
    let closed = u * u;
    let r = rho + closed - target_error;
    let first_term_active = closed < cap && rho / 10f64.sqrt() <= (rho * rho - r * r).max(0.0).sqrt();
    if first_term_active {
        return Ok(closed);
    }
    let ok = |eps: f64| {
        inexact_feasibility(rho, target_error, eps)
            .map(|f| f.feasible)
            .unwrap_or(false)
    };
    let (mut lo, mut hi) = (0.0, cap);
    if ok(hi) {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
