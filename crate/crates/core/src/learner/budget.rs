use serde::{Deserialize, Serialize};

use crate::oracle::Profile;

/// Grid size for the suprema over `[0, 1]`.
pub const BUDGET_GRID: usize = 10_000;

/// `sup |f − f̃| ≤ M₁E + M₂σ²/8` on `B_{1/2}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    /// `sup 2|t ġ(t²)|`
    pub m1: f64,
    /// `sup |ġ(t²) + 2t² g̈(t²)|`
    pub m2: f64,
    pub target_error: f64,
    pub sigma: f64,
    pub bound: f64,
}

pub fn error_budget(profile: &Profile, target_error: f64, sigma: f64) -> ErrorBudget {
    error_budget_on_grid(profile, target_error, sigma, BUDGET_GRID)
}

pub(crate) fn error_budget_on_grid(
    profile: &Profile,
    target_error: f64,
    sigma: f64,
    n: usize,
) -> ErrorBudget {
    let (mut m1, mut m2) = (0.0f64, 0.0f64);
    for i in 0..n {
        let t = i as f64 / (n - 1) as f64;
        let s = t * t;
        m1 = m1.max((2.0 * t * profile.g_dot(s)).abs());
        m2 = m2.max((profile.g_dot(s) + 2.0 * s * profile.g_ddot(s)).abs());
    }
    ErrorBudget {
        m1,
        m2,
        target_error,
        sigma,
        bound: m1 * target_error + m2 * sigma * sigma / 8.0,
    }
}
