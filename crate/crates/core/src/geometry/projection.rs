//! Ground-truth projection onto an analytic curve.
//!
//! Minimizes `F(t) = ‖x − γ(t)‖²` by sampling `F` on a uniform parameter grid and
//! polishing every discrete local minimum with a bracketed Newton–Raphson iteration on
//! `F′`. End points enter the candidate list when they are constrained local minimizers.

use serde::{Deserialize, Serialize};

use super::curve::ParametricCurve;
use super::GeometryError;
use crate::point::{dist, dot, Point};

pub const MIN_SEEDS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionSettings {
    /// Number of uniform grid intervals used to seed Newton.
    pub seeds: usize,
    /// Stopping tolerance on `|F′(t)|`.
    pub newton_tol: f64,
    pub max_iter: usize,
    /// Distance tolerance for ambiguity and on-curve decisions.
    pub tolerance: f64,
}

impl Default for ProjectionSettings {
    fn default() -> Self {
        Self {
            seeds: MIN_SEEDS,
            newton_tol: 1e-12,
            max_iter: 50,
            tolerance: 1e-9,
        }
    }
}

impl ProjectionSettings {
    /// Seed count `max(64, ⌈8 L / ρ⌉)` where `L = max‖γ′‖ · (t_max − t_min)` bounds the
    /// arclength, so neighbouring seeds are never more than `ρ/8` apart along the curve.
    pub fn for_curve(curve: &dyn ParametricCurve, rho: f64) -> Self {
        let (a, b) = curve.domain();
        let bound = curve.max_speed() * (b - a);
        let seeds = ((8.0 * bound / rho).ceil() as usize).max(MIN_SEEDS);
        Self {
            seeds,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub t: f64,
    pub foot: Point,
    pub distance: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub t: f64,
    pub foot: Point,
    pub distance: f64,
    pub converged: bool,
    /// Distinct local minimizers found from the seed grid, nearest first.
    pub candidates: Vec<Candidate>,
}

impl Projection {
    /// `true` if a second local minimizer lies farther than `10·tol` from the best foot
    /// while being equally distant from the query point (up to `tol`).
    pub fn is_ambiguous(&self, tol: f64) -> bool {
        self.candidates.iter().skip(1).any(|c| {
            (c.distance - self.distance).abs() <= tol && dist(&c.foot, &self.foot) > 10.0 * tol
        })
    }
}

struct Evaluator<'a> {
    curve: &'a dyn ParametricCurve,
    x: &'a [f64],
    p: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    diff: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    fn new(curve: &'a dyn ParametricCurve, x: &'a [f64]) -> Self {
        let d = curve.dim();
        Self {
            curve,
            x,
            p: vec![0.0; d],
            d1: vec![0.0; d],
            d2: vec![0.0; d],
            diff: vec![0.0; d],
        }
    }

    fn value(&mut self, t: f64) -> f64 {
        self.curve.position_into(t, &mut self.p);
        self.x
            .iter()
            .zip(&self.p)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// `(F′(t), F″(t))` with `F′ = −2⟨x−γ, γ′⟩`, `F″ = 2‖γ′‖² − 2⟨x−γ, γ″⟩`.
    fn derivatives(&mut self, t: f64) -> (f64, f64) {
        self.curve.position_into(t, &mut self.p);
        self.curve.first_derivative_into(t, &mut self.d1);
        self.curve.second_derivative_into(t, &mut self.d2);
        for i in 0..self.x.len() {
            self.diff[i] = self.x[i] - self.p[i];
        }
        let f1 = -2.0 * dot(&self.diff, &self.d1);
        let f2 = 2.0 * dot(&self.d1, &self.d1) - 2.0 * dot(&self.diff, &self.d2);
        (f1, f2)
    }

    fn candidate(&mut self, t: f64, converged: bool) -> Candidate {
        let distance = self.value(t).sqrt();
        Candidate {
            t,
            foot: self.p.clone(),
            distance,
            converged,
        }
    }
}

/// Safeguarded Newton on `F′` inside `[lo, hi]`, started at `t0`.
fn polish(
    ev: &mut Evaluator<'_>,
    mut lo: f64,
    mut hi: f64,
    t0: f64,
    settings: &ProjectionSettings,
) -> (f64, bool) {
    let (g_lo, _) = ev.derivatives(lo);
    let (g_hi, _) = ev.derivatives(hi);
    if g_lo.abs() <= settings.newton_tol {
        return (lo, true);
    }
    if g_hi.abs() <= settings.newton_tol {
        return (hi, true);
    }
    if !(g_lo < 0.0 && g_hi > 0.0) {
        // No interior stationary point detected in the bracket.
        return (t0, false);
    }
    let mut t = t0;
    for _ in 0..settings.max_iter {
        let (g, h) = ev.derivatives(t);
        if g.abs() <= settings.newton_tol {
            return (t, true);
        }
        if g < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        if hi - lo <= 4.0 * f64::EPSILON * (1.0 + t.abs()) {
            return (t, true);
        }
        let newton = t - g / h;
        t = if h > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    let (g, _) = ev.derivatives(t);
    (t, g.abs() <= settings.newton_tol)
}

/// Nearest point of `curve` to `x`.
///
/// Fails with [`GeometryError::NonConvergence`] when the best candidate did not reach the
/// Newton tolerance; the error carries the best available candidate as fallback.
pub fn project_to_curve(
    curve: &dyn ParametricCurve,
    x: &[f64],
    settings: &ProjectionSettings,
) -> Result<Projection, GeometryError> {
    if x.len() != curve.dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: curve.dim(),
            got: x.len(),
        });
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    let (a, b) = curve.domain();
    let n = settings.seeds.max(2);
    let grid: Vec<f64> = (0..=n)
        .map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 })
        .collect();
    let mut ev = Evaluator::new(curve, x);
    let values: Vec<f64> = grid.iter().map(|&t| ev.value(t)).collect();

    // End points count only where F does not decrease into the domain; otherwise a
    // slightly off-axis query would report the end point and the nearby interior
    // minimizer as two equidistant feet.
    let mut candidates = Vec::with_capacity(4);
    if ev.derivatives(a).0 >= -settings.newton_tol {
        candidates.push(ev.candidate(a, true));
    }
    if ev.derivatives(b).0 <= settings.newton_tol {
        candidates.push(ev.candidate(b, true));
    }
    for i in 0..=n {
        let left = if i > 0 { values[i - 1] } else { f64::INFINITY };
        let right = if i < n { values[i + 1] } else { f64::INFINITY };
        if values[i] > left || values[i] > right {
            continue;
        }
        let lo = grid[i.saturating_sub(1)];
        let hi = grid[(i + 1).min(n)];
        let (t, converged) = polish(&mut ev, lo, hi, grid[i], settings);
        // A grid end point with no interior stationary point is a constrained minimizer.
        let converged = converged || ((i == 0 || i == n) && t == grid[i]);
        candidates.push(ev.candidate(t, converged));
    }

    candidates.sort_by(|p, q| p.distance.total_cmp(&q.distance));
    let mut unique: Vec<Candidate> = Vec::with_capacity(candidates.len());
    for c in candidates {
        if let Some(u) = unique
            .iter_mut()
            .find(|u| dist(&u.foot, &c.foot) <= 10.0 * settings.tolerance)
        {
            u.converged |= c.converged && (c.distance - u.distance).abs() <= settings.tolerance;
        } else {
            unique.push(c);
        }
    }
    let best = unique[0].clone();
    let projection = Projection {
        t: best.t,
        foot: best.foot,
        distance: best.distance,
        converged: best.converged,
        candidates: unique,
    };
    if projection.converged {
        Ok(projection)
    } else {
        Err(GeometryError::NonConvergence {
            fallback: Box::new(projection),
        })
    }
}
