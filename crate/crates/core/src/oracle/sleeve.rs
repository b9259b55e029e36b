use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{OracleError, Profile};
use crate::geometry::{project_to_curve, CurveRef, Projection, ProjectionSettings};
use crate::point::{dist, is_finite, Point};

/// Distance below which a query point counts as lying on the curve.
pub const ON_CURVE_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum GradientMode {
    Exact,
    /// `[∇f(x)]ₙ ≈ (f(x + τeₙ) − f(x − τeₙ)) / 2τ`
    SymmetricDifference { tau: f64 },
}

/// Perturbation of the projection foot: uniform direction, magnitude uniform in `[0, ε]`.
///
/// The perturbation is a deterministic function of the seed and the query point, so value
/// and gradient queries at the same point see the same foot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionNoise {
    pub epsilon: f64,
    pub seed: u64,
}

impl ProjectionNoise {
    fn offset(&self, x: &[f64]) -> Point {
        let mut h = self.seed ^ 0x243f_6a88_85a3_08d3;
        for v in x {
            h = splitmix(h ^ v.to_bits());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(h);
        let d = x.len();
        let dir = loop {
            let c: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n2: f64 = c.iter().map(|v| v * v).sum();
            if n2 > 1e-12 && n2 <= 1.0 {
                let n = n2.sqrt();
                break c.into_iter().map(|v| v / n).collect::<Vec<_>>();
            }
        };
        let r = self.epsilon * rng.gen::<f64>();
        dir.into_iter().map(|v| v * r).collect()
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryCounts {
    pub value_queries: u64,
    pub gradient_queries: u64,
}

impl std::ops::Sub for QueryCounts {
    type Output = QueryCounts;
    fn sub(self, rhs: Self) -> Self {
        QueryCounts {
            value_queries: self.value_queries - rhs.value_queries,
            gradient_queries: self.gradient_queries - rhs.gradient_queries,
        }
    }
}

impl std::ops::Add for QueryCounts {
    type Output = QueryCounts;
    fn add(self, rhs: Self) -> Self {
        QueryCounts {
            value_queries: self.value_queries + rhs.value_queries,
            gradient_queries: self.gradient_queries + rhs.gradient_queries,
        }
    }
}

/// Query access to `f(x) = g(dist(x, γ)²)` for a known curve and profile.
///
/// `eval` and `grad` are the only counted operations; the `true_*` and `foot` accessors are
/// ground-truth helpers for verification and are not counted.
#[derive(Debug)]
pub struct SleeveOracle {
    curve: CurveRef,
    profile: Profile,
    projection: ProjectionSettings,
    gradient_mode: GradientMode,
    noise: Option<ProjectionNoise>,
    value_queries: AtomicU64,
    gradient_queries: AtomicU64,
}

impl SleeveOracle {
    /// `rho` is the separation radius used to size the projection seed grid.
    pub fn new(curve: CurveRef, profile: Profile, rho: f64) -> Self {
        let projection = ProjectionSettings::for_curve(curve.as_ref(), rho);
        Self {
            curve,
            profile,
            projection,
            gradient_mode: GradientMode::Exact,
            noise: None,
            value_queries: AtomicU64::new(0),
            gradient_queries: AtomicU64::new(0),
        }
    }

    pub fn with_gradient_mode(mut self, mode: GradientMode) -> Self {
        self.gradient_mode = mode;
        self
    }

    pub fn with_projection_noise(mut self, epsilon: f64, seed: u64) -> Self {
        self.noise = (epsilon > 0.0).then_some(ProjectionNoise { epsilon, seed });
        self
    }

    pub fn curve(&self) -> &CurveRef {
        &self.curve
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn dim(&self) -> usize {
        self.curve.dim()
    }

    pub fn gradient_mode(&self) -> GradientMode {
        self.gradient_mode
    }

    pub fn projection_noise(&self) -> Option<ProjectionNoise> {
        self.noise
    }

    pub fn projection_settings(&self) -> &ProjectionSettings {
        &self.projection
    }

    pub fn counts(&self) -> QueryCounts {
        QueryCounts {
            value_queries: self.value_queries.load(Ordering::Relaxed),
            gradient_queries: self.gradient_queries.load(Ordering::Relaxed),
        }
    }

    pub fn reset_counts(&self) {
        self.value_queries.store(0, Ordering::Relaxed);
        self.gradient_queries.store(0, Ordering::Relaxed);
    }

    fn check(&self, x: &[f64]) -> Result<(), OracleError> {
        if x.len() != self.dim() {
            return Err(OracleError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if !is_finite(x) {
            return Err(OracleError::NonFinite);
        }
        Ok(())
    }

    /// Exact ground-truth projection (uncounted, noise free).
    pub fn true_projection(&self, x: &[f64]) -> Result<Projection, OracleError> {
        self.check(x)?;
        Ok(project_to_curve(self.curve.as_ref(), x, &self.projection)?)
    }

    /// Noise-free `f(x)` (uncounted).
    pub fn true_value(&self, x: &[f64]) -> Result<f64, OracleError> {
        let p = self.true_projection(x)?;
        Ok(self.profile.g(p.distance * p.distance))
    }

    /// The foot seen by the queries: the true foot plus the injected perturbation.
    pub fn foot(&self, x: &[f64]) -> Result<Point, OracleError> {
        Ok(self.noisy_foot(x, &self.true_projection(x)?))
    }

    fn noisy_foot(&self, x: &[f64], p: &Projection) -> Point {
        match &self.noise {
            None => p.foot.clone(),
            Some(n) => p.foot.iter().zip(n.offset(x)).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, OracleError> {
        self.value_queries.fetch_add(1, Ordering::Relaxed);
        let p = self.true_projection(x)?;
        let d = dist(x, &self.noisy_foot(x, &p));
        Ok(self.profile.g(d * d))
    }

    pub fn grad(&self, x: &[f64]) -> Result<Point, OracleError> {
        self.gradient_queries.fetch_add(1, Ordering::Relaxed);
        let p = self.true_projection(x)?;
        if p.distance < ON_CURVE_TOL {
            return Err(OracleError::OnCurve {
                distance: p.distance,
            });
        }
        if p.is_ambiguous(self.projection.tolerance) {
            return Err(OracleError::AmbiguitySuspected { point: x.to_vec() });
        }
        match self.gradient_mode {
            GradientMode::Exact => {
                let foot = self.noisy_foot(x, &p);
                let d2: f64 = x.iter().zip(&foot).map(|(a, b)| (a - b) * (a - b)).sum();
                let c = 2.0 * self.profile.g_dot(d2);
                Ok(x.iter().zip(&foot).map(|(a, b)| c * (a - b)).collect())
            }
            GradientMode::SymmetricDifference { tau } => {
                let mut g = vec![0.0; x.len()];
                let mut probe = x.to_vec();
                for n in 0..x.len() {
                    probe[n] = x[n] + tau;
                    let fp = self.eval(&probe)?;
                    probe[n] = x[n] - tau;
                    let fm = self.eval(&probe)?;
                    probe[n] = x[n];
                    g[n] = (fp - fm) / (2.0 * tau);
                }
                Ok(g)
            }
        }
    }

    /// Heuristic ambiguity test: two distinct local minimizers of `‖x − γ(t)‖` at the same
    /// distance (up to the projection tolerance).
    pub fn detect_ambiguity(&self, x: &[f64]) -> Result<bool, OracleError> {
        Ok(self.true_projection(x)?.is_ambiguous(self.projection.tolerance))
    }
}
