//! Sampled verification of ρ-separation.
//!
//! For each sampled parameter `t` and unit normal `v ∈ N_γ(t)` the margin
//! `dist(γ(t) + ρv, γ) − ρ` is recorded; a ρ-separated curve has all margins `≥ 0`
//! (the open ball `B̊_ρ(γ(t) + ρv)` misses the curve). The inner distance is the exact
//! ground-truth projection, so only `t` and `v` are sampled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curve::{curvature, ParametricCurve};
use super::projection::{project_to_curve, ProjectionSettings};
use super::GeometryError;
use crate::point::{axpy, dot, normalized, orthonormal_complement, scale, Point};

pub const DEFAULT_MARGIN_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstPair {
    /// Parameter of the tangent point `γ(t)`.
    pub t: f64,
    /// Parameter of the curve point nearest to the tested ball centre.
    pub s: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub rho_tested: f64,
    /// `worst_pair.margin ≥ −tolerance`.
    pub passed: bool,
    pub worst_pair: WorstPair,
    /// Number of (parameter, normal) ball tests performed.
    pub samples_used: usize,
    pub tolerance: f64,
    pub max_curvature: f64,
    /// Sampled curvature never exceeds `1/ρ` (up to the relative tolerance).
    pub curvature_ok: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct SeparationSettings {
    pub n_param_samples: usize,
    pub n_normal_samples: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for SeparationSettings {
    fn default() -> Self {
        Self {
            n_param_samples: 1000,
            n_normal_samples: 16,
            tolerance: DEFAULT_MARGIN_TOL,
            seed: 0x5eed,
        }
    }
}

/// Unit vectors sampled from the normal cone at parameter `t`.
///
/// Inner points: both signs of an orthonormal basis of `γ′(t)^⊥` (exactly the two normals in
/// the plane), topped up with random unit normals in `d ≥ 3`. End points: the boundary
/// hyperplane directions plus directions tilted into the open half-space.
pub fn normal_cone_samples(
    curve: &dyn ParametricCurve,
    t: f64,
    n_normal_samples: usize,
    rng: &mut impl Rng,
) -> Vec<Point> {
    let (a, b) = curve.domain();
    let tangent = normalized(&curve.first_derivative(t)).expect("regular curve");
    let basis = orthonormal_complement(&tangent);
    let mut normals: Vec<Point> = basis
        .iter()
        .flat_map(|e| [e.clone(), scale(e, -1.0)])
        .collect();
    if curve.dim() >= 3 {
        while normals.len() < n_normal_samples {
            let coeffs: Vec<f64> = basis.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut v = vec![0.0; curve.dim()];
            for (c, e) in coeffs.iter().zip(&basis) {
                v = axpy(&v, *c, e);
            }
            if let Some(u) = normalized(&v) {
                normals.push(u);
            }
        }
    }
    let outward = if t <= a {
        Some(scale(&tangent, -1.0))
    } else if t >= b {
        Some(tangent.clone())
    } else {
        None
    };
    if let Some(out) = outward {
        let boundary = normals.clone();
        for n in &boundary {
            for k in 1..=4 {
                let alpha = std::f64::consts::FRAC_PI_8 * k as f64;
                let v = axpy(&scale(n, alpha.cos()), alpha.sin(), &out);
                normals.push(v);
            }
        }
    }
    normals
}

pub fn verify_separation(
    curve: &dyn ParametricCurve,
    rho: f64,
    settings: &SeparationSettings,
) -> Result<SeparationReport, GeometryError> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(GeometryError::InvalidRho(rho));
    }
    if settings.n_param_samples < 2 || settings.n_normal_samples < 2 {
        return Err(GeometryError::InvalidSampling(format!(
            "need at least 2 parameter and 2 normal samples, got {} and {}",
            settings.n_param_samples, settings.n_normal_samples
        )));
    }
    let (a, b) = curve.domain();
    let n = settings.n_param_samples - 1;
    let projection = ProjectionSettings::for_curve(curve, rho);

    let per_t: Vec<(WorstPair, usize, f64)> = (0..=n)
        .into_par_iter()
        .map(|i| {
            let t = if i == n { b } else { a + (b - a) * i as f64 / n as f64 };
            let mut rng = ChaCha8Rng::seed_from_u64(settings.seed ^ (i as u64).wrapping_mul(0x9e37_79b9));
            let p = curve.position(t);
            let normals = normal_cone_samples(curve, t, settings.n_normal_samples, &mut rng);
            let mut worst = WorstPair {
                t,
                s: t,
                margin: f64::INFINITY,
            };
            for v in &normals {
                let centre = axpy(&p, rho, v);
                let proj = match project_to_curve(curve, &centre, &projection) {
                    Ok(p) => p,
                    Err(GeometryError::NonConvergence { fallback }) => *fallback,
                    Err(_) => unreachable!("centre has curve dimension and is finite"),
                };
                let margin = proj.distance - rho;
                if margin < worst.margin {
                    worst = WorstPair {
                        t,
                        s: proj.t,
                        margin,
                    };
                }
            }
            (worst, normals.len(), curvature(curve, t))
        })
        .collect();

    let worst_pair = per_t
        .iter()
        .map(|r| r.0)
        .min_by(|p, q| p.margin.total_cmp(&q.margin))
        .expect("at least two samples");
    let samples_used = per_t.iter().map(|r| r.1).sum();
    let max_curvature = per_t.iter().map(|r| r.2).fold(0.0, f64::max);
    Ok(SeparationReport {
        rho_tested: rho,
        passed: worst_pair.margin >= -settings.tolerance,
        worst_pair,
        samples_used,
        tolerance: settings.tolerance,
        max_curvature,
        curvature_ok: max_curvature * rho <= 1.0 + 1e-9,
    })
}

/// Largest ρ (to relative precision `rel_tol`) that passes [`verify_separation`], searched by
/// bisection on `[lo, hi]`. Returns `None` if even `lo` fails.
pub fn estimate_separation(
    curve: &dyn ParametricCurve,
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
    settings: &SeparationSettings,
) -> Result<Option<f64>, GeometryError> {
    if !verify_separation(curve, lo, settings)?.passed {
        return Ok(None);
    }
    if verify_separation(curve, hi, settings)?.passed {
        return Ok(Some(hi));
    }
    while hi - lo > rel_tol * lo {
        let mid = 0.5 * (lo + hi);
        if verify_separation(curve, mid, settings)?.passed {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(lo))
}

/// `true` if every sampled normal is a unit vector in the normal cone `N_γ(t)`.
pub fn normals_in_cone(curve: &dyn ParametricCurve, t: f64, normals: &[Point]) -> bool {
    let (a, b) = curve.domain();
    let d = curve.first_derivative(t);
    normals.iter().all(|v| {
        let unit = (dot(v, v) - 1.0).abs() < 1e-12;
        let c = dot(v, &d) / dot(&d, &d).sqrt();
        let inside = if t <= a {
            c <= 1e-12
        } else if t >= b {
            c >= -1e-12
        } else {
            c.abs() <= 1e-12
        };
        unit && inside
    })
}
