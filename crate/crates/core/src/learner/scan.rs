use serde::{Deserialize, Serialize};

use super::{LearnError, MonotoneLinearSpline};
use crate::geometry::PolygonalChain;
use crate::oracle::{OracleError, SleeveOracle};
use crate::point::{axpy, dist, dot, norm, normalized, scale, sub, Point};
use crate::tracer::Projector;

pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 30;
const BISECTION_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootRefinement {
    /// Ray parameter of the curve hit.
    pub t: f64,
    pub newton_iterations: usize,
    /// Newton did not converge and bisection on the directional derivative was used.
    pub newton_failed: bool,
    pub bisection_iterations: usize,
}

enum Slope {
    /// The point lies on the curve up to the oracle tolerance.
    Zero,
    Value(f64),
}

fn slope(oracle: &SleeveOracle, x: &[f64], dir: &[f64]) -> Result<Slope, LearnError> {
    match oracle.grad(x) {
        Ok(g) => Ok(Slope::Value(dot(&g, dir))),
        Err(OracleError::OnCurve { .. }) => Ok(Slope::Zero),
        Err(e) => Err(e.into()),
    }
}

/// Root of `φ(t) = f(origin + t·dir)` in `[lo, hi]`, where the ray crosses the curve.
///
/// Newton–Raphson on `√φ` from `guess` (tolerance [`NEWTON_TOL`], at most
/// [`NEWTON_MAX_ITER`] iterations); if it fails, bisection on the sign of `φ′` inside the
/// bracket.
pub fn refine_ray_root(
    oracle: &SleeveOracle,
    origin: &[f64],
    dir: &[f64],
    lo: f64,
    hi: f64,
    guess: f64,
) -> Result<RootRefinement, LearnError> {
    let at = |t: f64| axpy(origin, t, dir);
    let mut t = guess.clamp(lo, hi);
    let mut newton_iterations = 0;
    while newton_iterations < NEWTON_MAX_ITER {
        newton_iterations += 1;
        let x = at(t);
        let phi = oracle.eval(&x)?;
        if phi == 0.0 {
            return Ok(RootRefinement {
                t,
                newton_iterations,
                newton_failed: false,
                bisection_iterations: 0,
            });
        }
        let d = match slope(oracle, &x, dir)? {
            Slope::Zero => {
                return Ok(RootRefinement {
                    t,
                    newton_iterations,
                    newton_failed: false,
                    bisection_iterations: 0,
                })
            }
            Slope::Value(d) => d,
        };
        if d == 0.0 {
            break;
        }
        // φ has a double root at the hit (φ ≈ c·(t − t₀)² when ġ(0) > 0), so the iteration
        // runs on √φ, whose root is simple: Δ = √φ / (√φ)′ = 2φ/φ′.
        let step = 2.0 * phi / d;
        let next = t - step;
        if !(next >= lo && next <= hi) {
            break;
        }
        t = next;
        if step.abs() <= NEWTON_TOL {
            return Ok(RootRefinement {
                t,
                newton_iterations,
                newton_failed: false,
                bisection_iterations: 0,
            });
        }
    }

    // φ′ < 0 before the hit and > 0 after it.
    let (mut a, mut b) = (lo, hi);
    let mut bisection_iterations = 0;
    for (end, want_negative) in [(a, true), (b, false)] {
        bisection_iterations += 1;
        match slope(oracle, &at(end), dir)? {
            Slope::Zero => {
                return Ok(RootRefinement {
                    t: end,
                    newton_iterations,
                    newton_failed: true,
                    bisection_iterations,
                })
            }
            Slope::Value(d) if (d < 0.0) != want_negative => {
                return Err(LearnError::NewtonFailed(format!(
                    "no sign change of the directional derivative on [{lo}, {hi}]"
                )))
            }
            _ => {}
        }
    }
    while b - a > BISECTION_TOL {
        let m = 0.5 * (a + b);
        bisection_iterations += 1;
        match slope(oracle, &at(m), dir)? {
            Slope::Zero => {
                a = m;
                b = m;
            }
            Slope::Value(d) if d < 0.0 => a = m,
            Slope::Value(_) => b = m,
        }
    }
    Ok(RootRefinement {
        t: 0.5 * (a + b),
        newton_iterations,
        newton_failed: true,
        bisection_iterations,
    })
}

/// Result of the inward scan from `x0` and the first spline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialScan {
    pub spline: MonotoneLinearSpline,
    /// Curve point where the inward ray hits (knot 0).
    pub anchor: Point,
    /// Unit direction from the anchor toward `x0` (the sampling direction).
    pub direction: Point,
    /// Distance from `x0` to the anchor along the ray.
    pub root_t: f64,
    /// Samples `f(x0 − kσv)`, `k = 0, 1, …`, taken until `f` increased.
    pub scan_samples: usize,
    pub refinement: Option<RootRefinement>,
    /// Samples at the re-anchored knots.
    pub resamples: usize,
}

/// Samples `g₂` along the normal ray through `x0`.
///
/// Walks inward along `−∇f(x0)` in steps `σ` until `f` increases, refines the hit by
/// [`refine_ray_root`], then samples `f` at `anchor + jσv` for `j = 1, …, ⌈ρ/σ⌉`.
pub fn initial_profile_scan(
    oracle: &SleeveOracle,
    x0: &[f64],
    sigma: f64,
    rho: f64,
) -> Result<InitialScan, LearnError> {
    if !(sigma > 0.0 && rho > 0.0) {
        return Err(LearnError::InvalidParameter(format!(
            "σ = {sigma} and ρ = {rho} must be positive"
        )));
    }
    let f0 = oracle.eval(x0)?;
    let (origin, v, on_curve) = match oracle.grad(x0) {
        Ok(g) => match normalized(&g) {
            Some(v) => (x0.to_vec(), v, f0 == 0.0),
            None => return Err(LearnError::NoDescent { steps: 0 }),
        },
        Err(OracleError::OnCurve { .. }) => (x0.to_vec(), off_curve_normal(oracle, x0, sigma)?, true),
        Err(e) => return Err(e.into()),
    };

    let (root_t, scan_samples, refinement) = if on_curve {
        (0.0, 1, None)
    } else {
        let max_k = ((2.0 * rho + 1.0) / sigma).ceil() as usize + 2;
        let mut prev = f0;
        let mut k = 0;
        loop {
            k += 1;
            if k > max_k {
                return Err(LearnError::NoDescent { steps: k });
            }
            let fk = oracle.eval(&axpy(&origin, -(k as f64) * sigma, &v))?;
            if fk - prev > 0.0 {
                break;
            }
            prev = fk;
        }
        let inward = scale(&v, -1.0);
        let lo = (k as f64 - 2.0).max(0.0) * sigma;
        let hi = k as f64 * sigma;
        let r = refine_ray_root(oracle, &origin, &inward, lo, hi, (k as f64 - 1.0) * sigma)?;
        (r.t, k + 1, Some(r))
    };

    let anchor = axpy(&origin, -root_t, &v);
    let n = (rho / sigma).ceil() as usize;
    let mut values = Vec::with_capacity(n + 1);
    values.push(0.0);
    for j in 1..=n {
        values.push(oracle.eval(&axpy(&anchor, j as f64 * sigma, &v))?);
    }
    Ok(InitialScan {
        spline: MonotoneLinearSpline::from_samples(sigma, values)?,
        anchor,
        direction: v,
        root_t,
        scan_samples,
        refinement,
        resamples: n,
    })
}

/// Outward normal for a start point on the curve, read off the gradient at a nearby point.
fn off_curve_normal(oracle: &SleeveOracle, x0: &[f64], sigma: f64) -> Result<Point, LearnError> {
    for n in 0..x0.len() {
        let mut y = x0.to_vec();
        y[n] += sigma;
        match oracle.grad(&y) {
            Ok(g) => {
                if let Some(v) = normalized(&g) {
                    return Ok(v);
                }
            }
            Err(OracleError::OnCurve { .. }) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(LearnError::NoDescent { steps: 0 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extension {
    pub spline: MonotoneLinearSpline,
    /// Max-norm chain vertex.
    pub vertex: Point,
    /// Curve point anchoring the extension ray.
    pub anchor: Option<Point>,
    pub direction: Option<Point>,
    pub refinement: Option<RootRefinement>,
    /// New knots sampled along the ray.
    pub samples: usize,
}

/// Extends the spline to `[0, 1]` by sampling along the outward normal at the max-norm
/// chain vertex.
///
/// `y = (1 + ρ/‖x‖)x` is projected with `projector`; the hit of the ray through `y` is then
/// refined like the initial root so that the new knots continue the equispaced grid.
pub fn extend_profile(
    oracle: &SleeveOracle,
    chain: &PolygonalChain,
    projector: &dyn Projector,
    spline: &MonotoneLinearSpline,
    rho: f64,
) -> Result<Extension, LearnError> {
    let vertex = chain.max_norm_vertex().to_vec();
    if spline.last_knot() >= 1.0 {
        return Ok(Extension {
            spline: spline.clone(),
            vertex,
            anchor: None,
            direction: None,
            refinement: None,
            samples: 0,
        });
    }
    let nx = norm(&vertex);
    if !(nx > 0.0) {
        return Err(LearnError::InvalidParameter("max-norm vertex is the origin".into()));
    }
    let y = scale(&vertex, 1.0 + rho / nx);
    let foot = projector.project(&y)?;
    let d_est = dist(&y, &foot);
    let dir = normalized(&sub(&y, &foot))
        .ok_or_else(|| LearnError::InvalidParameter("projection of y coincides with y".into()))?;
    let inward = scale(&dir, -1.0);

    let sigma = spline.sigma();
    let mut width = 2.0 * sigma;
    let refinement = loop {
        let lo = (d_est - width).max(0.0);
        let hi = d_est + width;
        match refine_ray_root(oracle, &y, &inward, lo, hi, d_est) {
            Ok(r) => break r,
            Err(LearnError::NewtonFailed(_)) if width < rho => width *= 4.0,
            Err(e) => return Err(e),
        }
    };
    let anchor = axpy(&y, refinement.t, &inward);

    let first = spline.values().len();
    let last = (1.0 / sigma).ceil() as usize;
    let mut values = Vec::with_capacity(last + 1 - first);
    for j in first..=last {
        let x = axpy(&anchor, j as f64 * sigma, &dir);
        if oracle.detect_ambiguity(&x)? {
            return Err(LearnError::AmbiguityOnRay { point: x });
        }
        values.push(oracle.eval(&x)?);
    }
    let samples = values.len();
    let mut extended = spline.clone();
    extended.extend(values);
    Ok(Extension {
        spline: extended,
        vertex,
        anchor: Some(anchor),
        direction: Some(dir),
        refinement: Some(refinement),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Segment;
    use crate::oracle::Profile;
    use crate::tracer::{ProfileInverse, QueryProjector};
    use std::sync::Arc;

    fn segment(a: [f64; 2], b: [f64; 2], profile: Profile, rho: f64) -> SleeveOracle {
        SleeveOracle::new(Arc::new(Segment::new(a.to_vec(), b.to_vec())), profile, rho)
    }

    #[test]
    fn scan_on_segment() {
        let o = segment([0.0, 0.0], [1.0, 0.0], Profile::identity(), 1.0);
        let s = initial_profile_scan(&o, &[0.5, 0.3], 0.05, 0.4).unwrap();
        assert!((s.root_t - 0.3).abs() < 1e-12);
        assert!(dist(&s.anchor, &[0.5, 0.0]) < 1e-12);
        for (j, v) in s.spline.values().iter().enumerate() {
            assert!((v - (j as f64 * 0.05).powi(2)).abs() < 1e-12);
        }
        assert!(s.spline.last_knot() >= 0.4);
        // Identity profile: simple root of φ′, Newton converges.
        assert!(!s.refinement.unwrap().newton_failed);
    }

    #[test]
    fn scan_from_curve_point() {
        let o = segment([0.0, 0.0], [1.0, 0.0], Profile::identity(), 1.0);
        let s = initial_profile_scan(&o, &[0.5, 0.0], 0.05, 0.2).unwrap();
        assert_eq!(s.root_t, 0.0);
        assert!(s.refinement.is_none());
        assert!((s.spline.values()[2] - 0.01).abs() < 1e-12);
    }

    #[test]
    fn vanishing_profile_falls_back_to_bisection() {
        let o = segment([0.0, 0.0], [1.0, 0.0], Profile::square(), 1.0);
        let s = initial_profile_scan(&o, &[0.5, 0.3], 1e-3, 0.4).unwrap();
        assert!((s.root_t - 0.3).abs() < 1e-10);
    }

    #[test]
    fn extension_along_max_norm_ray() {
        let o = segment([-0.4, 0.0], [0.4, 0.0], Profile::identity(), 1.0);
        let s = initial_profile_scan(&o, &[0.1, 0.2], 0.01, 0.25).unwrap();
        let chain = PolygonalChain::new(vec![vec![-0.4, 0.0], vec![0.4, 0.0]]).unwrap();
        let p = QueryProjector::new(&o, ProfileInverse::Spline(&s.spline));
        let e = extend_profile(&o, &chain, &p, &s.spline, 0.25).unwrap();
        assert_eq!(e.vertex, vec![0.4, 0.0]);
        assert!(dist(e.direction.as_ref().unwrap(), &[1.0, 0.0]) < 1e-12);
        assert!(e.spline.last_knot() >= 1.0);
        for (j, v) in e.spline.values().iter().enumerate() {
            assert!((v - (j as f64 * 0.01).powi(2)).abs() < 1e-10, "knot {j}");
        }
        let again = extend_profile(&o, &chain, &p, &e.spline, 0.25).unwrap();
        assert_eq!(again.spline, e.spline);
        assert_eq!(again.samples, 0);
    }
}
