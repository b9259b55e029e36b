use std::sync::Arc;

use super::{GradientMode, Profile, SleeveOracle};
use crate::geometry::{ArchimedeanSpiral, CurveRef, HalfEllipse, ParametricCurve, SpaceKnot};
use crate::point::{axpy, normalized, orthonormal_complement, Point};

pub const CASE_NAMES: [&str; 4] = ["spiral", "knot3d", "half-ellipse", "half-ellipse-vanishing"];

/// A named experiment: curve, profile and default run parameters.
#[derive(Clone, Debug)]
pub struct ExperimentCase {
    pub name: &'static str,
    pub curve: CurveRef,
    pub profile: Profile,
    pub rho: f64,
    pub target_error: f64,
    pub sigma: f64,
    pub epsilon: f64,
    pub gradient_mode: GradientMode,
    /// Factor applied to the printed curve to bring it into `B_{1/2}` (1 if none).
    pub scale: f64,
    pub x0: Point,
}

impl ExperimentCase {
    pub fn oracle(&self) -> SleeveOracle {
        SleeveOracle::new(self.curve.clone(), self.profile.clone(), self.rho)
            .with_gradient_mode(self.gradient_mode)
    }
}

/// Default start point: the curve point at `t = 1/2` moved `ρ/2` along a normal.
pub fn default_start(curve: &dyn ParametricCurve, rho: f64) -> Point {
    let (a, b) = curve.domain();
    let t = 0.5 * (a + b);
    let tangent = normalized(&curve.first_derivative(t)).expect("regular curve");
    let normal = &orthonormal_complement(&tangent)[0];
    axpy(&curve.position(t), 0.5 * rho, normal)
}

fn case(
    name: &'static str,
    curve: CurveRef,
    profile: Profile,
    rho: f64,
    target_error: f64,
    gradient_mode: GradientMode,
    scale: f64,
) -> ExperimentCase {
    let x0 = default_start(curve.as_ref(), rho);
    ExperimentCase {
        name,
        curve,
        profile,
        rho,
        target_error,
        sigma: 1e-4,
        epsilon: 0.0,
        gradient_mode,
        scale,
        x0,
    }
}

/// Scale mapping the space knot's circumscribed ball (radius `√(7/3)`) onto `B_{1/2}`.
pub fn knot_scale() -> f64 {
    0.5 / SpaceKnot::CIRCUMRADIUS
}

pub fn experiment_catalog() -> Vec<ExperimentCase> {
    let ks = knot_scale();
    vec![
        case(
            "spiral",
            Arc::new(ArchimedeanSpiral::catalog()),
            Profile::sine(),
            0.125,
            1e-3,
            GradientMode::Exact,
            1.0,
        ),
        // Reach of the rescaled knot is about 0.18·(its tightest bend); 0.08 passes the
        // sampled separation check with margin.
        case(
            "knot3d",
            Arc::new(SpaceKnot { scale: ks }),
            Profile::tangent(),
            0.08,
            1e-2,
            GradientMode::Exact,
            ks,
        ),
        // The unscaled half-ellipse has curvature 4 at its ends, so ρ = 1/4 before and
        // 1/8 after halving.
        case(
            "half-ellipse",
            Arc::new(HalfEllipse { a: 0.5, b: 0.25 }),
            Profile::identity(),
            0.125,
            1e-3,
            GradientMode::SymmetricDifference { tau: 1e-8 },
            0.5,
        ),
        case(
            "half-ellipse-vanishing",
            Arc::new(HalfEllipse { a: 0.5, b: 0.25 }),
            Profile::square(),
            0.125,
            1e-2,
            GradientMode::Exact,
            0.5,
        ),
    ]
}

pub fn case_by_name(name: &str) -> Option<ExperimentCase> {
    experiment_catalog().into_iter().find(|c| c.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::norm;

    #[test]
    fn catalog_parameters() {
        let spiral = case_by_name("spiral").unwrap();
        assert_eq!((spiral.rho, spiral.target_error, spiral.sigma), (0.125, 1e-3, 1e-4));
        let knot = case_by_name("knot3d").unwrap();
        assert_eq!((knot.target_error, knot.sigma), (1e-2, 1e-4));
        assert_eq!(knot.curve.dim(), 3);
        let he = case_by_name("half-ellipse").unwrap();
        assert_eq!(he.gradient_mode, GradientMode::SymmetricDifference { tau: 1e-8 });
        let v = case_by_name("half-ellipse-vanishing").unwrap();
        assert_eq!(v.profile.name, "square");
        assert_eq!((v.target_error, v.sigma, v.epsilon), (1e-2, 1e-4, 0.0));
        assert!(case_by_name("torus").is_none());
    }

    #[test]
    fn curves_lie_in_half_ball() {
        for c in experiment_catalog() {
            let m = c.curve.max_norm();
            assert!(m <= 0.5 + 1e-9, "{}: {m}", c.name);
            assert!(m >= 0.5 - 1e-3, "{}: {m}", c.name);
        }
    }

    #[test]
    fn start_points_are_within_rho() {
        for c in experiment_catalog() {
            let o = c.oracle();
            let d = o.true_projection(&c.x0).unwrap().distance;
            assert!((d - 0.5 * c.rho).abs() < 1e-9, "{}: {d}", c.name);
            assert!(norm(&c.x0) < 0.5 + c.rho);
        }
    }
}
