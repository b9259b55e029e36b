//! Analytic parametric curves used as ground truth.
//!
//! Curves are not assumed to be arclength parametrized. Every geometric routine in
//! this crate works with points, distances and the general (parametrization
//! independent) curvature formula.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::point::{dot, norm, Point};

/// A regular C² curve `[t_min, t_max] → ℝᵈ` with analytic derivatives.
pub trait ParametricCurve: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn domain(&self) -> (f64, f64);

    fn position_into(&self, t: f64, out: &mut [f64]);

    fn first_derivative_into(&self, t: f64, out: &mut [f64]);

    fn second_derivative_into(&self, t: f64, out: &mut [f64]);

    fn position(&self, t: f64) -> Point {
        let mut p = vec![0.0; self.dim()];
        self.position_into(t, &mut p);
        p
    }

    fn first_derivative(&self, t: f64) -> Point {
        let mut p = vec![0.0; self.dim()];
        self.first_derivative_into(t, &mut p);
        p
    }

    fn second_derivative(&self, t: f64) -> Point {
        let mut p = vec![0.0; self.dim()];
        self.second_derivative_into(t, &mut p);
        p
    }

    /// Arclength by composite Simpson quadrature of `‖γ′‖`.
    fn length_estimate(&self) -> f64 {
        let (a, b) = self.domain();
        let n = 4096;
        let h = (b - a) / n as f64;
        let mut d = vec![0.0; self.dim()];
        let mut speed = |t: f64| {
            self.first_derivative_into(t, &mut d);
            norm(&d)
        };
        let mut acc = speed(a) + speed(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * speed(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    /// Largest sampled speed `‖γ′(t)‖`.
    fn max_speed(&self) -> f64 {
        let (a, b) = self.domain();
        let n = 2048;
        let mut d = vec![0.0; self.dim()];
        (0..=n)
            .map(|i| {
                self.first_derivative_into(a + (b - a) * i as f64 / n as f64, &mut d);
                norm(&d)
            })
            .fold(0.0, f64::max)
    }

    /// Largest sampled `‖γ(t)‖`, i.e. the radius of the origin-centred ball containing the curve.
    fn max_norm(&self) -> f64 {
        let (a, b) = self.domain();
        let n = 4096;
        let mut p = vec![0.0; self.dim()];
        (0..=n)
            .map(|i| {
                self.position_into(a + (b - a) * i as f64 / n as f64, &mut p);
                norm(&p)
            })
            .fold(0.0, f64::max)
    }
}

pub type CurveRef = Arc<dyn ParametricCurve>;

/// Unsigned curvature `√(‖γ′‖²‖γ″‖² − ⟨γ′,γ″⟩²) / ‖γ′‖³`, valid in any dimension.
pub fn curvature(curve: &dyn ParametricCurve, t: f64) -> f64 {
    let d1 = curve.first_derivative(t);
    let d2 = curve.second_derivative(t);
    let s2 = dot(&d1, &d1);
    let cross_sq = (s2 * dot(&d2, &d2) - dot(&d1, &d2).powi(2)).max(0.0);
    cross_sq.sqrt() / s2.powf(1.5)
}

/// Tangential cone at a curve parameter: a full line at inner points, a ray at the ends.
#[derive(Clone, Debug, PartialEq)]
pub enum TangentCone {
    Line(Point),
    Ray(Point),
}

impl TangentCone {
    pub fn direction(&self) -> &[f64] {
        match self {
            TangentCone::Line(d) | TangentCone::Ray(d) => d,
        }
    }
}

/// Unit direction of the tangential cone. At `t_min` this is the ray `γ′(t_min+)`,
/// at `t_max` the ray `−γ′(t_max−)`.
pub fn tangential_cone_direction(curve: &dyn ParametricCurve, t: f64) -> TangentCone {
    let (a, b) = curve.domain();
    let d = curve.first_derivative(t);
    let n = norm(&d);
    let unit: Point = d.iter().map(|x| x / n).collect();
    if t <= a {
        TangentCone::Ray(unit)
    } else if t >= b {
        TangentCone::Ray(unit.iter().map(|x| -x).collect())
    } else {
        TangentCone::Line(unit)
    }
}

/// Straight segment `a + t (b − a)`, `t ∈ [0, 1]`.
#[derive(Clone, Debug)]
pub struct Segment {
    pub start: Point,
    pub end: Point,
}

impl Segment {
    pub fn new(start: Point, end: Point) -> Self {
        assert_eq!(start.len(), end.len());
        Self { start, end }
    }
}

impl ParametricCurve for Segment {
    fn dim(&self) -> usize {
        self.start.len()
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
    fn position_into(&self, t: f64, out: &mut [f64]) {
        for i in 0..out.len() {
            out[i] = self.start[i] + t * (self.end[i] - self.start[i]);
        }
    }
    fn first_derivative_into(&self, _t: f64, out: &mut [f64]) {
        for i in 0..out.len() {
            out[i] = self.end[i] - self.start[i];
        }
    }
    fn second_derivative_into(&self, _t: f64, out: &mut [f64]) {
        out.fill(0.0);
    }
}

/// Planar circular arc `c + r (cos θ, sin θ)`, `θ ∈ [θ₀, θ₁]`.
#[derive(Clone, Debug)]
pub struct CircleArc {
    pub center: [f64; 2],
    pub radius: f64,
    pub theta0: f64,
    pub theta1: f64,
}

impl CircleArc {
    pub fn new(radius: f64, theta0: f64, theta1: f64) -> Self {
        Self {
            center: [0.0, 0.0],
            radius,
            theta0,
            theta1,
        }
    }
}

impl ParametricCurve for CircleArc {
    fn dim(&self) -> usize {
        2
    }
    fn domain(&self) -> (f64, f64) {
        (self.theta0, self.theta1)
    }
    fn position_into(&self, t: f64, out: &mut [f64]) {
        let (s, c) = t.sin_cos();
        out[0] = self.center[0] + self.radius * c;
        out[1] = self.center[1] + self.radius * s;
    }
    fn first_derivative_into(&self, t: f64, out: &mut [f64]) {
        let (s, c) = t.sin_cos();
        out[0] = -self.radius * s;
        out[1] = self.radius * c;
    }
    fn second_derivative_into(&self, t: f64, out: &mut [f64]) {
        let (s, c) = t.sin_cos();
        out[0] = -self.radius * c;
        out[1] = -self.radius * s;
    }
}

/// Archimedean spiral piece `(r₀ + r₁ t)(cos ωt, sin ωt)`, `t ∈ [0, 1]`.
#[derive(Clone, Debug)]
pub struct ArchimedeanSpiral {
    pub r0: f64,
    pub r1: f64,
    pub omega: f64,
}

impl ArchimedeanSpiral {
    /// `(1/8 + 3t/8)(cos 3πt, sin 3πt)`.
    pub fn catalog() -> Self {
        Self {
            r0: 0.125,
            r1: 0.375,
            omega: 3.0 * PI,
        }
    }
}

impl ParametricCurve for ArchimedeanSpiral {
    fn dim(&self) -> usize {
        2
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
    fn position_into(&self, t: f64, out: &mut [f64]) {
        let r = self.r0 + self.r1 * t;
        let (s, c) = (self.omega * t).sin_cos();
        out[0] = r * c;
        out[1] = r * s;
    }
    fn first_derivative_into(&self, t: f64, out: &mut [f64]) {
        let r = self.r0 + self.r1 * t;
        let w = self.omega;
        let (s, c) = (w * t).sin_cos();
        out[0] = self.r1 * c - r * w * s;
        out[1] = self.r1 * s + r * w * c;
    }
    fn second_derivative_into(&self, t: f64, out: &mut [f64]) {
        let r = self.r0 + self.r1 * t;
        let w = self.omega;
        let (s, c) = (w * t).sin_cos();
        out[0] = -2.0 * self.r1 * w * s - r * w * w * c;
        out[1] = 2.0 * self.r1 * w * c - r * w * w * s;
    }
}

/// Space curve `scale · ((1 + ½cos 4πt) cos 5πt, (1 + ½cos 4πt) sin 5πt, sin 4πt)`, `t ∈ [0, 1]`.
#[derive(Clone, Debug)]
pub struct SpaceKnot {
    pub scale: f64,
}

impl SpaceKnot {
    /// Unscaled circumradius: `max ‖γ‖² = 7/3`, attained at `cos 4πt = 2/3`.
    pub const CIRCUMRADIUS: f64 = 1.527_525_231_651_947;
}

impl ParametricCurve for SpaceKnot {
    fn dim(&self) -> usize {
        3
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
    fn position_into(&self, t: f64, out: &mut [f64]) {
        let (s4, c4) = (4.0 * PI * t).sin_cos();
        let (s5, c5) = (5.0 * PI * t).sin_cos();
        let a = 1.0 + 0.5 * c4;
        out[0] = self.scale * a * c5;
        out[1] = self.scale * a * s5;
        out[2] = self.scale * s4;
    }
    fn first_derivative_into(&self, t: f64, out: &mut [f64]) {
        let w4 = 4.0 * PI;
        let w5 = 5.0 * PI;
        let (s4, c4) = (w4 * t).sin_cos();
        let (s5, c5) = (w5 * t).sin_cos();
        let a = 1.0 + 0.5 * c4;
        let da = -0.5 * w4 * s4;
        out[0] = self.scale * (da * c5 - a * w5 * s5);
        out[1] = self.scale * (da * s5 + a * w5 * c5);
        out[2] = self.scale * w4 * c4;
    }
    fn second_derivative_into(&self, t: f64, out: &mut [f64]) {
        let w4 = 4.0 * PI;
        let w5 = 5.0 * PI;
        let (s4, c4) = (w4 * t).sin_cos();
        let (s5, c5) = (w5 * t).sin_cos();
        let a = 1.0 + 0.5 * c4;
        let da = -0.5 * w4 * s4;
        let dda = -0.5 * w4 * w4 * c4;
        out[0] = self.scale * (dda * c5 - 2.0 * da * w5 * s5 - a * w5 * w5 * c5);
        out[1] = self.scale * (dda * s5 + 2.0 * da * w5 * c5 - a * w5 * w5 * s5);
        out[2] = -self.scale * w4 * w4 * s4;
    }
}

/// Half-ellipse `(a cos πt, b sin πt)`, `t ∈ [0, 1]`.
#[derive(Clone, Debug)]
pub struct HalfEllipse {
    pub a: f64,
    pub b: f64,
}

impl ParametricCurve for HalfEllipse {
    fn dim(&self) -> usize {
        2
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
    fn position_into(&self, t: f64, out: &mut [f64]) {
        let (s, c) = (PI * t).sin_cos();
        out[0] = self.a * c;
        out[1] = self.b * s;
    }
    fn first_derivative_into(&self, t: f64, out: &mut [f64]) {
        let (s, c) = (PI * t).sin_cos();
        out[0] = -self.a * PI * s;
        out[1] = self.b * PI * c;
    }
    fn second_derivative_into(&self, t: f64, out: &mut [f64]) {
        let (s, c) = (PI * t).sin_cos();
        out[0] = -self.a * PI * PI * c;
        out[1] = -self.b * PI * PI * s;
    }
}

/// Bézier curve of arbitrary degree on `t ∈ [0, 1]`.
#[derive(Clone, Debug)]
pub struct Bezier {
    control: Vec<Point>,
}

impl Bezier {
    pub fn new(control: Vec<Point>) -> Self {
        assert!(control.len() >= 2, "a Bézier curve needs at least two control points");
        let d = control[0].len();
        assert!(control.iter().all(|p| p.len() == d));
        Self { control }
    }

    pub fn control_points(&self) -> &[Point] {
        &self.control
    }

    fn de_casteljau(points: &[Point], t: f64, out: &mut [f64]) {
        if points.is_empty() {
            out.fill(0.0);
            return;
        }
        let mut work: Vec<Point> = points.to_vec();
        for level in (1..work.len()).rev() {
            for i in 0..level {
                for k in 0..out.len() {
                    work[i][k] = (1.0 - t) * work[i][k] + t * work[i + 1][k];
                }
            }
        }
        out.copy_from_slice(&work[0]);
    }

    fn hodograph(points: &[Point]) -> Vec<Point> {
        let n = points.len() as f64 - 1.0;
        points
            .windows(2)
            .map(|w| w[1].iter().zip(&w[0]).map(|(b, a)| n * (b - a)).collect())
            .collect()
    }
}

impl ParametricCurve for Bezier {
    fn dim(&self) -> usize {
        self.control[0].len()
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
    fn position_into(&self, t: f64, out: &mut [f64]) {
        Self::de_casteljau(&self.control, t, out);
    }
    fn first_derivative_into(&self, t: f64, out: &mut [f64]) {
        Self::de_casteljau(&Self::hodograph(&self.control), t, out);
    }
    fn second_derivative_into(&self, t: f64, out: &mut [f64]) {
        let h = Self::hodograph(&self.control);
        if h.len() < 2 {
            out.fill(0.0);
            return;
        }
        Self::de_casteljau(&Self::hodograph(&h), t, out);
    }
}

/// Uniformly scaled copy `factor · γ(t)` of another curve.
#[derive(Clone, Debug)]
pub struct Scaled {
    pub inner: CurveRef,
    pub factor: f64,
}

impl ParametricCurve for Scaled {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn domain(&self) -> (f64, f64) {
        self.inner.domain()
    }
    fn position_into(&self, t: f64, out: &mut [f64]) {
        self.inner.position_into(t, out);
        out.iter_mut().for_each(|x| *x *= self.factor);
    }
    fn first_derivative_into(&self, t: f64, out: &mut [f64]) {
        self.inner.first_derivative_into(t, out);
        out.iter_mut().for_each(|x| *x *= self.factor);
    }
    fn second_derivative_into(&self, t: f64, out: &mut [f64]) {
        self.inner.second_derivative_into(t, out);
        out.iter_mut().for_each(|x| *x *= self.factor);
    }
}
