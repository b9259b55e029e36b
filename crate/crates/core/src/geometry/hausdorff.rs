//! Hausdorff distances between point sets, polygonal chains and analytic curves.
//!
//! `H(A, B) = max(h(A, B), h(B, A))` with the directed distance
//! `h(A, B) = sup_{a∈A} inf_{b∈B} ‖a − b‖`. The supremum side is sampled (and local
//! maxima are polished by golden-section search); the infimum side is exact for chains
//! (segment projection) and curves (Newton projection).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chain::PolygonalChain;
use super::curve::ParametricCurve;
use super::projection::{project_to_curve, ProjectionSettings};
use super::GeometryError;
use crate::point::{dist, Point};

/// A set that can be measured against another one.
#[derive(Clone, Copy, Debug)]
pub enum PointSet<'a> {
    Points(&'a [Point]),
    Chain(&'a PolygonalChain),
    /// Analytic curve with a separation radius that controls the sampling density.
    Curve {
        curve: &'a dyn ParametricCurve,
        rho: f64,
    },
}

#[derive(Clone, Copy, Debug)]
pub struct HausdorffSettings {
    /// Target chord deviation `ρ − √(ρ² − h²/4)` of the sampling step `h` on curves.
    pub bias: f64,
    /// Golden-section iterations spent on each sampled local maximum.
    pub refine_iterations: usize,
}

impl Default for HausdorffSettings {
    fn default() -> Self {
        Self {
            bias: 1e-7,
            refine_iterations: 60,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HausdorffMeasurement {
    pub distance: f64,
    /// `h(A, B)`
    pub forward: f64,
    /// `h(B, A)`
    pub backward: f64,
    /// Chord deviation of the curve sampling step (zero if no curve was sampled).
    pub sampling_bias: f64,
}

/// Sampling step whose chord deviation on a ρ-separated curve is at most `bias`.
pub fn sampling_step(rho: f64, bias: f64) -> f64 {
    let b = bias.min(rho);
    2.0 * (rho * rho - (rho - b) * (rho - b)).sqrt()
}

fn chord_deviation(rho: f64, h: f64) -> f64 {
    let q = rho * rho - h * h / 4.0;
    if q <= 0.0 {
        rho
    } else {
        rho - q.sqrt()
    }
}

struct Target<'a> {
    set: PointSet<'a>,
    projection: Option<ProjectionSettings>,
}

impl<'a> Target<'a> {
    fn new(set: PointSet<'a>) -> Self {
        let projection = match set {
            PointSet::Curve { curve, rho } => Some(ProjectionSettings::for_curve(curve, rho)),
            _ => None,
        };
        Self { set, projection }
    }

    fn distance(&self, x: &[f64]) -> f64 {
        match self.set {
            PointSet::Points(pts) => pts.iter().map(|p| dist(p, x)).fold(f64::INFINITY, f64::min),
            PointSet::Chain(c) => c.distance(x),
            PointSet::Curve { curve, .. } => {
                match project_to_curve(curve, x, self.projection.as_ref().expect("curve")) {
                    Ok(p) => p.distance,
                    Err(GeometryError::NonConvergence { fallback }) => fallback.distance,
                    Err(e) => panic!("projection failed on a sampled point: {e}"),
                }
            }
        }
    }
}

/// One-parameter family of points on the supremum side.
enum Source<'a> {
    Points(&'a [Point]),
    /// Pieces `[lo, hi]` of a parametrization `param(k, s)`.
    Pieces {
        pieces: Vec<(usize, f64, f64, usize)>,
        eval: Box<dyn Fn(usize, f64) -> Point + Sync + 'a>,
    },
}

fn source<'a>(set: PointSet<'a>, step: f64) -> (Source<'a>, f64) {
    match set {
        PointSet::Points(p) => (Source::Points(p), 0.0),
        PointSet::Chain(c) => {
            let pieces = c
                .vertices()
                .windows(2)
                .enumerate()
                .map(|(k, w)| {
                    let n = ((dist(&w[0], &w[1]) / step).ceil() as usize).max(1);
                    (k, 0.0, 1.0, n)
                })
                .collect();
            (
                Source::Pieces {
                    pieces,
                    eval: Box::new(move |k, u| c.segment_point(k, u)),
                },
                0.0,
            )
        }
        PointSet::Curve { curve, rho } => {
            let (a, b) = curve.domain();
            let n = ((curve.max_speed() * (b - a) / step).ceil() as usize).max(2);
            let actual = curve.max_speed() * (b - a) / n as f64;
            (
                Source::Pieces {
                    pieces: vec![(0, a, b, n)],
                    eval: Box::new(move |_, t| curve.position(t)),
                },
                chord_deviation(rho, actual),
            )
        }
    }
}

fn golden_max(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut best = f1.max(f2);
    for _ in 0..iters {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
        best = best.max(f1).max(f2);
    }
    best
}

fn directed(src: &Source<'_>, target: &Target<'_>, step: f64, iters: usize) -> f64 {
    match src {
        Source::Points(pts) => pts
            .par_iter()
            .map(|p| target.distance(p))
            .reduce(|| 0.0, f64::max),
        Source::Pieces { pieces, eval } => pieces
            .par_iter()
            .map(|&(k, lo, hi, n)| {
                let s = |i: usize| lo + (hi - lo) * i as f64 / n as f64;
                let vals: Vec<f64> = (0..=n).map(|i| target.distance(&eval(k, s(i)))).collect();
                let coarse = vals.iter().cloned().fold(0.0, f64::max);
                let mut best = coarse;
                for i in 0..=n {
                    let l = if i > 0 { vals[i - 1] } else { f64::NEG_INFINITY };
                    let r = if i < n { vals[i + 1] } else { f64::NEG_INFINITY };
                    // dist(·, B) is 1-Lipschitz, so only maxima within one step of the
                    // coarse maximum can hide a larger value.
                    let spacing = match i {
                        0 => 0.0,
                        _ => dist(&eval(k, s(i - 1)), &eval(k, s(i))),
                    };
                    if vals[i] >= l && vals[i] >= r && vals[i] + 2.0 * spacing.max(step) >= coarse {
                        let f = |u: f64| target.distance(&eval(k, u));
                        let a = s(i.saturating_sub(1));
                        let b = s((i + 1).min(n));
                        best = best.max(golden_max(&f, a, b, iters));
                    }
                }
                best
            })
            .reduce(|| 0.0, f64::max),
    }
}

/// Hausdorff distance with the sampling bias of any analytic side reported.
///
/// The curve sampling step is derived from `settings.bias` and the curve's separation radius;
/// chains are sampled at the same spatial step.
pub fn hausdorff_distance(
    a: PointSet<'_>,
    b: PointSet<'_>,
    settings: &HausdorffSettings,
) -> HausdorffMeasurement {
    let rho = match (a, b) {
        (PointSet::Curve { rho, .. }, _) | (_, PointSet::Curve { rho, .. }) => rho,
        _ => 1.0,
    };
    let step = sampling_step(rho, settings.bias);
    let (src_a, bias_a) = source(a, step);
    let (src_b, bias_b) = source(b, step);
    let forward = directed(&src_a, &Target::new(b), step, settings.refine_iterations);
    let backward = directed(&src_b, &Target::new(a), step, settings.refine_iterations);
    HausdorffMeasurement {
        distance: forward.max(backward),
        forward,
        backward,
        sampling_bias: bias_a.max(bias_b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::curve::{CircleArc, Segment};
    use std::f64::consts::PI;

    #[test]
    fn identical_sets_have_zero_distance() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 2.0], vec![-1.0, 0.5]];
        let m = hausdorff_distance(
            PointSet::Points(&pts),
            PointSet::Points(&pts),
            &HausdorffSettings::default(),
        );
        assert_eq!(m.distance, 0.0);
    }

    #[test]
    fn semicircle_versus_diameter() {
        let arc = CircleArc::new(1.0, 0.0, PI);
        let chord = PolygonalChain::new(vec![vec![-1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let m = hausdorff_distance(
            PointSet::Curve { curve: &arc, rho: 1.0 },
            PointSet::Chain(&chord),
            &HausdorffSettings::default(),
        );
        assert!((m.distance - 1.0).abs() < 1e-9, "{m:?}");
        assert!(m.sampling_bias <= 1e-7);
    }

    #[test]
    fn chord_on_unit_circle_deviates_by_sagitta() {
        // Chord of length 1 on the unit circle: sagitta 1 − √3/2.
        let half = (0.5_f64).asin();
        let arc = CircleArc::new(1.0, -half, half);
        let chord = PolygonalChain::new(vec![arc.position(-half), arc.position(half)]).unwrap();
        let m = hausdorff_distance(
            PointSet::Curve { curve: &arc, rho: 1.0 },
            PointSet::Chain(&chord),
            &HausdorffSettings::default(),
        );
        assert!((m.distance - (1.0 - 3f64.sqrt() / 2.0)).abs() < 1e-9, "{m:?}");
    }

    #[test]
    fn chain_on_segment_has_zero_distance() {
        let seg = Segment::new(vec![0.0, 0.0], vec![1.0, 0.0]);
        let chain =
            PolygonalChain::new(vec![vec![0.0, 0.0], vec![0.4, 0.0], vec![1.0, 0.0]]).unwrap();
        let m = hausdorff_distance(
            PointSet::Curve { curve: &seg, rho: 1.0 },
            PointSet::Chain(&chain),
            &HausdorffSettings::default(),
        );
        assert!(m.distance < 1e-12);
    }

    #[test]
    fn sampling_step_inverts_chord_deviation() {
        for (rho, bias) in [(1.0, 1e-7), (0.125, 1e-5), (3.0, 0.1)] {
            let h = sampling_step(rho, bias);
            assert!((chord_deviation(rho, h) - bias).abs() < 1e-12);
        }
    }
}
