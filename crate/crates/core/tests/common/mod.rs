//! Brute-force reference computations shared by the integration tests.
//!
//! Nothing here calls the library's projection or Hausdorff code, so results can be used
//! to cross-check it.

#![allow(dead_code)]

use std::io::Write;

use sleeve_core::geometry::{ParametricCurve, PolygonalChain};

/// Prints one result line straight to the process stderr (bypassing test output capture).
pub fn verdict(id: &str, title: &str, pass: bool, detail: &str) {
    let mark = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr().lock(), "[{mark}] criterion {id}: {title} ({detail})");
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn point_segment_dist(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let ap: Vec<f64> = a.iter().zip(p).map(|(x, y)| y - x).collect();
    let len2: f64 = ab.iter().map(|v| v * v).sum();
    let t = if len2 == 0.0 {
        0.0
    } else {
        (ab.iter().zip(&ap).map(|(u, v)| u * v).sum::<f64>() / len2).clamp(0.0, 1.0)
    };
    let q: Vec<f64> = a.iter().zip(&ab).map(|(x, d)| x + t * d).collect();
    dist(p, &q)
}

pub fn point_chain_dist(p: &[f64], v: &[Vec<f64>]) -> f64 {
    v.windows(2)
        .map(|w| point_segment_dist(p, &w[0], &w[1]))
        .fold(f64::INFINITY, f64::min)
}

/// Nearest curve parameter to `p`: dense scan, then golden-section refinement.
pub fn nearest_param(curve: &dyn ParametricCurve, p: &[f64], n: usize) -> (f64, f64) {
    let (a, b) = curve.domain();
    let at = |i: usize| a + (b - a) * i as f64 / n as f64;
    let d = |t: f64| dist(&curve.position(t), p);
    let best = (0..=n).min_by(|&i, &j| d(at(i)).total_cmp(&d(at(j)))).unwrap();
    let (mut lo, mut hi) = (at(best.saturating_sub(1)), at((best + 1).min(n)));
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let (m1, m2) = (hi - r * (hi - lo), lo + r * (hi - lo));
        if d(m1) < d(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let t = 0.5 * (lo + hi);
    (t, d(t))
}

/// Two-sided Hausdorff distance between a curve and a chain.
///
/// Curve → chain: `n` uniform parameter samples, exact distance to the chain.
/// Chain → curve: `per_segment` points per segment, refined nearest curve points.
/// The returned resolution bounds the sampling error of the first term.
pub fn brute_hausdorff(
    curve: &dyn ParametricCurve,
    chain: &PolygonalChain,
    n: usize,
    per_segment: usize,
) -> (f64, f64) {
    let v = chain.vertices();
    let (a, b) = curve.domain();
    let mut forward = 0.0f64;
    let mut step = 0.0f64;
    let mut prev = curve.position(a);
    for i in 0..=n {
        let q = curve.position(a + (b - a) * i as f64 / n as f64);
        step = step.max(dist(&q, &prev));
        prev = q.clone();
        forward = forward.max(point_chain_dist(&q, v));
    }
    let mut backward = 0.0f64;
    for w in v.windows(2) {
        for k in 0..=per_segment {
            let s = k as f64 / per_segment as f64;
            let p: Vec<f64> = w[0].iter().zip(&w[1]).map(|(x, y)| x + s * (y - x)).collect();
            backward = backward.max(nearest_param(curve, &p, 2000).1);
        }
    }
    (forward.max(backward), step)
}

/// Largest distance from the curve arc over `[t0, t1]` to the segment `[a, b]`.
pub fn arc_chord_deviation(
    curve: &dyn ParametricCurve,
    t0: f64,
    t1: f64,
    a: &[f64],
    b: &[f64],
    samples: usize,
) -> f64 {
    (0..=samples)
        .map(|i| {
            let t = t0 + (t1 - t0) * i as f64 / samples as f64;
            point_segment_dist(&curve.position(t), a, b)
        })
        .fold(0.0, f64::max)
}
