use serde::{Deserialize, Serialize};

use super::LearnError;

/// Linear spline with equispaced knots `jσ`, `j = 0, 1, …`, and `values[0] = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneLinearSpline {
    sigma: f64,
    values: Vec<f64>,
    /// Samples changed by pool-adjacent-violators repair.
    repairs: usize,
}

impl MonotoneLinearSpline {
    /// Builds a spline from samples at `0, σ, 2σ, …`; the first sample is forced to zero and
    /// non-monotone runs are pooled.
    pub fn from_samples(sigma: f64, mut values: Vec<f64>) -> Result<Self, LearnError> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(LearnError::InvalidSpline(format!("knot spacing {sigma} must be positive")));
        }
        if values.len() < 2 {
            return Err(LearnError::InvalidSpline("need at least two samples".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LearnError::InvalidSpline("non-finite sample".into()));
        }
        values[0] = 0.0;
        let repairs = pool_adjacent_violators(&mut values);
        Ok(Self {
            sigma,
            values,
            repairs,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn knot(&self, j: usize) -> f64 {
        j as f64 * self.sigma
    }

    pub fn knots(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(|j| self.knot(j))
    }

    pub fn last_knot(&self) -> f64 {
        self.knot(self.values.len() - 1)
    }

    pub fn repairs(&self) -> usize {
        self.repairs
    }

    pub fn strictly_increasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] > w[0])
    }

    /// Appends samples at the next knots and re-applies the monotone repair.
    pub fn extend(&mut self, more: impl IntoIterator<Item = f64>) {
        self.values.extend(more);
        self.repairs += pool_adjacent_violators(&mut self.values);
    }

    /// Piecewise-linear interpolation, extended linearly beyond both ends.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.values.len() - 1;
        let u = t / self.sigma;
        let r = u.round();
        if r >= 0.0 && r <= n as f64 && (u - r).abs() <= 4.0 * f64::EPSILON * r.max(1.0) {
            return self.values[r as usize];
        }
        let j = if u <= 0.0 {
            0
        } else {
            (u.floor() as usize).min(n - 1)
        };
        let w = u - j as f64;
        let (a, b) = (self.values[j], self.values[j + 1]);
        a + w * (b - a)
    }

    /// Exact inverse of the interpolant on `[values[0], values.last]`.
    ///
    /// Flat pieces (left by monotone repair) resolve to their left end.
    pub fn invert(&self, z: f64) -> Result<f64, LearnError> {
        let last = *self.values.last().expect("at least two values");
        if !(z >= self.values[0] && z <= last) {
            let overshoot = if z > last { z - last } else { z - self.values[0] };
            return Err(LearnError::InverseOutOfRange {
                value: z,
                max: last,
                overshoot,
            });
        }
        // First knot with value ≥ z.
        let j = self.values.partition_point(|&v| v < z);
        if j == 0 || self.values[j] == z {
            return Ok(self.knot(j));
        }
        let (a, b) = (self.values[j - 1], self.values[j]);
        Ok(self.sigma * ((j - 1) as f64 + (z - a) / (b - a)))
    }
}

/// In-place isotonic regression (equal weights). Returns the number of changed entries.
fn pool_adjacent_violators(values: &mut [f64]) -> usize {
    if values.windows(2).all(|w| w[1] >= w[0]) {
        return 0;
    }
    // Blocks of (sum, count).
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values.iter() {
        blocks.push((v, 1));
        while blocks.len() >= 2 {
            let (s1, c1) = blocks[blocks.len() - 1];
            let (s0, c0) = blocks[blocks.len() - 2];
            if s0 / c0 as f64 > s1 / c1 as f64 {
                blocks.pop();
                *blocks.last_mut().unwrap() = (s0 + s1, c0 + c1);
            } else {
                break;
            }
        }
    }
    let mut changed = 0;
    let mut i = 0;
    for (s, c) in blocks {
        let mean = s / c as f64;
        for v in &mut values[i..i + c] {
            if *v != mean {
                changed += 1;
            }
            *v = mean;
        }
        i += c;
    }
    changed
}

#[cfg(test)]
mod tests {
    use super::*;

    fn squares(sigma: f64, n: usize) -> MonotoneLinearSpline {
        let v = (0..=n).map(|j| (j as f64 * sigma).powi(2)).collect();
        MonotoneLinearSpline::from_samples(sigma, v).unwrap()
    }

    #[test]
    fn exact_at_knots() {
        let s = squares(0.05, 20);
        for (j, t) in s.knots().enumerate() {
            assert_eq!(s.eval(t), s.values()[j]);
        }
        assert!((s.eval(0.025) - 0.00125).abs() < 1e-15);
    }

    #[test]
    fn inversion_examples() {
        let s = squares(0.01, 100);
        assert_eq!(s.invert(0.0).unwrap(), 0.0);
        let t = s.invert(0.04).unwrap();
        // Interpolation error σ²/4 divided by the local slope 2t.
        assert!((t - 0.2).abs() <= 0.01f64.powi(2) / 4.0 / 0.4 + 1e-15);
        assert_eq!(s.invert(1.0).unwrap(), s.last_knot());
        assert!(matches!(
            s.invert(1.5),
            Err(LearnError::InverseOutOfRange { overshoot, .. }) if (overshoot - 0.5).abs() < 1e-12
        ));
    }

    #[test]
    fn round_trip_between_knots() {
        let s = squares(1e-3, 1000);
        for i in 0..=997 {
            let t = i as f64 * 1.003e-3;
            assert!((s.invert(s.eval(t)).unwrap() - t).abs() < 1e-12);
        }
    }

    #[test]
    fn pav_repairs_non_monotone_samples() {
        let s = MonotoneLinearSpline::from_samples(0.1, vec![0.0, 0.2, 0.1, 0.3]).unwrap();
        for (a, b) in s.values().iter().zip([0.0, 0.15, 0.15, 0.3]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(s.repairs(), 2);
        assert!(!s.strictly_increasing());
        assert!((s.invert(s.values()[1]).unwrap() - 0.1).abs() < 1e-15);
        let mut v = vec![3.0, 1.0, 2.0, 0.0, 5.0];
        pool_adjacent_violators(&mut v);
        assert_eq!(v, vec![1.5, 1.5, 1.5, 1.5, 5.0]);
    }

    #[test]
    fn extension_appends_knots() {
        let mut s = squares(0.1, 3);
        s.extend([0.16, 0.25]);
        assert_eq!(s.values().len(), 6);
        assert!((s.last_knot() - 0.5).abs() < 1e-15);
    }
}
