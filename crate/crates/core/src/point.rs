//! Minimal dense-vector helpers on `&[f64]`.
//!
//! Points live in ℝᵈ with small `d` (2 or 3 for every built-in case), so plain
//! `Vec<f64>` buffers are used throughout instead of a linear-algebra crate.

pub type Point = Vec<f64>;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist_sq(a, b).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Point {
    a.iter().map(|x| x * s).collect()
}

/// `a + s·b`
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

/// Unit vector in the direction of `a`, or `None` for a (numerically) zero vector.
pub fn normalized(a: &[f64]) -> Option<Point> {
    let n = norm(a);
    if n > 0.0 && n.is_finite() {
        Some(scale(a, 1.0 / n))
    } else {
        None
    }
}

pub fn is_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// Closest point on the segment `[a, b]` to `x`, with its segment parameter in `[0, 1]`.
pub fn project_to_segment(x: &[f64], a: &[f64], b: &[f64]) -> (f64, Point) {
    let ab = sub(b, a);
    let len_sq = dot(&ab, &ab);
    if len_sq == 0.0 {
        return (0.0, a.to_vec());
    }
    let ax = sub(x, a);
    let u = (dot(&ax, &ab) / len_sq).clamp(0.0, 1.0);
    (u, axpy(a, u, &ab))
}

/// Squared distance from `x` to the segment `[a, b]` without allocating.
pub fn segment_dist_sq(x: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let mut len_sq = 0.0;
    let mut proj = 0.0;
    for i in 0..x.len() {
        let ab = b[i] - a[i];
        len_sq += ab * ab;
        proj += (x[i] - a[i]) * ab;
    }
    let u = if len_sq > 0.0 {
        (proj / len_sq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let mut acc = 0.0;
    for i in 0..x.len() {
        let d = x[i] - (a[i] + u * (b[i] - a[i]));
        acc += d * d;
    }
    acc
}

/// Orthonormal basis of the orthogonal complement of the unit vector `u` (Gram–Schmidt
/// against the standard basis).
pub fn orthonormal_complement(u: &[f64]) -> Vec<Point> {
    let d = u.len();
    let mut basis: Vec<Point> = vec![u.to_vec()];
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        for b in &basis {
            let c = dot(&e, b);
            for (ej, bj) in e.iter_mut().zip(b) {
                *ej -= c * bj;
            }
        }
        let n = norm(&e);
        if n > 1e-8 {
            basis.push(scale(&e, 1.0 / n));
        }
        if basis.len() == d {
            break;
        }
    }
    basis.remove(0);
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_projection_clamps() {
        let (u, p) = project_to_segment(&[1.5, 0.0], &[0.0, 0.0], &[1.0, 0.0]);
        assert_eq!(u, 1.0);
        assert_eq!(p, vec![1.0, 0.0]);
        let d = segment_dist_sq(&[0.3, 0.2], &[0.0, 0.0], &[1.0, 0.0]);
        assert!((d - 0.04).abs() < 1e-15);
    }

    #[test]
    fn complement_is_orthonormal() {
        let u = normalized(&[1.0, 2.0, -0.5]).unwrap();
        let basis = orthonormal_complement(&u);
        assert_eq!(basis.len(), 2);
        for (i, b) in basis.iter().enumerate() {
            assert!(dot(b, &u).abs() < 1e-14);
            assert!((norm(b) - 1.0).abs() < 1e-14);
            for c in &basis[i + 1..] {
                assert!(dot(b, c).abs() < 1e-14);
            }
        }
    }
}
