use serde::{Deserialize, Serialize};

use super::GeometryError;
use crate::point::{dist, norm, project_to_segment, segment_dist_sq, Point};

/// An ordered polygonal chain `⋃ [P_k P_{k+1}]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolygonalChain {
    vertices: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainProjection {
    pub segment: usize,
    /// Position along the segment in `[0, 1]`.
    pub u: f64,
    pub foot: Point,
    pub distance: f64,
}

impl PolygonalChain {
    /// Builds a chain, rejecting fewer than two vertices, mixed dimensions and repeated
    /// consecutive vertices.
    pub fn new(vertices: Vec<Point>) -> Result<Self, GeometryError> {
        if vertices.len() < 2 {
            return Err(GeometryError::DegenerateChain(format!(
                "{} vertices, need at least 2",
                vertices.len()
            )));
        }
        let d = vertices[0].len();
        if let Some(bad) = vertices.iter().find(|v| v.len() != d) {
            return Err(GeometryError::DimensionMismatch {
                expected: d,
                got: bad.len(),
            });
        }
        if let Some(k) = vertices.windows(2).position(|w| w[0] == w[1]) {
            return Err(GeometryError::DegenerateChain(format!(
                "vertices {k} and {} coincide",
                k + 1
            )));
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn segment_count(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn length(&self) -> f64 {
        self.vertices.windows(2).map(|w| dist(&w[0], &w[1])).sum()
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        self.vertices
            .windows(2)
            .map(|w| segment_dist_sq(x, &w[0], &w[1]))
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }

    /// Exact projection: project onto every segment and keep the global minimizer.
    pub fn project(&self, x: &[f64]) -> ChainProjection {
        let mut best: Option<ChainProjection> = None;
        for (k, w) in self.vertices.windows(2).enumerate() {
            let (u, foot) = project_to_segment(x, &w[0], &w[1]);
            let d = dist(x, &foot);
            if best.as_ref().is_none_or(|b| d < b.distance) {
                best = Some(ChainProjection {
                    segment: k,
                    u,
                    foot,
                    distance: d,
                });
            }
        }
        best.expect("chain has at least one segment")
    }

    /// Point at position `u ∈ [0, 1]` along segment `k`.
    pub fn segment_point(&self, k: usize, u: f64) -> Point {
        let a = &self.vertices[k];
        let b = &self.vertices[k + 1];
        a.iter().zip(b).map(|(p, q)| p + u * (q - p)).collect()
    }

    /// Vertex with the largest Euclidean norm.
    pub fn max_norm_vertex(&self) -> &[f64] {
        self.vertices
            .iter()
            .max_by(|a, b| norm(a).total_cmp(&norm(b)))
            .expect("non-empty")
    }
}
