use serde::{Deserialize, Serialize};

use super::{GeometryError, Point2, Vector2};

/// Closed half-plane `{z : normal . z <= offset}` with a unit normal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfPlane {
    normal: Vector2,
    offset: f64,
}

impl HalfPlane {
    /// Builds `{z : normal . z <= offset}`, rescaling so the stored normal has
    /// unit length.
    pub fn new(normal: Vector2, offset: f64) -> Result<Self, GeometryError> {
        let len = normal.norm();
        if !(len > 0.0) || !len.is_finite() || !offset.is_finite() {
            return Err(GeometryError::DegenerateNormal);
        }
        Ok(Self {
            normal: Vector2::new(normal.dx / len, normal.dy / len),
            offset: offset / len,
        })
    }

    /// The half-plane bounded by the line through `point` with outward normal
    /// `normal`.
    pub fn through(point: Point2, normal: Vector2) -> Result<Self, GeometryError> {
        Self::new(normal, normal.dot(point.to_vector()))
    }

    #[inline]
    pub fn normal(&self) -> Vector2 {
        self.normal
    }

    #[inline]
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Signed distance of `p` to the boundary line; positive outside.
    #[inline]
    pub fn signed_distance(&self, p: Point2) -> f64 {
        self.normal.dot(p.to_vector()) - self.offset
    }

    #[inline]
    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        self.signed_distance(p) <= tol
    }

    /// Orthogonal projection of `p` onto the boundary line.
    #[inline]
    pub fn project_to_boundary(&self, p: Point2) -> Point2 {
        p - self.normal * self.signed_distance(p)
    }

    /// The closed complementary half-plane.
    pub fn flipped(&self) -> Self {
        Self {
            normal: -self.normal,
            offset: -self.offset,
        }
    }
}
