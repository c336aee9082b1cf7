use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A point in the plane. Serializes as `[x, y]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

/// A displacement in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vector2 {
    pub dx: f64,
    pub dy: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// The position vector of this point.
    #[inline]
    pub fn to_vector(self) -> Vector2 {
        Vector2::new(self.x, self.y)
    }

    #[inline]
    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    #[inline]
    pub fn distance_sq(self, other: Point2) -> f64 {
        (self - other).norm_sq()
    }

    /// Linear interpolation `self + s (other - self)`.
    #[inline]
    pub fn lerp(self, other: Point2, s: f64) -> Point2 {
        Point2::new(self.x + s * (other.x - self.x), self.y + s * (other.y - self.y))
    }
}

impl Vector2 {
    pub const ZERO: Vector2 = Vector2 { dx: 0.0, dy: 0.0 };

    #[inline]
    pub const fn new(dx: f64, dy: f64) -> Self {
        Self { dx, dy }
    }

    /// Unit vector at angle `theta` (radians, counterclockwise from +x).
    #[inline]
    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c, s)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.dx.is_finite() && self.dy.is_finite()
    }

    #[inline]
    pub fn dot(self, other: Vector2) -> f64 {
        self.dx * other.dx + self.dy * other.dy
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, other: Vector2) -> f64 {
        self.dx * other.dy - self.dy * other.dx
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    /// Euclidean (l2) norm.
    #[inline]
    pub fn norm(self) -> f64 {
        self.dx.hypot(self.dy)
    }

    /// Counterclockwise rotation by a right angle.
    #[inline]
    pub fn perp(self) -> Vector2 {
        Vector2::new(-self.dy, self.dx)
    }

    /// Unit vector in the same direction, or `None` for a zero vector.
    pub fn normalized(self) -> Option<Vector2> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(Vector2::new(self.dx / n, self.dy / n))
        } else {
            None
        }
    }
}

impl From<[f64; 2]> for Point2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Point2::new(x, y)
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

impl From<[f64; 2]> for Vector2 {
    fn from([dx, dy]: [f64; 2]) -> Self {
        Vector2::new(dx, dy)
    }
}

impl From<Vector2> for [f64; 2] {
    fn from(v: Vector2) -> Self {
        [v.dx, v.dy]
    }
}

impl Sub for Point2 {
    type Output = Vector2;
    #[inline]
    fn sub(self, rhs: Point2) -> Vector2 {
        Vector2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Add<Vector2> for Point2 {
    type Output = Point2;
    #[inline]
    fn add(self, rhs: Vector2) -> Point2 {
        Point2::new(self.x + rhs.dx, self.y + rhs.dy)
    }
}

impl Sub<Vector2> for Point2 {
    type Output = Point2;
    #[inline]
    fn sub(self, rhs: Vector2) -> Point2 {
        Point2::new(self.x - rhs.dx, self.y - rhs.dy)
    }
}

impl AddAssign<Vector2> for Point2 {
    #[inline]
    fn add_assign(&mut self, rhs: Vector2) {
        self.x += rhs.dx;
        self.y += rhs.dy;
    }
}

impl Add for Vector2 {
    type Output = Vector2;
    #[inline]
    fn add(self, rhs: Vector2) -> Vector2 {
        Vector2::new(self.dx + rhs.dx, self.dy + rhs.dy)
    }
}

impl Sub for Vector2 {
    type Output = Vector2;
    #[inline]
    fn sub(self, rhs: Vector2) -> Vector2 {
        Vector2::new(self.dx - rhs.dx, self.dy - rhs.dy)
    }
}

impl Mul<f64> for Vector2 {
    type Output = Vector2;
    #[inline]
    fn mul(self, s: f64) -> Vector2 {
        Vector2::new(self.dx * s, self.dy * s)
    }
}

impl Mul<Vector2> for f64 {
    type Output = Vector2;
    #[inline]
    fn mul(self, v: Vector2) -> Vector2 {
        v * self
    }
}

impl Neg for Vector2 {
    type Output = Vector2;
    #[inline]
    fn neg(self) -> Vector2 {
        Vector2::new(-self.dx, -self.dy)
    }
}

/// Closest point to `q` on the closed segment `[a, b]`.
#[inline]
pub(crate) fn closest_on_segment(a: Point2, b: Point2, q: Point2) -> Point2 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return a;
    }
    let s = (q - a).dot(ab) / len_sq;
    if s <= 0.0 {
        a
    } else if s >= 1.0 {
        b
    } else {
        a + ab * s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let p = Point2::new(1.0, 2.0);
        let q = Point2::new(4.0, 6.0);
        assert_eq!((q - p).norm(), 5.0);
        assert_eq!(p + (q - p), q);
        assert_eq!(Vector2::new(1.0, 0.0).perp(), Vector2::new(0.0, 1.0));
        assert_eq!(Vector2::new(1.0, 0.0).cross(Vector2::new(0.0, 1.0)), 1.0);
        assert!(Vector2::ZERO.normalized().is_none());
    }

    #[test]
    fn segment_closest_point() {
        let a = Point2::new(0.0, 0.0);
        let b = Point2::new(2.0, 0.0);
        assert_eq!(closest_on_segment(a, b, Point2::new(1.0, 5.0)), Point2::new(1.0, 0.0));
        assert_eq!(closest_on_segment(a, b, Point2::new(-1.0, 1.0)), a);
        assert_eq!(closest_on_segment(a, b, Point2::new(3.0, -1.0)), b);
        assert_eq!(closest_on_segment(a, a, Point2::new(3.0, -1.0)), a);
    }

    #[test]
    fn serializes_as_pair() {
        let p = Point2::new(0.5, -1.0);
        assert_eq!(serde_json::to_string(&p).unwrap(), "[0.5,-1.0]");
        let back: Point2 = serde_json::from_str("[0.5,-1.0]").unwrap();
        assert_eq!(back, p);
    }
}
