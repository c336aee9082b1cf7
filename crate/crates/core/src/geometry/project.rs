use super::point::closest_on_segment;
use super::{ConvexPolygon, Point2};

impl ConvexPolygon {
    /// Euclidean projection: the unique nearest point of the polygon to `q`.
    /// Points inside (including the boundary) are returned unchanged.
    pub fn project_point(&self, q: Point2) -> Point2 {
        let v = self.vertices();
        match v {
            [p] => return *p,
            [a, b] => return closest_on_segment(*a, *b, q),
            _ => {}
        }
        if self.strictly_encloses(q) {
            return q;
        }
        let mut best = v[0];
        let mut best_d = f64::INFINITY;
        for (a, b) in self.edges() {
            let c = closest_on_segment(a, b, q);
            let d = c.distance_sq(q);
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        best
    }

    /// Euclidean distance from `q` to the polygon; zero inside.
    pub fn distance(&self, q: Point2) -> f64 {
        self.project_point(q).distance(q)
    }

    /// True when `q` is inside or within `tol` of the polygon.
    pub fn contains(&self, q: Point2, tol: f64) -> bool {
        self.distance(q) <= tol
    }

    /// Exact left-of-every-edge test for proper polygons.
    fn strictly_encloses(&self, q: Point2) -> bool {
        self.edges().all(|(a, b)| (b - a).cross(q - a) >= 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_projection_and_containment() {
        let sq = ConvexPolygon::unit_square();
        assert!(sq.contains(Point2::new(0.5, 0.5), 0.0));
        assert!(!sq.contains(Point2::new(2.0, 0.0), 1e-9));
        assert!(sq.contains(Point2::new(1.0, 0.5), 1e-9));
        assert_eq!(sq.project_point(Point2::new(2.0, 0.5)), Point2::new(1.0, 0.5));
        assert_eq!(sq.project_point(Point2::new(2.0, 2.0)), Point2::new(1.0, 1.0));
        assert_eq!(sq.distance(Point2::new(2.0, 0.5)), 1.0);
        assert_eq!(sq.distance(Point2::new(0.3, 0.3)), 0.0);
        let inside = Point2::new(0.25, 0.75);
        assert_eq!(sq.project_point(inside), inside);
    }

    #[test]
    fn degenerate_projection() {
        let pt = ConvexPolygon::point(Point2::new(1.0, 1.0));
        assert_eq!(pt.project_point(Point2::new(5.0, -3.0)), Point2::new(1.0, 1.0));
        let seg = ConvexPolygon::segment(Point2::new(0.0, 0.0), Point2::new(2.0, 0.0));
        assert_eq!(seg.project_point(Point2::new(1.0, 3.0)), Point2::new(1.0, 0.0));
        assert!(seg.contains(Point2::new(1.5, 0.0), 0.0));
        assert!(!seg.contains(Point2::new(1.5, 0.1), 1e-9));
    }
}
