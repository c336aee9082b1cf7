//! Scalar measures of convex polygons: area, perimeter, support function,
//! directional width, diameter, and the width-integral form of the perimeter.

use std::f64::consts::TAU;

use super::{ConvexPolygon, Vector2};

impl ConvexPolygon {
    /// Shoelace area; zero for points and segments.
    pub fn area(&self) -> f64 {
        let v = self.vertices();
        if v.len() < 3 {
            return 0.0;
        }
        let n = v.len();
        // Anchor at v[0] to reduce cancellation for polygons far from the origin.
        let o = v[0];
        let twice: f64 = (1..n - 1).map(|i| (v[i] - o).cross(v[i + 1] - o)).sum();
        0.5 * twice.abs()
    }

    /// Boundary length. A segment counts both of its sides, so its perimeter is
    /// twice its length; this is the value the width integral assigns to it.
    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.distance(b)).sum()
    }

    /// Support function `h(u) = max_v <v, u>`.
    pub fn support(&self, u: Vector2) -> f64 {
        self.vertices()
            .iter()
            .map(|v| v.to_vector().dot(u))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Width in direction `u`: `h(u) + h(-u)`.
    pub fn width(&self, u: Vector2) -> f64 {
        self.support(u) + self.support(-u)
    }

    /// Support values at `n_dirs` equally spaced directions
    /// `theta_k = 2 pi k / n_dirs`, computed by a single caliper sweep: the
    /// maximizing vertex only ever advances counterclockwise as the direction
    /// rotates counterclockwise.
    pub fn support_sweep(&self, n_dirs: usize) -> Vec<f64> {
        self.caliper_sweep(n_dirs).map(|(hi, _)| hi).collect()
    }

    /// Widths at `n_dirs` equally spaced directions, by the same sweep run on
    /// the maximizing and the minimizing vertex together.
    pub fn width_sweep(&self, n_dirs: usize) -> Vec<f64> {
        self.caliper_sweep(n_dirs).map(|(hi, lo)| hi - lo).collect()
    }

    /// Yields `(max_v <v,u_k>, min_v <v,u_k>)` for `u_k` at angle `2 pi k / n_dirs`.
    fn caliper_sweep(&self, n_dirs: usize) -> impl Iterator<Item = (f64, f64)> + '_ {
        let v = self.vertices();
        let n = v.len();
        let dot = move |i: usize, u: Vector2| v[i % n].to_vector().dot(u);
        let u0 = Vector2::new(1.0, 0.0);
        let mut top = (0..n).max_by(|&a, &b| dot(a, u0).total_cmp(&dot(b, u0))).unwrap_or(0);
        let mut bottom = (0..n).min_by(|&a, &b| dot(a, u0).total_cmp(&dot(b, u0))).unwrap_or(0);
        (0..n_dirs).map(move |k| {
            let u = Vector2::from_angle(TAU * k as f64 / n_dirs as f64);
            let mut steps = 0;
            while steps < n && dot(top + 1, u) >= dot(top, u) {
                top = (top + 1) % n;
                steps += 1;
            }
            steps = 0;
            while steps < n && dot(bottom + 1, u) <= dot(bottom, u) {
                bottom = (bottom + 1) % n;
                steps += 1;
            }
            (dot(top, u), dot(bottom, u))
        })
    }

    /// Perimeter from the width integral `1/2 * integral of w(u) over the circle`,
    /// by the periodic trapezoid rule on `n_dirs` directions.
    ///
    /// `n_dirs` is clamped to at least 8.
    pub fn cauchy_perimeter(&self, n_dirs: usize) -> f64 {
        let n_dirs = n_dirs.max(8);
        let total: f64 = self.width_sweep(n_dirs).iter().sum();
        0.5 * total * TAU / n_dirs as f64
    }

    /// Largest vertex-to-vertex distance, by rotating calipers over antipodal
    /// pairs.
    pub fn diameter(&self) -> f64 {
        let v = self.vertices();
        let n = v.len();
        match n {
            1 => return 0.0,
            2 => return v[0].distance(v[1]),
            _ => {}
        }
        let tri = |a: usize, b: usize, c: usize| (v[b % n] - v[a % n]).cross(v[c % n] - v[a % n]).abs();
        let mut best: f64 = 0.0;
        let mut j = 1;
        for i in 0..n {
            let ni = (i + 1) % n;
            let mut guard = 0;
            while guard < n && tri(i, ni, j + 1) > tri(i, ni, j) {
                j = (j + 1) % n;
                guard += 1;
            }
            best = best
                .max(v[i].distance(v[j % n]))
                .max(v[ni].distance(v[j % n]));
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

    use super::super::Point2;
    use super::*;

    fn brute_diameter(p: &ConvexPolygon) -> f64 {
        let v = p.vertices();
        let mut best: f64 = 0.0;
        for a in v {
            for b in v {
                best = best.max(a.distance(*b));
            }
        }
        best
    }

    #[test]
    fn unit_square_measures() {
        let sq = ConvexPolygon::unit_square();
        assert_eq!(sq.area(), 1.0);
        assert_eq!(sq.perimeter(), 4.0);
        assert_eq!(sq.support(Vector2::new(1.0, 0.0)), 1.0);
        assert_eq!(sq.support(Vector2::new(-1.0, 0.0)), 0.0);
        let diag = Vector2::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        assert!((sq.support(diag) - SQRT_2).abs() < 1e-15);
        assert_eq!(sq.width(Vector2::new(1.0, 0.0)), 1.0);
        assert!((sq.width(diag) - SQRT_2).abs() < 1e-15);
        assert!((sq.diameter() - SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn triangle_and_degenerate_measures() {
        let tri = ConvexPolygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap();
        assert_eq!(tri.area(), 0.5);

        let seg = ConvexPolygon::segment(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0));
        assert_eq!(seg.area(), 0.0);
        assert_eq!(seg.perimeter(), 2.0);
        let long = ConvexPolygon::segment(Point2::new(0.0, 0.0), Point2::new(3.0, 4.0));
        assert_eq!(long.diameter(), 5.0);

        let pt = ConvexPolygon::point(Point2::new(2.0, 3.0));
        assert_eq!(pt.perimeter(), 0.0);
        assert_eq!(pt.area(), 0.0);
        assert_eq!(pt.diameter(), 0.0);
        assert_eq!(pt.cauchy_perimeter(64), 0.0);
    }

    #[test]
    fn regular_polygon_perimeter_closed_form() {
        for n in [3usize, 5, 8, 64, 257] {
            let p = ConvexPolygon::regular(n, Point2::ORIGIN, 1.0, 0.3).unwrap();
            let exact = 2.0 * n as f64 * (PI / n as f64).sin();
            assert!((p.perimeter() - exact).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn cauchy_formula_matches_edge_sum() {
        let p = ConvexPolygon::regular(64, Point2::ORIGIN, 1.0, 0.0).unwrap();
        assert!((p.cauchy_perimeter(4096) - p.perimeter()).abs() < 1e-5);
        assert!((ConvexPolygon::unit_square().cauchy_perimeter(4096) - 4.0).abs() < 1e-3);
        let seg = ConvexPolygon::segment(Point2::new(0.0, 0.0), Point2::new(1.0, 0.5));
        assert!((seg.cauchy_perimeter(4096) - seg.perimeter()).abs() < 1e-5);
    }

    #[test]
    fn sweep_agrees_with_direct_support() {
        let p = ConvexPolygon::regular(7, Point2::new(0.3, -0.2), 2.0, 0.1).unwrap();
        let sweep = p.support_sweep(360);
        let widths = p.width_sweep(360);
        for (k, h) in sweep.iter().enumerate() {
            let u = Vector2::from_angle(TAU * k as f64 / 360.0);
            assert!((h - p.support(u)).abs() < 1e-14);
            assert!((widths[k] - p.width(u)).abs() < 1e-14);
        }
    }

    #[test]
    fn calipers_match_brute_force() {
        for n in 3..40 {
            let p = ConvexPolygon::regular(n, Point2::new(1.0, 2.0), 1.5, 0.37 * n as f64).unwrap();
            assert!((p.diameter() - brute_diameter(&p)).abs() < 1e-14, "n={n}");
        }
        let skinny = ConvexPolygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(10.0, 0.1),
            Point2::new(10.0, 0.2),
            Point2::new(0.0, 0.15),
        ])
        .unwrap();
        assert_eq!(skinny.diameter(), brute_diameter(&skinny));
    }
}
