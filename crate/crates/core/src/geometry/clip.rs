use super::{ConvexPolygon, HalfPlane, Point2};

impl ConvexPolygon {
    /// Intersection with the half-plane `h` (one Sutherland-Hodgman pass).
    ///
    /// Vertices outside `h` by at most `tol` are snapped onto its boundary
    /// line instead of generating a crossing. Returns `None` when every vertex
    /// is farther than `tol` outside, i.e. the intersection is empty.
    pub fn clip(&self, h: &HalfPlane, tol: f64) -> Option<ConvexPolygon> {
        let v = self.vertices();
        let n = v.len();
        let sd: Vec<f64> = v.iter().map(|p| h.signed_distance(*p)).collect();
        let max_sd = sd.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max_sd <= 0.0 {
            return Some(self.clone());
        }
        if sd.iter().all(|&d| d > tol) {
            return None;
        }
        let mut out: Vec<Point2> = Vec::with_capacity(n + 2);
        for i in 0..n {
            let (cur, d_cur) = (v[i], sd[i]);
            if d_cur <= 0.0 {
                out.push(cur);
            } else if d_cur <= tol {
                out.push(h.project_to_boundary(cur));
            }
            if n == 1 {
                break;
            }
            let j = (i + 1) % n;
            let (nxt, d_nxt) = (v[j], sd[j]);
            let crosses = (d_cur < -tol && d_nxt > tol) || (d_cur > tol && d_nxt < -tol);
            if crosses {
                let s = d_cur / (d_cur - d_nxt);
                out.push(h.project_to_boundary(cur.lerp(nxt, s)));
            }
        }
        ConvexPolygon::from_convex_cycle(out, tol)
    }

    /// Intersection with every half-plane in turn; `None` once empty.
    pub fn clip_all<'a, I>(&self, halfplanes: I, tol: f64) -> Option<ConvexPolygon>
    where
        I: IntoIterator<Item = &'a HalfPlane>,
    {
        let mut acc = self.clone();
        for h in halfplanes {
            acc = acc.clip(h, tol)?;
        }
        Some(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::super::Vector2;
    use super::*;

    fn x_at_most(c: f64) -> HalfPlane {
        HalfPlane::new(Vector2::new(1.0, 0.0), c).unwrap()
    }

    #[test]
    fn clips_unit_square() {
        let sq = ConvexPolygon::unit_square();
        let half = sq.clip(&x_at_most(0.5), 1e-9).unwrap();
        assert_eq!(half, ConvexPolygon::rectangle(0.0, 0.0, 0.5, 1.0).unwrap());
        assert!((half.area() - 0.5).abs() < 1e-15);
        assert_eq!(sq.clip(&x_at_most(2.0), 1e-9).unwrap(), sq);
        assert!(sq.clip(&x_at_most(-1.0), 1e-9).is_none());
    }

    #[test]
    fn touching_cut_leaves_segment_or_point() {
        let sq = ConvexPolygon::unit_square();
        let edge = sq.clip(&x_at_most(0.0), 1e-9).unwrap();
        assert!(edge.is_segment());
        assert_eq!(edge.perimeter(), 2.0);
        let corner = HalfPlane::new(Vector2::new(1.0, 1.0), 0.0).unwrap();
        let pt = sq.clip(&corner, 1e-9).unwrap();
        assert!(pt.is_point());
        assert_eq!(pt.vertices()[0], Point2::new(0.0, 0.0));
    }

    #[test]
    fn near_vertex_is_snapped_not_duplicated() {
        let sq = ConvexPolygon::unit_square();
        let cut = sq.clip(&x_at_most(1.0 - 1e-12), 1e-9).unwrap();
        assert_eq!(cut.len(), 4);
        for v in cut.vertices() {
            assert!(v.x <= 1.0 - 1e-12 + 1e-16);
        }
    }

    #[test]
    fn clips_degenerate_inputs() {
        let seg = ConvexPolygon::segment(Point2::new(0.0, 0.0), Point2::new(2.0, 0.0));
        let cut = seg.clip(&x_at_most(1.0), 1e-9).unwrap();
        assert!(cut.is_segment());
        assert!((cut.perimeter() - 2.0).abs() < 1e-15);
        let pt = ConvexPolygon::point(Point2::new(0.5, 0.5));
        assert_eq!(pt.clip(&x_at_most(1.0), 1e-9).unwrap(), pt);
        assert!(pt.clip(&x_at_most(0.0), 1e-9).is_none());
    }

    #[test]
    fn clip_all_with_own_halfplanes_is_identity() {
        let p = ConvexPolygon::regular(9, Point2::new(0.2, 0.1), 1.0, 0.4).unwrap();
        let big = ConvexPolygon::rectangle(-5.0, -5.0, 5.0, 5.0).unwrap();
        let again = big.clip_all(&p.halfplanes(), 1e-9).unwrap();
        assert_eq!(again.len(), p.len());
        assert!((again.area() - p.area()).abs() < 1e-12);
    }
}
