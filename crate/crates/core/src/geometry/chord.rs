use super::{ConvexPolygon, GeometryError, Point2, Vector2};

impl ConvexPolygon {
    /// Extreme points `(a, b)` of the polygon's intersection with the line
    /// `through + s * direction`, ordered so that `a` has the smaller parameter
    /// `s`. When the line only touches the polygon, `a == b`.
    ///
    /// `through` must lie within `tol` of the polygon and `direction` should
    /// be a unit vector.
    pub fn chord(
        &self,
        through: Point2,
        direction: Vector2,
        tol: f64,
    ) -> Result<(Point2, Point2), GeometryError> {
        let dist = self.distance(through);
        if dist > tol {
            return Err(GeometryError::OffPolygon { distance: dist });
        }
        let dir = direction.normalized().ok_or(GeometryError::DegenerateNormal)?;
        match self.vertices() {
            [p] => return Ok((*p, *p)),
            [a, b] => {
                let off_line = |p: Point2| (p - through).cross(dir).abs();
                if off_line(*a) <= tol && off_line(*b) <= tol {
                    let (sa, sb) = ((*a - through).dot(dir), (*b - through).dot(dir));
                    return Ok(if sa <= sb { (*a, *b) } else { (*b, *a) });
                }
                let p = self.project_point(through);
                return Ok((p, p));
            }
            _ => {}
        }
        // Cyrus-Beck: intersect the parameter interval over all edge half-planes.
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for (a, b) in self.edges() {
            let e = b - a;
            let len = e.norm();
            let outward = Vector2::new(e.dy / len, -e.dx / len);
            // outward . (through + s dir - a) <= 0
            let rate = outward.dot(dir);
            let slack = -outward.dot(through - a);
            if rate.abs() <= f64::EPSILON {
                continue;
            }
            let s = slack / rate;
            if rate > 0.0 {
                hi = hi.min(s);
            } else {
                lo = lo.max(s);
            }
        }
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(GeometryError::InvalidShape("unbounded chord".into()));
        }
        if lo > hi {
            // The line misses the polygon by at most `tol`; collapse onto the
            // nearest polygon point.
            let p = self.project_point(through);
            return Ok((p, p));
        }
        Ok((through + dir * lo, through + dir * hi))
    }
}
