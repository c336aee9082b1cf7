use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{GeometryError, HalfPlane, Point2, Vector2};

/// Relative factor for the default vertex snap tolerance.
pub const SNAP_REL: f64 = 1e-9;

/// A closed convex region of the plane stored as its counterclockwise vertex
/// cycle.
///
/// Degenerate regions are first-class: one vertex is a point, two vertices a
/// segment. Consecutive vertices are distinct and no vertex lies on the line
/// through its neighbours (both up to the construction tolerance).
///
/// JSON form is `{"vertices": [[x, y], ...]}`. Clockwise input is re-oriented
/// on read; non-convex input is rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolygonRepr", into = "PolygonRepr")]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

#[derive(Serialize, Deserialize)]
struct PolygonRepr {
    vertices: Vec<Point2>,
}

impl TryFrom<PolygonRepr> for ConvexPolygon {
    type Error = GeometryError;

    fn try_from(repr: PolygonRepr) -> Result<Self, Self::Error> {
        ConvexPolygon::new(repr.vertices)
    }
}

impl From<ConvexPolygon> for PolygonRepr {
    fn from(poly: ConvexPolygon) -> Self {
        PolygonRepr {
            vertices: poly.vertices,
        }
    }
}

impl ConvexPolygon {
    /// Validates a vertex cycle given in either orientation, with the default
    /// tolerance `1e-9 * max(1, extent)` for merging near-duplicate and
    /// near-collinear vertices.
    pub fn new(vertices: Vec<Point2>) -> Result<Self, GeometryError> {
        let tol = SNAP_REL * extent(&vertices).max(1.0);
        Self::with_tolerance(vertices, tol)
    }

    pub fn with_tolerance(vertices: Vec<Point2>, tol: f64) -> Result<Self, GeometryError> {
        let vertices = canonicalize(vertices, tol)?;
        check_convex(&vertices, tol)?;
        Ok(Self { vertices })
    }

    /// Vertices already known to describe a convex region (e.g. the output of
    /// clipping a convex polygon); only the cleanup pass runs.
    pub(crate) fn from_convex_cycle(vertices: Vec<Point2>, tol: f64) -> Option<Self> {
        canonicalize(vertices, tol).ok().map(|vertices| Self { vertices })
    }

    /// Convex hull of an arbitrary point set (Andrew's monotone chain).
    pub fn from_hull(points: &[Point2]) -> Result<Self, GeometryError> {
        let tol = SNAP_REL * extent(points).max(1.0);
        Self::from_hull_with_tolerance(points, tol)
    }

    pub fn from_hull_with_tolerance(points: &[Point2], tol: f64) -> Result<Self, GeometryError> {
        if points.is_empty() {
            return Err(GeometryError::NoVertices);
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        pts.dedup();
        if pts.len() < 3 {
            return Ok(Self {
                vertices: canonicalize(pts, tol)?,
            });
        }
        let turn = |o: Point2, a: Point2, b: Point2| (a - o).cross(b - o);
        let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
        for &p in &pts {
            while hull.len() >= 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        let lower_len = hull.len() + 1;
        for &p in pts.iter().rev().skip(1) {
            while hull.len() >= lower_len && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
        Ok(Self {
            vertices: canonicalize(hull, tol)?,
        })
    }

    pub fn point(p: Point2) -> Self {
        Self { vertices: vec![p] }
    }

    /// Segment polygon; collapses to a point when `a == b`.
    pub fn segment(a: Point2, b: Point2) -> Self {
        if a == b {
            Self::point(a)
        } else {
            Self {
                vertices: vec![a, b],
            }
        }
    }

    /// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self, GeometryError> {
        Self::new(vec![
            Point2::new(x0, y0),
            Point2::new(x1, y0),
            Point2::new(x1, y1),
            Point2::new(x0, y1),
        ])
    }

    /// The unit square `[0, 1]^2`.
    pub fn unit_square() -> Self {
        Self {
            vertices: vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(1.0, 1.0),
                Point2::new(0.0, 1.0),
            ],
        }
    }

    /// Regular `sides`-gon inscribed in the circle of `radius` about `center`,
    /// first vertex at angle `phase`.
    pub fn regular(sides: usize, center: Point2, radius: f64, phase: f64) -> Result<Self, GeometryError> {
        if sides < 3 || !(radius > 0.0) {
            return Err(GeometryError::InvalidShape(format!(
                "regular polygon needs >= 3 sides and positive radius (got {sides}, {radius})"
            )));
        }
        let vertices = (0..sides)
            .map(|k| center + Vector2::from_angle(phase + TAU * k as f64 / sides as f64) * radius)
            .collect();
        Self::new(vertices)
    }

    #[inline]
    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    /// Always false; a polygon has at least one vertex.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    #[inline]
    pub fn is_point(&self) -> bool {
        self.vertices.len() == 1
    }

    #[inline]
    pub fn is_segment(&self) -> bool {
        self.vertices.len() == 2
    }

    /// Directed boundary edges `(v_i, v_{i+1})`. A segment yields its two
    /// opposite edges and a point yields none.
    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        let count = if n < 2 { 0 } else { n };
        (0..count).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Arithmetic mean of the vertices.
    pub fn vertex_centroid(&self) -> Point2 {
        let n = self.vertices.len() as f64;
        let (sx, sy) = self
            .vertices
            .iter()
            .fold((0.0, 0.0), |(sx, sy), v| (sx + v.x, sy + v.y));
        Point2::new(sx / n, sy / n)
    }

    /// Axis-aligned bounding box as `(min, max)` corners.
    pub fn bounding_box(&self) -> (Point2, Point2) {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for v in &self.vertices[1..] {
            lo.x = lo.x.min(v.x);
            lo.y = lo.y.min(v.y);
            hi.x = hi.x.max(v.x);
            hi.y = hi.y.max(v.y);
        }
        (lo, hi)
    }

    /// The default snap tolerance `1e-9 * max(1, diameter)`.
    pub fn default_tolerance(&self) -> f64 {
        SNAP_REL * self.diameter().max(1.0)
    }

    /// An H-representation: half-planes whose intersection is this polygon.
    ///
    /// Points and segments get explicit caps so that intersecting with them
    /// yields the degenerate set itself.
    pub fn halfplanes(&self) -> Vec<HalfPlane> {
        match self.vertices.as_slice() {
            [p] => [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]
                .into_iter()
                .map(|(dx, dy)| {
                    HalfPlane::through(*p, Vector2::new(dx, dy)).expect("axis normals are nonzero")
                })
                .collect(),
            [a, b] => {
                let dir = *b - *a;
                let side = dir.perp();
                vec![
                    HalfPlane::through(*a, side).expect("segment has distinct endpoints"),
                    HalfPlane::through(*a, -side).expect("segment has distinct endpoints"),
                    HalfPlane::through(*b, dir).expect("segment has distinct endpoints"),
                    HalfPlane::through(*a, -dir).expect("segment has distinct endpoints"),
                ]
            }
            _ => self
                .edges()
                .map(|(a, b)| {
                    let e = b - a;
                    HalfPlane::through(a, Vector2::new(e.dy, -e.dx)).expect("edges are nonzero")
                })
                .collect(),
        }
    }
}

/// Largest coordinate magnitude span, used to scale default tolerances.
fn extent(points: &[Point2]) -> f64 {
    let mut lo = (f64::INFINITY, f64::INFINITY);
    let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo = (lo.0.min(p.x), lo.1.min(p.y));
        hi = (hi.0.max(p.x), hi.1.max(p.y));
    }
    let span = (hi.0 - lo.0).max(hi.1 - lo.1);
    if span.is_finite() {
        span
    } else {
        0.0
    }
}

fn twice_signed_area(v: &[Point2]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a.x * b.y - a.y * b.x
        })
        .sum()
}

/// True when `m` lies within `tol` of the segment `[a, b]` and projects into it.
fn redundant(a: Point2, m: Point2, b: Point2, tol: f64) -> bool {
    let ab = b - a;
    let len = ab.norm();
    if len <= tol {
        return m.distance(a) <= tol;
    }
    let am = m - a;
    let along = am.dot(ab) / len;
    along >= -tol && along <= len + tol && ab.cross(am).abs() / len <= tol
}

/// Dedupes near-duplicate vertices, collapses collinear cycles to segments,
/// orients counterclockwise and drops near-collinear vertices.
fn canonicalize(mut v: Vec<Point2>, tol: f64) -> Result<Vec<Point2>, GeometryError> {
    if v.is_empty() {
        return Err(GeometryError::NoVertices);
    }
    if v.iter().any(|p| !p.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    v.dedup_by(|b, a| a.distance(*b) <= tol);
    while v.len() > 1 && v[v.len() - 1].distance(v[0]) <= tol {
        v.pop();
    }
    if v.len() <= 2 {
        return Ok(v);
    }

    // Collinear cycle: reduce to its extreme pair.
    let far = |from: Point2| {
        v.iter()
            .copied()
            .max_by(|p, q| from.distance_sq(*p).total_cmp(&from.distance_sq(*q)))
            .expect("nonempty")
    };
    let b = far(v[0]);
    let a = far(b);
    let ab = b - a;
    let len = ab.norm();
    let spread = v
        .iter()
        .map(|p| ab.cross(*p - a).abs() / len)
        .fold(0.0, f64::max);
    if spread <= tol {
        return Ok(if len <= tol { vec![a] } else { vec![a, b] });
    }

    if twice_signed_area(&v) < 0.0 {
        v.reverse();
    }

    let mut out: Vec<Point2> = Vec::with_capacity(v.len());
    for p in v {
        while out.len() >= 2 && redundant(out[out.len() - 2], out[out.len() - 1], p, tol) {
            out.pop();
        }
        out.push(p);
    }
    loop {
        let n = out.len();
        if n < 3 {
            break;
        }
        if redundant(out[n - 2], out[n - 1], out[0], tol) {
            out.pop();
        } else if redundant(out[n - 1], out[0], out[1], tol) {
            out.remove(0);
        } else {
            break;
        }
    }
    if out.len() < 3 {
        return canonicalize(out, tol);
    }
    Ok(out)
}

/// Local convexity at every vertex plus a total turning of exactly one
/// revolution (rules out self-overlapping star cycles).
fn check_convex(v: &[Point2], tol: f64) -> Result<(), GeometryError> {
    let n = v.len();
    if n < 3 {
        return Ok(());
    }
    let mut turning = 0.0;
    for i in 0..n {
        let a = v[(i + n - 1) % n];
        let m = v[i];
        let b = v[(i + 1) % n];
        let (e1, e2) = (m - a, b - m);
        let ab = b - a;
        let len = ab.norm();
        if len > 0.0 && ab.cross(m - a) / len > tol {
            return Err(GeometryError::NotConvex { index: i });
        }
        turning += e1.cross(e2).atan2(e1.dot(e2));
    }
    if (turning - TAU).abs() > 1e-6 {
        return Err(GeometryError::NotConvex { index: 0 });
    }
    Ok(())
}
