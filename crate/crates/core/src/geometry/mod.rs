//! Convex-polygon primitives in the plane.
//!
//! Every feasible set the simulator handles is an intersection of finitely
//! many half-planes with a polygonal domain, so it is represented exactly as
//! a [`ConvexPolygon`]. Degenerate sets (segments and points) are valid
//! polygons; a segment's perimeter counts both sides.

mod chord;
mod clip;
mod halfplane;
mod measure;
mod point;
mod polygon;
mod project;

pub use halfplane::HalfPlane;
pub use point::{Point2, Vector2};
pub use polygon::{ConvexPolygon, SNAP_REL};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("polygon has no vertices")]
    NoVertices,
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("vertex cycle is not convex (at vertex {index})")]
    NotConvex { index: usize },
    #[error("zero or non-finite normal/direction")]
    DegenerateNormal,
    #[error("point lies {distance:e} away from the polygon")]
    OffPolygon { distance: f64 },
    #[error("invalid shape: {0}")]
    InvalidShape(String),
}
