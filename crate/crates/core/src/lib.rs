pub mod algorithms;
pub mod certificates;
pub mod constraint;
pub mod geometry;
pub mod harness;
pub mod instances;
pub mod loss;
pub mod tolerance;

pub use geometry::{ConvexPolygon, GeometryError, HalfPlane, Point2, Vector2};
