use serde::{Deserialize, Serialize};

use crate::geometry::{Point2, Vector2};

/// A convex loss `f_t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossSpec {
    /// `f(x) = c . x`.
    Linear { c: Vector2 },
    /// `curvature / 2 * |x - center|^2`, continued linearly (Huber style) once
    /// the gradient norm reaches `clip`, so the gradient never exceeds `clip`.
    Quadratic {
        center: Point2,
        curvature: f64,
        clip: f64,
    },
}

impl LossSpec {
    pub fn value(&self, x: Point2) -> f64 {
        match *self {
            LossSpec::Linear { c } => c.dot(x.to_vector()),
            LossSpec::Quadratic {
                center,
                curvature,
                clip,
            } => {
                let r = x.distance(center);
                if curvature * r <= clip {
                    0.5 * curvature * r * r
                } else {
                    clip * r - 0.5 * clip * clip / curvature
                }
            }
        }
    }

    pub fn gradient(&self, x: Point2) -> Vector2 {
        match *self {
            LossSpec::Linear { c } => c,
            LossSpec::Quadratic {
                center,
                curvature,
                clip,
            } => {
                let d = x - center;
                let r = d.norm();
                if curvature * r <= clip {
                    d * curvature
                } else {
                    d * (clip / r)
                }
            }
        }
    }

    /// Global bound on the gradient norm.
    pub fn lipschitz(&self) -> f64 {
        match *self {
            LossSpec::Linear { c } => c.norm(),
            LossSpec::Quadratic { clip, .. } => clip,
        }
    }

    /// Lipschitz constant of the gradient.
    pub fn smoothness(&self) -> f64 {
        match *self {
            LossSpec::Linear { .. } => 0.0,
            LossSpec::Quadratic { curvature, .. } => curvature,
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, LossSpec::Linear { .. })
    }

    pub fn is_valid(&self) -> bool {
        match *self {
            LossSpec::Linear { c } => c.is_finite(),
            LossSpec::Quadratic {
                center,
                curvature,
                clip,
            } => center.is_finite() && curvature > 0.0 && curvature.is_finite() && clip > 0.0 && clip.is_finite(),
        }
    }
}
