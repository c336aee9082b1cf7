use serde::{Deserialize, Serialize};

use crate::geometry::SNAP_REL;

/// Base slack for certificate checks, relative to `max(1, D)`.
pub const DEFAULT_BASE: f64 = 1e-7;
/// Threshold on the projection cost below which a round counts as inactive,
/// relative to `D`.
pub const ACTIVE_REL: f64 = 1e-10;
/// Environment variable that overrides [`DEFAULT_BASE`].
pub const TOL_ENV: &str = "COCO_LAB_TOL";

/// Numerical tolerances for one domain, all derived from its diameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Certificate slack multiplier (before scaling by `max(1, D)`).
    pub base: f64,
    /// Vertex snap tolerance for clipping, `1e-9 * max(1, D)`.
    pub snap: f64,
    /// Projection-cost activity threshold, `1e-10 * D`.
    pub active: f64,
    /// `max(1, D)`.
    pub scale: f64,
}

impl Tolerances {
    pub fn for_diameter(diameter: f64) -> Self {
        Self::with_base(diameter, DEFAULT_BASE)
    }

    pub fn with_base(diameter: f64, base: f64) -> Self {
        let scale = diameter.max(1.0);
        Self {
            base,
            snap: SNAP_REL * scale,
            active: ACTIVE_REL * diameter,
            scale,
        }
    }

    /// Reads the base from `COCO_LAB_TOL` when it is set to a positive number.
    pub fn from_env(diameter: f64) -> Self {
        let base = std::env::var(TOL_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|b| *b > 0.0 && b.is_finite())
            .unwrap_or(DEFAULT_BASE);
        Self::with_base(diameter, base)
    }

    /// Allowed negative slack for per-step inequalities: `base * max(1, D)`.
    #[inline]
    pub fn slack(&self) -> f64 {
        self.base * self.scale
    }
}
