use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::algorithms::LearnerKind;
use crate::certificates::OfflineOptions;
use crate::geometry::ConvexPolygon;
use crate::instances::GeneratorSpec;
use crate::tolerance::{Tolerances, TOL_ENV};

fn default_learners() -> Vec<LearnerKind> {
    vec![LearnerKind::CocoOgd]
}

/// `2^10, 2^11, ..., 2^17`.
pub fn default_t_grid() -> Vec<usize> {
    (10..=17).map(|k| 1usize << k).collect()
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("coco-lab-out")
}

fn default_domain() -> ConvexPolygon {
    ConvexPolygon::unit_square()
}

fn default_lipschitz() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    /// Replaces the certificate base slack `1e-7`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<f64>,
}

/// One experiment, read from a single JSON file. Omitted fields take their
/// defaults; the resolved form is echoed into every output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub generator: GeneratorSpec,
    #[serde(default = "default_learners")]
    pub learners: Vec<LearnerKind>,
    #[serde(default = "default_t_grid", rename = "T_grid", alias = "t_grid")]
    pub t_grid: Vec<usize>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_domain")]
    pub domain: ConvexPolygon,
    /// `G`.
    #[serde(default = "default_lipschitz", rename = "G", alias = "lipschitz")]
    pub lipschitz: f64,
    #[serde(default)]
    pub tolerance: ToleranceOverrides,
    #[serde(default)]
    pub offline: OfflineOptions,
}

/// Command-line adjustments applied on top of the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(dir) = &overrides.output_dir {
            self.output_dir = dir.clone();
        }
        if let Some(seed) = overrides.seed {
            self.seeds = vec![seed];
        }
    }

    /// Checks the grid, seeds, learners and numeric fields. A sweep also needs
    /// at least three horizons to fit slopes.
    pub fn validate(&self, for_sweep: bool) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.t_grid.is_empty() {
            return bad("T_grid is empty".into());
        }
        if self.t_grid.contains(&0) {
            return bad("T_grid entries must be positive".into());
        }
        if self.t_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("T_grid must be strictly increasing, got {:?}", self.t_grid));
        }
        if for_sweep && self.t_grid.len() < 3 {
            return bad(format!("a sweep needs at least 3 horizons, got {}", self.t_grid.len()));
        }
        if self.seeds.is_empty() {
            return bad("seeds is empty".into());
        }
        if self.learners.is_empty() {
            return bad("learners is empty".into());
        }
        let mut learners = self.learners.clone();
        learners.sort();
        learners.dedup();
        if learners.len() != self.learners.len() {
            return bad("learners contains duplicates".into());
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.seeds.len() {
            return bad("seeds contains duplicates".into());
        }
        if !(self.lipschitz > 0.0 && self.lipschitz.is_finite()) {
            return bad(format!("G must be positive and finite, got {}", self.lipschitz));
        }
        if let Some(b) = self.tolerance.base {
            if !(b > 0.0 && b.is_finite()) {
                return bad(format!("tolerance.base must be positive, got {b}"));
            }
        }
        if self.offline.max_iters == 0 || !(self.offline.grad_tol > 0.0) {
            return bad("offline options must be positive".into());
        }
        Ok(())
    }

    /// Base slack from `COCO_LAB_TOL` if set, else the config override, else
    /// the default.
    pub fn tolerances(&self, diameter: f64) -> Tolerances {
        let env_set = std::env::var(TOL_ENV).map(|s| s.trim().parse::<f64>().is_ok()).unwrap_or(false);
        match (env_set, self.tolerance.base) {
            (false, Some(base)) => Tolerances::with_base(diameter, base),
            _ => Tolerances::from_env(diameter),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"generator": {"name": "rotating_halfplanes", "kernel_radius": 0.2}}"#;

    #[test]
    fn defaults_are_filled_in() {
        let cfg = ExperimentConfig::from_json_str(MINIMAL).unwrap();
        assert_eq!(cfg.t_grid, default_t_grid());
        assert_eq!(cfg.t_grid.first(), Some(&1024));
        assert_eq!(cfg.t_grid.last(), Some(&131072));
        assert_eq!(cfg.learners, vec![LearnerKind::CocoOgd]);
        assert_eq!(cfg.lipschitz, 1.0);
        cfg.validate(true).unwrap();
        let echoed = serde_json::to_value(&cfg).unwrap();
        assert!(echoed.get("T_grid").is_some());
        assert_eq!(echoed["generator"]["kernel_sides"], 32);
    }

    #[test]
    fn grid_validation() {
        let mut cfg = ExperimentConfig::from_json_str(MINIMAL).unwrap();
        cfg.t_grid = vec![];
        assert!(cfg.validate(false).is_err());
        cfg.t_grid = vec![16, 16, 32];
        assert!(cfg.validate(false).is_err());
        cfg.t_grid = vec![16, 32];
        assert!(cfg.validate(false).is_ok());
        assert!(cfg.validate(true).is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"generator": {"name": "static_box"}, "T_grid": [4]}"#;
        assert!(ExperimentConfig::from_json_str(text).is_err());
        let text = r#"{"generator": {"name": "rotating_halfplanes", "kernel_radius": 0.2}, "tgrid": [4]}"#;
        assert!(ExperimentConfig::from_json_str(text).is_err());
    }

    #[test]
    fn overrides() {
        let mut cfg = ExperimentConfig::from_json_str(MINIMAL).unwrap();
        cfg.apply(&Overrides {
            output_dir: Some("elsewhere".into()),
            seed: Some(9),
            jobs: None,
        });
        assert_eq!(cfg.seeds, vec![9]);
        assert_eq!(cfg.output_dir, PathBuf::from("elsewhere"));
    }
}
