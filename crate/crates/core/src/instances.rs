//! Instance generators.
//!
//! Every generator certifies a nonempty kernel polygon contained in every
//! revealed feasible set, so the feasibility assumption holds by
//! construction. Sequences are a pure function of `(generator, params,
//! seed)`; the JSON form stores only those and re-derives the rest unless
//! asked to materialize.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::constraint::ConstraintSpec;
use crate::geometry::{ConvexPolygon, Point2, Vector2};
use crate::loss::LossSpec;

/// Rotation between consecutive constraint normals, `pi (sqrt 5 - 1) / 2`.
pub fn rotation_increment() -> f64 {
    PI * (5.0_f64.sqrt() - 1.0) / 2.0
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("kernel is not feasible for constraint {t}")]
    KernelViolated { t: usize },
    #[error("round {t}: {what} is not {g}-Lipschitz")]
    Lipschitz { t: usize, what: &'static str, g: f64 },
    #[error("instance file: {0}")]
    Format(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn default_kernel_sides() -> usize {
    32
}

fn default_kernel_fraction() -> f64 {
    0.5
}

/// Generator name and parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// Support lines of a kernel polygon inscribed in a disk of
    /// `kernel_radius` about the domain's vertex centroid, with normals
    /// rotating by [`rotation_increment`]; linear losses push the iterate
    /// toward the next cut.
    RotatingHalfplanes {
        kernel_radius: f64,
        #[serde(default = "default_kernel_sides")]
        kernel_sides: usize,
    },
    /// Axis-aligned cuts that move the sides of the domain's bounding box
    /// geometrically toward an axis-aligned kernel square; a fixed linear
    /// loss pushes toward one corner.
    ShrinkingBox {
        shrink_rate: f64,
        #[serde(default = "default_kernel_fraction")]
        kernel_fraction: f64,
    },
    /// The same constraint and loss every round.
    Static {
        constraint: ConstraintSpec,
        loss: LossSpec,
    },
}

impl GeneratorSpec {
    pub fn name(&self) -> &'static str {
        match self {
            GeneratorSpec::RotatingHalfplanes { .. } => "rotating_halfplanes",
            GeneratorSpec::ShrinkingBox { .. } => "shrinking_box",
            GeneratorSpec::Static { .. } => "static",
        }
    }

    pub fn generate(
        &self,
        horizon: usize,
        domain: &ConvexPolygon,
        lipschitz: f64,
        seed: u64,
    ) -> Result<Instance, InstanceError> {
        match self {
            GeneratorSpec::RotatingHalfplanes {
                kernel_radius,
                kernel_sides,
            } => gen_rotating_halfplanes_with(horizon, domain, *kernel_radius, *kernel_sides, lipschitz, seed),
            GeneratorSpec::ShrinkingBox {
                shrink_rate,
                kernel_fraction,
            } => gen_shrinking_box_with(horizon, domain, *shrink_rate, *kernel_fraction, lipschitz, seed),
            GeneratorSpec::Static { constraint, loss } => {
                let mut inst = gen_static(horizon, domain, constraint.clone(), loss.clone())?;
                inst.seed = seed;
                inst.id = instance_id(self.name(), horizon, seed);
                Ok(inst)
            }
        }
    }
}

/// A horizon-`T` sequence of losses and constraints over a polygonal domain.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub id: String,
    pub generator: GeneratorSpec,
    pub domain: ConvexPolygon,
    pub horizon: usize,
    /// Common Lipschitz constant `G`.
    pub lipschitz: f64,
    /// Euclidean diameter `D` of the domain.
    pub diameter: f64,
    pub seed: u64,
    /// Certified subset of every feasible set.
    pub kernel: ConvexPolygon,
    pub losses: Vec<LossSpec>,
    pub constraints: Vec<ConstraintSpec>,
}

fn instance_id(name: &str, horizon: usize, seed: u64) -> String {
    format!("{name}-T{horizon}-s{seed}")
}

fn check_common(horizon: usize, lipschitz: f64) -> Result<(), InstanceError> {
    if horizon == 0 {
        return Err(InstanceError::InvalidParams("horizon must be >= 1".into()));
    }
    if !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(InstanceError::InvalidParams(format!("G must be positive, got {lipschitz}")));
    }
    Ok(())
}

/// Distance from `c` to the boundary of `domain` when `c` is inside, or a
/// negative number otherwise.
fn inradius_at(domain: &ConvexPolygon, c: Point2) -> f64 {
    if domain.len() < 3 {
        return -1.0;
    }
    domain
        .halfplanes()
        .iter()
        .map(|h| -h.signed_distance(c))
        .fold(f64::INFINITY, f64::min)
}

/// Rotating-tangent adversary with the default 32-gon kernel.
pub fn gen_rotating_halfplanes(
    horizon: usize,
    domain: &ConvexPolygon,
    kernel_radius: f64,
    lipschitz: f64,
    seed: u64,
) -> Result<Instance, InstanceError> {
    gen_rotating_halfplanes_with(horizon, domain, kernel_radius, default_kernel_sides(), lipschitz, seed)
}

pub fn gen_rotating_halfplanes_with(
    horizon: usize,
    domain: &ConvexPolygon,
    kernel_radius: f64,
    kernel_sides: usize,
    lipschitz: f64,
    seed: u64,
) -> Result<Instance, InstanceError> {
    check_common(horizon, lipschitz)?;
    let center = domain.vertex_centroid();
    if !(kernel_radius > 0.0) || inradius_at(domain, center) < kernel_radius {
        return Err(InstanceError::InvalidGeometry(format!(
            "kernel disk of radius {kernel_radius} does not fit in the domain around its centroid"
        )));
    }
    if kernel_sides < 3 {
        return Err(InstanceError::InvalidParams("kernel_sides must be >= 3".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal_phase: f64 = rng.gen::<f64>() * TAU;
    let kernel_phase: f64 = rng.gen::<f64>() * TAU;
    let kernel = ConvexPolygon::regular(kernel_sides, center, kernel_radius, kernel_phase)
        .map_err(|e| InstanceError::InvalidGeometry(e.to_string()))?;

    let step = rotation_increment();
    let direction = |i: usize| Vector2::from_angle(normal_phase + step * i as f64);
    let constraints = (0..horizon)
        .map(|i| {
            let u = direction(i);
            ConstraintSpec::Affine {
                normal: u * lipschitz,
                offset: lipschitz * kernel.support(u),
            }
        })
        .collect();
    let losses = (0..horizon)
        .map(|i| LossSpec::Linear {
            c: direction(i + 1) * -lipschitz,
        })
        .collect();
    let generator = GeneratorSpec::RotatingHalfplanes {
        kernel_radius,
        kernel_sides,
    };
    Ok(Instance {
        id: instance_id(generator.name(), horizon, seed),
        generator,
        domain: domain.clone(),
        horizon,
        lipschitz,
        diameter: domain.diameter(),
        seed,
        kernel,
        losses,
        constraints,
    })
}

/// Shrinking-box family with the default kernel fraction.
pub fn gen_shrinking_box(
    horizon: usize,
    domain: &ConvexPolygon,
    shrink_rate: f64,
    lipschitz: f64,
    seed: u64,
) -> Result<Instance, InstanceError> {
    gen_shrinking_box_with(horizon, domain, shrink_rate, default_kernel_fraction(), lipschitz, seed)
}

pub fn gen_shrinking_box_with(
    horizon: usize,
    domain: &ConvexPolygon,
    shrink_rate: f64,
    kernel_fraction: f64,
    lipschitz: f64,
    seed: u64,
) -> Result<Instance, InstanceError> {
    check_common(horizon, lipschitz)?;
    if !(shrink_rate > 0.0 && shrink_rate < 1.0) {
        return Err(InstanceError::InvalidParams(format!(
            "shrink_rate must lie in (0, 1), got {shrink_rate}"
        )));
    }
    if !(kernel_fraction > 0.0 && kernel_fraction <= 1.0) {
        return Err(InstanceError::InvalidParams(format!(
            "kernel_fraction must lie in (0, 1], got {kernel_fraction}"
        )));
    }
    let center = domain.vertex_centroid();
    let inradius = inradius_at(domain, center);
    if !(inradius > 0.0) {
        return Err(InstanceError::InvalidGeometry(
            "domain has no interior around its centroid".into(),
        ));
    }
    let half = kernel_fraction * inradius * FRAC_1_SQRT_2;
    let kernel = ConvexPolygon::rectangle(center.x - half, center.y - half, center.x + half, center.y + half)
        .map_err(|e| InstanceError::InvalidGeometry(e.to_string()))?;

    // Sides: 0 = right (+x), 1 = top (+y), 2 = left (-x), 3 = bottom (-y).
    let outward = [
        Vector2::new(1.0, 0.0),
        Vector2::new(0.0, 1.0),
        Vector2::new(-1.0, 0.0),
        Vector2::new(0.0, -1.0),
    ];
    let kernel_level: Vec<f64> = outward.iter().map(|u| kernel.support(*u)).collect();
    let gap0: Vec<f64> = outward
        .iter()
        .zip(&kernel_level)
        .map(|(u, k)| domain.support(*u) - k)
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let corner = Vector2::new(
        if rng.gen::<bool>() { 1.0 } else { -1.0 },
        if rng.gen::<bool>() { 1.0 } else { -1.0 },
    ) * FRAC_1_SQRT_2;
    let mut order = [0usize, 1, 2, 3];
    let mut cuts = [0i32; 4];
    let mut constraints = Vec::with_capacity(horizon);
    for i in 0..horizon {
        if i % 4 == 0 {
            order.shuffle(&mut rng);
        }
        let side = order[i % 4];
        cuts[side] += 1;
        let level = kernel_level[side] + gap0[side] * (1.0 - shrink_rate).powi(cuts[side]);
        constraints.push(ConstraintSpec::Affine {
            normal: outward[side] * lipschitz,
            offset: lipschitz * level,
        });
    }
    let loss = LossSpec::Linear {
        c: corner * -lipschitz,
    };
    let generator = GeneratorSpec::ShrinkingBox {
        shrink_rate,
        kernel_fraction,
    };
    Ok(Instance {
        id: instance_id(generator.name(), horizon, seed),
        generator,
        domain: domain.clone(),
        horizon,
        lipschitz,
        diameter: domain.diameter(),
        seed,
        kernel,
        losses: vec![loss; horizon],
        constraints,
    })
}

/// Time-invariant instance. The kernel is `domain ∩ {g <= 0}`; the common
/// Lipschitz constant is the larger of the two functions' constants.
pub fn gen_static(
    horizon: usize,
    domain: &ConvexPolygon,
    one_constraint: ConstraintSpec,
    one_loss: LossSpec,
) -> Result<Instance, InstanceError> {
    let lipschitz = one_constraint.lipschitz().max(one_loss.lipschitz());
    let lipschitz = if lipschitz > 0.0 { lipschitz } else { 1.0 };
    check_common(horizon, lipschitz)?;
    if !one_loss.is_valid() {
        return Err(InstanceError::InvalidParams(format!("invalid loss {one_loss:?}")));
    }
    let tol = crate::tolerance::Tolerances::for_diameter(domain.diameter());
    let kernel = one_constraint
        .feasible_halfplanes()
        .and_then(|hs| domain.clip_all(&hs, tol.snap))
        .ok_or(InstanceError::KernelViolated { t: 1 })?;
    let generator = GeneratorSpec::Static {
        constraint: one_constraint.clone(),
        loss: one_loss.clone(),
    };
    Ok(Instance {
        id: instance_id(generator.name(), horizon, 0),
        generator,
        domain: domain.clone(),
        horizon,
        lipschitz,
        diameter: domain.diameter(),
        seed: 0,
        kernel,
        losses: vec![one_loss; horizon],
        constraints: vec![one_constraint; horizon],
    })
}

impl Instance {
    /// Re-checks the generator guarantees: kernel inside the domain and inside
    /// every `{g_t <= tol}`, every loss and constraint `G`-Lipschitz, and `D`
    /// equal to the domain diameter.
    pub fn certify(&self, tol: f64) -> Result<(), InstanceError> {
        if self.losses.len() != self.horizon || self.constraints.len() != self.horizon {
            return Err(InstanceError::Format("sequence length differs from T".into()));
        }
        if (self.diameter - self.domain.diameter()).abs() > tol {
            return Err(InstanceError::InvalidGeometry("D is not the domain diameter".into()));
        }
        for v in self.kernel.vertices() {
            if !self.domain.contains(*v, tol) {
                return Err(InstanceError::InvalidGeometry("kernel leaves the domain".into()));
            }
        }
        let g_cap = self.lipschitz * (1.0 + 1e-9);
        for (i, (f, g)) in self.losses.iter().zip(&self.constraints).enumerate() {
            let t = i + 1;
            if !f.is_valid() || f.lipschitz() > g_cap {
                return Err(InstanceError::Lipschitz { t, what: "loss", g: self.lipschitz });
            }
            if g.validate(self.lipschitz).is_err() {
                return Err(InstanceError::Lipschitz {
                    t,
                    what: "constraint",
                    g: self.lipschitz,
                });
            }
            if self.kernel.vertices().iter().any(|v| g.value(*v) > tol) {
                return Err(InstanceError::KernelViolated { t });
            }
        }
        Ok(())
    }

    pub fn loss(&self, t: usize) -> &LossSpec {
        &self.losses[t - 1]
    }

    pub fn constraint(&self, t: usize) -> &ConstraintSpec {
        &self.constraints[t - 1]
    }

    /// JSON form `{domain, T, G, D, seed, generator, params, kernel}`, plus
    /// `losses` and `constraints` when `materialize` is set.
    pub fn to_json(&self, materialize: bool) -> Result<Value, InstanceError> {
        let mut params = serde_json::to_value(&self.generator)?;
        if let Value::Object(map) = &mut params {
            map.remove("name");
        }
        let mut out = serde_json::json!({
            "domain": self.domain,
            "T": self.horizon,
            "G": self.lipschitz,
            "D": self.diameter,
            "seed": self.seed,
            "generator": self.generator.name(),
            "params": params,
            "kernel": self.kernel,
        });
        if materialize {
            out["losses"] = serde_json::to_value(&self.losses)?;
            out["constraints"] = serde_json::to_value(&self.constraints)?;
        }
        Ok(out)
    }

    /// Reads the JSON form, regenerating the sequences when they are not
    /// materialized and checking that the stored kernel matches.
    pub fn from_json(value: &Value) -> Result<Instance, InstanceError> {
        let field = |k: &str| {
            value
                .get(k)
                .ok_or_else(|| InstanceError::Format(format!("missing field `{k}`")))
        };
        let domain: ConvexPolygon = serde_json::from_value(field("domain")?.clone())?;
        let horizon: usize = serde_json::from_value(field("T")?.clone())?;
        let lipschitz: f64 = serde_json::from_value(field("G")?.clone())?;
        let seed: u64 = serde_json::from_value(field("seed")?.clone())?;
        let kernel: ConvexPolygon = serde_json::from_value(field("kernel")?.clone())?;
        let name = field("generator")?
            .as_str()
            .ok_or_else(|| InstanceError::Format("`generator` must be a string".into()))?;
        let mut spec = field("params")?.clone();
        match &mut spec {
            Value::Object(map) => {
                map.insert("name".into(), Value::String(name.to_string()));
            }
            _ => return Err(InstanceError::Format("`params` must be an object".into())),
        }
        let generator: GeneratorSpec = serde_json::from_value(spec)?;
        let mut inst = generator.generate(horizon, &domain, lipschitz, seed)?;
        if let (Some(l), Some(c)) = (value.get("losses"), value.get("constraints")) {
            inst.losses = serde_json::from_value(l.clone())?;
            inst.constraints = serde_json::from_value(c.clone())?;
        }
        if inst.kernel != kernel {
            return Err(InstanceError::Format("stored kernel differs from the regenerated one".into()));
        }
        if let Some(d) = value.get("D").and_then(Value::as_f64) {
            if d != inst.diameter {
                return Err(InstanceError::Format("stored D differs from the domain diameter".into()));
            }
        }
        Ok(inst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> ConvexPolygon {
        ConvexPolygon::unit_square()
    }

    #[test]
    fn rotating_single_round() {
        let inst = gen_rotating_halfplanes(1, &square(), 0.2, 1.0, 7).unwrap();
        assert_eq!(inst.horizon, 1);
        let ConstraintSpec::Affine { normal, offset } = inst.constraint(1).clone() else {
            panic!("affine expected");
        };
        // Support line of the inscribed kernel: within [r cos(pi/m), r] of the center.
        let c = Point2::new(0.5, 0.5);
        let dist = offset - normal.dot(c.to_vector());
        let r = 0.2;
        assert!(dist <= r + 1e-12 && dist >= r * (PI / 32.0).cos() - 1e-12, "{dist}");
        inst.certify(1e-12).unwrap();
    }

    #[test]
    fn rotating_kernel_is_feasible_everywhere() {
        let inst = gen_rotating_halfplanes(500, &square(), 0.3, 2.0, 3).unwrap();
        inst.certify(1e-12).unwrap();
        for g in &inst.constraints {
            assert!((g.lipschitz() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rotating_rejects_oversized_kernel() {
        assert!(matches!(
            gen_rotating_halfplanes(10, &square(), 0.6, 1.0, 1),
            Err(InstanceError::InvalidGeometry(_))
        ));
    }

    #[test]
    fn shrinking_box_is_certified_and_nested_toward_kernel() {
        let inst = gen_shrinking_box(64, &square(), 0.1, 1.0, 5).unwrap();
        inst.certify(1e-12).unwrap();
        assert_eq!(inst.constraints.len(), 64);
        // After 16 cycles every side sits at kernel + gap * 0.9^16.
        let mut right = f64::INFINITY;
        for g in &inst.constraints {
            if let ConstraintSpec::Affine { normal, offset } = g {
                if normal.dx > 0.5 {
                    right = right.min(*offset / normal.dx);
                }
            }
        }
        let k = inst.kernel.support(Vector2::new(1.0, 0.0));
        assert!((right - (k + (1.0 - k) * 0.9f64.powi(16))).abs() < 1e-12);
    }

    #[test]
    fn static_instance() {
        let g = ConstraintSpec::Affine {
            normal: Vector2::new(1.0, 0.0),
            offset: 0.5,
        };
        let f = LossSpec::Linear { c: Vector2::new(0.0, 1.0) };
        let inst = gen_static(1, &square(), g.clone(), f).unwrap();
        assert_eq!(inst.kernel, ConvexPolygon::rectangle(0.0, 0.0, 0.5, 1.0).unwrap());
        inst.certify(1e-12).unwrap();
        let empty = ConstraintSpec::Affine {
            normal: Vector2::new(1.0, 0.0),
            offset: -1.0,
        };
        assert!(gen_static(4, &square(), empty, LossSpec::Linear { c: Vector2::ZERO }).is_err());
    }

    #[test]
    fn json_round_trip_regenerates() {
        let inst = gen_rotating_halfplanes(50, &square(), 0.25, 1.0, 11).unwrap();
        let compact = inst.to_json(false).unwrap();
        assert!(compact.get("losses").is_none());
        assert_eq!(compact["generator"], "rotating_halfplanes");
        assert_eq!(Instance::from_json(&compact).unwrap(), inst);
        let full = inst.to_json(true).unwrap();
        assert_eq!(Instance::from_json(&full).unwrap(), inst);
    }

    #[test]
    fn same_seed_same_serialization() {
        let a = gen_shrinking_box(40, &square(), 0.05, 1.0, 9).unwrap();
        let b = gen_shrinking_box(40, &square(), 0.05, 1.0, 9).unwrap();
        let c = gen_shrinking_box(40, &square(), 0.05, 1.0, 10).unwrap();
        let ser = |i: &Instance| serde_json::to_string(&i.to_json(true).unwrap()).unwrap();
        assert_eq!(ser(&a), ser(&b));
        assert_ne!(ser(&a), ser(&c));
    }
}
