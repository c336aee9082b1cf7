//! Online bookkeeping of the nested feasible sets and the per-round geometry
//! that the certificates consume.
//!
//! Round `t` reveals a constraint `g_t`; the state moves from
//! `S_{t-1}` to `S_t = S_{t-1} ∩ {g_t <= 0}`. After the learner's action `x_t`
//! is known, [`diagnose_step`] measures its projection cost onto `S_t`, the
//! chord that the supporting line at the projection cuts from `S_{t-1}`, and
//! the one-round perimeter and area decreases.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ConvexPolygon, GeometryError, HalfPlane, Point2, Vector2};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("round {t}: revealed constraint empties the feasible set")]
    FeasibilityViolated { t: usize },
    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A revealed constraint function `g_t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintSpec {
    /// `g(x) = normal . x - offset`; Lipschitz constant `|normal|`.
    Affine { normal: Vector2, offset: f64 },
    /// `g(x) = lipschitz * dist(x, target)`; zero exactly on `target`.
    ScaledDistance { target: ConvexPolygon, lipschitz: f64 },
}

impl ConstraintSpec {
    /// The constraint value `g(x)`.
    pub fn value(&self, x: Point2) -> f64 {
        match self {
            ConstraintSpec::Affine { normal, offset } => normal.dot(x.to_vector()) - offset,
            ConstraintSpec::ScaledDistance { target, lipschitz } => lipschitz * target.distance(x),
        }
    }

    /// `(g(x))^+`.
    pub fn violation(&self, x: Point2) -> f64 {
        self.value(x).max(0.0)
    }

    pub fn lipschitz(&self) -> f64 {
        match self {
            ConstraintSpec::Affine { normal, .. } => normal.norm(),
            ConstraintSpec::ScaledDistance { lipschitz, .. } => *lipschitz,
        }
    }

    /// Checks finiteness and `Lipschitz <= g_max (1 + 1e-9)`.
    pub fn validate(&self, g_max: f64) -> Result<(), StateError> {
        let ok = match self {
            ConstraintSpec::Affine { normal, offset } => normal.is_finite() && offset.is_finite(),
            ConstraintSpec::ScaledDistance { lipschitz, .. } => lipschitz.is_finite() && *lipschitz > 0.0,
        };
        if !ok {
            return Err(StateError::InvalidConstraint(format!("{self:?}")));
        }
        let lip = self.lipschitz();
        if lip > g_max * (1.0 + 1e-9) {
            return Err(StateError::InvalidConstraint(format!(
                "Lipschitz constant {lip} exceeds G = {g_max}"
            )));
        }
        Ok(())
    }

    /// The zero sublevel set `{g <= 0}` as half-planes. `None` when the set is
    /// empty (a constant positive affine function); an empty list when it is
    /// the whole plane.
    pub fn feasible_halfplanes(&self) -> Option<Vec<HalfPlane>> {
        match self {
            ConstraintSpec::Affine { normal, offset } => match HalfPlane::new(*normal, *offset) {
                Ok(h) => Some(vec![h]),
                Err(_) if -offset <= 0.0 => Some(Vec::new()),
                Err(_) => None,
            },
            ConstraintSpec::ScaledDistance { target, .. } => Some(target.halfplanes()),
        }
    }
}

/// `(g(x))^+` for a constraint spec.
pub fn violation(spec: &ConstraintSpec, x: Point2) -> f64 {
    spec.violation(x)
}

/// The pair `(S_{t-1}, S_t)` with cached perimeters and areas.
#[derive(Clone, Debug)]
pub struct NestedState {
    current: ConvexPolygon,
    previous: ConvexPolygon,
    t: usize,
    perimeter_current: f64,
    area_current: f64,
    perimeter_previous: f64,
    area_previous: f64,
}

impl NestedState {
    /// State before any constraint: `S_0 = domain`.
    pub fn new(domain: ConvexPolygon) -> Self {
        let perimeter = domain.perimeter();
        let area = domain.area();
        Self {
            previous: domain.clone(),
            current: domain,
            t: 0,
            perimeter_current: perimeter,
            area_current: area,
            perimeter_previous: perimeter,
            area_previous: area,
        }
    }

    /// `S_t`.
    pub fn current(&self) -> &ConvexPolygon {
        &self.current
    }

    /// `S_{t-1}`.
    pub fn previous(&self) -> &ConvexPolygon {
        &self.previous
    }

    /// Number of constraints revealed so far.
    pub fn round(&self) -> usize {
        self.t
    }

    pub fn perimeter_current(&self) -> f64 {
        self.perimeter_current
    }

    pub fn area_current(&self) -> f64 {
        self.area_current
    }

    /// `delta_t = Perimeter(S_{t-1}) - Perimeter(S_t)`.
    pub fn delta_perimeter(&self) -> f64 {
        self.perimeter_previous - self.perimeter_current
    }

    /// `Delta_t = Area(S_{t-1}) - Area(S_t)`.
    pub fn delta_area(&self) -> f64 {
        self.area_previous - self.area_current
    }

    /// Intersects the current set with `{g <= 0}` and advances the round.
    /// The state is left untouched on error.
    pub fn reveal_constraint(&mut self, spec: &ConstraintSpec, tol: &Tolerances) -> Result<(), StateError> {
        let round = self.t + 1;
        let halfplanes = spec
            .feasible_halfplanes()
            .ok_or(StateError::FeasibilityViolated { t: round })?;
        let next = self
            .current
            .clip_all(&halfplanes, tol.snap)
            .ok_or(StateError::FeasibilityViolated { t: round })?;
        let perimeter = next.perimeter();
        let area = next.area();
        self.previous = std::mem::replace(&mut self.current, next);
        self.perimeter_previous = self.perimeter_current;
        self.area_previous = self.area_current;
        self.perimeter_current = perimeter;
        self.area_current = area;
        self.t = round;
        Ok(())
    }
}

/// Geometric detail of an active round; absent for inactive rounds and for
/// records read back from CSV.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepGeometry {
    /// Projection of `x_t` onto `S_t`.
    pub proj: Point2,
    /// Chord endpoint nearer to `proj`.
    pub chord_a: Point2,
    /// Chord endpoint farther from `proj`.
    pub chord_b: Point2,
    /// `min_{z in S_t} <p_t/|p_t|, z - proj>`; nonnegative up to rounding
    /// because `S_t` lies in the half-plane beyond the supporting line.
    pub support_gap: f64,
}

/// Per-round record.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub t: usize,
    /// The played action `x_t`.
    pub x: Point2,
    /// Projection cost `|p_t| = dist(x_t, S_t)`.
    pub p_norm: f64,
    /// Chord length `w_t = w_a + w_b`.
    pub w: f64,
    pub w_a: f64,
    pub w_b: f64,
    /// `delta_t`.
    pub delta_perim: f64,
    /// `Delta_t`.
    pub delta_area: f64,
    /// `(g_t(x_t))^+`.
    pub violation: f64,
    /// `f_t(x_t)`.
    pub loss: f64,
    pub active: bool,
    pub geometry: Option<StepGeometry>,
}

/// Builds the round-`t` record for action `x` after `S_t` was revealed.
///
/// Rounds with `|p_t| <= tol.active` are inactive: the chord is not built and
/// all widths are zero.
pub fn diagnose_step(
    state: &NestedState,
    x: Point2,
    loss_value: f64,
    viol: f64,
    tol: &Tolerances,
) -> Result<StepDiagnostics, StateError> {
    let proj = state.current.project_point(x);
    let p = proj - x;
    let p_norm = p.norm();
    let mut diag = StepDiagnostics {
        t: state.t,
        x,
        p_norm,
        w: 0.0,
        w_a: 0.0,
        w_b: 0.0,
        delta_perim: state.delta_perimeter(),
        delta_area: state.delta_area(),
        violation: viol,
        loss: loss_value,
        active: false,
        geometry: None,
    };
    if p_norm <= tol.active {
        return Ok(diag);
    }
    let unit = p * (1.0 / p_norm);
    let (mut a, mut b) = state.previous.chord(proj, unit.perp(), tol.snap)?;
    let (mut w_a, mut w_b) = (a.distance(proj), b.distance(proj));
    if w_a > w_b {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut w_a, &mut w_b);
    }
    let support_gap = state
        .current
        .vertices()
        .iter()
        .map(|z| unit.dot(*z - proj))
        .fold(f64::INFINITY, f64::min);
    diag.w_a = w_a;
    diag.w_b = w_b;
    diag.w = w_a + w_b;
    diag.active = true;
    diag.geometry = Some(StepGeometry {
        proj,
        chord_a: a,
        chord_b: b,
        support_gap,
    });
    Ok(diag)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn affine(nx: f64, ny: f64, c: f64) -> ConstraintSpec {
        ConstraintSpec::Affine {
            normal: Vector2::new(nx, ny),
            offset: c,
        }
    }

    fn tol() -> Tolerances {
        Tolerances::for_diameter(2.0_f64.sqrt())
    }

    #[test]
    fn reveal_affine_constraints() {
        let mut s = NestedState::new(ConvexPolygon::unit_square());
        s.reveal_constraint(&affine(1.0, 0.0, 0.5), &tol()).unwrap();
        assert_eq!(s.current(), &ConvexPolygon::rectangle(0.0, 0.0, 0.5, 1.0).unwrap());
        assert_eq!(s.previous(), &ConvexPolygon::unit_square());
        assert_eq!(s.round(), 1);
        assert!((s.delta_perimeter() - 1.0).abs() < 1e-15);
        assert!((s.delta_area() - 0.5).abs() < 1e-15);

        let mut s = NestedState::new(ConvexPolygon::unit_square());
        s.reveal_constraint(&affine(1.0, 0.0, 5.0), &tol()).unwrap();
        assert_eq!(s.current(), &ConvexPolygon::unit_square());
        assert_eq!(s.delta_perimeter(), 0.0);

        let before = s.current().clone();
        let err = s.reveal_constraint(&affine(1.0, 0.0, -1.0), &tol()).unwrap_err();
        assert_eq!(err, StateError::FeasibilityViolated { t: 2 });
        assert_eq!(s.current(), &before);
        assert_eq!(s.round(), 1);
    }

    #[test]
    fn reveal_scaled_distance() {
        let mut s = NestedState::new(ConvexPolygon::unit_square());
        let target = ConvexPolygon::rectangle(0.5, 0.5, 2.0, 2.0).unwrap();
        let spec = ConstraintSpec::ScaledDistance { target, lipschitz: 2.0 };
        s.reveal_constraint(&spec, &tol()).unwrap();
        assert!((s.current().area() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn zero_normal_affine() {
        let mut s = NestedState::new(ConvexPolygon::unit_square());
        s.reveal_constraint(&affine(0.0, 0.0, 1.0), &tol()).unwrap();
        assert_eq!(s.current(), &ConvexPolygon::unit_square());
        assert!(s.reveal_constraint(&affine(0.0, 0.0, -1.0), &tol()).is_err());
    }

    #[test]
    fn violation_values() {
        assert!((violation(&affine(1.0, 0.0, 0.5), Point2::new(0.8, 0.0)) - 0.3).abs() < 1e-15);
        assert_eq!(violation(&affine(1.0, 0.0, 0.5), Point2::new(0.2, 0.0)), 0.0);
        let sd = ConstraintSpec::ScaledDistance {
            target: ConvexPolygon::unit_square(),
            lipschitz: 2.0,
        };
        assert_eq!(violation(&sd, Point2::new(2.0, 0.5)), 2.0);
    }

    #[test]
    fn lipschitz_validation() {
        assert!(affine(3.0, 4.0, 0.0).validate(5.0).is_ok());
        assert!(affine(3.0, 4.0, 0.0).validate(4.9).is_err());
        assert!(affine(f64::NAN, 0.0, 0.0).validate(1.0).is_err());
    }

    #[test]
    fn rectangle_step_diagnostics() {
        let big = ConvexPolygon::rectangle(0.0, 0.0, 2.0, 2.0).unwrap();
        let tol = Tolerances::for_diameter(big.diameter());
        let mut s = NestedState::new(big);
        s.reveal_constraint(&affine(1.0, 0.0, 1.0), &tol).unwrap();
        let d = diagnose_step(&s, Point2::new(2.0, 1.0), 0.0, 1.0, &tol).unwrap();
        let g = d.geometry.unwrap();
        assert!(d.active);
        assert_eq!(g.proj, Point2::new(1.0, 1.0));
        assert_eq!(d.p_norm, 1.0);
        let mut ends = [g.chord_a, g.chord_b];
        ends.sort_by(|a, b| a.y.total_cmp(&b.y));
        assert_eq!(ends, [Point2::new(1.0, 0.0), Point2::new(1.0, 2.0)]);
        assert_eq!(d.w, 2.0);
        assert_eq!((d.w_a, d.w_b), (1.0, 1.0));
        assert_eq!(d.delta_perim, 2.0);
        assert_eq!(d.delta_area, 2.0);
        assert!(g.support_gap >= 0.0);
    }

    #[test]
    fn inside_action_is_inactive() {
        let mut s = NestedState::new(ConvexPolygon::rectangle(0.0, 0.0, 2.0, 2.0).unwrap());
        let tol = Tolerances::for_diameter(s.current().diameter());
        s.reveal_constraint(&affine(1.0, 0.0, 1.0), &tol).unwrap();
        let d = diagnose_step(&s, Point2::new(0.5, 1.0), 0.0, 0.0, &tol).unwrap();
        assert!(!d.active);
        assert_eq!(d.p_norm, 0.0);
        assert_eq!(d.w, 0.0);
        assert!(d.geometry.is_none());

        let mut s = NestedState::new(ConvexPolygon::unit_square());
        s.reveal_constraint(&affine(1.0, 0.0, 3.0), &tol).unwrap();
        let d = diagnose_step(&s, Point2::new(1.0, 1.0), 0.0, 0.0, &tol).unwrap();
        assert_eq!((d.delta_perim, d.delta_area, d.p_norm), (0.0, 0.0, 0.0));
    }

    #[test]
    fn widths_are_ordered() {
        let mut s = NestedState::new(ConvexPolygon::rectangle(0.0, 0.0, 2.0, 2.0).unwrap());
        let tol = Tolerances::for_diameter(s.current().diameter());
        s.reveal_constraint(&affine(1.0, 0.0, 1.0), &tol).unwrap();
        let d = diagnose_step(&s, Point2::new(1.5, 1.8), 0.0, 0.0, &tol).unwrap();
        assert!(d.w_a <= d.w_b);
        assert!((d.w_a - 0.2).abs() < 1e-12 && (d.w_b - 1.8).abs() < 1e-12);
        let g = d.geometry.unwrap();
        assert!(g.chord_a.distance(Point2::new(1.0, 2.0)) < 1e-12);
    }
}
