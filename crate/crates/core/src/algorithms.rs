//! Online learners: double-projection OGD and two reference baselines.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraint::{diagnose_step, NestedState, StateError, StepDiagnostics};
use crate::geometry::{ConvexPolygon, Point2, Vector2};
use crate::instances::Instance;
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    #[error("round {t}: gradient norm {norm} exceeds G = {lipschitz}")]
    GradientTooLarge { t: usize, norm: f64, lipschitz: f64 },
    #[error("invalid learner configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    State(#[from] StateError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// `eta_t = D / (G sqrt t)`.
    #[default]
    InverseSqrt,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    /// Euclidean diameter `D` of the domain.
    pub diameter: f64,
    /// Common Lipschitz constant `G`.
    pub lipschitz: f64,
    pub x_init: Point2,
    #[serde(default)]
    pub step_rule: StepRule,
}

impl LearnerConfig {
    /// `D` and `G` from the instance; starts at the domain's vertex centroid.
    pub fn for_instance(instance: &Instance) -> Self {
        Self {
            diameter: instance.diameter,
            lipschitz: instance.lipschitz,
            x_init: instance.domain.vertex_centroid(),
            step_rule: StepRule::InverseSqrt,
        }
    }

    pub fn validate(&self, domain: &ConvexPolygon, tol: f64) -> Result<(), RunError> {
        if !(self.diameter > 0.0 && self.diameter.is_finite()) {
            return Err(RunError::InvalidConfig(format!("D must be positive, got {}", self.diameter)));
        }
        if !(self.lipschitz > 0.0 && self.lipschitz.is_finite()) {
            return Err(RunError::InvalidConfig(format!("G must be positive, got {}", self.lipschitz)));
        }
        if !domain.contains(self.x_init, tol) {
            return Err(RunError::InvalidConfig("x_init lies outside the domain".into()));
        }
        Ok(())
    }
}

/// Step size at round `t >= 1`.
pub fn step_size(cfg: &LearnerConfig, t: usize) -> f64 {
    match cfg.step_rule {
        StepRule::InverseSqrt => cfg.diameter / (cfg.lipschitz * (t as f64).sqrt()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerState {
    /// Action to play at round `t`.
    pub x: Point2,
    /// Intermediate iterate from the last update (`x_init` before any update).
    pub y: Point2,
    /// Round the action `x` is played in.
    pub t: usize,
}

impl LearnerState {
    pub fn new(x_init: Point2) -> Self {
        Self {
            x: x_init,
            y: x_init,
            t: 1,
        }
    }
}

/// One update of the double-projection learner after round `state.t`:
/// `y = P_{S_{t-1}}(x_t - eta_t grad)`, then `x_{t+1} = P_{S_t}(y)`.
pub fn coco_step(
    cfg: &LearnerConfig,
    state: &LearnerState,
    grad: Vector2,
    s_prev: &ConvexPolygon,
    s_curr: &ConvexPolygon,
) -> Result<LearnerState, RunError> {
    check_gradient(cfg, state.t, grad)?;
    let eta = step_size(cfg, state.t);
    let y = s_prev.project_point(state.x - grad * eta);
    let x = s_curr.project_point(y);
    Ok(LearnerState { x, y, t: state.t + 1 })
}

fn check_gradient(cfg: &LearnerConfig, t: usize, grad: Vector2) -> Result<(), RunError> {
    let norm = grad.norm();
    if !(norm <= cfg.lipschitz * (1.0 + 1e-6)) {
        return Err(RunError::GradientTooLarge {
            t,
            norm,
            lipschitz: cfg.lipschitz,
        });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    /// Double-projection OGD.
    CocoOgd,
    /// OGD projected onto the domain only; ignores constraints.
    UnconstrainedOgd,
    /// Replays the last action projected onto the latest feasible set; never
    /// takes a gradient step.
    LazyFeasible,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 3] = [
        LearnerKind::CocoOgd,
        LearnerKind::UnconstrainedOgd,
        LearnerKind::LazyFeasible,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::CocoOgd => "coco_ogd",
            LearnerKind::UnconstrainedOgd => "unconstrained_ogd",
            LearnerKind::LazyFeasible => "lazy_feasible",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub learner: LearnerKind,
    pub cfg: LearnerConfig,
    pub instance_id: String,
    pub seed: u64,
    pub horizon: usize,
}

/// Perimeter and area of `S_0` (the domain) and of `S_T`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetMeasures {
    pub perimeter_initial: f64,
    pub area_initial: f64,
    pub perimeter_final: f64,
    pub area_final: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub header: TraceHeader,
    pub steps: Vec<StepDiagnostics>,
    pub measures: SetMeasures,
    pub final_set: ConvexPolygon,
}

impl Trace {
    pub fn ccv(&self) -> f64 {
        self.steps.iter().map(|s| s.violation).sum()
    }

    pub fn online_cost(&self) -> f64 {
        self.steps.iter().map(|s| s.loss).sum()
    }

    pub fn active_steps(&self) -> usize {
        self.steps.iter().filter(|s| s.active).count()
    }
}

/// Runs `learner` for the full horizon with tolerances derived from `D`.
pub fn run(learner: LearnerKind, cfg: &LearnerConfig, instance: &Instance) -> Result<Trace, RunError> {
    let tol = Tolerances::for_diameter(instance.diameter);
    run_observed(learner, cfg, instance, &tol, |_, _, _| {})
}

/// Runs the online protocol, calling `observe(diag, S_{t-1}, S_t)` after each
/// round's diagnostics are built.
///
/// Round `t`: play `x_t`; observe `f_t, g_t`; record loss and violation;
/// reveal `S_t`; diagnose; update the learner.
pub fn run_observed<F>(
    learner: LearnerKind,
    cfg: &LearnerConfig,
    instance: &Instance,
    tol: &Tolerances,
    mut observe: F,
) -> Result<Trace, RunError>
where
    F: FnMut(&StepDiagnostics, &ConvexPolygon, &ConvexPolygon),
{
    cfg.validate(&instance.domain, tol.snap)?;
    let domain = &instance.domain;
    let mut nested = NestedState::new(domain.clone());
    let mut state = LearnerState::new(cfg.x_init);
    let mut steps = Vec::with_capacity(instance.horizon);

    for t in 1..=instance.horizon {
        let x = state.x;
        let loss = instance.loss(t);
        let constraint = instance.constraint(t);
        let loss_value = loss.value(x);
        let viol = constraint.violation(x);
        nested.reveal_constraint(constraint, tol)?;
        let diag = diagnose_step(&nested, x, loss_value, viol, tol)?;
        observe(&diag, nested.previous(), nested.current());
        steps.push(diag);

        let grad = loss.gradient(x);
        state = match learner {
            LearnerKind::CocoOgd => coco_step(cfg, &state, grad, nested.previous(), nested.current())?,
            LearnerKind::UnconstrainedOgd => {
                check_gradient(cfg, t, grad)?;
                let y = domain.project_point(x - grad * step_size(cfg, t));
                LearnerState { x: y, y, t: t + 1 }
            }
            LearnerKind::LazyFeasible => {
                let next = nested.current().project_point(x);
                LearnerState {
                    x: next,
                    y: next,
                    t: t + 1,
                }
            }
        };
    }

    let measures = SetMeasures {
        perimeter_initial: domain.perimeter(),
        area_initial: domain.area(),
        perimeter_final: nested.perimeter_current(),
        area_final: nested.area_current(),
    };
    Ok(Trace {
        header: TraceHeader {
            learner,
            cfg: *cfg,
            instance_id: instance.id.clone(),
            seed: instance.seed,
            horizon: instance.horizon,
        },
        steps,
        measures,
        final_set: nested.current().clone(),
    })
}
