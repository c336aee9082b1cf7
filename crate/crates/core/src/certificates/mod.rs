//! Numerical certificates for the CCV proof chain, evaluated on recorded
//! traces.
//!
//! Per active round `t` (projection cost `p = |p_t| > 0`, chord width `w`):
//!
//! * area decrease: `Delta_t >= p w / 2`;
//! * perimeter decrease: `delta_t >= sqrt(p^2 + w^2 / 4) - w / 2`;
//! * combined: `max(delta_t, alpha Delta_t) >= p^{3/2} sqrt(alpha / (D alpha + 2))`.
//!
//! Over a whole trace: the perimeter and area decreases telescope to the
//! budgets of `S_0`, which are at most `pi D` and `pi D^2 / 4`; hence
//! `sum p^{3/2} <= (3/2) sqrt 2 pi D^{3/2}`, and by Hölder
//! `sum p <= T^{1/3} (sum p^{3/2})^{2/3}`, which with `CCV <= G sum p` gives
//! `CCV <= (3/2 sqrt 2 pi)^{2/3} G T^{1/3} D`.

mod offline;

pub use offline::{offline_benchmark, offline_benchmark_with, OfflineOptions, RegretReport};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algorithms::{SetMeasures, Trace};
use crate::constraint::{StateError, StepDiagnostics};
use crate::geometry::{ConvexPolygon, HalfPlane};
use crate::tolerance::Tolerances;

#[derive(Debug, Error)]
pub enum CertError {
    #[error("replaying constraints: {0}")]
    Replay(#[from] StateError),
    #[error("trace and instance disagree: {0}")]
    Mismatch(String),
}

/// Additive allowance on the absolute budgets and on the theorem bound.
pub const BUDGET_ALLOWANCE: f64 = 1e-6;
/// Additive allowance on the Hölder step.
pub const HOLDER_ALLOWANCE: f64 = 1e-9;

/// `(3/2 sqrt 2 pi)^{2/3}`, the constant of the CCV bound (about 3.5414).
pub fn ccv_constant() -> f64 {
    (1.5 * 2.0_f64.sqrt() * PI).powf(2.0 / 3.0)
}

/// `(3/2 sqrt 2 pi)^{2/3} G T^{1/3} D`.
pub fn ccv_bound_tight(lipschitz: f64, horizon: usize, diameter: f64) -> f64 {
    ccv_constant() * lipschitz * (horizon as f64).cbrt() * diameter
}

/// `4 G T^{1/3} D`.
pub fn ccv_bound(lipschitz: f64, horizon: usize, diameter: f64) -> f64 {
    4.0 * lipschitz * (horizon as f64).cbrt() * diameter
}

/// `sqrt(p^2 + w^2/4) - w/2`, evaluated without cancellation.
pub fn perimeter_lemma_bound(p: f64, w: f64) -> f64 {
    let half = 0.5 * w;
    let root = p.hypot(half);
    if root + half > 0.0 {
        p * p / (root + half)
    } else {
        0.0
    }
}

/// `p^{3/2} sqrt(alpha / (D alpha + 2))`.
pub fn max_bound_rhs(p: f64, alpha: f64, diameter: f64) -> f64 {
    p.powf(1.5) * (alpha / (diameter * alpha + 2.0)).sqrt()
}

/// Chord width at which the perimeter bound and `alpha p w / 2` coincide:
/// `2 sqrt(p / (alpha (2 + alpha p)))`.
pub fn equalizing_width(p: f64, alpha: f64) -> f64 {
    2.0 * (p / (alpha * (2.0 + alpha * p))).sqrt()
}

/// `Delta_t - p w / 2`, or `None` for an inactive round.
pub fn check_area_lemma(diag: &StepDiagnostics) -> Option<f64> {
    diag.active.then_some(diag.delta_area - 0.5 * diag.p_norm * diag.w)
}

/// `delta_t - (sqrt(p^2 + w^2/4) - w/2)`, or `None` for an inactive round.
pub fn check_perim_lemma(diag: &StepDiagnostics) -> Option<f64> {
    diag.active
        .then(|| diag.delta_perim - perimeter_lemma_bound(diag.p_norm, diag.w))
}

/// `max(delta_t, alpha Delta_t) - p^{3/2} sqrt(alpha / (D alpha + 2))`, or
/// `None` for an inactive round.
pub fn check_max_bound(diag: &StepDiagnostics, alpha: f64, diameter: f64) -> Option<f64> {
    diag.active.then(|| {
        diag.delta_perim.max(alpha * diag.delta_area) - max_bound_rhs(diag.p_norm, alpha, diameter)
    })
}

/// Residuals of the exact identities behind the two decrease lemmas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionRecord {
    pub t: usize,
    /// `|Area(triangle x a b) - p w / 2|`.
    pub triangle_area_residual: f64,
    /// `| |x - a| - sqrt(p^2 + w_a^2) |`.
    pub pythagoras_a_residual: f64,
    /// `| |x - b| - sqrt(p^2 + w_b^2) |`.
    pub pythagoras_b_residual: f64,
    /// `| (Per(hull(U ∪ {x})) - Per(U)) - (|x-a| + |x-b| - |a-b|) |` with
    /// `U = S_{t-1} ∩ H_t`.
    pub hull_identity_residual: f64,
    pub failure: Option<String>,
}

impl ConstructionRecord {
    pub fn max_residual(&self) -> f64 {
        self.triangle_area_residual
            .max(self.pythagoras_a_residual)
            .max(self.pythagoras_b_residual)
            .max(self.hull_identity_residual)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.failure.is_none() && self.max_residual() <= tol
    }

    fn failed(t: usize, why: impl Into<String>) -> Self {
        Self {
            t,
            triangle_area_residual: f64::NAN,
            pythagoras_a_residual: f64::NAN,
            pythagoras_b_residual: f64::NAN,
            hull_identity_residual: f64::NAN,
            failure: Some(why.into()),
        }
    }
}

/// Rebuilds the triangle `x a b`, the Pythagorean lengths and the set
/// `U = S_{t-1} ∩ H_t` for an active round and reports how far each exact
/// identity is from holding. Reconstruction problems are reported in
/// `failure` rather than returned as errors.
pub fn check_proof_constructions(
    diag: &StepDiagnostics,
    s_prev: &ConvexPolygon,
    s_curr: &ConvexPolygon,
) -> ConstructionRecord {
    let t = diag.t;
    if !diag.active {
        return ConstructionRecord::failed(t, "inactive round");
    }
    let Some(geo) = diag.geometry else {
        return ConstructionRecord::failed(t, "round has no geometry");
    };
    let (x, a, b, proj) = (diag.x, geo.chord_a, geo.chord_b, geo.proj);
    let p = diag.p_norm;

    let triangle = 0.5 * (a - x).cross(b - x).abs();
    let triangle_area_residual = (triangle - 0.5 * p * diag.w).abs();
    let xa = x.distance(a);
    let xb = x.distance(b);
    let pythagoras_a_residual = (xa - p.hypot(diag.w_a)).abs();
    let pythagoras_b_residual = (xb - p.hypot(diag.w_b)).abs();

    // H_t = {z : p_t . z >= p_t . proj}, stored as {-p_hat . z <= -p_hat . proj}.
    let p_vec = proj - x;
    let Ok(h) = HalfPlane::through(proj, -p_vec) else {
        return ConstructionRecord::failed(t, "degenerate projection direction");
    };
    let tol = Tolerances::for_diameter(s_prev.diameter());
    let Some(u) = s_prev.clip(&h, tol.snap) else {
        return ConstructionRecord::failed(t, "S_(t-1) ∩ H_t is empty");
    };
    let mut pts = u.vertices().to_vec();
    pts.push(x);
    let hull = match ConvexPolygon::from_hull_with_tolerance(&pts, tol.snap) {
        Ok(hull) => hull,
        Err(e) => return ConstructionRecord::failed(t, format!("hull: {e}")),
    };
    let measured = hull.perimeter() - u.perimeter();
    let predicted = xa + xb - a.distance(b);
    let hull_identity_residual = (measured - predicted).abs();

    // S_t must sit inside U for the perimeter comparison to apply.
    let failure = s_curr
        .vertices()
        .iter()
        .any(|z| h.signed_distance(*z) > tol.snap)
        .then(|| "S_t leaves H_t".to_string());

    ConstructionRecord {
        t,
        triangle_area_residual,
        pythagoras_a_residual,
        pythagoras_b_residual,
        hull_identity_residual,
        failure,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepCertificate {
    pub t: usize,
    pub area_lemma_slack: f64,
    pub perim_lemma_slack: f64,
    pub max_bound_slack: f64,
    /// `None` when the round carries no geometry (e.g. read from CSV).
    pub supporting_hp_ok: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AggregateCertificate {
    pub horizon: usize,
    pub active_steps: usize,
    /// `sum |p_t|^{3/2}`.
    pub sum_p32: f64,
    /// `sum |p_t|`.
    pub sum_p: f64,
    /// `sum delta_t`.
    pub sum_delta: f64,
    /// `sum Delta_t`.
    #[serde(rename = "sum_Delta")]
    pub sum_area_delta: f64,
    pub ccv: f64,
    pub min_area_lemma_slack: f64,
    pub min_perim_lemma_slack: f64,
    pub min_max_bound_slack: f64,
    pub lemma_failures: usize,
    /// Every active round satisfies the three per-round lemmas.
    pub lemmas_ok: bool,
    /// `delta_t, Delta_t >= -tol` and the supporting-line property on every round.
    pub monotone_ok: bool,
    /// `sum delta_t` equals `Per(S_0) - Per(S_T)`, and the same for area.
    pub telescoping_ok: bool,
    /// `sum delta_t <= min(Per(S_0), pi D)`.
    pub perim_budget_ok: bool,
    /// `sum Delta_t <= min(Area(S_0), pi D^2 / 4)`.
    pub area_budget_ok: bool,
    /// `sum |p_t|^{3/2} <= (3/2) sqrt 2 pi D^{3/2}`.
    pub p32_budget_ok: bool,
    /// `sum |p_t| <= T^{1/3} (sum |p_t|^{3/2})^{2/3}`.
    pub holder_ok: bool,
    /// `CCV <= G sum |p_t|`.
    pub ccv_reduction_ok: bool,
    /// `CCV <= (3/2 sqrt 2 pi)^{2/3} G T^{1/3} D`.
    pub theorem_ok: bool,
    pub bound_ccv_tight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    /// Per-round slacks for active rounds; kept in memory only.
    #[serde(skip)]
    pub per_step: Vec<StepCertificate>,
    pub aggregate: AggregateCertificate,
    pub alpha: f64,
    pub diameter: f64,
    pub lipschitz: f64,
    /// Allowed negative per-round slack.
    pub slack_tolerance: f64,
}

impl CertificateReport {
    pub fn all_pass(&self) -> bool {
        self.failures().is_empty()
    }

    /// Names of the failed checks.
    pub fn failures(&self) -> Vec<&'static str> {
        let a = &self.aggregate;
        [
            ("lemmas", a.lemmas_ok),
            ("monotone", a.monotone_ok),
            ("telescoping", a.telescoping_ok),
            ("perimeter_budget", a.perim_budget_ok),
            ("area_budget", a.area_budget_ok),
            ("p32_budget", a.p32_budget_ok),
            ("holder", a.holder_ok),
            ("ccv_reduction", a.ccv_reduction_ok),
            ("theorem", a.theorem_ok),
        ]
        .into_iter()
        .filter_map(|(name, ok)| (!ok).then_some(name))
        .collect()
    }
}

/// Certificates with `alpha = 2 / D`.
pub fn check_trace(trace: &Trace, tol: &Tolerances) -> CertificateReport {
    let d = trace.header.cfg.diameter;
    check_aggregates(
        &trace.steps,
        &trace.measures,
        d,
        trace.header.cfg.lipschitz,
        2.0 / d,
        tol,
    )
}

/// Evaluates every per-round and whole-trace inequality.
pub fn check_aggregates(
    steps: &[StepDiagnostics],
    measures: &SetMeasures,
    diameter: f64,
    lipschitz: f64,
    alpha: f64,
    tol: &Tolerances,
) -> CertificateReport {
    let slack = tol.slack();
    let mut agg = AggregateCertificate {
        horizon: steps.len(),
        min_area_lemma_slack: f64::INFINITY,
        min_perim_lemma_slack: f64::INFINITY,
        min_max_bound_slack: f64::INFINITY,
        monotone_ok: true,
        ..Default::default()
    };
    let mut per_step = Vec::new();
    for s in steps {
        agg.sum_p += s.p_norm;
        agg.sum_p32 += s.p_norm.powf(1.5);
        agg.sum_delta += s.delta_perim;
        agg.sum_area_delta += s.delta_area;
        agg.ccv += s.violation;
        if s.delta_perim < -slack || s.delta_area < -slack {
            agg.monotone_ok = false;
        }
        let (Some(area), Some(perim), Some(maxb)) = (
            check_area_lemma(s),
            check_perim_lemma(s),
            check_max_bound(s, alpha, diameter),
        ) else {
            continue;
        };
        agg.active_steps += 1;
        agg.min_area_lemma_slack = agg.min_area_lemma_slack.min(area);
        agg.min_perim_lemma_slack = agg.min_perim_lemma_slack.min(perim);
        agg.min_max_bound_slack = agg.min_max_bound_slack.min(maxb);
        if area < -slack || perim < -slack || maxb < -slack {
            agg.lemma_failures += 1;
        }
        let supporting_hp_ok = s.geometry.map(|g| g.support_gap >= -slack);
        if supporting_hp_ok == Some(false) {
            agg.monotone_ok = false;
        }
        per_step.push(StepCertificate {
            t: s.t,
            area_lemma_slack: area,
            perim_lemma_slack: perim,
            max_bound_slack: maxb,
            supporting_hp_ok,
        });
    }
    agg.lemmas_ok = agg.lemma_failures == 0;

    let horizon = steps.len();
    let perim_drop = measures.perimeter_initial - measures.perimeter_final;
    let area_drop = measures.area_initial - measures.area_final;
    agg.telescoping_ok =
        (agg.sum_delta - perim_drop).abs() <= slack && (agg.sum_area_delta - area_drop).abs() <= slack;
    agg.perim_budget_ok = agg.sum_delta <= measures.perimeter_initial + BUDGET_ALLOWANCE
        && agg.sum_delta <= PI * diameter + BUDGET_ALLOWANCE;
    agg.area_budget_ok = agg.sum_area_delta <= measures.area_initial + BUDGET_ALLOWANCE
        && agg.sum_area_delta <= 0.25 * PI * diameter * diameter + BUDGET_ALLOWANCE;
    agg.p32_budget_ok = agg.sum_p32 <= 1.5 * 2.0_f64.sqrt() * PI * diameter.powf(1.5) + BUDGET_ALLOWANCE;
    agg.holder_ok = agg.sum_p <= (horizon as f64).cbrt() * agg.sum_p32.powf(2.0 / 3.0) + HOLDER_ALLOWANCE;
    agg.ccv_reduction_ok = agg.ccv <= lipschitz * agg.sum_p + slack;
    agg.bound_ccv_tight = ccv_bound_tight(lipschitz, horizon, diameter);
    agg.theorem_ok = agg.ccv <= agg.bound_ccv_tight + BUDGET_ALLOWANCE;

    CertificateReport {
        per_step,
        aggregate: agg,
        alpha,
        diameter,
        lipschitz,
        slack_tolerance: slack,
    }
}
