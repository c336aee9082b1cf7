use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ccv_bound, ccv_bound_tight, CertError};
use crate::algorithms::Trace;
use crate::constraint::NestedState;
use crate::geometry::{ConvexPolygon, Point2, Vector2};
use crate::instances::Instance;
use crate::loss::LossSpec;
use crate::tolerance::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OfflineOptions {
    /// Iteration cap per start of projected gradient descent.
    pub max_iters: usize,
    /// Stop once the gradient mapping norm is at most this.
    pub grad_tol: f64,
}

impl Default for OfflineOptions {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            grad_tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub x_star: Point2,
    pub offline_cost: f64,
    pub online_cost: f64,
    pub regret: f64,
    pub ccv: f64,
    pub bound_ccv: f64,
    pub bound_ccv_tight: f64,
    pub horizon: usize,
    /// `"vertex_enumeration"` or `"projected_gradient"`.
    pub method: String,
    pub converged: bool,
    pub iterations: usize,
}

/// Sum of the losses with identical quadratic terms merged.
struct SummedLoss {
    linear: Vector2,
    quadratics: Vec<(LossSpec, f64)>,
}

impl SummedLoss {
    fn new(losses: &[LossSpec]) -> Self {
        let mut linear = Vector2::ZERO;
        let mut groups: BTreeMap<[u64; 4], (LossSpec, f64)> = BTreeMap::new();
        for f in losses {
            match *f {
                LossSpec::Linear { c } => linear = linear + c,
                LossSpec::Quadratic {
                    center,
                    curvature,
                    clip,
                } => {
                    let key = [center.x.to_bits(), center.y.to_bits(), curvature.to_bits(), clip.to_bits()];
                    groups.entry(key).or_insert((f.clone(), 0.0)).1 += 1.0;
                }
            }
        }
        Self {
            linear,
            quadratics: groups.into_values().collect(),
        }
    }

    fn value(&self, x: Point2) -> f64 {
        self.linear.dot(x.to_vector()) + self.quadratics.iter().map(|(f, m)| m * f.value(x)).sum::<f64>()
    }

    fn gradient(&self, x: Point2) -> Vector2 {
        self.quadratics
            .iter()
            .fold(self.linear, |g, (f, m)| g + f.gradient(x) * *m)
    }

    fn smoothness(&self) -> f64 {
        self.quadratics.iter().map(|(f, m)| m * f.smoothness()).sum()
    }
}

fn replay_final_set(instance: &Instance) -> Result<ConvexPolygon, CertError> {
    let tol = Tolerances::for_diameter(instance.diameter);
    let mut state = NestedState::new(instance.domain.clone());
    for g in &instance.constraints {
        state.reveal_constraint(g, &tol)?;
    }
    Ok(state.current().clone())
}

/// `sum_t f_t(x)`, summed in round order.
fn total_cost(losses: &[LossSpec], x: Point2) -> f64 {
    losses.iter().map(|f| f.value(x)).sum()
}

/// Best fixed action in hindsight over `S_T`, with default options.
pub fn offline_benchmark(instance: &Instance, trace: &Trace) -> Result<RegretReport, CertError> {
    offline_benchmark_with(instance, trace, &OfflineOptions::default())
}

/// Linear loss sequences are minimized by scanning the vertices of `S_T`;
/// anything else runs projected gradient descent with step `1/L` from every
/// vertex and the vertex centroid, keeping the best iterate seen.
pub fn offline_benchmark_with(
    instance: &Instance,
    trace: &Trace,
    opts: &OfflineOptions,
) -> Result<RegretReport, CertError> {
    if trace.steps.len() != instance.horizon {
        return Err(CertError::Mismatch(format!(
            "trace has {} rounds, instance has {}",
            trace.steps.len(),
            instance.horizon
        )));
    }
    let set = replay_final_set(instance)?;
    let summed = SummedLoss::new(&instance.losses);
    let smooth = summed.smoothness();

    let (x_star, method, converged, iterations) = if smooth == 0.0 {
        let mut best = set.vertices()[0];
        let mut best_val = summed.linear.dot(best.to_vector());
        for &v in &set.vertices()[1..] {
            let val = summed.linear.dot(v.to_vector());
            if val < best_val {
                best = v;
                best_val = val;
            }
        }
        (best, "vertex_enumeration", true, 0)
    } else {
        let mut starts = set.vertices().to_vec();
        starts.push(set.vertex_centroid());
        let step = 1.0 / smooth;
        let mut best = starts[0];
        let mut best_val = summed.value(best);
        let mut converged = false;
        let mut iterations = 0;
        for start in starts {
            let mut x = start;
            let v = summed.value(x);
            if v < best_val {
                best = x;
                best_val = v;
            }
            for _ in 0..opts.max_iters {
                iterations += 1;
                let next = set.project_point(x - summed.gradient(x) * step);
                let mapping = smooth * x.distance(next);
                x = next;
                let v = summed.value(x);
                if v < best_val {
                    best = x;
                    best_val = v;
                }
                if mapping <= opts.grad_tol {
                    converged = true;
                    break;
                }
            }
        }
        (best, "projected_gradient", converged, iterations)
    };

    let offline_cost = total_cost(&instance.losses, x_star);
    let online_cost = trace.online_cost();
    Ok(RegretReport {
        x_star,
        offline_cost,
        online_cost,
        regret: online_cost - offline_cost,
        ccv: trace.ccv(),
        bound_ccv: ccv_bound(instance.lipschitz, instance.horizon, instance.diameter),
        bound_ccv_tight: ccv_bound_tight(instance.lipschitz, instance.horizon, instance.diameter),
        horizon: instance.horizon,
        method: method.to_string(),
        converged,
        iterations,
    })
}
