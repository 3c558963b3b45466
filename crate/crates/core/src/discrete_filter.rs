//! Discrete Bayes filter over the five path indices.
//!
//! Prediction multiplies the posterior by a banded, column-stochastic Markov
//! matrix (a perturbation of the identity), update multiplies elementwise by
//! the inverse measurement model from [`crate::likelihood`] and renormalizes.
//! Under a uniform prior over path indices the inverse measurement model can
//! stand in for the measurement likelihood.

use crate::geometry::GaussianScalar;
use crate::likelihood::{lane_occupancy, BoundarySet, PathPosterior, NUM_PATHS};

pub const MAX_EPSILON: f64 = 0.3;

/// Neighbour transition rate `epsilon` and signed asymmetry `eta`.
///
/// Positive `eta` favours transitions towards higher path indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionParams {
    pub epsilon: f64,
    pub eta: f64,
}

impl TransitionParams {
    pub fn new(epsilon: f64, eta: f64) -> Self {
        Self { epsilon, eta }
    }

    /// `eta = gain * lateral_velocity + indicator`.
    pub fn from_lateral_velocity(epsilon: f64, gain: f64, lateral_velocity: f64, indicator: f64) -> Self {
        Self { epsilon, eta: gain * lateral_velocity + indicator }
    }

    /// Clamps into `epsilon in [0, 0.3]`, `|eta| <= min(epsilon, 1 - 3 epsilon)`.
    /// The flag reports whether anything changed.
    pub fn clamped(self) -> (Self, bool) {
        let eps = if self.epsilon.is_nan() { 0.0 } else { self.epsilon.clamp(0.0, MAX_EPSILON) };
        let bound = eps.min(1.0 - 3.0 * eps);
        let eta = if self.eta.is_nan() { 0.0 } else { self.eta.clamp(-bound, bound) };
        let changed = eps != self.epsilon || eta != self.eta;
        (Self { epsilon: eps, eta }, changed)
    }
}

/// `entries[i][j] = p(next = i | current = j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionMatrix {
    entries: [[f64; NUM_PATHS]; NUM_PATHS],
    clamped: bool,
}

impl TransitionMatrix {
    pub fn entries(&self) -> &[[f64; NUM_PATHS]; NUM_PATHS] {
        &self.entries
    }

    pub fn entry(&self, to: usize, from: usize) -> f64 {
        self.entries[to][from]
    }

    /// The parameters had to be clamped to build a valid matrix.
    pub fn was_clamped(&self) -> bool {
        self.clamped
    }
}

pub fn build_transition_matrix(params: TransitionParams) -> TransitionMatrix {
    let (TransitionParams { epsilon: e, eta: h }, clamped) = params.clamped();
    let a = h.abs();
    let stay = 1.0 - 2.0 * e - a;
    let down = e + 0.5 * a - h;
    let up = e + 0.5 * a + h;
    let entries = [
        [1.0 - e - h, down, 0.0, 0.0, 0.0],
        [e + h, stay, down, 0.0, 0.0],
        [0.0, up, stay, down, 0.0],
        [0.0, 0.0, up, stay, e - h],
        [0.0, 0.0, 0.0, up, 1.0 - e + h],
    ];
    TransitionMatrix { entries, clamped }
}

pub fn predict(prior: &PathPosterior, m: &TransitionMatrix) -> PathPosterior {
    let p = prior.probs();
    let mut out = [0.0; NUM_PATHS];
    for (i, o) in out.iter_mut().enumerate() {
        // band terms summed as (below + above) + diagonal: mirror-symmetric
        let below = if i > 0 { m.entries[i][i - 1] * p[i - 1] } else { 0.0 };
        let above = if i + 1 < NUM_PATHS { m.entries[i][i + 1] * p[i + 1] } else { 0.0 };
        *o = (below + above) + m.entries[i][i] * p[i];
    }
    // columns sum to one, so this only removes rounding drift
    PathPosterior::from_weights(out).expect("stochastic matrix preserves mass")
}

/// Result of a Bayes update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Updated {
    pub posterior: PathPosterior,
    /// Prediction and measurement had no overlap; the posterior was reset to
    /// the measurement.
    pub reset: bool,
}

pub fn update(predicted: &PathPosterior, inv_meas: &PathPosterior) -> Updated {
    let mut w = [0.0; NUM_PATHS];
    for (l, w) in w.iter_mut().enumerate() {
        *w = predicted.probs()[l] * inv_meas.probs()[l];
    }
    match PathPosterior::from_weights(w) {
        Ok(posterior) => Updated { posterior, reset: false },
        Err(_) => Updated { posterior: *inv_meas, reset: true },
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stepped {
    pub posterior: PathPosterior,
    pub clamped: bool,
    pub reset: bool,
}

/// One predict/update cycle.
pub fn step(
    state: &PathPosterior,
    params: TransitionParams,
    object: &GaussianScalar,
    bounds: &BoundarySet,
) -> Stepped {
    let m = build_transition_matrix(params);
    let predicted = predict(state, &m);
    let updated = update(&predicted, &lane_occupancy(object, bounds));
    Stepped { posterior: updated.posterior, clamped: m.clamped, reset: updated.reset }
}

/// Counters of exceptional events seen by a filter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DiscreteDiagnostics {
    pub clamped_params: usize,
    pub resets: usize,
}

/// Per-object discrete filter, starting from the uniform distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFilter {
    posterior: PathPosterior,
    diagnostics: DiscreteDiagnostics,
}

impl Default for DiscreteFilter {
    fn default() -> Self {
        Self::new()
    }
}

impl DiscreteFilter {
    pub fn new() -> Self {
        Self { posterior: PathPosterior::uniform(), diagnostics: DiscreteDiagnostics::default() }
    }

    pub fn posterior(&self) -> &PathPosterior {
        &self.posterior
    }

    pub fn diagnostics(&self) -> DiscreteDiagnostics {
        self.diagnostics
    }

    pub fn step(&mut self, params: TransitionParams, object: &GaussianScalar, bounds: &BoundarySet) -> &PathPosterior {
        let out = step(&self.posterior, params, object, bounds);
        self.diagnostics.clamped_params += out.clamped as usize;
        self.diagnostics.resets += out.reset as usize;
        self.posterior = out.posterior;
        &self.posterior
    }
}
