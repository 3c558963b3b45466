use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use super::scenario::ScenarioFrame;
use crate::continuous_filter::{discretize_posterior, ContinuousFilter, ProcessNoise};
use crate::discrete_filter::{DiscreteFilter, TransitionParams};
use crate::error::{Error, Result};
use crate::estimator::{assign, Assignment, DEFAULT_P_MIN};
use crate::geometry::{transform_to_path, InputVector};
use crate::likelihood::{extrapolate_boundaries, BoundaryDefaults, PathIndex, PathPosterior};

pub const RUN_CSV_HEADER: [&str; 10] =
    ["t", "object_id", "method", "assigned", "prob", "p0", "p1", "p2", "p3", "p4"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Discrete,
    Continuous,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Discrete => "discrete",
            Method::Continuous => "continuous",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discrete" => Ok(Method::Discrete),
            "continuous" => Ok(Method::Continuous),
            other => Err(Error::domain(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub method: Method,
    /// Neighbour transition rate per step (discrete filter).
    pub epsilon: f64,
    /// `eta` per m/s of lateral velocity, s/m (discrete filter).
    pub eta_gain: f64,
    /// Additive `eta` from an indicator signal (discrete filter).
    pub indicator_eta: f64,
    /// Process noise std, m/s (continuous filter).
    pub sigma_nu: f64,
    pub p_min: f64,
    pub boundary_defaults: BoundaryDefaults,
    /// Object state is dropped after this long without a measurement, s.
    pub absence_timeout: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            method: Method::Discrete,
            epsilon: 1e-2,
            eta_gain: 0.0,
            indicator_eta: 0.0,
            sigma_nu: 0.1,
            p_min: DEFAULT_P_MIN,
            boundary_defaults: BoundaryDefaults::default(),
            absence_timeout: 1.0,
        }
    }
}

/// Assignment of one object in one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectOutput {
    pub frame: usize,
    pub t: f64,
    pub object_id: u64,
    pub assignment: Assignment,
    pub posterior: PathPosterior,
    pub ground_truth: PathIndex,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PipelineDiagnostics {
    pub variance_clamps: usize,
    pub transition_clamps: usize,
    pub filter_resets: usize,
    pub dropped_tracks: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineRun {
    pub method: Method,
    /// Ordered by frame, then object id.
    pub outputs: Vec<ObjectOutput>,
    pub diagnostics: PipelineDiagnostics,
}

#[derive(Debug, Clone)]
enum TrackFilter {
    Discrete(DiscreteFilter),
    Continuous(ContinuousFilter),
}

#[derive(Debug, Clone)]
struct Track {
    filter: TrackFilter,
    last_seen: f64,
}

/// Runs one scenario through transform, filter and estimator.
pub fn run_pipeline(frames: &[ScenarioFrame], config: &PipelineConfig) -> Result<PipelineRun> {
    let noise = match config.method {
        Method::Continuous => Some(ProcessNoise::new(config.sigma_nu)?),
        Method::Discrete => None,
    };
    let default_bounds = extrapolate_boundaries(None, &config.boundary_defaults)?;

    let mut tracks: BTreeMap<u64, Track> = BTreeMap::new();
    let mut diagnostics = PipelineDiagnostics::default();
    let mut outputs = Vec::new();
    let mut last_t = f64::NEG_INFINITY;

    for (index, frame) in frames.iter().enumerate() {
        let ctx = |e: Error| Error::Frame { frame: index, source: Box::new(e) };
        if !(frame.t > last_t) {
            return Err(ctx(Error::Validation(format!("timestamp {} does not increase", frame.t))));
        }
        last_t = frame.t;

        let before = tracks.len();
        tracks.retain(|_, tr| frame.t - tr.last_seen <= config.absence_timeout);
        diagnostics.dropped_tracks += before - tracks.len();

        let bounds = frame.boundary_override().map_err(ctx)?.unwrap_or(default_bounds);
        let host = frame.host_state().map_err(ctx)?;

        let mut objects: Vec<_> = frame.objects.iter().collect();
        objects.sort_by_key(|o| o.id);
        for obj in objects {
            let input = InputVector::diagonal(
                [host.v, host.yaw_rate, obj.x, obj.y],
                [frame.host.var_v, frame.host.var_yaw, obj.var_x, obj.var_y],
            )
            .map_err(ctx)?;
            let measured = transform_to_path(&input, host.alpha).map_err(ctx)?;
            diagnostics.variance_clamps += measured.variance_clamped as usize;
            let z = measured.gaussian;
            let u = obj.v_lat.unwrap_or(0.0);

            let track = tracks.entry(obj.id).or_insert_with(|| Track {
                filter: match noise {
                    Some(n) => TrackFilter::Continuous(ContinuousFilter::new(n)),
                    None => TrackFilter::Discrete(DiscreteFilter::new()),
                },
                last_seen: frame.t,
            });
            track.last_seen = frame.t;

            let posterior = match &mut track.filter {
                TrackFilter::Discrete(f) => {
                    let params =
                        TransitionParams::from_lateral_velocity(config.epsilon, config.eta_gain, u, config.indicator_eta);
                    let before = f.diagnostics();
                    let post = *f.step(params, &z, &bounds);
                    let after = f.diagnostics();
                    diagnostics.transition_clamps += after.clamped_params - before.clamped_params;
                    diagnostics.filter_resets += after.resets - before.resets;
                    post
                }
                TrackFilter::Continuous(f) => {
                    let filtered = f.step(frame.t, u, &z).map_err(ctx)?;
                    discretize_posterior(&filtered.state, &bounds).map_err(ctx)?
                }
            };
            outputs.push(ObjectOutput {
                frame: index,
                t: frame.t,
                object_id: obj.id,
                assignment: assign(&posterior, config.p_min),
                posterior,
                ground_truth: obj.ground_truth(),
            });
        }
    }
    Ok(PipelineRun { method: config.method, outputs, diagnostics })
}

/// Per-frame CSV. `assigned` is empty when the estimator rejects.
pub fn write_run_csv<W: Write>(run: &PipelineRun, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RUN_CSV_HEADER)?;
    for o in &run.outputs {
        let mut rec = vec![
            o.t.to_string(),
            o.object_id.to_string(),
            run.method.to_string(),
            o.assignment.index.map(|i| i.to_string()).unwrap_or_default(),
            o.assignment.probability.to_string(),
        ];
        rec.extend(o.posterior.probs().iter().map(|p| p.to_string()));
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}
