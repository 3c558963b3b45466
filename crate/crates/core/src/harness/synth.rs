//! Synthetic scenarios with analytic ground truth.
//!
//! Objects are placed in path coordinates (arc length ahead, lateral offset)
//! of the true host path and converted to host coordinates; the ground-truth
//! index is the region of the true lateral offset relative to 3.5 m paths
//! centred on the host path. Sensor noise is added afterwards.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::scenario::{HostRecord, ObjectRecord, Scenario, ScenarioFrame};
use crate::error::{Error, Result};
use crate::geometry::{path_to_cartesian, HostState};
use crate::likelihood::{extrapolate_boundaries, BoundaryDefaults};

pub const HOST_SPEED: f64 = 25.0;
pub const LANE_WIDTH: f64 = 3.5;
/// Radius of the `host_curve` scenario, m (left turn).
pub const CURVE_RADIUS: f64 = 400.0;
/// Amplitude (rad/s) and frequency (Hz) of the yaw-rate oscillation in `noisy_yaw`.
pub const YAW_OSCILLATION: (f64, f64) = (0.02, 0.25);
/// Duration of a lateral manoeuvre, s.
pub const MANOEUVRE_TIME: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    /// One target in the host path.
    StraightFollow,
    /// Targets one path to either side.
    AdjacentLane,
    /// A target leaves the host path towards higher indices.
    TargetLaneChange,
    /// Constant-radius host curve with targets in three paths.
    HostCurve,
    /// Straight road, oscillating yaw-rate signal, cut-in and cut-out.
    NoisyYaw,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] = [
        ScenarioKind::StraightFollow,
        ScenarioKind::AdjacentLane,
        ScenarioKind::TargetLaneChange,
        ScenarioKind::HostCurve,
        ScenarioKind::NoisyYaw,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioKind::StraightFollow => "straight_follow",
            ScenarioKind::AdjacentLane => "adjacent_lane",
            ScenarioKind::TargetLaneChange => "target_lane_change",
            ScenarioKind::HostCurve => "host_curve",
            ScenarioKind::NoisyYaw => "noisy_yaw",
        }
    }

    pub fn default_duration(&self) -> f64 {
        match self {
            ScenarioKind::TargetLaneChange => 20.0,
            ScenarioKind::NoisyYaw => 60.0,
            _ => 30.0,
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::domain(format!("unknown scenario kind `{s}`")))
    }
}

/// Standard deviations of the simulated sensors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseLevels {
    pub sigma_v: f64,
    pub sigma_yaw: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub sigma_v_lat: f64,
}

impl NoiseLevels {
    pub fn zero() -> Self {
        Self { sigma_v: 0.0, sigma_yaw: 0.0, sigma_x: 0.0, sigma_y: 0.0, sigma_v_lat: 0.0 }
    }

    fn validate(&self) -> Result<()> {
        let all = [self.sigma_v, self.sigma_yaw, self.sigma_x, self.sigma_y, self.sigma_v_lat];
        if all.iter().all(|s| s.is_finite() && *s >= 0.0) {
            Ok(())
        } else {
            Err(Error::domain("noise levels must be finite and nonnegative"))
        }
    }
}

impl Default for NoiseLevels {
    fn default() -> Self {
        Self { sigma_v: 0.1, sigma_yaw: 0.002, sigma_x: 0.3, sigma_y: 0.2, sigma_v_lat: 0.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub kind: ScenarioKind,
    pub duration: f64,
    /// Frame period, s.
    pub step: f64,
    pub noise: NoiseLevels,
    pub seed: u64,
    /// When the `target_lane_change` target crosses into the next path, s.
    pub crossing_time: f64,
}

impl SynthSpec {
    pub fn new(kind: ScenarioKind, seed: u64) -> Self {
        Self {
            kind,
            duration: kind.default_duration(),
            step: 0.05,
            noise: NoiseLevels::default(),
            seed,
            crossing_time: 10.0,
        }
    }

    pub fn name(&self) -> String {
        format!("{}_s{}", self.kind, self.seed)
    }
}

/// Lateral offset over time: constant, or a linear ramp whose midpoint is
/// reached at `t_mid`.
#[derive(Debug, Clone, Copy)]
enum Lateral {
    Constant(f64),
    Ramp { from: f64, to: f64, t_mid: f64 },
}

impl Lateral {
    /// Offset and its rate of change.
    fn at(&self, t: f64) -> (f64, f64) {
        match *self {
            Lateral::Constant(y) => (y, 0.0),
            Lateral::Ramp { from, to, t_mid } => {
                let frac = (t - t_mid) / MANOEUVRE_TIME + 0.5;
                let rate = if (0.0..1.0).contains(&frac) { (to - from) / MANOEUVRE_TIME } else { 0.0 };
                (from + (to - from) * frac.clamp(0.0, 1.0), rate)
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Track {
    id: u64,
    /// Arc length ahead of the host, m.
    range: f64,
    /// Amplitude of a slow range oscillation with a 20 s period, m.
    range_swing: f64,
    lateral: Lateral,
}

impl Track {
    fn fixed(id: u64, range: f64, lateral: f64) -> Self {
        Self { id, range, range_swing: 0.0, lateral: Lateral::Constant(lateral) }
    }

    fn range_at(&self, t: f64) -> f64 {
        self.range + self.range_swing * (std::f64::consts::TAU * t / 20.0).sin()
    }
}

fn tracks(spec: &SynthSpec) -> Vec<Track> {
    let w = LANE_WIDTH;
    match spec.kind {
        ScenarioKind::StraightFollow => {
            vec![Track { id: 1, range: 40.0, range_swing: 5.0, lateral: Lateral::Constant(0.0) }]
        }
        ScenarioKind::AdjacentLane => vec![Track::fixed(1, 30.0, w), Track::fixed(2, 60.0, -w)],
        ScenarioKind::TargetLaneChange => vec![Track {
            id: 1,
            range: 40.0,
            range_swing: 0.0,
            lateral: Lateral::Ramp { from: 0.0, to: w, t_mid: spec.crossing_time },
        }],
        ScenarioKind::HostCurve => {
            vec![Track::fixed(1, 50.0, 0.0), Track::fixed(2, 35.0, w), Track::fixed(3, 70.0, -w)]
        }
        ScenarioKind::NoisyYaw => vec![
            Track::fixed(1, 50.0, 0.0),
            Track::fixed(2, 35.0, w),
            Track::fixed(3, 70.0, -w),
            Track {
                id: 4,
                range: 30.0,
                range_swing: 0.0,
                lateral: Lateral::Ramp { from: w, to: 0.0, t_mid: 0.3 * spec.duration },
            },
            Track {
                id: 5,
                range: 80.0,
                range_swing: 0.0,
                lateral: Lateral::Ramp { from: 0.0, to: -w, t_mid: 0.7 * spec.duration },
            },
        ],
    }
}

/// Generates one scenario. Output is a deterministic function of `spec`.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<Scenario> {
    if !(spec.step > 0.0 && spec.step.is_finite()) {
        return Err(Error::domain(format!("step must be positive, got {}", spec.step)));
    }
    if !(spec.duration >= 0.0 && spec.duration.is_finite()) {
        return Err(Error::domain(format!("duration must be nonnegative, got {}", spec.duration)));
    }
    spec.noise.validate()?;

    let kind_index = ScenarioKind::ALL.iter().position(|k| *k == spec.kind).unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(kind_index as u64);
    let mut gauss = |sd: f64| -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        sd * z
    };

    let truth_bounds = extrapolate_boundaries(None, &BoundaryDefaults::default())?;
    let true_yaw = match spec.kind {
        ScenarioKind::HostCurve => HOST_SPEED / CURVE_RADIUS,
        _ => 0.0,
    };
    let true_host = HostState::new(HOST_SPEED, true_yaw, 0.0, 0.0)?;
    let (amp, freq) = YAW_OSCILLATION;
    let phase = std::f64::consts::TAU * (spec.seed % 97) as f64 / 97.0;
    let tracks = tracks(spec);
    let noise = spec.noise;

    let frame_count = (spec.duration / spec.step).round() as usize + 1;
    let mut frames = Vec::with_capacity(frame_count);
    for k in 0..frame_count {
        let t = k as f64 * spec.step;
        let mut yaw = true_yaw + gauss(noise.sigma_yaw);
        if spec.kind == ScenarioKind::NoisyYaw {
            yaw += amp * (std::f64::consts::TAU * freq * t + phase).sin();
        }
        let host = HostRecord {
            v: (HOST_SPEED + gauss(noise.sigma_v)).max(0.0),
            yaw_rate: yaw,
            var_v: noise.sigma_v.powi(2),
            var_yaw: noise.sigma_yaw.powi(2),
            alpha: None,
        };
        let mut objects = Vec::with_capacity(tracks.len());
        for track in &tracks {
            let (lat, lat_rate) = track.lateral.at(t);
            let (x, y) = path_to_cartesian(&true_host, track.range_at(t), lat)?;
            objects.push(ObjectRecord {
                id: track.id,
                x: x + gauss(noise.sigma_x),
                y: y + gauss(noise.sigma_y),
                var_x: noise.sigma_x.powi(2),
                var_y: noise.sigma_y.powi(2),
                v_lat: Some(lat_rate + gauss(noise.sigma_v_lat)),
                gt: truth_bounds.region_of(lat).get() as u8,
            });
        }
        frames.push(ScenarioFrame { t, host, objects, bounds: None });
    }
    Ok(Scenario { name: spec.name(), frames })
}

/// One scenario of every kind.
pub fn default_suite(seed: u64, step: f64) -> Vec<SynthSpec> {
    ScenarioKind::ALL
        .into_iter()
        .map(|kind| SynthSpec { step, ..SynthSpec::new(kind, seed) })
        .collect()
}

/// Four `noisy_yaw` scenarios with consecutive seeds.
pub fn noisy_yaw_suite(seed: u64, step: f64) -> Vec<SynthSpec> {
    (0..4)
        .map(|i| SynthSpec { step, ..SynthSpec::new(ScenarioKind::NoisyYaw, seed + i) })
        .collect()
}
