//! Host-path ROC points at object-frame granularity.
//!
//! A true positive is an object-frame with ground truth on the host path and
//! an accepted assignment to the host path; a false positive is an accepted
//! host-path assignment for an object whose ground truth is elsewhere.
//! Rejected assignments count as neither.

use std::io::Write;

use rayon::prelude::*;

use super::pipeline::{run_pipeline, Method, ObjectOutput, PipelineConfig};
use super::scenario::Scenario;
use crate::error::{Error, Result};
use crate::likelihood::PathIndex;

pub const ROC_CSV_HEADER: [&str; 4] = ["param", "tp_rate", "fp_rate", "frames"];

/// Printed in place of a rate whose denominator is zero.
pub const UNDEFINED_RATE: &str = "NA";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RocCounts {
    pub host_truth: usize,
    pub true_positives: usize,
    pub other_truth: usize,
    pub false_positives: usize,
}

impl RocCounts {
    pub fn add(&mut self, o: &ObjectOutput) {
        let assigned_host = o.assignment.accepted && o.assignment.index == Some(PathIndex::HOST);
        if o.ground_truth == PathIndex::HOST {
            self.host_truth += 1;
            self.true_positives += assigned_host as usize;
        } else {
            self.other_truth += 1;
            self.false_positives += assigned_host as usize;
        }
    }

    pub fn merge(&mut self, other: &RocCounts) {
        self.host_truth += other.host_truth;
        self.true_positives += other.true_positives;
        self.other_truth += other.other_truth;
        self.false_positives += other.false_positives;
    }

    pub fn frames(&self) -> usize {
        self.host_truth + self.other_truth
    }

    pub fn to_point(&self, label: impl Into<String>) -> RocPoint {
        let rate = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
        RocPoint {
            parameter_label: label.into(),
            tp_rate: rate(self.true_positives, self.host_truth),
            fp_rate: rate(self.false_positives, self.other_truth),
            frames_evaluated: self.frames(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocPoint {
    pub parameter_label: String,
    /// `None` when no object-frame had host-path ground truth.
    pub tp_rate: Option<f64>,
    /// `None` when every object-frame had host-path ground truth.
    pub fp_rate: Option<f64>,
    pub frames_evaluated: usize,
}

pub fn compute_roc<'a>(outputs: impl IntoIterator<Item = &'a ObjectOutput>, label: impl Into<String>) -> RocPoint {
    let mut counts = RocCounts::default();
    for o in outputs {
        counts.add(o);
    }
    counts.to_point(label)
}

/// The single parameter varied by a sweep. The method follows from the axis.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    Epsilon(Vec<f64>),
    SigmaNu(Vec<f64>),
}

impl SweepAxis {
    /// Decades 1e-1 down to 1e-6.
    pub fn default_epsilon() -> Self {
        SweepAxis::Epsilon(vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6])
    }

    /// 0.04 to 0.4 m/s.
    pub fn default_sigma_nu() -> Self {
        SweepAxis::SigmaNu(vec![0.04, 0.06, 0.1, 0.16, 0.25, 0.4])
    }

    pub fn method(&self) -> Method {
        match self {
            SweepAxis::Epsilon(_) => Method::Discrete,
            SweepAxis::SigmaNu(_) => Method::Continuous,
        }
    }

    fn values(&self) -> &[f64] {
        match self {
            SweepAxis::Epsilon(v) | SweepAxis::SigmaNu(v) => v,
        }
    }

    fn config_for(&self, base: &PipelineConfig, value: f64) -> (PipelineConfig, String) {
        let mut cfg = base.clone();
        cfg.method = self.method();
        let name = match self {
            SweepAxis::Epsilon(_) => {
                cfg.epsilon = value;
                "epsilon"
            }
            SweepAxis::SigmaNu(_) => {
                cfg.sigma_nu = value;
                "sigma_nu"
            }
        };
        (cfg, format!("{}:{name}={value}", self.method()))
    }
}

/// One ROC point per axis value, aggregated over all scenarios. Scenarios are
/// evaluated in parallel; the result does not depend on scheduling.
pub fn sweep_parameters(scenarios: &[Scenario], base: &PipelineConfig, axis: &SweepAxis) -> Result<Vec<RocPoint>> {
    if axis.values().is_empty() {
        return Err(Error::domain("sweep grid is empty"));
    }
    axis.values()
        .iter()
        .map(|&value| {
            let (cfg, label) = axis.config_for(base, value);
            let per_scenario: Vec<RocCounts> = scenarios
                .par_iter()
                .map(|sc| {
                    let run = run_pipeline(&sc.frames, &cfg)?;
                    let mut c = RocCounts::default();
                    run.outputs.iter().for_each(|o| c.add(o));
                    Ok(c)
                })
                .collect::<Result<_>>()?;
            let mut total = RocCounts::default();
            per_scenario.iter().for_each(|c| total.merge(c));
            Ok(total.to_point(label))
        })
        .collect()
}

pub fn write_roc_csv<W: Write>(points: &[RocPoint], out: W) -> Result<()> {
    let fmt = |r: Option<f64>| r.map(|v| v.to_string()).unwrap_or_else(|| UNDEFINED_RATE.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ROC_CSV_HEADER)?;
    for p in points {
        w.write_record([
            p.parameter_label.clone(),
            fmt(p.tp_rate),
            fmt(p.fp_rate),
            p.frames_evaluated.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
