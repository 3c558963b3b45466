//! Line-delimited JSON scenario files.
//!
//! One frame per line:
//!
//! ```text
//! {"t":0.0,"host":{"v":25.0,"yaw_rate":0.0,"var_v":0.01,"var_yaw":1e-6},
//!  "objects":[{"id":1,"x":40.0,"y":0.1,"var_x":0.09,"var_y":0.04,"gt":2}]}
//! ```
//!
//! `host.alpha`, `objects[].v_lat` and `bounds` (four `{"mu","sigma"}`
//! records, lateral path coordinates) are optional. Unknown fields are
//! rejected.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GaussianScalar, HostState};
use crate::likelihood::{BoundarySet, BoundarySource, PathIndex};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HostRecord {
    pub v: f64,
    pub yaw_rate: f64,
    pub var_v: f64,
    pub var_yaw: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectRecord {
    pub id: u64,
    pub x: f64,
    pub y: f64,
    pub var_x: f64,
    pub var_y: f64,
    /// Lateral velocity in path coordinates, m/s.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_lat: Option<f64>,
    /// Ground-truth path index.
    pub gt: u8,
}

impl ObjectRecord {
    pub fn ground_truth(&self) -> PathIndex {
        PathIndex::new(self.gt as usize).expect("validated on parse")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryRecord {
    pub mu: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFrame {
    pub t: f64,
    pub host: HostRecord,
    pub objects: Vec<ObjectRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<[BoundaryRecord; 4]>,
}

impl ScenarioFrame {
    pub fn host_state(&self) -> Result<HostState> {
        HostState::new(self.host.v, self.host.yaw_rate, self.host.alpha.unwrap_or(0.0), self.t)
    }

    /// Boundary overrides as a measured boundary set.
    pub fn boundary_override(&self) -> Result<Option<BoundarySet>> {
        let Some(bounds) = &self.bounds else { return Ok(None) };
        let mut gs = [GaussianScalar::new(0.0, 0.0)?; 4];
        for (g, b) in gs.iter_mut().zip(bounds) {
            *g = GaussianScalar::new(b.mu, b.sigma)?;
        }
        BoundarySet::new(gs, BoundarySource::Measured).map(Some)
    }

    fn validate(&self) -> Result<()> {
        if !self.t.is_finite() {
            return Err(Error::Validation("field `t` must be finite".into()));
        }
        self.host_state()?;
        for (name, var) in [("var_v", self.host.var_v), ("var_yaw", self.host.var_yaw)] {
            check_variance(name, var)?;
        }
        for o in &self.objects {
            if !(o.x.is_finite() && o.y.is_finite()) || o.x <= 0.0 {
                return Err(Error::Validation(format!(
                    "object {}: position ({}, {}) must be finite with x > 0",
                    o.id, o.x, o.y
                )));
            }
            check_variance("var_x", o.var_x)?;
            check_variance("var_y", o.var_y)?;
            if o.v_lat.is_some_and(|v| !v.is_finite()) {
                return Err(Error::Validation(format!("object {}: field `v_lat` must be finite", o.id)));
            }
            PathIndex::new(o.gt as usize)
                .map_err(|_| Error::Validation(format!("object {}: field `gt` must be in 0..=4", o.id)))?;
        }
        let mut ids: Vec<u64> = self.objects.iter().map(|o| o.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Validation("duplicate object id within a frame".into()));
        }
        self.boundary_override()?;
        Ok(())
    }
}

fn check_variance(name: &str, var: f64) -> Result<()> {
    if var.is_finite() && var >= 0.0 {
        Ok(())
    } else {
        Err(Error::Validation(format!("field `{name}` must be a finite nonnegative variance, got {var}")))
    }
}

/// A named sequence of frames, processed independently of other scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub frames: Vec<ScenarioFrame>,
}

/// Parses and validates a scenario stream. Blank lines are ignored; errors
/// carry the 1-based line number.
pub fn parse_scenario<R: BufRead>(reader: R) -> Result<Vec<ScenarioFrame>> {
    let mut frames: Vec<ScenarioFrame> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let frame: ScenarioFrame = serde_json::from_str(&line)
            .map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?;
        frame
            .validate()
            .map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?;
        if let Some(prev) = frames.last() {
            if !(frame.t > prev.t) {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("timestamp {} does not increase (previous {})", frame.t, prev.t),
                });
            }
        }
        frames.push(frame);
    }
    Ok(frames)
}

pub fn read_scenario_file(path: &Path) -> Result<Scenario> {
    let file = std::fs::File::open(path)?;
    let frames = parse_scenario(std::io::BufReader::new(file))?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(Scenario { name, frames })
}

pub fn write_scenario<W: Write>(frames: &[ScenarioFrame], mut out: W) -> Result<()> {
    for f in frames {
        serde_json::to_writer(&mut out, f).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE: &str = r#"{"t":0.5,"host":{"v":25.0,"yaw_rate":0.01,"var_v":0.01,"var_yaw":1e-6},"objects":[{"id":7,"x":40.0,"y":0.25,"var_x":0.09,"var_y":0.04,"v_lat":0.1,"gt":2}]}"#;

    #[test]
    fn empty_stream() {
        assert!(parse_scenario("".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn single_line_fields() {
        let frames = parse_scenario(LINE.as_bytes()).unwrap();
        assert_eq!(frames.len(), 1);
        let f = &frames[0];
        assert_eq!(f.t, 0.5);
        assert_eq!(f.host, HostRecord { v: 25.0, yaw_rate: 0.01, var_v: 0.01, var_yaw: 1e-6, alpha: None });
        assert_eq!(
            f.objects,
            vec![ObjectRecord { id: 7, x: 40.0, y: 0.25, var_x: 0.09, var_y: 0.04, v_lat: Some(0.1), gt: 2 }]
        );
        assert!(f.bounds.is_none());

        let mut buf = Vec::new();
        write_scenario(&frames, &mut buf).unwrap();
        assert_eq!(parse_scenario(buf.as_slice()).unwrap(), frames);
    }

    #[test]
    fn missing_field_is_named() {
        let line = LINE.replace(r#""yaw_rate":0.01,"#, "");
        let err = parse_scenario(line.as_bytes()).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{msg}");
        assert!(msg.contains("yaw_rate"), "{msg}");
    }

    #[test]
    fn unknown_field_rejected() {
        let line = LINE.replace(r#""t":0.5,"#, r#""t":0.5,"speed":3,"#);
        assert!(parse_scenario(line.as_bytes()).is_err());
    }

    #[test]
    fn timestamps_must_increase() {
        let text = format!("{LINE}\n\n{LINE}\n");
        let err = parse_scenario(text.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn semantic_checks() {
        let bad_gt = LINE.replace(r#""gt":2"#, r#""gt":5"#);
        assert!(parse_scenario(bad_gt.as_bytes()).unwrap_err().to_string().contains("gt"));
        let behind = LINE.replace(r#""x":40.0"#, r#""x":-4.0"#);
        assert!(parse_scenario(behind.as_bytes()).is_err());
        let bounds = LINE.replace(
            r#""objects""#,
            r#""bounds":[{"mu":1,"sigma":0.1},{"mu":0,"sigma":0.1},{"mu":2,"sigma":0.1},{"mu":3,"sigma":0.1}],"objects""#,
        );
        assert!(parse_scenario(bounds.as_bytes()).is_err());
    }

    #[test]
    fn boundary_override() {
        let line = LINE.replace(
            r#""objects""#,
            r#""bounds":[{"mu":-5,"sigma":0.1},{"mu":-1.5,"sigma":0.1},{"mu":2,"sigma":0.1},{"mu":5.5,"sigma":0.1}],"objects""#,
        );
        let frames = parse_scenario(line.as_bytes()).unwrap();
        let set = frames[0].boundary_override().unwrap().unwrap();
        assert_eq!(set.means(), [-5.0, -1.5, 2.0, 5.5]);
        assert_eq!(set.source(), BoundarySource::Measured);
    }
}
