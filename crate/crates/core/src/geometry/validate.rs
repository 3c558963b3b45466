//! Monte-Carlo check of the first-order propagation in [`super::transform_to_path`].
//!
//! For every grid point the input Gaussian is sampled, each sample is pushed
//! through the exact offset, and the normalized histogram is compared with
//! the propagated Gaussian on the same bins using the Hellinger distance.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{lateral_path_offset, transform_to_path, GaussianScalar, HostState, InputVector};
use crate::error::{Error, Result};
use crate::likelihood::std_normal_cdf_unchecked as phi;

pub const MC_CSV_HEADER: [&str; 10] =
    ["x", "y", "v", "yaw_rate", "var_x", "var_y", "var_v", "var_yaw", "hellinger", "status"];

const SUM_TOLERANCE: f64 = 1e-9;
const MAX_REDRAWS: usize = 1000;

/// Hellinger distance between two discrete distributions on shared bins,
/// `sqrt(1 - sum sqrt(p_i q_i))`, in `[0, 1]`.
///
/// Evaluated as `sqrt(0.5 * sum (sqrt p_i - sqrt q_i)^2)`, which is the same
/// quantity for normalized inputs and is exactly zero for `p == q`.
pub fn hellinger_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::domain(format!(
            "bin count mismatch: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    for (name, dist) in [("p", p), ("q", q)] {
        if dist.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::domain(format!("{name} has negative or non-finite mass")));
        }
        let total: f64 = dist.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::domain(format!("{name} sums to {total}, not 1")));
        }
    }
    let sq: f64 = p.iter().zip(q).map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2)).sum();
    Ok((0.5 * sq).sqrt().min(1.0))
}

/// Hellinger distance between the histogram of `samples` and `gaussian`.
///
/// `bins` equal-width bins span the sample mean +/- 6 sample standard
/// deviations; the first and last bins absorb the tails so both sides carry
/// all of their mass.
pub fn histogram_hellinger(samples: &[f64], gaussian: &GaussianScalar, bins: usize) -> Result<f64> {
    if samples.is_empty() || bins == 0 {
        return Err(Error::domain("need at least one sample and one bin"));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let std = (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n).sqrt();

    let mut half = 6.0 * std;
    if half == 0.0 {
        half = 6.0 * gaussian.std();
    }
    if half == 0.0 {
        half = 1e-9 * mean.abs().max(1.0);
    }
    let lo = mean - half;
    let width = 2.0 * half / bins as f64;
    let bin_of = |v: f64| -> usize { ((v - lo) / width).floor().clamp(0.0, (bins - 1) as f64) as usize };

    let mut hist = vec![0.0; bins];
    for &s in samples {
        hist[bin_of(s)] += 1.0;
    }
    hist.iter_mut().for_each(|h| *h /= n);

    let mut model = vec![0.0; bins];
    if gaussian.std() == 0.0 {
        model[bin_of(gaussian.mean())] = 1.0;
    } else {
        let cdf = |k: usize| -> f64 {
            match k {
                0 => 0.0,
                k if k == bins => 1.0,
                k => phi((lo + k as f64 * width - gaussian.mean()) / gaussian.std()),
            }
        };
        for (k, m) in model.iter_mut().enumerate() {
            *m = (cdf(k + 1) - cdf(k)).max(0.0);
        }
        let total: f64 = model.iter().sum();
        model.iter_mut().for_each(|m| *m /= total);
    }
    hellinger_distance(&hist, &model)
}

/// Evenly spaced values on `[min, max]`; a single point sits at `min`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl AxisRange {
    pub fn new(min: f64, max: f64, points: usize) -> Self {
        Self { min, max, points }
    }

    pub fn fixed(value: f64) -> Self {
        Self { min: value, max: value, points: 1 }
    }

    pub fn values(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![self.min],
            n => (0..n)
                .map(|i| self.min + (self.max - self.min) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }

    fn check_within(&self, name: &str, lo: f64, hi: f64) -> Result<()> {
        let ok = self.points > 0
            && self.min <= self.max
            && self.min >= lo
            && self.max <= hi
            && self.min.is_finite()
            && self.max.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "{name} range [{}, {}] x {} must be nonempty and within [{lo}, {hi}]",
                self.min, self.max, self.points
            )))
        }
    }
}

/// Cartesian grid of input means with shared input variances.
///
/// Iteration order is `x`, then bearing, then `v`, then yaw rate (innermost).
/// The lateral position of each point is `x * tan(bearing)`.
#[derive(Debug, Clone, PartialEq)]
pub struct McGrid {
    pub x: AxisRange,
    pub bearing_deg: AxisRange,
    pub v: AxisRange,
    pub yaw_rate: AxisRange,
    /// Variances of `(v, yaw_rate, x, y)`.
    pub variances: [f64; 4],
    pub alpha: f64,
}

impl Default for McGrid {
    /// 8 x 4 x 4 x 4 = 512 points over the full validation domain.
    fn default() -> Self {
        Self {
            x: AxisRange::new(1.0, 110.0, 8),
            bearing_deg: AxisRange::new(-21.0, 21.0, 4),
            v: AxisRange::new(1.0, 70.0, 4),
            yaw_rate: AxisRange::new(-0.7, 0.7, 4),
            variances: [0.01, 1e-4, 0.25, 0.09],
            alpha: 0.0,
        }
    }
}

impl McGrid {
    pub fn validate(&self) -> Result<()> {
        self.x.check_within("x", 1.0, 110.0)?;
        self.bearing_deg.check_within("bearing", -21.0, 21.0)?;
        self.v.check_within("v", 1.0, 70.0)?;
        self.yaw_rate.check_within("yaw rate", -0.7, 0.7)?;
        if self.variances.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::domain("grid variances must be finite and nonnegative"));
        }
        Ok(())
    }

    /// Grid points as `(x, y, v, yaw_rate)` in iteration order.
    pub fn points(&self) -> Vec<[f64; 4]> {
        let mut out = Vec::new();
        for x in self.x.values() {
            for b in self.bearing_deg.values() {
                let y = x * b.to_radians().tan();
                for v in self.v.values() {
                    for w in self.yaw_rate.values() {
                        out.push([x, y, v, w]);
                    }
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.x.points * self.bearing_deg.points * self.v.points * self.yaw_rate.points
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McStatus {
    Ok,
    Skipped,
}

impl McStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            McStatus::Ok => "ok",
            McStatus::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McPoint {
    pub x: f64,
    pub y: f64,
    pub v: f64,
    pub yaw_rate: f64,
    /// Variances of `(v, yaw_rate, x, y)`.
    pub variances: [f64; 4],
    pub hellinger: Option<f64>,
    pub status: McStatus,
}

/// Lower-triangular factor of a positive-semidefinite matrix. Columns with a
/// nonpositive pivot are zeroed.
fn cholesky_psd(cov: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut l = [[0.0; 4]; 4];
    for j in 0..4 {
        let diag = cov[j][j] - (0..j).map(|k| l[j][k] * l[j][k]).sum::<f64>();
        if diag <= 0.0 {
            continue;
        }
        l[j][j] = diag.sqrt();
        for i in j + 1..4 {
            let off = cov[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            l[i][j] = off / l[j][j];
        }
    }
    l
}

fn validate_point(
    input: &InputVector,
    alpha: f64,
    samples: usize,
    bins: usize,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let taylor = transform_to_path(input, alpha)?.gaussian;
    let mean = input.mean();
    let chol = cholesky_psd(input.covariance());

    let mut offsets = Vec::with_capacity(samples);
    while offsets.len() < samples {
        let mut drawn = None;
        for _ in 0..MAX_REDRAWS {
            let z: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(rng));
            let zeta: [f64; 4] =
                std::array::from_fn(|i| mean[i] + (0..=i).map(|k| chol[i][k] * z[k]).sum::<f64>());
            // speed truncated to v > 0
            if zeta[0] > 0.0 {
                drawn = Some(zeta);
                break;
            }
        }
        let [v, w, x, y] =
            drawn.ok_or_else(|| Error::domain("speed distribution has no mass above zero"))?;
        let host = HostState { v, yaw_rate: w, alpha, timestamp: 0.0 };
        offsets.push(lateral_path_offset(&host, x, y)?);
    }
    histogram_hellinger(&offsets, &taylor, bins)
}

/// Runs the Monte-Carlo comparison over every grid point.
///
/// Each point draws from its own ChaCha stream derived from `(seed, index)`,
/// so the result does not depend on how points are scheduled.
pub fn mc_validate(grid: &McGrid, samples_per_point: usize, bins: usize, seed: u64) -> Result<Vec<McPoint>> {
    grid.validate()?;
    if samples_per_point == 0 || bins == 0 {
        return Err(Error::domain("samples per point and bins must be positive"));
    }
    let points = grid.points();
    let results = points
        .par_iter()
        .enumerate()
        .map(|(index, &[x, y, v, w])| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(index as u64);
            let [var_v, var_w, var_x, var_y] = grid.variances;
            let hellinger = InputVector::diagonal([v, w, x, y], [var_v, var_w, var_x, var_y])
                .and_then(|input| validate_point(&input, grid.alpha, samples_per_point, bins, &mut rng))
                .ok();
            McPoint {
                x,
                y,
                v,
                yaw_rate: w,
                variances: grid.variances,
                hellinger,
                status: if hellinger.is_some() { McStatus::Ok } else { McStatus::Skipped },
            }
        })
        .collect();
    Ok(results)
}

pub fn write_mc_csv<W: Write>(points: &[McPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(MC_CSV_HEADER)?;
    for p in points {
        let [var_v, var_w, var_x, var_y] = p.variances;
        w.write_record([
            p.x.to_string(),
            p.y.to_string(),
            p.v.to_string(),
            p.yaw_rate.to_string(),
            var_x.to_string(),
            var_y.to_string(),
            var_v.to_string(),
            var_w.to_string(),
            p.hellinger.map(|h| h.to_string()).unwrap_or_default(),
            p.status.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
