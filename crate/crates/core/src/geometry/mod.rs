//! Circular host-vehicle-path geometry.
//!
//! Under steady-state circular motion the host travels on an arc of radius
//! `r = v / yaw_rate` whose centre, in host coordinates, sits at
//! `(-r sin(alpha), r cos(alpha))`. The lateral path coordinate of a point is
//! its signed distance to that arc, positive towards the centre for a left
//! turn (i.e. positive to the left of the path).
//!
//! The offset is evaluated in curvature form,
//!
//! ```text
//! y_P = -(2d + k*rho^2) / (1 + q),   q = sqrt((1 + k*d)^2 + (k*e)^2)
//! d = x sin(alpha) - y cos(alpha),   e = x cos(alpha) + y sin(alpha)
//! ```
//!
//! with curvature `k = 1/r`. It is algebraically identical to
//! `r - sgn(r) * |p - centre|` but free of the cancellation between two large
//! radii when the path is nearly straight.

mod validate;

pub use validate::{
    hellinger_distance, histogram_hellinger, mc_validate, write_mc_csv, AxisRange, McGrid,
    McPoint, McStatus, MC_CSV_HEADER,
};

use crate::error::{Error, Result};

/// Yaw rates with a smaller magnitude (rad/s) use the straight-line limit
/// `y cos(alpha) - x sin(alpha)`.
pub const STRAIGHT_LINE_YAW_RATE: f64 = 1e-4;

/// A one-dimensional Gaussian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianScalar {
    mean: f64,
    std: f64,
}

impl GaussianScalar {
    pub fn new(mean: f64, std: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(Error::domain(format!("gaussian mean must be finite, got {mean}")));
        }
        if !(std.is_finite() && std >= 0.0) {
            return Err(Error::domain(format!(
                "gaussian std must be finite and nonnegative, got {std}"
            )));
        }
        Ok(Self { mean, std })
    }

    pub fn from_variance(mean: f64, variance: f64) -> Result<Self> {
        if variance.is_nan() || variance < 0.0 {
            return Err(Error::domain(format!("variance must be nonnegative, got {variance}")));
        }
        Self::new(mean, variance.sqrt())
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn std(&self) -> f64 {
        self.std
    }

    pub fn variance(&self) -> f64 {
        self.std * self.std
    }

    pub fn shifted(&self, delta: f64) -> Self {
        Self { mean: self.mean + delta, std: self.std }
    }

    pub fn scaled_std(&self, factor: f64) -> Self {
        Self { mean: self.mean, std: self.std * factor }
    }
}

/// Inertial host signals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HostState {
    /// Longitudinal speed, m/s.
    pub v: f64,
    /// Yaw rate, rad/s. Positive turns left.
    pub yaw_rate: f64,
    /// Heading of the path relative to the vehicle's longitudinal axis, rad.
    pub alpha: f64,
    pub timestamp: f64,
}

impl HostState {
    pub fn new(v: f64, yaw_rate: f64, alpha: f64, timestamp: f64) -> Result<Self> {
        let host = Self { v, yaw_rate, alpha, timestamp };
        host.validate()?;
        Ok(host)
    }

    fn validate(&self) -> Result<()> {
        if !(self.v.is_finite() && self.yaw_rate.is_finite() && self.alpha.is_finite()) {
            return Err(Error::domain("host signals must be finite"));
        }
        if self.v < 0.0 {
            return Err(Error::domain(format!("host speed must be >= 0, got {}", self.v)));
        }
        if self.alpha.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::domain(format!(
                "heading offset must lie in (-pi/2, pi/2), got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    pub fn is_straight(&self) -> bool {
        self.yaw_rate.abs() < STRAIGHT_LINE_YAW_RATE
    }

    /// Path curvature `yaw_rate / v`, 1/m. Zero on the straight-line branch.
    fn curvature(&self) -> Result<f64> {
        if self.is_straight() {
            return Ok(0.0);
        }
        if self.v == 0.0 {
            return Err(Error::domain("zero speed with nonzero yaw rate has no circular path"));
        }
        Ok(self.yaw_rate / self.v)
    }
}

/// An object position in Cartesian host coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectMeasurement {
    /// Longitudinal position, m. Objects lie ahead of the host.
    pub x: f64,
    /// Lateral position, m, positive left.
    pub y: f64,
    pub timestamp: f64,
    /// Lateral velocity in path coordinates, m/s, when known.
    pub lateral_velocity_input: Option<f64>,
}

impl ObjectMeasurement {
    pub fn new(x: f64, y: f64, timestamp: f64, lateral_velocity_input: Option<f64>) -> Result<Self> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::domain("object position must be finite"));
        }
        if x <= 0.0 {
            return Err(Error::domain(format!("object must be ahead of the host, got x = {x}")));
        }
        Ok(Self { x, y, timestamp, lateral_velocity_input })
    }
}

/// Mean and covariance of `(v, yaw_rate, x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputVector {
    mean: [f64; 4],
    covariance: [[f64; 4]; 4],
}

impl InputVector {
    pub fn new(mean: [f64; 4], covariance: [[f64; 4]; 4]) -> Result<Self> {
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::domain("input mean must be finite"));
        }
        for i in 0..4 {
            if !(covariance[i][i] >= 0.0) {
                return Err(Error::domain(format!(
                    "covariance diagonal entry {i} must be >= 0, got {}",
                    covariance[i][i]
                )));
            }
            for j in 0..4 {
                if !covariance[i][j].is_finite() {
                    return Err(Error::domain("covariance must be finite"));
                }
                if (covariance[i][j] - covariance[j][i]).abs() > 1e-12 {
                    return Err(Error::domain(format!("covariance not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { mean, covariance })
    }

    /// Independent inputs with the given variances `(var_v, var_yaw, var_x, var_y)`.
    pub fn diagonal(mean: [f64; 4], variances: [f64; 4]) -> Result<Self> {
        let mut covariance = [[0.0; 4]; 4];
        for (i, var) in variances.into_iter().enumerate() {
            covariance[i][i] = var;
        }
        Self::new(mean, covariance)
    }

    pub fn mean(&self) -> &[f64; 4] {
        &self.mean
    }

    pub fn covariance(&self) -> &[[f64; 4]; 4] {
        &self.covariance
    }
}

fn check_point(x: f64, y: f64) -> Result<()> {
    if x.is_finite() && y.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("point must be finite, got ({x}, {y})")))
    }
}

struct ArcTerms {
    kappa: f64,
    d: f64,
    rho2: f64,
    q: f64,
}

impl ArcTerms {
    fn new(kappa: f64, alpha: f64, x: f64, y: f64) -> Self {
        let (s, c) = alpha.sin_cos();
        let d = x * s - y * c;
        let e = x * c + y * s;
        let rho2 = x * x + y * y;
        let q = (1.0 + kappa * d).hypot(kappa * e);
        Self { kappa, d, rho2, q }
    }

    fn offset(&self) -> f64 {
        -(2.0 * self.d + self.kappa * self.rho2) / (1.0 + self.q)
    }
}

/// Signed lateral distance (m) of `(x, y)` to the circular host path.
pub fn lateral_path_offset(host: &HostState, x: f64, y: f64) -> Result<f64> {
    host.validate()?;
    check_point(x, y)?;
    if host.is_straight() {
        let (s, c) = host.alpha.sin_cos();
        return Ok(y * c - x * s);
    }
    let kappa = host.curvature()?;
    Ok(ArcTerms::new(kappa, host.alpha, x, y).offset())
}

/// Gradient of [`lateral_path_offset`] with respect to `(v, yaw_rate, x, y)`.
///
/// On the straight-line branch the yaw-rate component is the zero-curvature
/// limit `-e^2 / (2v)` of the curved gradient, zero at standstill.
pub fn jacobian_lateral_offset(host: &HostState, x: f64, y: f64) -> Result<[f64; 4]> {
    host.validate()?;
    check_point(x, y)?;
    let (s, c) = host.alpha.sin_cos();
    if host.is_straight() {
        let e = x * c + y * s;
        let d_yaw = if host.v > 0.0 { -e * e / (2.0 * host.v) } else { 0.0 };
        return Ok([0.0, d_yaw, -s, c]);
    }

    let kappa = host.curvature()?;
    let t = ArcTerms::new(kappa, host.alpha, x, y);
    if t.q == 0.0 {
        return Err(Error::Singularity(format!(
            "({x}, {y}) is the centre of the path circle"
        )));
    }
    let num = 2.0 * t.d + kappa * t.rho2;
    let den = 1.0 + t.q;
    let d_kappa = -t.rho2 / den + num * (t.d + kappa * t.rho2) / (t.q * den * den);
    let d_x = -(s + kappa * x) / t.q;
    let d_y = (c - kappa * y) / t.q;
    let d_v = -kappa / host.v * d_kappa;
    let d_yaw = d_kappa / host.v;

    let grad = [d_v, d_yaw, d_x, d_y];
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Singularity(format!("gradient not finite at ({x}, {y})")));
    }
    Ok(grad)
}

/// Result of [`transform_to_path`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGaussian {
    pub gaussian: GaussianScalar,
    /// The propagated variance came out negative through rounding and was
    /// clamped to zero.
    pub variance_clamped: bool,
}

/// First-order propagation of `(v, yaw_rate, x, y)` into the lateral path
/// coordinate: mean at the input mean, variance `J V J^T`.
pub fn transform_to_path(input: &InputVector, alpha: f64) -> Result<PathGaussian> {
    let [v, yaw_rate, x, y] = input.mean;
    let host = HostState { v, yaw_rate, alpha, timestamp: 0.0 };
    let mean = lateral_path_offset(&host, x, y)?;
    let jac = jacobian_lateral_offset(&host, x, y)?;

    let cov = &input.covariance;
    let mut variance = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            variance += jac[i] * cov[i][j] * jac[j];
        }
    }
    let variance_clamped = variance < 0.0;
    let gaussian = GaussianScalar::from_variance(mean, variance.max(0.0))?;
    Ok(PathGaussian { gaussian, variance_clamped })
}

/// Point of the path at arc length `s` displaced by `lateral` along the left
/// normal, in host coordinates. Inverse of [`lateral_path_offset`] for points
/// within half a revolution.
pub fn path_to_cartesian(host: &HostState, s: f64, lateral: f64) -> Result<(f64, f64)> {
    host.validate()?;
    let kappa = host.curvature()?;
    let theta = kappa * s;
    let (sin_t, cos_t) = theta.sin_cos();
    // sin(ks)/k and (1 - cos(ks))/k, continuous at k = 0
    let (px, py) = if kappa == 0.0 {
        (s, 0.0)
    } else {
        (sin_t / kappa, 2.0 * (0.5 * theta).sin().powi(2) / kappa)
    };
    let (lx, ly) = (px - lateral * sin_t, py + lateral * cos_t);
    let (sa, ca) = host.alpha.sin_cos();
    Ok((ca * lx - sa * ly, sa * lx + ca * ly))
}
