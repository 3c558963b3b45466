//! Scalar Kalman filter on the lateral path coordinate.
//!
//! The state moves with a known lateral velocity input `u` and white-noise
//! velocity disturbance `nu`: `y' = y + dt*u + dt*nu`. The measurement is the
//! lateral path coordinate produced by [`crate::geometry::transform_to_path`],
//! with its propagated variance as measurement noise. The filtered Gaussian is
//! mapped onto path indices with the same inverse measurement model the
//! discrete filter uses.

use crate::error::{Error, Result};
use crate::geometry::GaussianScalar;
use crate::likelihood::{lane_occupancy, BoundarySet, PathPosterior};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanState {
    /// Filtered lateral position, m.
    pub mean: f64,
    /// m^2. Zero only after an exact (zero-variance) measurement.
    pub variance: f64,
    pub timestamp: f64,
}

impl KalmanState {
    pub fn as_gaussian(&self) -> Result<GaussianScalar> {
        GaussianScalar::from_variance(self.mean, self.variance)
    }
}

/// Std of the white-noise lateral velocity, m/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessNoise(f64);

impl ProcessNoise {
    pub fn new(sigma_nu: f64) -> Result<Self> {
        if sigma_nu.is_finite() && sigma_nu > 0.0 {
            Ok(Self(sigma_nu))
        } else {
            Err(Error::domain(format!("process noise std must be positive, got {sigma_nu}")))
        }
    }

    pub fn sigma_nu(&self) -> f64 {
        self.0
    }
}

pub fn kf_predict(state: &KalmanState, u: f64, dt: f64, noise: ProcessNoise) -> Result<KalmanState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::domain(format!("time step must be positive, got {dt}")));
    }
    let q = dt * noise.sigma_nu();
    Ok(KalmanState {
        mean: state.mean + dt * u,
        variance: state.variance + q * q,
        timestamp: state.timestamp + dt,
    })
}

pub fn kf_update(state: &KalmanState, z: &GaussianScalar) -> Result<KalmanState> {
    let r = z.variance();
    let p = state.variance;
    if p == 0.0 && r == 0.0 {
        if state.mean == z.mean() {
            return Ok(*state);
        }
        return Err(Error::domain(format!(
            "exact state {} conflicts with exact measurement {}",
            state.mean,
            z.mean()
        )));
    }
    let gain = p / (p + r);
    Ok(KalmanState {
        mean: state.mean + gain * (z.mean() - state.mean),
        variance: (1.0 - gain) * p,
        timestamp: state.timestamp,
    })
}

/// Path-index distribution of the filtered Gaussian.
pub fn discretize_posterior(state: &KalmanState, bounds: &BoundarySet) -> Result<PathPosterior> {
    Ok(lane_occupancy(&state.as_gaussian()?, bounds))
}

/// Output of one [`ContinuousFilter::step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Filtered {
    pub state: KalmanState,
    /// Innovation `z - predicted mean`, absent on initialization.
    pub innovation: Option<f64>,
    /// Innovation variance `P + R`, absent on initialization.
    pub innovation_variance: Option<f64>,
}

/// Per-object Kalman filter. The first measurement initializes the state.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousFilter {
    noise: ProcessNoise,
    state: Option<KalmanState>,
}

impl ContinuousFilter {
    pub fn new(noise: ProcessNoise) -> Self {
        Self { noise, state: None }
    }

    pub fn state(&self) -> Option<&KalmanState> {
        self.state.as_ref()
    }

    /// Predicts to `timestamp` with lateral velocity `u` and fuses `z`.
    /// Timestamps must increase strictly.
    pub fn step(&mut self, timestamp: f64, u: f64, z: &GaussianScalar) -> Result<Filtered> {
        let out = match self.state {
            None => Filtered {
                state: KalmanState { mean: z.mean(), variance: z.variance(), timestamp },
                innovation: None,
                innovation_variance: None,
            },
            Some(prev) => {
                if !(timestamp > prev.timestamp) {
                    return Err(Error::Validation(format!(
                        "out-of-sequence measurement at t = {timestamp} (last t = {})",
                        prev.timestamp
                    )));
                }
                let mut predicted = kf_predict(&prev, u, timestamp - prev.timestamp, self.noise)?;
                predicted.timestamp = timestamp;
                let updated = kf_update(&predicted, z)?;
                Filtered {
                    state: updated,
                    innovation: Some(z.mean() - predicted.mean),
                    innovation_variance: Some(predicted.variance + z.variance()),
                }
            }
        };
        self.state = Some(out.state);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::likelihood::{extrapolate_boundaries, BoundaryDefaults, BoundarySource};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn st(mean: f64, variance: f64) -> KalmanState {
        KalmanState { mean, variance, timestamp: 0.0 }
    }

    fn g(m: f64, s: f64) -> GaussianScalar {
        GaussianScalar::new(m, s).unwrap()
    }

    #[test]
    fn predict_examples() {
        let out = kf_predict(&st(0.0, 1.0), 0.0, 0.1, ProcessNoise::new(0.4).unwrap()).unwrap();
        assert_eq!(out.mean, 0.0);
        assert!((out.variance - 1.0016).abs() < 1e-15);
        assert!((out.timestamp - 0.1).abs() < 1e-15);

        let out = kf_predict(&st(1.0, 0.5), 2.0, 0.5, ProcessNoise::new(0.1).unwrap()).unwrap();
        assert_eq!(out.mean, 2.0);
        assert!((out.variance - 0.5025).abs() < 1e-15);
    }

    #[test]
    fn predict_matches_sampled_dynamics() {
        // push samples of the prior through y + dt*u + dt*nu
        let (mean, var, u, dt, s) = (1.0, 0.5, 2.0, 0.5, 0.1);
        let prior = Normal::new(mean, f64::sqrt(var)).unwrap();
        let nu = Normal::new(0.0, s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 200_000;
        let ys: Vec<f64> = (0..n)
            .map(|_| prior.sample(&mut rng) + dt * u + dt * nu.sample(&mut rng))
            .collect();
        let m = ys.iter().sum::<f64>() / n as f64;
        let v = ys.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        let out = kf_predict(&st(mean, var), u, dt, ProcessNoise::new(s).unwrap()).unwrap();
        assert!((m - out.mean).abs() < 0.01);
        assert!((v - out.variance).abs() / out.variance < 0.02);
    }

    #[test]
    fn quiet_static_model() {
        let s = st(0.7, 0.2);
        let out = kf_predict(&s, 0.0, 0.05, ProcessNoise::new(1e-12).unwrap()).unwrap();
        assert_eq!(out.mean, s.mean);
        assert!((out.variance - s.variance).abs() < 1e-20);
    }

    #[test]
    fn invalid_inputs() {
        assert!(ProcessNoise::new(0.0).is_err());
        let n = ProcessNoise::new(0.1).unwrap();
        assert!(kf_predict(&st(0.0, 1.0), 0.0, 0.0, n).is_err());
        assert!(kf_predict(&st(0.0, 1.0), 0.0, -1.0, n).is_err());
        assert!(kf_update(&st(0.0, 0.0), &g(1.0, 0.0)).is_err());
        assert_eq!(kf_update(&st(1.0, 0.0), &g(1.0, 0.0)).unwrap(), st(1.0, 0.0));
    }

    #[test]
    fn equal_weight_fusion() {
        let out = kf_update(&st(0.0, 1.0), &g(1.0, 1.0)).unwrap();
        assert_eq!(out.mean, 0.5);
        assert_eq!(out.variance, 0.5);
    }

    #[test]
    fn uninformative_measurement() {
        let out = kf_update(&st(0.3, 0.4), &g(50.0, 1e200)).unwrap();
        assert_eq!(out.mean, 0.3);
        assert_eq!(out.variance, 0.4);
    }

    #[test]
    fn update_is_product_of_gaussians() {
        for &(m0, p, z, r) in &[(0.0, 1.0, 2.0, 0.25), (-1.2, 0.04, 0.3, 0.09), (5.0, 3.0, 4.0, 0.5)] {
            let out = kf_update(&st(m0, p), &GaussianScalar::from_variance(z, r).unwrap()).unwrap();
            let var = 1.0 / (1.0 / p + 1.0 / r);
            let mean = var * (m0 / p + z / r);
            assert!((out.mean - mean).abs() < 1e-12);
            assert!((out.variance - var).abs() < 1e-12);
            assert!(out.variance < p);
        }
    }

    #[test]
    fn filter_rejects_out_of_sequence() {
        let mut f = ContinuousFilter::new(ProcessNoise::new(0.1).unwrap());
        f.step(1.0, 0.0, &g(0.0, 0.3)).unwrap();
        assert!(f.step(1.0, 0.0, &g(0.0, 0.3)).is_err());
        assert!(f.step(0.5, 0.0, &g(0.0, 0.3)).is_err());
        assert!(f.step(1.1, 0.0, &g(0.0, 0.3)).is_ok());
    }

    #[test]
    fn first_measurement_initializes() {
        let mut f = ContinuousFilter::new(ProcessNoise::new(0.1).unwrap());
        let out = f.step(3.0, 1.0, &g(0.4, 0.3)).unwrap();
        assert_eq!(out.state.mean, 0.4);
        assert!((out.state.variance - 0.09).abs() < 1e-15);
        assert!(out.innovation.is_none());
    }

    #[test]
    fn discretization() {
        let b = extrapolate_boundaries(None, &BoundaryDefaults { std: 0.0, ..Default::default() }).unwrap();
        let p = discretize_posterior(&st(0.0, 1e-4), &b).unwrap();
        assert!(p.probs()[2] >= 0.9999);
        assert_eq!(p, discretize_posterior(&st(0.0, 1e-4), &b).unwrap());

        let far = BoundarySet::new(
            [g(-40.0, 0.0), g(-1.75, 0.0), g(1.75, 0.0), g(40.0, 0.0)],
            BoundarySource::Measured,
        )
        .unwrap();
        let p = discretize_posterior(&st(1.75, 0.09), &far).unwrap();
        assert!((p.probs()[2] - 0.5).abs() < 1e-6);
        assert!((p.probs()[3] - 0.5).abs() < 1e-6);
    }
}
