//! Probabilistic assignment of vehicles ahead of a host vehicle to the host
//! vehicle path (HVP) and its neighbouring paths.
//!
//! Two recursive filters are provided:
//!
//! * [`discrete_filter`]: a five-state Bayes filter over the path index with a
//!   banded, velocity-dependent Markov transition matrix and an inverse
//!   measurement model built from Gaussian CDFs ([`likelihood`]).
//! * [`continuous_filter`]: a scalar Kalman filter on the lateral path
//!   coordinate whose posterior is mapped algebraically onto the five path
//!   indices.
//!
//! Both feed the median estimator in [`estimator`]. Object positions are moved
//! from Cartesian host coordinates into path coordinates by [`geometry`],
//! which also carries the Monte-Carlo check of the first-order propagation.
//! [`harness`] ties everything together for scenario files, synthetic data and
//! ROC sweeps.
//!
//! Path indices run 0..=4 and increase with the lateral path coordinate `y_P`,
//! which is positive to the left of the path. Index 2 is the host path.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod continuous_filter;
pub mod discrete_filter;
pub mod error;
pub mod estimator;
pub mod geometry;
pub mod harness;
pub mod likelihood;

pub use error::{Error, Result};
pub use geometry::GaussianScalar;
pub use likelihood::{BoundarySet, PathIndex, PathPosterior};
