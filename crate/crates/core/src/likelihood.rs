//! Inverse measurement model: the probability that an object occupies each of
//! the five path regions given Gaussian object and boundary positions.
//!
//! Region `l` lies between boundary `l` and boundary `l + 1`, with virtual
//! outer boundaries at -inf and +inf. Its probability is
//!
//! ```text
//! p(l) = Phi((mu_{l+1} - mu_obj) / s_{l+1}) - Phi((mu_l - mu_obj) / s_l)
//! s_l  = sqrt(sigma_obj^2 + sigma_l^2)
//! ```

use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::GaussianScalar;

pub const NUM_PATHS: usize = 5;

const SUM_TOLERANCE: f64 = 1e-9;

/// Standard normal CDF. `NaN` is rejected; infinities map to 0 and 1.
pub fn std_normal_cdf(t: f64) -> Result<f64> {
    if t.is_nan() {
        return Err(Error::domain("normal CDF argument is NaN"));
    }
    Ok(std_normal_cdf_unchecked(t))
}

pub(crate) fn std_normal_cdf_unchecked(t: f64) -> f64 {
    0.5 * libm::erfc(-t * std::f64::consts::FRAC_1_SQRT_2)
}

/// Index of a path region, 0..=4. Index 2 is the host path; indices grow with
/// the lateral path coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathIndex(u8);

impl PathIndex {
    pub const HOST: PathIndex = PathIndex(2);

    pub fn new(value: usize) -> Result<Self> {
        if value < NUM_PATHS {
            Ok(Self(value as u8))
        } else {
            Err(Error::domain(format!("path index must be in 0..=4, got {value}")))
        }
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    /// The index mirrored about the host path.
    pub fn reversed(self) -> Self {
        Self(4 - self.0)
    }

    pub fn all() -> impl Iterator<Item = PathIndex> {
        (0..NUM_PATHS as u8).map(PathIndex)
    }
}

impl fmt::Display for PathIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Sum that pairs mirrored entries first, so reversing the input gives a
/// bit-identical result.
pub(crate) fn mirrored_sum(w: &[f64; NUM_PATHS]) -> f64 {
    ((w[0] + w[4]) + (w[1] + w[3])) + w[2]
}

/// A probability distribution over the five path indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPosterior([f64; NUM_PATHS]);

impl PathPosterior {
    pub fn new(probs: [f64; NUM_PATHS]) -> Result<Self> {
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::domain(format!("probabilities must lie in [0, 1]: {probs:?}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::domain(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self(probs))
    }

    /// Normalizes nonnegative weights. Fails when all weights are zero.
    pub fn from_weights(weights: [f64; NUM_PATHS]) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::domain(format!("weights must be finite and >= 0: {weights:?}")));
        }
        let total = mirrored_sum(&weights);
        if total <= 0.0 {
            return Err(Error::domain("weights sum to zero"));
        }
        Ok(Self(weights.map(|w| w / total)))
    }

    pub fn uniform() -> Self {
        Self([1.0 / NUM_PATHS as f64; NUM_PATHS])
    }

    pub fn delta(index: PathIndex) -> Self {
        let mut p = [0.0; NUM_PATHS];
        p[index.get()] = 1.0;
        Self(p)
    }

    pub fn probs(&self) -> &[f64; NUM_PATHS] {
        &self.0
    }

    pub fn get(&self, index: PathIndex) -> f64 {
        self.0[index.get()]
    }

    pub fn reversed(&self) -> Self {
        let mut p = self.0;
        p.reverse();
        Self(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundarySource {
    /// All four boundaries were supplied.
    Measured,
    /// The inner pair was supplied, the outer pair extrapolated.
    Extrapolated,
    /// Nothing was supplied; default inner boundaries, extrapolated outer ones.
    Default,
}

/// Four path boundaries in the lateral path coordinate, strictly increasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySet {
    boundaries: [GaussianScalar; 4],
    source: BoundarySource,
}

impl BoundarySet {
    pub fn new(boundaries: [GaussianScalar; 4], source: BoundarySource) -> Result<Self> {
        if boundaries.windows(2).any(|w| w[0].mean() >= w[1].mean()) {
            let means: Vec<f64> = boundaries.iter().map(|b| b.mean()).collect();
            return Err(Error::domain(format!("boundary means must increase strictly: {means:?}")));
        }
        Ok(Self { boundaries, source })
    }

    pub fn boundaries(&self) -> &[GaussianScalar; 4] {
        &self.boundaries
    }

    pub fn source(&self) -> BoundarySource {
        self.source
    }

    pub fn means(&self) -> [f64; 4] {
        self.boundaries.map(|b| b.mean())
    }

    /// Region containing a crisp lateral position. A position exactly on a
    /// boundary belongs to the region below it.
    pub fn region_of(&self, lateral: f64) -> PathIndex {
        let count = self.boundaries.iter().filter(|b| b.mean() < lateral).count();
        PathIndex(count as u8)
    }
}

/// Default boundary geometry used when nothing (or only the inner pair) is
/// observed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryDefaults {
    /// Half the host path width, m.
    pub center_halfwidth: f64,
    /// Std of defaulted inner boundaries, m.
    pub std: f64,
    /// Extrapolated outer boundaries get the adjacent inner std times this.
    pub outer_std_factor: f64,
}

impl Default for BoundaryDefaults {
    fn default() -> Self {
        Self { center_halfwidth: 1.75, std: 0.3, outer_std_factor: 1.5 }
    }
}

/// Completes a boundary set from the inner pair (or defaults) by repeating
/// the inner width outwards on both sides.
pub fn extrapolate_boundaries(
    inner: Option<(GaussianScalar, GaussianScalar)>,
    defaults: &BoundaryDefaults,
) -> Result<BoundarySet> {
    let (b2, b3, source) = match inner {
        Some((b2, b3)) => (b2, b3, BoundarySource::Extrapolated),
        None => {
            let h = defaults.center_halfwidth;
            (
                GaussianScalar::new(-h, defaults.std)?,
                GaussianScalar::new(h, defaults.std)?,
                BoundarySource::Default,
            )
        }
    };
    let width = b3.mean() - b2.mean();
    if !(width > 0.0) {
        return Err(Error::domain(format!("inner path width must be positive, got {width}")));
    }
    let f = defaults.outer_std_factor;
    let b1 = b2.shifted(-width).scaled_std(f);
    let b4 = b3.shifted(width).scaled_std(f);
    BoundarySet::new([b1, b2, b3, b4], source)
}

/// `P(y_obj < y_bnd)`. A degenerate combined std turns this into a step
/// with value 0.5 on a tie.
fn below(object: &GaussianScalar, boundary: &GaussianScalar) -> f64 {
    let s = object.variance() + boundary.variance();
    let gap = boundary.mean() - object.mean();
    if s == 0.0 {
        return match gap.partial_cmp(&0.0) {
            Some(std::cmp::Ordering::Greater) => 1.0,
            Some(std::cmp::Ordering::Less) => 0.0,
            _ => 0.5,
        };
    }
    std_normal_cdf_unchecked(gap / s.sqrt())
}

/// Occupancy probability of every path region.
///
/// With unequal boundary stds a difference of CDFs can dip below zero; such
/// entries are clamped to zero before normalizing.
pub fn lane_occupancy(object: &GaussianScalar, bounds: &BoundarySet) -> PathPosterior {
    let mut cdf = [0.0; NUM_PATHS + 1];
    cdf[NUM_PATHS] = 1.0;
    for (c, b) in cdf[1..NUM_PATHS].iter_mut().zip(bounds.boundaries()) {
        *c = below(object, b);
    }
    let mut p = [0.0; NUM_PATHS];
    for l in 0..NUM_PATHS {
        p[l] = (cdf[l + 1] - cdf[l]).max(0.0);
    }
    // cdf[5] - cdf[0] = 1 and no clamping is possible with equal stds, so the
    // total is never zero.
    let total: f64 = p.iter().sum();
    PathPosterior(p.map(|x| x / total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// `erf` via the all-positive Kummer series
    /// `2/sqrt(pi) exp(-x^2) sum (2x^2)^n x / (2n+1)!!`.
    fn erf_series(x: f64) -> f64 {
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut n = 0.0;
        while term.abs() > 1e-18 * sum.abs() {
            n += 1.0;
            term *= 2.0 * x2 / (2.0 * n + 1.0);
            sum += term;
        }
        2.0 / std::f64::consts::PI.sqrt() * (-x2).exp() * sum
    }

    fn phi_oracle(t: f64) -> f64 {
        0.5 * (1.0 + erf_series(t / std::f64::consts::SQRT_2))
    }

    fn g(m: f64, s: f64) -> GaussianScalar {
        GaussianScalar::new(m, s).unwrap()
    }

    fn bounds(means: [f64; 4], std: f64) -> BoundarySet {
        BoundarySet::new(means.map(|m| g(m, std)), BoundarySource::Measured).unwrap()
    }

    #[test]
    fn cdf_reference_points() {
        assert_eq!(std_normal_cdf(0.0).unwrap(), 0.5);
        assert_eq!(std_normal_cdf(f64::INFINITY).unwrap(), 1.0);
        assert_eq!(std_normal_cdf(f64::NEG_INFINITY).unwrap(), 0.0);
        assert!((std_normal_cdf(1.959964).unwrap() - 0.975).abs() < 1e-6);
        assert!(std_normal_cdf(f64::NAN).is_err());
    }

    #[test]
    fn cdf_matches_series_oracle() {
        let mut worst: f64 = 0.0;
        let mut t = -8.0;
        while t <= 8.0 {
            worst = worst.max((std_normal_cdf(t).unwrap() - phi_oracle(t)).abs());
            t += 0.01;
        }
        assert!(worst <= 1e-12, "max abs error {worst}");
    }

    #[test]
    fn host_lane_concentration() {
        let b = bounds([-5.25, -1.75, 1.75, 5.25], 0.0);
        let p = lane_occupancy(&g(0.0, 0.3), &b);
        let expected = 2.0 * phi_oracle(1.75 / 0.3) - 1.0;
        assert!((p.probs()[2] - expected).abs() < 1e-12);
        assert!(p.probs()[2] >= 0.9999);
        for l in [0, 1, 3, 4] {
            assert!(p.probs()[l] <= 1e-4);
        }
    }

    #[test]
    fn object_on_boundary_splits_evenly() {
        let b = bounds([-50.0, -1.75, 1.75, 50.0], 0.0);
        let p = lane_occupancy(&g(1.75, 0.3), &b);
        assert!((p.probs()[2] - 0.5).abs() < 1e-6);
        assert!((p.probs()[3] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn degenerate_gaussian_is_indicator() {
        let b = bounds([-5.25, -1.75, 1.75, 5.25], 0.0);
        assert_eq!(lane_occupancy(&g(3.0, 0.0), &b).probs(), &[0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(lane_occupancy(&g(-1.75, 0.0), &b).probs(), &[0.0, 0.5, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn unequal_stds_never_go_negative() {
        let b = BoundarySet::new(
            [g(-5.25, 0.1), g(-1.75, 3.0), g(1.75, 0.01), g(5.25, 0.1)],
            BoundarySource::Measured,
        )
        .unwrap();
        let p = lane_occupancy(&g(4.0, 0.0), &b);
        assert!(p.probs().iter().all(|&x| x >= 0.0));
        assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn extrapolation_from_inner_pair() {
        let set = extrapolate_boundaries(Some((g(-1.75, 0.1), g(1.75, 0.1))), &BoundaryDefaults::default())
            .unwrap();
        assert_eq!(set.means(), [-5.25, -1.75, 1.75, 5.25]);
        assert!((set.boundaries()[0].std() - 0.15).abs() < 1e-15);
        assert!((set.boundaries()[3].std() - 0.15).abs() < 1e-15);
        assert_eq!(set.source(), BoundarySource::Extrapolated);

        let set = extrapolate_boundaries(Some((g(-2.0, 0.0), g(1.0, 0.0))), &BoundaryDefaults::default())
            .unwrap();
        assert_eq!(set.means(), [-5.0, -2.0, 1.0, 4.0]);
    }

    #[test]
    fn extrapolation_defaults() {
        let d = BoundaryDefaults::default();
        let set = extrapolate_boundaries(None, &d).unwrap();
        assert_eq!(set.means(), [-5.25, -1.75, 1.75, 5.25]);
        assert_eq!(set.boundaries()[1].std(), d.std);
        assert!((set.boundaries()[0].std() - d.std * d.outer_std_factor).abs() < 1e-15);
        assert_eq!(set.source(), BoundarySource::Default);
    }

    #[test]
    fn extrapolation_rejects_inverted_pair() {
        let r = extrapolate_boundaries(Some((g(1.0, 0.1), g(1.0, 0.1))), &BoundaryDefaults::default());
        assert!(r.is_err());
    }

    #[test]
    fn boundary_order_enforced() {
        let r = BoundarySet::new([g(0.0, 0.1), g(-1.0, 0.1), g(1.0, 0.1), g(2.0, 0.1)], BoundarySource::Measured);
        assert!(r.is_err());
    }

    #[test]
    fn region_lookup() {
        let b = bounds([-5.25, -1.75, 1.75, 5.25], 0.3);
        assert_eq!(b.region_of(0.0), PathIndex::HOST);
        assert_eq!(b.region_of(1.75).get(), 2);
        assert_eq!(b.region_of(1.7500001).get(), 3);
        assert_eq!(b.region_of(-9.0).get(), 0);
        assert_eq!(b.region_of(9.0).get(), 4);
    }

    #[test]
    fn shape_regimes() {
        let b = bounds([-5.25, -1.75, 1.75, 5.25], 0.0);
        assert!(lane_occupancy(&g(0.0, 0.3), &b).probs()[2] > 0.99);
        assert!(lane_occupancy(&g(0.0, 2.0), &b).probs()[2] < 0.65);
    }

    #[test]
    fn posterior_validation() {
        assert!(PathPosterior::new([0.2; 5]).is_ok());
        assert!(PathPosterior::new([0.3; 5]).is_err());
        assert!(PathPosterior::new([1.2, -0.2, 0.0, 0.0, 0.0]).is_err());
        assert!(PathPosterior::from_weights([0.0; 5]).is_err());
        assert!(PathIndex::new(5).is_err());
    }

    fn boundary_strategy() -> impl Strategy<Value = ([f64; 4], [f64; 4])> {
        (
            -20.0f64..20.0,
            prop::array::uniform3(0.1f64..6.0),
            prop::array::uniform4(0.0f64..2.0),
        )
            .prop_map(|(start, gaps, stds)| {
                let means = [start, start + gaps[0], start + gaps[0] + gaps[1], start + gaps[0] + gaps[1] + gaps[2]];
                (means, stds)
            })
    }

    proptest! {
        #[test]
        fn occupancy_is_normalized((means, stds) in boundary_strategy(), mu in -40.0f64..40.0, s in 0.0f64..3.0) {
            let b = BoundarySet::new(std::array::from_fn(|i| g(means[i], stds[i])), BoundarySource::Measured).unwrap();
            let p = lane_occupancy(&g(mu, s), &b);
            prop_assert!((p.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(p.probs().iter().all(|x| (0.0..=1.0).contains(x)));
        }

        #[test]
        fn translation_equivariance(mu in -5.0f64..5.0, s in 0.05f64..2.0, shift in -8.0f64..8.0) {
            // power-of-two grid keeps the shifted means exactly representable
            let shift = (shift * 64.0).round() / 64.0;
            let mu = (mu * 64.0).round() / 64.0;
            let base = [-5.25, -1.75, 1.75, 5.25];
            let a = lane_occupancy(&g(mu, s), &bounds(base, 0.3));
            let b = lane_occupancy(&g(mu + shift, s), &bounds(base.map(|m| m + shift), 0.3));
            prop_assert_eq!(a, b);
        }

        #[test]
        fn outer_regions_monotone(mu in -10.0f64..10.0, step in 0.0f64..2.0, s in 0.01f64..2.0) {
            let b = bounds([-5.25, -1.75, 1.75, 5.25], 0.3);
            let lo = lane_occupancy(&g(mu, s), &b);
            let hi = lane_occupancy(&g(mu + step, s), &b);
            prop_assert!(hi.probs()[0] <= lo.probs()[0] + 1e-15);
            prop_assert!(hi.probs()[4] + 1e-15 >= lo.probs()[4]);
        }
    }
}
