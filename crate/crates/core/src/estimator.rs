//! Median estimator with probability gating.

use crate::likelihood::{PathIndex, PathPosterior, NUM_PATHS};

pub const DEFAULT_P_MIN: f64 = 0.3;

/// Cumulative sums within this distance of 0.5 count as reaching it.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assignment {
    /// The median index, present only when accepted.
    pub index: Option<PathIndex>,
    /// Posterior mass at the median index.
    pub probability: f64,
    pub accepted: bool,
}

/// The index `m` with `P(l <= m) >= 0.5` and `P(l >= m) >= 0.5`. When two
/// indices qualify (a cumulative sum of exactly 0.5), the lower one wins.
pub fn median_index(posterior: &PathPosterior) -> PathIndex {
    let mut cum = 0.0;
    for (l, p) in posterior.probs().iter().enumerate() {
        cum += p;
        if cum >= 0.5 - TIE_TOLERANCE {
            return PathIndex::new(l).expect("index in range");
        }
    }
    PathIndex::new(NUM_PATHS - 1).expect("index in range")
}

pub fn assign(posterior: &PathPosterior, p_min: f64) -> Assignment {
    let median = median_index(posterior);
    let probability = posterior.get(median);
    let accepted = probability >= p_min;
    Assignment { index: accepted.then_some(median), probability, accepted }
}

/// Alternative point estimates, kept for comparison against the median.
/// Nothing in the pipeline uses them.
pub mod diagnostics {
    use super::*;

    /// Most probable index; the lowest one on ties.
    pub fn map_index(posterior: &PathPosterior) -> PathIndex {
        let p = posterior.probs();
        let best = (0..NUM_PATHS).fold(0, |best, l| if p[l] > p[best] { l } else { best });
        PathIndex::new(best).expect("index in range")
    }

    /// Posterior mean rounded to the nearest index.
    pub fn mean_index(posterior: &PathPosterior) -> PathIndex {
        let mean: f64 = posterior.probs().iter().enumerate().map(|(l, p)| l as f64 * p).sum();
        PathIndex::new(mean.round().clamp(0.0, 4.0) as usize).expect("index in range")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pp(p: [f64; 5]) -> PathPosterior {
        PathPosterior::new(p).unwrap()
    }

    #[test]
    fn median_examples() {
        assert_eq!(median_index(&PathPosterior::uniform()).get(), 2);
        assert_eq!(median_index(&pp([0.2, 0.4, 0.2, 0.1, 0.1])).get(), 1);
        assert_eq!(median_index(&pp([0.5, 0.5, 0.0, 0.0, 0.0])).get(), 0);
        assert_eq!(median_index(&pp([0.0, 0.0, 0.0, 0.5, 0.5])).get(), 3);
    }

    #[test]
    fn gating() {
        // left path assigned with 0.4 of the mass against a 0.3 threshold
        let a = assign(&pp([0.25, 0.4, 0.2, 0.1, 0.05]), DEFAULT_P_MIN);
        assert!(a.accepted);
        assert_eq!(a.index.unwrap().get(), 1);
        assert_eq!(a.probability, 0.4);

        let a = assign(&PathPosterior::uniform(), DEFAULT_P_MIN);
        assert!(!a.accepted);
        assert!(a.index.is_none());

        let a = assign(&PathPosterior::delta(PathIndex::new(4).unwrap()), 1.0);
        assert!(a.accepted);
        assert_eq!(a.index.unwrap().get(), 4);
    }

    #[test]
    fn alternatives_can_disagree_with_median() {
        let p = pp([0.35, 0.05, 0.2, 0.05, 0.35]);
        assert_eq!(median_index(&p).get(), 2);
        assert_eq!(diagnostics::map_index(&p).get(), 0);
        assert_eq!(diagnostics::mean_index(&p).get(), 2);
    }

    proptest! {
        #[test]
        fn median_properties(w in prop::array::uniform5(0.0f64..1.0), p_min in 0.0f64..1.0) {
            prop_assume!(w.iter().sum::<f64>() > 1e-6);
            let p = PathPosterior::from_weights(w).unwrap();
            let m = median_index(&p);
            prop_assert!(p.get(m) > 0.0);
            prop_assert!(assign(&p, 0.0).accepted);
            let a = assign(&p, p_min);
            prop_assert_eq!(a.accepted, a.index.is_some());
            if a.accepted {
                prop_assert!(a.probability >= p_min);
            }
        }
    }
}
