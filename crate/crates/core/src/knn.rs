//! The k-NN rule with explicit tie-breaking, plug-in prediction, the Bayes
//! classifier and the diagnostic regressors.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distribution::{LabeledDistribution, PointOf};
use crate::error::{Error, Result};
use crate::metric::{candidate_distances, kth_smallest, strictly_less, Distance, FiniteSample, MetricSpace, Query};
use crate::stats::{trial_rng, Accumulator, Estimate};

/// How sphere points are chosen when the closed ball holds more than k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TieBreakPolicy {
    /// Lowest slot index first.
    IndexOrder,
    /// Uniform without replacement, seeded.
    UniformRandom { seed: u64 },
}

/// Live tie-breaking state. The uniform variant owns its generator, so a
/// sequence of queries consumes one reproducible stream.
#[derive(Debug, Clone)]
pub enum TieBreaker {
    IndexOrder,
    Uniform(ChaCha8Rng),
}

impl TieBreaker {
    pub fn uniform(seed: u64) -> Self {
        TieBreaker::Uniform(ChaCha8Rng::seed_from_u64(seed))
    }
}

impl From<TieBreakPolicy> for TieBreaker {
    fn from(p: TieBreakPolicy) -> Self {
        match p {
            TieBreakPolicy::IndexOrder => TieBreaker::IndexOrder,
            TieBreakPolicy::UniformRandom { seed } => TieBreaker::uniform(seed),
        }
    }
}

/// The k chosen candidates of one query.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborSet<D> {
    /// Candidate slots in ascending order. For [`Query::Adjoined`] the slot
    /// of the querying member denotes the adjoined point.
    pub indices: Vec<usize>,
    /// `eps_kNN` of the query.
    pub radius: D,
    /// Candidates strictly inside the radius; all of them are chosen.
    pub open_count: usize,
    /// Candidates on the sphere of that radius.
    pub sphere_count: usize,
}

impl<D> NeighborSet<D> {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Whether choosing required a tie-break among sphere points.
    pub fn has_tie(&self) -> bool {
        self.open_count + self.sphere_count > self.indices.len()
    }
}

/// Picks k of the `(slot, distance)` candidates.
pub fn select_neighbors<D: Distance>(cands: &[(usize, D)], k: usize, tie: &mut TieBreaker) -> Result<NeighborSet<D>> {
    let mut dists: Vec<D> = cands.iter().map(|(_, d)| d.clone()).collect();
    let radius = kth_smallest(&mut dists, k)?;
    let mut chosen = Vec::with_capacity(k);
    let mut sphere = Vec::new();
    for (slot, d) in cands {
        if strictly_less(d, &radius) {
            chosen.push(*slot);
        } else if d.ties_with(&radius) {
            sphere.push(*slot);
        }
    }
    let open_count = chosen.len();
    let need = k - open_count;
    match tie {
        TieBreaker::IndexOrder => {
            sphere.sort_unstable();
            chosen.extend_from_slice(&sphere[..need]);
        }
        TieBreaker::Uniform(rng) => {
            chosen.extend(
                rand::seq::index::sample(rng, sphere.len(), need)
                    .iter()
                    .map(|i| sphere[i]),
            );
        }
    }
    chosen.sort_unstable();
    Ok(NeighborSet {
        indices: chosen,
        radius,
        open_count,
        sphere_count: sphere.len(),
    })
}

pub fn k_nearest<S: MetricSpace>(
    space: &S,
    sample: &FiniteSample<S::Point>,
    query: Query<'_, S::Point>,
    k: usize,
    tie: &mut TieBreaker,
) -> Result<NeighborSet<S::Dist>> {
    let cands = candidate_distances(space, sample, query)?;
    select_neighbors(&cands, k, tie)
}

/// Label count among the neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Vote {
    pub ones: usize,
    pub k: usize,
}

impl Vote {
    pub fn eta(&self) -> f64 {
        self.ones as f64 / self.k as f64
    }

    /// 1 iff `ones / k >= 1/2`.
    pub fn predict(&self) -> u8 {
        (2 * self.ones >= self.k) as u8
    }
}

fn vote_of(labels: &[u8], n: &NeighborSet<impl Distance>) -> Vote {
    Vote {
        ones: n.indices.iter().filter(|&&i| labels[i] == 1).count(),
        k: n.indices.len(),
    }
}

pub fn vote<S: MetricSpace>(
    space: &S,
    sample: &FiniteSample<S::Point>,
    x: &S::Point,
    k: usize,
    tie: &mut TieBreaker,
) -> Result<Vote> {
    let labels = sample.require_labels()?;
    let n = k_nearest(space, sample, Query::Point(x), k, tie)?;
    Ok(vote_of(labels, &n))
}

/// Mean label over the neighbors of `x`.
pub fn eta_n<S: MetricSpace>(
    space: &S,
    sample: &FiniteSample<S::Point>,
    x: &S::Point,
    k: usize,
    tie: &mut TieBreaker,
) -> Result<f64> {
    vote(space, sample, x, k, tie).map(|v| v.eta())
}

/// The k-NN rule: 1 iff `eta_n(x) >= 1/2`.
pub fn predict<S: MetricSpace>(
    space: &S,
    sample: &FiniteSample<S::Point>,
    x: &S::Point,
    k: usize,
    tie: &mut TieBreaker,
) -> Result<u8> {
    vote(space, sample, x, k, tie).map(|v| v.predict())
}

/// Bayes rule: 1 iff `eta >= 1/2`.
pub fn bayes_classify(eta: f64) -> Result<u8> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!("eta {eta} outside [0, 1]")));
    }
    Ok((eta >= 0.5) as u8)
}

/// Monte Carlo mean of `min(eta(X), 1 - eta(X))`.
pub fn bayes_error_mc<D: LabeledDistribution>(dist: &D, trials: usize, seed: u64) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let mut rng = trial_rng(seed, 0);
    let mut acc = Accumulator::new();
    for _ in 0..trials {
        let x = dist.sample_point(&mut rng);
        let e = dist.eta(&x).ok_or(Error::NoRegressionFunction)?;
        acc.push(e.min(1.0 - e));
    }
    Ok(acc.estimate())
}

/// Mean of the true `eta` over the neighbors of `x`.
pub fn eta_tilde<S: MetricSpace>(
    space: &S,
    sample: &FiniteSample<S::Point>,
    x: &S::Point,
    k: usize,
    tie: &mut TieBreaker,
    eta: impl Fn(&S::Point) -> f64,
) -> Result<f64> {
    let n = k_nearest(space, sample, Query::Point(x), k, tie)?;
    Ok(n.indices.iter().map(|&i| eta(sample.point(i))).sum::<f64>() / k as f64)
}

/// `eta_n` and `eta_tilde` from one neighbor selection.
pub fn eta_pair<S: MetricSpace>(
    space: &S,
    sample: &FiniteSample<S::Point>,
    x: &S::Point,
    k: usize,
    tie: &mut TieBreaker,
    eta: impl Fn(&S::Point) -> f64,
) -> Result<(f64, f64)> {
    let labels = sample.require_labels()?;
    let n = k_nearest(space, sample, Query::Point(x), k, tie)?;
    let tilde = n.indices.iter().map(|&i| eta(sample.point(i))).sum::<f64>() / k as f64;
    Ok((vote_of(labels, &n).eta(), tilde))
}

/// `min(1, min_{y in Q} f(y) + rho(x, y))`.
pub fn lipschitz_extend<S: MetricSpace>(space: &S, values: &[(S::Point, f64)], x: &S::Point) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("Q"));
    }
    let mut best = f64::INFINITY;
    for (y, f) in values {
        if !(0.0..=1.0).contains(f) {
            return Err(Error::InvalidParameter(format!("value {f} outside [0, 1]")));
        }
        best = best.min(f + space.distance(x, y)?.to_f64());
    }
    Ok(best.min(1.0))
}

/// Error of the k-NN rule trained on `sample` at one fresh labeled point.
pub fn misclassified<D: LabeledDistribution>(
    dist: &D,
    sample: &FiniteSample<PointOf<D>>,
    x: &PointOf<D>,
    y: u8,
    k: usize,
    tie: &mut TieBreaker,
) -> Result<bool> {
    Ok(predict(dist.space(), sample, x, k, tie)? != y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Real;
    use crate::spaces::{build_zero_one, RealLine};

    #[test]
    fn unique_nearest() {
        let s = FiniteSample::new(vec![0.0, 5.0, 2.0]);
        let n = k_nearest(&RealLine::new(), &s, Query::Point(&1.8), 1, &mut TieBreaker::IndexOrder).unwrap();
        assert_eq!(n.indices, vec![2]);
        assert!(!n.has_tie());
    }

    #[test]
    fn index_order_breaks_ties_by_slot() {
        // query at 0; candidates at -1, 1 (tied) and 0.5: k = 2 needs one of the pair
        let s = FiniteSample::new(vec![3.0, 1.0, 0.5, -1.0]);
        let n = k_nearest(&RealLine::new(), &s, Query::Point(&0.0), 2, &mut TieBreaker::IndexOrder).unwrap();
        assert_eq!(n.indices, vec![1, 2]);
        assert_eq!((n.open_count, n.sphere_count), (1, 2));
        assert_eq!(n.radius, Real::new(1.0, 0.0));
    }

    #[test]
    fn uniform_zero_one_is_fair() {
        let (space, sample) = build_zero_one(5);
        let mut tie = TieBreaker::uniform(11);
        let mut counts = [0usize; 5];
        let reps = 10_000;
        for _ in 0..reps {
            let n = k_nearest(&space, &sample, Query::Point(&99), 1, &mut tie).unwrap();
            counts[n.indices[0]] += 1;
        }
        let p = 0.2;
        let se = (p * (1.0 - p) / reps as f64).sqrt();
        for c in counts {
            assert!((c as f64 / reps as f64 - p).abs() <= 3.0 * se, "{counts:?}");
        }
    }

    #[test]
    fn k_out_of_range() {
        let s = FiniteSample::new(vec![0.0, 1.0]);
        let r = k_nearest(&RealLine::new(), &s, Query::Point(&0.0), 3, &mut TieBreaker::IndexOrder);
        assert_eq!(r, Err(Error::KOutOfRange { k: 3, available: 2 }));
    }

    #[test]
    fn eta_and_prediction() {
        let s = FiniteSample::labeled(vec![0.0, 1.0, 2.0, 10.0], vec![0, 1, 1, 1]).unwrap();
        let line = RealLine::new();
        let mut t = TieBreaker::IndexOrder;
        assert_eq!(eta_n(&line, &s, &0.4, 2, &mut t).unwrap(), 0.5);
        assert_eq!(predict(&line, &s, &0.4, 2, &mut t).unwrap(), 1);
        assert_eq!(eta_n(&line, &s, &1.5, 2, &mut t).unwrap(), 1.0);
        let all_one = FiniteSample::labeled(vec![0.0, 1.0], vec![1, 1]).unwrap();
        assert_eq!(eta_n(&line, &all_one, &0.0, 2, &mut t).unwrap(), 1.0);
        assert!(eta_n(&line, &FiniteSample::new(vec![0.0]), &0.0, 1, &mut t).is_err());
    }

    #[test]
    fn vote_threshold_is_non_strict() {
        assert_eq!(Vote { ones: 1, k: 2 }.predict(), 1);
        assert_eq!(Vote { ones: 49, k: 100 }.predict(), 0);
    }

    #[test]
    fn bayes_rule() {
        assert_eq!(bayes_classify(0.5), Ok(1));
        assert_eq!(bayes_classify(0.3), Ok(0));
        assert_eq!(bayes_classify(1.0), Ok(1));
        assert!(bayes_classify(1.2).is_err());
        assert!(bayes_classify(f64::NAN).is_err());
    }

    #[test]
    fn lipschitz_extension_examples() {
        let line = RealLine::new();
        let q = vec![(0.0, 0.2)];
        assert!((lipschitz_extend(&line, &q, &0.3).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(lipschitz_extend(&line, &q, &0.0).unwrap(), 0.2);
        assert_eq!(lipschitz_extend(&line, &q, &5.0).unwrap(), 1.0);
        assert!(lipschitz_extend(&line, &[], &0.0).is_err());
    }
}
