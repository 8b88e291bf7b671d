use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::knn::{select_neighbors, TieBreaker};
use crate::metric::{
    at_most, ball_members, candidate_distances, eps_knn_radius, BallKind, Distance, FiniteSample, MetricSpace, Query,
};

use super::require_k;

/// How a query's neighbor set is formed.
#[derive(Debug)]
pub enum Selection<'t> {
    /// Exactly k neighbors, ties broken by the given rule.
    Break(&'t mut TieBreaker),
    /// Every candidate in the closed ball of radius `eps_kNN`.
    RawTies,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InDegreeCensus {
    /// `counts[j]` = number of members whose neighbor set holds member `j`.
    pub counts: Vec<usize>,
    /// Queries whose closed `eps_kNN` ball held more than k candidates.
    pub tied_queries: usize,
}

impl InDegreeCensus {
    pub fn max(&self) -> usize {
        self.counts.iter().copied().max().unwrap_or(0)
    }
}

fn neighbors<S: MetricSpace>(
    space: &S,
    sample: &FiniteSample<S::Point>,
    query: Query<'_, S::Point>,
    k: usize,
    sel: &mut Selection<'_>,
) -> Result<(Vec<usize>, bool)> {
    let cands = candidate_distances(space, sample, query)?;
    match sel {
        Selection::Break(tie) => {
            let ns = select_neighbors(&cands, k, tie)?;
            let tied = ns.has_tie();
            Ok((ns.indices, tied))
        }
        Selection::RawTies => {
            let mut d: Vec<S::Dist> = cands.iter().map(|(_, d)| d.clone()).collect();
            let radius = crate::metric::kth_smallest(&mut d, k)?;
            let ball: Vec<usize> = cands
                .iter()
                .filter(|(_, d)| at_most(d, &radius))
                .map(|(i, _)| *i)
                .collect();
            let tied = ball.len() > k;
            Ok((ball, tied))
        }
    }
}

/// In-degree of every member, each member querying the others.
pub fn in_degree_census<S: MetricSpace>(
    space: &S,
    sample: &FiniteSample<S::Point>,
    k: usize,
    mut sel: Selection<'_>,
) -> Result<InDegreeCensus> {
    let n = sample.len();
    require_k(k, n.saturating_sub(1))?;
    let mut counts = vec![0; n];
    let mut tied_queries = 0;
    for i in 0..n {
        let (chosen, tied) = neighbors(space, sample, Query::Member(i), k, &mut sel)?;
        tied_queries += tied as usize;
        for j in chosen {
            counts[j] += 1;
        }
    }
    Ok(InDegreeCensus { counts, tied_queries })
}

/// In-degree of an outside point `x`: member `i` queries with `x` placed in
/// slot `i`, and counts when that slot is chosen.
pub fn adjoined_in_degree<S: MetricSpace>(
    space: &S,
    sample: &FiniteSample<S::Point>,
    x: &S::Point,
    k: usize,
    mut sel: Selection<'_>,
) -> Result<usize> {
    let n = sample.len();
    require_k(k, n)?;
    let mut count = 0;
    for i in 0..n {
        let (chosen, _) = neighbors(space, sample, Query::Adjoined { slot: i, point: x }, k, &mut sel)?;
        count += chosen.contains(&i) as usize;
    }
    Ok(count)
}

/// Members with a small k-NN radius whose closed k-NN ball is dominated by
/// a marked subsample.
#[derive(Debug, Clone, PartialEq)]
pub struct TSet {
    pub members: Vec<usize>,
    /// Size of the subsample.
    pub m: usize,
    pub beta: usize,
    pub alpha: f64,
}

impl TSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `beta m / alpha`
    pub fn bound(&self) -> f64 {
        self.beta as f64 * self.m as f64 / self.alpha
    }

    pub fn within_bound(&self) -> bool {
        (self.len() as f64) <= self.bound()
    }
}

/// The set `T` for the subsample `mask`, using the space's declared metric
/// dimension and scale.
pub fn t_set_census<S: MetricSpace>(
    space: &S,
    sample: &FiniteSample<S::Point>,
    mask: &[bool],
    alpha: f64,
    k: usize,
) -> Result<TSet> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} outside (0, 1)")));
    }
    if mask.len() != sample.len() {
        return Err(Error::InvalidParameter(format!(
            "mask has {} entries for {} points",
            mask.len(),
            sample.len()
        )));
    }
    let declared = space.declared();
    let beta = declared
        .beta
        .ok_or_else(|| Error::InvalidParameter(format!("{} declares no metric dimension", space.name())))?;
    require_k(k, sample.len().saturating_sub(1))?;
    let m = mask.iter().filter(|&&b| b).count();
    let mut members = Vec::new();
    for i in 0..sample.len() {
        let eps = eps_knn_radius(space, sample, Query::Member(i), k)?;
        if let Some(s) = &declared.scale {
            if eps.to_value().try_cmp(s)? != Ordering::Less {
                continue;
            }
        }
        let ball = ball_members(space, sample, sample.point(i), &eps, BallKind::Closed)?;
        let marked = ball.iter().filter(|&&j| mask[j]).count();
        if marked as f64 > alpha * ball.len() as f64 {
            members.push(i);
        }
    }
    Ok(TSet {
        members,
        m,
        beta,
        alpha,
    })
}
