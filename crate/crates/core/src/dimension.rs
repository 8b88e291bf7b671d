//! Unconnected ball families, multiplicity, greedy cover extraction, finite
//! witnesses for Nagata and metric dimension, and the radius `r_alpha`.
//!
//! A [`DimensionWitness::ConsistentWithDim`] verdict means no violation was
//! found on the finite data and radius grid searched. It is not a proof about
//! the underlying space.

use itertools::Itertools;
use rand::seq::index::sample as sample_indices;
use rand::Rng;

use crate::error::{Error, Result};
use crate::metric::{at_most, strictly_less, BallFamily, ClosedBall, Distance, FiniteSample, MetricSpace, Real};
use crate::stats::trial_rng;

/// Cap on candidate tuples examined by one exhaustive witness search.
pub const TUPLE_BUDGET: u128 = 1_000_000;

fn max_ref<'a, D: Distance>(a: &'a D, b: &'a D) -> &'a D {
    if a.total_cmp(b) == std::cmp::Ordering::Less {
        b
    } else {
        a
    }
}

/// `rho(c_i, c_j) > max(r_i, r_j)` for one pair of balls.
fn separated<D: Distance>(d: &D, ri: &D, rj: &D) -> bool {
    strictly_less(max_ref(ri, rj), d)
}

/// True iff no ball of the family contains another ball's center.
pub fn is_unconnected<S: MetricSpace>(space: &S, family: &BallFamily<S::Point, S::Dist>) -> Result<bool> {
    if family.is_empty() {
        return Err(Error::Empty("ball family"));
    }
    for (i, a) in family.iter().enumerate() {
        for b in &family[i + 1..] {
            let d = space.distance(&a.center, &b.center)?;
            if !separated(&d, &a.radius, &b.radius) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Number of closed balls of the family containing `x`.
pub fn multiplicity<S: MetricSpace>(space: &S, x: &S::Point, family: &BallFamily<S::Point, S::Dist>) -> Result<usize> {
    let mut m = 0;
    for b in family {
        if at_most(&space.distance(x, &b.center)?, &b.radius) {
            m += 1;
        }
    }
    Ok(m)
}

/// Rounds of a greedy extraction; entries index the input family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub rounds: Vec<Vec<usize>>,
}

impl Extraction {
    /// Chosen input indices, round by round.
    pub fn indices(&self) -> Vec<usize> {
        self.rounds.iter().flatten().copied().collect()
    }

    pub fn family<P: Clone, D: Clone>(&self, input: &BallFamily<P, D>) -> BallFamily<P, D> {
        self.indices().into_iter().map(|i| input[i].clone()).collect()
    }
}

/// Greedy extraction: each round takes, in ascending index order, a maximal
/// unconnected set among balls whose centers no earlier round covers. Stops
/// when every input center is covered.
pub fn extract_cover_subfamily<S: MetricSpace>(
    space: &S,
    family: &BallFamily<S::Point, S::Dist>,
) -> Result<Extraction> {
    let n = family.len();
    let mut covered = vec![false; n];
    let mut rounds = Vec::new();
    loop {
        let mut round: Vec<usize> = Vec::new();
        for i in (0..n).filter(|&i| !covered[i]) {
            let mut ok = true;
            for &j in &round {
                let d = space.distance(&family[i].center, &family[j].center)?;
                if !separated(&d, &family[i].radius, &family[j].radius) {
                    ok = false;
                    break;
                }
            }
            if ok {
                round.push(i);
            }
        }
        if round.is_empty() {
            break;
        }
        for i in 0..n {
            if covered[i] {
                continue;
            }
            for &j in &round {
                if at_most(
                    &space.distance(&family[i].center, &family[j].center)?,
                    &family[j].radius,
                ) {
                    covered[i] = true;
                    break;
                }
            }
        }
        rounds.push(round);
    }
    Ok(Extraction { rounds })
}

/// Exhaustive search within [`TUPLE_BUDGET`], or a seeded random sample of
/// candidate tuples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Exhaustive,
    Sampled { draws: usize, seed: u64 },
}

/// A replayable counterexample to a dimension bound.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate<P, D> {
    /// `d + 2` points and a probe with every pair farther apart than the
    /// probe is from either of them.
    Nagata {
        indices: Vec<usize>,
        points: Vec<P>,
        probe: P,
    },
    /// An unconnected family all of whose balls contain the probe.
    Metric {
        indices: Vec<usize>,
        balls: BallFamily<P, D>,
        probe: P,
        scale: D,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum DimensionWitness<P, D> {
    ConsistentWithDim { tuples_checked: u128 },
    Violation(Certificate<P, D>),
}

impl<P, D> DimensionWitness<P, D> {
    pub fn is_violation(&self) -> bool {
        matches!(self, DimensionWitness::Violation(_))
    }
}

impl<P: Clone, D: Distance> Certificate<P, D> {
    /// Re-checks the certificate against the definition; true iff it still
    /// violates the bound.
    pub fn replay<S: MetricSpace<Point = P, Dist = D>>(&self, space: &S) -> Result<bool> {
        match self {
            Certificate::Nagata { points, probe, .. } => {
                for (i, a) in points.iter().enumerate() {
                    for b in &points[i + 1..] {
                        let dab = space.distance(a, b)?;
                        let da = space.distance(probe, a)?;
                        let db = space.distance(probe, b)?;
                        if !separated(&dab, &da, &db) {
                            return Ok(false);
                        }
                    }
                }
                Ok(true)
            }
            Certificate::Metric {
                balls, probe, scale, ..
            } => {
                let small = balls
                    .iter()
                    .all(|b| strictly_less(&b.radius, scale) && strictly_less(&D::zero(), &b.radius));
                Ok(small && is_unconnected(space, balls)? && multiplicity(space, probe, balls)? == balls.len())
            }
        }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    c
}

fn matrix<S: MetricSpace>(space: &S, rows: &[S::Point], cols: &[S::Point]) -> Result<Vec<Vec<S::Dist>>> {
    rows.iter()
        .map(|a| cols.iter().map(|b| space.distance(a, b)).collect())
        .collect()
}

/// Searches for `d + 2` points of `q` and a probe violating Nagata
/// dimension `d`. The exhaustive order is lexicographic in the point subset,
/// then in the probe, so the first violation is the reported one.
pub fn nagata_dim_witness<S: MetricSpace>(
    space: &S,
    q: &[S::Point],
    probes: &[S::Point],
    d: usize,
    mode: SearchMode,
) -> Result<DimensionWitness<S::Point, S::Dist>> {
    let size = d + 2;
    if q.len() < size || probes.is_empty() {
        return Ok(DimensionWitness::ConsistentWithDim { tuples_checked: 0 });
    }
    let qq = matrix(space, q, q)?;
    let aq = matrix(space, probes, q)?;
    let violates = |subset: &[usize], a: usize| {
        subset
            .iter()
            .tuple_combinations()
            .all(|(&i, &j)| separated(&qq[i][j], &aq[a][i], &aq[a][j]))
    };
    let certificate = |subset: Vec<usize>, a: usize| {
        DimensionWitness::Violation(Certificate::Nagata {
            points: subset.iter().map(|&i| q[i].clone()).collect(),
            indices: subset,
            probe: probes[a].clone(),
        })
    };
    match mode {
        SearchMode::Exhaustive => {
            let needed = binomial(q.len(), size).saturating_mul(probes.len() as u128);
            if needed > TUPLE_BUDGET {
                return Err(Error::BudgetExceeded {
                    needed,
                    cap: TUPLE_BUDGET,
                });
            }
            for subset in (0..q.len()).combinations(size) {
                for a in 0..probes.len() {
                    if violates(&subset, a) {
                        return Ok(certificate(subset, a));
                    }
                }
            }
            Ok(DimensionWitness::ConsistentWithDim { tuples_checked: needed })
        }
        SearchMode::Sampled { draws, seed } => {
            let mut rng = trial_rng(seed, 0);
            for _ in 0..draws {
                let mut subset = sample_indices(&mut rng, q.len(), size).into_vec();
                subset.sort_unstable();
                let a = rng.gen_range(0..probes.len());
                if violates(&subset, a) {
                    return Ok(certificate(subset, a));
                }
            }
            Ok(DimensionWitness::ConsistentWithDim {
                tuples_checked: draws as u128,
            })
        }
    }
}

/// Searches for an unconnected family with centers in `q`, radii from
/// `grid` inside `(0, s)`, and a probe lying in more than `beta` of its balls.
///
/// Shrinking radii keeps a family unconnected, so for each probe and center
/// it suffices to try the smallest grid radius whose ball reaches the probe.
/// The search is then a clique search of size `beta + 1`, exhaustive within
/// [`TUPLE_BUDGET`].
pub fn metric_dim_witness<S: MetricSpace>(
    space: &S,
    q: &[S::Point],
    probes: &[S::Point],
    beta: usize,
    s: &S::Dist,
    grid: &[S::Dist],
    mode: SearchMode,
) -> Result<DimensionWitness<S::Point, S::Dist>> {
    let zero = S::Dist::zero();
    let mut radii: Vec<S::Dist> = grid
        .iter()
        .filter(|r| strictly_less(&zero, r) && strictly_less(*r, s))
        .cloned()
        .collect();
    radii.sort_by(|a, b| a.total_cmp(b));
    let qq = matrix(space, q, q)?;
    let aq = matrix(space, probes, q)?;
    let size = beta + 1;
    let eligible: Vec<Vec<(usize, S::Dist)>> = aq
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter_map(|(c, d)| radii.iter().find(|r| at_most(d, r)).map(|r| (c, r.clone())))
                .collect()
        })
        .collect();
    let compatible = |x: &(usize, S::Dist), y: &(usize, S::Dist)| separated(&qq[x.0][y.0], &x.1, &y.1);
    let certificate = |a: usize, chosen: Vec<(usize, S::Dist)>| {
        DimensionWitness::Violation(Certificate::Metric {
            indices: chosen.iter().map(|c| c.0).collect(),
            balls: chosen
                .into_iter()
                .map(|(c, r)| ClosedBall::new(q[c].clone(), r))
                .collect(),
            probe: probes[a].clone(),
            scale: s.clone(),
        })
    };
    match mode {
        SearchMode::Exhaustive => {
            let needed = eligible
                .iter()
                .map(|e| binomial(e.len(), size))
                .fold(0u128, |acc, c| acc.saturating_add(c));
            if needed > TUPLE_BUDGET {
                return Err(Error::BudgetExceeded {
                    needed,
                    cap: TUPLE_BUDGET,
                });
            }
            for (a, cands) in eligible.iter().enumerate() {
                let mut stack = Vec::with_capacity(size);
                if extend_clique(cands, 0, size, &mut stack, &compatible) {
                    return Ok(certificate(a, stack.into_iter().map(|i| cands[i].clone()).collect()));
                }
            }
            Ok(DimensionWitness::ConsistentWithDim { tuples_checked: needed })
        }
        SearchMode::Sampled { draws, seed } => {
            let mut rng = trial_rng(seed, 0);
            let usable: Vec<usize> = (0..probes.len()).filter(|&a| eligible[a].len() >= size).collect();
            if usable.is_empty() {
                return Ok(DimensionWitness::ConsistentWithDim { tuples_checked: 0 });
            }
            for _ in 0..draws {
                let a = usable[rng.gen_range(0..usable.len())];
                let cands = &eligible[a];
                let mut pick = sample_indices(&mut rng, cands.len(), size).into_vec();
                pick.sort_unstable();
                if pick
                    .iter()
                    .tuple_combinations()
                    .all(|(&i, &j)| compatible(&cands[i], &cands[j]))
                {
                    return Ok(certificate(a, pick.into_iter().map(|i| cands[i].clone()).collect()));
                }
            }
            Ok(DimensionWitness::ConsistentWithDim {
                tuples_checked: draws as u128,
            })
        }
    }
}

fn extend_clique<T>(
    cands: &[T],
    from: usize,
    size: usize,
    stack: &mut Vec<usize>,
    compatible: &impl Fn(&T, &T) -> bool,
) -> bool {
    if stack.len() == size {
        return true;
    }
    for i in from..cands.len() {
        if stack.iter().all(|&j| compatible(&cands[j], &cands[i])) {
            stack.push(i);
            if extend_clique(cands, i + 1, size, stack, compatible) {
                return true;
            }
            stack.pop();
        }
    }
    false
}

/// Sorted distinct positive pairwise distances among `points`.
pub fn realized_distance_grid<S: MetricSpace>(space: &S, points: &[S::Point]) -> Result<Vec<S::Dist>> {
    let mut all = Vec::new();
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let d = space.distance(a, b)?;
            if strictly_less(&S::Dist::zero(), &d) {
                all.push(d);
            }
        }
    }
    all.sort_by(|a, b| a.total_cmp(b));
    all.dedup_by(|a, b| a.ties_with(b));
    Ok(all)
}

/// Midpoints between consecutive realized distances, plus one point beyond
/// the largest.
pub fn midpoint_grid(realized: &[Real]) -> Vec<Real> {
    let mut out: Vec<Real> = realized
        .windows(2)
        .map(|w| Real::new((w[0].value + w[1].value) / 2.0, w[0].tol))
        .collect();
    if let Some(last) = realized.last() {
        let below = if realized.len() > 1 {
            realized[realized.len() - 2].value
        } else {
            0.0
        };
        out.push(Real::new(last.value + (last.value - below).max(f64::EPSILON), last.tol));
    }
    out
}

/// Empirical `r_alpha(x)`: the smallest radius on the grid of sample
/// distances whose open ball holds at least `alpha n` sample points. When only
/// the closed ball at the largest distance qualifies, the grid is extended by
/// one step past it.
pub fn r_alpha_empirical<S: MetricSpace>(
    space: &S,
    sample: &FiniteSample<S::Point>,
    x: &S::Point,
    alpha: f64,
) -> Result<Real> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} outside (0, 1]")));
    }
    if sample.is_empty() {
        return Err(Error::Empty("sample"));
    }
    let mut d: Vec<f64> = sample
        .points()
        .iter()
        .map(|p| space.distance(x, p).map(|v| v.to_f64()))
        .collect::<Result<_>>()?;
    d.sort_by(f64::total_cmp);
    Ok(Real::new(r_alpha_sorted(&d, alpha), 0.0))
}

/// [`r_alpha_empirical`] on pre-sorted distances.
pub fn r_alpha_sorted(sorted: &[f64], alpha: f64) -> f64 {
    let n = sorted.len();
    let m = ((alpha * n as f64) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let dm = sorted[m.min(n) - 1];
    match sorted[m.min(n) - 1..].iter().find(|&&v| v > dm) {
        Some(&r) => r,
        None => {
            let first = sorted[0];
            let distinct = 1 + sorted.windows(2).filter(|w| w[1] > w[0]).count();
            let step = if distinct > 1 {
                (dm - first) / (distinct - 1) as f64
            } else if dm > 0.0 {
                dm
            } else {
                1.0
            };
            dm + step
        }
    }
}

/// Fraction of sorted distances strictly below `r`.
pub fn open_fraction(sorted: &[f64], r: f64) -> f64 {
    sorted.partition_point(|&v| v < r) as f64 / sorted.len() as f64
}
