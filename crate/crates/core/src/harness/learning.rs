use crate::distribution::{LabeledDistribution, PointOf};
use crate::error::{Error, Result};
use crate::knn::{eta_pair, k_nearest, predict, TieBreakPolicy, TieBreaker};
use crate::metric::{Distance, MetricSpace, Query};
use crate::stats::{quantile, split_seed};

use super::{
    aggregate, ratio, require_k, require_trials, run_trials, ExperimentResult, Rule, StatKind, Statistic, Value,
};

/// How many labeled test points score each training draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestMode {
    /// One fresh test point per draw.
    Fresh,
    /// `m` test points per draw, averaged.
    Inner(usize),
}

impl TestMode {
    fn size(self) -> usize {
        match self {
            TestMode::Fresh => 1,
            TestMode::Inner(m) => m,
        }
    }
}

/// `ceil(sqrt(n))`
pub fn default_k(n: usize) -> usize {
    let mut k = (n as f64).sqrt().ceil() as usize;
    while k > 1 && (k - 1) * (k - 1) >= n {
        k -= 1;
    }
    while k * k < n {
        k += 1;
    }
    k.max(1)
}

pub(crate) fn tie_breaker(policy: TieBreakPolicy, trial: u64) -> TieBreaker {
    match policy {
        TieBreakPolicy::IndexOrder => TieBreaker::IndexOrder,
        TieBreakPolicy::UniformRandom { seed } => TieBreaker::uniform(split_seed(seed, trial)),
    }
}

pub(crate) fn policy_label(policy: TieBreakPolicy) -> String {
    match policy {
        TieBreakPolicy::IndexOrder => "index".into(),
        TieBreakPolicy::UniformRandom { .. } => "uniform".into(),
    }
}

/// Per-draw misclassification frequency of the k-NN rule on `n` points.
/// The mean of the returned values estimates the expected error.
pub fn estimate_expected_error<D: LabeledDistribution>(
    dist: &D,
    n: usize,
    k: usize,
    trials: usize,
    policy: TieBreakPolicy,
    seed: u64,
    mode: TestMode,
) -> Result<crate::stats::Accumulator> {
    require_trials(trials)?;
    require_k(k, n)?;
    if mode.size() == 0 {
        return Err(Error::InvalidParameter("inner test size must be positive".into()));
    }
    let per_draw = run_trials(seed, trials, |t, rng| {
        let sample = dist.sample(n, rng);
        let mut tie = tie_breaker(policy, t);
        let mut wrong = 0usize;
        for _ in 0..mode.size() {
            let (x, y) = dist.sample_labeled(rng);
            wrong += (predict(dist.space(), &sample, &x, k, &mut tie)? != y) as usize;
        }
        Ok(wrong as f64 / mode.size() as f64)
    })?;
    Ok(aggregate(per_draw))
}

/// Expected error at one `(n, k)`, checked against the Bayes error when the
/// law knows it: never below it, and within `tol` of it if `tol` is given.
pub fn expected_error_experiment<D: LabeledDistribution>(
    dist: &D,
    n: usize,
    k: usize,
    trials: usize,
    policy: TieBreakPolicy,
    seed: u64,
    tol: Option<f64>,
) -> Result<ExperimentResult> {
    let acc = estimate_expected_error(dist, n, k, trials, policy, seed, TestMode::Fresh)?;
    let mut r = ExperimentResult::new(
        "expected-error",
        &[
            ("distribution", dist.name()),
            ("n", n.to_string()),
            ("k", k.to_string()),
            ("trials", trials.to_string()),
            ("policy", policy_label(policy)),
            ("seed", seed.to_string()),
        ],
    );
    let point = [("n", n.to_string()), ("k", k.to_string())];
    let err = r.push(Statistic::mean("error", &point, acc));
    if let Some(b) = dist.bayes_error() {
        r.push(Statistic::with("bayes_error", &[], StatKind::Computed(b)));
        r.check(
            "not below Bayes error",
            &[err.clone()],
            Rule::AtLeast {
                bound: Value::Float(b),
                z: 3.0,
            },
        )?;
        if let Some(tol) = tol {
            r.check(
                "near Bayes error",
                &[err],
                Rule::WithinAbs {
                    target: Value::Float(b),
                    tol,
                },
            )?;
        }
    }
    Ok(r)
}

/// Error, `E|eta - eta_n|` and the plug-in margin along a schedule of sample
/// sizes. Each row checks
/// `error - L* <= 2 E|eta(X) - eta_n(X)| + 3 se` on paired per-draw values.
pub fn consistency_sweep<D: LabeledDistribution>(
    dist: &D,
    ns: &[usize],
    k_of: impl Fn(usize) -> usize,
    trials: usize,
    policy: TieBreakPolicy,
    seed: u64,
) -> Result<ExperimentResult> {
    require_trials(trials)?;
    let mut r = ExperimentResult::new(
        "consistency-sweep",
        &[
            ("distribution", dist.name()),
            ("n", join(ns)),
            ("trials", trials.to_string()),
            ("policy", policy_label(policy)),
            ("seed", seed.to_string()),
        ],
    );
    for &n in ns {
        let k = k_of(n);
        require_k(k, n)?;
        let rows = run_trials(split_seed(seed, n as u64), trials, |t, rng| {
            let sample = dist.sample(n, rng);
            let mut tie = tie_breaker(policy, t);
            let (x, y) = dist.sample_labeled(rng);
            let eta = |p: &PointOf<D>| dist.eta(p).ok_or(Error::NoRegressionFunction);
            let ex = eta(&x)?;
            let (en, _) = eta_pair(dist.space(), &sample, &x, k, &mut tie, |p| {
                dist.eta(p).unwrap_or(f64::NAN)
            })?;
            let wrong = ((2.0 * en >= 1.0) as u8 != y) as u8 as f64;
            let bayes = ex.min(1.0 - ex);
            let gap = (ex - en).abs();
            Ok([wrong, bayes, gap, wrong - bayes - 2.0 * gap])
        })?;
        let point = [("n", n.to_string()), ("k", k.to_string())];
        let col = |i: usize| aggregate(rows.iter().map(|row| row[i]));
        r.push(Statistic::mean("error", &point, col(0)));
        r.push(Statistic::mean("bayes_error", &point, col(1)));
        r.push(Statistic::mean("abs_eta_gap", &point, col(2)));
        let margin = r.push(Statistic::mean("plug_in_margin", &point, col(3)));
        r.check(
            &format!("plug-in inequality n={n}"),
            &[margin],
            Rule::AtMost {
                bound: Value::Float(0.0),
                z: 3.0,
            },
        )?;
    }
    Ok(r)
}

/// Median and 0.9-quantile of `eps_kNN(X)` at a fresh point, along `ns`.
/// The median must decrease strictly and the upper quantile must not grow.
pub fn cover_hart_experiment<D: LabeledDistribution>(
    dist: &D,
    ns: &[usize],
    k_of: impl Fn(usize) -> usize,
    trials: usize,
    seed: u64,
) -> Result<ExperimentResult> {
    require_trials(trials)?;
    let mut r = ExperimentResult::new(
        "cover-hart",
        &[
            ("distribution", dist.name()),
            ("n", join(ns)),
            ("trials", trials.to_string()),
            ("seed", seed.to_string()),
        ],
    );
    let (mut medians, mut uppers) = (Vec::new(), Vec::new());
    for &n in ns {
        let k = k_of(n);
        require_k(k, n)?;
        let mut radii = run_trials(split_seed(seed, n as u64), trials, |_, rng| {
            let points: Vec<_> = (0..n).map(|_| dist.sample_point(rng)).collect();
            let sample = crate::metric::FiniteSample::new(points);
            let x = dist.sample_point(rng);
            Ok(crate::metric::eps_knn_radius(dist.space(), &sample, Query::Point(&x), k)?.to_f64())
        })?;
        let point = [("n", n.to_string()), ("k", k.to_string())];
        r.push(Statistic::mean("mean_radius", &point, aggregate(radii.iter().copied())));
        radii.sort_by(f64::total_cmp);
        let count = radii.len() as u64;
        medians.push(r.push(Statistic::with(
            "median_radius",
            &point,
            StatKind::Quantile {
                q: 0.5,
                value: quantile(&radii, 0.5),
                count,
            },
        )));
        uppers.push(r.push(Statistic::with(
            "q90_radius",
            &point,
            StatKind::Quantile {
                q: 0.9,
                value: quantile(&radii, 0.9),
                count,
            },
        )));
    }
    if ns.len() > 1 {
        r.check("median decreases", &medians, Rule::Decreasing { strict: true })?;
        r.check(
            "upper quantile does not grow",
            &uppers,
            Rule::Decreasing { strict: false },
        )?;
    }
    Ok(r)
}

/// `E[(eta_n(X) - eta_tilde_n(X))^2]` for each k, checked against `1/k`.
pub fn eta_tilde_experiment<D: LabeledDistribution>(
    dist: &D,
    n: usize,
    ks: &[usize],
    trials: usize,
    policy: TieBreakPolicy,
    seed: u64,
) -> Result<ExperimentResult> {
    require_trials(trials)?;
    let mut r = ExperimentResult::new(
        "eta-tilde",
        &[
            ("distribution", dist.name()),
            ("n", n.to_string()),
            ("k", join(ks)),
            ("trials", trials.to_string()),
            ("policy", policy_label(policy)),
            ("seed", seed.to_string()),
        ],
    );
    for &k in ks {
        require_k(k, n)?;
        let sq = run_trials(split_seed(seed, k as u64), trials, |t, rng| {
            let sample = dist.sample(n, rng);
            let mut tie = tie_breaker(policy, t);
            let x = dist.sample_point(rng);
            if dist.eta(&x).is_none() {
                return Err(Error::NoRegressionFunction);
            }
            let (en, et) = eta_pair(dist.space(), &sample, &x, k, &mut tie, |p| {
                dist.eta(p).unwrap_or(f64::NAN)
            })?;
            Ok((en - et) * (en - et))
        })?;
        let key = r.push(Statistic::mean("sq_gap", &[("k", k.to_string())], aggregate(sq)));
        r.check(
            &format!("within 1/k at k={k}"),
            &[key],
            Rule::AtMost {
                bound: Value::Exact(ratio(1, k as i64)),
                z: 3.0,
            },
        )?;
    }
    Ok(r)
}

/// Smallest `n` with `2 exp(-n eps^2 / (18 beta^2)) < 1`.
pub fn non_vacuity_threshold(beta: usize, epsilon: f64) -> u64 {
    let c = 18.0 * (beta * beta) as f64 * std::f64::consts::LN_2 / (epsilon * epsilon);
    let n = c.floor() as u64 + 1;
    n.max(1)
}

/// Frequency of `{L(g_n) - L* > eps}` over outer draws, where `L(g_n)` is
/// measured on `inner` fresh points by the conditional loss
/// `eta(X)` or `1 - eta(X)`. Compared with `2 exp(-n eps^2 / (18 beta^2))`;
/// a bound of 1 or more is reported as vacuous.
#[allow(clippy::too_many_arguments)]
pub fn strong_concentration_experiment<D: LabeledDistribution>(
    dist: &D,
    n: usize,
    k: usize,
    epsilon: f64,
    outer: usize,
    inner: usize,
    policy: TieBreakPolicy,
    seed: u64,
) -> Result<ExperimentResult> {
    require_trials(outer)?;
    require_k(k, n)?;
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} must be positive")));
    }
    let needed = (3.0 / epsilon).powi(2).ceil() as usize;
    if inner < needed {
        return Err(Error::InvalidParameter(format!(
            "inner test set of {inner} points is below (3/epsilon)^2 = {needed}"
        )));
    }
    let beta = dist
        .space()
        .declared()
        .beta
        .ok_or_else(|| Error::InvalidParameter(format!("{} declares no metric dimension", dist.name())))?;
    let bayes = dist.bayes_error().ok_or(Error::NoRegressionFunction)?;
    let bound = 2.0 * (-(n as f64) * epsilon * epsilon / (18.0 * (beta * beta) as f64)).exp();
    let rows = run_trials(seed, outer, |t, rng| {
        let sample = dist.sample(n, rng);
        let mut tie = tie_breaker(policy, t);
        let mut loss = 0.0;
        let mut ties = 0usize;
        for _ in 0..inner {
            let x = dist.sample_point(rng);
            let eta = dist.eta(&x).ok_or(Error::NoRegressionFunction)?;
            let ns = k_nearest(dist.space(), &sample, Query::Point(&x), k, &mut tie)?;
            ties += ns.has_tie() as usize;
            let labels = sample.require_labels()?;
            let ones = ns.indices.iter().filter(|&&i| labels[i] == 1).count();
            loss += if 2 * ones >= k { 1.0 - eta } else { eta };
        }
        let loss = loss / inner as f64;
        Ok([loss, (loss - bayes > epsilon) as u8 as f64, ties as f64])
    })?;
    let mut r = ExperimentResult::new(
        "strong-concentration",
        &[
            ("distribution", dist.name()),
            ("n", n.to_string()),
            ("k", k.to_string()),
            ("epsilon", epsilon.to_string()),
            ("trials", outer.to_string()),
            ("inner", inner.to_string()),
            ("beta", beta.to_string()),
            ("seed", seed.to_string()),
        ],
    );
    let point = [("n", n.to_string()), ("epsilon", epsilon.to_string())];
    let col = |i: usize| aggregate(rows.iter().map(|row| row[i]));
    r.push(Statistic::mean("loss", &point, col(0)));
    let exceed = r.push(Statistic::mean("exceedance", &point, col(1)));
    let tied = r.push(Statistic::mean("tied_queries", &point, col(2)));
    r.push(Statistic::with("bound", &point, StatKind::Computed(bound)));
    r.push(Statistic::exact(
        "non_vacuous_from_n",
        &[("epsilon", epsilon.to_string())],
        num_rational::BigRational::from_integer(non_vacuity_threshold(beta, epsilon).into()),
    ));
    r.add_check(
        &format!("exceedance within bound n={n} epsilon={epsilon}"),
        &[exceed],
        Rule::AtMost {
            bound: Value::Float(bound),
            z: 3.0,
        },
        bound >= 1.0,
    )?;
    r.check("no distance ties", &[tied], Rule::Zero)?;
    Ok(r)
}

fn join(xs: &[usize]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}
