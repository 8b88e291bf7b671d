use std::collections::{HashMap, HashSet};

use num_rational::BigRational;
use num_traits::One;
use rand::Rng;

use crate::davies::{
    davies_params, davies_sample_labeled, davies_sample_pair, DaviesParams, DaviesPoint, DaviesSpace, Which,
};
use crate::error::{Error, Result};
use crate::knn::{k_nearest, TieBreaker};
use crate::metric::{Dyadic, Query};
use crate::spaces::{build_powers_of_two, cantor_sample, CantorSchedule, CantorSpace};
use crate::stats::{binomial_upper_tail_exact, harmonic_number, split_seed};

use super::census::{in_degree_census, Selection};
use super::{
    aggregate, ratio, require_k, require_trials, run_trials, ExperimentResult, Rule, StatKind, Statistic, Value,
};

/// Mean in-degree of `x_1` on the powers-of-two space with `k = 1` and
/// uniform tie-breaking, against the exact `H_{n-1}`.
pub fn harmonic_indegree_experiment(n: usize, trials: usize, seed: u64) -> Result<ExperimentResult> {
    require_trials(trials)?;
    let (space, sample) = build_powers_of_two(n)?;
    let counts = run_trials(seed, trials, |_, rng| {
        let mut tie = TieBreaker::uniform(rng.gen());
        Ok(in_degree_census(&space, &sample, 1, Selection::Break(&mut tie))?.counts[0] as f64)
    })?;
    let mut r = ExperimentResult::new(
        "harmonic-indegree",
        &[
            ("n", n.to_string()),
            ("k", "1".into()),
            ("trials", trials.to_string()),
            ("seed", seed.to_string()),
        ],
    );
    let point = [("n", n.to_string())];
    let h = harmonic_number(n as u64 - 1);
    let mean = r.push(Statistic::mean("in_degree_x1", &point, aggregate(counts)));
    r.push(Statistic::exact("harmonic_target", &point, h.clone()));
    r.check(
        "mean in-degree equals H_(n-1)",
        &[mean],
        Rule::WithinSe {
            target: Value::Exact(h),
            z: 3.0,
        },
    )?;
    Ok(r)
}

/// `2/5 p + 3/5 (1 - p)` with `p = P(Bin(k, 3/7) >= ceil(k/2))`.
pub fn davies_oracle_error(k: usize) -> BigRational {
    let p = binomial_upper_tail_exact(k as u64, &ratio(3, 7), k.div_ceil(2) as u64);
    ratio(2, 5) * &p + ratio(3, 5) * (BigRational::one() - p)
}

/// The k-NN rule on Davies' law at each `(n, k)` with uniform ties.
///
/// Reports the mean neighbor label on the event `eps_kNN(X) < 1`, the
/// frequency of that event, and the error against the binomial oracle. With
/// more than one point the errors must increase in the order given.
pub fn davies_inconsistency_experiment(
    depth: usize,
    points: &[(usize, usize)],
    trials: usize,
    tests_per_draw: usize,
    seed: u64,
) -> Result<ExperimentResult> {
    require_trials(trials)?;
    if tests_per_draw == 0 {
        return Err(Error::InvalidParameter("tests per draw must be positive".into()));
    }
    let params = davies_params(depth)?;
    let space = DaviesSpace::new(params.clone());
    let mut r = ExperimentResult::new(
        "davies-inconsistency",
        &[
            ("depth", depth.to_string()),
            (
                "n",
                points.iter().map(|p| p.0.to_string()).collect::<Vec<_>>().join(";"),
            ),
            (
                "k",
                points.iter().map(|p| p.1.to_string()).collect::<Vec<_>>().join(";"),
            ),
            ("trials", trials.to_string()),
            ("tests_per_draw", tests_per_draw.to_string()),
            ("policy", "uniform".into()),
            ("seed", seed.to_string()),
        ],
    );
    let mut errors = Vec::new();
    for &(n, k) in points {
        require_k(k, n)?;
        let rows = run_trials(split_seed(seed, ((n as u64) << 20) ^ k as u64), trials, |_, rng| {
            let sample = davies_sample_labeled(&params, n, rng)?;
            let labels = sample.require_labels()?;
            let mut tie = TieBreaker::uniform(rng.gen());
            let mut wrong = 0usize;
            let mut tie_means = Vec::new();
            for _ in 0..tests_per_draw {
                let (x, y) = davies_sample_pair(&params, rng);
                let ns = k_nearest(&space, &sample, Query::Point(&x), k, &mut tie)?;
                let ones = ns.indices.iter().filter(|&&i| labels[i] == 1).count();
                wrong += (((2 * ones >= k) as u8) != y) as usize;
                if ns.radius < Dyadic::ONE {
                    tie_means.push(ones as f64 / k as f64);
                }
            }
            Ok((wrong as f64 / tests_per_draw as f64, tie_means))
        })?;
        let point = [("n", n.to_string()), ("k", k.to_string())];
        let err = r.push(Statistic::mean("error", &point, aggregate(rows.iter().map(|r| r.0))));
        let label = r.push(Statistic::mean(
            "tie_label_mean",
            &point,
            aggregate(rows.iter().flat_map(|r| r.1.iter().copied())),
        ));
        let in_regime: usize = rows.iter().map(|r| r.1.len()).sum();
        r.push(Statistic::mean(
            "tie_regime_rate",
            &point,
            aggregate(rows.iter().map(|r| r.1.len() as f64 / tests_per_draw as f64)),
        ));
        let oracle = davies_oracle_error(k);
        r.push(Statistic::exact("oracle_error", &point, oracle.clone()));
        if in_regime > 0 {
            r.check(
                &format!("tie label mean near 3/7 at n={n} k={k}"),
                &[label.clone()],
                Rule::WithinAbs {
                    target: Value::Exact(ratio(3, 7)),
                    tol: 0.02,
                },
            )?;
            r.check(
                &format!("tie label mean within 3 se of 3/7 at n={n} k={k}"),
                &[label],
                Rule::WithinSe {
                    target: Value::Exact(ratio(3, 7)),
                    z: 3.0,
                },
            )?;
        }
        r.check(
            &format!("error matches binomial oracle at n={n} k={k}"),
            &[err.clone()],
            Rule::WithinAbs {
                target: Value::Exact(oracle),
                tol: 0.02,
            },
        )?;
        r.check(
            &format!("error exceeds 0.45 at n={n} k={k}"),
            &[err.clone()],
            Rule::Above {
                bound: Value::Exact(ratio(9, 20)),
            },
        )?;
        errors.push(err);
    }
    if errors.len() > 1 {
        r.check("error grows with k", &errors, Rule::Increasing { strict: true })?;
    }
    Ok(r)
}

/// Ball measure as a sum of depth-`t` cylinder masses over every level-`t`
/// element within distance `2^-t` of `x`'s element.
fn ball_by_cylinders(params: &DaviesParams, x: &DaviesPoint, t: usize) -> Result<(BigRational, BigRational)> {
    let p = params.p(t);
    let radius = Dyadic::pow2(-(t as i32));
    let mut counts: HashMap<usize, usize> = HashMap::new();
    let mut coords = x.coords().to_vec();
    for i1 in 1..=p {
        for i2 in 0..=p {
            coords[t - 1] = (i1, i2);
            let y = params.point(coords.clone())?;
            if crate::davies::davies_distance(x, &y)? <= radius {
                *counts.entry(y.central_count(t) % 2).or_default() += 1;
            }
        }
    }
    let (mut a, mut b) = (BigRational::default(), BigRational::default());
    coords[t - 1] = x.coords()[t - 1];
    for (parity, count) in counts {
        let mut c = coords.clone();
        // pick a representative element with the recorded parity
        let flip = x.central_count(t - 1) % 2 != parity;
        c[t - 1] = if flip { (1, 0) } else { (1, 1) };
        let y = params.point(c)?;
        let w = BigRational::from_integer(count.into());
        a += &w * params.cylinder_mass(&y, t, Which::MuA)?;
        b += &w * params.cylinder_mass(&y, t, Which::MuB)?;
    }
    Ok((a, b))
}

/// Exact checks on Davies' measure chain: the first level, both recursion
/// identities at every level, total masses, and `mu_a = mu_b` on closed
/// balls of radius below 1 around `balls` sampled centers, with each ball
/// measured both in closed form and as a sum of cylinders.
pub fn davies_chain_experiment(depth: usize, balls: usize, seed: u64) -> Result<ExperimentResult> {
    let params = davies_params(depth)?;
    let mut r = ExperimentResult::new(
        "davies-chain",
        &[
            ("depth", depth.to_string()),
            ("balls", balls.to_string()),
            ("seed", seed.to_string()),
        ],
    );
    let l1 = params.level(1);
    let p1 = r.push(Statistic::exact("p_1", &[], BigRational::from_integer(l1.p.into())));
    let a1 = r.push(Statistic::exact("alpha_1", &[], l1.alpha.clone()));
    let b1 = r.push(Statistic::exact("beta_1", &[], l1.beta.clone()));
    r.check("p_1 = 3", &[p1], Rule::Equals { target: ratio(3, 1) })?;
    r.check("alpha_1 = 5/72", &[a1], Rule::Equals { target: ratio(5, 72) })?;
    r.check("beta_1 = 1/72", &[b1], Rule::Equals { target: ratio(1, 72) })?;

    let mut broken = Vec::new();
    for n in 1..=depth {
        let (prev, cur) = (params.level(n - 1), params.level(n));
        let p = BigRational::from_integer(cur.p.into());
        let first = &p * &p * &cur.alpha + &p * &cur.beta == prev.alpha;
        let second = &p * &p * &cur.beta + &p * &cur.alpha == prev.beta;
        broken.push((!first) as u8 as f64 + (!second) as u8 as f64);
        r.push(Statistic::exact("p", &[("level", n.to_string())], p));
    }
    let ident = r.push(Statistic::mean("identity_failures", &[], aggregate(broken)));
    r.check("recursion identities hold at every level", &[ident], Rule::Zero)?;

    let mut rng = crate::stats::trial_rng(seed, 0);
    let mut unequal = Vec::new();
    let mut mismatch = Vec::new();
    for _ in 0..balls {
        let (x, _) = davies_sample_pair(&params, &mut rng);
        for t in 1..=depth {
            let radius = Dyadic::pow2(-(t as i32));
            let a = params.ball_measure(&x, radius, Which::MuA)?;
            let b = params.ball_measure(&x, radius, Which::MuB)?;
            let (ca, cb) = ball_by_cylinders(&params, &x, t)?;
            unequal.push((ca != cb) as u8 as f64);
            mismatch.push((ca != a || cb != b) as u8 as f64);
        }
    }
    let ue = r.push(Statistic::mean("unequal_balls", &[], aggregate(unequal)));
    let mm = r.push(Statistic::mean("closed_form_mismatches", &[], aggregate(mismatch)));
    r.check("mu_a equals mu_b on balls of radius below 1", &[ue], Rule::Zero)?;
    r.check("closed form agrees with cylinder sums", &[mm], Rule::Zero)?;

    let (x, _) = davies_sample_pair(&params, &mut rng);
    for (name, which, target) in [
        ("mu_a_total", Which::MuA, ratio(1, 3)),
        ("mu_b_total", Which::MuB, ratio(2, 3)),
        ("mu_total", Which::Mu, BigRational::one()),
    ] {
        let key = r.push(Statistic::exact(
            name,
            &[],
            params.ball_measure(&x, Dyadic::ONE, which)?,
        ));
        r.check(
            &format!("{name} = {}/{}", target.numer(), target.denom()),
            &[key],
            Rule::Equals { target },
        )?;
    }
    Ok(r)
}

/// Frequency over trials of full essential ties for `X_1` at tie level `k`:
/// among `n_{k+1}` draws, at least `n_k - 1` others first differ from `X_1`
/// at coordinate `k + 1`. The two defining sub-events are reported too:
/// all level-`k+1` coordinates distinct, and every letter of `[N_k]` seen at
/// least `n_k` times at level `k`.
pub fn cantor_ties_experiment(
    schedule: &CantorSchedule,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<ExperimentResult> {
    require_trials(trials)?;
    if k == 0 || k > schedule.tie_levels() {
        return Err(Error::InvalidParameter(format!(
            "tie level {k} outside 1..={}",
            schedule.tie_levels()
        )));
    }
    let space = CantorSpace::new(schedule);
    let (lk, next) = (*schedule.level(k), *schedule.level(k + 1));
    let size = next.n as usize;
    let rows = run_trials(seed, trials, |_, rng| {
        let pts: Vec<_> = (0..size).map(|_| cantor_sample(&space, rng)).collect();
        let mut tied = 0u64;
        for p in &pts[1..] {
            if space.first_difference(&pts[0], p)? == Some(k + 1) {
                tied += 1;
            }
        }
        let distinct: HashSet<u64> = pts.iter().map(|p| p.coordinate(k + 1)).collect();
        let mut seen: HashMap<u64, u64> = HashMap::new();
        for p in &pts {
            *seen.entry(p.coordinate(k)).or_default() += 1;
        }
        let covered = seen.len() as u64 == lk.big_n && seen.values().all(|&c| c >= lk.n);
        Ok([
            (tied + 1 >= lk.n) as u8 as f64,
            (distinct.len() == size) as u8 as f64,
            covered as u8 as f64,
        ])
    })?;
    let mut r = ExperimentResult::new(
        "cantor-ties",
        &[
            ("delta", schedule.delta.to_string()),
            ("level", k.to_string()),
            (
                "N",
                schedule
                    .sizes()
                    .iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>()
                    .join(";"),
            ),
            (
                "n",
                schedule
                    .levels()
                    .iter()
                    .map(|l| l.n.to_string())
                    .collect::<Vec<_>>()
                    .join(";"),
            ),
            ("trials", trials.to_string()),
            ("seed", seed.to_string()),
        ],
    );
    let point = [("level", k.to_string())];
    let col = |i: usize| aggregate(rows.iter().map(|row| row[i]));
    let tie = r.push(Statistic::mean("full_tie", &point, col(0)));
    let coll = r.push(Statistic::mean("collision_free", &point, col(1)));
    let cov = r.push(Statistic::mean("coverage", &point, col(2)));
    r.push(Statistic::with(
        "tie_count_needed",
        &point,
        StatKind::Computed((lk.n - 1) as f64),
    ));
    r.check(
        "full tie frequency at least 1 - delta",
        &[tie],
        Rule::AtLeast {
            bound: Value::Float(1.0 - schedule.delta),
            z: 3.0,
        },
    )?;
    r.check(
        "collision-free frequency at least 1 - delta_(k+1)",
        &[coll],
        Rule::AtLeast {
            bound: Value::Float(1.0 - next.delta),
            z: 3.0,
        },
    )?;
    r.check(
        "coverage frequency at least 1 - delta_k",
        &[cov],
        Rule::AtLeast {
            bound: Value::Float(1.0 - lk.delta),
            z: 3.0,
        },
    )?;
    Ok(r)
}
