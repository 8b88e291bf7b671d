use rand::Rng;

use crate::dimension::r_alpha_sorted;
use crate::error::{Error, Result};
use crate::knn::TieBreaker;
use crate::metric::{FiniteSample, MetricSpace};
use crate::spaces::{no_tie_groups, random_words, RealLine, WordSpace};
use crate::stats::split_seed;

use super::census::{in_degree_census, t_set_census, Selection};
use super::{aggregate, require_trials, run_trials, ExperimentResult, Rule, Statistic, Value};

fn declared_beta<S: MetricSpace>(space: &S) -> Result<usize> {
    space
        .declared()
        .beta
        .ok_or_else(|| Error::InvalidParameter(format!("{} declares no metric dimension", space.name())))
}

/// Randomized no-tie samples on an ultrametric (`beta = 1`) and on the line
/// (`beta = 2`). Counts trials whose largest in-degree exceeds `(k+1) beta`,
/// and trials where some query needed a tie-break.
pub fn stone_bound_experiment(ks: &[usize], trials: usize, seed: u64) -> Result<ExperimentResult> {
    require_trials(trials)?;
    let mut r = ExperimentResult::new(
        "stone-bound",
        &[
            ("k", ks.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(";")),
            ("trials", trials.to_string()),
            ("seed", seed.to_string()),
        ],
    );
    let line = RealLine::new();
    let (bw, bl) = (declared_beta(&WordSpace)?, declared_beta(&line)?);
    for &k in ks {
        if k == 0 {
            return Err(Error::KOutOfRange { k, available: 0 });
        }
        let rows = run_trials(split_seed(seed, k as u64), trials, |_, rng| {
            let groups = rng.gen_range(2..=6);
            let words = no_tie_groups(k, groups, 3, rng);
            let cw = in_degree_census(&WordSpace, &words, k, Selection::Break(&mut TieBreaker::IndexOrder))?;
            let n = rng.gen_range(k + 2..=k + 40);
            let pts = FiniteSample::new((0..n).map(|_| rng.gen::<f64>()).collect());
            let cl = in_degree_census(&line, &pts, k, Selection::Break(&mut TieBreaker::IndexOrder))?;
            Ok([
                (cw.max() > (k + 1) * bw) as u8 as f64,
                (cw.tied_queries > 0) as u8 as f64,
                cw.max() as f64,
                (cl.max() > (k + 1) * bl) as u8 as f64,
                (cl.tied_queries > 0) as u8 as f64,
                cl.max() as f64,
            ])
        })?;
        let col = |i: usize| aggregate(rows.iter().map(|row| row[i]));
        for (space, beta, off) in [("ultrametric", bw, 0), ("line", bl, 3)] {
            let point = [("space", space.to_string()), ("k", k.to_string())];
            let viol = r.push(Statistic::mean("violations", &point, col(off)));
            let tied = r.push(Statistic::mean("tied_trials", &point, col(off + 1)));
            let max = r.push(Statistic::mean("max_in_degree", &point, col(off + 2)));
            r.check(
                &format!("in-degree at most (k+1)beta on {space} k={k}"),
                &[viol],
                Rule::Zero,
            )?;
            r.check(&format!("no ties on {space} k={k}"), &[tied], Rule::Zero)?;
            r.check(
                &format!("mean max in-degree at most (k+1)beta on {space} k={k}"),
                &[max],
                Rule::AtMost {
                    bound: Value::Float(((k + 1) * beta) as f64),
                    z: 0.0,
                },
            )?;
        }
    }
    Ok(r)
}

/// Randomized T-set censuses on tied samples: a dyadic grid on the line and
/// random binary words. Counts trials with `|T| > beta m / alpha`.
pub fn t_set_experiment(alphas: &[f64], trials: usize, seed: u64) -> Result<ExperimentResult> {
    require_trials(trials)?;
    if alphas.is_empty() {
        return Err(Error::Empty("alphas"));
    }
    let line = RealLine::new();
    let rows = run_trials(seed, trials, |_, rng| {
        let n = rng.gen_range(5..=40);
        let k = rng.gen_range(1..=(n - 1).min(8));
        let density = rng.gen::<f64>();
        let mask: Vec<bool> = (0..n).map(|_| rng.gen::<f64>() < density).collect();
        let grid = FiniteSample::new((0..n).map(|_| rng.gen_range(0..=16) as f64 / 16.0).collect());
        let words = random_words(n, 4, 2, rng);
        let mut out = Vec::with_capacity(alphas.len() * 4);
        for &alpha in alphas {
            let tl = t_set_census(&line, &grid, &mask, alpha, k)?;
            let tw = t_set_census(&WordSpace, &words, &mask, alpha, k)?;
            out.extend([
                (!tl.within_bound()) as u8 as f64,
                tl.len() as f64,
                (!tw.within_bound()) as u8 as f64,
                tw.len() as f64,
            ]);
        }
        Ok(out)
    })?;
    let mut r = ExperimentResult::new(
        "t-set-bound",
        &[
            (
                "alpha",
                alphas.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(";"),
            ),
            ("trials", trials.to_string()),
            ("seed", seed.to_string()),
        ],
    );
    for (j, alpha) in alphas.iter().enumerate() {
        for (space, off) in [("line", 0), ("ultrametric", 2)] {
            let col = |i: usize| aggregate(rows.iter().map(|row| row[4 * j + off + i]));
            let point = [("space", space.to_string()), ("alpha", alpha.to_string())];
            let viol = r.push(Statistic::mean("violations", &point, col(0)));
            r.push(Statistic::mean("t_size", &point, col(1)));
            r.check(
                &format!("|T| at most beta m/alpha on {space} alpha={alpha}"),
                &[viol],
                Rule::Zero,
            )?;
        }
    }
    Ok(r)
}

fn sorted_distances(sample: &[f64], x: f64) -> Vec<f64> {
    let mut d: Vec<f64> = sample.iter().map(|p| (x - p).abs()).collect();
    d.sort_by(f64::total_cmp);
    d
}

/// `r_alpha` on uniform[0,1] against an empirical sample of size `n`:
/// the open-ball mass lies in `[alpha, alpha + 1/n]`, the radius is
/// 1-Lipschitz up to one grid step, and for a fixed `y` the mass of
/// `{x : y in B(x, r_alpha(x))}` is at most `2 alpha`.
pub fn r_alpha_experiment(n: usize, alphas: &[f64], trials: usize, seed: u64) -> Result<ExperimentResult> {
    require_trials(trials)?;
    if n == 0 {
        return Err(Error::Empty("sample"));
    }
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
        return Err(Error::InvalidParameter(format!("alpha {a} outside (0, 1)")));
    }
    let mut r = ExperimentResult::new(
        "r-alpha",
        &[
            ("n", n.to_string()),
            (
                "alpha",
                alphas.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(";"),
            ),
            ("trials", trials.to_string()),
            ("seed", seed.to_string()),
        ],
    );
    for &alpha in alphas {
        let rows = run_trials(split_seed(seed, alpha.to_bits()), trials, |_, rng| {
            let sample: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
            let (x, y) = (rng.gen::<f64>(), rng.gen::<f64>());
            let (dx, dy) = (sorted_distances(&sample, x), sorted_distances(&sample, y));
            let (rx, ry) = (r_alpha_sorted(&dx, alpha), r_alpha_sorted(&dy, alpha));
            let inside = dx.partition_point(|&v| v < rx) as f64;
            let mass_bad = inside < alpha * n as f64 - 1e-9 || inside > alpha * n as f64 + 1.0 + 1e-9;
            let step = |d: &[f64], r: f64| r - d[d.partition_point(|&v| v < r).max(1) - 1];
            let lip_bad = (rx - ry).abs() > (x - y).abs() + step(&dx, rx).max(step(&dy, ry)) + 1e-12;
            let z: f64 = rng.gen();
            let hit = (y - z).abs() < r_alpha_sorted(&sorted_distances(&sample, z), alpha);
            Ok([
                mass_bad as u8 as f64,
                lip_bad as u8 as f64,
                hit as u8 as f64,
                inside / n as f64,
            ])
        })?;
        let col = |i: usize| aggregate(rows.iter().map(|row| row[i]));
        let point = [("alpha", alpha.to_string())];
        let mass = r.push(Statistic::mean("mass_violations", &point, col(0)));
        let lip = r.push(Statistic::mean("lipschitz_violations", &point, col(1)));
        let a = r.push(Statistic::mean("reverse_ball_mass", &point, col(2)));
        r.push(Statistic::mean("ball_mass", &point, col(3)));
        r.check(
            &format!("ball mass in [alpha, alpha + 1/n] alpha={alpha}"),
            &[mass],
            Rule::Zero,
        )?;
        r.check(&format!("r_alpha 1-Lipschitz alpha={alpha}"), &[lip], Rule::Zero)?;
        r.check(
            &format!("reverse ball mass at most 2 alpha alpha={alpha}"),
            &[a],
            Rule::AtMost {
                bound: Value::Float(2.0 * alpha),
                z: 3.0,
            },
        )?;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stone_small_run_passes() {
        let r = stone_bound_experiment(&[1, 3], 50, 4).unwrap();
        assert!(r.passed(), "{:?}", r.checks);
        // groups of k+1 give in-degree exactly k on the ultrametric side
        assert_eq!(r.stat("max_in_degree[space=ultrametric,k=3]").unwrap().value(), 3.0);
    }

    #[test]
    fn t_set_small_run_passes() {
        let r = t_set_experiment(&[0.25], 100, 2).unwrap();
        assert!(r.passed(), "{:?}", r.checks);
    }

    #[test]
    fn r_alpha_small_run_passes() {
        let r = r_alpha_experiment(200, &[0.05], 200, 6).unwrap();
        assert!(r.passed(), "{:?}", r.checks);
    }
}
