//! The experiment catalog and the dispatch from a [`RunConfig`] to the
//! library's experiment drivers.

use nkl_core::davies::DaviesDistribution;
use nkl_core::distribution::LabeledDistribution;
use nkl_core::harness::{
    cantor_ties_experiment, consistency_sweep, cover_hart_experiment, davies_chain_experiment,
    davies_inconsistency_experiment, default_k, eta_tilde_experiment, expected_error_experiment,
    harmonic_indegree_experiment, r_alpha_experiment, stone_bound_experiment, strong_concentration_experiment,
    t_set_experiment,
};
use nkl_core::spaces::{build_cantor_schedule, build_interval_distribution, EtaKind};
use nkl_core::{ExperimentResult, TieBreakPolicy};

use crate::config::{DistributionId, Policy, RunConfig};
use crate::error::{CliError, Result};

pub struct Entry {
    pub id: &'static str,
    /// Result the experiment probes, by name.
    pub anchor: &'static str,
    /// Settings the experiment reads besides seed, trials, out and workers.
    pub keys: &'static [&'static str],
}

/// Sorted by id.
pub const CATALOG: &[Entry] = &[
    Entry {
        id: "cantor-ties",
        anchor: "Cantor product space with essential ties (ties with high probability)",
        keys: &["delta", "depth", "k"],
    },
    Entry {
        id: "consistency-sweep",
        anchor: "plug-in inequality: error - L* <= 2 E|eta - eta_n|",
        keys: &["distribution", "n", "k", "policy"],
    },
    Entry {
        id: "cover-hart",
        anchor: "Cover-Hart lemma: eps_kNN(X) -> 0",
        keys: &["distribution", "depth", "n", "k"],
    },
    Entry {
        id: "davies-chain",
        anchor: "Davies measures: recursion identities and the equal-ball lemma",
        keys: &["depth"],
    },
    Entry {
        id: "davies-inconsistency",
        anchor: "Davies counterexample: k-NN inconsistency under uniform ties",
        keys: &["depth", "n", "k", "inner"],
    },
    Entry {
        id: "eta-tilde",
        anchor: "variance term of the k-NN estimate: E(eta_n - eta_tilde_n)^2 <= 1/k",
        keys: &["distribution", "n", "k", "policy"],
    },
    Entry {
        id: "expected-error",
        anchor: "weak consistency: expected error against the Bayes error",
        keys: &["distribution", "depth", "n", "k", "policy", "tolerance"],
    },
    Entry {
        id: "harmonic-indegree",
        anchor: "failure of Stone's lemma: harmonic in-degree under uniform ties",
        keys: &["n"],
    },
    Entry {
        id: "r-alpha",
        anchor: "radius r_alpha: ball mass, 1-Lipschitz and reverse-ball lemmas",
        keys: &["n", "alpha"],
    },
    Entry {
        id: "stone-bound",
        anchor: "generalized Stone lemma: in-degree at most (k+1) beta",
        keys: &["k"],
    },
    Entry {
        id: "strong-concentration",
        anchor: "strong consistency: concentration bound 2 exp(-n eps^2 / 18 beta^2)",
        keys: &["distribution", "n", "k", "epsilon", "policy", "inner"],
    },
    Entry {
        id: "t-set-bound",
        anchor: "T-set lemma: |T| at most beta m / alpha",
        keys: &["alpha"],
    },
];

pub fn find(id: &str) -> Result<&'static Entry> {
    CATALOG
        .iter()
        .find(|e| e.id == id)
        .ok_or_else(|| CliError::UnknownExperiment(id.to_string()))
}

/// Names of the per-experiment settings present in `cfg`.
fn set_keys(cfg: &RunConfig) -> Vec<&'static str> {
    let mut out = Vec::new();
    let mut note = |set: bool, key| {
        if set {
            out.push(key)
        }
    };
    note(!cfg.n.is_empty(), "n");
    note(!cfg.k.is_empty(), "k");
    note(cfg.inner.is_some(), "inner");
    note(cfg.depth.is_some(), "depth");
    note(cfg.delta.is_some(), "delta");
    note(!cfg.alpha.is_empty(), "alpha");
    note(cfg.epsilon.is_some(), "epsilon");
    note(cfg.tolerance.is_some(), "tolerance");
    note(cfg.policy.is_some(), "policy");
    note(cfg.distribution.is_some(), "distribution");
    out
}

fn usage(msg: String) -> CliError {
    CliError::Usage(msg)
}

fn single<T: Copy>(v: &[T], name: &str, default: T) -> Result<T> {
    match v {
        [] => Ok(default),
        [x] => Ok(*x),
        _ => Err(usage(format!("--{name} takes a single value for this experiment"))),
    }
}

fn list<T: Clone>(v: &[T], default: &[T]) -> Vec<T> {
    if v.is_empty() {
        default.to_vec()
    } else {
        v.to_vec()
    }
}

/// One k per n: a single k applies to all, otherwise the lists pair up.
/// Unset k means `ceil(sqrt(n))`.
fn pair_k(ns: &[usize], ks: &[usize]) -> Result<Vec<(usize, usize)>> {
    match ks {
        [] => Ok(ns.iter().map(|&n| (n, default_k(n))).collect()),
        [k] => Ok(ns.iter().map(|&n| (n, *k)).collect()),
        _ if ks.len() == ns.len() => Ok(ns.iter().copied().zip(ks.iter().copied()).collect()),
        _ => Err(usage(format!(
            "--k has {} values for {} values of --n",
            ks.len(),
            ns.len()
        ))),
    }
}

fn require_positive(v: usize, name: &str) -> Result<usize> {
    if v == 0 {
        return Err(usage(format!("--{name} must be at least 1")));
    }
    Ok(v)
}

/// Runs the configured experiment on the current thread pool.
pub fn run(cfg: &RunConfig, seed: u64) -> Result<ExperimentResult> {
    let id = cfg
        .experiment
        .as_deref()
        .ok_or_else(|| usage("no experiment given; pass --experiment or set it in the config file".into()))?;
    let entry = find(id)?;
    if let Some(extra) = set_keys(cfg).into_iter().find(|k| !entry.keys.contains(k)) {
        return Err(usage(format!("experiment {id} does not take --{extra}")));
    }
    let trials = |default: usize| require_positive(cfg.trials.unwrap_or(default), "trials");
    let depth = cfg.depth.unwrap_or(4);
    let policy = match cfg.policy.unwrap_or(Policy::Uniform) {
        Policy::Index => TieBreakPolicy::IndexOrder,
        Policy::Uniform => TieBreakPolicy::UniformRandom { seed },
    };
    Ok(match id {
        "cantor-ties" => {
            let k = single(&cfg.k, "k", 1)?;
            let schedule = build_cantor_schedule(cfg.delta.unwrap_or(0.2), cfg.depth.unwrap_or(k))?;
            cantor_ties_experiment(&schedule, k, trials(2000)?, seed)?
        }
        "davies-chain" => davies_chain_experiment(depth, trials(12)?, seed)?,
        "davies-inconsistency" => {
            let pairs = pair_k(&list(&cfg.n, &[2000]), &list(&cfg.k, &[40]))?;
            let inner = require_positive(cfg.inner.unwrap_or(1), "inner")?;
            davies_inconsistency_experiment(depth, &pairs, trials(10_000)?, inner, seed)?
        }
        "harmonic-indegree" => {
            let mut out: Option<ExperimentResult> = None;
            for n in list(&cfg.n, &[4, 25, 100]) {
                let r = harmonic_indegree_experiment(n, trials(10_000)?, seed)?;
                match &mut out {
                    Some(acc) => acc.merge(r),
                    None => out = Some(r),
                }
            }
            out.expect("at least one n")
        }
        "r-alpha" => {
            let n = single(&cfg.n, "n", 1000)?;
            r_alpha_experiment(n, &list(&cfg.alpha, &[0.01, 0.05, 0.25]), trials(1000)?, seed)?
        }
        "stone-bound" => stone_bound_experiment(&list(&cfg.k, &[1, 3, 5, 10]), trials(10_000)?, seed)?,
        "t-set-bound" => t_set_experiment(&list(&cfg.alpha, &[0.1, 0.25, 0.5]), trials(10_000)?, seed)?,
        _ => match cfg.distribution.unwrap_or(DistributionId::UniformLinear) {
            DistributionId::UniformLinear => {
                learning(id, cfg, &build_interval_distribution(EtaKind::Linear)?, seed, policy)?
            }
            DistributionId::UniformHalf => learning(
                id,
                cfg,
                &build_interval_distribution(EtaKind::Constant(0.5))?,
                seed,
                policy,
            )?,
            DistributionId::Davies => learning(id, cfg, &DaviesDistribution::new(depth)?, seed, policy)?,
        },
    })
}

/// Experiments generic over the sampling law.
fn learning<D: LabeledDistribution>(
    id: &str,
    cfg: &RunConfig,
    dist: &D,
    seed: u64,
    policy: TieBreakPolicy,
) -> Result<ExperimentResult> {
    let trials = |default: usize| require_positive(cfg.trials.unwrap_or(default), "trials");
    Ok(match id {
        "consistency-sweep" | "cover-hart" => {
            let pairs = pair_k(&list(&cfg.n, &[250, 1000, 4000]), &cfg.k)?;
            let k_of = |n: usize| pairs.iter().find(|p| p.0 == n).map_or(default_k(n), |p| p.1);
            let ns: Vec<usize> = pairs.iter().map(|p| p.0).collect();
            if id == "cover-hart" {
                cover_hart_experiment(dist, &ns, k_of, trials(1000)?, seed)?
            } else {
                consistency_sweep(dist, &ns, k_of, trials(4000)?, policy, seed)?
            }
        }
        "eta-tilde" => {
            let n = single(&cfg.n, "n", 1000)?;
            eta_tilde_experiment(dist, n, &list(&cfg.k, &[10, 25, 100]), trials(4000)?, policy, seed)?
        }
        "expected-error" => {
            let n = single(&cfg.n, "n", 4000)?;
            let k = single(&cfg.k, "k", default_k(n))?;
            expected_error_experiment(dist, n, k, trials(4000)?, policy, seed, cfg.tolerance)?
        }
        "strong-concentration" => {
            let n = single(&cfg.n, "n", 4000)?;
            let k = single(&cfg.k, "k", default_k(n))?;
            let eps = cfg.epsilon.unwrap_or(0.15);
            let inner = cfg.inner.unwrap_or_else(|| (3.0 / eps).powi(2).ceil() as usize);
            strong_concentration_experiment(dist, n, k, eps, trials(200)?, inner, policy, seed)?
        }
        other => unreachable!("experiment {other} has no driver"),
    })
}
