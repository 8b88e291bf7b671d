//! Seeded Monte Carlo experiments and the censuses they are built from.
//!
//! Every experiment returns an [`ExperimentResult`] holding raw aggregates
//! (count, sum, sum of squares) and the checks evaluated on them, so a stored
//! result can be re-judged without rerunning anything.

mod bounds;
mod census;
mod counterexamples;
mod learning;

use std::fmt;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::stats::{trial_rng, Accumulator};

pub use bounds::{r_alpha_experiment, stone_bound_experiment, t_set_experiment};
pub use census::{adjoined_in_degree, in_degree_census, t_set_census, InDegreeCensus, Selection, TSet};
pub use counterexamples::{
    cantor_ties_experiment, davies_chain_experiment, davies_inconsistency_experiment, davies_oracle_error,
    harmonic_indegree_experiment,
};
pub use learning::{
    consistency_sweep, cover_hart_experiment, default_k, estimate_expected_error, eta_tilde_experiment,
    expected_error_experiment, non_vacuity_threshold, strong_concentration_experiment, TestMode,
};

/// A number as reported: exact rationals print as `p/q`.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(BigRational),
    Float(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Value::Float(x) => *x,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Value::Float(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StatKind {
    /// Per-trial values summed; mean and standard error derive from it.
    Mean(Accumulator),
    /// Nearest-rank quantile of `count` observations.
    Quantile { q: f64, value: f64, count: u64 },
    /// A quantity computed exactly rather than estimated.
    Exact(BigRational),
    /// A quantity computed in floating point, such as a bound.
    Computed(f64),
}

/// One reported quantity at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct Statistic {
    pub name: String,
    /// `(parameter, value)` pairs locating the row in a sweep.
    pub point: Vec<(String, String)>,
    pub kind: StatKind,
}

impl Statistic {
    pub fn mean(name: &str, point: &[(&str, String)], acc: Accumulator) -> Self {
        Self::with(name, point, StatKind::Mean(acc))
    }

    pub fn exact(name: &str, point: &[(&str, String)], value: BigRational) -> Self {
        Self::with(name, point, StatKind::Exact(value))
    }

    pub fn with(name: &str, point: &[(&str, String)], kind: StatKind) -> Self {
        Statistic {
            name: name.to_string(),
            point: point.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            kind,
        }
    }

    /// `name` or `name[a=1,b=2]`; unique within a result.
    pub fn key(&self) -> String {
        if self.point.is_empty() {
            self.name.clone()
        } else {
            format!("{}[{}]", self.name, self.point_label())
        }
    }

    pub fn point_label(&self) -> String {
        self.point
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn value(&self) -> f64 {
        match &self.kind {
            StatKind::Mean(a) => a.mean(),
            StatKind::Quantile { value, .. } => *value,
            StatKind::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            StatKind::Computed(x) => *x,
        }
    }

    pub fn std_error(&self) -> f64 {
        match &self.kind {
            StatKind::Mean(a) => a.std_error(),
            _ => 0.0,
        }
    }

    pub fn count(&self) -> u64 {
        match &self.kind {
            StatKind::Mean(a) => a.count,
            StatKind::Quantile { count, .. } => *count,
            StatKind::Exact(_) | StatKind::Computed(_) => 1,
        }
    }
}

/// A pass/fail rule over one or more statistics.
#[derive(Debug, Clone, PartialEq)]
pub enum Rule {
    /// `|mean - target| <= z * se`
    WithinSe { target: Value, z: f64 },
    /// `|mean - target| <= tol`
    WithinAbs { target: Value, tol: f64 },
    /// `mean <= bound + z * se`
    AtMost { bound: Value, z: f64 },
    /// `mean >= bound - z * se`
    AtLeast { bound: Value, z: f64 },
    /// `mean > bound`
    Above { bound: Value },
    /// Nothing observed: the sum is zero.
    Zero,
    /// Exact value equals the target.
    Equals { target: BigRational },
    /// Values strictly (or weakly) decrease in the listed order.
    Decreasing { strict: bool },
    /// Values strictly (or weakly) increase in the listed order.
    Increasing { strict: bool },
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::WithinSe { target, z } => write!(f, "within {z} se of {target}"),
            Rule::WithinAbs { target, tol } => write!(f, "within {tol} of {target}"),
            Rule::AtMost { bound, z } => write!(f, "at most {bound} + {z} se"),
            Rule::AtLeast { bound, z } => write!(f, "at least {bound} - {z} se"),
            Rule::Above { bound } => write!(f, "above {bound}"),
            Rule::Zero => f.write_str("zero"),
            Rule::Equals { target } => write!(f, "equals {}/{}", target.numer(), target.denom()),
            Rule::Decreasing { strict: true } => f.write_str("strictly decreasing"),
            Rule::Decreasing { strict: false } => f.write_str("non-increasing"),
            Rule::Increasing { strict: true } => f.write_str("strictly increasing"),
            Rule::Increasing { strict: false } => f.write_str("non-decreasing"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// The bound is trivially true; reported, never counted as a pass.
    Vacuous,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Vacuous => "vacuous",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    /// Keys of the statistics the rule reads.
    pub stats: Vec<String>,
    pub rule: Rule,
    pub vacuous: bool,
    pub status: Status,
}

impl Check {
    pub fn holds(&self) -> bool {
        self.status == Status::Pass
    }

    /// Evaluates the rule against `stats`.
    pub fn evaluate(&self, stats: &[Statistic]) -> Result<bool> {
        let found: Vec<&Statistic> = self
            .stats
            .iter()
            .map(|key| {
                stats
                    .iter()
                    .find(|s| &s.key() == key)
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown statistic {key}")))
            })
            .collect::<Result<_>>()?;
        let s = found
            .first()
            .ok_or_else(|| Error::InvalidParameter(format!("check {} reads no statistic", self.name)))?;
        let (m, se) = (s.value(), s.std_error());
        Ok(match &self.rule {
            Rule::WithinSe { target, z } => (m - target.to_f64()).abs() <= z * se,
            Rule::WithinAbs { target, tol } => (m - target.to_f64()).abs() <= *tol,
            Rule::AtMost { bound, z } => m <= bound.to_f64() + z * se,
            Rule::AtLeast { bound, z } => m >= bound.to_f64() - z * se,
            Rule::Above { bound } => m > bound.to_f64(),
            Rule::Zero => match &s.kind {
                StatKind::Mean(a) => a.sum == 0.0,
                _ => m == 0.0,
            },
            Rule::Equals { target } => matches!(&s.kind, StatKind::Exact(r) if r == target),
            Rule::Decreasing { strict } => found.windows(2).all(|w| {
                let (a, b) = (w[0].value(), w[1].value());
                if *strict {
                    b < a
                } else {
                    b <= a
                }
            }),
            Rule::Increasing { strict } => found.windows(2).all(|w| {
                let (a, b) = (w[0].value(), w[1].value());
                if *strict {
                    b > a
                } else {
                    b >= a
                }
            }),
        })
    }
}

/// Output of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub experiment: String,
    pub params: Vec<(String, String)>,
    pub statistics: Vec<Statistic>,
    pub checks: Vec<Check>,
}

impl ExperimentResult {
    pub fn new(experiment: &str, params: &[(&str, String)]) -> Self {
        ExperimentResult {
            experiment: experiment.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            statistics: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, stat: Statistic) -> String {
        let key = stat.key();
        self.statistics.push(stat);
        key
    }

    pub fn stat(&self, key: &str) -> Option<&Statistic> {
        self.statistics.iter().find(|s| s.key() == key)
    }

    pub fn check(&mut self, name: &str, stats: &[String], rule: Rule) -> Result<()> {
        self.add_check(name, stats, rule, false)
    }

    /// Adds a check whose bound carries no information. Its outcome is
    /// recorded but it never passes.
    pub fn add_check(&mut self, name: &str, stats: &[String], rule: Rule, vacuous: bool) -> Result<()> {
        let mut c = Check {
            name: name.to_string(),
            stats: stats.to_vec(),
            rule,
            vacuous,
            status: Status::Fail,
        };
        let ok = c.evaluate(&self.statistics)?;
        c.status = match (vacuous, ok) {
            (true, _) => Status::Vacuous,
            (false, true) => Status::Pass,
            (false, false) => Status::Fail,
        };
        self.checks.push(c);
        Ok(())
    }

    pub fn find_check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Non-vacuous checks, all of which passed, and at least one of them.
    pub fn passed(&self) -> bool {
        let counted: Vec<_> = self.checks.iter().filter(|c| !c.vacuous).collect();
        !counted.is_empty() && counted.iter().all(|c| c.holds())
    }

    /// Re-evaluates every check from the stored aggregates and reports
    /// whether each stored status is reproduced.
    pub fn recheck(&self) -> Result<bool> {
        for c in &self.checks {
            let ok = c.evaluate(&self.statistics)?;
            let expect = match (c.vacuous, ok) {
                (true, _) => Status::Vacuous,
                (false, true) => Status::Pass,
                (false, false) => Status::Fail,
            };
            if expect != c.status {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn merge(&mut self, other: ExperimentResult) {
        self.statistics.extend(other.statistics);
        self.checks.extend(other.checks);
    }
}

/// Runs `f` for trial indices `0..trials`, each with its own stream from
/// `master`, on the current rayon pool. Results come back in trial order.
pub fn run_trials<T, F>(master: u64, trials: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut ChaCha8Rng) -> Result<T> + Sync + Send,
{
    (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(master, i);
            f(i, &mut rng)
        })
        .collect()
}

/// Sequential sum of per-trial values, independent of scheduling.
pub fn aggregate<I: IntoIterator<Item = f64>>(values: I) -> Accumulator {
    Accumulator::from_values(values)
}

pub(crate) fn require_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    Ok(())
}

pub(crate) fn require_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, available: n });
    }
    Ok(())
}

pub(crate) fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}
