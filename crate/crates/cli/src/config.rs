//! Run configuration: a flat `key = value` file overlaid by command-line
//! flags. Flags win.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    Index,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionId {
    /// Uniform on [0, 1] with eta(x) = x.
    UniformLinear,
    /// Uniform on [0, 1] with eta = 1/2.
    UniformHalf,
    /// Davies' law at depth `depth`.
    Davies,
}

/// Scalars and lists are both accepted in the file: `n = 250` or
/// `n = [250, 1000]`.
fn one_or_many<'de, D, T>(de: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        One(T),
        Many(Vec<T>),
    }
    Ok(match OneOrMany::deserialize(de)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    })
}

/// Every setting of one run. Unset fields take the experiment's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, deserialize_with = "one_or_many", skip_serializing_if = "Vec::is_empty")]
    pub n: Vec<usize>,
    #[serde(default, deserialize_with = "one_or_many", skip_serializing_if = "Vec::is_empty")]
    pub k: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, deserialize_with = "one_or_many", skip_serializing_if = "Vec::is_empty")]
    pub alpha: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<Policy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DistributionId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        Self::parse(&text).map_err(|msg| CliError::Config {
            path: path.to_path_buf(),
            msg,
        })
    }

    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: RunConfig) -> RunConfig {
        fn pick<T>(base: Option<T>, over: Option<T>) -> Option<T> {
            over.or(base)
        }
        fn pick_vec<T>(base: Vec<T>, over: Vec<T>) -> Vec<T> {
            if over.is_empty() {
                base
            } else {
                over
            }
        }
        RunConfig {
            experiment: pick(self.experiment, over.experiment),
            seed: pick(self.seed, over.seed),
            n: pick_vec(self.n, over.n),
            k: pick_vec(self.k, over.k),
            trials: pick(self.trials, over.trials),
            inner: pick(self.inner, over.inner),
            depth: pick(self.depth, over.depth),
            delta: pick(self.delta, over.delta),
            alpha: pick_vec(self.alpha, over.alpha),
            epsilon: pick(self.epsilon, over.epsilon),
            tolerance: pick(self.tolerance, over.tolerance),
            policy: pick(self.policy, over.policy),
            distribution: pick(self.distribution, over.distribution),
            out: pick(self.out, over.out),
            workers: pick(self.workers, over.workers),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalars_and_lists() {
        let c = RunConfig::parse("experiment = \"stone-bound\"\nk = [1, 3]\nn = 40\npolicy = \"uniform\"\n").unwrap();
        assert_eq!(c.k, vec![1, 3]);
        assert_eq!(c.n, vec![40]);
        assert_eq!(c.policy, Some(Policy::Uniform));
    }

    #[test]
    fn round_trip_is_byte_stable() {
        let c = RunConfig {
            experiment: Some("r-alpha".into()),
            seed: Some(7),
            n: vec![1000],
            alpha: vec![0.01, 0.05],
            distribution: Some(DistributionId::UniformLinear),
            out: Some("out".into()),
            ..Default::default()
        };
        let text = c.to_toml();
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_toml(), text);
    }

    #[test]
    fn flags_win() {
        let file = RunConfig {
            seed: Some(1),
            trials: Some(10),
            k: vec![3],
            ..Default::default()
        };
        let flags = RunConfig {
            seed: Some(2),
            ..Default::default()
        };
        let c = file.overlay(flags);
        assert_eq!((c.seed, c.trials, c.k), (Some(2), Some(10), vec![3]));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::parse("bogus = 1").is_err());
    }
}
