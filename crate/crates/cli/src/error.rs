use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown experiment `{0}`; run `nkl list-experiments` for the catalog")]
    UnknownExperiment(String),
    #[error("{0}")]
    Usage(String),
    #[error("config file {path}: {msg}")]
    Config { path: PathBuf, msg: String },
    #[error("{0}")]
    Core(#[from] nkl_core::Error),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

pub type Result<T> = std::result::Result<T, CliError>;
