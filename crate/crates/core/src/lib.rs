//! k-nearest-neighbor learning on general metric spaces.
//!
//! Distances come in an exact form ([`Dyadic`], [`Rational`]) for the
//! constructed counterexample spaces, where ties are detected by equality,
//! and an inexact form ([`Real`]) for Euclidean test spaces.

pub mod davies;
pub mod dimension;
pub mod distribution;
pub mod error;
pub mod harness;
pub mod knn;
pub mod metric;
pub mod spaces;
pub mod stats;

pub use distribution::LabeledDistribution;
pub use error::{Error, Result};
pub use harness::{Check, ExperimentResult, Rule, StatKind, Statistic, Status, Value};
pub use knn::{k_nearest, NeighborSet, TieBreakPolicy, TieBreaker};
pub use metric::{
    ball_members, distance, eps_knn_radius, BallFamily, BallKind, ClosedBall, DeclaredDimension, Distance,
    DistanceValue, Dyadic, Exactness, FiniteSample, MetricSpace, Query, Rational, Real,
};
pub use stats::{Accumulator, Estimate};
