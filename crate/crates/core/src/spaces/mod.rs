//! Generators for the constructed metric spaces and sampling laws.

mod cantor;
mod discrete;
mod interval;
mod real_line;
mod words;

pub use cantor::{
    build_cantor_schedule, build_cantor_schedule_from, cantor_sample, collision_free_size, coverage_threshold,
    CantorLevel, CantorSchedule, CantorSpace, LazyProductPoint, SIZE_CAP,
};
pub use discrete::{
    build_harmonic, build_modified_reals, build_powers_of_two, build_zero_one, Harmonic, ModifiedReals, PowersOfTwo,
    ZeroOne,
};
pub use interval::{build_interval_distribution, EtaKind, IntervalDistribution, PointMass};
pub use real_line::RealLine;
pub use words::{no_tie_groups, random_words, Word, WordSpace};
