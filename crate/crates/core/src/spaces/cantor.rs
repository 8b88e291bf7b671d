//! The product space `prod [N_k]` under the first-difference ultrametric,
//! with size schedules chosen so that k-NN ties occur with high probability.

use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metric::{DeclaredDimension, Dyadic, Exactness, MetricSpace};
use crate::stats::ln_binomial_lower_tail;

/// Upper limit on every `N_k` and `n_k`.
pub const SIZE_CAP: u64 = 1_000_000_000;

/// Largest `n` for which the collision product is evaluated in big integers.
const EXACT_PRODUCT_LIMIT: u64 = 4096;

/// One level: coordinate alphabet `[N_k]`, sample size `n_k`, budget `delta_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CantorLevel {
    pub big_n: u64,
    pub n: u64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CantorSchedule {
    pub delta: f64,
    levels: Vec<CantorLevel>,
}

impl CantorSchedule {
    /// Levels `1..=K+1`; coordinate `K+1` exists so that ties at level `K`
    /// can be resolved.
    pub fn levels(&self) -> &[CantorLevel] {
        &self.levels
    }

    pub fn level(&self, k: usize) -> &CantorLevel {
        &self.levels[k - 1]
    }

    /// Number of coordinates carried by each point.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Levels at which the tie experiment can run.
    pub fn tie_levels(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn sizes(&self) -> Vec<u64> {
        self.levels.iter().map(|l| l.big_n).collect()
    }

    /// Builds a schedule from explicit levels and checks every invariant.
    pub fn from_levels(delta: f64, levels: Vec<CantorLevel>) -> Result<Self> {
        let s = Self::from_levels_unchecked(delta, levels)?;
        let budget: f64 = s.levels.iter().map(|l| 2.0 * l.delta).sum();
        if budget >= delta {
            return Err(Error::InvalidParameter(format!(
                "sum of 2 delta_k = {budget} is not below delta = {delta}"
            )));
        }
        for w in s.levels.windows(2) {
            if w[1].big_n <= w[0].big_n || w[1].n <= w[0].n {
                return Err(Error::InvalidParameter("N_k and n_k must increase strictly".into()));
            }
        }
        for (i, l) in s.levels.iter().enumerate() {
            if !collision_ok(l.n, l.big_n, l.delta) {
                return Err(Error::InvalidParameter(format!(
                    "level {} fails the collision threshold",
                    i + 1
                )));
            }
            if let Some(next) = s.levels.get(i + 1) {
                if !coverage_ok(l.big_n, l.n, next.n, l.delta) {
                    return Err(Error::InvalidParameter(format!(
                        "level {} fails the coverage threshold",
                        i + 1
                    )));
                }
            }
        }
        Ok(s)
    }

    /// Builds a schedule checking only shape, for degenerate test cases.
    pub fn from_levels_unchecked(delta: f64, levels: Vec<CantorLevel>) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::InvalidParameter("a schedule needs at least two levels".into()));
        }
        if levels
            .iter()
            .any(|l| l.big_n == 0 || l.n == 0 || l.big_n > SIZE_CAP || l.n > SIZE_CAP)
        {
            return Err(Error::InvalidParameter("level sizes must lie in 1..=1e9".into()));
        }
        Ok(CantorSchedule { delta, levels })
    }
}

fn exact_fraction(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

/// Whether `prod_{i<n} (1 - i/N) >= 1 - delta`.
fn collision_ok(n: u64, big_n: u64, delta: f64) -> bool {
    if n > big_n {
        return false;
    }
    if n <= EXACT_PRODUCT_LIMIT {
        let d = exact_fraction(delta);
        let (a, b) = (d.numer().clone(), d.denom().clone());
        let mut prod = BigInt::one();
        for i in 0..n {
            prod *= BigInt::from(big_n - i);
        }
        let power = num_traits::pow(BigInt::from(big_n), n as usize);
        &b * prod >= (&b - a) * power
    } else {
        let s: f64 = (0..n).map(|i| (-(i as f64) / big_n as f64).ln_1p()).sum();
        s >= (-delta).ln_1p()
    }
}

/// Whether `N * P(Bin(n_next, 1/N) < n) <= delta`.
fn coverage_ok(big_n: u64, n: u64, n_next: u64, delta: f64) -> bool {
    if big_n == 1 {
        return n_next >= n;
    }
    let ln_tail = ln_binomial_lower_tail(n_next, 1.0 / big_n as f64, n);
    (big_n as f64).ln() + ln_tail <= delta.ln()
}

/// Smallest `N` with `prod_{i<n} (1 - i/N) >= 1 - delta`.
pub fn collision_free_size(n: u64, delta: f64) -> Result<u64> {
    minimal(n.max(1), |big_n| collision_ok(n, big_n, delta))
}

/// Smallest `n'` such that `n'` uniform draws from `[N]` hit every element at
/// least `n` times, except with probability at most `delta` (union bound).
pub fn coverage_threshold(big_n: u64, n: u64, delta: f64) -> Result<u64> {
    minimal(n.max(1), |m| coverage_ok(big_n, n, m, delta))
}

/// Smallest `x >= lo` satisfying a monotone predicate, capped at `SIZE_CAP`.
fn minimal(lo: u64, ok: impl Fn(u64) -> bool) -> Result<u64> {
    if ok(lo) {
        return Ok(lo);
    }
    let mut bad = lo;
    let mut step = 1u64;
    let mut good = loop {
        let probe = lo.saturating_add(step);
        if probe > SIZE_CAP {
            if ok(SIZE_CAP) {
                break SIZE_CAP;
            }
            return Err(Error::SizeCap {
                level: 0,
                cap: SIZE_CAP,
            });
        }
        if ok(probe) {
            break probe;
        }
        bad = probe;
        step *= 2;
    };
    while good - bad > 1 {
        let mid = bad + (good - bad) / 2;
        if ok(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(good)
}

/// Minimal schedule for tie levels `1..=k_levels`, starting from `n_1 = 3`
/// with `delta_k = delta / 2^(k+1)`.
pub fn build_cantor_schedule(delta: f64, k_levels: usize) -> Result<CantorSchedule> {
    build_cantor_schedule_from(delta, k_levels, 3)
}

/// As [`build_cantor_schedule`] with a chosen `n_1`.
pub fn build_cantor_schedule_from(delta: f64, k_levels: usize, n1: u64) -> Result<CantorSchedule> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta {delta} outside (0, 1)")));
    }
    if k_levels == 0 || n1 == 0 {
        return Err(Error::InvalidParameter("K and n_1 must be at least 1".into()));
    }
    let delta_k = |k: usize| delta / 2f64.powi(k as i32 + 1);
    let at = |level: usize, e: Error| match e {
        Error::SizeCap { cap, .. } => Error::SizeCap { level, cap },
        e => e,
    };
    let mut levels = Vec::with_capacity(k_levels + 1);
    let mut n = n1;
    for k in 1..=k_levels + 1 {
        let d = delta_k(k);
        let big_n = collision_free_size(n, d).map_err(|e| at(k, e))?;
        levels.push(CantorLevel { big_n, n, delta: d });
        if k <= k_levels {
            n = coverage_threshold(big_n, n, d).map_err(|e| at(k + 1, e))?;
        }
    }
    CantorSchedule::from_levels(delta, levels)
}

fn coordinate_rng(seed: u64, level: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(level as u64);
    rng
}

/// A point of `prod [N_k]` whose coordinates are drawn on demand from its
/// seed. Coordinate `i` depends only on `(seed, i)`, and the memoized prefix
/// only grows, so concurrent readers observe the same values.
#[derive(Debug)]
pub struct LazyProductPoint {
    seed: u64,
    sizes: Arc<[u64]>,
    coords: Box<[OnceLock<u64>]>,
}

impl LazyProductPoint {
    pub fn new(seed: u64, sizes: Arc<[u64]>) -> Self {
        let coords = (0..sizes.len()).map(|_| OnceLock::new()).collect();
        LazyProductPoint { seed, sizes, coords }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn depth(&self) -> usize {
        self.sizes.len()
    }

    /// Coordinate `i` (1-based) in `1..=N_i`.
    pub fn coordinate(&self, i: usize) -> u64 {
        for j in 1..=i {
            self.coords[j - 1].get_or_init(|| coordinate_rng(self.seed, j).gen_range(1..=self.sizes[j - 1]));
        }
        *self.coords[i - 1].get().expect("initialized above")
    }

    /// Length of the memoized prefix.
    pub fn memoized_len(&self) -> usize {
        self.coords.iter().take_while(|c| c.get().is_some()).count()
    }
}

impl Clone for LazyProductPoint {
    fn clone(&self) -> Self {
        let coords = self
            .coords
            .iter()
            .map(|c| {
                let cell = OnceLock::new();
                if let Some(v) = c.get() {
                    let _ = cell.set(*v);
                }
                cell
            })
            .collect();
        LazyProductPoint {
            seed: self.seed,
            sizes: Arc::clone(&self.sizes),
            coords,
        }
    }
}

/// Draws a point of the schedule's product space.
pub fn cantor_sample<R: Rng + ?Sized>(space: &CantorSpace, rng: &mut R) -> LazyProductPoint {
    LazyProductPoint::new(rng.gen(), Arc::clone(&space.sizes))
}

/// `rho(s, t) = 2^(-m)`, `m` the first differing coordinate. Distinct points
/// that agree on every stored coordinate are at the capped distance
/// `2^(-depth)`; [`CantorSpace::first_difference`] exposes that case.
#[derive(Debug, Clone)]
pub struct CantorSpace {
    sizes: Arc<[u64]>,
}

impl CantorSpace {
    pub fn new(schedule: &CantorSchedule) -> Self {
        CantorSpace {
            sizes: schedule.sizes().into(),
        }
    }

    pub fn with_sizes(sizes: Vec<u64>) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::InvalidParameter("coordinate sizes must be positive".into()));
        }
        Ok(CantorSpace { sizes: sizes.into() })
    }

    pub fn depth(&self) -> usize {
        self.sizes.len()
    }

    fn check(&self, a: &LazyProductPoint) -> Result<()> {
        if a.sizes[..] != self.sizes[..] {
            return Err(Error::DepthMismatch {
                left: a.depth(),
                right: self.depth(),
            });
        }
        Ok(())
    }

    /// `Ok(Some(m))` for the first differing coordinate, `Ok(None)` when the
    /// points are identical or agree up to the depth cap.
    pub fn first_difference(&self, a: &LazyProductPoint, b: &LazyProductPoint) -> Result<Option<usize>> {
        self.check(a)?;
        self.check(b)?;
        if a.seed == b.seed {
            return Ok(None);
        }
        Ok((1..=self.depth()).find(|&i| a.coordinate(i) != b.coordinate(i)))
    }

    /// Distance plus a flag set when the depth cap decided it.
    pub fn distance_flagged(&self, a: &LazyProductPoint, b: &LazyProductPoint) -> Result<(Dyadic, bool)> {
        match self.first_difference(a, b)? {
            Some(m) => Ok((Dyadic::pow2(-(m as i32)), false)),
            None if a.seed == b.seed => Ok((Dyadic::ZERO, false)),
            None => Ok((Dyadic::pow2(-(self.depth() as i32)), true)),
        }
    }
}

impl MetricSpace for CantorSpace {
    type Point = LazyProductPoint;
    type Dist = Dyadic;

    fn distance(&self, a: &LazyProductPoint, b: &LazyProductPoint) -> Result<Dyadic> {
        self.distance_flagged(a, b).map(|(d, _)| d)
    }

    fn exactness(&self) -> Exactness {
        Exactness::Exact
    }

    fn name(&self) -> String {
        "cantor".into()
    }

    fn declared(&self) -> DeclaredDimension {
        DeclaredDimension {
            nagata: Some(0),
            beta: Some(1),
            scale: None,
        }
    }
}
