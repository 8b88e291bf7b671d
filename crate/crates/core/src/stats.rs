//! Monte Carlo aggregates, seed splitting and a few exact probability oracles.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Independent generator for trial `index` under `master`.
///
/// Each trial gets its own ChaCha stream, so results do not depend on
/// how trials are scheduled across workers.
pub fn trial_rng(master: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// Derives a sub-seed, used when one experiment runs several sub-studies.
pub fn split_seed(master: u64, tag: u64) -> u64 {
    let mut z = master ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Raw sums for a sample mean.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Accumulator {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &Accumulator) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn from_values<I: IntoIterator<Item = f64>>(values: I) -> Self {
        let mut acc = Self::new();
        for v in values {
            acc.push(v);
        }
        acc
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        self.sum / self.count as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let m = self.sum / n;
        ((self.sum_sq - n * m * m) / (n - 1.0)).max(0.0)
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        (self.variance() / self.count as f64).sqrt()
    }

    pub fn estimate(&self) -> Estimate {
        Estimate {
            mean: self.mean(),
            std_error: self.std_error(),
            count: self.count,
        }
    }
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub count: u64,
}

impl Estimate {
    /// `|mean - target| <= z * se`
    pub fn within_se(&self, target: f64, z: f64) -> bool {
        (self.mean - target).abs() <= z * self.std_error
    }
}

/// Empirical quantile by the nearest-rank rule: the smallest value with at
/// least `q * len` values at or below it.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// H_n = 1 + 1/2 + ... + 1/n, exactly.
pub fn harmonic_number(n: u64) -> BigRational {
    let mut h = BigRational::zero();
    for i in 1..=n {
        h += BigRational::new(BigInt::one(), BigInt::from(i));
    }
    h
}

pub fn binomial_coefficient(n: u64, j: u64) -> BigInt {
    if j > n {
        return BigInt::zero();
    }
    let j = j.min(n - j);
    let mut c = BigInt::one();
    for i in 0..j {
        c = c * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    c
}

/// P(Bin(n, p) >= m) in exact rational arithmetic.
pub fn binomial_upper_tail_exact(n: u64, p: &BigRational, m: u64) -> BigRational {
    let q = BigRational::one() - p;
    let mut total = BigRational::zero();
    for j in m..=n {
        let term = BigRational::from_integer(binomial_coefficient(n, j))
            * num_traits::pow(p.clone(), j as usize)
            * num_traits::pow(q.clone(), (n - j) as usize);
        total += term;
    }
    total
}

/// ln P(Bin(n, p) < m), summing the pmf terms in log space.
///
/// Terms are generated by the ratio recurrence from ln P(X = 0), so the
/// result is accurate where `(1-p)^n` would underflow.
pub fn ln_binomial_lower_tail(n: u64, p: f64, m: u64) -> f64 {
    if m == 0 {
        return f64::NEG_INFINITY;
    }
    if m > n {
        return 0.0;
    }
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let mut ln_term = n as f64 * ln_q;
    let mut ln_max = ln_term;
    let mut terms = Vec::with_capacity(m as usize);
    terms.push(ln_term);
    for j in 0..(m - 1) {
        ln_term += ((n - j) as f64).ln() - ((j + 1) as f64).ln() + ln_p - ln_q;
        ln_max = ln_max.max(ln_term);
        terms.push(ln_term);
    }
    let s: f64 = terms.iter().map(|t| (t - ln_max).exp()).sum();
    (ln_max + s.ln()).min(0.0)
}
