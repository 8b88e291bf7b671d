//! Small exact spaces: the discrete metric, the harmonic space, the
//! powers-of-two ultrametric and the modified reals.

use crate::error::{Error, Result};
use crate::metric::{DeclaredDimension, DistanceValue, Dyadic, Exactness, FiniteSample, MetricSpace, Rational};

/// Discrete metric on `u64` ids: distance 1 between distinct ids.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ZeroOne;

impl MetricSpace for ZeroOne {
    type Point = u64;
    type Dist = Dyadic;

    #[inline]
    fn distance(&self, a: &u64, b: &u64) -> Result<Dyadic> {
        Ok(if a == b { Dyadic::ZERO } else { Dyadic::ONE })
    }

    fn exactness(&self) -> Exactness {
        Exactness::Exact
    }

    fn name(&self) -> String {
        "zero-one".into()
    }

    fn declared(&self) -> DeclaredDimension {
        DeclaredDimension {
            nagata: Some(0),
            beta: Some(1),
            scale: Some(DistanceValue::exact(1, 1)),
        }
    }
}

/// Points `0..n` of the discrete metric.
pub fn build_zero_one(n: usize) -> (ZeroOne, FiniteSample<u64>) {
    (ZeroOne, FiniteSample::new((0..n as u64).collect()))
}

/// Points `1, 2, ...` with `rho(i, j) = 1/i + 1/j` for `i != j`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Harmonic;

impl MetricSpace for Harmonic {
    type Point = u64;
    type Dist = Rational;

    fn distance(&self, a: &u64, b: &u64) -> Result<Rational> {
        if *a == 0 || *b == 0 {
            return Err(Error::OutsideUniverse("harmonic points start at 1".into()));
        }
        if a == b {
            return Ok(Rational::new(0, 1));
        }
        let (a, b) = (*a as i64, *b as i64);
        Ok(Rational::new(a + b, a * b))
    }

    fn exactness(&self) -> Exactness {
        Exactness::Exact
    }

    fn name(&self) -> String {
        "harmonic".into()
    }
}

/// Points `x_1..x_n` of the harmonic space.
pub fn build_harmonic(n: usize) -> (Harmonic, FiniteSample<u64>) {
    (Harmonic, FiniteSample::new((1..=n as u64).collect()))
}

/// Points `1, 2, ...` with `rho(i, j) = 2^(max(i, j) - 2)` for `i != j`, so
/// `rho(x_1, x_2) = 1` and each new point sits twice as far out.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PowersOfTwo;

impl MetricSpace for PowersOfTwo {
    type Point = u64;
    type Dist = Dyadic;

    #[inline]
    fn distance(&self, a: &u64, b: &u64) -> Result<Dyadic> {
        if *a == 0 || *b == 0 {
            return Err(Error::OutsideUniverse("powers-of-two points start at 1".into()));
        }
        if a == b {
            return Ok(Dyadic::ZERO);
        }
        let m = (*a).max(*b);
        if m > i32::MAX as u64 {
            return Err(Error::OutsideUniverse(format!("index {m} too large")));
        }
        Ok(Dyadic::pow2(m as i32 - 2))
    }

    fn exactness(&self) -> Exactness {
        Exactness::Exact
    }

    fn name(&self) -> String {
        "powers-of-two".into()
    }

    fn declared(&self) -> DeclaredDimension {
        DeclaredDimension {
            nagata: Some(0),
            beta: Some(1),
            scale: None,
        }
    }
}

/// Points `x_1..x_n` of the powers-of-two space.
pub fn build_powers_of_two(n: usize) -> Result<(PowersOfTwo, FiniteSample<u64>)> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("powers-of-two needs n >= 2, got {n}")));
    }
    Ok((PowersOfTwo, FiniteSample::new((1..=n as u64).collect())))
}

/// Reals with distance 0 on equal points, 1/2 when exactly one point is 0,
/// and 1 otherwise.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ModifiedReals;

impl MetricSpace for ModifiedReals {
    type Point = f64;
    type Dist = Dyadic;

    fn distance(&self, a: &f64, b: &f64) -> Result<Dyadic> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::OutsideUniverse(format!("non-finite real {a} or {b}")));
        }
        Ok(if a == b {
            Dyadic::ZERO
        } else if *a == 0.0 || *b == 0.0 {
            Dyadic::pow2(-1)
        } else {
            Dyadic::ONE
        })
    }

    fn exactness(&self) -> Exactness {
        Exactness::Exact
    }

    fn name(&self) -> String {
        "modified-reals".into()
    }

    fn declared(&self) -> DeclaredDimension {
        DeclaredDimension {
            nagata: None,
            beta: Some(1),
            scale: Some(DistanceValue::exact(1, 2)),
        }
    }
}

pub fn build_modified_reals(points: &[f64]) -> Result<(ModifiedReals, FiniteSample<f64>)> {
    if let Some(p) = points.iter().find(|p| !p.is_finite()) {
        return Err(Error::OutsideUniverse(format!("non-finite real {p}")));
    }
    Ok((ModifiedReals, FiniteSample::new(points.to_vec())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::distance;

    #[test]
    fn zero_one_distances() {
        let (s, sample) = build_zero_one(3);
        let p = sample.points();
        assert_eq!(distance(&s, &p[0], &p[0]).unwrap(), DistanceValue::exact(0, 1));
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(distance(&s, &p[i], &p[j]).unwrap(), DistanceValue::exact(1, 1));
                }
            }
        }
        assert_eq!(build_zero_one(1).1.len(), 1);
    }

    #[test]
    fn harmonic_values() {
        assert_eq!(distance(&Harmonic, &2, &3).unwrap(), DistanceValue::exact(5, 6));
        assert_eq!(distance(&Harmonic, &1, &2).unwrap(), DistanceValue::exact(3, 2));
        assert_eq!(distance(&Harmonic, &7, &7).unwrap(), DistanceValue::exact(0, 1));
        assert!(Harmonic.distance(&0, &1).is_err());
    }

    #[test]
    fn powers_of_two_values() {
        let d = |a, b| distance(&PowersOfTwo, &a, &b).unwrap();
        assert_eq!(d(1, 2), DistanceValue::exact(1, 1));
        assert_eq!(d(1, 3), DistanceValue::exact(2, 1));
        assert_eq!(d(2, 3), DistanceValue::exact(2, 1));
        assert!(build_powers_of_two(1).is_err());
    }

    #[test]
    fn modified_reals_values() {
        let d = |a, b| distance(&ModifiedReals, &a, &b).unwrap();
        assert_eq!(d(0.0, 5.0), DistanceValue::exact(1, 2));
        assert_eq!(d(3.0, 7.0), DistanceValue::exact(1, 1));
        assert_eq!(d(2.5, 2.5), DistanceValue::exact(0, 1));
        assert!(build_modified_reals(&[f64::NAN]).is_err());
    }
}
