//! Davies' compact space: levels of central and peripheral elements, two
//! measures that agree on every closed ball of radius below 1, and exact
//! labeled sampling under their mixture.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::distribution::LabeledDistribution;
use crate::error::{Error, Result};
use crate::metric::{Dyadic, Exactness, MetricSpace};

/// `p_n`, `alpha_n`, `beta_n` for one level.
#[derive(Debug, Clone, PartialEq)]
pub struct DaviesLevel {
    pub p: u64,
    pub alpha: BigRational,
    pub beta: BigRational,
}

/// Exact parameters up to depth `L`. Level 0 holds `alpha_0 = 2/3`,
/// `beta_0 = 1/3` and `p_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DaviesParams {
    levels: Vec<DaviesLevel>,
    /// `P(central)` at level n for a prefix of mass alpha, resp. beta.
    central_odds: Vec<[(u128, u128); 2]>,
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn as_u128_fraction(x: &BigRational) -> Option<(u128, u128)> {
    Some((x.numer().to_u128()?, x.denom().to_u128()?))
}

/// Builds the exact chain with the minimal admissible `p_n`.
pub fn davies_params(depth: usize) -> Result<DaviesParams> {
    if depth == 0 {
        return Err(Error::InvalidParameter("depth must be at least 1".into()));
    }
    let mut levels = vec![DaviesLevel {
        p: 0,
        alpha: ratio(2, 3),
        beta: ratio(1, 3),
    }];
    let mut central_odds = vec![[(0, 1), (0, 1)]];
    for n in 1..=depth {
        let prev = &levels[n - 1];
        let q = (&prev.alpha / &prev.beta).floor().to_integer();
        let p_big = q + BigInt::one();
        let p = p_big
            .to_u64()
            .ok_or_else(|| Error::InvalidParameter(format!("p_{n} does not fit in 64 bits")))?;
        let pr = BigRational::from_integer(p_big);
        let s = &prev.alpha + &prev.beta;
        let d = &prev.alpha - &prev.beta;
        let sum = &s / (&pr * (&pr + BigRational::one()));
        let diff = &d / (&pr * (&pr - BigRational::one()));
        let two = BigRational::from_integer(2.into());
        let alpha = (&sum + &diff) / &two;
        let beta = (&sum - &diff) / &two;
        assert!(alpha > beta && beta > BigRational::zero());
        assert_eq!(&pr * &pr * &alpha + &pr * &beta, prev.alpha);
        assert_eq!(&pr * &pr * &beta + &pr * &alpha, prev.beta);
        let from_alpha = &pr * &beta / &prev.alpha;
        let from_beta = &pr * &alpha / &prev.beta;
        let odds = [as_u128_fraction(&from_alpha), as_u128_fraction(&from_beta)];
        let [Some(a), Some(b)] = odds else {
            return Err(Error::InvalidParameter(format!(
                "level {n} probabilities exceed 128 bits"
            )));
        };
        central_odds.push([a, b]);
        levels.push(DaviesLevel { p, alpha, beta });
    }
    Ok(DaviesParams { levels, central_odds })
}

/// Which measure a ball or cylinder mass refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    MuA,
    MuB,
    Mu0,
    Mu1,
    Mu,
}

impl DaviesParams {
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    /// Level `n` for `0 <= n <= L`.
    pub fn level(&self, n: usize) -> &DaviesLevel {
        &self.levels[n]
    }

    pub fn p(&self, n: usize) -> u64 {
        self.levels[n].p
    }

    pub fn alpha(&self, n: usize) -> &BigRational {
        &self.levels[n].alpha
    }

    pub fn beta(&self, n: usize) -> &BigRational {
        &self.levels[n].beta
    }

    /// Conditional probability that level `n` is central, given whether the
    /// prefix cylinder carries mass `alpha_{n-1}` or `beta_{n-1}`.
    pub fn central_probability(&self, n: usize, prefix_is_alpha: bool) -> BigRational {
        let (num, den) = self.central_odds[n][if prefix_is_alpha { 0 } else { 1 }];
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    /// Validated point from per-level `(i1, i2)` coordinates.
    pub fn point(&self, coords: Vec<(u64, u64)>) -> Result<DaviesPoint> {
        if coords.len() != self.depth() {
            return Err(Error::DepthMismatch {
                left: coords.len(),
                right: self.depth(),
            });
        }
        for (n, &(i1, i2)) in coords.iter().enumerate() {
            let p = self.p(n + 1);
            if !(1..=p).contains(&i1) || i2 > p {
                return Err(Error::OutsideUniverse(format!(
                    "({i1}, {i2}) at level {} with p = {p}",
                    n + 1
                )));
            }
        }
        Ok(DaviesPoint {
            coords: coords.into(),
            tag: 0,
        })
    }

    /// Mass of the cylinder fixed by the first `len` coordinates of `x`.
    pub fn cylinder_mass(&self, x: &DaviesPoint, len: usize, which: Which) -> Result<BigRational> {
        if len > self.depth() || x.depth() != self.depth() {
            return Err(Error::DepthMismatch {
                left: len.max(x.depth()),
                right: self.depth(),
            });
        }
        let odd = x.central_count(len) % 2 == 1;
        let (a, b) = (&self.levels[len].alpha, &self.levels[len].beta);
        let (mu_a, mu_b) = if odd { (a, b) } else { (b, a) };
        Ok(combine(mu_a, mu_b, which))
    }

    /// Measure of the closed ball of radius `r = 2^(-t)` (`0 <= t <= L`).
    pub fn ball_measure(&self, x: &DaviesPoint, r: Dyadic, which: Which) -> Result<BigRational> {
        davies_ball_measure(self, x, r, which)
    }

    /// Largest mass of a depth-L cylinder under the mixture; bounds the
    /// chance that two independent draws agree to depth L.
    pub fn max_cylinder_mass(&self) -> BigRational {
        let l = self.depth();
        combine(&self.levels[l].alpha, &self.levels[l].beta, Which::Mu)
    }
}

fn combine(mu_a: &BigRational, mu_b: &BigRational, which: Which) -> BigRational {
    match which {
        Which::MuA => mu_a.clone(),
        Which::MuB => mu_b.clone(),
        Which::Mu0 => ratio(6, 5) * mu_a,
        Which::Mu1 => ratio(9, 10) * mu_b,
        Which::Mu => ratio(6, 5) * mu_a + ratio(9, 10) * mu_b,
    }
}

/// A point truncated at depth `L`. Sampled points carry a nonzero tag
/// identifying the draw; two distinct draws never sit at distance zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DaviesPoint {
    coords: Arc<[(u64, u64)]>,
    tag: u64,
}

impl DaviesPoint {
    pub fn coords(&self) -> &[(u64, u64)] {
        &self.coords
    }

    pub fn depth(&self) -> usize {
        self.coords.len()
    }

    pub fn tag(&self) -> u64 {
        self.tag
    }

    /// Level `n` (1-based) is central.
    pub fn is_central(&self, n: usize) -> bool {
        self.coords[n - 1].1 == 0
    }

    /// Central elements among the first `len` levels.
    pub fn central_count(&self, len: usize) -> usize {
        self.coords[..len].iter().filter(|c| c.1 == 0).count()
    }
}

/// Whether an edge joins two distinct elements of one level.
fn adjacent(a: (u64, u64), b: (u64, u64)) -> bool {
    (a.1 == 0 && b.1 == 0) || (a.0 == b.0 && (a.1 == 0 || b.1 == 0))
}

/// Distance plus a flag set when two distinct draws agree to depth `L`.
pub fn davies_distance_flagged(x: &DaviesPoint, y: &DaviesPoint) -> Result<(Dyadic, bool)> {
    if x.depth() != y.depth() {
        return Err(Error::DepthMismatch {
            left: x.depth(),
            right: y.depth(),
        });
    }
    match x.coords.iter().zip(y.coords.iter()).position(|(a, b)| a != b) {
        Some(i) => {
            let m = i as i32 + 1;
            let e = if adjacent(x.coords[i], y.coords[i]) { -m } else { 1 - m };
            Ok((Dyadic::pow2(e), false))
        }
        None if x.tag == y.tag => Ok((Dyadic::ZERO, false)),
        None => Ok((Dyadic::pow2(-(x.depth() as i32)), true)),
    }
}

pub fn davies_distance(x: &DaviesPoint, y: &DaviesPoint) -> Result<Dyadic> {
    davies_distance_flagged(x, y).map(|(d, _)| d)
}

/// Closed-ball measure in closed form.
pub fn davies_ball_measure(params: &DaviesParams, x: &DaviesPoint, r: Dyadic, which: Which) -> Result<BigRational> {
    if x.depth() != params.depth() {
        return Err(Error::DepthMismatch {
            left: x.depth(),
            right: params.depth(),
        });
    }
    let t = match r.exponent() {
        Some(e) if e <= 0 && (-e) as usize <= params.depth() => (-e) as usize,
        _ => {
            return Err(Error::InvalidParameter(format!(
                "radius {r:?} is not 2^-t with 0 <= t <= L"
            )))
        }
    };
    if t == 0 {
        return Ok(combine(&ratio(1, 3), &ratio(2, 3), which));
    }
    let lvl = params.level(t);
    let s = &lvl.alpha + &lvl.beta;
    let common = if x.is_central(t) {
        BigRational::from_integer(lvl.p.into()) * s
    } else {
        s
    };
    Ok(combine(&common, &common, which))
}

fn bernoulli<R: Rng + ?Sized>(rng: &mut R, (num, den): (u128, u128)) -> bool {
    rng.gen_range(0..den) < num
}

/// Draws a point from `mu_a / (1/3)` (`from_b = false`) or `mu_b / (2/3)`.
pub fn davies_sample_point<R: Rng + ?Sized>(params: &DaviesParams, from_b: bool, rng: &mut R) -> DaviesPoint {
    // the empty prefix has even parity: mass beta_0 under mu_a, alpha_0 under mu_b
    let mut prefix_is_alpha = from_b;
    let mut coords = Vec::with_capacity(params.depth());
    for n in 1..=params.depth() {
        let p = params.p(n);
        let odds = params.central_odds[n][if prefix_is_alpha { 0 } else { 1 }];
        let i1 = rng.gen_range(1..=p);
        if bernoulli(rng, odds) {
            coords.push((i1, 0));
            prefix_is_alpha = !prefix_is_alpha;
        } else {
            coords.push((i1, rng.gen_range(1..=p)));
        }
    }
    DaviesPoint {
        coords: coords.into(),
        tag: rng.gen::<u64>() | 1,
    }
}

/// `(X, Y)` with `Y = 1` w.p. 3/5, `X | Y=1 ~ mu_b/(2/3)`, `X | Y=0 ~ mu_a/(1/3)`.
pub fn davies_sample_pair<R: Rng + ?Sized>(params: &DaviesParams, rng: &mut R) -> (DaviesPoint, u8) {
    let y = rng.gen_range(0..5u8) < 3;
    (davies_sample_point(params, y, rng), y as u8)
}

/// Labeled i.i.d. sample of size `n`.
pub fn davies_sample_labeled<R: Rng + ?Sized>(
    params: &DaviesParams,
    n: usize,
    rng: &mut R,
) -> Result<crate::metric::FiniteSample<DaviesPoint>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let (pts, labels): (Vec<_>, Vec<_>) = (0..n).map(|_| davies_sample_pair(params, rng)).unzip();
    crate::metric::FiniteSample::labeled(pts, labels)
}

/// The space `Omega` truncated at the parameters' depth.
#[derive(Debug, Clone)]
pub struct DaviesSpace {
    params: Arc<DaviesParams>,
}

impl DaviesSpace {
    pub fn new(params: DaviesParams) -> Self {
        DaviesSpace {
            params: Arc::new(params),
        }
    }

    pub fn params(&self) -> &DaviesParams {
        &self.params
    }
}

impl MetricSpace for DaviesSpace {
    type Point = DaviesPoint;
    type Dist = Dyadic;

    #[inline]
    fn distance(&self, a: &DaviesPoint, b: &DaviesPoint) -> Result<Dyadic> {
        if a.depth() != self.params.depth() {
            return Err(Error::DepthMismatch {
                left: a.depth(),
                right: self.params.depth(),
            });
        }
        davies_distance(a, b)
    }

    fn exactness(&self) -> Exactness {
        Exactness::Exact
    }

    fn name(&self) -> String {
        format!("davies-L{}", self.params.depth())
    }
}

/// The labeled law `mu_0 + mu_1` on Davies' space.
#[derive(Debug, Clone)]
pub struct DaviesDistribution {
    space: DaviesSpace,
}

impl DaviesDistribution {
    pub fn new(depth: usize) -> Result<Self> {
        Ok(DaviesDistribution {
            space: DaviesSpace::new(davies_params(depth)?),
        })
    }

    pub fn params(&self) -> &DaviesParams {
        self.space.params()
    }
}

impl LabeledDistribution for DaviesDistribution {
    type Space = DaviesSpace;

    fn space(&self) -> &DaviesSpace {
        &self.space
    }

    fn name(&self) -> String {
        self.space.name()
    }

    fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> DaviesPoint {
        davies_sample_pair(self.params(), rng).0
    }

    fn eta(&self, _x: &DaviesPoint) -> Option<f64> {
        None
    }

    fn sample_labeled<R: Rng + ?Sized>(&self, rng: &mut R) -> (DaviesPoint, u8) {
        davies_sample_pair(self.params(), rng)
    }
}

/// `gcd`-reduced check that a fraction lies in `[0, 1]`.
pub fn is_probability(x: &BigRational) -> bool {
    x >= &BigRational::zero() && x <= &BigRational::one() && x.numer().gcd(x.denom()).is_one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn first_level() {
        let p = davies_params(1).unwrap();
        assert_eq!(p.p(1), 3);
        assert_eq!(p.alpha(1), &ratio(5, 72));
        assert_eq!(p.beta(1), &ratio(1, 72));
        assert_eq!(ratio(9, 1) * ratio(5, 72) + ratio(3, 1) * ratio(1, 72), ratio(2, 3));
    }

    #[test]
    fn second_level() {
        let p = davies_params(2).unwrap();
        assert_eq!(p.p(2), 6);
        assert_eq!(p.alpha(2), &ratio(29, 15120));
        assert_eq!(p.beta(2), &ratio(1, 15120));
    }

    #[test]
    fn central_probability_example() {
        let p = davies_params(1).unwrap();
        assert_eq!(p.central_probability(1, false), ratio(5, 8));
        assert_eq!(p.central_probability(1, true), ratio(1, 16));
    }

    #[test]
    fn distances() {
        let p = davies_params(2).unwrap();
        let pt = |c: Vec<(u64, u64)>| p.point(c).unwrap();
        let x = pt(vec![(1, 0), (2, 0)]);
        assert_eq!(davies_distance(&x, &x).unwrap(), Dyadic::ZERO);
        assert_eq!(
            davies_distance(&x, &pt(vec![(2, 0), (2, 0)])).unwrap(),
            Dyadic::pow2(-1)
        );
        assert_eq!(
            davies_distance(&pt(vec![(1, 1), (1, 1)]), &pt(vec![(2, 3), (1, 1)])).unwrap(),
            Dyadic::ONE
        );
        // peripheral and its own central at level 2
        assert_eq!(
            davies_distance(&x, &pt(vec![(1, 0), (2, 5)])).unwrap(),
            Dyadic::pow2(-2)
        );
        // peripheral and a foreign central at level 2
        assert_eq!(
            davies_distance(&x, &pt(vec![(1, 0), (3, 5)])).unwrap(),
            Dyadic::pow2(-1)
        );
        let short = davies_params(1).unwrap().point(vec![(1, 0)]).unwrap();
        assert!(davies_distance(&x, &short).is_err());
        assert!(p.point(vec![(0, 0), (1, 1)]).is_err());
        assert!(p.point(vec![(1, 4), (1, 1)]).is_err());
    }

    #[test]
    fn ball_measure_examples() {
        let p = davies_params(1).unwrap();
        let c = p.point(vec![(2, 0)]).unwrap();
        let q = p.point(vec![(2, 1)]).unwrap();
        let half = Dyadic::pow2(-1);
        assert_eq!(davies_ball_measure(&p, &c, half, Which::MuA).unwrap(), ratio(1, 4));
        assert_eq!(davies_ball_measure(&p, &q, half, Which::MuA).unwrap(), ratio(1, 12));
        let one = Dyadic::ONE;
        let totals: Vec<_> = [Which::MuA, Which::MuB, Which::Mu0, Which::Mu1, Which::Mu]
            .iter()
            .map(|&w| davies_ball_measure(&p, &c, one, w).unwrap())
            .collect();
        assert_eq!(
            totals,
            vec![ratio(1, 3), ratio(2, 3), ratio(2, 5), ratio(3, 5), ratio(1, 1)]
        );
        assert!(davies_ball_measure(&p, &c, Dyadic::pow2(-2), Which::MuA).is_err());
        assert!(davies_ball_measure(&p, &c, Dyadic::pow2(1), Which::MuA).is_err());
    }

    #[test]
    fn sampled_points_are_valid_and_distinct() {
        let p = davies_params(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let (x, _) = davies_sample_pair(&p, &mut rng);
            let again = p.point(x.coords().to_vec()).unwrap();
            assert_eq!(again.coords(), x.coords());
            assert_ne!(x.tag(), 0);
        }
    }

    #[test]
    fn class_probabilities_are_fractions() {
        let p = davies_params(4).unwrap();
        for n in 1..=4 {
            for a in [true, false] {
                assert!(is_probability(&p.central_probability(n, a)));
            }
        }
    }
}
