//! Points, exact and inexact distances, ball queries over finite samples and
//! the k-th neighbor radius.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether distances are compared exactly or up to a tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Exactness {
    Exact,
    Inexact,
}

/// A distance in a space's native representation.
///
/// `total_cmp` is a strict total order used for sorting and selection.
/// `ties_with` is the tie relation: equality for exact types, `|a-b| <= tau`
/// for inexact ones.
pub trait Distance: Clone + fmt::Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn exactness(&self) -> Exactness;
    fn total_cmp(&self, other: &Self) -> Ordering;
    fn ties_with(&self, other: &Self) -> bool {
        self.total_cmp(other) == Ordering::Equal
    }
    fn to_f64(&self) -> f64;
    fn to_value(&self) -> DistanceValue;
}

/// `a < b` and not tied with it.
pub fn strictly_less<D: Distance>(a: &D, b: &D) -> bool {
    a.total_cmp(b) == Ordering::Less && !a.ties_with(b)
}

/// `a <= b` up to ties.
pub fn at_most<D: Distance>(a: &D, b: &D) -> bool {
    a.total_cmp(b) != Ordering::Greater || a.ties_with(b)
}

/// Exact distance of the form `2^e`, or zero.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dyadic(i32);

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic(i32::MIN);
    pub const ONE: Dyadic = Dyadic(0);

    pub fn pow2(exp: i32) -> Self {
        assert!(exp > i32::MIN, "exponent out of range");
        Dyadic(exp)
    }

    pub fn is_zero(&self) -> bool {
        *self == Self::ZERO
    }

    /// `Some(e)` for `2^e`, `None` for zero.
    pub fn exponent(&self) -> Option<i32> {
        (!self.is_zero()).then_some(self.0)
    }

    pub fn to_rational(&self) -> BigRational {
        match self.exponent() {
            None => BigRational::zero(),
            Some(e) if e >= 0 => BigRational::from_integer(BigInt::one() << e as usize),
            Some(e) => BigRational::new(BigInt::one(), BigInt::one() << (-e) as usize),
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exponent() {
            None => write!(f, "0"),
            Some(e) => write!(f, "2^{e}"),
        }
    }
}

impl Distance for Dyadic {
    fn zero() -> Self {
        Self::ZERO
    }
    fn exactness(&self) -> Exactness {
        Exactness::Exact
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
    fn to_f64(&self) -> f64 {
        match self.exponent() {
            None => 0.0,
            Some(e) => 2f64.powi(e),
        }
    }
    fn to_value(&self) -> DistanceValue {
        DistanceValue::Exact(self.to_rational())
    }
}

/// Exact rational distance.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(pub BigRational);

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Self {
        Rational(BigRational::new(numer.into(), denom.into()))
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl Distance for Rational {
    fn zero() -> Self {
        Rational(BigRational::zero())
    }
    fn exactness(&self) -> Exactness {
        Exactness::Exact
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
    fn to_value(&self) -> DistanceValue {
        DistanceValue::Exact(self.0.clone())
    }
}

/// Inexact distance with tolerance `tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real {
    pub value: f64,
    pub tol: f64,
}

impl Real {
    pub fn new(value: f64, tol: f64) -> Self {
        Real { value, tol }
    }
}

impl Distance for Real {
    fn zero() -> Self {
        Real::new(0.0, 0.0)
    }
    fn exactness(&self) -> Exactness {
        Exactness::Inexact
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.value.total_cmp(&other.value)
    }
    fn ties_with(&self, other: &Self) -> bool {
        (self.value - other.value).abs() <= self.tol.max(other.tol)
    }
    fn to_f64(&self) -> f64 {
        self.value
    }
    fn to_value(&self) -> DistanceValue {
        DistanceValue::Inexact {
            value: self.value,
            tol: self.tol,
        }
    }
}

/// Representation-independent distance used at API boundaries and in reports.
#[derive(Debug, Clone, PartialEq)]
pub enum DistanceValue {
    Exact(BigRational),
    Inexact { value: f64, tol: f64 },
}

impl DistanceValue {
    pub fn exact(numer: i64, denom: i64) -> Self {
        DistanceValue::Exact(BigRational::new(numer.into(), denom.into()))
    }

    pub fn inexact(value: f64, tol: f64) -> Self {
        DistanceValue::Inexact { value, tol }
    }

    pub fn mode(&self) -> Exactness {
        match self {
            DistanceValue::Exact(_) => Exactness::Exact,
            DistanceValue::Inexact { .. } => Exactness::Inexact,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            DistanceValue::Exact(r) => r.is_negative(),
            DistanceValue::Inexact { value, .. } => *value < 0.0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            DistanceValue::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            DistanceValue::Inexact { value, .. } => *value,
        }
    }

    /// Compares two values of the same mode. Inexact values within tolerance
    /// compare equal.
    pub fn try_cmp(&self, other: &DistanceValue) -> Result<Ordering> {
        match (self, other) {
            (DistanceValue::Exact(a), DistanceValue::Exact(b)) => Ok(a.cmp(b)),
            (DistanceValue::Inexact { value: a, tol: ta }, DistanceValue::Inexact { value: b, tol: tb }) => {
                if (a - b).abs() <= ta.max(*tb) {
                    Ok(Ordering::Equal)
                } else {
                    Ok(a.total_cmp(b))
                }
            }
            _ => Err(Error::MixedModes),
        }
    }
}

impl fmt::Display for DistanceValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistanceValue::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            DistanceValue::Inexact { value, .. } => write!(f, "{value}"),
        }
    }
}

/// Declared dimension metadata of a space.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DeclaredDimension {
    /// Nagata dimension `d`.
    pub nagata: Option<usize>,
    /// Metric dimension `beta`.
    pub beta: Option<usize>,
    /// Scale on which `beta` holds; `None` means every scale.
    pub scale: Option<DistanceValue>,
}

/// A distance oracle over a point universe.
pub trait MetricSpace: Send + Sync {
    type Point: Clone + fmt::Debug + Send + Sync;
    type Dist: Distance;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> Result<Self::Dist>;
    fn exactness(&self) -> Exactness;
    fn name(&self) -> String;
    fn declared(&self) -> DeclaredDimension {
        DeclaredDimension::default()
    }
}

/// Evaluates `rho(a, b)` as a [`DistanceValue`], rejecting a distance whose
/// mode disagrees with the space.
pub fn distance<S: MetricSpace>(space: &S, a: &S::Point, b: &S::Point) -> Result<DistanceValue> {
    let d = space.distance(a, b)?;
    if d.exactness() != space.exactness() {
        return Err(Error::MixedModes);
    }
    Ok(d.to_value())
}

/// Ordered points with optional binary labels. Indices are 0-based in code
/// and 1-based in reports.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSample<P> {
    points: Vec<P>,
    labels: Option<Vec<u8>>,
}

impl<P> FiniteSample<P> {
    pub fn new(points: Vec<P>) -> Self {
        FiniteSample { points, labels: None }
    }

    pub fn labeled(points: Vec<P>, labels: Vec<u8>) -> Result<Self> {
        if labels.len() != points.len() {
            return Err(Error::LabelLength {
                labels: labels.len(),
                points: points.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&y| y > 1) {
            return Err(Error::InvalidLabel(bad));
        }
        Ok(FiniteSample {
            points,
            labels: Some(labels),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &P {
        &self.points[i]
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    pub fn require_labels(&self) -> Result<&[u8]> {
        self.labels().ok_or(Error::MissingLabels)
    }

    pub fn into_parts(self) -> (Vec<P>, Option<Vec<u8>>) {
        (self.points, self.labels)
    }
}

/// Closed ball `{y : rho(center, y) <= radius}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedBall<P, D> {
    pub center: P,
    pub radius: D,
}

impl<P, D> ClosedBall<P, D> {
    pub fn new(center: P, radius: D) -> Self {
        ClosedBall { center, radius }
    }
}

/// Ordered list of closed balls; order drives extraction and tie-breaking.
pub type BallFamily<P, D> = Vec<ClosedBall<P, D>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallKind {
    Closed,
    Open,
    Sphere,
}

fn check_radius<D: Distance>(r: &D) -> Result<()> {
    if r.to_f64() < 0.0 {
        return Err(Error::NegativeRadius);
    }
    Ok(())
}

/// Indices of sample points in the requested ball around `center`.
pub fn ball_members<S: MetricSpace>(
    space: &S,
    sample: &FiniteSample<S::Point>,
    center: &S::Point,
    r: &S::Dist,
    kind: BallKind,
) -> Result<Vec<usize>> {
    check_radius(r)?;
    let mut out = Vec::new();
    for (i, p) in sample.points().iter().enumerate() {
        let d = space.distance(center, p)?;
        let open = strictly_less(&d, r);
        let closed = at_most(&d, r);
        let keep = match kind {
            BallKind::Closed => closed,
            BallKind::Open => open,
            BallKind::Sphere => closed && !open,
        };
        if keep {
            out.push(i);
        }
    }
    Ok(out)
}

/// Who is asking for neighbors, and which sample points compete.
#[derive(Debug, Clone, Copy)]
pub enum Query<'a, P> {
    /// An outside point; every sample point is a candidate, including exact
    /// duplicates of it at distance zero.
    Point(&'a P),
    /// Sample member `i`; all other members are candidates.
    Member(usize),
    /// Member `slot` queries with `point` substituted into its slot, so the
    /// candidates are the other members plus `point` under index `slot`.
    Adjoined { slot: usize, point: &'a P },
}

/// `(slot, distance)` for every candidate of the query, in slot order.
pub fn candidate_distances<S: MetricSpace>(
    space: &S,
    sample: &FiniteSample<S::Point>,
    query: Query<'_, S::Point>,
) -> Result<Vec<(usize, S::Dist)>> {
    let pts = sample.points();
    match query {
        Query::Point(x) => pts
            .iter()
            .enumerate()
            .map(|(j, p)| Ok((j, space.distance(x, p)?)))
            .collect(),
        Query::Member(i) => {
            let x = member(pts, i)?;
            let mut out = Vec::with_capacity(pts.len().saturating_sub(1));
            for (j, p) in pts.iter().enumerate() {
                if j != i {
                    out.push((j, space.distance(x, p)?));
                }
            }
            Ok(out)
        }
        Query::Adjoined { slot, point } => {
            let x = member(pts, slot)?;
            let mut out = Vec::with_capacity(pts.len());
            for (j, p) in pts.iter().enumerate() {
                let d = if j == slot {
                    space.distance(x, point)?
                } else {
                    space.distance(x, p)?
                };
                out.push((j, d));
            }
            Ok(out)
        }
    }
}

fn member<P>(pts: &[P], i: usize) -> Result<&P> {
    pts.get(i)
        .ok_or_else(|| Error::OutsideUniverse(format!("sample index {i} of {}", pts.len())))
}

/// k-th smallest candidate distance (1-based k). Fails if `k` exceeds the
/// number of candidates.
pub fn kth_smallest<D: Distance>(dists: &mut [D], k: usize) -> Result<D> {
    if k == 0 || k > dists.len() {
        return Err(Error::KOutOfRange {
            k,
            available: dists.len(),
        });
    }
    let (_, kth, _) = dists.select_nth_unstable_by(k - 1, |a, b| a.total_cmp(b));
    Ok(kth.clone())
}

/// The smallest radius whose closed ball around the query holds k candidates
/// besides the query itself.
pub fn eps_knn_radius<S: MetricSpace>(
    space: &S,
    sample: &FiniteSample<S::Point>,
    query: Query<'_, S::Point>,
    k: usize,
) -> Result<S::Dist> {
    let mut d: Vec<S::Dist> = candidate_distances(space, sample, query)?
        .into_iter()
        .map(|(_, d)| d)
        .collect();
    kth_smallest(&mut d, k)
}
