//! Laws of labeled pairs `(X, Y)`: a marginal on a metric space plus the
//! regression function `eta(x) = P(Y = 1 | X = x)`.

use rand::Rng;

use crate::metric::{FiniteSample, MetricSpace};

pub type PointOf<D> = <<D as LabeledDistribution>::Space as MetricSpace>::Point;

pub trait LabeledDistribution: Send + Sync {
    type Space: MetricSpace;

    fn space(&self) -> &Self::Space;
    fn name(&self) -> String;
    fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> PointOf<Self>;

    /// `None` when the law has no computable regression function; such laws
    /// must override [`LabeledDistribution::sample_labeled`].
    fn eta(&self, x: &PointOf<Self>) -> Option<f64>;

    /// Closed-form Bayes error, when known.
    fn bayes_error(&self) -> Option<f64> {
        None
    }

    fn sample_labeled<R: Rng + ?Sized>(&self, rng: &mut R) -> (PointOf<Self>, u8) {
        let x = self.sample_point(rng);
        let p = self
            .eta(&x)
            .expect("laws without a regression function must override sample_labeled");
        let y = (rng.gen::<f64>() < p) as u8;
        (x, y)
    }

    fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> FiniteSample<PointOf<Self>> {
        let (points, labels): (Vec<_>, Vec<_>) = (0..n).map(|_| self.sample_labeled(rng)).unzip();
        FiniteSample::labeled(points, labels).expect("labels are 0 or 1")
    }
}
