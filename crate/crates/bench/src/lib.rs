//! Fixtures shared by the benchmarks.

use nkl_core::davies::{davies_sample_labeled, DaviesParams, DaviesPoint};
use nkl_core::FiniteSample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn uniform_sample(n: usize, seed: u64) -> FiniteSample<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    FiniteSample::new((0..n).map(|_| rng.gen::<f64>()).collect())
}

pub fn davies_sample(params: &DaviesParams, n: usize, seed: u64) -> FiniteSample<DaviesPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    davies_sample_labeled(params, n, &mut rng).expect("n > 0")
}
