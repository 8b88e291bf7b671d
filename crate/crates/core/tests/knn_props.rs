use nkl_core::harness::{adjoined_in_degree, Selection};
use nkl_core::knn::{eta_n, lipschitz_extend, predict};
use nkl_core::metric::{candidate_distances, strictly_less};
use nkl_core::spaces::{build_zero_one, random_words, RealLine, WordSpace};
use nkl_core::{k_nearest, FiniteSample, MetricSpace, Query, TieBreaker};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid_sample() -> impl Strategy<Value = (Vec<f64>, Vec<u8>)> {
    (2usize..25).prop_flat_map(|n| {
        (
            prop::collection::vec((0u32..8).prop_map(|v| v as f64 / 2.0), n),
            prop::collection::vec(0u8..2, n),
        )
    })
}

fn tie_breaker(uniform: bool, seed: u64) -> TieBreaker {
    if uniform {
        TieBreaker::uniform(seed)
    } else {
        TieBreaker::IndexOrder
    }
}

proptest! {
    /// Exactly k neighbors, distinct, with every open-ball candidate chosen
    /// and nothing farther than the radius.
    #[test]
    fn neighbor_set_shape((pts, _) in grid_sample(), x in 0u32..8, k_frac in 0.0f64..1.0, uniform: bool, seed: u64) {
        let line = RealLine::new();
        let sample = FiniteSample::new(pts);
        let k = 1 + ((sample.len() - 1) as f64 * k_frac) as usize;
        let x = x as f64 / 2.0;
        let ns = k_nearest(&line, &sample, Query::Point(&x), k, &mut tie_breaker(uniform, seed)).unwrap();
        prop_assert_eq!(ns.len(), k);
        let mut dedup = ns.indices.clone();
        dedup.dedup();
        prop_assert_eq!(dedup.len(), k);
        for (j, d) in candidate_distances(&line, &sample, Query::Point(&x)).unwrap() {
            if strictly_less(&d, &ns.radius) {
                prop_assert!(ns.indices.contains(&j));
            }
            if strictly_less(&ns.radius, &d) {
                prop_assert!(!ns.indices.contains(&j));
            }
        }
    }

    #[test]
    fn prediction_thresholds_eta((pts, labels) in grid_sample(), x in 0u32..8, k_frac in 0.0f64..1.0, seed: u64) {
        let line = RealLine::new();
        let sample = FiniteSample::labeled(pts, labels).unwrap();
        let k = 1 + ((sample.len() - 1) as f64 * k_frac) as usize;
        let x = x as f64 / 2.0;
        let eta = eta_n(&line, &sample, &x, k, &mut TieBreaker::uniform(seed)).unwrap();
        let y = predict(&line, &sample, &x, k, &mut TieBreaker::uniform(seed)).unwrap();
        prop_assert_eq!(y, (eta >= 0.5) as u8);
    }

    /// The extension is 1-Lipschitz and agrees with f on Q.
    #[test]
    fn lipschitz_extension(
        q in prop::collection::vec((-5.0f64..5.0, 0.0f64..1.0), 1..10),
        a in -6.0f64..6.0,
        b in -6.0f64..6.0,
    ) {
        let line = RealLine::new();
        // make f itself 1-Lipschitz on Q so it is reproduced there
        let f: Vec<(f64, f64)> = q
            .iter()
            .map(|&(y, _)| (y, q.iter().map(|&(z, v)| v + (y - z).abs()).fold(1.0, f64::min)))
            .collect();
        let (fa, fb) = (lipschitz_extend(&line, &f, &a).unwrap(), lipschitz_extend(&line, &f, &b).unwrap());
        prop_assert!((fa - fb).abs() <= line.distance(&a, &b).unwrap().value + 1e-12);
        for (y, v) in &f {
            prop_assert!((lipschitz_extend(&line, &f, y).unwrap() - v).abs() < 1e-12);
        }
    }

    /// Uniform ties on a tie-free ultrametric sample change nothing.
    #[test]
    fn uniform_and_index_agree_without_ties(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sample = nkl_core::spaces::no_tie_groups(2, 3, 2, &mut rng);
        for i in 0..sample.len() {
            let a = k_nearest(&WordSpace, &sample, Query::Member(i), 2, &mut TieBreaker::IndexOrder).unwrap();
            let b = k_nearest(&WordSpace, &sample, Query::Member(i), 2, &mut TieBreaker::uniform(seed)).unwrap();
            prop_assert!(!a.has_tie());
            prop_assert_eq!(a.indices, b.indices);
        }
    }
}

/// With every point at distance 1, uniform ties pick any one member as the
/// adjoined point's neighbor with frequency about k/n, while raw ties count
/// all of them. The adjoined point itself is never a candidate of its own
/// query.
#[test]
fn fraction_transfer_under_uniform_ties() {
    let (space, sample) = build_zero_one(8);
    let x = 1000u64;
    let (k, reps) = (2usize, 4000u64);
    let mut total = 0usize;
    for r in 0..reps {
        let mut tie = TieBreaker::uniform(r);
        total += adjoined_in_degree(&space, &sample, &x, k, Selection::Break(&mut tie)).unwrap();
    }
    // each of the 8 queries picks slot i with probability k/8
    let mean = total as f64 / reps as f64;
    let expect = k as f64;
    let se = (8.0 * (k as f64 / 8.0) * (1.0 - k as f64 / 8.0) / reps as f64).sqrt();
    assert!((mean - expect).abs() < 4.0 * se, "mean {mean} vs {expect}");
    assert_eq!(
        adjoined_in_degree(&space, &sample, &x, k, Selection::RawTies).unwrap(),
        8
    );
}

#[test]
fn index_order_is_deterministic_on_words() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sample = random_words(30, 3, 2, &mut rng);
    let run = || {
        (0..sample.len())
            .map(|i| {
                k_nearest(&WordSpace, &sample, Query::Member(i), 4, &mut TieBreaker::IndexOrder)
                    .unwrap()
                    .indices
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
}
