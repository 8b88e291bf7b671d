//! Finite words under the first-difference ultrametric `2^(-m)`.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::metric::{DeclaredDimension, Dyadic, Exactness, FiniteSample, MetricSpace};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<u32>);

/// Equal-length words; `rho(u, v) = 2^(-m)` with `m` the first (1-based)
/// position where they differ.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WordSpace;

impl MetricSpace for WordSpace {
    type Point = Word;
    type Dist = Dyadic;

    #[inline]
    fn distance(&self, a: &Word, b: &Word) -> Result<Dyadic> {
        if a.0.len() != b.0.len() {
            return Err(Error::DepthMismatch {
                left: a.0.len(),
                right: b.0.len(),
            });
        }
        Ok(match a.0.iter().zip(&b.0).position(|(x, y)| x != y) {
            None => Dyadic::ZERO,
            Some(i) => Dyadic::pow2(-(i as i32 + 1)),
        })
    }

    fn exactness(&self) -> Exactness {
        Exactness::Exact
    }

    fn name(&self) -> String {
        "words".into()
    }

    fn declared(&self) -> DeclaredDimension {
        DeclaredDimension {
            nagata: Some(0),
            beta: Some(1),
            scale: None,
        }
    }
}

/// `n` words of length `len`, letters i.i.d. uniform on `0..alphabet`.
pub fn random_words<R: Rng + ?Sized>(n: usize, len: usize, alphabet: u32, rng: &mut R) -> FiniteSample<Word> {
    let pts = (0..n)
        .map(|_| Word((0..len).map(|_| rng.gen_range(0..alphabet)).collect()))
        .collect();
    FiniteSample::new(pts)
}

/// A sample without distance ties for the k-NN rule: `groups` groups of
/// `k + 1` points each, hung from a random tree of depth `depth`.
///
/// Every point's smallest closed ball with at least `k + 1` points is its own
/// group, so `|B(x, eps_kNN(x))| = k + 1` for all members.
pub fn no_tie_groups<R: Rng + ?Sized>(k: usize, groups: usize, depth: usize, rng: &mut R) -> FiniteSample<Word> {
    let mut pts = Vec::with_capacity(groups * (k + 1));
    let suffix_len = 1 + (usize::BITS - k.leading_zeros()) as usize;
    for g in 0..groups {
        let mut prefix: Vec<u32> = (0..depth).map(|_| rng.gen_range(0..3)).collect();
        prefix.push(g as u32);
        let mut suffixes: Vec<Vec<u32>> = Vec::with_capacity(k + 1);
        while suffixes.len() < k + 1 {
            let s: Vec<u32> = (0..suffix_len).map(|_| rng.gen_range(0..2)).collect();
            if !suffixes.contains(&s) {
                suffixes.push(s);
            }
        }
        for s in suffixes {
            let mut w = prefix.clone();
            w.extend(s);
            pts.push(Word(w));
        }
    }
    pts.shuffle(rng);
    FiniteSample::new(pts)
}
