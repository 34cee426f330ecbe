#![allow(dead_code)]

pub mod grammar;
pub mod oracles;

use rand::Rng;

/// Short random sentence pairs over a small vocabulary, so that n-gram
/// overlaps, repeats and transpositions all occur. References are never
/// empty.
pub fn random_pairs<R: Rng>(rng: &mut R, count: usize) -> Vec<(String, String)> {
    const VOCAB: [&str; 7] = ["a", "b", "c", "the", "cat", "sat", "ab"];
    let sentence = |rng: &mut R, min: usize| -> String {
        let n = rng.random_range(min..=8);
        (0..n)
            .map(|_| VOCAB[rng.random_range(0..VOCAB.len())])
            .collect::<Vec<_>>()
            .join(" ")
    };
    (0..count)
        .map(|_| {
            let r = sentence(rng, 1);
            let h = if rng.random_bool(0.2) {
                // a permutation of the reference exercises shifts
                let mut w: Vec<&str> = r.split(' ').collect();
                let i = rng.random_range(0..w.len());
                let j = rng.random_range(0..w.len());
                w.swap(i, j);
                w.join(" ")
            } else {
                sentence(rng, 0)
            };
            (h, r)
        })
        .collect()
}
