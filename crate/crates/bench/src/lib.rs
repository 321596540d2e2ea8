//! Seeded inputs shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` scores on a coarse grid (plenty of ties) with roughly 40% positives.
pub fn scored_labels(n: usize, seed: u64) -> (Vec<f64>, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
    let scores = labels
        .iter()
        .map(|&l| ((rng.random::<f64>() + if l { 0.2 } else { 0.0 }) * 50.0).round() / 50.0)
        .collect();
    (scores, labels)
}

/// `n` uniform vectors of length `dim`.
pub fn vectors(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
}

/// A chatty response wrapping a fenced list of `n` items.
pub fn list_response(n: usize) -> String {
    let items: Vec<String> = (0..n).map(|i| format!("'Attribute number {i}'")).collect();
    format!(
        "Sure! Here are some options:\n```python\n[{}]\n```\nLet me know if you need more.",
        items.join(", ")
    )
}

/// `reps` runs of `len` items drawn from a vocabulary of `vocab` names.
pub fn runs(reps: usize, len: usize, vocab: usize, seed: u64) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..reps)
        .map(|_| (0..len).map(|_| format!("item {}", rng.random_range(0..vocab))).collect())
        .collect()
}
