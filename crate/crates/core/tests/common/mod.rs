//! Fixtures shared by the integration tests.
#![allow(dead_code)]

use finsent::meta::Dataset;
use finsent::SentimentLabel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn names(d: usize) -> Vec<String> {
    (0..d).map(|j| format!("x{j}")).collect()
}

/// Two tight clusters far apart: positive near (-5, -5), negative near (5, 5).
pub fn two_clusters(n: usize, seed: u64) -> Dataset {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let (c, label) = if i % 2 == 0 {
            (-5.0, SentimentLabel::Positive)
        } else {
            (5.0, SentimentLabel::Negative)
        };
        rows.push(vec![c + r.gen_range(-1.0..1.0), c + r.gen_range(-1.0..1.0)]);
        labels.push(label);
    }
    Dataset::new(names(2), rows, labels).unwrap()
}

/// Three well-separated clusters, one per class.
pub fn three_clusters(n: usize, seed: u64) -> Dataset {
    let centers = [[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]];
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = centers[i % 3];
        rows.push(vec![
            c[0] + r.gen_range(-1.0..1.0),
            c[1] + r.gen_range(-1.0..1.0),
            r.gen_range(-1.0..1.0),
        ]);
        labels.push(SentimentLabel::from_index(i % 3));
    }
    Dataset::new(names(3), rows, labels).unwrap()
}

/// XOR: positive when both coordinates share a sign, negative otherwise.
pub fn xor(n: usize, seed: u64) -> Dataset {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let sx = if i % 2 == 0 { 1.0 } else { -1.0 };
        let sy = if (i / 2) % 2 == 0 { 1.0 } else { -1.0 };
        rows.push(vec![
            sx * (1.0 + r.gen_range(-0.5..0.5)),
            sy * (1.0 + r.gen_range(-0.5..0.5)),
        ]);
        labels.push(if sx == sy {
            SentimentLabel::Positive
        } else {
            SentimentLabel::Negative
        });
    }
    Dataset::new(names(2), rows, labels).unwrap()
}

/// Gaussian-ish features with balanced labels that carry no information.
pub fn null_dataset(n: usize, d: usize, seed: u64) -> Dataset {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n)
        .map(|_| (0..d).map(|_| r.gen_range(-1.0..1.0)).collect())
        .collect();
    let mut labels: Vec<SentimentLabel> = (0..n).map(|i| SentimentLabel::from_index(i % 3)).collect();
    for i in (1..n).rev() {
        labels.swap(i, r.gen_range(0..=i));
    }
    Dataset::new(names(d), rows, labels).unwrap()
}

pub fn training_accuracy(model: &finsent::meta::Model, data: &Dataset) -> f64 {
    let hits = data
        .rows
        .iter()
        .zip(&data.labels)
        .filter(|(x, y)| model.predict(x).unwrap().label == **y)
        .count();
    hits as f64 / data.len() as f64
}
