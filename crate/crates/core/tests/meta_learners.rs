mod common;

use common::*;
use finsent::meta::gbt::train_gbt_traced;
use finsent::meta::{train_gbt, train_logreg, Dataset, GbtHyper, Learner, LogRegHyper, Model, ModelDocument};
use finsent::{Error, SentimentLabel};

/// Nearest-centroid classifier: an independent check that a fixture is separable.
fn nearest_centroid_accuracy(data: &Dataset) -> f64 {
    let d = data.n_features();
    let mut sums = [vec![0.0; d], vec![0.0; d], vec![0.0; d]];
    let counts = data.class_counts();
    for (x, y) in data.rows.iter().zip(&data.labels) {
        for j in 0..d {
            sums[y.index()][j] += x[j];
        }
    }
    let hits = data
        .rows
        .iter()
        .zip(&data.labels)
        .filter(|(x, y)| {
            let best = (0..3)
                .filter(|&c| counts[c] > 0)
                .min_by(|&a, &b| {
                    let dist = |c: usize| {
                        (0..d)
                            .map(|j| (x[j] - sums[c][j] / counts[c] as f64).powi(2))
                            .sum::<f64>()
                    };
                    dist(a).total_cmp(&dist(b))
                })
                .unwrap();
            best == y.index()
        })
        .count();
    hits as f64 / data.len() as f64
}

#[test]
fn logreg_fits_separable_clusters() {
    let data = two_clusters(200, 1);
    assert_eq!(nearest_centroid_accuracy(&data), 1.0);
    let model = Model::Logreg(train_logreg(&data, &LogRegHyper::default()).unwrap());
    assert_eq!(training_accuracy(&model, &data), 1.0);

    let data = three_clusters(300, 2);
    assert_eq!(nearest_centroid_accuracy(&data), 1.0);
    let model = Model::Logreg(train_logreg(&data, &LogRegHyper::default()).unwrap());
    assert_eq!(training_accuracy(&model, &data), 1.0);
}

#[test]
fn heavy_ridge_collapses_to_the_prior() {
    let mut data = three_clusters(300, 3);
    // Unbalance: relabel a third of the positives as neutral -> neutral majority.
    for i in (0..300).step_by(6) {
        data.labels[i] = SentimentLabel::Neutral;
    }
    let counts = data.class_counts();
    let m = train_logreg(
        &data,
        &LogRegHyper {
            l2_lambda: 1e6,
            ..LogRegHyper::default()
        },
    )
    .unwrap();
    assert!(m.weights.iter().flatten().all(|w| w.abs() < 1e-4));
    for x in &data.rows {
        let p = m.predict(x).unwrap();
        assert_eq!(p.label, SentimentLabel::Neutral);
        for (q, &count) in p.posterior.as_array().iter().zip(&counts) {
            let prior = count as f64 / data.len() as f64;
            assert!((q - prior).abs() < 1e-3);
        }
    }
}

#[test]
fn logreg_is_invariant_to_row_order() {
    let data = null_dataset(120, 4, 5);
    let a = train_logreg(&data, &LogRegHyper::default()).unwrap();
    let rev: Vec<usize> = (0..data.len()).rev().collect();
    let b = train_logreg(&data.subset(&rev), &LogRegHyper::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn logreg_absorbs_feature_scaling() {
    let data = null_dataset(150, 3, 6);
    let mut scaled = data.clone();
    for row in &mut scaled.rows {
        row[1] *= 1000.0;
    }
    let a = train_logreg(&data, &LogRegHyper::default()).unwrap();
    let b = train_logreg(&scaled, &LogRegHyper::default()).unwrap();
    for (x, xs) in data.rows.iter().zip(&scaled.rows) {
        let (pa, pb) = (a.predict(x).unwrap(), b.predict(xs).unwrap());
        assert_eq!(pa.label, pb.label);
        for c in 0..3 {
            assert!((pa.posterior.as_array()[c] - pb.posterior.as_array()[c]).abs() < 1e-9);
        }
    }
}

#[test]
fn posteriors_are_strictly_positive_and_normalized() {
    let data = three_clusters(90, 7);
    for learner in [
        Learner::Logreg(LogRegHyper::default()),
        Learner::Gbt(GbtHyper::default()),
    ] {
        let model = learner.train(&data).unwrap();
        for x in &data.rows {
            let p = model.predict(x).unwrap().posterior.as_array();
            assert!(p.iter().all(|&v| v > 0.0));
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert!(matches!(
            model.predict(&[0.0]),
            Err(Error::Dimension { expected: 3, got: 1 })
        ));
    }
}

#[test]
fn gbt_solves_xor() {
    let data = xor(200, 8);
    // Depth-2 lookup oracle on the coordinate signs.
    let oracle = data
        .rows
        .iter()
        .zip(&data.labels)
        .filter(|(x, y)| {
            let same = (x[0] > 0.0) == (x[1] > 0.0);
            (if same {
                SentimentLabel::Positive
            } else {
                SentimentLabel::Negative
            }) == **y
        })
        .count();
    assert_eq!(oracle, data.len());

    let hyper = GbtHyper {
        n_rounds: 50,
        max_depth: 2,
        ..GbtHyper::default()
    };
    let model = Model::Gbt(train_gbt(&data, &hyper).unwrap());
    assert!(training_accuracy(&model, &data) >= 0.95);

    let linear = Model::Logreg(train_logreg(&data, &LogRegHyper::default()).unwrap());
    assert!(training_accuracy(&linear, &data) < 0.8);
}

#[test]
fn gbt_is_deterministic_given_seed() {
    let data = three_clusters(150, 9);
    let h = GbtHyper::default();
    let a = train_gbt(&data, &h).unwrap();
    let b = train_gbt(&data, &h).unwrap();
    assert_eq!(a, b);
    let c = train_gbt(&data, &GbtHyper { seed: 7, ..h }).unwrap();
    assert_ne!(a, c);
}

#[test]
fn gbt_training_loss_never_increases() {
    for subsample in [1.0, 0.8] {
        let data = xor(200, 10);
        let hyper = GbtHyper {
            n_rounds: 60,
            subsample,
            ..GbtHyper::default()
        };
        let (_, trace) = train_gbt_traced(&data, &hyper).unwrap();
        assert_eq!(trace.len(), 61);
        for w in trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "subsample {subsample}: {} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn model_documents_round_trip() {
    let data = three_clusters(60, 11);
    for learner in [
        Learner::Logreg(LogRegHyper::default()),
        Learner::Gbt(GbtHyper {
            n_rounds: 20,
            ..GbtHyper::default()
        }),
    ] {
        let model = learner.train(&data).unwrap();
        let doc = ModelDocument::new(
            data.feature_names.clone(),
            serde_json::json!({"ablation": "full"}),
            model,
        );
        let back = ModelDocument::from_json(&doc.to_json().unwrap()).unwrap();
        assert_eq!(back, doc);
        for x in &data.rows {
            assert_eq!(back.model.predict(x).unwrap(), doc.model.predict(x).unwrap());
        }
    }
}

#[test]
fn single_class_training_is_rejected() {
    let data = Dataset::new(names(1), vec![vec![0.0], vec![1.0]], vec![SentimentLabel::Neutral; 2]).unwrap();
    assert!(train_logreg(&data, &LogRegHyper::default()).is_err());
    assert!(train_gbt(&data, &GbtHyper::default()).is_err());
}
