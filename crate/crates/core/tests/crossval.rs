mod common;

use common::*;
use finsent::meta::{crossval, CvConfig, GbtHyper, Learner, LogRegHyper};

#[test]
fn separable_fixture_scores_perfectly() {
    let data = three_clusters(150, 1);
    for learner in [
        Learner::Logreg(LogRegHyper::default()),
        Learner::Gbt(GbtHyper::default()),
    ] {
        let r = crossval(&data, &learner, &CvConfig::default()).unwrap();
        assert_eq!(r.aggregate.accuracy, 1.0, "{}", learner.name());
        assert_eq!(r.aggregate.macro_f1, 1.0);
        assert_eq!(r.folds.len(), 5);
        assert_eq!(r.folds.iter().map(|f| f.n_test).sum::<usize>(), 150);
    }
}

#[test]
fn shuffled_labels_score_near_chance() {
    let learner = Learner::Logreg(LogRegHyper {
        max_iters: 300,
        ..LogRegHyper::default()
    });
    let accs: Vec<f64> = (0..100)
        .map(|seed| {
            let data = null_dataset(300, 5, 1000 + seed);
            let cv = CvConfig {
                seed,
                ..CvConfig::default()
            };
            crossval(&data, &learner, &cv).unwrap().aggregate.accuracy
        })
        .collect();
    let mean = accs.iter().sum::<f64>() / accs.len() as f64;
    assert!((mean - 1.0 / 3.0).abs() < 0.02, "mean {mean}");
    let inside = accs.iter().filter(|a| (*a - 1.0 / 3.0).abs() <= 0.08).count();
    assert!(inside >= 97, "{inside}/100 within 1/3 ± 0.08");
}

#[test]
fn reports_are_deterministic() {
    let data = null_dataset(90, 3, 4);
    for learner in [
        Learner::Logreg(LogRegHyper::default()),
        Learner::Gbt(GbtHyper {
            n_rounds: 30,
            ..GbtHyper::default()
        }),
    ] {
        let a = crossval(&data, &learner, &CvConfig::default()).unwrap();
        let b = crossval(&data, &learner, &CvConfig::default()).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}

#[test]
fn subset_tags_produce_subset_metrics() {
    let mut data = three_clusters(60, 2);
    for (i, g) in data.groups.iter_mut().enumerate() {
        *g = Some(if i % 2 == 0 { "100" } else { "50" }.to_string());
    }
    let r = crossval(&data, &Learner::Logreg(LogRegHyper::default()), &CvConfig::default()).unwrap();
    assert_eq!(r.subsets.keys().collect::<Vec<_>>(), ["100", "50"]);
    assert_eq!(r.subsets["100"].n + r.subsets["50"].n, 60);
}

#[test]
fn k_exceeding_rows_is_rejected() {
    let data = three_clusters(4, 3);
    assert!(crossval(&data, &Learner::Logreg(LogRegHyper::default()), &CvConfig::default()).is_err());
}
