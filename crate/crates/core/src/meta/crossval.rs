//! Shuffled k-fold cross-validation and a small grid search.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{metrics, Metrics};
use super::{Dataset, GbtHyper, Learner, LogRegHyper};
use crate::error::{Error, Result};
use crate::records::SentimentLabel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub k: usize,
    pub seed: u64,
    /// Deal each class round-robin over folds instead of plain contiguous splits.
    pub stratified: bool,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            k: 5,
            seed: 42,
            stratified: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub accuracy: f64,
    pub macro_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Feature configuration descriptor, e.g. `full`, `no-roberta`.
    pub config: String,
    pub learner: Learner,
    pub cv: CvConfig,
    pub n: usize,
    pub n_features: usize,
    pub folds: Vec<FoldReport>,
    /// Pooled over all held-out predictions.
    pub aggregate: Metrics,
    /// Pooled metrics restricted to each subset tag, when rows carry tags.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub subsets: BTreeMap<String, Metrics>,
}

/// Test-fold index lists. A single seeded shuffle, then contiguous folds
/// (the first `n % k` folds take one extra row).
pub fn fold_indices(labels: &[SentimentLabel], cv: &CvConfig) -> Result<Vec<Vec<usize>>> {
    let n = labels.len();
    if cv.k < 2 {
        return Err(Error::Input(format!("k must be at least 2, got {}", cv.k)));
    }
    if cv.k > n {
        return Err(Error::Input(format!("k = {} exceeds the {n} available rows", cv.k)));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cv.seed);
    idx.shuffle(&mut rng);

    let mut folds = vec![Vec::new(); cv.k];
    if cv.stratified {
        let mut next = 0;
        for class in SentimentLabel::ALL {
            for &i in idx.iter().filter(|&&i| labels[i] == class) {
                folds[next % cv.k].push(i);
                next += 1;
            }
        }
    } else {
        let base = n / cv.k;
        let extra = n % cv.k;
        let mut start = 0;
        for (f, fold) in folds.iter_mut().enumerate() {
            let len = base + usize::from(f < extra);
            fold.extend_from_slice(&idx[start..start + len]);
            start += len;
        }
    }
    Ok(folds)
}

/// Held-out predictions for every row (in dataset order) plus per-fold reports.
pub fn crossval_predict(
    data: &Dataset,
    learner: &Learner,
    cv: &CvConfig,
) -> Result<(Vec<SentimentLabel>, Vec<FoldReport>)> {
    let folds = fold_indices(&data.labels, cv)?;
    let n = data.len();
    let mut preds: Vec<Option<SentimentLabel>> = vec![None; n];
    let mut reports = Vec::with_capacity(folds.len());
    for (f, test) in folds.iter().enumerate() {
        let mut in_test = vec![false; n];
        test.iter().for_each(|&i| in_test[i] = true);
        let train: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
        let model = learner.train(&data.subset(&train))?;
        let mut fold_true = Vec::with_capacity(test.len());
        let mut fold_pred = Vec::with_capacity(test.len());
        for &i in test {
            let p = model.predict(&data.rows[i])?.label;
            preds[i] = Some(p);
            fold_true.push(data.labels[i]);
            fold_pred.push(p);
        }
        let m = metrics(&fold_true, &fold_pred)?;
        reports.push(FoldReport {
            fold: f,
            n_train: train.len(),
            n_test: test.len(),
            accuracy: m.accuracy,
            macro_f1: m.macro_f1,
        });
    }
    let preds = preds
        .into_iter()
        .map(|p| p.expect("every row is in exactly one test fold"))
        .collect();
    Ok((preds, reports))
}

pub fn crossval(data: &Dataset, learner: &Learner, cv: &CvConfig) -> Result<EvalReport> {
    let (preds, folds) = crossval_predict(data, learner, cv)?;
    let aggregate = metrics(&data.labels, &preds)?;

    let mut by_group: BTreeMap<String, (Vec<SentimentLabel>, Vec<SentimentLabel>)> = BTreeMap::new();
    for ((g, t), p) in data.groups.iter().zip(&data.labels).zip(&preds) {
        if let Some(g) = g {
            let e = by_group.entry(g.clone()).or_default();
            e.0.push(*t);
            e.1.push(*p);
        }
    }
    let subsets = by_group
        .into_iter()
        .map(|(g, (t, p))| metrics(&t, &p).map(|m| (g, m)))
        .collect::<Result<_>>()?;

    Ok(EvalReport {
        config: "custom".into(),
        learner: learner.clone(),
        cv: cv.clone(),
        n: data.len(),
        n_features: data.n_features(),
        folds,
        aggregate,
        subsets,
    })
}

/// A small grid around the default hyperparameters of `learner`.
pub fn default_grid(learner: &str, seed: u64) -> Vec<Learner> {
    match learner {
        "gbt" => {
            let mut out = Vec::new();
            for n_rounds in [100, 200] {
                for learning_rate in [0.05, 0.1] {
                    for max_depth in [2, 4] {
                        out.push(Learner::Gbt(GbtHyper {
                            n_rounds,
                            learning_rate,
                            max_depth,
                            seed,
                            ..GbtHyper::default()
                        }));
                    }
                }
            }
            out
        }
        _ => [1e-3, 1e-2, 1e-1, 1.0]
            .into_iter()
            .map(|l2_lambda| {
                Learner::Logreg(LogRegHyper {
                    l2_lambda,
                    ..LogRegHyper::default()
                })
            })
            .collect(),
    }
}

/// Cross-validate every candidate; the best by accuracy, then macro-F1, is
/// returned first (earlier candidates win exact ties).
pub fn grid_search(data: &Dataset, candidates: &[Learner], cv: &CvConfig) -> Result<Vec<EvalReport>> {
    let mut reports = candidates
        .iter()
        .map(|l| crossval(data, l, cv))
        .collect::<Result<Vec<_>>>()?;
    reports.sort_by(|a, b| {
        b.aggregate
            .accuracy
            .total_cmp(&a.aggregate.accuracy)
            .then(b.aggregate.macro_f1.total_cmp(&a.aggregate.macro_f1))
    });
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_partition_rows() {
        let labels = vec![SentimentLabel::Positive; 23];
        let folds = fold_indices(&labels, &CvConfig::default()).unwrap();
        assert_eq!(folds.iter().map(Vec::len).collect::<Vec<_>>(), [5, 5, 5, 4, 4]);
        let mut all: Vec<usize> = folds.concat();
        all.sort();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
    }

    #[test]
    fn stratified_folds_balance_classes() {
        let labels: Vec<_> = (0..30).map(|i| SentimentLabel::from_index(i % 3)).collect();
        let cv = CvConfig {
            stratified: true,
            ..CvConfig::default()
        };
        for f in fold_indices(&labels, &cv).unwrap() {
            assert_eq!(f.len(), 6);
            for c in SentimentLabel::ALL {
                assert_eq!(f.iter().filter(|&&i| labels[i] == c).count(), 2);
            }
        }
    }

    #[test]
    fn k_larger_than_n_is_an_error() {
        let labels = vec![SentimentLabel::Neutral; 3];
        assert!(fold_indices(&labels, &CvConfig::default()).is_err());
    }
}
