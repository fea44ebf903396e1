//! Meta-classifier over the signal layout: multinomial logistic regression and
//! gradient-boosted trees, with cross-validated evaluation.

pub mod baseline;
pub mod crossval;
pub mod gbt;
pub mod logreg;
pub mod metrics;
pub mod report;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::records::{ProbTriple, SentimentLabel};
use crate::signals::FeatureMatrix;

pub use baseline::{argmax_baseline, BaselineReport};
pub use crossval::{crossval, grid_search, CvConfig, EvalReport};
pub use gbt::{train_gbt, GbtHyper, GbtModel};
pub use logreg::{train_logreg, LogRegHyper, LogRegModel};
pub use metrics::{metrics, Metrics};
pub use report::{render_detail, render_table, TableRow};

/// Labeled, rectangular, finite feature rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub record_ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<SentimentLabel>,
    /// Optional per-row subset tag (annotator agreement level).
    pub groups: Vec<Option<String>>,
}

impl Dataset {
    pub fn new(feature_names: Vec<String>, rows: Vec<Vec<f64>>, labels: Vec<SentimentLabel>) -> Result<Self> {
        let n = rows.len();
        let ids = (0..n).map(|i| i.to_string()).collect();
        Self::with_ids(feature_names, ids, rows, labels, vec![None; n])
    }

    pub fn with_ids(
        feature_names: Vec<String>,
        record_ids: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<SentimentLabel>,
        groups: Vec<Option<String>>,
    ) -> Result<Self> {
        let n = rows.len();
        if labels.len() != n || record_ids.len() != n || groups.len() != n {
            return Err(Error::Dataset(format!(
                "{n} rows but {} labels, {} ids, {} group tags",
                labels.len(),
                record_ids.len(),
                groups.len()
            )));
        }
        let d = feature_names.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Dataset(format!(
                    "row {} ({}) has {} values, expected {d}",
                    i,
                    record_ids[i],
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::Dataset(format!(
                    "row {} ({}) has non-finite value {v}",
                    i, record_ids[i]
                )));
            }
        }
        Ok(Dataset {
            feature_names,
            record_ids,
            rows,
            labels,
            groups,
        })
    }

    /// Requires a label on every row. `groups` may be empty (no subset tags).
    pub fn from_matrix(m: FeatureMatrix, groups: Vec<Option<String>>) -> Result<Self> {
        let n = m.rows.len();
        let labels = m
            .labels
            .iter()
            .zip(&m.ids)
            .map(|(l, id)| l.ok_or_else(|| Error::Dataset(format!("record {id} has no label"))))
            .collect::<Result<Vec<_>>>()?;
        let groups = if groups.is_empty() { vec![None; n] } else { groups };
        Self::with_ids(m.names, m.ids, m.rows, labels, groups)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn class_counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for l in &self.labels {
            c[l.index()] += 1;
        }
        c
    }

    pub(crate) fn require_trainable(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::Dataset("empty dataset".into()));
        }
        if self.class_counts().iter().filter(|&&c| c > 0).count() < 2 {
            return Err(Error::Dataset("training needs at least two distinct classes".into()));
        }
        Ok(())
    }

    /// Rows at `idx`, in that order.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            feature_names: self.feature_names.clone(),
            record_ids: idx.iter().map(|&i| self.record_ids[i].clone()).collect(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            groups: idx.iter().map(|&i| self.groups[i].clone()).collect(),
        }
    }

    /// Row order independent of input order: lexicographic on feature bit
    /// patterns, then label. Training runs over this order so that permuting
    /// the input rows yields bit-identical models.
    pub(crate) fn canonical_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| {
            for (x, y) in self.rows[a].iter().zip(&self.rows[b]) {
                match x.total_cmp(y) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            self.labels[a].cmp(&self.labels[b])
        });
        idx
    }
}

/// Per-feature mean and standard deviation from training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Population statistics; constant features get stddev 1.
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let d = rows.first().map_or(0, Vec::len);
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, std }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

/// Numerically stable softmax with every component strictly positive.
pub(crate) fn softmax3(z: [f64; 3]) -> [f64; 3] {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e = z.map(|v| ((v - m).exp()).max(f64::MIN_POSITIVE));
    let s: f64 = e.iter().sum();
    e.map(|v| v / s)
}

/// Prediction: argmax label (ties to positive < neutral < negative) and posterior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: SentimentLabel,
    pub posterior: ProbTriple,
}

impl Prediction {
    pub(crate) fn from_posterior(p: [f64; 3]) -> Self {
        let posterior = ProbTriple::from_normalized(p);
        Prediction {
            label: posterior.argmax(),
            posterior,
        }
    }
}

/// Learner choice with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "lowercase")]
pub enum Learner {
    Logreg(LogRegHyper),
    Gbt(GbtHyper),
}

impl Learner {
    pub fn name(&self) -> &'static str {
        match self {
            Learner::Logreg(_) => "logreg",
            Learner::Gbt(_) => "gbt",
        }
    }

    pub fn train(&self, data: &Dataset) -> Result<Model> {
        Ok(match self {
            Learner::Logreg(h) => Model::Logreg(train_logreg(data, h)?),
            Learner::Gbt(h) => Model::Gbt(train_gbt(data, h)?),
        })
    }
}

/// A trained meta-classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Model {
    Logreg(LogRegModel),
    Gbt(GbtModel),
}

impl Model {
    pub fn n_features(&self) -> usize {
        match self {
            Model::Logreg(m) => m.n_features(),
            Model::Gbt(m) => m.n_features(),
        }
    }

    pub fn predict(&self, features: &[f64]) -> Result<Prediction> {
        match self {
            Model::Logreg(m) => m.predict(features),
            Model::Gbt(m) => m.predict(features),
        }
    }
}

/// Predict with any trained model.
pub fn predict(model: &Model, features: &[f64]) -> Result<Prediction> {
    model.predict(features)
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension { expected, got });
    }
    Ok(())
}

pub const MODEL_FORMAT: &str = "finsent-model";
pub const MODEL_VERSION: u32 = 1;

/// On-disk model document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format: String,
    pub version: u32,
    pub feature_names: Vec<String>,
    /// Free-form descriptor of how the features were produced.
    pub config: serde_json::Value,
    pub model: Model,
}

impl ModelDocument {
    pub fn new(feature_names: Vec<String>, config: serde_json::Value, model: Model) -> Self {
        ModelDocument {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            feature_names,
            config,
            model,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(s)?;
        if doc.format != MODEL_FORMAT || doc.version != MODEL_VERSION {
            return Err(Error::Input(format!(
                "unsupported model document {} v{}",
                doc.format, doc.version
            )));
        }
        check_dim(doc.feature_names.len(), doc.model.n_features())?;
        if let Model::Gbt(m) = &doc.model {
            m.validate()?;
        }
        Ok(doc)
    }
}
