//! Accuracy, per-class precision/recall/F1 and macro-F1 over the 3 classes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::records::SentimentLabel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: SentimentLabel,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub n: usize,
    pub accuracy: f64,
    /// Unweighted mean of the three per-class F1 scores.
    pub macro_f1: f64,
    pub per_class: [ClassMetrics; 3],
    /// Rows are true classes, columns predicted, both in class order.
    pub confusion: [[usize; 3]; 3],
    /// Classes with no true instances; they still count toward macro-F1 with F1 = 0.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub absent_classes: Vec<SentimentLabel>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Metrics {
    pub fn from_confusion(confusion: [[usize; 3]; 3]) -> Result<Self> {
        let n: usize = confusion.iter().flatten().sum();
        if n == 0 {
            return Err(Error::Input("metrics need at least one prediction".into()));
        }
        let correct: usize = (0..3).map(|k| confusion[k][k]).sum();
        let per_class = std::array::from_fn(|k| {
            let tp = confusion[k][k];
            let support: usize = confusion[k].iter().sum();
            let predicted: usize = (0..3).map(|r| confusion[r][k]).sum();
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            ClassMetrics {
                label: SentimentLabel::from_index(k),
                precision,
                recall,
                f1,
                support,
            }
        });
        let macro_f1 = per_class.iter().map(|c: &ClassMetrics| c.f1).sum::<f64>() / 3.0;
        let absent_classes = per_class.iter().filter(|c| c.support == 0).map(|c| c.label).collect();
        Ok(Metrics {
            n,
            accuracy: correct as f64 / n as f64,
            macro_f1,
            per_class,
            confusion,
            absent_classes,
        })
    }
}

pub fn confusion_matrix(y_true: &[SentimentLabel], y_pred: &[SentimentLabel]) -> Result<[[usize; 3]; 3]> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Input(format!(
            "{} true labels but {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    let mut c = [[0usize; 3]; 3];
    for (t, p) in y_true.iter().zip(y_pred) {
        c[t.index()][p.index()] += 1;
    }
    Ok(c)
}

pub fn metrics(y_true: &[SentimentLabel], y_pred: &[SentimentLabel]) -> Result<Metrics> {
    Metrics::from_confusion(confusion_matrix(y_true, y_pred)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use SentimentLabel::*;

    fn expand(c: [[usize; 3]; 3]) -> (Vec<SentimentLabel>, Vec<SentimentLabel>) {
        let mut t = Vec::new();
        let mut p = Vec::new();
        for (i, row) in c.iter().enumerate() {
            for (j, &n) in row.iter().enumerate() {
                for _ in 0..n {
                    t.push(SentimentLabel::from_index(i));
                    p.push(SentimentLabel::from_index(j));
                }
            }
        }
        (t, p)
    }

    #[test]
    fn identity() {
        let y = vec![Positive, Neutral, Negative, Neutral];
        let m = metrics(&y, &y).unwrap();
        assert_eq!((m.accuracy, m.macro_f1), (1.0, 1.0));
    }

    #[test]
    fn hand_checked_confusion() {
        let (t, p) = expand([[5, 0, 0], [0, 0, 5], [0, 0, 5]]);
        let m = metrics(&t, &p).unwrap();
        assert!((m.accuracy - 10.0 / 15.0).abs() < 1e-15);
        // F1: positive 1, neutral 0, negative 2·(1/2)·1/(3/2) = 2/3
        assert_eq!(m.per_class[0].f1, 1.0);
        assert_eq!(m.per_class[1].f1, 0.0);
        assert!((m.per_class[2].f1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.macro_f1 - 5.0 / 9.0).abs() < 1e-15);
        assert_eq!(m.confusion.map(|r| r.iter().sum::<usize>()), [5, 5, 5]);
    }

    #[test]
    fn single_class_uses_zero_convention() {
        let y = vec![Neutral; 7];
        let m = metrics(&y, &y).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert!((m.macro_f1 - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.absent_classes, vec![Positive, Negative]);
    }

    #[test]
    fn errors() {
        assert!(metrics(&[], &[]).is_err());
        assert!(metrics(&[Positive], &[]).is_err());
    }
}
