//! Gradient-boosted regression trees for multiclass log-loss.
//!
//! Each round fits one tree per class to the softmax gradient
//! `g = p_k - y_k` and hessian `h = p_k (1 - p_k)`, using exact greedy splits
//! over sorted feature values. Split gain is
//! `G_L²/(H_L+λ) + G_R²/(H_R+λ) - G²/(H+λ)` and leaf weights are
//! `-G/(H+λ)`, shrunk by the learning rate when summed.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_dim, softmax3, Dataset, Prediction};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtHyper {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub subsample: f64,
    pub lambda_leaf: f64,
    pub seed: u64,
}

impl Default for GbtHyper {
    fn default() -> Self {
        GbtHyper {
            n_rounds: 200,
            learning_rate: 0.1,
            max_depth: 4,
            min_leaf: 5,
            subsample: 0.8,
            lambda_leaf: 1.0,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
                Node::Leaf { value } => return value,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub n_features: usize,
    /// Initial log-odds per class (log class priors).
    pub base_score: [f64; 3],
    /// `trees[round][class]`.
    pub trees: Vec<[Tree; 3]>,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub n_rounds: usize,
    pub min_leaf: usize,
}

impl GbtModel {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    fn raw_scores(&self, x: &[f64]) -> [f64; 3] {
        let mut z = self.base_score;
        for round in &self.trees {
            for (k, t) in round.iter().enumerate() {
                z[k] += self.learning_rate * t.eval(x);
            }
        }
        z
    }

    pub fn predict(&self, features: &[f64]) -> Result<Prediction> {
        check_dim(self.n_features, features.len())?;
        Ok(Prediction::from_posterior(softmax3(self.raw_scores(features))))
    }

    /// Structural checks for deserialized models.
    pub fn validate(&self) -> Result<()> {
        for round in &self.trees {
            for t in round {
                if t.nodes.is_empty() {
                    return Err(Error::Input("empty tree".into()));
                }
                for n in &t.nodes {
                    match *n {
                        Node::Split {
                            feature,
                            threshold,
                            left,
                            right,
                        } => {
                            if feature >= self.n_features
                                || left >= t.nodes.len()
                                || right >= t.nodes.len()
                                || !threshold.is_finite()
                            {
                                return Err(Error::Input("invalid split node".into()));
                            }
                        }
                        Node::Leaf { value } if !value.is_finite() => {
                            return Err(Error::Input("non-finite leaf value".into()))
                        }
                        Node::Leaf { .. } => {}
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn train_gbt(data: &Dataset, hyper: &GbtHyper) -> Result<GbtModel> {
    train_gbt_traced(data, hyper).map(|(m, _)| m)
}

/// Train and also return the mean training log-loss after each round
/// (index 0 is the loss of the prior-only model).
pub fn train_gbt_traced(data: &Dataset, hyper: &GbtHyper) -> Result<(GbtModel, Vec<f64>)> {
    data.require_trainable()?;
    if !(hyper.subsample > 0.0 && hyper.subsample <= 1.0) {
        return Err(Error::Input(format!(
            "subsample must be in (0, 1], got {}",
            hyper.subsample
        )));
    }
    if !(hyper.learning_rate > 0.0 && hyper.learning_rate.is_finite()) || hyper.lambda_leaf < 0.0 {
        return Err(Error::Input(
            "learning_rate must be positive and lambda_leaf non-negative".into(),
        ));
    }
    let order = data.canonical_order();
    let x: Vec<&[f64]> = order.iter().map(|&i| data.rows[i].as_slice()).collect();
    let y: Vec<usize> = order.iter().map(|&i| data.labels[i].index()).collect();
    let n = x.len();
    let d = data.n_features();
    let columns: Vec<Vec<f64>> = (0..d).map(|j| x.iter().map(|r| r[j]).collect()).collect();

    let counts = data.class_counts();
    let base_score = counts.map(|c| ((c as f64 / n as f64).max(1e-12)).ln());
    let mut scores = vec![base_score; n];
    let mut trace = vec![log_loss(&scores, &y)];

    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let n_sample = ((hyper.subsample * n as f64).floor() as usize).clamp(1, n);
    let builder = TreeBuilder {
        columns: &columns,
        max_depth: hyper.max_depth,
        min_leaf: hyper.min_leaf.max(1),
        lambda: hyper.lambda_leaf,
    };

    let mut trees = Vec::with_capacity(hyper.n_rounds);
    for _ in 0..hyper.n_rounds {
        let mut rows: Vec<usize> = if n_sample < n {
            sample(&mut rng, n, n_sample).into_vec()
        } else {
            (0..n).collect()
        };
        rows.sort_unstable();
        let sorted = builder.presort(&rows);

        let probs: Vec<[f64; 3]> = scores.iter().map(|z| softmax3(*z)).collect();
        let round: [Tree; 3] = std::array::from_fn(|k| {
            let mut g = vec![0.0; n];
            let mut h = vec![0.0; n];
            for &i in &rows {
                let p = probs[i][k];
                g[i] = p - if y[i] == k { 1.0 } else { 0.0 };
                h[i] = (p * (1.0 - p)).max(1e-16);
            }
            builder.build(&rows, &sorted, &g, &h)
        });
        for (i, s) in scores.iter_mut().enumerate() {
            for (k, t) in round.iter().enumerate() {
                s[k] += hyper.learning_rate * t.eval(x[i]);
            }
        }
        trace.push(log_loss(&scores, &y));
        trees.push(round);
    }

    Ok((
        GbtModel {
            n_features: d,
            base_score,
            trees,
            learning_rate: hyper.learning_rate,
            max_depth: hyper.max_depth,
            n_rounds: hyper.n_rounds,
            min_leaf: hyper.min_leaf,
        },
        trace,
    ))
}

fn log_loss(scores: &[[f64; 3]], y: &[usize]) -> f64 {
    let total: f64 = scores
        .iter()
        .zip(y)
        .map(|(z, &k)| {
            let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln() - z[k]
        })
        .sum();
    total / y.len() as f64
}

struct TreeBuilder<'a> {
    columns: &'a [Vec<f64>],
    max_depth: usize,
    min_leaf: usize,
    lambda: f64,
}

#[derive(Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

#[derive(Clone, Copy, Default)]
struct Acc {
    g: f64,
    h: f64,
    n: usize,
    last: f64,
}

impl TreeBuilder<'_> {
    /// Per feature, `rows` ordered by value (ties by row index).
    fn presort(&self, rows: &[usize]) -> Vec<Vec<usize>> {
        self.columns
            .iter()
            .map(|col| {
                let mut r = rows.to_vec();
                r.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
                r
            })
            .collect()
    }

    fn score(&self, g: f64, h: f64) -> f64 {
        g * g / (h + self.lambda)
    }

    fn leaf(&self, g: f64, h: f64) -> Node {
        let value = if h + self.lambda > 0.0 {
            -g / (h + self.lambda)
        } else {
            0.0
        };
        Node::Leaf { value }
    }

    /// Level-wise exact greedy growth.
    fn build(&self, rows: &[usize], sorted: &[Vec<usize>], g: &[f64], h: &[f64]) -> Tree {
        const NONE: usize = usize::MAX;
        let n_total = g.len();
        let mut node_of = vec![NONE; n_total];
        for &i in rows {
            node_of[i] = 0;
        }
        // Node totals (G, H, count); nodes are created in breadth-first order.
        let mut totals = vec![(
            rows.iter().map(|&i| g[i]).sum::<f64>(),
            rows.iter().map(|&i| h[i]).sum::<f64>(),
            rows.len(),
        )];
        let mut nodes: Vec<Option<Node>> = vec![None];
        let mut frontier = vec![0usize];

        for _depth in 0..self.max_depth {
            if frontier.is_empty() {
                break;
            }
            let mut slot = vec![NONE; nodes.len()];
            for (s, &nd) in frontier.iter().enumerate() {
                slot[nd] = s;
            }
            let mut best: Vec<Option<Candidate>> = vec![None; frontier.len()];
            for (feature, order) in sorted.iter().enumerate() {
                let col = &self.columns[feature];
                let mut acc = vec![Acc::default(); frontier.len()];
                for &i in order {
                    let nd = node_of[i];
                    if nd == NONE || nd >= slot.len() || slot[nd] == NONE {
                        continue;
                    }
                    let s = slot[nd];
                    let v = col[i];
                    let a = &mut acc[s];
                    let (gt, ht, nt) = totals[nd];
                    if a.n > 0 && v > a.last && a.n >= self.min_leaf && nt - a.n >= self.min_leaf {
                        let gain = self.score(a.g, a.h) + self.score(gt - a.g, ht - a.h) - self.score(gt, ht);
                        if gain > 1e-12 && best[s].is_none_or(|b| gain > b.gain) {
                            let mut threshold = a.last + (v - a.last) / 2.0;
                            if threshold >= v {
                                threshold = a.last;
                            }
                            best[s] = Some(Candidate {
                                gain,
                                feature,
                                threshold,
                            });
                        }
                    }
                    a.g += g[i];
                    a.h += h[i];
                    a.n += 1;
                    a.last = v;
                }
            }

            let mut next = Vec::new();
            for (s, &nd) in frontier.iter().enumerate() {
                let Some(c) = best[s] else { continue };
                let left = nodes.len();
                let right = left + 1;
                nodes.push(None);
                nodes.push(None);
                totals.push((0.0, 0.0, 0));
                totals.push((0.0, 0.0, 0));
                nodes[nd] = Some(Node::Split {
                    feature: c.feature,
                    threshold: c.threshold,
                    left,
                    right,
                });
                next.push(left);
                next.push(right);
            }
            // Route rows of split nodes to their children.
            for &i in rows {
                let nd = node_of[i];
                if let Some(Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                }) = nodes[nd]
                {
                    let child = if self.columns[feature][i] <= threshold {
                        left
                    } else {
                        right
                    };
                    node_of[i] = child;
                    let t = &mut totals[child];
                    t.0 += g[i];
                    t.1 += h[i];
                    t.2 += 1;
                }
            }
            frontier = next;
        }

        let nodes = nodes
            .into_iter()
            .zip(&totals)
            .map(|(n, &(gt, ht, _))| n.unwrap_or_else(|| self.leaf(gt, ht)))
            .collect();
        Tree { nodes }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::records::SentimentLabel;

    fn toy() -> Dataset {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..60 {
            let v = i as f64;
            rows.push(vec![v, (i % 7) as f64]);
            labels.push(SentimentLabel::from_index(if v < 20.0 {
                0
            } else if v < 40.0 {
                1
            } else {
                2
            }));
        }
        Dataset::new(vec!["a".into(), "b".into()], rows, labels).unwrap()
    }

    #[test]
    fn zero_rounds_predicts_priors() {
        let mut data = toy();
        data.labels[0] = SentimentLabel::Negative;
        let h = GbtHyper {
            n_rounds: 0,
            ..GbtHyper::default()
        };
        let m = train_gbt(&data, &h).unwrap();
        let p = m.predict(&[0.0, 0.0]).unwrap().posterior.as_array();
        let expect = [19.0 / 60.0, 20.0 / 60.0, 21.0 / 60.0];
        for (a, b) in p.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn learns_thresholds() {
        let h = GbtHyper {
            n_rounds: 30,
            subsample: 1.0,
            ..GbtHyper::default()
        };
        let data = toy();
        let m = train_gbt(&data, &h).unwrap();
        for (row, l) in data.rows.iter().zip(&data.labels) {
            assert_eq!(m.predict(row).unwrap().label, *l);
        }
        m.validate().unwrap();
        assert!(m.predict(&[1.0]).is_err());
    }

    #[test]
    fn min_leaf_respected() {
        let h = GbtHyper {
            n_rounds: 1,
            min_leaf: 25,
            max_depth: 3,
            subsample: 1.0,
            ..GbtHyper::default()
        };
        let m = train_gbt(&toy(), &h).unwrap();
        // 60 rows with min_leaf 25 allows exactly one split.
        for t in &m.trees[0] {
            assert!(t.nodes.len() <= 3);
        }
    }

    #[test]
    fn rejects_bad_subsample() {
        let h = GbtHyper {
            subsample: 0.0,
            ..GbtHyper::default()
        };
        assert!(train_gbt(&toy(), &h).is_err());
    }
}
