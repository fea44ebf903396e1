//! L2-regularized multinomial logistic regression, trained by full-batch
//! (diagonally preconditioned) gradient descent with backtracking line search
//! on standardized features.

use serde::{Deserialize, Serialize};

use super::{check_dim, softmax3, Dataset, Prediction, Standardizer};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegHyper {
    pub l2_lambda: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for LogRegHyper {
    fn default() -> Self {
        LogRegHyper {
            l2_lambda: 1e-2,
            max_iters: 5000,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    /// 3 × d, rows in class order, on standardized features.
    pub weights: Vec<Vec<f64>>,
    pub bias: [f64; 3],
    pub l2_lambda: f64,
    pub standardization: Standardizer,
    pub iterations: usize,
    pub converged: bool,
}

impl LogRegModel {
    /// All-zero parameters with identity standardization.
    pub fn zeros(d: usize) -> Self {
        LogRegModel {
            weights: vec![vec![0.0; d]; 3],
            bias: [0.0; 3],
            l2_lambda: 0.0,
            standardization: Standardizer {
                mean: vec![0.0; d],
                std: vec![1.0; d],
            },
            iterations: 0,
            converged: true,
        }
    }

    pub fn n_features(&self) -> usize {
        self.standardization.mean.len()
    }

    pub fn predict(&self, features: &[f64]) -> Result<Prediction> {
        check_dim(self.n_features(), features.len())?;
        let x = self.standardization.apply(features);
        let mut z = self.bias;
        for (k, w) in self.weights.iter().enumerate() {
            z[k] += dot(w, &x);
        }
        Ok(Prediction::from_posterior(softmax3(z)))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mean cross-entropy plus `λ/2 · ‖W‖²` (bias unpenalized) and its gradient.
///
/// `params` is `W` row-major (3 × d) followed by the 3 biases; `y` holds class
/// indices.
pub fn logistic_loss_grad(params: &[f64], x: &[Vec<f64>], y: &[usize], lambda: f64) -> (f64, Vec<f64>) {
    let d = x.first().map_or(0, Vec::len);
    assert_eq!(params.len(), 3 * d + 3, "parameter length");
    let (w, b) = params.split_at(3 * d);
    let n = x.len() as f64;

    let mut loss = 0.0;
    let mut grad = vec![0.0; params.len()];
    for (xi, &yi) in x.iter().zip(y) {
        let mut z = [b[0], b[1], b[2]];
        for (k, zk) in z.iter_mut().enumerate() {
            *zk += dot(&w[k * d..(k + 1) * d], xi);
        }
        let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        loss += lse - z[yi];
        for k in 0..3 {
            let r = (z[k] - lse).exp() - if k == yi { 1.0 } else { 0.0 };
            let gk = &mut grad[k * d..(k + 1) * d];
            for (g, v) in gk.iter_mut().zip(xi) {
                *g += r * v;
            }
            grad[3 * d + k] += r;
        }
    }
    loss /= n;
    grad.iter_mut().for_each(|g| *g /= n);
    loss += 0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>();
    for (g, v) in grad[..3 * d].iter_mut().zip(w) {
        *g += lambda * v;
    }
    (loss, grad)
}

pub fn train_logreg(data: &Dataset, hyper: &LogRegHyper) -> Result<LogRegModel> {
    data.require_trainable()?;
    if !(hyper.l2_lambda >= 0.0 && hyper.l2_lambda.is_finite()) {
        return Err(Error::Input(format!(
            "l2_lambda must be a non-negative number, got {}",
            hyper.l2_lambda
        )));
    }
    let order = data.canonical_order();
    let raw: Vec<Vec<f64>> = order.iter().map(|&i| data.rows[i].clone()).collect();
    let y: Vec<usize> = order.iter().map(|&i| data.labels[i].index()).collect();
    let standardization = Standardizer::fit(&raw);
    let x: Vec<Vec<f64>> = raw.iter().map(|r| standardization.apply(r)).collect();
    let d = data.n_features();
    let lambda = hyper.l2_lambda;

    // Diagonal preconditioner: weight curvature grows with λ (features are
    // standardized), the bias curvature does not. Without it a large λ forces
    // steps so small that the biases never reach the class prior.
    let precond: Vec<f64> = (0..3 * d + 3)
        .map(|i| if i < 3 * d { 1.0 / (1.0 + lambda) } else { 1.0 })
        .collect();

    let mut theta = vec![0.0; 3 * d + 3];
    let (mut f, mut g) = logistic_loss_grad(&theta, &x, &y, lambda);
    let mut step = 1.0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < hyper.max_iters {
        let gnorm_inf = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gnorm_inf < hyper.tol {
            converged = true;
            break;
        }
        let dir: Vec<f64> = g.iter().zip(&precond).map(|(gi, p)| gi * p).collect();
        let gg: f64 = g.iter().zip(&dir).map(|(a, b)| a * b).sum();
        // Armijo backtracking; the accepted step seeds the next iteration.
        let mut accepted = None;
        while step > 1e-20 {
            let cand: Vec<f64> = theta.iter().zip(&dir).map(|(t, di)| t - step * di).collect();
            let (fc, gc) = logistic_loss_grad(&cand, &x, &y, lambda);
            if fc <= f - 1e-4 * step * gg {
                accepted = Some((cand, fc, gc));
                break;
            }
            step *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((cand, fc, gc)) => {
                let stalled = f - fc <= f64::EPSILON * f.abs();
                theta = cand;
                f = fc;
                g = gc;
                step *= 2.0;
                if stalled {
                    converged = g.iter().fold(0.0f64, |m, v| m.max(v.abs())) < hyper.tol;
                    break;
                }
            }
            None => break,
        }
    }

    let weights = (0..3).map(|k| theta[k * d..(k + 1) * d].to_vec()).collect();
    let bias = [theta[3 * d], theta[3 * d + 1], theta[3 * d + 2]];
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("logistic regression diverged".into()));
    }
    Ok(LogRegModel {
        weights,
        bias,
        l2_lambda: lambda,
        standardization,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::records::SentimentLabel;

    #[test]
    fn zero_model_is_uniform_and_breaks_ties_to_positive() {
        let m = LogRegModel::zeros(4);
        let p = m.predict(&[1.0, -2.0, 3.0, 0.5]).unwrap();
        assert_eq!(p.posterior.as_array(), [1.0 / 3.0; 3]);
        assert_eq!(p.label, SentimentLabel::Positive);
        assert!(matches!(
            m.predict(&[1.0]),
            Err(Error::Dimension { expected: 4, got: 1 })
        ));
    }

    #[test]
    fn single_class_rejected() {
        let d = Dataset::new(
            vec!["a".into()],
            vec![vec![0.0], vec![1.0]],
            vec![SentimentLabel::Neutral; 2],
        )
        .unwrap();
        assert!(train_logreg(&d, &LogRegHyper::default()).is_err());
    }

    #[test]
    fn loss_at_zero_is_ln3() {
        let x = vec![vec![1.0, 2.0], vec![-1.0, 0.5]];
        let (l, _) = logistic_loss_grad(&[0.0; 9], &x, &[0, 2], 0.3);
        assert!((l - 3f64.ln()).abs() < 1e-15);
    }
}
