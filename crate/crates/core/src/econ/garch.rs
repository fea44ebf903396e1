//! Univariate GARCH(1,1) by Gaussian quasi-maximum likelihood.
//!
//! `σ²_t = ω + α ε²_{t-1} + β σ²_{t-1}` on the demeaned series, with `σ²_0`
//! set to the sample variance. Parameters are optimized with Nelder–Mead in
//! an unconstrained space: `ω = exp(θ₀)`, `α + β = 0.999 · sigmoid(θ₁)`,
//! `α / (α + β) = sigmoid(θ₂)`.

use serde::{Deserialize, Serialize};

use super::optim::{Minimum, NelderMead};
use crate::error::{Error, Result};

/// Upper bound on `α + β`.
pub const MAX_PERSISTENCE: f64 = 0.999;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchFit {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    pub mean: f64,
    pub loglik: f64,
    pub sigma2: Vec<f64>,
    pub std_residuals: Vec<f64>,
    pub converged: bool,
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub(crate) fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Map unconstrained `(a, b)` to `(α, β)` with `α, β ≥ 0`, `α + β ≤ 0.999`.
pub(crate) fn to_persistence_pair(a: f64, b: f64) -> (f64, f64) {
    let s = MAX_PERSISTENCE * sigmoid(a);
    let share = sigmoid(b);
    (s * share, s * (1.0 - share))
}

pub(crate) fn from_persistence_pair(alpha: f64, beta: f64) -> (f64, f64) {
    let s = alpha + beta;
    (logit(s / MAX_PERSISTENCE), logit(alpha / s))
}

/// Conditional variances for the given parameters.
pub fn garch_variance(eps: &[f64], omega: f64, alpha: f64, beta: f64, sigma2_0: f64) -> Vec<f64> {
    let mut s = Vec::with_capacity(eps.len());
    let mut prev = sigma2_0;
    for (t, _) in eps.iter().enumerate() {
        let v = if t == 0 {
            sigma2_0
        } else {
            omega + alpha * eps[t - 1] * eps[t - 1] + beta * prev
        };
        s.push(v);
        prev = v;
    }
    s
}

fn gaussian_loglik(eps: &[f64], sigma2: &[f64]) -> f64 {
    -0.5 * eps
        .iter()
        .zip(sigma2)
        .map(|(e, s)| LN_2PI + s.ln() + e * e / s)
        .sum::<f64>()
}

/// Log-likelihood of the demeaned series under constant variance.
pub fn constant_variance_loglik(returns: &[f64]) -> f64 {
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let var = returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
    -0.5 * n * (LN_2PI + var.ln() + 1.0)
}

pub fn fit_garch11(returns: &[f64]) -> Result<GarchFit> {
    let n = returns.len();
    if n < 100 {
        return Err(Error::Input(format!(
            "GARCH(1,1) needs at least 100 observations, got {n}"
        )));
    }
    if returns.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("GARCH input contains non-finite values".into()));
    }
    let mean = returns.iter().sum::<f64>() / n as f64;
    let eps: Vec<f64> = returns.iter().map(|r| r - mean).collect();
    let var = eps.iter().map(|e| e * e).sum::<f64>() / n as f64;
    if returns.iter().all(|&r| r == returns[0]) || var.is_nan() || var <= 0.0 {
        return Err(Error::Degenerate("constant series".into()));
    }

    // Mean negative log-likelihood per observation, in unconstrained space.
    let objective = |theta: &[f64]| {
        let omega = theta[0].exp();
        let (alpha, beta) = to_persistence_pair(theta[1], theta[2]);
        let s = garch_variance(&eps, omega, alpha, beta, var);
        -gaussian_loglik(&eps, &s) / n as f64
    };

    let nm = NelderMead::default();
    let starts = [(0.05, 0.90), (0.10, 0.80), (0.02, 0.97)];
    let mut best: Option<Minimum> = None;
    let mut any_converged = false;
    for (alpha, beta) in starts {
        let omega = var * (1.0 - alpha - beta);
        let (a, b) = from_persistence_pair(alpha, beta);
        let mut m = nm.minimize(objective, &[omega.ln(), a, b]);
        // One restart from the optimum guards against a collapsed simplex.
        let again = nm.minimize(objective, &m.x);
        if again.f <= m.f {
            m = again;
        }
        any_converged |= m.converged;
        if best.as_ref().is_none_or(|b| m.f < b.f) {
            best = Some(m);
        }
    }
    let best = best.expect("at least one start");
    let omega = best.x[0].exp();
    let (alpha, beta) = to_persistence_pair(best.x[1], best.x[2]);
    let loglik = -best.f * n as f64;
    if !any_converged || !loglik.is_finite() {
        return Err(Error::NoConvergence {
            starts: starts.len(),
            best_params: vec![omega, alpha, beta],
            best_loglik: loglik,
        });
    }
    let sigma2 = garch_variance(&eps, omega, alpha, beta, var);
    let std_residuals = eps.iter().zip(&sigma2).map(|(e, s)| e / s.sqrt()).collect();
    Ok(GarchFit {
        omega,
        alpha,
        beta,
        mean,
        loglik: gaussian_loglik(&eps, &sigma2),
        sigma2,
        std_residuals,
        converged: best.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reparameterization_round_trips() {
        let (a, b) = from_persistence_pair(0.05, 0.9);
        let (alpha, beta) = to_persistence_pair(a, b);
        assert!((alpha - 0.05).abs() < 1e-12 && (beta - 0.9).abs() < 1e-12);
        let (alpha, beta) = to_persistence_pair(50.0, -50.0);
        assert!(alpha >= 0.0 && beta >= 0.0 && alpha + beta <= MAX_PERSISTENCE);
    }

    #[test]
    fn preconditions() {
        assert!(fit_garch11(&[0.1; 50]).is_err());
        assert!(matches!(fit_garch11(&[0.1; 200]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn variance_recursion() {
        let s = garch_variance(&[1.0, 2.0, 0.0], 0.1, 0.2, 0.5, 1.0);
        assert_eq!(s[0], 1.0);
        assert!((s[1] - (0.1 + 0.2 + 0.5)).abs() < 1e-15);
        assert!((s[2] - (0.1 + 0.2 * 4.0 + 0.5 * 0.8)).abs() < 1e-15);
    }
}
