//! Two-stage bivariate DCC(1,1).
//!
//! Stage 1 fits GARCH(1,1) to each series and takes standardized residuals
//! `z_t`. Stage 2 maximizes the correlation part of the Gaussian
//! log-likelihood over `(α, β)` with
//! `Q_t = (1 - α - β) S̄ + α z_{t-1} z_{t-1}ᵀ + β Q_{t-1}`, `Q_0 = S̄`, where
//! `S̄` is the sample covariance of `z`, and `R_t` is `Q_t` rescaled to unit
//! diagonal.

use serde::{Deserialize, Serialize};

use super::garch::{fit_garch11, from_persistence_pair, to_persistence_pair, GarchFit};
use super::optim::{Minimum, NelderMead};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DccFit {
    pub alpha: f64,
    pub beta: f64,
    /// Arithmetic mean of `rho_t`.
    pub mean_rho: f64,
    pub rho_t: Vec<f64>,
    /// Correlation-part log-likelihood at the optimum.
    pub loglik: f64,
    /// `[s11, s12, s22]` of the standardized residuals.
    pub s_bar: [f64; 3],
    pub garch: [GarchFit; 2],
    pub converged: bool,
}

/// `[s11, s12, s22]`, the sample covariance of two series.
pub(crate) fn covariance(a: &[f64], b: &[f64]) -> [f64; 3] {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut s = [0.0; 3];
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        s[0] += dx * dx;
        s[1] += dx * dy;
        s[2] += dy * dy;
    }
    s.map(|v| v / (n - 1.0))
}

/// Replay the `Q_t` recursion and return `ρ_t` for every `t`.
pub fn dcc_correlations(z1: &[f64], z2: &[f64], s_bar: [f64; 3], alpha: f64, beta: f64) -> Vec<f64> {
    let w = 1.0 - alpha - beta;
    let mut q = s_bar;
    let mut rho = Vec::with_capacity(z1.len());
    for t in 0..z1.len() {
        if t > 0 {
            let (a, b) = (z1[t - 1], z2[t - 1]);
            q = [
                w * s_bar[0] + alpha * a * a + beta * q[0],
                w * s_bar[1] + alpha * a * b + beta * q[1],
                w * s_bar[2] + alpha * b * b + beta * q[2],
            ];
        }
        rho.push(q[1] / (q[0] * q[2]).sqrt());
    }
    rho
}

/// Correlation-part Gaussian log-likelihood for given `ρ_t`.
pub fn correlation_loglik(z1: &[f64], z2: &[f64], rho: &[f64]) -> f64 {
    let mut ll = 0.0;
    for ((a, b), r) in z1.iter().zip(z2).zip(rho) {
        let d = 1.0 - r * r;
        ll += d.ln() + (a * a + b * b - 2.0 * r * a * b) / d - (a * a + b * b);
    }
    -0.5 * ll
}

/// Stage 2 only, on already standardized residuals.
pub fn fit_dcc_correlation(z1: &[f64], z2: &[f64]) -> Result<(f64, f64, f64, bool)> {
    let n = z1.len();
    let s_bar = covariance(z1, z2);
    let corr = s_bar[1] / (s_bar[0] * s_bar[2]).sqrt();
    if !corr.is_finite() || corr.abs() >= 0.9999 {
        return Err(Error::Degenerate(format!(
            "standardized residual correlation {corr} is degenerate"
        )));
    }
    let objective = |theta: &[f64]| {
        let (alpha, beta) = to_persistence_pair(theta[0], theta[1]);
        let rho = dcc_correlations(z1, z2, s_bar, alpha, beta);
        -correlation_loglik(z1, z2, &rho) / n as f64
    };
    let nm = NelderMead::default();
    let mut best: Option<Minimum> = None;
    let mut any_converged = false;
    for (alpha, beta) in [(0.03, 0.95), (0.05, 0.90), (0.01, 0.98)] {
        let (a, b) = from_persistence_pair(alpha, beta);
        let mut m = nm.minimize(objective, &[a, b]);
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
    let (mut alpha, mut beta) = to_persistence_pair(best.x[0], best.x[1]);
    let mut loglik = -best.f * n as f64;

    // The constant-correlation model (α = β = 0) is nested; keep it if better.
    let constant = correlation_loglik(z1, z2, &dcc_correlations(z1, z2, s_bar, 0.0, 0.0));
    if constant >= loglik {
        alpha = 0.0;
        beta = 0.0;
        loglik = constant;
    }
    if !any_converged {
        return Err(Error::NoConvergence {
            starts: 3,
            best_params: vec![alpha, beta],
            best_loglik: loglik,
        });
    }
    Ok((alpha, beta, loglik, best.converged))
}

pub fn fit_dcc(x: &[f64], y: &[f64]) -> Result<DccFit> {
    if x.len() != y.len() {
        return Err(Error::Input(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 100 {
        return Err(Error::Input(format!(
            "DCC needs at least 100 observations, got {}",
            x.len()
        )));
    }
    let gx = fit_garch11(x)?;
    let gy = fit_garch11(y)?;
    let (z1, z2) = (&gx.std_residuals, &gy.std_residuals);
    let (alpha, beta, _, converged) = fit_dcc_correlation(z1, z2)?;
    let s_bar = covariance(z1, z2);
    let rho_t = dcc_correlations(z1, z2, s_bar, alpha, beta);
    let loglik = correlation_loglik(z1, z2, &rho_t);
    let mean_rho = rho_t.iter().sum::<f64>() / rho_t.len() as f64;
    Ok(DccFit {
        alpha,
        beta,
        mean_rho,
        rho_t,
        loglik,
        s_bar,
        garch: [gx, gy],
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_parameters_give_constant_correlation() {
        let z1 = [1.0, -0.5, 0.3, 2.0];
        let z2 = [0.8, -0.2, 0.1, 1.5];
        let s = covariance(&z1, &z2);
        let rho = dcc_correlations(&z1, &z2, s, 0.0, 0.0);
        let c = s[1] / (s[0] * s[2]).sqrt();
        assert!(rho.iter().all(|r| (r - c).abs() < 1e-15));
    }

    #[test]
    fn length_checks() {
        assert!(fit_dcc(&[0.0; 150], &[0.0; 149]).is_err());
        assert!(fit_dcc(&[0.0; 50], &[0.0; 50]).is_err());
    }

    #[test]
    fn identical_series_are_degenerate() {
        let z: Vec<f64> = (0..200).map(|i| ((i * 37 % 101) as f64 - 50.0) / 29.0).collect();
        assert!(matches!(fit_dcc_correlation(&z, &z), Err(Error::Degenerate(_))));
    }
}
