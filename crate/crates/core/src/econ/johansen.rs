//! Johansen trace test for cointegration rank in a VECM.
//!
//! With `Z0 = Δy_t`, `Z1 = y_{t-1}` and `Z2` holding `k` lagged differences
//! (plus a constant under [`JohansenSpec::UnrestrictedConstant`]), `Z0` and
//! `Z1` are residualized on `Z2`, product moments `S_ij` formed, and the
//! eigenvalues of `S11⁻¹ S10 S00⁻¹ S01` give
//! `trace(r) = -T Σ_{i>r} ln(1 - λ_i)`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::critical::{johansen_trace_critical, JohansenSpec};
use super::linalg::residualize;
use crate::error::{Error, Result};

/// Tabulated critical values only go up to two variables.
pub const MAX_VARIABLES: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JohansenResult {
    /// Descending, in `[0, 1)`.
    pub eigenvalues: Vec<f64>,
    /// `trace_stats[r]` tests `H0: rank ≤ r`.
    pub trace_stats: Vec<f64>,
    pub critical_values_5pct: Vec<f64>,
    pub critical_values_1pct: Vec<f64>,
    /// `decisions[r]` is true when `rank ≤ r` is rejected at 5%.
    pub decisions: Vec<bool>,
    /// First `r` not rejected in the sequence `r = 0, 1, …`.
    pub rank: usize,
    pub lag_order: usize,
    pub spec: JohansenSpec,
    pub nobs: usize,
}

fn moment(a: &DMatrix<f64>, b: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    a.transpose() * b / t
}

/// `levels` holds one column per variable, all the same length.
pub fn johansen_trace(levels: &[Vec<f64>], k: usize, spec: JohansenSpec) -> Result<JohansenResult> {
    let n = levels.len();
    if n == 0 || n > MAX_VARIABLES {
        return Err(Error::Input(format!(
            "Johansen test supports 1 to {MAX_VARIABLES} variables, got {n}"
        )));
    }
    let len = levels[0].len();
    if levels.iter().any(|c| c.len() != len) {
        return Err(Error::Input("Johansen input columns differ in length".into()));
    }
    if levels.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Input("Johansen input contains non-finite values".into()));
    }
    if len < 50 {
        return Err(Error::Input(format!(
            "Johansen test needs at least 50 observations, got {len}"
        )));
    }
    if k < 1 {
        return Err(Error::Input("lag order k must be at least 1".into()));
    }
    let n2 = n * k + usize::from(spec == JohansenSpec::UnrestrictedConstant);
    if len <= k + 1 + n2 + n {
        return Err(Error::Input(format!("lag order {k} too large for {len} observations")));
    }

    let t_eff = len - 1 - k;
    let dy = |t: usize, j: usize| levels[j][t] - levels[j][t - 1];
    let mut z0 = DMatrix::zeros(t_eff, n);
    let mut z1 = DMatrix::zeros(t_eff, n);
    let mut z2 = DMatrix::zeros(t_eff, n2);
    for r in 0..t_eff {
        let t = r + k + 1;
        for j in 0..n {
            z0[(r, j)] = dy(t, j);
            z1[(r, j)] = levels[j][t - 1];
            for l in 1..=k {
                z2[(r, (l - 1) * n + j)] = dy(t - l, j);
            }
        }
        if spec == JohansenSpec::UnrestrictedConstant {
            z2[(r, n * k)] = 1.0;
        }
    }
    let r0 = residualize(&z0, &z2)?;
    let r1 = residualize(&z1, &z2)?;
    let tf = t_eff as f64;
    let s00 = moment(&r0, &r0, tf);
    let s01 = moment(&r0, &r1, tf);
    let s11 = moment(&r1, &r1, tf);

    let singular = || Error::Numerical("singular moment matrix in Johansen test".into());
    let s00_inv = s00.cholesky().ok_or_else(singular)?.inverse();
    let l = s11.cholesky().ok_or_else(singular)?.l();
    let l_inv = l.try_inverse().ok_or_else(singular)?;
    let m = &l_inv * s01.transpose() * s00_inv * &s01 * l_inv.transpose();
    let m = (&m + m.transpose()) * 0.5;
    let mut eigenvalues: Vec<f64> = SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .map(|&v| v.clamp(0.0, 1.0 - 1e-15))
        .collect();
    eigenvalues.sort_by(|a, b| b.total_cmp(a));

    let mut trace_stats = Vec::with_capacity(n);
    let mut cv5 = Vec::with_capacity(n);
    let mut cv1 = Vec::with_capacity(n);
    for r in 0..n {
        let stat = -tf * eigenvalues[r..].iter().map(|l| (1.0 - l).ln()).sum::<f64>();
        let (c5, c1) = johansen_trace_critical(spec, n - r).expect("n ≤ MAX_VARIABLES");
        trace_stats.push(stat);
        cv5.push(c5);
        cv1.push(c1);
    }
    let decisions: Vec<bool> = trace_stats.iter().zip(&cv5).map(|(s, c)| s > c).collect();
    let rank = decisions.iter().take_while(|&&d| d).count();
    Ok(JohansenResult {
        eigenvalues,
        trace_stats,
        critical_values_5pct: cv5,
        critical_values_1pct: cv1,
        decisions,
        rank,
        lag_order: k,
        spec,
        nobs: t_eff,
    })
}
