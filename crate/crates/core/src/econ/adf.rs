//! Augmented Dickey–Fuller unit-root test.
//!
//! Regresses `Δy_t` on deterministics, `y_{t-1}` and `p` lagged differences;
//! the statistic is the t-ratio on `y_{t-1}`. The lag order is chosen by AIC
//! over `0..=max_lags` on a common sample, then the chosen model is refit on
//! all rows it can use.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::critical::{adf_critical_values, AdfSpec, LEVELS};
use super::linalg::ols;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    pub statistic: f64,
    pub lags_used: usize,
    pub nobs: usize,
    pub critical_values: BTreeMap<String, f64>,
    pub reject_unit_root_5pct: bool,
    pub spec: AdfSpec,
}

fn n_deterministic(spec: AdfSpec) -> usize {
    match spec {
        AdfSpec::Constant => 1,
        AdfSpec::ConstantTrend => 2,
    }
}

/// Default maximum lag: `floor(12 · (T/100)^{1/4})`.
pub fn default_max_lags(t: usize) -> usize {
    (12.0 * (t as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Design for `lags` lagged differences over the last `nobs` usable rows.
/// Columns: deterministics, `y_{t-1}`, `Δy_{t-1} … Δy_{t-lags}`.
fn design(y: &[f64], dy: &[f64], spec: AdfSpec, lags: usize, nobs: usize) -> (DVector<f64>, DMatrix<f64>) {
    let nd = n_deterministic(spec);
    let first = dy.len() - nobs;
    let mut x = DMatrix::zeros(nobs, nd + 1 + lags);
    let mut target = DVector::zeros(nobs);
    for r in 0..nobs {
        let t = first + r;
        target[r] = dy[t];
        x[(r, 0)] = 1.0;
        if nd == 2 {
            x[(r, 1)] = (r + 1) as f64;
        }
        x[(r, nd)] = y[t];
        for l in 1..=lags {
            x[(r, nd + l)] = dy[t - l];
        }
    }
    (target, x)
}

fn prepare(series: &[f64]) -> Result<Vec<f64>> {
    let t = series.len();
    if t < 20 {
        return Err(Error::Input(format!("ADF needs at least 20 observations, got {t}")));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("ADF input contains non-finite values".into()));
    }
    let dy: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    if dy.iter().all(|&d| d == 0.0) {
        return Err(Error::Degenerate("constant series".into()));
    }
    Ok(dy)
}

fn max_lag_cap(dy: &[f64], spec: AdfSpec) -> usize {
    (dy.len() / 2).saturating_sub(n_deterministic(spec) + 1)
}

/// ADF with the lag order chosen by AIC over `0..=max_lags` (default
/// [`default_max_lags`], capped so the regression keeps enough rows).
pub fn adf(series: &[f64], spec: AdfSpec, max_lags: Option<usize>) -> Result<AdfResult> {
    let dy = prepare(series)?;
    let max_lags = max_lags
        .unwrap_or_else(|| default_max_lags(series.len()))
        .min(max_lag_cap(&dy, spec));

    // AIC over a common sample of dy.len() - max_lags rows.
    let common = dy.len() - max_lags;
    let mut best: Option<(f64, usize)> = None;
    for lags in 0..=max_lags {
        let (target, x) = design(series, &dy, spec, lags, common);
        let fit = ols(&target, &x)?;
        let n = common as f64;
        let llf = -n / 2.0 * ((2.0 * std::f64::consts::PI).ln() + (fit.ssr / n).ln() + 1.0);
        let aic = -2.0 * llf + 2.0 * x.ncols() as f64;
        if best.is_none_or(|(b, _)| aic < b) {
            best = Some((aic, lags));
        }
    }
    fit_with_lags(series, &dy, spec, best.map(|b| b.1).unwrap_or(0))
}

/// ADF with a fixed number of lagged differences.
pub fn adf_with_lags(series: &[f64], spec: AdfSpec, lags: usize) -> Result<AdfResult> {
    let dy = prepare(series)?;
    if lags > max_lag_cap(&dy, spec) {
        return Err(Error::Input(format!(
            "{lags} lags is too many for {} observations",
            series.len()
        )));
    }
    fit_with_lags(series, &dy, spec, lags)
}

fn fit_with_lags(series: &[f64], dy: &[f64], spec: AdfSpec, lags_used: usize) -> Result<AdfResult> {
    let nd = n_deterministic(spec);
    let nobs = dy.len() - lags_used;
    let (target, x) = design(series, dy, spec, lags_used, nobs);
    let fit = ols(&target, &x)?;
    let se = fit.std_error(nd);
    if !(se > 0.0 && se.is_finite()) {
        return Err(Error::Degenerate("zero residual variance in ADF regression".into()));
    }
    let statistic = fit.beta[nd] / se;
    let cv = adf_critical_values(spec, nobs);
    Ok(AdfResult {
        statistic,
        lags_used,
        nobs,
        critical_values: LEVELS.iter().map(|l| l.to_string()).zip(cv).collect(),
        reject_unit_root_5pct: statistic < cv[1],
        spec,
    })
}

/// Unit root in levels but not in first differences, both at 5%.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrationCheck {
    pub levels: AdfResult,
    pub differences: AdfResult,
    pub is_i1: bool,
}

pub fn check_i1(series: &[f64], spec: AdfSpec, max_lags: Option<usize>) -> Result<IntegrationCheck> {
    let levels = adf(series, spec, max_lags)?;
    let diffs: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    let differences = adf(&diffs, spec, max_lags)?;
    let is_i1 = !levels.reject_unit_root_5pct && differences.reject_unit_root_5pct;
    Ok(IntegrationCheck {
        levels,
        differences,
        is_i1,
    })
}
