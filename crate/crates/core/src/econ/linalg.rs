//! Small dense least-squares helpers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub(crate) struct OlsFit {
    pub beta: DVector<f64>,
    pub resid: DVector<f64>,
    pub ssr: f64,
    /// Diagonal of `(XᵀX)⁻¹`.
    pub xtx_inv_diag: DVector<f64>,
}

impl OlsFit {
    /// Standard error of coefficient `j` with `ssr / (n - k)` as the variance.
    pub fn std_error(&self, j: usize) -> f64 {
        let n = self.resid.len() as f64;
        let k = self.beta.len() as f64;
        (self.ssr / (n - k) * self.xtx_inv_diag[j]).sqrt()
    }
}

/// Least squares of `y` on the columns of `x`.
pub(crate) fn ols(y: &DVector<f64>, x: &DMatrix<f64>) -> Result<OlsFit> {
    if x.nrows() <= x.ncols() {
        return Err(Error::Numerical(format!(
            "regression with {} rows and {} regressors",
            x.nrows(),
            x.ncols()
        )));
    }
    let xtx = x.transpose() * x;
    let chol = xtx
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("singular regressor matrix".into()))?;
    let beta = chol.solve(&(x.transpose() * y));
    let resid = y - x * &beta;
    let ssr = resid.norm_squared();
    let xtx_inv_diag = chol.inverse().diagonal();
    Ok(OlsFit {
        beta,
        resid,
        ssr,
        xtx_inv_diag,
    })
}

/// Residuals of regressing every column of `y` on `x`; `y` unchanged when `x`
/// has no columns.
pub(crate) fn residualize(y: &DMatrix<f64>, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if x.ncols() == 0 {
        return Ok(y.clone());
    }
    let chol = (x.transpose() * x)
        .cholesky()
        .ok_or_else(|| Error::Numerical("singular regressor matrix".into()))?;
    let beta = chol.solve(&(x.transpose() * y));
    Ok(y - x * beta)
}
