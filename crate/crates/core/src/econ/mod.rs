//! Sentiment/market linkage: unit roots, volatility, dynamic correlation and
//! cointegration.

pub mod adf;
pub mod critical;
pub mod dcc;
pub mod garch;
pub mod johansen;
pub(crate) mod linalg;
pub(crate) mod optim;
pub mod report;

pub use adf::{adf, adf_with_lags, check_i1, AdfResult, IntegrationCheck};
pub use critical::{AdfSpec, JohansenSpec};
pub use dcc::{fit_dcc, DccFit};
pub use garch::{fit_garch11, GarchFit};
pub use johansen::{johansen_trace, JohansenResult};
pub use report::{render_adf_table, render_dcc_table, render_johansen_table};
