//! Embedded critical-value tables.
//!
//! ADF: MacKinnon (2010) response surfaces, `cv(T) = b0 + b1/T + b2/T² + b3/T³`
//! for a single series ("Critical Values for Cointegration Tests", Queen's
//! Economics Department Working Paper 1227, Table 2).
//!
//! Johansen trace: MacKinnon, Haug and Michelis (1999), "Numerical
//! distribution functions of likelihood ratio tests for cointegration",
//! J. Applied Econometrics 14, for `n - r ∈ {1, 2}`.

use serde::{Deserialize, Serialize};

/// Deterministic terms in the ADF regression.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdfSpec {
    #[default]
    Constant,
    ConstantTrend,
}

impl std::str::FromStr for AdfSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "constant" | "c" => Ok(AdfSpec::Constant),
            "constant-trend" | "ct" => Ok(AdfSpec::ConstantTrend),
            _ => Err(format!("unknown ADF spec '{s}' (expected constant or constant-trend)")),
        }
    }
}

/// Significance levels in table order.
pub const LEVELS: [&str; 3] = ["1%", "5%", "10%"];

const ADF_CONSTANT: [[f64; 4]; 3] = [
    [-3.43035, -6.5393, -16.786, -79.433],
    [-2.86154, -2.8903, -4.234, -40.040],
    [-2.56677, -1.5384, -2.809, 0.0],
];

const ADF_CONSTANT_TREND: [[f64; 4]; 3] = [
    [-3.95877, -9.0531, -28.428, -134.155],
    [-3.41049, -4.3904, -9.036, -45.374],
    [-3.12705, -2.5856, -3.925, -22.380],
];

/// ADF critical values at 1%, 5%, 10% for a regression with `nobs` observations.
pub fn adf_critical_values(spec: AdfSpec, nobs: usize) -> [f64; 3] {
    let table = match spec {
        AdfSpec::Constant => &ADF_CONSTANT,
        AdfSpec::ConstantTrend => &ADF_CONSTANT_TREND,
    };
    let t = 1.0 / nobs as f64;
    table.map(|b| b[0] + b[1] * t + b[2] * t * t + b[3] * t * t * t)
}

/// Deterministic terms in the Johansen VECM.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JohansenSpec {
    /// No constant or trend.
    NoDeterministic,
    /// Unrestricted constant in the VECM (linear trend allowed in levels).
    #[default]
    UnrestrictedConstant,
}

impl std::str::FromStr for JohansenSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "unrestricted-constant" | "constant" => Ok(JohansenSpec::UnrestrictedConstant),
            "no-deterministic" | "none" => Ok(JohansenSpec::NoDeterministic),
            _ => Err(format!(
                "unknown Johansen spec '{s}' (expected unrestricted-constant or no-deterministic)"
            )),
        }
    }
}

/// Trace critical values `[10%, 5%, 1%]` indexed by `n - r - 1`.
const TRACE_NONE: [[f64; 3]; 2] = [[2.9762, 4.1296, 6.9406], [10.4741, 12.3212, 16.3640]];
const TRACE_CONST: [[f64; 3]; 2] = [[2.7055, 3.8415, 6.6349], [13.4294, 15.4943, 19.9349]];

/// `(5%, 1%)` trace critical values for `n_minus_r` remaining common trends.
pub fn johansen_trace_critical(spec: JohansenSpec, n_minus_r: usize) -> Option<(f64, f64)> {
    let table = match spec {
        JohansenSpec::NoDeterministic => &TRACE_NONE,
        JohansenSpec::UnrestrictedConstant => &TRACE_CONST,
    };
    table.get(n_minus_r.checked_sub(1)?).map(|row| (row[1], row[2]))
}
