//! Text tables for the linkage analyses.

use std::fmt::Write;

use super::adf::AdfResult;
use super::dcc::DccFit;
use super::johansen::JohansenResult;

fn ticker_width<'a>(tickers: impl Iterator<Item = &'a str>) -> usize {
    tickers.map(|t| t.chars().count()).chain([6]).max().unwrap_or(6)
}

/// `(ticker, series description, result)` rows.
pub fn render_adf_table(rows: &[(&str, &str, &AdfResult)]) -> String {
    let tw = ticker_width(rows.iter().map(|r| r.0));
    let sw = rows.iter().map(|r| r.1.chars().count()).chain([6]).max().unwrap_or(6);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<tw$} {:<sw$} {:>10} {:>5} {:>10} {:>10}  Decision",
        "Ticker", "Series", "ADF stat", "Lags", "5% crit", "1% crit"
    );
    let _ = writeln!(out, "{}", "-".repeat(tw + sw + 64));
    for (ticker, series, r) in rows {
        let decision = if r.reject_unit_root_5pct {
            "Reject unit root"
        } else {
            "Fail to reject unit root"
        };
        let _ = writeln!(
            out,
            "{:<tw$} {:<sw$} {:>10.4} {:>5} {:>10.4} {:>10.4}  {}",
            ticker, series, r.statistic, r.lags_used, r.critical_values["5%"], r.critical_values["1%"], decision
        );
    }
    out
}

/// `(ticker, description, fit)` rows: α, β and mean ρ.
pub fn render_dcc_table(rows: &[(&str, &str, &DccFit)]) -> String {
    let tw = ticker_width(rows.iter().map(|r| r.0));
    let dw = rows.iter().map(|r| r.1.chars().count()).chain([11]).max().unwrap_or(11);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<tw$} {:<dw$} {:>8} {:>8} {:>8}",
        "Ticker", "Description", "α", "β", "Mean ρ"
    );
    let _ = writeln!(out, "{}", "-".repeat(tw + dw + 29));
    for (ticker, desc, f) in rows {
        let _ = writeln!(
            out,
            "{:<tw$} {:<dw$} {:>8.4} {:>8.4} {:>8.4}",
            ticker, desc, f.alpha, f.beta, f.mean_rho
        );
    }
    out
}

/// One block of hypothesis rows per ticker.
pub fn render_johansen_table(rows: &[(&str, &JohansenResult)]) -> String {
    let tw = ticker_width(rows.iter().map(|r| r.0));
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<tw$} {:<10} {:>10} {:>10} {:>10}  Decision",
        "Ticker", "H0", "Trace", "5% crit", "1% crit"
    );
    let _ = writeln!(out, "{}", "-".repeat(tw + 62));
    for (ticker, r) in rows {
        for k in 0..r.trace_stats.len() {
            let h0 = if k == 0 {
                "r = 0".to_string()
            } else {
                format!("r ≤ {k}")
            };
            let decision = if r.decisions[k] {
                "Reject H0"
            } else {
                "Fail to reject H0"
            };
            let _ = writeln!(
                out,
                "{:<tw$} {:<10} {:>10.2} {:>10.2} {:>10.2}  {}",
                ticker, h0, r.trace_stats[k], r.critical_values_5pct[k], r.critical_values_1pct[k], decision
            );
        }
    }
    out
}
