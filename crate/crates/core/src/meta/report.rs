//! Aligned text tables for evaluation reports: one row per method, an
//! accuracy/F1 column pair per agreement subset, and an `Overall` pair.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::baseline::BaselineReport;
use super::crossval::EvalReport;
use super::metrics::Metrics;

/// One table row: a method name with its pooled and per-subset metrics.
#[derive(Debug, Clone, Copy)]
pub struct TableRow<'a> {
    pub name: &'a str,
    pub aggregate: &'a Metrics,
    pub subsets: &'a BTreeMap<String, Metrics>,
}

impl<'a> TableRow<'a> {
    pub fn from_report(name: &'a str, r: &'a EvalReport) -> Self {
        TableRow {
            name,
            aggregate: &r.aggregate,
            subsets: &r.subsets,
        }
    }

    pub fn from_baseline(name: &'a str, b: &'a BaselineReport) -> Self {
        TableRow {
            name,
            aggregate: &b.aggregate,
            subsets: &b.subsets,
        }
    }
}

fn subset_order(a: &str, b: &str) -> std::cmp::Ordering {
    match (
        a.trim_end_matches('%').parse::<f64>(),
        b.trim_end_matches('%').parse::<f64>(),
    ) {
        (Ok(x), Ok(y)) => x.total_cmp(&y),
        _ => a.cmp(b),
    }
}

fn subset_header(s: &str) -> String {
    if s.parse::<f64>().is_ok() {
        format!("{s}%")
    } else {
        s.to_string()
    }
}

pub fn render_table(rows: &[TableRow]) -> String {
    let mut subsets: Vec<String> = rows.iter().flat_map(|r| r.subsets.keys().cloned()).collect();
    subsets.sort_by(|a, b| subset_order(a, b));
    subsets.dedup();

    let name_w = rows
        .iter()
        .map(|r| r.name.len())
        .chain(["Method".len()])
        .max()
        .unwrap_or(6);
    let pair_w = 19;

    let mut out = String::new();
    let _ = write!(out, "{:<name_w$}", "Method");
    for s in subsets.iter().map(|s| subset_header(s)).chain(["Overall".to_string()]) {
        let _ = write!(out, "  {s:^pair_w$}");
    }
    out.push('\n');
    let _ = write!(out, "{:<name_w$}", "");
    for _ in 0..=subsets.len() {
        let _ = write!(out, "  {:>9} {:>9}", "Accuracy", "F1");
    }
    out.push('\n');
    let rule = name_w + (subsets.len() + 1) * (pair_w + 2);
    out.push_str(&"-".repeat(rule));
    out.push('\n');

    for r in rows {
        let _ = write!(out, "{:<name_w$}", r.name);
        for s in &subsets {
            match r.subsets.get(s) {
                Some(m) => {
                    let _ = write!(out, "  {:>9.4} {:>9.4}", m.accuracy, m.macro_f1);
                }
                None => {
                    let _ = write!(out, "  {:>9} {:>9}", "-", "-");
                }
            }
        }
        let _ = write!(out, "  {:>9.4} {:>9.4}", r.aggregate.accuracy, r.aggregate.macro_f1);
        out.push('\n');
    }
    out
}

/// Per-class precision/recall/F1 and the confusion matrix for one report.
pub fn render_detail(r: &EvalReport) -> String {
    let mut out = String::new();
    let m = &r.aggregate;
    let _ = writeln!(
        out,
        "config={} learner={} k={} seed={} n={} features={}",
        r.config,
        r.learner.name(),
        r.cv.k,
        r.cv.seed,
        r.n,
        r.n_features
    );
    let _ = writeln!(
        out,
        "{:<10} {:>9} {:>9} {:>9} {:>8}",
        "class", "precision", "recall", "f1", "support"
    );
    for c in &m.per_class {
        let _ = writeln!(
            out,
            "{:<10} {:>9.4} {:>9.4} {:>9.4} {:>8}",
            c.label.as_str(),
            c.precision,
            c.recall,
            c.f1,
            c.support
        );
    }
    if !m.absent_classes.is_empty() {
        let names: Vec<_> = m.absent_classes.iter().map(|l| l.as_str()).collect();
        let _ = writeln!(
            out,
            "note: no true instances of {}; their F1 counts as 0 in macro-F1",
            names.join(", ")
        );
    }
    let _ = writeln!(out, "confusion (rows = true, cols = predicted; pos/neu/neg):");
    for row in &m.confusion {
        let _ = writeln!(out, "  {:>7} {:>7} {:>7}", row[0], row[1], row[2]);
    }
    for f in &r.folds {
        let _ = writeln!(
            out,
            "fold {}: train={} test={} accuracy={:.4} macro_f1={:.4}",
            f.fold, f.n_train, f.n_test, f.accuracy, f.macro_f1
        );
    }
    out
}
