//! Probability-derived and cross-expert signals, and the fixed feature layout.
//!
//! Layout, in order:
//!
//! 1. per expert (in configured order): `p_pos, p_neu, p_neg`,
//!    `logit_pos, logit_neu, logit_neg`, `max_prob, margin, entropy`;
//! 2. per expert pair `(a, b)` with `a` before `b`: `agree(a,b)`,
//!    `kl(a‖b)`, `kl(b‖a)`;
//! 3. the semantic flag bits in [`Flag::ALL`] order.
//!
//! All logarithms are natural. Probabilities are clamped to
//! `[1e-9, 1 - 1e-9]` before any logarithm.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flags::{Flag, RuleSet};
use crate::records::{clamp_prob, ExpertRecord, ProbTriple, SentimentLabel};

const CLASS_SUFFIX: [&str; 3] = ["pos", "neu", "neg"];

/// `ln(p / (1 - p))` per class, on clamped probabilities.
pub fn logit_features(p: &ProbTriple) -> [f64; 3] {
    p.as_array().map(|v| {
        let c = clamp_prob(v);
        (c / (1.0 - c)).ln()
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Confidence {
    pub max_prob: f64,
    pub margin: f64,
    pub entropy: f64,
}

/// Top probability, top-1 minus top-2 gap, and Shannon entropy.
pub fn confidence_features(p: &ProbTriple) -> Confidence {
    let mut sorted = p.as_array();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let entropy = p
        .as_array()
        .iter()
        .map(|&v| {
            let c = clamp_prob(v);
            -c * c.ln()
        })
        .sum::<f64>();
    Confidence {
        max_prob: sorted[0],
        margin: sorted[0] - sorted[1],
        entropy,
    }
}

/// One minus the total-variation distance between two posteriors.
pub fn expert_agreement(f: &ProbTriple, r: &ProbTriple) -> f64 {
    let tv: f64 = f
        .as_array()
        .iter()
        .zip(r.as_array())
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        / 2.0;
    (1.0 - tv).clamp(0.0, 1.0)
}

/// `KL(f ‖ r)` on clamped, renormalized posteriors.
pub fn expert_kl(f: &ProbTriple, r: &ProbTriple) -> f64 {
    let f = f.clamped();
    let r = r.clamped();
    f.iter().zip(r).map(|(a, b)| a * (a / b).ln()).sum()
}

/// Which signal groups to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ablation {
    Full,
    /// Only the first configured expert; no cross-expert signals.
    NoRoberta,
    /// No semantic flags.
    NoSemantics,
}

impl Ablation {
    pub const ALL: [Ablation; 3] = [Ablation::Full, Ablation::NoRoberta, Ablation::NoSemantics];

    pub fn as_str(self) -> &'static str {
        match self {
            Ablation::Full => "full",
            Ablation::NoRoberta => "no-roberta",
            Ablation::NoSemantics => "no-semantics",
        }
    }

    pub fn uses_semantics(self) -> bool {
        !matches!(self, Ablation::NoSemantics)
    }
}

impl std::str::FromStr for Ablation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "full" => Ok(Ablation::Full),
            "no-roberta" => Ok(Ablation::NoRoberta),
            "no-semantics" => Ok(Ablation::NoSemantics),
            _ => Err(format!(
                "unknown ablation '{s}' (expected full, no-roberta or no-semantics)"
            )),
        }
    }
}

/// Expert order, ablation, and (when flags are used) the rule set.
#[derive(Debug, Clone)]
pub struct SignalConfig {
    experts: Vec<String>,
    ablation: Ablation,
    rules: Option<RuleSet>,
}

impl SignalConfig {
    /// `experts` lists the posterior producers in layout order; the first is
    /// the one kept by [`Ablation::NoRoberta`].
    pub fn new(experts: Vec<String>, ablation: Ablation, rules: Option<RuleSet>) -> Result<Self> {
        if experts.is_empty() {
            return Err(Error::Input("at least one expert required".into()));
        }
        if ablation.uses_semantics() && rules.is_none() {
            return Err(Error::Input(format!(
                "ablation '{}' needs a rule set",
                ablation.as_str()
            )));
        }
        let rules = if ablation.uses_semantics() { rules } else { None };
        Ok(SignalConfig {
            experts,
            ablation,
            rules,
        })
    }

    /// `finbert` + `roberta` with the default rules.
    pub fn standard(ablation: Ablation) -> Self {
        Self::new(
            vec!["finbert".into(), "roberta".into()],
            ablation,
            Some(RuleSet::default_rules()),
        )
        .expect("standard config is valid")
    }

    pub fn ablation(&self) -> Ablation {
        self.ablation
    }

    /// Experts that contribute features under the ablation.
    pub fn active_experts(&self) -> &[String] {
        match self.ablation {
            Ablation::NoRoberta => &self.experts[..1],
            _ => &self.experts,
        }
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        let experts = self.active_experts();
        for e in experts {
            for c in CLASS_SUFFIX {
                names.push(format!("{e}_p_{c}"));
            }
            for c in CLASS_SUFFIX {
                names.push(format!("{e}_logit_{c}"));
            }
            names.push(format!("{e}_max_prob"));
            names.push(format!("{e}_margin"));
            names.push(format!("{e}_entropy"));
        }
        for (i, a) in experts.iter().enumerate() {
            for b in &experts[i + 1..] {
                names.push(format!("agree_{a}_{b}"));
                names.push(format!("kl_{a}_{b}"));
                names.push(format!("kl_{b}_{a}"));
            }
        }
        if self.rules.is_some() {
            for f in Flag::ALL {
                names.push(format!("flag_{f}"));
            }
        }
        names
    }

    pub fn n_features(&self) -> usize {
        let k = self.active_experts().len();
        9 * k + 3 * k * (k - 1) / 2 + if self.rules.is_some() { Flag::COUNT } else { 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub record_id: String,
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

/// Signal values for one record, in layout order.
pub fn extract_values(record: &ExpertRecord, config: &SignalConfig) -> Result<Vec<f64>> {
    let experts = config.active_experts();
    let triples = experts
        .iter()
        .map(|e| record.expert(e).copied())
        .collect::<Result<Vec<_>>>()?;

    let mut values = Vec::with_capacity(config.n_features());
    for p in &triples {
        values.extend(p.as_array());
        values.extend(logit_features(p));
        let c = confidence_features(p);
        values.extend([c.max_prob, c.margin, c.entropy]);
    }
    for (i, a) in triples.iter().enumerate() {
        for b in &triples[i + 1..] {
            values.push(expert_agreement(a, b));
            values.push(expert_kl(a, b));
            values.push(expert_kl(b, a));
        }
    }
    if let Some(rules) = &config.rules {
        values.extend(rules.flag(&record.text).as_features());
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Record {
            id: record.id.clone(),
            message: format!("non-finite feature value {v}"),
        });
    }
    Ok(values)
}

/// Full feature vector (names included) for one record.
pub fn extract_all(record: &ExpertRecord, config: &SignalConfig) -> Result<FeatureVector> {
    Ok(FeatureVector {
        record_id: record.id.clone(),
        names: config.feature_names(),
        values: extract_values(record, config)?,
    })
}

/// Row-major features for a dataset, rows in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub names: Vec<String>,
    pub ids: Vec<String>,
    pub labels: Vec<Option<SentimentLabel>>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    /// CSV with header `id,label,<feature names>`.
    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = std::io::BufWriter::new(writer);
        let io = |e| Error::io("<feature csv>", e);
        write!(w, "id,label").map_err(io)?;
        for n in &self.names {
            write!(w, ",{n}").map_err(io)?;
        }
        writeln!(w).map_err(io)?;
        for ((id, label), row) in self.ids.iter().zip(&self.labels).zip(&self.rows) {
            write!(w, "{},{}", csv_field(id), label.map(|l| l.as_str()).unwrap_or("")).map_err(io)?;
            for v in row {
                write!(w, ",{v}").map_err(io)?;
            }
            writeln!(w).map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn extract_matrix(records: &[ExpertRecord], config: &SignalConfig) -> Result<FeatureMatrix> {
    let rows = records
        .iter()
        .map(|r| extract_values(r, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureMatrix {
        names: config.feature_names(),
        ids: records.iter().map(|r| r.id.clone()).collect(),
        labels: records.iter().map(|r| r.label).collect(),
        rows,
    })
}
