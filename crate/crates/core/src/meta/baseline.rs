//! Single-expert argmax baselines, scored on the same records as the meta-classifier.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::metrics::{metrics, Metrics};
use crate::error::{Error, Result};
use crate::records::{ExpertRecord, SentimentLabel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub expert: String,
    pub aggregate: Metrics,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub subsets: BTreeMap<String, Metrics>,
}

/// Predict each record's label as the argmax of `expert`'s posterior.
pub fn argmax_baseline(records: &[ExpertRecord], expert: &str) -> Result<BaselineReport> {
    let mut truth = Vec::with_capacity(records.len());
    let mut pred = Vec::with_capacity(records.len());
    let mut by_group: BTreeMap<String, (Vec<SentimentLabel>, Vec<SentimentLabel>)> = BTreeMap::new();
    for r in records {
        let label = r
            .label
            .ok_or_else(|| Error::Dataset(format!("record {} has no label", r.id)))?;
        let p = r.expert(expert)?.argmax();
        truth.push(label);
        pred.push(p);
        if let Some(g) = &r.agreement {
            let e = by_group.entry(g.clone()).or_default();
            e.0.push(label);
            e.1.push(p);
        }
    }
    let subsets = by_group
        .into_iter()
        .map(|(g, (t, p))| metrics(&t, &p).map(|m| (g, m)))
        .collect::<Result<_>>()?;
    Ok(BaselineReport {
        expert: expert.to_string(),
        aggregate: metrics(&truth, &pred)?,
        subsets,
    })
}
