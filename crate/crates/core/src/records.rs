//! Core record types and their on-disk formats.
//!
//! Expert records are stored as JSON Lines, one object per line:
//!
//! ```text
//! {"id":"a1","text":"...","experts":{"finbert":{"pos":0.5,"neu":0.25,"neg":0.25},"roberta":{...}},"label":"positive"}
//! ```
//!
//! `label`, `date` (ISO-8601 date or date-time) and `agreement` (annotator
//! agreement subset, e.g. `"75"`) are optional. Price series are CSV files
//! with the header `date,close`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Sums within this distance of 1 are accepted unchanged.
pub const SUM_TOLERANCE: f64 = 1e-6;
/// Sums within this distance of 1 are renormalized; anything further is rejected.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-3;
/// Lower clamp applied to probabilities before any logarithm.
pub const PROB_FLOOR: f64 = 1e-9;

/// Clamp a probability into `[PROB_FLOOR, 1 - PROB_FLOOR]`.
#[inline]
pub fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR)
}

/// A posterior over (positive, neutral, negative).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbTriple {
    pos: f64,
    neu: f64,
    neg: f64,
}

/// Outcome of validating a raw triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Validated {
    Exact(ProbTriple),
    Renormalized(ProbTriple),
}

impl Validated {
    pub fn triple(self) -> ProbTriple {
        match self {
            Validated::Exact(p) | Validated::Renormalized(p) => p,
        }
    }
}

impl ProbTriple {
    pub const UNIFORM: ProbTriple = ProbTriple {
        pos: 1.0 / 3.0,
        neu: 1.0 / 3.0,
        neg: 1.0 / 3.0,
    };

    /// Validate a raw triple, renormalizing small drift in the sum.
    pub fn validate(pos: f64, neu: f64, neg: f64) -> std::result::Result<Validated, String> {
        for (name, v) in [("pos", pos), ("neu", neu), ("neg", neg)] {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(format!("probability {name}={v} outside [0, 1]"));
            }
        }
        let sum = pos + neu + neg;
        let drift = (sum - 1.0).abs();
        if drift <= SUM_TOLERANCE {
            Ok(Validated::Exact(ProbTriple { pos, neu, neg }))
        } else if drift <= RENORMALIZE_TOLERANCE {
            Ok(Validated::Renormalized(ProbTriple {
                pos: pos / sum,
                neu: neu / sum,
                neg: neg / sum,
            }))
        } else {
            Err(format!(
                "probabilities sum to {sum}, off by more than {RENORMALIZE_TOLERANCE}"
            ))
        }
    }

    /// Validating constructor; renormalizes within tolerance.
    pub fn new(pos: f64, neu: f64, neg: f64) -> std::result::Result<Self, String> {
        Self::validate(pos, neu, neg).map(Validated::triple)
    }

    /// Build from an array in class order (positive, neutral, negative).
    pub fn from_array(p: [f64; 3]) -> std::result::Result<Self, String> {
        Self::new(p[0], p[1], p[2])
    }

    /// For internally computed distributions already summing to 1.
    pub(crate) fn from_normalized(p: [f64; 3]) -> Self {
        debug_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        ProbTriple {
            pos: p[0],
            neu: p[1],
            neg: p[2],
        }
    }

    pub fn pos(&self) -> f64 {
        self.pos
    }

    pub fn neu(&self) -> f64 {
        self.neu
    }

    pub fn neg(&self) -> f64 {
        self.neg
    }

    /// Components in class order (positive, neutral, negative).
    pub fn as_array(&self) -> [f64; 3] {
        [self.pos, self.neu, self.neg]
    }

    /// Components clamped away from 0 and 1, then renormalized to sum 1.
    pub fn clamped(&self) -> [f64; 3] {
        let c = self.as_array().map(clamp_prob);
        let s: f64 = c.iter().sum();
        c.map(|v| v / s)
    }

    /// Most probable class, ties broken positive < neutral < negative.
    pub fn argmax(&self) -> SentimentLabel {
        SentimentLabel::from_index(argmax3(&self.as_array()))
    }
}

/// Index of the largest entry; the first index wins ties.
pub(crate) fn argmax3(v: &[f64; 3]) -> usize {
    let mut best = 0;
    for i in 1..3 {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentLabel {
    Positive,
    Neutral,
    Negative,
}

impl SentimentLabel {
    pub const ALL: [SentimentLabel; 3] = [
        SentimentLabel::Positive,
        SentimentLabel::Neutral,
        SentimentLabel::Negative,
    ];

    pub fn index(self) -> usize {
        match self {
            SentimentLabel::Positive => 0,
            SentimentLabel::Neutral => 1,
            SentimentLabel::Negative => 2,
        }
    }

    /// Panics on an index outside 0..3.
    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SentimentLabel::Positive => "positive",
            SentimentLabel::Neutral => "neutral",
            SentimentLabel::Negative => "negative",
        }
    }
}

impl fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SentimentLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positive" | "pos" => Ok(SentimentLabel::Positive),
            "neutral" | "neu" => Ok(SentimentLabel::Neutral),
            "negative" | "neg" => Ok(SentimentLabel::Negative),
            other => Err(format!("unknown sentiment label '{other}'")),
        }
    }
}

/// One headline with its expert posteriors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertRecord {
    pub id: String,
    pub text: String,
    pub experts: BTreeMap<String, ProbTriple>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<SentimentLabel>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        serialize_with = "ser_timestamp",
        deserialize_with = "de_timestamp"
    )]
    pub date: Option<NaiveDateTime>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agreement: Option<String>,
}

impl ExpertRecord {
    pub fn expert(&self, name: &str) -> Result<&ProbTriple> {
        self.experts.get(name).ok_or_else(|| Error::Record {
            id: self.id.clone(),
            message: format!("missing expert '{name}'"),
        })
    }
}

const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

/// Parse an ISO-8601 date or date-time (`T` or space separated, optional fraction).
pub fn parse_timestamp(s: &str) -> std::result::Result<NaiveDateTime, String> {
    let s = s.trim();
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Ok(d.and_hms_opt(0, 0, 0).expect("midnight is valid"));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(t);
        }
    }
    // Offsets are dropped: dates are interpreted as exchange-local.
    chrono::DateTime::parse_from_rfc3339(s)
        .map(|t| t.naive_local())
        .map_err(|_| format!("unparsable date '{s}'"))
}

fn ser_timestamp<S: Serializer>(t: &Option<NaiveDateTime>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match t {
        Some(t) => s.serialize_str(&t.format(TIMESTAMP_FORMAT).to_string()),
        None => s.serialize_none(),
    }
}

fn de_timestamp<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<NaiveDateTime>, D::Error> {
    let raw: Option<String> = Option::deserialize(d)?;
    raw.map(|s| parse_timestamp(&s).map_err(serde::de::Error::custom))
        .transpose()
}

/// Raw on-disk triple, keyed by short class names.
#[derive(Deserialize)]
struct RawTriple {
    pos: f64,
    neu: f64,
    neg: f64,
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    text: String,
    experts: BTreeMap<String, RawTriple>,
    #[serde(default)]
    label: Option<SentimentLabel>,
    #[serde(default, deserialize_with = "de_timestamp")]
    date: Option<NaiveDateTime>,
    #[serde(default)]
    agreement: Option<String>,
}

/// Records plus the ids whose posteriors were renormalized on ingestion.
#[derive(Debug, Clone, Default)]
pub struct LoadedRecords {
    pub records: Vec<ExpertRecord>,
    pub renormalized: Vec<String>,
}

/// Load a JSONL record file.
pub fn load_records(path: impl AsRef<Path>) -> Result<Vec<ExpertRecord>> {
    load_records_report(path).map(|l| l.records)
}

/// Load a JSONL record file, also reporting renormalized records.
pub fn load_records_report(path: impl AsRef<Path>) -> Result<LoadedRecords> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_records(file, path)
}

/// Parse JSONL records from any reader; `path` is used only in error messages.
pub fn read_records(reader: impl Read, path: &Path) -> Result<LoadedRecords> {
    let mut out = LoadedRecords::default();
    let mut seen = HashSet::new();
    let mut expert_names: Option<Vec<String>> = None;

    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: lineno,
            message: e.to_string(),
        })?;
        if !seen.insert(raw.id.clone()) {
            return Err(Error::Record {
                id: raw.id,
                message: format!("duplicate id (line {lineno})"),
            });
        }
        if raw.experts.is_empty() {
            return Err(Error::Record {
                id: raw.id,
                message: "no expert posteriors".into(),
            });
        }
        let names: Vec<String> = raw.experts.keys().cloned().collect();
        match &expert_names {
            None => expert_names = Some(names),
            Some(expected) if *expected != names => {
                return Err(Error::Record {
                    id: raw.id,
                    message: format!("experts {names:?} differ from dataset experts {expected:?}"),
                });
            }
            Some(_) => {}
        }

        let mut experts = BTreeMap::new();
        let mut renormalized = false;
        for (name, t) in raw.experts {
            let v = ProbTriple::validate(t.pos, t.neu, t.neg).map_err(|m| Error::Record {
                id: raw.id.clone(),
                message: format!("expert '{name}': {m}"),
            })?;
            renormalized |= matches!(v, Validated::Renormalized(_));
            experts.insert(name, v.triple());
        }
        if renormalized {
            out.renormalized.push(raw.id.clone());
        }
        out.records.push(ExpertRecord {
            id: raw.id,
            text: raw.text,
            experts,
            label: raw.label,
            date: raw.date,
            agreement: raw.agreement,
        });
    }
    Ok(out)
}

/// Write records as JSONL, one per line, in the given order.
pub fn write_records(records: &[ExpertRecord], writer: impl Write) -> Result<()> {
    let mut w = BufWriter::new(writer);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(|e| Error::io("<output>", e))?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))
}

/// Drop records whose text exactly (case-sensitively) repeats an earlier one.
/// Returns the surviving records and the number removed.
pub fn dedup_by_text(records: Vec<ExpertRecord>) -> (Vec<ExpertRecord>, usize) {
    let before = records.len();
    let mut seen = HashSet::new();
    let kept: Vec<_> = records.into_iter().filter(|r| seen.insert(r.text.clone())).collect();
    let removed = before - kept.len();
    (kept, removed)
}

/// Daily closing prices for one instrument.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub ticker: String,
    points: Vec<(NaiveDate, f64)>,
}

impl PriceSeries {
    /// Sorts by date; rejects duplicate dates and non-positive closes.
    pub fn new(ticker: impl Into<String>, mut points: Vec<(NaiveDate, f64)>) -> Result<Self> {
        for &(d, c) in &points {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::Input(format!("close {c} on {d} is not a positive price")));
            }
        }
        points.sort_by_key(|&(d, _)| d);
        if let Some(w) = points.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Input(format!("duplicate date {}", w[0].0)));
        }
        Ok(PriceSeries {
            ticker: ticker.into(),
            points,
        })
    }

    pub fn points(&self) -> &[(NaiveDate, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.points.iter().map(|p| p.0).collect()
    }
}

/// Load a `date,close` CSV. The ticker defaults to the file stem.
pub fn load_prices(path: impl AsRef<Path>) -> Result<PriceSeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let ticker = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_prices(file, path, ticker)
}

pub fn read_prices(reader: impl Read, path: &Path, ticker: impl Into<String>) -> Result<PriceSeries> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if headers.len() < 2 || &headers[0] != "date" || &headers[1] != "close" {
        return Err(parse_err(
            1,
            format!(
                "expected header 'date,close', got '{}'",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    let mut points = Vec::new();
    let mut seen = HashSet::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| parse_err(line, e.to_string()))?;
        let date = NaiveDate::parse_from_str(&row[0], "%Y-%m-%d")
            .map_err(|_| parse_err(line, format!("unparsable date '{}'", &row[0])))?;
        let close: f64 = row[1]
            .parse()
            .map_err(|_| parse_err(line, format!("unparsable close '{}'", &row[1])))?;
        if !(close.is_finite() && close > 0.0) {
            return Err(parse_err(
                line,
                format!("close {close} on {date} is not a positive price"),
            ));
        }
        if !seen.insert(date) {
            return Err(parse_err(line, format!("duplicate date {date}")));
        }
        points.push((date, close));
    }
    PriceSeries::new(ticker, points)
}

/// Write a price series as `date,close` CSV.
pub fn write_prices(series: &PriceSeries, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Input(e.to_string());
    w.write_record(["date", "close"]).map_err(io)?;
    for (d, c) in series.points() {
        w.write_record([d.to_string(), c.to_string()]).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))
}
