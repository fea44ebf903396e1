//! Daily sentiment index built from per-article posteriors, and its alignment
//! with a price series.

use std::io::Write;

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::records::{ExpertRecord, PriceSeries, ProbTriple};

/// `p_pos - p_neg - 0.1 · p_neu`, in `[-1.1, 1]`.
pub fn score_article(p: &ProbTriple) -> f64 {
    p.pos() - p.neg() - 0.1 * p.neu()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArticleScore {
    pub timestamp: NaiveDateTime,
    pub s: f64,
}

/// Score every dated record with the posterior of `expert`. Records without a
/// date are an error.
pub fn score_records(records: &[ExpertRecord], expert: &str) -> Result<Vec<ArticleScore>> {
    records
        .iter()
        .map(|r| {
            let timestamp = r.date.ok_or_else(|| Error::Record {
                id: r.id.clone(),
                message: "no date; the sentiment index needs dated records".into(),
            })?;
            Ok(ArticleScore {
                timestamp,
                s: score_article(r.expert(expert)?),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DailyReduce {
    #[default]
    Mean,
    Sum,
}

/// What to do with articles dated on non-trading days.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OffCalendar {
    /// Assign to the next trading date.
    #[default]
    RollForward,
    Drop,
}

impl std::str::FromStr for DailyReduce {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mean" => Ok(DailyReduce::Mean),
            "sum" => Ok(DailyReduce::Sum),
            _ => Err(format!("unknown daily reduction '{s}' (expected mean or sum)")),
        }
    }
}

impl std::str::FromStr for OffCalendar {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "roll-forward" => Ok(OffCalendar::RollForward),
            "drop" => Ok(OffCalendar::Drop),
            _ => Err(format!(
                "unknown off-calendar policy '{s}' (expected roll-forward or drop)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregateOptions {
    pub reduce: DailyReduce,
    pub off_calendar: OffCalendar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyPoint {
    pub date: NaiveDate,
    pub raw_mean: f64,
    pub z: f64,
    pub n_articles: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySentimentSeries {
    pub points: Vec<DailyPoint>,
    /// Running sum of `z`.
    pub cumulative: Vec<f64>,
}

impl DailySentimentSeries {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// CSV `date,raw_mean,z,n_articles,cumulative`.
    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = std::io::BufWriter::new(writer);
        let io = |e| Error::io("<daily csv>", e);
        writeln!(w, "date,raw_mean,z,n_articles,cumulative").map_err(io)?;
        for (p, c) in self.points.iter().zip(&self.cumulative) {
            writeln!(w, "{},{},{},{},{}", p.date, p.raw_mean, p.z, p.n_articles, c).map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

/// The daily series plus bookkeeping about what did not make it in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyAggregation {
    pub series: DailySentimentSeries,
    /// Trading dates that received no articles (omitted from the series).
    pub empty_dates: Vec<NaiveDate>,
    /// Articles after the last trading date, or off-calendar under `Drop`.
    pub dropped_articles: usize,
}

fn check_calendar(calendar: &[NaiveDate]) -> Result<()> {
    if calendar.is_empty() {
        return Err(Error::Input("empty trading calendar".into()));
    }
    if let Some(w) = calendar.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::Input(format!(
            "trading calendar not strictly increasing at {} -> {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Sample mean and sample (n - 1) standard deviation.
fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn aggregate_daily(
    scores: &[ArticleScore],
    calendar: &[NaiveDate],
    opts: AggregateOptions,
) -> Result<DailyAggregation> {
    if scores.is_empty() {
        return Err(Error::Input("no article scores to aggregate".into()));
    }
    check_calendar(calendar)?;

    let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); calendar.len()];
    let mut dropped = 0;
    for a in scores {
        let day = a.timestamp.date();
        let slot = calendar.partition_point(|&d| d < day);
        let keep = slot < calendar.len() && (opts.off_calendar == OffCalendar::RollForward || calendar[slot] == day);
        if keep {
            buckets[slot].push(a.s);
        } else {
            dropped += 1;
        }
    }
    if dropped == scores.len() {
        return Err(Error::Input(format!(
            "all {} articles fall outside the trading calendar (last trading date {})",
            scores.len(),
            calendar[calendar.len() - 1]
        )));
    }

    let mut dates = Vec::new();
    let mut raw = Vec::new();
    let mut counts = Vec::new();
    let mut empty_dates = Vec::new();
    for (date, mut bucket) in calendar.iter().copied().zip(buckets) {
        if bucket.is_empty() {
            empty_dates.push(date);
            continue;
        }
        // Sorted so the reduction does not depend on article order.
        bucket.sort_by(f64::total_cmp);
        let sum: f64 = bucket.iter().sum();
        raw.push(match opts.reduce {
            DailyReduce::Mean => sum / bucket.len() as f64,
            DailyReduce::Sum => sum,
        });
        dates.push(date);
        counts.push(bucket.len());
    }

    if raw.len() < 2 {
        return Err(Error::Degenerate(format!(
            "only {} trading day(s) with articles; z-scores need at least 2",
            raw.len()
        )));
    }
    let (mean, std) = mean_std(&raw);
    if std.is_nan() || std <= 0.0 {
        return Err(Error::Degenerate(
            "daily sentiment is constant; z-scores undefined".into(),
        ));
    }
    let mut points = Vec::with_capacity(raw.len());
    let mut cumulative = Vec::with_capacity(raw.len());
    let mut running = 0.0;
    for ((date, raw_mean), n_articles) in dates.into_iter().zip(raw).zip(counts) {
        let z = (raw_mean - mean) / std;
        running += z;
        points.push(DailyPoint {
            date,
            raw_mean,
            z,
            n_articles,
        });
        cumulative.push(running);
    }
    Ok(DailyAggregation {
        series: DailySentimentSeries { points, cumulative },
        empty_dates,
        dropped_articles: dropped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinCoverage {
    pub sentiment_days: usize,
    pub price_days: usize,
    pub joined_days: usize,
}

/// Sentiment and prices on their shared trading dates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedPair {
    pub ticker: String,
    pub dates: Vec<NaiveDate>,
    pub log_price: Vec<f64>,
    pub sentiment_z: Vec<f64>,
    /// Cumulative sentiment carried over from the daily series.
    pub cumulative_sentiment: Vec<f64>,
    /// `log_price[i + 1] - log_price[i]`; one shorter than `dates`.
    pub returns: Vec<f64>,
    pub coverage: JoinCoverage,
}

impl AlignedPair {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Same-day (sentiment z, log return) pairs, dropping the first date.
    pub fn sentiment_return_pairs(&self) -> (Vec<f64>, Vec<f64>) {
        (self.sentiment_z[1..].to_vec(), self.returns.clone())
    }

    /// CSV `date,log_price,sentiment_z,cumulative_sentiment,return`; the
    /// first row has an empty return.
    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = std::io::BufWriter::new(writer);
        let io = |e| Error::io("<aligned csv>", e);
        writeln!(w, "date,log_price,sentiment_z,cumulative_sentiment,return").map_err(io)?;
        for i in 0..self.len() {
            let ret = if i == 0 {
                String::new()
            } else {
                self.returns[i - 1].to_string()
            };
            writeln!(
                w,
                "{},{},{},{},{}",
                self.dates[i], self.log_price[i], self.sentiment_z[i], self.cumulative_sentiment[i], ret
            )
            .map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

/// Inner join on dates present in both series.
pub fn align(daily: &DailySentimentSeries, prices: &PriceSeries) -> Result<AlignedPair> {
    let pp = prices.points();
    let mut out = AlignedPair {
        ticker: prices.ticker.clone(),
        dates: Vec::new(),
        log_price: Vec::new(),
        sentiment_z: Vec::new(),
        cumulative_sentiment: Vec::new(),
        returns: Vec::new(),
        coverage: JoinCoverage {
            sentiment_days: daily.len(),
            price_days: pp.len(),
            joined_days: 0,
        },
    };
    let (mut i, mut j) = (0, 0);
    while i < daily.points.len() && j < pp.len() {
        let a = daily.points[i].date;
        let b = pp[j].0;
        if a < b {
            i += 1;
        } else if b < a {
            j += 1;
        } else {
            out.dates.push(a);
            out.log_price.push(pp[j].1.ln());
            out.sentiment_z.push(daily.points[i].z);
            out.cumulative_sentiment.push(daily.cumulative[i]);
            i += 1;
            j += 1;
        }
    }
    if out.dates.is_empty() {
        return Err(Error::Input(format!(
            "sentiment and {} prices share no dates",
            if prices.ticker.is_empty() {
                "the"
            } else {
                &prices.ticker
            }
        )));
    }
    out.returns = out.log_price.windows(2).map(|w| w[1] - w[0]).collect();
    out.coverage.joined_days = out.dates.len();
    Ok(out)
}
