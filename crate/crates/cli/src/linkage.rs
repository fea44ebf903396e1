//! `aggregate` and `linkage`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use finsent::econ::{
    check_i1, fit_dcc, johansen_trace, render_adf_table, render_dcc_table, render_johansen_table, AdfResult, AdfSpec,
    JohansenResult, JohansenSpec,
};
use finsent::index::{aggregate_daily, align, score_records, AggregateOptions, AlignedPair, DailyAggregation};
use finsent::records::{load_prices, load_records_report, PriceSeries};
use finsent::{Error, Result};
use serde::Serialize;

use crate::classify::require_file;
use crate::run::RunDir;
use crate::settings::{List, Settings};
use crate::{AggregateArgs, IndexArgs, LinkageArgs};

struct IndexSetup {
    records: PathBuf,
    prices: Vec<PathBuf>,
    expert: String,
    opts: AggregateOptions,
    out_dir: PathBuf,
}

fn index_setup(s: &mut Settings, a: &IndexArgs) -> Result<IndexSetup> {
    let records: PathBuf = s.required("records", a.records.clone())?;
    let prices: List = s.required("prices", a.prices.as_deref().map(|p| p.parse().expect("infallible")))?;
    if prices.0.is_empty() {
        return Err(Error::Input("--prices lists no files".into()));
    }
    let expert = s.value("expert", a.expert.clone(), "finbert".to_string())?;
    let reduce = s.value("reduce", a.reduce.clone(), "mean".to_string())?;
    let off = s.value("off-calendar", a.off_calendar.clone(), "roll-forward".to_string())?;
    let opts = AggregateOptions {
        reduce: reduce.parse().map_err(Error::Input)?,
        off_calendar: off.parse().map_err(Error::Input)?,
    };
    let out_dir = s
        .hidden("out-dir", a.out_dir.clone())?
        .ok_or_else(|| Error::Input("missing --out-dir (or out-dir= in the config file)".into()))?;
    Ok(IndexSetup {
        records,
        prices: prices.0.into_iter().map(PathBuf::from).collect(),
        expert,
        opts,
        out_dir,
    })
}

#[derive(Serialize)]
struct IndexSummary<'a> {
    articles: usize,
    trading_days_with_news: usize,
    empty_trading_days: usize,
    dropped_articles: usize,
    coverage: BTreeMap<&'a str, finsent::index::JoinCoverage>,
}

struct Built {
    daily: DailyAggregation,
    pairs: Vec<AlignedPair>,
}

impl IndexSetup {
    fn check_inputs(&self) -> Result<()> {
        require_file(&self.records)?;
        self.prices.iter().try_for_each(|p| require_file(p))
    }

    fn build(&self, run: &mut RunDir) -> Result<Built> {
        let loaded = load_records_report(&self.records)?;
        run.log(format!(
            "loaded {} records from {}",
            loaded.records.len(),
            self.records.display()
        ));
        let series: Vec<PriceSeries> = self.prices.iter().map(load_prices).collect::<Result<_>>()?;
        for (i, p) in series.iter().enumerate() {
            if series[..i].iter().any(|q| q.ticker == p.ticker) {
                return Err(Error::Input(format!("ticker {} appears twice in --prices", p.ticker)));
            }
        }
        let mut calendar: Vec<_> = series.iter().flat_map(|p| p.dates()).collect();
        calendar.sort();
        calendar.dedup();

        let scores = score_records(&loaded.records, &self.expert)?;
        let daily = aggregate_daily(&scores, &calendar, self.opts)?;
        let mut csv = Vec::new();
        daily.series.write_csv(&mut csv)?;
        run.write("daily.csv", &csv)?;

        let mut pairs = Vec::new();
        for p in &series {
            let pair = align(&daily.series, p)?;
            let mut csv = Vec::new();
            pair.write_csv(&mut csv)?;
            run.write(&format!("aligned-{}.csv", p.ticker), &csv)?;
            run.log(format!(
                "{}: {} sentiment days, {} price days, {} joined",
                p.ticker, pair.coverage.sentiment_days, pair.coverage.price_days, pair.coverage.joined_days
            ));
            pairs.push(pair);
        }
        run.log(format!(
            "daily index: {} days with news, {} trading days without, {} articles dropped",
            daily.series.len(),
            daily.empty_dates.len(),
            daily.dropped_articles
        ));
        let summary = IndexSummary {
            articles: scores.len(),
            trading_days_with_news: daily.series.len(),
            empty_trading_days: daily.empty_dates.len(),
            dropped_articles: daily.dropped_articles,
            coverage: pairs.iter().map(|p| (p.ticker.as_str(), p.coverage)).collect(),
        };
        run.write_json("index.json", &summary)?;
        Ok(Built { daily, pairs })
    }
}

pub fn aggregate(a: AggregateArgs) -> Result<()> {
    let mut s = Settings::load(a.common.config.as_deref(), "aggregate")?;
    let setup = index_setup(&mut s, &a.index)?;
    let config = s.finish()?;
    setup.check_inputs()?;
    let mut run = RunDir::create(&setup.out_dir, &config)?;
    let built = setup.build(&mut run)?;
    run.finish()?;
    println!(
        "wrote daily index ({} days) and {} aligned series to {}",
        built.daily.series.len(),
        built.pairs.len(),
        setup.out_dir.display()
    );
    Ok(())
}

const ANALYSES: [&str; 3] = ["adf", "dcc", "johansen"];

#[derive(Serialize)]
struct AdfRow<'a> {
    ticker: &'a str,
    series: &'static str,
    is_i1: bool,
    levels: &'a AdfResult,
    differences: &'a AdfResult,
}

#[derive(Serialize)]
struct GarchSummary {
    series: &'static str,
    omega: f64,
    alpha: f64,
    beta: f64,
    loglik: f64,
}

#[derive(Serialize)]
struct DccRow<'a> {
    ticker: &'a str,
    description: &'static str,
    alpha: f64,
    beta: f64,
    mean_rho: f64,
    loglik: f64,
    converged: bool,
    garch: [GarchSummary; 2],
}

#[derive(Serialize)]
struct JohansenRow<'a> {
    ticker: &'a str,
    series: [&'static str; 2],
    result: &'a JohansenResult,
}

const DCC_DESCRIPTION: &str = "sentiment z vs log return";

pub fn linkage(a: LinkageArgs) -> Result<()> {
    let mut s = Settings::load(a.common.config.as_deref(), "linkage")?;
    let setup = index_setup(&mut s, &a.index)?;
    let analyses: List = s.value(
        "analyses",
        a.analyses.as_deref().map(|v| v.parse().expect("infallible")),
        List(ANALYSES.map(String::from).to_vec()),
    )?;
    if analyses.0.is_empty() {
        return Err(Error::Input(
            "nothing requested: --analyses is empty (choose from adf, dcc, johansen)".into(),
        ));
    }
    if let Some(bad) = analyses.0.iter().find(|x| !ANALYSES.contains(&x.as_str())) {
        return Err(Error::Input(format!(
            "unknown analysis '{bad}' (expected adf, dcc or johansen)"
        )));
    }
    let wants = |name: &str| analyses.0.iter().any(|x| x == name);
    let adf_spec: AdfSpec = s
        .value("adf-spec", a.adf_spec.clone(), "constant".to_string())?
        .parse()
        .map_err(Error::Input)?;
    let adf_max_lags: Option<usize> = s.optional("adf-max-lags", a.adf_max_lags)?;
    let k = s.value("johansen-lags", a.johansen_lags, 1usize)?;
    let johansen_spec: JohansenSpec = s
        .value(
            "johansen-spec",
            a.johansen_spec.clone(),
            "unrestricted-constant".to_string(),
        )?
        .parse()
        .map_err(Error::Input)?;
    let config = s.finish()?;
    setup.check_inputs()?;

    let mut run = RunDir::create(&setup.out_dir, &config)?;
    let built = setup.build(&mut run)?;
    let pairs = &built.pairs;

    if wants("adf") {
        let mut checks = Vec::new();
        for p in pairs {
            checks.push((
                p.ticker.as_str(),
                "log price",
                check_i1(&p.log_price, adf_spec, adf_max_lags)?,
            ));
            checks.push((
                p.ticker.as_str(),
                "cumulative sentiment",
                check_i1(&p.cumulative_sentiment, adf_spec, adf_max_lags)?,
            ));
        }
        let rows: Vec<AdfRow> = checks
            .iter()
            .map(|(t, name, c)| AdfRow {
                ticker: t,
                series: name,
                is_i1: c.is_i1,
                levels: &c.levels,
                differences: &c.differences,
            })
            .collect();
        run.write_json("adf.json", &rows)?;
        let labels: Vec<(String, String)> = checks
            .iter()
            .flat_map(|(t, name, _)| {
                [
                    (t.to_string(), format!("{name} (level)")),
                    (t.to_string(), format!("{name} (difference)")),
                ]
            })
            .collect();
        let results: Vec<&AdfResult> = checks
            .iter()
            .flat_map(|(_, _, c)| [&c.levels, &c.differences])
            .collect();
        let table_rows: Vec<(&str, &str, &AdfResult)> = labels
            .iter()
            .zip(&results)
            .map(|((t, n), r)| (t.as_str(), n.as_str(), *r))
            .collect();
        run.write("adf.txt", render_adf_table(&table_rows).as_bytes())?;
        for (t, name, c) in &checks {
            run.log(format!(
                "adf {t} {name}: {}",
                if c.is_i1 { "I(1)" } else { "not I(1) at 5%" }
            ));
        }
    }

    if wants("dcc") {
        let mut fits = Vec::new();
        for p in pairs {
            let (z, r) = p.sentiment_return_pairs();
            let fit = fit_dcc(&z, &r).map_err(|e| Error::Input(format!("DCC for {}: {e}", p.ticker)))?;
            let mut csv = String::from("date,rho\n");
            for (d, rho) in p.dates[1..].iter().zip(&fit.rho_t) {
                csv.push_str(&format!("{d},{rho}\n"));
            }
            run.write(&format!("dcc-rho-{}.csv", p.ticker), csv.as_bytes())?;
            run.log(format!(
                "dcc {}: alpha {:.4}, beta {:.4}, mean rho {:.4}",
                p.ticker, fit.alpha, fit.beta, fit.mean_rho
            ));
            fits.push((p.ticker.as_str(), fit));
        }
        let rows: Vec<DccRow> = fits
            .iter()
            .map(|(t, f)| {
                let g = |series, x: &finsent::econ::GarchFit| GarchSummary {
                    series,
                    omega: x.omega,
                    alpha: x.alpha,
                    beta: x.beta,
                    loglik: x.loglik,
                };
                DccRow {
                    ticker: t,
                    description: DCC_DESCRIPTION,
                    alpha: f.alpha,
                    beta: f.beta,
                    mean_rho: f.mean_rho,
                    loglik: f.loglik,
                    converged: f.converged,
                    garch: [g("sentiment z", &f.garch[0]), g("log return", &f.garch[1])],
                }
            })
            .collect();
        run.write_json("dcc.json", &rows)?;
        let table: Vec<_> = fits.iter().map(|(t, f)| (*t, DCC_DESCRIPTION, f)).collect();
        run.write("dcc.txt", render_dcc_table(&table).as_bytes())?;
    }

    if wants("johansen") {
        let mut results = Vec::new();
        for p in pairs {
            let r = johansen_trace(&[p.log_price.clone(), p.cumulative_sentiment.clone()], k, johansen_spec)
                .map_err(|e| Error::Input(format!("Johansen for {}: {e}", p.ticker)))?;
            run.log(format!(
                "johansen {}: rank {} (trace r=0 {:.2})",
                p.ticker, r.rank, r.trace_stats[0]
            ));
            results.push((p.ticker.as_str(), r));
        }
        let rows: Vec<JohansenRow> = results
            .iter()
            .map(|(t, r)| JohansenRow {
                ticker: t,
                series: ["log price", "cumulative sentiment"],
                result: r,
            })
            .collect();
        run.write_json("johansen.json", &rows)?;
        let table: Vec<_> = results.iter().map(|(t, r)| (*t, r)).collect();
        run.write("johansen.txt", render_johansen_table(&table).as_bytes())?;
    }

    run.finish()?;
    println!("run directory: {}", setup.out_dir.display());
    Ok(())
}
