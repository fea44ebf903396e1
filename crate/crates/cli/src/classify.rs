//! `features`, `flags`, `train`, `predict` and `evaluate`.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use finsent::meta::crossval::default_grid;
use finsent::meta::{
    argmax_baseline, crossval, grid_search, render_detail, render_table, Dataset, EvalReport, GbtHyper, Learner,
    LogRegHyper, ModelDocument, TableRow,
};
use finsent::records::{load_records_report, ExpertRecord};
use finsent::signals::{extract_matrix, Ablation, SignalConfig};
use finsent::{Error, Flag, Result, RuleSet};
use serde::{Deserialize, Serialize};

use crate::run::RunDir;
use crate::settings::{List, Settings};
use crate::{EvaluateArgs, FeaturesArgs, FlagsArgs, HyperArgs, PredictArgs, SignalArgs, TrainArgs};

const DEFAULT_EXPERTS: &str = "finbert,roberta";

pub fn require_file(path: &Path) -> Result<()> {
    if !path.is_file() {
        return Err(Error::Input(format!("{}: no such file", path.display())));
    }
    Ok(())
}

/// Where the flag rules came from, carried into model documents so that
/// `predict` rebuilds exactly the training layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSource {
    pub origin: String,
    pub text: String,
}

impl RuleSource {
    fn read(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(RuleSource {
                origin: "<default rules>".into(),
                text: finsent::flags::DEFAULT_RULES.into(),
            }),
            Some(p) => {
                require_file(p)?;
                Ok(RuleSource {
                    origin: p.display().to_string(),
                    text: std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?,
                })
            }
        }
    }

    fn compile(&self) -> Result<RuleSet> {
        RuleSet::parse(&self.text, &self.origin)
    }
}

struct SignalSetup {
    records: PathBuf,
    experts: Vec<String>,
    rules_path: Option<PathBuf>,
}

fn signal_setup(s: &mut Settings, a: &SignalArgs) -> Result<SignalSetup> {
    let records: PathBuf = s.required("records", a.records.clone())?;
    let default: List = DEFAULT_EXPERTS.parse().expect("infallible");
    let experts = s
        .value(
            "experts",
            a.experts.as_deref().map(|e| e.parse::<List>().expect("infallible")),
            default,
        )?
        .0;
    if experts.is_empty() {
        return Err(Error::Input("--experts lists no experts".into()));
    }
    let rules_path = s.optional("rules", a.rules.clone())?;
    Ok(SignalSetup {
        records,
        experts,
        rules_path,
    })
}

impl SignalSetup {
    /// Rules are read only when some requested ablation uses them.
    fn rules(&self, ablations: &[Ablation]) -> Result<Option<RuleSource>> {
        if ablations.iter().any(|a| a.uses_semantics()) {
            RuleSource::read(self.rules_path.as_deref()).map(Some)
        } else {
            Ok(None)
        }
    }

    fn config(&self, ablation: Ablation, rules: Option<&RuleSource>) -> Result<SignalConfig> {
        let compiled = match rules {
            Some(r) if ablation.uses_semantics() => Some(r.compile()?),
            _ => None,
        };
        SignalConfig::new(self.experts.clone(), ablation, compiled)
    }
}

fn load(path: &Path, log: &mut dyn FnMut(String)) -> Result<Vec<ExpertRecord>> {
    require_file(path)?;
    let loaded = load_records_report(path)?;
    log(format!(
        "loaded {} records from {}",
        loaded.records.len(),
        path.display()
    ));
    if !loaded.renormalized.is_empty() {
        log(format!(
            "renormalized posteriors summing within 1e-3 of 1 in {} records (first: {})",
            loaded.renormalized.len(),
            loaded.renormalized[0]
        ));
    }
    Ok(loaded.records)
}

/// The learner and the seed (shared by fold shuffling and tree subsampling).
fn learner(s: &mut Settings, h: &HyperArgs) -> Result<(Learner, u64)> {
    let kind = s.value("learner", h.learner.clone(), "logreg".to_string())?;
    let seed = s.value("seed", h.seed, 42u64)?;
    let gbt_only = "applies only to --learner gbt";
    let logreg_only = "applies only to --learner logreg";
    match kind.as_str() {
        "logreg" => {
            for (key, v) in [
                ("rounds", h.rounds.map(|v| v as f64)),
                ("max-depth", h.max_depth.map(|v| v as f64)),
                ("min-leaf", h.min_leaf.map(|v| v as f64)),
                ("learning-rate", h.learning_rate),
                ("subsample", h.subsample),
                ("lambda-leaf", h.lambda_leaf),
            ] {
                s.forbid(key, &v, gbt_only)?;
            }
            let d = LogRegHyper::default();
            let hyper = LogRegHyper {
                l2_lambda: s.value("l2-lambda", h.l2_lambda, d.l2_lambda)?,
                max_iters: s.value("max-iters", h.max_iters, d.max_iters)?,
                tol: s.value("tol", h.tol, d.tol)?,
            };
            Ok((Learner::Logreg(hyper), seed))
        }
        "gbt" => {
            for (key, v) in [
                ("l2-lambda", h.l2_lambda),
                ("max-iters", h.max_iters.map(|v| v as f64)),
                ("tol", h.tol),
            ] {
                s.forbid(key, &v, logreg_only)?;
            }
            let d = GbtHyper::default();
            let hyper = GbtHyper {
                n_rounds: s.value("rounds", h.rounds, d.n_rounds)?,
                learning_rate: s.value("learning-rate", h.learning_rate, d.learning_rate)?,
                max_depth: s.value("max-depth", h.max_depth, d.max_depth)?,
                min_leaf: s.value("min-leaf", h.min_leaf, d.min_leaf)?,
                subsample: s.value("subsample", h.subsample, d.subsample)?,
                lambda_leaf: s.value("lambda-leaf", h.lambda_leaf, d.lambda_leaf)?,
                seed,
            };
            Ok((Learner::Gbt(hyper), seed))
        }
        other => Err(Error::Input(format!(
            "unknown learner '{other}' (expected logreg or gbt)"
        ))),
    }
}

fn parse_ablation(s: &str) -> Result<Ablation> {
    s.parse().map_err(Error::Input)
}

fn learner_label(l: &Learner) -> &'static str {
    match l {
        Learner::Logreg(_) => "LogReg",
        Learner::Gbt(_) => "GBT",
    }
}

pub fn features(a: FeaturesArgs) -> Result<()> {
    let mut s = Settings::load(a.common.config.as_deref(), "features")?;
    let setup = signal_setup(&mut s, &a.signals)?;
    let ablation = parse_ablation(&s.value("ablation", a.ablation.clone(), "full".to_string())?)?;
    let out: PathBuf = s.required("out", a.out.clone())?;
    s.finish()?;

    let rules = setup.rules(&[ablation])?;
    let config = setup.config(ablation, rules.as_ref())?;
    let records = load(&setup.records, &mut |l| eprintln!("{l}"))?;
    let m = extract_matrix(&records, &config)?;
    let file = std::fs::File::create(&out).map_err(|e| Error::io(&out, e))?;
    m.write_csv(file)?;
    println!(
        "wrote {} rows x {} features to {}",
        m.n_rows(),
        m.n_cols(),
        out.display()
    );
    Ok(())
}

pub fn flags(a: FlagsArgs) -> Result<()> {
    let mut s = Settings::load(a.common.config.as_deref(), "flags")?;
    let rules_path: Option<PathBuf> = s.optional("rules", a.rules.clone())?;
    s.finish()?;
    let rules = RuleSource::read(rules_path.as_deref())?.compile()?;

    let texts: Vec<String> = if a.text.is_empty() {
        std::io::stdin()
            .lock()
            .lines()
            .collect::<std::io::Result<_>>()
            .map_err(|e| Error::io("<stdin>", e))?
    } else {
        a.text
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for text in texts {
        let f = rules.flag(&text);
        let line = serde_json::json!({
            "text": text,
            "active": f.active().iter().map(|f| f.name()).collect::<Vec<_>>(),
            "bits": Flag::ALL.iter().map(|&x| if f.get(x) { '1' } else { '0' }).collect::<String>(),
        });
        writeln!(out, "{line}").map_err(|e| Error::io("<stdout>", e))?;
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelConfig {
    experts: Vec<String>,
    ablation: Ablation,
    rules: Option<RuleSource>,
    learner: Learner,
    n_train: usize,
}

pub fn train(a: TrainArgs) -> Result<()> {
    let mut s = Settings::load(a.common.config.as_deref(), "train")?;
    let setup = signal_setup(&mut s, &a.signals)?;
    let ablation = parse_ablation(&s.value("ablation", a.ablation.clone(), "full".to_string())?)?;
    let (learner, _) = learner(&mut s, &a.hyper)?;
    let out: PathBuf = s.required("out", a.out.clone())?;
    s.finish()?;

    let rules = setup.rules(&[ablation])?;
    let config = setup.config(ablation, rules.as_ref())?;
    let records = load(&setup.records, &mut |l| eprintln!("{l}"))?;
    let data = Dataset::from_matrix(extract_matrix(&records, &config)?, vec![])?;
    let model = learner.train(&data)?;
    let hits = data
        .rows
        .iter()
        .zip(&data.labels)
        .map(|(x, y)| model.predict(x).map(|p| p.label == *y))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|&h| h)
        .count();
    let meta = ModelConfig {
        experts: setup.experts.clone(),
        ablation,
        rules,
        learner,
        n_train: data.len(),
    };
    let doc = ModelDocument::new(data.feature_names.clone(), serde_json::to_value(&meta)?, model);
    let mut json = doc.to_json()?;
    json.push('\n');
    std::fs::write(&out, json).map_err(|e| Error::io(&out, e))?;
    println!(
        "trained {} on {} rows x {} features (training accuracy {:.4}); model written to {}",
        meta.learner.name(),
        data.len(),
        data.n_features(),
        hits as f64 / data.len() as f64,
        out.display()
    );
    Ok(())
}

pub fn predict(a: PredictArgs) -> Result<()> {
    let mut s = Settings::load(a.common.config.as_deref(), "predict")?;
    let model_path: PathBuf = s.required("model", a.model.clone())?;
    let records_path: PathBuf = s.required("records", a.records.clone())?;
    let out: PathBuf = s.required("out", a.out.clone())?;
    s.finish()?;

    require_file(&model_path)?;
    let text = std::fs::read_to_string(&model_path).map_err(|e| Error::io(&model_path, e))?;
    let doc = ModelDocument::from_json(&text)?;
    let meta: ModelConfig = serde_json::from_value(doc.config.clone())?;
    let rules = meta.rules.as_ref().map(RuleSource::compile).transpose()?;
    let config = SignalConfig::new(meta.experts.clone(), meta.ablation, rules)?;
    if config.feature_names() != doc.feature_names {
        return Err(Error::Input(format!(
            "{}: stored feature names do not match the layout rebuilt from its config",
            model_path.display()
        )));
    }
    let records = load(&records_path, &mut |l| eprintln!("{l}"))?;
    let m = extract_matrix(&records, &config)?;

    let file = std::fs::File::create(&out).map_err(|e| Error::io(&out, e))?;
    let mut w = std::io::BufWriter::new(file);
    let io = |e| Error::io(&out, e);
    writeln!(w, "id,label,p_pos,p_neu,p_neg").map_err(io)?;
    let (mut labeled, mut hits) = (0, 0);
    for ((id, row), truth) in m.ids.iter().zip(&m.rows).zip(&m.labels) {
        let p = doc.model.predict(row)?;
        let [a, b, c] = p.posterior.as_array();
        writeln!(w, "{id},{},{a},{b},{c}", p.label).map_err(io)?;
        if let Some(t) = truth {
            labeled += 1;
            hits += usize::from(*t == p.label);
        }
    }
    w.flush().map_err(io)?;
    print!("wrote {} predictions to {}", m.n_rows(), out.display());
    if labeled > 0 {
        print!(
            " (accuracy {:.4} on {labeled} labeled records)",
            hits as f64 / labeled as f64
        );
    }
    println!();
    Ok(())
}

pub fn evaluate(a: EvaluateArgs) -> Result<()> {
    let mut s = Settings::load(a.common.config.as_deref(), "evaluate")?;
    let setup = signal_setup(&mut s, &a.signals)?;
    let ablation = s.value("ablation", a.ablation.clone(), "all".to_string())?;
    let ablations = if ablation == "all" {
        Ablation::ALL.to_vec()
    } else {
        vec![parse_ablation(&ablation)?]
    };
    let (learner, seed) = learner(&mut s, &a.hyper)?;
    let cv = finsent::meta::CvConfig {
        k: s.value("folds", a.folds, 5usize)?,
        seed,
        stratified: s.switch("stratified", a.stratified)?,
    };
    let grid = s.switch("grid", a.grid)?;
    let out_dir: PathBuf = s
        .hidden("out-dir", a.out_dir.clone())?
        .ok_or_else(|| Error::Input("missing --out-dir (or out-dir= in the config file)".into()))?;
    let config = s.finish()?;

    let rules = setup.rules(&ablations)?;
    require_file(&setup.records)?;
    let mut run = RunDir::create(&out_dir, &config)?;
    let records = load(&setup.records, &mut |l| run.log(l))?;
    let groups: Vec<Option<String>> = records.iter().map(|r| r.agreement.clone()).collect();

    let baselines = setup
        .experts
        .iter()
        .map(|e| argmax_baseline(&records, e))
        .collect::<Result<Vec<_>>>()?;
    run.write_json("baselines.json", &baselines)?;
    for b in &baselines {
        run.log(format!(
            "baseline {} argmax: accuracy {:.4}, macro-F1 {:.4}",
            b.expert, b.aggregate.accuracy, b.aggregate.macro_f1
        ));
    }

    let mut reports: Vec<EvalReport> = Vec::new();
    for &abl in &ablations {
        let signal = setup.config(abl, rules.as_ref())?;
        let data = Dataset::from_matrix(extract_matrix(&records, &signal)?, groups.clone())?;
        let mut report = if grid {
            let candidates = match &learner {
                Learner::Logreg(_) => default_grid("logreg", seed),
                Learner::Gbt(_) => default_grid("gbt", seed),
            };
            let ranked = grid_search(&data, &candidates, &cv)?;
            let summary: Vec<_> = ranked
                .iter()
                .map(|r| serde_json::json!({"learner": r.learner, "accuracy": r.aggregate.accuracy, "macro_f1": r.aggregate.macro_f1}))
                .collect();
            run.write_json(&format!("grid-{}.json", abl.as_str()), &summary)?;
            ranked.into_iter().next().expect("non-empty grid")
        } else {
            crossval(&data, &learner, &cv)?
        };
        report.config = abl.as_str().to_string();
        run.log(format!(
            "{} {}: {} rows x {} features, accuracy {:.4}, macro-F1 {:.4}",
            report.learner.name(),
            abl.as_str(),
            report.n,
            report.n_features,
            report.aggregate.accuracy,
            report.aggregate.macro_f1
        ));
        for c in &report.aggregate.absent_classes {
            run.log(format!("note: no {c} records; its F1 counts as 0 in macro-F1"));
        }
        run.write_json(&format!("report-{}.json", abl.as_str()), &report)?;
        reports.push(report);
    }

    let baseline_names: Vec<String> = baselines.iter().map(|b| format!("{} (argmax)", b.expert)).collect();
    let meta_names: Vec<String> = reports
        .iter()
        .map(|r| format!("Meta {} ({})", learner_label(&r.learner), r.config))
        .collect();
    let mut rows: Vec<TableRow> = baselines
        .iter()
        .zip(&baseline_names)
        .map(|(b, n)| TableRow::from_baseline(n, b))
        .collect();
    rows.extend(
        reports
            .iter()
            .zip(&meta_names)
            .map(|(r, n)| TableRow::from_report(n, r)),
    );
    let mut table = render_table(&rows);
    for r in &reports {
        table.push('\n');
        table.push_str(&render_detail(r));
    }
    run.write("table.txt", table.as_bytes())?;
    print!("{}", render_table(&rows));
    run.finish()?;
    println!("run directory: {}", out_dir.display());
    Ok(())
}
