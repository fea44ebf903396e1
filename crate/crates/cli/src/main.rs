//! `finsent`: features, meta-classifier training/evaluation, and the
//! sentiment/market linkage analyses from the command line.

mod classify;
mod linkage;
mod run;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "finsent",
    version,
    about = "Multi-expert sentiment stacking and market linkage"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the feature matrix for a record file as CSV.
    Features(FeaturesArgs),
    /// Print the semantic flags fired by each text (arguments, or stdin lines).
    Flags(FlagsArgs),
    /// Train a meta-classifier and save it as a model document.
    Train(TrainArgs),
    /// Predict labels for a record file with a saved model.
    Predict(PredictArgs),
    /// Cross-validate the meta-classifier per ablation, next to argmax baselines.
    Evaluate(EvaluateArgs),
    /// Build the daily sentiment index and align it with price series.
    Aggregate(AggregateArgs),
    /// Run ADF, DCC-GARCH and Johansen analyses on sentiment and prices.
    Linkage(LinkageArgs),
}

#[derive(Args)]
pub struct Common {
    /// Config file (sectioned key=value, one [section] per subcommand).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Args)]
pub struct SignalArgs {
    /// Record store (JSONL).
    #[arg(long)]
    pub records: Option<PathBuf>,
    /// Rule file for semantic flags [default: shipped rules].
    #[arg(long)]
    pub rules: Option<PathBuf>,
    /// Experts in layout order, comma-separated; the first survives no-roberta
    /// [default: finbert,roberta].
    #[arg(long)]
    pub experts: Option<String>,
}

#[derive(Args)]
pub struct HyperArgs {
    /// logreg or gbt [default: logreg].
    #[arg(long)]
    pub learner: Option<String>,
    /// Seed for fold shuffling and tree subsampling [default: 42].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Logreg: L2 penalty on weights [default: 0.01].
    #[arg(long)]
    pub l2_lambda: Option<f64>,
    /// Logreg: iteration cap [default: 5000].
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Logreg: gradient infinity-norm tolerance [default: 1e-8].
    #[arg(long)]
    pub tol: Option<f64>,
    /// GBT: boosting rounds [default: 200].
    #[arg(long)]
    pub rounds: Option<usize>,
    /// GBT: shrinkage [default: 0.1].
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// GBT: tree depth [default: 4].
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// GBT: minimum rows per leaf [default: 5].
    #[arg(long)]
    pub min_leaf: Option<usize>,
    /// GBT: row subsampling fraction per round [default: 0.8].
    #[arg(long)]
    pub subsample: Option<f64>,
    /// GBT: L2 penalty on leaf values [default: 1].
    #[arg(long)]
    pub lambda_leaf: Option<f64>,
}

#[derive(Args)]
pub struct FeaturesArgs {
    #[command(flatten)]
    pub signals: SignalArgs,
    /// full, no-roberta or no-semantics [default: full].
    #[arg(long)]
    pub ablation: Option<String>,
    /// Output CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args)]
pub struct FlagsArgs {
    /// Rule file [default: shipped rules].
    #[arg(long)]
    pub rules: Option<PathBuf>,
    /// Texts to tag; reads stdin lines when none are given.
    pub text: Vec<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub signals: SignalArgs,
    /// full, no-roberta or no-semantics [default: full].
    #[arg(long)]
    pub ablation: Option<String>,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Output model document (JSON).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args)]
pub struct PredictArgs {
    /// Model document written by `train`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Record store (JSONL).
    #[arg(long)]
    pub records: Option<PathBuf>,
    /// Output CSV `id,label,p_pos,p_neu,p_neg`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub signals: SignalArgs,
    /// full, no-roberta, no-semantics, or all [default: all].
    #[arg(long)]
    pub ablation: Option<String>,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Number of folds [default: 5].
    #[arg(long)]
    pub folds: Option<usize>,
    /// Deal classes round-robin over folds.
    #[arg(long)]
    pub stratified: bool,
    /// Grid-search around the learner defaults and report the best candidate.
    #[arg(long)]
    pub grid: bool,
    /// Run directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args)]
pub struct IndexArgs {
    /// Dated record store (JSONL).
    #[arg(long)]
    pub records: Option<PathBuf>,
    /// Price CSVs (`date,close`), comma-separated; ticker = file stem.
    #[arg(long)]
    pub prices: Option<String>,
    /// Expert whose posterior scores articles [default: finbert].
    #[arg(long)]
    pub expert: Option<String>,
    /// mean or sum of article scores per day [default: mean].
    #[arg(long)]
    pub reduce: Option<String>,
    /// roll-forward or drop articles on non-trading days [default: roll-forward].
    #[arg(long)]
    pub off_calendar: Option<String>,
    /// Run directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args)]
pub struct AggregateArgs {
    #[command(flatten)]
    pub index: IndexArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args)]
pub struct LinkageArgs {
    #[command(flatten)]
    pub index: IndexArgs,
    /// Comma-separated subset of adf,dcc,johansen [default: adf,dcc,johansen].
    #[arg(long)]
    pub analyses: Option<String>,
    /// ADF deterministics: constant or constant-trend [default: constant].
    #[arg(long)]
    pub adf_spec: Option<String>,
    /// ADF maximum lag for AIC selection [default: 12(T/100)^0.25].
    #[arg(long)]
    pub adf_max_lags: Option<usize>,
    /// Johansen lagged differences k [default: 1].
    #[arg(long)]
    pub johansen_lags: Option<usize>,
    /// Johansen deterministics: unrestricted-constant or no-deterministic
    /// [default: unrestricted-constant].
    #[arg(long)]
    pub johansen_spec: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Features(a) => classify::features(a),
        Command::Flags(a) => classify::flags(a),
        Command::Train(a) => classify::train(a),
        Command::Predict(a) => classify::predict(a),
        Command::Evaluate(a) => classify::evaluate(a),
        Command::Aggregate(a) => linkage::aggregate(a),
        Command::Linkage(a) => linkage::linkage(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
