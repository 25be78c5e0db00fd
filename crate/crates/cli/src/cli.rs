use std::collections::BTreeSet;
use std::fmt::Display;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cfexplain::cf::{generate, CfQuery, DistanceMode, Optimizer, SchemaModel};
use cfexplain::importance::{global_importance, local_importance, ImportanceConfig};
use cfexplain::models::{
    cross_validate, evaluate, predicted_class, train, ModelConfig, ModelDocument, ModelKind,
};
use cfexplain::tabular::{
    feature_mads, smote_oversample, synth_generate, write_csv, Encoder, SynthConfig,
    DEFAULT_SMOTE_NEIGHBORS,
};

use crate::files::{
    load_dataset, load_instance, load_model, load_schema, read_text, to_json, write_text,
};

/// A failed operation and why.
#[derive(Debug, thiserror::Error)]
#[error("{operation} failed: {message}")]
pub struct CliError {
    pub operation: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(operation: &'static str, message: impl Display) -> Self {
        Self {
            operation,
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cfexplain", version, about = "Counterfactual explanations for tabular classifiers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset with a planted labeling rule.
    GenData(GenDataArgs),
    /// Train a model, cross-validate it and write the model and CV metrics.
    Train(TrainArgs),
    /// Score a saved model on a dataset.
    Evaluate(EvaluateArgs),
    /// Generate counterfactuals for one instance.
    Explain(ExplainArgs),
    /// Local (one instance) or global (whole dataset) feature importance.
    Importance(ImportanceArgs),
    /// Serve the HTTP JSON API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// Synthetic data config (JSON); the standard config when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Tree,
    Forest,
    Logistic,
}

impl From<KindArg> for ModelKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Tree => ModelKind::Tree,
            KindArg::Forest => ModelKind::Forest,
            KindArg::Logistic => ModelKind::Logistic,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "forest")]
    pub model_kind: KindArg,
    /// Training parameters (JSON, tagged by `model_kind`); defaults otherwise.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Number of CV folds; 0 skips cross-validation.
    #[arg(long, default_value_t = 5)]
    pub cv: usize,
    /// Balance training data (and each training fold) with SMOTE.
    #[arg(long)]
    pub smote: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "model.json")]
    pub out: PathBuf,
    #[arg(long, default_value = "cv_metrics.json")]
    pub metrics_out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OptimizerArg {
    Gradient,
    Evolutionary,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Categorical,
    Continuous,
}

impl From<ModeArg> for DistanceMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Categorical => DistanceMode::OrdinalAsCategorical,
            ModeArg::Continuous => DistanceMode::OrdinalAsContinuous,
        }
    }
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// JSON file holding `{"values": [...]}` or a bare array.
    #[arg(long)]
    pub instance: PathBuf,
    /// Target class; the opposite of the current prediction when omitted.
    #[arg(long)]
    pub target: Option<u8>,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Features that must not change (repeatable or comma separated).
    #[arg(long, value_delimiter = ',')]
    pub immutable: Vec<String>,
    #[arg(long, default_value_t = cfexplain::cf::DEFAULT_LAMBDA1)]
    pub lambda1: f64,
    #[arg(long, default_value_t = cfexplain::cf::DEFAULT_LAMBDA2)]
    pub lambda2: f64,
    #[arg(long, value_enum)]
    pub optimizer: Option<OptimizerArg>,
    #[arg(long, value_enum, default_value = "categorical")]
    pub distance_mode: ModeArg,
    #[arg(long, default_value_t = cfexplain::cf::DEFAULT_BUDGET)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ImportanceArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Local importance for this instance.
    #[arg(long, conflicts_with = "data", required_unless_present = "data")]
    pub instance: Option<PathBuf>,
    /// Global importance over this dataset.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Use only the first N rows of the dataset.
    #[arg(long, requires = "data")]
    pub limit: Option<usize>,
    #[arg(long, value_delimiter = ',', requires = "instance")]
    pub immutable: Vec<String>,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a ranked `feature,score` CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: String,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Dataset for GET /importance/global.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Use only the first N rows for global importance.
    #[arg(long, requires = "data")]
    pub global_limit: Option<usize>,
    /// Compute global importance at startup instead of on first request.
    #[arg(long, requires = "data")]
    pub precompute: bool,
    /// Seed for global importance.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn emit(out: Option<&PathBuf>, text: &str, what: &'static str) -> Result<(), CliError> {
    match out {
        Some(p) => write_text(p, text, what),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::GenData(a) => gen_data(a),
        Command::Train(a) => train_cmd(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Explain(a) => explain(a),
        Command::Importance(a) => importance(a),
        Command::Serve(a) => crate::server::serve_blocking(a),
    }
}

fn gen_data(a: GenDataArgs) -> Result<(), CliError> {
    log::info!("gen-data seed {}", a.seed);
    let mut config = match &a.config {
        Some(p) => serde_json::from_str(&read_text(p, "gen-data")?)
            .map_err(|e| CliError::new("gen-data", format!("{}: {e}", p.display())))?,
        None => SynthConfig::standard(),
    };
    if let Some(rows) = a.rows {
        config.rows = rows;
    }
    let data = synth_generate(&config, a.seed).map_err(|e| CliError::new("gen-data", e))?;
    let mut buf = Vec::new();
    write_csv(&data, &mut buf).map_err(|e| CliError::new("gen-data", e))?;
    write_text(&a.out, &String::from_utf8_lossy(&buf), "gen-data")?;
    log::info!("wrote {} rows to {}", data.len(), a.out.display());
    Ok(())
}

fn train_cmd(a: TrainArgs) -> Result<(), CliError> {
    log::info!("train seed {}", a.seed);
    let schema = load_schema(a.schema.as_deref())?;
    let data = load_dataset(&a.data, &schema)?;
    let kind = ModelKind::from(a.model_kind);
    let config = match &a.params {
        Some(p) => {
            let c: ModelConfig = serde_json::from_str(&read_text(p, "train")?)
                .map_err(|e| CliError::new("train", format!("{}: {e}", p.display())))?;
            if c.kind() != kind {
                return Err(CliError::new(
                    "train",
                    format!("params are for {:?} but --model-kind is {:?}", c.kind(), kind),
                ));
            }
            c
        }
        None => ModelConfig::default_for(kind),
    };
    let smote = a.smote.then_some(DEFAULT_SMOTE_NEIGHBORS);
    if a.cv > 0 {
        let report = cross_validate(&data, &config, a.cv, a.seed, smote)
            .map_err(|e| CliError::new("cross-validation", e))?;
        log::info!("{}-fold mean accuracy {:.4}", a.cv, report.mean.accuracy);
        write_text(&a.metrics_out, &to_json(&report), "write metrics")?;
    }
    let train_set = match smote {
        Some(nb) => smote_oversample(&data, nb, a.seed).map_err(|e| CliError::new("smote", e))?,
        None => data.clone(),
    };
    let model = train(&config, &train_set, a.seed).map_err(|e| CliError::new("train", e))?;
    // MADs come from the original rows, not SMOTE output.
    let mads = feature_mads(&data).map_err(|e| CliError::new("train", e))?;
    let doc = ModelDocument::new(model, &schema, mads);
    write_text(&a.out, &doc.to_json(), "write model")?;
    log::info!("wrote model to {}", a.out.display());
    Ok(())
}

fn evaluate_cmd(a: EvaluateArgs) -> Result<(), CliError> {
    let schema = load_schema(a.schema.as_deref())?;
    let doc = load_model(&a.model, &schema)?;
    let data = load_dataset(&a.data, &schema)?;
    let report = evaluate(&doc.model, &data).map_err(|e| CliError::new("evaluate", e))?;
    emit(a.out.as_ref(), &to_json(&report), "write metrics")
}

fn explain(a: ExplainArgs) -> Result<(), CliError> {
    log::info!("explain seed {}", a.seed);
    let schema = load_schema(a.schema.as_deref())?;
    let doc = load_model(&a.model, &schema)?;
    let origin = load_instance(&a.instance, &schema)?;
    let target = match a.target {
        Some(t) => t,
        None => {
            let p = doc
                .model
                .predict_proba(&Encoder::new(&schema).encode(&origin))
                .map_err(|e| CliError::new("explain", e))?;
            1 - predicted_class(p)
        }
    };
    let query = CfQuery {
        origin,
        target_class: target,
        k: a.k,
        immutable: a.immutable.into_iter().collect(),
        lambda1: a.lambda1,
        lambda2: a.lambda2,
        optimizer: a.optimizer.map(|o| match o {
            OptimizerArg::Gradient => Optimizer::Gradient,
            OptimizerArg::Evolutionary => Optimizer::Evolutionary,
        }),
        seed: a.seed,
        budget: a.budget,
        distance_mode: a.distance_mode.into(),
    };
    let set = generate(&query, &doc.model, &schema, &doc.feature_mads)
        .map_err(|e| CliError::new("counterfactual generation", e))?;
    log::info!("{} counterfactuals, {} evaluations", set.cfs.len(), set.evaluations_used);
    emit(a.out.as_ref(), &to_json(&set), "write counterfactuals")
}

fn importance(a: ImportanceArgs) -> Result<(), CliError> {
    log::info!("importance seed {}", a.seed);
    let schema = load_schema(a.schema.as_deref())?;
    let doc = load_model(&a.model, &schema)?;
    let classifier = SchemaModel::new(&doc.model, &schema)
        .ok_or_else(|| CliError::new("importance", "model width does not match schema"))?;
    let config = ImportanceConfig {
        k: a.k,
        ..ImportanceConfig::default()
    };
    let report = if let Some(path) = &a.instance {
        let origin = load_instance(path, &schema)?;
        let immutable: BTreeSet<String> = a.immutable.into_iter().collect();
        local_importance(&origin, &classifier, &schema, &doc.feature_mads, &immutable, &config, a.seed)
            .map_err(|e| CliError::new("local importance", e))?
    } else {
        let path = a.data.as_ref().expect("clap requires --instance or --data");
        let mut data = load_dataset(path, &schema)?;
        if let Some(n) = a.limit {
            data = data.subset(&(0..n.min(data.len())).collect::<Vec<_>>());
        }
        let g = global_importance(&data, &classifier, &doc.feature_mads, &config, a.seed)
            .map_err(|e| CliError::new("global importance", e))?;
        log::info!("{} instances covered, {} failed", g.report.instances_covered, g.report.failures);
        g.report
    };
    if let Some(csv) = &a.csv {
        let mut buf = Vec::new();
        report
            .write_csv(&mut buf)
            .map_err(|e| CliError::new("write importance csv", e))?;
        write_text(csv, &String::from_utf8_lossy(&buf), "write importance csv")?;
    }
    emit(a.out.as_ref(), &to_json(&report), "write importance")
}
