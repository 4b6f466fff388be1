//! Command-line front end. Every subcommand reads an optional JSON config
//! (`--config`) whose fields are then overridden by explicit flags.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::casebase::{sample_case_base, DEFAULT_RATIO};
use crate::data::{infer_schema, load_dataset, save_dataset, split_dataset, ColumnSchema, SplitSpec, SurvivalDataset};
use crate::error::{Error, Result};
use crate::harness::{
    bootstrap_evaluate, grid_search, run_pipeline, write_risk_curves, DataSource, EvalGridSpec,
    GridOptions, ModelSpec, PipelineConfig, SearchSpace, CBLR_NAME, CBNN_NAME,
};
use crate::metrics::evaluate_suite;
use crate::models::{CaseBaseModel, FeatureMap, HazardModel};
use crate::neuralnet::NetworkConfig;
use crate::rng::{derive_seed, Stream};
use crate::simulation::{simulate_dataset, SimulationHazardSpec, SimulationMetadata};

#[derive(Debug, Parser)]
#[command(name = "cbnn", version, about = "Case-base neural networks for survival analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the spline-hazard cohort to CSV.
    Simulate(SimulateArgs),
    /// Split a CSV into train, validation and test files.
    Split(SplitArgs),
    /// Cross-validated hyperparameter search over a training CSV.
    Gridsearch(GridArgs),
    /// Fit a CBNN or CBLR model and write `model.json`.
    Fit(FitArgs),
    /// Score fitted models on a test CSV.
    Evaluate(EvaluateArgs),
    /// Bootstrap bands for CBNN and CBLR fitted with one network config.
    Bootstrap(BootstrapArgs),
    /// Run the whole workflow from a pipeline config or a run manifest.
    Pipeline(PipelineArgs),
}

/// Column mapping for an input CSV. Without `--covariates` the columns other
/// than time and status are used.
#[derive(Debug, Clone, Default, Args)]
pub struct SchemaArgs {
    #[arg(long)]
    pub time_col: Option<String>,
    #[arg(long)]
    pub status_col: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub covariates: Option<Vec<String>>,
}

/// A CSV input as it appears in subcommand configs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataInput {
    pub path: Option<PathBuf>,
    pub schema: Option<ColumnSchema>,
}

impl DataInput {
    fn apply(&mut self, path: Option<PathBuf>, schema: &SchemaArgs) {
        if path.is_some() {
            self.path = path;
        }
        if schema.time_col.is_none() && schema.status_col.is_none() && schema.covariates.is_none() {
            return;
        }
        let base = self.schema.clone().unwrap_or_else(|| ColumnSchema::canonical(&[]));
        let mut s = base;
        if let Some(t) = &schema.time_col {
            s.time_col = t.clone();
        }
        if let Some(c) = &schema.status_col {
            s.status_col = c.clone();
        }
        if let Some(cov) = &schema.covariates {
            s.covariates = cov.clone();
        }
        self.schema = Some(s);
    }

    pub fn load(&self, what: &str) -> Result<SurvivalDataset> {
        let path = self
            .path
            .as_ref()
            .ok_or_else(|| Error::Config(format!("no {what} CSV given")))?;
        let mut schema = match &self.schema {
            Some(s) => s.clone(),
            None => infer_schema(path)?,
        };
        if schema.covariates.is_empty() {
            let inferred = infer_schema(path)?;
            schema.covariates = inferred
                .covariates
                .into_iter()
                .filter(|c| *c != schema.time_col && *c != schema.status_col)
                .collect();
        }
        load_dataset(path, &schema)
    }
}

fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            Ok(serde_json::from_str(&text)?)
        }
    }
}

fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn out_dir(config_dir: &Option<PathBuf>, flag: &Option<PathBuf>) -> Result<PathBuf> {
    let dir = flag
        .clone()
        .or_else(|| config_dir.clone())
        .ok_or_else(|| Error::Config("no output directory given (--out)".into()))?;
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| Error::io(path, e))
}

fn set<T>(field: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *field = v;
    }
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Hazard spec JSON; missing fields take the built-in defaults.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Output CSV; metadata goes to the same stem with `.meta.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub n: usize,
    pub seed: u64,
    pub spec: SimulationHazardSpec,
    pub out: Option<PathBuf>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            seed: 0,
            spec: SimulationHazardSpec::default(),
            out: None,
        }
    }
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let mut config: SimulateConfig = load_config(args.config.as_deref())?;
    set(&mut config.n, args.n);
    set(&mut config.seed, args.seed);
    if let Some(spec) = &args.spec {
        config.spec = load_json(spec)?;
    }
    if args.out.is_some() {
        config.out = args.out;
    }
    let out = config
        .out
        .clone()
        .ok_or_else(|| Error::Config("no output CSV given (--out)".into()))?;
    let sim = simulate_dataset(config.n, &config.spec, config.seed)?;
    save_dataset(&out, &sim.dataset)?;
    let meta = SimulationMetadata::new(config.n, config.seed, &config.spec, sim.report);
    write_json(&out.with_extension("meta.json"), &meta)?;
    log::info!(
        "simulated {} subjects: {} events, {} randomly and {} administratively censored",
        sim.report.subjects,
        sim.report.events,
        sim.report.random_censored,
        sim.report.administrative_censored
    );
    Ok(())
}

// ------------------------------------------------------------------- split

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub schema: SchemaArgs,
    #[arg(long)]
    pub test_fraction: Option<f64>,
    #[arg(long)]
    pub validation_fraction: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub data: DataInput,
    pub split: SplitSpec,
    pub out: Option<PathBuf>,
}

fn split(args: SplitArgs) -> Result<()> {
    let mut config: SplitConfig = load_config(args.config.as_deref())?;
    config.data.apply(args.data, &args.schema);
    set(&mut config.split.test_fraction, args.test_fraction);
    set(&mut config.split.validation_fraction, args.validation_fraction);
    set(&mut config.split.seed, args.seed);
    let dir = out_dir(&config.out, &args.out)?;
    let d = config.data.load("input")?;
    let parts = split_dataset(&d, &config.split)?;
    save_dataset(dir.join("train.csv"), &parts.train)?;
    save_dataset(dir.join("validation.csv"), &parts.validation)?;
    save_dataset(dir.join("test.csv"), &parts.test)?;
    write_json(&dir.join("split.json"), &config)?;
    Ok(())
}

// -------------------------------------------------------------- gridsearch

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub schema: SchemaArgs,
    #[arg(long)]
    pub ratio: Option<usize>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub data: DataInput,
    pub space: SearchSpace,
    pub options: GridOptions,
    pub out: Option<PathBuf>,
}

fn gridsearch(args: GridArgs) -> Result<()> {
    let mut config: GridConfig = load_config(args.config.as_deref())?;
    config.data.apply(args.data, &args.schema);
    set(&mut config.options.ratio, args.ratio);
    set(&mut config.options.folds, args.folds);
    set(&mut config.options.seed, args.seed);
    set(&mut config.space.epochs, args.epochs);
    let dir = out_dir(&config.out, &args.out)?;
    let d = config.data.load("training")?;
    let result = grid_search(&d, &config.space, &config.options)?;
    result.write_csv(create(&dir.join("grid.csv"))?)?;
    write_json(&dir.join("selected.json"), result.selected_cell().spec.config())?;
    Ok(())
}

// --------------------------------------------------------------------- fit

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelChoice {
    Cbnn,
    Cblr,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub schema: SchemaArgs,
    #[arg(long, value_enum)]
    pub model: Option<ModelChoice>,
    /// Network config JSON, e.g. the `selected.json` of a grid search.
    #[arg(long)]
    pub network: Option<PathBuf>,
    /// Feature map JSON for CBLR.
    #[arg(long)]
    pub feature_map: Option<PathBuf>,
    #[arg(long)]
    pub ratio: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the case-base person-moment table to this CSV.
    #[arg(long)]
    pub dump_moments: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub data: DataInput,
    pub model: ModelChoice,
    pub network: NetworkConfig,
    /// CBLR design; covariates plus time by default.
    pub feature_map: Option<FeatureMap>,
    pub ratio: usize,
    pub seed: u64,
    pub dump_moments: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            data: DataInput::default(),
            model: ModelChoice::Cbnn,
            network: NetworkConfig::default(),
            feature_map: None,
            ratio: DEFAULT_RATIO,
            seed: 0,
            dump_moments: None,
            out: None,
        }
    }
}

fn fit(args: FitArgs) -> Result<()> {
    let mut config: FitConfig = load_config(args.config.as_deref())?;
    config.data.apply(args.data, &args.schema);
    set(&mut config.model, args.model);
    if let Some(p) = &args.network {
        config.network = load_json(p)?;
    }
    if let Some(p) = &args.feature_map {
        config.feature_map = Some(load_json(p)?);
    }
    set(&mut config.network.epochs, args.epochs);
    set(&mut config.ratio, args.ratio);
    set(&mut config.seed, args.seed);
    if args.dump_moments.is_some() {
        config.dump_moments = args.dump_moments;
    }
    let dir = out_dir(&config.out, &args.out)?;
    let d = config.data.load("training")?;
    let spec = match config.model {
        ModelChoice::Cbnn => ModelSpec::Cbnn {
            config: config.network.clone(),
        },
        ModelChoice::Cblr => ModelSpec::Cblr {
            feature_map: config
                .feature_map
                .clone()
                .unwrap_or_else(|| FeatureMap::linear(d.num_covariates())),
            config: config.network.clone(),
        },
    };
    if let Some(path) = &config.dump_moments {
        // Same stream as the fit below, so this is the sample it trains on.
        sample_case_base(&d, config.ratio, derive_seed(config.seed, Stream::CaseBase, 0))?.dump(path)?;
    }
    let model = spec.fit(&d, config.ratio, config.seed)?;
    model.save(dir.join("model.json"))?;
    Ok(())
}

// ---------------------------------------------------------------- evaluate

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Test CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub schema: SchemaArgs,
    /// `model.json`, optionally as `NAME=PATH`; repeatable.
    #[arg(long = "model")]
    pub models: Vec<String>,
    /// Explicit evaluation times.
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateConfig {
    pub data: DataInput,
    /// `NAME=PATH` or `PATH`; unnamed models are named by kind.
    pub models: Vec<String>,
    pub eval_grid: EvalGridSpec,
    pub risk_curve_subjects: usize,
    pub out: Option<PathBuf>,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        Self {
            data: DataInput::default(),
            models: Vec::new(),
            eval_grid: EvalGridSpec::default(),
            risk_curve_subjects: 10,
            out: None,
        }
    }
}

fn parse_model_arg(arg: &str) -> Result<(String, CaseBaseModel)> {
    let (name, path) = match arg.split_once('=') {
        Some((name, path)) => (Some(name.to_string()), path),
        None => (None, arg),
    };
    let model = CaseBaseModel::load(path)?;
    let name = name.unwrap_or_else(|| model.kind.as_str().to_uppercase());
    Ok((name, model))
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let mut config: EvaluateConfig = load_config(args.config.as_deref())?;
    config.data.apply(args.data, &args.schema);
    if !args.models.is_empty() {
        config.models = args.models;
    }
    if args.times.is_some() {
        config.eval_grid.times = args.times;
    }
    set(&mut config.eval_grid.points, args.points);
    if args.t_max.is_some() {
        config.eval_grid.t_max = args.t_max;
    }
    if config.models.is_empty() {
        return Err(Error::Config("no models given (--model)".into()));
    }
    let dir = out_dir(&config.out, &args.out)?;
    let test = config.data.load("test")?;
    let models: Vec<(String, CaseBaseModel)> = config.models.iter().map(|m| parse_model_arg(m)).collect::<Result<_>>()?;
    let (grid, t_max) = config.eval_grid.resolve(&test)?;
    let horizon = grid.last().copied().unwrap_or(t_max).max(test.max_time());
    for (name, model) in &models {
        if model.extrapolates(horizon) {
            let [lo, hi] = model.training_time_range;
            log::warn!("{name} is evaluated up to t = {horizon}, beyond its training follow-up range [{lo}, {hi}]");
        }
    }
    let refs: Vec<(&str, &dyn HazardModel)> = models.iter().map(|(n, m)| (n.as_str(), m as &dyn HazardModel)).collect();
    let suite = evaluate_suite(&refs, &test, &grid, t_max)?;
    suite.write_metrics_csv(create(&dir.join("metrics.csv"))?)?;
    suite.write_ibs_csv(create(&dir.join("ibs.csv"))?)?;
    suite.write_suite_csv(create(&dir.join("suite.csv"))?)?;
    write_risk_curves(&dir, &refs, &test, &grid, config.risk_curve_subjects)?;
    Ok(())
}

// --------------------------------------------------------------- bootstrap

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[command(flatten)]
    pub schema: SchemaArgs,
    #[arg(long)]
    pub network: Option<PathBuf>,
    #[arg(long)]
    pub n_boot: Option<usize>,
    #[arg(long)]
    pub ratio: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapConfig {
    pub train: DataInput,
    pub test: DataInput,
    pub network: NetworkConfig,
    pub cblr_map: Option<FeatureMap>,
    pub n_boot: usize,
    pub eval_grid: EvalGridSpec,
    pub ratio: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            train: DataInput::default(),
            test: DataInput::default(),
            network: NetworkConfig::default(),
            cblr_map: None,
            n_boot: 100,
            eval_grid: EvalGridSpec::default(),
            ratio: DEFAULT_RATIO,
            seed: 0,
            out: None,
        }
    }
}

fn bootstrap(args: BootstrapArgs) -> Result<()> {
    let mut config: BootstrapConfig = load_config(args.config.as_deref())?;
    config.train.apply(args.train, &args.schema);
    config.test.apply(args.test, &args.schema);
    if let Some(p) = &args.network {
        config.network = load_json(p)?;
    }
    set(&mut config.network.epochs, args.epochs);
    set(&mut config.n_boot, args.n_boot);
    set(&mut config.ratio, args.ratio);
    set(&mut config.seed, args.seed);
    let dir = out_dir(&config.out, &args.out)?;
    let train = config.train.load("training")?;
    let test = config.test.load("test")?;
    let specs = vec![
        (
            CBNN_NAME.to_string(),
            ModelSpec::Cbnn {
                config: config.network.clone(),
            },
        ),
        (
            CBLR_NAME.to_string(),
            ModelSpec::Cblr {
                feature_map: config
                    .cblr_map
                    .clone()
                    .unwrap_or_else(|| FeatureMap::linear(train.num_covariates())),
                config: config.network.clone(),
            },
        ),
    ];
    let (grid, t_max) = config.eval_grid.resolve(&test)?;
    let result = bootstrap_evaluate(&train, &test, &specs, config.n_boot, &grid, t_max, config.ratio, config.seed)?;
    result.point.write_metrics_csv(create(&dir.join("metrics.csv"))?)?;
    result.point.write_ibs_csv(create(&dir.join("ibs.csv"))?)?;
    Ok(())
}

// ---------------------------------------------------------------- pipeline

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Pipeline config, or the `manifest.json` of an earlier run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Use this CSV instead of the configured source.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub schema: SchemaArgs,
    /// Simulate this many subjects instead of the configured source.
    #[arg(long, conflicts_with = "data")]
    pub n: Option<usize>,
    #[arg(long)]
    pub bootstrap: Option<usize>,
    #[arg(long)]
    pub ratio: Option<usize>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn pipeline(args: PipelineArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(path) = args.data {
        let mut input = DataInput::default();
        input.apply(Some(path.clone()), &args.schema);
        config.data = DataSource::File {
            path,
            schema: input.schema,
        };
    } else if let Some(n) = args.n {
        let spec = match &config.data {
            DataSource::Simulate { spec, .. } => spec.clone(),
            DataSource::File { .. } => SimulationHazardSpec::default(),
        };
        config.data = DataSource::Simulate { n, spec };
    }
    set(&mut config.bootstrap, args.bootstrap);
    set(&mut config.ratio, args.ratio);
    set(&mut config.folds, args.folds);
    set(&mut config.seed, args.seed);
    set(&mut config.output_dir, args.out);
    let out = run_pipeline(&config)?;
    for m in &out.summary.models {
        log::info!("{}: IBS {:.5}", m.name, m.ibs);
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Split(a) => split(a),
        Command::Gridsearch(a) => gridsearch(a),
        Command::Fit(a) => fit(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Bootstrap(a) => bootstrap(a),
        Command::Pipeline(a) => pipeline(a),
    }
}
