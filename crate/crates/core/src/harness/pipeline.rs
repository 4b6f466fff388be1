use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::bootstrap::{attach_bands, bootstrap_replicates, fit_specs, Replicates};
use super::grid::{grid_search, GridOptions, GridResult, SearchSpace};
use super::{assign_folds, ModelSpec};
use crate::casebase::DEFAULT_RATIO;
use crate::data::{infer_schema, load_dataset, split_dataset, ColumnSchema, SplitSpec, SurvivalDataset};
use crate::error::{Error, Result};
use crate::metrics::{
    default_eval_grid, evaluate_suite, predict, Band, SuiteResult, DEFAULT_EVAL_POINTS, NULL_MODEL_NAME,
};
use crate::models::{kaplan_meier, CaseBaseModel, FeatureMap, HazardModel, KmTarget};
use crate::neuralnet::NetworkConfig;
use crate::rng::{derive_seed, Stream};
use crate::simulation::{simulate_dataset, CensoringReport, SimulationHazardSpec, SimulationMetadata};

pub const MANIFEST_VERSION: u32 = 1;

pub const CBNN_NAME: &str = "CBNN";
pub const CBLR_NAME: &str = "CBLR";
pub const OPTIMAL_NAME: &str = "Optimal";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase", deny_unknown_fields)]
pub enum DataSource {
    /// A headed CSV; without a schema the columns `time`, `status` and all
    /// others as covariates are assumed.
    File {
        path: PathBuf,
        #[serde(default)]
        schema: Option<ColumnSchema>,
    },
    /// The built-in simulation, seeded by the pipeline's master seed.
    Simulate {
        n: usize,
        #[serde(default)]
        spec: SimulationHazardSpec,
    },
}

/// Evaluation times: explicit, or equally spaced between the test set's 1st
/// and 99th follow-up percentiles, merged with the given fractions of the
/// test set's largest follow-up time. `t_max` defaults to the last time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalGridSpec {
    pub points: usize,
    pub times: Option<Vec<f64>>,
    pub follow_up_fractions: Vec<f64>,
    pub t_max: Option<f64>,
}

impl EvalGridSpec {
    /// The evaluation times and `t_max` for test set `test`.
    pub fn resolve(&self, test: &SurvivalDataset) -> Result<(Vec<f64>, f64)> {
        let mut grid = match &self.times {
            Some(times) => times.clone(),
            None => default_eval_grid(test, self.points)?,
        };
        if let Some(f) = self.follow_up_fractions.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
            return Err(Error::Config(format!("follow-up fraction {f} is outside (0, 1]")));
        }
        let max = test.max_time();
        grid.extend(self.follow_up_fractions.iter().map(|f| f * max));
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let last = *grid
            .last()
            .ok_or_else(|| Error::Config("evaluation grid is empty".into()))?;
        Ok((grid, self.t_max.unwrap_or(last)))
    }
}

impl Default for EvalGridSpec {
    fn default() -> Self {
        Self {
            points: DEFAULT_EVAL_POINTS,
            times: None,
            follow_up_fractions: vec![0.25, 0.5, 0.75],
            t_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub data: DataSource,
    /// Its `seed` is replaced by one derived from `seed`.
    pub split: SplitSpec,
    pub ratio: usize,
    /// Searched over train plus validation; exclusive with `network`.
    pub search: Option<SearchSpace>,
    /// Fixed CBNN settings; exclusive with `search`.
    pub network: Option<NetworkConfig>,
    pub folds: usize,
    /// Design of the CBLR comparator; covariates plus time by default.
    pub cblr_map: Option<FeatureMap>,
    pub bootstrap: usize,
    pub eval_grid: EvalGridSpec,
    /// Test subjects whose risk curves are exported.
    pub risk_curve_subjects: usize,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            data: DataSource::Simulate {
                n: 5000,
                spec: SimulationHazardSpec::default(),
            },
            split: SplitSpec::default(),
            ratio: DEFAULT_RATIO,
            search: Some(SearchSpace::default()),
            network: None,
            folds: 3,
            cblr_map: None,
            bootstrap: 100,
            eval_grid: EvalGridSpec::default(),
            risk_curve_subjects: 10,
            output_dir: PathBuf::from("out"),
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        match (&self.search, &self.network) {
            (Some(space), None) => space.validate()?,
            (None, Some(config)) => config.validate()?,
            _ => {
                return Err(Error::Config(
                    "exactly one of `search` and `network` must be given".into(),
                ))
            }
        }
        if self.ratio < 1 {
            return Err(Error::Config("ratio must be >= 1".into()));
        }
        if self.folds < 2 {
            return Err(Error::Config("folds must be >= 2".into()));
        }
        self.split.validate()?;
        if let DataSource::Simulate { n, spec } = &self.data {
            spec.validate()?;
            if *n == 0 {
                return Err(Error::Config("simulated cohort size must be >= 1".into()));
            }
        }
        if self.eval_grid.times.is_none() && self.eval_grid.points < 2 {
            return Err(Error::Config("evaluation grid needs >= 2 points".into()));
        }
        Ok(())
    }

    /// Reads a pipeline config, or the config stored in a run manifest.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        if value.get("manifest_version").is_some() {
            let manifest: Manifest = serde_json::from_value(value)?;
            Ok(manifest.config)
        } else {
            Ok(serde_json::from_value(value)?)
        }
    }
}

/// Everything needed to rerun a pipeline; contains no timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub manifest_version: u32,
    pub crate_version: String,
    pub config: PipelineConfig,
    pub seeds: BTreeMap<String, u64>,
    pub conventions: Vec<String>,
}

const CONVENTIONS: &[&str] = &[
    "hazard = exp(network output) with the sampling offset log(B/b) removed and dropout off",
    "risk F(t) = 1 - exp(-midpoint Riemann sum of the hazard) on a 512-point grid joined with the evaluation times",
    "Kaplan-Meier: product-limit with risk set #{T >= s}; the null model and censoring weights are fitted on the evaluation set",
    "IPCW: event terms weighted by 1/G(T_i-), at-risk terms by 1/G(t)",
    "AUC: ties in predicted risk count 1/2",
    "IBS: trapezoid rule over [0, t_max] with weight dt/t_max",
    "grid search: 3-fold cross-validation on train plus validation, ties broken by (parameters, learning rate, cell index)",
    "final models and bootstrap replicates are fitted on the training split; metrics are on the test split",
    "bootstrap bands: 2.5 and 97.5 percentiles over successful replicates; point estimate from the fit on the full training split",
    "simulated normal covariates use standard deviation 0.5",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub name: String,
    pub ibs: f64,
    pub ibs_band: Option<Band>,
    pub ipa_at_t_max: Option<f64>,
    pub auc_at_t_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub subjects: usize,
    pub train: usize,
    pub validation: usize,
    pub test: usize,
    pub train_events: usize,
    pub test_events: usize,
    /// Largest follow-up time in the test split.
    pub test_max_time: f64,
    pub simulation: Option<CensoringReport>,
    pub selected: NetworkConfig,
    pub grid_cells: usize,
    /// IBS of the final models on the validation split.
    pub validation_ibs: BTreeMap<String, f64>,
    pub t_max: f64,
    pub models: Vec<ModelSummary>,
    pub bootstrap_requested: usize,
    pub bootstrap_succeeded: usize,
    pub bootstrap_failed: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub dir: PathBuf,
    pub suite: SuiteResult,
    pub grid: Option<GridResult>,
    pub replicates: Replicates,
    pub summary: Summary,
    pub models: Vec<(String, CaseBaseModel)>,
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.in_stage(name))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn named_seeds(seed: u64) -> BTreeMap<String, u64> {
    BTreeMap::from([
        ("master".to_string(), seed),
        ("split".to_string(), derive_seed(seed, Stream::Split, 0)),
        ("grid".to_string(), derive_seed(seed, Stream::Grid, 0)),
        ("evaluate".to_string(), derive_seed(seed, Stream::Fit, 0)),
    ])
}

/// Load or simulate, split, search (or take the fixed config), fit CBNN,
/// CBLR and (for simulated data) the true-design CBLR, evaluate against the
/// Kaplan-Meier null on the test split with bootstrap bands, and write the
/// bundle. Files are written as each stage completes, so a failing stage
/// leaves the earlier outputs in place.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutput> {
    stage("config", config.validate())?;
    let dir = config.output_dir.clone();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e).in_stage("write"))?;
    let seeds = named_seeds(config.seed);
    let mut effective = config.clone();
    effective.split.seed = seeds["split"];
    let manifest = Manifest {
        manifest_version: MANIFEST_VERSION,
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        config: effective.clone(),
        seeds: seeds.clone(),
        conventions: CONVENTIONS.iter().map(|s| s.to_string()).collect(),
    };
    stage("write", write_json(&dir.join("manifest.json"), &manifest))?;

    let (data, simulation, optimal_map) = stage("data", load_data(config))?;
    if config.search.is_some() && data.event_count() < config.folds {
        // Any search subset then has an eventless fold; fail before splitting.
        stage("grid_search", assign_folds(&data, config.folds, seeds["grid"]))?;
    }
    let split = stage("split", split_dataset(&data, &effective.split))?;
    let (train, validation, test) = (&split.train, &split.validation, &split.test);

    let (selected, grid) = match (&config.search, &config.network) {
        (Some(space), _) => {
            let mut records = train.records().to_vec();
            records.extend_from_slice(validation.records());
            let pooled = stage("grid_search", SurvivalDataset::new(data.covariate_names().to_vec(), records))?;
            let options = GridOptions {
                ratio: config.ratio,
                folds: config.folds,
                seed: seeds["grid"],
            };
            let result = stage("grid_search", grid_search(&pooled, space, &options))?;
            stage("write", result.write_csv(create(&dir.join("grid.csv"))?))?;
            (result.selected_cell().spec.config().clone(), Some(result))
        }
        (None, Some(network)) => (network.clone(), None),
        (None, None) => unreachable!("validated"),
    };

    let mut specs = vec![
        (CBNN_NAME.to_string(), ModelSpec::Cbnn { config: selected.clone() }),
        (
            CBLR_NAME.to_string(),
            ModelSpec::Cblr {
                feature_map: config
                    .cblr_map
                    .clone()
                    .unwrap_or_else(|| FeatureMap::linear(data.num_covariates())),
                config: selected.clone(),
            },
        ),
    ];
    if let Some(map) = optimal_map {
        specs.push((
            OPTIMAL_NAME.to_string(),
            ModelSpec::Cblr {
                feature_map: map,
                config: selected.clone(),
            },
        ));
    }

    let eval_seed = seeds["evaluate"];
    let models = stage("fit", fit_specs(&specs, train, config.ratio, derive_seed(eval_seed, Stream::Fit, 0)))?;
    for (name, model) in &models {
        let file = if name == CBNN_NAME {
            "model.json".to_string()
        } else {
            format!("model_{}.json", name.to_lowercase())
        };
        stage("write", model.save(dir.join(file)))?;
    }

    let (grid_times, t_max) = stage("evaluate", config.eval_grid.resolve(test))?;
    let refs: Vec<(&str, &dyn HazardModel)> = models.iter().map(|(n, m)| (n.as_str(), m as &dyn HazardModel)).collect();
    let mut suite = stage("evaluate", evaluate_suite(&refs, test, &grid_times, t_max))?;
    let validation_ibs = stage("evaluate", validation_scores(&refs, validation, config.eval_grid.points))?;
    stage("write", write_risk_curves(&dir, &refs, test, &grid_times, config.risk_curve_subjects))?;

    let fit = |d: &SurvivalDataset, s: u64| -> Result<Vec<(String, Box<dyn HazardModel>)>> {
        Ok(fit_specs(&specs, d, config.ratio, s)?
            .into_iter()
            .map(|(n, m)| (n, Box::new(m) as Box<dyn HazardModel>))
            .collect())
    };
    let replicates = stage(
        "bootstrap",
        bootstrap_replicates(train, test, &fit, config.bootstrap, &grid_times, t_max, eval_seed),
    )?;
    if config.bootstrap > 0 {
        attach_bands(&mut suite, &replicates);
    }
    stage("write", replicates.write_csv(create(&dir.join("replicates.csv"))?))?;

    stage("write", suite.write_metrics_csv(create(&dir.join("metrics.csv"))?))?;
    stage("write", suite.write_ibs_csv(create(&dir.join("ibs.csv"))?))?;
    stage("write", suite.write_suite_csv(create(&dir.join("suite.csv"))?))?;

    let summary = Summary {
        subjects: data.len(),
        train: train.len(),
        validation: validation.len(),
        test: test.len(),
        train_events: train.event_count(),
        test_events: test.event_count(),
        test_max_time: test.max_time(),
        simulation,
        selected,
        grid_cells: grid.as_ref().map_or(0, |g| g.cells.len()),
        validation_ibs,
        t_max,
        models: suite
            .models
            .iter()
            .map(|m| ModelSummary {
                name: m.name.clone(),
                ibs: m.ibs,
                ibs_band: m.ibs_band,
                ipa_at_t_max: m.ipa.at(t_max),
                auc_at_t_max: m.auc.at(t_max),
            })
            .collect(),
        bootstrap_requested: replicates.requested,
        bootstrap_succeeded: replicates.suites.len(),
        bootstrap_failed: replicates.failures.iter().map(|(r, _)| *r).collect(),
    };
    stage("write", write_json(&dir.join("summary.json"), &summary))?;

    Ok(PipelineOutput {
        dir,
        suite,
        grid,
        replicates,
        summary,
        models,
    })
}

type Loaded = (SurvivalDataset, Option<CensoringReport>, Option<FeatureMap>);

fn load_data(config: &PipelineConfig) -> Result<Loaded> {
    match &config.data {
        DataSource::File { path, schema } => {
            let schema = match schema {
                Some(s) => s.clone(),
                None => infer_schema(path)?,
            };
            Ok((load_dataset(path, &schema)?, None, None))
        }
        DataSource::Simulate { n, spec } => {
            let sim = simulate_dataset(*n, spec, config.seed)?;
            let meta = SimulationMetadata::new(*n, config.seed, spec, sim.report);
            write_json(&config.output_dir.join("simulation.json"), &meta)?;
            Ok((sim.dataset, Some(sim.report), Some(FeatureMap::simulation_truth(spec.basis))))
        }
    }
}

fn validation_scores(
    models: &[(&str, &dyn HazardModel)],
    validation: &SurvivalDataset,
    points: usize,
) -> Result<BTreeMap<String, f64>> {
    let grid = default_eval_grid(validation, points.max(2))?;
    let t_max = *grid.last().expect("nonempty");
    let suite = evaluate_suite(models, validation, &grid, t_max)?;
    Ok(suite.models.iter().map(|m| (m.name.clone(), m.ibs)).collect())
}

/// Writes `risk_curves.csv` (`model,subject,time,value`) for the first
/// `count` subjects of `test` on `[0] ∪ grid`, Kaplan-Meier last.
pub fn write_risk_curves(
    dir: &Path,
    models: &[(&str, &dyn HazardModel)],
    test: &SurvivalDataset,
    grid: &[f64],
    count: usize,
) -> Result<()> {
    let subjects: Vec<usize> = (0..count.min(test.len())).collect();
    let head = test.subset(&subjects);
    let mut times = vec![0.0];
    times.extend(grid.iter().copied().filter(|&t| t > 0.0));
    let km = kaplan_meier(test, KmTarget::Event)?;
    let mut w = csv::Writer::from_writer(create(&dir.join("risk_curves.csv"))?);
    w.write_record(["model", "subject", "time", "value"])?;
    for &(name, model) in models {
        let pred = predict(model, &head, &times)?;
        for (i, row) in pred.values().rows().into_iter().enumerate() {
            for (t, v) in times.iter().zip(row) {
                w.write_record([name.to_string(), i.to_string(), t.to_string(), v.to_string()])?;
            }
        }
    }
    for i in 0..head.len() {
        for &t in &times {
            w.write_record([
                NULL_MODEL_NAME.to_string(),
                i.to_string(),
                t.to_string(),
                (1.0 - km.eval(t)).to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(dir.join("risk_curves.csv"), e))?;
    Ok(())
}
