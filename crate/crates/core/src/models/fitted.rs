use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{FeatureMap, HazardModel};
use crate::casebase::CaseBaseSample;
use crate::error::{Error, Result};
use crate::neuralnet::{train_batch, Mode, Network, NetworkConfig, TrainingBatch, TrainingLog};

pub const MODEL_FORMAT_VERSION: u32 = 1;

const TIME_CONVENTION: &str = "time enters through the feature map on the raw follow-up scale of the training data";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Cbnn,
    Cblr,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Cbnn => "cbnn",
            ModelKind::Cblr => "cblr",
        }
    }
}

/// A network fitted to a case-base sample. Its raw output is the log-hazard.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseBaseModel {
    pub version: u32,
    pub kind: ModelKind,
    pub covariate_names: Vec<String>,
    pub feature_map: FeatureMap,
    pub config: NetworkConfig,
    /// `log(B / b)` of the training sample.
    pub offset: f64,
    pub time_convention: String,
    pub training_time_range: [f64; 2],
    pub training_log: TrainingLog,
    pub network: Network,
}

/// Fits `kind` on the sample's person-moments mapped through `map`. A CBLR
/// fit is the same trainer with no hidden layers.
pub fn fit_case_base(
    sample: &CaseBaseSample,
    kind: ModelKind,
    map: FeatureMap,
    config: &NetworkConfig,
) -> Result<CaseBaseModel> {
    if sample.is_empty() {
        return Err(Error::Domain("cannot fit an empty case-base sample".into()));
    }
    map.validate(sample.covariate_names.len())?;
    let mut config = config.clone();
    if kind == ModelKind::Cblr {
        config.hidden_layers.clear();
        config.dropout_rate = 0.0;
    }

    let width = map.width();
    let mut features = Array2::zeros((sample.len(), width));
    for (mut row, m) in features.rows_mut().into_iter().zip(&sample.moments) {
        map.fill_row(&m.covariates, m.time, row.as_slice_mut().expect("standard layout"));
    }
    let labels: Array1<f64> = sample.moments.iter().map(|m| f64::from(u8::from(m.case))).collect();
    let batch = TrainingBatch::new(features, labels, sample.offset)?;
    let trained = train_batch(&batch, &config)?;

    if kind == ModelKind::Cblr {
        let (_, grad) = trained
            .network
            .gradient(batch.features.view(), batch.labels.view(), batch.offset, Mode::Eval)?;
        let norm = grad.norm();
        if norm > 1e-3 {
            log::info!("logistic fit stopped with gradient norm {norm:.3e}; coefficients may not have converged");
        } else {
            log::debug!("logistic fit gradient norm {norm:.3e}");
        }
    }

    Ok(CaseBaseModel {
        version: MODEL_FORMAT_VERSION,
        kind,
        covariate_names: sample.covariate_names.clone(),
        feature_map: map,
        config,
        offset: sample.offset,
        time_convention: TIME_CONVENTION.into(),
        training_time_range: {
            let (lo, hi) = sample.time_range();
            [lo, hi]
        },
        training_log: trained.log,
        network: trained.network,
    })
}

/// Network on raw covariates and time.
pub fn fit_cbnn(sample: &CaseBaseSample, config: &NetworkConfig) -> Result<CaseBaseModel> {
    let map = FeatureMap::linear(sample.covariate_names.len());
    fit_case_base(sample, ModelKind::Cbnn, map, config)
}

/// Logistic regression on `map`'s design columns.
pub fn fit_cblr(sample: &CaseBaseSample, map: FeatureMap, config: &NetworkConfig) -> Result<CaseBaseModel> {
    fit_case_base(sample, ModelKind::Cblr, map, config)
}

impl CaseBaseModel {
    fn check_covariates(&self, covariates: &[f64]) -> Result<()> {
        if covariates.len() != self.covariate_names.len() {
            return Err(Error::Shape {
                expected: self.covariate_names.len(),
                actual: covariates.len(),
            });
        }
        Ok(())
    }

    /// Log-hazard at each time: network output with offset 0, no dropout.
    pub fn log_hazards(&self, covariates: &[f64], times: &[f64]) -> Result<Array1<f64>> {
        self.check_covariates(covariates)?;
        let mut design = Array2::zeros((times.len(), self.feature_map.width()));
        for (mut row, &t) in design.rows_mut().into_iter().zip(times) {
            if !(t >= 0.0) {
                return Err(Error::Domain(format!("hazard needs t >= 0, got {t}")));
            }
            self.feature_map
                .fill_row(covariates, t, row.as_slice_mut().expect("standard layout"));
        }
        self.network.forward(design.view(), 0.0, Mode::Eval)
    }

    /// Whether `t` lies past the last training person-moment.
    pub fn extrapolates(&self, t: f64) -> bool {
        t > self.training_time_range[1]
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(json)?;
        model.check_loaded()?;
        Ok(model)
    }

    fn check_loaded(&self) -> Result<()> {
        if self.version != MODEL_FORMAT_VERSION {
            return Err(Error::Config(format!(
                "model format version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                self.version
            )));
        }
        self.feature_map.validate(self.covariate_names.len())?;
        if self.network.input_dim() != self.feature_map.width() {
            return Err(Error::Shape {
                expected: self.feature_map.width(),
                actual: self.network.input_dim(),
            });
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer_pretty(BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

impl HazardModel for CaseBaseModel {
    fn num_covariates(&self) -> Option<usize> {
        Some(self.covariate_names.len())
    }

    fn hazard(&self, covariates: &[f64], t: f64) -> Result<f64> {
        Ok(self.hazards(covariates, &[t])?[0])
    }

    fn hazards(&self, covariates: &[f64], times: &[f64]) -> Result<Vec<f64>> {
        let log_h = self.log_hazards(covariates, times)?;
        log_h
            .iter()
            .zip(times)
            .map(|(&f, &t)| {
                let h = f.exp();
                if h.is_finite() {
                    Ok(h)
                } else {
                    Err(Error::Numeric(format!("hazard overflows at t = {t} (log-hazard {f})")))
                }
            })
            .collect()
    }
}
