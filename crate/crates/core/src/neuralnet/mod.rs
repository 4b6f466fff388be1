//! A small dense feed-forward network whose single output unit receives a
//! constant offset before the sigmoid.
//!
//! The offset carries the case-base sampling correction `log(B / b)`: it takes
//! part in the loss but is never a parameter, so at prediction time the raw
//! network output is the log-hazard.

mod adam;
mod loss;
mod network;
mod train;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::casebase::CaseBaseSample;
use crate::error::{Error, Result};

pub use adam::{adam_step, AdamState, ADAM_BETA1, ADAM_BETA2, ADAM_EPSILON};
pub use loss::{bce_loss, sigmoid};
pub use network::{init_network, Gradients, LayerParams, Mode, Network};
pub use train::{train, train_batch, train_from, TrainedNetwork, TrainingLog};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Linear,
}

impl Activation {
    pub fn as_str(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Linear => "linear",
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "relu" => Ok(Activation::Relu),
            "linear" => Ok(Activation::Linear),
            other => Err(Error::Config(format!("unknown activation `{other}`"))),
        }
    }
}

/// Architecture and optimisation settings for one network fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    /// Hidden layer widths; empty means logistic regression.
    pub hidden_layers: Vec<usize>,
    pub activation: Activation,
    pub dropout_rate: f64,
    pub learning_rate: f64,
    /// Mini-batches per epoch.
    pub num_batches: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            hidden_layers: vec![50, 25],
            activation: Activation::Relu,
            dropout_rate: 0.05,
            learning_rate: 0.01,
            num_batches: 100,
            epochs: 200,
            seed: 0,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_layers.contains(&0) {
            return Err(Error::Config("hidden layers must have at least one unit".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::Config(format!(
                "dropout rate must lie in [0, 1), got {}",
                self.dropout_rate
            )));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.num_batches == 0 || self.epochs == 0 {
            return Err(Error::Config("num_batches and epochs must be >= 1".into()));
        }
        Ok(())
    }

    /// Weights plus biases for a network with `input_dim` inputs.
    pub fn parameter_count(&self, input_dim: usize) -> usize {
        let mut count = 0;
        let mut fan_in = input_dim;
        for &width in self.hidden_layers.iter().chain(std::iter::once(&1)) {
            count += fan_in * width + width;
            fan_in = width;
        }
        count
    }
}

/// Rows are person-moments; columns are the network inputs.
#[derive(Debug, Clone)]
pub struct TrainingBatch {
    pub features: Array2<f64>,
    pub labels: Array1<f64>,
    pub offset: f64,
}

impl TrainingBatch {
    pub fn new(features: Array2<f64>, labels: Array1<f64>, offset: f64) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::Shape {
                expected: features.nrows(),
                actual: labels.len(),
            });
        }
        if labels.iter().any(|&y| y != 0.0 && y != 1.0) {
            return Err(Error::Domain("labels must be 0 or 1".into()));
        }
        if !offset.is_finite() {
            return Err(Error::Domain(format!("offset must be finite, got {offset}")));
        }
        Ok(Self {
            features,
            labels,
            offset,
        })
    }

    /// Raw inputs: covariates followed by time.
    pub fn from_sample(sample: &CaseBaseSample) -> Result<Self> {
        let p = sample.covariate_names.len();
        let mut features = Array2::zeros((sample.len(), p + 1));
        for (mut row, m) in features.rows_mut().into_iter().zip(&sample.moments) {
            for (dst, &v) in row.iter_mut().zip(&m.covariates) {
                *dst = v;
            }
            row[p] = m.time;
        }
        let labels = sample.moments.iter().map(|m| f64::from(u8::from(m.case))).collect();
        Self::new(features, labels, sample.offset)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.features.ncols()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_count_matches_shapes() {
        let cfg = NetworkConfig {
            hidden_layers: vec![50, 10],
            ..NetworkConfig::default()
        };
        assert_eq!(cfg.parameter_count(4), 771);
        let logistic = NetworkConfig {
            hidden_layers: vec![],
            ..NetworkConfig::default()
        };
        assert_eq!(logistic.parameter_count(4), 5);
    }

    #[test]
    fn config_validation() {
        let mut cfg = NetworkConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.dropout_rate = 1.0;
        assert!(cfg.validate().is_err());
        cfg.dropout_rate = 0.0;
        cfg.hidden_layers = vec![3, 0];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_json_defaults_fill_missing_fields() {
        let cfg: NetworkConfig = serde_json::from_str(r#"{"hidden_layers":[8],"activation":"linear"}"#).unwrap();
        assert_eq!(cfg.hidden_layers, vec![8]);
        assert_eq!(cfg.activation, Activation::Linear);
        assert_eq!(cfg.epochs, NetworkConfig::default().epochs);
    }
}
