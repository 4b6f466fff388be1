use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::loss::{pointwise, sigmoid};
use super::{Activation, NetworkConfig, TrainingBatch};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded, Stream};

/// Weights are stored `inputs x outputs` so a layer is `X · W + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl LayerParams {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            weights: Array2::zeros((inputs, outputs)),
            bias: Array1::zeros(outputs),
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.nrows()
    }

    pub fn outputs(&self) -> usize {
        self.weights.ncols()
    }

    fn zeros_like(&self) -> Self {
        Self::zeros(self.inputs(), self.outputs())
    }

    fn values(&self) -> impl Iterator<Item = &f64> {
        self.weights.iter().chain(self.bias.iter())
    }
}

/// Gradient of the loss with respect to every layer, congruent to the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients(pub Vec<LayerParams>);

impl Gradients {
    pub fn norm(&self) -> f64 {
        self.0
            .iter()
            .flat_map(LayerParams::values)
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.0.iter().flat_map(LayerParams::values).copied().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// No dropout; deterministic.
    Eval,
    /// Inverted dropout on hidden units, masks drawn from `seed`.
    Train { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "NetworkJson", try_from = "NetworkJson")]
pub struct Network {
    pub activation: Activation,
    pub dropout_rate: f64,
    pub layers: Vec<LayerParams>,
    pub(crate) adam: AdamState,
}

struct HiddenTrace {
    pre: Array2<f64>,
    out: Array2<f64>,
    /// Inverted-dropout multipliers (0 or 1 / keep), train mode only.
    mask: Option<Array2<f64>>,
}

struct Trace {
    hidden: Vec<HiddenTrace>,
    logits: Array1<f64>,
}

/// Glorot-uniform weights, zero biases.
pub fn init_network(config: &NetworkConfig, input_dim: usize) -> Result<Network> {
    config.validate()?;
    if input_dim == 0 && !config.hidden_layers.is_empty() {
        return Err(Error::Config("a network with hidden layers needs at least one input".into()));
    }
    let mut rng = seeded(derive_seed(config.seed, Stream::Init, 0));
    let mut layers = Vec::with_capacity(config.hidden_layers.len() + 1);
    let mut fan_in = input_dim;
    for &width in config.hidden_layers.iter().chain(std::iter::once(&1)) {
        let bound = (6.0 / (fan_in + width) as f64).sqrt();
        let weights = Array2::from_shape_simple_fn((fan_in, width), || rng.random_range(-bound..=bound));
        layers.push(LayerParams {
            weights,
            bias: Array1::zeros(width),
        });
        fan_in = width;
    }
    Ok(Network {
        activation: config.activation,
        dropout_rate: config.dropout_rate,
        layers,
        adam: AdamState::default(),
    })
}

impl Network {
    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn num_parameters(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn zero_gradients(&self) -> Gradients {
        Gradients(self.layers.iter().map(LayerParams::zeros_like).collect())
    }

    /// Adam step counter.
    pub fn optimizer_steps(&self) -> u64 {
        self.adam.step
    }

    /// Pre-sigmoid outputs `f(x) + offset`, one per row.
    pub fn forward(&self, features: ArrayView2<f64>, offset: f64, mode: Mode) -> Result<Array1<f64>> {
        Ok(self.trace(features, offset, mode)?.logits)
    }

    pub fn forward_batch(&self, batch: &TrainingBatch, mode: Mode) -> Result<Array1<f64>> {
        self.forward(batch.features.view(), batch.offset, mode)
    }

    /// Mean cross-entropy of the whole batch.
    pub fn loss(&self, features: ArrayView2<f64>, labels: ArrayView1<f64>, offset: f64, mode: Mode) -> Result<f64> {
        let logits = self.forward(features, offset, mode)?;
        mean_bce(logits.view(), labels)
    }

    /// Loss and its exact gradient with respect to all weights and biases.
    pub fn gradient(
        &self,
        features: ArrayView2<f64>,
        labels: ArrayView1<f64>,
        offset: f64,
        mode: Mode,
    ) -> Result<(f64, Gradients)> {
        if features.nrows() != labels.len() {
            return Err(Error::Shape {
                expected: features.nrows(),
                actual: labels.len(),
            });
        }
        let trace = self.trace(features, offset, mode)?;
        let loss = mean_bce(trace.logits.view(), labels)?;
        let m = labels.len() as f64;

        let mut delta = Array2::zeros((labels.len(), 1));
        for ((d, &z), &y) in delta.iter_mut().zip(&trace.logits).zip(labels) {
            *d = (sigmoid(z) - y) / m;
        }

        let mut grads = Vec::with_capacity(self.layers.len());
        for l in (0..self.layers.len()).rev() {
            let input = if l == 0 {
                features
            } else {
                trace.hidden[l - 1].out.view()
            };
            let g = LayerParams {
                weights: input.t().dot(&delta),
                bias: delta.sum_axis(Axis(0)),
            };
            if l > 0 {
                let mut back = delta.dot(&self.layers[l].weights.t());
                let h = &trace.hidden[l - 1];
                if self.activation == Activation::Relu {
                    ndarray::Zip::from(&mut back)
                        .and(&h.pre)
                        .for_each(|b, &pre| {
                            if pre <= 0.0 {
                                *b = 0.0;
                            }
                        });
                }
                if let Some(mask) = &h.mask {
                    back *= mask;
                }
                delta = back;
            }
            if g.values().any(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!("non-finite gradient in layer {l}")));
            }
            grads.push(g);
        }
        grads.reverse();
        Ok((loss, Gradients(grads)))
    }

    fn trace(&self, features: ArrayView2<f64>, offset: f64, mode: Mode) -> Result<Trace> {
        if features.ncols() != self.input_dim() {
            return Err(Error::Shape {
                expected: self.input_dim(),
                actual: features.ncols(),
            });
        }
        let last = self.layers.len() - 1;
        let mut hidden: Vec<HiddenTrace> = Vec::with_capacity(last);
        let mut rng = match mode {
            Mode::Train { seed } if self.dropout_rate > 0.0 => Some(seeded(seed)),
            _ => None,
        };
        let keep = 1.0 - self.dropout_rate;
        for (l, layer) in self.layers[..last].iter().enumerate() {
            let input = hidden.last().map_or(features, |h| h.out.view());
            let mut pre = input.dot(&layer.weights);
            pre += &layer.bias;
            check_finite(pre.iter(), l)?;
            let mut out = match self.activation {
                Activation::Relu => pre.mapv(|v| v.max(0.0)),
                Activation::Linear => pre.clone(),
            };
            let mask = rng.as_mut().map(|rng| {
                Array2::from_shape_simple_fn(out.raw_dim(), || {
                    if rng.random::<f64>() < keep {
                        1.0 / keep
                    } else {
                        0.0
                    }
                })
            });
            if let Some(mask) = &mask {
                out *= mask;
            }
            hidden.push(HiddenTrace { pre, out, mask });
        }
        let input = hidden.last().map_or(features, |h| h.out.view());
        let out_layer = &self.layers[last];
        let mut logits = input.dot(&out_layer.weights).column(0).to_owned();
        logits += out_layer.bias[0] + offset;
        check_finite(logits.iter(), last)?;
        Ok(Trace { hidden, logits })
    }
}

fn check_finite<'a>(mut values: impl Iterator<Item = &'a f64>, layer: usize) -> Result<()> {
    if values.any(|v| !v.is_finite()) {
        Err(Error::Numeric(format!("non-finite activation in layer {layer}")))
    } else {
        Ok(())
    }
}

pub(crate) fn mean_bce(logits: ArrayView1<f64>, labels: ArrayView1<f64>) -> Result<f64> {
    if logits.len() != labels.len() {
        return Err(Error::Shape {
            expected: logits.len(),
            actual: labels.len(),
        });
    }
    if logits.is_empty() {
        return Err(Error::Domain("cross-entropy of an empty batch".into()));
    }
    let total: f64 = logits.iter().zip(labels).map(|(&z, &y)| pointwise(z, y)).sum();
    Ok(total / logits.len() as f64)
}

#[derive(Serialize, Deserialize)]
struct LayerJson {
    inputs: usize,
    outputs: usize,
    /// Row-major `inputs x outputs`.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct NetworkJson {
    activation: Activation,
    dropout_rate: f64,
    layers: Vec<LayerJson>,
}

impl From<Network> for NetworkJson {
    fn from(net: Network) -> Self {
        NetworkJson {
            activation: net.activation,
            dropout_rate: net.dropout_rate,
            layers: net
                .layers
                .into_iter()
                .map(|l| LayerJson {
                    inputs: l.inputs(),
                    outputs: l.outputs(),
                    weights: l.weights.iter().copied().collect(),
                    bias: l.bias.to_vec(),
                })
                .collect(),
        }
    }
}

impl TryFrom<NetworkJson> for Network {
    type Error = String;

    fn try_from(json: NetworkJson) -> std::result::Result<Self, String> {
        if json.layers.is_empty() {
            return Err("network has no layers".into());
        }
        let mut layers = Vec::with_capacity(json.layers.len());
        for (i, l) in json.layers.into_iter().enumerate() {
            if l.bias.len() != l.outputs {
                return Err(format!("layer {i}: bias length {} != outputs {}", l.bias.len(), l.outputs));
            }
            let weights = Array2::from_shape_vec((l.inputs, l.outputs), l.weights)
                .map_err(|e| format!("layer {i}: {e}"))?;
            if let Some(prev) = layers.last().map(LayerParams::outputs) {
                if prev != l.inputs {
                    return Err(format!("layer {i}: expects {} inputs, previous layer has {prev}", l.inputs));
                }
            }
            layers.push(LayerParams {
                weights,
                bias: Array1::from(l.bias),
            });
        }
        if layers.last().map(LayerParams::outputs) != Some(1) {
            return Err("output layer must have one unit".into());
        }
        Ok(Network {
            activation: json.activation,
            dropout_rate: json.dropout_rate,
            layers,
            adam: AdamState::default(),
        })
    }
}
