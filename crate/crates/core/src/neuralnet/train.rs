use ndarray::Axis;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::adam::adam_step;
use super::network::{init_network, Mode, Network};
use super::{NetworkConfig, TrainingBatch};
use crate::casebase::CaseBaseSample;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded, Stream};

/// Full-sample (eval-mode) loss before training and after every epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub initial_loss: f64,
    pub epoch_losses: Vec<f64>,
    /// 0 means the initial parameters were never improved upon.
    pub best_epoch: usize,
    pub best_loss: f64,
}

impl TrainingLog {
    /// Running minimum of the logged losses, starting from the initial loss.
    pub fn running_min(&self) -> Vec<f64> {
        std::iter::once(self.initial_loss)
            .chain(self.epoch_losses.iter().copied())
            .scan(f64::INFINITY, |best, l| {
                *best = best.min(l);
                Some(*best)
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct TrainedNetwork {
    /// Parameters from the epoch with the lowest full-sample loss.
    pub network: Network,
    pub log: TrainingLog,
}

/// Fit on the raw case-base inputs (covariates, then time).
pub fn train(sample: &CaseBaseSample, config: &NetworkConfig) -> Result<TrainedNetwork> {
    train_batch(&TrainingBatch::from_sample(sample)?, config)
}

pub fn train_batch(batch: &TrainingBatch, config: &NetworkConfig) -> Result<TrainedNetwork> {
    let network = init_network(config, batch.input_dim())?;
    train_from(network, batch, config)
}

/// Mini-batch Adam from the given starting parameters. The offset is added to
/// the output unit as a constant; it is never updated.
pub fn train_from(mut network: Network, batch: &TrainingBatch, config: &NetworkConfig) -> Result<TrainedNetwork> {
    config.validate()?;
    let n = batch.len();
    if n == 0 {
        return Err(Error::Domain("cannot train on an empty sample".into()));
    }
    if config.num_batches > n {
        return Err(Error::Config(format!(
            "{} batches requested for only {n} person-moments",
            config.num_batches
        )));
    }
    network.dropout_rate = config.dropout_rate;
    let x = batch.features.view();
    let y = batch.labels.view();
    let initial_loss = network.loss(x, y, batch.offset, Mode::Eval)?;
    let mut best = network.clone();
    let mut best_loss = initial_loss;
    let mut best_epoch = 0;
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..n).collect();
    let nb = config.num_batches;

    for epoch in 0..config.epochs {
        order.shuffle(&mut seeded(derive_seed(config.seed, Stream::Shuffle, epoch as u64)));
        for k in 0..nb {
            let rows = &order[k * n / nb..(k + 1) * n / nb];
            let xb = x.select(Axis(0), rows);
            let yb = y.select(Axis(0), rows);
            let mode = Mode::Train {
                seed: derive_seed(config.seed, Stream::Dropout, (epoch * nb + k) as u64),
            };
            let (_, grads) = network.gradient(xb.view(), yb.view(), batch.offset, mode)?;
            adam_step(&mut network, &grads, config.learning_rate)?;
        }
        let loss = network.loss(x, y, batch.offset, Mode::Eval)?;
        if !loss.is_finite() {
            return Err(Error::Numeric(format!("loss diverged at epoch {}", epoch + 1)));
        }
        epoch_losses.push(loss);
        if loss < best_loss {
            best_loss = loss;
            best_epoch = epoch + 1;
            best = network.clone();
        }
    }
    log::debug!(
        "trained {} epochs; best full-sample loss {best_loss:.6} at epoch {best_epoch}",
        config.epochs
    );
    Ok(TrainedNetwork {
        network: best,
        log: TrainingLog {
            initial_loss,
            epoch_losses,
            best_epoch,
            best_loss,
        },
    })
}
