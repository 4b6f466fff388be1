use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{assign_folds, complement, ModelSpec};
use crate::casebase::DEFAULT_RATIO;
use crate::data::SurvivalDataset;
use crate::error::{Error, Result};
use crate::metrics::{default_eval_grid, evaluate_suite, DEFAULT_EVAL_POINTS};
use crate::models::HazardModel;
use crate::neuralnet::{Activation, NetworkConfig};
use crate::rng::{derive_seed, Stream};

/// Hyperparameter sets whose cartesian product is searched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSpace {
    pub learning_rates: Vec<f64>,
    pub dropout_rates: Vec<f64>,
    pub first_layer: Vec<usize>,
    pub second_layer: Vec<usize>,
    pub num_batches: Vec<usize>,
    pub activations: Vec<Activation>,
    /// Fixed for every cell.
    pub epochs: usize,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            learning_rates: vec![0.001, 0.01],
            dropout_rates: vec![0.01, 0.05, 0.1],
            first_layer: vec![50, 75, 100],
            second_layer: vec![10, 25, 50],
            num_batches: vec![100, 500],
            activations: vec![Activation::Relu, Activation::Linear],
            epochs: NetworkConfig::default().epochs,
        }
    }
}

impl SearchSpace {
    /// A single cell.
    pub fn singleton(config: &NetworkConfig) -> Result<Self> {
        let &[first, second] = config.hidden_layers.as_slice() else {
            return Err(Error::Config("a search space cell has exactly two hidden layers".into()));
        };
        Ok(Self {
            learning_rates: vec![config.learning_rate],
            dropout_rates: vec![config.dropout_rate],
            first_layer: vec![first],
            second_layer: vec![second],
            num_batches: vec![config.num_batches],
            activations: vec![config.activation],
            epochs: config.epochs,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let sizes = [
            ("learning_rates", self.learning_rates.len()),
            ("dropout_rates", self.dropout_rates.len()),
            ("first_layer", self.first_layer.len()),
            ("second_layer", self.second_layer.len()),
            ("num_batches", self.num_batches.len()),
            ("activations", self.activations.len()),
        ];
        if let Some((name, _)) = sizes.iter().find(|(_, n)| *n == 0) {
            return Err(Error::Config(format!("search space `{name}` is empty")));
        }
        for config in self.configs() {
            config.validate()?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.learning_rates.len()
            * self.dropout_rates.len()
            * self.first_layer.len()
            * self.second_layer.len()
            * self.num_batches.len()
            * self.activations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cells in lexicographic order of (learning rate, dropout, first layer,
    /// second layer, batches, activation).
    pub fn configs(&self) -> Vec<NetworkConfig> {
        let mut out = Vec::with_capacity(self.len());
        for &learning_rate in &self.learning_rates {
            for &dropout_rate in &self.dropout_rates {
                for &first in &self.first_layer {
                    for &second in &self.second_layer {
                        for &num_batches in &self.num_batches {
                            for &activation in &self.activations {
                                out.push(NetworkConfig {
                                    hidden_layers: vec![first, second],
                                    activation,
                                    dropout_rate,
                                    learning_rate,
                                    num_batches,
                                    epochs: self.epochs,
                                    seed: 0,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn candidates(&self) -> Vec<ModelSpec> {
        self.configs().into_iter().map(|config| ModelSpec::Cbnn { config }).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridOptions {
    pub ratio: usize,
    pub folds: usize,
    pub seed: u64,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            ratio: DEFAULT_RATIO,
            folds: 3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub index: usize,
    pub spec: ModelSpec,
    pub parameters: usize,
    /// Held-out IBS per fold; empty if the cell failed.
    pub fold_ibs: Vec<f64>,
    pub mean_ibs: Option<f64>,
    pub failure: Option<String>,
    pub selected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub cells: Vec<GridCell>,
    pub selected: usize,
    pub folds: Vec<Vec<usize>>,
}

impl GridResult {
    pub fn selected_cell(&self) -> &GridCell {
        &self.cells[self.selected]
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let k = self.folds.len();
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = [
            "cell",
            "model",
            "hidden_layers",
            "activation",
            "dropout_rate",
            "learning_rate",
            "num_batches",
            "epochs",
            "parameters",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        header.extend((1..=k).map(|j| format!("fold{j}_ibs")));
        header.extend(["mean_ibs".to_string(), "selected".to_string()]);
        w.write_record(&header)?;
        for cell in &self.cells {
            let c = cell.spec.config();
            let layers = c.hidden_layers.iter().map(usize::to_string).collect::<Vec<_>>().join("x");
            let mut row = vec![
                cell.index.to_string(),
                cell.spec.kind().as_str().to_string(),
                layers,
                c.activation.as_str().to_string(),
                c.dropout_rate.to_string(),
                c.learning_rate.to_string(),
                c.num_batches.to_string(),
                c.epochs.to_string(),
                cell.parameters.to_string(),
            ];
            for j in 0..k {
                row.push(cell.fold_ibs.get(j).map(f64::to_string).unwrap_or_default());
            }
            row.push(cell.mean_ibs.map(|v| v.to_string()).unwrap_or_default());
            row.push(u8::from(cell.selected).to_string());
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

/// Cross-validated IBS for every cell of `space`.
pub fn grid_search(train: &SurvivalDataset, space: &SearchSpace, options: &GridOptions) -> Result<GridResult> {
    space.validate()?;
    grid_search_candidates(train, &space.candidates(), options)
}

/// Cross-validated IBS for arbitrary candidate models. Each (cell, fold) fit
/// draws a fresh case-base sample from the fold complement; IBS is computed on
/// the held-out fold over the complement's 1st-99th follow-up percentiles.
/// The winner minimises (mean IBS, parameters, learning rate, cell index).
pub fn grid_search_candidates(
    train: &SurvivalDataset,
    candidates: &[ModelSpec],
    options: &GridOptions,
) -> Result<GridResult> {
    if candidates.is_empty() {
        return Err(Error::Config("grid search needs at least one candidate".into()));
    }
    let folds = assign_folds(train, options.folds, options.seed)?;
    let n = train.len();
    let splits: Vec<(SurvivalDataset, SurvivalDataset, Vec<f64>)> = folds
        .iter()
        .map(|fold| {
            let fit_part = train.subset(&complement(n, fold));
            let held_out = train.subset(fold);
            let grid = default_eval_grid(&fit_part, DEFAULT_EVAL_POINTS)?;
            Ok((fit_part, held_out, grid))
        })
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, usize)> = (0..candidates.len())
        .flat_map(|c| (0..folds.len()).map(move |f| (c, f)))
        .collect();
    let scores: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(c, f)| {
            let (fit_part, held_out, grid) = &splits[f];
            let seed = derive_seed(derive_seed(options.seed, Stream::Grid, c as u64), Stream::Fit, f as u64);
            let model = candidates[c].fit(fit_part, options.ratio, seed)?;
            let t_max = *grid.last().expect("nonempty grid");
            let suite = evaluate_suite(&[("candidate", &model as &dyn HazardModel)], held_out, grid, t_max)?;
            Ok(suite.models[0].ibs)
        })
        .collect();

    let p = train.num_covariates();
    let mut cells = Vec::with_capacity(candidates.len());
    for (c, spec) in candidates.iter().enumerate() {
        let mut fold_ibs = Vec::with_capacity(folds.len());
        let mut failure = None;
        for score in &scores[c * folds.len()..(c + 1) * folds.len()] {
            match score {
                Ok(v) => fold_ibs.push(*v),
                Err(e) => {
                    failure = Some(e.to_string());
                    break;
                }
            }
        }
        if let Some(reason) = &failure {
            log::warn!("grid cell {c} failed: {reason}");
            fold_ibs.clear();
        }
        let mean_ibs = (failure.is_none()).then(|| fold_ibs.iter().sum::<f64>() / fold_ibs.len() as f64);
        cells.push(GridCell {
            index: c,
            spec: spec.clone(),
            parameters: spec.parameter_count(p),
            fold_ibs,
            mean_ibs,
            failure,
            selected: false,
        });
    }

    let selected = cells
        .iter()
        .filter(|c| c.mean_ibs.is_some_and(f64::is_finite))
        .min_by(|a, b| {
            a.mean_ibs
                .unwrap()
                .total_cmp(&b.mean_ibs.unwrap())
                .then(a.parameters.cmp(&b.parameters))
                .then(a.spec.config().learning_rate.total_cmp(&b.spec.config().learning_rate))
                .then(a.index.cmp(&b.index))
        })
        .map(|c| c.index)
        .ok_or_else(|| Error::Numeric("every grid cell failed to train".into()))?;
    cells[selected].selected = true;
    Ok(GridResult { cells, selected, folds })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_space_has_216_cells() {
        let space = SearchSpace::default();
        assert_eq!(space.len(), 216);
        assert_eq!(space.configs().len(), 216);
        assert!(space.validate().is_ok());
    }

    #[test]
    fn singleton_round_trip() {
        let config = NetworkConfig::default();
        let space = SearchSpace::singleton(&config).unwrap();
        assert_eq!(space.configs(), vec![config]);
        let mut empty = space.clone();
        empty.activations.clear();
        assert!(empty.validate().is_err());
    }
}
