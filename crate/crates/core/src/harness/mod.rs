//! Grid search, bootstrap bands and the end-to-end pipeline.

mod bootstrap;
mod grid;
mod pipeline;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::casebase::sample_case_base;
use crate::data::SurvivalDataset;
use crate::error::{Error, Result};
use crate::models::{fit_case_base, CaseBaseModel, FeatureMap, ModelKind};
use crate::neuralnet::NetworkConfig;
use crate::rng::{derive_seed, seeded, Stream};

pub use bootstrap::{attach_bands, bootstrap_evaluate, bootstrap_replicates, fit_specs, BootstrapResult, Replicates};
pub use grid::{grid_search, grid_search_candidates, GridCell, GridOptions, GridResult, SearchSpace};
pub use pipeline::{
    run_pipeline, write_risk_curves, DataSource, EvalGridSpec, Manifest, PipelineConfig, PipelineOutput, ModelSummary, Summary, CBLR_NAME, CBNN_NAME, MANIFEST_VERSION, OPTIMAL_NAME,
};

/// What to fit on a case-base sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSpec {
    Cbnn {
        config: NetworkConfig,
    },
    Cblr {
        feature_map: FeatureMap,
        config: NetworkConfig,
    },
}

impl ModelSpec {
    pub fn config(&self) -> &NetworkConfig {
        match self {
            ModelSpec::Cbnn { config } | ModelSpec::Cblr { config, .. } => config,
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::Cbnn { .. } => ModelKind::Cbnn,
            ModelSpec::Cblr { .. } => ModelKind::Cblr,
        }
    }

    fn feature_map(&self, num_covariates: usize) -> FeatureMap {
        match self {
            ModelSpec::Cbnn { .. } => FeatureMap::linear(num_covariates),
            ModelSpec::Cblr { feature_map, .. } => feature_map.clone(),
        }
    }

    /// Trainable parameters for data with `num_covariates` covariates.
    pub fn parameter_count(&self, num_covariates: usize) -> usize {
        let width = self.feature_map(num_covariates).width();
        match self {
            ModelSpec::Cbnn { config } => config.parameter_count(width),
            ModelSpec::Cblr { .. } => width + 1,
        }
    }

    /// Draws a case-base sample of `d` and fits this model to it. The sample
    /// and the network draw from separate streams of `seed`; the config's own
    /// seed is replaced.
    pub fn fit(&self, d: &SurvivalDataset, ratio: usize, seed: u64) -> Result<CaseBaseModel> {
        let sample = sample_case_base(d, ratio, derive_seed(seed, Stream::CaseBase, 0))?;
        let mut config = self.config().clone();
        config.seed = derive_seed(seed, Stream::Fit, 0);
        fit_case_base(&sample, self.kind(), self.feature_map(d.num_covariates()), &config)
    }
}

/// `k` folds of a seeded permutation, each sorted; every fold must hold an
/// event. A failing draw is redrawn once with the next stream index.
pub fn assign_folds(d: &SurvivalDataset, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > d.len() {
        return Err(Error::Config(format!(
            "need 2 <= folds <= subjects, got {k} folds for {} subjects",
            d.len()
        )));
    }
    let n = d.len();
    for attempt in 0..2u64 {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut seeded(derive_seed(seed, Stream::Folds, attempt)));
        let folds: Vec<Vec<usize>> = (0..k)
            .map(|j| {
                let mut fold = order[j * n / k..(j + 1) * n / k].to_vec();
                fold.sort_unstable();
                fold
            })
            .collect();
        match folds.iter().position(|f| f.iter().all(|&i| !d.records()[i].event)) {
            None => return Ok(folds),
            Some(j) if attempt == 1 => {
                return Err(Error::Domain(format!(
                    "fold {} of {k} has no events, even after redrawing the folds",
                    j + 1
                )));
            }
            Some(_) => log::info!("a fold had no events; redrawing folds"),
        }
    }
    unreachable!("loop returns on its second attempt")
}

/// Indices of `0..n` not in the sorted `fold`.
pub(crate) fn complement(n: usize, fold: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(n - fold.len());
    let mut it = fold.iter().peekable();
    for i in 0..n {
        if it.peek() == Some(&&i) {
            it.next();
        } else {
            out.push(i);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::SubjectRecord;

    fn dataset(events: &[bool]) -> SurvivalDataset {
        let records = events
            .iter()
            .enumerate()
            .map(|(i, &e)| SubjectRecord::new(1.0 + i as f64, e, vec![0.0]))
            .collect();
        SurvivalDataset::new(vec!["x".into()], records).unwrap()
    }

    #[test]
    fn folds_partition_the_indices() {
        let d = dataset(&[true; 10]);
        let folds = assign_folds(&d, 3, 4).unwrap();
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert_eq!(folds.iter().map(Vec::len).collect::<Vec<_>>(), vec![3, 3, 4]);
        assert_eq!(assign_folds(&d, 3, 4).unwrap(), folds);
        assert_eq!(complement(10, &folds[0]).len(), 7);
    }

    #[test]
    fn eventless_fold_is_an_error() {
        let d = dataset(&[true, false, false]);
        let err = assign_folds(&d, 3, 0).unwrap_err();
        assert!(matches!(err, Error::Domain(ref m) if m.contains("no events")));
    }

    #[test]
    fn parameter_counts() {
        let config = NetworkConfig {
            hidden_layers: vec![50, 10],
            ..NetworkConfig::default()
        };
        assert_eq!(ModelSpec::Cbnn { config: config.clone() }.parameter_count(3), 771);
        let cblr = ModelSpec::Cblr {
            feature_map: FeatureMap::linear(3),
            config,
        };
        assert_eq!(cblr.parameter_count(3), 5);
    }
}
