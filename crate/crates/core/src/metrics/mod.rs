//! Time-dependent evaluation under right censoring: IPCW Brier score, its
//! integral, the index of prediction accuracy and IPCW AUC.

mod scores;
mod suite;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::SurvivalDataset;
use crate::error::{Error, Result};
use crate::models::{uniform_grid, HazardModel, DEFAULT_RISK_GRID_POINTS};

pub use scores::{auc_ipcw, brier_score, censoring_weights, integrated_brier, ipa, Ipcw};
pub use suite::{evaluate_predictions, evaluate_suite, ModelMetrics, SuiteResult, METRIC_NAMES, NULL_MODEL_NAME};

pub const DEFAULT_EVAL_POINTS: usize = 100;

/// Predicted risks `F̂(t | X_i)`: one row per subject, one column per time.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionMatrix {
    times: Vec<f64>,
    values: Array2<f64>,
}

impl PredictionMatrix {
    pub fn new(times: Vec<f64>, values: Array2<f64>) -> Result<Self> {
        if values.ncols() != times.len() {
            return Err(Error::Shape {
                expected: times.len(),
                actual: values.ncols(),
            });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("prediction times must increase strictly".into()));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(format!("predicted risk {v} outside [0, 1]")));
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn num_subjects(&self) -> usize {
        self.values.nrows()
    }

    /// Risks at `t` by step lookup: the column of the last time `<= t`.
    pub fn column_at(&self, t: f64) -> Result<Vec<f64>> {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 || t > *self.times.last().expect("nonempty") {
            return Err(Error::Domain(format!(
                "t = {t} lies outside the prediction grid [{}, {}]",
                self.times.first().copied().unwrap_or(f64::NAN),
                self.times.last().copied().unwrap_or(f64::NAN)
            )));
        }
        Ok(self.values.column(k - 1).to_vec())
    }
}

/// Risk of every subject at `times` (nonnegative, strictly increasing).
///
/// Each curve is integrated on the union of a uniform fine grid over
/// `[0, max(times)]` and `times` itself, then read off at `times`.
pub fn predict(model: &dyn HazardModel, d: &SurvivalDataset, times: &[f64]) -> Result<PredictionMatrix> {
    if let Some(p) = model.num_covariates() {
        if p != d.num_covariates() {
            return Err(Error::Shape {
                expected: p,
                actual: d.num_covariates(),
            });
        }
    }
    if times.is_empty() || times[0] < 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("evaluation times must be nonnegative and increase strictly".into()));
    }
    let horizon = *times.last().expect("nonempty");
    let mut fine = if horizon > 0.0 {
        uniform_grid(horizon, DEFAULT_RISK_GRID_POINTS)?
    } else {
        vec![0.0]
    };
    fine.extend_from_slice(times);
    fine.sort_by(f64::total_cmp);
    fine.dedup();
    let columns: Vec<usize> = times
        .iter()
        .map(|t| fine.partition_point(|s| s < t))
        .collect();

    let rows: Vec<Vec<f64>> = d
        .records()
        .par_iter()
        .map(|r| {
            let curve = model.risk_curve(&r.covariates, &fine)?;
            Ok(columns.iter().map(|&k| curve.values[k]).collect())
        })
        .collect::<Result<_>>()?;
    let mut values = Array2::zeros((d.len(), times.len()));
    for (mut dst, row) in values.rows_mut().into_iter().zip(rows) {
        dst.assign(&ndarray::ArrayView1::from(&row));
    }
    PredictionMatrix::new(times.to_vec(), values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lower: f64,
    pub upper: f64,
}

/// A metric over time; `None` marks points where it is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricCurve {
    pub times: Vec<f64>,
    pub estimates: Vec<Option<f64>>,
    /// Bootstrap percentile bands, when computed.
    pub bands: Option<Vec<Option<Band>>>,
}

impl MetricCurve {
    pub fn new(times: Vec<f64>, estimates: Vec<Option<f64>>) -> Self {
        Self {
            times,
            estimates,
            bands: None,
        }
    }

    /// Estimate at the grid time equal to `t`.
    pub fn at(&self, t: f64) -> Option<f64> {
        let k = self.times.iter().position(|&s| s == t)?;
        self.estimates[k]
    }

    pub fn band_at(&self, t: f64) -> Option<Band> {
        let k = self.times.iter().position(|&s| s == t)?;
        self.bands.as_ref()?[k]
    }

    /// Keeps the points with `t <= t_max`.
    pub fn truncate_after(&self, t_max: f64) -> Self {
        let keep = self.times.partition_point(|&t| t <= t_max);
        Self {
            times: self.times[..keep].to_vec(),
            estimates: self.estimates[..keep].to_vec(),
            bands: self.bands.as_ref().map(|b| b[..keep].to_vec()),
        }
    }
}

/// Linear-interpolation quantile of unsorted samples.
pub fn quantile(samples: &[f64], q: f64) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Some(crate::data::quantile_sorted(&sorted, q))
}

/// 2.5% and 97.5% percentiles.
pub fn percentile_band(samples: &[f64]) -> Option<Band> {
    Some(Band {
        lower: quantile(samples, 0.025)?,
        upper: quantile(samples, 0.975)?,
    })
}

/// `points` equally spaced times between the 1st and 99th percentiles of
/// follow-up. When the 99th percentile is the largest follow-up time (as with
/// many subjects censored at a common horizon) the grid ends at the largest
/// time below it instead, so some subjects remain at risk at every point.
pub fn default_eval_grid(d: &SurvivalDataset, points: usize) -> Result<Vec<f64>> {
    if d.is_empty() {
        return Err(Error::Domain("evaluation grid of an empty dataset".into()));
    }
    let lo = d.time_quantile(0.01);
    let mut hi = d.time_quantile(0.99);
    let max = d.max_time();
    if hi >= max {
        hi = d.times().filter(|&t| t < max).fold(f64::NEG_INFINITY, f64::max);
    }
    if !(hi > lo) || points < 2 {
        return Err(Error::Domain(format!(
            "follow-up percentiles [{lo}, {hi}] leave no evaluation range"
        )));
    }
    let step = (hi - lo) / (points - 1) as f64;
    let mut grid: Vec<f64> = (0..points).map(|k| lo + k as f64 * step).collect();
    grid[points - 1] = hi;
    Ok(grid)
}
