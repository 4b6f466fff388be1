use std::io::Write;

use ndarray::Array2;

use super::scores::{auc_with, brier_with};
use super::{integrated_brier, ipa, predict, Band, Ipcw, MetricCurve, PredictionMatrix};
use crate::data::SurvivalDataset;
use crate::error::{Error, Result};
use crate::models::{kaplan_meier, HazardModel, KmTarget};

/// Name under which the Kaplan-Meier null appears in every suite.
pub const NULL_MODEL_NAME: &str = "KM";

#[derive(Debug, Clone, PartialEq)]
pub struct ModelMetrics {
    pub name: String,
    pub brier: MetricCurve,
    pub ipa: MetricCurve,
    pub auc: MetricCurve,
    pub ibs: f64,
    /// Bootstrap percentile band of the IBS, when computed.
    pub ibs_band: Option<Band>,
}

impl ModelMetrics {
    pub fn curve(&self, metric: &str) -> Option<&MetricCurve> {
        match metric {
            "bs" => Some(&self.brier),
            "ipa" => Some(&self.ipa),
            "auc" => Some(&self.auc),
            _ => None,
        }
    }

    pub fn curve_mut(&mut self, metric: &str) -> Option<&mut MetricCurve> {
        match metric {
            "bs" => Some(&mut self.brier),
            "ipa" => Some(&mut self.ipa),
            "auc" => Some(&mut self.auc),
            _ => None,
        }
    }
}

pub const METRIC_NAMES: [&str; 3] = ["bs", "ipa", "auc"];

/// Aligned curves for every model plus the null, which comes last.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub times: Vec<f64>,
    pub t_max: f64,
    pub models: Vec<ModelMetrics>,
}

impl SuiteResult {
    pub fn model(&self, name: &str) -> Option<&ModelMetrics> {
        self.models.iter().find(|m| m.name == name)
    }

    pub fn model_mut(&mut self, name: &str) -> Option<&mut ModelMetrics> {
        self.models.iter_mut().find(|m| m.name == name)
    }

    /// Wide table: `time,model,bs,ipa,auc`; undefined values are empty.
    pub fn write_suite_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["time", "model", "bs", "ipa", "auc"])?;
        for m in &self.models {
            for (k, t) in self.times.iter().enumerate() {
                w.write_record([
                    t.to_string(),
                    m.name.clone(),
                    fmt(m.brier.estimates[k]),
                    fmt(m.ipa.estimates[k]),
                    fmt(m.auc.estimates[k]),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    /// Long table: `time,model,metric,estimate,lower,upper`; undefined points
    /// are omitted and bounds are empty without bootstrap bands.
    pub fn write_metrics_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["time", "model", "metric", "estimate", "lower", "upper"])?;
        for m in &self.models {
            for metric in METRIC_NAMES {
                let curve = m.curve(metric).expect("known metric");
                for (k, t) in curve.times.iter().enumerate() {
                    let Some(est) = curve.estimates[k] else { continue };
                    let band = curve.bands.as_ref().and_then(|b| b[k]);
                    w.write_record([
                        t.to_string(),
                        m.name.clone(),
                        metric.to_string(),
                        est.to_string(),
                        fmt(band.map(|b| b.lower)),
                        fmt(band.map(|b| b.upper)),
                    ])?;
                }
            }
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn write_ibs_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["model", "ibs"])?;
        for m in &self.models {
            w.write_record([m.name.clone(), m.ibs.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

fn fmt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Evaluates each model on `d_test` at the `grid` times, adds the
/// Kaplan-Meier null fitted on `d_test`, and integrates the Brier score over
/// `[0, t_max]`.
pub fn evaluate_suite(
    models: &[(&str, &dyn HazardModel)],
    d_test: &SurvivalDataset,
    grid: &[f64],
    t_max: f64,
) -> Result<SuiteResult> {
    let full = scoring_times(grid, t_max)?;
    let mut preds = Vec::with_capacity(models.len());
    for &(name, model) in models {
        preds.push((name.to_string(), predict(model, d_test, &full)?));
    }
    evaluate_predictions(preds, d_test, grid, t_max)
}

/// `[0] ∪ grid`.
pub(crate) fn scoring_times(grid: &[f64], t_max: f64) -> Result<Vec<f64>> {
    if grid.is_empty() || grid[0] < 0.0 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("evaluation grid must be nonnegative and increase strictly".into()));
    }
    let last = *grid.last().expect("nonempty");
    if !(t_max > 0.0) || t_max > last {
        return Err(Error::Domain(format!(
            "t_max = {t_max} must be positive and within the evaluation grid (last time {last})"
        )));
    }
    let mut full = Vec::with_capacity(grid.len() + 1);
    if grid[0] > 0.0 {
        full.push(0.0);
    }
    full.extend_from_slice(grid);
    Ok(full)
}

/// As [`evaluate_suite`] for predictions already made on `[0] ∪ grid`.
pub fn evaluate_predictions(
    preds: Vec<(String, PredictionMatrix)>,
    d_test: &SurvivalDataset,
    grid: &[f64],
    t_max: f64,
) -> Result<SuiteResult> {
    let full = scoring_times(grid, t_max)?;
    for (i, (name, pred)) in preds.iter().enumerate() {
        if name == NULL_MODEL_NAME {
            return Err(Error::Config(format!("model name `{NULL_MODEL_NAME}` is reserved for the null model")));
        }
        if preds[..i].iter().any(|(other, _)| other == name) {
            return Err(Error::Config(format!("duplicate model name `{name}`")));
        }
        if pred.times() != full.as_slice() {
            return Err(Error::Domain(format!("predictions for `{name}` are not on the scoring grid")));
        }
        if pred.num_subjects() != d_test.len() {
            return Err(Error::Shape {
                expected: d_test.len(),
                actual: pred.num_subjects(),
            });
        }
    }

    let km = kaplan_meier(d_test, KmTarget::Event)?;
    let null_values = Array2::from_shape_fn((d_test.len(), full.len()), |(_, k)| 1.0 - km.eval(full[k]));
    let null = PredictionMatrix::new(full.clone(), null_values)?;

    let ipcw = Ipcw::new(d_test)?;
    let weights: Vec<Vec<f64>> = full
        .iter()
        .map(|&t| ipcw.weights(d_test, t))
        .collect::<Result<_>>()?;
    let offset = full.len() - grid.len();

    let score = |pred: &PredictionMatrix| -> (MetricCurve, MetricCurve) {
        let mut bs = Vec::with_capacity(full.len());
        let mut auc = Vec::with_capacity(full.len());
        for (k, &t) in full.iter().enumerate() {
            let col = pred.values().column(k).to_vec();
            bs.push(Some(brier_with(&col, d_test, &weights[k], t)));
            auc.push(auc_with(&col, d_test, &weights[k], t));
        }
        (MetricCurve::new(full.clone(), bs), MetricCurve::new(grid.to_vec(), auc[offset..].to_vec()))
    };

    let (null_bs_full, null_auc) = score(&null);
    let null_bs = reported(&null_bs_full, offset);
    let mut models = Vec::with_capacity(preds.len() + 1);
    for (name, pred) in preds.iter().map(|(n, p)| (n.clone(), p)).chain(std::iter::once((NULL_MODEL_NAME.to_string(), &null))) {
        let (bs_full, auc) = if name == NULL_MODEL_NAME {
            (null_bs_full.clone(), null_auc.clone())
        } else {
            score(pred)
        };
        let ibs = integrated_brier(&bs_full, t_max)?;
        let brier = reported(&bs_full, offset);
        models.push(ModelMetrics {
            ipa: ipa(&brier, &null_bs)?,
            name,
            brier,
            auc,
            ibs,
            ibs_band: None,
        });
    }
    Ok(SuiteResult {
        times: grid.to_vec(),
        t_max,
        models,
    })
}

fn reported(curve: &MetricCurve, offset: usize) -> MetricCurve {
    MetricCurve::new(curve.times[offset..].to_vec(), curve.estimates[offset..].to_vec())
}
