use std::io::Write;

use rayon::prelude::*;

use super::ModelSpec;
use crate::data::{bootstrap_resample, SurvivalDataset};
use crate::error::{Error, Result};
use crate::metrics::{evaluate_suite, percentile_band, SuiteResult, METRIC_NAMES};
use crate::models::{CaseBaseModel, HazardModel};
use crate::rng::{derive_seed, Stream};

/// Largest tolerated share of failed replicates.
pub const MAX_FAILED_SHARE: f64 = 0.10;

#[derive(Debug, Clone)]
pub struct Replicates {
    pub requested: usize,
    /// Successful replicates with their index.
    pub suites: Vec<(usize, SuiteResult)>,
    pub failures: Vec<(usize, String)>,
}

#[derive(Debug, Clone)]
pub struct BootstrapResult {
    /// Fit on the full training set, with percentile bands attached.
    pub point: SuiteResult,
    pub replicates: Replicates,
}

/// Resamples `train` `n_boot` times, refits with `fit(resample, seed)` and
/// evaluates on the fixed `test` set. Failed replicates are dropped and
/// logged; more than 10% failures is an error.
pub fn bootstrap_replicates<F>(
    train: &SurvivalDataset,
    test: &SurvivalDataset,
    fit: &F,
    n_boot: usize,
    grid: &[f64],
    t_max: f64,
    seed: u64,
) -> Result<Replicates>
where
    F: Fn(&SurvivalDataset, u64) -> Result<Vec<(String, Box<dyn HazardModel>)>> + Sync,
{
    let outcomes: Vec<Result<SuiteResult>> = (0..n_boot)
        .into_par_iter()
        .map(|r| {
            let replicate_seed = derive_seed(seed, Stream::Bootstrap, r as u64);
            let resample = bootstrap_resample(train, replicate_seed)?;
            let models = fit(&resample, derive_seed(replicate_seed, Stream::Fit, 0))?;
            let refs: Vec<(&str, &dyn HazardModel)> = models.iter().map(|(n, m)| (n.as_str(), m.as_ref())).collect();
            evaluate_suite(&refs, test, grid, t_max)
        })
        .collect();

    let mut suites = Vec::with_capacity(n_boot);
    let mut failures = Vec::new();
    for (r, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(suite) => suites.push((r, suite)),
            Err(e) => {
                log::warn!("bootstrap replicate {r} dropped: {e}");
                failures.push((r, e.to_string()));
            }
        }
    }
    if failures.len() as f64 > MAX_FAILED_SHARE * n_boot as f64 {
        return Err(Error::Numeric(format!(
            "{} of {n_boot} bootstrap replicates failed (first: {})",
            failures.len(),
            failures[0].1
        )));
    }
    Ok(Replicates {
        requested: n_boot,
        suites,
        failures,
    })
}

impl Replicates {
    /// Long table `replicate,model,metric,time,estimate`, with each model's
    /// IBS as metric `ibs` at `t_max`; undefined points are omitted.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["replicate", "model", "metric", "time", "estimate"])?;
        for (r, suite) in &self.suites {
            for m in &suite.models {
                for metric in METRIC_NAMES {
                    let curve = m.curve(metric).expect("known metric");
                    for (t, est) in curve.times.iter().zip(&curve.estimates) {
                        if let Some(v) = est {
                            w.write_record([r.to_string(), m.name.clone(), metric.to_string(), t.to_string(), v.to_string()])?;
                        }
                    }
                }
                w.write_record([r.to_string(), m.name.clone(), "ibs".into(), suite.t_max.to_string(), m.ibs.to_string()])?;
            }
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

/// Per-time 2.5/97.5 percentile bands over the replicates' defined values,
/// for every curve of every model in `point`; IBS bands likewise.
pub fn attach_bands(point: &mut SuiteResult, replicates: &Replicates) {
    for model in &mut point.models {
        let reps: Vec<_> = replicates
            .suites
            .iter()
            .filter_map(|(_, s)| s.model(&model.name))
            .collect();
        for metric in METRIC_NAMES {
            let curve = model.curve_mut(metric).expect("known metric");
            let bands = (0..curve.times.len())
                .map(|k| {
                    let samples: Vec<f64> = reps
                        .iter()
                        .filter_map(|m| m.curve(metric).and_then(|c| c.estimates[k]))
                        .collect();
                    percentile_band(&samples)
                })
                .collect();
            curve.bands = Some(bands);
        }
        let ibs: Vec<f64> = reps.iter().map(|m| m.ibs).collect();
        model.ibs_band = percentile_band(&ibs);
    }
}

/// Fits each named spec on `d`; model `m` uses stream `m` of `seed`.
pub fn fit_specs(specs: &[(String, ModelSpec)], d: &SurvivalDataset, ratio: usize, seed: u64) -> Result<Vec<(String, CaseBaseModel)>> {
    specs
        .iter()
        .enumerate()
        .map(|(m, (name, spec))| Ok((name.clone(), spec.fit(d, ratio, derive_seed(seed, Stream::Fit, m as u64))?)))
        .collect()
}

/// Point estimates from fits on the full `train`, with bootstrap bands from
/// `n_boot` resampled refits, all evaluated on `test`.
#[allow(clippy::too_many_arguments)]
pub fn bootstrap_evaluate(
    train: &SurvivalDataset,
    test: &SurvivalDataset,
    specs: &[(String, ModelSpec)],
    n_boot: usize,
    grid: &[f64],
    t_max: f64,
    ratio: usize,
    seed: u64,
) -> Result<BootstrapResult> {
    let fit = |d: &SurvivalDataset, s: u64| -> Result<Vec<(String, Box<dyn HazardModel>)>> {
        Ok(fit_specs(specs, d, ratio, s)?
            .into_iter()
            .map(|(n, m)| (n, Box::new(m) as Box<dyn HazardModel>))
            .collect())
    };
    let point_models = fit(train, derive_seed(seed, Stream::Fit, 0))?;
    let refs: Vec<(&str, &dyn HazardModel)> = point_models.iter().map(|(n, m)| (n.as_str(), m.as_ref())).collect();
    let mut point = evaluate_suite(&refs, test, grid, t_max)?;
    let replicates = bootstrap_replicates(train, test, &fit, n_boot, grid, t_max, seed)?;
    attach_bands(&mut point, &replicates);
    Ok(BootstrapResult { point, replicates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::SubjectRecord;
    use crate::models::HazardFn;

    fn dataset(n: usize, shift: f64) -> SurvivalDataset {
        let records = (0..n)
            .map(|i| {
                let x = (i % 7) as f64 / 7.0;
                SubjectRecord::new(shift + 0.3 * i as f64 * (1.0 - 0.5 * x), i % 4 != 0, vec![x])
            })
            .collect();
        SurvivalDataset::new(vec!["x".into()], records).unwrap()
    }

    fn fixed_fit(_: &SurvivalDataset, _: u64) -> Result<Vec<(String, Box<dyn HazardModel>)>> {
        Ok(vec![("fixed".into(), Box::new(HazardFn(|x: &[f64], _t: f64| 0.1 + x[0])) as Box<dyn HazardModel>)])
    }

    fn data_fit(d: &SurvivalDataset, _: u64) -> Result<Vec<(String, Box<dyn HazardModel>)>> {
        let rate = d.event_count() as f64 / d.total_follow_up();
        Ok(vec![("rate".into(), Box::new(HazardFn(move |x: &[f64], _t: f64| rate * (1.0 + x[0]))) as Box<dyn HazardModel>)])
    }

    #[test]
    fn data_free_model_has_zero_width_bands() {
        let (train, test) = (dataset(40, 0.1), dataset(30, 0.2));
        let grid = [1.0, 2.0, 3.0];
        let mut point = evaluate_suite(&[], &test, &grid, 3.0).unwrap();
        let reps = bootstrap_replicates(&train, &test, &fixed_fit, 5, &grid, 3.0, 1).unwrap();
        assert_eq!(reps.suites.len(), 5);
        let fixed = &reps.suites[0].1.model("fixed").unwrap().brier;
        point.models.insert(0, reps.suites[0].1.models[0].clone());
        attach_bands(&mut point, &reps);
        let bands = point.models[0].brier.bands.as_ref().unwrap();
        for (band, est) in bands.iter().zip(&fixed.estimates) {
            let band = band.unwrap();
            assert_eq!(band.lower, band.upper);
            assert_eq!(Some(band.lower), *est);
        }
    }

    #[test]
    fn single_replicate_bands_collapse() {
        let (train, test) = (dataset(40, 0.1), dataset(30, 0.2));
        let grid = [1.0, 2.0, 3.0];
        let reps = bootstrap_replicates(&train, &test, &data_fit, 1, &grid, 3.0, 9).unwrap();
        let mut point = reps.suites[0].1.clone();
        attach_bands(&mut point, &reps);
        for m in &point.models {
            for (band, est) in m.ipa.bands.as_ref().unwrap().iter().zip(&m.ipa.estimates) {
                assert_eq!(band.map(|b| b.lower), *est);
                assert_eq!(band.map(|b| b.upper), *est);
            }
        }
    }

    #[test]
    fn bands_contain_replicate_median() {
        let (train, test) = (dataset(60, 0.1), dataset(30, 0.2));
        let grid = [1.0, 2.0, 4.0];
        let reps = bootstrap_replicates(&train, &test, &data_fit, 21, &grid, 4.0, 3).unwrap();
        let mut point = reps.suites[0].1.clone();
        attach_bands(&mut point, &reps);
        let curve = &point.model("rate").unwrap().brier;
        for (k, band) in curve.bands.as_ref().unwrap().iter().enumerate() {
            let samples: Vec<f64> = reps
                .suites
                .iter()
                .map(|(_, s)| s.model("rate").unwrap().brier.estimates[k].unwrap())
                .collect();
            let median = crate::metrics::quantile(&samples, 0.5).unwrap();
            let band = band.unwrap();
            assert!(band.lower <= median && median <= band.upper);
        }
    }

    #[test]
    fn too_many_failures_is_an_error() {
        let (train, test) = (dataset(40, 0.1), dataset(30, 0.2));
        let failing = |_: &SurvivalDataset, s: u64| -> Result<Vec<(String, Box<dyn HazardModel>)>> {
            if s % 2 == 0 {
                Err(Error::Numeric("diverged".into()))
            } else {
                fixed_fit(&train, s)
            }
        };
        let grid = [1.0, 2.0];
        assert!(bootstrap_replicates(&train, &test, &failing, 20, &grid, 2.0, 0).is_err());
    }
}
