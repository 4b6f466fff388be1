use super::{MetricCurve, PredictionMatrix};
use crate::data::SurvivalDataset;
use crate::error::{Error, Result};
use crate::models::{kaplan_meier, KaplanMeier, KmTarget};

/// Censoring survivor `Ĝ` of a dataset, reused across time points.
#[derive(Debug, Clone)]
pub struct Ipcw {
    g: KaplanMeier,
}

impl Ipcw {
    pub fn new(d: &SurvivalDataset) -> Result<Self> {
        Ok(Self {
            g: kaplan_meier(d, KmTarget::Censoring)?,
        })
    }

    pub fn censoring_survival(&self) -> &KaplanMeier {
        &self.g
    }

    /// `W_i(t)`: `1 / Ĝ(T_i-)` for events by `t`, `1 / Ĝ(t)` for subjects
    /// still under observation after `t`, 0 for those censored by `t`.
    pub fn weights(&self, d: &SurvivalDataset, t: f64) -> Result<Vec<f64>> {
        let g_t = self.g.eval(t);
        d.records()
            .iter()
            .map(|r| {
                let g = if r.time <= t && r.event {
                    self.g.left_limit(r.time)
                } else if r.time > t {
                    g_t
                } else {
                    return Ok(0.0);
                };
                if g > 0.0 {
                    Ok(1.0 / g)
                } else {
                    Err(Error::DegenerateCensoring {
                        time: if r.time > t { t } else { r.time },
                    })
                }
            })
            .collect()
    }
}

pub fn censoring_weights(d: &SurvivalDataset, t: f64) -> Result<Vec<f64>> {
    Ipcw::new(d)?.weights(d, t)
}

fn check_rows(pred: &PredictionMatrix, d: &SurvivalDataset) -> Result<()> {
    if pred.num_subjects() != d.len() {
        return Err(Error::Shape {
            expected: d.len(),
            actual: pred.num_subjects(),
        });
    }
    Ok(())
}

pub(crate) fn brier_with(risk: &[f64], d: &SurvivalDataset, weights: &[f64], t: f64) -> f64 {
    let total: f64 = d
        .records()
        .iter()
        .zip(risk)
        .zip(weights)
        .map(|((r, &f), &w)| {
            if r.time <= t && r.event {
                (1.0 - f) * (1.0 - f) * w
            } else if r.time > t {
                f * f * w
            } else {
                0.0
            }
        })
        .sum();
    total / d.len() as f64
}

/// IPCW Brier score at `t`.
pub fn brier_score(pred: &PredictionMatrix, d: &SurvivalDataset, t: f64) -> Result<f64> {
    check_rows(pred, d)?;
    let risk = pred.column_at(t)?;
    let weights = censoring_weights(d, t)?;
    Ok(brier_with(&risk, d, &weights, t))
}

/// `∫₀^{t_max} BS(t) dt / t_max` by the trapezoid rule on the curve's grid,
/// which must start at 0 and reach `t_max`.
pub fn integrated_brier(bs: &MetricCurve, t_max: f64) -> Result<f64> {
    let times = &bs.times;
    if !(t_max > 0.0) {
        return Err(Error::Domain(format!("t_max must be positive, got {t_max}")));
    }
    if times.first() != Some(&0.0) {
        return Err(Error::Domain("Brier curve must start at t = 0 to be integrated".into()));
    }
    let last = *times.last().expect("nonempty");
    if last < t_max {
        return Err(Error::Domain(format!(
            "Brier curve ends at {last}, before t_max = {t_max}"
        )));
    }
    let value = |k: usize| {
        bs.estimates[k].ok_or_else(|| Error::Domain(format!("Brier score undefined at t = {}", times[k])))
    };
    let mut area = 0.0;
    for k in 1..times.len() {
        let (t0, t1) = (times[k - 1], times[k]);
        if t0 >= t_max {
            break;
        }
        let (b0, b1) = (value(k - 1)?, value(k)?);
        if t1 <= t_max {
            area += 0.5 * (b0 + b1) * (t1 - t0);
        } else {
            let b_end = b0 + (b1 - b0) * (t_max - t0) / (t1 - t0);
            area += 0.5 * (b0 + b_end) * (t_max - t0);
        }
    }
    Ok(area / t_max)
}

/// `1 - BS_model / BS_null`, undefined where the null score is 0 or missing.
pub fn ipa(bs_model: &MetricCurve, bs_null: &MetricCurve) -> Result<MetricCurve> {
    if bs_model.times != bs_null.times {
        return Err(Error::Domain("IPA needs both Brier curves on the same grid".into()));
    }
    let estimates = bs_model
        .estimates
        .iter()
        .zip(&bs_null.estimates)
        .map(|(m, n)| match (m, n) {
            (Some(m), Some(n)) if *n > 0.0 => Some(1.0 - m / n),
            _ => None,
        })
        .collect();
    Ok(MetricCurve::new(bs_model.times.clone(), estimates))
}

/// Weighted concordance of (case, control) pairs at `t`; ties in predicted
/// risk score 1/2. `None` when there are no cases or no controls.
pub(crate) fn auc_with(risk: &[f64], d: &SurvivalDataset, weights: &[f64], t: f64) -> Option<f64> {
    // Every control carries the same weight 1 / Ĝ(t), which cancels.
    let mut controls: Vec<f64> = d
        .records()
        .iter()
        .zip(risk)
        .filter(|(r, _)| r.time > t)
        .map(|(_, &f)| f)
        .collect();
    if controls.is_empty() {
        return None;
    }
    controls.sort_by(f64::total_cmp);
    let n_controls = controls.len() as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for ((r, &f), &w) in d.records().iter().zip(risk).zip(weights) {
        if r.time <= t && r.event {
            let below = controls.partition_point(|&c| c < f);
            let not_above = controls.partition_point(|&c| c <= f);
            num += w * (below as f64 + 0.5 * (not_above - below) as f64);
            den += w * n_controls;
        }
    }
    if den > 0.0 {
        Some(num / den)
    } else {
        None
    }
}

pub fn auc_ipcw(pred: &PredictionMatrix, d: &SurvivalDataset, t: f64) -> Result<Option<f64>> {
    check_rows(pred, d)?;
    let risk = pred.column_at(t)?;
    let weights = censoring_weights(d, t)?;
    Ok(auc_with(&risk, d, &weights, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::SubjectRecord;
    use ndarray::Array2;

    fn dataset(rows: &[(f64, bool)]) -> SurvivalDataset {
        let records = rows.iter().map(|&(t, e)| SubjectRecord::new(t, e, vec![0.0])).collect();
        SurvivalDataset::new(vec!["x".into()], records).unwrap()
    }

    fn single_column(t: f64, risk: &[f64]) -> PredictionMatrix {
        let values = Array2::from_shape_vec((risk.len(), 1), risk.to_vec()).unwrap();
        PredictionMatrix::new(vec![t], values).unwrap()
    }

    #[test]
    fn no_censoring_weights_are_indicators() {
        let d = dataset(&[(1.0, true), (2.0, true), (3.0, true)]);
        assert_eq!(censoring_weights(&d, 2.0).unwrap(), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn censored_before_t_gets_zero() {
        let d = dataset(&[(2.0, false), (6.0, true), (1.0, true)]);
        assert_eq!(censoring_weights(&d, 5.0).unwrap()[0], 0.0);
    }

    #[test]
    fn four_subject_weight_table() {
        let d = dataset(&[(1.0, true), (2.0, false), (3.0, true), (4.0, false)]);
        let w = censoring_weights(&d, 3.5).unwrap();
        // Ĝ(1-) = 1, Ĝ(3-) = 2/3, Ĝ(3.5) = 2/3.
        assert_eq!(w[0], 1.0);
        assert_eq!(w[1], 0.0);
        assert!((w[2] - 1.5).abs() < 1e-15);
        assert!((w[3] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn brier_extremes() {
        let d = dataset(&[(1.0, true)]);
        assert_eq!(brier_score(&single_column(2.0, &[1.0]), &d, 2.0).unwrap(), 0.0);
        assert_eq!(brier_score(&single_column(2.0, &[0.0]), &d, 2.0).unwrap(), 1.0);
    }

    fn curve(times: &[f64], values: &[f64]) -> MetricCurve {
        MetricCurve::new(times.to_vec(), values.iter().map(|&v| Some(v)).collect())
    }

    #[test]
    fn ibs_closed_forms() {
        let times: Vec<f64> = (0..=10).map(|k| k as f64 * 0.4).collect();
        let constant = curve(&times, &vec![0.2; times.len()]);
        assert!((integrated_brier(&constant, 4.0).unwrap() - 0.2).abs() < 1e-15);
        let linear = curve(&times, &times.iter().map(|t| t / 4.0).collect::<Vec<_>>());
        assert!((integrated_brier(&linear, 4.0).unwrap() - 0.5).abs() < 1e-15);
        // Hand trapezoid: (0.1 + 0.3) / 2 * 1 + (0.3 + 0.2) / 2 * 2 = 0.7, over 3.
        let three = curve(&[0.0, 1.0, 3.0], &[0.1, 0.3, 0.2]);
        assert!((integrated_brier(&three, 3.0).unwrap() - 0.7 / 3.0).abs() < 1e-15);
        assert!(matches!(integrated_brier(&three, 5.0), Err(Error::Domain(_))));
        let shifted = curve(&[0.5, 1.0], &[0.1, 0.1]);
        assert!(integrated_brier(&shifted, 1.0).is_err());
    }

    #[test]
    fn ipa_arithmetic() {
        let times = [0.0, 1.0, 2.0];
        let null = curve(&times, &[0.0, 0.2, 0.1]);
        let same = ipa(&null, &null).unwrap();
        assert_eq!(same.estimates, vec![None, Some(0.0), Some(0.0)]);
        let perfect = ipa(&curve(&times, &[0.0; 3]), &null).unwrap();
        assert_eq!(perfect.estimates[1], Some(1.0));
        let worse = ipa(&curve(&times, &[0.0, 0.4, 0.2]), &null).unwrap();
        assert_eq!(worse.estimates[2], Some(-1.0));
    }

    #[test]
    fn auc_anchors() {
        let d = dataset(&[(1.0, true), (2.0, true), (5.0, false), (6.0, true)]);
        let ordered = single_column(3.0, &[0.9, 0.8, 0.1, 0.2]);
        assert_eq!(auc_ipcw(&ordered, &d, 3.0).unwrap(), Some(1.0));
        let flat = single_column(3.0, &[0.4; 4]);
        assert_eq!(auc_ipcw(&flat, &d, 3.0).unwrap(), Some(0.5));
        let reversed = single_column(3.0, &[0.1, 0.2, 0.9, 0.8]);
        assert_eq!(auc_ipcw(&reversed, &d, 3.0).unwrap(), Some(0.0));
        assert_eq!(auc_ipcw(&single_column(0.5, &[0.4; 4]), &d, 0.5).unwrap(), None);
        assert_eq!(auc_ipcw(&single_column(7.0, &[0.4; 4]), &d, 7.0).unwrap(), None);
    }

    #[test]
    fn row_mismatch_is_shape_error() {
        let d = dataset(&[(1.0, true), (2.0, true)]);
        assert!(matches!(brier_score(&single_column(1.0, &[0.5]), &d, 1.0), Err(Error::Shape { .. })));
    }
}
