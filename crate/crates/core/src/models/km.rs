use serde::{Deserialize, Serialize};

use super::{validate_grid, HazardModel, RiskCurve};
use crate::data::SurvivalDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KmTarget {
    Event,
    /// Censorings are the "events"; estimates the censoring survivor `G`.
    Censoring,
}

/// Right-continuous product-limit step function.
#[derive(Debug, Clone, PartialEq)]
pub struct KaplanMeier {
    /// Distinct times at which the target occurs.
    times: Vec<f64>,
    /// `S` just after each jump time.
    survival: Vec<f64>,
    /// `d / n` at each jump time.
    increments: Vec<f64>,
}

/// Product-limit estimate over the distinct target times, with risk set
/// `#{T >= s}` (so at tied times, censorings are still at risk of the event).
pub fn kaplan_meier(d: &SurvivalDataset, target: KmTarget) -> Result<KaplanMeier> {
    if d.is_empty() {
        return Err(Error::Domain("Kaplan-Meier of an empty dataset".into()));
    }
    let mut rows: Vec<(f64, bool)> = d
        .records()
        .iter()
        .map(|r| {
            let hit = match target {
                KmTarget::Event => r.event,
                KmTarget::Censoring => !r.event,
            };
            (r.time, hit)
        })
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut km = KaplanMeier {
        times: Vec::new(),
        survival: Vec::new(),
        increments: Vec::new(),
    };
    let mut s = 1.0;
    let mut at_risk = rows.len();
    let mut i = 0;
    while i < rows.len() {
        let t = rows[i].0;
        let mut j = i;
        let mut hits = 0usize;
        while j < rows.len() && rows[j].0 == t {
            hits += usize::from(rows[j].1);
            j += 1;
        }
        if hits > 0 {
            let q = hits as f64 / at_risk as f64;
            s *= 1.0 - q;
            km.times.push(t);
            km.survival.push(s);
            km.increments.push(q);
        }
        at_risk -= j - i;
        i = j;
    }
    Ok(km)
}

impl KaplanMeier {
    pub fn jump_times(&self) -> &[f64] {
        &self.times
    }

    /// `S(t)`, including any jump at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            1.0
        } else {
            self.survival[k - 1]
        }
    }

    /// `S(t-)`, excluding any jump at `t`.
    pub fn left_limit(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&s| s < t);
        if k == 0 {
            1.0
        } else {
            self.survival[k - 1]
        }
    }
}

/// The covariate-free null prediction `1 - S_KM(t)`.
pub fn km_risk(d: &SurvivalDataset, grid: &[f64]) -> Result<RiskCurve> {
    kaplan_meier(d, KmTarget::Event)?.risk_on(grid)
}

impl KaplanMeier {
    pub fn risk_on(&self, grid: &[f64]) -> Result<RiskCurve> {
        validate_grid(grid)?;
        Ok(RiskCurve {
            times: grid.to_vec(),
            values: grid.iter().map(|&t| 1.0 - self.eval(t)).collect(),
        })
    }
}

/// Ignores covariates. Its hazard spreads each Nelson-Aalen increment `d / n`
/// evenly over the interval ending at that jump, so the hazard integrates to
/// the Nelson-Aalen cumulative hazard; risk curves use the exact `1 - S`.
impl HazardModel for KaplanMeier {
    fn num_covariates(&self) -> Option<usize> {
        None
    }

    fn hazard(&self, _covariates: &[f64], t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("hazard needs t >= 0, got {t}")));
        }
        let k = self.times.partition_point(|&s| s < t);
        if k == self.times.len() {
            return Ok(0.0);
        }
        let start = if k == 0 { 0.0 } else { self.times[k - 1] };
        let width = self.times[k] - start;
        Ok(if width > 0.0 { self.increments[k] / width } else { 0.0 })
    }

    fn risk_curve(&self, _covariates: &[f64], grid: &[f64]) -> Result<RiskCurve> {
        self.risk_on(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::SubjectRecord;

    fn dataset(rows: &[(f64, bool)]) -> SurvivalDataset {
        let records = rows.iter().map(|&(t, e)| SubjectRecord::new(t, e, vec![0.0])).collect();
        SurvivalDataset::new(vec!["x".into()], records).unwrap()
    }

    #[test]
    fn uncensored_is_empirical_survival() {
        let km = kaplan_meier(&dataset(&[(1.0, true), (2.0, true), (3.0, true)]), KmTarget::Event).unwrap();
        assert!((km.eval(1.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((km.eval(2.0) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(km.eval(3.0), 0.0);
        assert_eq!(km.eval(0.5), 1.0);
        assert_eq!(km.left_limit(1.0), 1.0);
        assert!((km.left_limit(2.0) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn censoring_shrinks_risk_set() {
        let km = kaplan_meier(&dataset(&[(1.0, false), (2.0, true), (3.0, true)]), KmTarget::Event).unwrap();
        assert_eq!(km.eval(1.5), 1.0);
        assert!((km.eval(2.0) - 0.5).abs() < 1e-15);
        assert_eq!(km.eval(3.0), 0.0);
    }

    #[test]
    fn censoring_flavour_without_censoring_is_one() {
        let d = dataset(&[(1.0, true), (2.0, true), (4.0, true)]);
        let g = kaplan_meier(&d, KmTarget::Censoring).unwrap();
        for t in [0.0, 1.0, 3.9, 10.0] {
            assert_eq!(g.eval(t), 1.0);
        }
    }

    #[test]
    fn censoring_flavour_hand_values() {
        let d = dataset(&[(1.0, true), (2.0, false), (3.0, true), (4.0, false)]);
        let g = kaplan_meier(&d, KmTarget::Censoring).unwrap();
        assert!((g.eval(3.5) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(g.eval(4.0), 0.0);
        assert!((g.left_limit(4.0) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ties_keep_censorings_at_risk() {
        // Two events and one censoring at t = 1 out of four subjects.
        let d = dataset(&[(1.0, true), (1.0, true), (1.0, false), (2.0, true)]);
        let km = kaplan_meier(&d, KmTarget::Event).unwrap();
        assert!((km.eval(1.0) - 0.5).abs() < 1e-15);
        assert_eq!(km.eval(2.0), 0.0);
    }

    #[test]
    fn km_risk_complements_survival_and_carries_forward() {
        let d = dataset(&[(1.0, true), (2.0, false), (3.0, true), (5.0, false)]);
        let km = kaplan_meier(&d, KmTarget::Event).unwrap();
        let grid = [0.0, 0.5, 1.0, 2.5, 3.0, 7.0, 100.0];
        let risk = km_risk(&d, &grid).unwrap();
        for (&t, &f) in grid.iter().zip(&risk.values) {
            assert_eq!(f + km.eval(t), 1.0);
        }
        assert_eq!(risk.values[5], risk.values[6]);
    }

    #[test]
    fn hazard_integrates_to_nelson_aalen() {
        let d = dataset(&[(1.0, true), (2.0, false), (3.0, true), (5.0, false)]);
        let km = kaplan_meier(&d, KmTarget::Event).unwrap();
        let n = 30_000;
        let h = 4.0 / n as f64;
        let integral: f64 = (0..n).map(|k| km.hazard(&[], (k as f64 + 0.5) * h).unwrap() * h).sum();
        assert!((integral - (0.25 + 0.5)).abs() < 1e-9);
        assert_eq!(km.hazard(&[], 10.0).unwrap(), 0.0);
    }
}
