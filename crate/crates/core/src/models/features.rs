use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulation::{SplineBasisSpec, TIME_FLOOR};

/// One block of design columns built from `(covariates, time)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FeatureTerm {
    Identity { covariate: usize },
    /// Raw follow-up time.
    Time,
    Product { left: usize, right: usize },
    TimeProduct { covariate: usize },
    /// `log t` and the three knot terms of the restricted cubic spline; the
    /// constant column is left to the model's bias.
    TimeSpline { basis: SplineBasisSpec },
}

impl FeatureTerm {
    pub fn width(&self) -> usize {
        match self {
            FeatureTerm::TimeSpline { .. } => 4,
            _ => 1,
        }
    }

    fn covariates(&self) -> Vec<usize> {
        match *self {
            FeatureTerm::Identity { covariate } | FeatureTerm::TimeProduct { covariate } => vec![covariate],
            FeatureTerm::Product { left, right } => vec![left, right],
            FeatureTerm::Time | FeatureTerm::TimeSpline { .. } => vec![],
        }
    }

    fn label(&self, names: &[String]) -> Vec<String> {
        let name = |i: usize| names.get(i).cloned().unwrap_or_else(|| format!("x{i}"));
        match *self {
            FeatureTerm::Identity { covariate } => vec![name(covariate)],
            FeatureTerm::Time => vec!["time".into()],
            FeatureTerm::Product { left, right } => vec![format!("{}*{}", name(left), name(right))],
            FeatureTerm::TimeProduct { covariate } => vec![format!("{}*time", name(covariate))],
            FeatureTerm::TimeSpline { .. } => {
                vec!["log(time)".into(), "spline1".into(), "spline2".into(), "spline3".into()]
            }
        }
    }
}

/// Ordered list of terms; the design row is their concatenation.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureMap {
    pub terms: Vec<FeatureTerm>,
}

impl FeatureMap {
    pub fn new(terms: Vec<FeatureTerm>) -> Self {
        Self { terms }
    }

    /// Bias only.
    pub fn intercept_only() -> Self {
        Self::default()
    }

    /// Each covariate as is, then time.
    pub fn linear(num_covariates: usize) -> Self {
        let mut terms: Vec<_> = (0..num_covariates)
            .map(|covariate| FeatureTerm::Identity { covariate })
            .collect();
        terms.push(FeatureTerm::Time);
        Self { terms }
    }

    /// The exact design of the simulation's log-hazard: spline baseline, three
    /// direct effects, `z1 * t` and `z2 * z3`.
    pub fn simulation_truth(basis: SplineBasisSpec) -> Self {
        Self {
            terms: vec![
                FeatureTerm::TimeSpline { basis },
                FeatureTerm::Identity { covariate: 0 },
                FeatureTerm::Identity { covariate: 1 },
                FeatureTerm::Identity { covariate: 2 },
                FeatureTerm::TimeProduct { covariate: 0 },
                FeatureTerm::Product { left: 1, right: 2 },
            ],
        }
    }

    pub fn width(&self) -> usize {
        self.terms.iter().map(FeatureTerm::width).sum()
    }

    pub fn validate(&self, num_covariates: usize) -> Result<()> {
        for term in &self.terms {
            if let Some(&bad) = term.covariates().iter().find(|&&i| i >= num_covariates) {
                return Err(Error::Config(format!(
                    "feature term {term:?} references covariate {bad}, but there are only {num_covariates}"
                )));
            }
            if let FeatureTerm::TimeSpline { basis } = term {
                basis.validate()?;
            }
        }
        Ok(())
    }

    pub fn column_names(&self, covariate_names: &[String]) -> Vec<String> {
        self.terms.iter().flat_map(|t| t.label(covariate_names)).collect()
    }

    /// Writes one design row into `out`, which must be `width()` long.
    /// Spline terms evaluate `log t` at `max(t, TIME_FLOOR)`.
    pub fn fill_row(&self, covariates: &[f64], t: f64, out: &mut [f64]) {
        let mut k = 0;
        for term in &self.terms {
            match *term {
                FeatureTerm::Identity { covariate } => out[k] = covariates[covariate],
                FeatureTerm::Time => out[k] = t,
                FeatureTerm::Product { left, right } => out[k] = covariates[left] * covariates[right],
                FeatureTerm::TimeProduct { covariate } => out[k] = covariates[covariate] * t,
                FeatureTerm::TimeSpline { ref basis } => {
                    let psi = basis.basis_at_log_time(t.max(TIME_FLOOR).ln());
                    out[k..k + 4].copy_from_slice(&psi[1..]);
                }
            }
            k += term.width();
        }
    }

    pub fn row(&self, covariates: &[f64], t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.width()];
        self.fill_row(covariates, t, &mut out);
        out
    }
}
