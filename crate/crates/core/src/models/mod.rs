//! Hazard models and the risk curves they imply.
//!
//! Every model exposes `h(t | x)`; the risk `F(t | x) = 1 - exp(-∫₀ᵗ h)` is a
//! midpoint Riemann sum over a caller-supplied grid. The Kaplan-Meier null
//! overrides this with its exact step function.

mod features;
mod fitted;
mod km;

use std::io::Write;

use crate::error::{Error, Result};

pub use features::{FeatureMap, FeatureTerm};
pub use fitted::{fit_case_base, fit_cblr, fit_cbnn, CaseBaseModel, ModelKind, MODEL_FORMAT_VERSION};
pub use km::{kaplan_meier, km_risk, KaplanMeier, KmTarget};

pub const DEFAULT_RISK_GRID_POINTS: usize = 512;

pub trait HazardModel: Send + Sync {
    /// Expected covariate count, or `None` when covariates are ignored.
    fn num_covariates(&self) -> Option<usize>;

    /// `h(t | covariates)` for `t >= 0`.
    fn hazard(&self, covariates: &[f64], t: f64) -> Result<f64>;

    fn hazards(&self, covariates: &[f64], times: &[f64]) -> Result<Vec<f64>> {
        times.iter().map(|&t| self.hazard(covariates, t)).collect()
    }

    fn risk_curve(&self, covariates: &[f64], grid: &[f64]) -> Result<RiskCurve> {
        midpoint_risk(self, covariates, grid)
    }
}

/// A closure as a hazard model.
pub struct HazardFn<F>(pub F);

impl<F> HazardModel for HazardFn<F>
where
    F: Fn(&[f64], f64) -> f64 + Send + Sync,
{
    fn num_covariates(&self) -> Option<usize> {
        None
    }

    fn hazard(&self, covariates: &[f64], t: f64) -> Result<f64> {
        Ok((self.0)(covariates, t))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl RiskCurve {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Step lookup: the value at the last grid time `<= t`.
    pub fn at(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            0.0
        } else {
            self.values[k - 1]
        }
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["time", "value"])?;
        for (t, v) in self.times.iter().zip(&self.values) {
            w.write_record([t.to_string(), v.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

/// Grids start at 0 and increase strictly.
pub fn validate_grid(grid: &[f64]) -> Result<()> {
    match grid.first() {
        None => return Err(Error::Domain("empty time grid".into())),
        Some(&t0) if t0 != 0.0 => {
            return Err(Error::Domain(format!("time grid must start at 0, starts at {t0}")));
        }
        _ => {}
    }
    if let Some(w) = grid.windows(2).find(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
        return Err(Error::Domain(format!(
            "time grid must increase strictly, found {} then {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// `points` equally spaced times from 0 to `horizon` inclusive.
pub fn uniform_grid(horizon: f64, points: usize) -> Result<Vec<f64>> {
    if !(horizon > 0.0 && horizon.is_finite()) || points < 2 {
        return Err(Error::Domain(format!(
            "uniform grid needs a positive horizon and >= 2 points, got {horizon} and {points}"
        )));
    }
    let step = horizon / (points - 1) as f64;
    let mut grid: Vec<f64> = (0..points).map(|k| k as f64 * step).collect();
    grid[points - 1] = horizon;
    Ok(grid)
}

/// `F(t_k) = 1 - exp(-Σ_{j<=k} h(x, m_j) Δ_j)` with midpoints `m_j` of each
/// grid interval.
pub fn risk_curve(model: &dyn HazardModel, covariates: &[f64], grid: &[f64]) -> Result<RiskCurve> {
    model.risk_curve(covariates, grid)
}

pub fn midpoint_risk<M: HazardModel + ?Sized>(model: &M, covariates: &[f64], grid: &[f64]) -> Result<RiskCurve> {
    validate_grid(grid)?;
    let midpoints: Vec<f64> = grid.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let hazards = if midpoints.is_empty() {
        Vec::new()
    } else {
        model.hazards(covariates, &midpoints)?
    };
    let mut values = Vec::with_capacity(grid.len());
    values.push(0.0);
    let mut cumulative = 0.0;
    for ((w, &m), &h) in grid.windows(2).zip(&midpoints).zip(&hazards) {
        if !(h >= 0.0) {
            return Err(Error::Contract(format!("model returned hazard {h} at t = {m}")));
        }
        cumulative += h * (w[1] - w[0]);
        values.push(-(-cumulative).exp_m1());
    }
    Ok(RiskCurve {
        times: grid.to_vec(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_error(lambda: f64, points: usize) -> f64 {
        let model = HazardFn(move |_: &[f64], _t: f64| lambda);
        let grid = uniform_grid(10.0, points).unwrap();
        let curve = risk_curve(&model, &[], &grid).unwrap();
        grid.iter()
            .zip(&curve.values)
            .map(|(&t, &f)| (f - (1.0 - (-lambda * t).exp())).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn constant_hazard_matches_exponential() {
        assert!(max_error(0.3, 10_000) < 1e-6);
    }

    #[test]
    fn zero_hazard_gives_zero_risk() {
        let model = HazardFn(|_: &[f64], _t: f64| 0.0);
        let curve = risk_curve(&model, &[1.0], &uniform_grid(3.0, 50).unwrap()).unwrap();
        assert!(curve.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn weibull_hazard_and_convergence_order() {
        let model = HazardFn(|_: &[f64], t: f64| 2.0 * t);
        let err = |points: usize| {
            let grid = uniform_grid(1.0, points).unwrap();
            let curve = risk_curve(&model, &[], &grid).unwrap();
            (curve.values[points - 1] - (1.0 - (-1.0f64).exp())).abs()
        };
        // Midpoint is exact for linear hazards.
        assert!(err(10_000) < 1e-5);
        let model = HazardFn(|_: &[f64], t: f64| (t * 1.7).sin().abs() + t * t);
        let at = |points: usize| {
            let grid = uniform_grid(1.5, points).unwrap();
            *risk_curve(&model, &[], &grid).unwrap().values.last().unwrap()
        };
        let reference = at(200_001);
        let e1 = (at(101) - reference).abs();
        let e2 = (at(201) - reference).abs();
        assert!(e1 / e2 >= 3.0, "{e1} / {e2}");
    }

    #[test]
    fn negative_hazard_is_contract_error() {
        let model = HazardFn(|_: &[f64], t: f64| if t > 1.0 { -1.0 } else { 1.0 });
        let err = risk_curve(&model, &[], &uniform_grid(2.0, 10).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn grid_validation() {
        let model = HazardFn(|_: &[f64], _t: f64| 1.0);
        assert!(risk_curve(&model, &[], &[0.5, 1.0]).is_err());
        assert!(risk_curve(&model, &[], &[0.0, 1.0, 1.0]).is_err());
        assert!(risk_curve(&model, &[], &[]).is_err());
        let single = risk_curve(&model, &[], &[0.0]).unwrap();
        assert_eq!(single.values, vec![0.0]);
    }

    #[test]
    fn uniform_grid_endpoints() {
        let g = uniform_grid(3.0, 4).unwrap();
        assert_eq!(g, vec![0.0, 1.0, 2.0, 3.0]);
        assert!(uniform_grid(0.0, 4).is_err());
    }
}
