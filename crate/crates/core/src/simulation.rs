//! Survival data from a flexible log-hazard: a restricted cubic spline
//! baseline in log-time, direct covariate effects, a covariate interaction and
//! a time-varying interaction, plus random and administrative censoring.
//!
//! Event times are drawn by inverse transform: with `U ~ Uniform(0, 1)` the
//! event time solves `H(t) = -log U`, where `H` is the cumulative hazard
//! (integrated by adaptive Simpson) and the root is found by bisection.

use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{SubjectRecord, SurvivalDataset};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded, SeededRng, Stream};

/// Lower end of the root bracket; keeps `log t` finite.
pub const TIME_FLOOR: f64 = 1e-10;
pub const TIME_TOLERANCE: f64 = 1e-8;
pub const QUADRATURE_REL_TOL: f64 = 1e-8;

pub const COVARIATE_NAMES: [&str; 3] = ["z1", "z2", "z3"];
/// Standard deviation of the normal covariates.
pub const COVARIATE_SD: f64 = 0.5;

/// Knots on the log-time axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplineBasisSpec {
    pub boundary_knots: [f64; 2],
    pub interior_knots: [f64; 3],
}

impl Default for SplineBasisSpec {
    fn default() -> Self {
        Self {
            boundary_knots: [0.05f64.ln(), 5f64.ln()],
            interior_knots: [0.5f64.ln(), 1.2f64.ln(), 2.5f64.ln()],
        }
    }
}

impl SplineBasisSpec {
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.boundary_knots;
        let [k1, k2, k3] = self.interior_knots;
        let all = [lo, k1, k2, k3, hi];
        if all.iter().any(|k| !k.is_finite()) || !all.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config(format!(
                "knots must satisfy boundary_low < k1 < k2 < k3 < boundary_high, got {all:?}"
            )));
        }
        Ok(())
    }

    /// `(1, x, v1(x), v2(x), v3(x))` at `x = log t`.
    pub fn basis_at_log_time(&self, x: f64) -> [f64; 5] {
        let [k_min, k_max] = self.boundary_knots;
        let cube = |u: f64| if u > 0.0 { u * u * u } else { 0.0 };
        let mut psi = [1.0, x, 0.0, 0.0, 0.0];
        for (slot, &k) in psi[2..].iter_mut().zip(&self.interior_knots) {
            let lambda = (k_max - k) / (k_max - k_min);
            *slot = cube(x - k) - lambda * cube(x - k_min) - (1.0 - lambda) * cube(x - k_max);
        }
        psi
    }
}

/// Restricted cubic spline basis of log-time (intercept, linear term and three
/// knot terms), linear beyond the boundary knots.
pub fn spline_basis(t: f64, spec: &SplineBasisSpec) -> Result<[f64; 5]> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("spline basis needs t > 0, got {t}")));
    }
    Ok(spec.basis_at_log_time(t.ln()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationHazardSpec {
    /// Spline coefficients.
    pub gamma: [f64; 5],
    /// Direct effects of z1, z2, z3.
    pub beta: [f64; 3],
    /// `tau[0]` multiplies `z1 * t`, `tau[1]` multiplies `z2 * z3`.
    pub tau: [f64; 2],
    pub basis: SplineBasisSpec,
    /// Administrative censoring horizon.
    pub t_max: f64,
    pub censoring_probability: f64,
}

impl Default for SimulationHazardSpec {
    fn default() -> Self {
        Self {
            gamma: [3.9, 3.0, -0.43, 1.33, -0.86],
            beta: [-5.0, -1.0, 1.0],
            tau: [0.001, -1.0],
            basis: SplineBasisSpec::default(),
            t_max: 5.0,
            censoring_probability: 0.1,
        }
    }
}

impl SimulationHazardSpec {
    /// Constant hazard `rate` with no covariate effects.
    pub fn constant(rate: f64) -> Self {
        Self {
            gamma: [rate.ln(), 0.0, 0.0, 0.0, 0.0],
            beta: [0.0; 3],
            tau: [0.0; 2],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.basis.validate()?;
        let coefs = self.gamma.iter().chain(&self.beta).chain(&self.tau);
        if coefs.into_iter().any(|c| !c.is_finite()) {
            return Err(Error::Config("hazard coefficients must be finite".into()));
        }
        if !(self.t_max > 0.0) {
            return Err(Error::Config(format!("t_max must be positive, got {}", self.t_max)));
        }
        if !(0.0..1.0).contains(&self.censoring_probability) {
            return Err(Error::Config(format!(
                "censoring probability must lie in [0, 1), got {}",
                self.censoring_probability
            )));
        }
        Ok(())
    }
}

fn check_covariates(z: &[f64]) -> Result<()> {
    if z.len() != 3 {
        return Err(Error::Shape {
            expected: 3,
            actual: z.len(),
        });
    }
    Ok(())
}

/// `Σ γ·ψ(t) + β·z + τ1·z1·t + τ2·z2·z3`.
pub fn log_hazard(spec: &SimulationHazardSpec, z: &[f64], t: f64) -> Result<f64> {
    check_covariates(z)?;
    let psi = spline_basis(t, &spec.basis)?;
    Ok(log_hazard_unchecked(spec, z, t, &psi))
}

fn log_hazard_unchecked(spec: &SimulationHazardSpec, z: &[f64], t: f64, psi: &[f64; 5]) -> f64 {
    let baseline: f64 = spec.gamma.iter().zip(psi).map(|(g, p)| g * p).sum();
    baseline
        + spec.beta[0] * z[0]
        + spec.beta[1] * z[1]
        + spec.beta[2] * z[2]
        + spec.tau[0] * z[0] * t
        + spec.tau[1] * z[1] * z[2]
}

fn hazard_fn<'a>(spec: &'a SimulationHazardSpec, z: &'a [f64]) -> impl Fn(f64) -> f64 + 'a {
    move |u: f64| {
        let t = u.max(TIME_FLOOR);
        let psi = spec.basis.basis_at_log_time(t.ln());
        log_hazard_unchecked(spec, z, t, &psi).exp()
    }
}

/// `∫₀ᵗ h(u) du`.
pub fn cumulative_hazard(spec: &SimulationHazardSpec, z: &[f64], t: f64) -> Result<f64> {
    check_covariates(z)?;
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("cumulative hazard needs t >= 0, got {t}")));
    }
    integrate(&hazard_fn(spec, z), 0.0, t)
}

fn integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let value = adaptive_simpson(f, a, b, QUADRATURE_REL_TOL);
    if !value.is_finite() {
        return Err(Error::Numeric(format!("cumulative hazard overflows on [{a}, {b}]")));
    }
    Ok(value)
}

/// Composite Simpson on 16 panels for a scale estimate, then recursive
/// refinement of each panel to a share of `rel_tol * |estimate|`.
pub(crate) fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    const PANELS: usize = 16;
    const MAX_DEPTH: u32 = 40;
    let width = (b - a) / PANELS as f64;
    let mut panels = Vec::with_capacity(PANELS);
    let mut coarse = 0.0;
    for i in 0..PANELS {
        let lo = a + width * i as f64;
        let hi = if i + 1 == PANELS { b } else { lo + width };
        let (flo, fmid, fhi) = (f(lo), f(0.5 * (lo + hi)), f(hi));
        let s = simpson(lo, hi, flo, fmid, fhi);
        coarse += s;
        panels.push((lo, hi, flo, fmid, fhi, s));
    }
    if !coarse.is_finite() {
        return coarse;
    }
    let tol = (rel_tol * coarse.abs()).max(f64::MIN_POSITIVE) / PANELS as f64;
    panels
        .into_iter()
        .map(|(lo, hi, flo, fmid, fhi, s)| refine(f, lo, hi, flo, fmid, fhi, s, tol, MAX_DEPTH))
        .sum()
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol || !diff.is_finite() {
        return left + right + diff / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + refine(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventTime {
    pub time: f64,
    /// The event would fall after `t_max`; `time` is then `t_max`.
    pub administratively_censored: bool,
}

/// Smallest `t` in `[TIME_FLOOR, t_max]` with `H(t) >= -log u`, to within
/// `TIME_TOLERANCE`; censored at `t_max` when `H(t_max)` falls short.
pub fn invert_cumulative_hazard(spec: &SimulationHazardSpec, z: &[f64], u: f64) -> Result<EventTime> {
    check_covariates(z)?;
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::Domain(format!("uniform draw must lie in (0, 1], got {u}")));
    }
    let target = -u.ln();
    let h = hazard_fn(spec, z);
    let bracket_error = || Error::Numeric(format!("cannot bracket event time for z = {z:?}, U = {u}"));
    // An overflowing partial integral lies beyond any finite target.
    let reaches = |acc: f64| acc.is_infinite() || acc >= target;

    let mut lo = TIME_FLOOR.min(spec.t_max);
    let mut h_lo = adaptive_simpson(&h, 0.0, lo, QUADRATURE_REL_TOL);
    if h_lo.is_nan() {
        return Err(bracket_error());
    }
    if reaches(h_lo) {
        return Ok(EventTime {
            time: lo,
            administratively_censored: false,
        });
    }
    // Grow the bracket geometrically so a huge horizon never integrates past the root.
    let mut hi = spec.t_max.min(1.0);
    loop {
        let inc = adaptive_simpson(&h, lo, hi, QUADRATURE_REL_TOL);
        if inc.is_nan() {
            return Err(bracket_error());
        }
        if reaches(h_lo + inc) {
            break;
        }
        if hi >= spec.t_max {
            return Ok(EventTime {
                time: spec.t_max,
                administratively_censored: true,
            });
        }
        lo = hi;
        h_lo += inc;
        hi = (2.0 * hi).min(spec.t_max);
    }
    while hi - lo > TIME_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        let inc = adaptive_simpson(&h, lo, mid, QUADRATURE_REL_TOL);
        if inc.is_nan() {
            return Err(bracket_error());
        }
        if reaches(h_lo + inc) {
            hi = mid;
        } else {
            lo = mid;
            h_lo += inc;
        }
    }
    Ok(EventTime {
        time: hi,
        administratively_censored: false,
    })
}

/// One inverse-transform draw with its own seed.
pub fn sample_event_time(spec: &SimulationHazardSpec, z: &[f64], seed: u64) -> Result<EventTime> {
    let mut rng = seeded(seed);
    invert_cumulative_hazard(spec, z, uniform_open_low(&mut rng))
}

// (0, 1]
fn uniform_open_low(rng: &mut SeededRng) -> f64 {
    1.0 - rng.random::<f64>()
}

fn draw_covariates(rng: &mut SeededRng) -> [f64; 3] {
    let z1 = Bernoulli::new(0.5).expect("valid p").sample(rng);
    let z2_mean = if z1 { 1.0 } else { 0.0 };
    let z2 = Normal::new(z2_mean, COVARIATE_SD).expect("valid sd").sample(rng);
    let z3 = Normal::new(1.0, COVARIATE_SD).expect("valid sd").sample(rng);
    [f64::from(u8::from(z1)), z2, z3]
}

fn subject_rng(seed: u64, i: usize) -> SeededRng {
    seeded(derive_seed(seed, Stream::Subject, i as u64))
}

/// `z1 ~ Bernoulli(0.5)`, `z2 | z1 ~ N(z1, 0.5²)`, `z3 ~ N(1, 0.5²)`.
///
/// Subject `i` draws from its own stream, so these are exactly the covariates
/// `simulate_dataset(n, _, seed)` produces.
pub fn generate_covariates(n: usize, seed: u64) -> Vec<[f64; 3]> {
    (0..n).map(|i| draw_covariates(&mut subject_rng(seed, i))).collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensoringReport {
    pub subjects: usize,
    pub events: usize,
    pub random_censored: usize,
    pub administrative_censored: usize,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub dataset: SurvivalDataset,
    pub report: CensoringReport,
}

/// Sidecar written next to a simulated CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationMetadata {
    pub n: usize,
    pub seed: u64,
    pub spec: SimulationHazardSpec,
    pub report: CensoringReport,
    pub covariate_model: String,
    pub censoring_model: String,
}

impl SimulationMetadata {
    pub fn new(n: usize, seed: u64, spec: &SimulationHazardSpec, report: CensoringReport) -> Self {
        Self {
            n,
            seed,
            spec: spec.clone(),
            report,
            covariate_model: format!(
                "z1 ~ Bernoulli(0.5); z2 ~ Normal(mean z1, sd {COVARIATE_SD}); z3 ~ Normal(1, sd {COVARIATE_SD})"
            ),
            censoring_model: "each subject independently with probability censoring_probability is censored at C ~ Uniform(0, event time); events beyond t_max are censored at t_max".into(),
        }
    }
}

enum Outcome {
    Event,
    Random,
    Administrative,
}

/// `n` subjects; subject `i` uses the stream `derive_seed(seed, Subject, i)`,
/// so serial and parallel runs agree.
pub fn simulate_dataset(n: usize, spec: &SimulationHazardSpec, seed: u64) -> Result<Simulation> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::Domain("cannot simulate an empty cohort".into()));
    }
    let rows: Vec<(SubjectRecord, Outcome)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = subject_rng(seed, i);
            let z = draw_covariates(&mut rng);
            let u = uniform_open_low(&mut rng);
            let draw = invert_cumulative_hazard(spec, &z, u)?;
            let censor = rng.random::<f64>() < spec.censoring_probability;
            let c_frac: f64 = rng.random();
            let (record, outcome) = if censor {
                (SubjectRecord::new(c_frac * draw.time, false, z.to_vec()), Outcome::Random)
            } else if draw.administratively_censored {
                (SubjectRecord::new(draw.time, false, z.to_vec()), Outcome::Administrative)
            } else {
                (SubjectRecord::new(draw.time, true, z.to_vec()), Outcome::Event)
            };
            Ok((record, outcome))
        })
        .collect::<Result<_>>()?;

    let mut report = CensoringReport {
        subjects: n,
        ..CensoringReport::default()
    };
    let mut records = Vec::with_capacity(n);
    for (record, outcome) in rows {
        match outcome {
            Outcome::Event => report.events += 1,
            Outcome::Random => report.random_censored += 1,
            Outcome::Administrative => report.administrative_censored += 1,
        }
        records.push(record);
    }
    let names = COVARIATE_NAMES.iter().map(|s| s.to_string()).collect();
    Ok(Simulation {
        dataset: SurvivalDataset::new(names, records)?,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_below_lower_boundary_is_linear() {
        let spec = SplineBasisSpec::default();
        let t = 0.01;
        let psi = spline_basis(t, &spec).unwrap();
        assert_eq!(psi, [1.0, t.ln(), 0.0, 0.0, 0.0]);
        assert!(spline_basis(0.0, &spec).is_err());
        assert!(spline_basis(-1.0, &spec).is_err());
    }

    fn combo(spec: &SplineBasisSpec, x: f64) -> f64 {
        let g = SimulationHazardSpec::default().gamma;
        spec.basis_at_log_time(x).iter().zip(&g).map(|(p, g)| p * g).sum()
    }

    #[test]
    fn basis_is_linear_outside_boundaries() {
        let spec = SplineBasisSpec::default();
        let h = 1e-3;
        for x in [-6.0, -3.5, 2.0, 3.0, 5.0] {
            let second = (combo(&spec, x + h) - 2.0 * combo(&spec, x) + combo(&spec, x - h)) / (h * h);
            assert!(second.abs() < 1e-6, "x = {x}: {second}");
        }
    }

    #[test]
    fn basis_is_smooth_across_knots() {
        let spec = SplineBasisSpec::default();
        let knots = spec
            .interior_knots
            .iter()
            .chain(&spec.boundary_knots)
            .copied()
            .collect::<Vec<_>>();
        // A jump in f or f' at the knot would blow up the straddling second
        // difference by 1/h² or 1/h.
        let (h, delta) = (1e-4, 1e-3);
        for k in knots {
            for j in 0..5 {
                let f = |x: f64| spec.basis_at_log_time(x)[j];
                let d2 = |x: f64| (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
                assert!((d2(k) - d2(k - delta)).abs() < 0.1, "knot {k}, term {j}");
                assert!((d2(k) - d2(k + delta)).abs() < 0.1, "knot {k}, term {j}");
            }
        }
    }

    #[test]
    fn log_hazard_algebra() {
        let spec = SimulationHazardSpec::default();
        let t = 1.7;
        let base: f64 = spline_basis(t, &spec.basis).unwrap().iter().zip(&spec.gamma).map(|(p, g)| p * g).sum();
        assert!((log_hazard(&spec, &[0.0, 0.0, 0.0], t).unwrap() - base).abs() < 1e-14);
        for t in [0.3, 2.0, 4.5] {
            let diff = log_hazard(&spec, &[1.0, 0.4, 1.2], t).unwrap() - log_hazard(&spec, &[0.0, 0.4, 1.2], t).unwrap();
            assert!((diff - (spec.beta[0] + spec.tau[0] * t)).abs() < 1e-12);
        }
        assert!(log_hazard(&spec, &[1.0, 2.0], 1.0).is_err());
    }

    #[test]
    fn log_hazard_reference_value() {
        // Evaluated independently in a scripting calculator.
        let spec = SimulationHazardSpec::default();
        let value = log_hazard(&spec, &[1.0, 1.0, 1.0], 1.0).unwrap();
        assert!((value - -4.062757707728997).abs() < 1e-12, "{value}");
    }

    #[test]
    fn cumulative_hazard_closed_forms() {
        let spec = SimulationHazardSpec::constant(0.37);
        assert_eq!(cumulative_hazard(&spec, &[0.0; 3], 0.0).unwrap(), 0.0);
        for t in [0.5, 3.0, 11.0] {
            let h = cumulative_hazard(&spec, &[0.3, -1.0, 2.0], t).unwrap();
            assert!(((h - 0.37 * t) / (0.37 * t)).abs() < 1e-8);
        }
        // Weibull-type: log h = log 2 + log t, so H = t².
        let weibull = SimulationHazardSpec {
            gamma: [2f64.ln(), 1.0, 0.0, 0.0, 0.0],
            ..SimulationHazardSpec::constant(1.0)
        };
        for t in [0.2, 1.0, 2.5] {
            let h = cumulative_hazard(&weibull, &[0.0; 3], t).unwrap();
            assert!(((h - t * t) / (t * t)).abs() < 1e-8, "{h} vs {}", t * t);
        }
    }

    #[test]
    fn cumulative_hazard_overflow_is_numeric() {
        let spec = SimulationHazardSpec {
            gamma: [800.0, 0.0, 0.0, 0.0, 0.0],
            ..SimulationHazardSpec::default()
        };
        assert!(matches!(cumulative_hazard(&spec, &[0.0; 3], 1.0), Err(Error::Numeric(_))));
    }

    #[test]
    fn inversion_hits_target() {
        let spec = SimulationHazardSpec::default();
        let z = [0.0, 0.2, 0.9];
        let draw = invert_cumulative_hazard(&spec, &z, 0.4).unwrap();
        assert!(!draw.administratively_censored);
        let h = cumulative_hazard(&spec, &z, draw.time).unwrap();
        assert!((h - (-0.4f64.ln())).abs() < 1e-5);
        let below = cumulative_hazard(&spec, &z, draw.time - 2.0 * TIME_TOLERANCE).unwrap();
        assert!(below < -0.4f64.ln());
    }

    #[test]
    fn u_near_one_gives_tiny_time() {
        let spec = SimulationHazardSpec::constant(0.5);
        let draw = invert_cumulative_hazard(&spec, &[0.0; 3], 1.0).unwrap();
        assert_eq!(draw.time, TIME_FLOOR);
        let draw = invert_cumulative_hazard(&spec, &[0.0; 3], 1.0 - 1e-12).unwrap();
        assert!(draw.time < 1e-8 + TIME_TOLERANCE);
    }

    #[test]
    fn weak_hazard_is_administratively_censored() {
        let spec = SimulationHazardSpec::constant(1e-6);
        let draw = invert_cumulative_hazard(&spec, &[0.0; 3], 0.5).unwrap();
        assert!(draw.administratively_censored);
        assert_eq!(draw.time, spec.t_max);
    }

    #[test]
    fn stronger_hazard_never_delays_events() {
        let base = SimulationHazardSpec::default();
        let mut bumped = base.clone();
        bumped.gamma[0] += 0.05;
        let z = [1.0, 0.8, 1.1];
        for seed in 0..1000 {
            let a = sample_event_time(&base, &z, seed).unwrap();
            let b = sample_event_time(&bumped, &z, seed).unwrap();
            assert!(b.time <= a.time + TIME_TOLERANCE, "seed {seed}: {} > {}", b.time, a.time);
        }
    }

    #[test]
    fn covariate_moments() {
        let z = generate_covariates(100_000, 5);
        let n = z.len() as f64;
        let mean_z1 = z.iter().map(|r| r[0]).sum::<f64>() / n;
        assert!((mean_z1 - 0.5).abs() < 0.005);
        let ones: Vec<f64> = z.iter().filter(|r| r[0] == 1.0).map(|r| r[1]).collect();
        let mean_z2 = ones.iter().sum::<f64>() / ones.len() as f64;
        assert!((mean_z2 - 1.0).abs() < 0.01);
        let mean_z3 = z.iter().map(|r| r[2]).sum::<f64>() / n;
        let sd_z3 = (z.iter().map(|r| (r[2] - mean_z3).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((sd_z3 - 0.5).abs() < 0.01);
    }

    #[test]
    fn no_censoring_path() {
        let spec = SimulationHazardSpec {
            censoring_probability: 0.0,
            t_max: 1e6,
            ..SimulationHazardSpec::default()
        };
        let sim = simulate_dataset(300, &spec, 2).unwrap();
        assert!(sim.dataset.records().iter().all(|r| r.event));
        assert_eq!(sim.report.events, 300);
    }

    #[test]
    fn simulation_is_deterministic_and_consistent() {
        let spec = SimulationHazardSpec::default();
        let a = simulate_dataset(200, &spec, 13).unwrap();
        let b = simulate_dataset(200, &spec, 13).unwrap();
        assert_eq!(a.dataset, b.dataset);
        let z = generate_covariates(200, 13);
        for (r, zi) in a.dataset.records().iter().zip(&z) {
            assert_eq!(r.covariates, zi.to_vec());
        }
        let rep = a.report;
        assert_eq!(rep.events + rep.random_censored + rep.administrative_censored, 200);
        assert_eq!(rep.events, a.dataset.event_count());
    }
}
