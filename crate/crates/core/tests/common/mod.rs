//! Independent reference implementations used as test oracles.

#![allow(dead_code)]

use cbnn::data::{SubjectRecord, SurvivalDataset};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Asymptotic Kolmogorov p-value for statistic `d` on `n` samples, with
/// Stephens' small-sample correction.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = 2.0 * (-1f64).powi(k - 1) * (-2.0 * (k as f64 * lambda).powi(2)).exp();
        sum += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// One-sample KS statistic of `samples` against the continuous `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Random dataset with `n` subjects, ties in time and roughly `censor_share`
/// censored, plus per-subject random risks.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, censor_share: f64) -> SurvivalDataset {
    let records = (0..n)
        .map(|_| {
            let t = (rng.random_range(1..=12) as f64) * 0.5;
            SubjectRecord::new(t, rng.random::<f64>() >= censor_share, vec![rng.random::<f64>()])
        })
        .collect();
    SurvivalDataset::new(vec!["x".into()], records).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Product-limit estimate of the censoring survival at `t`, or just before
/// it when `left` is set; risk set at `s` is everyone with time >= s.
pub fn naive_g(d: &SurvivalDataset, t: f64, left: bool) -> f64 {
    let recs = d.records();
    let mut times: Vec<f64> = recs.iter().filter(|r| !r.event).map(|r| r.time).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut g = 1.0;
    for s in times {
        if (left && s >= t) || (!left && s > t) {
            break;
        }
        let at_risk = recs.iter().filter(|r| r.time >= s).count() as f64;
        let censored = recs.iter().filter(|r| !r.event && r.time == s).count() as f64;
        g *= 1.0 - censored / at_risk;
    }
    g
}

/// `None` where a required censoring survival is zero.
pub fn naive_weights(d: &SurvivalDataset, t: f64) -> Option<Vec<f64>> {
    d.records()
        .iter()
        .map(|r| {
            if r.time <= t && r.event {
                let g = naive_g(d, r.time, true);
                (g > 0.0).then(|| 1.0 / g)
            } else if r.time > t {
                let g = naive_g(d, t, false);
                (g > 0.0).then(|| 1.0 / g)
            } else {
                Some(0.0)
            }
        })
        .collect()
}

pub fn naive_brier(d: &SurvivalDataset, risk: &[f64], t: f64) -> Option<f64> {
    let w = naive_weights(d, t)?;
    let mut sum = 0.0;
    for (i, r) in d.records().iter().enumerate() {
        let outcome = if r.time <= t && r.event { 1.0 } else { 0.0 };
        sum += (outcome - risk[i]).powi(2) * w[i];
    }
    Some(sum / d.len() as f64)
}

/// Double-loop weighted concordance; `Ok(None)` without case-control pairs.
pub fn naive_auc(d: &SurvivalDataset, risk: &[f64], t: f64) -> Option<Option<f64>> {
    let w = naive_weights(d, t)?;
    let recs = d.records();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..recs.len() {
        if !(recs[i].time <= t && recs[i].event) {
            continue;
        }
        for j in 0..recs.len() {
            if recs[j].time <= t {
                continue;
            }
            let pair = w[i] * w[j];
            den += pair;
            if risk[i] > risk[j] {
                num += pair;
            } else if risk[i] == risk[j] {
                num += 0.5 * pair;
            }
        }
    }
    Some((den > 0.0).then(|| num / den))
}

/// Trapezoid rule over `(times, values)` divided by the last time.
pub fn naive_ibs(times: &[f64], values: &[f64]) -> f64 {
    let t_max = *times.last().unwrap();
    let mut area = 0.0;
    for k in 1..times.len() {
        area += 0.5 * (values[k] + values[k - 1]) * (times[k] - times[k - 1]);
    }
    area / t_max
}
