//! Case-base sampling.
//!
//! The case series holds one person-moment per observed event, at the event
//! time. The base series is drawn uniformly over the study base (total
//! person-time): a subject is picked with probability proportional to its
//! follow-up, then a moment uniformly inside that follow-up. Sampling at rate
//! `b / B` biases the log-odds of a moment being a case by `log(b / B)`, which
//! the fitted model cancels by carrying the offset `log(B / b)`.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::data::SurvivalDataset;
use crate::error::{Error, Result};
use crate::rng::seeded;

pub const DEFAULT_RATIO: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct PersonMoment {
    /// Index of the source subject in the sampled dataset.
    pub subject: usize,
    pub time: f64,
    pub covariates: Vec<f64>,
    /// `true` for the case series, `false` for the base series.
    pub case: bool,
}

#[derive(Debug, Clone)]
pub struct CaseBaseSample {
    /// Case series first, then base series.
    pub moments: Vec<PersonMoment>,
    pub covariate_names: Vec<String>,
    /// Size of the base series.
    pub base_size: usize,
    /// Size of the case series.
    pub case_size: usize,
    /// Total follow-up of the sampled dataset.
    pub study_base: f64,
    /// `log(B / b)`.
    pub offset: f64,
}

impl CaseBaseSample {
    pub fn len(&self) -> usize {
        self.moments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moments.is_empty()
    }

    pub fn case_moments(&self) -> impl Iterator<Item = &PersonMoment> {
        self.moments.iter().filter(|m| m.case)
    }

    pub fn base_moments(&self) -> impl Iterator<Item = &PersonMoment> {
        self.moments.iter().filter(|m| !m.case)
    }

    pub fn time_range(&self) -> (f64, f64) {
        self.moments
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), m| {
                (lo.min(m.time), hi.max(m.time))
            })
    }

    /// Audit table: `time,<covariates>,label`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["time".to_string()];
        header.extend(self.covariate_names.iter().cloned());
        header.push("label".into());
        w.write_record(&header)?;
        for m in &self.moments {
            let mut row = vec![m.time.to_string()];
            row.extend(m.covariates.iter().map(f64::to_string));
            row.push(u8::from(m.case).to_string());
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn dump(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(file)
    }
}

/// Build the case series and a base series of `ratio * c` moments.
pub fn sample_case_base(d: &SurvivalDataset, ratio: usize, seed: u64) -> Result<CaseBaseSample> {
    if ratio < 1 {
        return Err(Error::Config(format!("case-base ratio must be >= 1, got {ratio}")));
    }
    let c = d.event_count();
    if c == 0 {
        return Err(Error::Domain("no events to form case series".into()));
    }
    let study_base = d.total_follow_up();
    if study_base <= 0.0 {
        return Err(Error::Domain("total follow-up time is zero".into()));
    }
    let b = ratio * c;

    let mut moments = Vec::with_capacity(c + b);
    for (i, r) in d.records().iter().enumerate() {
        if r.event {
            moments.push(PersonMoment {
                subject: i,
                time: r.time,
                covariates: r.covariates.clone(),
                case: true,
            });
        }
    }

    let mut rng = seeded(seed);
    let chooser = WeightedIndex::new(d.times())
        .map_err(|e| Error::Domain(format!("cannot weight subjects by follow-up: {e}")))?;
    for _ in 0..b {
        let i = chooser.sample(&mut rng);
        let r = &d.records()[i];
        let u: f64 = rng.random();
        moments.push(PersonMoment {
            subject: i,
            time: u * r.time,
            covariates: r.covariates.clone(),
            case: false,
        });
    }

    Ok(CaseBaseSample {
        moments,
        covariate_names: d.covariate_names().to_vec(),
        base_size: b,
        case_size: c,
        study_base,
        offset: sampling_offset(study_base, b)?,
    })
}

/// `log(B / b)`, the constant added to the network output during fitting.
pub fn sampling_offset(study_base: f64, base_size: usize) -> Result<f64> {
    if !(study_base > 0.0) || base_size == 0 {
        return Err(Error::Domain(format!(
            "offset needs B > 0 and b > 0, got B = {study_base}, b = {base_size}"
        )));
    }
    Ok((study_base / base_size as f64).ln())
}

/// Relative information `cb / (c + b)` of a case-base comparison.
pub fn relative_information(case_size: usize, base_size: usize) -> Result<f64> {
    if case_size == 0 || base_size == 0 {
        return Err(Error::Domain("relative information needs c, b >= 1".into()));
    }
    let (c, b) = (case_size as f64, base_size as f64);
    Ok(c * b / (c + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::SubjectRecord;

    fn dataset(rows: &[(f64, bool)]) -> SurvivalDataset {
        let records = rows
            .iter()
            .enumerate()
            .map(|(i, &(t, e))| SubjectRecord::new(t, e, vec![i as f64]))
            .collect();
        SurvivalDataset::new(vec!["id".into()], records).unwrap()
    }

    #[test]
    fn counts_follow_ratio() {
        let rows: Vec<(f64, bool)> = (0..80).map(|i| (1.0 + i as f64 * 0.1, i < 50)).collect();
        let s = sample_case_base(&dataset(&rows), 100, 1).unwrap();
        assert_eq!(s.case_size, 50);
        assert_eq!(s.base_size, 5000);
        assert_eq!(s.case_moments().count(), 50);
        assert_eq!(s.base_moments().count(), 5000);
        assert_eq!(s.len(), 5050);
    }

    #[test]
    fn case_moments_sit_at_event_times() {
        let d = dataset(&[(1.0, true), (2.0, false), (3.0, true)]);
        let s = sample_case_base(&d, 100, 4).unwrap();
        for m in s.case_moments() {
            let r = &d.records()[m.subject];
            assert!(r.event);
            assert_eq!(m.time, r.time);
        }
        for m in s.base_moments() {
            let r = &d.records()[m.subject];
            assert!(m.time >= 0.0 && m.time <= r.time);
            assert_eq!(m.covariates, r.covariates);
        }
        assert!((s.offset - (0.03f64).ln()).abs() < 1e-12);
        assert!((s.offset + 3.506558).abs() < 1e-6);
    }

    #[test]
    fn single_subject_ratio_one() {
        let s = sample_case_base(&dataset(&[(10.0, true)]), 1, 0).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.moments[0].time, 10.0);
        assert!(s.moments[0].case);
        assert!(!s.moments[1].case);
        assert!((0.0..=10.0).contains(&s.moments[1].time));
    }

    #[test]
    fn allocation_is_proportional_to_follow_up() {
        let d = dataset(&[(9.0, true), (1.0, false)]);
        let draws = 1000;
        let mut first = 0usize;
        for seed in 0..draws {
            let s = sample_case_base(&d, 100, seed).unwrap();
            first += s.base_moments().filter(|m| m.subject == 0).count();
        }
        let share = first as f64 / (draws as f64 * 100.0);
        assert!((share - 0.9).abs() < 0.02, "share {share}");
    }

    #[test]
    fn deterministic_per_seed() {
        let d = dataset(&[(1.0, true), (2.5, false), (4.0, true)]);
        let a = sample_case_base(&d, 10, 77).unwrap();
        let b = sample_case_base(&d, 10, 77).unwrap();
        assert_eq!(a.moments, b.moments);
    }

    #[test]
    fn errors() {
        let no_events = dataset(&[(1.0, false), (2.0, false)]);
        assert!(matches!(sample_case_base(&no_events, 100, 0), Err(Error::Domain(_))));
        let d = dataset(&[(1.0, true)]);
        assert!(matches!(sample_case_base(&d, 0, 0), Err(Error::Config(_))));
        assert!(sampling_offset(0.0, 1).is_err());
        assert!(sampling_offset(1.0, 0).is_err());
    }

    #[test]
    fn offset_values() {
        assert!((sampling_offset(1000.0, 100).unwrap() - 10f64.ln()).abs() < 1e-15);
        assert_eq!(sampling_offset(250.0, 250).unwrap(), 0.0);
        for (big_b, b) in [(6.0, 200usize), (1234.5, 17), (1e6, 123_456)] {
            let off = sampling_offset(big_b, b).unwrap();
            let identity = off.exp() * b as f64 / big_b;
            assert!((identity - 1.0).abs() <= 4.0 * f64::EPSILON);
        }
    }

    #[test]
    fn relative_information_values() {
        assert_eq!(relative_information(40, 40).unwrap(), 20.0);
        assert!((relative_information(50, 5000).unwrap() - 49.504_950_495).abs() < 1e-6);
        // Variance inflation of b = 100c against an infinite base series.
        let c = 37;
        let inflation = c as f64 / relative_information(c, 100 * c).unwrap();
        assert!((inflation - 1.01).abs() < 1e-12);
    }
}
