//! Right-censored survival data: records, CSV ingestion, splits and bootstrap
//! resampling.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded;

/// One subject: follow-up time, event flag and a fixed-length covariate vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectRecord {
    pub time: f64,
    pub event: bool,
    pub covariates: Vec<f64>,
}

impl SubjectRecord {
    pub fn new(time: f64, event: bool, covariates: Vec<f64>) -> Self {
        Self {
            time,
            event,
            covariates,
        }
    }
}

/// An immutable collection of subjects with the study base `B` (total follow-up)
/// and event count `c` cached at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalDataset {
    records: Vec<SubjectRecord>,
    covariate_names: Vec<String>,
    total_follow_up: f64,
    event_count: usize,
}

impl SurvivalDataset {
    pub fn new(covariate_names: Vec<String>, records: Vec<SubjectRecord>) -> Result<Self> {
        let width = covariate_names.len();
        for (i, r) in records.iter().enumerate() {
            if !r.time.is_finite() || r.time < 0.0 {
                return Err(Error::Validation {
                    row: i + 1,
                    message: format!("follow-up time must be finite and >= 0, got {}", r.time),
                });
            }
            if r.covariates.len() != width {
                return Err(Error::Validation {
                    row: i + 1,
                    message: format!(
                        "expected {width} covariates, got {}",
                        r.covariates.len()
                    ),
                });
            }
            if let Some(j) = r.covariates.iter().position(|v| !v.is_finite()) {
                return Err(Error::Validation {
                    row: i + 1,
                    message: format!("covariate `{}` is not finite", covariate_names[j]),
                });
            }
        }
        let total_follow_up = records.iter().map(|r| r.time).sum();
        let event_count = records.iter().filter(|r| r.event).count();
        Ok(Self {
            records,
            covariate_names,
            total_follow_up,
            event_count,
        })
    }

    pub fn records(&self) -> &[SubjectRecord] {
        &self.records
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn num_covariates(&self) -> usize {
        self.covariate_names.len()
    }

    /// Study base `B`: the sum of all follow-up times.
    pub fn total_follow_up(&self) -> f64 {
        self.total_follow_up
    }

    /// Number of subjects with an observed event (`c`).
    pub fn event_count(&self) -> usize {
        self.event_count
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.time)
    }

    pub fn max_time(&self) -> f64 {
        self.times().fold(0.0, f64::max)
    }

    /// New dataset made of the records at `indices` (in the given order).
    pub fn subset(&self, indices: &[usize]) -> Self {
        let records = indices.iter().map(|&i| self.records[i].clone()).collect();
        Self::new(self.covariate_names.clone(), records)
            .expect("subset of a valid dataset is valid")
    }

    /// Empirical quantile of follow-up time (linear interpolation between order
    /// statistics).
    pub fn time_quantile(&self, q: f64) -> f64 {
        let mut t: Vec<f64> = self.times().collect();
        t.sort_by(f64::total_cmp);
        quantile_sorted(&t, q)
    }
}

pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Which CSV columns hold follow-up time, event status and covariates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub time_col: String,
    pub status_col: String,
    pub covariates: Vec<String>,
}

impl ColumnSchema {
    pub fn new(
        time_col: impl Into<String>,
        status_col: impl Into<String>,
        covariates: impl IntoIterator<Item = impl Into<String>>,
    ) -> Self {
        Self {
            time_col: time_col.into(),
            status_col: status_col.into(),
            covariates: covariates.into_iter().map(Into::into).collect(),
        }
    }

    /// The layout written by [`save_dataset`]: `time,status,<covariates>`.
    pub fn canonical(covariates: &[String]) -> Self {
        Self::new("time", "status", covariates.iter().cloned())
    }
}

/// Canonical schema from a CSV header: `time`, `status`, and every other
/// column as a covariate, in file order.
pub fn infer_schema(path: impl AsRef<Path>) -> Result<ColumnSchema> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = rdr.headers()?;
    for required in ["time", "status"] {
        if !headers.iter().any(|h| h == required) {
            return Err(Error::Schema(format!("missing column `{required}`")));
        }
    }
    let covariates: Vec<String> = headers
        .iter()
        .filter(|h| *h != "time" && *h != "status")
        .map(str::to_string)
        .collect();
    Ok(ColumnSchema::canonical(&covariates))
}

pub fn load_dataset(path: impl AsRef<Path>, schema: &ColumnSchema) -> Result<SurvivalDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(file, schema)
}

/// Parse a headed CSV stream. Rows are numbered from 1 (first data row) in
/// error messages.
pub fn read_dataset<R: Read>(reader: R, schema: &ColumnSchema) -> Result<SurvivalDataset> {
    if schema.covariates.is_empty() {
        return Err(Error::Schema("at least one covariate column is required".into()));
    }
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("missing column `{name}`")))
    };
    let time_idx = column(&schema.time_col)?;
    let status_idx = column(&schema.status_col)?;
    let cov_idx = schema
        .covariates
        .iter()
        .map(|c| column(c))
        .collect::<Result<Vec<_>>>()?;

    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let row_no = i + 1;
        let cell = |idx: usize, name: &str| -> Result<f64> {
            let raw = row.get(idx).unwrap_or("");
            if raw.is_empty() {
                return Err(Error::Parse {
                    row: row_no,
                    column: name.to_string(),
                    message: "missing value".into(),
                });
            }
            let v: f64 = raw.parse().map_err(|_| Error::Parse {
                row: row_no,
                column: name.to_string(),
                message: format!("`{raw}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row: row_no,
                    column: name.to_string(),
                    message: format!("`{raw}` is not finite"),
                });
            }
            Ok(v)
        };
        let time = cell(time_idx, &schema.time_col)?;
        if time < 0.0 {
            return Err(Error::Parse {
                row: row_no,
                column: schema.time_col.clone(),
                message: format!("negative follow-up time {time}"),
            });
        }
        let status = cell(status_idx, &schema.status_col)?;
        let event = if status == 1.0 {
            true
        } else if status == 0.0 {
            false
        } else {
            return Err(Error::Validation {
                row: row_no,
                message: format!(
                    "status column `{}` must be 0 or 1, got {status}",
                    schema.status_col
                ),
            });
        };
        let covariates = cov_idx
            .iter()
            .zip(&schema.covariates)
            .map(|(&j, name)| cell(j, name))
            .collect::<Result<Vec<_>>>()?;
        records.push(SubjectRecord::new(time, event, covariates));
    }
    SurvivalDataset::new(schema.covariates.clone(), records)
}

pub fn save_dataset(path: impl AsRef<Path>, d: &SurvivalDataset) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset(file, d)
}

/// Writes `time,status,<covariates>`; floats use the shortest representation
/// that parses back to the same value, so save/load round-trips exactly.
pub fn write_dataset<W: Write>(writer: W, d: &SurvivalDataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["time".to_string(), "status".to_string()];
    header.extend(d.covariate_names.iter().cloned());
    w.write_record(&header)?;
    for r in &d.records {
        let mut row = vec![r.time.to_string(), u8::from(r.event).to_string()];
        row.extend(r.covariates.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// Test and validation fractions for a three-way split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            test_fraction: 0.15,
            validation_fraction: 0.15,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let in_unit = |f: f64| f > 0.0 && f < 1.0;
        if !in_unit(self.test_fraction) || !in_unit(self.validation_fraction) {
            return Err(Error::Config(format!(
                "split fractions must lie in (0, 1), got test {} and validation {}",
                self.test_fraction, self.validation_fraction
            )));
        }
        if self.test_fraction + self.validation_fraction * (1.0 - self.test_fraction) >= 1.0 {
            return Err(Error::Config("split leaves no training data".into()));
        }
        Ok(())
    }

    /// Partition sizes `(train, validation, test)` for `n` records.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let n_test = floor_fraction(n, self.test_fraction);
        let n_val = floor_fraction(n - n_test, self.validation_fraction);
        (n - n_test - n_val, n_val, n_test)
    }
}

// A product such as 100 * 0.15 can land a hair under an integer in binary
// floating point; the guard keeps floor(n * fraction) at the decimal answer.
fn floor_fraction(n: usize, fraction: f64) -> usize {
    (n as f64 * fraction + 1e-9).floor() as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: SurvivalDataset,
    pub validation: SurvivalDataset,
    pub test: SurvivalDataset,
}

/// Seeded random three-way split; the remainder after flooring goes to train.
/// Records keep their original relative order inside each partition.
pub fn split_dataset(d: &SurvivalDataset, spec: &SplitSpec) -> Result<Split> {
    spec.validate()?;
    let n = d.len();
    let (n_train, n_val, n_test) = spec.sizes(n);
    if n_train == 0 || n_val == 0 || n_test == 0 {
        return Err(Error::Config(format!(
            "split of {n} records gives an empty partition (train {n_train}, validation {n_val}, test {n_test})"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeded(spec.seed));
    let mut test_idx = order[..n_test].to_vec();
    let mut val_idx = order[n_test..n_test + n_val].to_vec();
    let mut train_idx = order[n_test + n_val..].to_vec();
    test_idx.sort_unstable();
    val_idx.sort_unstable();
    train_idx.sort_unstable();
    Ok(Split {
        train: d.subset(&train_idx),
        validation: d.subset(&val_idx),
        test: d.subset(&test_idx),
    })
}

/// Draw `n` records with replacement.
pub fn bootstrap_resample(d: &SurvivalDataset, seed: u64) -> Result<SurvivalDataset> {
    if d.is_empty() {
        return Err(Error::Domain("cannot resample an empty dataset".into()));
    }
    let mut rng = seeded(seed);
    let n = d.len();
    let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    Ok(d.subset(&idx))
}
