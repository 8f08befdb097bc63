//! Datasets, odour recordings and their on-disk formats.

mod io;
mod split;
mod synth;

pub use io::{
    read_csv, read_csv_with_classes, read_dataset_str, read_recording, write_csv, write_dataset, write_dataset_columns,
    write_recording,
};
pub use split::{split, split_labels, SplitFractions, SplitIndices};
pub use synth::{generate_synthetic, SynthConfig, SynthOutput, AMBIENT_CLASS_NAME, SAMPLE_RATE};

use ndarray::{Array2, ArrayView2, Axis};
use std::collections::BTreeMap;
use thiserror::Error;

/// Fraction of a recording treated as ambient baseline when none is supplied.
pub const BASELINE_ESTIMATE_FRACTION: f64 = 0.05;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("label vector has {labels} entries but there are {rows} rows")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("label {label} out of range for {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("negative class {0} is not a valid class id")]
    InvalidNegativeClass(usize),
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("baseline has {got} entries, expected {expected}")]
    BaselineLength { expected: usize, got: usize },
    #[error("insufficient class population: class {class} has {count} samples but the split needs {parts}")]
    InsufficientClassPopulation { class: usize, count: usize, parts: usize },
    #[error("invalid split fractions: {0}")]
    InvalidFractions(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("recording must have at least one timestep and one sensor")]
    EmptyRecording,
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A labelled sample matrix: one row per sample, one column per sensor or
/// feature.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    rows: Array2<f64>,
    labels: Vec<usize>,
    class_names: Vec<String>,
    negative_class: Option<usize>,
    baseline: Option<Vec<f64>>,
}

impl LabeledDataset {
    pub fn new(rows: Array2<f64>, labels: Vec<usize>, class_names: Vec<String>) -> Result<Self, DataError> {
        if rows.nrows() != labels.len() {
            return Err(DataError::LengthMismatch {
                rows: rows.nrows(),
                labels: labels.len(),
            });
        }
        let n_classes = class_names.len();
        if let Some(&label) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(DataError::LabelOutOfRange { label, n_classes });
        }
        check_finite(rows.view())?;
        Ok(Self {
            rows,
            labels,
            class_names,
            negative_class: None,
            baseline: None,
        })
    }

    /// Marks `class` as the ambient-air (non-fire) class.
    pub fn with_negative_class(mut self, class: usize) -> Result<Self, DataError> {
        if class >= self.class_names.len() {
            return Err(DataError::InvalidNegativeClass(class));
        }
        self.negative_class = Some(class);
        Ok(self)
    }

    /// Attaches the per-column averaged baseline voltage.
    pub fn with_baseline(mut self, baseline: Vec<f64>) -> Result<Self, DataError> {
        if baseline.len() != self.rows.ncols() {
            return Err(DataError::BaselineLength {
                expected: self.rows.ncols(),
                got: baseline.len(),
            });
        }
        if let Some(col) = baseline.iter().position(|v| !v.is_finite()) {
            return Err(DataError::NonFinite { row: 0, col });
        }
        self.baseline = Some(baseline);
        Ok(self)
    }

    pub fn rows(&self) -> ArrayView2<'_, f64> {
        self.rows.view()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn negative_class(&self) -> Option<usize> {
        self.negative_class
    }

    pub fn baseline(&self) -> Option<&[f64]> {
        self.baseline.as_deref()
    }

    pub fn n_samples(&self) -> usize {
        self.rows.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.rows.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_id(&self, name: &str) -> Option<usize> {
        self.class_names.iter().position(|n| n == name)
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Returns a copy of this dataset with `rows` replaced, keeping labels and
    /// class metadata. The baseline is dropped since it describes the old
    /// columns.
    pub fn with_rows(&self, rows: Array2<f64>) -> Result<Self, DataError> {
        let mut out = Self::new(rows, self.labels.clone(), self.class_names.clone())?;
        out.negative_class = self.negative_class;
        Ok(out)
    }
}

/// Copies the selected rows of `matrix` and their labels.
pub fn select_rows(matrix: ArrayView2<'_, f64>, labels: &[usize], indices: &[usize]) -> (Array2<f64>, Vec<usize>) {
    let x = matrix.select(Axis(0), indices);
    let y = indices.iter().map(|&i| labels[i]).collect();
    (x, y)
}

fn check_finite(rows: ArrayView2<'_, f64>) -> Result<(), DataError> {
    for ((row, col), v) in rows.indexed_iter() {
        if !v.is_finite() {
            return Err(DataError::NonFinite { row, col });
        }
    }
    Ok(())
}

/// A single odour measurement: a `timesteps × sensors` voltage series.
#[derive(Debug, Clone, PartialEq)]
pub struct OdourRecording {
    values: Array2<f64>,
    baseline: Vec<f64>,
    sample_rate: f64,
    class_id: usize,
    metadata: BTreeMap<String, String>,
}

impl OdourRecording {
    /// Builds a recording. When `baseline` is `None` it is estimated as the
    /// per-sensor mean of the first 5% of timesteps.
    pub fn new(
        values: Array2<f64>,
        baseline: Option<Vec<f64>>,
        sample_rate: f64,
        class_id: usize,
    ) -> Result<Self, DataError> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(DataError::EmptyRecording);
        }
        check_finite(values.view())?;
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(DataError::InvalidConfig(format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        let baseline = match baseline {
            Some(b) => {
                if b.len() != values.ncols() {
                    return Err(DataError::BaselineLength {
                        expected: values.ncols(),
                        got: b.len(),
                    });
                }
                if let Some(col) = b.iter().position(|v| !v.is_finite()) {
                    return Err(DataError::NonFinite { row: 0, col });
                }
                b
            }
            None => estimate_baseline(values.view()),
        };
        Ok(Self {
            values,
            baseline,
            sample_rate,
            class_id,
            metadata: BTreeMap::new(),
        })
    }

    pub fn with_metadata(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.metadata.insert(key.into(), value.into());
        self
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn baseline(&self) -> &[f64] {
        &self.baseline
    }

    /// Samples per minute.
    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn class_id(&self) -> usize {
        self.class_id
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    pub fn n_timesteps(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_sensors(&self) -> usize {
        self.values.ncols()
    }
}

/// Per-sensor mean over the leading 5% of a series (at least one row).
pub fn estimate_baseline(values: ArrayView2<'_, f64>) -> Vec<f64> {
    let t = values.nrows();
    let n = ((t as f64 * BASELINE_ESTIMATE_FRACTION).ceil() as usize).clamp(1, t.max(1));
    values
        .slice(ndarray::s![..n, ..])
        .mean_axis(Axis(0))
        .map(|m| m.to_vec())
        .unwrap_or_default()
}
