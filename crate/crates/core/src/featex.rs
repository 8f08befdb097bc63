//! Baseline-correction features of a sensor array.
//!
//! Every extractor works on one time instant across the array: `v` holds one
//! voltage per sensor. Sums of squares are taken across sensors. Logarithms
//! are base 10.

use crate::data::{LabeledDataset, OdourRecording};
use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub const LOG_BASE: f64 = 10.0;
/// Default fraction of a recording averaged by [`response_point`].
pub const DEFAULT_RESPONSE_WINDOW: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("log of non-positive voltage {value} at sensor {sensor}")]
    NonPositiveVoltage { sensor: usize, value: f64 },
    #[error("degenerate denominator: sum of squared voltages is 1")]
    DegenerateDenominator,
    #[error("zero-norm input")]
    ZeroNorm,
    #[error("zero baseline at sensor {0}")]
    ZeroBaseline(usize),
    #[error("baseline has {got} entries, expected {expected}")]
    BaselineLength { expected: usize, got: usize },
    #[error("empty series")]
    EmptySeries,
    #[error("window fraction must lie in (0, 1], got {0}")]
    InvalidWindow(f64),
    #[error("no baseline available: supply one or mark an ambient class")]
    MissingBaseline,
    #[error("unknown feature kind '{0}'")]
    UnknownKind(String),
    #[error("timestep {timestep}: {source}")]
    AtTimestep {
        timestep: usize,
        #[source]
        source: Box<FeatureError>,
    },
    #[error("row {row}: {source}")]
    AtRow {
        row: usize,
        #[source]
        source: Box<FeatureError>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FeatureKind {
    /// Relative logarithmic sum-squared voltage.
    Rlssv,
    /// Relative logarithmic voltage.
    Rlv,
    /// Relative sum-squared voltage (array vector normalisation).
    Rssv,
    /// Relative voltage against the baseline.
    Rv,
    /// Fractional voltage change from the averaged baseline.
    Fvc,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 5] = [Self::Rlssv, Self::Rlv, Self::Rssv, Self::Rv, Self::Fvc];

    pub fn name(self) -> &'static str {
        match self {
            Self::Rlssv => "RLSSV",
            Self::Rlv => "RLV",
            Self::Rssv => "RSSV",
            Self::Rv => "RV",
            Self::Fvc => "FVC",
        }
    }

    pub fn needs_baseline(self) -> bool {
        matches!(self, Self::Rv | Self::Fvc)
    }

    /// Applies this extractor to one instant. `baseline` is ignored by the
    /// kinds that do not use it.
    pub fn apply(self, v: &[f64], baseline: &[f64]) -> Result<Vec<f64>, FeatureError> {
        match self {
            Self::Rlssv => rlssv(v),
            Self::Rlv => rlv(v),
            Self::Rssv => rssv(v),
            Self::Rv => rv(v, baseline),
            Self::Fvc => fvc(v, baseline),
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureKind {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| FeatureError::UnknownKind(s.to_string()))
    }
}

fn check_positive(v: &[f64]) -> Result<(), FeatureError> {
    match v.iter().position(|&x| !(x > 0.0)) {
        Some(sensor) => Err(FeatureError::NonPositiveVoltage {
            sensor,
            value: v[sensor],
        }),
        None => Ok(()),
    }
}

fn sum_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// `log(v_i) / log(Σ v²)`.
pub fn rlssv(v: &[f64]) -> Result<Vec<f64>, FeatureError> {
    check_positive(v)?;
    let s = sum_sq(v);
    if (s - 1.0).abs() <= 1e-12 {
        return Err(FeatureError::DegenerateDenominator);
    }
    let denom = s.log10();
    Ok(v.iter().map(|x| x.log10() / denom).collect())
}

/// `log(v_i) / v_i`.
pub fn rlv(v: &[f64]) -> Result<Vec<f64>, FeatureError> {
    check_positive(v)?;
    Ok(v.iter().map(|x| x.log10() / x).collect())
}

/// `v_i / sqrt(Σ v²)`; the result has unit L2 norm.
pub fn rssv(v: &[f64]) -> Result<Vec<f64>, FeatureError> {
    let norm = sum_sq(v).sqrt();
    if !(norm > 0.0) {
        return Err(FeatureError::ZeroNorm);
    }
    Ok(v.iter().map(|x| x / norm).collect())
}

fn check_baseline(v: &[f64], baseline: &[f64]) -> Result<(), FeatureError> {
    if baseline.len() != v.len() {
        return Err(FeatureError::BaselineLength {
            expected: v.len(),
            got: baseline.len(),
        });
    }
    match baseline.iter().position(|&b| b == 0.0) {
        Some(i) => Err(FeatureError::ZeroBaseline(i)),
        None => Ok(()),
    }
}

/// `v_i / v0_i`.
pub fn rv(v: &[f64], baseline: &[f64]) -> Result<Vec<f64>, FeatureError> {
    check_baseline(v, baseline)?;
    Ok(v.iter().zip(baseline).map(|(x, b)| x / b).collect())
}

/// `(v̄0_i - v_i) / v̄0_i`. Responses above the baseline come out negative.
pub fn fvc(v: &[f64], baseline: &[f64]) -> Result<Vec<f64>, FeatureError> {
    check_baseline(v, baseline)?;
    Ok(v.iter().zip(baseline).map(|(x, b)| (b - x) / b).collect())
}

/// Applies `kind` to every timestep of a recording.
pub fn extract_recording(rec: &OdourRecording, kind: FeatureKind) -> Result<Array2<f64>, FeatureError> {
    extract_matrix(rec.values(), rec.baseline(), kind).map_err(|e| match e {
        FeatureError::AtRow { row, source } => FeatureError::AtTimestep { timestep: row, source },
        other => other,
    })
}

/// Applies `kind` row by row. Errors are tagged with the offending row.
pub fn extract_matrix(
    values: ArrayView2<'_, f64>,
    baseline: &[f64],
    kind: FeatureKind,
) -> Result<Array2<f64>, FeatureError> {
    let mut out = Array2::zeros(values.raw_dim());
    for (i, (row, mut dst)) in values.outer_iter().zip(out.outer_iter_mut()).enumerate() {
        let v = row.to_vec();
        let f = kind.apply(&v, baseline).map_err(|e| FeatureError::AtRow {
            row: i,
            source: Box::new(e),
        })?;
        dst.assign(&ndarray::ArrayView1::from(&f));
    }
    Ok(out)
}

/// Column-wise mean of the last `ceil(T * window_fraction)` rows.
pub fn response_point(series: ArrayView2<'_, f64>, window_fraction: f64) -> Result<Vec<f64>, FeatureError> {
    if series.nrows() == 0 || series.ncols() == 0 {
        return Err(FeatureError::EmptySeries);
    }
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(FeatureError::InvalidWindow(window_fraction));
    }
    let t = series.nrows();
    // tolerance keeps e.g. 150 * 0.1 from rounding up to 16
    let n = ((t as f64 * window_fraction - 1e-9).ceil() as usize).clamp(1, t);
    Ok(series
        .slice(ndarray::s![t - n.., ..])
        .mean_axis(Axis(0))
        .expect("window is non-empty")
        .to_vec())
}

/// Where the columns of a [`FeatureMatrix`] came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeatureOrigin {
    Single(FeatureKind),
    /// Fused PCA scores: `(feature, pc_count)` per block, in column order.
    Hybrid(Vec<(FeatureKind, usize)>),
}

impl fmt::Display for FeatureOrigin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Single(k) => write!(f, "{k}"),
            Self::Hybrid(parts) => {
                let p: Vec<String> = parts.iter().map(|(k, n)| format!("{k}x{n}")).collect();
                write!(f, "hybrid[{}]", p.join("+"))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub values: Array2<f64>,
    pub origin: FeatureOrigin,
    /// Logarithm base used by RLSSV/RLV.
    pub log_base: f64,
}

impl FeatureMatrix {
    pub fn new(values: Array2<f64>, origin: FeatureOrigin) -> Self {
        Self {
            values,
            origin,
            log_base: LOG_BASE,
        }
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }

    /// Column names: `rssv_1..` for single features, `rssv_pc1..` for hybrid
    /// blocks.
    pub fn column_names(&self) -> Vec<String> {
        match &self.origin {
            FeatureOrigin::Single(k) => (1..=self.n_features())
                .map(|i| format!("{}_{i}", k.name().to_lowercase()))
                .collect(),
            FeatureOrigin::Hybrid(parts) => parts
                .iter()
                .flat_map(|(k, n)| (1..=*n).map(move |i| format!("{}_pc{i}", k.name().to_lowercase())))
                .collect(),
        }
    }
}

/// Baseline for row-wise extraction: the dataset's own baseline when present,
/// otherwise the mean of its ambient-class rows.
pub fn dataset_baseline(dataset: &LabeledDataset) -> Result<Vec<f64>, FeatureError> {
    if let Some(b) = dataset.baseline() {
        return Ok(b.to_vec());
    }
    let neg = dataset.negative_class().ok_or(FeatureError::MissingBaseline)?;
    let idx: Vec<usize> = (0..dataset.n_samples())
        .filter(|&i| dataset.labels()[i] == neg)
        .collect();
    if idx.is_empty() {
        return Err(FeatureError::MissingBaseline);
    }
    Ok(dataset
        .rows()
        .select(Axis(0), &idx)
        .mean_axis(Axis(0))
        .expect("non-empty")
        .to_vec())
}

/// Applies `kind` to every sample row of a dataset.
pub fn extract_dataset(dataset: &LabeledDataset, kind: FeatureKind) -> Result<FeatureMatrix, FeatureError> {
    let baseline = if kind.needs_baseline() {
        dataset_baseline(dataset)?
    } else {
        Vec::new()
    };
    let values = extract_matrix(dataset.rows(), &baseline, kind)?;
    Ok(FeatureMatrix::new(values, FeatureOrigin::Single(kind)))
}
