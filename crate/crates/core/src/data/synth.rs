//! Seeded synthetic odour data.
//!
//! Each material class gets a fixed response signature. A recording is the
//! sensor baseline plus a first-order exponential rise towards that signature,
//! a per-recording linear drift and white noise. Ambient-air recordings have
//! no rise.

use super::{DataError, LabeledDataset, OdourRecording};
use crate::featex::{response_point, DEFAULT_RESPONSE_WINDOW};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Samples per minute of the simulated logger.
pub const SAMPLE_RATE: f64 = 10.0;
pub const AMBIENT_CLASS_NAME: &str = "NA";
/// Heating temperatures cycled through as recording metadata, in °C.
const TEMPERATURE_POINTS: [u32; 7] = [50, 83, 117, 150, 183, 217, 250];
/// Range of the nominal per-sensor baseline voltage.
const BASELINE_RANGE: (f64, f64) = (1.0, 3.0);
/// Signature components are `separation * U(lo, hi)`.
const SIGNATURE_RANGE: (f64, f64) = (0.1, 1.0);
/// Rise time constant as a fraction of the recording length.
const RISE_TAU_FRACTION: f64 = 1.0 / 6.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    /// Number of classes including the ambient class.
    pub n_classes: usize,
    pub n_sensors: usize,
    pub samples_per_material_class: usize,
    pub ambient_samples: usize,
    /// Scale of the class response signatures, in volts.
    pub signature_separation: f64,
    /// Standard deviation of the additive noise, in volts.
    pub noise_sigma: f64,
    /// Maximum magnitude of the per-recording drift, in volts per timestep.
    pub drift_rate: f64,
    pub timesteps: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    /// Nine classes (eight materials plus ambient air), eight sensors, 1000
    /// recordings of 150 samples.
    fn default() -> Self {
        Self {
            n_classes: 9,
            n_sensors: 8,
            samples_per_material_class: 100,
            ambient_samples: 200,
            signature_separation: 0.7,
            noise_sigma: 0.1,
            drift_rate: 0.001,
            timesteps: 150,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), DataError> {
        let bad = |m: &str| Err(DataError::InvalidConfig(m.to_string()));
        if self.n_classes < 2 {
            return bad("n_classes must be at least 2 (one material plus ambient)");
        }
        if self.n_sensors == 0 {
            return bad("n_sensors must be positive");
        }
        if self.samples_per_material_class == 0 || self.ambient_samples == 0 {
            return bad("sample counts must be positive");
        }
        if self.timesteps == 0 {
            return bad("timesteps must be positive");
        }
        if !(self.signature_separation.is_finite() && self.signature_separation >= 0.0) {
            return bad("signature_separation must be finite and non-negative");
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad("noise_sigma must be finite and non-negative");
        }
        if !(self.drift_rate.is_finite() && self.drift_rate >= 0.0) {
            return bad("drift_rate must be finite and non-negative");
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        (self.n_classes - 1) * self.samples_per_material_class + self.ambient_samples
    }
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub recordings: Vec<OdourRecording>,
    pub dataset: LabeledDataset,
    /// Response signature per class (zeros for ambient).
    pub signatures: Vec<Vec<f64>>,
}

/// Class names: `M1..M{K-1}` for materials, then `NA` for ambient air.
pub fn class_names(n_classes: usize) -> Vec<String> {
    (1..n_classes)
        .map(|i| format!("M{i}"))
        .chain(std::iter::once(AMBIENT_CLASS_NAME.to_string()))
        .collect()
}

pub fn generate_synthetic(config: &SynthConfig) -> Result<SynthOutput, DataError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let s = config.n_sensors;
    let ambient = config.n_classes - 1;

    let baseline: Vec<f64> = (0..s)
        .map(|_| rng.random_range(BASELINE_RANGE.0..BASELINE_RANGE.1))
        .collect();
    let mut signatures: Vec<Vec<f64>> = (0..ambient)
        .map(|_| {
            (0..s)
                .map(|_| config.signature_separation * rng.random_range(SIGNATURE_RANGE.0..SIGNATURE_RANGE.1))
                .collect()
        })
        .collect();
    signatures.push(vec![0.0; s]);

    let noise = Normal::new(0.0, config.noise_sigma).map_err(|e| DataError::InvalidConfig(e.to_string()))?;
    let names = class_names(config.n_classes);
    let tau = config.timesteps as f64 * RISE_TAU_FRACTION;

    let mut recordings = Vec::with_capacity(config.n_samples());
    let mut rows = Array2::zeros((config.n_samples(), s));
    let mut labels = Vec::with_capacity(config.n_samples());
    for class in 0..config.n_classes {
        let count = if class == ambient {
            config.ambient_samples
        } else {
            config.samples_per_material_class
        };
        for i in 0..count {
            let drift: Vec<f64> = (0..s)
                .map(|_| config.drift_rate * rng.random_range(-1.0..=1.0))
                .collect();
            let mut values = Array2::zeros((config.timesteps, s));
            for t in 0..config.timesteps {
                let rise = 1.0 - (-(t as f64) / tau).exp();
                for j in 0..s {
                    let mut v = baseline[j] + signatures[class][j] * rise + drift[j] * t as f64;
                    if config.noise_sigma > 0.0 {
                        v += noise.sample(&mut rng);
                    }
                    values[[t, j]] = v;
                }
            }
            let point = response_point(values.view(), DEFAULT_RESPONSE_WINDOW)
                .map_err(|e| DataError::InvalidConfig(e.to_string()))?;
            let row = labels.len();
            rows.row_mut(row).assign(&ndarray::ArrayView1::from(&point));
            labels.push(class);
            let temperature = TEMPERATURE_POINTS[i % TEMPERATURE_POINTS.len()];
            recordings.push(
                OdourRecording::new(values, Some(baseline.clone()), SAMPLE_RATE, class)?
                    .with_metadata("source", names[class].clone())
                    .with_metadata("temperature", temperature.to_string()),
            );
        }
    }
    let dataset = LabeledDataset::new(rows, labels, names)?
        .with_negative_class(ambient)?
        .with_baseline(baseline)?;
    Ok(SynthOutput {
        recordings,
        dataset,
        signatures,
    })
}
