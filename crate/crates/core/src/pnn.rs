//! Probabilistic neural network (Parzen-window Bayes classifier).
//!
//! Each class density is the mean of isotropic Gaussian kernels centred on the
//! stored training patterns:
//!
//! ```text
//! f_k(x) = 1 / ((2π)^(n/2) σ^n m_k) · Σ_i exp(-‖x - x_ki‖² / 2σ²)
//! ```
//!
//! and the decision is `argmax_k P_k · C_k · f_k(x)`. Kernel sums are
//! evaluated in the log domain, so small spreads do not underflow.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{Read, Write};
use thiserror::Error;

pub const DEFAULT_SPREAD: f64 = 0.08;
pub const DEFAULT_TOLERANCE: f64 = 0.001;
const MODEL_FORMAT: &str = "enose-pnn";
const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PnnError {
    #[error("spread must be positive and finite, got {0}")]
    InvalidSpread(f64),
    #[error("class {0} has no training patterns")]
    EmptyClass(usize),
    #[error("at least one class is required")]
    NoClasses,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{rows} rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("label {label} out of range for {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("invalid priors: {0}")]
    InvalidPriors(String),
    #[error("invalid costs: {0}")]
    InvalidCosts(String),
    #[error("tolerance must be non-negative, got {0}")]
    InvalidTolerance(f64),
    #[error("vector norm {0} deviates from 1 by more than 1e-6")]
    NotUnitNorm(f64),
    #[error("empty validation set")]
    EmptyValidation,
    #[error("no candidate spreads")]
    EmptyCandidates,
    #[error("model file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PnnParams {
    pub spread: f64,
    /// Class priors; uniform when `None`.
    pub priors: Option<Vec<f64>>,
    /// Misclassification costs; all one when `None`.
    pub costs: Option<Vec<f64>>,
    /// Minimum normalised score margin for a confident decision.
    pub tolerance: f64,
}

impl Default for PnnParams {
    fn default() -> Self {
        Self {
            spread: DEFAULT_SPREAD,
            priors: None,
            costs: None,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

impl PnnParams {
    pub fn with_spread(spread: f64) -> Self {
        Self {
            spread,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PnnDecision {
    pub predicted_class: usize,
    /// Per-class `P_k C_k f_k(x)`, normalised to sum to one.
    pub scores: Vec<f64>,
    /// Natural log of the unnormalised per-class scores.
    pub log_scores: Vec<f64>,
    /// Top-1 minus top-2 normalised score.
    pub margin: f64,
    /// Margin below tolerance, or every score underflowed.
    pub ambiguous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PnnModel {
    /// Row-major training patterns per class.
    patterns: Vec<Vec<f64>>,
    input_dim: usize,
    spread: f64,
    priors: Vec<f64>,
    costs: Vec<f64>,
    tolerance: f64,
    #[serde(default)]
    class_names: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    model: PnnModel,
}

impl PnnModel {
    /// Stores the training patterns; there is no iterative training.
    pub fn fit(
        x: ArrayView2<'_, f64>,
        labels: &[usize],
        n_classes: usize,
        params: &PnnParams,
    ) -> Result<Self, PnnError> {
        if !(params.spread.is_finite() && params.spread > 0.0) {
            return Err(PnnError::InvalidSpread(params.spread));
        }
        if !(params.tolerance >= 0.0) {
            return Err(PnnError::InvalidTolerance(params.tolerance));
        }
        if n_classes == 0 {
            return Err(PnnError::NoClasses);
        }
        if x.nrows() != labels.len() {
            return Err(PnnError::LengthMismatch {
                rows: x.nrows(),
                labels: labels.len(),
            });
        }
        let n = x.ncols();
        let mut patterns = vec![Vec::new(); n_classes];
        for (row, &label) in x.outer_iter().zip(labels) {
            if label >= n_classes {
                return Err(PnnError::LabelOutOfRange { label, n_classes });
            }
            patterns[label].extend(row.iter());
        }
        if let Some(k) = patterns.iter().position(Vec::is_empty) {
            return Err(PnnError::EmptyClass(k));
        }

        let priors = match &params.priors {
            None => vec![1.0 / n_classes as f64; n_classes],
            Some(p) => {
                if p.len() != n_classes {
                    return Err(PnnError::InvalidPriors(format!(
                        "expected {n_classes} values, got {}",
                        p.len()
                    )));
                }
                if p.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(PnnError::InvalidPriors("priors must be non-negative".into()));
                }
                let sum: f64 = p.iter().sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(PnnError::InvalidPriors(format!("priors sum to {sum}, not 1")));
                }
                p.clone()
            }
        };
        let costs = match &params.costs {
            None => vec![1.0; n_classes],
            Some(c) => {
                if c.len() != n_classes {
                    return Err(PnnError::InvalidCosts(format!(
                        "expected {n_classes} values, got {}",
                        c.len()
                    )));
                }
                if c.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return Err(PnnError::InvalidCosts("costs must be positive".into()));
                }
                c.clone()
            }
        };
        Ok(Self {
            patterns,
            input_dim: n,
            spread: params.spread,
            priors,
            costs,
            tolerance: params.tolerance,
            class_names: Vec::new(),
        })
    }

    pub fn with_class_names(mut self, names: Vec<String>) -> Self {
        self.class_names = names;
        self
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn n_classes(&self) -> usize {
        self.patterns.len()
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn spread(&self) -> f64 {
        self.spread
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// `m_k` per class.
    pub fn class_sizes(&self) -> Vec<usize> {
        self.patterns.iter().map(|p| p.len() / self.input_dim.max(1)).collect()
    }

    fn class_size(&self, class: usize) -> usize {
        if self.input_dim == 0 {
            return 0;
        }
        self.patterns[class].len() / self.input_dim
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), PnnError> {
        if x.len() != self.input_dim {
            return Err(PnnError::DimensionMismatch {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    fn class_patterns(&self, class: usize) -> impl Iterator<Item = &[f64]> {
        self.patterns[class].chunks_exact(self.input_dim.max(1))
    }

    /// `ln f_k(x)`, plus the smallest squared distance to a class-`k` pattern.
    fn log_density_and_nearest(&self, class: usize, x: &[f64], buf: &mut Vec<f64>) -> (f64, f64) {
        let two_var = 2.0 * self.spread * self.spread;
        buf.clear();
        let mut nearest = f64::INFINITY;
        for p in self.class_patterns(class) {
            let d2 = sq_dist(x, p);
            nearest = nearest.min(d2);
            buf.push(-d2 / two_var);
        }
        let n = self.input_dim as f64;
        let log_norm = 0.5 * n * (2.0 * PI).ln() + n * self.spread.ln() + (self.class_size(class) as f64).ln();
        (log_sum_exp(buf) - log_norm, nearest)
    }

    /// Class-conditional density estimate `f_k(x)`.
    pub fn density(&self, class: usize, x: &[f64]) -> Result<f64, PnnError> {
        self.check_dim(x)?;
        if class >= self.n_classes() {
            return Err(PnnError::LabelOutOfRange {
                label: class,
                n_classes: self.n_classes(),
            });
        }
        Ok(self.log_density_and_nearest(class, x, &mut Vec::new()).0.exp())
    }

    pub fn classify(&self, x: &[f64]) -> Result<PnnDecision, PnnError> {
        self.check_dim(x)?;
        let k = self.n_classes();
        let mut buf = Vec::new();
        let mut log_scores = Vec::with_capacity(k);
        let mut nearest = (f64::INFINITY, 0usize);
        for class in 0..k {
            let (log_f, d2) = self.log_density_and_nearest(class, x, &mut buf);
            if d2 < nearest.0 {
                nearest = (d2, class);
            }
            log_scores.push(self.priors[class].ln() + self.costs[class].ln() + log_f);
        }

        let mut best = 0;
        for c in 1..k {
            if log_scores[c] > log_scores[best] {
                best = c;
            }
        }
        let max = log_scores[best];
        let underflow = max < f64::MIN_POSITIVE.ln();
        let predicted_class = if underflow { nearest.1 } else { best };

        let weights: Vec<f64> = log_scores.iter().map(|s| (s - max).exp()).collect();
        let total: f64 = weights.iter().sum();
        let scores: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut sorted = scores.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let margin = if k > 1 { sorted[0] - sorted[1] } else { 1.0 };
        Ok(PnnDecision {
            predicted_class,
            scores,
            log_scores,
            margin,
            ambiguous: underflow || margin < self.tolerance,
        })
    }

    /// Predicted class per row of `x`.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Vec<usize>, PnnError> {
        x.outer_iter()
            .map(|row| {
                let v = row.to_vec();
                self.classify(&v).map(|d| d.predicted_class)
            })
            .collect()
    }

    /// Dot-product form of the pattern layer for unit-norm inputs:
    /// `exp((xᵀw_j - 1) / σ²)` for every stored pattern, class by class.
    ///
    /// With `‖x‖ = ‖w‖ = 1` this equals `exp(-‖x - w‖² / 2σ²)`.
    pub fn pattern_unit_form(&self, x: &[f64]) -> Result<Vec<f64>, PnnError> {
        self.check_dim(x)?;
        check_unit(x)?;
        let var = self.spread * self.spread;
        let mut out = Vec::new();
        for class in 0..self.n_classes() {
            for w in self.class_patterns(class) {
                check_unit(w)?;
                let z_in: f64 = x.iter().zip(w).map(|(a, b)| a * b).sum();
                out.push(((z_in - 1.0) / var).exp());
            }
        }
        Ok(out)
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<(), PnnError> {
        let file = ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            model: self.clone(),
        };
        serde_json::to_writer_pretty(w, &file).map_err(|e| PnnError::Format(e.to_string()))
    }

    pub fn read_json<R: Read>(r: R) -> Result<Self, PnnError> {
        let file: ModelFile = serde_json::from_reader(r).map_err(|e| PnnError::Format(e.to_string()))?;
        if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
            return Err(PnnError::Format(format!(
                "unsupported model format {} v{}",
                file.format, file.version
            )));
        }
        let m = file.model;
        if m.input_dim == 0
            || m.patterns.is_empty()
            || m.patterns.iter().any(|p| p.is_empty() || p.len() % m.input_dim != 0)
            || m.priors.len() != m.patterns.len()
            || m.costs.len() != m.patterns.len()
            || !(m.spread > 0.0)
        {
            return Err(PnnError::Format("inconsistent model contents".into()));
        }
        Ok(m)
    }
}

fn check_unit(v: &[f64]) -> Result<(), PnnError> {
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(PnnError::NotUnitNorm(norm));
    }
    Ok(())
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Fraction of `predicted` equal to `actual`.
pub fn accuracy(predicted: &[usize], actual: &[usize]) -> f64 {
    if actual.is_empty() {
        return 0.0;
    }
    let hits = predicted.iter().zip(actual).filter(|(p, a)| p == a).count();
    hits as f64 / actual.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpreadSweep {
    pub best: f64,
    /// `(spread, validation accuracy)` in candidate order.
    pub accuracies: Vec<(f64, f64)>,
}

/// `0.01, 0.02, ..., 0.20`.
pub fn default_spread_grid() -> Vec<f64> {
    (1..=20).map(|i| i as f64 / 100.0).collect()
}

/// Picks the spread with the best validation accuracy; ties go to the smaller
/// spread.
#[allow(clippy::too_many_arguments)]
pub fn spread_sweep(
    train_x: ArrayView2<'_, f64>,
    train_y: &[usize],
    val_x: ArrayView2<'_, f64>,
    val_y: &[usize],
    n_classes: usize,
    candidates: &[f64],
    base: &PnnParams,
) -> Result<SpreadSweep, PnnError> {
    if candidates.is_empty() {
        return Err(PnnError::EmptyCandidates);
    }
    if val_y.is_empty() {
        return Err(PnnError::EmptyValidation);
    }
    let mut accuracies = Vec::with_capacity(candidates.len());
    let mut best: Option<(f64, f64)> = None;
    for &spread in candidates {
        let params = PnnParams { spread, ..base.clone() };
        let model = PnnModel::fit(train_x, train_y, n_classes, &params)?;
        let acc = accuracy(&model.predict(val_x)?, val_y);
        accuracies.push((spread, acc));
        best = match best {
            Some((bs, ba)) if ba > acc || (ba == acc && bs <= spread) => Some((bs, ba)),
            _ => Some((spread, acc)),
        };
    }
    Ok(SpreadSweep {
        best: best.expect("non-empty").0,
        accuracies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use proptest::prelude::*;

    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

    #[test]
    fn density_scalar_examples() {
        let m = PnnModel::fit(array![[0.0]].view(), &[0], 1, &PnnParams::with_spread(1.0)).unwrap();
        assert!((m.density(0, &[0.0]).unwrap() - INV_SQRT_2PI).abs() < 1e-15);
        let at_one = m.density(0, &[1.0]).unwrap();
        assert!((at_one - INV_SQRT_2PI * (-0.5f64).exp()).abs() < 1e-15);
        assert!((at_one - 0.24197).abs() < 1e-5);
        assert!(matches!(
            m.density(0, &[0.0, 1.0]),
            Err(PnnError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn density_integrates_to_one() {
        let x = array![[-1.0], [0.3], [2.5], [0.9]];
        let m = PnnModel::fit(x.view(), &[0, 0, 0, 0], 1, &PnnParams::with_spread(0.7)).unwrap();
        // trapezoid over [-12, 14]
        let (a, b, steps) = (-12.0, 14.0, 20_000);
        let h = (b - a) / steps as f64;
        let mut integral = 0.0;
        for i in 0..=steps {
            let f = m.density(0, &[a + i as f64 * h]).unwrap();
            assert!(f >= 0.0);
            integral += if i == 0 || i == steps { 0.5 * f } else { f };
        }
        integral *= h;
        assert!((integral - 1.0).abs() < 1e-3, "{integral}");
    }

    #[test]
    fn fit_contract() {
        let x = Array2::from_shape_fn((600, 3), |(i, j)| (i * 7 + j) as f64 * 0.01);
        let y: Vec<usize> = (0..600).map(|i| i % 9).collect();
        let m = PnnModel::fit(x.view(), &y, 9, &PnnParams::default()).unwrap();
        assert_eq!(m.class_sizes().iter().sum::<usize>(), 600);
        assert_eq!(m.spread(), 0.08);

        let err = PnnModel::fit(x.view(), &y, 10, &PnnParams::default()).unwrap_err();
        assert!(matches!(err, PnnError::EmptyClass(9)));
        for bad in [0.0, -1.0, f64::NAN] {
            let err = PnnModel::fit(x.view(), &y, 9, &PnnParams::with_spread(bad)).unwrap_err();
            assert!(matches!(err, PnnError::InvalidSpread(_)));
        }
        let bad_priors = PnnParams {
            priors: Some(vec![0.5; 9]),
            ..PnnParams::default()
        };
        assert!(matches!(
            PnnModel::fit(x.view(), &y, 9, &bad_priors),
            Err(PnnError::InvalidPriors(_))
        ));
    }

    #[test]
    fn training_pattern_is_recognised() {
        let x = array![[0.0, 0.0], [1.0, 1.0], [2.0, 0.0]];
        let m = PnnModel::fit(x.view(), &[0, 1, 2], 3, &PnnParams::with_spread(0.1)).unwrap();
        for (i, row) in x.outer_iter().enumerate() {
            let d = m.classify(&row.to_vec()).unwrap();
            assert_eq!(d.predicted_class, i);
            assert!(!d.ambiguous);
        }
    }

    #[test]
    fn equidistant_query_is_ambiguous_and_breaks_low() {
        let m = PnnModel::fit(array![[0.0], [1.0]].view(), &[0, 1], 2, &PnnParams::with_spread(0.3)).unwrap();
        let d = m.classify(&[0.5]).unwrap();
        assert_eq!(d.predicted_class, 0);
        assert!(d.margin.abs() < 1e-12);
        assert!(d.ambiguous);
    }

    #[test]
    fn underflow_falls_back_to_nearest_pattern() {
        let m = PnnModel::fit(array![[0.0], [1.0]].view(), &[0, 1], 2, &PnnParams::with_spread(1e-3)).unwrap();
        let d = m.classify(&[40.0]).unwrap();
        assert_eq!(d.predicted_class, 1);
        assert!(d.ambiguous);
        assert!(d.scores.iter().all(|s| s.is_finite()));
    }

    #[test]
    fn unit_form_examples() {
        let w = array![[1.0, 0.0], [0.0, 1.0]];
        let m = PnnModel::fit(w.view(), &[0, 1], 2, &PnnParams::with_spread(1.0)).unwrap();
        let z = m.pattern_unit_form(&[1.0, 0.0]).unwrap();
        assert_eq!(z[0], 1.0);
        assert!((z[1] - (-1.0f64).exp()).abs() < 1e-15);
        assert!((z[1] - 0.36788).abs() < 1e-5);
        assert!(matches!(
            m.pattern_unit_form(&[2.0, 0.0]),
            Err(PnnError::NotUnitNorm(_))
        ));
    }

    #[test]
    fn sweep_contract() {
        let x = array![[0.0], [0.1], [1.0], [1.1]];
        let y = [0, 0, 1, 1];
        let s = spread_sweep(x.view(), &y, x.view(), &y, 2, &[0.08], &PnnParams::default()).unwrap();
        assert_eq!(s.best, 0.08);
        let grid = default_spread_grid();
        assert_eq!(grid.len(), 20);
        assert_eq!(grid[7], 0.08);
        let s = spread_sweep(x.view(), &y, x.view(), &y, 2, &grid, &PnnParams::default()).unwrap();
        assert_eq!(s.best, 0.01);
        assert!(s.accuracies.iter().all(|(_, a)| *a <= 1.0));
        let empty: [usize; 0] = [];
        assert!(matches!(
            spread_sweep(
                x.view(),
                &y,
                Array2::zeros((0, 1)).view(),
                &empty,
                2,
                &grid,
                &PnnParams::default()
            ),
            Err(PnnError::EmptyValidation)
        ));
        assert!(matches!(
            spread_sweep(x.view(), &y, x.view(), &y, 2, &[], &PnnParams::default()),
            Err(PnnError::EmptyCandidates)
        ));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let x = array![[0.1, 1.0 / 3.0], [2.0f64.sqrt(), -7.25e-9], [5.5, 6.0]];
        let params = PnnParams {
            spread: 0.0731,
            priors: Some(vec![0.3, 0.7]),
            costs: Some(vec![1.5, 0.25]),
            tolerance: 1e-3,
        };
        let m = PnnModel::fit(x.view(), &[0, 1, 1], 2, &params)
            .unwrap()
            .with_class_names(vec!["M1".into(), "NA".into()]);
        let mut buf = Vec::new();
        m.write_json(&mut buf).unwrap();
        assert_eq!(PnnModel::read_json(buf.as_slice()).unwrap(), m);
        assert!(PnnModel::read_json(&b"{\"format\":\"x\",\"version\":1}"[..]).is_err());
    }

    fn fixture(points: &[(f64, f64)]) -> Array2<f64> {
        Array2::from_shape_fn(
            (points.len(), 2),
            |(i, j)| if j == 0 { points[i].0 } else { points[i].1 },
        )
    }

    proptest! {
        #[test]
        fn common_cost_scale_keeps_decisions(
            pts in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 6..20),
            q in (-3.0f64..3.0, -3.0f64..3.0),
            scale in 0.01f64..100.0,
        ) {
            let y: Vec<usize> = (0..pts.len()).map(|i| i % 3).collect();
            let x = fixture(&pts);
            let costs = vec![1.0, 2.0, 0.5];
            let a = PnnParams { spread: 0.4, costs: Some(costs.clone()), ..PnnParams::default() };
            let b = PnnParams { spread: 0.4, costs: Some(costs.iter().map(|c| c * scale).collect()), ..PnnParams::default() };
            let ma = PnnModel::fit(x.view(), &y, 3, &a).unwrap();
            let mb = PnnModel::fit(x.view(), &y, 3, &b).unwrap();
            let qa = ma.classify(&[q.0, q.1]).unwrap();
            let qb = mb.classify(&[q.0, q.1]).unwrap();
            prop_assume!(qa.margin > 1e-9);
            prop_assert_eq!(qa.predicted_class, qb.predicted_class);
        }

        #[test]
        fn single_pattern_classes_match_nearest_neighbour(
            pts in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 2..8),
            q in (-6.0f64..6.0, -6.0f64..6.0),
            spread in 0.05f64..20.0,
        ) {
            let y: Vec<usize> = (0..pts.len()).collect();
            let x = fixture(&pts);
            let m = PnnModel::fit(x.view(), &y, pts.len(), &PnnParams::with_spread(spread)).unwrap();
            let d2: Vec<f64> = pts.iter().map(|p| (p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).collect();
            let mut sorted = d2.clone();
            sorted.sort_by(f64::total_cmp);
            prop_assume!(sorted[1] - sorted[0] > 1e-6 * (1.0 + sorted[0]));
            let nearest = (0..d2.len()).min_by(|&a, &b| d2[a].total_cmp(&d2[b])).unwrap();
            prop_assert_eq!(m.classify(&[q.0, q.1]).unwrap().predicted_class, nearest);
        }

        #[test]
        fn duplicating_a_pattern_keeps_density(
            pts in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 2..10),
            q in (-3.0f64..3.0, -3.0f64..3.0),
        ) {
            let y = vec![0; pts.len()];
            let x = fixture(&pts);
            let m = PnnModel::fit(x.view(), &y, 1, &PnnParams::with_spread(0.5)).unwrap();
            let base = m.density(0, &[q.0, q.1]).unwrap();
            // append a duplicate of every pattern: the mean of kernels is unchanged
            let mut doubled = x.clone();
            doubled.append(ndarray::Axis(0), x.view()).unwrap();
            let m2 = PnnModel::fit(doubled.view(), &vec![0; doubled.nrows()], 1, &PnnParams::with_spread(0.5)).unwrap();
            let dup = m2.density(0, &[q.0, q.1]).unwrap();
            prop_assert!((base - dup).abs() <= 1e-12 * base.max(1e-300));
        }

        #[test]
        fn two_class_sign_test(
            pts in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 4..12),
            q in (-3.0f64..3.0, -3.0f64..3.0),
            pa in 0.1f64..0.9,
        ) {
            let y: Vec<usize> = (0..pts.len()).map(|i| i % 2).collect();
            let x = fixture(&pts);
            let params = PnnParams { spread: 0.6, priors: Some(vec![pa, 1.0 - pa]), costs: Some(vec![1.0, 2.0]), ..PnnParams::default() };
            let m = PnnModel::fit(x.view(), &y, 2, &params).unwrap();
            let v = [q.0, q.1];
            let diff = pa * m.density(0, &v).unwrap() - (1.0 - pa) * 2.0 * m.density(1, &v).unwrap();
            let scale = pa * m.density(0, &v).unwrap() + (1.0 - pa) * 2.0 * m.density(1, &v).unwrap();
            prop_assume!(diff.abs() > 1e-9 * scale);
            let want = if diff > 0.0 { 0 } else { 1 };
            prop_assert_eq!(m.classify(&v).unwrap().predicted_class, want);
        }
    }

    #[test]
    fn huge_spread_collapses_to_largest_weight() {
        // unequal class sizes, uniform priors: the bigger class has the same
        // mean kernel value everywhere, so P_k C_k decides; break the tie with costs.
        let x = array![[0.0], [0.2], [0.4], [3.0], [3.1]];
        let y = [0, 0, 0, 1, 1];
        let params = PnnParams {
            spread: 1e3,
            costs: Some(vec![1.0, 1.2]),
            ..PnnParams::default()
        };
        let m = PnnModel::fit(x.view(), &y, 2, &params).unwrap();
        for q in [-1.0, 0.0, 1.5, 3.0, 4.0] {
            assert_eq!(m.classify(&[q]).unwrap().predicted_class, 1);
        }
    }
}
