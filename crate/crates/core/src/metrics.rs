//! Confusion matrices and fire-detection metrics.
//!
//! Confusion matrices are indexed `[predicted][actual]`. For the fire/no-fire
//! collapse the ambient class is the negative class and every material is a
//! positive:
//!
//! * TN: ambient predicted as ambient.
//! * FN: a material predicted as ambient.
//! * TP: a material predicted as itself.
//! * FP: everything else, i.e. a material predicted as another material or
//!   ambient air predicted as a material.

use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("{predictions} predictions but {actuals} actual labels")]
    LengthMismatch { predictions: usize, actuals: usize },
    #[error("label {label} out of range for {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("binary collapse needs at least 2 classes, got {0}")]
    TooFewClasses(usize),
    #[error("undefined metric: {0} has a zero denominator")]
    Undefined(&'static str),
    #[error("undefined metric: class {0} has no actual samples")]
    EmptyClass(usize),
    #[error("no accuracies to aggregate")]
    Empty,
    #[error("malformed confusion matrix: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    k: usize,
    counts: Vec<u64>,
    class_names: Vec<String>,
}

impl ConfusionMatrix {
    /// Counts `(prediction, actual)` pairs.
    pub fn from_predictions(predictions: &[usize], actuals: &[usize], n_classes: usize) -> Result<Self, MetricsError> {
        if predictions.len() != actuals.len() {
            return Err(MetricsError::LengthMismatch {
                predictions: predictions.len(),
                actuals: actuals.len(),
            });
        }
        let mut counts = vec![0u64; n_classes * n_classes];
        for (&p, &a) in predictions.iter().zip(actuals) {
            for label in [p, a] {
                if label >= n_classes {
                    return Err(MetricsError::LabelOutOfRange { label, n_classes });
                }
            }
            counts[p * n_classes + a] += 1;
        }
        Ok(Self {
            k: n_classes,
            counts,
            class_names: default_names(n_classes),
        })
    }

    /// Builds a matrix from rows of predicted-class counts.
    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self, MetricsError> {
        let k = rows.len();
        if rows.iter().any(|r| r.len() != k) {
            return Err(MetricsError::Malformed("matrix must be square".into()));
        }
        Ok(Self {
            k,
            counts: rows.concat(),
            class_names: default_names(k),
        })
    }

    pub fn with_class_names(mut self, names: Vec<String>) -> Result<Self, MetricsError> {
        if names.len() != self.k {
            return Err(MetricsError::Malformed(format!(
                "{} class names for {} classes",
                names.len(),
                self.k
            )));
        }
        self.class_names = names;
        Ok(self)
    }

    pub fn n_classes(&self) -> usize {
        self.k
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn get(&self, predicted: usize, actual: usize) -> u64 {
        self.counts[predicted * self.k + actual]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.k).map(|c| self.get(c, c)).sum()
    }

    pub fn actual_count(&self, class: usize) -> u64 {
        (0..self.k).map(|p| self.get(p, class)).sum()
    }

    /// Multi-class accuracy in percent.
    pub fn accuracy(&self) -> Result<f64, MetricsError> {
        let total = self.total();
        if total == 0 {
            return Err(MetricsError::Undefined("accuracy"));
        }
        Ok(self.correct() as f64 / total as f64 * 100.0)
    }

    /// Recall of one class in percent.
    pub fn class_recall(&self, class: usize) -> Result<f64, MetricsError> {
        let n = self.actual_count(class);
        if n == 0 {
            return Err(MetricsError::EmptyClass(class));
        }
        Ok(self.get(class, class) as f64 / n as f64 * 100.0)
    }

    /// Recall of every class in percent.
    pub fn per_class_accuracy(&self) -> Result<Vec<f64>, MetricsError> {
        (0..self.k).map(|c| self.class_recall(c)).collect()
    }

    pub fn binary_collapse(&self, negative_class: usize) -> Result<BinaryCollapse, MetricsError> {
        if self.k < 2 {
            return Err(MetricsError::TooFewClasses(self.k));
        }
        if negative_class >= self.k {
            return Err(MetricsError::LabelOutOfRange {
                label: negative_class,
                n_classes: self.k,
            });
        }
        let neg = negative_class;
        let tn = self.get(neg, neg);
        let fn_ = (0..self.k).filter(|&a| a != neg).map(|a| self.get(neg, a)).sum();
        let tp = (0..self.k).filter(|&c| c != neg).map(|c| self.get(c, c)).sum();
        let fp = self.total() - tn - fn_ - tp;
        Ok(BinaryCollapse { tp, fp, tn, fn_ })
    }

    /// Writes the matrix as CSV: rows are predicted classes, columns actual
    /// classes, and a final column with the recall of each row's class.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "predicted,{},accuracy", self.class_names.join(","))?;
        for p in 0..self.k {
            let cells: Vec<String> = (0..self.k).map(|a| self.get(p, a).to_string()).collect();
            let recall = self.class_recall(p).map(|r| format!("{r:.2}")).unwrap_or_default();
            writeln!(w, "{},{},{}", self.class_names[p], cells.join(","), recall)?;
        }
        Ok(())
    }

    /// Parses the layout written by [`ConfusionMatrix::write_csv`]. The
    /// trailing `accuracy` column is optional and ignored.
    pub fn read_csv(text: &str) -> Result<Self, MetricsError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| MetricsError::Malformed("empty input".into()))?
            .split(',')
            .map(str::trim)
            .collect();
        let mut names: Vec<String> = header.iter().skip(1).map(|s| s.to_string()).collect();
        let has_acc = names.last().is_some_and(|s| s == "accuracy");
        if has_acc {
            names.pop();
        }
        let k = names.len();
        let mut rows = Vec::with_capacity(k);
        for (i, line) in lines.enumerate() {
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() < k + 1 || cells.len() > k + 2 {
                return Err(MetricsError::Malformed(format!(
                    "row {} has {} cells",
                    i + 1,
                    cells.len()
                )));
            }
            let row = cells[1..=k]
                .iter()
                .map(|c| {
                    c.parse::<u64>()
                        .map_err(|_| MetricsError::Malformed(format!("row {}: '{c}' is not a count", i + 1)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Self::from_rows(&rows)?.with_class_names(names)
    }
}

fn default_names(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("C{i}")).collect()
}

/// Fire (positive) versus ambient air (negative) counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinaryCollapse {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl BinaryCollapse {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// `TP / (TP + FN)` in percent.
    pub fn sensitivity(&self) -> Result<f64, MetricsError> {
        ratio(self.tp, self.tp + self.fn_, "sensitivity")
    }

    /// `TN / (TN + FP)` in percent.
    pub fn specificity(&self) -> Result<f64, MetricsError> {
        ratio(self.tn, self.tn + self.fp, "specificity")
    }

    /// `(TP + TN) / total` in percent.
    pub fn accuracy(&self) -> Result<f64, MetricsError> {
        ratio(self.tp + self.tn, self.total(), "accuracy")
    }
}

fn ratio(num: u64, den: u64, metric: &'static str) -> Result<f64, MetricsError> {
    if den == 0 {
        return Err(MetricsError::Undefined(metric));
    }
    Ok(num as f64 / den as f64 * 100.0)
}

/// Minimum, maximum and mean of per-repetition accuracies (percent).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepetitionStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub n_repetitions: usize,
}

impl RepetitionStats {
    pub fn from_accuracies(accuracies: &[f64]) -> Result<Self, MetricsError> {
        if accuracies.is_empty() {
            return Err(MetricsError::Empty);
        }
        let min = accuracies.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = accuracies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mean = accuracies.iter().sum::<f64>() / accuracies.len() as f64;
        // summation round-off must not push the mean outside [min, max]
        let mean = mean.clamp(min, max);
        Ok(Self {
            min,
            max,
            mean,
            n_repetitions: accuracies.len(),
        })
    }
}
