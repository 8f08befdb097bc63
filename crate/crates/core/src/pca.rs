//! Covariance PCA with variance accounting.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use std::io::Write;
use thiserror::Error;

/// Eigenvalues at or below this magnitude are reported as exactly zero.
const ZERO_EIGENVALUE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PcaError {
    #[error("insufficient samples: PCA needs at least 2 rows, got {0}")]
    InsufficientSamples(usize),
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("data has zero total variance")]
    ZeroVariance,
    #[error("dimension mismatch: model has {expected} columns, data has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("component count {k} out of range 1..={max}")]
    ComponentCount { k: usize, max: usize },
}

/// One row of a latent/proportion/cumulative table; `component` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceRow {
    pub component: usize,
    pub latent: f64,
    pub proportion: f64,
    pub cumulative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    mean: Array1<f64>,
    /// Columns are unit eigenvectors in descending eigenvalue order.
    loadings: Array2<f64>,
    latent: Vec<f64>,
    proportion: Vec<f64>,
    cumulative: Vec<f64>,
    n_samples: usize,
}

impl PcaModel {
    /// Fits on the rows of `data` using the sample covariance (divisor N-1).
    ///
    /// Each loading column is signed so that its largest-magnitude entry is
    /// non-negative.
    pub fn fit(data: ArrayView2<'_, f64>) -> Result<Self, PcaError> {
        let (n, d) = data.dim();
        if n < 2 {
            return Err(PcaError::InsufficientSamples(n));
        }
        if let Some(((row, col), _)) = data.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(PcaError::NonFinite { row, col });
        }
        let mean = data.mean_axis(Axis(0)).expect("n >= 2");
        let centered = &data - &mean;
        let cov = centered.t().dot(&centered) / (n as f64 - 1.0);
        let sym = DMatrix::from_fn(d, d, |i, j| 0.5 * (cov[[i, j]] + cov[[j, i]]));
        let eig = SymmetricEigen::new(sym);

        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

        let mut loadings = Array2::zeros((d, d));
        let mut latent = Vec::with_capacity(d);
        for (dst, &src) in order.iter().enumerate() {
            let lambda = eig.eigenvalues[src];
            latent.push(if lambda <= ZERO_EIGENVALUE { 0.0 } else { lambda });
            let col = eig.eigenvectors.column(src);
            let pivot = (0..d)
                .max_by(|&a, &b| col[a].abs().total_cmp(&col[b].abs()).then(b.cmp(&a)))
                .expect("d >= 1");
            let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
            for i in 0..d {
                loadings[[i, dst]] = sign * col[i];
            }
        }

        let total: f64 = latent.iter().sum();
        if !(total > 0.0) {
            return Err(PcaError::ZeroVariance);
        }
        let proportion: Vec<f64> = latent.iter().map(|l| l / total).collect();
        let cumulative: Vec<f64> = proportion
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        Ok(Self {
            mean,
            loadings,
            latent,
            proportion,
            cumulative,
            n_samples: n,
        })
    }

    /// Scores on the first `k` components: `(data - mean) · loadings[:, ..k]`.
    pub fn transform(&self, data: ArrayView2<'_, f64>, k: usize) -> Result<Array2<f64>, PcaError> {
        self.check_dims(data.ncols())?;
        self.check_k(k)?;
        let centered = &data - &self.mean;
        Ok(centered.dot(&self.loadings.slice(s![.., ..k])))
    }

    /// Maps scores on the first `scores.ncols()` components back to data space.
    pub fn inverse_transform(&self, scores: ArrayView2<'_, f64>) -> Result<Array2<f64>, PcaError> {
        let k = scores.ncols();
        self.check_k(k)?;
        Ok(scores.dot(&self.loadings.slice(s![.., ..k]).t()) + &self.mean)
    }

    fn check_dims(&self, got: usize) -> Result<(), PcaError> {
        if got != self.n_dims() {
            return Err(PcaError::DimensionMismatch {
                expected: self.n_dims(),
                got,
            });
        }
        Ok(())
    }

    fn check_k(&self, k: usize) -> Result<(), PcaError> {
        if k == 0 || k > self.n_dims() {
            return Err(PcaError::ComponentCount { k, max: self.n_dims() });
        }
        Ok(())
    }

    pub fn variance_table(&self) -> Vec<VarianceRow> {
        (0..self.n_dims())
            .map(|i| VarianceRow {
                component: i + 1,
                latent: self.latent[i],
                proportion: self.proportion[i],
                cumulative: self.cumulative[i],
            })
            .collect()
    }

    /// Writes `pc,latent,proportion,cumulative` rows.
    pub fn write_variance_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "pc,latent,proportion,cumulative")?;
        for r in self.variance_table() {
            writeln!(w, "{},{},{},{}", r.component, r.latent, r.proportion, r.cumulative)?;
        }
        Ok(())
    }

    pub fn n_dims(&self) -> usize {
        self.mean.len()
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn mean(&self) -> &Array1<f64> {
        &self.mean
    }

    pub fn loadings(&self) -> &Array2<f64> {
        &self.loadings
    }

    pub fn latent(&self) -> &[f64] {
        &self.latent
    }

    pub fn proportion(&self) -> &[f64] {
        &self.proportion
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }
}
