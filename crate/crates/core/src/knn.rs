//! Brute-force k-nearest-neighbour classifier (Euclidean distance).

use ndarray::{Array2, ArrayView2};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KnnError {
    #[error("k = {k} out of range 1..={n_train}")]
    InvalidK { k: usize, n_train: usize },
    #[error("{rows} rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    patterns: Array2<f64>,
    labels: Vec<usize>,
    k: usize,
}

impl KnnModel {
    pub fn fit(x: ArrayView2<'_, f64>, labels: &[usize], k: usize) -> Result<Self, KnnError> {
        if x.nrows() != labels.len() {
            return Err(KnnError::LengthMismatch {
                rows: x.nrows(),
                labels: labels.len(),
            });
        }
        if k == 0 || k > x.nrows() {
            return Err(KnnError::InvalidK { k, n_train: x.nrows() });
        }
        Ok(Self {
            patterns: x.to_owned(),
            labels: labels.to_vec(),
            k,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Majority vote among the `k` nearest patterns.
    ///
    /// Equal distances rank the lower training index first. A vote tie goes to
    /// whichever tied class owns the nearest neighbour.
    pub fn classify(&self, x: &[f64]) -> Result<usize, KnnError> {
        if x.len() != self.patterns.ncols() {
            return Err(KnnError::DimensionMismatch {
                expected: self.patterns.ncols(),
                got: x.len(),
            });
        }
        let mut dist: Vec<(f64, usize)> = self
            .patterns
            .outer_iter()
            .enumerate()
            .map(|(i, p)| {
                let d2: f64 = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                (d2, i)
            })
            .collect();
        let k = self.k;
        if k < dist.len() {
            dist.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            dist.truncate(k);
        }
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut votes: Vec<(usize, usize)> = Vec::new();
        for &(_, i) in &dist {
            let label = self.labels[i];
            match votes.iter_mut().find(|(l, _)| *l == label) {
                Some(v) => v.1 += 1,
                None => votes.push((label, 1)),
            }
        }
        // `votes` is in order of each class's nearest member, so the first
        // maximum wins ties.
        let mut best = votes[0];
        for &v in &votes[1..] {
            if v.1 > best.1 {
                best = v;
            }
        }
        Ok(best.0)
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Vec<usize>, KnnError> {
        x.outer_iter().map(|row| self.classify(&row.to_vec())).collect()
    }
}
