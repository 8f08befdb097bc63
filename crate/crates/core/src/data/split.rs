use super::{DataError, LabeledDataset};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Train/validation/test proportions.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl SplitFractions {
    /// 60/10/30.
    pub const DEFAULT: Self = Self {
        train: 0.6,
        validation: 0.1,
        test: 0.3,
    };

    pub fn new(train: f64, validation: f64, test: f64) -> Result<Self, DataError> {
        let f = Self {
            train,
            validation,
            test,
        };
        f.validate()?;
        Ok(f)
    }

    fn as_array(&self) -> [f64; 3] {
        [self.train, self.validation, self.test]
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let parts = self.as_array();
        if parts.iter().any(|f| !f.is_finite() || *f < 0.0) {
            return Err(DataError::InvalidFractions(format!(
                "fractions must be non-negative, got {parts:?}"
            )));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(DataError::InvalidFractions(format!(
                "fractions must sum to 1, got {sum}"
            )));
        }
        if self.train <= 0.0 {
            return Err(DataError::InvalidFractions("training fraction must be positive".into()));
        }
        Ok(())
    }
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Disjoint index lists covering `0..N`, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

/// Stratified split of `dataset`. See [`split_labels`].
pub fn split(dataset: &LabeledDataset, fractions: SplitFractions, seed: u64) -> Result<SplitIndices, DataError> {
    split_labels(dataset.labels(), dataset.n_classes(), fractions, seed)
}

/// Stratified per-class partition. Each class is shuffled independently with a
/// ChaCha8 stream seeded by `seed`, then cut by largest-remainder allocation,
/// so every part receives its share of each class within one sample.
pub fn split_labels(
    labels: &[usize],
    n_classes: usize,
    fractions: SplitFractions,
    seed: u64,
) -> Result<SplitIndices, DataError> {
    fractions.validate()?;
    let fr = fractions.as_array();
    let parts = fr.iter().filter(|f| **f > 0.0).count();

    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        if l >= n_classes {
            return Err(DataError::LabelOutOfRange { label: l, n_classes });
        }
        by_class[l].push(i);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: [Vec<usize>; 3] = Default::default();
    for (class, mut members) in by_class.into_iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        if members.len() < parts {
            return Err(DataError::InsufficientClassPopulation {
                class,
                count: members.len(),
                parts,
            });
        }
        members.shuffle(&mut rng);
        let sizes = allocate(members.len(), &fr);
        let mut start = 0;
        for (part, size) in sizes.iter().enumerate() {
            out[part].extend_from_slice(&members[start..start + size]);
            start += size;
        }
    }
    for part in &mut out {
        part.sort_unstable();
    }
    let [train, validation, test] = out;
    Ok(SplitIndices {
        train,
        validation,
        test,
        seed,
    })
}

/// Largest-remainder allocation of `n` items; every part with a positive
/// fraction gets at least one item.
fn allocate(n: usize, fractions: &[f64; 3]) -> [usize; 3] {
    let exact: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut sizes = [0usize; 3];
    for (s, e) in sizes.iter_mut().zip(&exact) {
        *s = e.floor() as usize;
    }
    let mut remaining = n - sizes.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..3).filter(|&i| fractions[i] > 0.0).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if remaining == 0 {
            break;
        }
        sizes[i] += 1;
        remaining -= 1;
    }
    for i in 0..3 {
        if fractions[i] > 0.0 && sizes[i] == 0 {
            let donor = (0..3).max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a)));
            if let Some(d) = donor {
                sizes[d] -= 1;
                sizes[i] += 1;
            }
        }
    }
    sizes
}
