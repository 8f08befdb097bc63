//! Feature ranking, PC-count sweep, fusion and final evaluation.
//!
//! 1. Extract each baseline-correction feature and score it with a PNN over
//!    repeated random splits; rank by mean test accuracy.
//! 2. Keep the best `top_n_features`.
//! 3. For each PC count `k`, PCA-reduce every kept feature to `k` scores and
//!    score again; pick the `k` with the best accuracy averaged across the
//!    kept features (ties go to the smaller `k`).
//! 4. Concatenate the reduced features into the hybrid feature and evaluate
//!    it with the PNN and with the kNN baseline.
//!
//! Repetition `r` of every stage uses the same split, seeded by
//! `derive_seed(master_seed, r)`. Repetitions may run in parallel; results are
//! collected by repetition index, so the report does not depend on
//! scheduling.

mod report;

pub use report::{write_pc_sweep_csv, write_ranking_csv, write_report_dir, DatasetSource};

use crate::data::{select_rows, split, DataError, LabeledDataset, SplitFractions, SplitIndices};
use crate::featex::{extract_dataset, FeatureError, FeatureKind, FeatureMatrix, FeatureOrigin};
use crate::knn::{KnnError, KnnModel};
use crate::metrics::{ConfusionMatrix, MetricsError, RepetitionStats};
use crate::pca::{PcaError, PcaModel};
use crate::pnn::{spread_sweep, PnnError, PnnModel, PnnParams, DEFAULT_SPREAD, DEFAULT_TOLERANCE};
use crate::seed::derive_seed;
use ndarray::{concatenate, s, Array2, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Split,
    Extraction,
    Ranking,
    PcSweep,
    Fusion,
    Evaluation,
    Baseline,
    Output,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Split => "split",
            Stage::Extraction => "extraction",
            Stage::Ranking => "ranking",
            Stage::PcSweep => "pc-sweep",
            Stage::Fusion => "fusion",
            Stage::Evaluation => "evaluation",
            Stage::Baseline => "baseline",
            Stage::Output => "output",
        })
    }
}

#[derive(Debug, Error)]
pub enum StageError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Pca(#[from] PcaError),
    #[error(transparent)]
    Pnn(#[from] PnnError),
    #[error(transparent)]
    Knn(#[from] KnnError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
#[error("{stage}: {source}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: StageError,
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, PipelineError>;
}

impl<T, E: Into<StageError>> AtStage<T> for Result<T, E> {
    fn at(self, stage: Stage) -> Result<T, PipelineError> {
        self.map_err(|e| PipelineError {
            stage,
            source: e.into(),
        })
    }
}

fn invalid(stage: Stage, msg: impl Into<String>) -> PipelineError {
    PipelineError {
        stage,
        source: StageError::Invalid(msg.into()),
    }
}

/// Fixed spread, or a grid searched on the validation split of every
/// repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpreadChoice {
    Fixed(f64),
    Sweep(Vec<f64>),
}

/// Rows used to fit each PCA model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PcaFitScope {
    /// Training rows of the repetition's split only.
    Train,
    /// Every row of the dataset.
    All,
}

impl std::str::FromStr for PcaFitScope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Self::Train),
            "all" => Ok(Self::All),
            other => Err(format!("unknown PCA fit scope '{other}' (expected train|all)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub feature_kinds: Vec<FeatureKind>,
    pub n_repetitions: usize,
    pub fractions: SplitFractions,
    pub spread: SpreadChoice,
    pub tolerance: f64,
    /// Inclusive PC-count range; `None` sweeps `1..=D`.
    pub pc_range: Option<(usize, usize)>,
    pub top_n_features: usize,
    pub pca_fit_scope: PcaFitScope,
    pub knn_k: usize,
    pub master_seed: u64,
    pub parallel: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            feature_kinds: FeatureKind::ALL.to_vec(),
            n_repetitions: 50,
            fractions: SplitFractions::DEFAULT,
            spread: SpreadChoice::Fixed(DEFAULT_SPREAD),
            tolerance: DEFAULT_TOLERANCE,
            pc_range: None,
            top_n_features: 3,
            pca_fit_scope: PcaFitScope::Train,
            knn_k: 3,
            master_seed: 0,
            parallel: true,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let stage = Stage::Config;
        if self.feature_kinds.is_empty() {
            return Err(invalid(stage, "no feature kinds configured"));
        }
        let mut kinds = self.feature_kinds.clone();
        kinds.sort();
        kinds.dedup();
        if kinds.len() != self.feature_kinds.len() {
            return Err(invalid(stage, "duplicate feature kinds"));
        }
        if self.top_n_features == 0 || self.top_n_features > self.feature_kinds.len() {
            return Err(invalid(
                stage,
                format!(
                    "top_n_features must lie in 1..={}, got {}",
                    self.feature_kinds.len(),
                    self.top_n_features
                ),
            ));
        }
        if self.n_repetitions == 0 {
            return Err(invalid(stage, "n_repetitions must be at least 1"));
        }
        self.fractions.validate().at(stage)?;
        if self.fractions.test <= 0.0 {
            return Err(invalid(stage, "the test fraction must be positive"));
        }
        match &self.spread {
            SpreadChoice::Fixed(s) if !(s.is_finite() && *s > 0.0) => {
                return Err(invalid(stage, format!("spread must be positive, got {s}")))
            }
            SpreadChoice::Sweep(grid) => {
                if grid.is_empty() || grid.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                    return Err(invalid(stage, "spread grid must be non-empty and positive"));
                }
                if self.fractions.validation <= 0.0 {
                    return Err(invalid(stage, "a spread sweep needs a validation split"));
                }
            }
            _ => {}
        }
        if self.knn_k == 0 {
            return Err(invalid(stage, "knn_k must be at least 1"));
        }
        Ok(())
    }

    fn pnn_params(&self, spread: f64) -> PnnParams {
        PnnParams {
            spread,
            tolerance: self.tolerance,
            ..PnnParams::default()
        }
    }
}

/// Mean fire-detection metrics over repetitions, in percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanMetrics {
    pub sensitivity: f64,
    pub specificity: f64,
    pub accuracy: f64,
}

/// Outcome of repeated evaluation of one feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RepeatedEvaluation {
    /// Multi-class test accuracy per repetition, in percent.
    pub accuracies: Vec<f64>,
    pub confusions: Vec<ConfusionMatrix>,
    pub stats: RepetitionStats,
    pub metrics: Option<MeanMetrics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRank {
    pub kind: FeatureKind,
    pub stats: RepetitionStats,
    pub metrics: Option<MeanMetrics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    /// Best first.
    pub ranked: Vec<FeatureRank>,
    pub excluded: Vec<(FeatureKind, String)>,
}

impl Ranking {
    pub fn top(&self, n: usize) -> Vec<FeatureKind> {
        self.ranked.iter().take(n).map(|r| r.kind).collect()
    }

    pub fn warnings(&self) -> Vec<String> {
        self.excluded
            .iter()
            .map(|(k, why)| format!("{k} excluded from ranking: {why}"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcSweep {
    pub pc_counts: Vec<usize>,
    pub features: Vec<FeatureKind>,
    /// Mean accuracy in percent, indexed `[pc_count index][feature index]`.
    pub mean_accuracy: Vec<Vec<f64>>,
    pub chosen: usize,
}

impl PcSweep {
    /// Accuracy averaged across features for each PC count.
    pub fn cross_feature_mean(&self) -> Vec<f64> {
        self.mean_accuracy
            .iter()
            .map(|row| row.iter().sum::<f64>() / row.len() as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    pub ranking: Ranking,
    pub selected_features: Vec<FeatureKind>,
    pub pc_sweep: PcSweep,
    pub chosen_pc_count: usize,
    /// `(N, top_n * k*)`.
    pub hybrid_dims: (usize, usize),
    pub hybrid_origin: FeatureOrigin,
    pub hybrid_stats: RepetitionStats,
    pub final_confusion: ConfusionMatrix,
    pub representative_repetition: usize,
    pub final_metrics: Option<MeanMetrics>,
    /// Single-run recall of the representative confusion matrix per class.
    pub per_class_recall: Vec<Option<f64>>,
    /// Recall per class averaged over repetitions.
    pub per_class_recall_mean: Vec<Option<f64>>,
    pub baseline_stats: RepetitionStats,
    pub baseline_metrics: Option<MeanMetrics>,
    pub split_seeds: Vec<u64>,
    pub warnings: Vec<String>,
}

/// Splits for every repetition.
pub fn repetition_splits(
    dataset: &LabeledDataset,
    config: &PipelineConfig,
) -> Result<Vec<SplitIndices>, PipelineError> {
    (0..config.n_repetitions)
        .map(|r| split(dataset, config.fractions, derive_seed(config.master_seed, r as u64)).at(Stage::Split))
        .collect()
}

fn for_each_rep<T, F>(n: usize, parallel: bool, f: F) -> Result<Vec<T>, PipelineError>
where
    T: Send,
    F: Fn(usize) -> Result<T, PipelineError> + Sync + Send,
{
    if parallel {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

/// Fits a PNN on the training rows of `split` and returns the test confusion
/// matrix. With a spread grid the spread is chosen on the validation rows.
pub fn evaluate_pnn_split(
    x: ArrayView2<'_, f64>,
    labels: &[usize],
    n_classes: usize,
    split: &SplitIndices,
    config: &PipelineConfig,
) -> Result<ConfusionMatrix, StageError> {
    let (tx, ty) = select_rows(x, labels, &split.train);
    let (sx, sy) = select_rows(x, labels, &split.test);
    let spread = match &config.spread {
        SpreadChoice::Fixed(s) => *s,
        SpreadChoice::Sweep(grid) => {
            let (vx, vy) = select_rows(x, labels, &split.validation);
            spread_sweep(
                tx.view(),
                &ty,
                vx.view(),
                &vy,
                n_classes,
                grid,
                &config.pnn_params(DEFAULT_SPREAD),
            )?
            .best
        }
    };
    let model = PnnModel::fit(tx.view(), &ty, n_classes, &config.pnn_params(spread))?;
    let predicted = model.predict(sx.view())?;
    Ok(ConfusionMatrix::from_predictions(&predicted, &sy, n_classes)?)
}

fn evaluate_knn_split(
    x: ArrayView2<'_, f64>,
    labels: &[usize],
    n_classes: usize,
    split: &SplitIndices,
    k: usize,
) -> Result<ConfusionMatrix, StageError> {
    let (tx, ty) = select_rows(x, labels, &split.train);
    let (sx, sy) = select_rows(x, labels, &split.test);
    let model = KnnModel::fit(tx.view(), &ty, k)?;
    let predicted = model.predict(sx.view())?;
    Ok(ConfusionMatrix::from_predictions(&predicted, &sy, n_classes)?)
}

/// Summarises per-repetition confusion matrices.
pub fn summarize(
    confusions: Vec<ConfusionMatrix>,
    negative_class: Option<usize>,
) -> Result<RepeatedEvaluation, MetricsError> {
    let accuracies = confusions.iter().map(|c| c.accuracy()).collect::<Result<Vec<_>, _>>()?;
    let stats = RepetitionStats::from_accuracies(&accuracies)?;
    let metrics = negative_class.and_then(|neg| mean_metrics(&confusions, neg));
    Ok(RepeatedEvaluation {
        accuracies,
        confusions,
        stats,
        metrics,
    })
}

/// Mean sensitivity/specificity/accuracy over the repetitions where all three
/// are defined.
fn mean_metrics(confusions: &[ConfusionMatrix], negative_class: usize) -> Option<MeanMetrics> {
    let mut sums = (0.0, 0.0, 0.0);
    let mut n = 0usize;
    for cm in confusions {
        let Ok(bc) = cm.binary_collapse(negative_class) else {
            continue;
        };
        if let (Ok(se), Ok(sp), Ok(acc)) = (bc.sensitivity(), bc.specificity(), bc.accuracy()) {
            sums.0 += se;
            sums.1 += sp;
            sums.2 += acc;
            n += 1;
        }
    }
    (n > 0).then(|| MeanMetrics {
        sensitivity: sums.0 / n as f64,
        specificity: sums.1 / n as f64,
        accuracy: sums.2 / n as f64,
    })
}

/// Repeated PNN evaluation of one feature matrix.
pub fn evaluate_repeated(
    x: ArrayView2<'_, f64>,
    dataset: &LabeledDataset,
    splits: &[SplitIndices],
    config: &PipelineConfig,
    stage: Stage,
) -> Result<RepeatedEvaluation, PipelineError> {
    let confusions = for_each_rep(splits.len(), config.parallel, |r| {
        evaluate_pnn_split(x, dataset.labels(), dataset.n_classes(), &splits[r], config).at(stage)
    })?;
    summarize(confusions, dataset.negative_class()).at(stage)
}

/// Scores every configured feature kind and ranks by mean accuracy, best
/// first. Ties keep the enumeration order of [`FeatureKind`]. Kinds whose
/// extraction fails on this dataset are excluded with a reason.
pub fn rank_features(
    dataset: &LabeledDataset,
    config: &PipelineConfig,
    splits: &[SplitIndices],
) -> Result<Ranking, PipelineError> {
    let mut ranked = Vec::new();
    let mut excluded = Vec::new();
    for &kind in &config.feature_kinds {
        let matrix = match extract_dataset(dataset, kind) {
            Ok(m) => m,
            Err(e) => {
                excluded.push((kind, e.to_string()));
                continue;
            }
        };
        let eval = evaluate_repeated(matrix.values.view(), dataset, splits, config, Stage::Ranking)?;
        ranked.push(FeatureRank {
            kind,
            stats: eval.stats,
            metrics: eval.metrics,
        });
    }
    ranked.sort_by(|a, b| b.stats.mean.total_cmp(&a.stats.mean).then(a.kind.cmp(&b.kind)));
    Ok(Ranking { ranked, excluded })
}

/// PCA model for one repetition: fitted on the split's training rows, or on
/// all rows.
pub fn fit_scoped_pca(x: ArrayView2<'_, f64>, split: &SplitIndices, scope: PcaFitScope) -> Result<PcaModel, PcaError> {
    match scope {
        PcaFitScope::Train => PcaModel::fit(x.select(Axis(0), &split.train).view()),
        PcaFitScope::All => PcaModel::fit(x),
    }
}

/// PCA scores of every row on the first `k` components, one model per
/// repetition.
fn scores_per_rep(
    x: ArrayView2<'_, f64>,
    splits: &[SplitIndices],
    config: &PipelineConfig,
    k: usize,
    stage: Stage,
) -> Result<Vec<Array2<f64>>, PipelineError> {
    match config.pca_fit_scope {
        PcaFitScope::All => {
            let scores = PcaModel::fit(x).at(stage)?.transform(x, k).at(stage)?;
            Ok(vec![scores; splits.len()])
        }
        PcaFitScope::Train => for_each_rep(splits.len(), config.parallel, |r| {
            fit_scoped_pca(x, &splits[r], PcaFitScope::Train)
                .and_then(|m| m.transform(x, k))
                .at(stage)
        }),
    }
}

/// Evaluates each selected feature at every PC count in range and picks the
/// count with the best cross-feature mean accuracy (smaller count on ties).
pub fn pc_sweep(
    dataset: &LabeledDataset,
    selected: &[FeatureKind],
    config: &PipelineConfig,
    splits: &[SplitIndices],
) -> Result<PcSweep, PipelineError> {
    let stage = Stage::PcSweep;
    if selected.is_empty() {
        return Err(invalid(stage, "no features selected"));
    }
    let d = dataset.n_features();
    let (lo, hi) = config.pc_range.unwrap_or((1, d));
    if lo == 0 || lo > hi || hi > d {
        return Err(invalid(
            stage,
            format!("PC range {lo}..={hi} is empty or outside 1..={d}"),
        ));
    }
    let pc_counts: Vec<usize> = (lo..=hi).collect();
    let mut mean_accuracy = vec![vec![0.0; selected.len()]; pc_counts.len()];
    for (fi, &kind) in selected.iter().enumerate() {
        let matrix = extract_dataset(dataset, kind).at(Stage::Extraction)?;
        let scores = scores_per_rep(matrix.values.view(), splits, config, hi, stage)?;
        let per_rep: Vec<Vec<f64>> = for_each_rep(splits.len(), config.parallel, |r| {
            pc_counts
                .iter()
                .map(|&k| {
                    let cm = evaluate_pnn_split(
                        scores[r].slice(s![.., ..k]),
                        dataset.labels(),
                        dataset.n_classes(),
                        &splits[r],
                        config,
                    )
                    .at(stage)?;
                    cm.accuracy().at(stage)
                })
                .collect()
        })?;
        for (ki, row) in mean_accuracy.iter_mut().enumerate() {
            row[fi] = per_rep.iter().map(|accs| accs[ki]).sum::<f64>() / per_rep.len() as f64;
        }
    }
    let mut sweep = PcSweep {
        pc_counts,
        features: selected.to_vec(),
        mean_accuracy,
        chosen: lo,
    };
    let means = sweep.cross_feature_mean();
    let mut best = 0;
    for i in 1..means.len() {
        if means[i] > means[best] {
            best = i;
        }
    }
    sweep.chosen = sweep.pc_counts[best];
    Ok(sweep)
}

/// Concatenates score blocks column-wise in the given order.
pub fn fuse(blocks: &[(FeatureKind, ArrayView2<'_, f64>)]) -> Result<FeatureMatrix, PipelineError> {
    let stage = Stage::Fusion;
    let Some((_, first)) = blocks.first() else {
        return Err(invalid(stage, "nothing to fuse"));
    };
    for (kind, b) in blocks {
        if b.nrows() != first.nrows() {
            return Err(invalid(
                stage,
                format!("{kind} has {} rows, expected {}", b.nrows(), first.nrows()),
            ));
        }
        if b.ncols() != first.ncols() {
            return Err(invalid(
                stage,
                format!("{kind} has {} components, expected {}", b.ncols(), first.ncols()),
            ));
        }
    }
    let views: Vec<ArrayView2<'_, f64>> = blocks.iter().map(|(_, b)| b.view()).collect();
    let values = concatenate(Axis(1), &views).map_err(|e| invalid(stage, e.to_string()))?;
    let origin = FeatureOrigin::Hybrid(blocks.iter().map(|(k, b)| (*k, b.ncols())).collect());
    Ok(FeatureMatrix::new(values, origin))
}

/// Hybrid feature matrices, one per repetition.
pub fn hybrid_per_rep(
    dataset: &LabeledDataset,
    selected: &[FeatureKind],
    k: usize,
    config: &PipelineConfig,
    splits: &[SplitIndices],
) -> Result<Vec<FeatureMatrix>, PipelineError> {
    let mut per_feature = Vec::with_capacity(selected.len());
    for &kind in selected {
        let matrix = extract_dataset(dataset, kind).at(Stage::Extraction)?;
        per_feature.push(scores_per_rep(matrix.values.view(), splits, config, k, Stage::Fusion)?);
    }
    (0..splits.len())
        .map(|r| {
            let blocks: Vec<(FeatureKind, ArrayView2<'_, f64>)> = selected
                .iter()
                .zip(&per_feature)
                .map(|(&kind, scores)| (kind, scores[r].view()))
                .collect();
            fuse(&blocks)
        })
        .collect()
}

/// Runs every stage on `dataset`.
pub fn run(dataset: &LabeledDataset, config: &PipelineConfig) -> Result<PipelineReport, PipelineError> {
    config.validate()?;
    let splits = repetition_splits(dataset, config)?;

    let ranking = rank_features(dataset, config, &splits)?;
    if ranking.ranked.len() < config.top_n_features {
        return Err(invalid(
            Stage::Ranking,
            format!(
                "only {} usable features, {} requested: {}",
                ranking.ranked.len(),
                config.top_n_features,
                ranking.warnings().join("; ")
            ),
        ));
    }
    let selected = ranking.top(config.top_n_features);
    let sweep = pc_sweep(dataset, &selected, config, &splits)?;
    let k = sweep.chosen;

    let hybrids = hybrid_per_rep(dataset, &selected, k, config, &splits)?;
    let n_classes = dataset.n_classes();
    let labels = dataset.labels();
    let confusions = for_each_rep(splits.len(), config.parallel, |r| {
        evaluate_pnn_split(hybrids[r].values.view(), labels, n_classes, &splits[r], config).at(Stage::Evaluation)
    })?;
    let hybrid = summarize(confusions, dataset.negative_class()).at(Stage::Evaluation)?;

    let knn_confusions = for_each_rep(splits.len(), config.parallel, |r| {
        evaluate_knn_split(hybrids[r].values.view(), labels, n_classes, &splits[r], config.knn_k).at(Stage::Baseline)
    })?;
    let baseline = summarize(knn_confusions, dataset.negative_class()).at(Stage::Baseline)?;

    let mean = hybrid.stats.mean;
    let representative = (0..hybrid.accuracies.len())
        .min_by(|&a, &b| {
            (hybrid.accuracies[a] - mean)
                .abs()
                .total_cmp(&(hybrid.accuracies[b] - mean).abs())
                .then(a.cmp(&b))
        })
        .expect("at least one repetition");
    let final_confusion = hybrid.confusions[representative]
        .clone()
        .with_class_names(dataset.class_names().to_vec())
        .at(Stage::Evaluation)?;
    let per_class_recall = (0..n_classes).map(|c| final_confusion.class_recall(c).ok()).collect();
    let per_class_recall_mean = (0..n_classes)
        .map(|c| {
            let vals: Vec<f64> = hybrid
                .confusions
                .iter()
                .filter_map(|cm| cm.class_recall(c).ok())
                .collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        })
        .collect();

    let hybrid_dims = (hybrids[0].n_samples(), hybrids[0].n_features());
    let hybrid_origin = hybrids[0].origin.clone();
    let warnings = ranking.warnings();
    Ok(PipelineReport {
        ranking,
        selected_features: selected,
        pc_sweep: sweep,
        chosen_pc_count: k,
        hybrid_dims,
        hybrid_origin,
        hybrid_stats: hybrid.stats,
        final_confusion,
        representative_repetition: representative,
        final_metrics: hybrid.metrics,
        per_class_recall,
        per_class_recall_mean,
        baseline_stats: baseline.stats,
        baseline_metrics: baseline.metrics,
        split_seeds: splits.iter().map(|s| s.seed).collect(),
        warnings,
    })
}
