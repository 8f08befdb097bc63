//! Gas-sensor odour classification for incipient fire detection.
//!
//! The crate covers the whole chain from raw sensor-array voltages to fire
//! detection metrics:
//!
//! * [`data`]: datasets, odour recordings, stratified splits, CSV files and a
//!   seeded synthetic odour generator.
//! * [`featex`]: the five baseline-correction features (RLSSV, RLV, RSSV, RV,
//!   FVC) and the reduction of a recording to a single response vector.
//! * [`pca`]: covariance PCA with latent/proportion/cumulative accounting.
//! * [`pnn`]: the probabilistic neural network (Parzen window) classifier.
//! * [`knn`]: brute-force k-nearest-neighbour baseline.
//! * [`metrics`]: confusion matrices, the fire/no-fire collapse and
//!   sensitivity/specificity/accuracy.
//! * [`pipeline`]: feature ranking, PC-count sweep, fusion into a hybrid
//!   feature and the final repeated evaluation.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod featex;
pub mod knn;
pub mod metrics;
pub mod pca;
pub mod pipeline;
pub mod pnn;
pub mod seed;

pub use data::{LabeledDataset, OdourRecording, SplitFractions, SplitIndices, SynthConfig};
pub use featex::{FeatureKind, FeatureMatrix, FeatureOrigin};
pub use knn::KnnModel;
pub use metrics::{BinaryCollapse, ConfusionMatrix, RepetitionStats};
pub use pca::PcaModel;
pub use pipeline::{PipelineConfig, PipelineReport};
pub use pnn::{PnnDecision, PnnModel, PnnParams};
