//! On-disk pipeline report.
//!
//! `write_report_dir` writes `ranking.csv`, `pc_sweep.csv`, `confusion.csv`,
//! `metrics.csv` and `manifest.json`. Output contains no timestamps, so equal
//! inputs and seeds give byte-identical files.

use super::{MeanMetrics, PcSweep, PipelineConfig, PipelineReport, Ranking};
use crate::data::SynthConfig;
use crate::metrics::RepetitionStats;
use serde::Serialize;
use serde_json::json;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

fn stats_cells(s: &RepetitionStats) -> String {
    format!("{:.4},{:.4},{:.4}", s.min, s.max, s.mean)
}

fn metric_cells(m: Option<MeanMetrics>) -> String {
    format!(
        "{},{},{}",
        opt(m.map(|m| m.sensitivity)),
        opt(m.map(|m| m.specificity)),
        opt(m.map(|m| m.accuracy))
    )
}

fn create(dir: &Path, name: &str) -> io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// One row per ranked feature, best first, then excluded features. The first
/// `n_selected` rows are marked `selected`.
pub fn write_ranking_csv<W: Write>(ranking: &Ranking, n_selected: usize, mut w: W) -> io::Result<()> {
    writeln!(
        w,
        "rank,feature,min_accuracy,max_accuracy,mean_accuracy,sensitivity,specificity,fire_accuracy,status"
    )?;
    for (i, r) in ranking.ranked.iter().enumerate() {
        let status = if i < n_selected { "selected" } else { "ranked" };
        writeln!(
            w,
            "{},{},{},{},{status}",
            i + 1,
            r.kind,
            stats_cells(&r.stats),
            metric_cells(r.metrics)
        )?;
    }
    for (kind, _) in &ranking.excluded {
        writeln!(w, ",{kind},,,,,,,excluded")?;
    }
    Ok(())
}

/// Mean accuracy per PC count (rows) and feature (columns), plus the
/// cross-feature mean.
pub fn write_pc_sweep_csv<W: Write>(sweep: &PcSweep, mut w: W) -> io::Result<()> {
    let names: Vec<String> = sweep.features.iter().map(|k| k.to_string()).collect();
    writeln!(w, "pc,{},mean", names.join(","))?;
    let means = sweep.cross_feature_mean();
    for ((k, row), mean) in sweep.pc_counts.iter().zip(&sweep.mean_accuracy).zip(means) {
        let cells: Vec<String> = row.iter().map(|a| format!("{a:.4}")).collect();
        writeln!(w, "{k},{},{mean:.4}", cells.join(","))?;
    }
    Ok(())
}

/// Origin of the dataset, recorded in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DatasetSource {
    Synthetic(SynthConfig),
    File { path: String },
}

pub fn write_report_dir(
    report: &PipelineReport,
    config: &PipelineConfig,
    source: Option<&DatasetSource>,
    dir: &Path,
) -> io::Result<()> {
    fs::create_dir_all(dir)?;

    let mut w = create(dir, "ranking.csv")?;
    write_ranking_csv(&report.ranking, report.selected_features.len(), &mut w)?;
    w.flush()?;

    let mut w = create(dir, "pc_sweep.csv")?;
    write_pc_sweep_csv(&report.pc_sweep, &mut w)?;
    w.flush()?;

    let mut w = create(dir, "confusion.csv")?;
    report.final_confusion.write_csv(&mut w)?;
    w.flush()?;

    let mut w = create(dir, "metrics.csv")?;
    writeln!(
        w,
        "subject,classifier,sensitivity,specificity,fire_accuracy,min_accuracy,max_accuracy,mean_accuracy"
    )?;
    for r in &report.ranking.ranked {
        writeln!(
            w,
            "{},PNN,{},{}",
            r.kind,
            metric_cells(r.metrics),
            stats_cells(&r.stats)
        )?;
    }
    writeln!(
        w,
        "hybrid,PNN,{},{}",
        metric_cells(report.final_metrics),
        stats_cells(&report.hybrid_stats)
    )?;
    writeln!(
        w,
        "hybrid,kNN,{},{}",
        metric_cells(report.baseline_metrics),
        stats_cells(&report.baseline_stats)
    )?;
    w.flush()?;

    let class_names = report.final_confusion.class_names();
    let recall: serde_json::Map<String, serde_json::Value> = class_names
        .iter()
        .zip(&report.per_class_recall)
        .zip(&report.per_class_recall_mean)
        .map(|((name, single), mean)| (name.clone(), json!({ "representative": single, "mean": mean })))
        .collect();
    let manifest = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "dataset": source,
        "split_seeds": report.split_seeds,
        "selected_features": report.selected_features,
        "chosen_pc_count": report.chosen_pc_count,
        "hybrid": report.hybrid_origin.to_string(),
        "hybrid_dims": [report.hybrid_dims.0, report.hybrid_dims.1],
        "representative_repetition": report.representative_repetition,
        "class_recall": recall,
        "warnings": report.warnings,
    });
    let mut w = create(dir, "manifest.json")?;
    serde_json::to_writer_pretty(&mut w, &manifest)?;
    writeln!(w)?;
    w.flush()
}
