use crate::config::Common;
use anyhow::{bail, ensure, Context, Result};
use enose_core::data::{
    generate_synthetic, read_csv, read_csv_with_classes, read_recording, write_csv, write_dataset_columns,
    write_recording, LabeledDataset, SynthConfig, AMBIENT_CLASS_NAME,
};
use enose_core::featex::{extract_dataset, extract_recording, FeatureKind, FeatureMatrix, FeatureOrigin};
use enose_core::metrics::ConfusionMatrix;
use enose_core::pca::PcaModel;
use enose_core::pipeline::{
    self, fit_scoped_pca, repetition_splits, write_pc_sweep_csv, write_ranking_csv, write_report_dir, DatasetSource,
    PipelineConfig, SpreadChoice,
};
use enose_core::pnn::{PnnModel, PnnParams};
use enose_core::seed::derive_seed;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

fn check_input(path: &Path) -> Result<()> {
    ensure!(path.is_file(), "input file {} does not exist", path.display());
    Ok(())
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("creating output directory {}", path.display()))
}

/// Opens `path` for writing, or stdout when absent.
fn output_writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                create_dir(parent)?;
            }
            Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("creating {}", p.display()))?,
            ))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn create_file(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    Ok(BufWriter::new(
        File::create(&path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

/// Reads a dataset CSV and applies `--negative-class`.
fn load_dataset(path: &Path, common: &Common) -> Result<LabeledDataset> {
    check_input(path)?;
    let ds = read_csv(path).with_context(|| format!("reading {}", path.display()))?;
    apply_negative_class(ds, common.negative_class.as_deref())
}

fn apply_negative_class(ds: LabeledDataset, name: Option<&str>) -> Result<LabeledDataset> {
    let Some(name) = name else {
        return Ok(ds);
    };
    let id = ds
        .class_id(name)
        .with_context(|| format!("negative class '{name}' is not one of {:?}", ds.class_names()))?;
    Ok(ds.with_negative_class(id)?)
}

/// The input dataset, or a synthetic one built from the effective synth
/// config.
fn dataset_or_synthetic(
    input: Option<&Path>,
    common: &Common,
    synth: &SynthConfig,
) -> Result<(LabeledDataset, DatasetSource)> {
    match input {
        Some(path) => Ok((
            load_dataset(path, common)?,
            DatasetSource::File {
                path: path.display().to_string(),
            },
        )),
        None => {
            let ds = generate_synthetic(synth)
                .context("generating synthetic dataset")?
                .dataset;
            Ok((
                apply_negative_class(ds, common.negative_class.as_deref())?,
                DatasetSource::Synthetic(synth.clone()),
            ))
        }
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, clap::Args)]
pub struct GenerateArgs {
    /// Number of classes including ambient air
    #[arg(long)]
    classes: Option<usize>,
    /// Number of sensors
    #[arg(long)]
    sensors: Option<usize>,
    /// Recordings per material class
    #[arg(long)]
    samples_per_class: Option<usize>,
    /// Ambient-air recordings
    #[arg(long)]
    ambient_samples: Option<usize>,
    /// Scale of the class signatures, in volts
    #[arg(long)]
    separation: Option<f64>,
    /// Noise standard deviation, in volts
    #[arg(long)]
    noise: Option<f64>,
    /// Maximum drift, in volts per timestep
    #[arg(long)]
    drift: Option<f64>,
    /// Samples per recording
    #[arg(long)]
    timesteps: Option<usize>,
    /// Write only dataset.csv
    #[arg(long)]
    no_recordings: bool,
}

pub fn generate(args: &GenerateArgs, common: &Common) -> Result<()> {
    let mut synth = common.resolve()?.synth;
    macro_rules! set {
        ($($field:ident <- $arg:ident),*) => {
            $(if let Some(v) = args.$arg { synth.$field = v; })*
        };
    }
    set!(
        n_classes <- classes,
        n_sensors <- sensors,
        samples_per_material_class <- samples_per_class,
        ambient_samples <- ambient_samples,
        signature_separation <- separation,
        noise_sigma <- noise,
        drift_rate <- drift,
        timesteps <- timesteps
    );
    synth.validate()?;
    let dir = common.output.clone().unwrap_or_else(|| PathBuf::from("."));
    create_dir(&dir)?;

    let out = generate_synthetic(&synth)?;
    let ds = &out.dataset;
    write_csv(ds, dir.join("dataset.csv")).context("writing dataset.csv")?;
    if !args.no_recordings {
        let rec_dir = dir.join("recordings");
        create_dir(&rec_dir)?;
        for (i, rec) in out.recordings.iter().enumerate() {
            let class = &ds.class_names()[rec.class_id()];
            let mut w = create_file(&rec_dir, &format!("{i:04}_{class}.csv"))?;
            write_recording(rec, ds.class_names(), &mut w)?;
            w.flush()?;
        }
    }
    println!(
        "generated N={} D={} K={} -> {}",
        ds.n_samples(),
        ds.n_features(),
        ds.n_classes(),
        dir.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Debug, clap::Args)]
pub struct ExtractArgs {
    /// Dataset CSV or recording CSV (detected from a leading `t` column)
    #[arg(short, long)]
    input: PathBuf,
    /// rlssv, rlv, rssv, rv or fvc
    #[arg(short, long)]
    feature: FeatureKind,
}

fn is_recording(text: &str) -> bool {
    text.lines()
        .find(|l| !l.starts_with('#'))
        .and_then(|header| header.split(',').next())
        .is_some_and(|first| first.trim() == "t")
}

pub fn extract(args: &ExtractArgs, common: &Common) -> Result<()> {
    check_input(&args.input)?;
    let text = fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let kind = args.feature;
    let context = || format!("extracting {kind} from {}", args.input.display());
    let mut w = output_writer(common.output.as_deref())?;

    if is_recording(&text) {
        let mut classes = Vec::new();
        let rec = read_recording(&text, &mut classes).with_context(|| format!("reading {}", args.input.display()))?;
        let values = extract_recording(&rec, kind).with_context(context)?;
        let columns = FeatureMatrix::new(values.clone(), FeatureOrigin::Single(kind)).column_names();
        writeln!(w, "t,{}", columns.join(","))?;
        for (t, row) in values.outer_iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{},{}", t as f64 / rec.sample_rate(), cells.join(","))?;
        }
    } else {
        let ds = load_dataset(&args.input, common)?;
        let fm = extract_dataset(&ds, kind).with_context(context)?;
        let out = ds.with_rows(fm.values.clone())?;
        write_dataset_columns(&out, &fm.column_names(), &mut w)?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Debug, clap::Args)]
pub struct DatasetArgs {
    /// Dataset CSV; a synthetic dataset is generated when omitted
    #[arg(short, long)]
    input: Option<PathBuf>,
    /// Comma-separated feature kinds to consider (default: all five)
    #[arg(long, value_delimiter = ',')]
    features: Vec<FeatureKind>,
    /// Number of top-ranked features to keep
    #[arg(long)]
    top_n: Option<usize>,
}

impl DatasetArgs {
    fn apply(&self, cfg: &mut PipelineConfig) {
        if !self.features.is_empty() {
            cfg.feature_kinds = self.features.clone();
            cfg.top_n_features = cfg.top_n_features.min(self.features.len());
        }
        if let Some(n) = self.top_n {
            cfg.top_n_features = n;
        }
    }
}

fn print_ranking(ranking: &pipeline::Ranking) {
    for (i, r) in ranking.ranked.iter().enumerate() {
        println!(
            "{:>2}. {:<5} mean {:6.2}%  (min {:6.2}, max {:6.2})",
            i + 1,
            r.kind.to_string(),
            r.stats.mean,
            r.stats.min,
            r.stats.max
        );
    }
    for w in ranking.warnings() {
        eprintln!("warning: {w}");
    }
}

pub fn rank_features(args: &DatasetArgs, common: &Common) -> Result<()> {
    let eff = common.resolve()?;
    let mut cfg = eff.pipeline;
    args.apply(&mut cfg);
    cfg.validate()?;
    let (ds, _) = dataset_or_synthetic(args.input.as_deref(), common, &eff.synth)?;
    if let Some(dir) = &common.output {
        create_dir(dir)?;
    }
    let splits = repetition_splits(&ds, &cfg)?;
    let ranking = pipeline::rank_features(&ds, &cfg, &splits)?;
    print_ranking(&ranking);
    if let Some(dir) = &common.output {
        let mut w = create_file(dir, "ranking.csv")?;
        write_ranking_csv(&ranking, cfg.top_n_features, &mut w)?;
        w.flush()?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Debug, clap::Args)]
pub struct PcaSweepArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    /// Sweep these features instead of ranking first
    #[arg(long, value_delimiter = ',')]
    selected: Vec<FeatureKind>,
}

/// PCA for one feature as used outside the repeated protocol: fitted on all
/// rows, or on the training rows of the first repetition's split.
fn standalone_pca(x: &ndarray::Array2<f64>, ds: &LabeledDataset, cfg: &PipelineConfig) -> Result<PcaModel> {
    let split = enose_core::data::split(ds, cfg.fractions, derive_seed(cfg.master_seed, 0))?;
    Ok(fit_scoped_pca(x.view(), &split, cfg.pca_fit_scope)?)
}

pub fn pca_sweep(args: &PcaSweepArgs, common: &Common) -> Result<()> {
    let eff = common.resolve()?;
    let mut cfg = eff.pipeline;
    args.dataset.apply(&mut cfg);
    cfg.validate()?;
    let (ds, _) = dataset_or_synthetic(args.dataset.input.as_deref(), common, &eff.synth)?;
    if let Some(dir) = &common.output {
        create_dir(dir)?;
    }
    let splits = repetition_splits(&ds, &cfg)?;
    let selected = if args.selected.is_empty() {
        let ranking = pipeline::rank_features(&ds, &cfg, &splits)?;
        print_ranking(&ranking);
        ensure!(
            ranking.ranked.len() >= cfg.top_n_features,
            "only {} usable features for top {}",
            ranking.ranked.len(),
            cfg.top_n_features
        );
        ranking.top(cfg.top_n_features)
    } else {
        args.selected.clone()
    };
    let sweep = pipeline::pc_sweep(&ds, &selected, &cfg, &splits)?;
    let mut out = io::stdout().lock();
    write_pc_sweep_csv(&sweep, &mut out)?;
    println!("chosen PC count: {}", sweep.chosen);
    if let Some(dir) = &common.output {
        let mut w = create_file(dir, "pc_sweep.csv")?;
        write_pc_sweep_csv(&sweep, &mut w)?;
        w.flush()?;
        for kind in &selected {
            let fm = extract_dataset(&ds, *kind)?;
            let model = standalone_pca(&fm.values, &ds, &cfg)?;
            let mut w = create_file(dir, &format!("variance_{}.csv", kind.name().to_lowercase()))?;
            model.write_variance_csv(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Debug, clap::Args)]
pub struct FuseArgs {
    /// Dataset CSV
    #[arg(short, long)]
    input: PathBuf,
    /// Comma-separated features, in fusion order
    #[arg(long, value_delimiter = ',', required = true)]
    features: Vec<FeatureKind>,
    /// Principal components kept per feature
    #[arg(long)]
    pcs: usize,
}

pub fn fuse(args: &FuseArgs, common: &Common) -> Result<()> {
    let cfg = common.resolve()?.pipeline;
    let ds = load_dataset(&args.input, common)?;
    let mut scores = Vec::with_capacity(args.features.len());
    for &kind in &args.features {
        let fm = extract_dataset(&ds, kind).with_context(|| format!("extracting {kind}"))?;
        let model = standalone_pca(&fm.values, &ds, &cfg).with_context(|| format!("PCA of {kind}"))?;
        scores.push((
            kind,
            model
                .transform(fm.values.view(), args.pcs)
                .with_context(|| format!("PCA of {kind}"))?,
        ));
    }
    let blocks: Vec<_> = scores.iter().map(|(k, s)| (*k, s.view())).collect();
    let hybrid = pipeline::fuse(&blocks)?;
    let out = ds.with_rows(hybrid.values.clone())?;
    let mut w = output_writer(common.output.as_deref())?;
    write_dataset_columns(&out, &hybrid.column_names(), &mut w)?;
    w.flush()?;
    if common.output.is_some() {
        println!("{} -> {} x {}", hybrid.origin, hybrid.n_samples(), hybrid.n_features());
    }
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Debug, clap::Args)]
pub struct TrainArgs {
    /// Feature CSV (output of `extract` or `fuse`, or a raw dataset)
    #[arg(short, long)]
    input: PathBuf,
}

pub fn train(args: &TrainArgs, common: &Common) -> Result<()> {
    let cfg = common.resolve()?.pipeline;
    let spread = match cfg.spread {
        SpreadChoice::Fixed(s) => s,
        SpreadChoice::Sweep(_) => bail!("train needs a fixed spread; pass --spread"),
    };
    let ds = load_dataset(&args.input, common)?;
    ensure!(
        ds.n_samples() > 0,
        "training file {} has no samples",
        args.input.display()
    );
    let out = common.output.clone().unwrap_or_else(|| PathBuf::from("model.json"));
    let mut w = output_writer(Some(&out))?;
    let params = PnnParams {
        spread,
        tolerance: cfg.tolerance,
        ..PnnParams::default()
    };
    let model =
        PnnModel::fit(ds.rows(), ds.labels(), ds.n_classes(), &params)?.with_class_names(ds.class_names().to_vec());
    model.write_json(&mut w)?;
    w.flush()?;
    println!(
        "trained PNN on {} patterns, {} classes, {} inputs, spread {spread} -> {}",
        ds.n_samples(),
        ds.n_classes(),
        ds.n_features(),
        out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Debug, clap::Args)]
pub struct EvalArgs {
    /// PNN model JSON written by `train`
    #[arg(short, long, requires = "input", conflicts_with = "confusion")]
    model: Option<PathBuf>,
    /// Test CSV with the same columns as the training file
    #[arg(short, long, requires = "model")]
    input: Option<PathBuf>,
    /// Confusion-matrix CSV (rows predicted, columns actual)
    #[arg(long, required_unless_present = "model")]
    confusion: Option<PathBuf>,
}

fn negative_class_of(names: &[String], flag: Option<&str>, declared: Option<usize>) -> Result<usize> {
    if let Some(name) = flag {
        return names
            .iter()
            .position(|n| n == name)
            .with_context(|| format!("negative class '{name}' is not one of {names:?}"));
    }
    if let Some(id) = declared {
        return Ok(id);
    }
    names
        .iter()
        .position(|n| n == AMBIENT_CLASS_NAME)
        .with_context(|| format!("no class named {AMBIENT_CLASS_NAME}; pass --negative-class"))
}

pub fn eval(args: &EvalArgs, common: &Common) -> Result<()> {
    let flag = common.negative_class.as_deref();
    let (cm, negative) = if let Some(path) = &args.confusion {
        check_input(path)?;
        let text = fs::read_to_string(path)?;
        let cm = ConfusionMatrix::read_csv(&text).with_context(|| format!("reading {}", path.display()))?;
        let neg = negative_class_of(cm.class_names(), flag, None)?;
        (cm, neg)
    } else {
        let (model_path, input) = (args.model.as_ref().expect("clap"), args.input.as_ref().expect("clap"));
        check_input(model_path)?;
        check_input(input)?;
        let model = PnnModel::read_json(File::open(model_path)?)
            .with_context(|| format!("reading model {}", model_path.display()))?;
        let text = fs::read_to_string(input)?;
        ensure!(!text.trim().is_empty(), "test file {} is empty", input.display());
        let ds = read_csv_with_classes(input, model.class_names())
            .with_context(|| format!("reading {}", input.display()))?;
        ensure!(ds.n_samples() > 0, "test file {} has no samples", input.display());
        let predicted = model.predict(ds.rows())?;
        let cm = ConfusionMatrix::from_predictions(&predicted, ds.labels(), model.n_classes())?
            .with_class_names(model.class_names().to_vec())?;
        let neg = negative_class_of(model.class_names(), flag, ds.negative_class())?;
        (cm, neg)
    };

    let bc = cm.binary_collapse(negative)?;
    let (se, sp, acc) = (bc.sensitivity()?, bc.specificity()?, bc.accuracy()?);
    let mut w = output_writer(common.output.as_deref())?;
    writeln!(w, "sensitivity,specificity,accuracy,multiclass_accuracy,tp,fp,tn,fn")?;
    writeln!(
        w,
        "{se:.4},{sp:.4},{acc:.4},{:.4},{},{},{},{}",
        cm.accuracy()?,
        bc.tp,
        bc.fp,
        bc.tn,
        bc.fn_
    )?;
    w.flush()?;
    if common.output.is_some() {
        println!(
            "negative class {}: TP={} FP={} TN={} FN={}; sensitivity {se:.2}%, specificity {sp:.2}%, accuracy {acc:.2}%",
            cm.class_names()[negative],
            bc.tp,
            bc.fp,
            bc.tn,
            bc.fn_
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Debug, clap::Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    /// Search the spread on each repetition's validation split instead of fixing it
    #[arg(long, value_delimiter = ',', conflicts_with = "spread")]
    spread_grid: Vec<f64>,
    /// Neighbours for the kNN baseline
    #[arg(long)]
    knn_k: Option<usize>,
    /// Run repetitions on one thread
    #[arg(long)]
    serial: bool,
}

pub fn pipeline(args: &PipelineArgs, common: &Common) -> Result<()> {
    let eff = common.resolve()?;
    let mut cfg = eff.pipeline;
    args.dataset.apply(&mut cfg);
    if !args.spread_grid.is_empty() {
        cfg.spread = SpreadChoice::Sweep(args.spread_grid.clone());
    }
    if let Some(k) = args.knn_k {
        cfg.knn_k = k;
    }
    if args.serial {
        cfg.parallel = false;
    }
    cfg.validate()?;
    let dir = common.output.clone().unwrap_or_else(|| PathBuf::from("report"));
    let (ds, source) = dataset_or_synthetic(args.dataset.input.as_deref(), common, &eff.synth)?;
    create_dir(&dir)?;
    let report = pipeline::run(&ds, &cfg)?;
    write_report_dir(&report, &cfg, Some(&source), &dir)
        .with_context(|| format!("writing report to {}", dir.display()))?;

    print_ranking(&report.ranking);
    let selected: Vec<String> = report.selected_features.iter().map(|k| k.to_string()).collect();
    println!(
        "selected {}; k* = {}; hybrid {} x {}",
        selected.join(", "),
        report.chosen_pc_count,
        report.hybrid_dims.0,
        report.hybrid_dims.1
    );
    let s = report.hybrid_stats;
    println!("hybrid PNN: mean {:.2}% (min {:.2}, max {:.2})", s.mean, s.min, s.max);
    if let Some(m) = report.final_metrics {
        println!(
            "  sensitivity {:.2}%, specificity {:.2}%, accuracy {:.2}%",
            m.sensitivity, m.specificity, m.accuracy
        );
    }
    let b = report.baseline_stats;
    println!(
        "hybrid kNN (k={}): mean {:.2}% (min {:.2}, max {:.2})",
        cfg.knn_k, b.mean, b.min, b.max
    );
    println!("report written to {}", dir.display());
    Ok(())
}
