//! Acceptance suite. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! exits nonzero if any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use enose_core::data::{generate_synthetic, OdourRecording, SynthConfig};
use enose_core::featex::{self, FeatureKind};
use enose_core::knn::KnnModel;
use enose_core::metrics::ConfusionMatrix;
use enose_core::pca::PcaModel;
use enose_core::pipeline::{run, write_report_dir, PipelineConfig, PipelineReport};
use enose_core::pnn::{PnnModel, PnnParams};
use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use std::panic::{catch_unwind, AssertUnwindSafe};

type Outcome = Result<String, String>;
type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

// ---------------------------------------------------------------------------
// 1. Metric arithmetic

const REFERENCE_CONFUSION: [[u64; 9]; 9] = [
    [40, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 39, 0, 0, 0, 1, 0, 0, 0],
    [0, 0, 40, 0, 0, 0, 0, 0, 0],
    [0, 0, 1, 39, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 39, 0, 1, 0, 0],
    [1, 0, 0, 0, 0, 39, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 40, 0, 0],
    [0, 0, 0, 0, 0, 0, 1, 39, 0],
    [0, 0, 0, 2, 0, 0, 0, 0, 78],
];

fn metric_arithmetic() -> Outcome {
    let rows: Vec<Vec<u64>> = REFERENCE_CONFUSION.iter().map(|r| r.to_vec()).collect();
    let cm = ConfusionMatrix::from_rows(&rows).map_err(|e| e.to_string())?;
    let bc = cm.binary_collapse(8).map_err(|e| e.to_string())?;
    ensure!(
        (bc.tp, bc.fp, bc.tn, bc.fn_) == (315, 5, 78, 2),
        "collapse gave TP={} FP={} TN={} FN={}",
        bc.tp,
        bc.fp,
        bc.tn,
        bc.fn_
    );
    let (se, sp, acc) = (
        bc.sensitivity().unwrap(),
        bc.specificity().unwrap(),
        bc.accuracy().unwrap(),
    );
    ensure!(
        close(se, 99.37, 0.005) && close(sp, 93.98, 0.005) && close(acc, 98.25, 0.005),
        "metrics {se:.4}/{sp:.4}/{acc:.4}"
    );

    let mut perfect = vec![vec![0u64; 9]; 9];
    for (c, row) in perfect.iter_mut().enumerate() {
        row[c] = if c == 8 { 80 } else { 40 };
    }
    let bc8 = ConfusionMatrix::from_rows(&perfect)
        .unwrap()
        .binary_collapse(8)
        .unwrap();
    let m8 = (
        bc8.sensitivity().unwrap(),
        bc8.specificity().unwrap(),
        bc8.accuracy().unwrap(),
    );
    ensure!(m8 == (100.0, 100.0, 100.0), "perfect matrix gave {m8:?}");
    Ok(format!(
        "TP=315 FP=5 TN=78 FN=2, {se:.4}/{sp:.4}/{acc:.4} vs 99.37/93.98/98.25; perfect matrix 100/100/100"
    ))
}

// ---------------------------------------------------------------------------
// 2. Variance tables

const SPECTRUM_8_LATENT: [f64; 8] = [0.1064, 0.0474, 0.0335, 0.0144, 0.0096, 0.0073, 0.0019, 0.0007];
const SPECTRUM_8_PROPORTION: [f64; 8] = [0.4813, 0.2141, 0.1517, 0.0650, 0.0435, 0.0329, 0.0085, 0.0030];
const SPECTRUM_10_LATENT: [f64; 10] = [
    7.8692, 3.5164, 1.8546, 0.7612, 0.4236, 0.2476, 0.0461, 0.0176, 0.0041, 0.0015,
];
const SPECTRUM_10_PROPORTION: [f64; 10] = [
    0.5338, 0.2385, 0.1258, 0.0516, 0.0287, 0.0170, 0.0030, 0.0012, 0.0003, 0.0001,
];

/// Data whose sample covariance is exactly `Q diag(latent) Qᵀ` for a random
/// orthogonal `Q`: random rows are whitened, scaled and rotated.
fn data_with_spectrum(latent: &[f64], n: usize, seed: u64) -> Array2<f64> {
    let d = latent.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = DMatrix::from_fn(n, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mean = z.row_mean();
    let mut centered = z.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    let cov = centered.transpose() * &centered / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    let whitener = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose();
    let q = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal))
        .qr()
        .q();
    let scale = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(d, latent.iter().map(|l| l.sqrt())));
    let x = centered * whitener * scale * q.transpose();
    Array2::from_shape_fn((n, d), |(i, j)| x[(i, j)] + 1.0)
}

fn variance_tables() -> Outcome {
    // structural law on arbitrary data
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let d = rng.random_range(1..10);
        let x = Array2::from_shape_fn((50, d), |_| rng.random_range(-1.0..1.0))
            .dot(&Array2::from_shape_fn((d, d), |_| rng.random_range(-1.0..1.0)));
        let m = PcaModel::fit(x.view()).map_err(|e| e.to_string())?;
        let mut running = 0.0;
        for row in m.variance_table() {
            running += row.proportion;
            ensure!(
                close(running, row.cumulative, 1e-9),
                "cumulative drift at PC{}",
                row.component
            );
        }
        ensure!(
            close(m.cumulative()[d - 1], 1.0, 1e-9),
            "final cumulative {}",
            m.cumulative()[d - 1]
        );
    }

    let mut worst = 0.0f64;
    for (latent, expected, seed) in [
        (&SPECTRUM_8_LATENT[..], &SPECTRUM_8_PROPORTION[..], 21u64),
        (&SPECTRUM_10_LATENT[..], &SPECTRUM_10_PROPORTION[..], 31u64),
    ] {
        let x = data_with_spectrum(latent, 400, seed);
        let m = PcaModel::fit(x.view()).map_err(|e| e.to_string())?;
        for (i, (&got, &want)) in m.latent().iter().zip(latent).enumerate() {
            ensure!(close(got, want, 1e-9 * latent[0]), "PC{} latent {got} != {want}", i + 1);
        }
        for (i, (&got, &want)) in m.proportion().iter().zip(expected).enumerate() {
            worst = worst.max((got - want).abs());
            ensure!(
                close(got, want, 0.0005),
                "PC{} proportion {got:.5} vs expected {want}",
                i + 1
            );
        }
        ensure!(
            close(m.cumulative()[latent.len() - 1], 1.0, 1e-9),
            "final cumulative not 1"
        );
    }
    Ok(format!(
        "cumsum law on 20 fits; reference spectra proportions within {worst:.5}"
    ))
}

// ---------------------------------------------------------------------------
// 3. PNN vs Bayes rule

/// Mixture density with compensated summation.
fn mixture_density(points: &[f64], x: f64, sigma: f64) -> f64 {
    let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * sigma * points.len() as f64);
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for p in points {
        let term = (-(x - p).powi(2) / (2.0 * sigma * sigma)).exp();
        let t = sum + term;
        comp += if sum.abs() >= term.abs() {
            (sum - t) + term
        } else {
            (term - t) + sum
        };
        sum = t;
    }
    norm * (sum + comp)
}

fn pnn_bayes_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a: Vec<f64> = (0..10)
        .map(|_| Normal::new(0.0, 1.0).unwrap().sample(&mut rng))
        .collect();
    let b: Vec<f64> = (0..10)
        .map(|_| Normal::new(5.0, 1.0).unwrap().sample(&mut rng))
        .collect();
    let x = Array2::from_shape_vec((20, 1), a.iter().chain(&b).copied().collect()).unwrap();
    let labels: Vec<usize> = (0..20).map(|i| i / 10).collect();
    let model = PnnModel::fit(x.view(), &labels, 2, &PnnParams::with_spread(1.0)).map_err(|e| e.to_string())?;
    let mut disagreements = 0;
    for i in 0..=100 {
        let q = -3.0 + 11.0 * i as f64 / 100.0;
        let oracle = usize::from(mixture_density(&b, q, 1.0) > mixture_density(&a, q, 1.0));
        if model.classify(&[q]).map_err(|e| e.to_string())?.predicted_class != oracle {
            disagreements += 1;
        }
    }
    ensure!(disagreements == 0, "{disagreements} disagreements");
    Ok("101 grid queries on [-3, 8], 0 disagreements".into())
}

// ---------------------------------------------------------------------------
// 4. Dot-product pattern units

fn unit_form_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(1..10);
        let sigma = rng.random_range(0.1..2.0);
        let mut unit = || {
            let v: Array1<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let norm = v.dot(&v).sqrt();
            v / norm
        };
        let (w, x) = (unit(), unit());
        let model = PnnModel::fit(w.view().insert_axis(Axis(0)), &[0], 1, &PnnParams::with_spread(sigma))
            .map_err(|e| e.to_string())?;
        let z = model
            .pattern_unit_form(x.as_slice().unwrap())
            .map_err(|e| e.to_string())?[0];
        let kernel = (-(&x - &w).mapv(|v| v * v).sum() / (2.0 * sigma * sigma)).exp();
        worst = worst.max((z - kernel).abs());
    }
    ensure!(worst <= 1e-12, "max deviation {worst:e}");
    Ok(format!("100 pairs, max |Z_out - kernel| = {worst:.1e}"))
}

// ---------------------------------------------------------------------------
// 5. PCA numerics

fn pca_numerics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let d = 8;
    let x = Array2::from_shape_fn((300, d), |_| rng.sample::<f64, _>(StandardNormal))
        .dot(&Array2::from_shape_fn((d, d), |_| rng.random_range(-1.0..1.0)));
    let m = PcaModel::fit(x.view()).map_err(|e| e.to_string())?;

    let gram = m.loadings().t().dot(m.loadings());
    let ortho = gram
        .indexed_iter()
        .map(|((i, j), v)| (v - if i == j { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max);
    ensure!(ortho <= 1e-9, "orthonormality error {ortho:e}");

    let scores = m.transform(x.view(), d).map_err(|e| e.to_string())?;
    let back = m.inverse_transform(scores.view()).map_err(|e| e.to_string())?;
    let recon = (&x - &back).iter().map(|v| v.abs()).fold(0.0, f64::max);
    ensure!(recon <= 1e-9, "reconstruction error {recon:e}");

    let c = &scores - &scores.mean_axis(Axis(0)).unwrap();
    let cov = c.t().dot(&c) / (scores.nrows() as f64 - 1.0);
    let off = cov
        .indexed_iter()
        .filter(|((i, j), _)| i != j)
        .map(|(_, v)| v.abs())
        .fold(0.0, f64::max);
    ensure!(off < 1e-6 * m.latent()[0], "off-diagonal score covariance {off:e}");

    let shift = Array1::from_shape_fn(d, |_| rng.random_range(-10.0..10.0));
    let moved = &x + &shift;
    let moved_scores = PcaModel::fit(moved.view()).unwrap().transform(moved.view(), d).unwrap();
    let trans = (&scores - &moved_scores).iter().map(|v| v.abs()).fold(0.0, f64::max);
    ensure!(trans <= 1e-9, "translation drift {trans:e}");
    Ok(format!(
        "orthonormality {ortho:.1e}, reconstruction {recon:.1e}, off-diagonal {off:.1e}, translation {trans:.1e}"
    ))
}

// ---------------------------------------------------------------------------
// 6. kNN vs exhaustive search

fn knn_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let train = Array2::from_shape_fn((100, 4), |_| rng.random_range(-1.0..1.0));
    let labels: Vec<usize> = (0..100).map(|_| rng.random_range(0..5)).collect();
    let model = KnnModel::fit(train.view(), &labels, 3).map_err(|e| e.to_string())?;
    let mut mismatches = 0;
    for _ in 0..200 {
        let q: Vec<f64> = (0..4).map(|_| rng.random_range(-1.2..1.2)).collect();
        let mut d: Vec<(f64, usize)> = train
            .outer_iter()
            .enumerate()
            .map(|(i, r)| (r.iter().zip(&q).map(|(a, b)| (a - b).powi(2)).sum(), i))
            .collect();
        d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let mut votes = [0; 5];
        for &(_, i) in &d[..3] {
            votes[labels[i]] += 1;
        }
        let top = *votes.iter().max().unwrap();
        let expected = d[..3]
            .iter()
            .map(|&(_, i)| labels[i])
            .find(|&c| votes[c] == top)
            .unwrap();
        if model.classify(&q).map_err(|e| e.to_string())? != expected {
            mismatches += 1;
        }
    }
    ensure!(mismatches == 0, "{mismatches} mismatches");
    Ok("200 queries, k=3, 0 mismatches".into())
}

// ---------------------------------------------------------------------------
// 7. End-to-end pipeline

fn default_config() -> PipelineConfig {
    PipelineConfig {
        master_seed: 2024,
        ..PipelineConfig::default()
    }
}

fn end_to_end(first: &PipelineReport) -> Outcome {
    let synth = SynthConfig::default();
    let dataset = generate_synthetic(&synth).map_err(|e| e.to_string())?.dataset;
    ensure!(
        (dataset.n_samples(), dataset.n_features(), dataset.n_classes()) == (1000, 8, 9),
        "dataset shape"
    );
    let second = run(&dataset, &default_config()).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    write_report_dir(first, &default_config(), None, &dir.path().join("a")).map_err(|e| e.to_string())?;
    write_report_dir(&second, &default_config(), None, &dir.path().join("b")).map_err(|e| e.to_string())?;
    for name in [
        "ranking.csv",
        "pc_sweep.csv",
        "confusion.csv",
        "metrics.csv",
        "manifest.json",
    ] {
        let a = std::fs::read(dir.path().join("a").join(name)).map_err(|e| e.to_string())?;
        let b = std::fs::read(dir.path().join("b").join(name)).map_err(|e| e.to_string())?;
        ensure!(a == b, "(a) {name} differs between reruns");
    }

    let k = first.chosen_pc_count;
    ensure!(
        first.hybrid_dims == (1000, 3 * k),
        "(b) hybrid dims {:?} for k*={k}",
        first.hybrid_dims
    );

    let hybrid = first.hybrid_stats.mean;
    ensure!(hybrid >= 95.0, "(c) hybrid mean accuracy {hybrid:.3}% < 95%");

    let best = first.ranking.ranked[0].stats.mean;
    ensure!(
        hybrid >= best - 1.0,
        "(d) hybrid {hybrid:.3}% below best single {best:.3}% - 1pp"
    );
    Ok(format!(
        "byte-identical reruns; k*={k}, hybrid {:?}; hybrid mean {hybrid:.3}% vs best single ({}) {best:.3}%",
        first.hybrid_dims, first.ranking.ranked[0].kind
    ))
}

// ---------------------------------------------------------------------------
// 8. Feature formulas

fn all_close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| close(*x, *y, tol))
}

fn feature_formulas() -> Outcome {
    let oracle = 10f64.ln() / 200f64.ln();
    ensure!(
        all_close(&featex::rlssv(&[10.0, 10.0]).unwrap(), &[oracle, oracle], 1e-4),
        "rlssv [10,10]"
    );
    ensure!(all_close(&featex::rlssv(&[10.0]).unwrap(), &[0.5], 1e-12), "rlssv [10]");
    ensure!(featex::rlssv(&[0.0, 1.0]).is_err(), "rlssv zero voltage");
    ensure!(all_close(&featex::rlv(&[10.0]).unwrap(), &[0.1], 1e-12), "rlv [10]");
    ensure!(all_close(&featex::rlv(&[1.0]).unwrap(), &[0.0], 1e-12), "rlv [1]");
    ensure!(
        all_close(&featex::rlv(&[100.0, 10.0]).unwrap(), &[0.02, 0.1], 1e-12),
        "rlv [100,10]"
    );
    ensure!(
        all_close(&featex::rssv(&[3.0, 4.0]).unwrap(), &[0.6, 0.8], 1e-12),
        "rssv [3,4]"
    );
    ensure!(all_close(&featex::rssv(&[5.0]).unwrap(), &[1.0], 1e-12), "rssv [5]");
    ensure!(
        all_close(&featex::rssv(&[1.0; 4]).unwrap(), &[0.5; 4], 1e-12),
        "rssv ones"
    );
    ensure!(
        all_close(&featex::rv(&[1.5, 2.5], &[1.5, 2.5]).unwrap(), &[1.0, 1.0], 1e-12),
        "rv v=v0"
    );
    ensure!(
        all_close(&featex::rv(&[2.2], &[1.1]).unwrap(), &[2.0], 1e-12),
        "rv [2.2]/[1.1]"
    );
    ensure!(featex::rv(&[1.0, 1.0], &[1.0, 0.0]).is_err(), "rv zero baseline");
    ensure!(
        all_close(&featex::fvc(&[1.5, 2.5], &[1.5, 2.5]).unwrap(), &[0.0, 0.0], 1e-12),
        "fvc v=v0"
    );
    ensure!(
        all_close(&featex::fvc(&[0.5], &[1.0]).unwrap(), &[0.5], 1e-12),
        "fvc [0.5]"
    );
    ensure!(
        all_close(&featex::fvc(&[2.0], &[1.0]).unwrap(), &[-1.0], 1e-12),
        "fvc [2.0]"
    );

    let flat =
        OdourRecording::new(Array2::from_elem((20, 3), 1.7), Some(vec![1.7; 3]), 10.0, 0).map_err(|e| e.to_string())?;
    ensure!(
        featex::extract_recording(&flat, FeatureKind::Fvc)
            .unwrap()
            .iter()
            .all(|v| *v == 0.0),
        "flat recording FVC"
    );
    ensure!(
        featex::extract_recording(&flat, FeatureKind::Rv)
            .unwrap()
            .iter()
            .all(|v| *v == 1.0),
        "flat recording RV"
    );

    let constant = Array2::from_elem((30, 2), 3.25);
    ensure!(
        all_close(
            &featex::response_point(constant.view(), 0.3).unwrap(),
            &[3.25, 3.25],
            1e-12
        ),
        "constant window"
    );
    let ramp = Array2::from_shape_fn((10, 1), |(t, _)| t as f64);
    ensure!(
        all_close(&featex::response_point(ramp.view(), 0.1).unwrap(), &[9.0], 0.0),
        "T=10 window"
    );
    let (t_len, tau, asymptote) = (150, 25.0, 2.0);
    let rise = Array2::from_shape_fn((t_len, 1), |(t, _)| asymptote * (1.0 - (-(t as f64) / tau).exp()));
    let rp = featex::response_point(rise.view(), featex::DEFAULT_RESPONSE_WINDOW).unwrap()[0];
    ensure!((rp - asymptote).abs() <= 0.01 * asymptote, "exponential window {rp}");

    let out = generate_synthetic(&SynthConfig {
        noise_sigma: 0.0,
        samples_per_material_class: 2,
        ambient_samples: 2,
        ..SynthConfig::default()
    })
    .map_err(|e| e.to_string())?;
    let mut worst_norm = 0.0f64;
    for rec in &out.recordings {
        for row in featex::extract_recording(rec, FeatureKind::Rssv).unwrap().outer_iter() {
            worst_norm = worst_norm.max((row.dot(&row).sqrt() - 1.0).abs());
        }
    }
    ensure!(worst_norm <= 1e-12, "RSSV norm error {worst_norm:e}");

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_fvc = 0.0f64;
    for _ in 0..1000 {
        let v: Vec<f64> = (0..8).map(|_| rng.random_range(0.1..5.0)).collect();
        let b: Vec<f64> = (0..8).map(|_| rng.random_range(0.5..3.0)).collect();
        let f = featex::fvc(&v, &b).unwrap();
        let r = featex::rv(&v, &b).unwrap();
        for (x, y) in f.iter().zip(&r) {
            worst_fvc = worst_fvc.max((x - (1.0 - y)).abs());
        }
    }
    ensure!(worst_fvc <= 1e-12, "fvc = 1 - rv error {worst_fvc:e}");
    Ok(format!(
        "all examples pass; RSSV norm error {worst_norm:.1e}; fvc vs 1-rv {worst_fvc:.1e}; rlssv([10,10]) = {oracle:.5}"
    ))
}

// ---------------------------------------------------------------------------
// 9. Repetition protocol

fn repetition_protocol(parallel: &PipelineReport) -> Outcome {
    let dataset = generate_synthetic(&SynthConfig::default())
        .map_err(|e| e.to_string())?
        .dataset;
    ensure!(parallel.hybrid_stats.n_repetitions == 50, "expected 50 repetitions");
    let mut all = vec![parallel.hybrid_stats, parallel.baseline_stats];
    all.extend(parallel.ranking.ranked.iter().map(|r| r.stats));
    for s in &all {
        ensure!(s.min <= s.mean && s.mean <= s.max, "stats out of order: {s:?}");
    }
    let serial = run(
        &dataset,
        &PipelineConfig {
            parallel: false,
            ..default_config()
        },
    )
    .map_err(|e| e.to_string())?;
    ensure!(&serial == parallel, "serial and parallel reports differ");
    Ok(format!(
        "{} stat blocks ordered; serial re-execution identical",
        all.len()
    ))
}

// ---------------------------------------------------------------------------

fn main() {
    let pipeline = catch_unwind(|| {
        let dataset = generate_synthetic(&SynthConfig::default())
            .expect("synthetic dataset")
            .dataset;
        run(&dataset, &default_config())
    });
    let pipeline: Result<PipelineReport, String> = match pipeline {
        Ok(Ok(r)) => Ok(r),
        Ok(Err(e)) => Err(e.to_string()),
        Err(_) => Err("pipeline panicked".into()),
    };
    let pipeline = &pipeline;
    let with_report = |f: fn(&PipelineReport) -> Outcome| -> Check<'_> {
        Box::new(move || {
            pipeline
                .as_ref()
                .map_err(|e| format!("pipeline failed: {e}"))
                .and_then(f)
        })
    };

    let criteria: Vec<(&str, Check<'_>)> = vec![
        ("1 metric arithmetic reproduction", Box::new(metric_arithmetic)),
        ("2 variance-table consistency", Box::new(variance_tables)),
        ("3 PNN Bayes-oracle equivalence", Box::new(pnn_bayes_oracle)),
        ("4 dot-product pattern-unit identity", Box::new(unit_form_identity)),
        ("5 PCA numerics", Box::new(pca_numerics)),
        ("6 kNN brute-force equivalence", Box::new(knn_oracle)),
        ("7 end-to-end pipeline", with_report(end_to_end)),
        ("8 feature formula suite", Box::new(feature_formulas)),
        ("9 repetition protocol", with_report(repetition_protocol)),
    ];

    let mut failed = 0;
    for (name, check) in &criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
