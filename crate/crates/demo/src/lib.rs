//! Browser bindings for the interactive demo page in `www/`.
//!
//! Every export returns a JSON string. Failures come back as
//! `{"error": "..."}` so the page can show them next to the control that
//! caused them.

use otood_core::baselines::{knn_scores, mahalanobis_fit, mahalanobis_scores, DEFAULT_SHRINKAGE};
use otood_core::ot::sinkhorn_weights;
use otood_core::pipeline::metrics_for;
use otood_core::scoring::score_plan;
use otood_core::{
    cosine_cost_matrix, gen_synthetic, score_features, FeatureMatrix, Label, MetricsReport,
    OtError, RunConfig, SinkhornConfig, SynthConfig, TprOn,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Sides above this make the heatmap unreadable.
pub const MAX_PLAN_SIDE: usize = 40;
const HISTOGRAM_BINS: usize = 24;

#[derive(Debug, Serialize, PartialEq)]
pub struct Metrics {
    pub auroc: f64,
    pub aupr: f64,
    pub fpr95: f64,
}

impl From<MetricsReport> for Metrics {
    fn from(r: MetricsReport) -> Self {
        Self {
            auroc: r.auroc,
            aupr: r.aupr,
            fpr95: r.fpr95,
        }
    }
}

#[derive(Debug, Serialize, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub id: Vec<usize>,
    pub ood: Vec<usize>,
}

#[derive(Debug, Serialize)]
pub struct Detection {
    pub n_train: usize,
    pub log_n: f64,
    pub transport: Metrics,
    pub knn: Metrics,
    pub mahalanobis: Metrics,
    pub histogram: Histogram,
    pub unconverged_batches: usize,
}

#[derive(Debug, Serialize)]
pub struct PlanView {
    pub n: usize,
    pub m: usize,
    /// Row-major plan entries.
    pub plan: Vec<f64>,
    pub train_angles: Vec<f64>,
    pub test_angles: Vec<f64>,
    pub scores: Vec<f64>,
    pub log_n: f64,
    pub iterations: usize,
    pub converged: bool,
    pub log_domain: bool,
}

#[derive(Debug, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub auroc: f64,
    pub mean_score: f64,
    pub max_gap_to_log_n: f64,
}

#[derive(Debug, Serialize)]
pub struct Sweep {
    pub log_n: f64,
    pub rows: Vec<SweepRow>,
}

fn to_json<T: Serialize>(r: Result<T, OtError>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| error_json(&e.to_string())),
        Err(e) => error_json(&e.to_string()),
    }
}

fn error_json(msg: &str) -> String {
    serde_json::json!({ "error": msg }).to_string()
}

/// Fixture sized for interactive use.
fn demo_fixture(separation: f64, seed: u64) -> SynthConfig {
    SynthConfig {
        n_train: 300,
        n_id: 100,
        n_ood: 100,
        dim: 16,
        separation,
        seed,
        ..SynthConfig::default()
    }
}

fn histogram(scores: &[f64], labels: &[Label]) -> Histogram {
    let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo).max(1e-12) / HISTOGRAM_BINS as f64;
    let mut id = vec![0; HISTOGRAM_BINS];
    let mut ood = vec![0; HISTOGRAM_BINS];
    for (s, l) in scores.iter().zip(labels) {
        let bin = (((s - lo) / width) as usize).min(HISTOGRAM_BINS - 1);
        match l {
            Label::Id => id[bin] += 1,
            Label::Ood => ood[bin] += 1,
        }
    }
    Histogram { lo, hi, id, ood }
}

pub fn detect_report(separation: f64, lambda: f64, batch_size: usize, seed: u64) -> Result<Detection, OtError> {
    let f = gen_synthetic(&demo_fixture(separation, seed))?;
    let (train, test) = (f.train.expect("nonempty"), f.test.expect("nonempty"));
    let cfg = RunConfig {
        sinkhorn: SinkhornConfig::with_lambda(lambda),
        batch_size: (batch_size > 0).then_some(batch_size),
        ..RunConfig::default()
    };
    let ot = score_features(&train, &test, &cfg)?;
    let knn = knn_scores(&train, &test, 10)?;
    let maha = mahalanobis_scores(&mahalanobis_fit(&train, DEFAULT_SHRINKAGE)?, &test)?;
    let metrics = |s: &[f64]| metrics_for(s, &f.labels, TprOn::Ood).map(Metrics::from);
    Ok(Detection {
        n_train: train.n_rows(),
        log_n: (train.n_rows() as f64).ln(),
        transport: metrics(&ot.scores)?,
        knn: metrics(&knn)?,
        mahalanobis: metrics(&maha)?,
        histogram: histogram(&ot.scores, &f.labels),
        unconverged_batches: ot.unconverged_batches().count(),
    })
}

/// Points on the unit circle, so the plan can be drawn against angles.
fn circle(angles: &[f64]) -> Result<FeatureMatrix, OtError> {
    let rows: Vec<[f64; 2]> = angles.iter().map(|a| [a.cos(), a.sin()]).collect();
    FeatureMatrix::from_rows(&rows)
}

/// Seeded angles: each point falls in one of `arcs` (center, width).
fn angles(count: usize, seed: u64, arcs: &[(f64, f64)]) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<f64> = (0..count)
        .map(|k| {
            let (center, width) = arcs[k % arcs.len()];
            center + width * rng.random_range(-0.5..0.5)
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

pub fn plan_view(n: usize, m: usize, lambda: f64, seed: u64) -> Result<PlanView, OtError> {
    if n == 0 || m == 0 || n > MAX_PLAN_SIDE || m > MAX_PLAN_SIDE {
        return Err(OtError::Config(format!(
            "sides must lie in 1..={MAX_PLAN_SIDE}, got {n}x{m}"
        )));
    }
    let train_angles = angles(n, seed, &[(0.6, 0.8), (2.4, 0.8)]);
    let test_angles = angles(m, seed ^ 0x9e37, &[(0.6, 0.6), (2.4, 0.6), (4.7, 0.5)]);
    let cost = cosine_cost_matrix(&circle(&train_angles)?, &circle(&test_angles)?)?;
    let a = vec![1.0 / n as f64; n];
    let b = vec![1.0 / m as f64; m];
    let plan = sinkhorn_weights(&a, &b, &cost, &SinkhornConfig::with_lambda(lambda), None)?;
    Ok(PlanView {
        n,
        m,
        scores: score_plan(&plan)?,
        plan: plan.as_slice().to_vec(),
        train_angles,
        test_angles,
        log_n: (n as f64).ln(),
        iterations: plan.iterations,
        converged: plan.converged,
        log_domain: plan.log_domain,
    })
}

/// Log-spaced lambdas from 0.02 to 100.
pub fn sweep_lambdas() -> Vec<f64> {
    let decades = 5000f64.log10();
    (0..=12).map(|k| 0.02 * 10f64.powf(decades * k as f64 / 12.0)).collect()
}

pub fn sweep_report(separation: f64, seed: u64) -> Result<Sweep, OtError> {
    let f = gen_synthetic(&demo_fixture(separation, seed))?;
    let (train, test) = (f.train.expect("nonempty"), f.test.expect("nonempty"));
    let log_n = (train.n_rows() as f64).ln();
    let rows = sweep_lambdas()
        .into_iter()
        .map(|lambda| {
            let cfg = RunConfig {
                sinkhorn: SinkhornConfig::with_lambda(lambda),
                ..RunConfig::default()
            };
            let scores = score_features(&train, &test, &cfg)?.scores;
            Ok(SweepRow {
                lambda,
                auroc: metrics_for(&scores, &f.labels, TprOn::Ood)?.auroc,
                mean_score: scores.iter().sum::<f64>() / scores.len() as f64,
                max_gap_to_log_n: scores.iter().map(|s| (s - log_n).abs()).fold(0.0, f64::max),
            })
        })
        .collect::<Result<_, OtError>>()?;
    Ok(Sweep { log_n, rows })
}

/// Scores a synthetic fixture with the transport score and both baselines.
/// `batch_size = 0` scores every test input in one problem.
#[wasm_bindgen]
pub fn detect(separation: f64, lambda: f64, batch_size: usize, seed: u32) -> String {
    to_json(detect_report(separation, lambda, batch_size, seed.into()))
}

/// Transport plan between points on a circle, for the heatmap.
#[wasm_bindgen]
pub fn transport_plan(n: usize, m: usize, lambda: f64, seed: u32) -> String {
    to_json(plan_view(n, m, lambda, seed.into()))
}

/// AUROC and distance to `log N` across regularization strengths.
#[wasm_bindgen]
pub fn lambda_sweep(separation: f64, seed: u32) -> String {
    to_json(sweep_report(separation, seed.into()))
}
