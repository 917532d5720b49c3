//! End-to-end scoring: read features, split the test set into batches,
//! transport each batch against the full training set, and optionally
//! evaluate against labels.
//!
//! Every batch gets its own uniform test measure, so a score depends on which
//! other inputs share its batch. Scores are always returned in input order.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baselines::{knn_scores, mahalanobis_fit, mahalanobis_scores};
use crate::error::{OtError, Result};
use crate::eval::{evaluate, Label, LabeledScores, MetricsReport, TprOn};
use crate::io::{read_features, read_labels, ScoreRow};
use crate::measure::{EmpiricalMeasure, FeatureMatrix};
use crate::ot::SinkhornConfig;
use crate::scoring::{score_batch, PlanDiagnostics};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sinkhorn: SinkhornConfig,
    /// Test inputs per transport problem; `None` scores everything at once.
    pub batch_size: Option<usize>,
    /// L2-normalize rows on read.
    pub normalize: bool,
    /// Shuffle test rows before batching.
    pub shuffle: bool,
    pub seed: u64,
    pub tpr_on: TprOn,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sinkhorn: SinkhornConfig::default(),
            batch_size: None,
            normalize: true,
            shuffle: false,
            seed: 0,
            tpr_on: TprOn::Ood,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == Some(0) {
            return Err(OtError::Config("batch size must be at least 1".into()));
        }
        self.sinkhorn.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchReport {
    /// Input indices scored together.
    pub members: Vec<usize>,
    pub diag: PlanDiagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineScores {
    /// One score per test row, input order.
    pub scores: Vec<f64>,
    /// Convergence flag of the batch each row belonged to.
    pub converged: Vec<bool>,
    pub batches: Vec<BatchReport>,
}

impl PipelineScores {
    pub fn rows(&self) -> Vec<ScoreRow> {
        self.scores
            .iter()
            .zip(&self.converged)
            .enumerate()
            .map(|(index, (&score, &converged))| ScoreRow {
                index,
                score,
                converged,
            })
            .collect()
    }

    pub fn unconverged_batches(&self) -> impl Iterator<Item = (usize, &BatchReport)> {
        self.batches
            .iter()
            .enumerate()
            .filter(|(_, b)| !b.diag.converged)
    }
}

/// Batch membership: consecutive chunks of the (optionally shuffled) order.
pub fn plan_batches(n_test: usize, cfg: &RunConfig) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n_test).collect();
    if cfg.shuffle {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
    }
    let size = cfg.batch_size.unwrap_or(n_test).clamp(1, n_test.max(1));
    order.chunks(size).map(<[usize]>::to_vec).collect()
}

/// Conditional-entropy scores for every test row.
pub fn score_features(
    train: &FeatureMatrix,
    test: &FeatureMatrix,
    cfg: &RunConfig,
) -> Result<PipelineScores> {
    cfg.validate()?;
    if train.dim() != test.dim() {
        return Err(OtError::Config(format!(
            "feature dimensions differ: train {} vs test {}",
            train.dim(),
            test.dim()
        )));
    }
    let mu = EmpiricalMeasure::uniform(train.clone());
    let batches = plan_batches(test.n_rows(), cfg);

    let run = |members: &Vec<usize>| -> Result<(Vec<f64>, PlanDiagnostics)> {
        let nu = EmpiricalMeasure::uniform(test.select_rows(members)?);
        let scored = score_batch(&mu, &nu, &cfg.sinkhorn)?;
        Ok((scored.scores, scored.plan_diag))
    };

    #[cfg(feature = "parallel")]
    let results: Vec<_> = {
        use rayon::prelude::*;
        batches.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<_> = batches.iter().map(run).collect();

    let mut scores = vec![0.0; test.n_rows()];
    let mut converged = vec![false; test.n_rows()];
    let mut reports = Vec::with_capacity(batches.len());
    for (members, result) in batches.into_iter().zip(results) {
        let (batch_scores, diag) = result?;
        for (&i, s) in members.iter().zip(batch_scores) {
            scores[i] = s;
            converged[i] = diag.converged;
        }
        reports.push(BatchReport { members, diag });
    }
    Ok(PipelineScores {
        scores,
        converged,
        batches: reports,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub scores: PipelineScores,
    pub metrics: Option<MetricsReport>,
}

/// Reads the inputs, scores, and evaluates when labels are given.
pub fn run_pipeline(
    cfg: &RunConfig,
    train_path: impl AsRef<Path>,
    test_path: impl AsRef<Path>,
    labels_path: Option<&Path>,
) -> Result<PipelineOutput> {
    cfg.validate()?;
    let train = read_features(train_path, cfg.normalize)?;
    let test = read_features(test_path, cfg.normalize)?;
    let labels = labels_path.map(read_labels).transpose()?;
    let scores = score_features(&train, &test, cfg)?;
    let metrics = labels
        .map(|l| evaluate(&LabeledScores::new(scores.scores.clone(), l)?, cfg.tpr_on))
        .transpose()?;
    Ok(PipelineOutput { scores, metrics })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaselineMethod {
    Knn { k: usize },
    Mahalanobis { shrinkage: f64 },
}

pub fn baseline_scores(
    method: BaselineMethod,
    train: &FeatureMatrix,
    test: &FeatureMatrix,
) -> Result<Vec<f64>> {
    match method {
        BaselineMethod::Knn { k } => knn_scores(train, test, k),
        BaselineMethod::Mahalanobis { shrinkage } => {
            mahalanobis_scores(&mahalanobis_fit(train, shrinkage)?, test)
        }
    }
}

/// Metrics for any score vector against labels.
pub fn metrics_for(scores: &[f64], labels: &[Label], tpr_on: TprOn) -> Result<MetricsReport> {
    evaluate(&LabeledScores::new(scores.to_vec(), labels.to_vec())?, tpr_on)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batches_cover_inputs_in_order() {
        let cfg = RunConfig {
            batch_size: Some(3),
            ..RunConfig::default()
        };
        assert_eq!(
            plan_batches(7, &cfg),
            vec![vec![0, 1, 2], vec![3, 4, 5], vec![6]]
        );
        assert_eq!(plan_batches(4, &RunConfig::default()), vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn shuffled_batches_are_a_seeded_permutation() {
        let cfg = RunConfig {
            batch_size: Some(4),
            shuffle: true,
            seed: 9,
            ..RunConfig::default()
        };
        let a = plan_batches(10, &cfg);
        assert_eq!(a, plan_batches(10, &cfg));
        let mut all: Vec<usize> = a.concat();
        assert_ne!(all, (0..10).collect::<Vec<_>>());
        all.sort();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn zero_batch_size_rejected() {
        let cfg = RunConfig {
            batch_size: Some(0),
            ..RunConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(OtError::Config(_))));
    }
}
