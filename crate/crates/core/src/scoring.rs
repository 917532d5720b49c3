//! Conditional distribution entropy of transport-plan columns.
//!
//! Each test input owns one column of the plan. Normalizing that column gives
//! the distribution of training points its mass is sent to; a sparse column
//! (low entropy) marks an input that sits close to the training data, while a
//! near-uniform column (entropy close to `ln N`) marks a likely OOD input.
//! All entropies are in nats.

use crate::error::{OtError, Result};
use crate::measure::EmpiricalMeasure;
use crate::ot::{cosine_cost_matrix, sinkhorn, xlogx, SinkhornConfig, TransportPlan};

/// Tolerance on the total mass of a conditional distribution.
pub const CONDITIONAL_TOL: f64 = 1e-9;

/// `pi(u | v_j)`: column `j` of a plan divided by its realized sum.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalDistribution {
    pub probs: Vec<f64>,
    pub source_column: usize,
}

impl ConditionalDistribution {
    pub fn new(probs: Vec<f64>, source_column: usize) -> Result<Self> {
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(OtError::Data("conditional probabilities must be nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > CONDITIONAL_TOL {
            return Err(OtError::Data(format!(
                "conditional distribution sums to {total}"
            )));
        }
        Ok(Self {
            probs,
            source_column,
        })
    }
}

/// Solver diagnostics carried alongside scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanDiagnostics {
    pub iterations: usize,
    pub marginal_violation: f64,
    pub converged: bool,
    pub log_domain: bool,
}

impl From<&TransportPlan> for PlanDiagnostics {
    fn from(p: &TransportPlan) -> Self {
        Self {
            iterations: p.iterations,
            marginal_violation: p.marginal_violation,
            converged: p.converged,
            log_domain: p.log_domain,
        }
    }
}

/// Per-test-input OOD scores, in test-row order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredBatch {
    pub scores: Vec<f64>,
    pub lambda: f64,
    pub n_train: usize,
    pub plan_diag: PlanDiagnostics,
}

impl ScoredBatch {
    pub fn converged(&self) -> bool {
        self.plan_diag.converged
    }
}

pub fn conditional_distribution(plan: &TransportPlan, j: usize) -> Result<ConditionalDistribution> {
    if j >= plan.n_cols() {
        return Err(OtError::Config(format!(
            "column {j} out of range for a plan with {} columns",
            plan.n_cols()
        )));
    }
    let column: Vec<f64> = plan.column(j).collect();
    let mass: f64 = column.iter().sum();
    if !(mass > 0.0) {
        return Err(OtError::Degenerate(format!(
            "column {j} carries no mass (zero test weight or solver failure)"
        )));
    }
    Ok(ConditionalDistribution {
        probs: column.into_iter().map(|p| p / mass).collect(),
        source_column: j,
    })
}

/// Shannon entropy of `cd`, with `0 ln 0 = 0`.
pub fn conditional_entropy_score(cd: &ConditionalDistribution) -> f64 {
    shannon_entropy(&cd.probs)
}

pub fn shannon_entropy(p: &[f64]) -> f64 {
    // -0.0 for a Dirac input
    (-p.iter().map(|&x| xlogx(x)).sum::<f64>()).max(0.0)
}

/// Scores every column of an already solved plan.
pub fn score_plan(plan: &TransportPlan) -> Result<Vec<f64>> {
    (0..plan.n_cols())
        .map(|j| conditional_distribution(plan, j).map(|cd| conditional_entropy_score(&cd)))
        .collect()
}

/// Cosine cost, Sinkhorn, then the conditional entropy of every test column.
/// A plan that misses the tolerance still yields scores, flagged in the
/// diagnostics.
pub fn score_batch(
    train: &EmpiricalMeasure,
    test: &EmpiricalMeasure,
    cfg: &SinkhornConfig,
) -> Result<ScoredBatch> {
    let cost = cosine_cost_matrix(train.supports(), test.supports())?;
    let plan = sinkhorn(train, test, &cost, cfg)?;
    Ok(ScoredBatch {
        scores: score_plan(&plan)?,
        lambda: cfg.lambda,
        n_train: train.len(),
        plan_diag: PlanDiagnostics::from(&plan),
    })
}

/// `H(U, V) = -sum p ln p` of the plan viewed as a joint distribution.
pub fn joint_entropy(plan: &TransportPlan) -> f64 {
    shannon_entropy(plan.as_slice())
}

/// `I(U, V) = sum p ln(p / (mu_i nu_j))`; tiny negative rounding is clamped
/// to zero.
pub fn mutual_information(
    plan: &TransportPlan,
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
) -> Result<f64> {
    mutual_information_weights(plan, mu.weights(), nu.weights())
}

pub fn mutual_information_weights(plan: &TransportPlan, a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != plan.n_rows() || b.len() != plan.n_cols() {
        return Err(OtError::Config(format!(
            "plan is {}x{} but marginals have {} and {} entries",
            plan.n_rows(),
            plan.n_cols(),
            a.len(),
            b.len()
        )));
    }
    let mut total = 0.0;
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            let p = plan.get(i, j);
            if p > 0.0 {
                total += p * (p / (ai * bj)).ln();
            }
        }
    }
    Ok(if total < 0.0 && total >= -1e-9 { 0.0 } else { total })
}
