//! Out-of-distribution scoring with entropic optimal transport.
//!
//! Training and test embeddings are lifted to uniform empirical measures on
//! the unit sphere and coupled by the entropic-regularized transport plan
//! under cosine cost. Each test input is scored by the Shannon entropy of its
//! normalized plan column: inputs whose mass spreads evenly over the training
//! set score high and are flagged as OOD.
//!
//! ```
//! use otood_core::{score_batch, EmpiricalMeasure, FeatureMatrix, SinkhornConfig};
//!
//! let train = FeatureMatrix::from_rows(&[[1.0, 0.0], [0.9, 0.1], [0.8, 0.3]]).unwrap();
//! let test = FeatureMatrix::from_rows(&[[1.0, 0.05], [-0.2, 1.0]]).unwrap();
//! let batch = score_batch(
//!     &EmpiricalMeasure::uniform(train),
//!     &EmpiricalMeasure::uniform(test),
//!     &SinkhornConfig::with_lambda(0.1),
//! )
//! .unwrap();
//! assert!(batch.scores.iter().all(|s| *s >= 0.0 && *s <= 3f64.ln() + 1e-9));
//! ```

pub mod baselines;
pub mod error;
pub mod eval;
pub mod io;
pub mod measure;
pub mod oracle;
pub mod ot;
pub mod pipeline;
pub mod scoring;
pub mod synth;

pub use error::{OtError, Result};
pub use eval::{auroc, aupr, evaluate, fpr_at_tpr, Label, LabeledScores, MetricsReport, TprOn};
pub use measure::{uniform_measure, EmpiricalMeasure, FeatureMatrix};
pub use ot::{
    cosine_cost_matrix, objective_value, sinkhorn, CostMatrix, LogDomain, SinkhornConfig,
    TransportPlan,
};
pub use pipeline::{run_pipeline, score_features, RunConfig};
pub use scoring::{
    conditional_distribution, conditional_entropy_score, joint_entropy, mutual_information,
    score_batch, ScoredBatch,
};
pub use synth::{gen_synthetic, SynthConfig};
