//! Scores the default synthetic fixture with the transport score and both
//! baselines, then repeats the transport score at several batch sizes.
//!
//! cargo run --release -p otood-core --example synthetic [separation] [lambda]

use otood_core::pipeline::{baseline_scores, metrics_for, score_features, BaselineMethod};
use otood_core::{gen_synthetic, RunConfig, SinkhornConfig, SynthConfig, TprOn};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let separation = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1.5);
    let lambda = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.1);

    let fixture = gen_synthetic(&SynthConfig {
        separation,
        ..SynthConfig::default()
    })?;
    let (train, test) = (fixture.train.unwrap(), fixture.test.unwrap());
    let labels = fixture.labels;

    println!("{:<24} {:>8} {:>8} {:>8}", "scorer", "AUROC", "AUPR", "FPR95");
    let report = |name: &str, scores: &[f64]| -> Result<(), Box<dyn std::error::Error>> {
        let m = metrics_for(scores, &labels, TprOn::Ood)?;
        println!("{name:<24} {:>8.4} {:>8.4} {:>8.4}", m.auroc, m.aupr, m.fpr95);
        Ok(())
    };

    for batch_size in [None, Some(128), Some(32), Some(8)] {
        let cfg = RunConfig {
            sinkhorn: SinkhornConfig::with_lambda(lambda),
            batch_size,
            ..RunConfig::default()
        };
        let scored = score_features(&train, &test, &cfg)?;
        let name = match batch_size {
            None => "transport (one batch)".to_string(),
            Some(b) => format!("transport (batch {b})"),
        };
        report(&name, &scored.scores)?;
    }
    report(
        "knn (k = 10)",
        &baseline_scores(BaselineMethod::Knn { k: 10 }, &train, &test)?,
    )?;
    report(
        "mahalanobis",
        &baseline_scores(BaselineMethod::Mahalanobis { shrinkage: 1e-3 }, &train, &test)?,
    )?;
    Ok(())
}
