//! Detection metrics with OOD as the positive class.
//!
//! All three metrics come from one sweep over the scores sorted in descending
//! order. The candidate thresholds are `+inf` followed by every distinct score;
//! an input is flagged OOD when its score is at least the threshold, so tied
//! scores always switch together.

use std::fmt;

use crate::error::{OtError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Id,
    Ood,
}

impl Label {
    pub fn is_ood(self) -> bool {
        self == Label::Ood
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Id => Label::Ood,
            Label::Ood => Label::Id,
        }
    }
}

/// Which class the true-positive rate of FPR95 is measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TprOn {
    /// Fraction of OOD inputs flagged (score at or above the threshold).
    #[default]
    Ood,
    /// Fraction of ID inputs kept (score at or below the threshold); the FPR
    /// is then the fraction of OOD inputs that are kept.
    Id,
}

impl std::str::FromStr for TprOn {
    type Err = OtError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ood" => Ok(TprOn::Ood),
            "id" => Ok(TprOn::Id),
            other => Err(OtError::Config(format!(
                "unknown TPR class '{other}', expected 'id' or 'ood'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledScores {
    scores: Vec<f64>,
    labels: Vec<Label>,
}

impl LabeledScores {
    pub fn new(scores: Vec<f64>, labels: Vec<Label>) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(OtError::Config(format!(
                "{} scores but {} labels",
                scores.len(),
                labels.len()
            )));
        }
        if let Some(i) = scores.iter().position(|s| s.is_nan()) {
            return Err(OtError::Data(format!("score {i} is NaN")));
        }
        Ok(Self { scores, labels })
    }

    /// Labels from `0 | 1` flags, `1` meaning OOD.
    pub fn from_flags(scores: Vec<f64>, flags: &[bool]) -> Result<Self> {
        let labels = flags
            .iter()
            .map(|&f| if f { Label::Ood } else { Label::Id })
            .collect();
        Self::new(scores, labels)
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn n_ood(&self) -> usize {
        self.labels.iter().filter(|l| l.is_ood()).count()
    }

    pub fn n_id(&self) -> usize {
        self.labels.len() - self.n_ood()
    }

    /// Negated scores with labels swapped.
    pub fn reversed(&self) -> Self {
        Self {
            scores: self.scores.iter().map(|s| -s).collect(),
            labels: self.labels.iter().map(|l| l.flipped()).collect(),
        }
    }

    fn require_both_classes(&self) -> Result<()> {
        let (n_id, n_ood) = (self.n_id(), self.n_ood());
        if n_id == 0 || n_ood == 0 {
            return Err(OtError::MetricUndefined(format!(
                "need both classes, got {n_id} ID and {n_ood} OOD"
            )));
        }
        Ok(())
    }
}

/// One operating point of the sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub threshold: f64,
    pub true_positives: usize,
    pub false_positives: usize,
}

/// Cumulative counts at `+inf` and at each distinct score, descending.
pub fn threshold_sweep(ls: &LabeledScores) -> Vec<SweepPoint> {
    let mut order: Vec<usize> = (0..ls.scores.len()).collect();
    order.sort_by(|&a, &b| ls.scores[b].total_cmp(&ls.scores[a]));

    let mut points = vec![SweepPoint {
        threshold: f64::INFINITY,
        true_positives: 0,
        false_positives: 0,
    }];
    let (mut tp, mut fp) = (0, 0);
    let mut k = 0;
    while k < order.len() {
        let threshold = ls.scores[order[k]];
        while k < order.len() && ls.scores[order[k]] == threshold {
            match ls.labels[order[k]] {
                Label::Ood => tp += 1,
                Label::Id => fp += 1,
            }
            k += 1;
        }
        points.push(SweepPoint {
            threshold,
            true_positives: tp,
            false_positives: fp,
        });
    }
    points
}

/// Area under the ROC curve; equals the probability that a random OOD score
/// exceeds a random ID score, ties counting one half.
pub fn auroc(ls: &LabeledScores) -> Result<f64> {
    ls.require_both_classes()?;
    let (pos, neg) = (ls.n_ood() as f64, ls.n_id() as f64);
    let area: f64 = threshold_sweep(ls)
        .windows(2)
        .map(|w| {
            let dfp = (w[1].false_positives - w[0].false_positives) as f64;
            dfp * (w[0].true_positives + w[1].true_positives) as f64 / 2.0
        })
        .sum();
    Ok(area / (pos * neg))
}

/// Step-wise area under precision-recall: `sum (R_k - R_{k-1}) P_k`.
pub fn aupr(ls: &LabeledScores) -> Result<f64> {
    ls.require_both_classes()?;
    let pos = ls.n_ood() as f64;
    let area = threshold_sweep(ls)
        .windows(2)
        .map(|w| {
            let dtp = (w[1].true_positives - w[0].true_positives) as f64;
            let flagged = (w[1].true_positives + w[1].false_positives) as f64;
            (dtp / pos) * (w[1].true_positives as f64 / flagged)
        })
        .sum();
    Ok(area)
}

/// Smallest false-positive rate among thresholds whose true-positive rate on
/// the OOD class reaches `tpr_target`, with that threshold.
pub fn fpr_at_tpr(ls: &LabeledScores, tpr_target: f64) -> Result<(f64, f64)> {
    ls.require_both_classes()?;
    if !(tpr_target > 0.0 && tpr_target <= 1.0) {
        return Err(OtError::Config(format!(
            "TPR target must lie in (0, 1], got {tpr_target}"
        )));
    }
    let (pos, neg) = (ls.n_ood() as f64, ls.n_id() as f64);
    // FPR only grows as the threshold drops, so the first qualifying point wins
    let point = threshold_sweep(ls)
        .into_iter()
        .find(|p| p.true_positives as f64 / pos >= tpr_target)
        .expect("the lowest threshold flags every input");
    Ok((point.false_positives as f64 / neg, point.threshold))
}

/// [`fpr_at_tpr`] under either TPR convention. For [`TprOn::Id`] the
/// reported threshold is in the original score units: inputs at or below it
/// are kept as ID.
pub fn fpr_at_tpr_on(ls: &LabeledScores, tpr_target: f64, tpr_on: TprOn) -> Result<(f64, f64)> {
    match tpr_on {
        TprOn::Ood => fpr_at_tpr(ls, tpr_target),
        TprOn::Id => {
            let (fpr, t) = fpr_at_tpr(&ls.reversed(), tpr_target)?;
            Ok((fpr, -t))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub fpr95: f64,
    pub auroc: f64,
    pub aupr: f64,
    pub n_id: usize,
    pub n_ood: usize,
    pub threshold_at_tpr95: f64,
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str = "fpr95,auroc,aupr,n_id,n_ood,threshold_at_tpr95";

    pub fn csv_row(&self) -> String {
        format!(
            "{:.6},{:.6},{:.6},{},{},{:.6}",
            self.fpr95, self.auroc, self.aupr, self.n_id, self.n_ood, self.threshold_at_tpr95
        )
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<10} {:>10}", "metric", "value")?;
        writeln!(f, "{:<10} {:>9.2}%", "FPR95", 100.0 * self.fpr95)?;
        writeln!(f, "{:<10} {:>9.2}%", "AUROC", 100.0 * self.auroc)?;
        writeln!(f, "{:<10} {:>9.2}%", "AUPR", 100.0 * self.aupr)?;
        writeln!(f, "{:<10} {:>10}", "n_id", self.n_id)?;
        writeln!(f, "{:<10} {:>10}", "n_ood", self.n_ood)?;
        write!(f, "{:<10} {:>10.6}", "threshold", self.threshold_at_tpr95)
    }
}

pub fn evaluate(ls: &LabeledScores, tpr_on: TprOn) -> Result<MetricsReport> {
    let (fpr95, threshold_at_tpr95) = fpr_at_tpr_on(ls, 0.95, tpr_on)?;
    Ok(MetricsReport {
        fpr95,
        auroc: auroc(ls)?,
        aupr: aupr(ls)?,
        n_id: ls.n_id(),
        n_ood: ls.n_ood(),
        threshold_at_tpr95,
    })
}
