#![allow(dead_code)]

use otood_core::FeatureMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` points uniform on the unit sphere in `d` dimensions.
pub fn sphere_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> FeatureMatrix {
    let data: Vec<f64> = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
    FeatureMatrix::normalized(data, n, d).unwrap()
}

/// Positive weights on the simplex.
pub fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

pub fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Pairwise count: P(OOD > ID) with ties as one half.
pub fn auroc_pairs(scores: &[f64], ood: &[bool]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, &si) in scores.iter().enumerate() {
        for (j, &sj) in scores.iter().enumerate() {
            if ood[i] && !ood[j] {
                pairs += 1.0;
                if si > sj {
                    wins += 1.0;
                } else if si == sj {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

/// Counts (tp, fp) flagged at `score >= t` by a full scan.
fn flagged(scores: &[f64], ood: &[bool], t: f64) -> (usize, usize) {
    let mut tp = 0;
    let mut fp = 0;
    for (s, &o) in scores.iter().zip(ood) {
        if *s >= t {
            if o {
                tp += 1
            } else {
                fp += 1
            }
        }
    }
    (tp, fp)
}

fn distinct_descending(scores: &[f64]) -> Vec<f64> {
    let mut t = scores.to_vec();
    t.sort_by(|a, b| b.total_cmp(a));
    t.dedup();
    t
}

/// Step-wise precision-recall area, every threshold recounted from scratch.
pub fn aupr_enumerate(scores: &[f64], ood: &[bool]) -> f64 {
    let pos = ood.iter().filter(|&&o| o).count() as f64;
    let mut prev_recall = 0.0;
    let mut area = 0.0;
    for t in distinct_descending(scores) {
        let (tp, fp) = flagged(scores, ood, t);
        let recall = tp as f64 / pos;
        area += (recall - prev_recall) * tp as f64 / (tp + fp) as f64;
        prev_recall = recall;
    }
    area
}

/// Smallest FPR over all thresholds with TPR >= target on the OOD class; on
/// ties the highest threshold is reported.
pub fn fpr_enumerate(scores: &[f64], ood: &[bool], target: f64) -> (f64, f64) {
    let pos = ood.iter().filter(|&&o| o).count() as f64;
    let neg = ood.len() as f64 - pos;
    let mut candidates = vec![f64::INFINITY];
    candidates.extend(distinct_descending(scores));
    let mut best: Option<(f64, f64)> = None;
    for t in candidates {
        let (tp, fp) = flagged(scores, ood, t);
        if tp as f64 / pos >= target {
            let fpr = fp as f64 / neg;
            if best.is_none_or(|(b, _)| fpr < b) {
                best = Some((fpr, t));
            }
        }
    }
    best.unwrap()
}

/// Random scores with deliberate ties and both classes present.
pub fn metric_fixture(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<bool>) {
    loop {
        let ood: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
        let scores: Vec<f64> = ood
            .iter()
            .map(|&o| {
                let s: f64 = rng.random::<f64>() + if o { 0.3 } else { 0.0 };
                if rng.random_bool(0.3) {
                    (s * 10.0).round() / 10.0
                } else {
                    s
                }
            })
            .collect();
        if ood.iter().any(|&o| o) && ood.iter().any(|&o| !o) {
            return (scores, ood);
        }
    }
}
