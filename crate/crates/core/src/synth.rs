//! Seeded synthetic fixtures on the unit sphere.
//!
//! The ID distribution is a cap around a random center holding `n_classes`
//! tight class clusters, the shape contrastive encoders give labelled data.
//! Class centers are `normalize(center + class_spread / sqrt(d) * g)` and each
//! sample is `normalize(class_center + spread / sqrt(d) * g)` with `g`
//! standard normal, a cheap stand-in for von Mises-Fisher draws.
//!
//! OOD points form a single cap with the same noise scale, centered at cosine
//! distance `separation` from the ID center. With `n_classes = 1` and
//! `separation = 0` the ID and OOD distributions are identical. The test rows
//! are shuffled so that any contiguous batch mixes ID and OOD inputs in
//! roughly the global ratio.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{OtError, Result};
use crate::eval::Label;
use crate::measure::{l2_norm, FeatureMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_train: usize,
    pub n_id: usize,
    pub n_ood: usize,
    pub dim: usize,
    /// Cosine distance between the ID and OOD centers, in `[0, 2]`.
    pub separation: f64,
    /// Clusters inside each cap; 1 gives a single isotropic cap.
    pub n_classes: usize,
    /// Scale of the class centers around the cap center.
    pub class_spread: f64,
    /// Noise scale of samples around their class center.
    pub spread: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_train: 500,
            n_id: 250,
            n_ood: 250,
            dim: 32,
            separation: 1.5,
            n_classes: 10,
            class_spread: 1.0,
            spread: 0.25,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticFixture {
    /// `None` when `n_train` is zero.
    pub train: Option<FeatureMatrix>,
    /// `None` when there are no test rows.
    pub test: Option<FeatureMatrix>,
    /// One label per test row.
    pub labels: Vec<Label>,
}

pub fn gen_synthetic(cfg: &SynthConfig) -> Result<SyntheticFixture> {
    if cfg.dim < 2 {
        return Err(OtError::Config(format!(
            "dimension must be at least 2, got {}",
            cfg.dim
        )));
    }
    if !(0.0..=2.0).contains(&cfg.separation) {
        return Err(OtError::Config(format!(
            "separation must lie in [0, 2], got {}",
            cfg.separation
        )));
    }
    for (name, x) in [("spread", cfg.spread), ("class_spread", cfg.class_spread)] {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(OtError::Config(format!("{name} must be nonnegative, got {x}")));
        }
    }
    if cfg.n_classes == 0 {
        return Err(OtError::Config("need at least one class".into()));
    }

    let d = cfg.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let center = random_unit(&mut rng, d);
    let mut axis = random_unit(&mut rng, d);
    let proj = dot(&axis, &center);
    axis.iter_mut().zip(&center).for_each(|(x, c)| *x -= proj * c);
    let norm = l2_norm(&axis);
    axis.iter_mut().for_each(|x| *x /= norm);
    let cos = 1.0 - cfg.separation;
    let sin = (1.0 - cos * cos).max(0.0).sqrt();
    let ood_center: Vec<f64> = center
        .iter()
        .zip(&axis)
        .map(|(c, a)| cos * c + sin * a)
        .collect();

    let class_scale = cfg.class_spread / (d as f64).sqrt();
    let class_centers: Vec<Vec<f64>> = (0..cfg.n_classes)
        .map(|_| {
            if cfg.n_classes == 1 {
                center.clone()
            } else {
                sample_around(&mut rng, &center, class_scale)
            }
        })
        .collect();

    let scale = cfg.spread / (d as f64).sqrt();
    let mut cloud = |centers: &[Vec<f64>], count: usize| {
        let mut data = Vec::with_capacity(count * d);
        for _ in 0..count {
            let k = rng.random_range(0..centers.len());
            data.extend(sample_around(&mut rng, &centers[k], scale));
        }
        data
    };
    let train = cloud(&class_centers, cfg.n_train);
    let id = cloud(&class_centers, cfg.n_id);
    let ood = cloud(&[ood_center], cfg.n_ood);

    let n_test = cfg.n_id + cfg.n_ood;
    let mut order: Vec<usize> = (0..n_test).collect();
    order.shuffle(&mut rng);
    let mut test = Vec::with_capacity(n_test * d);
    let mut labels = Vec::with_capacity(n_test);
    for &k in &order {
        if k < cfg.n_id {
            test.extend_from_slice(&id[k * d..(k + 1) * d]);
            labels.push(Label::Id);
        } else {
            let k = k - cfg.n_id;
            test.extend_from_slice(&ood[k * d..(k + 1) * d]);
            labels.push(Label::Ood);
        }
    }

    let matrix = |data: Vec<f64>, n: usize| {
        (n > 0).then(|| FeatureMatrix::normalized(data, n, d)).transpose()
    };
    Ok(SyntheticFixture {
        train: matrix(train, cfg.n_train)?,
        test: matrix(test, n_test)?,
        labels,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = l2_norm(&v);
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn sample_around(rng: &mut ChaCha8Rng, center: &[f64], scale: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = center
            .iter()
            .map(|c| c + scale * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let norm = l2_norm(&v);
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}
