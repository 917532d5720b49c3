//! Distance-based reference scorers: k-th nearest neighbour and a single
//! Gaussian (Mahalanobis) fit. Both return higher values for likely OOD
//! inputs.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{OtError, Result};
use crate::measure::FeatureMatrix;

pub const DEFAULT_K: usize = 50;
pub const DEFAULT_SHRINKAGE: f64 = 1e-3;

/// Eigenvalues below this fraction of the largest are dropped from the
/// precision matrix.
const EIGEN_CUTOFF: f64 = 1e-10;

/// Cosine distance from `query` to its `k`-th nearest training row.
pub fn knn_score(train: &FeatureMatrix, query: &[f64], k: usize) -> Result<f64> {
    let mut d = cosine_distances(train, query)?;
    if k == 0 || k > d.len() {
        return Err(OtError::Config(format!(
            "k = {k} out of range for {} training rows",
            d.len()
        )));
    }
    let (_, kth, _) = d.select_nth_unstable_by(k - 1, f64::total_cmp);
    Ok(*kth)
}

/// [`knn_score`] for every row of `queries`.
pub fn knn_scores(train: &FeatureMatrix, queries: &FeatureMatrix, k: usize) -> Result<Vec<f64>> {
    queries.rows().map(|q| knn_score(train, q, k)).collect()
}

fn cosine_distances(train: &FeatureMatrix, query: &[f64]) -> Result<Vec<f64>> {
    if query.len() != train.dim() {
        return Err(OtError::Config(format!(
            "query has dimension {}, training features {}",
            query.len(),
            train.dim()
        )));
    }
    Ok(train
        .rows()
        .map(|x| {
            let dot: f64 = x.iter().zip(query).map(|(a, b)| a * b).sum();
            (1.0 - dot).clamp(0.0, 2.0)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianFit {
    pub mean: DVector<f64>,
    /// Shrunk covariance.
    pub covariance: DMatrix<f64>,
    /// Pseudo-inverse of `covariance` on its retained eigenspace.
    pub precision: DMatrix<f64>,
    pub shrinkage: f64,
    /// Number of eigenvalues kept in `precision`.
    pub rank: usize,
}

/// Mean and covariance of `train`, shrunk towards `trace / d * I`.
pub fn mahalanobis_fit(train: &FeatureMatrix, shrinkage: f64) -> Result<GaussianFit> {
    fit_gaussian(train.as_slice(), train.n_rows(), train.dim(), shrinkage)
}

/// [`mahalanobis_fit`] on an arbitrary row-major sample, not necessarily on
/// the unit sphere.
pub fn fit_gaussian(data: &[f64], n: usize, d: usize, shrinkage: f64) -> Result<GaussianFit> {
    if !(0.0..=1.0).contains(&shrinkage) {
        return Err(OtError::Config(format!(
            "shrinkage must lie in [0, 1], got {shrinkage}"
        )));
    }
    if d == 0 || data.len() != n * d || data.iter().any(|x| !x.is_finite()) {
        return Err(OtError::Data(format!(
            "sample buffer of {} values is not a finite {n}x{d} matrix",
            data.len()
        )));
    }
    if n < 2 {
        return Err(OtError::Data(format!(
            "need at least 2 training rows for a covariance, got {n}"
        )));
    }
    let x = DMatrix::from_row_slice(n, d, data);
    let mean = DVector::from_iterator(d, x.column_iter().map(|c| c.sum() / n as f64));
    let mut centered = x;
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    let mut cov = centered.transpose() * &centered / (n as f64 - 1.0);
    // exact symmetry before the eigensolver
    cov = (&cov + cov.transpose()) * 0.5;

    if shrinkage > 0.0 {
        let target = cov.trace() / d as f64;
        cov *= 1.0 - shrinkage;
        for i in 0..d {
            cov[(i, i)] += shrinkage * target;
        }
    }

    let eig = SymmetricEigen::new(cov.clone());
    let max_ev = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    // centering identical rows leaves rounding noise of order eps * |x|
    let scale = data.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let noise = 16.0 * (f64::EPSILON * scale).powi(2);
    if !(max_ev > noise.max(f64::MIN_POSITIVE)) {
        return Err(OtError::Singular(
            "covariance is zero (all training rows identical)".into(),
        ));
    }
    let cutoff = EIGEN_CUTOFF * max_ev;
    let mut inv_diag = DVector::zeros(d);
    let mut rank = 0;
    for (k, &ev) in eig.eigenvalues.iter().enumerate() {
        if ev > cutoff {
            inv_diag[k] = 1.0 / ev;
            rank += 1;
        }
    }
    let q = &eig.eigenvectors;
    let precision = q * DMatrix::from_diagonal(&inv_diag) * q.transpose();

    Ok(GaussianFit {
        mean,
        covariance: cov,
        precision,
        shrinkage,
        rank,
    })
}

/// `(x - mean)^T precision (x - mean)`.
pub fn mahalanobis_score(fit: &GaussianFit, query: &[f64]) -> Result<f64> {
    if query.len() != fit.mean.len() {
        return Err(OtError::Config(format!(
            "query has dimension {}, fit has {}",
            query.len(),
            fit.mean.len()
        )));
    }
    let diff = DVector::from_column_slice(query) - &fit.mean;
    Ok((diff.transpose() * &fit.precision * &diff)[(0, 0)])
}

pub fn mahalanobis_scores(fit: &GaussianFit, queries: &FeatureMatrix) -> Result<Vec<f64>> {
    queries.rows().map(|q| mahalanobis_score(fit, q)).collect()
}
