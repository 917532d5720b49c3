//! Feature embeddings and the empirical measures built on them.

use crate::error::{OtError, Result};

/// Tolerance on the Euclidean norm of each row.
pub const UNIT_NORM_TOL: f64 = 1e-4;

/// Tolerance on the total mass of a weight vector.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// Row-major matrix of unit-norm embeddings, one sample per row.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Vec<f64>,
    n_rows: usize,
    dim: usize,
}

impl FeatureMatrix {
    /// Wraps rows that are already unit-norm. Fails if any row is off the
    /// sphere by more than [`UNIT_NORM_TOL`].
    pub fn new(data: Vec<f64>, n_rows: usize, dim: usize) -> Result<Self> {
        let m = Self::unchecked(data, n_rows, dim)?;
        for (i, row) in m.rows().enumerate() {
            let norm = l2_norm(row);
            if (norm - 1.0).abs() > UNIT_NORM_TOL {
                return Err(OtError::Data(format!(
                    "row {i} has norm {norm:.6}, expected unit norm"
                )));
            }
        }
        Ok(m)
    }

    /// L2-normalizes every row. Zero rows are rejected with their index.
    pub fn normalized(mut data: Vec<f64>, n_rows: usize, dim: usize) -> Result<Self> {
        check_shape(&data, n_rows, dim)?;
        for (i, row) in data.chunks_exact_mut(dim).enumerate() {
            let norm = l2_norm(row);
            if norm == 0.0 {
                return Err(OtError::Data(format!("row {i} has zero norm")));
            }
            row.iter_mut().for_each(|x| *x /= norm);
        }
        Self::new(data, n_rows, dim)
    }

    /// Builds from nested rows, normalizing each.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_rows = rows.len();
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(n_rows * dim);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(OtError::Data(format!(
                    "row {i} has {} columns, expected {dim}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::normalized(data, n_rows, dim)
    }

    fn unchecked(data: Vec<f64>, n_rows: usize, dim: usize) -> Result<Self> {
        check_shape(&data, n_rows, dim)?;
        Ok(Self { data, n_rows, dim })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Rows `range` as a new matrix.
    pub fn slice_rows(&self, range: std::ops::Range<usize>) -> Result<Self> {
        if range.start >= range.end || range.end > self.n_rows {
            return Err(OtError::Config(format!(
                "row range {range:?} invalid for {} rows",
                self.n_rows
            )));
        }
        let data = self.data[range.start * self.dim..range.end * self.dim].to_vec();
        Ok(Self {
            data,
            n_rows: range.len(),
            dim: self.dim,
        })
    }

    /// Rows in the order given by `index`.
    pub fn select_rows(&self, index: &[usize]) -> Result<Self> {
        if index.is_empty() {
            return Err(OtError::Data("empty row selection".into()));
        }
        let mut data = Vec::with_capacity(index.len() * self.dim);
        for &i in index {
            if i >= self.n_rows {
                return Err(OtError::Config(format!("row {i} out of range")));
            }
            data.extend_from_slice(self.row(i));
        }
        Ok(Self {
            data,
            n_rows: index.len(),
            dim: self.dim,
        })
    }
}

fn check_shape(data: &[f64], n_rows: usize, dim: usize) -> Result<()> {
    if n_rows == 0 || dim == 0 {
        return Err(OtError::Data(format!(
            "feature matrix must be nonempty, got {n_rows}x{dim}"
        )));
    }
    if data.len() != n_rows * dim {
        return Err(OtError::Data(format!(
            "buffer of {} values does not match {n_rows}x{dim}",
            data.len()
        )));
    }
    if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
        return Err(OtError::Data(format!(
            "non-finite value in row {}",
            pos / dim
        )));
    }
    Ok(())
}

pub(crate) fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Weighted sum of Dirac masses on the rows of a [`FeatureMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    weights: Vec<f64>,
    supports: FeatureMatrix,
}

impl EmpiricalMeasure {
    pub fn new(weights: Vec<f64>, supports: FeatureMatrix) -> Result<Self> {
        validate_weights(&weights)?;
        if weights.len() != supports.n_rows() {
            return Err(OtError::Config(format!(
                "{} weights for {} support points",
                weights.len(),
                supports.n_rows()
            )));
        }
        Ok(Self { weights, supports })
    }

    /// Uniform weights `1/n` on every support point.
    pub fn uniform(supports: FeatureMatrix) -> Self {
        let n = supports.n_rows();
        Self {
            weights: vec![1.0 / n as f64; n],
            supports,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn supports(&self) -> &FeatureMatrix {
        &self.supports
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        let w = 1.0 / self.len() as f64;
        self.weights.iter().all(|&x| (x - w).abs() <= SIMPLEX_TOL)
    }
}

/// Uniform measure over `supports`.
pub fn uniform_measure(supports: FeatureMatrix) -> EmpiricalMeasure {
    EmpiricalMeasure::uniform(supports)
}

/// Checks that `weights` lie on the probability simplex.
pub fn validate_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(OtError::Data("empty weight vector".into()));
    }
    if let Some(i) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
        return Err(OtError::Data(format!(
            "weight {i} = {} is not a nonnegative finite number",
            weights[i]
        )));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > SIMPLEX_TOL {
        return Err(OtError::Data(format!("weights sum to {total}, expected 1")));
    }
    Ok(())
}
