//! Entropic-regularized discrete optimal transport.
//!
//! The solver works on a cost matrix `C` between two empirical measures
//! `mu` (rows) and `nu` (columns) and returns the plan
//! `P = diag(u) K diag(v)` with `K = exp(-C / lambda)`, obtained by
//! alternating the scalings `u = mu / (K v)` and `v = nu / (K^T u)`.
//!
//! For small `lambda` the kernel underflows, so the same fixed point is also
//! computed in the log domain on dual potentials `f = lambda ln u`,
//! `g = lambda ln v` with log-sum-exp reductions. [`LogDomain::Auto`] picks
//! the log domain below [`LOG_DOMAIN_LAMBDA`] and falls back to it whenever a
//! scaling entry leaves `[1e-300, 1e300]`.

use crate::error::{OtError, Result};
use crate::measure::{validate_weights, EmpiricalMeasure, FeatureMatrix};

/// Below this regularization the log-domain solver is selected automatically.
pub const LOG_DOMAIN_LAMBDA: f64 = 0.05;

const SCALING_MIN: f64 = 1e-300;
const SCALING_MAX: f64 = 1e300;

/// Pairwise transport costs, `n` rows by `m` columns, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    data: Vec<f64>,
    n: usize,
    m: usize,
}

impl CostMatrix {
    /// Arbitrary nonnegative finite costs.
    pub fn new(data: Vec<f64>, n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 || data.len() != n * m {
            return Err(OtError::Config(format!(
                "cost buffer of {} entries does not match {n}x{m}",
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|c| !c.is_finite() || *c < 0.0) {
            return Err(OtError::Data(format!(
                "cost ({}, {}) = {} is not a nonnegative finite number",
                k / m,
                k % m,
                data[k]
            )));
        }
        Ok(Self { data, n, m })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        if rows.iter().any(|r| r.as_ref().len() != m) {
            return Err(OtError::Config("ragged cost rows".into()));
        }
        let data = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::new(data, n, m)
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_cols(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.m + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Every entry multiplied by `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(OtError::Config(format!("scale must be positive, got {s}")));
        }
        Self::new(self.data.iter().map(|c| c * s).collect(), self.n, self.m)
    }
}

/// Cosine distances `1 - <train_i, test_j>`, clamped to `[0, 2]`.
pub fn cosine_cost_matrix(train: &FeatureMatrix, test: &FeatureMatrix) -> Result<CostMatrix> {
    if train.dim() != test.dim() {
        return Err(OtError::Config(format!(
            "feature dimensions differ: train {} vs test {}",
            train.dim(),
            test.dim()
        )));
    }
    let (n, m) = (train.n_rows(), test.n_rows());
    let mut data = Vec::with_capacity(n * m);
    for x in train.rows() {
        for y in test.rows() {
            let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
            data.push((1.0 - dot).clamp(0.0, 2.0));
        }
    }
    CostMatrix::new(data, n, m)
}

/// Which arithmetic the Sinkhorn iteration runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogDomain {
    /// Log domain below [`LOG_DOMAIN_LAMBDA`] or on scaling overflow.
    #[default]
    Auto,
    /// Standard scaling only; overflow is reported as a stability error.
    Off,
    On,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinkhornConfig {
    /// Entropic regularization coefficient, strictly positive.
    pub lambda: f64,
    /// L1 tolerance on both marginals.
    pub tol: f64,
    pub max_iter: usize,
    pub log_domain: LogDomain,
    /// Iterations between marginal checks.
    pub check_every: usize,
}

impl Default for SinkhornConfig {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            tol: 1e-6,
            max_iter: 10_000,
            log_domain: LogDomain::Auto,
            check_every: 10,
        }
    }
}

impl SinkhornConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(OtError::Config(format!(
                "lambda must be positive and finite, got {}",
                self.lambda
            )));
        }
        if !(self.tol > 0.0) {
            return Err(OtError::Config(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(OtError::Config("max_iter must be at least 1".into()));
        }
        if self.check_every == 0 {
            return Err(OtError::Config("check_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// Coupling between the row and column measures, with solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    data: Vec<f64>,
    n: usize,
    m: usize,
    /// Target row marginal.
    pub row_marginal: Vec<f64>,
    /// Target column marginal.
    pub col_marginal: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Larger of the two L1 marginal errors of the returned plan.
    pub marginal_violation: f64,
    /// Whether the log-domain iteration produced this plan.
    pub log_domain: bool,
}

impl TransportPlan {
    /// Wraps an explicit coupling. Marginals are taken from its own sums.
    pub fn from_dense(data: Vec<f64>, n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 || data.len() != n * m {
            return Err(OtError::Config(format!(
                "plan buffer of {} entries does not match {n}x{m}",
                data.len()
            )));
        }
        if data.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(OtError::Data("plan entries must be nonnegative".into()));
        }
        let row_marginal = row_sums(&data, n, m);
        let col_marginal = col_sums(&data, n, m);
        validate_weights(&row_marginal)?;
        Ok(Self {
            data,
            n,
            m,
            row_marginal,
            col_marginal,
            converged: true,
            iterations: 0,
            marginal_violation: 0.0,
            log_domain: false,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        if rows.iter().any(|r| r.as_ref().len() != m) {
            return Err(OtError::Config("ragged plan rows".into()));
        }
        let data = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::from_dense(data, n, m)
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_cols(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.m + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().skip(j).step_by(self.m).copied()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row_sums(&self) -> Vec<f64> {
        row_sums(&self.data, self.n, self.m)
    }

    pub fn col_sums(&self) -> Vec<f64> {
        col_sums(&self.data, self.n, self.m)
    }

    pub fn total_mass(&self) -> f64 {
        self.data.iter().sum()
    }
}

fn row_sums(data: &[f64], n: usize, m: usize) -> Vec<f64> {
    (0..n).map(|i| data[i * m..(i + 1) * m].iter().sum()).collect()
}

fn col_sums(data: &[f64], n: usize, m: usize) -> Vec<f64> {
    let mut s = vec![0.0; m];
    for row in data.chunks_exact(m).take(n) {
        for (acc, p) in s.iter_mut().zip(row) {
            *acc += p;
        }
    }
    s
}

fn l1_gap(actual: &[f64], target: &[f64]) -> f64 {
    actual.iter().zip(target).map(|(a, b)| (a - b).abs()).sum()
}

/// Starting column scaling `v` (the row scaling is computed from it first).
/// Entries must be positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SinkhornInit {
    pub v: Vec<f64>,
}

/// Solves the entropic OT problem between `mu` and `nu` under `cost`.
pub fn sinkhorn(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    cost: &CostMatrix,
    cfg: &SinkhornConfig,
) -> Result<TransportPlan> {
    sinkhorn_weights(mu.weights(), nu.weights(), cost, cfg, None)
}

/// [`sinkhorn`] on raw weight vectors, optionally from a chosen starting
/// scaling.
pub fn sinkhorn_weights(
    a: &[f64],
    b: &[f64],
    cost: &CostMatrix,
    cfg: &SinkhornConfig,
    init: Option<&SinkhornInit>,
) -> Result<TransportPlan> {
    cfg.validate()?;
    validate_weights(a)?;
    validate_weights(b)?;
    if a.len() != cost.n_rows() || b.len() != cost.n_cols() {
        return Err(OtError::Config(format!(
            "cost is {}x{} but measures have {} and {} points",
            cost.n_rows(),
            cost.n_cols(),
            a.len(),
            b.len()
        )));
    }
    if let Some(init) = init {
        if init.v.len() != b.len() || init.v.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(OtError::Config(
                "initial scaling must be positive with one entry per column".into(),
            ));
        }
    }

    match cfg.log_domain {
        LogDomain::On => Ok(log_domain(a, b, cost, cfg, init)),
        LogDomain::Auto if cfg.lambda < LOG_DOMAIN_LAMBDA => Ok(log_domain(a, b, cost, cfg, init)),
        LogDomain::Auto => match standard_domain(a, b, cost, cfg, init) {
            Ok(plan) => Ok(plan),
            Err(OtError::Stability(_)) => Ok(log_domain(a, b, cost, cfg, init)),
            Err(e) => Err(e),
        },
        LogDomain::Off => standard_domain(a, b, cost, cfg, init),
    }
}

fn scaling_ok(x: f64, target: f64) -> bool {
    if target == 0.0 {
        // zero-mass points get a zero scaling, which is exact
        return x == 0.0 || (x.is_finite() && x <= SCALING_MAX);
    }
    x.is_finite() && (SCALING_MIN..=SCALING_MAX).contains(&x)
}

fn standard_domain(
    a: &[f64],
    b: &[f64],
    cost: &CostMatrix,
    cfg: &SinkhornConfig,
    init: Option<&SinkhornInit>,
) -> Result<TransportPlan> {
    let (n, m) = (a.len(), b.len());
    let lambda = cfg.lambda;
    let kernel: Vec<f64> = cost.as_slice().iter().map(|c| (-c / lambda).exp()).collect();
    if let Some(k) = kernel.iter().position(|&x| x < f64::MIN_POSITIVE) {
        return Err(OtError::Stability(format!(
            "kernel entry ({}, {}) underflows: cost {} at lambda = {lambda}; use log-domain mode",
            k / m,
            k % m,
            cost.as_slice()[k]
        )));
    }

    let mut u = vec![1.0; n];
    let mut v = init.map_or_else(|| vec![1.0; m], |i| i.v.clone());
    let mut ktu = vec![0.0; m];

    let unstable = |what: &str, idx: usize, x: f64| {
        OtError::Stability(format!(
            "scaling {what}[{idx}] = {x:e} left the representable range at lambda = {lambda}; \
             use log-domain mode"
        ))
    };

    let mut iterations = 0;
    let mut violation = f64::INFINITY;
    let mut converged = false;
    while iterations < cfg.max_iter {
        iterations += 1;
        for i in 0..n {
            let kv: f64 = kernel[i * m..(i + 1) * m]
                .iter()
                .zip(&v)
                .map(|(k, vj)| k * vj)
                .sum();
            u[i] = a[i] / kv;
            if !scaling_ok(u[i], a[i]) {
                return Err(unstable("u", i, u[i]));
            }
        }
        ktu.iter_mut().for_each(|x| *x = 0.0);
        for (i, ui) in u.iter().enumerate() {
            for (acc, k) in ktu.iter_mut().zip(&kernel[i * m..(i + 1) * m]) {
                *acc += k * ui;
            }
        }
        for j in 0..m {
            v[j] = b[j] / ktu[j];
            if !scaling_ok(v[j], b[j]) {
                return Err(unstable("v", j, v[j]));
            }
        }

        if iterations % cfg.check_every == 0 || iterations == cfg.max_iter {
            // columns are exact after the v update; the row error measures progress
            let row_err: f64 = (0..n)
                .map(|i| {
                    let kv: f64 = kernel[i * m..(i + 1) * m]
                        .iter()
                        .zip(&v)
                        .map(|(k, vj)| k * vj)
                        .sum();
                    (u[i] * kv - a[i]).abs()
                })
                .sum();
            violation = row_err;
            if !violation.is_finite() {
                return Err(OtError::Stability(format!(
                    "marginal error became non-finite at iteration {iterations}"
                )));
            }
            if violation <= cfg.tol {
                converged = true;
                break;
            }
        }
    }

    let mut data = Vec::with_capacity(n * m);
    for i in 0..n {
        for j in 0..m {
            data.push(u[i] * kernel[i * m + j] * v[j]);
        }
    }
    if data.iter().any(|p| !p.is_finite()) {
        return Err(OtError::Stability("plan contains non-finite entries".into()));
    }
    Ok(finish(data, a, b, cfg.tol, converged, iterations, violation, false))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    data: Vec<f64>,
    a: &[f64],
    b: &[f64],
    tol: f64,
    converged: bool,
    iterations: usize,
    violation: f64,
    log_domain: bool,
) -> TransportPlan {
    let (n, m) = (a.len(), b.len());
    let final_violation = l1_gap(&row_sums(&data, n, m), a).max(l1_gap(&col_sums(&data, n, m), b));
    TransportPlan {
        data,
        n,
        m,
        row_marginal: a.to_vec(),
        col_marginal: b.to_vec(),
        converged: converged || final_violation <= tol,
        iterations,
        marginal_violation: if violation.is_finite() {
            final_violation
        } else {
            violation
        },
        log_domain,
    }
}

/// `ln sum exp(x_k)` with the maximum factored out; `-inf` for an all `-inf`
/// input.
pub(crate) fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn log_domain(
    a: &[f64],
    b: &[f64],
    cost: &CostMatrix,
    cfg: &SinkhornConfig,
    init: Option<&SinkhornInit>,
) -> TransportPlan {
    let (n, m) = (a.len(), b.len());
    let lambda = cfg.lambda;
    let log_a: Vec<f64> = a.iter().map(|x| x.ln()).collect();
    let log_b: Vec<f64> = b.iter().map(|x| x.ln()).collect();
    // potentials divided by lambda, so the plan is exp(f_i + g_j - C_ij / lambda)
    let scaled_cost: Vec<f64> = cost.as_slice().iter().map(|c| c / lambda).collect();
    let mut f = vec![0.0; n];
    let mut g = init.map_or_else(|| vec![0.0; m], |i| i.v.iter().map(|x| x.ln()).collect());

    let row_lse = |g: &[f64], i: usize| {
        log_sum_exp(
            scaled_cost[i * m..(i + 1) * m]
                .iter()
                .zip(g)
                .map(|(c, gj)| gj - c),
        )
    };

    let mut iterations = 0;
    let mut violation = f64::INFINITY;
    let mut converged = false;
    while iterations < cfg.max_iter {
        iterations += 1;
        for i in 0..n {
            f[i] = if a[i] == 0.0 {
                f64::NEG_INFINITY
            } else {
                log_a[i] - row_lse(&g, i)
            };
        }
        for j in 0..m {
            let col = (0..n).map(|i| f[i] - scaled_cost[i * m + j]);
            g[j] = if b[j] == 0.0 {
                f64::NEG_INFINITY
            } else {
                log_b[j] - log_sum_exp(col)
            };
        }
        if iterations % cfg.check_every == 0 || iterations == cfg.max_iter {
            violation = (0..n)
                .map(|i| {
                    let r = if f[i] == f64::NEG_INFINITY {
                        0.0
                    } else {
                        (f[i] + row_lse(&g, i)).exp()
                    };
                    (r - a[i]).abs()
                })
                .sum();
            if violation <= cfg.tol {
                converged = true;
                break;
            }
        }
    }

    let mut data = Vec::with_capacity(n * m);
    for i in 0..n {
        for j in 0..m {
            let e = f[i] + g[j] - scaled_cost[i * m + j];
            data.push(if e == f64::NEG_INFINITY { 0.0 } else { e.exp() });
        }
    }
    finish(data, a, b, cfg.tol, converged, iterations, violation, true)
}

/// `x ln x` with the limit value 0 at 0.
#[inline]
pub(crate) fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Entropy of a plan in the regularizer's convention,
/// `E(P) = -sum p (ln p - 1)`, with zero entries contributing 0.
pub fn regularizer_entropy(p: &[f64]) -> f64 {
    -p.iter()
        .map(|&x| if x > 0.0 { x * (x.ln() - 1.0) } else { 0.0 })
        .sum::<f64>()
}

/// `<C, P>_F - lambda * E(P)`.
pub fn objective_value(plan: &TransportPlan, cost: &CostMatrix, lambda: f64) -> Result<f64> {
    objective_dense(plan.as_slice(), plan.n_rows(), plan.n_cols(), cost, lambda)
}

pub(crate) fn objective_dense(
    p: &[f64],
    n: usize,
    m: usize,
    cost: &CostMatrix,
    lambda: f64,
) -> Result<f64> {
    if n != cost.n_rows() || m != cost.n_cols() || p.len() != n * m {
        return Err(OtError::Config(format!(
            "plan is {n}x{m} but cost is {}x{}",
            cost.n_rows(),
            cost.n_cols()
        )));
    }
    if !(lambda >= 0.0) {
        return Err(OtError::Config(format!("lambda must be nonnegative, got {lambda}")));
    }
    let transport: f64 = p.iter().zip(cost.as_slice()).map(|(p, c)| p * c).sum();
    if lambda == 0.0 {
        return Ok(transport);
    }
    Ok(transport - lambda * regularizer_entropy(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(n: usize) -> Vec<f64> {
        vec![1.0 / n as f64; n]
    }

    #[test]
    fn cosine_cost_examples() {
        let train = FeatureMatrix::from_rows(&[[1.0, 0.0]]).unwrap();
        let test = FeatureMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]]).unwrap();
        let c = cosine_cost_matrix(&train, &test).unwrap();
        assert_eq!(c.row(0), &[0.0, 1.0, 2.0]);
    }

    #[test]
    fn cosine_cost_dimension_mismatch() {
        let a = FeatureMatrix::from_rows(&[[1.0, 0.0]]).unwrap();
        let b = FeatureMatrix::from_rows(&[[1.0, 0.0, 0.0]]).unwrap();
        assert!(matches!(cosine_cost_matrix(&a, &b), Err(OtError::Config(_))));
    }

    #[test]
    fn single_point_plan() {
        let c = CostMatrix::from_rows(&[[0.7]]).unwrap();
        let p = sinkhorn_weights(&[1.0], &[1.0], &c, &SinkhornConfig::default(), None).unwrap();
        assert!((p.get(0, 0) - 1.0).abs() < 1e-12);
        assert!(p.converged);
    }

    #[test]
    fn constant_cost_gives_product_plan() {
        let c = CostMatrix::new(vec![0.4; 12], 3, 4).unwrap();
        let p = sinkhorn_weights(&uniform(3), &uniform(4), &c, &SinkhornConfig::default(), None)
            .unwrap();
        for x in p.as_slice() {
            assert!((x - 1.0 / 12.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_by_two_matches_line_search() {
        // t* from golden-section search of (1 - 2t) - 0.1 E(P(t)) on (0, 0.5),
        // resolution 1e-7; see tests/ot.rs for the search itself.
        let t_star = 0.499_977_301;
        let c = CostMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let p = sinkhorn_weights(&uniform(2), &uniform(2), &c, &SinkhornConfig::default(), None)
            .unwrap();
        assert!((p.get(0, 0) - t_star).abs() < 1e-7, "{}", p.get(0, 0));
        assert!((p.get(0, 1) - (0.5 - t_star)).abs() < 1e-7);
    }

    #[test]
    fn rejects_zero_lambda() {
        let c = CostMatrix::from_rows(&[[0.0]]).unwrap();
        let cfg = SinkhornConfig::with_lambda(0.0);
        assert!(matches!(
            sinkhorn_weights(&[1.0], &[1.0], &c, &cfg, None),
            Err(OtError::Config(_))
        ));
    }

    #[test]
    fn rejects_mismatched_cost() {
        let c = CostMatrix::new(vec![0.0; 4], 2, 2).unwrap();
        let r = sinkhorn_weights(&uniform(3), &uniform(2), &c, &SinkhornConfig::default(), None);
        assert!(matches!(r, Err(OtError::Config(_))));
    }

    #[test]
    fn standard_domain_overflow_is_a_stability_error() {
        let c = CostMatrix::from_rows(&[[0.0, 2.0], [2.0, 0.0], [2.0, 2.0]]).unwrap();
        let cfg = SinkhornConfig {
            lambda: 0.001,
            log_domain: LogDomain::Off,
            ..SinkhornConfig::default()
        };
        let err = sinkhorn_weights(&uniform(3), &uniform(2), &c, &cfg, None).unwrap_err();
        assert!(matches!(err, OtError::Stability(_)));
        assert!(err.to_string().contains("log-domain"));

        let auto = SinkhornConfig {
            log_domain: LogDomain::Auto,
            ..cfg
        };
        let p = sinkhorn_weights(&uniform(3), &uniform(2), &c, &auto, None).unwrap();
        assert!(p.log_domain);
        assert!(p.marginal_violation < 1e-6);
    }

    #[test]
    fn non_convergence_is_reported() {
        let c = CostMatrix::from_rows(&[[0.0, 1.0, 0.3], [1.0, 0.0, 0.8]]).unwrap();
        let cfg = SinkhornConfig {
            lambda: 0.05,
            max_iter: 1,
            ..SinkhornConfig::default()
        };
        let p = sinkhorn_weights(&[0.9, 0.1], &uniform(3), &c, &cfg, None).unwrap();
        assert!(!p.converged);
        assert_eq!(p.iterations, 1);
        assert!(p.marginal_violation > cfg.tol);
        assert!((p.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_weight_rows_receive_no_mass() {
        let c = CostMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0], [0.5, 0.5]]).unwrap();
        for mode in [LogDomain::Off, LogDomain::On] {
            let cfg = SinkhornConfig {
                log_domain: mode,
                ..SinkhornConfig::default()
            };
            let p = sinkhorn_weights(&[0.5, 0.5, 0.0], &uniform(2), &c, &cfg, None).unwrap();
            assert_eq!(p.row(2), &[0.0, 0.0]);
            assert!(p.converged);
        }
    }

    #[test]
    fn objective_examples() {
        let p = TransportPlan::from_rows(&[[1.0]]).unwrap();
        let c = CostMatrix::from_rows(&[[0.3]]).unwrap();
        assert!((objective_value(&p, &c, 0.0).unwrap() - 0.3).abs() < 1e-15);

        let c0 = CostMatrix::from_rows(&[[0.0]]).unwrap();
        assert!((objective_value(&p, &c0, 1.0).unwrap() + 1.0).abs() < 1e-15);

        let prod = TransportPlan::from_rows(&[[0.25, 0.25], [0.25, 0.25]]).unwrap();
        let cc = CostMatrix::new(vec![0.6; 4], 2, 2).unwrap();
        let e = -4.0 * (0.25 * (0.25f64.ln() - 1.0));
        for lambda in [0.1, 1.0, 3.0] {
            let got = objective_value(&prod, &cc, lambda).unwrap();
            assert!((got - (0.6 - lambda * e)).abs() < 1e-14);
        }
    }

    #[test]
    fn objective_dimension_mismatch() {
        let p = TransportPlan::from_rows(&[[0.5, 0.5]]).unwrap();
        let c = CostMatrix::from_rows(&[[0.3]]).unwrap();
        assert!(objective_value(&p, &c, 1.0).is_err());
    }

    #[test]
    fn log_sum_exp_handles_extremes() {
        let xs = [1000.0, 1000.0];
        assert!((log_sum_exp(xs.iter().copied()) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        let empty = [f64::NEG_INFINITY; 2];
        assert_eq!(log_sum_exp(empty.iter().copied()), f64::NEG_INFINITY);
    }
}
