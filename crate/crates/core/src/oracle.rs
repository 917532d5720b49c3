//! Brute-force reference solver for tiny transport problems.
//!
//! Works directly on the primal objective `<C, P> - lambda E(P)` over the
//! transport polytope and shares no code path with the Sinkhorn scalings.
//! With `lambda > 0` it runs cyclic descent along the 2x2 exchange directions
//! (`+t` on `(i, j)`, `(k, l)` and `-t` on `(i, l)`, `(k, j)`), each line
//! minimized by golden-section search. These directions span the polytope's
//! tangent space, and the regularized objective is strictly convex with an
//! interior minimizer, so the descent reaches the unique optimum.
//! With `lambda = 0` the problem is a linear program and every vertex of the
//! polytope is enumerated.

use nalgebra::{DMatrix, DVector};

use crate::error::{OtError, Result};
use crate::measure::validate_weights;
use crate::ot::{objective_dense, CostMatrix};

/// Largest side the oracle accepts.
pub const ORACLE_MAX_SIDE: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct OraclePlan {
    /// Row-major `n x m` coupling.
    pub data: Vec<f64>,
    pub n: usize,
    pub m: usize,
    pub objective: f64,
    /// Descent sweeps (0 for vertex enumeration).
    pub sweeps: usize,
}

impl OraclePlan {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.m + j]
    }
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;
const MAX_SWEEPS: usize = 200_000;

/// Minimizes the regularized (or, for `lambda = 0`, exact) transport objective
/// by brute force.
pub fn brute_force_plan(a: &[f64], b: &[f64], cost: &CostMatrix, lambda: f64) -> Result<OraclePlan> {
    validate_weights(a)?;
    validate_weights(b)?;
    let (n, m) = (a.len(), b.len());
    if cost.n_rows() != n || cost.n_cols() != m {
        return Err(OtError::Config(format!(
            "cost is {}x{} but measures have {n} and {m} points",
            cost.n_rows(),
            cost.n_cols()
        )));
    }
    if n > ORACLE_MAX_SIDE || m > ORACLE_MAX_SIDE {
        return Err(OtError::Config(format!(
            "oracle is limited to {ORACLE_MAX_SIDE}x{ORACLE_MAX_SIDE}, got {n}x{m}"
        )));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(OtError::Config(format!("lambda must be nonnegative, got {lambda}")));
    }
    if lambda == 0.0 {
        vertex_enumeration(a, b, cost)
    } else {
        exchange_descent(a, b, cost, lambda)
    }
}

fn exchange_descent(a: &[f64], b: &[f64], cost: &CostMatrix, lambda: f64) -> Result<OraclePlan> {
    let (n, m) = (a.len(), b.len());
    let mut p: Vec<f64> = (0..n * m).map(|k| a[k / m] * b[k % m]).collect();
    let idx = |i: usize, j: usize| i * m + j;

    let mut moves = Vec::new();
    for i in 0..n {
        for k in i + 1..n {
            for j in 0..m {
                for l in j + 1..m {
                    moves.push((idx(i, j), idx(k, l), idx(i, l), idx(k, j)));
                }
            }
        }
    }

    let obj = |p: &[f64]| objective_dense(p, n, m, cost, lambda).expect("shape checked");
    let mut sweeps = 0;
    let mut current = obj(&p);
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut largest_step: f64 = 0.0;
        for &(plus1, plus2, minus1, minus2) in &moves {
            let lo = -p[plus1].min(p[plus2]);
            let hi = p[minus1].min(p[minus2]);
            if hi - lo <= 0.0 {
                continue;
            }
            let eval = |t: f64| {
                let mut q = p.clone();
                q[plus1] += t;
                q[plus2] += t;
                q[minus1] -= t;
                q[minus2] -= t;
                obj(&q)
            };
            let t = golden_section(eval, lo, hi);
            let candidate = eval(t);
            if candidate < current {
                p[plus1] += t;
                p[plus2] += t;
                p[minus1] -= t;
                p[minus2] -= t;
                for k in [plus1, plus2, minus1, minus2] {
                    p[k] = p[k].max(0.0);
                }
                current = obj(&p);
                largest_step = largest_step.max(t.abs());
            }
        }
        if largest_step < 1e-13 {
            break;
        }
    }
    Ok(OraclePlan {
        data: p,
        n,
        m,
        objective: current,
        sweeps,
    })
}

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if hi - lo <= 1e-15 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Every basic feasible solution has at most `n + m - 1` nonzero cells; try
/// each cell subset of that size, solve the marginal equations on it, and
/// keep the cheapest nonnegative solution.
fn vertex_enumeration(a: &[f64], b: &[f64], cost: &CostMatrix) -> Result<OraclePlan> {
    let (n, m) = (a.len(), b.len());
    let cells = n * m;
    let basis = n + m - 1;
    let rhs = DVector::from_iterator(n + m, a.iter().chain(b).copied());

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut subset: Vec<usize> = (0..basis).collect();
    loop {
        let mut system = DMatrix::<f64>::zeros(n + m, basis);
        for (col, &cell) in subset.iter().enumerate() {
            system[(cell / m, col)] = 1.0;
            system[(n + cell % m, col)] = 1.0;
        }
        let svd = system.clone().svd(true, true);
        if let Ok(x) = svd.solve(&rhs, 1e-12) {
            let residual = (&system * &x - &rhs).amax();
            if residual < 1e-10 && x.iter().all(|&v| v >= -1e-12) {
                let mut p = vec![0.0; cells];
                for (col, &cell) in subset.iter().enumerate() {
                    p[cell] = x[col].max(0.0);
                }
                let value = objective_dense(&p, n, m, cost, 0.0)?;
                if best.as_ref().is_none_or(|(v, _)| value < *v) {
                    best = Some((value, p));
                }
            }
        }
        if !next_combination(&mut subset, cells) {
            break;
        }
    }
    let (objective, data) =
        best.ok_or_else(|| OtError::Stability("no feasible vertex found".into()))?;
    Ok(OraclePlan {
        data,
        n,
        m,
        objective,
        sweeps: 0,
    })
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
