//! Anderson-accelerated Richardson against full GMRES on SPD systems.
//!
//! For `G(x) = x + b - A x` with unbounded depth and `x0 = 0`, the minimum of
//! the mixing problem at iteration `k` is the GMRES residual norm after
//! `k - 1` Krylov steps.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::anderson::{Anderson, AndersonConfig};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, gmres_solve, norm2, DenseMatrix, LinearOperator, StateVec};

/// GMRES stopping tolerance (relative to `|b|`) for the oracle trace.
pub const GMRES_TRACE_TOL: f64 = 1e-10;

/// Random SPD matrix `Q diag(lambda) Q^T` whose eigenvalues are log-uniform
/// in `[1/condition, 1]`, both ends included so the condition number is exact.
pub fn random_spd(n: usize, condition: f64, rng: &mut impl Rng) -> Result<DenseMatrix> {
    if n == 0 || !(condition >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "need n >= 1 and condition >= 1, got n={n}, condition={condition}"
        )));
    }
    let q = random_orthogonal(n, rng);
    let lo = -(condition.ln());
    let lambda: Vec<f64> = (0..n)
        .map(|i| match i {
            0 => 1.0,
            _ if i == n - 1 => 1.0 / condition,
            _ => (rng.gen::<f64>() * lo).exp(),
        })
        .collect();
    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v: f64 = (0..n).map(|k| q[k][i] * lambda[k] * q[k][j]).sum();
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    Ok(a)
}

/// Rows of a random orthogonal matrix, by Gram-Schmidt (applied twice) on
/// Gaussian vectors.
fn random_orthogonal(n: usize, rng: &mut impl Rng) -> Vec<StateVec> {
    let mut rows: Vec<StateVec> = Vec::with_capacity(n);
    while rows.len() < n {
        let mut v: StateVec = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            for r in &rows {
                let c = dot(&v, r);
                axpy(-c, r, &mut v);
            }
        }
        let nv = norm2(&v);
        if nv > 1e-8 {
            rows.push(v.into_iter().map(|x| x / nv).collect());
        }
    }
    rows
}

pub fn random_rhs(n: usize, rng: &mut impl Rng) -> StateVec {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceComparison {
    /// Mixing minima of accelerated Richardson, one per iteration.
    pub anderson: Vec<f64>,
    /// True residual norms of the GMRES iterates, starting at `|b|`.
    pub gmres: Vec<f64>,
    /// Entries compared: every GMRES entry above `GMRES_TRACE_TOL |b|`.
    /// The converged final entry sits at roundoff level and is left out.
    pub compared: usize,
    /// `max_k |anderson[k] - gmres[k]| / gmres[k]` over the compared entries.
    pub max_relative_mismatch: f64,
}

impl TraceComparison {
    pub fn relative_mismatch(&self) -> Vec<f64> {
        self.anderson
            .iter()
            .zip(&self.gmres)
            .take(self.compared)
            .map(|(m, g)| (m - g).abs() / g)
            .collect()
    }

    /// Leading compared entries that agree within `tol`.
    pub fn agreeing_prefix(&self, tol: f64) -> usize {
        self.relative_mismatch().iter().take_while(|e| **e <= tol).count()
    }
}

/// Runs both methods on `A x = b` and compares the traces entrywise.
pub fn compare_with_gmres(a: &dyn LinearOperator, b: &[f64]) -> Result<TraceComparison> {
    let n = a.dim();
    let gm = gmres_solve(a, b, GMRES_TRACE_TOL, n)?;
    let trace = gm.residual_trace;

    let mut aa = Anderson::new(AndersonConfig::unbounded())?;
    let mut u = vec![0.0; n];
    let mut mixed = Vec::with_capacity(trace.len());
    let mut au = vec![0.0; n];
    while mixed.len() < trace.len() {
        a.apply(&u, &mut au);
        let g: StateVec = u.iter().zip(b).zip(&au).map(|((ui, bi), ai)| ui + bi - ai).collect();
        let step = aa.step(&u, &g)?;
        let norm = step
            .mixed_residual_norm
            .ok_or_else(|| Error::InvalidArgument("unbounded Anderson step reported no mixing".into()))?;
        mixed.push(norm);
        u = step.next;
    }
    let floor = GMRES_TRACE_TOL * norm2(b);
    let compared = trace.iter().take_while(|g| **g > floor).count();
    let mut cmp = TraceComparison {
        anderson: mixed,
        gmres: trace,
        compared,
        max_relative_mismatch: 0.0,
    };
    cmp.max_relative_mismatch = cmp.relative_mismatch().into_iter().fold(0.0, f64::max);
    Ok(cmp)
}
