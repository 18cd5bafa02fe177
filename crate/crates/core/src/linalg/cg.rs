use super::{axpy, check_dim, dot, norm2, LinearOperator, StateVec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preconditioner {
    Identity,
    /// Inverse of the operator's main diagonal.
    #[default]
    Jacobi,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub x: StateVec,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Preconditioned conjugate gradients from a zero initial guess.
///
/// Stops once `||b - A x|| <= tol * ||b||` (recursively updated residual).
pub fn cg_solve(
    op: &dyn LinearOperator,
    b: &[f64],
    precond: Preconditioner,
    tol: f64,
    max_iter: usize,
) -> Result<CgOutcome> {
    cg_solve_traced(op, b, precond, tol, max_iter, |_| {})
}

/// As [`cg_solve`], calling `on_iterate` with every iterate `x_k`, `k >= 1`.
pub fn cg_solve_traced(
    op: &dyn LinearOperator,
    b: &[f64],
    precond: Preconditioner,
    tol: f64,
    max_iter: usize,
    mut on_iterate: impl FnMut(&[f64]),
) -> Result<CgOutcome> {
    let n = op.dim();
    check_dim(n, b.len())?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("cg tolerance must be positive, got {tol}")));
    }
    let inv_diag = match precond {
        Preconditioner::Identity => None,
        Preconditioner::Jacobi => {
            let d = op.diagonal().ok_or_else(|| {
                Error::InvalidArgument("jacobi preconditioner needs the operator diagonal".into())
            })?;
            if let Some(i) = d.iter().position(|v| *v == 0.0 || !v.is_finite()) {
                return Err(Error::Singular(format!("zero or non-finite diagonal entry at {i}")));
            }
            Some(d.iter().map(|v| 1.0 / v).collect::<Vec<_>>())
        }
    };
    let apply_precond = |r: &[f64], z: &mut [f64]| match &inv_diag {
        Some(inv) => {
            for ((zi, ri), di) in z.iter_mut().zip(r).zip(inv) {
                *zi = ri * di;
            }
        }
        None => z.copy_from_slice(r),
    };

    let b_norm = norm2(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(CgOutcome {
            x,
            iterations: 0,
            relative_residual: 0.0,
        });
    }

    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    apply_precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut rel = 1.0;

    for k in 1..=max_iter {
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Singular(format!(
                "operator not positive definite along search direction (p^T A p = {pap:e})"
            )));
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        on_iterate(&x);

        rel = norm2(&r) / b_norm;
        if rel <= tol {
            return Ok(CgOutcome {
                x,
                iterations: k,
                relative_residual: rel,
            });
        }
        apply_precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Err(Error::CgNotConverged {
        x,
        iterations: max_iter,
        relative_residual: rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{DenseMatrix, DiagonalOperator, IdentityOperator};
    use approx::assert_relative_eq;

    #[test]
    fn identity_in_one_iteration() {
        let b = vec![1.0, -2.0, 3.5];
        let out = cg_solve(&IdentityOperator(3), &b, Preconditioner::Identity, 1e-10, 3).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.x, b);
    }

    #[test]
    fn jacobi_inverts_diagonal_exactly() {
        let op = DiagonalOperator(vec![1.0, 2.0, 4.0]);
        let out = cg_solve(&op, &[1.0, 2.0, 4.0], Preconditioner::Jacobi, 1e-10, 3).unwrap();
        assert_eq!(out.iterations, 1);
        for v in out.x {
            assert_relative_eq!(v, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn zero_rhs_is_trivial() {
        let out = cg_solve(&IdentityOperator(2), &[0.0, 0.0], Preconditioner::Jacobi, 1e-10, 2).unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(out.x, vec![0.0, 0.0]);
    }

    #[test]
    fn non_convergence_carries_best_iterate() {
        // 1D Laplacian needs more than 2 iterations
        let n = 8;
        let mut a = DenseMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = 2.0;
            if i > 0 {
                a[(i, i - 1)] = -1.0;
                a[(i - 1, i)] = -1.0;
            }
        }
        let b = vec![1.0; n];
        match cg_solve(&a, &b, Preconditioner::Identity, 1e-12, 2) {
            Err(Error::CgNotConverged { x, iterations, relative_residual }) => {
                assert_eq!(iterations, 2);
                assert_eq!(x.len(), n);
                assert!(relative_residual > 1e-12 && relative_residual.is_finite());
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
        let ok = cg_solve(&a, &b, Preconditioner::Identity, 1e-12, n).unwrap();
        assert!(ok.iterations <= n);
    }

    #[test]
    fn rejects_indefinite_and_bad_tolerance() {
        let op = DiagonalOperator(vec![1.0, -1.0]);
        assert!(cg_solve(&op, &[1.0, 1.0], Preconditioner::Identity, 1e-10, 5).is_err());
        assert!(cg_solve(&op, &[1.0, 1.0], Preconditioner::Identity, 0.0, 5).is_err());
        let zero_diag = DiagonalOperator(vec![1.0, 0.0]);
        assert!(matches!(
            cg_solve(&zero_diag, &[1.0, 1.0], Preconditioner::Jacobi, 1e-10, 5),
            Err(Error::Singular(_))
        ));
    }
}
