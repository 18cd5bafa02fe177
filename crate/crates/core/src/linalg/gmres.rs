use super::{axpy, check_dim, dot, norm2, LinearOperator, StateVec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GmresOutcome {
    pub x: StateVec,
    /// `residual_trace[k] = ||b - A x_k||_2`, starting from `x_0 = 0`.
    pub residual_trace: Vec<f64>,
    pub converged: bool,
}

impl GmresOutcome {
    pub fn iterations(&self) -> usize {
        self.residual_trace.len() - 1
    }
}

/// Full (unrestarted) GMRES from a zero initial guess.
///
/// Arnoldi with twice-iterated modified Gram-Schmidt and Givens rotations.
/// Every trace entry is the true residual of the corresponding iterate, not
/// the Givens estimate; this is an oracle and accuracy beats speed here.
pub fn gmres_solve(
    op: &dyn LinearOperator,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<GmresOutcome> {
    let n = op.dim();
    check_dim(n, b.len())?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("gmres tolerance must be positive, got {tol}")));
    }
    let beta = norm2(b);
    let mut x = vec![0.0; n];
    let mut trace = vec![beta];
    if beta == 0.0 {
        return Ok(GmresOutcome {
            x,
            residual_trace: trace,
            converged: true,
        });
    }

    let max_iter = max_iter.min(n);
    let mut basis: Vec<StateVec> = vec![b.iter().map(|v| v / beta).collect()];
    // Column k of the Hessenberg matrix after rotation: upper-triangular R.
    let mut r_cols: Vec<Vec<f64>> = Vec::new();
    let mut rotations: Vec<(f64, f64)> = Vec::new();
    let mut g = vec![beta];
    let mut w = vec![0.0; n];

    for k in 0..max_iter {
        op.apply(&basis[k], &mut w);
        let mut h = vec![0.0; k + 2];
        for _pass in 0..2 {
            for (i, v) in basis.iter().enumerate() {
                let c = dot(&w, v);
                h[i] += c;
                axpy(-c, v, &mut w);
            }
        }
        let h_next = norm2(&w);
        h[k + 1] = h_next;

        for (i, &(c, s)) in rotations.iter().enumerate() {
            let (hi, hj) = (h[i], h[i + 1]);
            h[i] = c * hi + s * hj;
            h[i + 1] = -s * hi + c * hj;
        }
        let (hk, hk1) = (h[k], h[k + 1]);
        let rho = hk.hypot(hk1);
        if rho == 0.0 {
            return Err(Error::Singular(format!("gmres breakdown at iteration {k}: singular Hessenberg")));
        }
        let (c, s) = (hk / rho, hk1 / rho);
        rotations.push((c, s));
        h[k] = rho;
        h[k + 1] = 0.0;
        let gk = g[k];
        g[k] = c * gk;
        g.push(-s * gk);
        h.truncate(k + 1);
        r_cols.push(h);

        // y = R^{-1} g[..=k]
        let m = k + 1;
        let mut y = vec![0.0; m];
        for i in (0..m).rev() {
            let mut s = g[i];
            for (l, yl) in y.iter().enumerate().skip(i + 1) {
                s -= r_cols[l][i] * yl;
            }
            y[i] = s / r_cols[i][i];
        }
        x.iter_mut().for_each(|v| *v = 0.0);
        for (v, yi) in basis.iter().zip(&y) {
            axpy(*yi, v, &mut x);
        }
        let ax = op.apply_vec(&x);
        let res = norm2(&super::sub(b, &ax));
        trace.push(res);

        let happy = h_next <= 1e-14 * beta;
        if res <= tol * beta || happy {
            return Ok(GmresOutcome {
                x,
                residual_trace: trace,
                converged: res <= tol * beta || happy,
            });
        }
        basis.push(w.iter().map(|v| v / h_next).collect());
    }
    let converged = *trace.last().unwrap() <= tol * beta;
    Ok(GmresOutcome {
        x,
        residual_trace: trace,
        converged,
    })
}
