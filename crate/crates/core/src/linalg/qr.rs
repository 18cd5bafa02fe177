use super::{check_dim, DenseMatrix};
use crate::error::Result;

/// Relative size below which an R-diagonal entry marks its column as
/// numerically dependent on the columns before it.
pub const DEFAULT_DROP_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    /// One coefficient per column of `A`; dropped columns get exactly 0.
    pub coefficients: Vec<f64>,
    /// `min ||A x - b||_2`, read off the trailing part of `Q^T b`.
    pub residual_norm: f64,
    /// Indices of the columns removed as numerically dependent.
    pub dropped: Vec<usize>,
}

/// Minimizes `||A x - b||_2` with Householder QR.
///
/// Columns whose R-diagonal falls below `1e-10 * max |R_ii|` are dropped and
/// their coefficients set to zero, so the result is a basic solution rather
/// than the minimum-norm one.
pub fn qr_least_squares(a: &DenseMatrix, b: &[f64]) -> Result<LeastSquares> {
    qr_least_squares_with_threshold(a, b, DEFAULT_DROP_THRESHOLD)
}

pub fn qr_least_squares_with_threshold(
    a: &DenseMatrix,
    b: &[f64],
    threshold: f64,
) -> Result<LeastSquares> {
    let n = a.rows();
    let m = a.cols();
    check_dim(n, b.len())?;
    if m == 0 {
        return Ok(LeastSquares {
            coefficients: Vec::new(),
            residual_norm: super::norm2(b),
            dropped: Vec::new(),
        });
    }

    let mut excluded = vec![false; m];
    loop {
        let fac = factor(a, b, &excluded, threshold);
        // A column accepted early can look tiny once a later, much larger
        // diagonal is known. Refactor without it until the set is stable.
        let max_diag = fac.diag.iter().fold(0.0_f64, |acc, d| acc.max(d.abs()));
        let mut changed = false;
        for (pos, &j) in fac.kept.iter().enumerate() {
            if fac.diag[pos].abs() <= threshold * max_diag {
                excluded[j] = true;
                changed = true;
            }
        }
        if changed {
            continue;
        }

        let k = fac.kept.len();
        let mut coef_kept = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = fac.qtb[i];
            for l in i + 1..k {
                s -= fac.cols[fac.kept[l]][i] * coef_kept[l];
            }
            coef_kept[i] = s / fac.cols[fac.kept[i]][i];
        }
        let mut coefficients = vec![0.0; m];
        for (pos, &j) in fac.kept.iter().enumerate() {
            coefficients[j] = coef_kept[pos];
        }
        let residual_norm = fac.qtb[k..].iter().map(|x| x * x).sum::<f64>().sqrt();
        let dropped = (0..m).filter(|j| !fac.kept.contains(j)).collect();
        return Ok(LeastSquares {
            coefficients,
            residual_norm,
            dropped,
        });
    }
}

struct Factorization {
    /// Column-major working copy; after factoring, `cols[kept[l]][..=l]` is
    /// column `l` of R.
    cols: Vec<Vec<f64>>,
    qtb: Vec<f64>,
    kept: Vec<usize>,
    diag: Vec<f64>,
}

fn factor(a: &DenseMatrix, b: &[f64], excluded: &[bool], threshold: f64) -> Factorization {
    let n = a.rows();
    let m = a.cols();
    let mut cols: Vec<Vec<f64>> = (0..m).map(|j| a.column(j)).collect();
    let mut qtb = b.to_vec();
    let mut kept = Vec::new();
    let mut diag: Vec<f64> = Vec::new();
    let mut max_diag = 0.0_f64;
    let mut row = 0;

    for j in 0..m {
        if excluded[j] || row >= n {
            continue;
        }
        let sigma = cols[j][row..].iter().map(|x| x * x).sum::<f64>().sqrt();
        if sigma == 0.0 || sigma <= threshold * max_diag.max(sigma) {
            continue;
        }
        let x0 = cols[j][row];
        let alpha = if x0 >= 0.0 { -sigma } else { sigma };
        let mut v = cols[j][row..].to_vec();
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|x| x * x).sum();

        cols[j][row] = alpha;
        for x in cols[j][row + 1..].iter_mut() {
            *x = 0.0;
        }
        if vtv > 0.0 {
            for c in cols.iter_mut().skip(j + 1) {
                reflect(&v, vtv, &mut c[row..]);
            }
            reflect(&v, vtv, &mut qtb[row..]);
        }
        kept.push(j);
        diag.push(alpha);
        max_diag = max_diag.max(sigma);
        row += 1;
    }
    Factorization {
        cols,
        qtb,
        kept,
        diag,
    }
}

fn reflect(v: &[f64], vtv: f64, x: &mut [f64]) {
    let s = 2.0 * super::dot(v, x) / vtv;
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= s * vi;
    }
}
