use super::grid::GridSpec;
use super::heat::sine_bump;
use crate::error::{Error, Result};
use crate::linalg::StateVec;
use crate::timestep::OdeSystem;

#[derive(Debug, Clone, PartialEq)]
pub struct PLaplacianParams {
    pub grid: GridSpec,
    pub p: f64,
    pub epsilon: f64,
}

impl PLaplacianParams {
    pub fn new(grid: GridSpec, p: f64) -> Result<Self> {
        let params = Self { grid, p, epsilon: 0.0 };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 2.0 && self.p.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "p-Laplacian exponent must satisfy p >= 2, got {}",
                self.p
            )));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "regularization must be non-negative, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    pub fn initial_condition(&self) -> StateVec {
        sine_bump(&self.grid)
    }
}

/// `u' = div(|grad u|^{p-2} grad u)` with zero Dirichlet data.
///
/// Per cell, `|grad u|^2` is the sum over axes of the mean squared edge
/// difference quotient; the discrete operator is the gradient of
/// `sum_c vol (1/p) |grad u|_c^p`, divided by the cell volume. It is
/// monotone and equals the finite-difference Laplacian at `p = 2`.
#[derive(Debug, Clone)]
pub struct PLaplacianSystem {
    params: PLaplacianParams,
}

pub fn plaplacian_system(params: PLaplacianParams) -> Result<PLaplacianSystem> {
    params.validate()?;
    Ok(PLaplacianSystem { params })
}

impl PLaplacianSystem {
    pub fn params(&self) -> &PLaplacianParams {
        &self.params
    }

    /// `A(u) = -div(|grad u|^{p-2} grad u)`, so that `rhs = -A(u)`.
    pub fn operator(&self, u: &[f64], out: &mut [f64]) {
        let g = &self.params.grid;
        let d = g.dims();
        let corners = 1usize << d;
        let w = 1.0 / (1usize << (d - 1)) as f64;
        let h: Vec<f64> = (0..d).map(|a| g.spacing(a)).collect();
        let exponent = 0.5 * (self.params.p - 2.0);
        let eps2 = self.params.epsilon * self.params.epsilon;

        out.iter_mut().for_each(|v| *v = 0.0);
        let mut vals = [0.0; 8];
        let mut dofs = [None; 8];
        let mut cell = [0usize; 3];
        let mut node = [0usize; 3];
        let total: usize = g.cells().iter().product();
        for _ in 0..total {
            for c in 0..corners {
                for a in 0..d {
                    node[a] = cell[a] + ((c >> a) & 1);
                }
                dofs[c] = g.node_dof(&node[..d]);
                vals[c] = dofs[c].map_or(0.0, |k| u[k]);
            }
            let mut s = 0.0;
            for a in 0..d {
                for lo in (0..corners).filter(|c| c & (1 << a) == 0) {
                    let de = (vals[lo | (1 << a)] - vals[lo]) / h[a];
                    s += w * de * de;
                }
            }
            let factor = if exponent == 0.0 { 1.0 } else { (s + eps2).powf(exponent) };
            if factor != 0.0 {
                for a in 0..d {
                    for lo in (0..corners).filter(|c| c & (1 << a) == 0) {
                        let hi = lo | (1 << a);
                        let flux = factor * w * (vals[hi] - vals[lo]) / (h[a] * h[a]);
                        if let Some(k) = dofs[hi] {
                            out[k] += flux;
                        }
                        if let Some(k) = dofs[lo] {
                            out[k] -= flux;
                        }
                    }
                }
            }
            for a in 0..d {
                cell[a] += 1;
                if cell[a] < g.cells()[a] {
                    break;
                }
                cell[a] = 0;
            }
        }
    }

    pub fn operator_vec(&self, u: &[f64]) -> StateVec {
        let mut out = vec![0.0; u.len()];
        self.operator(u, &mut out);
        out
    }
}

impl OdeSystem for PLaplacianSystem {
    fn dim(&self) -> usize {
        self.params.grid.dof_count()
    }

    fn rhs(&self, _t: f64, x: &[f64], out: &mut [f64]) {
        self.operator(x, out);
        out.iter_mut().for_each(|v| *v = -*v);
    }
}
