use super::grid::GridSpec;
use super::heat::sine_bump;
use crate::error::{Error, Result};
use crate::linalg::StateVec;
use crate::timestep::OdeSystem;

#[derive(Debug, Clone, PartialEq)]
pub struct BurgersParams {
    pub grid: GridSpec,
    pub nu: f64,
}

impl BurgersParams {
    pub fn new(grid: GridSpec, nu: f64) -> Result<Self> {
        let params = Self { grid, nu };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.dims() != 1 {
            return Err(Error::InvalidArgument(format!(
                "burgers needs a 1D grid, got {} axes",
                self.grid.dims()
            )));
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::InvalidArgument(format!("viscosity must be positive, got {}", self.nu)));
        }
        Ok(())
    }

    /// `u0(x) = sin(pi x / L)`.
    pub fn initial_condition(&self) -> StateVec {
        sine_bump(&self.grid)
    }
}

/// Viscous Burgers `u' = -u u_x + nu u_xx`, central differences.
#[derive(Debug, Clone)]
pub struct BurgersSystem {
    params: BurgersParams,
}

pub fn burgers_system(params: BurgersParams) -> Result<BurgersSystem> {
    params.validate()?;
    Ok(BurgersSystem { params })
}

impl BurgersSystem {
    pub fn params(&self) -> &BurgersParams {
        &self.params
    }
}

impl OdeSystem for BurgersSystem {
    fn dim(&self) -> usize {
        self.params.grid.dof_count()
    }

    fn rhs(&self, _t: f64, x: &[f64], out: &mut [f64]) {
        let n = x.len();
        let h = self.params.grid.spacing(0);
        let nu = self.params.nu;
        for i in 0..n {
            let left = if i > 0 { x[i - 1] } else { 0.0 };
            let right = if i + 1 < n { x[i + 1] } else { 0.0 };
            out[i] = -x[i] * (right - left) / (2.0 * h) + nu * (right - 2.0 * x[i] + left) / (h * h);
        }
    }
}
