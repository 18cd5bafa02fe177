use crate::error::{Error, Result};
use crate::linalg::{check_dim, norm_inf, StateVec};
use crate::timestep::{scaled_implicit_residual, OdeSystem};

/// FitzHugh-Nagumo parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FhnParams {
    pub a: f64,
    pub b: f64,
    pub r: f64,
    pub tau: f64,
    pub i_ext: f64,
}

impl Default for FhnParams {
    /// Spiking regime: `a = 0.7, b = 0.8, tau = 5, R = 1, I_ext = 0.5`.
    fn default() -> Self {
        Self {
            a: 0.7,
            b: 0.8,
            r: 1.0,
            tau: 5.0,
            i_ext: 0.5,
        }
    }
}

impl FhnParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) {
            return Err(Error::InvalidArgument(format!("tau must be positive, got {}", self.tau)));
        }
        Ok(())
    }
}

/// `v' = v - v^3/3 - w + R I_ext`, `tau w' = v + a - b w`.
#[derive(Debug, Clone)]
pub struct FhnSystem {
    params: FhnParams,
}

pub fn fhn_system(params: FhnParams) -> FhnSystem {
    FhnSystem { params }
}

impl FhnSystem {
    pub fn try_new(params: FhnParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }

    pub fn params(&self) -> &FhnParams {
        &self.params
    }
}

impl OdeSystem for FhnSystem {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, _t: f64, x: &[f64], out: &mut [f64]) {
        let p = &self.params;
        let (v, w) = (x[0], x[1]);
        out[0] = v - v * v * v / 3.0 - w + p.r * p.i_ext;
        out[1] = (v + p.a - p.b * w) / p.tau;
    }

    fn implicit_oracle(&self, t: f64, x_prev: &[f64], dt: f64, tol: f64) -> Option<Result<StateVec>> {
        Some(fhn_picard_solve(self, t, x_prev, dt, tol))
    }
}

/// One Picard sweep: solves the 2x2 linear system obtained by freezing the
/// cubic coefficient at `(v^{n,k})^2 / 3`.
pub fn fhn_picard_matrix_step(params: &FhnParams, prev: &[f64], current: &[f64], dt: f64) -> Result<StateVec> {
    check_dim(2, prev.len())?;
    check_dim(2, current.len())?;
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    let vk = current[0];
    let a11 = 1.0 / dt - 1.0 + vk * vk / 3.0;
    let a12 = 1.0;
    let a21 = -1.0;
    let a22 = params.tau / dt + params.b;
    let b1 = prev[0] / dt + params.r * params.i_ext;
    let b2 = params.a + params.tau * prev[1] / dt;
    let det = a11 * a22 - a12 * a21;
    if det.abs() < 1e-14 {
        return Err(Error::Singular(format!("fhn picard matrix determinant {det:e}")));
    }
    Ok(vec![(b1 * a22 - a12 * b2) / det, (a11 * b2 - a21 * b1) / det])
}

const PICARD_MAX_ITER: usize = 1000;

fn fhn_picard_solve(sys: &FhnSystem, t: f64, prev: &[f64], dt: f64, tol: f64) -> Result<StateVec> {
    let mut x = prev.to_vec();
    let mut res = f64::INFINITY;
    for _ in 0..PICARD_MAX_ITER {
        x = fhn_picard_matrix_step(&sys.params, prev, &x, dt)?;
        res = norm_inf(&scaled_implicit_residual(sys, t, prev, dt, &x)?);
        if !res.is_finite() {
            break;
        }
        if res <= tol {
            return Ok(x);
        }
    }
    Err(Error::OracleNotConverged {
        solver: "fhn picard",
        iterations: PICARD_MAX_ITER,
        residual: res,
    })
}
