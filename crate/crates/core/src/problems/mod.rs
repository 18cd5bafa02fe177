//! Benchmark systems and stability thresholds.

mod burgers;
mod fhn;
mod grid;
mod heat;
mod plaplacian;

pub use burgers::{burgers_system, BurgersParams, BurgersSystem};
pub use fhn::{fhn_picard_matrix_step, fhn_system, FhnParams, FhnSystem};
pub use grid::{ConsistentMass, GridSpec, Stiffness, StiffnessKind};
pub use heat::{cfl_threshold, heat_system, HeatProblem, HeatSystem, MassMode};
pub use plaplacian::{plaplacian_system, PLaplacianParams, PLaplacianSystem};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::StateVec;
use crate::timestep::OdeSystem;

/// Initial field for the grid problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialField {
    /// `prod_a sin(pi x_a / L_a)`, the lowest Dirichlet mode.
    Sine,
    /// `prod_a 4 (x_a / L_a) (1 - x_a / L_a)`: smooth, unit peak, not an eigenvector.
    Bubble,
    /// Independent uniform values in `[-1, 1]` at every node; excites every mode.
    Random,
}

impl InitialField {
    pub fn as_str(&self) -> &'static str {
        match self {
            InitialField::Sine => "sine",
            InitialField::Bubble => "bubble",
            InitialField::Random => "random",
        }
    }

    /// Samples the field on `grid`; `seed` only affects [`InitialField::Random`].
    pub fn sample(&self, grid: &GridSpec, seed: u64) -> StateVec {
        match self {
            InitialField::Sine => heat::sine_bump(grid),
            InitialField::Bubble => {
                let extent = grid.extent().to_vec();
                grid.sample(|x| x.iter().zip(&extent).map(|(xi, l)| 4.0 * (xi / l) * (1.0 - xi / l)).product())
            }
            InitialField::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..grid.dof_count()).map(|_| rng.gen_range(-1.0..=1.0)).collect()
            }
        }
    }
}

impl std::str::FromStr for InitialField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sine" => Ok(InitialField::Sine),
            "bubble" => Ok(InitialField::Bubble),
            "random" => Ok(InitialField::Random),
            _ => Err(Error::InvalidArgument(format!(
                "unknown initial field '{s}' (expected sine, bubble or random)"
            ))),
        }
    }
}

/// Scalar linear test equation `x' = lambda x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearScalar {
    pub lambda: f64,
}

impl LinearScalar {
    pub fn new(lambda: f64) -> Self {
        Self { lambda }
    }
}

impl OdeSystem for LinearScalar {
    fn dim(&self) -> usize {
        1
    }

    fn rhs(&self, _t: f64, x: &[f64], out: &mut [f64]) {
        out[0] = self.lambda * x[0];
    }

    fn lipschitz_estimate(&self) -> Option<f64> {
        Some(self.lambda.abs())
    }

    fn implicit_oracle(&self, _t: f64, x_prev: &[f64], dt: f64, _tol: f64) -> Option<Result<StateVec>> {
        Some(Ok(vec![x_prev[0] / (1.0 - dt * self.lambda)]))
    }
}
