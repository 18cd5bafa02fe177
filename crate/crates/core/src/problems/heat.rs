use std::f64::consts::PI;
use std::sync::Arc;

use super::grid::{ConsistentMass, GridSpec, Stiffness, StiffnessKind};
use crate::error::{Error, Result};
use crate::linalg::{cg_solve, dot, norm_inf, DiagonalOperator, LinearOperator, Preconditioner, StateVec};
use crate::timestep::{scaled_implicit_residual, MassMatrix, OdeSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassMode {
    /// Finite differences, identity mass.
    IdentityFd,
    /// Q1 stiffness with a row-summed (diagonal) mass.
    LumpedFe,
    /// Q1 stiffness with the consistent Q1 mass, inverted by Jacobi CG.
    ConsistentFe,
}

impl MassMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            MassMode::IdentityFd => "identity_fd",
            MassMode::LumpedFe => "lumped_fe",
            MassMode::ConsistentFe => "consistent_fe",
        }
    }
}

impl std::str::FromStr for MassMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity_fd" => Ok(MassMode::IdentityFd),
            "lumped_fe" => Ok(MassMode::LumpedFe),
            "consistent_fe" => Ok(MassMode::ConsistentFe),
            other => Err(Error::InvalidArgument(format!(
                "unknown mass mode '{other}' (expected identity_fd, lumped_fe or consistent_fe)"
            ))),
        }
    }
}

/// `M u' = -mu K u` on a structured grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatProblem {
    pub grid: GridSpec,
    pub mu: f64,
    pub mass_mode: MassMode,
}

impl HeatProblem {
    pub fn new(grid: GridSpec, mu: f64, mass_mode: MassMode) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidArgument(format!("diffusion coefficient must be positive, got {mu}")));
        }
        Ok(Self { grid, mu, mass_mode })
    }

    /// `u0(x) = prod_a sin(pi x_a / L_a)`.
    pub fn initial_condition(&self) -> StateVec {
        sine_bump(&self.grid)
    }
}

pub(crate) fn sine_bump(grid: &GridSpec) -> StateVec {
    let extent = grid.extent().to_vec();
    grid.sample(|x| x.iter().zip(&extent).map(|(xi, l)| (PI * xi / l).sin()).product())
}

pub struct HeatSystem {
    problem: HeatProblem,
    stiffness: Stiffness,
    mass: Option<MassMatrix>,
}

pub fn heat_system(problem: HeatProblem) -> HeatSystem {
    let grid = problem.grid.clone();
    let (kind, mass) = match problem.mass_mode {
        MassMode::IdentityFd => (StiffnessKind::FiniteDifference, None),
        MassMode::LumpedFe => {
            let area: f64 = (0..grid.dims()).map(|a| grid.spacing(a)).product();
            let op: Arc<dyn LinearOperator> = Arc::new(DiagonalOperator(vec![area; grid.dof_count()]));
            (StiffnessKind::Q1, Some(MassMatrix::new(op)))
        }
        MassMode::ConsistentFe => {
            let op: Arc<dyn LinearOperator> = Arc::new(ConsistentMass::new(grid.clone()));
            (StiffnessKind::Q1, Some(MassMatrix::new(op)))
        }
    };
    HeatSystem {
        stiffness: Stiffness::new(grid, kind),
        problem,
        mass,
    }
}

impl HeatSystem {
    pub fn problem(&self) -> &HeatProblem {
        &self.problem
    }

    pub fn stiffness(&self) -> &Stiffness {
        &self.stiffness
    }

    /// Overrides the relative tolerance of the inner mass solves.
    pub fn with_mass_tol(mut self, tol: f64) -> Self {
        self.mass = self.mass.map(|m| m.with_tol(tol));
        self
    }
}

impl OdeSystem for HeatSystem {
    fn dim(&self) -> usize {
        self.problem.grid.dof_count()
    }

    fn rhs(&self, _t: f64, x: &[f64], out: &mut [f64]) {
        self.stiffness.apply(x, out);
        let mu = self.problem.mu;
        out.iter_mut().for_each(|v| *v *= -mu);
    }

    fn mass(&self) -> Option<&MassMatrix> {
        self.mass.as_ref()
    }

    fn lipschitz_estimate(&self) -> Option<f64> {
        match self.problem.mass_mode {
            MassMode::IdentityFd => Some(self.problem.mu * analytic_lambda_max(&self.problem)),
            _ => None,
        }
    }

    /// The step is linear: `(M + dt mu K) x = M x_prev`, solved by Jacobi CG.
    fn implicit_oracle(&self, t: f64, x_prev: &[f64], dt: f64, tol: f64) -> Option<Result<StateVec>> {
        let solve = || {
            let op = ShiftedOperator { system: self, shift: dt * self.problem.mu };
            let b = match &self.mass {
                Some(m) => m.apply(x_prev),
                None => x_prev.to_vec(),
            };
            let n = b.len();
            let x = cg_solve(&op, &b, Preconditioner::Jacobi, ORACLE_CG_TOL, 20 * n.max(50))?.x;
            let res = norm_inf(&scaled_implicit_residual(self, t, x_prev, dt, &x)?);
            if res > tol {
                return Err(Error::OracleNotConverged {
                    solver: "heat cg",
                    iterations: 20 * n.max(50),
                    residual: res,
                });
            }
            Ok(x)
        };
        Some(solve())
    }
}

const ORACLE_CG_TOL: f64 = 1e-13;

/// `M + shift K`.
struct ShiftedOperator<'a> {
    system: &'a HeatSystem,
    shift: f64,
}

impl LinearOperator for ShiftedOperator<'_> {
    fn dim(&self) -> usize {
        self.system.stiffness.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.system.stiffness.apply(x, y);
        let mx = match &self.system.mass {
            Some(m) => m.apply(x),
            None => x.to_vec(),
        };
        for (yi, mi) in y.iter_mut().zip(&mx) {
            *yi = mi + self.shift * *yi;
        }
    }

    fn is_symmetric(&self) -> bool {
        true
    }

    fn diagonal(&self) -> Option<StateVec> {
        let k = self.system.stiffness.diagonal()?;
        let m = match &self.system.mass {
            Some(m) => m.operator().diagonal()?,
            None => vec![1.0; k.len()],
        };
        Some(m.iter().zip(&k).map(|(mi, ki)| mi + self.shift * ki).collect())
    }
}

/// `sin^2(j pi / (2 cells))` for the 1D Dirichlet sine modes `j = 1..cells-1`.
fn mode_factors(cells: usize) -> impl Iterator<Item = f64> {
    (1..cells).map(move |j| (j as f64 * PI / (2.0 * cells as f64)).sin().powi(2))
}

/// Largest eigenvalue of `M^{-1} K` from the separable sine spectrum
/// (identity and lumped masses only).
fn analytic_lambda_max(problem: &HeatProblem) -> f64 {
    let g = &problem.grid;
    let d = g.dims();
    match problem.mass_mode {
        MassMode::IdentityFd | MassMode::ConsistentFe => (0..d)
            .map(|a| {
                let s = mode_factors(g.cells()[a]).last().unwrap();
                4.0 / g.spacing(a).powi(2) * s
            })
            .sum(),
        MassMode::LumpedFe => {
            // lambda = sum_a (4/h_a^2) s_a prod_{b != a} (1 - 2 s_b / 3); the
            // maximum is not always at the top mode, so enumerate.
            let per_axis: Vec<Vec<f64>> = (0..d).map(|a| mode_factors(g.cells()[a]).collect()).collect();
            let mut best = 0.0_f64;
            let mut idx = vec![0usize; d];
            loop {
                let s: Vec<f64> = (0..d).map(|a| per_axis[a][idx[a]]).collect();
                let lam: f64 = (0..d)
                    .map(|a| {
                        let other: f64 = (0..d).filter(|&b| b != a).map(|b| 1.0 - 2.0 * s[b] / 3.0).product();
                        4.0 / g.spacing(a).powi(2) * s[a] * other
                    })
                    .sum();
                best = best.max(lam);
                let mut a = 0;
                loop {
                    if a == d {
                        return best;
                    }
                    idx[a] += 1;
                    if idx[a] < per_axis[a].len() {
                        break;
                    }
                    idx[a] = 0;
                    a += 1;
                }
            }
        }
    }
}

const POWER_TOL: f64 = 1e-8;
const POWER_MAX_ITER: usize = 20_000;

/// Largest eigenvalue of `M^{-1} K` by power iteration in the `M` inner
/// product, each step inverting the consistent mass with Jacobi CG.
fn power_lambda_max(problem: &HeatProblem) -> Result<f64> {
    let g = &problem.grid;
    let k_op = Stiffness::new(g.clone(), StiffnessKind::Q1);
    let m_op: Arc<dyn LinearOperator> = Arc::new(ConsistentMass::new(g.clone()));
    let mass = MassMatrix::new(m_op.clone());

    // Start close to the highest mode: checkerboard times the smooth bump.
    let bump = sine_bump(g);
    let mut x: StateVec = (0..g.dof_count())
        .map(|k| {
            let idx = g.multi_index(k);
            let parity = idx[..g.dims()].iter().sum::<usize>() % 2;
            let sign = if parity == 0 { 1.0 } else { -1.0 };
            sign * bump[k] + 1e-3
        })
        .collect();
    let mut lambda_prev = 0.0;
    for _ in 0..POWER_MAX_ITER {
        let kx = k_op.apply_vec(&x);
        let mx = m_op.apply_vec(&x);
        let lambda = dot(&x, &kx) / dot(&x, &mx);
        if (lambda - lambda_prev).abs() <= POWER_TOL * lambda.abs() {
            return Ok(lambda);
        }
        lambda_prev = lambda;
        let (y, _) = mass.solve(&kx)?;
        let norm = dot(&y, &m_op.apply_vec(&y)).sqrt();
        if !(norm > 0.0) {
            return Err(Error::Singular("power iteration collapsed to zero".into()));
        }
        x = y.iter().map(|v| v / norm).collect();
    }
    Err(Error::OracleNotConverged {
        solver: "power iteration",
        iterations: POWER_MAX_ITER,
        residual: lambda_prev,
    })
}

/// Largest step `dt_max = 1 / (mu lambda_max(M^{-1} K))` for which plain
/// implicitization contracts: it converges iff `dt mu lambda_max < 1`.
pub fn cfl_threshold(problem: &HeatProblem) -> Result<f64> {
    let lambda = match problem.mass_mode {
        MassMode::IdentityFd | MassMode::LumpedFe => analytic_lambda_max(problem),
        MassMode::ConsistentFe => power_lambda_max(problem)?,
    };
    Ok(1.0 / (problem.mu * lambda))
}
