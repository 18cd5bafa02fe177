//! Implicit Euler time stepping, with every step solved by iterating the
//! explicit update with the nonlinear term lagged:
//!
//! ```text
//! M x^{n,l} = M x^{n-1} + dt f(t_n, x^{n,l-1}),   x^{n,0} = x^{n-1}
//! ```
//!
//! Fixed points of that map are exactly the implicit Euler solutions
//! `M (x^n - x^{n-1}) = dt f(t_n, x^n)`.

use std::cell::Cell;
use std::sync::Arc;

use crate::anderson::AndersonConfig;
use crate::error::{Error, Result};
use crate::fixedpoint::{solve_fixed_point, FixedPointConfig, FixedPointReport};
use crate::linalg::{
    all_finite, cg_solve, check_dim, norm_inf, DenseMatrix, LinearOperator, LuFactors, Preconditioner,
    StateVec,
};
use crate::problems::FhnParams;

/// SPD mass operator together with the settings of its Jacobi-CG solve.
#[derive(Clone)]
pub struct MassMatrix {
    operator: Arc<dyn LinearOperator>,
    pub tol: f64,
    pub max_iter: usize,
}

impl std::fmt::Debug for MassMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MassMatrix")
            .field("dim", &self.operator.dim())
            .field("tol", &self.tol)
            .field("max_iter", &self.max_iter)
            .finish()
    }
}

/// Inner mass solves run far below any fixed-point tolerance.
pub const MASS_SOLVE_TOL: f64 = 1e-12;

impl MassMatrix {
    pub fn new(operator: Arc<dyn LinearOperator>) -> Self {
        let n = operator.dim();
        Self {
            operator,
            tol: MASS_SOLVE_TOL,
            max_iter: n.max(50),
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn operator(&self) -> &dyn LinearOperator {
        self.operator.as_ref()
    }

    pub fn apply(&self, x: &[f64]) -> StateVec {
        self.operator.apply_vec(x)
    }

    /// `M^{-1} b` and the CG iteration count.
    pub fn solve(&self, b: &[f64]) -> Result<(StateVec, usize)> {
        let out = cg_solve(self.operator.as_ref(), b, Preconditioner::Jacobi, self.tol, self.max_iter)?;
        Ok((out.x, out.iterations))
    }
}

/// Right-hand side `f(t, x)` of `M x' = f(t, x)`.
pub trait OdeSystem: Send + Sync {
    fn dim(&self) -> usize;

    fn rhs(&self, t: f64, x: &[f64], out: &mut [f64]);

    /// `None` means the identity.
    fn mass(&self) -> Option<&MassMatrix> {
        None
    }

    /// Global Lipschitz constant of `f` in `x`, when known.
    fn lipschitz_estimate(&self) -> Option<f64> {
        None
    }

    /// Problem-specific reference solver for one implicit step. Returning
    /// `None` falls back to the generic finite-difference Newton solver.
    fn implicit_oracle(&self, _t: f64, _x_prev: &[f64], _dt: f64, _tol: f64) -> Option<Result<StateVec>> {
        None
    }

    fn rhs_vec(&self, t: f64, x: &[f64]) -> StateVec {
        let mut out = vec![0.0; self.dim()];
        self.rhs(t, x, &mut out);
        out
    }
}

/// The implicitization map `G` of one time step.
///
/// Keeps a running count of inner CG iterations spent on mass solves.
pub struct StepMap<'a> {
    system: &'a dyn OdeSystem,
    t: f64,
    x_prev: &'a [f64],
    dt: f64,
    cg_iterations: Cell<usize>,
    mass_solves: Cell<usize>,
}

impl<'a> StepMap<'a> {
    /// `G(x) = x_prev + dt M^{-1} f(t, x)`.
    pub fn apply(&self, x: &[f64]) -> Result<StateVec> {
        check_dim(self.system.dim(), x.len())?;
        let f = self.system.rhs_vec(self.t, x);
        let incr = match self.system.mass() {
            Some(mass) => {
                let (y, it) = mass.solve(&f)?;
                self.cg_iterations.set(self.cg_iterations.get() + it);
                self.mass_solves.set(self.mass_solves.get() + 1);
                y
            }
            None => f,
        };
        Ok(self.x_prev.iter().zip(&incr).map(|(p, d)| p + self.dt * d).collect())
    }

    pub fn cg_iterations(&self) -> usize {
        self.cg_iterations.get()
    }

    pub fn mass_solves(&self) -> usize {
        self.mass_solves.get()
    }
}

pub fn step_map<'a>(system: &'a dyn OdeSystem, t_n: f64, x_prev: &'a [f64], dt: f64) -> Result<StepMap<'a>> {
    check_dim(system.dim(), x_prev.len())?;
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    Ok(StepMap {
        system,
        t: t_n,
        x_prev,
        dt,
        cg_iterations: Cell::new(0),
        mass_solves: Cell::new(0),
    })
}

/// `F(x) = M (x - x_prev) - dt f(t_n, x)`, zero exactly at the implicit solution.
pub fn implicit_residual(system: &dyn OdeSystem, t_n: f64, x_prev: &[f64], dt: f64, x: &[f64]) -> Result<StateVec> {
    check_dim(system.dim(), x.len())?;
    check_dim(system.dim(), x_prev.len())?;
    let f = system.rhs_vec(t_n, x);
    let diff: StateVec = x.iter().zip(x_prev).map(|(a, b)| a - b).collect();
    let lhs = match system.mass() {
        Some(m) => m.apply(&diff),
        None => diff,
    };
    Ok(lhs.iter().zip(&f).map(|(l, fi)| l - dt * fi).collect())
}

/// `F` scaled by the inverse mass diagonal, so that its size is comparable
/// to a state increment regardless of the mass scaling.
pub fn scaled_implicit_residual(
    system: &dyn OdeSystem,
    t_n: f64,
    x_prev: &[f64],
    dt: f64,
    x: &[f64],
) -> Result<StateVec> {
    let mut r = implicit_residual(system, t_n, x_prev, dt, x)?;
    if let Some(d) = system.mass().and_then(|m| m.operator().diagonal()) {
        for (ri, di) in r.iter_mut().zip(&d) {
            *ri /= di;
        }
    }
    Ok(r)
}

/// Increment of the quasi-Newton form of the iteration: `M dx = -F(x)`.
///
/// With an identity Jacobian approximation this reproduces `G(x) - x`.
pub fn quasi_newton_step(
    system: &dyn OdeSystem,
    t_n: f64,
    x_prev: &[f64],
    dt: f64,
    x_current: &[f64],
) -> Result<StateVec> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    let residual = implicit_residual(system, t_n, x_prev, dt, x_current)?;
    let neg: StateVec = residual.iter().map(|v| -v).collect();
    match system.mass() {
        Some(m) => Ok(m.solve(&neg)?.0),
        None => Ok(neg),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImplicitStep {
    pub state: StateVec,
    pub report: FixedPointReport,
    pub cg_iterations: usize,
    pub mass_solves: usize,
}

/// One implicit Euler step solved by (accelerated) implicitization from
/// `x^{n,0} = x^{n-1}`, with a fresh Anderson window.
pub fn implicitized_step(
    system: &dyn OdeSystem,
    t_n: f64,
    x_prev: &[f64],
    dt: f64,
    aa: &AndersonConfig,
    fp: &FixedPointConfig,
) -> Result<ImplicitStep> {
    let map = step_map(system, t_n, x_prev, dt)?;
    let out = solve_fixed_point(|x| map.apply(x), x_prev, fp, aa)?;
    if !out.report.converged() {
        return Err(Error::FixedPoint(Box::new(out.report)));
    }
    Ok(ImplicitStep {
        state: out.solution,
        report: out.report,
        cg_iterations: map.cg_iterations(),
        mass_solves: map.mass_solves(),
    })
}

pub const GROUND_TRUTH_TOL: f64 = 1e-10;

/// Tightly converged implicit step used as a reference.
///
/// Uses the system's own oracle when it has one, otherwise damped Newton with
/// a central finite-difference Jacobian.
pub fn ground_truth_step(system: &dyn OdeSystem, t_n: f64, x_prev: &[f64], dt: f64) -> Result<StateVec> {
    ground_truth_step_with_tol(system, t_n, x_prev, dt, GROUND_TRUTH_TOL)
}

pub fn ground_truth_step_with_tol(
    system: &dyn OdeSystem,
    t_n: f64,
    x_prev: &[f64],
    dt: f64,
    tol: f64,
) -> Result<StateVec> {
    check_dim(system.dim(), x_prev.len())?;
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    if let Some(res) = system.implicit_oracle(t_n, x_prev, dt, tol) {
        return res;
    }
    newton_step(system, t_n, x_prev, dt, tol)
}

const NEWTON_MAX_ITER: usize = 50;

/// Damped Newton on the implicit residual; stops when the mass-scaled
/// residual is below `tol` in the max norm.
pub fn newton_step(system: &dyn OdeSystem, t_n: f64, x_prev: &[f64], dt: f64, tol: f64) -> Result<StateVec> {
    let n = system.dim();
    let mass_dense = system.mass().map(|m| DenseMatrix::from_operator(m.operator()));
    let scaled_norm = |x: &[f64]| -> Result<f64> { Ok(norm_inf(&scaled_implicit_residual(system, t_n, x_prev, dt, x)?)) };

    let mut x = x_prev.to_vec();
    let mut res = scaled_norm(&x)?;
    for _ in 0..NEWTON_MAX_ITER {
        if res <= tol {
            return Ok(x);
        }
        let mut jac = match &mass_dense {
            Some(m) => m.clone(),
            None => DenseMatrix::identity(n),
        };
        let mut xp = x.clone();
        for j in 0..n {
            let eps = 1e-6 * (1.0 + x[j].abs());
            xp[j] = x[j] + eps;
            let f_plus = system.rhs_vec(t_n, &xp);
            xp[j] = x[j] - eps;
            let f_minus = system.rhs_vec(t_n, &xp);
            xp[j] = x[j];
            for i in 0..n {
                jac[(i, j)] -= dt * (f_plus[i] - f_minus[i]) / (2.0 * eps);
            }
        }
        let f = implicit_residual(system, t_n, x_prev, dt, &x)?;
        let lu = LuFactors::new(jac)?;
        let delta = lu.solve(&f);

        let mut lambda = 1.0;
        loop {
            let trial: StateVec = x.iter().zip(&delta).map(|(xi, di)| xi - lambda * di).collect();
            let trial_res = if all_finite(&trial) { scaled_norm(&trial)? } else { f64::INFINITY };
            if trial_res < res || lambda < 1e-4 {
                x = trial;
                res = trial_res;
                break;
            }
            lambda *= 0.5;
        }
    }
    if res <= tol {
        return Ok(x);
    }
    Err(Error::OracleNotConverged {
        solver: "newton",
        iterations: NEWTON_MAX_ITER,
        residual: res,
    })
}

/// Semi-implicit FitzHugh-Nagumo step: `v` implicit with the cubic
/// coefficient `(v^{n-1})^2 / 3` and lagged `w`, `w` fully explicit.
pub fn imex_step_fhn(params: &FhnParams, prev: &[f64], dt: f64) -> Result<StateVec> {
    check_dim(2, prev.len())?;
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    let (v0, w0) = (prev[0], prev[1]);
    let denom = 1.0 / dt - 1.0 + v0 * v0 / 3.0;
    if denom.abs() < 1e-14 {
        return Err(Error::Singular(format!("imex denominator vanishes ({denom:e})")));
    }
    let v = (v0 / dt - w0 + params.r * params.i_ext) / denom;
    let w = w0 + dt / params.tau * (v0 + params.a - params.b * w0);
    Ok(vec![v, w])
}

/// Equidistant time points `t_start + n dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    dt: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
        let ratio = (t_end - t_start) / dt;
        let steps = ratio.round();
        if !(steps >= 0.0) || (ratio - steps).abs() > 1e-9 * steps.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "interval [{t_start}, {t_end}] is not a whole number of steps of {dt}"
            )));
        }
        Ok(Self {
            t_start,
            dt,
            steps: steps as usize,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn time(&self, n: usize) -> f64 {
        self.t_start + n as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.steps)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scheme {
    /// Implicit Euler, each step solved by (accelerated) implicitization.
    Implicitized { aa: AndersonConfig, fp: FixedPointConfig },
    /// Implicit Euler solved to `tol` by the reference solver.
    GroundTruth { tol: f64 },
    /// Semi-implicit FitzHugh-Nagumo splitting, no sub-iterations.
    ImexFhn(FhnParams),
    /// A single application of the step map per step.
    ExplicitEuler,
}

impl Scheme {
    pub fn implicitized(depth: usize) -> Self {
        Scheme::Implicitized {
            aa: AndersonConfig::with_depth(depth),
            fp: FixedPointConfig::default(),
        }
    }

    pub fn ground_truth() -> Self {
        Scheme::GroundTruth { tol: GROUND_TRUTH_TOL }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepStats {
    /// Present for implicitized steps.
    pub report: Option<FixedPointReport>,
    pub cg_iterations: usize,
    pub mass_solves: usize,
}

#[derive(Debug, Clone)]
pub struct StepFailure {
    /// Index of the step that failed (1-based: the step producing `x^n`).
    pub step: usize,
    pub error: Error,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVec>,
    pub steps: Vec<StepStats>,
    pub failure: Option<StepFailure>,
}

impl Trajectory {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }

    pub fn last(&self) -> &StateVec {
        self.states.last().expect("trajectory always holds x0")
    }
}

/// Marches `x0` over `grid` with `scheme`. A failing step ends the march and
/// is recorded in [`Trajectory::failure`] next to the partial trajectory.
pub fn integrate(system: &dyn OdeSystem, x0: &[f64], grid: &TimeGrid, scheme: &Scheme) -> Result<Trajectory> {
    check_dim(system.dim(), x0.len())?;
    match scheme {
        Scheme::Implicitized { aa, fp } => {
            aa.validate()?;
            fp.validate()?;
        }
        Scheme::GroundTruth { tol } if !(*tol > 0.0 && *tol <= 1e-9) => {
            return Err(Error::InvalidArgument(format!("ground truth tolerance must be in (0, 1e-9], got {tol}")));
        }
        Scheme::ImexFhn(_) => check_dim(2, system.dim())?,
        _ => {}
    }

    let mut traj = Trajectory {
        times: vec![grid.time(0)],
        states: vec![x0.to_vec()],
        steps: Vec::with_capacity(grid.steps()),
        failure: None,
    };
    let dt = grid.dt();
    for n in 1..=grid.steps() {
        let t_n = grid.time(n);
        let prev = traj.states.last().unwrap();
        let step = match scheme {
            Scheme::Implicitized { aa, fp } => implicitized_step(system, t_n, prev, dt, aa, fp).map(|s| {
                (
                    s.state,
                    StepStats {
                        report: Some(s.report),
                        cg_iterations: s.cg_iterations,
                        mass_solves: s.mass_solves,
                    },
                )
            }),
            Scheme::GroundTruth { tol } => {
                ground_truth_step_with_tol(system, t_n, prev, dt, *tol).map(|x| (x, StepStats::default()))
            }
            Scheme::ImexFhn(params) => imex_step_fhn(params, prev, dt).map(|x| (x, StepStats::default())),
            Scheme::ExplicitEuler => step_map(system, t_n, prev, dt).and_then(|map| {
                let x = map.apply(prev)?;
                Ok((
                    x,
                    StepStats {
                        report: None,
                        cg_iterations: map.cg_iterations(),
                        mass_solves: map.mass_solves(),
                    },
                ))
            }),
        };
        match step {
            Ok((x, stats)) if all_finite(&x) => {
                traj.times.push(t_n);
                traj.states.push(x);
                traj.steps.push(stats);
            }
            Ok(_) => {
                traj.failure = Some(StepFailure {
                    step: n,
                    error: Error::NonFinite(format!("state at step {n}")),
                });
                break;
            }
            Err(error) => {
                traj.failure = Some(StepFailure { step: n, error });
                break;
            }
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixedpoint::FixedPointStatus;
    use crate::problems::{fhn_system, LinearScalar};
    use approx::assert_relative_eq;

    struct Zero(usize);
    impl OdeSystem for Zero {
        fn dim(&self) -> usize {
            self.0
        }
        fn rhs(&self, _t: f64, _x: &[f64], out: &mut [f64]) {
            out.fill(0.0);
        }
    }

    #[test]
    fn zero_dynamics_map_is_constant() {
        let sys = Zero(3);
        let prev = [1.0, -2.0, 0.5];
        let g = step_map(&sys, 0.0, &prev, 0.3).unwrap();
        assert_eq!(g.apply(&[9.0, 9.0, 9.0]).unwrap(), prev.to_vec());
        for scheme in [Scheme::implicitized(3), Scheme::ground_truth(), Scheme::ExplicitEuler] {
            let grid = TimeGrid::new(0.0, 0.3, 0.3).unwrap();
            let traj = integrate(&sys, &prev, &grid, &scheme).unwrap();
            assert_eq!(traj.states[1], prev.to_vec());
        }
    }

    #[test]
    fn linear_partial_sums() {
        // G(x) = 1 - 0.5 x: iterates are partial sums of sum (-1/2)^j
        let sys = LinearScalar::new(-1.0);
        let g = step_map(&sys, 0.0, &[1.0], 0.5).unwrap();
        let mut x = vec![1.0];
        let mut partial = 1.0;
        for k in 1..40 {
            x = g.apply(&x).unwrap();
            partial += (-0.5_f64).powi(k);
            assert_relative_eq!(x[0], partial, epsilon = 1e-14);
        }
        assert_relative_eq!(x[0], 1.0 / 1.5, epsilon = 1e-12);
    }

    #[test]
    fn linear_implicit_step_closed_form() {
        let sys = LinearScalar::new(-1.0);
        let step = implicitized_step(&sys, 0.5, &[1.0], 0.5, &AndersonConfig::default(), &FixedPointConfig::default()).unwrap();
        assert_relative_eq!(step.state[0], 2.0 / 3.0, max_relative = 1e-8);
        let gt = ground_truth_step(&sys, 0.5, &[1.0], 0.5).unwrap();
        assert_relative_eq!(gt[0], 2.0 / 3.0, epsilon = 1e-10);
    }

    #[test]
    fn unstable_ratio_diverges() {
        let sys = LinearScalar::new(-4.0);
        let err = implicitized_step(&sys, 0.5, &[1.0], 0.5, &AndersonConfig::default(), &FixedPointConfig::default())
            .unwrap_err();
        match err {
            Error::FixedPoint(report) => assert_eq!(report.status, FixedPointStatus::Diverged),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn quasi_newton_hand_values() {
        // F = (1 - 1) - 0.5 * (-1) = 0.5
        let sys = LinearScalar::new(-1.0);
        let dx = quasi_newton_step(&sys, 0.5, &[1.0], 0.5, &[1.0]).unwrap();
        assert_relative_eq!(dx[0], -0.5);
        let g = step_map(&sys, 0.5, &[1.0], 0.5).unwrap().apply(&[1.0]).unwrap();
        assert_relative_eq!(1.0 + dx[0], g[0]);
        let dx0 = quasi_newton_step(&sys, 0.5, &[1.0], 0.5, &[2.0 / 3.0]).unwrap();
        assert!(dx0[0].abs() < 1e-15);
    }

    #[test]
    fn imex_hand_values() {
        let p = FhnParams::default();
        let x = imex_step_fhn(&p, &[0.0, 0.0], 0.1).unwrap();
        assert_relative_eq!(x[0], 0.5 / 9.0, epsilon = 1e-15);
        assert_relative_eq!(x[1], 0.014, epsilon = 1e-15);
        let tiny = imex_step_fhn(&p, &[0.3, -0.2], 1e-9).unwrap();
        assert_relative_eq!(tiny[0], 0.3, epsilon = 1e-8);
        assert_relative_eq!(tiny[1], -0.2, epsilon = 1e-8);
        // 1/dt - 1 = 0
        assert!(matches!(imex_step_fhn(&p, &[0.0, 0.0], 1.0), Err(Error::Singular(_))));
    }

    #[test]
    fn fhn_step_matches_reference() {
        let sys = fhn_system(FhnParams::default());
        let fp = FixedPointConfig::default();
        let step = implicitized_step(&sys, 0.1, &[0.0, 0.0], 0.1, &AndersonConfig::with_depth(2), &fp).unwrap();
        let gt = ground_truth_step(&sys, 0.1, &[0.0, 0.0], 0.1).unwrap();
        for (a, b) in step.state.iter().zip(&gt) {
            assert!((a - b).abs() <= 10.0 * fp.rel_tol, "{a} vs {b}");
        }
        let generic = newton_step(&sys, 0.1, &[0.0, 0.0], 0.1, 1e-12).unwrap();
        for (a, b) in generic.iter().zip(&gt) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn time_grid_validation() {
        assert_eq!(TimeGrid::new(0.0, 1.0, 0.1).unwrap().steps(), 10);
        assert_eq!(TimeGrid::new(0.0, 0.0, 0.1).unwrap().steps(), 0);
        assert!(TimeGrid::new(0.0, 1.0, 0.3).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0.0).is_err());
        assert!(TimeGrid::new(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn zero_steps_returns_initial_state() {
        let sys = LinearScalar::new(-1.0);
        let traj = integrate(&sys, &[1.0], &TimeGrid::new(2.0, 2.0, 0.1).unwrap(), &Scheme::implicitized(0)).unwrap();
        assert_eq!(traj.states, vec![vec![1.0]]);
        assert!(traj.completed());
    }

    #[test]
    fn linear_trajectory_closed_form() {
        let sys = LinearScalar::new(-1.0);
        let scheme = Scheme::Implicitized {
            aa: AndersonConfig::with_depth(1),
            fp: FixedPointConfig {
                rel_tol: 1e-12,
                ..Default::default()
            },
        };
        let traj = integrate(&sys, &[1.0], &TimeGrid::new(0.0, 1.0, 0.1).unwrap(), &scheme).unwrap();
        assert_eq!(traj.states.len(), 11);
        for (k, x) in traj.states.iter().enumerate() {
            assert_relative_eq!(x[0], (1.0 / 1.1_f64).powi(k as i32), max_relative = 1e-10);
        }
    }

    #[test]
    fn failure_is_recorded_with_partial_trajectory() {
        let sys = LinearScalar::new(-30.0);
        let traj = integrate(&sys, &[1.0], &TimeGrid::new(0.0, 1.0, 0.1).unwrap(), &Scheme::implicitized(0)).unwrap();
        let failure = traj.failure.expect("dt |lambda| = 3 cannot converge without acceleration");
        assert_eq!(failure.step, 1);
        assert_eq!(traj.states.len(), 1);
    }

    #[test]
    fn rejects_bad_inputs() {
        let sys = LinearScalar::new(-1.0);
        assert!(step_map(&sys, 0.0, &[1.0], 0.0).is_err());
        assert!(step_map(&sys, 0.0, &[1.0, 2.0], 0.1).is_err());
        let grid = TimeGrid::new(0.0, 1.0, 0.1).unwrap();
        assert!(integrate(&sys, &[1.0], &grid, &Scheme::GroundTruth { tol: 1e-6 }).is_err());
        assert!(integrate(&sys, &[1.0], &grid, &Scheme::ImexFhn(FhnParams::default())).is_err());
    }
}
