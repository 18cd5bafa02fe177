//! Driver for `u <- G(u)` with optional Anderson acceleration.

use crate::anderson::{Anderson, AndersonConfig};
use crate::error::{Error, Result};
use crate::linalg::{all_finite, check_dim, norm2, sub, StateVec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_iter: usize,
    /// Residual growth past this multiple of the initial residual is divergence.
    pub divergence_factor: f64,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_iter: 500,
            divergence_factor: 1e8,
        }
    }
}

impl FixedPointConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "fixed-point tolerances must be positive (rel_tol={}, abs_tol={})",
                self.rel_tol, self.abs_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be positive".into()));
        }
        if !(self.divergence_factor > 1.0) {
            return Err(Error::InvalidArgument(format!(
                "divergence_factor must exceed 1, got {}",
                self.divergence_factor
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedPointStatus {
    Converged,
    MaxIterExceeded,
    Diverged,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointReport {
    pub status: FixedPointStatus,
    /// Number of map evaluations; equals `residual_trace.len()`.
    pub iterations: usize,
    /// `||u_k - G(u_k)||_2` for every evaluated iterate.
    pub residual_trace: Vec<f64>,
    pub accelerated_steps: usize,
}

impl FixedPointReport {
    pub fn converged(&self) -> bool {
        self.status == FixedPointStatus::Converged
    }

    pub fn initial_residual(&self) -> Option<f64> {
        self.residual_trace.first().copied()
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.residual_trace.last().copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointOutcome {
    /// Converged iterate, or the last finite iterate otherwise.
    pub solution: StateVec,
    pub report: FixedPointReport,
}

/// Iterates `G` from `u0` until `||u - G(u)|| <= max(rel_tol * r_0, abs_tol)`.
///
/// The returned iterate is the one whose residual was checked, never the
/// unchecked `G(u)`. Errors raised by `G` itself abort the solve.
pub fn solve_fixed_point<G>(
    mut map: G,
    u0: &[f64],
    fp: &FixedPointConfig,
    aa: &AndersonConfig,
) -> Result<FixedPointOutcome>
where
    G: FnMut(&[f64]) -> Result<StateVec>,
{
    fp.validate()?;
    let mut accel = Anderson::new(*aa)?;
    let mut u = u0.to_vec();
    let mut trace = Vec::new();
    let mut accelerated_steps = 0;

    let finish = |solution: StateVec, status, trace: Vec<f64>, accelerated_steps| {
        Ok(FixedPointOutcome {
            solution,
            report: FixedPointReport {
                status,
                iterations: trace.len(),
                residual_trace: trace,
                accelerated_steps,
            },
        })
    };

    if !all_finite(&u) {
        return finish(u, FixedPointStatus::NonFinite, trace, 0);
    }

    let mut initial = 0.0;
    for k in 0..fp.max_iter {
        let gu = map(&u)?;
        check_dim(u.len(), gu.len())?;
        if !all_finite(&gu) {
            return finish(u, FixedPointStatus::NonFinite, trace, accelerated_steps);
        }
        let res = norm2(&sub(&u, &gu));
        trace.push(res);
        if !res.is_finite() {
            return finish(u, FixedPointStatus::NonFinite, trace, accelerated_steps);
        }
        if k == 0 {
            initial = res;
        }
        if res <= (fp.rel_tol * initial).max(fp.abs_tol) {
            return finish(u, FixedPointStatus::Converged, trace, accelerated_steps);
        }
        if res > fp.divergence_factor * initial {
            return finish(u, FixedPointStatus::Diverged, trace, accelerated_steps);
        }
        let step = accel.step(&u, &gu)?;
        if step.accelerated {
            accelerated_steps += 1;
        }
        if !all_finite(&step.next) {
            return finish(u, FixedPointStatus::NonFinite, trace, accelerated_steps);
        }
        u = step.next;
    }
    finish(u, FixedPointStatus::MaxIterExceeded, trace, accelerated_steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn scalar(f: impl Fn(f64) -> f64) -> impl FnMut(&[f64]) -> Result<StateVec> {
        move |x: &[f64]| Ok(vec![f(x[0])])
    }

    #[test]
    fn already_fixed() {
        let out = solve_fixed_point(
            |x: &[f64]| Ok(x.to_vec()),
            &[3.0, -1.0],
            &FixedPointConfig::default(),
            &AndersonConfig::default(),
        )
        .unwrap();
        assert!(out.report.converged());
        assert!(out.report.iterations <= 1);
        assert_eq!(out.solution, vec![3.0, -1.0]);
    }

    #[test]
    fn contraction_trace_is_geometric() {
        let out = solve_fixed_point(
            scalar(|x| 0.5 * x),
            &[1.0],
            &FixedPointConfig::default(),
            &AndersonConfig::default(),
        )
        .unwrap();
        assert!(out.report.converged());
        for w in out.report.residual_trace.windows(2) {
            assert_relative_eq!(w[1] / w[0], 0.5, epsilon = 1e-12);
        }
        assert_eq!(out.report.accelerated_steps, 0);
        assert_eq!(out.report.iterations, out.report.residual_trace.len());
    }

    #[test]
    fn expanding_map_diverges_plain_but_secant_rescues() {
        let fp = FixedPointConfig::default();
        let plain = solve_fixed_point(scalar(|x| 2.0 * x + 1.0), &[0.0], &fp, &AndersonConfig::default()).unwrap();
        assert_eq!(plain.report.status, FixedPointStatus::Diverged);

        let acc = solve_fixed_point(scalar(|x| 2.0 * x + 1.0), &[0.0], &fp, &AndersonConfig::with_depth(1)).unwrap();
        assert!(acc.report.converged());
        assert!(acc.report.accelerated_steps <= 2);
        assert_relative_eq!(acc.solution[0], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn max_iter_reported() {
        let fp = FixedPointConfig {
            max_iter: 5,
            ..Default::default()
        };
        let out = solve_fixed_point(scalar(|x| 0.99 * x), &[1.0], &fp, &AndersonConfig::default()).unwrap();
        assert_eq!(out.report.status, FixedPointStatus::MaxIterExceeded);
        assert_eq!(out.report.iterations, 5);
    }

    #[test]
    fn non_finite_keeps_last_finite_iterate() {
        let mut calls = 0;
        let map = |x: &[f64]| {
            calls += 1;
            Ok(vec![if calls >= 3 { f64::NAN } else { x[0] * 3.0 + 1.0 }])
        };
        let out = solve_fixed_point(map, &[1.0], &FixedPointConfig::default(), &AndersonConfig::default()).unwrap();
        assert_eq!(out.report.status, FixedPointStatus::NonFinite);
        assert!(out.solution[0].is_finite());
        assert_eq!(out.solution, vec![13.0]);
    }

    #[test]
    fn map_errors_propagate() {
        let out = solve_fixed_point(
            |_: &[f64]| Err(Error::Singular("boom".into())),
            &[1.0],
            &FixedPointConfig::default(),
            &AndersonConfig::default(),
        );
        assert!(matches!(out, Err(Error::Singular(_))));
    }

    #[test]
    fn map_changing_dimension_is_rejected() {
        let out = solve_fixed_point(
            |_: &[f64]| Ok(vec![0.0, 1.0]),
            &[1.0],
            &FixedPointConfig::default(),
            &AndersonConfig::default(),
        );
        assert!(matches!(out, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn invalid_configs() {
        let aa = AndersonConfig::default();
        for fp in [
            FixedPointConfig { rel_tol: 0.0, ..Default::default() },
            FixedPointConfig { abs_tol: -1.0, ..Default::default() },
            FixedPointConfig { max_iter: 0, ..Default::default() },
            FixedPointConfig { divergence_factor: 1.0, ..Default::default() },
        ] {
            assert!(solve_fixed_point(scalar(|x| x), &[0.0], &fp, &aa).is_err());
        }
    }
}
