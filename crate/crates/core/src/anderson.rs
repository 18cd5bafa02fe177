//! Anderson acceleration of a generic fixed-point map `u <- G(u)`.
//!
//! The window keeps the last `m + 1` iterates `u_i` and residuals
//! `r_i = u_i - G(u_i)`, newest first. Each accelerated step solves
//!
//! ```text
//! min || sum_i alpha_i r_i ||_2   s.t.  sum_i alpha_i = 1
//! ```
//!
//! through the unconstrained form with columns `r_i - r_0` (`r_0` being the
//! newest residual) and Householder QR, then emits
//! `sum_i alpha_i (u_i - beta r_i)`.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::linalg::{check_dim, qr_least_squares_with_threshold, sub, DenseMatrix, StateVec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AndersonConfig {
    /// Window depth `m`; `0` disables acceleration.
    pub depth: usize,
    /// `beta` in `(0, 1]`; `1` is undamped mixing.
    pub damping: f64,
    /// Mix only on every `k`-th iteration, plain steps in between.
    pub alternation: usize,
    /// Relative R-diagonal size below which a history column is dropped.
    pub column_drop_threshold: f64,
}

impl Default for AndersonConfig {
    fn default() -> Self {
        Self {
            depth: 0,
            damping: 1.0,
            alternation: 1,
            column_drop_threshold: crate::linalg::DEFAULT_DROP_THRESHOLD,
        }
    }
}

impl AndersonConfig {
    pub fn with_depth(depth: usize) -> Self {
        Self {
            depth,
            ..Self::default()
        }
    }

    /// Window that never evicts; the linear-case analogue of full GMRES.
    pub fn unbounded() -> Self {
        Self::with_depth(usize::MAX)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "anderson damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        if self.alternation == 0 {
            return Err(Error::InvalidArgument("anderson alternation period must be >= 1".into()));
        }
        if !(self.column_drop_threshold >= 0.0) {
            return Err(Error::InvalidArgument("column drop threshold must be non-negative".into()));
        }
        Ok(())
    }
}

/// Moving window of recent iterates and residuals, newest first.
#[derive(Debug, Clone, Default)]
pub struct AndersonWindow {
    capacity: usize,
    iterates: VecDeque<StateVec>,
    residuals: VecDeque<StateVec>,
}

/// Solution of the mixing least-squares problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixing {
    /// One weight per window entry (newest first), summing to one.
    pub alpha: Vec<f64>,
    /// Least-squares coefficients of the consecutive differences
    /// `r_j - r_{j+1}`, so that `sum_i alpha_i r_i = r_0 - sum_j gamma_j (r_j - r_{j+1})`.
    pub gamma: Vec<f64>,
    /// `|| sum_i alpha_i r_i ||_2`.
    pub combined_residual_norm: f64,
    /// Window positions whose difference column was dropped as dependent.
    pub dropped: Vec<usize>,
}

impl AndersonWindow {
    /// Window holding at most `depth + 1` pairs.
    pub fn new(depth: usize) -> Self {
        Self {
            capacity: depth.saturating_add(1),
            iterates: VecDeque::new(),
            residuals: VecDeque::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.iterates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterates.is_empty()
    }

    pub fn clear(&mut self) {
        self.iterates.clear();
        self.residuals.clear();
    }

    pub fn dim(&self) -> Option<usize> {
        self.iterates.front().map(Vec::len)
    }

    pub fn iterates(&self) -> impl Iterator<Item = &StateVec> {
        self.iterates.iter()
    }

    pub fn residuals(&self) -> impl Iterator<Item = &StateVec> {
        self.residuals.iter()
    }

    /// Inserts `(u, r)` as the newest entry, evicting the oldest when full.
    pub fn push(&mut self, iterate: StateVec, residual: StateVec) -> Result<()> {
        check_dim(iterate.len(), residual.len())?;
        if let Some(n) = self.dim() {
            check_dim(n, iterate.len())?;
        }
        self.iterates.push_front(iterate);
        self.residuals.push_front(residual);
        while self.iterates.len() > self.capacity {
            self.iterates.pop_back();
            self.residuals.pop_back();
        }
        Ok(())
    }

    pub fn mixing_coefficients(&self) -> Result<Mixing> {
        self.mixing_coefficients_with_threshold(crate::linalg::DEFAULT_DROP_THRESHOLD)
    }

    pub fn mixing_coefficients_with_threshold(&self, threshold: f64) -> Result<Mixing> {
        let Some(n) = self.dim() else {
            return Err(Error::InvalidArgument("mixing requires a non-empty window".into()));
        };
        let r0 = &self.residuals[0];
        if self.len() == 1 {
            return Ok(Mixing {
                alpha: vec![1.0],
                gamma: Vec::new(),
                combined_residual_norm: crate::linalg::norm2(r0),
                dropped: Vec::new(),
            });
        }
        // Same minimizer as over the columns r_i - r_0, but consecutive
        // differences stay well conditioned when residuals shrink
        // geometrically (the cumulative ones become nearly parallel).
        let diffs: Vec<StateVec> = self
            .residuals
            .iter()
            .zip(self.residuals.iter().skip(1))
            .map(|(newer, older)| sub(newer, older))
            .collect();
        let columns: Vec<&[f64]> = diffs.iter().map(Vec::as_slice).collect();
        let delta = DenseMatrix::from_columns(n, &columns)?;
        let ls = qr_least_squares_with_threshold(&delta, r0, threshold)?;
        let gamma = ls.coefficients;

        let m = gamma.len();
        let mut alpha = vec![0.0; m + 1];
        for i in 1..=m {
            alpha[i] = gamma[i - 1] - if i < m { gamma[i] } else { 0.0 };
        }
        alpha[0] = 1.0 - alpha[1..].iter().sum::<f64>();
        Ok(Mixing {
            alpha,
            gamma,
            combined_residual_norm: ls.residual_norm,
            dropped: ls.dropped.into_iter().map(|j| j + 1).collect(),
        })
    }
}

/// Outcome of a single [`Anderson::step`].
#[derive(Debug, Clone, PartialEq)]
pub struct AaStep {
    pub next: StateVec,
    /// `true` when the mixing combined two or more window entries.
    pub accelerated: bool,
    /// Minimum of the mixing problem; `None` on plain steps.
    pub mixed_residual_norm: Option<f64>,
}

/// Stateful accelerator: configuration plus its window.
#[derive(Debug, Clone)]
pub struct Anderson {
    config: AndersonConfig,
    window: AndersonWindow,
    iteration: usize,
}

impl Anderson {
    pub fn new(config: AndersonConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            window: AndersonWindow::new(config.depth),
            iteration: 0,
        })
    }

    pub fn config(&self) -> &AndersonConfig {
        &self.config
    }

    pub fn window(&self) -> &AndersonWindow {
        &self.window
    }

    pub fn reset(&mut self) {
        self.window.clear();
        self.iteration = 0;
    }

    /// Produces `u_{k+1}` from `u_k` and `G(u_k)`.
    ///
    /// Depth zero and off-alternation iterations return `g_uk` untouched.
    pub fn step(&mut self, u_k: &[f64], g_uk: &[f64]) -> Result<AaStep> {
        check_dim(u_k.len(), g_uk.len())?;
        if let Some(n) = self.window.dim() {
            check_dim(n, u_k.len())?;
        }
        self.iteration += 1;
        let plain = AaStep {
            next: g_uk.to_vec(),
            accelerated: false,
            mixed_residual_norm: None,
        };
        if self.config.depth == 0 {
            return Ok(plain);
        }
        self.window.push(u_k.to_vec(), sub(u_k, g_uk))?;
        if !self.iteration.is_multiple_of(self.config.alternation) {
            return Ok(plain);
        }

        let mixing = self
            .window
            .mixing_coefficients_with_threshold(self.config.column_drop_threshold)?;
        if self.window.len() == 1 {
            return Ok(AaStep {
                mixed_residual_norm: Some(mixing.combined_residual_norm),
                ..plain
            });
        }

        // next = sum_i alpha_i (u_i - beta r_i), evaluated through the
        // consecutive differences so large weights never multiply whole iterates.
        let beta = self.config.damping;
        let iterates: Vec<&StateVec> = self.window.iterates().collect();
        let residuals: Vec<&StateVec> = self.window.residuals().collect();
        let mut next: StateVec = iterates[0].iter().zip(residuals[0]).map(|(u, r)| u - beta * r).collect();
        for (j, g) in mixing.gamma.iter().enumerate() {
            if *g == 0.0 {
                continue;
            }
            let (u_new, u_old) = (iterates[j], iterates[j + 1]);
            let (r_new, r_old) = (residuals[j], residuals[j + 1]);
            for (i, x) in next.iter_mut().enumerate() {
                *x -= g * ((u_new[i] - u_old[i]) - beta * (r_new[i] - r_old[i]));
            }
        }
        Ok(AaStep {
            next,
            accelerated: true,
            mixed_residual_norm: Some(mixing.combined_residual_norm),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn window_of(residuals: &[&[f64]]) -> AndersonWindow {
        let mut w = AndersonWindow::new(residuals.len());
        // push oldest first so residuals[0] ends up newest
        for r in residuals.iter().rev() {
            w.push(vec![0.0; r.len()], r.to_vec()).unwrap();
        }
        w
    }

    #[test]
    fn single_residual_gives_unit_weight() {
        let m = window_of(&[&[3.0, -1.0]]).mixing_coefficients().unwrap();
        assert_eq!(m.alpha, vec![1.0]);
    }

    #[test]
    fn orthogonal_residuals_split_evenly() {
        let m = window_of(&[&[1.0, 0.0], &[0.0, 1.0]]).mixing_coefficients().unwrap();
        assert_relative_eq!(m.alpha[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(m.alpha[1], 0.5, epsilon = 1e-15);
        assert_relative_eq!(m.combined_residual_norm, 0.5_f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn scalar_residuals_cancel() {
        // 2 a0 - a1 = 0, a0 + a1 = 1
        let m = window_of(&[&[2.0], &[-1.0]]).mixing_coefficients().unwrap();
        assert_relative_eq!(m.alpha[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(m.alpha[1], 2.0 / 3.0, epsilon = 1e-15);
        assert!(m.combined_residual_norm < 1e-15);
    }

    #[test]
    fn identical_residuals_keep_newest() {
        let m = window_of(&[&[1.0, 2.0], &[1.0, 2.0], &[1.0, 2.0]]).mixing_coefficients().unwrap();
        assert_eq!(m.alpha, vec![1.0, 0.0, 0.0]);
        assert_eq!(m.dropped, vec![1, 2]);
    }

    #[test]
    fn empty_window_is_an_error() {
        assert!(AndersonWindow::new(3).mixing_coefficients().is_err());
    }

    #[test]
    fn window_evicts_oldest() {
        let mut w = AndersonWindow::new(2);
        for k in 0..6 {
            w.push(vec![k as f64], vec![-(k as f64)]).unwrap();
        }
        assert_eq!(w.len(), 3);
        let kept: Vec<f64> = w.iterates().map(|u| u[0]).collect();
        assert_eq!(kept, vec![5.0, 4.0, 3.0]);
    }

    #[test]
    fn window_rejects_dimension_change() {
        let mut w = AndersonWindow::new(2);
        w.push(vec![1.0, 2.0], vec![0.0, 0.0]).unwrap();
        assert!(w.push(vec![1.0], vec![0.0]).is_err());
        assert!(w.push(vec![1.0, 2.0], vec![0.0]).is_err());
    }

    #[test]
    fn secant_step_is_exact_on_affine_scalar_map() {
        let g = |x: f64| 0.5 * x + 1.0;
        let mut aa = Anderson::new(AndersonConfig::with_depth(1)).unwrap();
        let x1 = aa.step(&[0.0], &[g(0.0)]).unwrap();
        assert_eq!(x1.next, vec![1.0]);
        assert!(!x1.accelerated);
        let x2 = aa.step(&x1.next, &[g(1.0)]).unwrap();
        assert!(x2.accelerated);
        assert_relative_eq!(x2.next[0], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn depth_zero_passes_map_through() {
        let mut aa = Anderson::new(AndersonConfig::with_depth(0)).unwrap();
        let out = aa.step(&[1.0, 2.0], &[0.1, 0.30000000000000004]).unwrap();
        assert_eq!(out.next, vec![0.1, 0.30000000000000004]);
        assert!(aa.window().is_empty());
    }

    #[test]
    fn alternation_leaves_odd_iterations_plain() {
        let g = |x: &[f64]| vec![0.3 * x[0] + 0.1 * x[1] + 1.0, -0.2 * x[0] + 0.5 * x[1]];
        let cfg = AndersonConfig {
            alternation: 2,
            ..AndersonConfig::with_depth(3)
        };
        let mut aa = Anderson::new(cfg).unwrap();
        let mut u = vec![1.0, -1.0];
        for k in 1..=7 {
            let gu = g(&u);
            let out = aa.step(&u, &gu).unwrap();
            if k % 2 == 1 {
                assert_eq!(out.next, gu, "iteration {k} should be plain");
                assert!(!out.accelerated);
            } else {
                assert!(out.accelerated);
            }
            u = out.next;
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let mut aa = Anderson::new(AndersonConfig::with_depth(2)).unwrap();
        aa.step(&[1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert!(matches!(
            aa.step(&[1.0], &[0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(aa.step(&[1.0, 2.0], &[0.0]).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(AndersonConfig { damping: 0.0, ..Default::default() }.validate().is_err());
        assert!(AndersonConfig { damping: 1.5, ..Default::default() }.validate().is_err());
        assert!(AndersonConfig { alternation: 0, ..Default::default() }.validate().is_err());
        assert!(AndersonConfig { damping: 0.5, ..Default::default() }.validate().is_ok());
    }

    #[test]
    fn damping_blends_towards_current_iterates() {
        let g = |x: f64| 0.5 * x + 1.0;
        let cfg = AndersonConfig {
            damping: 0.5,
            ..AndersonConfig::with_depth(1)
        };
        let mut aa = Anderson::new(cfg).unwrap();
        let x1 = aa.step(&[0.0], &[g(0.0)]).unwrap().next[0];
        let x2 = aa.step(&[x1], &[g(x1)]).unwrap().next[0];
        // alpha = (2, -1): sum alpha_i u_i = 2, sum alpha_i r_i = 0
        assert_relative_eq!(x2, 2.0, epsilon = 1e-14);
    }
}
