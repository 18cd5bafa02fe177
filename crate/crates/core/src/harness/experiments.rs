use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind};
use super::gmres_check::{compare_with_gmres, random_rhs, random_spd};
use super::report::{ResultRow, RowStatus};
use crate::anderson::AndersonConfig;
use crate::error::{Error, Result};
use crate::fixedpoint::FixedPointConfig;
use crate::linalg::{norm_inf, sub, StateVec};
use crate::problems::{
    burgers_system, cfl_threshold, fhn_system, heat_system, plaplacian_system, BurgersParams, GridSpec,
    HeatProblem, PLaplacianParams,
};
use crate::timestep::{integrate, OdeSystem, Scheme, StepStats, TimeGrid, Trajectory, GROUND_TRUTH_TOL};

/// Largest accepted relative gap between the Anderson and GMRES traces.
pub const MISMATCH_TOL: f64 = 1e-8;

/// Iteration counts are averaged over this many leading time steps.
const MEASURED_STEPS: usize = 3;

type Rows = (Vec<ResultRow>, Vec<String>);

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Rows> {
    match cfg.experiment {
        ExperimentKind::FhnCompare => fhn_compare(cfg),
        ExperimentKind::FhnConvergence => fhn_convergence(cfg),
        ExperimentKind::FhnDepthSweep => fhn_depth_sweep(cfg),
        ExperimentKind::HeatDepthDtTable => heat_depth_dt_table(cfg),
        ExperimentKind::HeatPlapTable => heat_plap_table(cfg),
        ExperimentKind::CflProbe => cfl_probe(cfg),
        ExperimentKind::AaGmresCheck => aa_gmres_check(cfg),
        ExperimentKind::BurgersDemo => burgers_demo(cfg),
    }
}

/// Least-squares slope of `log(err)` against `log(dt)`.
pub fn fit_slope(dt: &[f64], err: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = dt
        .iter()
        .zip(err)
        .filter(|(d, e)| **d > 0.0 && **e > 0.0)
        .map(|(d, e)| (d.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn aa_config(cfg: &ExperimentConfig, depth: usize) -> AndersonConfig {
    AndersonConfig {
        depth,
        damping: cfg.damping,
        alternation: cfg.alternation,
        ..AndersonConfig::default()
    }
}

fn fp_config(cfg: &ExperimentConfig) -> FixedPointConfig {
    FixedPointConfig {
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
        max_iter: cfg.max_iter,
        ..FixedPointConfig::default()
    }
}

fn implicitized(cfg: &ExperimentConfig, depth: usize) -> Scheme {
    Scheme::Implicitized {
        aa: aa_config(cfg, depth),
        fp: fp_config(cfg),
    }
}

fn status_of(traj: &Trajectory) -> RowStatus {
    match &traj.failure {
        None => RowStatus::Ok,
        Some(f) => match f.error {
            Error::FixedPoint(_) | Error::NonFinite(_) => RowStatus::Diverged,
            _ => RowStatus::Failed,
        },
    }
}

struct IterationStats {
    fp_iters: Option<f64>,
    cg_per_iter: Option<f64>,
    cg_per_step: Option<f64>,
}

/// Averages over the first [`MEASURED_STEPS`] steps.
fn leading_stats(steps: &[StepStats]) -> IterationStats {
    let lead = &steps[..steps.len().min(MEASURED_STEPS)];
    let reports: Vec<_> = lead.iter().filter_map(|s| s.report.as_ref()).collect();
    let fp_iters = (!reports.is_empty())
        .then(|| reports.iter().map(|r| r.iterations as f64).sum::<f64>() / reports.len() as f64);
    let solves: usize = lead.iter().map(|s| s.mass_solves).sum();
    let cg: usize = lead.iter().map(|s| s.cg_iterations).sum();
    IterationStats {
        fp_iters,
        cg_per_iter: (solves > 0).then(|| cg as f64 / solves as f64),
        cg_per_step: (solves > 0).then(|| cg as f64 / lead.len() as f64),
    }
}

/// `max_n |x_n - ref_n|_inf` over equal time grids.
fn max_error(states: &[StateVec], reference: &[StateVec]) -> f64 {
    states
        .iter()
        .zip(reference)
        .map(|(x, r)| norm_inf(&sub(x, r)))
        .fold(0.0, f64::max)
}

/// Like [`max_error`], with `reference` on a finer grid of step `ref_dt`;
/// only times present on both grids are compared.
fn max_error_at_shared_times(states: &[StateVec], dt: f64, reference: &[StateVec], ref_dt: f64) -> f64 {
    states
        .iter()
        .enumerate()
        .filter_map(|(n, x)| {
            let j = n as f64 * dt / ref_dt;
            let jr = j.round();
            ((j - jr).abs() <= 1e-9 * jr.max(1.0))
                .then(|| reference.get(jr as usize))
                .flatten()
                .map(|r| norm_inf(&sub(x, r)))
        })
        .fold(0.0, f64::max)
}

fn row(cfg: &ExperimentConfig, params: String, traj: &Trajectory, error: Option<f64>, started: Instant) -> ResultRow {
    let status = status_of(traj);
    let stats = leading_stats(&traj.steps);
    let ok = status == RowStatus::Ok;
    ResultRow {
        experiment: cfg.experiment.as_str().to_owned(),
        params,
        mean_fp_iters: stats.fp_iters.filter(|_| ok),
        mean_cg_per_iter: stats.cg_per_iter.filter(|_| ok),
        mean_cg_per_step: stats.cg_per_step.filter(|_| ok),
        error: error.filter(|_| ok),
        status,
        wall_time_s: Some(started.elapsed().as_secs_f64()),
    }
}

fn failed_row(cfg: &ExperimentConfig, params: String, started: Instant) -> ResultRow {
    ResultRow {
        experiment: cfg.experiment.as_str().to_owned(),
        params,
        mean_fp_iters: None,
        mean_cg_per_iter: None,
        mean_cg_per_step: None,
        error: None,
        status: RowStatus::Failed,
        wall_time_s: Some(started.elapsed().as_secs_f64()),
    }
}

// ---------------------------------------------------------------- FHN

/// Ground-truth trajectory at `reference_dt`; coarse runs are compared at
/// shared time points.
fn fhn_reference(cfg: &ExperimentConfig) -> Result<Vec<StateVec>> {
    let sys = fhn_system(cfg.fhn);
    let grid = TimeGrid::new(0.0, cfg.t_end, cfg.reference_dt)?;
    let traj = integrate(&sys, &[0.0, 0.0], &grid, &Scheme::ground_truth())?;
    match traj.failure {
        Some(f) => Err(f.error),
        None => Ok(traj.states),
    }
}

fn fhn_run(cfg: &ExperimentConfig, reference: &[StateVec], dt: f64, scheme: &Scheme, params: String) -> ResultRow {
    let started = Instant::now();
    let sys = fhn_system(cfg.fhn);
    let traj = TimeGrid::new(0.0, cfg.t_end, dt).and_then(|g| integrate(&sys, &[0.0, 0.0], &g, scheme));
    match traj {
        Ok(traj) => {
            let err = max_error_at_shared_times(&traj.states, dt, reference, cfg.reference_dt);
            row(cfg, params, &traj, Some(err), started)
        }
        Err(_) => failed_row(cfg, params, started),
    }
}

fn fhn_compare(cfg: &ExperimentConfig) -> Result<Rows> {
    let reference = fhn_reference(cfg)?;
    let mut cells: Vec<(f64, Scheme, String)> = Vec::new();
    for &dt in &cfg.dt {
        cells.push((dt, Scheme::ground_truth(), format!("scheme=implicit dt={dt}")));
        cells.push((dt, Scheme::ImexFhn(cfg.fhn), format!("scheme=imex dt={dt}")));
        for &m in &cfg.depth {
            cells.push((dt, implicitized(cfg, m), format!("scheme=implicitized m={m} dt={dt}")));
        }
    }
    let rows: Vec<ResultRow> = cells
        .par_iter()
        .map(|(dt, scheme, params)| fhn_run(cfg, &reference, *dt, scheme, params.clone()))
        .collect();
    Ok((rows, Vec::new()))
}

fn fhn_convergence(cfg: &ExperimentConfig) -> Result<Rows> {
    let reference = fhn_reference(cfg)?;
    let cells: Vec<(usize, f64)> = cfg
        .depth
        .iter()
        .flat_map(|&m| cfg.dt.iter().map(move |&dt| (m, dt)))
        .collect();
    let rows: Vec<ResultRow> = cells
        .par_iter()
        .map(|&(m, dt)| fhn_run(cfg, &reference, dt, &implicitized(cfg, m), format!("m={m} dt={dt}")))
        .collect();
    let mut notes = Vec::new();
    for (m, chunk) in cfg.depth.iter().zip(rows.chunks(cfg.dt.len())) {
        let errs: Vec<f64> = chunk.iter().map(|r| r.error.unwrap_or(f64::NAN)).collect();
        match fit_slope(&cfg.dt, &errs) {
            Some(s) if errs.iter().all(|e| e.is_finite()) => notes.push(format!("m={m}: fitted order {s:.4}")),
            _ => notes.push(format!("m={m}: fitted order unavailable")),
        }
    }
    Ok((rows, notes))
}

fn fhn_depth_sweep(cfg: &ExperimentConfig) -> Result<Rows> {
    let reference = fhn_reference(cfg)?;
    let cells: Vec<(f64, usize)> = cfg
        .dt
        .iter()
        .flat_map(|&dt| cfg.depth.iter().map(move |&m| (dt, m)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(dt, m)| fhn_run(cfg, &reference, dt, &implicitized(cfg, m), format!("dt={dt} m={m}")))
        .collect();
    Ok((rows, Vec::new()))
}

// ---------------------------------------------------------------- PDEs

fn grid(cfg: &ExperimentConfig, cells: usize) -> Result<GridSpec> {
    GridSpec::unit(cfg.dims, cells)
}

fn initial_state(cfg: &ExperimentConfig, grid: &GridSpec) -> StateVec {
    let mut u = cfg.initial.sample(grid, cfg.seed);
    u.iter_mut().for_each(|v| *v *= cfg.amplitude);
    u
}

/// Runs `steps` implicitized steps of `dt` and, when `with_error`, compares
/// against the ground-truth trajectory at the same `dt`.
fn pde_run(
    cfg: &ExperimentConfig,
    sys: &dyn OdeSystem,
    u0: &[f64],
    dt: f64,
    depth: usize,
    with_error: bool,
    params: String,
) -> ResultRow {
    let started = Instant::now();
    let time = match TimeGrid::new(0.0, dt * cfg.steps as f64, dt) {
        Ok(t) => t,
        Err(_) => return failed_row(cfg, params, started),
    };
    let traj = match integrate(sys, u0, &time, &implicitized(cfg, depth)) {
        Ok(t) => t,
        Err(_) => return failed_row(cfg, params, started),
    };
    let mut error = None;
    if with_error && traj.completed() {
        let truth = integrate(sys, u0, &time, &Scheme::GroundTruth { tol: GROUND_TRUTH_TOL });
        match truth {
            Ok(t) if t.completed() => error = Some(max_error(&traj.states, &t.states)),
            _ => return failed_row(cfg, params, started),
        }
    }
    row(cfg, params, &traj, error, started)
}

fn heat_depth_dt_table(cfg: &ExperimentConfig) -> Result<Rows> {
    let mut cells = Vec::new();
    for &c in &cfg.cells {
        for &m in &cfg.depth {
            for &dt in &cfg.dt {
                cells.push((c, m, dt));
            }
        }
    }
    let rows = cells
        .par_iter()
        .map(|&(c, m, dt)| {
            let params = format!("mode={} cells={c} m={m} dt={dt}", cfg.mass_mode.as_str());
            let problem = match grid(cfg, c).and_then(|g| HeatProblem::new(g, cfg.mu, cfg.mass_mode)) {
                Ok(p) => p,
                Err(_) => return failed_row(cfg, params, Instant::now()),
            };
            let u0 = initial_state(cfg, &problem.grid);
            let sys = heat_system(problem);
            pde_run(cfg, &sys, &u0, dt, m, true, params)
        })
        .collect();
    Ok((rows, Vec::new()))
}

fn heat_plap_table(cfg: &ExperimentConfig) -> Result<Rows> {
    let mut cells = Vec::new();
    for &c in &cfg.cells {
        for &p in &cfg.p {
            for &m in &cfg.depth {
                for &dt in &cfg.dt {
                    cells.push((c, p, m, dt));
                }
            }
        }
    }
    let rows = cells
        .par_iter()
        .map(|&(c, p, m, dt)| {
            let params = format!("cells={c} p={p} m={m} dt={dt}");
            let sys = match grid(cfg, c)
                .and_then(|g| PLaplacianParams::new(g, p))
                .and_then(plaplacian_system)
            {
                Ok(s) => s,
                Err(_) => return failed_row(cfg, params, Instant::now()),
            };
            let u0 = initial_state(cfg, &sys.params().grid);
            let mut r = pde_run(cfg, &sys, &u0, dt, m, false, params);
            r.params = format!("{} dofs={}", r.params, sys.dim());
            r
        })
        .collect();
    Ok((rows, Vec::new()))
}

fn cfl_probe(cfg: &ExperimentConfig) -> Result<Rows> {
    let mut problems = Vec::new();
    let mut notes = Vec::new();
    for &c in &cfg.cells {
        let problem = HeatProblem::new(grid(cfg, c)?, cfg.mu, cfg.mass_mode)?;
        let threshold = cfl_threshold(&problem)?;
        notes.push(format!(
            "mode={} cells={c}: dt_max = {threshold:.6e}",
            cfg.mass_mode.as_str()
        ));
        problems.push((c, problem, threshold));
    }
    let mut cells = Vec::new();
    for (i, (_, _, _)) in problems.iter().enumerate() {
        for &m in &cfg.depth {
            for &f in &cfg.dt_factor {
                cells.push((i, m, f));
            }
        }
    }
    let rows = cells
        .par_iter()
        .map(|&(i, m, factor)| {
            let (c, problem, threshold) = &problems[i];
            let dt = factor * threshold;
            let params = format!("mode={} cells={c} m={m} factor={factor} dt={dt:.6e}", cfg.mass_mode.as_str());
            let u0 = initial_state(cfg, &problem.grid);
            let sys = heat_system(problem.clone());
            pde_run(cfg, &sys, &u0, dt, m, false, params)
        })
        .collect();
    Ok((rows, notes))
}

fn aa_gmres_check(cfg: &ExperimentConfig) -> Result<Rows> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut systems = Vec::with_capacity(cfg.systems);
    for _ in 0..cfg.systems {
        let a = random_spd(cfg.size, cfg.condition, &mut rng)?;
        let b = random_rhs(cfg.size, &mut rng);
        systems.push((a, b));
    }
    let rows: Vec<ResultRow> = systems
        .par_iter()
        .enumerate()
        .map(|(i, (a, b))| {
            let started = Instant::now();
            let params = format!(
                "system={i} n={} condition={} seed={}",
                cfg.size, cfg.condition, cfg.seed
            );
            match compare_with_gmres(a, b) {
                Ok(cmp) => ResultRow {
                    experiment: cfg.experiment.as_str().to_owned(),
                    params: format!(
                        "{params} compared={} agreeing={}",
                        cmp.compared,
                        cmp.agreeing_prefix(MISMATCH_TOL)
                    ),
                    mean_fp_iters: None,
                    mean_cg_per_iter: None,
                    mean_cg_per_step: None,
                    error: Some(cmp.max_relative_mismatch),
                    status: if cmp.max_relative_mismatch <= MISMATCH_TOL {
                        RowStatus::Ok
                    } else {
                        RowStatus::Failed
                    },
                    wall_time_s: Some(started.elapsed().as_secs_f64()),
                },
                Err(_) => failed_row(cfg, params, started),
            }
        })
        .collect();
    let worst = rows.iter().filter_map(|r| r.error).fold(0.0, f64::max);
    Ok((rows, vec![format!("max relative trace mismatch {worst:.3e} (tolerance {MISMATCH_TOL:e})")]))
}

fn burgers_demo(cfg: &ExperimentConfig) -> Result<Rows> {
    let mut cells = Vec::new();
    for &c in &cfg.cells {
        for &m in &cfg.depth {
            for &dt in &cfg.dt {
                cells.push((c, m, dt));
            }
        }
    }
    let rows = cells
        .par_iter()
        .map(|&(c, m, dt)| {
            let params = format!("cells={c} nu={} m={m} dt={dt}", cfg.nu);
            let sys = match grid(cfg, c)
                .and_then(|g| BurgersParams::new(g, cfg.nu))
                .and_then(burgers_system)
            {
                Ok(s) => s,
                Err(_) => return failed_row(cfg, params, Instant::now()),
            };
            let u0 = initial_state(cfg, &sys.params().grid);
            pde_run(cfg, &sys, &u0, dt, m, true, params)
        })
        .collect();
    Ok((rows, Vec::new()))
}
