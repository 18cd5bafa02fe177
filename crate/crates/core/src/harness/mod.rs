//! Experiment runner behind the `implicitize` CLI.

mod config;
mod experiments;
pub mod gmres_check;
mod report;

use std::path::{Path, PathBuf};

pub use config::{ConfigError, ExperimentConfig, ExperimentKind};
pub use experiments::{fit_slope, run_experiment, MISMATCH_TOL};
pub use report::{render_table, to_csv, ResultRow, RowStatus, CSV_HEADER};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("i/o error on {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error(transparent)]
    Internal(#[from] crate::Error),
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the config's `output` key.
    pub output: Option<PathBuf>,
    /// When false the wall-time column is left empty.
    pub timing: bool,
    /// Worker threads for the sweep; `None` uses all cores.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub rows: Vec<ResultRow>,
    /// Derived figures printed under the table (fitted orders and the like).
    pub notes: Vec<String>,
    pub output: PathBuf,
}

/// Runs one experiment and writes its CSV.
pub fn run(config: &ExperimentConfig, options: &RunOptions) -> Result<RunSummary, RunError> {
    config.validate()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = options.threads {
        if n == 0 {
            return Err(ConfigError {
                line: None,
                key: Some("threads".into()),
                message: "must be at least 1".into(),
            }
            .into());
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| crate::Error::InvalidArgument(e.to_string()))?;
    let (mut rows, notes) = pool.install(|| run_experiment(config))?;
    if !options.timing {
        rows.iter_mut().for_each(|r| r.wall_time_s = None);
    }

    let output = options
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output));
    write_file(&output, &to_csv(&rows))?;
    Ok(RunSummary { rows, notes, output })
}

/// Parses `path`, then [`run`]s it.
pub fn run_path(path: &Path, options: &RunOptions) -> Result<RunSummary, RunError> {
    let config = ExperimentConfig::parse_file(path)?;
    run(&config, options)
}

fn write_file(path: &Path, contents: &str) -> Result<(), RunError> {
    let io = |e: std::io::Error| RunError::Io {
        path: path.to_owned(),
        message: e.to_string(),
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(path, contents).map_err(io)
}
