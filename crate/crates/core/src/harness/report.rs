use std::fmt::Write;

pub const CSV_HEADER: &str = "experiment,params,mean_fp_iters,mean_cg_per_iter,mean_cg_per_step,error,status,wall_time_s";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    /// The fixed-point iteration did not converge; rendered as `--` in tables.
    Diverged,
    Failed,
}

impl RowStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::Diverged => "diverged",
            RowStatus::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    /// Space-separated `key=value` pairs.
    pub params: String,
    pub mean_fp_iters: Option<f64>,
    pub mean_cg_per_iter: Option<f64>,
    pub mean_cg_per_step: Option<f64>,
    pub error: Option<f64>,
    pub status: RowStatus,
    pub wall_time_s: Option<f64>,
}

fn opt(v: Option<f64>, f: impl Fn(f64) -> String) -> String {
    v.map(f).unwrap_or_default()
}

pub fn to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.experiment,
            r.params,
            opt(r.mean_fp_iters, |v| format!("{v:.4}")),
            opt(r.mean_cg_per_iter, |v| format!("{v:.4}")),
            opt(r.mean_cg_per_step, |v| format!("{v:.4}")),
            opt(r.error, |v| format!("{v:.6e}")),
            r.status.as_str(),
            opt(r.wall_time_s, |v| format!("{v:.4}")),
        );
    }
    out
}

/// Fixed-width table; non-converged cells show `--`.
pub fn render_table(rows: &[ResultRow]) -> String {
    let header = ["params", "fp iters", "cg/iter", "cg/step", "error", "status", "time [s]"];
    let cells: Vec<[String; 7]> = rows
        .iter()
        .map(|r| {
            let dash = |v: Option<f64>, f: &dyn Fn(f64) -> String| match (r.status, v) {
                (RowStatus::Diverged, _) => "--".to_owned(),
                (_, Some(v)) => f(v),
                (_, None) => String::new(),
            };
            [
                r.params.clone(),
                dash(r.mean_fp_iters, &|v| format!("{v:.2}")),
                dash(r.mean_cg_per_iter, &|v| format!("{v:.2}")),
                dash(r.mean_cg_per_step, &|v| format!("{v:.2}")),
                opt(r.error, |v| format!("{v:.3e}")),
                r.status.as_str().to_owned(),
                opt(r.wall_time_s, |v| format!("{v:.3}")),
            ]
        })
        .collect();
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &cells {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, items: &[&str]| {
        let parts: Vec<String> = items
            .iter()
            .zip(&width)
            .enumerate()
            .map(|(i, (s, w))| if i == 0 { format!("{s:<w$}") } else { format!("{s:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&mut out, &header);
    let rule: Vec<String> = width.iter().map(|w| "-".repeat(*w)).collect();
    let _ = writeln!(out, "{}", rule.join("  "));
    for row in &cells {
        let items: Vec<&str> = row.iter().map(String::as_str).collect();
        line(&mut out, &items);
    }
    out
}
