//! CSV and JSON emission for sweep results.
//!
//! Summary floats are written with six significant digits. The per-run file
//! carries full round-trip precision so that every summary value can be
//! recomputed from it.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use super::{CellSummary, CellTrajectory, HarnessError, RunRecord, SweepOutput};
use crate::fmt::sig6;
use crate::sim::TrajectoryPoint;

pub const SUMMARY_HEADER: &str = "operator,n,k,r,sigma,consensus,runs,mean_bel_best,std_bel_best,converged_fraction,mean_conv_iter,std_conv_iter";

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

/// The summary file and its siblings.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputPaths {
    pub summary: PathBuf,
    pub runs: PathBuf,
    pub trajectory: PathBuf,
}

impl OutputPaths {
    /// `out.csv` -> `out.csv`, `out_runs.csv`, `out_trajectory.csv`.
    pub fn for_summary(path: &Path, format: OutputFormat) -> OutputPaths {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "sweep".to_string());
        let ext = format.extension();
        let sibling = |suffix: &str| path.with_file_name(format!("{stem}{suffix}.{ext}"));
        OutputPaths {
            summary: path.to_path_buf(),
            runs: sibling("_runs"),
            trajectory: sibling("_trajectory"),
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|source| HarnessError::Io {
            path: parent.display().to_string(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn opt_sig6(v: Option<f64>) -> String {
    v.map(sig6).unwrap_or_default()
}

/// Summary table, rows sorted by (operator, n, r, sigma, consensus).
pub fn summaries_csv_string(summaries: &[CellSummary]) -> String {
    let mut rows: Vec<&CellSummary> = summaries.iter().collect();
    rows.sort_by(|a, b| a.cell.sort_cmp(&b.cell));
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for s in rows {
        let c = &s.cell;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            c.operator,
            c.n,
            c.k,
            sig6(c.r),
            sig6(c.sigma),
            c.consensus,
            s.runs,
            sig6(s.mean_bel_best),
            sig6(s.std_bel_best),
            sig6(s.converged_fraction),
            opt_sig6(s.convergence.map(|v| v.mean)),
            opt_sig6(s.convergence.map(|v| v.std)),
        ));
    }
    out
}

/// One row per run. Belief columns `bel_s1..` extend to the largest `n` in
/// the input and are empty for smaller frames.
pub fn runs_csv_string(runs: &[RunRecord]) -> String {
    let max_n = runs.iter().map(|r| r.cell.n).max().unwrap_or(0);
    let mut out = String::from(
        "operator,n,k,r,sigma,consensus,run,seed,converged,convergence_iteration,iterations,dempster_skips,bel_best,pl_best,bel_top",
    );
    for j in 1..=max_n {
        out.push_str(&format!(",bel_s{j}"));
    }
    out.push('\n');
    let mut rows: Vec<&RunRecord> = runs.iter().collect();
    rows.sort_by(|a, b| a.cell.sort_cmp(&b.cell).then(a.run.cmp(&b.run)));
    for r in rows {
        let c = &r.cell;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            c.operator,
            c.n,
            c.k,
            sig6(c.r),
            sig6(c.sigma),
            c.consensus,
            r.run,
            r.seed,
            r.converged,
            r.convergence_iteration.map(|t| t.to_string()).unwrap_or_default(),
            r.iterations,
            r.dempster_skips,
            r.bel_best(),
            r.pl_best(),
            r.bel_top,
        ));
        for j in 0..max_n {
            out.push(',');
            if let Some(b) = r.bel.get(j) {
                out.push_str(&b.to_string());
            }
        }
        out.push('\n');
    }
    out
}

/// Averaged trajectories of every cell.
pub fn trajectory_csv_string(trajectories: &[CellTrajectory]) -> String {
    let max_n = trajectories.iter().map(|t| t.cell.n).max().unwrap_or(0);
    let mut out = String::from("operator,n,k,r,sigma,consensus,iteration");
    for j in 1..=max_n {
        out.push_str(&format!(",mean_bel_s{j}"));
    }
    out.push_str(",mean_pl_best,std_bel_best\n");
    for t in trajectories {
        let c = &t.cell;
        for p in &t.points {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}",
                c.operator,
                c.n,
                c.k,
                sig6(c.r),
                sig6(c.sigma),
                c.consensus,
                p.iteration
            ));
            for j in 0..max_n {
                out.push(',');
                if let Some(b) = p.mean_bel.get(j) {
                    out.push_str(&sig6(*b));
                }
            }
            out.push_str(&format!(",{},{}\n", sig6(p.mean_pl_best), sig6(p.std_bel_best)));
        }
    }
    out
}

/// Trajectory of a single run: iteration, mean Bel per state, mean Pl of the
/// best state (`s_n`).
pub fn run_trajectory_csv_string(points: &[TrajectoryPoint]) -> String {
    let n = points.first().map_or(0, |p| p.mean_bel.len());
    let mut out = String::from("iteration");
    for j in 1..=n {
        out.push_str(&format!(",mean_bel_s{j}"));
    }
    out.push_str(",mean_pl_best\n");
    for p in points {
        out.push_str(&p.iteration.to_string());
        for b in &p.mean_bel {
            out.push(',');
            out.push_str(&sig6(*b));
        }
        out.push_str(&format!(",{}\n", sig6(p.mean_pl.last().copied().unwrap_or(0.0))));
    }
    out
}

pub fn emit_csv(summaries: &[CellSummary], path: &Path) -> Result<(), HarnessError> {
    write_file(path, &summaries_csv_string(summaries))
}

pub fn emit_runs_csv(runs: &[RunRecord], path: &Path) -> Result<(), HarnessError> {
    write_file(path, &runs_csv_string(runs))
}

pub fn emit_trajectory_csv(trajectories: &[CellTrajectory], path: &Path) -> Result<(), HarnessError> {
    write_file(path, &trajectory_csv_string(trajectories))
}

pub fn emit_run_trajectory_csv(points: &[TrajectoryPoint], path: &Path) -> Result<(), HarnessError> {
    write_file(path, &run_trajectory_csv_string(points))
}

pub fn emit_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, &text)
}

/// JSON mirror of a summary row.
#[derive(Serialize)]
struct SummaryRow<'a> {
    operator: &'a str,
    n: usize,
    k: usize,
    r: f64,
    sigma: f64,
    consensus: bool,
    runs: usize,
    mean_bel_best: f64,
    std_bel_best: f64,
    converged_fraction: f64,
    mean_conv_iter: Option<f64>,
    std_conv_iter: Option<f64>,
    mean_pl_best: f64,
    top_set_size: usize,
    mean_bel_top: f64,
}

fn summary_rows(summaries: &[CellSummary]) -> Vec<SummaryRow<'_>> {
    let mut rows: Vec<&CellSummary> = summaries.iter().collect();
    rows.sort_by(|a, b| a.cell.sort_cmp(&b.cell));
    rows.into_iter()
        .map(|s| SummaryRow {
            operator: s.cell.operator.name(),
            n: s.cell.n,
            k: s.cell.k,
            r: s.cell.r,
            sigma: s.cell.sigma,
            consensus: s.cell.consensus,
            runs: s.runs,
            mean_bel_best: s.mean_bel_best,
            std_bel_best: s.std_bel_best,
            converged_fraction: s.converged_fraction,
            mean_conv_iter: s.convergence.map(|c| c.mean),
            std_conv_iter: s.convergence.map(|c| c.std),
            mean_pl_best: s.mean_pl_best,
            top_set_size: s.top_set_size,
            mean_bel_top: s.mean_bel_top,
        })
        .collect()
}

/// Write the summary, per-run and (when present) trajectory files.
pub fn write_outputs(
    output: &SweepOutput,
    summary_path: &Path,
    format: OutputFormat,
) -> Result<OutputPaths, HarnessError> {
    let paths = OutputPaths::for_summary(summary_path, format);
    match format {
        OutputFormat::Csv => {
            emit_csv(&output.summaries, &paths.summary)?;
            emit_runs_csv(&output.runs, &paths.runs)?;
            if !output.trajectories.is_empty() {
                emit_trajectory_csv(&output.trajectories, &paths.trajectory)?;
            }
        }
        OutputFormat::Json => {
            emit_json(&summary_rows(&output.summaries), &paths.summary)?;
            emit_json(&output.runs, &paths.runs)?;
            if !output.trajectories.is_empty() {
                emit_json(&output.trajectories, &paths.trajectory)?;
            }
        }
    }
    Ok(paths)
}
