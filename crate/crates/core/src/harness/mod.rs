//! Seeded Monte Carlo sweeps over operator, state count, evidence rate,
//! noise and the consensus flag.
//!
//! Every run gets its own seed derived from the sweep's root seed and the
//! run's cell coordinates, so runs can execute in any order on any number of
//! workers and the aggregated output is still byte-identical.

mod config;
mod output;
pub mod presets;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combine::Operator;
use crate::frame::Subset;
use crate::sim::{self, ConfigError, SimConfig, StepOrder, TrajectoryPoint};

pub use config::{parse_sweep_toml, SweepFile};
pub use output::{
    emit_csv, emit_json, emit_run_trajectory_csv, emit_runs_csv, emit_trajectory_csv,
    run_trajectory_csv_string, runs_csv_string, summaries_csv_string, trajectory_csv_string,
    write_outputs, OutputFormat, OutputPaths, SUMMARY_HEADER,
};

/// Environment variable that overrides the worker count.
pub const WORKERS_ENV: &str = "DSTCONS_WORKERS";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid sweep: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("failed to parse config {path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("could not build worker pool: {0}")]
    Pool(String),
    #[error("JSON encoding failed: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub operators: Vec<Operator>,
    pub n_values: Vec<usize>,
    /// Agents per population.
    pub k: usize,
    pub r_values: Vec<f64>,
    pub sigma_values: Vec<f64>,
    pub runs_per_cell: usize,
    pub max_iterations: u64,
    pub root_seed: u64,
    /// Also run the evidence-only baseline for every cell.
    pub baselines: bool,
    /// Run the full protocol. With `false` only baselines are produced.
    pub consensus: bool,
    /// Averaged trajectory sampling interval; 0 disables trajectories.
    pub trajectory_stride: u64,
    pub convergence_window: u64,
    pub order: StepOrder,
    /// Size of the top-quality subset `{s_{n-t+1}, .., s_n}` whose belief is
    /// also reported.
    pub top_set_size: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            operators: vec![Operator::DuboisPrade],
            n_values: vec![3],
            k: 100,
            r_values: vec![0.05],
            sigma_values: vec![0.1],
            runs_per_cell: 100,
            max_iterations: sim::DEFAULT_MAX_ITERATIONS,
            root_seed: 0,
            baselines: false,
            consensus: true,
            trajectory_stride: 0,
            convergence_window: sim::DEFAULT_CONVERGENCE_WINDOW,
            order: StepOrder::EvidenceFirst,
            top_set_size: 2,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let invalid = |m: &str| Err(HarnessError::InvalidSpec(m.to_string()));
        if self.operators.is_empty() {
            return invalid("operators list is empty");
        }
        if self.n_values.is_empty() {
            return invalid("n_values list is empty");
        }
        if self.r_values.is_empty() {
            return invalid("r_values list is empty");
        }
        if self.sigma_values.is_empty() {
            return invalid("sigma_values list is empty");
        }
        if self.runs_per_cell < 1 {
            return invalid("runs_per_cell must be at least 1");
        }
        for cell in self.cells() {
            cell.sim_config(self, 0).validate()?;
        }
        Ok(())
    }

    /// Consensus flags covered by the sweep.
    fn consensus_flags(&self) -> Vec<bool> {
        let mut flags = Vec::new();
        if self.consensus {
            flags.push(true);
        }
        if self.baselines || !self.consensus {
            flags.push(false);
        }
        flags
    }

    /// All cells, in generation order.
    pub fn cells(&self) -> Vec<CellKey> {
        let mut cells = Vec::new();
        for &operator in &self.operators {
            for &n in &self.n_values {
                for (r_index, &r) in self.r_values.iter().enumerate() {
                    for (sigma_index, &sigma) in self.sigma_values.iter().enumerate() {
                        for consensus in self.consensus_flags() {
                            cells.push(CellKey {
                                operator,
                                n,
                                k: self.k,
                                r,
                                sigma,
                                consensus,
                                r_index,
                                sigma_index,
                            });
                        }
                    }
                }
            }
        }
        cells
    }
}

/// Coordinates of one sweep cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellKey {
    pub operator: Operator,
    pub n: usize,
    pub k: usize,
    pub r: f64,
    pub sigma: f64,
    pub consensus: bool,
    #[serde(skip)]
    pub r_index: usize,
    #[serde(skip)]
    pub sigma_index: usize,
}

impl CellKey {
    /// Output order: operator name, then n, r, sigma, consensus flag.
    pub fn sort_cmp(&self, other: &CellKey) -> std::cmp::Ordering {
        self.operator
            .name()
            .cmp(other.operator.name())
            .then(self.n.cmp(&other.n))
            .then(self.r.total_cmp(&other.r))
            .then(self.sigma.total_cmp(&other.sigma))
            .then(other.consensus.cmp(&self.consensus))
    }

    pub fn run_seed(&self, root_seed: u64, run: usize) -> u64 {
        derive_seed(
            root_seed,
            &[
                self.operator.id(),
                self.n as u64,
                self.r_index as u64,
                self.sigma_index as u64,
                self.consensus as u64,
                run as u64,
            ],
        )
    }

    pub fn sim_config(&self, spec: &SweepSpec, run: usize) -> SimConfig {
        SimConfig {
            operator: self.operator,
            agents: self.k,
            states: self.n,
            evidence_rate: self.r,
            sigma: self.sigma,
            max_iterations: spec.max_iterations,
            consensus_enabled: self.consensus,
            seed: self.run_seed(spec.root_seed, run),
            trajectory_stride: spec.trajectory_stride,
            convergence_window: spec.convergence_window,
            order: spec.order,
            qualities: None,
        }
    }
}

/// SplitMix64 finaliser.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fold `fields` into `root` with SplitMix64:
/// `h_0 = splitmix64(root)`, `h_{i+1} = splitmix64(h_i ^ splitmix64(field_i))`.
pub fn derive_seed(root: u64, fields: &[u64]) -> u64 {
    fields
        .iter()
        .fold(splitmix64(root), |h, &f| splitmix64(h ^ splitmix64(f)))
}

/// Outcome of a single run, reduced to what the output files need.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    #[serde(flatten)]
    pub cell: CellKey,
    pub run: usize,
    pub seed: u64,
    pub converged: bool,
    pub convergence_iteration: Option<u64>,
    pub iterations: u64,
    pub dempster_skips: u64,
    /// Steady-state population mean `Bel({s_j})`, `j = 1..n`.
    pub bel: Vec<f64>,
    /// Steady-state population mean `Pl({s_j})`, `j = 1..n`.
    pub pl: Vec<f64>,
    /// Steady-state population mean belief in the top-quality subset.
    pub bel_top: f64,
    #[serde(skip)]
    pub trajectory: Vec<TrajectoryPoint>,
}

impl RunRecord {
    pub fn bel_best(&self) -> f64 {
        self.bel[self.cell.n - 1]
    }

    pub fn pl_best(&self) -> f64 {
        self.pl[self.cell.n - 1]
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceStats {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellSummary {
    #[serde(flatten)]
    pub cell: CellKey,
    pub runs: usize,
    pub mean_bel_best: f64,
    pub std_bel_best: f64,
    pub mean_pl_best: f64,
    pub converged_fraction: f64,
    pub convergence: Option<ConvergenceStats>,
    pub top_set_size: usize,
    pub mean_bel_top: f64,
}

/// Averaged trajectory of one cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellTrajectory {
    pub cell: CellKey,
    pub points: Vec<AveragedPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AveragedPoint {
    pub iteration: u64,
    pub mean_bel: Vec<f64>,
    pub mean_pl_best: f64,
    pub std_bel_best: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutput {
    /// Sorted by cell key.
    pub summaries: Vec<CellSummary>,
    /// Sorted by cell key, then run index.
    pub runs: Vec<RunRecord>,
    pub trajectories: Vec<CellTrajectory>,
}

/// Worker count: `DSTCONS_WORKERS` when set and valid, otherwise `fallback`,
/// otherwise the number of available CPUs.
pub fn resolve_workers(fallback: Option<usize>) -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&w| w > 0)
        .or(fallback.filter(|&w| w > 0))
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Execute every run of every cell on `workers` threads and aggregate.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepOutput, HarnessError> {
    spec.validate()?;
    let mut cells = spec.cells();
    cells.sort_by(|a, b| a.sort_cmp(b));

    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..spec.runs_per_cell).map(move |r| (c, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    let records: Vec<RunRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|&(c, run)| execute_run(spec, &cells[c], run))
            .collect::<Result<Vec<_>, _>>()
    })?;

    let per_cell = spec.runs_per_cell;
    let mut summaries = Vec::with_capacity(cells.len());
    let mut trajectories = Vec::new();
    for (cell, chunk) in cells.iter().zip(records.chunks(per_cell)) {
        summaries.push(summarize_cell(cell, chunk, spec.top_set_size));
        if spec.trajectory_stride > 0 {
            trajectories.push(average_trajectory(cell, chunk, spec));
        }
    }
    Ok(SweepOutput {
        summaries,
        runs: records,
        trajectories,
    })
}

fn top_subset(n: usize, size: usize) -> Subset {
    let size = size.clamp(1, n);
    Subset::from_states(n + 1 - size..=n)
}

fn execute_run(spec: &SweepSpec, cell: &CellKey, run: usize) -> Result<RunRecord, HarnessError> {
    let config = cell.sim_config(spec, run);
    let result = sim::run(&config)?;
    let n = cell.n;
    Ok(RunRecord {
        cell: cell.clone(),
        run,
        seed: config.seed,
        converged: result.converged,
        convergence_iteration: result.convergence_iteration,
        iterations: result.iterations,
        dempster_skips: result.dempster_skips,
        bel: (1..=n).map(|s| result.mean_bel(s)).collect(),
        pl: (1..=n).map(|s| result.mean_pl(s)).collect(),
        bel_top: result.mean_bel_subset(top_subset(n, spec.top_set_size)),
        trajectory: result.trajectory,
    })
}

/// Mean and sample standard deviation (`n - 1` denominator; 0 for one value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let count = values.len() as f64;
    let mean = values.iter().sum::<f64>() / count;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1.0);
    (mean, var.sqrt())
}

/// Convergence-time statistics over the converged runs of a cell, and the
/// fraction of runs that converged. Statistics are absent when no run did.
pub fn summarize_convergence_time(runs: &[RunRecord]) -> (Option<ConvergenceStats>, f64) {
    let times: Vec<f64> = runs
        .iter()
        .filter_map(|r| r.convergence_iteration.map(|t| t as f64))
        .collect();
    let fraction = if runs.is_empty() {
        0.0
    } else {
        times.len() as f64 / runs.len() as f64
    };
    if times.is_empty() {
        return (None, fraction);
    }
    let (mean, std) = mean_std(&times);
    (
        Some(ConvergenceStats {
            mean,
            std,
            count: times.len(),
        }),
        fraction,
    )
}

/// Aggregate the runs of one cell. Runs that hit the iteration cap still
/// contribute their final beliefs.
pub fn summarize_cell(cell: &CellKey, runs: &[RunRecord], top_set_size: usize) -> CellSummary {
    let best: Vec<f64> = runs.iter().map(RunRecord::bel_best).collect();
    let (mean_bel_best, std_bel_best) = mean_std(&best);
    let pl: Vec<f64> = runs.iter().map(RunRecord::pl_best).collect();
    let top: Vec<f64> = runs.iter().map(|r| r.bel_top).collect();
    let (convergence, converged_fraction) = summarize_convergence_time(runs);
    CellSummary {
        cell: cell.clone(),
        runs: runs.len(),
        mean_bel_best,
        std_bel_best,
        mean_pl_best: mean_std(&pl).0,
        converged_fraction,
        convergence,
        top_set_size: top_set_size.clamp(1, cell.n),
        mean_bel_top: mean_std(&top).0,
    }
}

/// Average run trajectories on the grid `0, stride, 2·stride, .., max`.
/// Runs that stopped early hold their final sample.
fn average_trajectory(cell: &CellKey, runs: &[RunRecord], spec: &SweepSpec) -> CellTrajectory {
    let stride = spec.trajectory_stride;
    let last = runs.iter().map(|r| r.iterations).max().unwrap_or(0);
    let mut grid: Vec<u64> = (0..=last).step_by(stride as usize).collect();
    if grid.last() != Some(&last) {
        grid.push(last);
    }
    let n = cell.n;
    let mut cursors = vec![0usize; runs.len()];
    let points = grid
        .into_iter()
        .map(|t| {
            let mut bel = vec![0.0; n];
            let mut pl_best = 0.0;
            let mut best = Vec::with_capacity(runs.len());
            for (run, cursor) in runs.iter().zip(cursors.iter_mut()) {
                let traj = &run.trajectory;
                while *cursor + 1 < traj.len() && traj[*cursor + 1].iteration <= t {
                    *cursor += 1;
                }
                let p = &traj[*cursor];
                for (acc, v) in bel.iter_mut().zip(&p.mean_bel) {
                    *acc += v;
                }
                pl_best += p.mean_pl[n - 1];
                best.push(p.mean_bel[n - 1]);
            }
            let count = runs.len() as f64;
            bel.iter_mut().for_each(|b| *b /= count);
            AveragedPoint {
                iteration: t,
                mean_bel: bel,
                mean_pl_best: pl_best / count,
                std_bel_best: mean_std(&best).1,
            }
        })
        .collect();
    CellTrajectory {
        cell: cell.clone(),
        points,
    }
}
