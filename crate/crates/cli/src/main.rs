use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use dstcons::fixedpoint::{categorical_survey, reports_to_csv, Thresholds};
use dstcons::fmt::sig6;
use dstcons::harness::{
    emit_json, emit_run_trajectory_csv, parse_sweep_toml, presets, resolve_workers, run_sweep,
    write_outputs, OutputFormat, SweepSpec,
};
use dstcons::sim::{StepOrder, DEFAULT_MAX_ITERATIONS};
use dstcons::{Frame, Operator, SimConfig};

#[derive(Parser)]
#[command(name = "dstcons", version, about = "Dempster-Shafer best-of-n consensus simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one population and write its trajectory.
    Run(RunArgs),
    /// Run a Monte Carlo sweep and write summary, per-run and trajectory files.
    Sweep(SweepArgs),
    /// Classify the categorical fixed points of the self-combination map.
    Fixedpoints(FixedpointArgs),
    /// Run a canned figure sweep (fig1..fig5, convergence).
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value = "dubois_prade")]
    operator: Operator,
    #[arg(long, default_value_t = 3)]
    states: usize,
    #[arg(long, default_value_t = 100)]
    agents: usize,
    #[arg(long, default_value_t = 0.05)]
    evidence_rate: f64,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
    max_iterations: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Evidence-only baseline: skip pairwise combination.
    #[arg(long)]
    no_consensus: bool,
    /// Trajectory sampling interval in iterations.
    #[arg(long, default_value_t = 1)]
    stride: u64,
    #[arg(long, value_enum, default_value = "evidence-first")]
    order: OrderArg,
    #[arg(long, default_value = "trajectory.csv")]
    out: PathBuf,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Copy, Clone, clap::ValueEnum)]
enum OrderArg {
    EvidenceFirst,
    ConsensusFirst,
}

impl From<OrderArg> for StepOrder {
    fn from(o: OrderArg) -> StepOrder {
        match o {
            OrderArg::EvidenceFirst => StepOrder::EvidenceFirst,
            OrderArg::ConsensusFirst => StepOrder::ConsensusFirst,
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    /// TOML sweep file; flags below override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    operator: Vec<Operator>,
    #[arg(long, value_delimiter = ',')]
    states: Vec<usize>,
    #[arg(long)]
    agents: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    evidence_rate: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    noise: Vec<f64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    max_iterations: Option<u64>,
    /// Root seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Run only the evidence-only baselines.
    #[arg(long)]
    no_consensus: bool,
    /// Also run the evidence-only baselines.
    #[arg(long)]
    baselines: bool,
    /// Averaged trajectory sampling interval; 0 disables.
    #[arg(long)]
    stride: Option<u64>,
    #[arg(long, default_value = "sweep.csv")]
    out: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Args)]
struct FixedpointArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![3])]
    states: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    operator: Vec<Operator>,
    /// Finite-difference step.
    #[arg(long, default_value_t = dstcons::fixedpoint::DEFAULT_STEP)]
    step: f64,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReproduceArgs {
    figure: String,
    #[arg(long, default_value_t = 100)]
    runs: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "results")]
    out_dir: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Fixedpoints(a) => cmd_fixedpoints(a),
        Command::Reproduce(a) => cmd_reproduce(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let config = SimConfig {
        operator: a.operator,
        agents: a.agents,
        states: a.states,
        evidence_rate: a.evidence_rate,
        sigma: a.noise,
        max_iterations: a.max_iterations,
        consensus_enabled: !a.no_consensus,
        seed: a.seed,
        trajectory_stride: a.stride.max(1),
        order: a.order.into(),
        ..SimConfig::new(a.operator, a.states)
    };
    let result = dstcons::run(&config)?;
    match a.format {
        OutputFormat::Csv => emit_run_trajectory_csv(&result.trajectory, &a.out)?,
        OutputFormat::Json => emit_json(&result.trajectory, &a.out)?,
    }
    let bel: Vec<String> = (1..=config.states).map(|s| sig6(result.mean_bel(s))).collect();
    match result.convergence_iteration {
        Some(t) => println!("converged at iteration {t} (detected {})", t + config.convergence_window),
        None => println!("no convergence within {} iterations", result.iterations),
    }
    println!("mean Bel per state: {}", bel.join(" "));
    if result.dempster_skips > 0 {
        println!("skipped Dempster interactions: {}", result.dempster_skips);
    }
    println!("trajectory written to {}", a.out.display());
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> Result<()> {
    let (mut spec, file_workers) = match &a.config {
        Some(path) => parse_sweep_toml(path)?,
        None => (SweepSpec::default(), None),
    };
    if !a.operator.is_empty() {
        spec.operators = a.operator.clone();
    }
    if !a.states.is_empty() {
        spec.n_values = a.states.clone();
    }
    if !a.evidence_rate.is_empty() {
        spec.r_values = a.evidence_rate.clone();
    }
    if !a.noise.is_empty() {
        spec.sigma_values = a.noise.clone();
    }
    if let Some(k) = a.agents {
        spec.k = k;
    }
    if let Some(runs) = a.runs {
        spec.runs_per_cell = runs;
    }
    if let Some(cap) = a.max_iterations {
        spec.max_iterations = cap;
    }
    if let Some(seed) = a.seed {
        spec.root_seed = seed;
    }
    if let Some(stride) = a.stride {
        spec.trajectory_stride = stride;
    }
    if a.no_consensus {
        spec.consensus = false;
    }
    if a.baselines {
        spec.baselines = true;
    }
    spec.validate()?;
    let workers = resolve_workers(a.workers.or(file_workers));
    execute(&spec, workers, &a.out, a.format)
}

fn execute(spec: &SweepSpec, workers: usize, out: &Path, format: OutputFormat) -> Result<()> {
    let cells = spec.cells().len();
    eprintln!(
        "running {cells} cells x {} runs on {workers} worker(s)",
        spec.runs_per_cell
    );
    let output = run_sweep(spec, workers)?;
    let paths = write_outputs(&output, out, format)?;
    println!("summary: {}", paths.summary.display());
    println!("runs: {}", paths.runs.display());
    if !output.trajectories.is_empty() {
        println!("trajectories: {}", paths.trajectory.display());
    }
    Ok(())
}

fn cmd_fixedpoints(a: FixedpointArgs) -> Result<()> {
    let ops = if a.operator.is_empty() {
        Operator::ALL.to_vec()
    } else {
        a.operator.clone()
    };
    if !(a.step > 0.0 && a.step < 0.5) {
        bail!("--step must lie in (0, 0.5), got {}", a.step);
    }
    let thresholds = Thresholds {
        step: a.step,
        ..Thresholds::default()
    };
    let mut reports = Vec::new();
    for &n in &a.states {
        let frame = Frame::new(n)?;
        if n > 6 {
            bail!("fixed-point analysis supports at most 6 states, got {n}");
        }
        reports.extend(categorical_survey(&ops, frame, &thresholds));
    }
    let csv = reports_to_csv(&reports);
    match &a.out {
        Some(path) => std::fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_reproduce(a: ReproduceArgs) -> Result<()> {
    let Some(mut spec) = presets::preset(&a.figure, a.runs) else {
        bail!(
            "unknown figure `{}` (expected one of {})",
            a.figure,
            presets::PRESET_IDS.join(", ")
        );
    };
    if let Some(seed) = a.seed {
        spec.root_seed = seed;
    }
    spec.validate()?;
    let out = a.out_dir.join(format!("{}.{}", a.figure, a.format.extension()));
    execute(&spec, resolve_workers(a.workers), &out, a.format)
}
