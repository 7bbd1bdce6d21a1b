//! The iterated multi-agent system.
//!
//! Each iteration every agent may update from direct evidence (with
//! probability `r`), then one uniformly chosen pair of distinct agents
//! combines beliefs and both adopt the result. A run stops when no agent's
//! mass function has moved by more than [`EPS_CONV`] for `convergence_window`
//! consecutive iterations, or at the iteration cap.

use rand::Rng;
use rand::SeedableRng;
use rand_pcg::Pcg64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combine::Operator;
use crate::error::DstError;
use crate::evidence::{evidence_mass, select_state, NoiseSpec, QualityProfile};
use crate::frame::Frame;
use crate::mass::{renormalize_mass, MassFunction};

/// Two mass functions closer than this are considered unchanged.
pub const EPS_CONV: f64 = 1e-9;

pub const DEFAULT_CONVERGENCE_WINDOW: u64 = 100;
pub const DEFAULT_MAX_ITERATIONS: u64 = 5000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("consensus needs at least 2 agents, got {0}")]
    TooFewAgents(usize),
    #[error("evidence rate must lie in [0, 1], got {0}")]
    EvidenceRate(f64),
    #[error("noise standard deviation must be finite and >= 0, got {0}")]
    Noise(f64),
    #[error("max_iterations must be at least 1")]
    MaxIterations,
    #[error("convergence window must be at least 1")]
    Window,
    #[error(transparent)]
    Dst(#[from] DstError),
}

/// Which process runs first within an iteration.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepOrder {
    #[default]
    EvidenceFirst,
    ConsensusFirst,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub operator: Operator,
    /// Population size `k`.
    pub agents: usize,
    /// Number of states `n`.
    pub states: usize,
    /// Evidence rate `r`.
    pub evidence_rate: f64,
    /// Noise standard deviation `σ`.
    pub sigma: f64,
    pub max_iterations: u64,
    /// `false` runs the evidence-only baseline.
    pub consensus_enabled: bool,
    pub seed: u64,
    /// Record a trajectory sample every this many iterations; 0 disables.
    pub trajectory_stride: u64,
    pub convergence_window: u64,
    pub order: StepOrder,
    /// Explicit qualities; `None` means `q_i = i / (n + 1)`.
    pub qualities: Option<Vec<f64>>,
}

impl SimConfig {
    /// Defaults from the reference experiments: 100 agents, 5000 iterations,
    /// a 100-iteration stasis window.
    pub fn new(operator: Operator, states: usize) -> SimConfig {
        SimConfig {
            operator,
            agents: 100,
            states,
            evidence_rate: 0.05,
            sigma: 0.1,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            consensus_enabled: true,
            seed: 0,
            trajectory_stride: 0,
            convergence_window: DEFAULT_CONVERGENCE_WINDOW,
            order: StepOrder::EvidenceFirst,
            qualities: None,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        Frame::new(self.states)?;
        if self.agents < 1 || (self.consensus_enabled && self.agents < 2) {
            return Err(ConfigError::TooFewAgents(self.agents));
        }
        if !(0.0..=1.0).contains(&self.evidence_rate) {
            return Err(ConfigError::EvidenceRate(self.evidence_rate));
        }
        if NoiseSpec::new(self.sigma).is_none() {
            return Err(ConfigError::Noise(self.sigma));
        }
        if self.max_iterations < 1 {
            return Err(ConfigError::MaxIterations);
        }
        if self.convergence_window < 1 {
            return Err(ConfigError::Window);
        }
        self.quality_profile()?;
        Ok(())
    }

    pub fn frame(&self) -> Result<Frame, DstError> {
        Frame::new(self.states)
    }

    pub fn quality_profile(&self) -> Result<QualityProfile, DstError> {
        match &self.qualities {
            Some(q) => QualityProfile::new(self.frame()?, q.clone()),
            None => QualityProfile::default_for(self.states),
        }
    }
}

/// The mass functions `m_1^t..m_k^t` of all agents at iteration `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentPopulation {
    pub agents: Vec<MassFunction>,
    pub iteration: u64,
}

impl AgentPopulation {
    pub fn mean_bel(&self, state: usize) -> f64 {
        mean_over(&self.agents, |m| m.bel_state(state))
    }

    pub fn mean_pl(&self, state: usize) -> f64 {
        mean_over(&self.agents, |m| m.pl_state(state))
    }
}

fn mean_over<F: Fn(&MassFunction) -> f64>(agents: &[MassFunction], f: F) -> f64 {
    if agents.is_empty() {
        return 0.0;
    }
    agents.iter().map(f).sum::<f64>() / agents.len() as f64
}

/// Every agent starts in total ignorance.
pub fn init_population(config: &SimConfig) -> Result<AgentPopulation, ConfigError> {
    let frame = config.frame()?;
    Ok(AgentPopulation {
        agents: vec![MassFunction::vacuous(frame); config.agents],
        iteration: 0,
    })
}

/// What a single step did to the population.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct StepReport {
    /// Some agent moved by more than [`EPS_CONV`].
    pub changed: bool,
    /// Interactions skipped because Dempster's rule hit total conflict.
    pub skips: u64,
}

/// Each agent, with probability `r`, investigates a state drawn from its
/// pignistic distribution and fuses the (noisy) evidence for it.
pub fn evidence_step<R: Rng + ?Sized>(
    pop: &mut AgentPopulation,
    profile: &QualityProfile,
    config: &SimConfig,
    rng: &mut R,
) -> StepReport {
    let noise = NoiseSpec::new(config.sigma).expect("validated config");
    let frame = profile.frame();
    let mut report = StepReport::default();
    for agent in pop.agents.iter_mut() {
        let u: f64 = rng.gen();
        if u >= config.evidence_rate {
            continue;
        }
        let state = select_state(agent, rng);
        let eps = noise.sample(rng);
        let evidence = evidence_mass(frame, state, profile.quality(state), eps)
            .expect("state index comes from the agent's own frame");
        match config.operator.combine(agent, &evidence) {
            Ok(updated) => {
                let updated = renormalize_mass(&updated);
                if !updated.approx_eq(agent, EPS_CONV) {
                    report.changed = true;
                }
                *agent = updated;
            }
            Err(DstError::TotalConflict(_)) => report.skips += 1,
            Err(e) => panic!("combination of same-frame masses failed: {e}"),
        }
    }
    report
}

/// One uniformly random unordered pair of distinct agents combines beliefs
/// and both adopt the result. Under total conflict the pair is left alone.
pub fn consensus_step<R: Rng + ?Sized>(
    pop: &mut AgentPopulation,
    config: &SimConfig,
    rng: &mut R,
) -> StepReport {
    let k = pop.agents.len();
    assert!(k >= 2, "consensus needs two agents");
    let i = rng.gen_range(0..k);
    let mut j = rng.gen_range(0..k - 1);
    if j >= i {
        j += 1;
    }
    let mut report = StepReport::default();
    match config.operator.combine(&pop.agents[i], &pop.agents[j]) {
        Ok(combined) => {
            let combined = renormalize_mass(&combined);
            report.changed = !combined.approx_eq(&pop.agents[i], EPS_CONV)
                || !combined.approx_eq(&pop.agents[j], EPS_CONV);
            pop.agents[j] = combined.clone();
            pop.agents[i] = combined;
        }
        Err(DstError::TotalConflict(_)) => report.skips = 1,
        Err(e) => panic!("combination of same-frame masses failed: {e}"),
    }
    report
}

/// True iff every agent is unchanged (within [`EPS_CONV`]) across each pair
/// of consecutive snapshots in the last `window + 1` snapshots.
pub fn check_convergence(history: &[Vec<MassFunction>], window: usize) -> bool {
    if window == 0 || history.len() < window + 1 {
        return false;
    }
    let recent = &history[history.len() - window - 1..];
    recent.windows(2).all(|pair| {
        pair[0].len() == pair[1].len()
            && pair[0]
                .iter()
                .zip(pair[1].iter())
                .all(|(a, b)| a.approx_eq(b, EPS_CONV))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub iteration: u64,
    /// Population mean `Bel({s_j})` for `j = 1..n`.
    pub mean_bel: Vec<f64>,
    /// Population mean `Pl({s_j})` for `j = 1..n`.
    pub mean_pl: Vec<f64>,
}

impl TrajectoryPoint {
    fn sample(pop: &AgentPopulation, n: usize) -> TrajectoryPoint {
        TrajectoryPoint {
            iteration: pop.iteration,
            mean_bel: (1..=n).map(|s| pop.mean_bel(s)).collect(),
            mean_pl: (1..=n).map(|s| pop.mean_pl(s)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub converged: bool,
    /// Last iteration at which the population changed, i.e. the start of the
    /// stasis window. `None` when the run hit the iteration cap.
    pub convergence_iteration: Option<u64>,
    /// Iteration at which the stasis window completed.
    pub detected_iteration: Option<u64>,
    /// Iterations actually executed.
    pub iterations: u64,
    pub steady_state: Vec<MassFunction>,
    pub trajectory: Vec<TrajectoryPoint>,
    /// Agent pairs that did not combine because `K = 1`.
    pub dempster_skips: u64,
    /// Evidence updates dropped because `K = 1`.
    pub evidence_skips: u64,
}

impl RunResult {
    pub fn mean_bel(&self, state: usize) -> f64 {
        mean_over(&self.steady_state, |m| m.bel_state(state))
    }

    pub fn mean_pl(&self, state: usize) -> f64 {
        mean_over(&self.steady_state, |m| m.pl_state(state))
    }

    /// Population mean belief in an arbitrary subset.
    pub fn mean_bel_subset(&self, subset: crate::frame::Subset) -> f64 {
        mean_over(&self.steady_state, |m| m.bel(subset).unwrap_or(0.0))
    }
}

/// A running simulation; [`run`] drives one to completion.
pub struct Simulation {
    config: SimConfig,
    profile: QualityProfile,
    population: AgentPopulation,
    rng: Pcg64,
    stable_for: u64,
    last_change: u64,
    dempster_skips: u64,
    evidence_skips: u64,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Simulation, ConfigError> {
        config.validate()?;
        let profile = config.quality_profile()?;
        let population = init_population(&config)?;
        let rng = Pcg64::seed_from_u64(config.seed);
        Ok(Simulation {
            config,
            profile,
            population,
            rng,
            stable_for: 0,
            last_change: 0,
            dempster_skips: 0,
            evidence_skips: 0,
        })
    }

    pub fn population(&self) -> &AgentPopulation {
        &self.population
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    /// Consecutive iterations without any change.
    pub fn stable_for(&self) -> u64 {
        self.stable_for
    }

    pub fn is_converged(&self) -> bool {
        self.stable_for >= self.config.convergence_window
    }

    /// Advance one iteration; returns whether anything changed.
    pub fn step(&mut self) -> bool {
        let consensus = self.config.consensus_enabled;
        let (first, second) = match self.config.order {
            StepOrder::EvidenceFirst => {
                let e = evidence_step(&mut self.population, &self.profile, &self.config, &mut self.rng);
                let c = consensus
                    .then(|| consensus_step(&mut self.population, &self.config, &mut self.rng));
                (e, c)
            }
            StepOrder::ConsensusFirst => {
                let c = consensus
                    .then(|| consensus_step(&mut self.population, &self.config, &mut self.rng));
                let e = evidence_step(&mut self.population, &self.profile, &self.config, &mut self.rng);
                (e, c)
            }
        };
        self.evidence_skips += first.skips;
        let consensus_report = second.unwrap_or_default();
        self.dempster_skips += consensus_report.skips;
        let changed = first.changed || consensus_report.changed;

        self.population.iteration += 1;
        let t = self.population.iteration;
        if changed {
            self.stable_for = 0;
            self.last_change = t;
        } else {
            self.stable_for += 1;
        }

        if cfg!(debug_assertions) || t.is_multiple_of(512) {
            for (idx, m) in self.population.agents.iter().enumerate() {
                if let Err(e) = m.check_invariants() {
                    panic!("agent {idx} violates mass invariants at t={t}: {e} ({m})");
                }
            }
        }
        changed
    }

    pub fn finish(mut self) -> RunResult {
        let n = self.config.states;
        let stride = self.config.trajectory_stride;
        let mut trajectory = Vec::new();
        if stride > 0 {
            trajectory.push(TrajectoryPoint::sample(&self.population, n));
        }
        while self.population.iteration < self.config.max_iterations && !self.is_converged() {
            self.step();
            if stride > 0 && self.population.iteration.is_multiple_of(stride) {
                trajectory.push(TrajectoryPoint::sample(&self.population, n));
            }
        }
        if stride > 0 && trajectory.last().map(|p| p.iteration) != Some(self.population.iteration) {
            trajectory.push(TrajectoryPoint::sample(&self.population, n));
        }
        let converged = self.is_converged();
        RunResult {
            converged,
            convergence_iteration: converged.then_some(self.last_change),
            detected_iteration: converged.then_some(self.population.iteration),
            iterations: self.population.iteration,
            steady_state: self.population.agents,
            trajectory,
            dempster_skips: self.dempster_skips,
            evidence_skips: self.evidence_skips,
        }
    }
}

/// Run a full simulation. Deterministic given `config.seed`.
pub fn run(config: &SimConfig) -> Result<RunResult, ConfigError> {
    Ok(Simulation::new(config.clone())?.finish())
}
