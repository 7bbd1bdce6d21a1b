//! Multi-agent consensus on the best-of-n problem with Dempster-Shafer
//! belief functions.
//!
//! - [`frame`], [`mass`], [`combine`]: frames, mass functions, belief and
//!   plausibility, the pignistic distribution and four combination operators.
//! - [`evidence`]: quality profiles, noisy evidence, roulette-wheel selection.
//! - [`sim`]: the iterated population dynamics and convergence detection.
//! - [`fixedpoint`]: fixed points of the self-combination map and their
//!   Jacobian stability.
//! - [`harness`]: seeded Monte Carlo sweeps, aggregation and CSV/JSON output.

pub mod combine;
pub mod error;
pub mod evidence;
pub mod fixedpoint;
pub mod fmt;
pub mod frame;
pub mod harness;
pub mod mass;
pub mod sim;

pub use combine::{
    combine_average, combine_dempster, combine_dubois_prade, combine_yager, conflict, Operator,
};
pub use error::DstError;
pub use evidence::{evidence_mass, select_state, NoiseSpec, QualityProfile};
pub use frame::{Frame, Subset};
pub use mass::{renormalize, MassFunction, PignisticDistribution, EPS_NORM, EPS_PRUNE};
pub use sim::{run, RunResult, SimConfig};
