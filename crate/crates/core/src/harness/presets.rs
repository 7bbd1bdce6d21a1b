//! Canned sweeps for the standard experiment figures.
//!
//! | id            | operators                  | n         | r                      | σ              |
//! |---------------|----------------------------|-----------|------------------------|----------------|
//! | `fig1`        | all four                   | 3         | 0.05                   | 0.1            |
//! | `fig2`        | dempster, dubois_prade, yager | 3      | fine + coarse grid     | 0.1            |
//! | `fig3`        | dempster, dubois_prade, yager | 3      | grid up to 0.5         | 0.1            |
//! | `fig4`        | dempster, dubois_prade, yager | 3      | 0.01, 0.05, 0.1        | 0, 0.05 .. 0.3 |
//! | `fig5`        | dubois_prade, yager        | 3, 5, 10  | 0.05                   | 0, 0.05 .. 0.3 |
//! | `convergence` | dempster, dubois_prade     | 3         | fine + coarse grid     | 0.1            |
//!
//! `fig2` also runs the evidence-only baselines. `fig1` records averaged
//! trajectories every 10 iterations.

use super::SweepSpec;
use crate::combine::Operator;

pub const PRESET_IDS: [&str; 6] = ["fig1", "fig2", "fig3", "fig4", "fig5", "convergence"];

/// Evidence rates below 0.01.
pub const FINE_R_GRID: [f64; 11] = [
    0.0005, 0.001, 0.002, 0.003, 0.004, 0.005, 0.006, 0.007, 0.008, 0.009, 0.01,
];

/// Evidence rates from 0.02 to 1.
pub const COARSE_R_GRID: [f64; 13] = [
    0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 1.0,
];

pub const SIGMA_GRID: [f64; 7] = [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3];

const CONVERGENT: [Operator; 3] = [Operator::Dempster, Operator::DuboisPrade, Operator::Yager];

fn full_r_grid() -> Vec<f64> {
    FINE_R_GRID.iter().chain(COARSE_R_GRID.iter()).copied().collect()
}

/// The sweep for `id` with `runs` runs per cell, or `None` for an unknown id.
pub fn preset(id: &str, runs: usize) -> Option<SweepSpec> {
    let base = SweepSpec {
        runs_per_cell: runs,
        ..SweepSpec::default()
    };
    let spec = match id {
        "fig1" => SweepSpec {
            operators: Operator::ALL.to_vec(),
            r_values: vec![0.05],
            sigma_values: vec![0.1],
            trajectory_stride: 10,
            ..base
        },
        "fig2" => SweepSpec {
            operators: CONVERGENT.to_vec(),
            r_values: full_r_grid(),
            sigma_values: vec![0.1],
            baselines: true,
            ..base
        },
        "fig3" => SweepSpec {
            operators: CONVERGENT.to_vec(),
            r_values: full_r_grid().into_iter().filter(|&r| r <= 0.5).collect(),
            sigma_values: vec![0.1],
            ..base
        },
        "fig4" => SweepSpec {
            operators: CONVERGENT.to_vec(),
            r_values: vec![0.01, 0.05, 0.1],
            sigma_values: SIGMA_GRID.to_vec(),
            ..base
        },
        "fig5" => SweepSpec {
            operators: vec![Operator::DuboisPrade, Operator::Yager],
            n_values: vec![3, 5, 10],
            r_values: vec![0.05],
            sigma_values: SIGMA_GRID.to_vec(),
            top_set_size: 2,
            ..base
        },
        "convergence" => SweepSpec {
            operators: vec![Operator::Dempster, Operator::DuboisPrade],
            r_values: full_r_grid(),
            sigma_values: vec![0.1],
            ..base
        },
        _ => return None,
    };
    Some(spec)
}
