//! Flat TOML sweep configuration.
//!
//! ```toml
//! operators = ["dubois_prade", "yager"]
//! n_values = [3, 5]
//! k = 100
//! r_values = [0.01, 0.05]
//! sigma_values = [0.0, 0.1]
//! runs_per_cell = 100
//! root_seed = 42
//! ```
//!
//! Missing keys keep the values of the base spec. Unknown keys are errors.

use std::path::Path;

use serde::Deserialize;

use super::{HarnessError, SweepSpec};
use crate::combine::Operator;
use crate::sim::StepOrder;

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub operators: Option<Vec<String>>,
    pub n_values: Option<Vec<usize>>,
    pub k: Option<usize>,
    pub r_values: Option<Vec<f64>>,
    pub sigma_values: Option<Vec<f64>>,
    pub runs_per_cell: Option<usize>,
    pub max_iterations: Option<u64>,
    pub root_seed: Option<u64>,
    pub baselines: Option<bool>,
    pub consensus: Option<bool>,
    pub trajectory_stride: Option<u64>,
    pub convergence_window: Option<u64>,
    pub order: Option<StepOrder>,
    pub top_set_size: Option<usize>,
    pub workers: Option<usize>,
}

impl SweepFile {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<SweepFile, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Parse {
            path: origin.to_string(),
            message: e.message().to_string(),
        })
    }

    /// Overlay the keys present in the file onto `base`.
    pub fn apply(&self, mut base: SweepSpec, origin: &str) -> Result<SweepSpec, HarnessError> {
        if let Some(ops) = &self.operators {
            base.operators = ops
                .iter()
                .map(|s| {
                    s.parse::<Operator>().map_err(|e| HarnessError::Parse {
                        path: origin.to_string(),
                        message: e.to_string(),
                    })
                })
                .collect::<Result<_, _>>()?;
        }
        macro_rules! overlay {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field {
                    base.$field = v.clone();
                })*
            };
        }
        overlay!(
            n_values,
            k,
            r_values,
            sigma_values,
            runs_per_cell,
            max_iterations,
            root_seed,
            baselines,
            consensus,
            trajectory_stride,
            convergence_window,
            order,
            top_set_size
        );
        Ok(base)
    }
}

/// Read a sweep file, overlay it onto the defaults and validate the result.
/// Returns the spec and the optional `workers` key.
pub fn parse_sweep_toml(path: &Path) -> Result<(SweepSpec, Option<usize>), HarnessError> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: origin.clone(),
        source,
    })?;
    let file = SweepFile::from_toml_str(&text, &origin)?;
    let spec = file.apply(SweepSpec::default(), &origin)?;
    spec.validate()?;
    Ok((spec, file.workers))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlays_present_keys() {
        let file = SweepFile::from_toml_str(
            r#"
operators = ["yager", "dp"]
n_values = [3, 5]
r_values = [0.01]
runs_per_cell = 7
order = "consensus_first"
workers = 2
"#,
            "inline",
        )
        .unwrap();
        let spec = file.apply(SweepSpec::default(), "inline").unwrap();
        assert_eq!(spec.operators, vec![Operator::Yager, Operator::DuboisPrade]);
        assert_eq!(spec.n_values, vec![3, 5]);
        assert_eq!(spec.runs_per_cell, 7);
        assert_eq!(spec.order, StepOrder::ConsensusFirst);
        assert_eq!(spec.k, 100);
        assert_eq!(spec.sigma_values, vec![0.1]);
        assert_eq!(file.workers, Some(2));
    }

    #[test]
    fn rejects_unknown_keys_and_operators() {
        assert!(SweepFile::from_toml_str("agents = 5", "x").is_err());
        let file = SweepFile::from_toml_str(r#"operators = ["bogus"]"#, "x").unwrap();
        assert!(file.apply(SweepSpec::default(), "x").is_err());
    }

    #[test]
    fn validation_runs_after_overlay() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "r_values = [1.5]\n").unwrap();
        assert!(parse_sweep_toml(&path).is_err());
        std::fs::write(&path, "runs_per_cell = 3\n").unwrap();
        assert_eq!(parse_sweep_toml(&path).unwrap().0.runs_per_cell, 3);
    }
}
