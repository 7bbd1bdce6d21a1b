//! The four pairwise belief combination operators.
//!
//! All operators enumerate focal pairs `(A, B)` of the two inputs. They differ
//! only in where the product `m1(A)·m2(B)` of a disjoint pair goes:
//!
//! | operator     | disjoint pair mass                          |
//! |--------------|---------------------------------------------|
//! | Dempster     | discarded, survivors scaled by `1/(1 - K)`  |
//! | Dubois-Prade | moved to the union `A ∪ B`                  |
//! | Yager        | moved to the universal set 𝕊                |
//!
//! The averaging operator is the pointwise mean and ignores set structure.
//! Every output is renormalised after construction to absorb rounding.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::DstError;
use crate::frame::Subset;
use crate::mass::{normalize_sorted, MassFunction, EPS_NORM};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operator {
    Dempster,
    DuboisPrade,
    Yager,
    Average,
}

impl Operator {
    pub const ALL: [Operator; 4] = [
        Operator::Dempster,
        Operator::DuboisPrade,
        Operator::Yager,
        Operator::Average,
    ];

    /// Name used on the command line and in output files.
    pub fn name(self) -> &'static str {
        match self {
            Operator::Dempster => "dempster",
            Operator::DuboisPrade => "dubois_prade",
            Operator::Yager => "yager",
            Operator::Average => "average",
        }
    }

    /// Stable numeric id, used when deriving per-run seeds.
    pub fn id(self) -> u64 {
        match self {
            Operator::Dempster => 0,
            Operator::DuboisPrade => 1,
            Operator::Yager => 2,
            Operator::Average => 3,
        }
    }

    pub fn combine(self, m1: &MassFunction, m2: &MassFunction) -> Result<MassFunction, DstError> {
        match self {
            Operator::Dempster => combine_dempster(m1, m2),
            Operator::DuboisPrade => combine_dubois_prade(m1, m2),
            Operator::Yager => combine_yager(m1, m2),
            Operator::Average => combine_average(m1, m2),
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownOperator(pub String);

impl fmt::Display for UnknownOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown operator `{}` (expected one of dempster, dubois_prade, yager, average)",
            self.0
        )
    }
}

impl std::error::Error for UnknownOperator {}

impl FromStr for Operator {
    type Err = UnknownOperator;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dempster" | "dr" => Ok(Operator::Dempster),
            "dubois_prade" | "dp" => Ok(Operator::DuboisPrade),
            "yager" | "yr" => Ok(Operator::Yager),
            "average" | "avg" => Ok(Operator::Average),
            other => Err(UnknownOperator(other.to_string())),
        }
    }
}

fn check_frames(m1: &MassFunction, m2: &MassFunction) -> Result<(), DstError> {
    if m1.frame() != m2.frame() {
        return Err(DstError::FrameMismatch {
            left: m1.frame().size(),
            right: m2.frame().size(),
        });
    }
    Ok(())
}

/// `K = Σ_{A ∩ B = ∅} m1(A)·m2(B)`.
pub fn conflict(m1: &MassFunction, m2: &MassFunction) -> Result<f64, DstError> {
    check_frames(m1, m2)?;
    let mut k = 0.0;
    for &(a, ma) in m1.focal() {
        for &(b, mb) in m2.focal() {
            if !a.intersects(b) {
                k += ma * mb;
            }
        }
    }
    Ok(k)
}

/// Products of focal pairs routed by `on_disjoint`; returns the accumulated
/// entries (sorted and merged) together with the conflict `K`.
fn pairwise_products<F>(m1: &MassFunction, m2: &MassFunction, on_disjoint: F) -> (Vec<(Subset, f64)>, f64)
where
    F: Fn(Subset, Subset) -> Option<Subset>,
{
    let mut out = Vec::with_capacity(m1.focal().len() * m2.focal().len());
    let mut k = 0.0;
    for &(a, ma) in m1.focal() {
        for &(b, mb) in m2.focal() {
            let p = ma * mb;
            let c = a.intersect(b);
            if !c.is_empty() {
                out.push((c, p));
            } else {
                k += p;
                if let Some(target) = on_disjoint(a, b) {
                    out.push((target, p));
                }
            }
        }
    }
    (merge_sorted(out), k)
}

fn merge_sorted(mut entries: Vec<(Subset, f64)>) -> Vec<(Subset, f64)> {
    entries.sort_by_key(|&(s, _)| s);
    entries.dedup_by(|later, earlier| {
        if later.0 == earlier.0 {
            earlier.1 += later.1;
            true
        } else {
            false
        }
    });
    entries.retain(|&(_, m)| m > 0.0);
    entries
}

/// Dempster's rule. Fails with [`DstError::TotalConflict`] when `K` is within
/// [`EPS_NORM`] of 1.
pub fn combine_dempster(m1: &MassFunction, m2: &MassFunction) -> Result<MassFunction, DstError> {
    check_frames(m1, m2)?;
    let (mut entries, k) = pairwise_products(m1, m2, |_, _| None);
    if k >= 1.0 - EPS_NORM || entries.is_empty() {
        return Err(DstError::TotalConflict(k));
    }
    let scale = 1.0 / (1.0 - k);
    entries.iter_mut().for_each(|e| e.1 *= scale);
    normalize_sorted(m1.frame(), entries)
}

/// Dubois & Prade's operator: disjoint pairs contribute to their union.
pub fn combine_dubois_prade(m1: &MassFunction, m2: &MassFunction) -> Result<MassFunction, DstError> {
    check_frames(m1, m2)?;
    let (entries, _) = pairwise_products(m1, m2, |a, b| Some(a.union(b)));
    normalize_sorted(m1.frame(), entries)
}

/// Yager's rule: conflict is reallocated to the universal set, so
/// `m(𝕊) = m1(𝕊)·m2(𝕊) + K`.
pub fn combine_yager(m1: &MassFunction, m2: &MassFunction) -> Result<MassFunction, DstError> {
    check_frames(m1, m2)?;
    let universe = m1.frame().universe();
    let (entries, k) = pairwise_products(m1, m2, |_, _| None);
    let mut entries = entries;
    if k > 0.0 {
        match entries.last_mut() {
            Some(last) if last.0 == universe => last.1 += k,
            _ => entries.push((universe, k)),
        }
    }
    normalize_sorted(m1.frame(), entries)
}

/// Pointwise mean `(m1(C) + m2(C)) / 2`.
pub fn combine_average(m1: &MassFunction, m2: &MassFunction) -> Result<MassFunction, DstError> {
    check_frames(m1, m2)?;
    let entries = m1
        .focal()
        .iter()
        .chain(m2.focal().iter())
        .map(|&(s, m)| (s, 0.5 * m))
        .collect();
    normalize_sorted(m1.frame(), merge_sorted(entries))
}
