//! Mass functions (basic probability assignments) and the measures they
//! induce: belief, plausibility and the pignistic distribution.

use std::fmt;

use crate::error::DstError;
use crate::fmt::sig6;
use crate::frame::{Frame, Subset};

/// Tolerance on the total mass of a valid mass function.
pub const EPS_NORM: f64 = 1e-9;

/// Masses below this value are dropped during renormalisation.
pub const EPS_PRUNE: f64 = 1e-12;

/// A mass function over the non-empty subsets of a frame.
///
/// Only focal sets are stored, sorted by ascending subset index. Every stored
/// mass is strictly positive and the total is 1 within [`EPS_NORM`].
#[derive(Clone, Debug, PartialEq)]
pub struct MassFunction {
    frame: Frame,
    focal: Vec<(Subset, f64)>,
}

impl MassFunction {
    /// Build a mass function from explicit `(subset, mass)` entries.
    ///
    /// Duplicate subsets are summed and zero entries dropped. The masses must
    /// already sum to 1; use [`renormalize`] for unnormalised input.
    pub fn new<I>(frame: Frame, entries: I) -> Result<MassFunction, DstError>
    where
        I: IntoIterator<Item = (Subset, f64)>,
    {
        let focal = collect_entries(&frame, entries)?;
        let total: f64 = focal.iter().map(|&(_, m)| m).sum();
        if (total - 1.0).abs() > EPS_NORM {
            return Err(DstError::NotNormalized(total));
        }
        Ok(MassFunction { frame, focal })
    }

    /// Total ignorance: all mass on 𝕊.
    pub fn vacuous(frame: Frame) -> MassFunction {
        MassFunction {
            frame,
            focal: vec![(frame.universe(), 1.0)],
        }
    }

    /// All mass on a single subset.
    pub fn categorical(frame: Frame, subset: Subset) -> Result<MassFunction, DstError> {
        frame.check_subset(subset)?;
        Ok(MassFunction {
            frame,
            focal: vec![(subset, 1.0)],
        })
    }

    /// Build from a dense vector indexed by subset bits (entry 0, the empty
    /// set, must be zero). Entries must be non-negative and sum to 1.
    pub fn from_dense(frame: Frame, dense: &[f64]) -> Result<MassFunction, DstError> {
        if dense.len() != frame.subset_count() as usize + 1 {
            return Err(DstError::NotOnSimplex(format!(
                "expected {} dense entries, got {}",
                frame.subset_count() + 1,
                dense.len()
            )));
        }
        if dense[0] != 0.0 {
            return Err(DstError::EmptySet);
        }
        MassFunction::new(
            frame,
            dense
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &m)| (Subset(i as u64), m)),
        )
    }

    /// Internal constructor for entries that are already sorted, positive and
    /// normalised.
    pub(crate) fn from_sorted_unchecked(frame: Frame, focal: Vec<(Subset, f64)>) -> MassFunction {
        debug_assert!(focal.windows(2).all(|w| w[0].0 < w[1].0));
        MassFunction { frame, focal }
    }

    #[inline]
    pub fn frame(&self) -> Frame {
        self.frame
    }

    /// Focal sets with their masses, ascending by subset index.
    #[inline]
    pub fn focal(&self) -> &[(Subset, f64)] {
        &self.focal
    }

    /// `m(A)`; zero for non-focal subsets.
    pub fn mass(&self, a: Subset) -> f64 {
        match self.focal.binary_search_by_key(&a, |&(s, _)| s) {
            Ok(pos) => self.focal[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn total(&self) -> f64 {
        self.focal.iter().map(|&(_, m)| m).sum()
    }

    /// Dense vector of length `2^n`, indexed by subset bits.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.frame.subset_count() as usize + 1];
        for &(s, m) in &self.focal {
            dense[s.bits() as usize] = m;
        }
        dense
    }

    pub fn is_vacuous(&self) -> bool {
        self.focal.len() == 1 && self.focal[0].0 == self.frame.universe()
    }

    /// `Bel(A) = Σ_{B ⊆ A} m(B)`.
    pub fn bel(&self, a: Subset) -> Result<f64, DstError> {
        self.frame.check_subset(a)?;
        Ok(self
            .focal
            .iter()
            .filter(|&&(b, _)| b.is_subset_of(a))
            .map(|&(_, m)| m)
            .sum())
    }

    /// `Pl(A) = Σ_{B ∩ A ≠ ∅} m(B)`.
    pub fn pl(&self, a: Subset) -> Result<f64, DstError> {
        self.frame.check_subset(a)?;
        Ok(self
            .focal
            .iter()
            .filter(|&&(b, _)| b.intersects(a))
            .map(|&(_, m)| m)
            .sum())
    }

    /// Belief in the singleton `{s_i}` (1-based).
    pub fn bel_state(&self, state: usize) -> f64 {
        self.mass(Subset::singleton(state))
    }

    /// Plausibility of the singleton `{s_i}` (1-based).
    pub fn pl_state(&self, state: usize) -> f64 {
        self.focal
            .iter()
            .filter(|&&(b, _)| b.contains(state))
            .map(|&(_, m)| m)
            .sum()
    }

    /// Spread each focal mass uniformly over the members of its set.
    pub fn pignistic(&self) -> PignisticDistribution {
        let n = self.frame.size();
        let mut probs = vec![0.0; n];
        for &(a, m) in &self.focal {
            let share = m / f64::from(a.len());
            for s in a.states() {
                probs[s - 1] += share;
            }
        }
        PignisticDistribution {
            frame: self.frame,
            probs,
        }
    }

    /// True iff `|m1(A) - m2(A)| <= eps` for every subset `A`.
    pub fn approx_eq(&self, other: &MassFunction, eps: f64) -> bool {
        if self.frame != other.frame {
            return false;
        }
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.focal, &other.focal);
        while i < a.len() || j < b.len() {
            let diff = match (a.get(i), b.get(j)) {
                (Some(&(sa, ma)), Some(&(sb, mb))) if sa == sb => {
                    i += 1;
                    j += 1;
                    ma - mb
                }
                (Some(&(sa, ma)), Some(&(sb, _))) if sa < sb => {
                    i += 1;
                    ma
                }
                (Some(&(_, ma)), None) => {
                    i += 1;
                    ma
                }
                (_, Some(&(_, mb))) => {
                    j += 1;
                    mb
                }
                (None, None) => unreachable!(),
            };
            if diff.abs() > eps {
                return false;
            }
        }
        true
    }

    /// Largest componentwise difference over all subsets.
    pub fn max_abs_diff(&self, other: &MassFunction) -> f64 {
        let mut subsets: Vec<Subset> = self
            .focal
            .iter()
            .chain(other.focal.iter())
            .map(|&(s, _)| s)
            .collect();
        subsets.sort_unstable();
        subsets.dedup();
        subsets
            .into_iter()
            .map(|s| (self.mass(s) - other.mass(s)).abs())
            .fold(0.0, f64::max)
    }

    /// Checks the stored representation against the mass-function invariants.
    pub fn check_invariants(&self) -> Result<(), DstError> {
        for &(s, m) in &self.focal {
            self.frame.check_subset(s)?;
            if !(m > 0.0 && m <= 1.0 + EPS_NORM) {
                return Err(DstError::InvalidMass {
                    subset: s.bits(),
                    mass: m,
                });
            }
        }
        let total = self.total();
        if (total - 1.0).abs() > EPS_NORM {
            return Err(DstError::NotNormalized(total));
        }
        Ok(())
    }
}

impl fmt::Display for MassFunction {
    /// `{s1,s3}:0.25; {s1,s2,s3}:0.75`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (pos, &(s, m)) in self.focal.iter().enumerate() {
            if pos > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{s}:{}", sig6(m))?;
        }
        Ok(())
    }
}

/// Rescale non-negative masses to sum to 1.
///
/// Masses are divided by their total, entries below [`EPS_PRUNE`] are dropped
/// and the survivors are rescaled once more.
pub fn renormalize<I>(frame: Frame, entries: I) -> Result<MassFunction, DstError>
where
    I: IntoIterator<Item = (Subset, f64)>,
{
    let focal = collect_entries(&frame, entries)?;
    normalize_sorted(frame, focal)
}

/// Renormalise an existing mass function (a no-op up to rounding and pruning).
pub fn renormalize_mass(m: &MassFunction) -> MassFunction {
    normalize_sorted(m.frame, m.focal.clone()).expect("valid mass function has positive total")
}

pub(crate) fn normalize_sorted(
    frame: Frame,
    mut focal: Vec<(Subset, f64)>,
) -> Result<MassFunction, DstError> {
    let total: f64 = focal.iter().map(|&(_, m)| m).sum();
    if !total.is_finite() || total <= 0.0 {
        return Err(DstError::NonPositiveTotal(total));
    }
    focal.iter_mut().for_each(|e| e.1 /= total);
    let before = focal.len();
    focal.retain(|&(_, m)| m >= EPS_PRUNE);
    if focal.is_empty() {
        return Err(DstError::NonPositiveTotal(total));
    }
    if focal.len() != before {
        let kept: f64 = focal.iter().map(|&(_, m)| m).sum();
        focal.iter_mut().for_each(|e| e.1 /= kept);
    }
    Ok(MassFunction { frame, focal })
}

/// Validate, merge and sort raw entries; zero masses are dropped.
fn collect_entries<I>(frame: &Frame, entries: I) -> Result<Vec<(Subset, f64)>, DstError>
where
    I: IntoIterator<Item = (Subset, f64)>,
{
    let mut focal: Vec<(Subset, f64)> = Vec::new();
    for (s, m) in entries {
        if !m.is_finite() || m < 0.0 {
            return Err(DstError::InvalidMass {
                subset: s.bits(),
                mass: m,
            });
        }
        if m == 0.0 {
            continue;
        }
        frame.check_subset(s)?;
        focal.push((s, m));
    }
    focal.sort_by_key(|&(s, _)| s);
    focal.dedup_by(|later, earlier| {
        if later.0 == earlier.0 {
            earlier.1 += later.1;
            true
        } else {
            false
        }
    });
    Ok(focal)
}

/// A probability distribution over the states of a frame.
#[derive(Clone, Debug, PartialEq)]
pub struct PignisticDistribution {
    frame: Frame,
    probs: Vec<f64>,
}

impl PignisticDistribution {
    pub fn frame(&self) -> Frame {
        self.frame
    }

    /// Probabilities of `s_1..s_n`, in order.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `P(s_i | m)` for a 1-based state index.
    pub fn prob(&self, state: usize) -> f64 {
        self.probs[state - 1]
    }
}
