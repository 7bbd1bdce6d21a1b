//! Frames of discernment and their subset lattice.
//!
//! A subset of a frame with `n` states is a bitmask: bit `i - 1` is set iff
//! state `s_i` belongs to the subset. Index 0 is the empty set and is never a
//! valid focal set.

use std::fmt;

use crate::error::DstError;

/// Largest supported frame size. Subsets are stored in a `u64`.
pub const MAX_STATES: u32 = 63;

/// A subset of the frame, encoded as a bitmask over the states.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subset(pub u64);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    /// The singleton `{s_i}` for a 1-based state index.
    pub fn singleton(state: usize) -> Subset {
        debug_assert!(state >= 1);
        Subset(1u64 << (state - 1))
    }

    /// Build a subset from 1-based state indices.
    pub fn from_states<I: IntoIterator<Item = usize>>(states: I) -> Subset {
        states
            .into_iter()
            .fold(Subset::EMPTY, |acc, s| acc.union(Subset::singleton(s)))
    }

    #[inline]
    pub fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn intersect(self, other: Subset) -> Subset {
        Subset(self.0 & other.0)
    }

    #[inline]
    pub fn union(self, other: Subset) -> Subset {
        Subset(self.0 | other.0)
    }

    #[inline]
    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn intersects(self, other: Subset) -> bool {
        self.0 & other.0 != 0
    }

    /// Cardinality `|A|`.
    #[inline]
    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    /// Whether the 1-based state `s_i` is a member.
    #[inline]
    pub fn contains(self, state: usize) -> bool {
        state >= 1 && (self.0 >> (state - 1)) & 1 == 1
    }

    /// 1-based indices of the member states, ascending.
    pub fn states(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..64usize).filter(move |i| (bits >> i) & 1 == 1).map(|i| i + 1)
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (pos, s) in self.states().enumerate() {
            if pos > 0 {
                f.write_str(",")?;
            }
            write!(f, "s{s}")?;
        }
        f.write_str("}")
    }
}

/// The set of `n` mutually exclusive states `s_1..s_n`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct Frame {
    n: u32,
}

impl Frame {
    pub fn new(n: usize) -> Result<Frame, DstError> {
        if n < 2 || n > MAX_STATES as usize {
            return Err(DstError::InvalidFrame(n));
        }
        Ok(Frame { n: n as u32 })
    }

    /// Number of states.
    #[inline]
    pub fn size(&self) -> usize {
        self.n as usize
    }

    /// The universal set 𝕊, index `2^n - 1`.
    #[inline]
    pub fn universe(&self) -> Subset {
        Subset((1u64 << self.n) - 1)
    }

    /// Number of non-empty subsets, `2^n - 1`.
    #[inline]
    pub fn subset_count(&self) -> u64 {
        (1u64 << self.n) - 1
    }

    /// All non-empty subsets in ascending index order.
    pub fn subsets(&self) -> impl Iterator<Item = Subset> {
        (1..=self.subset_count()).map(Subset)
    }

    /// `Aᶜ` relative to this frame.
    #[inline]
    pub fn complement(&self, a: Subset) -> Subset {
        Subset(!a.0 & self.universe().0)
    }

    /// Whether `a` is a valid non-empty subset of this frame.
    #[inline]
    pub fn contains_subset(&self, a: Subset) -> bool {
        !a.is_empty() && a.is_subset_of(self.universe())
    }

    pub(crate) fn check_subset(&self, a: Subset) -> Result<(), DstError> {
        if a.is_empty() {
            Err(DstError::EmptySet)
        } else if !a.is_subset_of(self.universe()) {
            Err(DstError::SubsetOutOfFrame {
                subset: a.0,
                n: self.size(),
            })
        } else {
            Ok(())
        }
    }

    pub(crate) fn check_state(&self, state: usize) -> Result<(), DstError> {
        if state == 0 || state > self.size() {
            Err(DstError::StateOutOfRange {
                state,
                n: self.size(),
            })
        } else {
            Ok(())
        }
    }
}
