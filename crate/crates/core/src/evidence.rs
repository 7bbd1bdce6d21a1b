//! Quality values, noisy evidence and pignistic state selection.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::DstError;
use crate::frame::{Frame, Subset};
use crate::mass::MassFunction;

/// Quality `q_i ∈ [0, 1]` of each state.
#[derive(Clone, Debug, PartialEq)]
pub struct QualityProfile {
    frame: Frame,
    qualities: Vec<f64>,
}

impl QualityProfile {
    pub fn new(frame: Frame, qualities: Vec<f64>) -> Result<QualityProfile, DstError> {
        if qualities.len() != frame.size() {
            return Err(DstError::StateOutOfRange {
                state: qualities.len(),
                n: frame.size(),
            });
        }
        if let Some(&bad) = qualities.iter().find(|q| !(0.0..=1.0).contains(*q)) {
            return Err(DstError::InvalidQuality(bad));
        }
        Ok(QualityProfile { frame, qualities })
    }

    /// `q_i = i / (n + 1)`, so `s_n` is the best state.
    pub fn default_for(n: usize) -> Result<QualityProfile, DstError> {
        let frame = Frame::new(n)?;
        let denom = (n + 1) as f64;
        let qualities = (1..=n).map(|i| i as f64 / denom).collect();
        Ok(QualityProfile { frame, qualities })
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn qualities(&self) -> &[f64] {
        &self.qualities
    }

    /// Quality of the 1-based state `s_i`.
    pub fn quality(&self, state: usize) -> f64 {
        self.qualities[state - 1]
    }

    /// Index of the highest-quality state (the last one on ties).
    pub fn best_state(&self) -> usize {
        let mut best = 1;
        for (i, &q) in self.qualities.iter().enumerate() {
            if q >= self.qualities[best - 1] {
                best = i + 1;
            }
        }
        best
    }
}

/// Zero-mean Gaussian noise on observed quality values.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct NoiseSpec {
    sigma: f64,
}

impl NoiseSpec {
    pub fn new(sigma: f64) -> Option<NoiseSpec> {
        (sigma.is_finite() && sigma >= 0.0).then_some(NoiseSpec { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Draw `ε ~ N(0, σ²)`. No randomness is consumed when `σ = 0`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.sigma == 0.0 {
            0.0
        } else {
            Normal::new(0.0, self.sigma)
                .expect("sigma validated at construction")
                .sample(rng)
        }
    }
}

/// Evidence about `s_i`: `{s_i}: v, 𝕊: 1 - v` with `v = clamp(q_i + ε, 0, 1)`.
///
/// A clamped value of 0 yields the vacuous mass function.
pub fn evidence_mass(frame: Frame, state: usize, quality: f64, epsilon: f64) -> Result<MassFunction, DstError> {
    frame.check_state(state)?;
    let v = (quality + epsilon).clamp(0.0, 1.0);
    if v.is_nan() {
        return Err(DstError::InvalidQuality(quality));
    }
    let singleton = Subset::singleton(state);
    let universe = frame.universe();
    let focal = if v == 0.0 {
        vec![(universe, 1.0)]
    } else if v == 1.0 {
        vec![(singleton, 1.0)]
    } else {
        vec![(singleton, v), (universe, 1.0 - v)]
    };
    Ok(MassFunction::from_sorted_unchecked(frame, focal))
}

/// Roulette-wheel selection of a state according to the pignistic
/// distribution of `m`. Returns a 1-based state index.
///
/// One uniform draw is inverted through the cumulative distribution; states
/// with zero probability can never be chosen.
pub fn select_state<R: Rng + ?Sized>(m: &MassFunction, rng: &mut R) -> usize {
    let pignistic = m.pignistic();
    let probs = pignistic.probs();
    let total: f64 = probs.iter().sum();
    let u: f64 = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        last_positive = i;
        acc += p;
        if u < acc {
            return i + 1;
        }
    }
    // u landed in the rounding gap at the top of the wheel
    last_positive + 1
}
