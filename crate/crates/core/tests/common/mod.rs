#![allow(dead_code)]

use dstcons::{Frame, MassFunction, Operator, Subset};
use rand::Rng;

/// Random mass function on `frame` with 1..=`max_focal` focal sets, each
/// carrying at least a few percent of the mass.
pub fn random_mass<R: Rng>(rng: &mut R, frame: Frame, max_focal: usize) -> MassFunction {
    let count = frame.subset_count();
    let focal_count = rng.gen_range(1..=max_focal.min(count as usize));
    let mut weights: Vec<(Subset, f64)> = Vec::new();
    while weights.len() < focal_count {
        let s = Subset(rng.gen_range(1..=count));
        if weights.iter().all(|(t, _)| *t != s) {
            weights.push((s, rng.gen_range(0.05..1.0)));
        }
    }
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    MassFunction::new(frame, weights.into_iter().map(|(s, w)| (s, w / total))).unwrap()
}

/// Random point strictly inside the simplex of a frame: every subset focal.
pub fn random_interior_mass<R: Rng>(rng: &mut R, frame: Frame) -> MassFunction {
    let count = frame.subset_count();
    let raw: Vec<f64> = (0..count).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    MassFunction::new(
        frame,
        raw.iter()
            .enumerate()
            .map(|(i, w)| (Subset(i as u64 + 1), w / total)),
    )
    .unwrap()
}

/// Textbook evaluation over every ordered pair of non-empty subsets.
/// Returns `None` for Dempster under total conflict.
pub fn oracle_combine(op: Operator, m1: &MassFunction, m2: &MassFunction) -> Option<Vec<f64>> {
    let frame = m1.frame();
    let count = frame.subset_count();
    let universe = frame.universe().bits();
    let mut out = vec![0.0; count as usize + 1];
    if op == Operator::Average {
        for a in 1..=count {
            out[a as usize] = (m1.mass(Subset(a)) + m2.mass(Subset(a))) / 2.0;
        }
        return Some(out);
    }
    let mut k = 0.0;
    for a in 1..=count {
        for b in 1..=count {
            let p = m1.mass(Subset(a)) * m2.mass(Subset(b));
            if a & b != 0 {
                out[(a & b) as usize] += p;
            } else {
                k += p;
                match op {
                    Operator::DuboisPrade => out[(a | b) as usize] += p,
                    Operator::Yager => out[universe as usize] += p,
                    _ => {}
                }
            }
        }
    }
    if op == Operator::Dempster {
        if k >= 1.0 - 1e-9 {
            return None;
        }
        for v in out.iter_mut() {
            *v /= 1.0 - k;
        }
    }
    Some(out)
}

pub fn max_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Belief straight from its definition.
pub fn oracle_bel(m: &MassFunction, a: Subset) -> f64 {
    (1..=m.frame().subset_count())
        .map(Subset)
        .filter(|b| b.bits() & !a.bits() == 0)
        .map(|b| m.mass(b))
        .sum()
}
