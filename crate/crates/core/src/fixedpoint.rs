//! Fixed points of the self-combination map `m ↦ m ⊙ m` and their stability.
//!
//! Mass functions are charted by their free coordinates: the masses of every
//! non-empty subset except 𝕊, in ascending subset order, with
//! `m(𝕊) = 1 - Σ x_j` as the dependent coordinate. A fixed point is stable
//! when every eigenvalue of the Jacobian of the map in this chart lies inside
//! the unit circle.

use std::fmt;

use nalgebra::{DMatrix, Schur};
use serde::Serialize;

use crate::combine::Operator;
use crate::error::DstError;
use crate::frame::{Frame, Subset};
use crate::mass::MassFunction;

/// A mass function is a fixed point when `max |m⊙m - m| <= EPS_FIX`.
pub const EPS_FIX: f64 = 1e-10;
/// Half-width of the band around spectral radius 1 classified as marginal.
pub const DELTA_STAB: f64 = 1e-3;
/// Default finite-difference step.
pub const DEFAULT_STEP: f64 = 1e-6;

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Thresholds {
    pub eps_fix: f64,
    pub delta_stab: f64,
    pub step: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            eps_fix: EPS_FIX,
            delta_stab: DELTA_STAB,
            step: DEFAULT_STEP,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
    NotFixed,
}

impl Stability {
    pub fn name(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Marginal => "marginal",
            Stability::NotFixed => "not_fixed",
        }
    }
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct FixedPointReport {
    pub operator: Operator,
    pub mass: MassFunction,
    /// `max_A |m⊙m(A) - m(A)|`; infinite when Dempster's rule is undefined.
    pub residual: f64,
    pub is_fixed: bool,
    /// Largest eigenvalue modulus from a full eigendecomposition.
    pub spectral_radius: Option<f64>,
    /// The same quantity from the power method, as a cross-check.
    pub spectral_radius_power: Option<f64>,
    pub classification: Stability,
    /// Some stencil used one-sided differences at the simplex boundary.
    pub one_sided: bool,
    /// Some stencil left the simplex and used the operator's polynomial
    /// (or rational) extension.
    pub extended: bool,
}

/// `max_A |m⊙m(A) - m(A)|` using the library combination operators.
pub fn self_combine_residual(op: Operator, m: &MassFunction) -> Result<f64, DstError> {
    let mm = op.combine(m, m)?;
    Ok(mm.max_abs_diff(m))
}

/// The Dubois & Prade self-combination on three states, written out term by
/// term. `x = (x_1..x_6)` are the masses of `{s1}, {s2}, {s3}, {s1,s2},
/// {s1,s3}, {s2,s3}` and `x_7 = 1 - Σ x_i` is the mass of 𝕊.
pub fn dp_polynomial_map(x: &[f64; 6]) -> Result<[f64; 6], DstError> {
    const TOL: f64 = 1e-12;
    if let Some(bad) = x.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(DstError::NotOnSimplex(format!("negative or non-finite coordinate {bad}")));
    }
    let sum: f64 = x.iter().sum();
    if sum > 1.0 + TOL {
        return Err(DstError::NotOnSimplex(format!("coordinates sum to {sum} > 1")));
    }
    let [x1, x2, x3, x4, x5, x6] = *x;
    let x7 = (1.0 - sum).max(0.0);
    Ok([
        x1 * x1 + 2.0 * x1 * x4 + 2.0 * x1 * x5 + 2.0 * x1 * x7 + 2.0 * x4 * x5,
        x2 * x2 + 2.0 * x2 * x4 + 2.0 * x2 * x6 + 2.0 * x2 * x7 + 2.0 * x4 * x6,
        x3 * x3 + 2.0 * x3 * x5 + 2.0 * x3 * x6 + 2.0 * x3 * x7 + 2.0 * x5 * x6,
        x4 * x4 + 2.0 * x1 * x2 + 2.0 * x4 * x7,
        x5 * x5 + 2.0 * x1 * x3 + 2.0 * x5 * x7,
        x6 * x6 + 2.0 * x2 * x3 + 2.0 * x6 * x7,
    ])
}

/// Free coordinates of the chart: every non-empty subset except 𝕊.
pub fn chart_coordinates(frame: Frame) -> Vec<Subset> {
    frame.subsets().filter(|&s| s != frame.universe()).collect()
}

/// Evaluate `x ⊙ y` on dense vectors indexed by subset bits, straight from
/// the operator formulas: no positivity check, pruning or renormalisation.
/// Off the simplex this is the natural polynomial (rational for Dempster)
/// extension of the operator.
pub fn combine_dense(op: Operator, frame: Frame, x: &[f64], y: &[f64]) -> Result<Vec<f64>, DstError> {
    let len = frame.subset_count() as usize + 1;
    debug_assert!(x.len() == len && y.len() == len);
    let universe = frame.universe().bits() as usize;
    let mut out = vec![0.0; len];
    if op == Operator::Average {
        for c in 1..len {
            out[c] = 0.5 * (x[c] + y[c]);
        }
        return Ok(out);
    }
    let mut k = 0.0;
    for a in 1..len {
        if x[a] == 0.0 {
            continue;
        }
        for b in 1..len {
            if y[b] == 0.0 {
                continue;
            }
            let p = x[a] * y[b];
            let c = a & b;
            if c != 0 {
                out[c] += p;
            } else {
                k += p;
                match op {
                    Operator::DuboisPrade => out[a | b] += p,
                    Operator::Yager => out[universe] += p,
                    _ => {}
                }
            }
        }
    }
    if op == Operator::Dempster {
        if (1.0 - k).abs() < 1e-12 {
            return Err(DstError::TotalConflict(k));
        }
        let scale = 1.0 / (1.0 - k);
        out.iter_mut().for_each(|v| *v *= scale);
    }
    Ok(out)
}

/// A finite-difference Jacobian in the free-coordinate chart.
#[derive(Clone, Debug)]
pub struct Jacobian {
    pub matrix: DMatrix<f64>,
    /// Subset associated with each row/column.
    pub coordinates: Vec<Subset>,
    pub one_sided: bool,
    pub extended: bool,
}

/// `J_ij = ∂ (m⊙m)(A_i) / ∂ x_j`, with perturbations of `x_j` absorbed by
/// `m(𝕊)`.
///
/// Central differences are used when both stencil points stay on the simplex,
/// a second-order one-sided stencil when only one side does. When neither
/// side fits (e.g. at categorical masses, where `m(𝕊) = 0` and every
/// coordinate but one is 0) the central stencil is evaluated on the
/// operator's polynomial extension.
pub fn numeric_jacobian(op: Operator, m: &MassFunction, h: f64) -> Result<Jacobian, DstError> {
    let frame = m.frame();
    let coords = chart_coordinates(frame);
    let d = coords.len();
    let universe = frame.universe().bits() as usize;
    let base = m.to_dense();

    let eval = |j: usize, delta: f64| -> Result<Vec<f64>, DstError> {
        let mut x = base.clone();
        let idx = coords[j].bits() as usize;
        x[idx] += delta;
        x[universe] -= delta;
        let out = combine_dense(op, frame, &x, &x)?;
        Ok(coords.iter().map(|s| out[s.bits() as usize]).collect())
    };
    let fits = |j: usize, delta: f64| -> bool {
        let idx = coords[j].bits() as usize;
        base[idx] + delta >= 0.0 && base[universe] - delta >= 0.0
    };

    let mut matrix = DMatrix::zeros(d, d);
    let (mut one_sided, mut extended) = (false, false);
    for j in 0..d {
        let column: Vec<f64> = if fits(j, h) && fits(j, -h) {
            let (fp, fm) = (eval(j, h)?, eval(j, -h)?);
            fp.iter().zip(&fm).map(|(p, q)| (p - q) / (2.0 * h)).collect()
        } else if fits(j, 2.0 * h) || fits(j, -2.0 * h) {
            one_sided = true;
            let dir = if fits(j, 2.0 * h) { 1.0 } else { -1.0 };
            let f0 = eval(j, 0.0)?;
            let f1 = eval(j, dir * h)?;
            let f2 = eval(j, dir * 2.0 * h)?;
            (0..d)
                .map(|i| dir * (-3.0 * f0[i] + 4.0 * f1[i] - f2[i]) / (2.0 * h))
                .collect()
        } else {
            extended = true;
            let (fp, fm) = (eval(j, h)?, eval(j, -h)?);
            fp.iter().zip(&fm).map(|(p, q)| (p - q) / (2.0 * h)).collect()
        };
        for (i, v) in column.into_iter().enumerate() {
            matrix[(i, j)] = v;
        }
    }
    Ok(Jacobian {
        matrix,
        coordinates: coords,
        one_sided,
        extended,
    })
}

/// Spectral radius from the eigenvalues of the real Schur form (Hessenberg
/// reduction followed by shifted QR sweeps).
///
/// nalgebra deflates relative to the diagonal, which never happens for a
/// (near) nilpotent matrix with a zero diagonal, so the eigenvalues are
/// computed for `A + cI` and shifted back. The sweeps are capped; if they
/// stall the deflation tolerance is relaxed. Returns NaN only if every
/// attempt stalls.
pub fn spectral_radius_eig(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let d = a.nrows();
    let shift = 1.0 + a.amax();
    let shifted = a + DMatrix::<f64>::identity(d, d) * shift;
    for eps in [f64::EPSILON, 1e-14, 1e-12] {
        if let Some(schur) = Schur::try_new(shifted.clone(), eps, 1000 * d) {
            return schur
                .complex_eigenvalues()
                .iter()
                .map(|z| (z - shift).norm())
                .fold(0.0, f64::max);
        }
    }
    f64::NAN
}

/// Spectral radius by the power method applied to the matrix itself:
/// `ρ = lim ||A^N||^(1/N)`, with `N = 2^k` reached by repeated squaring and
/// the scale tracked in log space. Unlike vector power iteration this also
/// converges when the dominant eigenvalues form a complex pair.
pub fn spectral_radius_power(a: &DMatrix<f64>) -> f64 {
    const MAX_SQUARINGS: u32 = 60;
    if a.is_empty() {
        return 0.0;
    }
    let mut b = a.clone();
    // invariant: A^(2^k) = exp(log_scale) * b
    let mut log_scale = 0.0f64;
    let mut estimate = f64::NAN;
    for k in 0..MAX_SQUARINGS {
        let norm = b.norm();
        if norm == 0.0 || !norm.is_finite() {
            return if norm == 0.0 { 0.0 } else { estimate };
        }
        log_scale += norm.ln();
        b /= norm;
        let next = (log_scale / 2f64.powi(k as i32)).exp();
        if k > 8 && (next - estimate).abs() <= 1e-15 * next.max(1e-300) {
            return next;
        }
        estimate = next;
        b = &b * &b;
        log_scale *= 2.0;
    }
    estimate
}

/// Full report: residual, Jacobian spectral radius (two ways) and the
/// stability classification.
pub fn classify(op: Operator, m: &MassFunction, thresholds: &Thresholds) -> FixedPointReport {
    let residual = self_combine_residual(op, m).unwrap_or(f64::INFINITY);
    let is_fixed = residual <= thresholds.eps_fix;
    let jac = numeric_jacobian(op, m, thresholds.step).ok();
    let spectral_radius = jac.as_ref().map(|j| spectral_radius_eig(&j.matrix));
    let spectral_radius_power = jac.as_ref().map(|j| spectral_radius_power(&j.matrix));
    let classification = match (is_fixed, spectral_radius) {
        (false, _) | (true, None) => Stability::NotFixed,
        (true, Some(rho)) if rho < 1.0 - thresholds.delta_stab => Stability::Stable,
        (true, Some(rho)) if rho > 1.0 + thresholds.delta_stab => Stability::Unstable,
        (true, Some(_)) => Stability::Marginal,
    };
    FixedPointReport {
        operator: op,
        mass: m.clone(),
        residual,
        is_fixed,
        spectral_radius,
        spectral_radius_power,
        classification,
        one_sided: jac.as_ref().is_some_and(|j| j.one_sided),
        extended: jac.as_ref().is_some_and(|j| j.extended),
    }
}

/// Classify every categorical mass `A:1` for the given operators, plus the
/// vacuous mass (which is the categorical on 𝕊).
pub fn categorical_survey(ops: &[Operator], frame: Frame, thresholds: &Thresholds) -> Vec<FixedPointReport> {
    let mut out = Vec::new();
    for &op in ops {
        for subset in frame.subsets() {
            let m = MassFunction::categorical(frame, subset).expect("subset from frame");
            out.push(classify(op, &m, thresholds));
        }
    }
    out
}

/// Render reports as CSV.
pub fn reports_to_csv(reports: &[FixedPointReport]) -> String {
    use crate::fmt::sig6;
    let mut s = String::from(
        "operator,n,mass,residual,spectral_radius,spectral_radius_power,classification,one_sided,extended\n",
    );
    let opt = |v: Option<f64>| v.map(sig6).unwrap_or_default();
    for r in reports {
        s.push_str(&format!(
            "{},{},\"{}\",{},{},{},{},{},{}\n",
            r.operator,
            r.mass.frame().size(),
            r.mass,
            sig6(r.residual),
            opt(r.spectral_radius),
            opt(r.spectral_radius_power),
            r.classification,
            r.one_sided,
            r.extended,
        ));
    }
    s
}
