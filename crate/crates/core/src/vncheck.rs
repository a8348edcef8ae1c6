//! Polydisc sup-norms computed on the torus, and the von Neumann ratio
//! `‖p(T)‖ / sup_{𝔻̄^d} ‖p‖`.
//!
//! The supremum of `‖p‖` over the closed polydisc is attained on `𝕋^d`, so
//! only the torus is sampled. The grid maximum is a lower bound; adding
//! `L · π/m` (with `L` from [`MatrixPolynomial::torus_lipschitz`]) gives an
//! upper bound.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, ShiftError};
use crate::linalg::{op_norm, op_norm_unchecked, CMatrix};
use crate::poly::MatrixPolynomial;
use crate::shift::TruncatedShift;

pub const DEFAULT_GRID: usize = 64;

/// Grids with more points than this are refused.
pub const MAX_GRID_POINTS: usize = 1 << 26;

/// `‖p(T)‖ ≤ sup · (1 + VN_SLACK) + VN_SLACK` counts as "holds".
pub const VN_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SupOptions {
    pub grid_per_axis: usize,
    pub refine: bool,
    /// Upper limit on `m^d` when [`vn_check`] enlarges the grid to settle
    /// an inconclusive comparison. Set equal to the initial grid size to
    /// disable adaptive enlargement.
    pub max_points: usize,
}

impl Default for SupOptions {
    fn default() -> Self {
        SupOptions {
            grid_per_axis: DEFAULT_GRID,
            refine: true,
            max_points: 1 << 21,
        }
    }
}

impl SupOptions {
    pub fn grid(grid_per_axis: usize) -> Self {
        SupOptions {
            grid_per_axis,
            ..SupOptions::default()
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SupNorm {
    /// `‖p(z*)‖` at the reported torus point; never exceeds the true sup.
    pub value: f64,
    /// Angles `θ` of the maximizer `z* = e^{iθ}`, each in `[0, 2π)`.
    pub argmax_angles: Vec<f64>,
    /// Upper bound on `sup − value`.
    pub uncertainty: f64,
    pub grid_per_axis: usize,
    pub refined: bool,
    pub lipschitz: f64,
}

impl SupNorm {
    pub fn upper(&self) -> f64 {
        self.value + self.uncertainty
    }

    pub fn argmax_point(&self) -> Vec<Complex64> {
        self.argmax_angles
            .iter()
            .map(|&t| Complex64::from_polar(1.0, t))
            .collect()
    }
}

/// Precomputed terms for fast repeated evaluation on the torus.
struct TorusEvaluator {
    n: usize,
    exps: Vec<Vec<usize>>,
    coeffs: Vec<CMatrix>,
}

impl TorusEvaluator {
    fn new(p: &MatrixPolynomial) -> Self {
        let (exps, coeffs) = p
            .nonzero_terms()
            .map(|(k, c)| (k.coords().to_vec(), c.clone()))
            .unzip();
        TorusEvaluator {
            n: p.size(),
            exps,
            coeffs,
        }
    }

    fn norm_with<F: Fn(usize, usize) -> Complex64>(&self, zpow: F) -> f64 {
        let mut acc = CMatrix::zeros(self.n, self.n);
        for (e, c) in self.exps.iter().zip(&self.coeffs) {
            let mut m = Complex64::new(1.0, 0.0);
            for (axis, &k) in e.iter().enumerate() {
                if k > 0 {
                    m *= zpow(axis, k);
                }
            }
            acc.zip_apply(c, |o, x| *o += m * x);
        }
        op_norm_unchecked(&acc)
    }

    fn norm_at_angles(&self, theta: &[f64]) -> f64 {
        self.norm_with(|axis, k| Complex64::from_polar(1.0, theta[axis] * k as f64))
    }
}

/// Maximum of `‖p(z)‖` over the grid `z_j = e^{2πi k_j / m}`, optionally
/// refined by coordinatewise golden-section ascent on the angles.
///
/// Ties are broken towards the lexicographically smallest grid index, so the
/// result does not depend on thread scheduling.
pub fn sup_norm_torus(p: &MatrixPolynomial, grid_per_axis: usize, refine: bool) -> Result<SupNorm> {
    let m = grid_per_axis;
    if m < 4 {
        return Err(ShiftError::Argument(format!(
            "grid_per_axis must be at least 4, got {m}"
        )));
    }
    let d = p.d();
    let total = (m as u128).pow(d as u32);
    if total > MAX_GRID_POINTS as u128 {
        return Err(ShiftError::Argument(format!(
            "grid {m}^{d} exceeds {MAX_GRID_POINTS} points"
        )));
    }
    let total = total as usize;
    let eval = TorusEvaluator::new(p);
    let roots: Vec<Complex64> = (0..m)
        .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / m as f64))
        .collect();

    let decode = |mut flat: usize, out: &mut [usize]| {
        for slot in out.iter_mut().rev() {
            *slot = flat % m;
            flat /= m;
        }
    };

    let (best_val, best_flat) = (0..total)
        .into_par_iter()
        .fold(
            || (f64::NEG_INFINITY, usize::MAX, vec![0usize; d]),
            |(bv, bf, mut idx), flat| {
                decode(flat, &mut idx);
                let v = eval.norm_with(|axis, k| roots[(idx[axis] * k) % m]);
                if v > bv || (v == bv && flat < bf) {
                    (v, flat, idx)
                } else {
                    (bv, bf, idx)
                }
            },
        )
        .map(|(v, f, _)| (v, f))
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );

    let mut idx = vec![0usize; d];
    decode(best_flat, &mut idx);
    let h = TAU / m as f64;
    let mut theta: Vec<f64> = idx.iter().map(|&k| k as f64 * h).collect();
    let mut value = best_val.max(0.0);

    if refine && d > 0 {
        value = value.max(eval.norm_at_angles(&theta));
        refine_ascent(&eval, &mut theta, &mut value, h);
    }
    for t in &mut theta {
        *t = t.rem_euclid(TAU);
    }

    let lipschitz = p.torus_lipschitz();
    Ok(SupNorm {
        value,
        argmax_angles: theta,
        uncertainty: lipschitz * PI / m as f64,
        grid_per_axis: m,
        refined: refine,
        lipschitz,
    })
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

fn refine_ascent(eval: &TorusEvaluator, theta: &mut [f64], value: &mut f64, h: f64) {
    let mut radius = h;
    for _sweep in 0..40 {
        let before = *value;
        for axis in 0..theta.len() {
            let centre = theta[axis];
            let mut probe = theta.to_vec();
            let mut f = |t: f64| {
                probe[axis] = t;
                eval.norm_at_angles(&probe)
            };
            let (mut a, mut b) = (centre - radius, centre + radius);
            let mut x1 = b - GOLDEN * (b - a);
            let mut x2 = a + GOLDEN * (b - a);
            let (mut f1, mut f2) = (f(x1), f(x2));
            for _ in 0..60 {
                if f1 < f2 {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + GOLDEN * (b - a);
                    f2 = f(x2);
                } else {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - GOLDEN * (b - a);
                    f1 = f(x1);
                }
                if b - a < 1e-13 {
                    break;
                }
            }
            let (cand, fc) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
            if fc > *value {
                *value = fc;
                theta[axis] = cand;
            }
        }
        if *value - before <= 1e-15 * value.max(1.0) {
            if radius < 1e-6 {
                break;
            }
            radius *= 0.25;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Violated,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct VnReport {
    /// `‖p(T)‖`.
    pub operator_norm: f64,
    pub sup: SupNorm,
    /// `‖p(T)‖ / sup.value`.
    pub ratio: f64,
    /// `1 + (uncertainty + VN_SLACK) / sup.value + VN_SLACK`; the inequality
    /// holds up to grid and rounding error when `ratio ≤ ratio_bound`.
    pub ratio_bound: f64,
    pub verdict: Verdict,
}

/// `‖p(T)‖ / sup‖p‖` with a fixed grid.
pub fn vn_ratio(p: &MatrixPolynomial, t: &TruncatedShift, opts: SupOptions) -> Result<VnReport> {
    let norm = operator_norm(p, t)?;
    let sup = sup_norm_torus(p, opts.grid_per_axis, opts.refine)?;
    report(norm, sup)
}

/// Like [`vn_ratio`], but doubles the grid while the comparison is
/// inconclusive, so a violation is only reported once the uncertainty has
/// shrunk below the excess.
pub fn vn_check(p: &MatrixPolynomial, t: &TruncatedShift, opts: SupOptions) -> Result<VnReport> {
    let norm = operator_norm(p, t)?;
    let mut m = opts.grid_per_axis;
    loop {
        let sup = sup_norm_torus(p, m, opts.refine)?;
        let rep = report(norm, sup)?;
        let next = (2 * m as u128).pow(p.d() as u32);
        if rep.verdict != Verdict::Inconclusive || next > opts.max_points as u128 {
            return Ok(rep);
        }
        m *= 2;
    }
}

fn operator_norm(p: &MatrixPolynomial, t: &TruncatedShift) -> Result<f64> {
    if !t.weights().is_contractive() {
        return Err(ShiftError::Contract(
            "von Neumann ratio requires a contractive shift".into(),
        ));
    }
    if p.is_zero() {
        return Err(ShiftError::Domain(
            "zero polynomial has sup-norm 0; ratio undefined".into(),
        ));
    }
    op_norm(&p.eval_at_tuple(t)?)
}

fn report(norm: f64, sup: SupNorm) -> Result<VnReport> {
    if sup.value.is_nan() || sup.value <= 0.0 {
        return Err(ShiftError::Domain(
            "polynomial vanishes on the sampled torus; ratio undefined".into(),
        ));
    }
    let verdict = if norm <= sup.value * (1.0 + VN_SLACK) + VN_SLACK {
        Verdict::Holds
    } else if norm > sup.upper() {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    };
    Ok(VnReport {
        operator_norm: norm,
        ratio: norm / sup.value,
        ratio_bound: 1.0 + (sup.uncertainty + VN_SLACK) / sup.value + VN_SLACK,
        sup,
        verdict,
    })
}
