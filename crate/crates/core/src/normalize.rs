//! Phase normalization: a shift with nonzero weights is conjugated by the
//! diagonal unitary `U = diag(λ)` to the shift with weights `|w_{I,j}|`.

use std::collections::BTreeMap;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::linalg::{op_norm, CMatrix};
use crate::multiindex::{BasisEnumeration, MultiIndex};
use crate::poly::MatrixPolynomial;
use crate::shift::TruncatedShift;
use crate::weights::{WeightFamily, DEFAULT_COMMUTATION_TOL};

#[derive(Clone, Debug)]
pub struct Normalization {
    pub modulus: WeightFamily,
    /// `λ_I` for `|I| ≤ N+1`, in graded order of `basis`.
    pub gauge: Vec<Complex64>,
    pub basis: BasisEnumeration,
    /// Largest disagreement between the defining predecessor and any other
    /// predecessor when computing `λ_I`.
    pub path_residual: f64,
}

impl Normalization {
    pub fn lambda(&self, index: &MultiIndex) -> Option<Complex64> {
        self.basis.rank(index).map(|r| self.gauge[r])
    }

    /// `U = diag(λ)` in the graded basis.
    pub fn unitary(&self) -> CMatrix {
        CMatrix::from_diagonal(&DVector::from_vec(self.gauge.clone()))
    }

    /// `max_j max_{entries} |(U* T_j(W) U − T_j(|W|))|`.
    pub fn conjugation_residual(&self, original: &TruncatedShift) -> Result<f64> {
        let target = TruncatedShift::build_with_tol(&self.modulus, f64::INFINITY)?;
        let u = self.unitary();
        let mut worst: f64 = 0.0;
        for j in 0..original.d() {
            let conj = u.adjoint() * original.matrix(j) * &u;
            let diff = conj - target.matrix(j);
            worst = worst.max(diff.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
        Ok(worst)
    }

    pub fn gauge_json(&self) -> GaugeJson {
        GaugeJson {
            lambda: self
                .basis
                .iter()
                .zip(&self.gauge)
                .map(|(i, l)| (format!("{i:?}"), [l.re, l.im]))
                .collect(),
            path_residual: self.path_residual,
        }
    }
}

/// `λ` as a map from the multi-index (written `(i,j,…)`) to `[re, im]`.
#[derive(Clone, Debug, Serialize)]
pub struct GaugeJson {
    pub lambda: BTreeMap<String, [f64; 2]>,
    pub path_residual: f64,
}

/// Computes `λ_0 = 1`, `λ_{I+ε_j} = λ_I · w_{I,j}/|w_{I,j}|` in graded order.
///
/// The lexicographically smallest predecessor defines `λ_I`; every other
/// predecessor is recomputed and its disagreement folded into
/// `path_residual`.
pub fn phase_normalize(weights: &WeightFamily) -> Result<Normalization> {
    weights.require_commuting(DEFAULT_COMMUTATION_TOL)?;
    weights.require_injective("phase normalization")?;
    let basis = BasisEnumeration::new(weights.d(), weights.n() + 1)?;
    let mut gauge = vec![Complex64::new(1.0, 0.0); basis.len()];
    let mut path_residual: f64 = 0.0;
    for r in 1..basis.len() {
        let index = basis.unrank(r).expect("rank");
        let mut preds: Vec<(MultiIndex, usize)> = index.predecessors().collect();
        preds.sort();
        let step = |(p, j): &(MultiIndex, usize)| {
            let w = weights.get(p, *j).expect("|pred| ≤ N");
            gauge[basis.rank(p).expect("lower set")] * (w / w.norm())
        };
        let lam = step(&preds[0]);
        for other in &preds[1..] {
            path_residual = path_residual.max((step(other) - lam).norm());
        }
        gauge[r] = lam;
    }
    let modulus = weights.map_slots(|_, w| Complex64::new(w.norm(), 0.0));
    Ok(Normalization {
        modulus,
        gauge,
        basis,
        path_residual,
    })
}

/// `| ‖p(T(W))‖ − ‖p(T(|W|))‖ |`.
pub fn gauge_norm_invariance_check(weights: &WeightFamily, p: &MatrixPolynomial) -> Result<f64> {
    let norm = phase_normalize(weights)?;
    let a = TruncatedShift::build(weights)?;
    let b = TruncatedShift::build_with_tol(&norm.modulus, f64::INFINITY)?;
    Ok((op_norm(&p.eval_at_tuple(&a)?)? - op_norm(&p.eval_at_tuple(&b)?)?).abs())
}
