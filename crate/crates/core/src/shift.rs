//! Truncated weighted shifts `T_j e_I = w_{I,j} e_{I+ε_j}` on
//! `H_{N+1} = span{e_I : |I| ≤ N+1}`.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, ShiftError};
use crate::linalg::{op_norm_unchecked, zero, CMatrix, MatrixJson};
use crate::multiindex::{BasisEnumeration, MultiIndex};
use crate::weights::{WeightFamily, DEFAULT_COMMUTATION_TOL};

#[derive(Clone, Debug)]
pub struct TruncatedShift {
    weights: WeightFamily,
    basis: BasisEnumeration,
    /// `succ[rank(I)·d + j] = rank(I + ε_j)` for `|I| ≤ N`.
    succ: Vec<usize>,
    mats: Vec<CMatrix>,
}

impl TruncatedShift {
    /// Builds the shift after checking the commutation relations at the
    /// default tolerance.
    pub fn build(weights: &WeightFamily) -> Result<Self> {
        TruncatedShift::build_with_tol(weights, DEFAULT_COMMUTATION_TOL)
    }

    pub fn build_with_tol(weights: &WeightFamily, tol: f64) -> Result<Self> {
        weights.require_commuting(tol)?;
        let d = weights.d();
        let basis = BasisEnumeration::new(d, weights.n() + 1)?;
        let dim = basis.len();
        let succ = successor_table(weights.basis(), &basis);
        let mut mats = vec![CMatrix::zeros(dim, dim); d];
        for r in 0..weights.basis().len() {
            for (j, mat) in mats.iter_mut().enumerate() {
                mat[(succ[r * d + j], r)] = weights.at(r * d + j);
            }
        }
        Ok(TruncatedShift {
            weights: weights.clone(),
            basis,
            succ,
            mats,
        })
    }

    pub fn d(&self) -> usize {
        self.weights.d()
    }

    /// Weight level `N`; the shift acts on `H_{N+1}`.
    pub fn n(&self) -> usize {
        self.weights.n()
    }

    /// `dim H_{N+1}`.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &BasisEnumeration {
        &self.basis
    }

    pub fn weights(&self) -> &WeightFamily {
        &self.weights
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.mats
    }

    pub fn matrix(&self, axis: usize) -> &CMatrix {
        &self.mats[axis]
    }

    /// `T_j v` in `O(dim)`.
    pub fn apply_axis(&self, axis: usize, v: &DVector<Complex64>) -> DVector<Complex64> {
        apply_axis_raw(&self.weights, &self.succ, axis, v)
    }

    /// `T^K v`.
    pub fn apply_monomial_to(&self, k: &MultiIndex, v: &DVector<Complex64>) -> DVector<Complex64> {
        let mut out = v.clone();
        for axis in k.axis_word() {
            out = self.apply_axis(axis, &out);
        }
        out
    }

    /// `T^K` as a dense matrix. `T^0 = 1`, and `T^K = 0` once `|K| > N+1`.
    pub fn apply_monomial(&self, k: &MultiIndex) -> Result<CMatrix> {
        if k.dim() != self.d() {
            return Err(ShiftError::Argument(format!(
                "monomial {k} has {} variables, shift has {}",
                k.dim(),
                self.d()
            )));
        }
        let dim = self.dim();
        let d = self.d();
        let top = self.weights.basis().len();
        let word = k.axis_word();
        let mut out = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut at = col;
            let mut coeff = Complex64::new(1.0, 0.0);
            let mut alive = true;
            for &axis in &word {
                if at >= top {
                    alive = false;
                    break;
                }
                coeff *= self.weights.at(at * d + axis);
                at = self.succ[at * d + axis];
            }
            if alive {
                out[(at, col)] = coeff;
            }
        }
        Ok(out)
    }

    /// The compression `P_{H_{M+1}} T |_{H_{M+1}}`, i.e. the shift built
    /// from the weights with `|I| ≤ M`.
    pub fn compress(&self, m: usize) -> Result<TruncatedShift> {
        if m > self.n() {
            return Err(ShiftError::Argument(format!(
                "compression level M={m} exceeds N={}",
                self.n()
            )));
        }
        let restricted = self.weights.restrict(m)?;
        TruncatedShift::build_with_tol(&restricted, f64::INFINITY)
    }

    /// `max_{j<k} ‖T_j T_k − T_k T_j‖`.
    pub fn commutator_norm(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.d() {
            for k in (j + 1)..self.d() {
                let c = &self.mats[j] * &self.mats[k] - &self.mats[k] * &self.mats[j];
                worst = worst.max(op_norm_unchecked(&c));
            }
        }
        worst
    }

    pub fn export(&self) -> ShiftExport {
        ShiftExport {
            d: self.d(),
            n: self.n(),
            basis: self.basis.indices().to_vec(),
            matrices: self.mats.iter().map(MatrixJson::from).collect(),
            axis_norms: self.mats.iter().map(op_norm_unchecked).collect(),
            commutator_norm: self.commutator_norm(),
        }
    }
}

/// `succ[rank(I)·d + j] = rank(I + ε_j)` for every `I` in `weight_basis`,
/// with ranks taken in `level_basis` (one level higher).
pub(crate) fn successor_table(weight_basis: &BasisEnumeration, level_basis: &BasisEnumeration) -> Vec<usize> {
    let d = weight_basis.d();
    let mut succ = Vec::with_capacity(weight_basis.len() * d);
    for index in weight_basis.iter() {
        for j in 0..d {
            let up = index.increment(j).expect("axis < d");
            succ.push(level_basis.rank(&up).expect("|I+ε_j| ≤ N+1"));
        }
    }
    succ
}

/// `T_j(w) v` without materializing `T_j`.
pub(crate) fn apply_axis_raw(
    weights: &WeightFamily,
    succ: &[usize],
    axis: usize,
    v: &DVector<Complex64>,
) -> DVector<Complex64> {
    let d = weights.d();
    let mut out = DVector::zeros(v.len());
    for r in 0..weights.basis().len() {
        let x = v[r];
        if x != zero() {
            out[succ[r * d + axis]] += weights.at(r * d + axis) * x;
        }
    }
    out
}

/// JSON form of a built shift. The basis order labels rows and columns.
#[derive(Clone, Debug, Serialize)]
pub struct ShiftExport {
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub basis: Vec<MultiIndex>,
    pub matrices: Vec<MatrixJson>,
    pub axis_norms: Vec<f64>,
    pub commutator_norm: f64,
}
