//! Dense complex helpers on top of `nalgebra`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShiftError};

pub type CMatrix = DMatrix<Complex64>;

pub fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

pub fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// Operator norm `σ_max(A)`.
pub fn op_norm(a: &CMatrix) -> Result<f64> {
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(ShiftError::Domain("matrix has non-finite entries".into()));
    }
    Ok(op_norm_unchecked(a))
}

/// [`op_norm`] without the finiteness scan; 1×1 and 2×2 use closed forms.
pub(crate) fn op_norm_unchecked(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    match a.shape() {
        (1, 1) => a[(0, 0)].norm(),
        (2, 2) => {
            let fro2: f64 = a.iter().map(|z| z.norm_sqr()).sum();
            let det = (a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]).norm();
            let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0);
            ((fro2 + disc.sqrt()) / 2.0).sqrt()
        }
        (r, 1) | (1, r) if r > 0 => a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
        _ => a
            .clone()
            .singular_values()
            .iter()
            .copied()
            .fold(0.0, f64::max),
    }
}

/// Eigenvalues of a Hermitian matrix, ascending. Only the lower triangle is read.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut ev: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `max |a_ij − a_ji*|`.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Kronecker product accumulated into `out`: `out += scale · (c ⊗ t)`.
pub(crate) fn kron_accumulate(out: &mut CMatrix, c: &CMatrix, t: &CMatrix) {
    let (tr, tc) = t.shape();
    for a in 0..c.nrows() {
        for b in 0..c.ncols() {
            let s = c[(a, b)];
            if s == zero() {
                continue;
            }
            let mut block = out.view_mut((a * tr, b * tc), (tr, tc));
            block.zip_apply(t, |o, x| *o += s * x);
        }
    }
}

/// Row-major `[re, im]` pairs, the matrix interchange format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixJson(pub Vec<Vec<[f64; 2]>>);

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        MatrixJson(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        )
    }
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(0, Vec::len);
        if self.0.iter().any(|r| r.len() != cols) {
            return Err(ShiftError::Parse("ragged matrix rows".into()));
        }
        Ok(CMatrix::from_fn(rows, cols, |i, j| {
            Complex64::new(self.0[i][j][0], self.0[i][j][1])
        }))
    }
}
