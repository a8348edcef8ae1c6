//! A finite unitary dilation of the all-ones shift `T(𝟏)` by cyclic
//! coordinate shifts on `(ℤ_M)^d`, and Brehmer-type defect operators.
//!
//! The dilation replaces multiplication by `z_j` on `L²(𝕋^d)` with the
//! cyclic shift on a grid of side `M = N + D_deg + 2`. For polynomials of
//! degree at most `D_deg` no term wraps around into the window
//! `{I : |I| ≤ N+1}`, so the compression identity is exact.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, ShiftError};
use crate::linalg::{hermitian_defect, hermitian_eigenvalues, op_norm, CMatrix};
use crate::multiindex::{BasisEnumeration, MultiIndex};
use crate::poly::MatrixPolynomial;
use crate::shift::TruncatedShift;
use crate::weights::WeightFamily;

/// Commuting cyclic shifts `U_j : δ_x ↦ δ_{x + ε_j mod M}` on `(ℤ_M)^d`.
#[derive(Clone, Debug)]
pub struct CyclicShifts {
    d: usize,
    side: usize,
    /// `perms[j][x] = x + ε_j (mod M)` for flat grid positions `x`.
    perms: Vec<Vec<usize>>,
}

impl CyclicShifts {
    pub fn new(d: usize, side: usize) -> Result<Self> {
        if d == 0 || side == 0 {
            return Err(ShiftError::Argument("d and M must be positive".into()));
        }
        let size = side
            .checked_pow(d as u32)
            .ok_or_else(|| ShiftError::Argument("grid too large".into()))?;
        let perms = (0..d)
            .map(|j| {
                let stride = side.pow((d - 1 - j) as u32);
                (0..size)
                    .map(|x| {
                        let c = (x / stride) % side;
                        if c + 1 == side {
                            x + stride - side * stride
                        } else {
                            x + stride
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(CyclicShifts { d, side, perms })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// `M^d`.
    pub fn size(&self) -> usize {
        self.perms[0].len()
    }

    pub fn permutation(&self, axis: usize) -> &[usize] {
        &self.perms[axis]
    }

    /// Flat grid position of `I` (coordinates reduced mod `M`).
    pub fn position(&self, index: &MultiIndex) -> usize {
        index
            .coords()
            .iter()
            .fold(0, |acc, &c| acc * self.side + c % self.side)
    }

    /// `U_j` as a dense permutation matrix.
    pub fn to_dense(&self, axis: usize) -> CMatrix {
        let n = self.size();
        let mut m = CMatrix::zeros(n, n);
        for (x, &y) in self.perms[axis].iter().enumerate() {
            m[(y, x)] = crate::linalg::one();
        }
        m
    }

    /// Every map is a bijection and all pairs commute, checked exactly.
    pub fn verify(&self) -> bool {
        let n = self.size();
        let bijective = self.perms.iter().all(|p| {
            let mut seen = vec![false; n];
            p.iter().all(|&y| !std::mem::replace(&mut seen[y], true))
        });
        let commute = (0..self.d).all(|j| {
            (0..self.d).all(|k| (0..n).all(|x| self.perms[j][self.perms[k][x]] == self.perms[k][self.perms[j][x]]))
        });
        bijective && commute
    }

    /// `P q(U) P|_H` where `H` is the window `{e_I : I ∈ window}` placed at
    /// grid positions `I`.
    pub fn compress(&self, q: &MatrixPolynomial, window: &BasisEnumeration) -> Result<CMatrix> {
        if q.d() != self.d || window.d() != self.d {
            return Err(ShiftError::Argument("dimension mismatch".into()));
        }
        let dim = window.len();
        let n = q.size();
        let positions: Vec<usize> = window.iter().map(|i| self.position(i)).collect();
        let mut rank_at = vec![usize::MAX; self.size()];
        for (r, &x) in positions.iter().enumerate() {
            rank_at[x] = r;
        }
        let mut out = CMatrix::zeros(n * dim, n * dim);
        for (k, c) in q.nonzero_terms() {
            let word = k.axis_word();
            for (col, &x) in positions.iter().enumerate() {
                let y = word.iter().fold(x, |y, &axis| self.perms[axis][y]);
                let row = rank_at[y];
                if row == usize::MAX {
                    continue;
                }
                for a in 0..n {
                    for b in 0..n {
                        out[(a * dim + row, b * dim + col)] += c[(a, b)];
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DilationCertificate {
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    /// Largest polynomial degree the compression identity is claimed for.
    pub degree_bound: usize,
    /// Grid side `M`.
    #[serde(rename = "M")]
    pub grid_side: usize,
    pub unitaries_verified: bool,
    pub battery_size: usize,
    pub seed: u64,
    /// `max_q ‖P q(U) P − q(T(𝟏))‖` over the battery.
    pub residual: f64,
    #[serde(skip)]
    pub shifts: CyclicShifts,
}

/// `‖P q(U) P − q(T)‖` for the given shifts and truncated shift.
pub fn compression_residual(u: &CyclicShifts, t: &TruncatedShift, q: &MatrixPolynomial) -> Result<f64> {
    let compressed = u.compress(q, t.basis())?;
    let direct = q.eval_at_tuple(t)?;
    op_norm(&(compressed - direct))
}

/// Cyclic dilation of `T(𝟏)` on `H_{N+1}` checked against `battery`
/// random scalar polynomials of degree at most `degree_bound`.
pub fn build_cyclic_dilation(
    n: usize,
    d: usize,
    degree_bound: usize,
    battery: usize,
    seed: u64,
) -> Result<DilationCertificate> {
    if degree_bound == 0 {
        return Err(ShiftError::Argument("degree bound must be at least 1".into()));
    }
    let side = n + degree_bound + 2;
    let shifts = CyclicShifts::new(d, side)?;
    let t = TruncatedShift::build(&WeightFamily::ones(d, n)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..battery).map(|_| rng.random()).collect();
    let residual = seeds
        .par_iter()
        .map(|&s| {
            let q = MatrixPolynomial::random(d, 1, degree_bound, s)?;
            compression_residual(&shifts, &t, &q)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(DilationCertificate {
        d,
        n,
        degree_bound,
        grid_side: side,
        unitaries_verified: shifts.verify(),
        battery_size: battery,
        seed,
        residual,
        shifts,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BrehmerReport {
    /// 1-based axes of `S`.
    pub subset: Vec<usize>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub min_eigenvalue: f64,
    pub hermitian_defect: f64,
    #[serde(skip)]
    pub matrix: CMatrix,
}

/// `Δ_S = Σ_{F ⊆ S} (−1)^{|F|} T^F (T^F)*` for 0-based axes `S`.
pub fn brehmer_defect(t: &TruncatedShift, subset: &[usize]) -> Result<BrehmerReport> {
    if subset.is_empty() {
        return Err(ShiftError::Argument("subset S must be nonempty".into()));
    }
    let mut s = subset.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.len() != subset.len() || s.iter().any(|&j| j >= t.d()) {
        return Err(ShiftError::Argument(format!(
            "subset must list distinct axes in 1..={}",
            t.d()
        )));
    }
    if s.len() > 20 {
        return Err(ShiftError::Argument("subset too large".into()));
    }
    let dim = t.dim();
    let mut delta = CMatrix::zeros(dim, dim);
    for mask in 0u32..(1 << s.len()) {
        let mut coords = vec![0usize; t.d()];
        for (bit, &j) in s.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                coords[j] = 1;
            }
        }
        let tf = t.apply_monomial(&MultiIndex::new(coords))?;
        let term = &tf * tf.adjoint();
        if mask.count_ones() % 2 == 0 {
            delta += term;
        } else {
            delta -= term;
        }
    }
    let eigenvalues = hermitian_eigenvalues(&delta);
    Ok(BrehmerReport {
        subset: s.iter().map(|j| j + 1).collect(),
        min_eigenvalue: eigenvalues.first().copied().unwrap_or(0.0),
        hermitian_defect: hermitian_defect(&delta),
        eigenvalues,
        matrix: delta,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoextensionVerdict {
    /// `Δ_{j,k}` has a negative eigenvalue: no doubly commuting isometric
    /// coextension (and no regular unitary dilation of `T*`).
    NoDoublyCommutingCoextension,
    /// Positivity holds; it is necessary but not sufficient.
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct ObstructionReport {
    pub axes: [usize; 2],
    pub min_eigenvalue: f64,
    pub tol: f64,
    pub verdict: CoextensionVerdict,
}

/// Sign test on the smallest eigenvalue of `Δ_{j,k}` (0-based axes).
pub fn doubly_commuting_obstruction(t: &TruncatedShift, j: usize, k: usize, tol: f64) -> Result<ObstructionReport> {
    if t.d() < 2 {
        return Err(ShiftError::Argument("needs at least two variables".into()));
    }
    if j == k || j >= t.d() || k >= t.d() {
        return Err(ShiftError::Argument(format!(
            "axes must be distinct and in 1..={}",
            t.d()
        )));
    }
    let rep = brehmer_defect(t, &[j, k])?;
    let verdict = if rep.min_eigenvalue < -tol {
        CoextensionVerdict::NoDoublyCommutingCoextension
    } else {
        CoextensionVerdict::Inconclusive
    };
    Ok(ObstructionReport {
        axes: [j + 1, k + 1],
        min_eigenvalue: rep.min_eigenvalue,
        tol,
        verdict,
    })
}
