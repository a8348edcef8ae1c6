//! `n×n` matrices of polynomials in `d` commuting variables, stored as
//! `K ↦ C_K` so that `p(z) = Σ_K C_K z^K`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShiftError};
use crate::linalg::{kron_accumulate, one, zero, CMatrix, MatrixJson};
use crate::multiindex::{BasisEnumeration, MultiIndex};
use crate::shift::TruncatedShift;

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixPolynomial {
    d: usize,
    n: usize,
    terms: BTreeMap<MultiIndex, CMatrix>,
}

impl MatrixPolynomial {
    pub fn zero(d: usize, n: usize) -> Self {
        MatrixPolynomial {
            d,
            n,
            terms: BTreeMap::new(),
        }
    }

    /// Scalar (`n = 1`) polynomial from `(K, c_K)` pairs.
    pub fn scalar<It>(d: usize, terms: It) -> Result<Self>
    where
        It: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut p = MatrixPolynomial::zero(d, 1);
        for (k, c) in terms {
            p.add_term(k, CMatrix::from_element(1, 1, c))?;
        }
        Ok(p)
    }

    /// The coordinate function `z_axis`.
    pub fn coordinate(d: usize, axis: usize) -> Result<Self> {
        MatrixPolynomial::scalar(d, [(MultiIndex::unit(d, axis)?, one())])
    }

    /// Constant polynomial `C`.
    pub fn constant(d: usize, c: CMatrix) -> Result<Self> {
        let n = c.nrows();
        let mut p = MatrixPolynomial::zero(d, n);
        p.add_term(MultiIndex::zero(d), c)?;
        Ok(p)
    }

    /// Adds `C z^K`, merging with an existing term.
    pub fn add_term(&mut self, k: MultiIndex, c: CMatrix) -> Result<()> {
        if k.dim() != self.d {
            return Err(ShiftError::Argument(format!(
                "term {k} has {} variables, expected {}",
                k.dim(),
                self.d
            )));
        }
        if c.shape() != (self.n, self.n) {
            return Err(ShiftError::Argument(format!(
                "coefficient is {}x{}, expected {}x{}",
                c.nrows(),
                c.ncols(),
                self.n,
                self.n
            )));
        }
        if c.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(ShiftError::Domain(format!("non-finite coefficient at {k}")));
        }
        match self.terms.get_mut(&k) {
            Some(existing) => *existing += c,
            None => {
                self.terms.insert(k, c);
            }
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Matrix size `n`.
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &CMatrix)> {
        self.terms.iter()
    }

    /// Terms with a nonzero coefficient.
    pub fn nonzero_terms(&self) -> impl Iterator<Item = (&MultiIndex, &CMatrix)> {
        self.terms.iter().filter(|(_, c)| c.iter().any(|z| *z != zero()))
    }

    pub fn is_zero(&self) -> bool {
        self.nonzero_terms().next().is_none()
    }

    /// Largest `|K|` with a nonzero coefficient; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.nonzero_terms().map(|(k, _)| k.degree()).max()
    }

    /// Product of scalar or matrix polynomials of equal size.
    pub fn mul(&self, other: &MatrixPolynomial) -> Result<MatrixPolynomial> {
        if self.d != other.d || self.n != other.n {
            return Err(ShiftError::Argument("polynomial shapes differ".into()));
        }
        let mut out = MatrixPolynomial::zero(self.d, self.n);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                out.add_term(ka.add(kb)?, ca * cb)?;
            }
        }
        Ok(out)
    }

    /// `p(z) = Σ_K C_K z^K`.
    pub fn eval_at_point(&self, z: &[Complex64]) -> Result<CMatrix> {
        if z.len() != self.d {
            return Err(ShiftError::Argument(format!(
                "point has {} coordinates, expected {}",
                z.len(),
                self.d
            )));
        }
        let mut out = CMatrix::zeros(self.n, self.n);
        for (k, c) in &self.terms {
            let m = monomial_at(k, z);
            out.zip_apply(c, |o, x| *o += m * x);
        }
        Ok(out)
    }

    /// `p(T) = Σ_K C_K ⊗ T^K`, an `n·D × n·D` matrix whose `(a, b)` block
    /// is the `(a, b)` polynomial entry evaluated at `T`.
    pub fn eval_at_tuple(&self, t: &TruncatedShift) -> Result<CMatrix> {
        if t.d() != self.d {
            return Err(ShiftError::Argument(format!(
                "polynomial has {} variables, shift has {}",
                self.d,
                t.d()
            )));
        }
        let dim = t.dim();
        let mut out = CMatrix::zeros(self.n * dim, self.n * dim);
        for (k, c) in self.nonzero_terms() {
            if k.degree() > t.n() + 1 {
                continue;
            }
            let tk = t.apply_monomial(k)?;
            kron_accumulate(&mut out, c, &tk);
        }
        Ok(out)
    }

    /// `Σ_K C_K ⊗ A^K` for an arbitrary tuple of commuting square matrices.
    pub fn eval_at_matrices(&self, mats: &[CMatrix]) -> Result<CMatrix> {
        if mats.len() != self.d {
            return Err(ShiftError::Argument(format!(
                "polynomial has {} variables, got {} matrices",
                self.d,
                mats.len()
            )));
        }
        let dim = mats.first().map_or(0, |m| m.nrows());
        if mats.iter().any(|m| m.shape() != (dim, dim)) {
            return Err(ShiftError::Argument("matrices must be square of equal size".into()));
        }
        let mut out = CMatrix::zeros(self.n * dim, self.n * dim);
        for (k, c) in self.nonzero_terms() {
            let power = k
                .axis_word()
                .into_iter()
                .fold(CMatrix::identity(dim, dim), |acc, axis| &mats[axis] * acc);
            kron_accumulate(&mut out, c, &power);
        }
        Ok(out)
    }

    /// `Σ_K ‖C_K‖·|K|`, a Lipschitz constant of `θ ↦ ‖p(e^{iθ})‖` in the
    /// max-norm on angles.
    pub fn torus_lipschitz(&self) -> f64 {
        self.nonzero_terms()
            .map(|(k, c)| crate::linalg::op_norm_unchecked(c) * k.degree() as f64)
            .sum()
    }

    /// Random polynomial: each monomial with `|K| ≤ degree` is present with
    /// probability 0.7, coefficients with entries uniform in the unit square.
    pub fn random(d: usize, n: usize, degree: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = MatrixPolynomial::zero(d, n);
        let basis = BasisEnumeration::new(d, degree)?;
        for k in basis.iter() {
            if !rng.random_bool(0.7) {
                continue;
            }
            let c = CMatrix::from_fn(n, n, |_, _| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            p.add_term(k.clone(), c)?;
        }
        if p.is_zero() {
            let c = CMatrix::from_fn(n, n, |_, _| one());
            p.add_term(MultiIndex::zero(d), c)?;
        }
        Ok(p)
    }

    pub fn to_json(&self) -> PolynomialFile {
        PolynomialFile {
            d: self.d,
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(k, c)| TermJson {
                    k: k.clone(),
                    coeff: MatrixJson::from(c),
                })
                .collect(),
        }
    }

    pub fn from_json(file: &PolynomialFile) -> Result<Self> {
        if file.d == 0 || file.n == 0 {
            return Err(ShiftError::Argument("d and n must be at least 1".into()));
        }
        let mut p = MatrixPolynomial::zero(file.d, file.n);
        for t in &file.terms {
            p.add_term(t.k.clone(), t.coeff.to_matrix()?)?;
        }
        Ok(p)
    }
}

pub(crate) fn monomial_at(k: &MultiIndex, z: &[Complex64]) -> Complex64 {
    k.coords()
        .iter()
        .zip(z)
        .fold(one(), |acc, (&e, &zi)| acc * zi.powu(e as u32))
}

/// `{"d":3,"n":3,"terms":[{"K":[1,0,0],"coeff":[[[re,im],…],…]}, …]}`
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolynomialFile {
    pub d: usize,
    pub n: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermJson {
    #[serde(rename = "K")]
    pub k: MultiIndex,
    pub coeff: MatrixJson,
}
