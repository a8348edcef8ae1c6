//! Weight families `w = (w_{I,j})_{|I| ≤ N, 1 ≤ j ≤ d}` and their weight
//! sequences `β`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShiftError};
use crate::multiindex::{BasisEnumeration, MultiIndex};

/// Default tolerance for the commutation relations.
pub const DEFAULT_COMMUTATION_TOL: f64 = 1e-10;

/// Weights within this distance of modulus one count as unimodular, and
/// moduli up to `1 + MODULUS_TOL` still count as contractive.
pub const MODULUS_TOL: f64 = 1e-12;

/// A finite weight family. Entries are stored exactly as given; nothing is
/// repaired or projected.
#[derive(Clone, Debug)]
pub struct WeightFamily {
    basis: BasisEnumeration,
    values: Vec<Complex64>,
}

impl PartialEq for WeightFamily {
    fn eq(&self, other: &Self) -> bool {
        self.d() == other.d() && self.n() == other.n() && self.values == other.values
    }
}

impl WeightFamily {
    /// Builds a family from a closure evaluated at every `(I, j)`.
    pub fn from_fn<F>(d: usize, n: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(&MultiIndex, usize) -> Complex64,
    {
        let basis = BasisEnumeration::new(d, n)?;
        let mut values = Vec::with_capacity(basis.len() * d);
        for i in basis.iter() {
            for j in 0..d {
                values.push(f(i, j));
            }
        }
        Ok(WeightFamily { basis, values })
    }

    /// Builds a family from explicit entries. Every `(I, j)` with `|I| ≤ N`
    /// must appear exactly once.
    pub fn from_entries<It>(d: usize, n: usize, entries: It) -> Result<Self>
    where
        It: IntoIterator<Item = (MultiIndex, usize, Complex64)>,
    {
        let basis = BasisEnumeration::new(d, n)?;
        let mut slots: Vec<Option<Complex64>> = vec![None; basis.len() * d];
        for (index, j, w) in entries {
            if index.dim() != d {
                return Err(ShiftError::Argument(format!(
                    "multi-index {index} has {} coordinates, expected {d}",
                    index.dim()
                )));
            }
            if j >= d {
                return Err(ShiftError::Argument(format!(
                    "axis {} out of range for d={d}",
                    j + 1
                )));
            }
            let r = basis.rank(&index).ok_or_else(|| {
                ShiftError::Argument(format!("multi-index {index} has degree above N={n}"))
            })?;
            if !w.re.is_finite() || !w.im.is_finite() {
                return Err(ShiftError::Domain(format!(
                    "non-finite weight at I={index}, j={}",
                    j + 1
                )));
            }
            let slot = &mut slots[r * d + j];
            if slot.is_some() {
                return Err(ShiftError::Argument(format!(
                    "duplicate weight for I={index}, j={}",
                    j + 1
                )));
            }
            *slot = Some(w);
        }
        let mut values = Vec::with_capacity(slots.len());
        for (k, s) in slots.into_iter().enumerate() {
            match s {
                Some(w) => values.push(w),
                None => {
                    let index = basis.unrank(k / d).expect("rank in range");
                    return Err(ShiftError::MissingWeight {
                        index: index.coords().to_vec(),
                        axis: k % d + 1,
                    });
                }
            }
        }
        Ok(WeightFamily { basis, values })
    }

    /// The all-ones family `𝟏`.
    pub fn ones(d: usize, n: usize) -> Result<Self> {
        WeightFamily::from_fn(d, n, |_, _| Complex64::new(1.0, 0.0))
    }

    pub fn d(&self) -> usize {
        self.basis.d()
    }

    /// Maximal degree `N` of the indices carrying weights.
    pub fn n(&self) -> usize {
        self.basis.level()
    }

    pub fn basis(&self) -> &BasisEnumeration {
        &self.basis
    }

    /// Number of entries `|𝓘| = d · binomial(N+d, d)`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `w_{I,j}`, or `None` when `|I| > N` or the axis is out of range.
    pub fn get(&self, index: &MultiIndex, j: usize) -> Option<Complex64> {
        if j >= self.d() {
            return None;
        }
        self.basis
            .rank(index)
            .map(|r| self.values[r * self.d() + j])
    }

    /// Entry by flat position `rank(I) · d + j`.
    pub fn at(&self, slot: usize) -> Complex64 {
        self.values[slot]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `(I, j, w_{I,j})` in storage order.
    pub fn entries(&self) -> impl Iterator<Item = (&MultiIndex, usize, Complex64)> + '_ {
        let d = self.d();
        self.values
            .iter()
            .enumerate()
            .map(move |(k, &w)| (self.basis.unrank(k / d).expect("rank"), k % d, w))
    }

    /// Same index set, entries transformed by `f(slot, w)`.
    pub fn map_slots<F>(&self, mut f: F) -> WeightFamily
    where
        F: FnMut(usize, Complex64) -> Complex64,
    {
        WeightFamily {
            basis: self.basis.clone(),
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(k, &w)| f(k, w))
                .collect(),
        }
    }

    /// Restriction to `|I| ≤ m`.
    pub fn restrict(&self, m: usize) -> Result<WeightFamily> {
        if m > self.n() {
            return Err(ShiftError::Argument(format!(
                "cannot restrict level N={} to M={m}",
                self.n()
            )));
        }
        WeightFamily::from_fn(self.d(), m, |i, j| self.get(i, j).expect("lower level"))
    }

    pub fn is_contractive(&self) -> bool {
        self.values.iter().all(|w| w.norm() <= 1.0 + MODULUS_TOL)
    }

    /// All weights nonzero.
    pub fn is_injective(&self) -> bool {
        self.values.iter().all(|w| *w != Complex64::new(0.0, 0.0))
    }

    /// All weights unimodular, i.e. the family lies in `X₀`.
    pub fn is_unimodular(&self) -> bool {
        self.values
            .iter()
            .all(|w| (w.norm() - 1.0).abs() <= MODULUS_TOL)
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|w| w.norm()).fold(0.0, f64::max)
    }

    /// First zero weight, as `(I, j)`.
    pub fn first_zero(&self) -> Option<(MultiIndex, usize)> {
        self.entries()
            .find(|(_, _, w)| *w == Complex64::new(0.0, 0.0))
            .map(|(i, j, _)| (i.clone(), j))
    }

    /// Exact maximal residual `|w_{I,j} w_{I+ε_j,k} − w_{I,k} w_{I+ε_k,j}|`
    /// over `|I| ≤ N−1`, together with every triple exceeding `tol`.
    pub fn validate_commuting(&self, tol: f64) -> ValidationReport {
        let d = self.d();
        let mut max_residual: f64 = 0.0;
        let mut violations = Vec::new();
        if self.n() >= 1 {
            for r in self.basis.layer(0).start..self.basis.layer(self.n() - 1).end {
                let index = self.basis.unrank(r).expect("rank");
                for j in 0..d {
                    for k in (j + 1)..d {
                        let res = self.commutation_residual(index, j, k);
                        max_residual = max_residual.max(res);
                        if res > tol {
                            violations.push(Violation {
                                index: index.clone(),
                                j: j + 1,
                                k: k + 1,
                                residual: res,
                            });
                        }
                    }
                }
            }
        }
        ValidationReport {
            max_residual,
            tol,
            violations,
        }
    }

    fn commutation_residual(&self, index: &MultiIndex, j: usize, k: usize) -> f64 {
        let w = |i: &MultiIndex, a: usize| self.get(i, a).expect("|I| ≤ N");
        let ij = index.increment(j).expect("axis");
        let ik = index.increment(k).expect("axis");
        let lhs = w(index, j) * w(&ij, k);
        let rhs = w(index, k) * w(&ik, j);
        (lhs - rhs).norm()
    }

    /// Fails with a contract error unless the commutation residual is within `tol`.
    pub fn require_commuting(&self, tol: f64) -> Result<ValidationReport> {
        let report = self.validate_commuting(tol);
        if report.passed() {
            Ok(report)
        } else {
            let v = &report.violations[0];
            Err(ShiftError::Contract(format!(
                "weight family is not commuting: residual {:.3e} at I={}, j={}, k={} (tol {:.1e})",
                v.residual, v.index, v.j, v.k, tol
            )))
        }
    }

    pub(crate) fn require_injective(&self, what: &str) -> Result<()> {
        if let Some((i, j)) = self.first_zero() {
            return Err(ShiftError::Domain(format!(
                "{what} requires nonzero weights, but w_{{{i},{}}} = 0; with zero weights the \
                 shift need not be unitarily equivalent to one with positive weights",
                j + 1
            )));
        }
        Ok(())
    }

    /// Weights `w_{I,j} = β_{I+ε_j} / β_I`.
    pub fn from_beta(beta: &BetaFamily) -> Result<WeightFamily> {
        if let Some((i, _)) = beta.entries().find(|(_, b)| *b <= 0.0 || !b.is_finite()) {
            return Err(ShiftError::Domain(format!(
                "β_{i} must be finite and strictly positive"
            )));
        }
        let n = beta.n();
        WeightFamily::from_fn(beta.d(), n, |i, j| {
            let up = i.increment(j).expect("axis");
            let b = beta.get(i).expect("|I| ≤ N") ;
            let bu = beta.get(&up).expect("|I+ε_j| ≤ N+1");
            Complex64::new(bu / b, 0.0)
        })
    }

    /// `β_I = ‖T^I e_0‖`, the product of `|w|` along a monotone lattice path.
    ///
    /// Every predecessor of `I` is checked, so a family whose moduli are not
    /// path independent is rejected rather than silently resolved.
    pub fn to_beta(&self) -> Result<BetaFamily> {
        self.require_injective("a β representation")?;
        let d = self.d();
        let basis = BasisEnumeration::new(d, self.n() + 1)?;
        let mut values = vec![0.0f64; basis.len()];
        values[0] = 1.0;
        for r in 1..basis.len() {
            let index = basis.unrank(r).expect("rank").clone();
            let mut defining: Option<f64> = None;
            for (pred, j) in index.predecessors() {
                let pr = basis.rank(&pred).expect("lower set");
                let cand = values[pr] * self.get(&pred, j).expect("|pred| ≤ N").norm();
                match defining {
                    None => defining = Some(cand),
                    Some(b) => {
                        if (cand - b).abs() > PATH_TOL * b.max(cand) {
                            return Err(ShiftError::Contract(format!(
                                "β is path dependent at I={index}: {b} vs {cand}"
                            )));
                        }
                    }
                }
            }
            values[r] = defining.expect("nonzero index has a predecessor");
        }
        Ok(BetaFamily {
            n: self.n(),
            basis,
            values,
        })
    }

    /// Random contractive commuting family, exact by construction.
    ///
    /// A non-increasing positive `β` is drawn first (each `β_I` is the
    /// smallest predecessor value times a factor in `(0, 1]`, with factor
    /// exactly 1 a quarter of the time so unimodular weights occur), then
    /// converted to weights. The complex profile conjugates by a random
    /// diagonal gauge `λ` with `λ_0 = 1`.
    pub fn random_contractive(d: usize, n: usize, seed: u64, profile: Profile) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let basis = BasisEnumeration::new(d, n + 1)?;
        let mut beta = vec![1.0f64; basis.len()];
        for r in 1..basis.len() {
            let index = basis.unrank(r).expect("rank");
            let floor = index
                .predecessors()
                .map(|(p, _)| beta[basis.rank(&p).expect("lower set")])
                .fold(f64::INFINITY, f64::min);
            let u = if rng.random_bool(0.25) {
                1.0
            } else {
                rng.random_range(0.2..1.0)
            };
            beta[r] = floor * u;
        }
        let beta = BetaFamily {
            n,
            basis,
            values: beta,
        };
        let positive = WeightFamily::from_beta(&beta)?;
        match profile {
            Profile::Positive => Ok(positive),
            Profile::ComplexNonzero => {
                let gauge: Vec<Complex64> = (0..beta.basis.len())
                    .map(|r| {
                        if r == 0 {
                            Complex64::new(1.0, 0.0)
                        } else {
                            Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
                        }
                    })
                    .collect();
                let d = positive.d();
                Ok(positive.map_slots(|slot, w| {
                    let index = positive.basis.unrank(slot / d).expect("rank");
                    let up = index.increment(slot % d).expect("axis");
                    let lam_up = gauge[beta.basis.rank(&up).expect("level N+1")];
                    let lam = gauge[slot / d];
                    let phase = lam_up * lam.conj();
                    Complex64::from_polar(w.re, phase.arg())
                }))
            }
        }
    }
}

const PATH_TOL: f64 = 1e-10;

/// Sign/phase profile for [`WeightFamily::random_contractive`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    Positive,
    ComplexNonzero,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    #[serde(rename = "I")]
    pub index: MultiIndex,
    /// 1-based axis.
    pub j: usize,
    /// 1-based axis.
    pub k: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub max_residual: f64,
    pub tol: f64,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Strictly positive `β_I` for `|I| ≤ N+1` with `β_0 = 1`.
#[derive(Clone, Debug)]
pub struct BetaFamily {
    n: usize,
    basis: BasisEnumeration,
    values: Vec<f64>,
}

impl BetaFamily {
    /// `n` is the weight level `N`; `f` is evaluated for `|I| ≤ N+1`.
    pub fn from_fn<F>(d: usize, n: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(&MultiIndex) -> f64,
    {
        let basis = BasisEnumeration::new(d, n + 1)?;
        let values: Vec<f64> = basis.iter().map(&mut f).collect();
        BetaFamily::checked(n, basis, values)
    }

    pub fn from_entries<It>(d: usize, n: usize, entries: It) -> Result<Self>
    where
        It: IntoIterator<Item = (MultiIndex, f64)>,
    {
        let basis = BasisEnumeration::new(d, n + 1)?;
        let mut slots = vec![None; basis.len()];
        for (index, b) in entries {
            let r = basis.rank(&index).ok_or_else(|| {
                ShiftError::Argument(format!("β index {index} outside |I| ≤ {}", n + 1))
            })?;
            if slots[r].replace(b).is_some() {
                return Err(ShiftError::Argument(format!("duplicate β entry for {index}")));
            }
        }
        let mut values = Vec::with_capacity(slots.len());
        for (r, s) in slots.into_iter().enumerate() {
            values.push(s.ok_or_else(|| {
                ShiftError::Argument(format!(
                    "missing β entry for {}",
                    basis.unrank(r).expect("rank")
                ))
            })?);
        }
        BetaFamily::checked(n, basis, values)
    }

    fn checked(n: usize, basis: BasisEnumeration, values: Vec<f64>) -> Result<Self> {
        if (values[0] - 1.0).abs() > 0.0 {
            return Err(ShiftError::Domain(format!(
                "β at the origin must equal 1, got {}",
                values[0]
            )));
        }
        if let Some(r) = values.iter().position(|b| *b <= 0.0 || !b.is_finite()) {
            return Err(ShiftError::Domain(format!(
                "β_{} = {} is not strictly positive",
                basis.unrank(r).expect("rank"),
                values[r]
            )));
        }
        Ok(BetaFamily { n, basis, values })
    }

    pub fn d(&self) -> usize {
        self.basis.d()
    }

    /// Weight level `N`; `β` itself is indexed by `|I| ≤ N+1`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, index: &MultiIndex) -> Option<f64> {
        self.basis.rank(index).map(|r| self.values[r])
    }

    pub fn entries(&self) -> impl Iterator<Item = (&MultiIndex, f64)> + '_ {
        self.basis.iter().zip(self.values.iter().copied())
    }
}
