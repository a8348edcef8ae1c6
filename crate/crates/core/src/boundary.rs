//! Pushing a weight family to the set `X₀` of unimodular families.
//!
//! An index `I` is good when `‖T^I e_0‖ = 1`, i.e. every weight on every
//! monotone path from `0` to `I` is unimodular. A pair `(I, j)` is scalable
//! when `I` is good and `I + ε_j` is bad. Multiplying exactly the scalable
//! weights by `t` keeps the commutation relations for every `|t| ≤ r`, where
//! `r⁻¹` is the largest scalable modulus. Choosing `t` on `|t| = r` that
//! maximizes `|f|` makes at least one more weight unimodular without
//! decreasing `|f|`.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, ShiftError};
use crate::linalg::{one, zero};
use crate::multiindex::{BasisEnumeration, MultiIndex};
use crate::poly::MatrixPolynomial;
use crate::shift::{apply_axis_raw, successor_table};
use crate::weights::{WeightFamily, DEFAULT_COMMUTATION_TOL, MODULUS_TOL};

pub const DEFAULT_CIRCLE_SAMPLES: usize = 720;

fn unimodular(w: Complex64) -> bool {
    (w.norm() - 1.0).abs() <= MODULUS_TOL
}

#[derive(Clone, Debug)]
pub struct BoundaryState {
    weights: WeightFamily,
    basis: BasisEnumeration,
    good: Vec<bool>,
    scalable: Vec<bool>,
    radius: Option<f64>,
}

impl BoundaryState {
    pub fn weights(&self) -> &WeightFamily {
        &self.weights
    }

    /// Index basis for `|I| ≤ N+1`.
    pub fn basis(&self) -> &BasisEnumeration {
        &self.basis
    }

    pub fn is_good(&self, index: &MultiIndex) -> Option<bool> {
        self.basis.rank(index).map(|r| self.good[r])
    }

    pub fn good_indices(&self) -> Vec<MultiIndex> {
        self.basis
            .iter()
            .zip(&self.good)
            .filter(|(_, g)| **g)
            .map(|(i, _)| i.clone())
            .collect()
    }

    pub fn bad_indices(&self) -> Vec<MultiIndex> {
        self.basis
            .iter()
            .zip(&self.good)
            .filter(|(_, g)| !**g)
            .map(|(i, _)| i.clone())
            .collect()
    }

    /// Scalable pairs `(I, j)` with 0-based `j`, in storage order.
    pub fn scalable_pairs(&self) -> Vec<(MultiIndex, usize)> {
        let d = self.weights.d();
        self.scalable
            .iter()
            .enumerate()
            .filter(|(_, s)| **s)
            .map(|(slot, _)| (self.weights.basis().unrank(slot / d).expect("rank").clone(), slot % d))
            .collect()
    }

    pub fn is_scalable(&self, index: &MultiIndex, j: usize) -> bool {
        let d = self.weights.d();
        self.weights
            .basis()
            .rank(index)
            .is_some_and(|r| j < d && self.scalable[r * d + j])
    }

    /// `r = (max scalable |w|)⁻¹`, or `None` if no pair is scalable.
    pub fn radius(&self) -> Option<f64> {
        self.radius
    }

    /// The family `ŵ(t)`: scalable weights multiplied by `t`, others kept.
    pub fn scale_step(&self, t: Complex64) -> Result<WeightFamily> {
        let r = self.radius.unwrap_or(f64::INFINITY);
        if t.norm() > r * (1.0 + MODULUS_TOL) {
            return Err(ShiftError::Argument(format!(
                "|t| = {} exceeds the scaling radius r = {r}",
                t.norm()
            )));
        }
        Ok(self
            .weights
            .map_slots(|slot, w| if self.scalable[slot] { t * w } else { w }))
    }
}

/// Good/bad partition of `|I| ≤ N+1` and the scalable pairs.
pub fn classify(weights: &WeightFamily) -> Result<BoundaryState> {
    weights.require_commuting(DEFAULT_COMMUTATION_TOL)?;
    weights.require_injective("boundary classification")?;
    if !weights.is_contractive() {
        return Err(ShiftError::Contract(
            "boundary classification requires a contractive family".into(),
        ));
    }
    let d = weights.d();
    let basis = BasisEnumeration::new(d, weights.n() + 1)?;
    let mut good = vec![false; basis.len()];
    good[0] = true;
    for r in 1..basis.len() {
        let index = basis.unrank(r).expect("rank");
        let mut verdicts = index.predecessors().map(|(p, j)| {
            good[basis.rank(&p).expect("lower set")] && unimodular(weights.get(&p, j).expect("|p| ≤ N"))
        });
        let first = verdicts.next().expect("nonzero index has a predecessor");
        if verdicts.any(|v| v != first) {
            return Err(ShiftError::Contract(format!(
                "paths to {index} disagree on unimodularity; moduli are not path independent"
            )));
        }
        good[r] = first;
    }
    let mut scalable = vec![false; weights.len()];
    let mut max_scalable: f64 = 0.0;
    for (slot, flag) in scalable.iter_mut().enumerate() {
        let r = slot / d;
        let up = weights.basis().unrank(r).expect("rank").increment(slot % d)?;
        if good[r] && !good[basis.rank(&up).expect("level N+1")] {
            *flag = true;
            max_scalable = max_scalable.max(weights.at(slot).norm());
        }
    }
    let radius = scalable.iter().any(|s| *s).then(|| 1.0 / max_scalable);
    Ok(BoundaryState {
        weights: weights.clone(),
        basis,
        good,
        scalable,
        radius,
    })
}

/// The analytic functional `f(w) = ⟨p(T(w)) g, h⟩`.
#[derive(Clone, Debug)]
pub struct Functional {
    poly: MatrixPolynomial,
    g: DVector<Complex64>,
    h: DVector<Complex64>,
}

impl Functional {
    /// `g` and `h` must be unit vectors of length `p.size() · dim H_{N+1}`.
    pub fn new(poly: MatrixPolynomial, g: Vec<Complex64>, h: Vec<Complex64>) -> Result<Self> {
        let g = DVector::from_vec(g);
        let h = DVector::from_vec(h);
        for (name, v) in [("g", &g), ("h", &h)] {
            if (v.norm() - 1.0).abs() > 1e-10 {
                return Err(ShiftError::Argument(format!(
                    "{name} must be a unit vector, has norm {}",
                    v.norm()
                )));
            }
        }
        if g.len() != h.len() {
            return Err(ShiftError::Argument("g and h have different lengths".into()));
        }
        Ok(Functional { poly, g, h })
    }

    /// `f ≡ 1`: constant polynomial 1 with `g = h = e_0`. Every point of
    /// the circle ties, so the step picks `t = r`.
    pub fn unit(d: usize, dim: usize) -> Self {
        let mut e0 = DVector::zeros(dim);
        e0[0] = one();
        Functional {
            poly: MatrixPolynomial::constant(d, crate::linalg::CMatrix::identity(1, 1))
                .expect("1x1 constant"),
            g: e0.clone(),
            h: e0,
        }
    }

    pub fn polynomial(&self) -> &MatrixPolynomial {
        &self.poly
    }

    fn check(&self, weights: &WeightFamily, dim: usize) -> Result<()> {
        if self.poly.d() != weights.d() {
            return Err(ShiftError::Argument("functional and family differ in d".into()));
        }
        if self.g.len() != self.poly.size() * dim {
            return Err(ShiftError::Argument(format!(
                "functional vectors have length {}, expected {}",
                self.g.len(),
                self.poly.size() * dim
            )));
        }
        Ok(())
    }

    /// `⟨p(T(w)) g, h⟩` computed by applying the shift to vectors.
    fn eval_raw(&self, weights: &WeightFamily, succ: &[usize], dim: usize) -> Complex64 {
        let n = self.poly.size();
        let mut acc = zero();
        for b in 0..n {
            let gb = DVector::from_iterator(dim, self.g.rows(b * dim, dim).iter().copied());
            for (k, c) in self.poly.nonzero_terms() {
                let mut v = gb.clone();
                for axis in k.axis_word() {
                    v = apply_axis_raw(weights, succ, axis, &v);
                }
                for a in 0..n {
                    let cab = c[(a, b)];
                    if cab == zero() {
                        continue;
                    }
                    let ha = self.h.rows(a * dim, dim);
                    acc += cab * ha.dotc(&v);
                }
            }
        }
        acc
    }

    /// `f(w)`.
    pub fn eval(&self, weights: &WeightFamily) -> Result<Complex64> {
        let basis = BasisEnumeration::new(weights.d(), weights.n() + 1)?;
        self.check(weights, basis.len())?;
        let succ = successor_table(weights.basis(), &basis);
        Ok(self.eval_raw(weights, &succ, basis.len()))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PairJson {
    #[serde(rename = "I")]
    pub index: MultiIndex,
    /// 1-based axis.
    pub j: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PushStep {
    pub scalable: Vec<PairJson>,
    pub r: f64,
    /// `[re, im]` of the chosen `t₀`.
    pub t0: [f64; 2],
    pub f_before: f64,
    pub f_after: f64,
    /// `max(0, |f| before − |f| after)`; nonzero only when no circle sample
    /// reached the starting value.
    pub slack: f64,
    pub new_unimodular: Vec<PairJson>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PushTrace {
    pub circle_samples: usize,
    pub steps: Vec<PushStep>,
    pub f_initial: f64,
    pub f_final: f64,
    pub total_slack: f64,
    #[serde(skip)]
    pub path: Vec<WeightFamily>,
}

impl PushTrace {
    pub fn final_family(&self) -> &WeightFamily {
        self.path.last().expect("path starts with the input")
    }
}

fn unimodular_count(w: &WeightFamily) -> usize {
    w.values().iter().filter(|x| unimodular(**x)).count()
}

/// Iterates the scaling step until every weight is unimodular.
///
/// Each step samples `circle_samples` equispaced points `t = r e^{2πik/m}`
/// and keeps the one with the largest `|f(ŵ(t))|` (smallest `k` on ties).
pub fn push_to_boundary(
    weights: &WeightFamily,
    functional: Option<&Functional>,
    circle_samples: usize,
) -> Result<PushTrace> {
    if circle_samples == 0 {
        return Err(ShiftError::Argument("circle_samples must be positive".into()));
    }
    weights.require_injective("pushing to the boundary")?;
    let basis = BasisEnumeration::new(weights.d(), weights.n() + 1)?;
    let dim = basis.len();
    let succ = successor_table(weights.basis(), &basis);
    let default_f;
    let f = match functional {
        Some(f) => f,
        None => {
            default_f = Functional::unit(weights.d(), dim);
            &default_f
        }
    };
    f.check(weights, dim)?;
    let abs_f = |w: &WeightFamily| f.eval_raw(w, &succ, dim).norm();

    let f_initial = abs_f(weights);
    let mut path = vec![weights.clone()];
    let mut steps = Vec::new();
    let max_steps = weights.len();
    loop {
        let current = path.last().expect("nonempty");
        let state = classify(current)?;
        let Some(r) = state.radius() else {
            if !current.is_unimodular() {
                return Err(ShiftError::Contract(
                    "no scalable pair left but some weight is not unimodular".into(),
                ));
            }
            break;
        };
        if steps.len() >= max_steps {
            return Err(ShiftError::Contract(format!(
                "push did not terminate within |𝓘| = {max_steps} steps"
            )));
        }
        let f_before = abs_f(current);
        let (best_k, best_val) = (0..circle_samples)
            .into_par_iter()
            .map(|k| {
                let t = Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / circle_samples as f64);
                let w = state.scale_step(t).expect("|t| = r");
                (k, abs_f(&w))
            })
            .reduce(
                || (usize::MAX, f64::NEG_INFINITY),
                |a, b| {
                    if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                        b
                    } else {
                        a
                    }
                },
            );
        let t0 = Complex64::from_polar(r, std::f64::consts::TAU * best_k as f64 / circle_samples as f64);
        let next = state.scale_step(t0)?;
        let before_count = unimodular_count(current);
        let after_count = unimodular_count(&next);
        if after_count <= before_count {
            return Err(ShiftError::Contract(format!(
                "unimodular set did not grow ({before_count} → {after_count})"
            )));
        }
        let d = current.d();
        let new_unimodular = (0..current.len())
            .filter(|&s| !unimodular(current.at(s)) && unimodular(next.at(s)))
            .map(|s| PairJson {
                index: current.basis().unrank(s / d).expect("rank").clone(),
                j: s % d + 1,
            })
            .collect();
        steps.push(PushStep {
            scalable: state
                .scalable_pairs()
                .into_iter()
                .map(|(index, j)| PairJson { index, j: j + 1 })
                .collect(),
            r,
            t0: [t0.re, t0.im],
            f_before,
            f_after: best_val,
            slack: (f_before - best_val).max(0.0),
            new_unimodular,
        });
        path.push(next);
    }
    let f_final = abs_f(path.last().expect("nonempty"));
    Ok(PushTrace {
        circle_samples,
        total_slack: steps.iter().map(|s| s.slack).sum(),
        steps,
        f_initial,
        f_final,
        path,
    })
}
