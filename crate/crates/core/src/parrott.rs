//! A three-variable weighted shift with zero weights whose matrix von
//! Neumann inequality fails: `‖p(T)‖ = 2 > √3 = sup_{𝔻̄³} ‖p‖`.
//!
//! Weights: `δ_j` at `I = 0`, `a_{i,j}` at `I = ε_i` (`i ≠ j`), and zero at
//! `I = ε_j` and at every `|I| ≥ 2`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, ShiftError};
use crate::linalg::{op_norm, one, zero, CMatrix, MatrixJson};
use crate::multiindex::MultiIndex;
use crate::poly::MatrixPolynomial;
use crate::shift::TruncatedShift;
use crate::vncheck::{sup_norm_torus, SupNorm, Verdict, VnReport, VN_SLACK};
use crate::weights::{WeightFamily, DEFAULT_COMMUTATION_TOL, MODULUS_TOL};

/// Rows and columns (1-based) of the norm-2 witness inside `p(A₁,A₂,A₃)`.
pub const WITNESS_ROWS: [usize; 3] = [1, 6, 8];
pub const WITNESS_COLS: [usize; 3] = [2, 4, 9];

#[derive(Clone, Debug, PartialEq)]
pub struct ParrottConfig {
    /// `a[i][j]` for `i ≠ j` (0-based); the diagonal is ignored.
    pub a: [[Complex64; 3]; 3],
    pub delta: [Complex64; 3],
}

impl ParrottConfig {
    /// `a_{2,1} = −1`, all other `a_{i,j} = 1`, `δ = 0`.
    pub fn counterexample() -> Self {
        let mut c = ParrottConfig::all_ones([zero(); 3]);
        c.a[1][0] = Complex64::new(-1.0, 0.0);
        c
    }

    /// All `a_{i,j} = 1` with the given `δ`.
    pub fn all_ones(delta: [Complex64; 3]) -> Self {
        ParrottConfig {
            a: [[one(); 3]; 3],
            delta,
        }
    }

    pub fn with_delta(&self, delta: [Complex64; 3]) -> Self {
        ParrottConfig {
            a: self.a,
            delta,
        }
    }

    fn a(&self, i: usize, j: usize) -> Complex64 {
        self.a[i][j]
    }

    /// The three relations `δ₁a₁₃ = δ₃a₃₁`, `δ₂a₂₁ = δ₁a₁₂`, `δ₃a₃₂ = δ₂a₂₃`
    /// as `(label, lhs, rhs)`.
    pub fn relations(&self) -> [(&'static str, Complex64, Complex64); 3] {
        let d = &self.delta;
        [
            ("δ₁a₁₃ = δ₃a₃₁", d[0] * self.a(0, 2), d[2] * self.a(2, 0)),
            ("δ₂a₂₁ = δ₁a₁₂", d[1] * self.a(1, 0), d[0] * self.a(0, 1)),
            ("δ₃a₃₂ = δ₂a₂₃", d[2] * self.a(2, 1), d[1] * self.a(1, 2)),
        ]
    }

    /// `a₁₃a₂₁a₃₂ − a₃₁a₁₂a₂₃`; also the determinant of the linear system
    /// for `δ`.
    pub fn cycle_defect(&self) -> Complex64 {
        self.a(0, 2) * self.a(1, 0) * self.a(2, 1) - self.a(2, 0) * self.a(0, 1) * self.a(1, 2)
    }

    pub fn validate(&self) -> Result<()> {
        for i in 0..3 {
            for j in 0..3 {
                if i != j && (self.a(i, j).norm() - 1.0).abs() > MODULUS_TOL {
                    return Err(ShiftError::Domain(format!(
                        "|a_{{{},{}}}| = {} must equal 1",
                        i + 1,
                        j + 1,
                        self.a(i, j).norm()
                    )));
                }
            }
        }
        if let Some(j) = self.delta.iter().position(|x| x.norm() > 1.0 + MODULUS_TOL) {
            return Err(ShiftError::Domain(format!("|δ_{}| exceeds 1", j + 1)));
        }
        if self.delta.iter().all(|x| *x == zero()) {
            return Ok(());
        }
        for (label, lhs, rhs) in self.relations() {
            if (lhs - rhs).norm() > DEFAULT_COMMUTATION_TOL {
                return Err(ShiftError::Domain(format!(
                    "relation {label} fails: {} ≠ {}",
                    fmt_c(lhs),
                    fmt_c(rhs)
                )));
            }
        }
        if self.delta.iter().any(|x| *x == zero()) {
            return Err(ShiftError::Domain(
                "if one δ_j is nonzero then all of them must be nonzero".into(),
            ));
        }
        if self.cycle_defect().norm() > DEFAULT_COMMUTATION_TOL {
            return Err(ShiftError::Domain(format!(
                "relation a₁₃a₂₁a₃₂ = a₃₁a₁₂a₂₃ fails (defect {})",
                fmt_c(self.cycle_defect())
            )));
        }
        Ok(())
    }

    /// The `d = 3`, `N = 2` weight family.
    pub fn build_family(&self) -> Result<WeightFamily> {
        self.validate()?;
        let w = WeightFamily::from_fn(3, 2, |i, j| match i.degree() {
            0 => self.delta[j],
            1 => {
                let from = i.coords().iter().position(|&c| c == 1).expect("unit index");
                if from == j {
                    zero()
                } else {
                    self.a(from, j)
                }
            }
            _ => zero(),
        })?;
        w.require_commuting(DEFAULT_COMMUTATION_TOL)?;
        Ok(w)
    }

    /// The `3×3` blocks `A_j` mapping `span{e_{ε_1}, e_{ε_2}, e_{ε_3}}` to
    /// `span{e_{ε_1+ε_2}, e_{ε_1+ε_3}, e_{ε_2+ε_3}}`.
    pub fn compression_matrices(&self) -> Result<[CMatrix; 3]> {
        self.validate()?;
        if self.delta.iter().any(|x| *x != zero()) {
            return Err(ShiftError::Domain(
                "the six-dimensional reduction requires δ = 0".into(),
            ));
        }
        let pair_row = |i: usize, j: usize| match (i.min(j), i.max(j)) {
            (0, 1) => 0,
            (0, 2) => 1,
            _ => 2,
        };
        let mut mats = [CMatrix::zeros(3, 3), CMatrix::zeros(3, 3), CMatrix::zeros(3, 3)];
        for (j, m) in mats.iter_mut().enumerate() {
            for i in (0..3).filter(|&i| i != j) {
                m[(pair_row(i, j), i)] = self.a(i, j);
            }
        }
        Ok(mats)
    }

    /// `T_j` on `M` in the basis `e_{(1,0,0)}, e_{(0,1,0)}, e_{(0,0,1)},
    /// e_{(1,1,0)}, e_{(1,0,1)}, e_{(0,1,1)}`: the block matrix `[[0,0],[A_j,0]]`.
    pub fn reduced_operators(&self) -> Result<[CMatrix; 3]> {
        let a = self.compression_matrices()?;
        Ok(a.map(|aj| {
            let mut m = CMatrix::zeros(6, 6);
            m.view_mut((3, 0), (3, 3)).copy_from(&aj);
            m
        }))
    }
}

/// Basis of the reduction space `M`, in the order used by
/// [`ParrottConfig::reduced_operators`].
pub fn reduction_basis() -> [MultiIndex; 6] {
    [
        MultiIndex::new(vec![1, 0, 0]),
        MultiIndex::new(vec![0, 1, 0]),
        MultiIndex::new(vec![0, 0, 1]),
        MultiIndex::new(vec![1, 1, 0]),
        MultiIndex::new(vec![1, 0, 1]),
        MultiIndex::new(vec![0, 1, 1]),
    ]
}

fn fmt_c(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

/// `p(z) = [[z₁, z₂, 0], [z₃, 0, z₂], [0, z₃, −z₁]]`.
pub fn parrott_polynomial() -> MatrixPolynomial {
    let mut p = MatrixPolynomial::zero(3, 3);
    // (axis, [(row, col, value)]) for the coefficient of z_axis.
    type Slots = &'static [(usize, usize, f64)];
    let entries: [(usize, Slots); 3] = [
        (0, &[(0, 0, 1.0), (2, 2, -1.0)]),
        (1, &[(0, 1, 1.0), (1, 2, 1.0)]),
        (2, &[(1, 0, 1.0), (2, 1, 1.0)]),
    ];
    for (axis, slots) in entries {
        let mut c = CMatrix::zeros(3, 3);
        for &(r, col, v) in slots {
            c[(r, col)] = Complex64::new(v, 0.0);
        }
        p.add_term(MultiIndex::unit(3, axis).expect("axis < 3"), c)
            .expect("3x3 coefficient");
    }
    p
}

/// Solution set of the three linear relations for `δ` given the `a_{i,j}`.
#[derive(Clone, Debug, Serialize)]
pub struct DeltaSolution {
    /// `[re, im]` of `det L = a₁₃a₂₁a₃₂ − a₃₁a₁₂a₂₃`.
    pub determinant: [f64; 2],
    pub singular_values: Vec<f64>,
    /// Basis of the solution space; empty when `δ = 0` is the only solution.
    pub null_space: Vec<[[f64; 2]; 3]>,
    pub only_zero: bool,
}

/// Solves `L δ = 0` with `L = [[a₁₃, 0, −a₃₁], [−a₁₂, a₂₁, 0], [0, −a₂₃, a₃₂]]`.
pub fn solve_delta(config: &ParrottConfig) -> DeltaSolution {
    let a = |i: usize, j: usize| config.a[i][j];
    let l = CMatrix::from_row_slice(
        3,
        3,
        &[
            a(0, 2),
            zero(),
            -a(2, 0),
            -a(0, 1),
            a(1, 0),
            zero(),
            zero(),
            -a(1, 2),
            a(2, 1),
        ],
    );
    let svd = l.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let scale = svd.singular_values.max().max(1.0);
    let mut null_space = Vec::new();
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s <= 1e-12 * scale {
            let row = v_t.row(k);
            null_space.push([0, 1, 2].map(|c| {
                let z = row[c].conj();
                [z.re, z.im]
            }));
        }
    }
    let det = config.cycle_defect();
    DeltaSolution {
        determinant: [det.re, det.im],
        singular_values: svd.singular_values.iter().copied().collect(),
        only_zero: null_space.is_empty(),
        null_space,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub rows: [usize; 3],
    pub cols: [usize; 3],
    pub submatrix: MatrixJson,
    pub norm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RefutationReport {
    /// `‖p(A₁,A₂,A₃)‖` from a full SVD.
    pub norm_compressed: f64,
    /// `‖p(T₁,T₂,T₃)‖` on the whole truncated shift (`dim H₃ = 20`).
    pub norm_full_shift: f64,
    pub witness: Witness,
    pub sup: SupNorm,
    pub ratio: f64,
    pub verdict: Verdict,
    pub conclusion: String,
}

fn witness(pa: &CMatrix) -> Witness {
    let sub = CMatrix::from_fn(3, 3, |i, j| pa[(WITNESS_ROWS[i] - 1, WITNESS_COLS[j] - 1)]);
    Witness {
        rows: WITNESS_ROWS,
        cols: WITNESS_COLS,
        norm: op_norm(&sub).expect("finite"),
        submatrix: MatrixJson::from(&sub),
    }
}

/// Evaluates the Parrott polynomial on the counterexample and compares with
/// its sup-norm over `𝕋³`.
pub fn refutation_report(grid_per_axis: usize, refine: bool) -> Result<RefutationReport> {
    let config = ParrottConfig::counterexample();
    let p = parrott_polynomial();
    let a = config.compression_matrices()?;
    let pa = p.eval_at_matrices(&a)?;
    let norm_compressed = op_norm(&pa)?;
    let t = TruncatedShift::build(&config.build_family()?)?;
    let norm_full_shift = op_norm(&p.eval_at_tuple(&t)?)?;
    let sup = sup_norm_torus(&p, grid_per_axis, refine)?;
    let verdict = if norm_full_shift <= sup.value * (1.0 + VN_SLACK) + VN_SLACK {
        Verdict::Holds
    } else if norm_full_shift > sup.upper() {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    };
    let conclusion = match verdict {
        Verdict::Violated => format!(
            "matrix von Neumann inequality fails ({norm_full_shift:.9} > {:.9} + {:.3e}); \
             T₁,T₂,T₃ have no commuting unitary dilation",
            sup.value, sup.uncertainty
        ),
        _ => "no violation established at this grid resolution".to_string(),
    };
    Ok(RefutationReport {
        norm_compressed,
        norm_full_shift,
        witness: witness(&pa),
        ratio: norm_full_shift / sup.value,
        sup,
        verdict,
        conclusion,
    })
}

/// The von Neumann comparison for the Parrott polynomial on an arbitrary
/// configuration (e.g. the dilatable all-ones case).
pub fn config_vn_report(config: &ParrottConfig, grid_per_axis: usize, refine: bool) -> Result<VnReport> {
    let t = TruncatedShift::build(&config.build_family()?)?;
    crate::vncheck::vn_ratio(
        &parrott_polynomial(),
        &t,
        crate::vncheck::SupOptions {
            grid_per_axis,
            refine,
            max_points: 0,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(rows: [[f64; 3]; 3]) -> CMatrix {
        CMatrix::from_fn(3, 3, |i, j| Complex64::new(rows[i][j], 0.0))
    }

    #[test]
    fn counterexample_matrices() {
        let [a1, a2, a3] = ParrottConfig::counterexample().compression_matrices().unwrap();
        assert_eq!(a1, real([[0.0, -1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]]));
        assert_eq!(a2, real([[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]]));
        assert_eq!(a3, real([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]));
        for a in [a1, a2, a3] {
            assert!((op_norm(&a).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn all_ones_matrices() {
        let [a1, _, _] = ParrottConfig::all_ones([zero(); 3]).compression_matrices().unwrap();
        assert_eq!(a1, real([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]]));
    }

    #[test]
    fn perturbed_delta_rejected() {
        let eps = Complex64::new(0.1, 0.0);
        let err = ParrottConfig::counterexample().with_delta([eps; 3]).build_family().unwrap_err();
        match err {
            ShiftError::Domain(msg) => assert!(msg.contains("δ₂a₂₁ = δ₁a₁₂"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(ParrottConfig::all_ones([Complex64::new(0.5, 0.0); 3]).build_family().is_ok());
        let partial = ParrottConfig::all_ones([Complex64::new(0.5, 0.0), zero(), zero()]);
        assert!(partial.build_family().is_err());
    }

    #[test]
    fn compression_requires_zero_delta() {
        let c = ParrottConfig::all_ones([Complex64::new(0.5, 0.0); 3]);
        assert!(matches!(c.compression_matrices(), Err(ShiftError::Domain(_))));
    }

    #[test]
    fn non_unimodular_a_rejected() {
        let mut c = ParrottConfig::counterexample();
        c.a[0][1] = Complex64::new(0.5, 0.0);
        assert!(c.validate().is_err());
    }

    #[test]
    fn polynomial_shape() {
        let p = parrott_polynomial();
        assert_eq!(p.degree(), Some(1));
        let slots: usize = p
            .nonzero_terms()
            .map(|(_, c)| c.iter().filter(|z| **z != zero()).count())
            .sum();
        assert_eq!(slots, 6);
        assert!(p.eval_at_point(&[zero(); 3]).unwrap().iter().all(|z| *z == zero()));
    }
}
