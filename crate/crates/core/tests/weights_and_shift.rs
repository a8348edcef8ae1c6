use num_complex::Complex64;
use proptest::prelude::*;

use shiftlab_core::multiindex::BasisEnumeration;
use shiftlab_core::{BetaFamily, CMatrix, MatrixPolynomial, MultiIndex, Profile, TruncatedShift, WeightFamily};

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Every monotone lattice path from 0 to `target`, as axis sequences.
fn all_paths(target: &MultiIndex) -> Vec<Vec<usize>> {
    if target.is_zero() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (pred, j) in target.predecessors() {
        for mut p in all_paths(&pred) {
            p.push(j);
            out.push(p);
        }
    }
    out
}

fn path_product(w: &WeightFamily, path: &[usize]) -> f64 {
    let mut at = MultiIndex::zero(w.d());
    let mut acc = 1.0;
    for &j in path {
        acc *= w.get(&at, j).unwrap().norm();
        at = at.increment(j).unwrap();
    }
    acc
}

#[test]
fn drury_arveson_weights() {
    // β_I = sqrt(I! / |I|!), expected w_{I,j} = sqrt((i_j + 1)/(|I| + 1)).
    let beta = BetaFamily::from_fn(2, 2, |i| {
        let num: f64 = i.coords().iter().map(|&c| factorial(c)).product();
        (num / factorial(i.degree())).sqrt()
    })
    .unwrap();
    let w = WeightFamily::from_beta(&beta).unwrap();
    for (i, j, x) in w.entries() {
        let want = ((i.coords()[j] + 1) as f64 / (i.degree() + 1) as f64).sqrt();
        assert!((x.re - want).abs() < 1e-15 && x.im == 0.0, "{i:?} {j}");
    }
    assert!(w.validate_commuting(0.0).max_residual < 1e-15);
}

#[test]
fn beta_path_independence_by_enumeration() {
    for d in [2, 3] {
        for n in 0..=3 {
            for seed in 0..5 {
                let w = WeightFamily::random_contractive(d, n, seed, Profile::ComplexNonzero).unwrap();
                let beta = w.to_beta().unwrap();
                for index in BasisEnumeration::new(d, n + 1).unwrap().iter() {
                    let b = beta.get(index).unwrap();
                    for path in all_paths(index) {
                        assert!((path_product(&w, &path) - b).abs() < 1e-12);
                    }
                }
            }
        }
    }
}

#[test]
fn compression_is_co_invariant() {
    for seed in 0..10 {
        let w = WeightFamily::random_contractive(2, 3, seed, Profile::ComplexNonzero).unwrap();
        let t = TruncatedShift::build(&w).unwrap();
        let small = t.compress(2).unwrap();
        let p = MatrixPolynomial::random(2, 1, 3, 100 + seed).unwrap();
        let full = p.eval_at_tuple(&t).unwrap();
        // P restricted to H_3 inside H_4: the first dim(H_3) basis vectors.
        let k = small.dim();
        let projected = full.view((0, 0), (k, k)).clone_owned();
        let direct = p.eval_at_tuple(&small).unwrap();
        assert!(shiftlab_core::op_norm(&(projected - direct)).unwrap() <= 1e-12);
    }
}

#[test]
fn compress_single_variable_levels() {
    let (a, b, c) = (0.3, 0.6, 0.8);
    let w = WeightFamily::from_fn(1, 2, |i, _| Complex64::new([a, b, c][i.degree()], 0.0)).unwrap();
    let t = TruncatedShift::build(&w).unwrap();
    let m1 = t.compress(1).unwrap();
    assert_eq!(m1.weights().values(), &[Complex64::new(a, 0.0), Complex64::new(b, 0.0)]);
    let m0 = t.compress(0).unwrap();
    assert_eq!(m0.weights().values(), &[Complex64::new(a, 0.0)]);
}

#[test]
fn monomial_matches_dense_products_in_any_order() {
    let w = WeightFamily::random_contractive(3, 3, 4, Profile::ComplexNonzero).unwrap();
    let t = TruncatedShift::build(&w).unwrap();
    let k = MultiIndex::new(vec![2, 0, 1]);
    let id = CMatrix::identity(t.dim(), t.dim());
    let m = t.matrices();
    let forward = &m[0] * &m[0] * &m[2];
    let backward = &m[2] * &m[0] * &m[0];
    let mixed = &m[0] * &m[2] * &m[0] * &id;
    let structured = t.apply_monomial(&k).unwrap();
    for other in [&forward, &backward, &mixed] {
        assert!(shiftlab_core::op_norm(&(other - &structured)).unwrap() < 1e-12);
    }
}

#[test]
fn monomial_on_vacuum_has_norm_beta() {
    let w = WeightFamily::random_contractive(2, 3, 6, Profile::ComplexNonzero).unwrap();
    let beta = w.to_beta().unwrap();
    let t = TruncatedShift::build(&w).unwrap();
    let mut e0 = nalgebra::DVector::zeros(t.dim());
    e0[0] = Complex64::new(1.0, 0.0);
    for k in t.basis().iter() {
        let v = t.apply_monomial(k).unwrap() * &e0;
        assert!((v.norm() - beta.get(k).unwrap()).abs() < 1e-12);
        assert!((t.apply_monomial_to(k, &e0) - v).norm() < 1e-14);
    }
}

fn family_strategy() -> impl Strategy<Value = (usize, usize, u64, bool)> {
    (1usize..=3, 0usize..=3, any::<u64>(), any::<bool>())
}

fn make((d, n, seed, complex): (usize, usize, u64, bool)) -> WeightFamily {
    let profile = if complex { Profile::ComplexNonzero } else { Profile::Positive };
    WeightFamily::random_contractive(d, n, seed, profile).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn beta_round_trip_on_positive_families(fam in family_strategy()) {
        let w = make((fam.0, fam.1, fam.2, false));
        let back = WeightFamily::from_beta(&w.to_beta().unwrap()).unwrap();
        for (x, y) in w.values().iter().zip(back.values()) {
            prop_assert!((x - y).norm() <= 1e-12);
        }
        prop_assert!(back.validate_commuting(0.0).max_residual <= 1e-14);
    }

    #[test]
    fn shift_invariants(fam in family_strategy()) {
        let w = make(fam);
        let t = TruncatedShift::build(&w).unwrap();
        prop_assert!(t.commutator_norm() <= 1e-12);
        // Nilpotency: (T_1 + … + T_d)^{N+2} = 0.
        let sum = t.matrices().iter().fold(CMatrix::zeros(t.dim(), t.dim()), |acc, m| acc + m);
        let mut power = CMatrix::identity(t.dim(), t.dim());
        for _ in 0..(t.n() + 2) {
            power = &sum * power;
        }
        prop_assert!(power.iter().all(|z| z.norm() < 1e-14));
        // Contractive family ⇔ every ‖T_j‖ ≤ 1.
        for m in t.matrices() {
            prop_assert!(shiftlab_core::op_norm(m).unwrap() <= 1.0 + 1e-12);
        }
        // Strictly block-subdiagonal in graded order.
        for m in t.matrices() {
            for col in 0..t.dim() {
                let deg = t.basis().unrank(col).unwrap().degree();
                for row in 0..t.dim() {
                    if m[(row, col)].norm() > 0.0 {
                        prop_assert_eq!(t.basis().unrank(row).unwrap().degree(), deg + 1);
                    }
                }
            }
        }
    }

    #[test]
    fn evaluation_is_multiplicative(fam in family_strategy(), s1 in any::<u64>(), s2 in any::<u64>()) {
        let w = make(fam);
        let t = TruncatedShift::build(&w).unwrap();
        let p = MatrixPolynomial::random(w.d(), 1, 2, s1).unwrap();
        let q = MatrixPolynomial::random(w.d(), 1, 2, s2).unwrap();
        let lhs = p.mul(&q).unwrap().eval_at_tuple(&t).unwrap();
        let rhs = p.eval_at_tuple(&t).unwrap() * q.eval_at_tuple(&t).unwrap();
        prop_assert!(shiftlab_core::op_norm(&(lhs - rhs)).unwrap() <= 1e-11);
    }
}

#[test]
fn non_contractive_axis_has_norm_above_one() {
    let w = WeightFamily::from_fn(1, 1, |i, _| Complex64::new(if i.is_zero() { 1.5 } else { 0.5 }, 0.0)).unwrap();
    assert!(!w.is_contractive());
    let t = TruncatedShift::build(&w).unwrap();
    assert!((shiftlab_core::op_norm(t.matrix(0)).unwrap() - 1.5).abs() < 1e-14);
}
