use num_complex::Complex64;
use proptest::prelude::*;

use shiftlab_core::boundary::{classify, push_to_boundary, Functional};
use shiftlab_core::dilation::brehmer_defect;
use shiftlab_core::normalize::{gauge_norm_invariance_check, phase_normalize};
use shiftlab_core::parrott::ParrottConfig;
use shiftlab_core::{MatrixPolynomial, MultiIndex, Profile, ShiftError, TruncatedShift, WeightFamily};

fn half(n: usize) -> WeightFamily {
    WeightFamily::from_fn(2, n, |i, _| Complex64::new(if i.is_zero() { 0.5 } else { 1.0 }, 0.0)).unwrap()
}

#[test]
fn counterexample_cannot_be_normalized() {
    let w = ParrottConfig::counterexample().build_family().unwrap();
    assert!(matches!(phase_normalize(&w), Err(ShiftError::Domain(_))));
    assert!(matches!(push_to_boundary(&w, None, 16), Err(ShiftError::Domain(_))));
}

#[test]
fn brehmer_spectrum_is_gauge_invariant() {
    for seed in 0..10 {
        let w = WeightFamily::random_contractive(3, 2, seed, Profile::ComplexNonzero).unwrap();
        let norm = phase_normalize(&w).unwrap();
        let a = TruncatedShift::build(&w).unwrap();
        let b = TruncatedShift::build(&norm.modulus).unwrap();
        for s in [&[0usize][..], &[0, 1], &[1, 2], &[0, 1, 2]] {
            let ea = brehmer_defect(&a, s).unwrap().eigenvalues;
            let eb = brehmer_defect(&b, s).unwrap().eigenvalues;
            for (x, y) in ea.iter().zip(&eb) {
                assert!((x - y).abs() < 1e-10);
            }
        }
        for j in 0..3 {
            assert!(brehmer_defect(&a, &[j]).unwrap().min_eigenvalue >= -1e-12);
        }
    }
}

fn unit_vec(len: usize, seed: u64) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..len)
        .map(|k| {
            let x = (seed as f64 + 1.0) * (k as f64 + 0.5);
            Complex64::new(x.sin(), (1.7 * x).cos())
        })
        .collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

#[test]
fn half_example_push_is_monotone() {
    let w = half(1);
    let t = TruncatedShift::build(&w).unwrap();
    let p = MatrixPolynomial::scalar(2, [(MultiIndex::new(vec![1, 1]), Complex64::new(1.0, 0.0))]).unwrap();
    let f = Functional::new(p, unit_vec(t.dim(), 1), unit_vec(t.dim(), 2)).unwrap();
    let trace = push_to_boundary(&w, Some(&f), 720).unwrap();
    assert_eq!(trace.steps.len(), 1);
    assert_eq!(trace.steps[0].r, 2.0);
    assert!(trace.final_family().is_unimodular());
    assert!(trace.f_final >= trace.f_initial - trace.total_slack);
}

#[test]
fn doubling_circle_samples_never_hurts_first_step() {
    let w = WeightFamily::random_contractive(2, 2, 31, Profile::ComplexNonzero).unwrap();
    let t = TruncatedShift::build(&w).unwrap();
    let p = MatrixPolynomial::random(2, 1, 3, 5).unwrap();
    let f = Functional::new(p, unit_vec(t.dim(), 3), unit_vec(t.dim(), 4)).unwrap();
    let mut last = f64::NEG_INFINITY;
    for m in [8, 16, 32, 64, 128, 256] {
        let tr = push_to_boundary(&w, Some(&f), m).unwrap();
        let first = tr.steps[0].f_after;
        assert!(first >= last - 1e-15);
        last = first;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gauge_conjugates_entrywise(d in 1usize..=3, n in 0usize..=3, seed in any::<u64>()) {
        let w = WeightFamily::random_contractive(d, n, seed, Profile::ComplexNonzero).unwrap();
        let norm = phase_normalize(&w).unwrap();
        prop_assert!(norm.path_residual <= 1e-12);
        prop_assert!(norm.gauge.iter().all(|l| (l.norm() - 1.0).abs() < 1e-14));
        let t = TruncatedShift::build(&w).unwrap();
        prop_assert!(norm.conjugation_residual(&t).unwrap() <= 1e-12);
        let p = MatrixPolynomial::random(d, 2, 3, seed ^ 0xabc).unwrap();
        prop_assert!(gauge_norm_invariance_check(&w, &p).unwrap() <= 1e-10);
    }

    #[test]
    fn classification_observations(d in 1usize..=3, n in 0usize..=3, seed in any::<u64>()) {
        let w = WeightFamily::random_contractive(d, n, seed, Profile::ComplexNonzero).unwrap();
        let s = classify(&w).unwrap();
        let basis = s.basis().clone();
        for i in basis.iter() {
            for j in basis.iter() {
                // Good indices form a lower set.
                if s.is_good(i).unwrap() && j.leq(i).unwrap() {
                    prop_assert!(s.is_good(j).unwrap());
                }
            }
        }
        for (i, j, x) in w.entries() {
            let up = i.increment(j).unwrap();
            if x.norm() < 1.0 - 1e-12 {
                prop_assert!(!s.is_good(&up).unwrap());
            }
            if s.is_good(i).unwrap() && !s.is_good(&up).unwrap() {
                prop_assert!(x.norm() < 1.0);
                prop_assert!(s.is_scalable(i, j));
            }
        }
        if let Some(r) = s.radius() {
            prop_assert!(r > 1.0);
            for k in 0..16 {
                let t = Complex64::from_polar(r * (k as f64 / 15.0), 0.4 * k as f64);
                let next = s.scale_step(t).unwrap();
                prop_assert!(next.validate_commuting(0.0).max_residual <= 1e-13);
                prop_assert!(next.is_contractive());
            }
        } else {
            prop_assert!(w.is_unimodular());
        }
    }
}
