use amfw_core::amfw::Tableau;
use amfw_core::stability::{check_theorem1_condition, eval_r, eval_r_real, SAMPLE_LOG10_RANGE};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

fn methods() -> Vec<Tableau> {
    vec![Tableau::amfw_hv(), Tableau::amfw_three_eighths(), Tableau::amfw_three_eighths_printed()]
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-20.0f64..5.0, -20.0f64..20.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-12 * a.norm().max(1.0)
}

proptest! {
    #[test]
    fn conjugate_arguments_give_conjugate_values(z in prop::collection::vec(complex(), 1..=3)) {
        for tab in methods() {
            let conj: Vec<Complex64> = z.iter().map(|v| v.conj()).collect();
            if let (Ok(r), Ok(rc)) = (eval_r(&tab, &z), eval_r(&tab, &conj)) {
                prop_assert!(close(r.conj(), rc));
            }
        }
    }

    #[test]
    fn permutation_invariance(z in prop::collection::vec(complex(), 3)) {
        for tab in methods() {
            let Ok(r) = eval_r(&tab, &z) else { continue };
            for p in [[1, 0, 2], [2, 1, 0], [1, 2, 0]] {
                let zp: Vec<Complex64> = p.iter().map(|&i| z[i]).collect();
                prop_assert!(close(r, eval_r(&tab, &zp).unwrap()));
            }
        }
    }
}

#[test]
fn first_order_consistency() {
    for tab in methods() {
        let h = 1e-6;
        let d = (eval_r_real(&tab, &[h]).unwrap() - eval_r_real(&tab, &[-h]).unwrap()) / (2.0 * h);
        assert!((d - 1.0).abs() < 1e-8, "{}: {d}", tab.name());
    }
}

#[test]
fn stiff_limit_matches_leading_terms() {
    // as z → -∞ with d = 1: R → 1 - bᵀ(θI + A)^{-1} 1
    for tab in methods() {
        let s = tab.stages();
        let m = DMatrix::from_fn(s, s, |i, j| tab.a()[i][j] + if i == j { tab.theta() } else { 0.0 });
        let y = m.lu().solve(&DVector::from_element(s, 1.0)).unwrap();
        let limit = 1.0 - tab.b().iter().zip(y.iter()).map(|(b, v)| b * v).sum::<f64>();
        let r = eval_r_real(&tab, &[-1e12]).unwrap();
        assert!((r - limit).abs() < 1e-9, "{}: {r} vs {limit}", tab.name());
    }
    let r = eval_r_real(&Tableau::amfw_hv(), &[-1e12]).unwrap();
    assert!((r - (1.0 - 3f64.sqrt())).abs() < 1e-9);
}

#[test]
fn near_origin_both_bounds_are_tight() {
    for tab in methods() {
        for d in 1..=3 {
            let r = eval_r_real(&tab, &vec![-1e-10; d]).unwrap();
            assert!((r - 1.0).abs() < 1e-8);
        }
    }
}

#[test]
fn hv_lower_bound_in_three_dimensions() {
    let rep = check_theorem1_condition(&Tableau::amfw_hv(), 3, 100_000, 0.1, 11).unwrap();
    assert_eq!(rep.samples.len(), 100_000);
    assert!(rep.lower_bound_holds(), "min R + 1 = {}", rep.min_lower_margin);
    assert!(rep.condition_holds(), "C_max = {}", rep.c_max);
    let (lo, hi) = SAMPLE_LOG10_RANGE;
    for s in &rep.samples {
        assert!(s.x.iter().all(|&x| -x >= 10f64.powf(lo) * (1.0 - 1e-12) && -x <= 10f64.powf(hi) * (1.0 + 1e-12)));
    }
}

#[test]
fn corrected_three_eighths_lower_bound() {
    for d in 1..=3 {
        let rep = check_theorem1_condition(&Tableau::amfw_three_eighths(), d, 20_000, 0.1, 5).unwrap();
        assert!(rep.lower_bound_holds(), "d={d}: min R + 1 = {}", rep.min_lower_margin);
    }
}

#[test]
fn doubled_weights_are_flagged() {
    for tab in [Tableau::amfw_hv(), Tableau::amfw_three_eighths()] {
        let bad = tab.with_weights(tab.b().iter().map(|b| 2.0 * b).collect()).unwrap();
        let s: f64 = bad.b().iter().zip(bad.rho()).map(|(b, r)| b * r).sum();
        assert!((s - 2.0).abs() < 1e-14);
        let rep = check_theorem1_condition(&bad, 1, 2000, 0.1, 1).unwrap();
        assert!(!rep.condition_holds());
        assert!(!rep.lower_bound_holds());
        assert!(rep.satisfied_fraction < 1.0);
    }
}

#[test]
fn reports_are_reproducible() {
    let a = check_theorem1_condition(&Tableau::amfw_hv(), 2, 3000, 0.1, 42).unwrap();
    let b = check_theorem1_condition(&Tableau::amfw_hv(), 2, 3000, 0.1, 42).unwrap();
    assert_eq!(a, b);
}
