use expint_core::heat::{heat_apply_1d, TestFunction};
use expint_core::martingale::{leaf_terms, quadratic_variation, random_martingale, Law};
use expint_core::special::{bound_rhs, g_eval, inv_k_prime, kernel_eval, m_eval, n_eval, n_sup_eval};
use expint_core::verify::{four_point_margin, BellmanFunction, VerificationReport};
use proptest::prelude::*;

fn law() -> impl Strategy<Value = Law> {
    prop_oneof![Just(Law::LognormalLeaves), Just(Law::BoundedRatio)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn m_is_log_homogeneous(x in 0.05f64..20.0, ratio in 0.0f64..8.0, lambda in 0.01f64..100.0) {
        let y = ratio * x;
        let d = m_eval(lambda * x, lambda * y).unwrap() - m_eval(x, y).unwrap();
        prop_assert!((d - lambda.ln()).abs() < 1e-9 * (1.0 + m_eval(x, y).unwrap().abs()));
    }

    #[test]
    fn m_boundary_is_log(x in 1e-3f64..1e3) {
        prop_assert_eq!(m_eval(x, 0.0).unwrap(), x.ln());
    }

    #[test]
    fn bound_rhs_scaling(x in 0.0f64..10.0, r in 0.01f64..100.0) {
        let a = bound_rhs(r.sqrt() * x, r).unwrap();
        let b = bound_rhs(x, 1.0).unwrap();
        prop_assert!((a / b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_of_k_prime(u in -13.0f64..7.0) {
        let u = u.exp();
        let t = inv_k_prime(u).unwrap();
        let back = kernel_eval(t).unwrap().k_prime;
        prop_assert!((back - u).abs() <= 1e-11 * u.max(1.0));
    }

    #[test]
    fn g_is_decreasing(s in -6.0f64..6.0, gap in 1e-3f64..1.0) {
        let (a, b) = (s.exp(), (s + gap).exp());
        prop_assert!(g_eval(a).unwrap() > g_eval(b).unwrap());
    }

    #[test]
    fn n_dominates_log_p(p in 1e-2f64..1e2, t in 0.0f64..1e2) {
        prop_assert!(n_eval(p, t).unwrap() >= p.ln());
        prop_assert!(n_sup_eval(p, t).unwrap() >= p.ln());
    }

    #[test]
    fn four_point_zero_at_zero_gap(p in 1e-3f64..1e3, t in 0.0f64..1e3) {
        prop_assert_eq!(four_point_margin(BellmanFunction::N, p, 0.0, t), 0.0);
        prop_assert_eq!(four_point_margin(BellmanFunction::NSup, p, 0.0, t), 0.0);
    }

    #[test]
    fn four_point_nonnegative(p in 1e-2f64..1e2, r in 0.0f64..0.999, t in 0.0f64..1e2) {
        let a = r * p;
        prop_assert!(four_point_margin(BellmanFunction::N, p, a, t) >= -1e-9);
        prop_assert!(four_point_margin(BellmanFunction::NSup, p, a, t) >= -1e-9);
    }

    #[test]
    fn report_pass_iff_within_tolerance(margins in prop::collection::vec(-1.0f64..1.0, 1..20), tol in 0.0f64..0.5) {
        let mut r = VerificationReport::new("p", tol);
        for (i, m) in margins.iter().enumerate() {
            r.observe(*m, &[i as f64]);
        }
        let r = r.finish(std::time::Duration::ZERO);
        let min = margins.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(r.min_margin, min);
        prop_assert_eq!(r.passed, min >= -tol);
        prop_assert_eq!(r.worst_witness.len(), 1);
    }

    #[test]
    fn martingale_tree_invariants(depth in 0usize..9, seed in any::<u64>(), law in law()) {
        let m = random_martingale(depth, seed, law).unwrap();
        for n in 0..depth {
            let c = m.level(n + 1);
            for (i, &p) in m.level(n).iter().enumerate() {
                prop_assert_eq!(p, 0.5 * (c[2 * i] + c[2 * i + 1]));
            }
        }
        let q = quadratic_variation(&m);
        prop_assert!(q.leaves().iter().all(|v| *v >= 0.0));
        let n = m.leaves().len() as f64;
        let e2: f64 = m.leaves().iter().map(|v| v * v).sum::<f64>() / n;
        let eq: f64 = q.leaves().iter().sum::<f64>() / n;
        prop_assert!((e2 - eq - m.root() * m.root()).abs() <= 1e-12 * e2);
    }

    #[test]
    fn martingale_checks_are_scale_invariant(depth in 1usize..8, seed in any::<u64>(), law in law(), lambda in -5.0f64..5.0) {
        let m = random_martingale(depth, seed, law).unwrap();
        let s = m.scaled(lambda.exp()).unwrap();
        let (a, b) = (leaf_terms(&m), leaf_terms(&s));
        prop_assert!((a.lhs - b.lhs).abs() < 1e-12);
        prop_assert!((a.g_term - b.g_term).abs() < 1e-12);
        prop_assert!((a.log_term - b.log_term).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn heat_semigroup(seed in 0u64..1000, s1 in 0.0f64..1.0, s2 in 0.0f64..1.0, y in -2.0f64..2.0) {
        let f = TestFunction::random_trig_poly(seed);
        let direct = heat_apply_1d(&f, s1 + s2, y, 128).unwrap();
        let rule = expint_core::quadrature::Rule::gauss_hermite_normal(128);
        let nested: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(z, w)| w * heat_apply_1d(&f, s1, y + s2.sqrt() * z, 128).unwrap())
            .sum();
        prop_assert!((direct - nested).abs() < 1e-10);
    }
}
