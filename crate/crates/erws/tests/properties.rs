//! Property-based invariants over random parameters, seeds, and horizons.

use std::collections::HashSet;

use proptest::prelude::*;

use erws::core_model::{ModelParams, Regime};
use erws::exact_moments::{covariance_suite, moment_table, partial_sum_identity_check};
use erws::oracle::{exact_joint_law, exact_moment, exact_range_law};
use erws::range_analysis::range_of_sequence;
use erws::simulator::{run, run_path, TrajectorySummary};
use erws::special::c;

/// Admissible (a, b, s) triples with b bounded away from 0.
fn abs_strategy() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.05f64..=1.0, -1.0f64..=1.0, 0.0f64..=1.0).prop_map(|(b, t, s)| (t * b, b, s))
}

proptest! {
    #[test]
    fn params_round_trip((a, b, s) in abs_strategy()) {
        let m = ModelParams::from_ab(a, b, s).unwrap();
        let m2 = ModelParams::new(m.p(), m.q(), m.r(), m.s()).unwrap();
        prop_assert!((m.a() - m2.a()).abs() < 1e-14);
        prop_assert!((m.b() - m2.b()).abs() < 1e-14);
    }

    #[test]
    fn classify_monotone_in_a(b in 0.05f64..=1.0, t1 in -1.0f64..=1.0, t2 in -1.0f64..=1.0) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let r1 = ModelParams::from_ab(lo * b, b, 0.5).unwrap().classify();
        let r2 = ModelParams::from_ab(hi * b, b, 0.5).unwrap().classify();
        // Subcritical < Critical < Supercritical in derived Ord
        prop_assert!(r1 <= r2);
        prop_assert!(ModelParams::from_ab(b / 2.0, b, 0.5).unwrap().classify() == Regime::Critical);
    }

    #[test]
    fn summary_matches_full_path((a, b, s) in abs_strategy(), seed in 0u64..1000, n in 1u64..300) {
        let m = ModelParams::from_ab(a, b, s).unwrap();
        let path = run_path(&m, n, seed).unwrap();
        let direct = run(&m, n, seed);
        let rebuilt = TrajectorySummary::from_path(&path, seed);
        prop_assert_eq!(rebuilt.s_n, direct.s_n);
        prop_assert_eq!(rebuilt.sigma_n, direct.sigma_n);
        prop_assert_eq!(rebuilt.range_n, direct.range_n);
        prop_assert_eq!(rebuilt.returns_to_zero, direct.returns_to_zero);
        prop_assert_eq!(rebuilt.last_zero, direct.last_zero);
    }

    #[test]
    fn interval_identity_matches_distinct_count((a, b, s) in abs_strategy(), seed in 0u64..1000) {
        let m = ModelParams::from_ab(a, b, s).unwrap();
        let path = run_path(&m, 120, seed).unwrap();
        let mut xs = vec![0i64];
        for &inc in &path {
            xs.push(xs.last().unwrap() + i64::from(inc));
        }
        let rs = range_of_sequence(&xs).unwrap();
        let mut seen = HashSet::new();
        for (i, &x) in xs.iter().enumerate() {
            seen.insert(x);
            prop_assert_eq!(rs[i], seen.len() as u64);
        }
    }

    #[test]
    fn joint_law_normalizes_and_bounds((a, b, s) in abs_strategy(), n in 1u64..=10) {
        let m = ModelParams::from_ab(a, b, s).unwrap();
        let law = exact_joint_law(&m, n).unwrap();
        prop_assert!((law.total() - 1.0).abs() < 1e-12);
        for (np, nm, p) in law.entries() {
            prop_assert!(p > 0.0 && p <= 1.0);
            prop_assert!(np + nm >= 1 && np + nm <= n);
        }
    }

    #[test]
    fn range_law_mass_and_support((a, b, s) in abs_strategy(), n in 1u64..=9) {
        let m = ModelParams::from_ab(a, b, s).unwrap();
        let law = exact_range_law(&m, n).unwrap();
        let total: f64 = law.values().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for &r in law.keys() {
            prop_assert!(r >= 2 && r <= n + 1);
        }
    }

    #[test]
    fn moment_inequalities((a, b, s) in abs_strategy(), n in 1u64..=2000) {
        let m = ModelParams::from_ab(a, b, s).unwrap();
        let t = moment_table(&m, n);
        let cov = covariance_suite(&t);
        // Jensen / Cauchy-Schwarz within numerical slack
        prop_assert!(cov.var_s >= -1e-9 * t.e_s2.abs());
        prop_assert!(cov.var_sigma >= -1e-9 * t.e_sigma2.abs());
        prop_assert!(cov.var_s2 >= -1e-9 * t.e_s4.abs());
        prop_assert!(t.e_s2 <= t.e_s4.sqrt() * 1.0000001);
        // S_n^2 <= Sigma_n^2 pathwise, so the moments are ordered
        prop_assert!(t.e_s2 <= t.e_sigma2 + 1e-9 * t.e_sigma2);
        prop_assert!(t.e_s.abs() <= t.e_sigma + 1e-12);
    }

    #[test]
    fn engine_matches_oracle_at_random_points((a, b, s) in abs_strategy(), n in 1u64..=10) {
        let m = ModelParams::from_ab(a, b, s).unwrap();
        let law = exact_joint_law(&m, n).unwrap();
        let t = moment_table(&m, n);
        prop_assert!((t.e_s2 - exact_moment(&law, 2, 0)).abs() < 1e-11 * t.e_s2.max(1.0));
        prop_assert!((t.e_s4 - exact_moment(&law, 4, 0)).abs() < 1e-11 * t.e_s4.max(1.0));
    }

    #[test]
    fn product_coefficient_ratio_identity(x in -0.9f64..3.0, n in 2u64..=500) {
        // c_{n+1}(x)/c_n(x) = 1 + x/n by definition of the product
        let ratio = c(n + 1, x) / c(n, x);
        prop_assert!((ratio - (1.0 + x / n as f64)).abs() < 1e-12 * ratio.abs().max(1.0));
    }

    #[test]
    fn summation_identity_random_args(x in -0.9f64..2.0, y in -0.9f64..2.0, n in 2u64..=2000) {
        prop_assume!((x - y).abs() > 1e-6);
        let resid = partial_sum_identity_check(x, y, n);
        prop_assert!(resid < 1e-9, "residual {resid}");
    }

    #[test]
    fn trajectories_reproducible((a, b, s) in abs_strategy(), seed in 0u64..500, n in 1u64..500) {
        let m = ModelParams::from_ab(a, b, s).unwrap();
        prop_assert_eq!(run(&m, n, seed), run(&m, n, seed));
    }
}
