use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sharp_poincare::geometry::{ball_volume, inverse_volume, SpaceParams};
use sharp_poincare::rearrangement::{decreasing_rearrangement, distribution_function, hardy_check, maximal_function};
use sharp_poincare::selfcheck::random_profile;
use sharp_poincare::variational::{constant, lp_norm_volume, PoincareParams};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn volume_round_trip(n in 2u32..=6, rho in 1e-3f64..40.0) {
        let sp = SpaceParams::new(n).unwrap();
        let s = ball_volume(rho, &sp).unwrap();
        let back = inverse_volume(s, &sp).unwrap();
        prop_assert!((back - rho).abs() <= 1e-10 * rho + 1e-14);
    }

    #[test]
    fn volume_is_increasing(n in 2u32..=6, rho in 1e-3f64..30.0, dr in 1e-3f64..1.0) {
        let sp = SpaceParams::new(n).unwrap();
        prop_assert!(ball_volume(rho + dr, &sp).unwrap() > ball_volume(rho, &sp).unwrap());
    }

    #[test]
    fn constant_steps_by_order(n in 2u32..=8, m in 1u32..=6, p in 1.05f64..6.0) {
        let k = (n - 1) as f64;
        let q = p / (p - 1.0);
        let two_steps = constant(n, m + 2, p).unwrap() / constant(n, m, p).unwrap();
        assert_relative_eq!(two_steps, p * q / (k * k), max_relative = 1e-12);
        let c1 = constant(n, 1, p).unwrap();
        assert_relative_eq!(c1, p / k, max_relative = 1e-14);
    }

    #[test]
    fn constant_symmetric_in_even_orders(n in 2u32..=8, half in 1u32..=3, p in 1.05f64..6.0) {
        let q = p / (p - 1.0);
        let m = 2 * half;
        assert_relative_eq!(constant(n, m, p).unwrap(), constant(n, m, q).unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn corollary_constant_at_full_order_is_one(n in 2u32..=6, m in 1u32..=5, p in 1.1f64..4.0) {
        let pp = PoincareParams::new(n, m, p).unwrap();
        assert_relative_eq!(pp.corollary_constant(m).unwrap(), 1.0);
        assert_relative_eq!(pp.corollary_constant(0).unwrap(), pp.constant(), max_relative = 1e-14);
    }

    #[test]
    fn rearrangement_is_equimeasurable(seed in any::<u64>(), t in 0.05f64..3.0) {
        let v = random_profile(&mut ChaCha8Rng::seed_from_u64(seed), false);
        let vs = decreasing_rearrangement(&v).unwrap();
        let (a, b) = (distribution_function(&v, t).unwrap(), distribution_function(&vs, t).unwrap());
        prop_assert!((a - b).abs() <= 1e-8 * a.max(1e-300), "mu {a} vs {b}");
    }

    #[test]
    fn rearrangement_preserves_lp(seed in any::<u64>(), p in 1.1f64..4.0) {
        let v = random_profile(&mut ChaCha8Rng::seed_from_u64(seed), false);
        let vs = decreasing_rearrangement(&v).unwrap();
        let (a, b) = (lp_norm_volume(&v, p).unwrap(), lp_norm_volume(&vs, p).unwrap());
        prop_assert!((a - b).abs() <= 1e-7 * a.max(1e-300), "norms {a} vs {b}");
    }

    #[test]
    fn maximal_function_dominates(seed in any::<u64>(), s in 0.01f64..10.0) {
        let v = random_profile(&mut ChaCha8Rng::seed_from_u64(seed), true);
        let vs = decreasing_rearrangement(&v).unwrap();
        let vss = maximal_function(&vs).unwrap();
        prop_assert!(vss.value(s) >= vs.value(s) * (1.0 - 1e-12));
    }

    #[test]
    fn hardy_inequality_holds(seed in any::<u64>(), p in 1.1f64..4.0) {
        let v = random_profile(&mut ChaCha8Rng::seed_from_u64(seed), false);
        let vs = decreasing_rearrangement(&v).unwrap();
        let r = hardy_check(&vs, p).unwrap();
        prop_assert!(r.holds, "lhs {} rhs {}", r.lhs, r.rhs);
    }

    #[test]
    fn lp_norm_is_homogeneous(seed in any::<u64>(), c in -5.0f64..5.0, p in 1.1f64..4.0) {
        let v = random_profile(&mut ChaCha8Rng::seed_from_u64(seed), false);
        let base = lp_norm_volume(&v, p).unwrap();
        let scaled = lp_norm_volume(&v.scaled(c), p).unwrap();
        prop_assert!((scaled - c.abs() * base).abs() <= 1e-12 * base.max(1e-300));
    }
}
