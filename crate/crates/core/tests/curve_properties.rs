//! Properties of curves, Abel-Jacobi lifts and canonical samples.

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trisect_core::curve::{random_point, sample_b_ell, CurvePoint, Divisor, HyperellipticCurve};

use common::context;

fn distinct_roots() -> impl Strategy<Value = Vec<f64>> {
    (1usize..4).prop_flat_map(|g| prop::collection::vec(0.3f64..2.0, 2 * g + 1)).prop_map(|gaps| {
        let mut x = -3.0;
        gaps.into_iter()
            .map(|d| {
                x += d;
                x
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn coefficients_recover_roots(roots in distinct_roots(), lead in prop_oneof![0.5f64..3.0, -3.0f64..-0.5]) {
        let c = HyperellipticCurve::from_roots(lead, &roots).unwrap();
        prop_assert_eq!(c.genus, (roots.len() - 1) / 2);
        let back = HyperellipticCurve::from_coeffs(&c.f_coeffs).unwrap();
        for (a, b) in back.roots.iter().zip(&roots) {
            prop_assert!((a - b).abs() < 1e-9, "{a} {b}");
        }
    }

    #[test]
    fn sampled_points_lie_on_the_curve(g in 1usize..6, seed: u64) {
        let c = HyperellipticCurve::reference(g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..8 {
            let p = random_point(&c, &mut rng);
            prop_assert!(c.contains(&p));
            if let CurvePoint::Finite { x, y } = p {
                let scale: f64 = c.f_coeffs.iter().enumerate().map(|(k, a)| a.abs() * x.norm().powi(k as i32)).sum();
                prop_assert!((y * y - c.f(x)).norm() < 1e-10 * scale);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn abel_jacobi_is_additive(g in 2usize..4, seed: u64) {
        let ctx = context(g);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p: Vec<CurvePoint> = (0..4).map(|_| random_point(&ctx.curve, &mut rng)).collect();
        let d1 = Divisor::from_points(&p[..2]);
        let d2 = Divisor::from_points(&p[2..]);
        let sum = ctx.zeta_divisor(&Divisor::from_points(&p)).unwrap();
        let parts = &ctx.zeta_divisor(&d1).unwrap() + &ctx.zeta_divisor(&d2).unwrap();
        prop_assert!((&sum.z - &parts.z).norm() < 1e-13 * sum.z.norm().max(1.0));
    }

    #[test]
    fn canonical_samples(g in 2usize..5, ell_pick in 0usize..4, seed: u64) {
        let ctx = context(g);
        let ell = 2 + ell_pick % (g - 1);
        let s = sample_b_ell(&ctx.curve, ell, seed).unwrap();
        prop_assert_eq!(s.k0.degree(), 2 * g as i64 - 2);
        prop_assert_eq!(s.simple.len(), 2 * ell - 2);
        prop_assert_eq!(s.doubled.len(), g - ell);
        // 2κ − ζ(K₀) ∈ Λ.
        let k = ctx.zeta_divisor(&s.k0).unwrap();
        let d = (&(&ctx.kappa.kappa * 2.0) - &k).lattice_distance_to(&trisect_core::curve::JacobianLift::zero(g), ctx.tau()).unwrap();
        prop_assert!(d < 1e-8, "{d}");
    }

    #[test]
    fn sampling_is_deterministic(g in 2usize..5, seed: u64) {
        let ctx = context(g);
        let a = sample_b_ell(&ctx.curve, 2, seed).unwrap();
        let b = sample_b_ell(&ctx.curve, 2, seed).unwrap();
        prop_assert_eq!(&a.k0, &b.k0);
        prop_assert_eq!(ctx.zeta_divisor(&a.k0).unwrap(), ctx.zeta_divisor(&b.k0).unwrap());
    }
}
