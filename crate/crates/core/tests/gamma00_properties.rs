//! Linearity of the order-four conditions, sections of generic points, and
//! the dimension bound on Gauss fibres.

mod common;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trisect_core::curve::sample_b_ell;
use trisect_core::gamma00::{fiber_span_bound, section_from_point, taylor_conditions, ConditionMatrix, SectionCoefficients};
use trisect_core::geometry::{random_theta_point, theta_derivatives};
use trisect_core::theta::RiemannMatrix;

use common::context;

fn random_tau(g: usize, seed: u64) -> RiemannMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = DMatrix::from_fn(g, g, |_, _| rng.random_range(-0.5..0.5));
    let y = &b * b.transpose() + DMatrix::identity(g, g) * 0.8;
    let x = DMatrix::from_fn(g, g, |_, _| rng.random_range(-0.5..0.5));
    let x = (&x + x.transpose()) * 0.5;
    RiemannMatrix::new(DMatrix::from_fn(g, g, |i, j| Complex64::new(x[(i, j)], y[(i, j)]))).unwrap()
}

fn random_section<R: Rng>(n: usize, rng: &mut R) -> SectionCoefficients {
    SectionCoefficients {
        coeffs: DVector::from_fn(n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn conditions_are_linear(g in 1usize..5, seed: u64, (ar, ai, br, bi) in (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0)) {
        let tau = random_tau(g, seed);
        let cond = ConditionMatrix::new(&tau, 1e-13).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        let (s, t) = (random_section(1 << g, &mut rng), random_section(1 << g, &mut rng));
        let (alpha, beta) = (Complex64::new(ar, ai), Complex64::new(br, bi));
        let combined = SectionCoefficients { coeffs: &s.coeffs * alpha + &t.coeffs * beta };
        let lhs = taylor_conditions(&cond, &combined).unwrap().values;
        let rhs = taylor_conditions(&cond, &s).unwrap().values * alpha + taylor_conditions(&cond, &t).unwrap().values * beta;
        let size = cond.matrix.norm() * combined.coeffs.norm().max(1.0);
        prop_assert!((lhs - rhs).norm() <= 1e-13 * size);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn generic_sections_leave_gamma00(g in 3usize..5, seed: u64) {
        // On Θ the value condition holds (θ(x)² = 0) but the second-order
        // conditions do not.
        let ctx = context(g);
        let tau = ctx.tau();
        let cond = ConditionMatrix::new(tau, ctx.tol.theta).unwrap();
        let x = random_theta_point(tau, &mut ChaCha8Rng::seed_from_u64(seed), ctx.tol.theta).unwrap();
        let (grad, _) = theta_derivatives(tau, &x, ctx.tol.theta).unwrap();
        prop_assume!(grad.norm() > ctx.scale.gradient_threshold());
        let s = section_from_point(tau, &x, ctx.tol.theta).unwrap();
        let c = taylor_conditions(&cond, &s).unwrap().values;
        let size = cond.matrix.norm() * s.coeffs.norm();
        prop_assert!(c[0].norm() < 1e-9 * size, "value {}", c[0].norm() / size);
        let hessian = c.rows(1, c.len() - 1).norm();
        prop_assert!(hessian > 1e-3 * size, "hessian {}", hessian / size);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn fibre_spans_respect_the_bound(g in 3usize..5, ell_pick in 0usize..3, seed: u64) {
        let ctx = context(g);
        let ell = 2 + ell_pick % (g - 1);
        let s = sample_b_ell(&ctx.curve, ell, seed).unwrap();
        let b = fiber_span_bound(ctx, &s.k0).unwrap();
        prop_assert!(b.holds, "dimension {} bound {}", b.projective_dimension, b.bound);
    }
}
