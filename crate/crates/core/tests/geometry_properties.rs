//! Properties of Gauss fibres, the Kummer map and Gauss images.

mod common;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trisect_core::curve::{random_point, Divisor, JacobianLift};
use trisect_core::geometry::{
    binomial, canonical_direction, gauss_fiber_enumerate, hyperplane_residual, kummer_map, theta_derivatives,
    LabeledCanonical,
};
use trisect_core::numeric::projective_angle;
use trisect_core::theta::RiemannMatrix;

use common::context;

/// A genus and multiplicities summing to `2g − 2`.
fn composition() -> impl Strategy<Value = (usize, Vec<usize>)> {
    (2usize..=6).prop_flat_map(|g| {
        let n = 2 * g - 2;
        (Just(g), prop::collection::vec(any::<bool>(), n - 1)).prop_map(move |(g, cuts)| {
            let mut mults = vec![1usize];
            for cut in cuts {
                if cut {
                    mults.push(1);
                } else {
                    *mults.last_mut().unwrap() += 1;
                }
            }
            (g, mults)
        })
    })
}

fn random_tau(g: usize, seed: u64) -> RiemannMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = DMatrix::from_fn(g, g, |_, _| rng.random_range(-0.5..0.5));
    let y = &b * b.transpose() + DMatrix::identity(g, g) * 0.8;
    let x = DMatrix::from_fn(g, g, |_, _| rng.random_range(-0.5..0.5));
    let x = (&x + x.transpose()) * 0.5;
    RiemannMatrix::new(DMatrix::from_fn(g, g, |i, j| Complex64::new(x[(i, j)], y[(i, j)]))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fibre_multiplicities_sum_to_the_degree((g, mults) in composition()) {
        let labels = (0..mults.len()).map(|i| format!("P{i}")).collect();
        let k0 = LabeledCanonical::new(g, labels, mults.clone()).unwrap();
        let entries = gauss_fiber_enumerate(&k0).unwrap();
        let total: u64 = entries.iter().map(|e| e.multiplicity).sum();
        prop_assert_eq!(total, binomial(2 * g - 2, g - 1));
        for e in &entries {
            prop_assert_eq!(e.counts.iter().sum::<usize>(), g - 1);
            prop_assert!(e.counts.iter().zip(&mults).all(|(l, n)| l <= n));
            let product: u64 = e.counts.iter().zip(&mults).map(|(&l, &n)| binomial(n, l)).product();
            prop_assert_eq!(e.multiplicity, product);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kummer_is_even_and_periodic(g in 1usize..4, seed: u64, shift in prop::collection::vec(-2i64..3, 6)) {
        let tau = random_tau(g, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 9);
        let a = DVector::from_fn(g, |_, _| Complex64::from(rng.random_range(-0.5..0.5)));
        let b = DVector::from_fn(g, |_, _| Complex64::from(rng.random_range(-0.5..0.5)));
        let z = JacobianLift::new(a + tau.entries() * b);
        let k = kummer_map(&tau, &z, 1e-13).unwrap().coords;
        prop_assert!(k.norm() > 0.0);
        let km = kummer_map(&tau, &(-&z), 1e-13).unwrap().coords;
        prop_assert!(projective_angle(&k, &km).unwrap() < 1e-9);
        let moved = JacobianLift::new(&z.z + tau.lattice_point(&shift[..g], &shift[3..3 + g]));
        let ks = kummer_map(&tau, &moved, 1e-13).unwrap().coords;
        prop_assert!(projective_angle(&k, &ks).unwrap() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn gauss_images_contain_the_divisor(seed: u64) {
        // x = ζ(D) − κ for D of degree g − 1: the tangent hyperplane at x
        // contains the canonical images of the support of D.
        let ctx = context(3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<_> = (0..2).map(|_| random_point(&ctx.curve, &mut rng)).collect();
        let d = Divisor::from_points(&pts);
        let (grad, _) = theta_derivatives(ctx.tau(), &ctx.theta_point(&d).unwrap(), ctx.tol.theta).unwrap();
        prop_assume!(grad.norm() > ctx.scale.gradient_threshold());
        for p in d.support() {
            let r = hyperplane_residual(&grad, &canonical_direction(&ctx.curve, &ctx.periods, &p));
            prop_assert!(r < 1e-6, "{r}");
        }
    }
}
