//! Properties of rank certificates, lattice reduction and projective angles.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trisect_core::numeric::{nearest_lattice_vector, numerical_rank, projective_angle, svd};
use trisect_core::theta::RiemannMatrix;

fn cplx<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// An `m × n` matrix of rank `r` (generically).
fn low_rank(m: usize, n: usize, r: usize, seed: u64) -> DMatrix<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = DMatrix::from_fn(m, r, |_, _| cplx(&mut rng));
    let c = DMatrix::from_fn(r, n, |_, _| cplx(&mut rng));
    b * c
}

fn random_tau(g: usize, seed: u64) -> RiemannMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = DMatrix::from_fn(g, g, |_, _| rng.random_range(-0.5..0.5));
    let y = &b * b.transpose() + DMatrix::identity(g, g) * 0.8;
    let x = DMatrix::from_fn(g, g, |_, _| rng.random_range(-0.5..0.5));
    let x = (&x + x.transpose()) * 0.5;
    RiemannMatrix::new(DMatrix::from_fn(g, g, |i, j| Complex64::new(x[(i, j)], y[(i, j)]))).unwrap()
}

fn random_vector(n: usize, seed: u64) -> DVector<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DVector::from_fn(n, |_, _| cplx(&mut rng))
}

fn phase(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_certificate_is_well_formed((m, n) in (1usize..8, 1usize..8), r in 0usize..8, seed: u64) {
        let r = r.min(m).min(n);
        let cert = numerical_rank(&low_rank(m, n, r, seed), 1e-7).unwrap();
        prop_assert!(cert.singular_values.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(cert.decided_rank <= m.min(n));
        prop_assert_eq!(cert.decided_rank, r);
        if cert.decided_rank < m.min(n) {
            prop_assert!(cert.gap_ratio < cert.tolerance_used);
        }
    }

    #[test]
    fn rank_is_invariant_under_permutation_and_unitary_scaling(
        (m, n) in (2usize..7, 2usize..7),
        r in 0usize..7,
        seed: u64,
    ) {
        let r = r.min(m).min(n);
        let a = low_rank(m, n, r, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let mut rows: Vec<usize> = (0..m).collect();
        let mut cols: Vec<usize> = (0..n).collect();
        rows.shuffle(&mut rng);
        cols.shuffle(&mut rng);
        let row_phase: Vec<Complex64> = (0..m).map(|_| phase(rng.random_range(0.0..6.3))).collect();
        let col_phase: Vec<Complex64> = (0..n).map(|_| phase(rng.random_range(0.0..6.3))).collect();
        let b = DMatrix::from_fn(m, n, |i, j| a[(rows[i], cols[j])] * row_phase[i] * col_phase[j]);
        let ca = numerical_rank(&a, 1e-7).unwrap();
        let cb = numerical_rank(&b, 1e-7).unwrap();
        prop_assert_eq!(ca.decided_rank, cb.decided_rank);
        for (x, y) in ca.singular_values.iter().zip(&cb.singular_values) {
            prop_assert!((x - y).abs() <= 1e-12 * ca.singular_values[0].max(1.0));
        }
    }

    #[test]
    fn svd_reconstructs((m, n) in (1usize..9, 1usize..9), r in 0usize..9, seed: u64) {
        let a = low_rank(m, n, r.min(m).min(n), seed);
        let s = svd(&a).unwrap();
        let k = m.min(n);
        let sigma = DMatrix::from_fn(k, k, |i, j| if i == j { Complex64::from(s.singular_values[i]) } else { Complex64::from(0.0) });
        let back = &s.u * sigma * s.v.columns(0, k).adjoint();
        prop_assert!((back - &a).norm() <= 1e-12 * a.norm().max(1.0));
        let vv = s.v.adjoint() * &s.v;
        prop_assert!((vv - DMatrix::identity(n, n)).norm() < 1e-12);
    }

    #[test]
    fn lattice_shift_moves_the_integer_part_exactly(
        g in 1usize..4,
        seed: u64,
        shift in prop::collection::vec(-3i64..4, 6),
    ) {
        let tau = random_tau(g, seed);
        let z = random_vector(g, seed.wrapping_add(1)) * Complex64::from(0.7);
        let (m, n) = (&shift[..g], &shift[3..3 + g]);
        let base = nearest_lattice_vector(&z, &tau).unwrap();
        let moved = nearest_lattice_vector(&(&z + tau.lattice_point(m, n)), &tau).unwrap();
        for k in 0..g {
            prop_assert_eq!(moved.m[k], base.m[k] + m[k]);
            prop_assert_eq!(moved.n[k], base.n[k] + n[k]);
        }
        prop_assert!((moved.residual_norm - base.residual_norm).abs() < 1e-12);
    }

    #[test]
    fn projective_angle_is_symmetric_and_scale_free(
        n in 1usize..6,
        seed: u64,
        (s, t) in (0.0f64..6.3, 0.0f64..6.3),
        (a, b) in (0.01f64..100.0, 0.01f64..100.0),
    ) {
        let v = random_vector(n, seed);
        let w = random_vector(n, seed.wrapping_add(7));
        let angle = projective_angle(&v, &w).unwrap();
        prop_assert!((angle - projective_angle(&w, &v).unwrap()).abs() < 1e-12);
        let vs = &v * (phase(s) * a);
        let ws = &w * (phase(t) * b);
        prop_assert!((angle - projective_angle(&vs, &ws).unwrap()).abs() < 1e-7);
        prop_assert!(projective_angle(&v, &vs).unwrap() < 1e-7);
    }
}
