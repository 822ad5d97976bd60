use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{abel_jacobi_divisor, random_point, Divisor, HyperellipticCurve, JacobianLift, PeriodData};
use crate::error::{Error, Result};
use crate::geometry::theta_residual;
use crate::theta::epsilon_vectors;

/// Number of random effective divisors each candidate must vanish on.
pub const KAPPA_DIVISORS: usize = 20;
/// A candidate survives when every relative residual is below this.
pub const KAPPA_SURVIVAL_TOL: f64 = 1e-6;
const KAPPA_SEED: u64 = 0x6b61_7070_61;

/// The half-period `κ = (m + τn)/2` with `θ(ζ(D) − κ) = 0` for every
/// effective divisor `D` of degree `g − 1`.
#[derive(Debug, Clone, Serialize)]
pub struct RiemannConstant {
    pub kappa: JacobianLift,
    pub m: Vec<u8>,
    pub n: Vec<u8>,
    /// Largest relative θ residual over the test divisors.
    pub max_residual: f64,
    pub candidates_tested: usize,
}

/// Search the `2^{2g}` half-periods for the unique one on which θ vanishes
/// along `ζ(W_{g−1})`, tested on [`KAPPA_DIVISORS`] pseudo-random divisors.
pub fn riemann_constant(curve: &HyperellipticCurve, periods: &PeriodData, tol: f64) -> Result<RiemannConstant> {
    let g = curve.genus;
    let tau = &periods.tau;
    let mut rng = ChaCha8Rng::seed_from_u64(KAPPA_SEED);
    let mut lifts = Vec::with_capacity(KAPPA_DIVISORS);
    for _ in 0..KAPPA_DIVISORS {
        let pts: Vec<_> = (0..g - 1).map(|_| random_point(curve, &mut rng)).collect();
        lifts.push(abel_jacobi_divisor(curve, &Divisor::from_points(&pts), periods, super::DEFAULT_AJ_TOL)?);
    }
    let eps = epsilon_vectors(g);
    let mut survivors = Vec::new();
    for m in &eps {
        for n in &eps {
            let kappa = JacobianLift::new(tau.half_period(m, n));
            let mut worst: f64 = 0.0;
            for z in &lifts {
                let r = theta_residual(tau, &(z - &kappa), tol)?.residual;
                worst = worst.max(r);
                if worst >= KAPPA_SURVIVAL_TOL {
                    break;
                }
            }
            if worst < KAPPA_SURVIVAL_TOL {
                survivors.push((kappa, m.clone(), n.clone(), worst));
            }
        }
    }
    if survivors.len() != 1 {
        return Err(Error::AmbiguousConstant { survivors: survivors.len() });
    }
    let (kappa, m, n, max_residual) = survivors.pop().expect("one survivor");
    Ok(RiemannConstant { kappa, m, n, max_residual, candidates_tested: eps.len() * eps.len() })
}

#[cfg(test)]
mod tests {
    use super::super::{period_matrix, DEFAULT_PERIOD_TOL};
    use super::*;
    use crate::numeric::lattice_distance;

    #[test]
    fn unique_and_half_period() {
        for g in 1..=3 {
            let c = HyperellipticCurve::reference(g).unwrap();
            let p = period_matrix(&c, DEFAULT_PERIOD_TOL).unwrap();
            let k = riemann_constant(&c, &p, 1e-13).unwrap();
            assert!(k.max_residual < 1e-8, "g={g}: {}", k.max_residual);
            let twice = &k.kappa.z * num_complex::Complex64::from(2.0);
            assert!(lattice_distance(&twice, &p.tau).unwrap() < 1e-12);
        }
    }
}
