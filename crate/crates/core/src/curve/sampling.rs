use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{involution, CurvePoint, Divisor, HyperellipticCurve};
use crate::error::{Error, Result};

/// A random non-Weierstrass point: `Re x` within a quarter span of the branch
/// points, `|Im x|` between 0.1 and 0.6 spans, random sheet.
pub fn random_point<R: Rng>(curve: &HyperellipticCurve, rng: &mut R) -> CurvePoint {
    let span = curve.span();
    let lo = curve.roots[0] - 0.25 * span;
    let hi = curve.roots[curve.roots.len() - 1] + 0.25 * span;
    let re = rng.random_range(lo..hi);
    let mut im = rng.random_range(0.1 * span..0.6 * span);
    if rng.random_bool(0.5) {
        im = -im;
    }
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    curve.point(Complex64::new(re, im), sign)
}

/// A canonical divisor of the shape `Σ P_i + 2 Σ Q_j` with `2ℓ − 2` simple
/// points and `g − ℓ` double points.
///
/// On the odd hyperelliptic model every canonical divisor is a sum of `g − 1`
/// fibres of `x`. The simple points come from `ℓ − 1` generic fibres
/// `P + σP`, listed as `P₁, σP₁, P₂, σP₂, …`; each double point is a finite
/// Weierstrass point, whose fibre is `2W`.
#[derive(Debug, Clone, Serialize)]
pub struct BellSample {
    pub ell: usize,
    pub seed: u64,
    pub k0: Divisor,
    pub simple: Vec<CurvePoint>,
    pub doubled: Vec<CurvePoint>,
}

impl BellSample {
    /// `Σ Q_j` (each double point once).
    pub fn doubled_divisor(&self) -> Divisor {
        Divisor::from_points(&self.doubled)
    }
}

pub fn sample_b_ell(curve: &HyperellipticCurve, ell: usize, seed: u64) -> Result<BellSample> {
    let g = curve.genus;
    if ell < 2 || ell > g {
        return Err(Error::InvalidInput(format!("ℓ = {ell} outside [2, {g}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut simple = Vec::with_capacity(2 * ell - 2);
    while simple.len() < 2 * ell - 2 {
        let p = random_point(curve, &mut rng);
        let x = p.x().expect("finite");
        // Keep fibres well separated so the simple points are distinct.
        if simple.iter().any(|q: &CurvePoint| (q.x().expect("finite") - x).norm() < 0.05 * curve.span()) {
            continue;
        }
        simple.push(p);
        simple.push(involution(&p));
    }
    let doubled: Vec<CurvePoint> =
        sample(&mut rng, curve.roots.len(), g - ell).into_iter().map(|k| curve.branch_point(k)).collect();
    let mut k0 = Divisor::from_points(&simple);
    for w in &doubled {
        k0.add_point(*w, 2);
    }
    Ok(BellSample { ell, seed, k0, simple, doubled })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_and_degree() {
        let c3 = HyperellipticCurve::reference(3).unwrap();
        let s = sample_b_ell(&c3, 3, 7).unwrap();
        assert_eq!(s.k0.degree(), 4);
        assert_eq!(s.k0.terms.len(), 4);
        assert_eq!(s.simple[1], involution(&s.simple[0]));
        assert_eq!(s.simple[3], involution(&s.simple[2]));
        let b2 = sample_b_ell(&c3, 2, 7).unwrap();
        assert_eq!(b2.k0.degree(), 4);
        assert_eq!(b2.doubled.len(), 1);
        assert!(b2.doubled[0].is_weierstrass());
        let c4 = HyperellipticCurve::reference(4).unwrap();
        let s4 = sample_b_ell(&c4, 3, 1).unwrap();
        assert_eq!(s4.k0.degree(), 6);
        assert_eq!(s4.k0.terms.len(), 5);
        assert!(s4.k0.terms.iter().any(|t| t.1 == 2));
    }

    #[test]
    fn deterministic_and_range_checked() {
        let c = HyperellipticCurve::reference(4).unwrap();
        assert_eq!(sample_b_ell(&c, 3, 11).unwrap().k0, sample_b_ell(&c, 3, 11).unwrap().k0);
        assert_ne!(sample_b_ell(&c, 3, 11).unwrap().k0, sample_b_ell(&c, 3, 12).unwrap().k0);
        assert!(sample_b_ell(&c, 1, 0).is_err());
        assert!(sample_b_ell(&c, 5, 0).is_err());
    }
}
