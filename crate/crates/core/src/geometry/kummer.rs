use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::curve::JacobianLift;
use crate::error::{Error, Result};
use crate::theta::{epsilon_vectors, second_order_jet, JetOrder, RiemannMatrix};

/// Coordinates `(Θ[ε](τ, z))_ε` in the fixed ε order, scaled so that the
/// largest modulus is 1.
#[derive(Debug, Clone, Serialize)]
pub struct KummerPoint {
    #[serde(serialize_with = "crate::report::ser_vector")]
    pub coords: DVector<Complex64>,
}

/// Second-order theta values at `z` on the normalized scale (a common
/// positive factor `exp(−2π Im zᵀ (Im τ)⁻¹ Im z)` removed), with first
/// derivatives when `with_gradient` is set. Row `ε` of the gradient matrix is
/// `∇Θ[ε]`.
pub fn second_order_values(
    tau: &RiemannMatrix,
    z: &DVector<Complex64>,
    with_gradient: bool,
    tol: f64,
) -> Result<(DVector<Complex64>, Option<DMatrix<Complex64>>)> {
    let g = tau.genus();
    let eps = epsilon_vectors(g);
    let order = if with_gradient { JetOrder::Gradient } else { JetOrder::Value };
    let mut vals = DVector::zeros(eps.len());
    let mut grads = with_gradient.then(|| DMatrix::zeros(eps.len(), g));
    for (i, e) in eps.iter().enumerate() {
        let j = second_order_jet(tau, z, e, order, tol)?;
        vals[i] = j.value;
        if let Some(gm) = grads.as_mut() {
            gm.row_mut(i).copy_from(&j.gradient().transpose());
        }
    }
    Ok((vals, grads))
}

/// The Kummer map `z ↦ [Θ[ε](τ, z)]_ε`.
pub fn kummer_map(tau: &RiemannMatrix, z: &JacobianLift, tol: f64) -> Result<KummerPoint> {
    if z.genus() != tau.genus() {
        return Err(Error::InvalidInput("lift and τ have different genus".into()));
    }
    let (vals, _) = second_order_values(tau, &z.z, false, tol)?;
    let (idx, max) = vals.iter().enumerate().map(|(i, c)| (i, c.norm())).fold((0, 0.0), |b, (i, m)| if m > b.1 { (i, m) } else { b });
    if !(max > 1e-13) {
        return Err(Error::NumericalFailure("all Kummer coordinates vanish; τ is broken".into()));
    }
    let pivot = vals[idx];
    Ok(KummerPoint { coords: vals / Complex64::from(pivot.norm()) })
}

/// Rows are Kummer points scaled to unit norm.
pub fn kummer_matrix(tau: &RiemannMatrix, lifts: &[JacobianLift], tol: f64) -> Result<DMatrix<Complex64>> {
    let n = 1usize << tau.genus();
    let mut m = DMatrix::zeros(lifts.len(), n);
    for (i, z) in lifts.iter().enumerate() {
        let k = kummer_map(tau, z, tol)?.coords;
        let k = &k / Complex64::from(k.norm());
        m.row_mut(i).copy_from(&k.transpose());
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::projective_angle;

    fn tau3() -> RiemannMatrix {
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[
                Complex64::new(0.1, 1.2),
                Complex64::new(0.2, 0.3),
                Complex64::new(-0.1, -0.2),
                Complex64::new(0.2, 0.3),
                Complex64::new(-0.3, 1.0),
                Complex64::new(0.05, 0.1),
                Complex64::new(-0.1, -0.2),
                Complex64::new(0.05, 0.1),
                Complex64::new(0.4, 0.9),
            ],
        );
        RiemannMatrix::new(m).unwrap()
    }

    #[test]
    fn kummer_is_even_and_periodic() {
        let tau = tau3();
        let z = JacobianLift::new(DVector::from_vec(vec![
            Complex64::new(0.3, 0.1),
            Complex64::new(-0.2, 0.4),
            Complex64::new(0.7, -0.3),
        ]));
        let k = kummer_map(&tau, &z, 1e-13).unwrap().coords;
        let km = kummer_map(&tau, &(-&z), 1e-13).unwrap().coords;
        assert!(projective_angle(&k, &km).unwrap() < 1e-9);
        let shifted = JacobianLift::new(&z.z + tau.lattice_point(&[1, 0, -1], &[0, 1, 1]));
        let ks = kummer_map(&tau, &shifted, 1e-13).unwrap().coords;
        assert!(projective_angle(&k, &ks).unwrap() < 1e-9);
    }

    #[test]
    fn elliptic_kummer_never_vanishes() {
        let tau = RiemannMatrix::new(DMatrix::from_element(1, 1, Complex64::new(0.2, 0.8))).unwrap();
        for a in 0..20 {
            for b in 0..20 {
                let z = tau.lattice_point(&[0], &[0])
                    + DVector::from_element(1, Complex64::from(a as f64 / 20.0))
                    + tau.entries().column(0) * Complex64::from(b as f64 / 20.0);
                let (v, _) = second_order_values(&tau, &z, false, 1e-13).unwrap();
                assert_eq!(v.len(), 2);
                assert!(v.iter().map(|c| c.norm()).fold(0.0, f64::max) > 1e-3);
            }
        }
    }
}
