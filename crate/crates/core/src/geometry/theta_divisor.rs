use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curve::{HyperellipticCurve, JacobianLift, PeriodData, CurvePoint};
use crate::error::{Error, Result};
use crate::theta::{theta_jet, HalfCharacteristic, JetOrder, RiemannMatrix, ThetaJet};

/// Default relative tolerance for membership in Θ.
pub const DEFAULT_ON_THETA_TOL: f64 = 1e-7;
/// Gradients below this fraction of the typical gradient count as zero.
pub const SMOOTHNESS_FACTOR: f64 = 1e-6;
const PROBE_STEP: f64 = 0.1;

/// `|θ(x)|` relative to the largest `|θ|` on a small probe set around `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaResidual {
    pub residual: f64,
    /// `|θ(x)| exp(−π Im xᵀ (Im τ)⁻¹ Im x)`.
    pub normalized_abs: f64,
    /// Largest probe value on the same scale.
    pub probe_scale: f64,
}

pub(crate) fn jet(tau: &RiemannMatrix, x: &DVector<Complex64>, order: JetOrder, tol: f64) -> Result<ThetaJet> {
    theta_jet(tau, x, &HalfCharacteristic::zero(tau.genus()), order, tol)
}

/// Relative residual of `θ` at `x`. The probe set is `x` and `x ± h e_k`,
/// `x ± i h e_k` with `h = 0.1`.
pub fn theta_residual(tau: &RiemannMatrix, x: &JacobianLift, tol: f64) -> Result<ThetaResidual> {
    let g = tau.genus();
    if x.genus() != g {
        return Err(Error::InvalidInput("lift and τ have different genus".into()));
    }
    let center = jet(tau, &x.z, JetOrder::Value, tol)?;
    let mut scale = center.value.norm();
    for k in 0..g {
        for step in [
            Complex64::new(PROBE_STEP, 0.0),
            Complex64::new(-PROBE_STEP, 0.0),
            Complex64::new(0.0, PROBE_STEP),
            Complex64::new(0.0, -PROBE_STEP),
        ] {
            let mut z = x.z.clone();
            z[k] += step;
            let j = jet(tau, &z, JetOrder::Value, tol)?;
            scale = scale.max(j.value.norm() * (j.log_scale - center.log_scale).exp());
        }
    }
    let normalized_abs = center.value.norm();
    let residual = if scale > 0.0 { normalized_abs / scale } else { 0.0 };
    Ok(ThetaResidual { residual, normalized_abs, probe_scale: scale })
}

/// Whether `x` lies on Θ to relative tolerance `membership_tol`.
pub fn on_theta(tau: &RiemannMatrix, x: &JacobianLift, membership_tol: f64, tol: f64) -> Result<(bool, ThetaResidual)> {
    let r = theta_residual(tau, x, tol)?;
    Ok((r.residual < membership_tol, r))
}

/// Typical sizes of `∇θ` and the Hessian on Θ, on the normalized scale:
/// medians over points found by Newton's method along random complex lines.
#[derive(Debug, Clone, Serialize)]
pub struct ThetaDivisorScale {
    pub median_gradient: f64,
    pub median_hessian: f64,
    pub samples: usize,
    pub seed: u64,
}

impl ThetaDivisorScale {
    pub fn gradient_threshold(&self) -> f64 {
        SMOOTHNESS_FACTOR * self.median_gradient
    }

    pub fn hessian_threshold(&self) -> f64 {
        SMOOTHNESS_FACTOR * self.median_hessian
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Solve `θ(z₀ + t v) = 0` for `t` by Newton's method.
fn newton_on_line(tau: &RiemannMatrix, z0: &DVector<Complex64>, v: &DVector<Complex64>, tol: f64) -> Result<Option<DVector<Complex64>>> {
    let mut t = Complex64::new(0.0, 0.0);
    for _ in 0..60 {
        let z = z0 + v * t;
        let j = jet(tau, &z, JetOrder::Gradient, tol)?;
        let d = j.gradient().dot(v);
        if d.norm() == 0.0 {
            return Ok(None);
        }
        let step = j.value / d;
        t -= step;
        if step.norm() > 10.0 {
            return Ok(None);
        }
        if step.norm() < 1e-13 {
            return Ok(Some(z0 + v * t));
        }
    }
    Ok(None)
}

/// A random point of Θ in the fundamental cell, found by Newton's method
/// along a random complex line.
pub fn random_theta_point<R: Rng>(tau: &RiemannMatrix, rng: &mut R, tol: f64) -> Result<JacobianLift> {
    let g = tau.genus();
    for _ in 0..200 {
        let u = DVector::from_fn(g, |_, _| rng.random_range(0.0..1.0));
        let w = DVector::from_fn(g, |_, _| rng.random_range(-0.5..0.5));
        let im = tau.imag_part() * &w;
        let re = u + tau.real_part() * &w;
        let z0 = DVector::from_fn(g, |i, _| Complex64::new(re[i], im[i]));
        let mut v = DVector::from_fn(g, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        v /= Complex64::from(v.norm());
        if let Some(z) = newton_on_line(tau, &z0, &v, tol)? {
            return Ok(JacobianLift::new(z));
        }
    }
    Err(Error::NumericalFailure("Newton search for points of Θ did not converge".into()))
}

/// Estimate [`ThetaDivisorScale`] from `samples` random points of Θ.
pub fn theta_divisor_scale(tau: &RiemannMatrix, samples: usize, seed: u64, tol: f64) -> Result<ThetaDivisorScale> {
    if samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grads = Vec::with_capacity(samples);
    let mut hess = Vec::with_capacity(samples);
    for _ in 0..samples {
        let x = random_theta_point(tau, &mut rng, tol)?;
        let j = jet(tau, &x.z, JetOrder::Hessian, tol)?;
        grads.push(j.gradient().norm());
        hess.push(j.hessian().norm());
    }
    Ok(ThetaDivisorScale { median_gradient: median(grads), median_hessian: median(hess), samples, seed })
}

/// Projectivized gradient of θ at a point of Θ.
#[derive(Debug, Clone, Serialize)]
pub struct GaussImage {
    /// Unit vector along `∇θ(x)`; meaningful only when `defined`.
    #[serde(serialize_with = "crate::report::ser_vector")]
    pub direction: DVector<Complex64>,
    pub defined: bool,
    /// Normalized gradient norm, comparable with the scale's median.
    pub gradient_norm: f64,
    pub theta_residual: f64,
}

/// Gauss map at `x`. Fails with `NotOnTheta` when the relative residual of
/// θ exceeds `membership_tol`.
pub fn gauss_map(
    tau: &RiemannMatrix,
    x: &JacobianLift,
    scale: &ThetaDivisorScale,
    membership_tol: f64,
    tol: f64,
) -> Result<GaussImage> {
    let (on, r) = on_theta(tau, x, membership_tol, tol)?;
    if !on {
        return Err(Error::NotOnTheta { residual: r.residual });
    }
    let j = jet(tau, &x.z, JetOrder::Gradient, tol)?;
    let grad = j.gradient().clone();
    let n = grad.norm();
    let defined = n > scale.gradient_threshold();
    let direction = if n > 0.0 { grad / Complex64::from(n) } else { grad };
    Ok(GaussImage { direction, defined, gradient_norm: n, theta_residual: r.residual })
}

/// Order of vanishing of θ at a point of Θ, capped at 3 (meaning "≥ 3").
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VanishingOrder {
    pub order: u8,
    pub gradient_norm: f64,
    pub hessian_norm: f64,
}

pub fn vanishing_order(tau: &RiemannMatrix, x: &JacobianLift, scale: &ThetaDivisorScale, tol: f64) -> Result<VanishingOrder> {
    let j = jet(tau, &x.z, JetOrder::Hessian, tol)?;
    let gradient_norm = j.gradient().norm();
    let hessian_norm = j.hessian().norm();
    let order = if gradient_norm > scale.gradient_threshold() {
        1
    } else if hessian_norm > scale.hessian_threshold() {
        2
    } else {
        3
    };
    Ok(VanishingOrder { order, gradient_norm, hessian_norm })
}

/// Normalized gradient and Hessian of θ at `x` (common scale factor dropped).
pub fn theta_derivatives(tau: &RiemannMatrix, x: &JacobianLift, tol: f64) -> Result<(DVector<Complex64>, DMatrix<Complex64>)> {
    let j = jet(tau, &x.z, JetOrder::Hessian, tol)?;
    Ok((j.gradient().clone(), j.hessian().clone()))
}

/// Direction `ω_a⁻¹ (1, x, …, x^{g−1})` of the normalized canonical image of
/// `P`, projectively (the factor `1/y` is dropped; `ω_a⁻¹ e_g` at infinity).
pub fn canonical_direction(curve: &HyperellipticCurve, periods: &PeriodData, p: &CurvePoint) -> DVector<Complex64> {
    &periods.normalization * curve.canonical_vector(p)
}

/// `|⟨∇θ, φ̂⟩| / (‖∇θ‖ ‖φ̂‖)` with the bilinear pairing; zero iff the
/// hyperplane with normal `∇θ` contains the canonical image `φ̂`.
pub fn hyperplane_residual(gradient: &DVector<Complex64>, phi: &DVector<Complex64>) -> f64 {
    let d = gradient.norm() * phi.norm();
    if d == 0.0 {
        return f64::INFINITY;
    }
    gradient.dot(phi).norm() / d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tau2() -> RiemannMatrix {
        RiemannMatrix::new(DMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(0.3, 1.1), Complex64::new(-0.2, 0.35), Complex64::new(-0.2, 0.35), Complex64::new(0.1, 0.9)],
        ))
        .unwrap()
    }

    #[test]
    fn newton_points_lie_on_theta() {
        let tau = tau2();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let x = random_theta_point(&tau, &mut rng, 1e-14).unwrap();
            let r = theta_residual(&tau, &x, 1e-14).unwrap();
            assert!(r.residual < 1e-12, "{}", r.residual);
        }
    }

    #[test]
    fn generic_points_are_off_theta() {
        let tau = tau2();
        let x = JacobianLift::new(DVector::from_vec(vec![Complex64::new(0.13, 0.2), Complex64::new(-0.4, 0.05)]));
        let (on, r) = on_theta(&tau, &x, DEFAULT_ON_THETA_TOL, 1e-13).unwrap();
        assert!(!on && r.residual > 1e-3);
        assert!(matches!(
            gauss_map(&tau, &x, &theta_divisor_scale(&tau, 5, 1, 1e-13).unwrap(), DEFAULT_ON_THETA_TOL, 1e-13),
            Err(Error::NotOnTheta { .. })
        ));
    }

    #[test]
    fn gauss_map_is_even() {
        let tau = tau2();
        let scale = theta_divisor_scale(&tau, 9, 5, 1e-13).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = random_theta_point(&tau, &mut rng, 1e-13).unwrap();
        let a = gauss_map(&tau, &x, &scale, DEFAULT_ON_THETA_TOL, 1e-13).unwrap();
        let b = gauss_map(&tau, &(-&x), &scale, DEFAULT_ON_THETA_TOL, 1e-13).unwrap();
        assert!(a.defined && b.defined);
        assert!(crate::numeric::projective_angle(&a.direction, &b.direction).unwrap() < 1e-8);
        assert_eq!(vanishing_order(&tau, &x, &scale, 1e-13).unwrap().order, 1);
    }
}
