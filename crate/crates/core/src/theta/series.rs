//! Truncated lattice sums for theta functions with characteristics and their
//! first and second derivatives.
//!
//! Values are carried in normalized form: a jet stores `θ(z) · exp(−L)` with
//! `L = π Im(z)ᵀ (Im τ)⁻¹ Im(z)` together with `L` itself. The normalized
//! quantities are bounded independently of `z`, so residuals and ratios can
//! be compared across points without overflow.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use statrs::function::gamma::{gamma, gamma_ur};

use super::characteristic::HalfCharacteristic;
use super::riemann_matrix::{ellipsoid_points, RiemannMatrix};
use crate::error::{Error, Result};
use crate::numeric::lattice_coordinates;

/// Default absolute tolerance (on the normalized scale) for theta sums.
pub const DEFAULT_THETA_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum JetOrder {
    Value,
    Gradient,
    Hessian,
}

/// Value and optional derivatives of `θ[ε](τ, z)`, all normalized by
/// `exp(−log_scale)`.
#[derive(Debug, Clone)]
pub struct ThetaJet {
    pub log_scale: f64,
    pub value: Complex64,
    pub gradient: Option<DVector<Complex64>>,
    pub hessian: Option<DMatrix<Complex64>>,
    pub radius: f64,
    pub bound_on_tail: f64,
    pub terms: usize,
}

impl ThetaJet {
    fn factor(&self) -> Complex64 {
        Complex64::from(self.log_scale.exp())
    }

    pub fn raw_value(&self) -> Complex64 {
        self.value * self.factor()
    }

    pub fn gradient(&self) -> &DVector<Complex64> {
        self.gradient.as_ref().expect("jet evaluated without gradient")
    }

    pub fn hessian(&self) -> &DMatrix<Complex64> {
        self.hessian.as_ref().expect("jet evaluated without hessian")
    }

    pub fn raw_gradient(&self) -> DVector<Complex64> {
        self.gradient() * self.factor()
    }

    pub fn raw_hessian(&self) -> DMatrix<Complex64> {
        self.hessian() * self.factor()
    }
}

/// Result of [`theta`].
#[derive(Debug, Clone, Serialize)]
pub struct ThetaValue {
    #[serde(serialize_with = "crate::report::ser_complex")]
    pub value: Complex64,
    /// `value · exp(−log_scale)`.
    #[serde(serialize_with = "crate::report::ser_complex")]
    pub normalized: Complex64,
    pub log_scale: f64,
    pub truncation_radius: f64,
    pub bound_on_tail: f64,
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 1e-15 && tol < 1e-3) {
        return Err(Error::InvalidInput(format!("theta tolerance {tol:e} outside (1e-15, 1e-3)")));
    }
    Ok(())
}

/// Upper bound for `Σ exp(−‖v‖²)` over points of a shifted copy of a lattice
/// with minimal distance `rho` lying outside the ball of radius `r`:
/// `(g/2) (2/ρ)^g Γ(g/2, (r − ρ/2)²)`.
pub fn gaussian_tail_bound(g: usize, rho: f64, r: f64) -> f64 {
    if r <= rho / 2.0 {
        return f64::INFINITY;
    }
    let s = g as f64 / 2.0;
    let x = (r - rho / 2.0).powi(2);
    s * (2.0 / rho).powi(g as i32) * gamma(s) * gamma_ur(s, x)
}

/// Smallest radius (to 1e-3) whose tail bound is below `tol`.
pub fn truncation_radius(g: usize, rho: f64, tol: f64) -> (f64, f64) {
    let mut lo = ((g as f64).sqrt() + rho) / 2.0;
    if gaussian_tail_bound(g, rho, lo) < tol {
        return (lo, gaussian_tail_bound(g, rho, lo));
    }
    let mut hi = lo + 1.0;
    while gaussian_tail_bound(g, rho, hi) >= tol {
        hi += 1.0;
    }
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if gaussian_tail_bound(g, rho, mid) < tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (hi, gaussian_tail_bound(g, rho, hi))
}

/// Evaluate `θ[ε](τ, z)` and derivatives up to `order`.
///
/// `z` is first reduced to `z′ = z − m₀ − τn₀` by rounding its real lattice
/// coordinates; the quasi-periodicity factor relating `θ(z)` and `θ(z′)` is
/// applied in closed form, including its effect on the derivatives. The sum
/// runs over the ellipsoid `‖T(n + a + c)‖ ≤ R` (`c = (Im τ)⁻¹ Im z′`), with
/// `R` chosen from the Gaussian tail bound and enlarged by one for derivative
/// series. Summation order is fixed, so results do not depend on scheduling.
pub fn theta_jet(
    tau: &RiemannMatrix,
    z: &DVector<Complex64>,
    ch: &HalfCharacteristic,
    order: JetOrder,
    tol: f64,
) -> Result<ThetaJet> {
    check_tol(tol)?;
    let g = tau.genus();
    if z.len() != g || ch.genus() != g {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: genus {g}, point {}, characteristic {}",
            z.len(),
            ch.genus()
        )));
    }
    if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::InvalidInput("non-finite point".into()));
    }
    let a = ch.a();
    let b = ch.b();

    let (_, v) = lattice_coordinates(z, tau);
    let n0: Vec<f64> = v.iter().map(|x| x.round()).collect();
    let n0v = DVector::from_vec(n0.clone());
    let z1 = z - tau.entries() * n0v.map(Complex64::from);
    let m0: Vec<f64> = z1.iter().map(|c| c.re.round()).collect();
    let zr = DVector::from_iterator(g, z1.iter().zip(&m0).map(|(c, m)| c - m));

    let x = tau.real_part();
    let pi_y = tau.imag_part() * PI;
    let c: DVector<f64> = v - &n0v;
    let re_zb: Vec<f64> = zr.iter().zip(&b).map(|(c, b)| c.re + b).collect();
    let shift: Vec<f64> = a.iter().zip(c.iter()).map(|(a, c)| a + c).collect();

    let (mut radius, mut bound) = truncation_radius(g, tau.shortest_vector(), tol);
    if order > JetOrder::Value {
        radius += 1.0;
        bound = gaussian_tail_bound(g, tau.shortest_vector(), radius);
    }
    let points = ellipsoid_points(tau.chol_upper(), &shift, radius);

    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let mut value = Complex64::new(0.0, 0.0);
    let mut grad = DVector::<Complex64>::zeros(g);
    let mut hess = DMatrix::<Complex64>::zeros(g, g);
    let mut k = vec![0.0; g];
    let mut kc = vec![0.0; g];
    for n in points.chunks(g) {
        for i in 0..g {
            k[i] = n[i] as f64 + a[i];
            kc[i] = k[i] + c[i];
        }
        let mut quad_x = 0.0;
        let mut quad_y = 0.0;
        for i in 0..g {
            let mut sx = 0.0;
            let mut sy = 0.0;
            for j in 0..g {
                sx += x[(i, j)] * k[j];
                sy += pi_y[(i, j)] * kc[j];
            }
            quad_x += k[i] * sx;
            quad_y += kc[i] * sy;
        }
        let lin: f64 = k.iter().zip(&re_zb).map(|(k, r)| k * r).sum();
        let phase = PI * quad_x + 2.0 * PI * lin;
        let term = Complex64::from_polar((-quad_y).exp(), phase);
        value += term;
        if order >= JetOrder::Gradient {
            for i in 0..g {
                grad[i] += term * (two_pi_i * k[i]);
            }
        }
        if order == JetOrder::Hessian {
            for i in 0..g {
                for j in i..g {
                    hess[(i, j)] += term * (two_pi_i * two_pi_i * (k[i] * k[j]));
                }
            }
        }
    }
    if order == JetOrder::Hessian {
        for i in 0..g {
            for j in 0..i {
                hess[(i, j)] = hess[(j, i)];
            }
        }
    }

    // θ(z′ + m₀ + τn₀) = exp(2πi a·m₀ − iπ n₀ᵀτn₀ − 2πi n₀ᵀ(z′ + b)) θ(z′);
    // the modulus of the factor is absorbed into log_scale.
    let a_m: f64 = a.iter().zip(&m0).map(|(a, m)| a * m).sum();
    let n_x_n = n0v.dot(&(x * &n0v));
    let n_zb: f64 = n0.iter().zip(&re_zb).map(|(n, r)| n * r).sum();
    let phase_f = 2.0 * PI * a_m - PI * n_x_n - 2.0 * PI * n_zb;
    let f = Complex64::from_polar(1.0, phase_f);
    let log_scale = tau.growth_exponent(z);

    let shift_vec = n0v.map(|k| two_pi_i * k);
    let out_value = f * value;
    let out_grad = (order >= JetOrder::Gradient).then(|| (&grad - &shift_vec * value) * f);
    let out_hess = (order == JetOrder::Hessian).then(|| {
        let cross = &shift_vec * grad.transpose();
        (&hess - &cross - cross.transpose() + &shift_vec * shift_vec.transpose() * value) * f
    });
    Ok(ThetaJet {
        log_scale,
        value: out_value,
        gradient: out_grad,
        hessian: out_hess,
        radius,
        bound_on_tail: bound,
        terms: points.len() / g,
    })
}

/// `θ[ε](τ, z)` with its truncation data.
pub fn theta(tau: &RiemannMatrix, z: &DVector<Complex64>, ch: &HalfCharacteristic, tol: f64) -> Result<ThetaValue> {
    let jet = theta_jet(tau, z, ch, JetOrder::Value, tol)?;
    Ok(ThetaValue {
        value: jet.raw_value(),
        normalized: jet.value,
        log_scale: jet.log_scale,
        truncation_radius: jet.radius,
        bound_on_tail: jet.bound_on_tail,
    })
}

/// `∇_z θ[ε](τ, z)`.
pub fn theta_gradient(
    tau: &RiemannMatrix,
    z: &DVector<Complex64>,
    ch: &HalfCharacteristic,
    tol: f64,
) -> Result<DVector<Complex64>> {
    Ok(theta_jet(tau, z, ch, JetOrder::Gradient, tol)?.raw_gradient())
}

/// Matrix of second partial derivatives of `θ[ε](τ, z)` in `z`.
pub fn theta_hessian(
    tau: &RiemannMatrix,
    z: &DVector<Complex64>,
    ch: &HalfCharacteristic,
    tol: f64,
) -> Result<DMatrix<Complex64>> {
    Ok(theta_jet(tau, z, ch, JetOrder::Hessian, tol)?.raw_hessian())
}

/// Second-order theta function `Θ[ε](τ, z) = θ[ε/2, 0](2τ, 2z)`.
pub fn second_order_theta(
    tau: &RiemannMatrix,
    z: &DVector<Complex64>,
    eps: &[u8],
    tol: f64,
) -> Result<ThetaValue> {
    if eps.len() != tau.genus() {
        return Err(Error::InvalidInput("ε has wrong length".into()));
    }
    let ch = HalfCharacteristic::new(eps.to_vec(), vec![0; eps.len()])?;
    theta(tau.doubled(), &(z * Complex64::from(2.0)), &ch, tol)
}

/// Jet of `Θ[ε](τ, ·)` at `z`, with derivatives taken in `z` (chain rule
/// factor 2 per derivative applied).
pub fn second_order_jet(
    tau: &RiemannMatrix,
    z: &DVector<Complex64>,
    eps: &[u8],
    order: JetOrder,
    tol: f64,
) -> Result<ThetaJet> {
    let ch = HalfCharacteristic::second_order(eps);
    let mut jet = theta_jet(tau.doubled(), &(z * Complex64::from(2.0)), &ch, order, tol)?;
    if let Some(gr) = jet.gradient.as_mut() {
        *gr *= Complex64::from(2.0);
    }
    if let Some(h) = jet.hessian.as_mut() {
        *h *= Complex64::from(4.0);
    }
    Ok(jet)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Straight summation over a large box with no reduction and no
    /// ellipsoid; kept independent of the engine above.
    fn brute_theta(tau: &DMatrix<Complex64>, z: &[Complex64], a: &[f64], b: &[f64], box_size: i64) -> Complex64 {
        let g = z.len();
        let mut total = Complex64::new(0.0, 0.0);
        let count = (2 * box_size + 1).pow(g as u32);
        for code in 0..count {
            let mut c = code;
            let k: Vec<f64> = (0..g)
                .map(|i| {
                    let n = (c % (2 * box_size + 1)) - box_size;
                    c /= 2 * box_size + 1;
                    n as f64 + a[i]
                })
                .collect();
            let mut e = Complex64::new(0.0, 0.0);
            for i in 0..g {
                for j in 0..g {
                    e += Complex64::new(0.0, PI) * tau[(i, j)] * k[i] * k[j];
                }
                e += Complex64::new(0.0, 2.0 * PI) * k[i] * (z[i] + b[i]);
            }
            total += e.exp();
        }
        total
    }

    fn tau2() -> RiemannMatrix {
        RiemannMatrix::new(DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.3, 1.1),
                Complex64::new(-0.2, 0.35),
                Complex64::new(-0.2, 0.35),
                Complex64::new(0.1, 0.9),
            ],
        ))
        .unwrap()
    }

    #[test]
    fn genus_one_theta_constant() {
        // θ(0, i) = π^{1/4} / Γ(3/4).
        let expected = PI.powf(0.25) / gamma(0.75);
        assert!((expected - 1.086434811213308).abs() < 1e-14);
        let tau = RiemannMatrix::from_imaginary(DMatrix::from_element(1, 1, 1.0)).unwrap();
        let z = DVector::from_element(1, Complex64::new(0.0, 0.0));
        let v = theta(&tau, &z, &HalfCharacteristic::zero(1), 1e-14).unwrap();
        assert!((v.value.re - expected).abs() < 1e-14, "{}", v.value);
        assert!(v.value.im.abs() < 1e-15);
        let brute = brute_theta(tau.entries(), &[z[0]], &[0.0], &[0.0], 12);
        assert!((brute - v.value).norm() < 1e-14);
    }

    #[test]
    fn matches_brute_force_with_characteristics() {
        let tau = tau2();
        let z = DVector::from_vec(vec![Complex64::new(0.7, 1.9), Complex64::new(-1.3, -0.8)]);
        for ch in HalfCharacteristic::all(2) {
            let v = theta(&tau, &z, &ch, 1e-14).unwrap();
            let brute = brute_theta(tau.entries(), z.as_slice(), &ch.a(), &ch.b(), 14);
            let rel = (brute - v.value).norm() / v.log_scale.exp();
            assert!(rel < 1e-13, "{ch:?}: {} vs {}", v.value, brute);
        }
    }

    #[test]
    fn odd_characteristics_vanish_at_origin() {
        let tau = tau2();
        let z = DVector::zeros(2);
        for ch in HalfCharacteristic::all(2).into_iter().filter(|c| c.is_odd()) {
            assert!(theta(&tau, &z, &ch, 1e-13).unwrap().value.norm() < 1e-13);
        }
    }

    #[test]
    fn even_gradient_vanishes_at_origin() {
        let tau = tau2();
        let z = DVector::zeros(2);
        for ch in HalfCharacteristic::all(2).into_iter().filter(|c| !c.is_odd()) {
            assert!(theta_gradient(&tau, &z, &ch, 1e-13).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn tail_radius_decreases_bound() {
        let (r, b) = truncation_radius(3, 1.2, 1e-12);
        assert!(b < 1e-12);
        assert!(gaussian_tail_bound(3, 1.2, r - 0.01) >= 1e-12 || r <= (3f64.sqrt() + 1.2) / 2.0 + 1e-9);
    }

    #[test]
    fn rejects_tolerance_out_of_range() {
        let tau = tau2();
        let z = DVector::zeros(2);
        assert!(theta(&tau, &z, &HalfCharacteristic::zero(2), 1e-16).is_err());
        assert!(theta(&tau, &z, &HalfCharacteristic::zero(2), 1e-2).is_err());
    }
}
