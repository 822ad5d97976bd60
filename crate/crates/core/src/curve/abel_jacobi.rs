use nalgebra::DVector;
use num_complex::Complex64;

use super::{CurvePoint, Divisor, HyperellipticCurve, JacobianLift, PeriodData};
use crate::error::{Error, Result};
use crate::numeric::integrate_adaptive;

pub const DEFAULT_AJ_TOL: f64 = 1e-13;
/// A point closer than this (relative to the span) to a branch point, but
/// not on it, is rejected: the final leg would be nearly singular.
const DEGENERATE_DISTANCE: f64 = 1e-8;

/// `(1, x, …, x^{g−1}) / y` at `x` on the reference branch.
fn differentials(curve: &HyperellipticCurve, x: Complex64) -> DVector<Complex64> {
    let g = curve.genus;
    let inv_y = curve.y_branch(x).inv();
    let mut v = DVector::zeros(g);
    let mut xp = inv_y;
    for k in 0..g {
        v[k] = xp;
        xp *= x;
    }
    v
}

/// `∫_∞^x (1, …, x^{g−1}) dx / y` on the reference branch.
///
/// The path is fixed: along the real axis from `∞` to `X₀ = e_{2g+1} + L/2`
/// (`L` the span of the branch points), then straight to the corner
/// `Re x + iH` with `H = ±L/2` on the side of `Im x` (upper side when
/// `Im x = 0`), then vertically to `x`. Away from `X₀` the path stays off the
/// real axis, so the principal branch of every factor `√(x − e_k)` is
/// continuous along it and the end value agrees with
/// [`HyperellipticCurve::y_branch`].
fn unnormalized_integral(curve: &HyperellipticCurve, x: Complex64, tol: f64) -> Result<DVector<Complex64>> {
    let g = curve.genus;
    let span = curve.span();
    let x0 = curve.roots[curve.roots.len() - 1] + 0.5 * span;
    let h = if x.im < 0.0 { -0.5 * span } else { 0.5 * span };
    let corner = Complex64::new(x.re, h);

    // ∞ → X₀ with x = X₀ + L(1/s² − 1), which makes the integrand analytic at s = 0.
    let leg1 = |s: f64| {
        let xs = Complex64::from(x0 + span * (1.0 / (s * s) - 1.0));
        let dx = Complex64::from(-2.0 * span / (s * s * s));
        differentials(curve, xs) * dx
    };
    let mut total = integrate_adaptive(&leg1, 0.0, 1.0, g, tol)?;

    let dir = corner - x0;
    if dir.norm() > 0.0 {
        let leg2 = |t: f64| differentials(curve, x0 + dir * t) * dir;
        total += integrate_adaptive(&leg2, 0.0, 1.0, g, tol)?;
    }

    // corner → x with x(u) = x + (corner − x)u², absorbing a square-root endpoint.
    let back = corner - x;
    if back.norm() > 0.0 {
        let leg3 = |u: f64| differentials(curve, x + back * (u * u)) * (back * (2.0 * u));
        total -= integrate_adaptive(&leg3, 0.0, 1.0, g, tol)?;
    }
    Ok(total)
}

/// `ζ(P) = ∫_∞^P ω̂` for the normalized differentials `ω̂ = ω_a⁻¹ ω`.
pub fn abel_jacobi(curve: &HyperellipticCurve, p: &CurvePoint, periods: &PeriodData, tol: f64) -> Result<JacobianLift> {
    let g = curve.genus;
    if periods.genus() != g {
        return Err(Error::InvalidInput("periods belong to a curve of another genus".into()));
    }
    let (x, y) = match p {
        CurvePoint::Infinity => return Ok(JacobianLift::zero(g)),
        CurvePoint::Finite { x, y } => (*x, *y),
    };
    if !curve.contains(p) {
        return Err(Error::InvalidInput(format!("point ({x}, {y}) is not on the curve")));
    }
    let span = curve.span();
    for &e in &curve.roots {
        let d = (x - e).norm();
        if d > 0.0 && d < DEGENERATE_DISTANCE * span {
            return Err(Error::PathDegenerate { branch_point: e, distance: d });
        }
    }
    let reference = curve.y_branch(x);
    let sign = if (y - reference).norm() <= (y + reference).norm() { 1.0 } else { -1.0 };
    let u = unnormalized_integral(curve, x, tol)?;
    Ok(JacobianLift::new(&periods.normalization * u * Complex64::from(sign)))
}

/// Linear extension of [`abel_jacobi`] to divisors.
pub fn abel_jacobi_divisor(
    curve: &HyperellipticCurve,
    d: &Divisor,
    periods: &PeriodData,
    tol: f64,
) -> Result<JacobianLift> {
    let mut acc = JacobianLift::zero(curve.genus);
    for &(p, m) in &d.terms {
        acc += &(&abel_jacobi(curve, &p, periods, tol)? * m as f64);
    }
    Ok(acc)
}
