//! Closed-form references that share no code with the engines they check.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Arithmetic-geometric mean of two positive reals.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= 4.0 * f64::EPSILON * a {
            break;
        }
        (a, b) = (0.5 * (a + b), (a * b).sqrt());
    }
    0.5 * (a + b)
}

/// `τ` of `y² = c(x − e₁)(x − e₂)(x − e₃)`, `e₁ < e₂ < e₃`, from the AGM:
/// `τ = i · M(√(e₃ − e₁), √(e₃ − e₂)) / M(√(e₃ − e₁), √(e₂ − e₁))`.
pub fn agm_tau(roots: &[f64]) -> Result<Complex64> {
    let [e1, e2, e3] = roots else {
        return Err(Error::InvalidInput("the AGM reference needs three roots".into()));
    };
    if !(e1 < e2 && e2 < e3) {
        return Err(Error::InvalidInput("roots must be increasing".into()));
    }
    let num = agm((e3 - e1).sqrt(), (e3 - e2).sqrt());
    let den = agm((e3 - e1).sqrt(), (e2 - e1).sqrt());
    Ok(Complex64::new(0.0, num / den))
}
