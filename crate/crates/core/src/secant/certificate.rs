use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::context::Tolerances;
use crate::curve::JacobianLift;
use crate::error::{Error, Result};
use crate::geometry::{kummer_matrix, second_order_values, theta_derivatives, theta_residual, ThetaDivisorScale};
use crate::numeric::{least_squares, numerical_rank, projective_angle, RankCertificate};
use crate::theta::RiemannMatrix;

#[derive(Debug, Clone, Serialize)]
pub struct GaussAngle {
    pub i: usize,
    pub j: usize,
    pub angle: f64,
}

/// Auditable record of a secant claim for `r` points: their Kummer images
/// span at most an `(r − 2)`-plane, and every `r − 1` of them are in general
/// position.
#[derive(Debug, Clone, Serialize)]
pub struct SecantCertificate {
    pub lifts: Vec<JacobianLift>,
    pub kummer_matrix_spectrum: Vec<f64>,
    pub rank_cert: RankCertificate,
    pub claimed_rank: usize,
    /// One entry per `(r − 1)`-subset, omitting index `k` for entry `k`.
    pub general_position: Vec<bool>,
    pub theta_residuals: Vec<f64>,
    /// Normalized gradient norms.
    pub gradient_norms: Vec<f64>,
    pub gauss_defined: Vec<bool>,
    pub gauss_angles: Vec<GaussAngle>,
    /// Least-squares coefficients writing the first Kummer vector in terms
    /// of the others (normalized scale).
    #[serde(serialize_with = "ser_complex_slice")]
    pub beta: Vec<Complex64>,
    /// `‖∇₁∇₁ᵀ − Σ β_k ∇_k∇_kᵀ‖` relative to the size of its terms; present
    /// when the points were expected on Θ.
    pub outer_product_residual: Option<f64>,
    pub expect_on_theta: bool,
    pub passes: bool,
}

fn ser_complex_slice<S: serde::Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(), s)
}

impl SecantCertificate {
    pub fn max_theta_residual(&self) -> f64 {
        self.theta_residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_gauss_angle(&self) -> f64 {
        self.gauss_angles.iter().map(|a| a.angle).fold(0.0, f64::max)
    }

    /// `σ_r / σ_1`, the singular value that the claim says is zero.
    pub fn collinearity_gap(&self) -> f64 {
        let s = &self.rank_cert.singular_values;
        match (s.first(), s.get(self.claimed_rank)) {
            (Some(&s1), Some(&sr)) if s1 > 0.0 => sr / s1,
            _ => 0.0,
        }
    }
}

/// Certify that the Kummer images of `lifts` are linearly dependent while
/// every proper subset of size `r − 1` is independent.
pub fn certify_secant(
    tau: &RiemannMatrix,
    lifts: &[JacobianLift],
    expect_on_theta: bool,
    scale: &ThetaDivisorScale,
    tol: &Tolerances,
) -> Result<SecantCertificate> {
    let r = lifts.len();
    if r < 3 {
        return Err(Error::InvalidInput(format!("a secant certificate needs at least 3 points, got {r}")));
    }
    let km = kummer_matrix(tau, lifts, tol.theta)?;
    let rank_cert = numerical_rank(&km, tol.rank)?;
    let mut general_position = Vec::with_capacity(r);
    for skip in 0..r {
        let rows: Vec<usize> = (0..r).filter(|&i| i != skip).collect();
        let sub = km.select_rows(&rows);
        general_position.push(numerical_rank(&sub, tol.rank)?.is_full_rank());
    }

    let mut theta_residuals = Vec::with_capacity(r);
    let mut grads = Vec::with_capacity(r);
    for z in lifts {
        theta_residuals.push(theta_residual(tau, z, tol.theta)?.residual);
        grads.push(theta_derivatives(tau, z, tol.theta)?.0);
    }
    let gradient_norms: Vec<f64> = grads.iter().map(|g| g.norm()).collect();
    let gauss_defined: Vec<bool> = gradient_norms.iter().map(|&n| n > scale.gradient_threshold()).collect();
    let mut gauss_angles = Vec::new();
    for i in 0..r {
        for j in i + 1..r {
            if gauss_defined[i] && gauss_defined[j] {
                gauss_angles.push(GaussAngle { i, j, angle: projective_angle(&grads[i], &grads[j])? });
            }
        }
    }

    // β from the normalized (not unit-scaled) Kummer vectors, so that the
    // section Hessians −2∇θ∇θᵀ are on the same scale as the gradients.
    let g = tau.genus();
    let n = 1usize << g;
    let mut cols = DMatrix::zeros(n, r - 1);
    let mut first = DVector::zeros(n);
    for (k, z) in lifts.iter().enumerate() {
        let (v, _) = second_order_values(tau, &z.z, false, tol.theta)?;
        if k == 0 {
            first = v;
        } else {
            cols.set_column(k - 1, &v);
        }
    }
    let beta_vec = least_squares(&cols, &first, 1e-14)?;
    let beta: Vec<Complex64> = beta_vec.iter().copied().collect();
    let outer_product_residual = expect_on_theta.then(|| {
        let mut acc = &grads[0] * grads[0].transpose();
        let mut size = grads[0].norm_squared();
        for (k, b) in beta.iter().enumerate() {
            acc -= &grads[k + 1] * grads[k + 1].transpose() * *b;
            size += b.norm() * grads[k + 1].norm_squared();
        }
        if size > 0.0 {
            acc.norm() / size
        } else {
            0.0
        }
    });

    let claimed_rank = r - 1;
    let passes = rank_cert.rank_at_most(claimed_rank) && general_position.iter().all(|&b| b);
    Ok(SecantCertificate {
        lifts: lifts.to_vec(),
        kummer_matrix_spectrum: rank_cert.singular_values.clone(),
        rank_cert,
        claimed_rank,
        general_position,
        theta_residuals,
        gradient_norms,
        gauss_defined,
        gauss_angles,
        beta,
        outer_product_residual,
        expect_on_theta,
        passes,
    })
}

/// Rank of a family of gradients against the bound `⌊r/2⌋` on the dimension
/// of their span.
#[derive(Debug, Clone, Serialize)]
pub struct SpanCheck {
    pub cert: RankCertificate,
    pub bound: usize,
    pub holds: bool,
}

pub fn igusa_span_check(gradients: &[DVector<Complex64>], tol: f64) -> Result<SpanCheck> {
    let r = gradients.len();
    if r < 2 {
        return Err(Error::InvalidInput("need at least two gradients".into()));
    }
    let g = gradients[0].len();
    if gradients.iter().any(|v| v.len() != g) {
        return Err(Error::InvalidInput("gradients of different length".into()));
    }
    let mut m = DMatrix::zeros(r, g);
    for (i, v) in gradients.iter().enumerate() {
        let n = v.norm();
        let row = if n > 0.0 { v / Complex64::from(n) } else { v.clone() };
        m.set_row(i, &row.transpose());
    }
    let cert = numerical_rank(&m, tol)?;
    let bound = r / 2;
    Ok(SpanCheck { holds: cert.rank_at_most(bound), cert, bound })
}
