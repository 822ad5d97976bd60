//! Sections of `2Θ` as coefficient vectors in the basis `Θ[ε]`, and the
//! space `Γ₀₀` of sections vanishing to order at least 4 at the origin.
//!
//! Every `Θ[ε]` is even, so a section vanishes to order 4 at 0 exactly when
//! its value and its Hessian vanish there. These `1 + g(g+1)/2` linear
//! conditions form the condition matrix; all questions about `Γ₀₀` become
//! finite-dimensional linear algebra on it.
//!
//! The section attached to `x` is `s_x(z) = Σ_ε Θ[ε](x) Θ[ε](z) =
//! θ(z + x) θ(z − x)`. Coefficients are kept on the normalized scale of the
//! theta engine (a positive factor depending on `x` removed), under which the
//! Hessian of `s_x` at 0 for `x ∈ Θ` is `−2 ∇θ(x) ∇θ(x)ᵀ` with the
//! normalized gradient.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::context::CurveContext;
use crate::curve::{BellSample, Divisor, JacobianLift};
use crate::error::{Error, Result};
use crate::geometry::{kummer_matrix, second_order_values, theta_derivatives};
use crate::numeric::{column_space, null_space, numerical_rank, projective_angle, svd, RankCertificate};
use crate::theta::{epsilon_vectors, second_order_jet, JetOrder, RiemannMatrix};

const ROUNDOFF_ROW: f64 = 1e-12;

/// Expected `dim Γ₀₀ = 2^g − g(g+1)/2 − 1` for an indecomposable `τ`.
pub fn expected_gamma00_dimension(g: usize) -> i64 {
    (1i64 << g) - (g * (g + 1) / 2) as i64 - 1
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionCoefficients {
    #[serde(serialize_with = "crate::report::ser_vector")]
    pub coeffs: DVector<Complex64>,
}

/// Value and upper-triangular Hessian entries (row-major, `i ≤ j`) at 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaylorConditions {
    #[serde(serialize_with = "crate::report::ser_vector")]
    pub values: DVector<Complex64>,
}

impl TaylorConditions {
    pub fn norm(&self) -> f64 {
        self.values.norm()
    }
}

/// The condition matrix: row 0 holds `Θ[ε](0)`, the remaining rows the
/// Hessian entries `∂_i ∂_j Θ[ε](0)` for `i ≤ j`.
#[derive(Debug, Clone)]
pub struct ConditionMatrix {
    pub matrix: DMatrix<Complex64>,
    pub genus: usize,
}

impl ConditionMatrix {
    pub fn new(tau: &RiemannMatrix, tol: f64) -> Result<Self> {
        let g = tau.genus();
        let eps = epsilon_vectors(g);
        let rows = 1 + g * (g + 1) / 2;
        let mut m = DMatrix::zeros(rows, eps.len());
        let zero = DVector::zeros(g);
        for (col, e) in eps.iter().enumerate() {
            // At z = 0 the normalized and raw scales coincide.
            let j = second_order_jet(tau, &zero, e, JetOrder::Hessian, tol)?;
            m[(0, col)] = j.value;
            let h = j.hessian();
            let mut r = 1;
            for a in 0..g {
                for b in a..g {
                    m[(r, col)] = h[(a, b)];
                    r += 1;
                }
            }
        }
        Ok(Self { matrix: m, genus: g })
    }

    /// Rows and then columns scaled to unit norm. Rows at roundoff level
    /// relative to the largest row are identically zero conditions and are
    /// left unscaled.
    fn equilibrated(&self) -> (DMatrix<Complex64>, DVector<f64>) {
        let mut m = self.row_equilibrated();
        let mut col_scale = DVector::from_element(m.ncols(), 1.0);
        for (j, mut col) in m.column_iter_mut().enumerate() {
            let n = col.norm();
            if n > 0.0 {
                col /= Complex64::from(n);
                col_scale[j] = 1.0 / n;
            }
        }
        (m, col_scale)
    }

    fn row_equilibrated(&self) -> DMatrix<Complex64> {
        let mut m = self.matrix.clone();
        let largest = m.row_iter().map(|r| r.norm()).fold(0.0, f64::max);
        for mut row in m.row_iter_mut() {
            let n = row.norm();
            if n > ROUNDOFF_ROW * largest {
                row /= Complex64::from(n);
            }
        }
        m
    }
}

pub fn section_from_point(tau: &RiemannMatrix, x: &JacobianLift, tol: f64) -> Result<SectionCoefficients> {
    Ok(SectionCoefficients { coeffs: second_order_values(tau, &x.z, false, tol)?.0 })
}

pub fn taylor_conditions(cond: &ConditionMatrix, s: &SectionCoefficients) -> Result<TaylorConditions> {
    if s.coeffs.len() != cond.matrix.ncols() {
        return Err(Error::InvalidInput("section has the wrong number of coefficients".into()));
    }
    Ok(TaylorConditions { values: &cond.matrix * &s.coeffs })
}

/// Decided rank plus the ratio that decided it; errors when either the last
/// kept or the first dropped singular value sits in `[tol, 10·tol]`.
fn guarded(cert: RankCertificate) -> Result<RankCertificate> {
    let tol = cert.tolerance_used;
    let upper = 10.0 * tol;
    let kept = cert.retained_ratio();
    for ratio in [kept, cert.gap_ratio] {
        if ratio >= tol && ratio <= upper {
            return Err(Error::IndeterminateRank { ratio, tol, upper });
        }
    }
    Ok(cert)
}

#[derive(Debug, Clone, Serialize)]
pub struct Gamma00Dimension {
    pub dimension: usize,
    pub expected: i64,
    pub matches_expected: bool,
    pub certificate: RankCertificate,
    /// Columns span `Γ₀₀` in the `Θ[ε]` basis.
    #[serde(serialize_with = "crate::report::ser_matrix")]
    pub basis: DMatrix<Complex64>,
}

/// `dim Γ₀₀` as the nullity of the equilibrated condition matrix.
pub fn gamma00_dimension(cond: &ConditionMatrix, rank_tol: f64) -> Result<Gamma00Dimension> {
    let (eq, col_scale) = cond.equilibrated();
    let (cert, kernel) = null_space(&eq, rank_tol)?;
    let cert = guarded(cert)?;
    // Undo the column scaling: ker M = D_c ker(M D_c).
    let mut basis = kernel;
    for (j, mut row) in basis.row_iter_mut().enumerate() {
        row *= Complex64::from(col_scale[j]);
    }
    let dimension = basis.ncols();
    let expected = expected_gamma00_dimension(cond.genus);
    Ok(Gamma00Dimension { dimension, expected, matches_expected: dimension as i64 == expected, certificate: cert, basis })
}

#[derive(Debug, Clone, Serialize)]
pub struct Gamma00Combination {
    #[serde(serialize_with = "crate::report::ser_complex")]
    pub gamma: Complex64,
    #[serde(serialize_with = "crate::report::ser_complex")]
    pub lambda: Complex64,
    pub section: SectionCoefficients,
    pub conditions: TaylorConditions,
    /// `‖M(s₁ − λ s₂)‖ / (‖M s₁‖ + |λ| ‖M s₂‖)`.
    pub relative_residual: f64,
    pub gauss_angle: f64,
}

/// `s_{x₁} − γ² s_{x₂}` with `∇θ(x₁) = γ ∇θ(x₂)`, for two smooth points of Θ
/// with the same Gauss image.
pub fn gamma00_combination(
    tau: &RiemannMatrix,
    cond: &ConditionMatrix,
    x1: &JacobianLift,
    x2: &JacobianLift,
    gradient_threshold: f64,
    tol: f64,
) -> Result<Gamma00Combination> {
    let (g1, _) = theta_derivatives(tau, x1, tol)?;
    let (g2, _) = theta_derivatives(tau, x2, tol)?;
    if g1.norm() <= gradient_threshold || g2.norm() <= gradient_threshold {
        return Err(Error::PreconditionFailed("both points must be smooth points of Θ".into()));
    }
    let gauss_angle = projective_angle(&g1, &g2)?;
    if gauss_angle >= 1e-6 {
        return Err(Error::PreconditionFailed(format!("Gauss images differ (angle {gauss_angle:e})")));
    }
    let gamma = g2.dotc(&g1) / Complex64::from(g2.norm_squared());
    let lambda = gamma * gamma;
    let s1 = section_from_point(tau, x1, tol)?;
    let s2 = section_from_point(tau, x2, tol)?;
    let c1 = taylor_conditions(cond, &s1)?;
    let c2 = taylor_conditions(cond, &s2)?;
    let section = SectionCoefficients { coeffs: &s1.coeffs - &s2.coeffs * lambda };
    let conditions = taylor_conditions(cond, &section)?;
    let size = c1.norm() + lambda.norm() * c2.norm();
    let relative_residual = if size > 0.0 { conditions.norm() / size } else { 0.0 };
    Ok(Gamma00Combination { gamma, lambda, section, conditions, relative_residual, gauss_angle })
}

#[derive(Debug, Clone, Serialize)]
pub struct Gamma00Intersection {
    /// `dim (Γ₀₀ ∩ span{s_{x_k}})`.
    pub dimension: usize,
    pub span_dimension: usize,
    /// The sections are linearly dependent (span smaller than the number of points).
    pub degenerate_span: bool,
    pub span_certificate: RankCertificate,
    /// Singular values of the conditions restricted to the span, relative to
    /// the largest singular value of the condition matrix.
    pub restricted_spectrum: Vec<f64>,
}

/// `dim (Γ₀₀ ∩ span{s_{x_1}, …})` as `dim span − rank(M Q)` with `Q` an
/// orthonormal basis of the span. Rank decisions on `M Q` are relative to
/// `‖M‖`, so a span lying inside `Γ₀₀` is recognized.
pub fn gamma00_intersection(
    tau: &RiemannMatrix,
    cond: &ConditionMatrix,
    points: &[JacobianLift],
    rank_tol: f64,
    tol: f64,
) -> Result<Gamma00Intersection> {
    if points.is_empty() {
        return Err(Error::InvalidInput("need at least one point".into()));
    }
    let n = cond.matrix.ncols();
    let mut s = DMatrix::zeros(n, points.len());
    for (k, x) in points.iter().enumerate() {
        let c = section_from_point(tau, x, tol)?.coeffs;
        s.set_column(k, &(&c / Complex64::from(c.norm())));
    }
    let (span_certificate, q) = column_space(&s, rank_tol)?;
    let span_certificate = guarded(span_certificate)?;
    let m = cond.row_equilibrated();
    let m_norm = svd(&m)?.singular_values[0];
    let restricted: Vec<f64> = if q.ncols() == 0 {
        Vec::new()
    } else {
        svd(&(&m * &q))?.singular_values.iter().map(|v| v / m_norm).collect()
    };
    for &r in &restricted {
        if r >= rank_tol && r <= 10.0 * rank_tol {
            return Err(Error::IndeterminateRank { ratio: r, tol: rank_tol, upper: 10.0 * rank_tol });
        }
    }
    let restricted_rank = restricted.iter().filter(|&&v| v > rank_tol).count();
    let span_dimension = span_certificate.decided_rank;
    Ok(Gamma00Intersection {
        dimension: span_dimension - restricted_rank,
        span_dimension,
        degenerate_span: span_dimension < points.len(),
        span_certificate,
        restricted_spectrum: restricted,
    })
}

/// The trisecant criterion: for three points of Θ, not all singular, they
/// span a trisecant exactly when the intersection has dimension 1.
pub fn trisecant_gamma00_test(
    tau: &RiemannMatrix,
    cond: &ConditionMatrix,
    x: [&JacobianLift; 3],
    rank_tol: f64,
    tol: f64,
) -> Result<Gamma00Intersection> {
    gamma00_intersection(tau, cond, &[x[0].clone(), x[1].clone(), x[2].clone()], rank_tol, tol)
}

#[derive(Debug, Clone, Serialize)]
pub struct FiberPoint {
    pub subdivisor: Divisor,
    pub lift: JacobianLift,
    pub smooth: bool,
}

/// The points `ζ(D) − κ` for all `D ≤ K₀` of degree `g − 1`, deduplicated by
/// multiplicity vector.
pub fn fiber_points(ctx: &CurveContext, k0: &Divisor) -> Result<Vec<FiberPoint>> {
    let g = ctx.genus();
    if k0.degree() != 2 * g as i64 - 2 || !k0.is_effective() {
        return Err(Error::InvalidInput("K₀ must be effective of degree 2g − 2".into()));
    }
    let mut out = Vec::new();
    let mults: Vec<usize> = k0.terms.iter().map(|t| t.1 as usize).collect();
    let mut l = vec![0usize; mults.len()];
    fn rec(i: usize, left: usize, mults: &[usize], l: &mut Vec<usize>, acc: &mut Vec<Vec<usize>>) {
        if i == mults.len() {
            if left == 0 {
                acc.push(l.clone());
            }
            return;
        }
        for k in 0..=mults[i].min(left) {
            l[i] = k;
            rec(i + 1, left - k, mults, l, acc);
        }
        l[i] = 0;
    }
    let mut vectors = Vec::new();
    rec(0, g - 1, &mults, &mut l, &mut vectors);
    for v in vectors {
        let mut d = Divisor::new();
        for (t, &k) in k0.terms.iter().zip(&v) {
            if k > 0 {
                d.add_point(t.0, k as i64);
            }
        }
        let lift = ctx.theta_point(&d)?;
        let (grad, _) = theta_derivatives(ctx.tau(), &lift, ctx.tol.theta)?;
        out.push(FiberPoint { subdivisor: d, lift, smooth: grad.norm() > ctx.scale.gradient_threshold() });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SpanReport {
    pub dim_v: usize,
    pub dim_w: usize,
    pub dim_gamma00: usize,
    pub smooth_points: usize,
    pub special_points: usize,
    pub chain_holds: bool,
    pub v_reaches_gamma00: bool,
    pub w_reaches_gamma00: bool,
}

/// `V_p` is spanned by the combinations `t_D = s_{x_{D₁}} − λ_D s_{x_D}` over
/// the smooth fibre points (`D₁` the first of them); `W_p` adds `s_{x_E}`
/// for the special subdivisors `E`.
pub fn span_vp_wp(ctx: &CurveContext, cond: &ConditionMatrix, sample: &BellSample) -> Result<SpanReport> {
    let tau = ctx.tau();
    let pts = fiber_points(ctx, &sample.k0)?;
    let smooth: Vec<&FiberPoint> = pts.iter().filter(|p| p.smooth).collect();
    let special: Vec<&FiberPoint> = pts.iter().filter(|p| !p.smooth).collect();
    if pts.is_empty() {
        return Err(Error::InvalidInput("empty fibre".into()));
    }
    let mut v_cols: Vec<DVector<Complex64>> = Vec::new();
    if let Some(first) = smooth.first() {
        for other in &smooth[1..] {
            let comb = gamma00_combination(tau, cond, &first.lift, &other.lift, ctx.scale.gradient_threshold(), ctx.tol.theta)?;
            let c = comb.section.coeffs;
            let norm = c.norm();
            // Combinations of a point with itself or with its negative vanish.
            let base = section_from_point(tau, &first.lift, ctx.tol.theta)?.coeffs.norm();
            if norm > ctx.tol.rank * base {
                v_cols.push(&c / Complex64::from(norm));
            }
        }
    }
    let mut w_cols = v_cols.clone();
    for e in &special {
        let c = section_from_point(tau, &e.lift, ctx.tol.theta)?.coeffs;
        w_cols.push(&c / Complex64::from(c.norm()));
    }
    let rank_of = |cols: &[DVector<Complex64>]| -> Result<usize> {
        if cols.is_empty() {
            return Ok(0);
        }
        let m = DMatrix::from_columns(cols);
        Ok(numerical_rank(&m, ctx.tol.rank)?.decided_rank)
    };
    let dim_v = rank_of(&v_cols)?;
    let dim_w = rank_of(&w_cols)?;
    let dim_gamma00 = gamma00_dimension(cond, ctx.tol.rank)?.dimension;
    Ok(SpanReport {
        dim_v,
        dim_w,
        dim_gamma00,
        smooth_points: smooth.len(),
        special_points: special.len(),
        chain_holds: dim_v <= dim_w && dim_w <= dim_gamma00,
        v_reaches_gamma00: dim_v == dim_gamma00,
        w_reaches_gamma00: dim_w == dim_gamma00,
    })
}

/// Projective dimension spanned by the distinct Kummer images of a Gauss
/// fibre, against the bound `2^g − g(g+1)/2 − 1`.
#[derive(Debug, Clone, Serialize)]
pub struct FiberSpanBound {
    pub projective_dimension: i64,
    pub bound: i64,
    pub holds: bool,
    pub certificate: RankCertificate,
}

pub fn fiber_span_bound(ctx: &CurveContext, k0: &Divisor) -> Result<FiberSpanBound> {
    let pts = fiber_points(ctx, k0)?;
    let lifts: Vec<JacobianLift> = pts.into_iter().map(|p| p.lift).collect();
    let km = kummer_matrix(ctx.tau(), &lifts, ctx.tol.theta)?;
    let certificate = numerical_rank(&km, ctx.tol.rank)?;
    let projective_dimension = certificate.decided_rank as i64 - 1;
    let bound = expected_gamma00_dimension(ctx.genus());
    Ok(FiberSpanBound { projective_dimension, bound, holds: projective_dimension <= bound, certificate })
}

#[cfg(test)]
mod tests {
    use super::*;

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
    fn expected_dimensions() {
        assert_eq!(expected_gamma00_dimension(2), 0);
        assert_eq!(expected_gamma00_dimension(3), 1);
        assert_eq!(expected_gamma00_dimension(4), 5);
    }

    #[test]
    fn origin_section_is_theta_squared() {
        let tau = tau3();
        let s = section_from_point(&tau, &JacobianLift::zero(3), 1e-13).unwrap();
        let zs = [
            DVector::from_vec(vec![Complex64::new(0.1, 0.2), Complex64::new(0.3, -0.1), Complex64::new(-0.2, 0.05)]),
            DVector::from_vec(vec![Complex64::new(0.4, 0.0), Complex64::new(-0.3, 0.3), Complex64::new(0.0, 0.1)]),
        ];
        for z in &zs {
            let (basis, _) = second_order_values(&tau, z, false, 1e-13).unwrap();
            let lhs = s.coeffs.dot(&basis);
            let th = crate::theta::theta_jet(&tau, z, &crate::theta::HalfCharacteristic::zero(3), JetOrder::Value, 1e-13).unwrap();
            // Both sides carry the normalization factor exp(−2L(z)).
            let rhs = th.value * th.value;
            assert!((lhs - rhs).norm() < 1e-10 * rhs.norm().max(1e-3), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn conditions_are_linear() {
        let tau = tau3();
        let cond = ConditionMatrix::new(&tau, 1e-13).unwrap();
        let a = section_from_point(&tau, &JacobianLift::new(DVector::from_element(3, Complex64::new(0.1, 0.2))), 1e-13).unwrap();
        let b = section_from_point(&tau, &JacobianLift::new(DVector::from_element(3, Complex64::new(-0.3, 0.1))), 1e-13).unwrap();
        let (al, be) = (Complex64::new(0.5, -1.0), Complex64::new(2.0, 0.3));
        let comb = SectionCoefficients { coeffs: &a.coeffs * al + &b.coeffs * be };
        let lhs = taylor_conditions(&cond, &comb).unwrap().values;
        let rhs = taylor_conditions(&cond, &a).unwrap().values * al + taylor_conditions(&cond, &b).unwrap().values * be;
        assert!((lhs - &rhs).norm() < 1e-13 * rhs.norm());
    }

    #[test]
    fn indecomposable_dimension() {
        let d = gamma00_dimension(&ConditionMatrix::new(&tau3(), 1e-13).unwrap(), 1e-7).unwrap();
        assert_eq!(d.dimension, 1);
        let c = ConditionMatrix::new(&tau3(), 1e-13).unwrap();
        assert!((&c.matrix * &d.basis).norm() < 1e-10 * c.matrix.norm());
    }

    #[test]
    fn decomposable_dimension_is_reported() {
        // A product of elliptic curves has extra Γ₀₀ sections.
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::new(0.1, 1.1),
            Complex64::new(-0.2, 0.9),
            Complex64::new(0.3, 1.3),
        ]));
        let d = gamma00_dimension(&ConditionMatrix::new(&RiemannMatrix::new(m).unwrap(), 1e-13).unwrap(), 1e-7).unwrap();
        assert!(!d.matches_expected, "dimension {}", d.dimension);
    }
}
