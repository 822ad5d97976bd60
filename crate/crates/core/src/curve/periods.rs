use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::{branch_sqrt, HyperellipticCurve};
use crate::error::{Error, Result};
use crate::numeric::quadrature_nodes;
use crate::theta::RiemannMatrix;

pub const DEFAULT_PERIOD_TOL: f64 = 1e-13;
const MAX_NODES: usize = 1 << 15;
pub const TAU_SYMMETRY_TOL: f64 = 1e-9;
pub const BILINEAR_TOL: f64 = 1e-9;

/// Periods of `x^{k−1} dx / y` over the homology basis, and the normalized
/// Riemann matrix.
///
/// The cycle `a_j` encircles `[e_{2j−1}, e_{2j}]`. Writing `c_m` for the loop
/// around the gap `[e_{2m}, e_{2m+1}]`, `b_j = c_j + … + c_g`.
#[derive(Debug, Clone, Serialize)]
pub struct PeriodData {
    #[serde(serialize_with = "crate::report::ser_matrix")]
    pub omega_a: DMatrix<Complex64>,
    #[serde(serialize_with = "crate::report::ser_matrix")]
    pub omega_b: DMatrix<Complex64>,
    #[serde(skip)]
    pub tau: RiemannMatrix,
    /// `ω_a⁻¹`: maps the differentials `x^{k−1}dx/y` to the normalized basis.
    #[serde(serialize_with = "crate::report::ser_matrix")]
    pub normalization: DMatrix<Complex64>,
    pub nodes_used: usize,
    pub symmetry_residual: f64,
    pub bilinear_residual: f64,
}

impl PeriodData {
    pub fn genus(&self) -> usize {
        self.tau.genus()
    }
}

/// `2 ∫ x^{k−1} / y(x + i0) dx` over `[lo, hi]` for `k = 1..g`, with `lo, hi`
/// consecutive branch points, by an `n`-point Gauss–Chebyshev rule that
/// absorbs the endpoint square roots.
fn loop_integrals(curve: &HyperellipticCurve, lo: usize, hi: usize, n: usize) -> Result<Vec<Complex64>> {
    let g = curve.genus;
    let a = curve.roots[lo];
    let b = curve.roots[hi];
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let sqrt_c = branch_sqrt(Complex64::from(curve.leading()));
    let mut acc = vec![Complex64::new(0.0, 0.0); g];
    for q in quadrature_nodes(n)? {
        let x = mid + half * q.node;
        // y(x + i0) = i √c √((x−a)(b−x)) Π_{other} √(x − e).
        let mut denom = Complex64::i() * sqrt_c;
        for (k, &e) in curve.roots.iter().enumerate() {
            if k != lo && k != hi {
                denom *= branch_sqrt(Complex64::from(x - e));
            }
        }
        let mut xp = Complex64::new(2.0 * q.weight, 0.0) / denom;
        for v in acc.iter_mut() {
            *v += xp;
            xp *= x;
        }
    }
    Ok(acc)
}

fn raw_periods(curve: &HyperellipticCurve, n: usize) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    let g = curve.genus;
    let mut a = DMatrix::zeros(g, g);
    let mut gaps = DMatrix::zeros(g, g);
    for j in 0..g {
        let col = loop_integrals(curve, 2 * j, 2 * j + 1, n)?;
        let gap = loop_integrals(curve, 2 * j + 1, 2 * j + 2, n)?;
        for k in 0..g {
            a[(k, j)] = col[k];
            gaps[(k, j)] = gap[k];
        }
    }
    let mut b = DMatrix::zeros(g, g);
    for j in 0..g {
        for m in j..g {
            for k in 0..g {
                b[(k, j)] += gaps[(k, m)];
            }
        }
    }
    Ok((a, b))
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Period matrices and normalized `τ = ω_a⁻¹ ω_b`. The node count doubles
/// from 16 until successive estimates agree to `tol` relative.
pub fn period_matrix(curve: &HyperellipticCurve, tol: f64) -> Result<PeriodData> {
    if !(tol > 0.0 && tol < 1e-3) {
        return Err(Error::InvalidInput(format!("period tolerance {tol:e} outside (0, 1e-3)")));
    }
    let mut n = 16;
    let (mut a, mut b) = raw_periods(curve, n)?;
    loop {
        let next_n = 2 * n;
        if next_n > MAX_NODES {
            return Err(Error::NumericalFailure(format!("period quadrature did not converge with {MAX_NODES} nodes")));
        }
        let (a2, b2) = raw_periods(curve, next_n)?;
        let scale = max_abs(&a2).max(max_abs(&b2));
        let diff = max_abs(&(&a2 - &a)).max(max_abs(&(&b2 - &b)));
        a = a2;
        b = b2;
        n = next_n;
        if diff <= tol * scale {
            break;
        }
    }
    let a_inv = a
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NumericalFailure("a-period matrix is singular".into()))?;
    let mut tau = &a_inv * &b;
    // The orientation of the b-cycles is fixed by requiring Im τ > 0.
    if tau.trace().im < 0.0 {
        b = -b;
        tau = -tau;
    }
    let tau_norm = tau.norm();
    let symmetry_residual = (&tau - tau.transpose()).norm() / tau_norm;
    if symmetry_residual > TAU_SYMMETRY_TOL {
        return Err(Error::NumericalFailure(format!("τ not symmetric (relative residual {symmetry_residual:e})")));
    }
    let bilinear = &a * b.transpose() - &b * a.transpose();
    let bilinear_residual = bilinear.norm() / (a.norm() * b.norm());
    if bilinear_residual > BILINEAR_TOL {
        return Err(Error::NumericalFailure(format!("bilinear relation residual {bilinear_residual:e}")));
    }
    let tau = RiemannMatrix::new(tau).map_err(|e| Error::NumericalFailure(format!("computed τ is invalid: {e}")))?;
    Ok(PeriodData {
        omega_a: a,
        omega_b: b,
        tau,
        normalization: a_inv,
        nodes_used: n,
        symmetry_residual,
        bilinear_residual,
    })
}
