//! Shared numerical utilities: rank certificates, reduction modulo the period
//! lattice, projective comparison and quadrature rules.
//!
//! Every rank decision in the crate goes through [`numerical_rank`], which
//! keeps the full singular-value spectrum so that reports stay auditable.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::theta::RiemannMatrix;

/// Default relative threshold for rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankCertificate {
    /// Non-increasing.
    pub singular_values: Vec<f64>,
    pub decided_rank: usize,
    /// `σ_{r+1} / σ_1`, or 0 when the matrix has full rank.
    pub gap_ratio: f64,
    pub tolerance_used: f64,
    pub rows: usize,
    pub cols: usize,
}

impl RankCertificate {
    pub fn max_rank(&self) -> usize {
        self.rows.min(self.cols)
    }

    pub fn is_full_rank(&self) -> bool {
        self.decided_rank == self.max_rank()
    }

    pub fn rank_at_most(&self, bound: usize) -> bool {
        self.decided_rank <= bound
    }

    /// `σ_r / σ_1` for the last retained singular value; how far the decision
    /// sits above the threshold. 0 for the zero matrix.
    pub fn retained_ratio(&self) -> f64 {
        match (self.decided_rank, self.singular_values.first()) {
            (0, _) | (_, None) => 0.0,
            (r, Some(&s1)) => self.singular_values[r - 1] / s1,
        }
    }

    /// Relative singular values `σ_k / σ_1`.
    pub fn relative_spectrum(&self) -> Vec<f64> {
        let s1 = self.singular_values.first().copied().unwrap_or(0.0);
        if s1 == 0.0 {
            return vec![0.0; self.singular_values.len()];
        }
        self.singular_values.iter().map(|s| s / s1).collect()
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidInput(format!("rank tolerance {tol} outside (0, 1)")));
    }
    Ok(())
}

fn check_finite(matrix: &DMatrix<Complex64>) -> Result<()> {
    if matrix.nrows() == 0 || matrix.ncols() == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    if matrix.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    Ok(())
}

fn certificate_from_spectrum(mut sv: Vec<f64>, tol: f64, rows: usize, cols: usize) -> RankCertificate {
    sv.sort_by(|a, b| b.total_cmp(a));
    let s1 = sv.first().copied().unwrap_or(0.0);
    let decided_rank = if s1 == 0.0 { 0 } else { sv.iter().filter(|&&s| s > tol * s1).count() };
    let gap_ratio = if s1 == 0.0 || decided_rank == sv.len() { 0.0 } else { sv[decided_rank] / s1 };
    RankCertificate { singular_values: sv, decided_rank, gap_ratio, tolerance_used: tol, rows, cols }
}

/// Singular value decomposition `A = U Σ Vᴴ` by one-sided Jacobi rotations.
///
/// Columns of `A` are orthogonalized pairwise until every pair is orthogonal
/// to working precision; the column norms are the singular values. This is
/// accurate for rank-deficient matrices of any shape, where the bidiagonal
/// complex SVD of nalgebra returns inaccurate singular vectors.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `min(rows, cols)` values, non-increasing.
    pub singular_values: Vec<f64>,
    /// `rows × min(rows, cols)`; columns belonging to zero singular values are zero.
    pub u: DMatrix<Complex64>,
    /// `cols × cols` unitary, columns ordered like the singular values
    /// (with the `cols − min(rows, cols)` trailing columns spanning the rest
    /// of the kernel for wide matrices).
    pub v: DMatrix<Complex64>,
}

const JACOBI_SWEEPS: usize = 80;

pub fn svd(matrix: &DMatrix<Complex64>) -> Result<Svd> {
    check_finite(matrix)?;
    let (rows, cols) = matrix.shape();
    let mut a = matrix.clone();
    let mut v = DMatrix::<Complex64>::identity(cols, cols);
    let eps = f64::EPSILON;
    // Columns below this are zero to working precision and are left alone.
    let negligible = (eps * matrix.norm()).powi(2);
    let mut converged = false;
    for _ in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let gn = gamma.norm();
                if gn == 0.0 || alpha.min(beta) <= negligible || gn <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Remove the phase of γ, then apply a real rotation.
                let phase = gamma / gn;
                let zeta = (beta - alpha) / (2.0 * gn);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for (mat, n) in [(&mut a, rows), (&mut v, cols)] {
                    for i in 0..n {
                        let xp = mat[(i, p)];
                        let xq = mat[(i, q)] * phase.conj();
                        mat[(i, p)] = xp * c - xq * s;
                        mat[(i, q)] = xp * s + xq * c;
                    }
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NumericalFailure("Jacobi SVD did not converge".into()));
    }
    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<f64> = (0..cols).map(|j| a.column(j).norm()).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    let k = rows.min(cols);
    let mut u = DMatrix::zeros(rows, k);
    let mut sv = Vec::with_capacity(k);
    for (slot, &j) in order.iter().take(k).enumerate() {
        sv.push(norms[j]);
        if norms[j] > 0.0 {
            u.set_column(slot, &(a.column(j) / Complex64::from(norms[j])));
        }
    }
    let v = DMatrix::from_columns(&order.iter().map(|&j| v.column(j).into_owned()).collect::<Vec<_>>());
    Ok(Svd { singular_values: sv, u, v })
}

/// Numerical rank: the number of singular values above `tol · σ_1`.
pub fn numerical_rank(matrix: &DMatrix<Complex64>, tol: f64) -> Result<RankCertificate> {
    check_tol(tol)?;
    let d = svd(matrix)?;
    Ok(certificate_from_spectrum(d.singular_values, tol, matrix.nrows(), matrix.ncols()))
}

/// Rank certificate together with an orthonormal basis (columns) of the
/// right null space.
pub fn null_space(matrix: &DMatrix<Complex64>, tol: f64) -> Result<(RankCertificate, DMatrix<Complex64>)> {
    check_tol(tol)?;
    let d = svd(matrix)?;
    let cert = certificate_from_spectrum(d.singular_values, tol, matrix.nrows(), matrix.ncols());
    let basis = d.v.columns(cert.decided_rank, matrix.ncols() - cert.decided_rank).into_owned();
    Ok((cert, basis))
}

/// Orthonormal basis of the column space, with the certificate that decided
/// its dimension.
pub fn column_space(matrix: &DMatrix<Complex64>, tol: f64) -> Result<(RankCertificate, DMatrix<Complex64>)> {
    check_tol(tol)?;
    let d = svd(matrix)?;
    let cert = certificate_from_spectrum(d.singular_values, tol, matrix.nrows(), matrix.ncols());
    Ok((cert.clone(), d.u.columns(0, cert.decided_rank).into_owned()))
}

/// Minimum-norm least-squares solution of `A x ≈ b`, discarding singular
/// values below `rcond · σ_1`.
pub fn least_squares(a: &DMatrix<Complex64>, b: &DVector<Complex64>, rcond: f64) -> Result<DVector<Complex64>> {
    if a.nrows() != b.len() {
        return Err(Error::InvalidInput("right-hand side has the wrong length".into()));
    }
    let d = svd(a)?;
    let s1 = d.singular_values.first().copied().unwrap_or(0.0);
    let mut x = DVector::zeros(a.ncols());
    for (k, &s) in d.singular_values.iter().enumerate() {
        if s > rcond * s1 && s > 0.0 {
            let coef = d.u.column(k).dotc(b) / s;
            x += d.v.column(k) * coef;
        }
    }
    Ok(x)
}

/// Integer part `(m, n)` of a point of `C^g` relative to the lattice
/// `Z^g + τ Z^g`, with the leftover `z − m − τn`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeReduction {
    pub m: Vec<i64>,
    pub n: Vec<i64>,
    pub residual_norm: f64,
    #[serde(skip)]
    pub residual: DVector<Complex64>,
}

impl LatticeReduction {
    pub fn is_zero(&self) -> bool {
        self.m.iter().chain(&self.n).all(|&k| k == 0)
    }
}

fn round_vec(v: &DVector<f64>) -> Vec<i64> {
    v.iter().map(|x| x.round() as i64).collect()
}

/// Real coordinates of `z` in the `(I, τ)` basis: `z = u + τ v`.
pub fn lattice_coordinates(z: &DVector<Complex64>, tau: &RiemannMatrix) -> (DVector<f64>, DVector<f64>) {
    let im = z.map(|c| c.im);
    let v = tau.imag_inv() * im;
    let re = z.map(|c| c.re);
    let u = re - tau.real_part() * &v;
    (u, v)
}

/// Closest lattice vector `m + τn` to `z`.
///
/// The real coordinates of `z` in the `(I, τ)` basis are rounded, then `n` is
/// searched over the ±1 box around the rounding; for each `n` the optimal `m`
/// is obtained by rounding, since the real and imaginary parts of the
/// residual separate. The window is adequate for moderate `Im τ`; for
/// extreme `τ` the true minimizer may lie outside it.
pub fn nearest_lattice_vector(z: &DVector<Complex64>, tau: &RiemannMatrix) -> Result<LatticeReduction> {
    let g = tau.genus();
    if z.len() != g {
        return Err(Error::InvalidInput(format!("vector of length {} for genus {g}", z.len())));
    }
    if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::InvalidInput("non-finite point".into()));
    }
    let (_, v) = lattice_coordinates(z, tau);
    let n0 = round_vec(&v);
    let mut best: Option<(f64, Vec<i64>, Vec<i64>, DVector<Complex64>)> = None;
    let window = 3usize.pow(g as u32);
    for code in 0..window {
        let mut c = code;
        let n: Vec<i64> = n0
            .iter()
            .map(|&k| {
                let d = (c % 3) as i64 - 1;
                c /= 3;
                k + d
            })
            .collect();
        let tn = tau.entries() * DVector::from_iterator(g, n.iter().map(|&k| Complex64::new(k as f64, 0.0)));
        let shifted = z - tn;
        let m: Vec<i64> = shifted.iter().map(|c| c.re.round() as i64).collect();
        let resid = DVector::from_iterator(g, shifted.iter().zip(&m).map(|(c, &k)| c - k as f64));
        let norm = resid.norm();
        // Ties broken by enumeration order, which is deterministic.
        if best.as_ref().is_none_or(|b| norm < b.0) {
            best = Some((norm, m, n, resid));
        }
    }
    let (residual_norm, m, n, residual) = best.expect("window is non-empty");
    Ok(LatticeReduction { m, n, residual_norm, residual })
}

/// Distance from `z` to the lattice, i.e. the residual of
/// [`nearest_lattice_vector`].
pub fn lattice_distance(z: &DVector<Complex64>, tau: &RiemannMatrix) -> Result<f64> {
    Ok(nearest_lattice_vector(z, tau)?.residual_norm)
}

/// Fubini–Study angle between the complex lines spanned by `v` and `w`, in
/// `[0, π/2]`.
pub fn projective_angle(v: &DVector<Complex64>, w: &DVector<Complex64>) -> Result<f64> {
    if v.len() != w.len() {
        return Err(Error::InvalidInput("vectors of different length".into()));
    }
    let nv = v.norm();
    let nw = w.norm();
    if nv == 0.0 || nw == 0.0 || !nv.is_finite() || !nw.is_finite() {
        return Err(Error::InvalidInput("projective angle of a zero or non-finite vector".into()));
    }
    // atan2 of the orthogonal and parallel components keeps small angles accurate.
    let vu = v / Complex64::from(nv);
    let wu = w / Complex64::from(nw);
    let inner = vu.dotc(&wu);
    let perp = (&wu - &vu * inner).norm();
    Ok(perp.atan2(inner.norm()).clamp(0.0, PI / 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureNode {
    pub node: f64,
    pub weight: f64,
}

/// Gauss–Chebyshev rule for `∫_{-1}^{1} h(t) (1 − t²)^{-1/2} dt`.
pub fn quadrature_nodes(n: usize) -> Result<Vec<QuadratureNode>> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("quadrature needs at least 2 nodes, got {n}")));
    }
    let w = PI / n as f64;
    Ok((1..=n)
        .map(|k| QuadratureNode { node: ((2 * k - 1) as f64 * PI / (2 * n) as f64).cos(), weight: w })
        .collect())
}

/// Gauss–Legendre nodes and weights on `(−1, 1)`, computed by Newton
/// iteration on the Legendre recurrence.
fn gauss_legendre_compute(n: usize) -> Vec<QuadratureNode> {
    let mut nodes = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(QuadratureNode { node: x, weight: 2.0 / ((1.0 - x * x) * dp * dp) });
    }
    nodes.reverse();
    nodes
}

/// Cached 24-point Gauss–Legendre rule used by the adaptive integrator.
pub(crate) fn gauss_legendre_24() -> &'static [QuadratureNode] {
    static RULE: OnceLock<Vec<QuadratureNode>> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre_compute(24))
}

/// Adaptive Gauss–Legendre integration of a vector-valued function on
/// `[a, b]` by bisection. A panel is accepted when its two-panel and
/// one-panel estimates agree to `tol` times the larger of the panel's own
/// magnitude and its width-proportional share of the whole integral.
pub(crate) fn integrate_adaptive<F>(f: &F, a: f64, b: f64, dim: usize, tol: f64) -> Result<DVector<Complex64>>
where
    F: Fn(f64) -> DVector<Complex64>,
{
    fn panel<F: Fn(f64) -> DVector<Complex64>>(f: &F, a: f64, b: f64, dim: usize) -> DVector<Complex64> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = DVector::zeros(dim);
        for q in gauss_legendre_24() {
            acc += f(mid + half * q.node) * Complex64::from(q.weight * half);
        }
        acc
    }
    struct Ctx {
        dim: usize,
        tol: f64,
        density: f64,
    }
    fn recurse<F: Fn(f64) -> DVector<Complex64>>(
        f: &F,
        a: f64,
        b: f64,
        whole: DVector<Complex64>,
        ctx: &Ctx,
        depth: usize,
    ) -> Result<DVector<Complex64>> {
        let mid = 0.5 * (a + b);
        let left = panel(f, a, mid, ctx.dim);
        let right = panel(f, mid, b, ctx.dim);
        let sum = &left + &right;
        let err = (&sum - &whole).norm();
        if err <= ctx.tol * sum.norm().max(ctx.density * (b - a)) {
            return Ok(sum);
        }
        if depth == 0 {
            return Err(Error::NumericalFailure(format!(
                "adaptive quadrature did not converge on [{a}, {b}] (error estimate {err:e})"
            )));
        }
        let l = recurse(f, a, mid, left, ctx, depth - 1)?;
        let r = recurse(f, mid, b, right, ctx, depth - 1)?;
        Ok(l + r)
    }
    let whole = panel(f, a, b, dim);
    let density = whole.norm().max(f64::MIN_POSITIVE) / (b - a).abs();
    recurse(f, a, b, whole, &Ctx { dim, tol, density }, 60)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut rand_chacha::ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<Complex64> {
        use rand::Rng;
        DMatrix::from_fn(rows, cols, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    #[test]
    fn jacobi_svd_reconstructs_deficient_matrices() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for (rows, cols) in [(16, 3), (3, 16), (32, 4), (8, 8), (11, 16)] {
            for deficient in [false, true] {
                let mut m = random_matrix(&mut rng, rows, cols);
                if deficient {
                    let comb = m.column(0) * c(0.3, 0.7) + m.column(1) * c(-1.1, 0.2);
                    m.set_column(cols - 1, &comb);
                }
                let d = svd(&m).unwrap();
                let k = rows.min(cols);
                let sigma = DMatrix::from_diagonal(&DVector::from_iterator(k, d.singular_values.iter().map(|&s| c(s, 0.0))));
                let recon = &d.u * sigma * d.v.columns(0, k).adjoint();
                assert!((recon - &m).norm() < 1e-13 * m.norm(), "{rows}x{cols}");
                let vv = d.v.adjoint() * &d.v - DMatrix::<Complex64>::identity(cols, cols);
                assert!(vv.norm() < 1e-13);
                assert!(d.singular_values.windows(2).all(|w| w[0] >= w[1]));
                if deficient {
                    let cert = certificate_from_spectrum(d.singular_values.clone(), 1e-10, rows, cols);
                    assert_eq!(cert.decided_rank, k.min(cols - 1));
                }
            }
        }
    }

    #[test]
    fn singular_values_match_gram_eigenvalues() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let m = random_matrix(&mut rng, 9, 4);
        let gram = m.adjoint() * &m;
        // Real symmetric embedding of the Hermitian Gram matrix; each
        // eigenvalue appears twice.
        let re = DMatrix::from_fn(8, 8, |i, j| {
            let z = gram[(i % 4, j % 4)];
            match (i < 4, j < 4) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        });
        let mut eig: Vec<f64> = re.symmetric_eigen().eigenvalues.iter().copied().collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        let d = svd(&m).unwrap();
        for (k, s) in d.singular_values.iter().enumerate() {
            assert!((s * s - eig[2 * k]).abs() < 1e-12 * eig[0]);
        }
    }

    #[test]
    fn least_squares_recovers_combination() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let a = random_matrix(&mut rng, 16, 3);
        let x = DVector::from_vec(vec![c(1.0, -2.0), c(0.5, 0.0), c(0.0, 3.0)]);
        let b = &a * &x;
        assert!((least_squares(&a, &b, 1e-14).unwrap() - x).norm() < 1e-12);
    }

    #[test]
    fn identity_has_full_rank() {
        let m = DMatrix::<Complex64>::identity(3, 3);
        let cert = numerical_rank(&m, 1e-7).unwrap();
        assert_eq!(cert.decided_rank, 3);
        assert_eq!(cert.gap_ratio, 0.0);
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let m = DMatrix::<Complex64>::zeros(2, 4);
        let cert = numerical_rank(&m, 1e-7).unwrap();
        assert_eq!(cert.decided_rank, 0);
    }

    #[test]
    fn exact_dependency_detected() {
        let v = [c(1.0, 0.5), c(-2.0, 1.0), c(0.3, 0.0), c(0.0, -1.0)];
        let w = [c(0.0, 1.0), c(1.0, 1.0), c(-1.0, 0.2), c(2.0, 0.0)];
        let m = DMatrix::from_fn(3, 4, |i, j| match i {
            0 => v[j],
            1 => v[j] * 2.0,
            _ => v[j] + w[j],
        });
        let cert = numerical_rank(&m, 1e-7).unwrap();
        assert_eq!(cert.decided_rank, 2);
        assert!(cert.gap_ratio < 1e-14);
    }

    #[test]
    fn rank_rejects_bad_input() {
        let mut m = DMatrix::<Complex64>::identity(2, 2);
        m[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(numerical_rank(&m, 1e-7), Err(Error::InvalidInput(_))));
        let m = DMatrix::<Complex64>::identity(2, 2);
        assert!(numerical_rank(&m, 1.5).is_err());
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let m = DMatrix::from_row_slice(1, 3, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let (cert, basis) = null_space(&m, 1e-7).unwrap();
        assert_eq!(cert.decided_rank, 1);
        assert_eq!(basis.ncols(), 2);
        assert!((&m * &basis).norm() < 1e-14);
    }

    #[test]
    fn projective_angle_examples() {
        let v = DVector::from_vec(vec![c(1.0, 2.0), c(-0.5, 0.1)]);
        let lam = c(2.0, -3.0);
        assert!(projective_angle(&v, &(&v * lam)).unwrap() < 1e-15);
        let e1 = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let e2 = DVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]);
        assert!((projective_angle(&e1, &e2).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!(projective_angle(&e1, &DVector::zeros(2)).is_err());
    }

    #[test]
    fn projective_angle_small_perturbation() {
        // v unit, w ⟂ v unit: angle(v, v + εw) = atan(ε).
        let v = DVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let w = DVector::from_vec(vec![c(0.8, 0.0), c(0.0, -0.6)]);
        assert!(v.dotc(&w).norm() < 1e-16);
        let eps = 1e-6;
        let angle = projective_angle(&v, &(&v + &w * c(eps, 0.0))).unwrap();
        let direct = eps.atan();
        assert!((angle - direct).abs() < 1e-15, "{angle} vs {direct}");
    }

    #[test]
    fn chebyshev_two_nodes() {
        let q = quadrature_nodes(2).unwrap();
        assert!((q[0].node - (PI / 4.0).cos()).abs() < 1e-15);
        assert!((q[1].node + (PI / 4.0).cos()).abs() < 1e-15);
        assert!(q.iter().all(|n| (n.weight - PI / 2.0).abs() < 1e-15));
        assert!(quadrature_nodes(1).is_err());
    }

    #[test]
    fn chebyshev_exactness() {
        for n in 2..12 {
            let q = quadrature_nodes(n).unwrap();
            let total: f64 = q.iter().map(|n| n.weight).sum();
            assert!((total - PI).abs() < 1e-14);
            let second: f64 = q.iter().map(|n| n.weight * n.node * n.node).sum();
            assert!((second - PI / 2.0).abs() < 1e-14, "n = {n}: {second}");
        }
    }

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let q = gauss_legendre_24();
        let s: f64 = q.iter().map(|n| n.weight * n.node.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-14);
        let total: f64 = q.iter().map(|n| n.weight).sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_near_singularity() {
        // ∫_0^1 (x + δ)^{-1/2} dx = 2(√(1+δ) − √δ).
        let delta = 1e-10;
        let f = |x: f64| DVector::from_element(1, c(1.0 / (x + delta).sqrt(), 0.0));
        let r = integrate_adaptive(&f, 0.0, 1.0, 1, 1e-13).unwrap();
        let exact = 2.0 * ((1.0 + delta).sqrt() - delta.sqrt());
        assert!((r[0].re - exact).abs() < 1e-12, "{}", r[0]);
    }
}
