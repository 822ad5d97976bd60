use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-10;

/// A point of the Siegel upper half space: complex symmetric `g × g` with
/// positive definite imaginary part.
///
/// Construction caches everything the theta series needs: `Re τ`, `Im τ`,
/// its inverse, the upper Cholesky factor `T` of `π Im τ` (so that the
/// Gaussian weight of a lattice point is `exp(−‖T v‖²)`), and the length of
/// the shortest nonzero vector of `T Z^g`.
#[derive(Debug, Clone)]
pub struct RiemannMatrix {
    entries: DMatrix<Complex64>,
    real: DMatrix<f64>,
    imag: DMatrix<f64>,
    imag_inv: DMatrix<f64>,
    chol_upper: DMatrix<f64>,
    shortest: f64,
    imag_eigen_range: (f64, f64),
    doubled: OnceLock<Box<RiemannMatrix>>,
}

impl RiemannMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows == 0 || rows != cols {
            return Err(Error::InvalidInput(format!("period matrix must be square and non-empty, got {rows}x{cols}")));
        }
        if entries.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidInput("period matrix has non-finite entries".into()));
        }
        let scale = entries.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let asym = (&entries - entries.transpose()).iter().map(|c| c.norm()).fold(0.0, f64::max);
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::InvalidInput(format!("period matrix not symmetric (relative asymmetry {:e})", asym / scale)));
        }
        let entries = (&entries + entries.transpose()) * Complex64::from(0.5);
        let real = entries.map(|c| c.re);
        let imag = entries.map(|c| c.im);
        let eig = imag.clone().symmetric_eigen();
        let lo = eig.eigenvalues.min();
        let hi = eig.eigenvalues.max();
        if !(lo > 0.0) {
            return Err(Error::InvalidInput(format!("imaginary part not positive definite (smallest eigenvalue {lo:e})")));
        }
        let imag_inv = imag.clone().try_inverse().ok_or_else(|| Error::InvalidInput("singular imaginary part".into()))?;
        let chol = (&imag * PI)
            .cholesky()
            .ok_or_else(|| Error::InvalidInput("imaginary part not positive definite".into()))?;
        let chol_upper = chol.l().transpose();
        let shortest = shortest_vector(&chol_upper);
        Ok(Self {
            entries,
            real,
            imag,
            imag_inv,
            chol_upper,
            shortest,
            imag_eigen_range: (lo, hi),
            doubled: OnceLock::new(),
        })
    }

    pub fn from_imaginary(y: DMatrix<f64>) -> Result<Self> {
        Self::new(y.map(|v| Complex64::new(0.0, v)))
    }

    pub fn genus(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn real_part(&self) -> &DMatrix<f64> {
        &self.real
    }

    pub fn imag_part(&self) -> &DMatrix<f64> {
        &self.imag
    }

    pub fn imag_inv(&self) -> &DMatrix<f64> {
        &self.imag_inv
    }

    /// Upper triangular `T` with `Tᵀ T = π Im τ`.
    pub fn chol_upper(&self) -> &DMatrix<f64> {
        &self.chol_upper
    }

    /// Length of the shortest nonzero vector of the lattice `T Z^g`.
    pub fn shortest_vector(&self) -> f64 {
        self.shortest
    }

    /// Smallest and largest eigenvalue of `Im τ`; reported, never repaired.
    pub fn imag_eigen_range(&self) -> (f64, f64) {
        self.imag_eigen_range
    }

    /// `2τ`, used by the second-order theta functions.
    pub fn doubled(&self) -> &RiemannMatrix {
        self.doubled.get_or_init(|| {
            Box::new(RiemannMatrix::new(&self.entries * Complex64::from(2.0)).expect("2τ is valid whenever τ is"))
        })
    }

    /// The lattice vector `m + τ n`.
    pub fn lattice_point(&self, m: &[i64], n: &[i64]) -> DVector<Complex64> {
        let g = self.genus();
        let nv = DVector::from_iterator(g, n.iter().map(|&k| Complex64::from(k as f64)));
        let mv = DVector::from_iterator(g, m.iter().map(|&k| Complex64::from(k as f64)));
        mv + &self.entries * nv
    }

    /// Half-period `(m + τ n) / 2` for `m, n ∈ {0,1}^g`.
    pub fn half_period(&self, m: &[u8], n: &[u8]) -> DVector<Complex64> {
        let mi: Vec<i64> = m.iter().map(|&b| b as i64).collect();
        let ni: Vec<i64> = n.iter().map(|&b| b as i64).collect();
        self.lattice_point(&mi, &ni) * Complex64::from(0.5)
    }

    /// Quadratic form `π · vᵀ Im τ⁻¹ v` for `v = Im z`; the logarithm of the
    /// natural growth of `|θ(z)|`.
    pub fn growth_exponent(&self, z: &DVector<Complex64>) -> f64 {
        let y = z.map(|c| c.im);
        PI * y.dot(&(&self.imag_inv * &y))
    }
}

/// Enumerate integer vectors `n` with `‖T (n + shift)‖ ≤ radius`, in a fixed
/// order (last coordinate outermost). `T` must be upper triangular.
pub(crate) fn ellipsoid_points(t: &DMatrix<f64>, shift: &[f64], radius: f64) -> Vec<i64> {
    let g = t.nrows();
    let mut out = Vec::new();
    let mut n = vec![0i64; g];
    fn recurse(
        t: &DMatrix<f64>,
        shift: &[f64],
        radius_sq: f64,
        level: usize,
        partial: f64,
        n: &mut [i64],
        out: &mut Vec<i64>,
    ) {
        let g = t.nrows();
        // Row `level` of T(n+shift): T_ii v_i + Σ_{j>i} T_ij v_j.
        let rest: f64 = ((level + 1)..g).map(|j| t[(level, j)] * (n[j] as f64 + shift[j])).sum();
        let remaining = radius_sq - partial;
        if remaining < 0.0 {
            return;
        }
        let r = remaining.sqrt();
        let d = t[(level, level)];
        let lo = ((-rest - r) / d - shift[level]).ceil() as i64;
        let hi = ((-rest + r) / d - shift[level]).floor() as i64;
        for k in lo..=hi {
            n[level] = k;
            let row = d * (k as f64 + shift[level]) + rest;
            let p = partial + row * row;
            if p > radius_sq {
                continue;
            }
            if level == 0 {
                out.extend_from_slice(n);
            } else {
                recurse(t, shift, radius_sq, level - 1, p, n, out);
            }
        }
    }
    recurse(t, shift, radius * radius, g - 1, 0.0, &mut n, &mut out);
    out
}

fn shortest_vector(t: &DMatrix<f64>) -> f64 {
    let g = t.nrows();
    let bound = (0..g).map(|j| t.column(j).norm()).fold(f64::INFINITY, f64::min);
    let zero = vec![0.0; g];
    let pts = ellipsoid_points(t, &zero, bound * (1.0 + 1e-12));
    pts.chunks(g)
        .filter(|n| n.iter().any(|&k| k != 0))
        .map(|n| {
            let v = DVector::from_iterator(g, n.iter().map(|&k| k as f64));
            (t * v).norm()
        })
        .fold(bound, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_symmetric() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(0.0, 1.0), Complex64::new(0.1, 0.0), Complex64::new(0.2, 0.0), Complex64::new(0.0, 1.0)],
        );
        assert!(matches!(RiemannMatrix::new(m), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn rejects_indefinite_imaginary_part() {
        let y = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(RiemannMatrix::from_imaginary(y).is_err());
    }

    #[test]
    fn shortest_vector_of_diagonal() {
        let y = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0]));
        let tau = RiemannMatrix::from_imaginary(y).unwrap();
        assert!((tau.shortest_vector() - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ellipsoid_enumeration_matches_brute_force() {
        let y = DMatrix::from_row_slice(3, 3, &[1.0, 0.3, -0.2, 0.3, 0.8, 0.1, -0.2, 0.1, 1.2]);
        let tau = RiemannMatrix::from_imaginary(y).unwrap();
        let t = tau.chol_upper();
        let shift = [0.3, -0.45, 0.1];
        let radius = 4.0;
        let pts = ellipsoid_points(t, &shift, radius);
        let mut brute = Vec::new();
        for a in -8i64..=8 {
            for b in -8i64..=8 {
                for c in -8i64..=8 {
                    let v = DVector::from_vec(vec![a as f64 + shift[0], b as f64 + shift[1], c as f64 + shift[2]]);
                    if (t * v).norm() <= radius {
                        brute.push([a, b, c]);
                    }
                }
            }
        }
        let mut got: Vec<[i64; 3]> = pts.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
        got.sort();
        brute.sort();
        assert_eq!(got, brute);
    }
}
