//! Hyperelliptic curves `y² = f(x)` in the odd real model, their points and
//! divisors, and lifts of Jacobian points to the universal cover.
//!
//! The base point of the Abel–Jacobi map is the point at infinity. Branches
//! of `y` follow the principal square root of each factor `x − e_k`, with
//! points on the negative real axis read from above (`x + i0`).

mod abel_jacobi;
mod kappa;
mod periods;
mod sampling;

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::nearest_lattice_vector;
use crate::theta::RiemannMatrix;

pub use abel_jacobi::{abel_jacobi, abel_jacobi_divisor, DEFAULT_AJ_TOL};
pub use kappa::{riemann_constant, RiemannConstant, KAPPA_DIVISORS, KAPPA_SURVIVAL_TOL};
pub use periods::{period_matrix, PeriodData, BILINEAR_TOL, DEFAULT_PERIOD_TOL, TAU_SYMMETRY_TOL};
pub use sampling::{random_point, sample_b_ell, BellSample};

/// Minimum separation of branch points, relative to their span.
pub const ROOT_GAP_TOL: f64 = 1e-8;
/// Relative tolerance for `y² = f(x)` membership.
pub const ON_CURVE_TOL: f64 = 1e-10;

/// `√z` with the cut on the negative real axis approached from above, so a
/// negative real argument gives `+i√|z|` regardless of the sign of zero.
pub(crate) fn branch_sqrt(z: Complex64) -> Complex64 {
    if z.im == 0.0 && z.re < 0.0 {
        Complex64::new(0.0, (-z.re).sqrt())
    } else {
        z.sqrt()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HyperellipticCurve {
    /// Ascending: `f(x) = Σ f_coeffs[k] x^k`.
    pub f_coeffs: Vec<f64>,
    /// `e₁ < … < e_{2g+1}`.
    pub roots: Vec<f64>,
    pub genus: usize,
}

impl HyperellipticCurve {
    /// Validate coefficients of an odd-degree polynomial with distinct real
    /// roots. Roots come from the companion matrix and are polished by Newton
    /// steps on `f`.
    pub fn from_coeffs(f_coeffs: &[f64]) -> Result<Self> {
        if f_coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        let mut coeffs = f_coeffs.to_vec();
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        let deg = coeffs.len().saturating_sub(1);
        if deg < 3 || deg % 2 == 0 {
            return Err(Error::InvalidInput(format!("deg f must be odd and at least 3, got {deg}")));
        }
        let lead = coeffs[deg];
        let mut companion = DMatrix::<f64>::zeros(deg, deg);
        for i in 1..deg {
            companion[(i, i - 1)] = 1.0;
        }
        for i in 0..deg {
            companion[(i, deg - 1)] = -coeffs[i] / lead;
        }
        let eig = companion.complex_eigenvalues();
        let bound = 1.0 + coeffs[..deg].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max);
        let mut roots = Vec::with_capacity(deg);
        for e in eig.iter() {
            if e.im.abs() > 1e-5 * bound {
                return Err(Error::InvalidInput(format!("f has a non-real root {e}; only real branch points are supported")));
            }
            roots.push(newton_polish(&coeffs, e.re));
        }
        roots.sort_by(f64::total_cmp);
        Self::validated(coeffs, roots)
    }

    /// Curve `y² = c · Π (x − e_k)`.
    pub fn from_roots(leading: f64, roots: &[f64]) -> Result<Self> {
        if !(leading.is_finite() && leading != 0.0) || roots.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidInput("leading coefficient and roots must be finite, leading nonzero".into()));
        }
        if roots.len() < 3 || roots.len() % 2 == 0 {
            return Err(Error::InvalidInput(format!("need an odd number (≥ 3) of roots, got {}", roots.len())));
        }
        let mut coeffs = vec![leading];
        for &e in roots {
            let mut next = vec![0.0; coeffs.len() + 1];
            for (k, &c) in coeffs.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= e * c;
            }
            coeffs = next;
        }
        let mut sorted = roots.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self::validated(coeffs, sorted)
    }

    /// Reference curve `y² = Π_{k=0}^{2g} (x − k)`.
    pub fn reference(genus: usize) -> Result<Self> {
        if genus == 0 {
            return Err(Error::InvalidInput("genus must be at least 1".into()));
        }
        if genus == 1 {
            return Self::from_roots(1.0, &[-1.0, 0.0, 1.0]);
        }
        let roots: Vec<f64> = (0..=2 * genus).map(|k| k as f64).collect();
        Self::from_roots(1.0, &roots)
    }

    fn validated(coeffs: Vec<f64>, roots: Vec<f64>) -> Result<Self> {
        let span = roots[roots.len() - 1] - roots[0];
        for w in roots.windows(2) {
            if !(w[1] - w[0] > ROOT_GAP_TOL * span) {
                return Err(Error::IllConditionedCurve(format!(
                    "branch points {} and {} are closer than {:e} of the span",
                    w[0], w[1], ROOT_GAP_TOL
                )));
            }
        }
        let genus = (roots.len() - 1) / 2;
        Ok(Self { f_coeffs: coeffs, roots, genus })
    }

    pub fn leading(&self) -> f64 {
        *self.f_coeffs.last().expect("validated")
    }

    pub fn span(&self) -> f64 {
        self.roots[self.roots.len() - 1] - self.roots[0]
    }

    pub fn f(&self, x: Complex64) -> Complex64 {
        self.f_coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    /// The branch of `y` used by every integration path.
    pub fn y_branch(&self, x: Complex64) -> Complex64 {
        let mut y = branch_sqrt(Complex64::from(self.leading()));
        for &e in &self.roots {
            y *= branch_sqrt(x - e);
        }
        y
    }

    /// Magnitude used to make `y² − f(x)` relative.
    fn scale_at(&self, x: Complex64) -> f64 {
        let r = x.norm();
        self.f_coeffs.iter().enumerate().map(|(k, c)| c.abs() * r.powi(k as i32)).sum::<f64>().max(f64::MIN_POSITIVE)
    }

    pub fn contains(&self, p: &CurvePoint) -> bool {
        match p {
            CurvePoint::Infinity => true,
            CurvePoint::Finite { x, y } => (y * y - self.f(*x)).norm() < ON_CURVE_TOL * self.scale_at(*x),
        }
    }

    /// The point over `x` on the sheet `sign · y_branch(x)`.
    pub fn point(&self, x: Complex64, sign: f64) -> CurvePoint {
        CurvePoint::Finite { x, y: self.y_branch(x) * sign }
    }

    /// Finite Weierstrass point `(e_k, 0)`, `k` zero-based.
    pub fn branch_point(&self, k: usize) -> CurvePoint {
        CurvePoint::Finite { x: Complex64::from(self.roots[k]), y: Complex64::new(0.0, 0.0) }
    }

    /// All `2g + 2` Weierstrass points, infinity last.
    pub fn weierstrass_points(&self) -> Vec<CurvePoint> {
        let mut out: Vec<CurvePoint> = (0..self.roots.len()).map(|k| self.branch_point(k)).collect();
        out.push(CurvePoint::Infinity);
        out
    }

    /// `(1, x, …, x^{g−1})`, the unnormalized canonical image of a finite
    /// point up to the factor `1/y`; `e_g` at infinity.
    pub fn canonical_vector(&self, p: &CurvePoint) -> DVector<Complex64> {
        let g = self.genus;
        match p {
            CurvePoint::Infinity => {
                let mut v = DVector::zeros(g);
                v[g - 1] = Complex64::new(1.0, 0.0);
                v
            }
            CurvePoint::Finite { x, .. } => DVector::from_iterator(g, (0..g).map(|k| x.powi(k as i32))),
        }
    }
}

fn newton_polish(coeffs: &[f64], mut x: f64) -> f64 {
    for _ in 0..200 {
        let (mut p, mut dp) = (0.0, 0.0);
        for &c in coeffs.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        if dp == 0.0 {
            break;
        }
        let step = p / dp;
        x -= step;
        if step.abs() <= 1e-16 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CurvePoint {
    Finite {
        #[serde(serialize_with = "crate::report::ser_complex")]
        x: Complex64,
        #[serde(serialize_with = "crate::report::ser_complex")]
        y: Complex64,
    },
    Infinity,
}

impl CurvePoint {
    pub fn x(&self) -> Option<Complex64> {
        match self {
            CurvePoint::Finite { x, .. } => Some(*x),
            CurvePoint::Infinity => None,
        }
    }

    pub fn is_weierstrass(&self) -> bool {
        match self {
            CurvePoint::Finite { y, .. } => *y == Complex64::new(0.0, 0.0),
            CurvePoint::Infinity => true,
        }
    }
}

/// `(x, y) ↦ (x, −y)`.
pub fn involution(p: &CurvePoint) -> CurvePoint {
    match *p {
        CurvePoint::Finite { x, y } => CurvePoint::Finite { x, y: -y },
        CurvePoint::Infinity => CurvePoint::Infinity,
    }
}

/// Formal sum of points. Terms are merged on exact coordinate equality and
/// zero multiplicities dropped.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Divisor {
    pub terms: Vec<(CurvePoint, i64)>,
}

impl Divisor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_points(points: &[CurvePoint]) -> Self {
        let mut d = Self::new();
        for p in points {
            d.add_point(*p, 1);
        }
        d
    }

    pub fn add_point(&mut self, p: CurvePoint, mult: i64) {
        if let Some(t) = self.terms.iter_mut().find(|t| t.0 == p) {
            t.1 += mult;
        } else {
            self.terms.push((p, mult));
        }
        self.terms.retain(|t| t.1 != 0);
    }

    pub fn degree(&self) -> i64 {
        self.terms.iter().map(|t| t.1).sum()
    }

    pub fn support(&self) -> Vec<CurvePoint> {
        self.terms.iter().map(|t| t.0).collect()
    }

    pub fn is_effective(&self) -> bool {
        self.terms.iter().all(|t| t.1 > 0)
    }

    /// Points repeated by multiplicity.
    pub fn points(&self) -> Vec<CurvePoint> {
        self.terms.iter().flat_map(|&(p, m)| std::iter::repeat_n(p, m.max(0) as usize)).collect()
    }
}

impl Add for &Divisor {
    type Output = Divisor;
    fn add(self, rhs: &Divisor) -> Divisor {
        let mut d = self.clone();
        for &(p, m) in &rhs.terms {
            d.add_point(p, m);
        }
        d
    }
}

/// A point of `C^g` standing for a Jacobian point. Lifts are unconstrained;
/// all arithmetic is exact on the cover, so halving is literal division.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct JacobianLift {
    #[serde(serialize_with = "crate::report::ser_vector")]
    pub z: DVector<Complex64>,
}

impl JacobianLift {
    pub fn new(z: DVector<Complex64>) -> Self {
        Self { z }
    }

    pub fn zero(g: usize) -> Self {
        Self { z: DVector::zeros(g) }
    }

    pub fn genus(&self) -> usize {
        self.z.len()
    }

    pub fn halve(&self) -> Self {
        Self { z: &self.z * Complex64::from(0.5) }
    }

    /// Distance from `self − other` to the lattice.
    pub fn lattice_distance_to(&self, other: &JacobianLift, tau: &RiemannMatrix) -> Result<f64> {
        Ok(nearest_lattice_vector(&(&self.z - &other.z), tau)?.residual_norm)
    }
}

impl Add for &JacobianLift {
    type Output = JacobianLift;
    fn add(self, rhs: &JacobianLift) -> JacobianLift {
        JacobianLift { z: &self.z + &rhs.z }
    }
}

impl Sub for &JacobianLift {
    type Output = JacobianLift;
    fn sub(self, rhs: &JacobianLift) -> JacobianLift {
        JacobianLift { z: &self.z - &rhs.z }
    }
}

impl Neg for &JacobianLift {
    type Output = JacobianLift;
    fn neg(self) -> JacobianLift {
        JacobianLift { z: -&self.z }
    }
}

impl Mul<f64> for &JacobianLift {
    type Output = JacobianLift;
    fn mul(self, k: f64) -> JacobianLift {
        JacobianLift { z: &self.z * Complex64::from(k) }
    }
}

impl AddAssign<&JacobianLift> for JacobianLift {
    fn add_assign(&mut self, rhs: &JacobianLift) {
        self.z += &rhs.z;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_from_coefficients() {
        // x^3 - x
        let c = HyperellipticCurve::from_coeffs(&[0.0, -1.0, 0.0, 1.0]).unwrap();
        assert_eq!(c.genus, 1);
        for (r, e) in c.roots.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((r - e).abs() < 1e-14);
        }
        let d = HyperellipticCurve::reference(2).unwrap();
        let back = HyperellipticCurve::from_coeffs(&d.f_coeffs).unwrap();
        for (a, b) in back.roots.iter().zip(&d.roots) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn repeated_root_is_ill_conditioned() {
        // x^2 (x - 1)(x - 2)(x - 3)
        let r = HyperellipticCurve::from_roots(1.0, &[0.0, 0.0, 1.0, 2.0, 3.0]);
        assert!(matches!(r, Err(Error::IllConditionedCurve(_))));
        let c = HyperellipticCurve::from_roots(1.0, &[0.0, 0.0, 1.0, 2.0, 3.0]).err().unwrap();
        assert_eq!(c.code(), "ILL_CONDITIONED_CURVE");
        let coeffs = [0.0, 0.0, -6.0, 11.0, -6.0, 1.0];
        assert!(matches!(HyperellipticCurve::from_coeffs(&coeffs), Err(Error::IllConditionedCurve(_))));
    }

    #[test]
    fn rejects_even_degree_and_complex_roots() {
        assert!(HyperellipticCurve::from_coeffs(&[1.0, 0.0, 1.0]).is_err());
        assert!(HyperellipticCurve::from_coeffs(&[-1.0, 0.0, 0.0, 0.0, 1.0]).is_err());
        // (x^2 + 1) x
        assert!(matches!(HyperellipticCurve::from_coeffs(&[0.0, 1.0, 0.0, 1.0]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn branch_is_on_curve() {
        let c = HyperellipticCurve::from_roots(-2.0, &[0.0, 1.0, 3.0, 4.5, 7.0]).unwrap();
        for x in [Complex64::new(0.5, 0.0), Complex64::new(-3.0, 0.0), Complex64::new(2.0, -1.5), Complex64::new(9.0, 0.2)] {
            let p = c.point(x, 1.0);
            assert!(c.contains(&p));
            assert!(c.contains(&involution(&p)));
        }
        assert!(!c.contains(&CurvePoint::Finite { x: Complex64::new(2.0, 0.0), y: Complex64::new(1.0, 0.0) }));
    }

    #[test]
    fn involution_fixes_weierstrass_points() {
        let c = HyperellipticCurve::reference(2).unwrap();
        for w in c.weierstrass_points() {
            assert_eq!(involution(&w), w);
        }
        let p = c.point(Complex64::new(1.3, 0.4), 1.0);
        assert_eq!(involution(&involution(&p)), p);
        assert_ne!(involution(&p), p);
    }

    #[test]
    fn divisor_merges_terms() {
        let c = HyperellipticCurve::reference(2).unwrap();
        let p = c.point(Complex64::new(1.3, 0.4), 1.0);
        let mut d = Divisor::from_points(&[p, p, CurvePoint::Infinity]);
        assert_eq!(d.degree(), 3);
        assert_eq!(d.terms.len(), 2);
        d.add_point(CurvePoint::Infinity, -1);
        assert_eq!(d.support(), vec![p]);
        assert!(d.is_effective());
    }
}
