//! Tolerance policy and the per-curve data every construction needs.

use serde::Serialize;

use crate::curve::{
    abel_jacobi, abel_jacobi_divisor, period_matrix, riemann_constant, CurvePoint, Divisor, HyperellipticCurve,
    JacobianLift, PeriodData, RiemannConstant, DEFAULT_AJ_TOL, DEFAULT_PERIOD_TOL,
};
use crate::error::Result;
use crate::geometry::{theta_divisor_scale, ThetaDivisorScale, DEFAULT_ON_THETA_TOL};
use crate::numeric::DEFAULT_RANK_TOL;
use crate::theta::{RiemannMatrix, DEFAULT_THETA_TOL};

/// Number of random points of Θ behind the smoothness threshold.
pub const SCALE_SAMPLES: usize = 25;
const SCALE_SEED: u64 = 0x5343_414c_45;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Relative singular-value threshold for rank decisions.
    pub rank: f64,
    /// Absolute tail bound for theta series on the normalized scale.
    pub theta: f64,
    /// Relative θ residual below which a point counts as on Θ.
    pub on_theta: f64,
    pub abel_jacobi: f64,
    pub periods: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank: DEFAULT_RANK_TOL,
            theta: DEFAULT_THETA_TOL,
            on_theta: DEFAULT_ON_THETA_TOL,
            abel_jacobi: DEFAULT_AJ_TOL,
            periods: DEFAULT_PERIOD_TOL,
        }
    }
}

/// A curve with its periods, Riemann constant and theta-divisor scale.
#[derive(Debug, Clone)]
pub struct CurveContext {
    pub curve: HyperellipticCurve,
    pub periods: PeriodData,
    pub kappa: RiemannConstant,
    pub scale: ThetaDivisorScale,
    pub tol: Tolerances,
}

impl CurveContext {
    pub fn new(curve: HyperellipticCurve, tol: Tolerances) -> Result<Self> {
        let periods = period_matrix(&curve, tol.periods)?;
        let kappa = riemann_constant(&curve, &periods, tol.theta)?;
        let scale = theta_divisor_scale(&periods.tau, SCALE_SAMPLES, SCALE_SEED, tol.theta)?;
        Ok(Self { curve, periods, kappa, scale, tol })
    }

    pub fn genus(&self) -> usize {
        self.curve.genus
    }

    pub fn tau(&self) -> &RiemannMatrix {
        &self.periods.tau
    }

    pub fn zeta(&self, p: &CurvePoint) -> Result<JacobianLift> {
        abel_jacobi(&self.curve, p, &self.periods, self.tol.abel_jacobi)
    }

    pub fn zeta_divisor(&self, d: &Divisor) -> Result<JacobianLift> {
        abel_jacobi_divisor(&self.curve, d, &self.periods, self.tol.abel_jacobi)
    }

    /// `ζ(D) − κ`, the point of Θ attached to an effective divisor of degree `g − 1`.
    pub fn theta_point(&self, d: &Divisor) -> Result<JacobianLift> {
        Ok(&self.zeta_divisor(d)? - &self.kappa.kappa)
    }
}
