//! Geometry of the theta divisor: the Kummer map, membership and smoothness
//! on Θ, the Gauss map, and the combinatorics of Gauss fibres over canonical
//! divisors.
//!
//! Theta values are compared on the normalized scale of the theta engine,
//! which makes residuals and gradient sizes independent of where a lift sits
//! on the universal cover.

mod fiber;
mod kummer;
mod theta_divisor;

pub use fiber::{binomial, gauss_fiber_enumerate, GaussFiberEntry, LabeledCanonical};
pub use kummer::{kummer_map, kummer_matrix, second_order_values, KummerPoint};
pub use theta_divisor::{
    canonical_direction, gauss_map, hyperplane_residual, on_theta, random_theta_point, theta_derivatives,
    theta_divisor_scale, theta_residual, vanishing_order, GaussImage, ThetaDivisorScale, ThetaResidual,
    VanishingOrder, DEFAULT_ON_THETA_TOL, SMOOTHNESS_FACTOR,
};
