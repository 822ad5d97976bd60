//! Riemann theta functions with half-integer characteristics, their first
//! and second derivatives, and the second-order theta functions that give
//! coordinates on the Kummer variety.

mod characteristic;
mod riemann_matrix;
mod series;

pub use characteristic::{epsilon_from_index, epsilon_vectors, HalfCharacteristic};
pub use riemann_matrix::RiemannMatrix;
pub use series::{
    gaussian_tail_bound, second_order_jet, second_order_theta, theta, theta_gradient, theta_hessian, theta_jet,
    truncation_radius, JetOrder, ThetaJet, ThetaValue, DEFAULT_THETA_TOL,
};
