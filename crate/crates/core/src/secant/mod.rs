//! Construction and certification of trisecants and multisecants of the
//! Kummer variety.
//!
//! Every construction works with lifts on the universal cover under one fixed
//! system of Abel–Jacobi paths, so halving is literal division and the lift
//! identities behind each construction hold exactly.

mod certificate;
mod construct;

pub use certificate::{certify_secant, igusa_span_check, GaussAngle, SecantCertificate, SpanCheck};
pub use construct::{
    certify_triple, degenerate_trisecant, fay_construct, gunning_construct, halving_residuals, multisecant_from_bl, subsets,
    theta_trisecant_construct, DegenerateTrisecant, Multisecant, TripleSource, TrisecantTriple,
};
