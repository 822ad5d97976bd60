//! Curve contexts shared by the property suites, built once per test binary.

use std::sync::OnceLock;

use trisect_core::context::{CurveContext, Tolerances};
use trisect_core::curve::HyperellipticCurve;

pub fn context(g: usize) -> &'static CurveContext {
    static CONTEXTS: [OnceLock<CurveContext>; 6] = [const { OnceLock::new() }; 6];
    CONTEXTS[g].get_or_init(|| CurveContext::new(HyperellipticCurve::reference(g).unwrap(), Tolerances::default()).unwrap())
}
