//! One function per subcommand. Each returns the named results and the
//! certificates that decide the exit status.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};
use trisect_core::context::CurveContext;
use trisect_core::curve::{
    period_matrix, random_point, sample_b_ell, CurvePoint, Divisor, HyperellipticCurve, JacobianLift, BILINEAR_TOL,
    TAU_SYMMETRY_TOL,
};
use trisect_core::gamma00::{
    fiber_span_bound, gamma00_combination, gamma00_dimension, span_vp_wp, trisecant_gamma00_test, ConditionMatrix,
};
use trisect_core::geometry::{
    binomial, canonical_direction, gauss_fiber_enumerate, hyperplane_residual, theta_derivatives, LabeledCanonical,
};
use trisect_core::nalgebra::DVector;
use trisect_core::num_complex::Complex64;
use trisect_core::report::{complex_json, matrix_json, vector_json};
use trisect_core::secant::{
    certify_secant, certify_triple, degenerate_trisecant, fay_construct, gunning_construct, halving_residuals,
    multisecant_from_bl, subsets, theta_trisecant_construct,
};
use trisect_core::selftest::{self, Check};
use trisect_core::theta::{theta_jet, HalfCharacteristic, JetOrder, RiemannMatrix};
use trisect_core::{Error, Result};

use crate::input::{curve_json, parse_characteristic, parse_indices, parse_point, tau_json, CurveArgs, MatrixArgs, MatrixSource};
use crate::report::{Kind, Outcome, Timings};
use crate::{ControlArgs, FayArgs, FiberArgs, MultisecantArgs, SelftestArgs, Settings, SpanArgs, ThetaArgs, TrisecantArgs};

/// Inputs, timings and settings of one invocation.
pub struct Run<'a> {
    s: &'a Settings,
    inputs: Map<String, Value>,
    timings: Timings,
}

impl<'a> Run<'a> {
    pub fn new(s: &'a Settings) -> Self {
        Self { s, inputs: Map::new(), timings: Timings::start() }
    }

    /// Canonical inputs: command, seed, tolerances, the loaded curve or
    /// matrix, and the remaining arguments.
    pub fn finish(mut self, command: &str) -> (Value, Timings) {
        self.inputs.insert("command".into(), json!(command));
        self.inputs.insert("seed".into(), json!(self.s.seed));
        self.inputs.insert("tolerances".into(), self.s.record());
        (Value::Object(self.inputs), self.timings)
    }

    fn arg(&mut self, key: &str, value: impl Serialize) {
        self.inputs.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    fn curve(&mut self, a: &CurveArgs) -> Result<HyperellipticCurve> {
        let c = a.load();
        match &c {
            Ok(c) => self.arg("curve", curve_json(c)),
            Err(_) => self.arg("curve_source", json!({ "file": a.curve, "reference": a.reference })),
        }
        self.timings.lap("curve");
        c
    }

    fn context(&mut self, a: &CurveArgs) -> Result<CurveContext> {
        let curve = self.curve(a)?;
        let ctx = CurveContext::new(curve, self.s.tolerances());
        self.timings.lap("context");
        ctx
    }

    fn tau(&mut self, a: &MatrixArgs) -> Result<RiemannMatrix> {
        let source = a.load();
        let tau = match source {
            Ok(MatrixSource::Tau(t)) => {
                self.arg("tau", tau_json(&t));
                Ok(t)
            }
            Ok(MatrixSource::Curve(c)) => {
                self.arg("curve", curve_json(&c));
                period_matrix(&c, self.s.period_tol).map(|p| p.tau)
            }
            Err(e) => {
                self.arg("curve_source", json!({ "file": a.curve, "reference": a.reference, "tau": a.tau }));
                Err(e)
            }
        };
        self.timings.lap("matrix");
        tau
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.s.seed)
    }

    fn lap(&mut self, stage: &str) {
        self.timings.lap(stage);
    }
}

fn at_least_genus(ctx: &CurveContext, g: usize, what: &str) -> Result<()> {
    if ctx.genus() < g {
        return Err(Error::InvalidInput(format!("{what} needs genus at least {g}, curve has genus {}", ctx.genus())));
    }
    Ok(())
}

/// `a + τb` with `a, b` uniform in `[−½, ½]^g`.
fn random_lift<R: Rng>(tau: &RiemannMatrix, rng: &mut R) -> JacobianLift {
    let g = tau.genus();
    let a = DVector::from_fn(g, |_, _| Complex64::from(rng.random_range(-0.5..0.5)));
    let b = DVector::from_fn(g, |_, _| Complex64::from(rng.random_range(-0.5..0.5)));
    JacobianLift::new(a + tau.entries() * b)
}

fn max(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

/// Largest `|⟨∇θ(x), φ(P)⟩|` over the smooth points `x` and the support of `k0`.
fn hyperplane_worst(ctx: &CurveContext, points: &[&JacobianLift], k0: &Divisor) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for x in points {
        let (grad, _) = theta_derivatives(ctx.tau(), x, ctx.tol.theta)?;
        if grad.norm() <= ctx.scale.gradient_threshold() {
            continue;
        }
        for p in k0.support() {
            worst = worst.max(hyperplane_residual(&grad, &canonical_direction(&ctx.curve, &ctx.periods, &p)));
        }
    }
    Ok(worst)
}

pub fn periods(run: &mut Run, a: &CurveArgs) -> Result<Outcome> {
    let curve = run.curve(a)?;
    let p = period_matrix(&curve, run.s.period_tol)?;
    run.lap("periods");
    let (lo, hi) = p.tau.imag_eigen_range();
    let mut o = Outcome::default();
    o.put("genus", curve.genus);
    o.put("roots", &curve.roots);
    o.put("tau", matrix_json(p.tau.entries()));
    o.put("periods", &p);
    o.put("imag_eigen_range", [lo, hi]);
    o.certify(Kind::Residual, Check::below("tau symmetry", p.symmetry_residual, TAU_SYMMETRY_TOL));
    o.certify(Kind::Residual, Check::below("bilinear relation", p.bilinear_residual, BILINEAR_TOL));
    o.certify(Kind::Invariant, Check::above("smallest eigenvalue of Im tau", lo, 0.0));
    Ok(o)
}

pub fn theta(run: &mut Run, a: &ThetaArgs) -> Result<Outcome> {
    let tau = run.tau(&a.source)?;
    let g = tau.genus();
    let z = match &a.z {
        Some(t) => parse_point(t, g)?,
        None => DVector::zeros(g),
    };
    let ch = match &a.characteristic {
        Some(t) => parse_characteristic(t, g)?,
        None => HalfCharacteristic::zero(g),
    };
    run.arg("z", vector_json(&z));
    run.arg("characteristic", &ch);
    let jet = theta_jet(&tau, &z, &ch, JetOrder::Hessian, run.s.theta_tol)?;
    run.lap("series");
    let h = jet.hessian();
    let asym = (h - h.transpose()).norm() / h.norm().max(1.0);
    let mut o = Outcome::default();
    o.put("genus", g);
    o.put("parity", ch.parity());
    o.put("value", complex_json(jet.raw_value()));
    o.put("normalized_value", complex_json(jet.value));
    o.put("log_scale", jet.log_scale);
    o.put("gradient", vector_json(&jet.raw_gradient()));
    o.put("hessian", matrix_json(&jet.raw_hessian()));
    o.put("truncation_radius", jet.radius);
    o.put("terms", jet.terms);
    o.put("bound_on_tail", jet.bound_on_tail);
    o.certify(Kind::Residual, Check::below("tail bound", jet.bound_on_tail, run.s.theta_tol));
    o.certify(Kind::Residual, Check::below("Hessian asymmetry", asym, run.s.residual_tol));
    Ok(o)
}

pub fn fay(run: &mut Run, a: &FayArgs) -> Result<Outcome> {
    let ctx = run.context(&a.source)?;
    at_least_genus(&ctx, 2, "a trisecant")?;
    run.arg("controls", a.controls);
    let mut rng = run.rng();
    let pts: Vec<CurvePoint> = (0..4).map(|_| random_point(&ctx.curve, &mut rng)).collect();
    let t = fay_construct(&ctx, &pts[0], &pts[1], &pts[2], &pts[3])?;
    let cert = certify_triple(&ctx, &t)?;
    // a − b = ζs − ζr, a − c = ζs − ζq, b − c = ζr − ζq.
    let z: Vec<JacobianLift> = pts.iter().map(|p| ctx.zeta(p)).collect::<Result<_>>()?;
    let identities = [
        (&(&t.a - &t.b) - &(&z[3] - &z[2])).z.norm(),
        (&(&t.a - &t.c) - &(&z[3] - &z[1])).z.norm(),
        (&(&t.b - &t.c) - &(&z[2] - &z[1])).z.norm(),
    ];
    let mut o = Outcome::default();
    o.put("triple", &t);
    o.put("certificate", &cert);
    o.put("collinearity_gap", cert.collinearity_gap());
    o.certify(Kind::Secant, Check::holds("Kummer images collinear, pairs independent", cert.passes));
    o.certify(Kind::Residual, Check::below("lift identities", max(identities), run.s.residual_tol));
    let mut controls = Vec::new();
    for k in 0..a.controls {
        let lifts: Vec<JacobianLift> = (0..3).map(|_| random_lift(ctx.tau(), &mut rng)).collect();
        let c = certify_secant(ctx.tau(), &lifts, false, &ctx.scale, &ctx.tol)?;
        o.certify(Kind::Rank, Check::equals(format!("control {k} rank"), c.rank_cert.decided_rank, 3));
        controls.push(c.rank_cert);
    }
    run.lap("construction");
    o.put("controls", controls);
    Ok(o)
}

pub fn trisecant(run: &mut Run, a: &TrisecantArgs) -> Result<Outcome> {
    let ctx = run.context(&a.source)?;
    at_least_genus(&ctx, 3, "a theta trisecant")?;
    run.arg("degenerate", a.degenerate);
    let tol = run.s;
    let mut o = Outcome::default();
    if a.degenerate {
        let s = sample_b_ell(&ctx.curve, 2, tol.seed)?;
        let d = degenerate_trisecant(&ctx, &s)?;
        o.put("sample", &s);
        o.put("degenerate", &d);
        o.certify(Kind::Residual, Check::below("merged points a = b", d.merged_distance, tol.residual_tol));
        o.certify(Kind::Rank, Check::holds("tangent line: rank at most 2", d.tangent_rank.decided_rank <= 2));
        o.certify(Kind::Residual, Check::below("hyperplane containment", max(d.hyperplane_residuals.iter().copied()), tol.residual_tol));
        run.lap("construction");
        return Ok(o);
    }
    let s = sample_b_ell(&ctx.curve, 3, tol.seed)?;
    let t = theta_trisecant_construct(&ctx, &s)?;
    let cert = certify_triple(&ctx, &t)?;
    let halving = halving_residuals(&ctx, &t, &s)?;
    let tau = ctx.tau();
    let distance = [t.a.lattice_distance_to(&t.b, tau)?, t.a.lattice_distance_to(&t.c, tau)?, t.b.lattice_distance_to(&t.c, tau)?]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let hyper = hyperplane_worst(&ctx, &[&t.a, &t.b, &t.c], &s.k0)?;
    run.lap("construction");
    o.put("sample", &s);
    o.put("triple", &t);
    o.put("certificate", &cert);
    o.put("collinearity_gap", cert.collinearity_gap());
    o.put("halving_residuals", halving);
    o.certify(Kind::Secant, Check::holds("Kummer images collinear, pairs independent", cert.passes));
    o.certify(Kind::Residual, Check::below("theta residuals", cert.max_theta_residual(), tol.on_theta_tol));
    o.certify(Kind::Residual, Check::below("Gauss angles", cert.max_gauss_angle(), tol.residual_tol));
    o.certify(Kind::Residual, Check::below("halving modulo lattice", max(halving), tol.residual_tol));
    o.certify(Kind::Invariant, Check::above("pairwise distance modulo lattice", distance, tol.distinct_tol));
    o.certify(Kind::Residual, Check::below("hyperplane containment", hyper, tol.residual_tol));
    if let Some(r) = cert.outer_product_residual {
        o.certify(Kind::Residual, Check::below("outer-product identity", r, tol.residual_tol));
    }
    Ok(o)
}

pub fn multisecant(run: &mut Run, a: &MultisecantArgs) -> Result<Outcome> {
    let ctx = run.context(&a.source)?;
    run.arg("ell", a.ell);
    run.arg("gunning", a.gunning);
    run.arg("partition", &a.partition);
    let mut o = Outcome::default();
    if a.gunning {
        if a.ell < 3 {
            return Err(Error::InvalidInput("Gunning's construction needs ell at least 3".into()));
        }
        let mut rng = run.rng();
        let pts: Vec<CurvePoint> = (0..2 * a.ell - 2).map(|_| random_point(&ctx.curve, &mut rng)).collect();
        let m = gunning_construct(&ctx, &pts[..a.ell], &pts[a.ell..])?;
        run.lap("construction");
        o.put("points", &pts);
        o.put("collinearity_gap", m.certificate.collinearity_gap());
        o.certify(Kind::Secant, Check::holds("rank ell - 1 with general position", m.certificate.passes));
        o.put("multisecant", &m);
        return Ok(o);
    }
    let s = sample_b_ell(&ctx.curve, a.ell, run.s.seed)?;
    let partitions = match &a.partition {
        Some(t) => vec![parse_indices(t)?],
        None => subsets(s.simple.len(), a.ell),
    };
    let mut records = Vec::with_capacity(partitions.len());
    for p in partitions {
        let m = multisecant_from_bl(&ctx, &s, &p)?;
        o.certify(Kind::Secant, Check::holds(format!("partition {p:?}"), m.certificate.passes));
        records.push(json!({ "p_indices": p, "collinearity_gap": m.certificate.collinearity_gap(), "multisecant": m }));
    }
    run.lap("construction");
    o.put("sample", &s);
    o.put("partitions", records);
    Ok(o)
}

pub fn fiber(run: &mut Run, a: &FiberArgs) -> Result<Outcome> {
    run.arg("k0", &a.k0);
    run.arg("genus", a.genus);
    let k0 = LabeledCanonical::parse(&a.k0, a.genus)?;
    let entries = gauss_fiber_enumerate(&k0)?;
    run.lap("enumeration");
    let total: u64 = entries.iter().map(|e| e.multiplicity).sum();
    let expected = binomial(2 * a.genus - 2, a.genus - 1);
    let mut o = Outcome::default();
    o.put("k0", &k0);
    o.put("entries", &entries);
    o.put("total_multiplicity", total);
    o.certify(Kind::Count, Check::equals("total multiplicity", total, expected));
    Ok(o)
}

pub fn gamma00_dim(run: &mut Run, a: &MatrixArgs) -> Result<Outcome> {
    let tau = run.tau(a)?;
    let cond = ConditionMatrix::new(&tau, run.s.theta_tol)?;
    let d = gamma00_dimension(&cond, run.s.rank_tol)?;
    run.lap("conditions");
    let mut o = Outcome::default();
    o.put("genus", tau.genus());
    o.put("dimension", d.dimension);
    o.put("expected", d.expected);
    o.put("rank_certificate", &d.certificate);
    o.put("basis", matrix_json(&d.basis));
    o.certify(Kind::Rank, Check::equals("dimension", d.dimension as i64, d.expected));
    Ok(o)
}

pub fn gamma00_trisecant(run: &mut Run, a: &ControlArgs) -> Result<Outcome> {
    let ctx = run.context(&a.source)?;
    at_least_genus(&ctx, 3, "a theta trisecant")?;
    run.arg("controls", a.controls);
    let (s, tau) = (run.s, ctx.tau());
    let cond = ConditionMatrix::new(tau, s.theta_tol)?;
    let sample = sample_b_ell(&ctx.curve, 3, s.seed)?;
    let t = theta_trisecant_construct(&ctx, &sample)?;
    let comb = gamma00_combination(tau, &cond, &t.a, &t.b, ctx.scale.gradient_threshold(), s.theta_tol)?;
    let hit = trisecant_gamma00_test(tau, &cond, [&t.a, &t.b, &t.c], s.rank_tol, s.theta_tol)?;
    let mut o = Outcome::default();
    o.certify(Kind::Residual, Check::below("combination conditions", comb.relative_residual, s.residual_tol));
    o.certify(Kind::Rank, Check::equals("intersection for the trisecant", hit.dimension, 1));
    let mut rng = run.rng();
    let mut controls = Vec::with_capacity(a.controls);
    for k in 0..a.controls {
        let x: Vec<JacobianLift> = (0..3)
            .map(|_| {
                let pts: Vec<CurvePoint> = (0..ctx.genus() - 1).map(|_| random_point(&ctx.curve, &mut rng)).collect();
                ctx.theta_point(&Divisor::from_points(&pts))
            })
            .collect::<Result<_>>()?;
        let c = trisecant_gamma00_test(tau, &cond, [&x[0], &x[1], &x[2]], s.rank_tol, s.theta_tol)?;
        o.certify(Kind::Rank, Check::equals(format!("intersection for control {k}"), c.dimension, 0));
        controls.push(c);
    }
    run.lap("construction");
    o.put("sample", &sample);
    o.put("triple", &t);
    o.put("combination", &comb);
    o.put("intersection", &hit);
    o.put("controls", &controls);
    Ok(o)
}

pub fn span(run: &mut Run, a: &SpanArgs) -> Result<Outcome> {
    let ctx = run.context(&a.source)?;
    run.arg("ell", a.ell);
    let s = sample_b_ell(&ctx.curve, a.ell, run.s.seed)?;
    let cond = ConditionMatrix::new(ctx.tau(), run.s.theta_tol)?;
    let rep = span_vp_wp(&ctx, &cond, &s)?;
    let bound = fiber_span_bound(&ctx, &s.k0)?;
    run.lap("spans");
    let mut o = Outcome::default();
    o.put("sample", &s);
    o.put("spans", &rep);
    o.put("fiber_span", &bound);
    o.certify(Kind::Invariant, Check::holds("V inside W inside the order-four sections", rep.chain_holds));
    o.certify(Kind::Rank, Check::holds("fibre span within the bound", bound.holds));
    Ok(o)
}

pub fn selftest(run: &mut Run, a: &SelftestArgs) -> Result<Outcome> {
    run.arg("only", &a.only);
    let r = selftest::run(run.s.seed, run.s.tolerances(), &a.only)?;
    run.lap("criteria");
    let mut o = Outcome::default();
    for c in &r.criteria {
        eprintln!("{}", c.summary_line());
        o.certify(Kind::Criterion, Check::holds(c.slug.clone(), c.pass));
    }
    o.put("criteria", &r.criteria);
    Ok(o)
}
