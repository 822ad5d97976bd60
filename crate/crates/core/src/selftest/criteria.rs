use nalgebra::DVector;
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;

use super::{agm_tau, Check, Sheet, Workbench};
use crate::context::CurveContext;
use crate::curve::{period_matrix, random_point, sample_b_ell, BellSample, Divisor, HyperellipticCurve, JacobianLift};
use crate::error::{Error, Result};
use crate::gamma00::{self, gamma00_combination, trisecant_gamma00_test, ConditionMatrix};
use crate::geometry::{
    binomial, canonical_direction, gauss_fiber_enumerate, hyperplane_residual, theta_derivatives, theta_residual,
    LabeledCanonical,
};
use crate::numeric::{lattice_distance, projective_angle};
use crate::secant::{
    certify_secant, certify_triple, degenerate_trisecant, fay_construct, gunning_construct, halving_residuals,
    igusa_span_check, theta_trisecant_construct,
};
use crate::theta::{theta_jet, HalfCharacteristic, JetOrder, RiemannMatrix};

const FD_STEP: f64 = 1e-5;

/// `a + τb` with `a, b` uniform in `[−½, ½]^g`.
fn random_lift<R: Rng>(tau: &RiemannMatrix, rng: &mut R) -> DVector<Complex64> {
    let g = tau.genus();
    let a = DVector::from_fn(g, |_, _| Complex64::from(rng.random_range(-0.5..0.5)));
    let b = DVector::from_fn(g, |_, _| Complex64::from(rng.random_range(-0.5..0.5)));
    a + tau.entries() * b
}

fn random_divisor<R: Rng>(curve: &HyperellipticCurve, degree: usize, rng: &mut R) -> Divisor {
    let pts: Vec<_> = (0..degree).map(|_| random_point(curve, rng)).collect();
    Divisor::from_points(&pts)
}

fn b3_sample(wb: &Workbench, c: &CurveContext) -> Result<BellSample> {
    sample_b_ell(&c.curve, 3, wb.sub_seed("b3", c.genus()))
}

fn theta_value(tau: &RiemannMatrix, z: &DVector<Complex64>, ch: &HalfCharacteristic, tol: f64) -> Result<Complex64> {
    Ok(theta_jet(tau, z, ch, JetOrder::Value, tol)?.raw_value())
}

fn min_pairwise_distance(tau: &RiemannMatrix, pts: &[&JacobianLift]) -> Result<f64> {
    let mut m = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            m = m.min(pts[i].lattice_distance_to(pts[j], tau)?);
        }
    }
    Ok(m)
}

pub(super) fn elliptic_periods(wb: &mut Workbench, sheet: &mut Sheet) -> Result<()> {
    let curve = HyperellipticCurve::reference(1)?;
    let p = period_matrix(&curve, wb.tol.periods)?;
    let tau = p.tau.entries()[(0, 0)];
    let oracle = agm_tau(&curve.roots)?;
    sheet.note("tau", [tau.re, tau.im]);
    sheet.note("nodes_used", p.nodes_used);
    sheet.check(Check::below("|tau - agm|", (tau - oracle).norm(), 1e-9));
    sheet.check(Check::below("|tau - i|", (tau - Complex64::i()).norm(), 1e-9));
    Ok(())
}

pub(super) fn addition_formula(wb: &mut Workbench, sheet: &mut Sheet) -> Result<()> {
    let tol = wb.tol.theta;
    for g in [2, 3] {
        let c = wb.context(g)?;
        let tau = c.tau();
        let zero = HalfCharacteristic::zero(g);
        let mut rng = wb.rng("addition", g);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let z = random_lift(tau, &mut rng);
            let w = random_lift(tau, &mut rng);
            // Normalized scales agree: L(z + w) + L(z − w) = 2L(z) + 2L(w).
            let lhs = theta_jet(tau, &(&z + &w), &zero, JetOrder::Value, tol)?.value
                * theta_jet(tau, &(&z - &w), &zero, JetOrder::Value, tol)?.value;
            let (sz, _) = crate::geometry::second_order_values(tau, &z, false, tol)?;
            let (sw, _) = crate::geometry::second_order_values(tau, &w, false, tol)?;
            let rhs: Complex64 = sz.iter().zip(sw.iter()).map(|(a, b)| a * b).sum();
            let size: f64 = lhs.norm() + sz.iter().zip(sw.iter()).map(|(a, b)| (a * b).norm()).sum::<f64>();
            worst = worst.max((lhs - rhs).norm() / size);
        }
        sheet.check(Check::below(format!("addition formula g={g}, 100 pairs"), worst, 1e-9));

        let mut worst_q: f64 = 0.0;
        for _ in 0..20 {
            let z = random_lift(tau, &mut rng);
            let n: Vec<i64> = loop {
                let n: Vec<i64> = (0..g).map(|_| rng.random_range(-1..=1)).collect();
                if n.iter().any(|&k| k != 0) {
                    break n;
                }
            };
            let nv = DVector::from_iterator(g, n.iter().map(|&k| Complex64::from(k as f64)));
            let shifted = &z + tau.entries() * &nv;
            let j1 = theta_jet(tau, &shifted, &zero, JetOrder::Value, tol)?;
            let j0 = theta_jet(tau, &z, &zero, JetOrder::Value, tol)?;
            let pi_i = Complex64::new(0.0, std::f64::consts::PI);
            let exponent = Complex64::from(j1.log_scale - j0.log_scale)
                + pi_i * nv.dot(&(tau.entries() * &nv))
                + pi_i * 2.0 * nv.dot(&z);
            let lhs = j1.value * exponent.exp();
            worst_q = worst_q.max((lhs - j0.value).norm() / (lhs.norm() + j0.value.norm()));
        }
        sheet.check(Check::below(format!("quasi-periodicity g={g}"), worst_q, 1e-9));
    }
    for g in 1..=3 {
        let c = wb.context(g)?;
        let tau = c.tau();
        let mut rng = wb.rng("parity", g);
        let mut worst: f64 = 0.0;
        for ch in HalfCharacteristic::all(g) {
            let sign = if ch.is_odd() { -1.0 } else { 1.0 };
            for _ in 0..5 {
                let z = random_lift(tau, &mut rng);
                let p = theta_jet(tau, &z, &ch, JetOrder::Value, tol)?.value;
                let m = theta_jet(tau, &(-&z), &ch, JetOrder::Value, tol)?.value;
                worst = worst.max((m - p * sign).norm() / (p.norm() + m.norm()));
            }
        }
        sheet.check(Check::below(format!("parity, all characteristics g={g}"), worst, 1e-9));
    }
    Ok(())
}

pub(super) fn derivatives(wb: &mut Workbench, sheet: &mut Sheet) -> Result<()> {
    let c = wb.context(2)?;
    let tau = c.tau();
    let tol = wb.tol.theta;
    let mut rng = wb.rng("derivatives", 2);
    let (mut worst_g, mut worst_h): (f64, f64) = (0.0, 0.0);
    let h = Complex64::from(FD_STEP);
    for _ in 0..20 {
        let z = random_lift(tau, &mut rng);
        for ch in HalfCharacteristic::all(2) {
            let jet = theta_jet(tau, &z, &ch, JetOrder::Hessian, tol)?;
            let grad = jet.raw_gradient();
            let hess = jet.raw_hessian();
            let gscale = grad.iter().map(|v| v.norm()).fold(1.0, f64::max);
            let hscale = hess.iter().map(|v| v.norm()).fold(1.0, f64::max);
            for k in 0..2 {
                let mut e = DVector::zeros(2);
                e[k] = h;
                let fd = (theta_value(tau, &(&z + &e), &ch, tol)? - theta_value(tau, &(&z - &e), &ch, tol)?) / (h * 2.0);
                worst_g = worst_g.max((fd - grad[k]).norm() / gscale);
                let gp = theta_jet(tau, &(&z + &e), &ch, JetOrder::Gradient, tol)?.raw_gradient();
                let gm = theta_jet(tau, &(&z - &e), &ch, JetOrder::Gradient, tol)?.raw_gradient();
                for j in 0..2 {
                    let fdh = (gp[j] - gm[j]) / (h * 2.0);
                    worst_h = worst_h.max((fdh - hess[(j, k)]).norm() / hscale);
                }
            }
        }
    }
    sheet.note("step", FD_STEP);
    sheet.check(Check::below("gradient vs central differences, 20 points x 16 characteristics", worst_g, 1e-7));
    sheet.check(Check::below("Hessian vs differences of the gradient", worst_h, 1e-7));
    Ok(())
}

pub(super) fn riemann_constant(wb: &mut Workbench, sheet: &mut Sheet) -> Result<()> {
    for g in [2, 3, 4] {
        let c = wb.context(g)?;
        let survivors = match crate::curve::riemann_constant(&c.curve, &c.periods, c.tol.theta) {
            Ok(_) => 1,
            Err(Error::AmbiguousConstant { survivors }) => survivors,
            Err(e) => return Err(e),
        };
        sheet.check(Check::equals(format!("surviving candidates g={g}"), survivors, 1));
        let mut rng = wb.rng("kappa-fresh", g);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let d = random_divisor(&c.curve, g - 1, &mut rng);
            worst = worst.max(theta_residual(c.tau(), &c.theta_point(&d)?, c.tol.theta)?.residual);
        }
        sheet.check(Check::below(format!("theta residual on 20 fresh divisors g={g}"), worst, 1e-7));
        let twice = &c.kappa.kappa.z * Complex64::from(2.0);
        sheet.check(Check::below(format!("2 kappa in lattice g={g}"), lattice_distance(&twice, c.tau())?, 1e-7));
        let s = sample_b_ell(&c.curve, 2, wb.sub_seed("kappa-k0", g))?;
        let zk = c.zeta_divisor(&s.k0)?;
        sheet.check(Check::below(
            format!("2 kappa - zeta(K0) in lattice g={g}"),
            lattice_distance(&(&twice - &zk.z), c.tau())?,
            1e-7,
        ));
        sheet.note(&format!("kappa_residual_g{g}"), c.kappa.max_residual);
    }
    Ok(())
}

pub(super) fn fay_trisecant(wb: &mut Workbench, sheet: &mut Sheet) -> Result<()> {
    for g in [2, 3] {
        let c = wb.context(g)?;
        let mut rng = wb.rng("fay", g);
        let (mut passing, mut worst_gap) = (0, 0.0f64);
        for _ in 0..10 {
            let pts: Vec<_> = (0..4).map(|_| random_point(&c.curve, &mut rng)).collect();
            let t = fay_construct(&c, &pts[0], &pts[1], &pts[2], &pts[3])?;
            let cert = certify_triple(&c, &t)?;
            passing += cert.passes as usize;
            worst_gap = worst_gap.max(cert.collinearity_gap());
        }
        sheet.check(Check::equals(format!("Fay certificates passing g={g}"), passing, 10));
        sheet.check(Check::below(format!("worst Fay gap ratio g={g}"), worst_gap, 1e-6));

        let (mut full, mut smallest) = (0, f64::INFINITY);
        for _ in 0..10 {
            let lifts: Vec<JacobianLift> = (0..3).map(|_| JacobianLift::new(random_lift(c.tau(), &mut rng))).collect();
            let cert = certify_secant(c.tau(), &lifts, false, &c.scale, &c.tol)?;
            full += (cert.rank_cert.decided_rank == 3 && !cert.passes) as usize;
            smallest = smallest.min(cert.rank_cert.retained_ratio());
        }
        sheet.check(Check::equals(format!("random controls at full rank g={g}"), full, 10));
        sheet.note(&format!("control_min_sigma3_g{g}"), smallest);
    }
    Ok(())
}

pub(super) fn theta_trisecant(wb: &mut Workbench, sheet: &mut Sheet) -> Result<()> {
    for g in [3, 4] {
        let c = wb.context(g)?;
        let s = b3_sample(wb, &c)?;
        let t = theta_trisecant_construct(&c, &s)?;
        let cert = certify_triple(&c, &t)?;
        sheet.check(Check::below(format!("theta residuals g={g}"), cert.max_theta_residual(), 1e-7));
        sheet.check(Check::holds(format!("certificate passes g={g}"), cert.passes));
        sheet.check(Check::below(format!("collinearity gap g={g}"), cert.collinearity_gap(), 1e-6));
        sheet.check(Check::below(format!("pairwise Gauss angles g={g}"), cert.max_gauss_angle(), 1e-6));
        sheet.check(Check::below(format!("halving lattice residual g={g}"), halving_residuals(&c, &t, &s)?.into_iter().fold(0.0, f64::max), 1e-7));
        sheet.check(Check::above(
            format!("pairwise distance modulo lattice g={g}"),
            min_pairwise_distance(c.tau(), &[&t.a, &t.b, &t.c])?,
            1e-3,
        ));
        sheet.note(&format!("gauss_defined_g{g}"), &cert.gauss_defined);
    }
    Ok(())
}

pub(super) fn gauss_span(wb: &mut Workbench, sheet: &mut Sheet) -> Result<()> {
    let mut tested = 0usize;
    for g in [3, 4] {
        let c = wb.context(g)?;
        let s = b3_sample(wb, &c)?;
        let t = theta_trisecant_construct(&c, &s)?;
        let mut worst: f64 = 0.0;
        for x in [&t.a, &t.b, &t.c] {
            let (grad, _) = theta_derivatives(c.tau(), x, c.tol.theta)?;
            if grad.norm() <= c.scale.gradient_threshold() {
                continue;
            }
            for p in s.k0.support() {
                worst = worst.max(hyperplane_residual(&grad, &canonical_direction(&c.curve, &c.periods, &p)));
                tested += 1;
            }
        }
        sheet.check(Check::below(format!("trisecant points against K0 g={g}"), worst, 1e-6));

        let mut rng = wb.rng("gauss-random", g);
        let mut worst_r: f64 = 0.0;
        for _ in 0..10 {
            let d = random_divisor(&c.curve, g - 1, &mut rng);
            let (grad, _) = theta_derivatives(c.tau(), &c.theta_point(&d)?, c.tol.theta)?;
            for p in d.support() {
                worst_r = worst_r.max(hyperplane_residual(&grad, &canonical_direction(&c.curve, &c.periods, &p)));
                tested += 1;
            }
        }
        sheet.check(Check::below(format!("random W(g-1) points against their divisor g={g}"), worst_r, 1e-6));
    }
    let c = wb.context(3)?;
    let d = degenerate_trisecant(&c, &sample_b_ell(&c.curve, 2, wb.sub_seed("b2", 3))?)?;
    tested += d.hyperplane_residuals.len();
    let worst_d = d.hyperplane_residuals.iter().copied().fold(0.0, f64::max);
    sheet.check(Check::below("degenerate trisecant against K0 g=3", worst_d, 1e-6));
    sheet.note("pairs_tested", tested);
    Ok(())
}

pub(super) fn fiber_multiplicity(wb: &mut Workbench, sheet: &mut Sheet) -> Result<()> {
    let entries = gauss_fiber_enumerate(&LabeledCanonical::parse("4P0", 3)?)?;
    sheet.check(Check::equals("entries over 4P0", entries.len(), 1));
    sheet.check(Check::equals("multiplicity over 4P0", entries.first().map_or(0, |e| e.multiplicity), 6));

    let mut rng = wb.rng("fiber", 0);
    let mut exact = 0usize;
    for _ in 0..50 {
        let g: usize = rng.random_range(2..=6);
        let n = 2 * g - 2;
        // A random composition of n: cut points chosen among the n − 1 gaps.
        let k = rng.random_range(1..=n);
        let mut cuts: Vec<usize> = sample(&mut rng, n - 1, k - 1).into_iter().map(|i| i + 1).collect();
        cuts.sort_unstable();
        let mut mults = Vec::with_capacity(k);
        let mut last = 0;
        for cut in cuts.into_iter().chain([n]) {
            mults.push(cut - last);
            last = cut;
        }
        let labels = (0..mults.len()).map(|i| format!("P{i}")).collect();
        let k0 = LabeledCanonical::new(g, labels, mults)?;
        let total: u64 = gauss_fiber_enumerate(&k0)?.iter().map(|e| e.multiplicity).sum();
        exact += (total == binomial(n, g - 1)) as usize;
    }
    sheet.check(Check::equals("Vandermonde sums equal to C(2g-2, g-1), 50 partitions", exact, 50));
    Ok(())
}

pub(super) fn multisecant(wb: &mut Workbench, sheet: &mut Sheet) -> Result<()> {
    let c = wb.context(5)?;
    let tau = c.tau();
    let mut rng = wb.rng("gunning", 5);
    let pts: Vec<_> = (0..6).map(|_| random_point(&c.curve, &mut rng)).collect();
    let m = gunning_construct(&c, &pts[..4], &pts[4..])?;
    sheet.check(Check::holds("Gunning rank at most 3 with general position", m.certificate.passes));
    sheet.check(Check::below("Gunning gap ratio", m.certificate.collinearity_gap(), 1e-5));

    // Every partition point is ζ(S + ΣQ) − κ for a 3-subset S of the six
    // simple points, so the union over partitions is indexed by 3-subsets.
    let s = sample_b_ell(&c.curve, 4, wb.sub_seed("b4", 5))?;
    let mut points = Vec::new();
    for subset in crate::secant::subsets(s.simple.len(), 3) {
        let mut d = s.doubled_divisor();
        for i in subset {
            d.add_point(s.simple[i], 1);
        }
        points.push(c.theta_point(&d)?);
    }
    let mut residual: f64 = 0.0;
    let mut grads = Vec::new();
    for x in &points {
        residual = residual.max(theta_residual(tau, x, c.tol.theta)?.residual);
        let (gr, _) = theta_derivatives(tau, x, c.tol.theta)?;
        if gr.norm() > c.scale.gradient_threshold() {
            grads.push(gr);
        }
    }
    let mut classes: Vec<&JacobianLift> = Vec::new();
    for x in &points {
        let mut seen = false;
        for y in &classes {
            if x.lattice_distance_to(y, tau)? < 1e-6 {
                seen = true;
                break;
            }
        }
        if !seen {
            classes.push(x);
        }
    }
    let mut angle: f64 = 0.0;
    for i in 0..grads.len() {
        for j in i + 1..grads.len() {
            angle = angle.max(projective_angle(&grads[i], &grads[j])?);
        }
    }
    sheet.check(Check::equals("distinct partition points modulo lattice", classes.len(), 20));
    sheet.check(Check::below("partition points on theta", residual, 1e-6));
    sheet.check(Check::below("Gauss angles across smooth partition points", angle, 1e-5));
    sheet.note("smooth_partition_points", grads.len());
    Ok(())
}

pub(super) fn gamma00_dimension(wb: &mut Workbench, sheet: &mut Sheet) -> Result<()> {
    for (g, expected) in [(2, 0usize), (3, 1), (4, 5)] {
        let c = wb.context(g)?;
        let cond = ConditionMatrix::new(c.tau(), c.tol.theta)?;
        let d = gamma00::gamma00_dimension(&cond, c.tol.rank)?;
        sheet.check(Check::equals(format!("dimension g={g}"), d.dimension, expected));
        sheet.check(Check::below(format!("gap ratio g={g}"), d.certificate.gap_ratio, 1e-6));
        sheet.note(&format!("smallest_retained_ratio_g{g}"), d.certificate.retained_ratio());
    }
    Ok(())
}

pub(super) fn gamma00_lemmas(wb: &mut Workbench, sheet: &mut Sheet) -> Result<()> {
    for g in [3, 4] {
        let c = wb.context(g)?;
        let tau = c.tau();
        let cond = ConditionMatrix::new(tau, c.tol.theta)?;
        let t = theta_trisecant_construct(&c, &b3_sample(wb, &c)?)?;
        let comb = gamma00_combination(tau, &cond, &t.a, &t.b, c.scale.gradient_threshold(), c.tol.theta)?;
        sheet.check(Check::below(format!("combination conditions g={g}"), comb.relative_residual, 1e-6));
        let hit = trisecant_gamma00_test(tau, &cond, [&t.a, &t.b, &t.c], c.tol.rank, c.tol.theta)?;
        sheet.check(Check::equals(format!("intersection for the trisecant g={g}"), hit.dimension, 1));

        let mut rng = wb.rng("gamma00-controls", g);
        let mut zero = 0usize;
        for _ in 0..10 {
            let x: Vec<JacobianLift> =
                (0..3).map(|_| c.theta_point(&random_divisor(&c.curve, g - 1, &mut rng))).collect::<Result<_>>()?;
            zero += (trisecant_gamma00_test(tau, &cond, [&x[0], &x[1], &x[2]], c.tol.rank, c.tol.theta)?.dimension == 0) as usize;
        }
        sheet.check(Check::equals(format!("generic triples on theta with zero intersection g={g}"), zero, 10));
    }
    Ok(())
}

pub(super) fn secant_internals(wb: &mut Workbench, sheet: &mut Sheet) -> Result<()> {
    let mut certified = 0usize;
    for g in [3, 4, 5] {
        let c = wb.context(g)?;
        let t = theta_trisecant_construct(&c, &b3_sample(wb, &c)?)?;
        let cert = certify_triple(&c, &t)?;
        if !cert.passes {
            continue;
        }
        certified += 1;
        sheet.check(Check::below(format!("outer-product residual g={g}"), cert.outer_product_residual.unwrap_or(f64::NAN), 1e-6));
        // Gradients at singular points carry no direction and enter as zero.
        let grads: Vec<DVector<Complex64>> = t
            .lifts()
            .iter()
            .map(|x| {
                let (gr, _) = theta_derivatives(c.tau(), x, c.tol.theta)?;
                Ok(if gr.norm() > c.scale.gradient_threshold() { gr } else { DVector::zeros(g) })
            })
            .collect::<Result<_>>()?;
        let span = igusa_span_check(&grads, c.tol.rank)?;
        sheet.check(Check::holds(format!("gradient span rank {} at most 1 g={g}", span.cert.decided_rank), span.holds));
    }
    sheet.check(Check::above("passing trisecant certificates examined", certified as f64, 0.0));
    Ok(())
}
