use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::certificate::{certify_secant, SecantCertificate};
use crate::context::CurveContext;
use crate::curve::{BellSample, CurvePoint, Divisor, JacobianLift};
use crate::error::{Error, Result};
use crate::geometry::{canonical_direction, hyperplane_residual, second_order_values, theta_derivatives};
use crate::numeric::{lattice_distance, numerical_rank, RankCertificate};

#[derive(Debug, Clone, Serialize)]
pub enum TripleSource {
    Fay { points: [CurvePoint; 4] },
    ThetaConstruction { ell: usize, seed: u64, k0: Divisor },
}

/// Three lifts whose Kummer images are expected to be collinear.
#[derive(Debug, Clone, Serialize)]
pub struct TrisecantTriple {
    pub a: JacobianLift,
    pub b: JacobianLift,
    pub c: JacobianLift,
    pub source: TripleSource,
}

impl TrisecantTriple {
    pub fn lifts(&self) -> Vec<JacobianLift> {
        vec![self.a.clone(), self.b.clone(), self.c.clone()]
    }
}

fn check_distinct_x(points: &[CurvePoint]) -> Result<()> {
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[i].x() == points[j].x() {
                return Err(Error::InvalidInput(format!("points {i} and {j} share an x-coordinate")));
            }
        }
    }
    Ok(())
}

/// Fay's trisecant for four points, halving literally on the cover:
/// `a = (ζp − ζq − ζr + ζs)/2`, `b = (ζp − ζq + ζr − ζs)/2`,
/// `c = (ζp + ζq − ζr − ζs)/2`.
pub fn fay_construct(ctx: &CurveContext, p: &CurvePoint, q: &CurvePoint, r: &CurvePoint, s: &CurvePoint) -> Result<TrisecantTriple> {
    check_distinct_x(&[*p, *q, *r, *s])?;
    let (zp, zq, zr, zs) = (ctx.zeta(p)?, ctx.zeta(q)?, ctx.zeta(r)?, ctx.zeta(s)?);
    let a = (&(&(&zp - &zq) - &zr) + &zs).halve();
    let b = (&(&(&zp - &zq) + &zr) - &zs).halve();
    let c = (&(&(&zp + &zq) - &zr) - &zs).halve();
    Ok(TrisecantTriple { a, b, c, source: TripleSource::Fay { points: [*p, *q, *r, *s] } })
}

/// Theta trisecant from `K₀ = p + q + r + s + 2D` in `B₃`:
/// `a = ζ(p + s + D) − κ`, `b = ζ(p + r + D) − κ`, `c = ζ(p + q + D) − κ`.
pub fn theta_trisecant_construct(ctx: &CurveContext, sample: &BellSample) -> Result<TrisecantTriple> {
    if sample.ell != 3 {
        return Err(Error::InvalidInput(format!("theta trisecants need a B₃ sample, got ℓ = {}", sample.ell)));
    }
    let [p, q, r, s] = [sample.simple[0], sample.simple[1], sample.simple[2], sample.simple[3]];
    let zd = ctx.zeta_divisor(&sample.doubled_divisor())?;
    let base = &(&ctx.zeta(&p)? + &zd) - &ctx.kappa.kappa;
    Ok(TrisecantTriple {
        a: &base + &ctx.zeta(&s)?,
        b: &base + &ctx.zeta(&r)?,
        c: &base + &ctx.zeta(&q)?,
        source: TripleSource::ThetaConstruction { ell: 3, seed: sample.seed, k0: sample.k0.clone() },
    })
}

/// Distances to the lattice of `2a − (ζp − ζq − ζr + ζs)`, `2b − (ζp − ζq + ζr − ζs)`
/// and `2c − (ζp + ζq − ζr − ζs)` for a triple from [`theta_trisecant_construct`];
/// all vanish because `2D − 2κ ≡ −(p + q + r + s)`.
pub fn halving_residuals(ctx: &CurveContext, t: &TrisecantTriple, sample: &BellSample) -> Result<[f64; 3]> {
    if sample.simple.len() < 4 {
        return Err(Error::InvalidInput("need the four simple points of a B₃ sample".into()));
    }
    let z: Vec<JacobianLift> = sample.simple[..4].iter().map(|p| ctx.zeta(p)).collect::<Result<_>>()?;
    let signs = [[1.0, -1.0, -1.0, 1.0], [1.0, -1.0, 1.0, -1.0], [1.0, 1.0, -1.0, -1.0]];
    let mut out = [0.0; 3];
    for (k, (x, sg)) in [&t.a, &t.b, &t.c].into_iter().zip(signs).enumerate() {
        let mut d = &x.z * Complex64::from(2.0);
        for (zk, s) in z.iter().zip(sg) {
            d -= &zk.z * Complex64::from(s);
        }
        out[k] = lattice_distance(&d, ctx.tau())?;
    }
    Ok(out)
}

/// Certificate for a triple, with the points expected on Θ exactly when the
/// triple comes from the theta construction.
pub fn certify_triple(ctx: &CurveContext, t: &TrisecantTriple) -> Result<SecantCertificate> {
    let on = matches!(t.source, TripleSource::ThetaConstruction { .. });
    certify_secant(ctx.tau(), &t.lifts(), on, &ctx.scale, &ctx.tol)
}

#[derive(Debug, Clone, Serialize)]
pub struct Multisecant {
    pub lifts: Vec<JacobianLift>,
    pub certificate: SecantCertificate,
}

/// Gunning's multisecant: `a_j = (2ζ(p_j) + Σ ζ(q_i) − Σ ζ(p_i)) / 2` for
/// `ℓ` points `p` and `ℓ − 2` points `q`.
pub fn gunning_construct(ctx: &CurveContext, ps: &[CurvePoint], qs: &[CurvePoint]) -> Result<Multisecant> {
    let ell = ps.len();
    if ell < 3 || qs.len() + 2 != ell {
        return Err(Error::InvalidInput(format!("need ℓ ≥ 3 points p and ℓ − 2 points q, got {} and {}", ell, qs.len())));
    }
    let all: Vec<CurvePoint> = ps.iter().chain(qs).copied().collect();
    for i in 0..all.len() {
        if all[..i].contains(&all[i]) {
            return Err(Error::InvalidInput("points must be distinct".into()));
        }
    }
    let zp: Vec<JacobianLift> = ps.iter().map(|p| ctx.zeta(p)).collect::<Result<_>>()?;
    let mut common = JacobianLift::zero(ctx.genus());
    for q in qs {
        common += &ctx.zeta(q)?;
    }
    for z in &zp {
        common = &common - z;
    }
    let lifts: Vec<JacobianLift> = zp.iter().map(|z| (&(z * 2.0) + &common).halve()).collect();
    let certificate = certify_secant(ctx.tau(), &lifts, false, &ctx.scale, &ctx.tol)?;
    Ok(Multisecant { lifts, certificate })
}

/// Multisecant of Θ from a `B_ℓ` sample: `p_indices` picks `ℓ` of the
/// `2ℓ − 2` simple points, the rest are the `q`'s, and
/// `a_j = ζ(p_j + Σ q_i + Σ Q_j) − κ`.
pub fn multisecant_from_bl(ctx: &CurveContext, sample: &BellSample, p_indices: &[usize]) -> Result<Multisecant> {
    let ell = sample.ell;
    let n = sample.simple.len();
    let set: BTreeSet<usize> = p_indices.iter().copied().collect();
    if set.len() != ell || p_indices.len() != ell || set.iter().any(|&i| i >= n) {
        return Err(Error::InvalidInput(format!("partition must choose {ell} distinct indices below {n}")));
    }
    let mut base = &ctx.zeta_divisor(&sample.doubled_divisor())? - &ctx.kappa.kappa;
    for i in (0..n).filter(|i| !set.contains(i)) {
        base += &ctx.zeta(&sample.simple[i])?;
    }
    let lifts: Vec<JacobianLift> =
        p_indices.iter().map(|&i| Ok(&base + &ctx.zeta(&sample.simple[i])?)).collect::<Result<_>>()?;
    let certificate = certify_secant(ctx.tau(), &lifts, true, &ctx.scale, &ctx.tol)?;
    Ok(Multisecant { lifts, certificate })
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Degenerate trisecant from `K₀ = p + σp + 2W + 2D` in `B₂`: the `B₃`
/// construction with `r = s = W`, so that `a = b`.
#[derive(Debug, Clone, Serialize)]
pub struct DegenerateTrisecant {
    pub triple: TrisecantTriple,
    /// Distance between `a` and `b` modulo the lattice.
    pub merged_distance: f64,
    /// Rank of `[Km(a); Km(c); ∂_v Km(a)]` with `v` the curve tangent at `W`.
    pub tangent_rank: RankCertificate,
    /// `σ₃/σ₁` of that matrix.
    pub tangency_residual: f64,
    /// Hyperplane residuals of `∇θ(a)` against the canonical images of the
    /// support of `K₀`.
    pub hyperplane_residuals: Vec<f64>,
}

pub fn degenerate_trisecant(ctx: &CurveContext, sample: &BellSample) -> Result<DegenerateTrisecant> {
    if sample.ell != 2 || sample.doubled.is_empty() {
        return Err(Error::InvalidInput("degenerate trisecants need a B₂ sample with a double point".into()));
    }
    let tau = ctx.tau();
    let (p, q) = (sample.simple[0], sample.simple[1]);
    let w = sample.doubled[0];
    let rest = Divisor::from_points(&sample.doubled[1..]);
    let base = &(&ctx.zeta(&p)? + &ctx.zeta_divisor(&rest)?) - &ctx.kappa.kappa;
    let zw = ctx.zeta(&w)?;
    let a = &base + &zw;
    let b = &base + &zw;
    let c = &base + &ctx.zeta(&q)?;
    let merged_distance = a.lattice_distance_to(&b, tau)?;

    let v = canonical_direction(&ctx.curve, &ctx.periods, &w);
    let (ka, grad) = second_order_values(tau, &a.z, true, ctx.tol.theta)?;
    let dka: DVector<Complex64> = grad.expect("requested") * &v;
    let (kc, _) = second_order_values(tau, &c.z, false, ctx.tol.theta)?;
    let mut m = DMatrix::zeros(3, ka.len());
    for (i, row) in [ka, kc, dka].iter().enumerate() {
        m.set_row(i, &(row / Complex64::from(row.norm())).transpose());
    }
    let tangent_rank = numerical_rank(&m, ctx.tol.rank)?;
    let tangency_residual = tangent_rank.singular_values[2] / tangent_rank.singular_values[0];

    let (ga, _) = theta_derivatives(tau, &a, ctx.tol.theta)?;
    let hyperplane_residuals = sample
        .k0
        .support()
        .iter()
        .map(|pt| hyperplane_residual(&ga, &canonical_direction(&ctx.curve, &ctx.periods, pt)))
        .collect();
    Ok(DegenerateTrisecant {
        triple: TrisecantTriple {
            a,
            b,
            c,
            source: TripleSource::ThetaConstruction { ell: 2, seed: sample.seed, k0: sample.k0.clone() },
        },
        merged_distance,
        tangent_rank,
        tangency_residual,
        hyperplane_residuals,
    })
}
