//! Curve and Riemann-matrix files, and the small text formats taken on the
//! command line.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;
use serde_json::{json, Value};
use trisect_core::curve::HyperellipticCurve;
use trisect_core::nalgebra::{DMatrix, DVector};
use trisect_core::num_complex::Complex64;
use trisect_core::report::{matrix_json, parse_complex};
use trisect_core::theta::{HalfCharacteristic, RiemannMatrix};
use trisect_core::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveFile {
    f_coeffs: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TauFile {
    tau: Vec<Vec<Value>>,
}

/// A curve from a file or one of the built-in reference curves.
#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct CurveArgs {
    /// Curve file: {"f_coeffs": [c0, ..., c_{2g+1}]}, ascending.
    #[arg(long, value_name = "PATH")]
    pub curve: Option<PathBuf>,
    /// Built-in curve y^2 = x(x-1)...(x-2g), or y^2 = x^3 - x for g = 1.
    #[arg(long, value_name = "GENUS")]
    pub reference: Option<usize>,
}

/// A Riemann matrix, given directly or through the curve it comes from.
#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct MatrixArgs {
    #[arg(long, value_name = "PATH")]
    pub curve: Option<PathBuf>,
    #[arg(long, value_name = "GENUS")]
    pub reference: Option<usize>,
    /// Riemann matrix file: {"tau": [[[re, im], ...], ...]}, row-major.
    #[arg(long, value_name = "PATH")]
    pub tau: Option<PathBuf>,
}

pub enum MatrixSource {
    Curve(HyperellipticCurve),
    Tau(RiemannMatrix),
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

impl CurveArgs {
    pub fn load(&self) -> Result<HyperellipticCurve> {
        load_curve(self.curve.as_deref(), self.reference)
    }
}

impl MatrixArgs {
    pub fn load(&self) -> Result<MatrixSource> {
        match &self.tau {
            Some(path) => load_tau(path).map(MatrixSource::Tau),
            None => load_curve(self.curve.as_deref(), self.reference).map(MatrixSource::Curve),
        }
    }
}

fn load_curve(path: Option<&Path>, reference: Option<usize>) -> Result<HyperellipticCurve> {
    match (path, reference) {
        (Some(p), _) => HyperellipticCurve::from_coeffs(&read_json::<CurveFile>(p)?.f_coeffs),
        (None, Some(g)) => HyperellipticCurve::reference(g),
        (None, None) => Err(Error::InvalidInput("no curve given".into())),
    }
}

fn load_tau(path: &Path) -> Result<RiemannMatrix> {
    let file: TauFile = read_json(path)?;
    let g = file.tau.len();
    if g == 0 || file.tau.iter().any(|row| row.len() != g) {
        return Err(Error::InvalidInput("tau must be a nonempty square matrix".into()));
    }
    let mut entries = Vec::with_capacity(g * g);
    for row in &file.tau {
        for v in row {
            entries.push(parse_complex(v).ok_or_else(|| Error::InvalidInput(format!("bad complex entry {v}")))?);
        }
    }
    RiemannMatrix::new(DMatrix::from_row_slice(g, g, &entries))
}

/// Canonical JSON for the digest: the validated coefficients, not the path.
pub fn curve_json(c: &HyperellipticCurve) -> Value {
    json!({ "f_coeffs": c.f_coeffs })
}

pub fn tau_json(t: &RiemannMatrix) -> Value {
    json!({ "tau": matrix_json(t.entries()) })
}

/// `--z '[[re, im], ...]'`.
pub fn parse_point(text: &str, g: usize) -> Result<DVector<Complex64>> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("--z: {e}")))?;
    let arr = v.as_array().ok_or_else(|| Error::InvalidInput("--z must be a JSON array of [re, im] pairs".into()))?;
    if arr.len() != g {
        return Err(Error::InvalidInput(format!("--z has {} entries, genus is {g}", arr.len())));
    }
    let entries: Vec<Complex64> = arr
        .iter()
        .map(|c| parse_complex(c).ok_or_else(|| Error::InvalidInput(format!("bad complex entry {c}"))))
        .collect::<Result<_>>()?;
    Ok(DVector::from_vec(entries))
}

/// `--char 01/10`: the bits of `ε′`, a slash, the bits of `ε″`.
pub fn parse_characteristic(text: &str, g: usize) -> Result<HalfCharacteristic> {
    let bad = || Error::InvalidInput(format!("--char {text:?} must look like 0110/1001 with {g} bits per half"));
    let (p, q) = text.split_once('/').ok_or_else(bad)?;
    let bits = |s: &str| -> Result<Vec<u8>> {
        s.chars().map(|c| c.to_digit(2).map(|d| d as u8).ok_or_else(bad)).collect()
    };
    let (p, q) = (bits(p)?, bits(q)?);
    if p.len() != g || q.len() != g {
        return Err(bad());
    }
    HalfCharacteristic::new(p, q)
}

/// `--partition 0,2,3`.
pub fn parse_indices(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|s| s.trim().parse().map_err(|_| Error::InvalidInput(format!("bad index {s:?} in --partition"))))
        .collect()
}
