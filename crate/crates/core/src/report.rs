//! JSON helpers. Complex numbers serialize as `[re, im]` pairs.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::ser::{SerializeSeq, Serializer};
use serde_json::{json, Value};

pub fn ser_complex<S: Serializer>(c: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(2))?;
    seq.serialize_element(&c.re)?;
    seq.serialize_element(&c.im)?;
    seq.end()
}

pub fn complex_json(c: Complex64) -> Value {
    json!([c.re, c.im])
}

pub fn vector_json(v: &DVector<Complex64>) -> Value {
    Value::Array(v.iter().map(|&c| complex_json(c)).collect())
}

/// Row-major nested arrays.
pub fn matrix_json(m: &DMatrix<Complex64>) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| complex_json(m[(i, j)])).collect())).collect())
}

pub fn ser_vector<S: Serializer>(v: &DVector<Complex64>, s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for c in v.iter() {
        seq.serialize_element(&[c.re, c.im])?;
    }
    seq.end()
}

pub fn ser_vectors<S: Serializer>(vs: &[DVector<Complex64>], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(vs.len()))?;
    for v in vs {
        seq.serialize_element(&vector_json(v))?;
    }
    seq.end()
}

pub fn ser_matrix<S: Serializer>(m: &DMatrix<Complex64>, s: S) -> Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&matrix_json(m), s)
}

/// Parse a `[re, im]` pair.
pub fn parse_complex(v: &Value) -> Option<Complex64> {
    let arr = v.as_array()?;
    if arr.len() != 2 {
        return None;
    }
    Some(Complex64::new(arr[0].as_f64()?, arr[1].as_f64()?))
}
