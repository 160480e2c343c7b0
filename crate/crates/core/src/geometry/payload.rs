//! JSON layout of set definitions inside traces and scenario files.
//!
//! - point: `[x0, x1, ...]`
//! - ball: `[[c0, c1, ...], r]`
//! - hyperrectangle: `[[lower...], [upper...]]`
//! - polytope: `[[[a00, a01, ...], ...], [b0, b1, ...]]`

use serde_json::Value;
use thiserror::Error;

use super::{GeometryError, SetDef, SetKind};
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum PayloadError {
    #[error("expected {0}")]
    Shape(&'static str),
    #[error(transparent)]
    Invalid(#[from] GeometryError),
}

fn number<T: Scalar>(v: &Value) -> Result<T, PayloadError> {
    v.as_f64()
        .and_then(T::from_f64)
        .ok_or(PayloadError::Shape("a number"))
}

fn vector<T: Scalar>(v: &Value) -> Result<Vec<T>, PayloadError> {
    v.as_array()
        .ok_or(PayloadError::Shape("an array of numbers"))?
        .iter()
        .map(number)
        .collect()
}

fn pair(v: &Value, what: &'static str) -> Result<(Value, Value), PayloadError> {
    match v.as_array().map(Vec::as_slice) {
        Some([a, b]) => Ok((a.clone(), b.clone())),
        _ => Err(PayloadError::Shape(what)),
    }
}

fn num_value<T: Scalar>(x: T) -> Value {
    Value::from(x.to_f64_lossy())
}

fn vec_value<T: Scalar>(v: &[T]) -> Value {
    Value::Array(v.iter().map(|&x| num_value(x)).collect())
}

pub fn to_payload<T: Scalar>(set: &SetDef<T>) -> Value {
    match set {
        SetDef::Point(p) => vec_value(p),
        SetDef::Ball { center, radius } => Value::Array(vec![vec_value(center), num_value(*radius)]),
        SetDef::Hyperrectangle { lower, upper } => {
            Value::Array(vec![vec_value(lower), vec_value(upper)])
        }
        SetDef::Polytope(poly) => Value::Array(vec![
            Value::Array(poly.rows().iter().map(|r| vec_value(r)).collect()),
            vec_value(poly.offsets()),
        ]),
    }
}

pub fn from_payload<T: Scalar>(kind: SetKind, v: &Value) -> Result<SetDef<T>, PayloadError> {
    match kind {
        SetKind::Point => Ok(SetDef::point(vector(v)?)?),
        SetKind::Ball => {
            let (c, r) = pair(v, "[[center...], radius]")?;
            Ok(SetDef::ball(vector(&c)?, number(&r)?)?)
        }
        SetKind::Hyperrectangle => {
            let (lo, hi) = pair(v, "[[lower...], [upper...]]")?;
            Ok(SetDef::hyperrectangle(vector(&lo)?, vector(&hi)?)?)
        }
        SetKind::Polytope => {
            let (a, b) = pair(v, "[[A rows...], [b...]]")?;
            let rows = a
                .as_array()
                .ok_or(PayloadError::Shape("an array of constraint rows"))?
                .iter()
                .map(vector)
                .collect::<Result<Vec<Vec<T>>, _>>()?;
            Ok(SetDef::polytope(rows, vector(&b)?)?)
        }
    }
}
