use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde_json::{Number, Value};

pub const SCHEMA: &str = "cvclifford/1";

/// 17 significant digits, so every double reads back exactly.
pub fn num(v: f64) -> Value {
    if !v.is_finite() {
        return Value::Null;
    }
    Value::Number(Number::from_str(&format!("{v:.16e}")).expect("formatted double is a JSON number"))
}

pub fn vector(v: &DVector<f64>) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

pub fn matrix(m: &DMatrix<f64>) -> Value {
    Value::Array(m.row_iter().map(|r| Value::Array(r.iter().map(|&x| num(x)).collect())).collect())
}
