//! The recursive JSON-shaped value that holds template contents.
//!
//! `serde_json` is built without `preserve_order`, so maps are ordered by key
//! and serialization is deterministic.

use serde_json::Value;

pub type DocumentValue = Value;

/// Structural equality with 64-bit float semantics for numbers, so `1` and
/// `1.0` compare equal.
pub fn values_equal(a: &DocumentValue, b: &DocumentValue) -> bool {
    match (a, b) {
        (Value::Null, Value::Null) => true,
        (Value::Bool(x), Value::Bool(y)) => x == y,
        (Value::Number(x), Value::Number(y)) => x.as_f64() == y.as_f64(),
        (Value::String(x), Value::String(y)) => x == y,
        (Value::Array(xs), Value::Array(ys)) => {
            xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| values_equal(x, y))
        }
        (Value::Object(xs), Value::Object(ys)) => {
            xs.len() == ys.len()
                && xs
                    .iter()
                    .zip(ys)
                    .all(|((kx, vx), (ky, vy))| kx == ky && values_equal(vx, vy))
        }
        _ => false,
    }
}
