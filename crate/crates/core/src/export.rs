//! Number formatting and small serialization helpers.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

/// Significant digits kept in every exported numeral.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v).parse().unwrap_or(v)
}

/// Shortest decimal text of `round_sig(v)`; `inf`, `-inf` and `nan` for
/// non-finite values.
pub fn format_sig(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        let r = round_sig(v);
        if r == 0.0 {
            "0".into()
        } else if r.abs() < 1e-6 || r.abs() >= 1e16 {
            format!("{r:e}")
        } else {
            format!("{r}")
        }
    }
}

/// Parses text written by [`format_sig`].
pub fn parse_sig(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        "nan" => Ok(f64::NAN),
        t => t.parse().map_err(|_| Error::Input(format!("not a number: {t:?}"))),
    }
}

/// Replaces every float in a JSON tree by its rounded value.
pub fn round_json(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Number(n) => {
            if n.is_f64() {
                if let Some(x) = n.as_f64() {
                    if let Some(r) = serde_json::Number::from_f64(round_sig(x)) {
                        *n = r;
                    }
                }
            }
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(round_json),
        serde_json::Value::Object(o) => o.values_mut().for_each(round_json),
        _ => {}
    }
}

/// Pretty JSON with every float rounded to 12 significant digits.
pub fn to_rounded_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value).map_err(|e| Error::Io(e.to_string()))?;
    round_json(&mut v);
    serde_json::to_string_pretty(&v).map_err(|e| Error::Io(e.to_string()))
}

pub fn write_rounded_json<T: Serialize, W: Write>(value: &T, mut w: W) -> Result<()> {
    let s = to_rounded_json(value)?;
    w.write_all(s.as_bytes())?;
    w.write_all(b"\n")?;
    Ok(())
}
