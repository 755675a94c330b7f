//! Fifteen-significant-digit formatting for every numeric output.

use serde::Serializer;

pub const SIG_DIGITS: usize = 15;

/// Rounds to 15 significant digits.
pub fn round(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Shortest text that round-trips the 15-digit rounding of `x`.
pub fn fmt(x: f64) -> String {
    let r = round(x);
    if r == 0.0 {
        return "0".into();
    }
    let a = r.abs();
    if (1e-5..1e15).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round(*x))
}

pub fn serialize_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_f64(round(*v)),
        None => s.serialize_none(),
    }
}
