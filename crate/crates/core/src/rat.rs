//! Exact rational scalars.
//!
//! Everything the engine computes is an arbitrary-precision rational until the
//! final evaluation boundary; floats never feed back into symbolic state.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{EngineError, Result};

pub type Q = BigRational;

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// Parse "p/q" or "p" (arbitrary precision, optional sign).
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let make_err = || EngineError::InvalidArgument(format!("malformed rational {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| make_err())?;
    let den: BigInt = den.parse().map_err(|_| make_err())?;
    if den.is_zero() {
        return Err(make_err());
    }
    Ok(Q::new(num, den))
}

/// Canonical display: reduced "p/q", plain "p" when the denominator is one.
pub fn format_q(q: &Q) -> String {
    q.to_string()
}

pub fn q_to_f64(q: &Q) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Out-of-range only for astronomically large values; saturate with sign.
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// True iff the rational is an integer.
pub fn is_integer(q: &Q) -> bool {
    q.is_integer()
}

/// Exact conversion to i64; errors if non-integral or out of range.
pub fn to_i64(q: &Q) -> Result<i64> {
    if !q.is_integer() {
        return Err(EngineError::Internal(format!(
            "expected integer, got {q}"
        )));
    }
    q.to_integer()
        .to_i64()
        .ok_or_else(|| EngineError::Internal(format!("integer out of i64 range: {q}")))
}
