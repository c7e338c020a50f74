//! Exact integer and rational helpers shared across the crate.
//!
//! Powers with rational exponents are evaluated through integer root
//! bracketing on `BigUint`, never through floating point, so quantities
//! like `⌊s^c⌋` used in balance slack are exact for any rational `c`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExactError {
    #[error("empty rational literal")]
    EmptyLiteral,
    #[error("malformed rational literal `{0}`")]
    MalformedLiteral(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Largest `r` with `r^q <= x`. `q >= 1`.
pub fn floor_root(x: &BigUint, q: u32) -> BigUint {
    assert!(q >= 1, "root order must be positive");
    if q == 1 || x.is_zero() || x.is_one() {
        return x.clone();
    }
    // Initial upper bound from the bit length: x < 2^bits, so
    // x^(1/q) < 2^(ceil(bits/q)).
    let bits = x.bits();
    let mut hi = BigUint::one() << bits.div_ceil(u64::from(q)) as usize;
    let mut lo = BigUint::zero();
    // Invariant: lo^q <= x < hi^q.
    while &lo + 1u32 < hi {
        let mid: BigUint = (&lo + &hi) >> 1;
        if mid.pow(q) <= *x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Smallest `r` with `r^q >= x`. `q >= 1`.
pub fn ceil_root(x: &BigUint, q: u32) -> BigUint {
    let f = floor_root(x, q);
    if f.pow(q) == *x {
        f
    } else {
        f + 1u32
    }
}

/// `⌊base^(p/q)⌋` for a non-negative integer base and positive rational
/// exponent `p/q`, computed as `⌊(base^p)^(1/q)⌋`.
pub fn floor_pow_ratio(base: &BigUint, p: u32, q: u32) -> BigUint {
    floor_root(&base.pow(p), q)
}

/// `⌈base^(p/q)⌉`, computed as `⌈(base^p)^(1/q)⌉`.
pub fn ceil_pow_ratio(base: &BigUint, p: u32, q: u32) -> BigUint {
    ceil_root(&base.pow(p), q)
}

/// Exact comparison `a^(p/q) > b`, i.e. `a^p > b^q`, on non-negative
/// integers.
pub fn pow_ratio_gt(a: &BigUint, p: u32, q: u32, b: &BigUint) -> bool {
    a.pow(p) > b.pow(q)
}

/// Parses an exact rational from `"P/Q"`, a plain integer, or a decimal
/// literal such as `"1.1"` (which parses exactly as 11/10).
pub fn parse_rational(s: &str) -> Result<BigRational, ExactError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ExactError::EmptyLiteral);
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim())
            .map_err(|_| ExactError::MalformedLiteral(s.to_string()))?;
        let d = BigInt::from_str(den.trim())
            .map_err(|_| ExactError::MalformedLiteral(s.to_string()))?;
        if d.is_zero() {
            return Err(ExactError::ZeroDenominator(s.to_string()));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ExactError::MalformedLiteral(s.to_string()));
        }
        let negative = int_part.starts_with('-');
        let int_digits = if int_part.is_empty() || int_part == "-" {
            "0"
        } else {
            int_part.trim_start_matches('-')
        };
        let int = BigInt::from_str(int_digits)
            .map_err(|_| ExactError::MalformedLiteral(s.to_string()))?;
        let frac = BigInt::from_str(frac_part)
            .map_err(|_| ExactError::MalformedLiteral(s.to_string()))?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let mut value = BigRational::new(int * &scale + frac, scale);
        if negative {
            value = -value;
        }
        return Ok(value);
    }
    let n = BigInt::from_str(s).map_err(|_| ExactError::MalformedLiteral(s.to_string()))?;
    Ok(BigRational::from_integer(n))
}

/// Canonical `"P/Q"` rendering (`"P"` when the denominator is 1).
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Lossy `f64` image of a rational, for display and annealing only.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Rational from an integer pair.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
