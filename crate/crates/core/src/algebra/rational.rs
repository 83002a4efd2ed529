//! Exact rationals and their text form.
//!
//! The text form is either an integer (`"-7"`) or a fraction `"p/q"` with
//! `q != 0`. Both the ASCII hyphen and U+2212 are accepted as minus signs.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational number in lowest terms with positive denominator.
pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn parse_rational(text: &str) -> Result<Rational> {
    let cleaned: String = text.trim().replace('\u{2212}', "-");
    if cleaned.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    let (num, den) = match cleaned.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (cleaned.as_str(), "1"),
    };
    let parse_int = |s: &str| -> Result<BigInt> {
        let body = s.strip_prefix('+').unwrap_or(s);
        if body.is_empty()
            || !body
                .trim_start_matches('-')
                .chars()
                .all(|c| c.is_ascii_digit())
            || body.trim_start_matches('-').is_empty()
        {
            return Err(Error::Parse(format!("malformed rational {text:?}")));
        }
        body.parse::<BigInt>()
            .map_err(|_| Error::Parse(format!("malformed rational {text:?}")))
    };
    let n = parse_int(num)?;
    let d = parse_int(den)?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {text:?}")));
    }
    Ok(Rational::new(n, d))
}

/// Canonical text: `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Serde adapters writing rationals as `"p/q"` strings.
pub mod serde_text {
    use serde::Serializer;

    use super::{format_rational, Rational};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub mod option {
        use serde::Serializer;

        use super::super::{format_rational, Rational};

        pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            match r {
                Some(r) => s.serialize_some(&format_rational(r)),
                None => s.serialize_none(),
            }
        }
    }
}

/// Natural logarithm of `|x|` for a big integer, accurate to f64 precision
/// regardless of size.
pub fn ln_abs_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 1000 {
        return x.abs().to_f64().map(f64::ln).unwrap_or(f64::NAN);
    }
    let shift = bits - 64;
    let top: BigInt = x.abs() >> shift;
    top.to_f64().unwrap_or(f64::NAN).ln() + (shift as f64) * std::f64::consts::LN_2
}

pub fn ln_abs_rational(x: &Rational) -> f64 {
    ln_abs_bigint(x.numer()) - ln_abs_bigint(x.denom())
}

pub fn to_f64(x: &Rational) -> f64 {
    if let Some(v) = x.to_f64() {
        if v.is_finite() && (v != 0.0 || x.is_zero()) {
            return v;
        }
    }
    let ln = ln_abs_rational(x);
    let mag = ln.exp();
    if x.is_negative() {
        -mag
    } else {
        mag
    }
}
