//! High-precision evaluation of `f(b)` and the explicit rational
//! approximations `p_{k,m}(b) / q_{k,m}(b)` built from one convergent.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::algebra::{ln_abs_bigint, ln_abs_rational, serde_text, Polynomial, Rational};
use crate::cfrac::Convergent;
use crate::error::{Error, Result};
use crate::series::{LaurentSeries, MahlerEquation};

const LN_10: f64 = std::f64::consts::LN_10;

/// Largest series length `eval_f` will request.
pub const MAX_EVAL_TERMS: usize = 1 << 20;

/// A real number `mantissa / 2^bits`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HighPrecision {
    pub mantissa: BigInt,
    pub bits: u64,
}

impl HighPrecision {
    pub fn ln_abs(&self) -> f64 {
        ln_abs_bigint(&self.mantissa) - self.bits as f64 * std::f64::consts::LN_2
    }

    pub fn to_f64(&self) -> f64 {
        let sign = if self.mantissa.is_negative() {
            -1.0
        } else {
            1.0
        };
        sign * self.ln_abs().exp()
    }

    /// Decimal expansion rounded to `digits` places after the point.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scale = num_traits::pow(BigInt::from(10), digits);
        let half = BigInt::one() << self.bits.saturating_sub(1);
        let scaled = (self.mantissa.abs() * scale + half) >> self.bits;
        let s = scaled.to_string();
        let s = if s.len() <= digits {
            format!("{}{}", "0".repeat(digits + 1 - s.len()), s)
        } else {
            s
        };
        let (int, frac) = s.split_at(s.len() - digits);
        let sign = if self.mantissa.is_negative() { "-" } else { "" };
        if digits == 0 {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    }

    /// `ln |self - x|`, or `None` when the difference is below the
    /// resolution `2^-bits * slack`.
    pub fn ln_abs_diff(&self, x: &Rational, slack: &BigInt) -> Option<f64> {
        let scaled = x.numer() << self.bits;
        let diff = &self.mantissa * x.denom() - scaled;
        if diff.abs() <= slack * x.denom() {
            return None;
        }
        Some(
            ln_abs_bigint(&diff)
                - ln_abs_bigint(x.denom())
                - self.bits as f64 * std::f64::consts::LN_2,
        )
    }
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub value: HighPrecision,
    pub terms: usize,
    pub digits: u32,
    /// Bound on the accumulated rounding, in units of `2^-bits`.
    pub rounding_units: BigInt,
    /// Estimated `log10` of the neglected tail.
    pub tail_log10: f64,
    /// The tail estimate is an extrapolation, not a bound.
    pub heuristic: bool,
}

impl Evaluation {
    /// Units of `2^-bits` that cover rounding plus the estimated tail.
    pub fn uncertainty_units(&self) -> BigInt {
        let tail_bits = self.tail_log10 * std::f64::consts::LOG2_10 + self.value.bits as f64;
        let tail = if tail_bits < 0.0 {
            BigInt::one()
        } else if tail_bits > 1e6 {
            BigInt::one() << 1_000_000u32
        } else {
            BigInt::one() << (tail_bits.ceil() as u64 + 1)
        };
        &self.rounding_units + tail
    }
}

/// Exact `sum_{j < n} f_j b^{K - j}` over the known prefix.
pub fn partial_sum_exact(series: &LaurentSeries, b: &BigInt, n: usize) -> Rational {
    let b = Rational::from_integer(b.clone());
    let k = series.degree();
    let mut power = pow_i(&b, k);
    let mut acc = Rational::zero();
    for c in series.coeffs().iter().take(n) {
        acc += c * &power;
        power /= &b;
    }
    acc
}

fn pow_i(b: &Rational, e: i64) -> Rational {
    if e >= 0 {
        num_traits::pow(b.clone(), e as usize)
    } else {
        num_traits::pow(b.recip(), (-e) as usize)
    }
}

/// Evaluates `f(b)` to about `digits` decimal digits.
pub fn eval_f(series: &mut LaurentSeries, b: &BigInt, digits: u32) -> Result<Evaluation> {
    if b.abs() < BigInt::from(2) {
        return Err(Error::Precondition("|b| must be at least 2".into()));
    }
    let log_b = ln_abs_bigint(b);
    let k = series.degree();
    let wanted = digits as f64 * LN_10;
    let mut n = ((wanted / log_b).ceil() as i64 + k.max(0) + 64) as usize;
    loop {
        if series.is_extendable() && series.known_count() < n {
            series.extend_to(n)?;
        }
        let available = series.known_count();
        let used = if series.is_extendable() {
            n.min(available)
        } else {
            available
        };
        let (tail_log10, heuristic) = tail_estimate(series, used, log_b)?;
        if tail_log10 <= -(digits as f64) || !series.is_extendable() {
            if series.is_extendable() || series.is_exact() || tail_log10 <= -(digits as f64) {
                return Ok(sum_fixed_point(
                    series, b, used, digits, tail_log10, heuristic,
                ));
            }
            return Err(Error::PrecisionExhausted(format!(
                "known prefix of {available} coefficients reaches only about 10^{tail_log10:.1}"
            )));
        }
        if n >= MAX_EVAL_TERMS {
            return Err(Error::PrecisionExhausted(format!(
                "coefficient growth keeps the tail near 10^{tail_log10:.1} after {n} terms"
            )));
        }
        n = (2 * n).min(MAX_EVAL_TERMS);
    }
}

/// `log10` of the tail after `n` terms, extrapolating geometrically from the
/// last 32 coefficients.
fn tail_estimate(series: &LaurentSeries, n: usize, log_b: f64) -> Result<(f64, bool)> {
    if series.is_exact() && n >= series.known_count() {
        return Ok((f64::NEG_INFINITY, false));
    }
    let k = series.degree() as f64;
    let coeffs = series.coeffs();
    let from = n.saturating_sub(32);
    let logs: Vec<(usize, f64)> = (from..n)
        .filter(|&j| !coeffs[j].is_zero())
        .map(|j| (j, ln_abs_rational(&coeffs[j])))
        .collect();
    let Some(&(_, biggest)) = logs.iter().max_by(|a, b| a.1.partial_cmp(&b.1).unwrap()) else {
        // A run of 32 zero coefficients is taken as a negligible tail.
        return Ok(((k - n as f64) * log_b / LN_10 - 32.0, true));
    };
    let growth = if logs.len() >= 2 {
        let (j0, l0) = logs[0];
        let (j1, l1) = *logs.last().expect("nonempty");
        ((l1 - l0) / (j1 - j0) as f64).max(0.0)
    } else {
        0.0
    };
    let ratio = growth - log_b;
    if ratio >= 0.0 {
        return Err(Error::PrecisionExhausted(
            "coefficients grow at least as fast as |b|^j".into(),
        ));
    }
    let log_tail = biggest + (k - n as f64) * log_b - (1.0 - ratio.exp()).ln();
    Ok((log_tail / LN_10, true))
}

fn sum_fixed_point(
    series: &LaurentSeries,
    b: &BigInt,
    n: usize,
    digits: u32,
    tail_log10: f64,
    heuristic: bool,
) -> Evaluation {
    let guard = 64 + (usize::BITS - n.leading_zeros()) as u64 * 2;
    let bits = (digits as f64 * std::f64::consts::LOG2_10).ceil() as u64 + guard;
    let k = series.degree();
    let mut power = if k >= 0 {
        num_traits::pow(b.clone(), k as usize) << bits
    } else {
        (BigInt::one() << bits) / num_traits::pow(b.clone(), (-k) as usize)
    };
    let mut acc = BigInt::zero();
    let mut rounding = BigInt::zero();
    for (j, c) in series.coeffs().iter().take(n).enumerate() {
        if !c.is_zero() {
            acc += (c.numer() * &power) / c.denom();
            // Each division by b truncates by less than one unit, and the
            // error of `power` is at most 2 units after any number of steps.
            rounding += c.numer().abs() * 2u32 / c.denom() + 2u32;
        }
        if j + 1 < n {
            power /= b;
        }
    }
    Evaluation {
        value: HighPrecision {
            mantissa: acc,
            bits,
        },
        terms: n,
        digits,
        rounding_units: rounding,
        tail_log10,
        heuristic,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ApproximationRecord {
    pub k: usize,
    pub m: u32,
    #[serde(with = "serde_text")]
    pub p_val: Rational,
    #[serde(with = "serde_text")]
    pub q_val: Rational,
    pub log_abs_q: f64,
    /// `ln |f(b) - p/q|`.
    pub log_abs_err: f64,
}

impl ApproximationRecord {
    pub fn ratio(&self) -> f64 {
        -self.log_abs_err / self.log_abs_q
    }
}

/// Values at `b` of `p_{k,m}` and `q_{k,m}` from the product formulas.
pub fn approx_values(
    c: &Convergent,
    eq: &MahlerEquation,
    b: &BigInt,
    m: u32,
) -> Result<(Rational, Rational)> {
    let d = eq.d();
    let powers: Vec<BigInt> = (0..=m)
        .scan(b.clone(), |x, _| {
            let cur = x.clone();
            *x = num_traits::pow(x.clone(), d);
            Some(cur)
        })
        .collect();
    let at = |p: &Polynomial, t: u32| p.eval_bigint(&powers[t as usize]);
    let a_vals: Vec<Rational> = (0..m).map(|t| at(eq.a(), t)).collect();
    let b_vals: Vec<Rational> = (0..m).map(|t| at(eq.b(), t)).collect();
    let pk = at(&c.p, m);
    let qk = at(&c.q, m);
    let q = b_vals.iter().fold(qk.clone(), |acc, x| acc * x);
    let mut p = a_vals.iter().fold(pk, |acc, x| acc * x);
    for u in 0..m as usize {
        let a_prefix: Rational = a_vals[..u].iter().fold(Rational::one(), |acc, x| acc * x);
        let b_suffix: Rational = b_vals[u + 1..]
            .iter()
            .fold(Rational::one(), |acc, x| acc * x);
        p += &qk * a_prefix * at(eq.c(), u as u32) * b_suffix;
    }
    if q.is_zero() {
        return Err(Error::ZeroDivisor);
    }
    Ok((p, q))
}

/// `p_{k,m}, q_{k,m}` as polynomials via `p -> A p(z^d) + C q(z^d)`,
/// `q -> B q(z^d)`.
pub fn approx_polynomials(c: &Convergent, eq: &MahlerEquation, m: u32) -> (Polynomial, Polynomial) {
    let d = eq.d();
    let (mut p, mut q) = (c.p.clone(), c.q.clone());
    for _ in 0..m {
        let pd = p.compose_power(d);
        let qd = q.compose_power(d);
        p = &(eq.a() * &pd) + &(eq.c() * &qd);
        q = eq.b() * &qd;
    }
    (p, q)
}

/// One record for convergent `c` and level `m`, measured against `f_value`.
pub fn build_approx(
    c: &Convergent,
    eq: &MahlerEquation,
    b: &BigInt,
    m: u32,
    f_value: &Evaluation,
) -> Result<ApproximationRecord> {
    if m < 1 {
        return Err(Error::Precondition("m must be at least 1".into()));
    }
    let (p, q) = approx_values(c, eq, b, m)?;
    let x = &p / &q;
    let log_abs_err = f_value
        .value
        .ln_abs_diff(&x, &f_value.uncertainty_units())
        .ok_or_else(|| {
            Error::PrecisionExhausted(format!(
                "|f(b) - p/q| is below the working precision of {} digits at m = {m}",
                f_value.digits
            ))
        })?;
    Ok(ApproximationRecord {
        k: c.index.unwrap_or(0),
        m,
        log_abs_q: ln_abs_rational(&q),
        p_val: p,
        q_val: q,
        log_abs_err,
    })
}

/// Largest `-ln|f(b) - p/q| / ln|q|` over the records.
pub fn empirical_exponent(records: &[ApproximationRecord]) -> Option<f64> {
    records
        .iter()
        .map(ApproximationRecord::ratio)
        .filter(|r| r.is_finite())
        .fold(None, |acc: Option<f64>, r| {
            Some(acc.map_or(r, |a| a.max(r)))
        })
}

/// CSV rows `k, m, log10_q, log10_err, ratio`.
pub fn csv_rows(records: &[ApproximationRecord]) -> Vec<[String; 5]> {
    records
        .iter()
        .map(|r| {
            [
                r.k.to_string(),
                r.m.to_string(),
                format!("{:.6}", r.log_abs_q / LN_10),
                format!("{:.6}", r.log_abs_err / LN_10),
                format!("{:.9}", r.ratio()),
            ]
        })
        .collect()
}

pub const CSV_HEADER: [&str; 5] = ["k", "m", "log10_q", "log10_err", "ratio"];
