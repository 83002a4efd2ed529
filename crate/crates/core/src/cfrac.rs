//! Continued fractions of Laurent series.
//!
//! The expansion runs on the remainder sequence `r_k = q_k f - p_k`, which
//! satisfies `r_k = a_k r_{k-1} + r_{k-2}` with `r_{-2} = f`, `r_{-1} = -1`,
//! and `a_k` the polynomial part of `-r_{k-2} / r_{k-1}`. Each remainder
//! tracks the lowest power of `z` at which it is still determined by the
//! known prefix of `f`, so a quotient is only ever produced when every
//! completion of the prefix yields the same quotient.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::algebra::{Degree, Polynomial, Rational};
use crate::error::{Error, Result};
use crate::series::{LaurentSeries, MahlerEquation};

/// Limits for automatic series extension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CfConfig {
    /// Largest number of series coefficients that may be requested.
    pub max_coefficients: usize,
}

impl Default for CfConfig {
    fn default() -> Self {
        CfConfig {
            max_coefficients: 1 << 15,
        }
    }
}

/// A convergent `p/q` with `p` and `q` integer polynomials sharing no
/// common integer factor and `q` having positive leading coefficient.
/// The pair produced by the recurrence is a rational multiple of `(p, q)`;
/// see [`CFExpansion::recurrence_pair`]. `index` is the position in the
/// expansion when known.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Convergent {
    pub index: Option<usize>,
    pub p: Polynomial,
    pub q: Polynomial,
}

impl Convergent {
    /// Normalizes an arbitrary numerator/denominator pair.
    pub fn new(index: Option<usize>, p: Polynomial, q: Polynomial) -> Self {
        let lcm = p
            .coeffs()
            .iter()
            .chain(q.coeffs())
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let ints = |poly: &Polynomial| -> Vec<BigInt> {
            poly.coeffs()
                .iter()
                .map(|x| x.numer() * (&lcm / x.denom()))
                .collect()
        };
        let (mut pi, mut qi) = (ints(&p), ints(&q));
        remove_content(&mut pi, &mut qi);
        Self::from_primitive(index, pi, qi).0
    }

    /// Fixes the sign of a primitive pair; the flag reports a flip.
    fn from_primitive(
        index: Option<usize>,
        mut p: Vec<BigInt>,
        mut q: Vec<BigInt>,
    ) -> (Self, bool) {
        let flip = q
            .iter()
            .rev()
            .chain(p.iter().rev())
            .find(|x| !x.is_zero())
            .is_some_and(|x| x.is_negative());
        if flip {
            for x in p.iter_mut().chain(q.iter_mut()) {
                *x = -&*x;
            }
        }
        let c = Convergent {
            index,
            p: Polynomial::from_bigints(p),
            q: Polynomial::from_bigints(q),
        };
        (c, flip)
    }

    /// Degree of the denominator.
    pub fn d(&self) -> i64 {
        self.q.deg_or_zero() as i64
    }

    /// Equality as rational functions.
    pub fn same_fraction(&self, other: &Convergent) -> bool {
        &self.p * &other.q == &other.p * &self.q
    }
}

/// Divides both vectors by the gcd of all their entries; returns it.
fn remove_content(p: &mut [BigInt], q: &mut [BigInt]) -> BigInt {
    let mut g = BigInt::zero();
    for x in p.iter().chain(q.iter()) {
        g = g.gcd(x);
        if g.is_one() {
            return g;
        }
    }
    if g.is_zero() {
        return BigInt::one();
    }
    for x in p.iter_mut().chain(q.iter_mut()) {
        *x /= &g;
    }
    g
}

#[derive(Clone, Debug, Serialize)]
pub struct CFExpansion {
    pub quotients: Vec<Polynomial>,
    pub convergents: Vec<Convergent>,
    /// `scale_steps[k]` is `s_k / s_{k-1}`, where `s_k (p_k, q_k)` is the
    /// pair given by the recurrence and `s_{-1} = 1`.
    #[serde(serialize_with = "serialize_rationals")]
    pub scale_steps: Vec<Rational>,
    /// Number of leading quotients (and convergents) that are certified.
    pub certified_count: usize,
    /// `d_0, d_1, ...`: denominator degrees, one more than the certified
    /// convergents unless the expansion terminated.
    pub degrees: Vec<i64>,
    /// The series is rational and the expansion is complete.
    pub terminated: bool,
    /// Number of series coefficients the expansion was computed from.
    pub known_coefficients: usize,
}

fn serialize_rationals<S: serde::Serializer>(
    v: &[Rational],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(crate::algebra::format_rational))
}

impl CFExpansion {
    pub fn last_certified_degree(&self) -> Option<i64> {
        self.certified_count.checked_sub(1).map(|k| self.degrees[k])
    }

    /// `(p_k, q_k)` exactly as the recurrence `p_k = a_k p_{k-1} + p_{k-2}`
    /// (and likewise for `q`) from `(p_{-1}, q_{-1}) = (1, 0)`,
    /// `(p_{-2}, q_{-2}) = (0, 1)` produces them.
    pub fn recurrence_pair(&self, k: usize) -> (Polynomial, Polynomial) {
        let (num, den) = self.scale_steps[..=k]
            .iter()
            .fold((BigInt::one(), BigInt::one()), |(n, d), s| {
                (n * s.numer(), d * s.denom())
            });
        let s = Rational::new(num, den);
        let c = &self.convergents[k];
        (c.p.scale(&s), c.q.scale(&s))
    }
}

/// Truncated Laurent series `sum c[i] z^{top - i}` with integer `c`, up to
/// a scale kept by the caller, determined for powers `>= low`, or exact
/// (zero below the stored part) when `low` is `None`.
#[derive(Clone, Debug)]
struct Trunc {
    top: i64,
    c: Vec<BigInt>,
    low: Option<i64>,
}

enum Coef<'a, T = BigInt> {
    Known(&'a T),
    Zero,
    Unknown,
}

/// Coefficient of `z^e` in the series itself.
fn series_coef(series: &LaurentSeries, e: i64) -> Coef<'_, Rational> {
    let top = series.degree();
    if e > top {
        return Coef::Zero;
    }
    if let Some(low) = series.lowest_known_power() {
        if e < low {
            return Coef::Unknown;
        }
    }
    match series.coeffs().get((top - e) as usize) {
        Some(x) => Coef::Known(x),
        None => Coef::Zero,
    }
}

impl Trunc {
    fn coef(&self, e: i64) -> Coef<'_> {
        if e > self.top {
            return Coef::Zero;
        }
        if let Some(low) = self.low {
            if e < low {
                return Coef::Unknown;
            }
        }
        match self.c.get((self.top - e) as usize) {
            Some(x) => Coef::Known(x),
            None => Coef::Zero,
        }
    }

    /// Lowest power at which a nonzero coefficient could sit.
    fn bottom(&self) -> i64 {
        match self.low {
            Some(low) => low,
            None => self.top - self.c.len() as i64 + 1,
        }
    }

    /// Drops leading zeros; false if nothing nonzero is stored.
    fn normalize(&mut self) -> bool {
        let lead = self.c.iter().position(|x| !x.is_zero());
        match lead {
            Some(i) => {
                self.c.drain(..i);
                self.top -= i as i64;
                true
            }
            None => {
                self.top = self.bottom() - 1;
                self.c.clear();
                false
            }
        }
    }
}

/// Polynomial part of `-num / den`; `None` if the prefix does not fix it.
/// Computed on the integer parts, so the caller rescales by the ratio of
/// their scales.
fn neg_poly_part(num: &Trunc, den: &Trunc) -> Option<Polynomial> {
    let t1 = den.top;
    let t2 = num.top;
    if t2 < t1 {
        return Some(Polynomial::zero());
    }
    let deg = (t2 - t1) as usize;
    let lc_inv = Rational::from_integer(den.c[0].clone()).recip();
    let mut rem: Vec<Rational> = Vec::with_capacity(deg + 1);
    for i in 0..=deg {
        match num.coef(t2 - i as i64) {
            Coef::Known(x) => rem.push(Rational::from_integer(-x)),
            Coef::Zero => rem.push(Rational::zero()),
            Coef::Unknown => return None,
        }
    }
    let mut quot = vec![Rational::zero(); deg + 1];
    for i in 0..=deg {
        let power = deg - i;
        let qe = &rem[i] * &lc_inv;
        if qe.is_zero() {
            continue;
        }
        for j in (i + 1)..=deg {
            match den.coef(t1 - (j - i) as i64) {
                Coef::Known(x) => rem[j] -= &qe * x,
                Coef::Zero => {}
                Coef::Unknown => return None,
            }
        }
        quot[power] = qe;
    }
    Some(Polynomial::new(quot))
}

/// `a r1 + m r2` restricted to powers below `r1.top`, where `a / m` is the
/// quotient of `r2` by `r1` and the division guarantees cancellation.
/// Returns the result with its content removed, and that content.
fn step(a_int: &[BigInt], m: &BigInt, r1: &Trunc, r2: &Trunc) -> (Trunc, BigInt) {
    let da = (a_int.len() as i64 - 1).max(0);
    let low = match (r1.low, r2.low) {
        (Some(l1), Some(l2)) => Some((l1 + da).max(l2)),
        (Some(l1), None) => Some(l1 + da),
        (None, Some(l2)) => Some(l2),
        (None, None) => None,
    };
    let bottom = match low {
        Some(l) => l,
        None => r1.bottom().min(r2.bottom()),
    };
    let top = r1.top - 1;
    let mut c = Vec::with_capacity((top - bottom + 1).max(0) as usize);
    for e in (bottom..=top).rev() {
        let mut acc = match r2.coef(e) {
            Coef::Known(x) => x * m,
            _ => BigInt::zero(),
        };
        for (i, ai) in a_int.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            if let Coef::Known(x) = r1.coef(e - i as i64) {
                acc += ai * x;
            }
        }
        c.push(acc);
    }
    let g = remove_content(&mut c, &mut []);
    (Trunc { top, c, low }, g)
}

/// The series as an integer vector times the returned scale.
fn series_trunc(series: &LaurentSeries) -> (Trunc, Rational) {
    let m = series
        .coeffs()
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let mut c: Vec<BigInt> = series
        .coeffs()
        .iter()
        .map(|x| x.numer() * (&m / x.denom()))
        .collect();
    let g = remove_content(&mut c, &mut []);
    let t = Trunc {
        top: series.degree(),
        c,
        low: series.lowest_known_power(),
    };
    (t, Rational::new(g, m))
}

/// Integer polynomial `a` split off a rational one: `a_rat = a / m`.
fn integer_form(a: &Polynomial) -> (Vec<BigInt>, BigInt) {
    let m = a
        .coeffs()
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints = a
        .coeffs()
        .iter()
        .map(|x| x.numer() * (&m / x.denom()))
        .collect();
    (ints, m)
}

/// `gcd(x, y)`, reducing the larger operand modulo the smaller first.
fn gcd_lopsided(x: &BigInt, y: &BigInt) -> BigInt {
    let (big, small) = if x.bits() >= y.bits() { (x, y) } else { (y, x) };
    if small.is_zero() {
        return big.abs();
    }
    small.gcd(&(big % small))
}

/// `x y` with cross cancellation, cheap when one factor has small height.
fn mul_reduced(x: &Rational, y: &Rational) -> Rational {
    if x.is_zero() || y.is_zero() {
        return Rational::zero();
    }
    let g1 = gcd_lopsided(x.numer(), y.denom());
    let g2 = gcd_lopsided(y.numer(), x.denom());
    let num = (x.numer() / &g1) * (y.numer() / &g2);
    let den = (x.denom() / &g2) * (y.denom() / &g1);
    Rational::new_raw(num, den)
}

/// `xn a u + xd v`, coefficientwise.
fn mix(xn: &BigInt, xd: &BigInt, a: &[BigInt], u: &[BigInt], v: &[BigInt]) -> Vec<BigInt> {
    let len = (u.len() + a.len()).saturating_sub(1).max(v.len());
    let mut out = vec![BigInt::zero(); len];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        let f = ai * xn;
        for (j, uj) in u.iter().enumerate() {
            if !uj.is_zero() {
                out[i + j] += &f * uj;
            }
        }
    }
    for (j, vj) in v.iter().enumerate() {
        if !vj.is_zero() {
            out[j] += xd * vj;
        }
    }
    out
}

enum Stop {
    Reached,
    Terminated,
    NeedMore,
    /// The remainder vanished on the known prefix; the quotient, convergent
    /// and scale step that would end the expansion if the series is rational.
    Vanished(Polynomial, Convergent, Rational),
}

/// Runs the expansion on the known prefix only, stopping once a certified
/// denominator degree reaches `target` or the prefix is exhausted.
///
/// Remainders and convergent pairs are kept as primitive integer vectors.
/// Their true scales grow without bound, so only ratios of consecutive
/// scales are tracked: `rho = s(r_{k-1}) / s(r_{k-2})` for the remainders
/// and `tau = s(p_{k-1}) / s(p_{k-2})` for the convergent pairs. `rho` and
/// `tau` grow quadratically in height but `sigma = tau / rho` stays small.
fn expand_prefix(series: &LaurentSeries, target: i64) -> (CFExpansion, Stop) {
    let mut out = CFExpansion {
        quotients: Vec::new(),
        convergents: Vec::new(),
        scale_steps: Vec::new(),
        certified_count: 0,
        degrees: Vec::new(),
        terminated: false,
        known_coefficients: series.known_count(),
    };
    let (mut r2, s2) = series_trunc(series);
    if !r2.normalize() {
        out.terminated = r2.low.is_none();
        let stop = if out.terminated {
            Stop::Terminated
        } else {
            Stop::NeedMore
        };
        return (out, stop);
    }
    let mut r1 = Trunc {
        top: 0,
        c: vec![-BigInt::one()],
        low: None,
    };
    let mut rho = s2.recip();
    let (mut p2, mut q2) = (vec![BigInt::zero()], vec![BigInt::one()]);
    let (mut p1, mut q1) = (vec![BigInt::one()], vec![BigInt::zero()]);
    let mut sigma = s2;
    let mut flipped = false;
    out.degrees.push(0);
    loop {
        let Some(a_raw) = neg_poly_part(&r2, &r1) else {
            return (out, Stop::NeedMore);
        };
        let k = out.quotients.len();
        let rho_inv = rho.recip();
        let a = Polynomial::new(
            a_raw
                .coeffs()
                .iter()
                .map(|x| mul_reduced(x, &rho_inv))
                .collect(),
        );
        let (a_int, m) = integer_form(&a_raw);
        let (mut r, g) = step(&a_int, &m, &r1, &r2);
        let next_rho = mul_reduced(&Rational::new(g.clone(), m.clone()), &rho_inv);

        // With a = a_int / (m rho) and p = a p1 + p2, factor out s(p2).
        let x = &sigma / Rational::from_integer(m.clone());
        let mut p = mix(x.numer(), x.denom(), &a_int, &p1, &p2);
        let mut q = mix(x.numer(), x.denom(), &a_int, &q1, &q2);
        let content = remove_content(&mut p, &mut q);
        let next_sigma = Rational::new(content * m, x.denom() * g) / &sigma;
        let (conv, flip) = Convergent::from_primitive(Some(k), p.clone(), q.clone());
        let mut scale_step = mul_reduced(&next_sigma, &next_rho);
        if flip != flipped {
            scale_step = -scale_step;
        }

        let nonzero = r.normalize();
        if !nonzero && r.low.is_some() {
            return (out, Stop::Vanished(a, conv, scale_step));
        }
        debug_assert_eq!(conv.d(), out.degrees[k]);
        out.quotients.push(a);
        out.convergents.push(conv);
        out.scale_steps.push(scale_step);
        out.certified_count += 1;
        if !nonzero {
            out.terminated = true;
            return (out, Stop::Terminated);
        }
        out.degrees.push(-r.top);
        if out.degrees[k] >= target {
            return (out, Stop::Reached);
        }
        (p2, q2) = (std::mem::replace(&mut p1, p), std::mem::replace(&mut q1, q));
        r2 = std::mem::replace(&mut r1, r);
        rho = next_rho;
        sigma = next_sigma;
        flipped = flip;
    }
}

/// Continued fraction of `series` until a certified convergent denominator
/// has degree at least `target`, extending the series as needed.
pub fn cf_expand(
    series: &mut LaurentSeries,
    target: i64,
    config: &CfConfig,
) -> Result<CFExpansion> {
    let mut n = series
        .known_count()
        .max((2 * target.max(0) + series.degree().max(0) + 8) as usize);
    loop {
        if series.is_extendable() {
            series.extend_to(n)?;
        }
        let (cf, stop) = expand_prefix(series, target);
        match stop {
            Stop::Reached | Stop::Terminated => return Ok(cf),
            Stop::Vanished(a, c, step)
                if series.equation().is_some_and(|eq| solves(eq, &c.p, &c.q)) =>
            {
                let mut cf = cf;
                cf.quotients.push(a);
                cf.convergents.push(c);
                cf.scale_steps.push(step);
                cf.certified_count += 1;
                cf.terminated = true;
                return Ok(cf);
            }
            Stop::NeedMore | Stop::Vanished(..) => {
                if !series.is_extendable() {
                    return Err(Error::PrecisionExhausted(format!(
                        "prefix of {} coefficients certifies denominators only up to degree {}",
                        series.known_count(),
                        cf.last_certified_degree().unwrap_or(-1)
                    )));
                }
                if series.known_count() >= config.max_coefficients {
                    return Err(Error::AppearsRational {
                        known: series.known_count(),
                    });
                }
                n = (2 * series.known_count()).min(config.max_coefficients);
            }
        }
    }
}

/// `p/q` satisfies `B f = A f(z^d) + C`; a solution agreeing with the
/// series on its head is then the series itself.
fn solves(eq: &MahlerEquation, p: &Polynomial, q: &Polynomial) -> bool {
    let d = eq.d();
    let (pd, qd) = (p.compose_power(d), q.compose_power(d));
    let lhs = &(eq.b() * p) * &qd;
    let rhs = &(&(eq.a() * &pd) * q) + &(&(eq.c() * q) * &qd);
    lhs == rhs
}

/// Continued fraction of whatever the known prefix certifies, without
/// extending the series.
pub fn cf_from_prefix(series: &LaurentSeries) -> CFExpansion {
    expand_prefix(series, i64::MAX).0
}

/// `deg(q f - p)`, extending the series until a nonzero coefficient shows up.
pub fn error_degree(
    c: &Convergent,
    series: &mut LaurentSeries,
    config: &CfConfig,
) -> Result<Degree> {
    error_degree_pq(&c.p, &c.q, series, config)
}

fn error_degree_pq(
    p: &Polynomial,
    q: &Polynomial,
    series: &mut LaurentSeries,
    config: &CfConfig,
) -> Result<Degree> {
    let dq = q.deg().ok_or(Error::ZeroPolynomial)? as i64;
    let k = series.degree();
    let top = (dq + k).max(p.deg().map_or(i64::MIN, |d| d as i64));
    let mut floor = top;
    loop {
        let bottom = match series.lowest_known_power() {
            Some(l) => l + dq,
            None => (k - series.known_count() as i64 + 1).min(0),
        };
        for e in (bottom..=floor).rev() {
            let mut acc = if e >= 0 {
                -p.coeff(e as usize)
            } else {
                Rational::zero()
            };
            for (i, qi) in q.coeffs().iter().enumerate() {
                if qi.is_zero() {
                    continue;
                }
                if let Coef::Known(x) = series_coef(series, e - i as i64) {
                    acc += qi * x;
                }
            }
            if !acc.is_zero() {
                return Ok(Degree::Finite(e));
            }
        }
        if series.lowest_known_power().is_none() {
            return Ok(Degree::MinusInfinity);
        }
        floor = bottom - 1;
        if !series.is_extendable() || series.known_count() >= config.max_coefficients {
            return Err(Error::PrecisionExhausted(format!(
                "q f - p vanishes through z^{bottom}"
            )));
        }
        let n = (2 * series.known_count()).min(config.max_coefficients);
        series.extend_to(n)?;
    }
}

/// Whether `p/q` is a convergent of the series: `deg(q f - p) < -deg q`.
pub fn convergent_check(
    p: &Polynomial,
    q: &Polynomial,
    series: &mut LaurentSeries,
    config: &CfConfig,
) -> Result<bool> {
    let dq = q.deg().ok_or(Error::ZeroPolynomial)? as i64;
    let k = series.degree();
    let top = (dq + k).max(p.deg().map_or(i64::MIN, |d| d as i64));
    let need = (top + dq + 1).max(0) as usize;
    if series.is_extendable() && series.known_count() < need {
        series.extend_to(need.min(config.max_coefficients.max(need)))?;
    }
    for e in (-dq..=top).rev() {
        let mut acc = if e >= 0 {
            -p.coeff(e as usize)
        } else {
            Rational::zero()
        };
        for (i, qi) in q.coeffs().iter().enumerate() {
            if qi.is_zero() {
                continue;
            }
            match series_coef(series, e - i as i64) {
                Coef::Known(x) => acc += qi * x,
                Coef::Zero => {}
                Coef::Unknown => {
                    return Err(Error::PrecisionExhausted(format!(
                        "coefficient of z^{} is not known",
                        e - i as i64
                    )))
                }
            }
        }
        if !acc.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}
