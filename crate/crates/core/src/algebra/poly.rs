use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use super::degree::Degree;
use super::rational::{format_rational, parse_rational, Rational};
use crate::error::{Error, Result};

/// Dense univariate polynomial over Q; `coeffs[i]` is the coefficient of `z^i`.
///
/// The coefficient vector never ends in a zero, so the zero polynomial is the
/// empty vector and structural equality is mathematical equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    coeffs: Vec<Rational>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    /// The indeterminate `z`.
    pub fn z() -> Self {
        Self::monomial(Rational::one(), 1)
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    pub fn monomial(c: Rational, power: usize) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![Rational::zero(); power + 1];
        coeffs[power] = c;
        Polynomial { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::new(
            coeffs
                .iter()
                .map(|&c| Rational::from_integer(c.into()))
                .collect(),
        )
    }

    pub fn from_bigints(coeffs: Vec<BigInt>) -> Self {
        Self::new(coeffs.into_iter().map(Rational::from_integer).collect())
    }

    /// Parses the lowest-to-highest list of rational strings.
    pub fn from_text<S: AsRef<str>>(coeffs: &[S]) -> Result<Self> {
        let parsed = coeffs
            .iter()
            .map(|s| parse_rational(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(parsed))
    }

    pub fn to_text(&self) -> Vec<String> {
        self.coeffs.iter().map(format_rational).collect()
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Rational> {
        self.coeffs
    }

    /// Coefficient of `z^i`, zero beyond the degree.
    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeff_ref(&self, i: usize) -> Option<&Rational> {
        self.coeffs.get(i)
    }

    pub fn degree(&self) -> Degree {
        match self.coeffs.len() {
            0 => Degree::MinusInfinity,
            n => Degree::Finite(n as i64 - 1),
        }
    }

    /// Degree as an index; `None` for the zero polynomial.
    pub fn deg(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the zero polynomial mapped to 0, for places where the
    /// distinction is irrelevant.
    pub fn deg_or_zero(&self) -> usize {
        self.deg().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn leading_coeff(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    /// Multiplicity of the root at zero; `None` for the zero polynomial.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Polynomial {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Multiplies by `z^k`.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![Rational::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Polynomial { coeffs }
    }

    /// Divides by `z^k`, discarding the terms of degree below `k`.
    pub fn shift_down(&self, k: usize) -> Self {
        Self::new(self.coeffs.iter().skip(k).cloned().collect())
    }

    pub fn monic(&self) -> Self {
        match self.leading_coeff() {
            None => Self::zero(),
            Some(lc) => self.scale(&lc.recip()),
        }
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_bigint(&self, x: &BigInt) -> Rational {
        self.eval(&Rational::from_integer(x.clone()))
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Returns `p(z^e)`.
    pub fn compose_power(&self, e: usize) -> Self {
        assert!(e >= 1, "compose_power requires e >= 1");
        if e == 1 || self.is_constant() {
            return self.clone();
        }
        let mut coeffs = vec![Rational::zero(); (self.coeffs.len() - 1) * e + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * e] = c.clone();
        }
        Polynomial { coeffs }
    }

    /// Euclidean division over Q.
    pub fn divrem(&self, divisor: &Polynomial) -> Result<(Polynomial, Polynomial)> {
        let db = divisor.deg().ok_or(Error::ZeroDivisor)?;
        let Some(da) = self.deg() else {
            return Ok((Self::zero(), Self::zero()));
        };
        if da < db {
            return Ok((Self::zero(), self.clone()));
        }
        let inv_lc = divisor.coeffs[db].recip();
        let monic_divisor = divisor.coeffs[db].is_one();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Rational::zero(); da - db + 1];
        for i in (0..=da - db).rev() {
            let top = std::mem::take(&mut rem[i + db]);
            if top.is_zero() {
                continue;
            }
            let q = if monic_divisor { top } else { top * &inv_lc };
            for (j, bj) in divisor.coeffs[..db].iter().enumerate() {
                if !bj.is_zero() {
                    rem[i + j] -= &q * bj;
                }
            }
            quot[i] = q;
        }
        rem.truncate(db);
        Ok((Self::new(quot), Self::new(rem)))
    }

    pub fn rem(&self, divisor: &Polynomial) -> Result<Polynomial> {
        Ok(self.divrem(divisor)?.1)
    }

    /// Quotient of a division known to be exact.
    pub fn div_exact(&self, divisor: &Polynomial) -> Result<Polynomial> {
        let (q, r) = self.divrem(divisor)?;
        if !r.is_zero() {
            return Err(Error::Precondition(format!(
                "{divisor} does not divide {self}"
            )));
        }
        Ok(q)
    }

    pub fn divides(&self, other: &Polynomial) -> Result<bool> {
        Ok(other.rem(self)?.is_zero())
    }

    /// Integer multiple with content 1 and positive leading coefficient.
    pub fn clear_denominators(&self) -> Result<Polynomial> {
        let ints = self.primitive_integer_coeffs()?;
        Ok(Self::from_bigints(ints))
    }

    /// The integer coefficients of `clear_denominators`.
    pub fn primitive_integer_coeffs(&self) -> Result<Vec<BigInt>> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let lcm = self
            .coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let mut ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| (c * Rational::from_integer(lcm.clone())).to_integer())
            .collect();
        let content = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        let negate = ints.last().is_some_and(|c| c.is_negative());
        for c in ints.iter_mut() {
            *c = &*c / &content;
            if negate {
                *c = -&*c;
            }
        }
        Ok(ints)
    }

    /// Human-readable form such as `z^3 - 3/2*z + 1`.
    pub fn pretty(&self) -> String {
        self.to_string()
    }
}

/// Monic gcd over Q.
///
/// After one rational reduction step, which keeps the cost linear when one
/// argument is much larger than the other, the computation runs as a
/// primitive polynomial remainder sequence over Z.
pub fn poly_gcd(a: &Polynomial, b: &Polynomial) -> Result<Polynomial> {
    match (a.is_zero(), b.is_zero()) {
        (true, true) => return Err(Error::UndefinedGcd),
        (true, false) => return Ok(b.monic()),
        (false, true) => return Ok(a.monic()),
        _ => {}
    }
    let (big, small) = if a.deg() >= b.deg() { (a, b) } else { (b, a) };
    if small.is_constant() {
        return Ok(Polynomial::one());
    }
    let r = big.rem(small)?;
    if r.is_zero() {
        return Ok(small.monic());
    }
    let mut x = small.primitive_integer_coeffs()?;
    let mut y = r.primitive_integer_coeffs()?;
    while y.len() > 1 {
        let r = pseudo_rem(&x, &y);
        x = y;
        if r.is_empty() {
            return Ok(Polynomial::from_bigints(x).monic());
        }
        y = primitive_part(r);
    }
    Ok(Polynomial::one())
}

fn pseudo_rem(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lc = &b[db];
    while r.len() > db {
        let top = r.pop().expect("nonempty");
        let shift = r.len() - db;
        if !top.is_zero() {
            for c in r.iter_mut() {
                *c *= lc;
            }
            for (j, bj) in b[..db].iter().enumerate() {
                r[shift + j] -= &top * bj;
            }
        }
        while r.last().is_some_and(Zero::is_zero) {
            r.pop();
        }
    }
    r
}

fn primitive_part(mut v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    if !g.is_zero() && !g.is_one() {
        for c in v.iter_mut() {
            *c = &*c / &g;
        }
    }
    v
}

pub fn poly_deg(p: &Polynomial) -> Degree {
    p.degree()
}

pub fn poly_divrem(a: &Polynomial, b: &Polynomial) -> Result<(Polynomial, Polynomial)> {
    a.divrem(b)
}

pub fn poly_compose_power(p: &Polynomial, e: usize) -> Polynomial {
    p.compose_power(e)
}

pub fn clear_denominators(p: &Polynomial) -> Result<Polynomial> {
    p.clear_denominators()
}

fn add_coeffs(a: &[Rational], b: &[Rational], negate_b: bool) -> Polynomial {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i);
        let y = b.get(i);
        out.push(match (x, y, negate_b) {
            (Some(x), Some(y), false) => x + y,
            (Some(x), Some(y), true) => x - y,
            (Some(x), None, _) => x.clone(),
            (None, Some(y), false) => y.clone(),
            (None, Some(y), true) => -y,
            (None, None, _) => unreachable!(),
        });
    }
    Polynomial::new(out)
}

fn mul_coeffs(a: &[Rational], b: &[Rational]) -> Polynomial {
    if a.is_empty() || b.is_empty() {
        return Polynomial::zero();
    }
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    Polynomial::new(out)
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        add_coeffs(&self.coeffs, &rhs.coeffs, false)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        add_coeffs(&self.coeffs, &rhs.coeffs, true)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        mul_coeffs(&self.coeffs, &rhs.coeffs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($trait:ident, $method:ident) => {
        impl $trait for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                (&self).$method(rhs)
            }
        }
        impl $trait<Polynomial> for &Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                self.$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.to_text())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let negative = c.is_negative();
            let mag = c.abs();
            if first {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { '-' } else { '+' })?;
            }
            first = false;
            let show_coeff = i == 0 || !mag.is_one();
            if show_coeff {
                write!(f, "{}", format_rational(&mag))?;
            }
            match i {
                0 => {}
                1 if show_coeff => write!(f, "*z")?,
                1 => write!(f, "z")?,
                _ if show_coeff => write!(f, "*z^{i}")?,
                _ => write!(f, "z^{i}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational::{rat, rat_frac};

    fn p(c: &[i64]) -> Polynomial {
        Polynomial::from_i64s(c)
    }

    #[test]
    fn degree_convention() {
        assert_eq!(Polynomial::zero().degree(), Degree::MinusInfinity);
        assert_eq!(p(&[5]).degree(), Degree::Finite(0));
        assert_eq!(p(&[1, 0, 1]).degree(), Degree::Finite(2));
        assert_eq!(p(&[1, 2, 0, 0]).degree(), Degree::Finite(1));
    }

    #[test]
    fn divrem_examples() {
        let (q, r) = p(&[-1, 0, 1]).divrem(&p(&[-1, 1])).unwrap();
        assert_eq!((q, r), (p(&[1, 1]), Polynomial::zero()));
        let (q, r) = p(&[1, 0, 1]).divrem(&p(&[0, 1])).unwrap();
        assert_eq!((q, r), (p(&[0, 1]), p(&[1])));
        let (q, r) = p(&[0, 0, 0, 1]).divrem(&p(&[1, 0, 1])).unwrap();
        assert_eq!((q.clone(), r.clone()), (p(&[0, 1]), p(&[0, -1])));
        assert_eq!(&(&q * &p(&[1, 0, 1])) + &r, p(&[0, 0, 0, 1]));
    }

    #[test]
    fn divrem_by_zero_fails() {
        assert_eq!(p(&[1]).divrem(&Polynomial::zero()), Err(Error::ZeroDivisor));
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(
            poly_gcd(&p(&[-1, 0, 1]), &p(&[-1, 1])).unwrap(),
            p(&[-1, 1])
        );
        assert_eq!(poly_gcd(&p(&[1, 1]), &p(&[2, 1])).unwrap(), p(&[1]));
        assert_eq!(
            poly_gcd(&p(&[4, 2]), &Polynomial::zero()).unwrap(),
            p(&[2, 1])
        );
        assert_eq!(
            poly_gcd(&Polynomial::zero(), &Polynomial::zero()),
            Err(Error::UndefinedGcd)
        );
    }

    #[test]
    fn gcd_of_higher_degree_inputs() {
        let g = p(&[3, -1, 2]);
        let a = &g * &p(&[1, 1, 0, 5]);
        let b = &g * &p(&[-7, 0, 2]);
        assert_eq!(poly_gcd(&a, &b).unwrap(), g.monic());
    }

    #[test]
    fn compose_power_examples() {
        assert_eq!(p(&[1, 1]).compose_power(3), p(&[1, 0, 0, 1]));
        assert_eq!(p(&[7]).compose_power(5), p(&[7]));
        assert_eq!(p(&[0, -1, 1]).compose_power(2), p(&[0, 0, -1, 0, 1]));
    }

    #[test]
    fn clear_denominators_examples() {
        let half_third = Polynomial::new(vec![rat_frac(1, 3), rat_frac(1, 2)]);
        assert_eq!(half_third.clear_denominators().unwrap(), p(&[2, 3]));
        assert_eq!(p(&[1, 1]).clear_denominators().unwrap(), p(&[1, 1]));
        assert_eq!(p(&[-4, -2]).clear_denominators().unwrap(), p(&[2, 1]));
        assert_eq!(
            Polynomial::zero().clear_denominators(),
            Err(Error::ZeroPolynomial)
        );
    }

    #[test]
    fn text_round_trip() {
        let q = Polynomial::from_text(&["1", "\u{2212}3/2", "0", "1"]).unwrap();
        assert_eq!(q.coeffs()[1], rat_frac(-3, 2));
        assert_eq!(q.degree(), Degree::Finite(3));
        assert_eq!(Polynomial::from_text(&q.to_text()).unwrap(), q);
    }

    #[test]
    fn display_form() {
        let q = Polynomial::new(vec![rat(1), rat_frac(-3, 2), rat(0), rat(1)]);
        assert_eq!(q.to_string(), "z^3 - 3/2*z + 1");
        assert_eq!(p(&[0, -1]).to_string(), "-z");
    }

    #[test]
    fn eval_and_valuation() {
        let q = p(&[0, 0, 3, 1]);
        assert_eq!(q.valuation(), Some(2));
        assert_eq!(q.eval(&rat(2)), rat(20));
        assert_eq!(q.derivative(), p(&[0, 6, 3]));
        assert_eq!(p(&[1, 1]).pow(3), p(&[1, 3, 3, 1]));
    }
}
