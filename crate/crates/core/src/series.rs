//! Mahler equations and the exact expansion of their Laurent-series solutions.
//!
//! A solution is written `f(z) = sum_{k >= -K} f_k z^{-k}`. Internally the
//! coefficients are stored by *position* `j = k + K`, so position `j` holds
//! the coefficient of `z^{K - j}` and position 0 is the leading coefficient.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::algebra::{solve_linear, Degree, Polynomial, Rational};
use crate::error::{Error, Result};

/// Seed values for free coefficients, keyed by the index `k` of `z^{-k}`.
pub type Seeds = BTreeMap<i64, Rational>;

/// `B(z) f(z) = A(z) f(z^d) + C(z)` with integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MahlerEquation {
    d: usize,
    a: Polynomial,
    b: Polynomial,
    c: Polynomial,
    homogeneous: bool,
}

impl MahlerEquation {
    /// Builds an equation with `C != 0`.
    pub fn new(d: usize, a: Polynomial, b: Polynomial, c: Polynomial) -> Result<Self> {
        Self::build(d, a, b, c, false)
    }

    /// Builds an equation that may have `C = 0`.
    pub fn new_homogeneous_allowed(
        d: usize,
        a: Polynomial,
        b: Polynomial,
        c: Polynomial,
    ) -> Result<Self> {
        Self::build(d, a, b, c, true)
    }

    fn build(
        d: usize,
        a: Polynomial,
        b: Polynomial,
        c: Polynomial,
        homogeneous: bool,
    ) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidEquation(format!(
                "radix d = {d} must be at least 2"
            )));
        }
        if a.is_zero() || b.is_zero() {
            return Err(Error::InvalidEquation("A and B must be nonzero".into()));
        }
        if c.is_zero() && !homogeneous {
            return Err(Error::InvalidEquation(
                "C = 0 requires the homogeneous option".into(),
            ));
        }
        // A common rational multiple of the three polynomials leaves the
        // solution unchanged, so denominators are cleared jointly.
        let all = || a.coeffs().iter().chain(b.coeffs()).chain(c.coeffs());
        let lcm = all().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let content = all()
            .map(|x| (x * Rational::from_integer(lcm.clone())).to_integer())
            .fold(BigInt::zero(), |acc, x| acc.gcd(&x));
        let mut factor = Rational::new(lcm, content);
        if b.leading_coeff().expect("nonzero").is_negative() {
            factor = -factor;
        }
        Ok(MahlerEquation {
            d,
            a: a.scale(&factor),
            b: b.scale(&factor),
            c: c.scale(&factor),
            homogeneous,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn a(&self) -> &Polynomial {
        &self.a
    }

    pub fn b(&self) -> &Polynomial {
        &self.b
    }

    pub fn c(&self) -> &Polynomial {
        &self.c
    }

    pub fn allows_homogeneous(&self) -> bool {
        self.homogeneous
    }

    pub fn r_a(&self) -> i64 {
        self.a.deg_or_zero() as i64
    }

    pub fn r_b(&self) -> i64 {
        self.b.deg_or_zero() as i64
    }

    pub fn r_c(&self) -> Degree {
        self.c.degree()
    }

    /// Leading coefficient of `A`.
    pub fn alpha(&self) -> &Rational {
        self.a.leading_coeff().expect("A is nonzero")
    }

    /// Leading coefficient of `B`.
    pub fn beta(&self) -> &Rational {
        self.b.leading_coeff().expect("B is nonzero")
    }

    fn d_i64(&self) -> i64 {
        self.d as i64
    }

    /// Highest power of z that can carry a nonzero term for degree `k`.
    fn top_power(&self, k: i64) -> i64 {
        let mut top = (self.r_b() + k).max(self.r_a() + self.d_i64() * k);
        if let Degree::Finite(rc) = self.r_c() {
            top = top.max(rc);
        }
        top
    }

    /// Largest power `e` whose matching equation only reaches back to
    /// earlier positions through the `A f(z^d)` side.
    fn tail_power(&self) -> i64 {
        let d = self.d_i64();
        Integer::div_floor(&(d * self.r_b() - self.r_a() - 1), &(d - 1))
    }
}

/// Candidate degrees `K` for which the leading terms of the equation balance.
pub fn infer_degree(eq: &MahlerEquation) -> Vec<i64> {
    let (ra, rb, d) = (eq.r_a(), eq.r_b(), eq.d_i64());
    let rc = eq.r_c().finite();
    let mut out = Vec::new();
    let mut consider = |k: i64| {
        let mut vals = vec![rb + k, ra + d * k];
        if let Some(rc) = rc {
            vals.push(rc);
        }
        let top = *vals.iter().max().expect("nonempty");
        if vals.iter().filter(|&&v| v == top).count() >= 2 && !out.contains(&k) {
            out.push(k);
        }
    };
    if (rb - ra) % (d - 1) == 0 {
        consider((rb - ra) / (d - 1));
    }
    if let Some(rc) = rc {
        consider(rc - rb);
        if (rc - ra) % d == 0 {
            consider((rc - ra) / d);
        }
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

#[derive(Clone, Debug)]
enum Source {
    Mahler {
        eq: Arc<MahlerEquation>,
        seeds: Seeds,
        head: Vec<Rational>,
    },
    Exact,
    Truncated,
}

/// A Laurent series known through a finite prefix of coefficients.
#[derive(Clone, Debug)]
pub struct LaurentSeries {
    k: i64,
    coeffs: Vec<Rational>,
    source: Source,
}

impl PartialEq for LaurentSeries {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.coeffs == other.coeffs
    }
}

impl LaurentSeries {
    /// A series equal to the given coefficients followed by zeros.
    pub fn exact(k: i64, coeffs: Vec<Rational>) -> Self {
        LaurentSeries {
            k,
            coeffs,
            source: Source::Exact,
        }
    }

    /// A prefix with nothing known beyond it.
    pub fn truncated(k: i64, coeffs: Vec<Rational>) -> Self {
        LaurentSeries {
            k,
            coeffs,
            source: Source::Truncated,
        }
    }

    /// Degree `K` of the series.
    pub fn degree(&self) -> i64 {
        self.k
    }

    pub fn known_count(&self) -> usize {
        self.coeffs.len()
    }

    /// Known coefficients by position.
    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn equation(&self) -> Option<&Arc<MahlerEquation>> {
        match &self.source {
            Source::Mahler { eq, .. } => Some(eq),
            _ => None,
        }
    }

    pub fn seeds(&self) -> Option<&Seeds> {
        match &self.source {
            Source::Mahler { seeds, .. } => Some(seeds),
            _ => None,
        }
    }

    pub fn is_extendable(&self) -> bool {
        matches!(self.source, Source::Mahler { .. })
    }

    /// True when every coefficient past the prefix is known to vanish.
    pub fn is_exact(&self) -> bool {
        matches!(self.source, Source::Exact)
    }

    /// Coefficient at position `j`, if known.
    pub fn at_position(&self, j: i64) -> Option<Rational> {
        if j < 0 {
            return Some(Rational::zero());
        }
        match self.coeffs.get(j as usize) {
            Some(c) => Some(c.clone()),
            None if self.is_exact() => Some(Rational::zero()),
            None => None,
        }
    }

    /// Coefficient `f_k` of `z^{-k}`.
    pub fn coeff(&self, k: i64) -> Option<Rational> {
        self.at_position(k + self.k)
    }

    /// Coefficient of `z^e`.
    pub fn coeff_of_power(&self, e: i64) -> Option<Rational> {
        self.at_position(self.k - e)
    }

    /// Lowest power of z whose coefficient is known, `None` if all are.
    pub fn lowest_known_power(&self) -> Option<i64> {
        if self.is_exact() {
            None
        } else {
            Some(self.k - self.coeffs.len() as i64 + 1)
        }
    }

    /// The first `n` coefficients, keeping the ability to extend.
    pub fn prefix(&self, n: usize) -> LaurentSeries {
        let source = match &self.source {
            Source::Exact if n < self.coeffs.len() => Source::Truncated,
            other => other.clone(),
        };
        LaurentSeries {
            k: self.k,
            coeffs: self.coeffs[..n.min(self.coeffs.len())].to_vec(),
            source,
        }
    }

    /// The first `n` coefficients with the source forgotten.
    pub fn truncate(&self, n: usize) -> LaurentSeries {
        LaurentSeries::truncated(self.k, self.coeffs[..n.min(self.coeffs.len())].to_vec())
    }

    /// Ensures at least `n` coefficients are known.
    pub fn extend_to(&mut self, n: usize) -> Result<()> {
        if n <= self.coeffs.len() {
            return Ok(());
        }
        let (eq, head) = match &self.source {
            Source::Mahler { eq, head, .. } => (eq.clone(), head.clone()),
            Source::Exact => {
                self.coeffs.resize(n, Rational::zero());
                return Ok(());
            }
            Source::Truncated => {
                return Err(Error::PrecisionExhausted(format!(
                    "series is truncated at {} coefficients",
                    self.coeffs.len()
                )))
            }
        };
        self.coeffs.reserve(n - self.coeffs.len());
        while self.coeffs.len() < n {
            let j = self.coeffs.len();
            let next = match head.get(j) {
                Some(c) => c.clone(),
                None => tail_coefficient(&eq, self.k, &self.coeffs, j as i64),
            };
            self.coeffs.push(next);
        }
        Ok(())
    }

    /// Functional form of [`LaurentSeries::extend_to`].
    pub fn extend(&self, n: usize) -> Result<LaurentSeries> {
        let mut out = self.clone();
        out.extend_to(n)?;
        Ok(out)
    }

    /// Heuristic growth rate `max |f_k|^(1/k)` over the second half of the
    /// known prefix.
    pub fn growth_estimate(&self) -> f64 {
        let n = self.coeffs.len();
        (n / 2..n)
            .filter(|&j| j > 0 && !self.coeffs[j].is_zero())
            .map(|j| (crate::algebra::ln_abs_rational(&self.coeffs[j]) / j as f64).exp())
            .fold(0.0, f64::max)
    }
}

/// Coefficient at position `j` from the matching equation at the power where
/// `beta * f_j` is the newest term.
fn tail_coefficient(eq: &MahlerEquation, k: i64, known: &[Rational], j: i64) -> Rational {
    let rb = eq.r_b();
    let e = k + rb - j;
    let d = eq.d_i64();
    let mut acc =
        eq.c.coeff_ref(e.max(0) as usize)
            .filter(|_| e >= 0)
            .cloned()
            .unwrap_or_else(Rational::zero);
    for (i, ai) in eq.a.coeffs().iter().enumerate() {
        let diff = e - i as i64;
        if ai.is_zero() || diff % d != 0 {
            continue;
        }
        let pos = k - diff / d;
        if pos >= 0 {
            acc += ai * &known[pos as usize];
        }
    }
    for (i, bi) in eq.b.coeffs()[..rb as usize].iter().enumerate() {
        let pos = j - rb + i as i64;
        if pos >= 0 && !bi.is_zero() {
            acc -= bi * &known[pos as usize];
        }
    }
    acc / eq.beta()
}

/// Expands the solution of degree `k` to `n` coefficients.
pub fn expand(eq: &MahlerEquation, k: i64, n: usize, seeds: &Seeds) -> Result<LaurentSeries> {
    expand_shared(Arc::new(eq.clone()), k, n, seeds)
}

pub fn expand_shared(
    eq: Arc<MahlerEquation>,
    k: i64,
    n: usize,
    seeds: &Seeds,
) -> Result<LaurentSeries> {
    if !infer_degree(&eq).contains(&k) {
        return Err(Error::Inconsistent(format!(
            "degree K = {k} does not balance the equation"
        )));
    }
    for &idx in seeds.keys() {
        if idx + k < 0 {
            return Err(Error::InvalidSeed(format!(
                "index {idx} lies above the leading term z^{k}"
            )));
        }
    }
    let head = solve_head(&eq, k, seeds)?;
    let mut series = LaurentSeries {
        k,
        coeffs: Vec::new(),
        source: Source::Mahler {
            eq: eq.clone(),
            seeds: seeds.clone(),
            head: head.clone(),
        },
    };
    let check_through = seeds
        .keys()
        .map(|&i| (i + k) as usize + 1)
        .max()
        .unwrap_or(0);
    series.extend_to(n.max(check_through))?;
    for (&idx, value) in seeds {
        let pos = (idx + k) as usize;
        if pos >= head.len() && &series.coeffs[pos] != value {
            return Err(Error::InvalidSeed(format!(
                "f_{idx} is determined as {} but seeded as {}",
                crate::algebra::format_rational(&series.coeffs[pos]),
                crate::algebra::format_rational(value)
            )));
        }
    }
    series.coeffs.truncate(n);
    Ok(series)
}

/// Solves the coupled leading block of the coefficient equations.
fn solve_head(eq: &MahlerEquation, k: i64, seeds: &Seeds) -> Result<Vec<Rational>> {
    let d = eq.d_i64();
    let rb = eq.r_b();
    let top = eq.top_power(k);
    let stop = (k + rb).min(eq.tail_power());
    let m = (k + rb - stop) as usize;
    let ncols = m + 1;
    let mut rows = Vec::new();
    for e in (stop..=top).rev() {
        let mut row = vec![Rational::zero(); ncols + 1];
        for (i, bi) in eq.b.coeffs().iter().enumerate() {
            let pos = k - e + i as i64;
            if pos >= 0 && !bi.is_zero() {
                row[pos as usize] += bi;
            }
        }
        for (i, ai) in eq.a.coeffs().iter().enumerate() {
            let diff = e - i as i64;
            if ai.is_zero() || diff % d != 0 {
                continue;
            }
            let pos = k - diff / d;
            if pos >= 0 {
                row[pos as usize] -= ai;
            }
        }
        if e >= 0 {
            row[ncols] = eq.c.coeff(e as usize);
        }
        if row.iter().any(|x| !x.is_zero()) {
            rows.push(row);
        }
    }
    let base = solve_linear(rows.clone(), ncols);
    if !base.consistent {
        return Err(Error::Inconsistent(format!(
            "no series solution of degree {k}"
        )));
    }
    for (&idx, value) in seeds {
        let pos = (idx + k) as usize;
        if pos < ncols {
            let mut row = vec![Rational::zero(); ncols + 1];
            row[pos] = Rational::one();
            row[ncols] = value.clone();
            rows.push(row);
        }
    }
    let seeded = solve_linear(rows, ncols);
    if !seeded.consistent {
        return Err(Error::InvalidSeed(format!(
            "seeds contradict the equations for degree {k}"
        )));
    }
    if !seeded.free.is_empty() {
        return Err(Error::FreeParameters(
            seeded.free.iter().map(|&p| p as i64 - k).collect(),
        ));
    }
    let head = seeded.particular();
    if head[0].is_zero() {
        return Err(Error::Inconsistent(format!(
            "leading coefficient vanishes for degree {k}"
        )));
    }
    Ok(head)
}

/// Expands every balancing degree, largest first.
pub fn expand_all(
    eq: &MahlerEquation,
    n: usize,
    seeds: &Seeds,
) -> Vec<(i64, Result<LaurentSeries>)> {
    let shared = Arc::new(eq.clone());
    infer_degree(eq)
        .into_iter()
        .map(|k| (k, expand_shared(shared.clone(), k, n, seeds)))
        .collect()
}

/// Highest power of z at which `B f - A f(z^d) - C` is nonzero, over the
/// powers fully determined by the known prefix.
pub fn residual_degree(eq: &MahlerEquation, series: &LaurentSeries) -> Degree {
    let k = series.degree();
    let n = series.known_count() as i64;
    let d = eq.d_i64();
    let known = |pos: i64| -> Option<Rational> {
        if pos < 0 {
            Some(Rational::zero())
        } else if pos < n {
            Some(series.coeffs[pos as usize].clone())
        } else {
            None
        }
    };
    let top = eq.top_power(k).max(k + eq.r_b());
    let lowest = k + eq.r_b() - n + 1;
    let lowest = lowest.min(eq.tail_power()).min(0) - eq.r_a() - 1;
    'powers: for e in (lowest..=top).rev() {
        let mut acc = Rational::zero();
        for (i, bi) in eq.b.coeffs().iter().enumerate() {
            match known(k - e + i as i64) {
                Some(c) => acc += bi * c,
                None => continue 'powers,
            }
        }
        for (i, ai) in eq.a.coeffs().iter().enumerate() {
            let diff = e - i as i64;
            if diff % d != 0 {
                continue;
            }
            match known(k - diff / d) {
                Some(c) => acc -= ai * c,
                None => continue 'powers,
            }
        }
        if e >= 0 {
            acc -= eq.c.coeff(e as usize);
        }
        if !acc.is_zero() {
            return Degree::Finite(e);
        }
    }
    Degree::MinusInfinity
}
