//! Factorization over Q for the small polynomials met in the condition report.
//!
//! Square-free parts come from Yun's algorithm. Each square-free part is then
//! split by grouping its floating-point roots (real roots alone, complex roots
//! with their conjugates), rounding `lc * prod (z - root)` over subsets of
//! groups to integers and keeping the candidates that divide exactly. A part
//! with no proper divisor among all subsets is irreducible.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{FromPrimitive, Zero};

use super::roots::complex_roots;
use crate::algebra::{poly_gcd, to_f64, Polynomial, Rational};
use crate::error::{Error, Result};

/// Limit on the number of root subsets tried per square-free part.
const MAX_SUBSETS: usize = 1 << 18;

/// `(factor, multiplicity)` pairs with `p = c * prod factor^multiplicity`.
pub fn square_free_decomposition(p: &Polynomial) -> Result<Vec<(Polynomial, u32)>> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let f = p.clear_denominators()?;
    if f.is_constant() {
        return Ok(Vec::new());
    }
    let fp = f.derivative();
    let a0 = poly_gcd(&f, &fp)?;
    let mut b = f.div_exact(&a0)?;
    let mut c = fp.div_exact(&a0)?;
    let mut d = &c - &b.derivative();
    let mut out = Vec::new();
    let mut i = 1;
    while !b.is_constant() {
        let a = poly_gcd(&b, &d)?;
        if !a.is_constant() {
            out.push((a.clear_denominators()?, i));
        }
        b = b.div_exact(&a)?;
        c = d.div_exact(&a)?;
        d = &c - &b.derivative();
        i += 1;
    }
    Ok(out)
}

/// Irreducible factors over Q (primitive, positive leading coefficient) with
/// multiplicities.
pub fn irreducible_factors(p: &Polynomial) -> Result<Vec<(Polynomial, u32)>> {
    let mut out = Vec::new();
    for (part, mult) in square_free_decomposition(p)? {
        for factor in split_square_free(&part)? {
            out.push((factor, mult));
        }
    }
    Ok(out)
}

fn split_square_free(p: &Polynomial) -> Result<Vec<Polynomial>> {
    let n = p.deg_or_zero();
    if n <= 1 {
        return Ok(vec![p.clear_denominators()?]);
    }
    let groups = group_roots(&complex_roots(p));
    let mut remaining: Vec<usize> = (0..groups.len()).collect();
    let mut rest = p.clear_denominators()?;
    let mut factors = Vec::new();
    let mut tried = 0usize;
    let mut size = 1;
    while 2 * size <= rest.deg_or_zero() {
        let mut found = None;
        for subset in Combinations::new(remaining.len(), size) {
            tried += 1;
            if tried > MAX_SUBSETS {
                return Err(Error::Factorization(format!(
                    "root recombination limit reached for a degree {n} factor"
                )));
            }
            let chosen: Vec<usize> = subset.iter().map(|&i| remaining[i]).collect();
            let degree: usize = chosen.iter().map(|&g| groups[g].len()).sum();
            if degree == 0 || 2 * degree > rest.deg_or_zero() {
                continue;
            }
            let roots: Vec<Complex64> = chosen.iter().flat_map(|&g| groups[g].clone()).collect();
            if let Some(candidate) = integer_candidate(&rest, &roots)? {
                let (q, r) = rest.divrem(&candidate)?;
                if r.is_zero() && !candidate.is_constant() {
                    found = Some((candidate, q, chosen));
                    break;
                }
            }
        }
        match found {
            Some((candidate, quotient, chosen)) => {
                factors.push(candidate);
                rest = quotient.clear_denominators()?;
                remaining.retain(|g| !chosen.contains(g));
            }
            None => size += 1,
        }
    }
    factors.push(rest);
    factors.retain(|f| !f.is_constant());
    Ok(factors)
}

/// Real roots alone, non-real roots paired with their nearest conjugate.
fn group_roots(roots: &[Complex64]) -> Vec<Vec<Complex64>> {
    let mut used = vec![false; roots.len()];
    let mut groups = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let z = roots[i];
        if z.im.abs() <= 1e-7 * (1.0 + z.norm()) {
            groups.push(vec![Complex64::new(z.re, 0.0)]);
            continue;
        }
        let partner = (0..roots.len()).filter(|&j| !used[j]).min_by(|&a, &b| {
            let da = (roots[a] - z.conj()).norm();
            let db = (roots[b] - z.conj()).norm();
            da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
        });
        match partner {
            Some(j) => {
                used[j] = true;
                groups.push(vec![z, roots[j]]);
            }
            None => groups.push(vec![z]),
        }
    }
    groups
}

/// Rounds `lc(p) * prod (z - root)` to an integer polynomial.
fn integer_candidate(p: &Polynomial, roots: &[Complex64]) -> Result<Option<Polynomial>> {
    let lc = to_f64(p.leading_coeff().expect("nonzero"));
    let mut coeffs = vec![Complex64::new(lc, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (i, &c) in coeffs.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * r;
        }
        coeffs = next;
    }
    let mut ints = Vec::with_capacity(coeffs.len());
    for c in coeffs {
        if c.re.abs() > 1e12 {
            return Err(Error::Factorization(
                "candidate coefficients exceed floating-point recombination range".into(),
            ));
        }
        let rounded = c.re.round();
        if (c.re - rounded).abs() > 1e-3 || c.im.abs() > 1e-3 {
            return Ok(None);
        }
        ints.push(BigInt::from_f64(rounded).unwrap_or_else(BigInt::zero));
    }
    let cand = Polynomial::from_bigints(ints);
    if cand.is_zero() {
        return Ok(None);
    }
    Ok(Some(cand.clear_denominators()?))
}

/// Index subsets of a fixed size in lexicographic order.
struct Combinations {
    n: usize,
    idx: Vec<usize>,
    first: bool,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            idx: (0..k).collect(),
            first: true,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let k = self.idx.len();
        if k > self.n {
            return None;
        }
        if self.first {
            self.first = false;
            return Some(self.idx.clone());
        }
        let mut i = k;
        while i > 0 {
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                return Some(self.idx.clone());
            }
        }
        None
    }
}

/// Rational root `p/q` of a linear factor, if the factor is linear.
pub fn linear_root(f: &Polynomial) -> Option<Rational> {
    (f.deg() == Some(1)).then(|| -&f.coeffs()[0] / &f.coeffs()[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> Polynomial {
        Polynomial::from_i64s(c)
    }

    fn product(fs: &[(Polynomial, u32)]) -> Polynomial {
        fs.iter()
            .fold(Polynomial::one(), |acc, (f, m)| &acc * &f.pow(*m))
    }

    #[test]
    fn square_free_parts() {
        let f = &(&p(&[1, 1]).pow(3) * &p(&[-2, 1])) * &p(&[1, 0, 1]).pow(2);
        let parts = square_free_decomposition(&f).unwrap();
        assert_eq!(product(&parts), f);
        assert!(parts.iter().any(|(g, m)| *m == 3 && g == &p(&[1, 1])));
    }

    #[test]
    fn splits_into_irreducibles() {
        let f = &(&p(&[-2, 0, 1]) * &p(&[1, 1, 1])) * &p(&[3, 2]);
        let mut fs = irreducible_factors(&f).unwrap();
        fs.sort_by_key(|(g, _)| g.deg());
        assert_eq!(fs.len(), 3);
        assert_eq!(product(&fs).monic(), f.monic());
        assert_eq!(fs[0].0, p(&[3, 2]));
    }

    #[test]
    fn irreducible_stays_whole() {
        let f = p(&[-2, 0, 0, 0, 1]);
        let fs = irreducible_factors(&f).unwrap();
        assert_eq!(fs, vec![(f, 1)]);
    }
}
