//! Cyclotomic polynomials and the integer helpers around them.

use std::collections::BTreeMap;

use num_integer::Integer;

use crate::algebra::Polynomial;
use crate::error::{Error, Result};

/// Product of the distinct primes dividing `n`.
pub fn rad(n: u64) -> u64 {
    assert!(n >= 1, "rad is defined for positive integers");
    prime_factors(n).into_iter().product()
}

pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut i = 1;
    while i * i <= n {
        if n % i == 0 {
            small.push(i);
            if i * i != n {
                large.push(n / i);
            }
        }
        i += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

pub fn totient(n: u64) -> u64 {
    prime_factors(n)
        .into_iter()
        .fold(n, |acc, p| acc / p * (p - 1))
}

/// `(r, s)` with `r` the largest divisor of `m` coprime to `n` and `s = m / r`.
pub fn r_s_split(m: u64, n: u64) -> (u64, u64) {
    assert!(m >= 1 && n >= 1);
    let mut r = m;
    loop {
        let g = r.gcd(&n);
        if g == 1 {
            break;
        }
        r /= g;
    }
    (r, m / r)
}

/// The n-th cyclotomic polynomial, by dividing `z^n - 1` by `Φ_k` for the
/// proper divisors `k` of `n`.
pub fn cyclotomic_poly(n: u64) -> Polynomial {
    let mut cache = BTreeMap::new();
    cyclotomic_cached(n, &mut cache)
}

fn cyclotomic_cached(n: u64, cache: &mut BTreeMap<u64, Polynomial>) -> Polynomial {
    assert!(n >= 1, "cyclotomic index must be positive");
    if let Some(p) = cache.get(&n) {
        return p.clone();
    }
    let mut coeffs = vec![0i64; n as usize + 1];
    coeffs[0] = -1;
    coeffs[n as usize] = 1;
    let mut acc = Polynomial::from_i64s(&coeffs);
    for k in divisors(n) {
        if k < n {
            let phi = cyclotomic_cached(k, cache);
            acc = acc
                .div_exact(&phi)
                .expect("cyclotomic factors divide z^n - 1");
        }
    }
    cache.insert(n, acc.clone());
    acc
}

/// Indices `m` with `Φ_n(z^d) = Π Φ_m(z)`: `{ r n s(d, n) : r | r(d, n) }`.
pub fn phi_compose_factorization(n: u64, d: u64) -> Vec<u64> {
    let (r, s) = r_s_split(d, n);
    divisors(r).into_iter().map(|k| k * n * s).collect()
}

/// Largest `e` with `P^e | Q`.
pub fn sigma_multiplicity(p: &Polynomial, q: &Polynomial) -> Result<u32> {
    if p.is_constant() {
        return Err(Error::Precondition(
            "multiplicity of a constant polynomial is undefined".into(),
        ));
    }
    if q.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let mut count = 0;
    let mut rest = q.clone();
    loop {
        let (quot, rem) = rest.divrem(p)?;
        if !rem.is_zero() {
            return Ok(count);
        }
        rest = quot;
        count += 1;
    }
}

/// Indices `n` with `totient(n) <= max_degree`; every such `n` is at most
/// `2 max_degree^2`.
pub fn cyclotomic_candidates(max_degree: u64) -> Vec<u64> {
    let limit = (2 * max_degree * max_degree).max(2);
    (1..=limit).filter(|&n| totient(n) <= max_degree).collect()
}

/// Smallest `m <= max_m` with `Φ_n | Φ_r(z^{d^m})`, where `r = r(n, d)`,
/// found by chaining the composition factorization.
pub fn cyclotomic_chain_witness(n: u64, d: u64, max_m: u32) -> Option<u32> {
    let (r, _) = r_s_split(n, d);
    let mut indices = vec![r];
    for m in 0..=max_m {
        if indices.contains(&n) {
            return Some(m);
        }
        let mut next: Vec<u64> = indices
            .iter()
            .flat_map(|&i| phi_compose_factorization(i, d))
            .collect();
        next.sort_unstable();
        next.dedup();
        // Indices growing past n can never come back down.
        next.retain(|&i| i <= n);
        if next.is_empty() {
            return None;
        }
        indices = next;
    }
    None
}

/// Product of `Φ_m` over the given indices.
pub fn cyclotomic_product(indices: &[u64]) -> Polynomial {
    indices
        .iter()
        .fold(Polynomial::one(), |acc, &m| &acc * &cyclotomic_poly(m))
}
