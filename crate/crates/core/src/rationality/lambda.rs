//! Search for polynomials `λ1, λ2` with
//! `λ1(z) λ1(z^d) C + λ1(z^d) λ2(z) B = λ1(z) λ2(z^d) A`.
//!
//! For a fixed `λ1` the identity is linear in the coefficients of `λ2`.

use num_traits::Zero;

use super::factor::irreducible_factors;
use crate::algebra::{solve_linear, Polynomial, Rational};
use crate::error::Result;
use crate::series::MahlerEquation;

/// Checks the identity with exact arithmetic.
pub fn lambda_identity_holds(eq: &MahlerEquation, l1: &Polynomial, l2: &Polynomial) -> bool {
    let d = eq.d();
    let l1d = l1.compose_power(d);
    let lhs = &(&(l1 * &l1d) * eq.c()) + &(&(&l1d * l2) * eq.b());
    let rhs = &(l1 * &l2.compose_power(d)) * eq.a();
    lhs == rhs
}

/// Candidate `λ1`: one, then monic divisors of `B` of degree at most `bound`.
pub fn lambda1_candidates(b: &Polynomial, bound: usize) -> Result<Vec<Polynomial>> {
    let mut out = vec![Polynomial::one()];
    let factors = irreducible_factors(b)?;
    let mut frontier = vec![(Polynomial::one(), 0usize)];
    for (f, mult) in &factors {
        let f = f.monic();
        let mut next = Vec::new();
        for (base, deg) in &frontier {
            let mut acc = base.clone();
            let mut acc_deg = *deg;
            next.push((acc.clone(), acc_deg));
            for _ in 0..*mult {
                acc_deg += f.deg_or_zero();
                if acc_deg > bound {
                    break;
                }
                acc = &acc * &f;
                next.push((acc.clone(), acc_deg));
            }
        }
        frontier = next;
    }
    frontier.sort_by_key(|(_, deg)| *deg);
    for (cand, _) in frontier {
        if !out.contains(&cand) {
            out.push(cand);
        }
    }
    Ok(out)
}

/// First `(λ1, λ2)` with `deg λ2 <= bound` satisfying the identity.
pub fn lambda_reduction_search(
    eq: &MahlerEquation,
    bound: usize,
) -> Result<Option<(Polynomial, Polynomial)>> {
    if eq.c().is_zero() {
        return Ok(Some((Polynomial::one(), Polynomial::zero())));
    }
    for l1 in lambda1_candidates(eq.b(), bound)? {
        if let Some(l2) = solve_lambda2(eq, &l1, bound) {
            if lambda_identity_holds(eq, &l1, &l2) {
                return Ok(Some((l1, l2)));
            }
        }
    }
    Ok(None)
}

/// Solves `λ1(z^d) B λ2(z) - λ1 A λ2(z^d) = -λ1 λ1(z^d) C` for `λ2`.
fn solve_lambda2(eq: &MahlerEquation, l1: &Polynomial, bound: usize) -> Option<Polynomial> {
    let d = eq.d();
    let l1d = l1.compose_power(d);
    let left = &l1d * eq.b();
    let right = l1 * eq.a();
    let rhs = -(&(l1 * &l1d) * eq.c());
    let ncols = bound + 1;
    let rows_len = [
        left.deg_or_zero() + bound,
        right.deg_or_zero() + d * bound,
        rhs.deg_or_zero(),
    ]
    .into_iter()
    .max()
    .unwrap_or(0)
        + 1;
    let mut rows = vec![vec![Rational::zero(); ncols + 1]; rows_len];
    for j in 0..ncols {
        for (i, c) in left.coeffs().iter().enumerate() {
            rows[i + j][j] += c;
        }
        for (i, c) in right.coeffs().iter().enumerate() {
            rows[i + d * j][j] -= c;
        }
    }
    for (i, c) in rhs.coeffs().iter().enumerate() {
        rows[i][ncols] = c.clone();
    }
    let sol = solve_linear(rows, ncols);
    sol.consistent.then(|| Polynomial::new(sol.particular()))
}
