//! Equation transforms that keep the irrationality exponent unchanged.

use num_integer::Integer;

use super::cyclotomic::{cyclotomic_poly, cyclotomic_product, divisors};
use crate::error::{Error, Result};
use crate::series::MahlerEquation;

/// Rewrites the equation for `g = z^K f` with the smallest `K >= 0` that
/// leaves `A` without a root at zero, cancelling the common power of `z`.
pub fn strip_z_powers(eq: &MahlerEquation) -> Result<(MahlerEquation, i64)> {
    let d = eq.d() as i64;
    let va = eq.a().valuation().expect("A is nonzero") as i64;
    let vb = eq.b().valuation().expect("B is nonzero") as i64;
    let mut k = 0i64.max(Integer::div_ceil(&(va - vb), &(d - 1)));
    if let Some(vc) = eq.c().valuation() {
        k = k.max(Integer::div_ceil(&(va - vc as i64), &d));
    }
    let b = eq.b().shift_up(((d - 1) * k) as usize);
    let c = eq.c().shift_up((d * k) as usize);
    let common = [
        Some(va),
        b.valuation().map(|v| v as i64),
        c.valuation().map(|v| v as i64),
    ]
    .into_iter()
    .flatten()
    .min()
    .unwrap_or(0) as usize;
    let out = MahlerEquation::new_homogeneous_allowed(
        eq.d(),
        eq.a().shift_down(common),
        b.shift_down(common),
        c.shift_down(common),
    )?;
    Ok((restore_homogeneous_flag(out, eq)?, k))
}

/// Rewrites the equation for `g = Φ_n f` when `gcd(n, d) = 1` and `Φ_n`
/// divides both `A` and `B`: one factor `Φ_n` leaves `A` and `B`, and
/// `B` and `C` gain `prod_{r | d, r > 1} Φ_{rn}`.
pub fn strip_common_cyclotomic(eq: &MahlerEquation, n: u64) -> Result<MahlerEquation> {
    let d = eq.d() as u64;
    if n.gcd(&d) != 1 {
        return Err(Error::Precondition(format!("gcd({n}, {d}) != 1")));
    }
    let phi = cyclotomic_poly(n);
    let (a, ra) = eq.a().divrem(&phi)?;
    let (b, rb) = eq.b().divrem(&phi)?;
    if !ra.is_zero() || !rb.is_zero() {
        return Err(Error::Precondition(format!(
            "cyclotomic polynomial of index {n} does not divide both A and B"
        )));
    }
    let extra: Vec<u64> = divisors(d)
        .into_iter()
        .filter(|&r| r > 1)
        .map(|r| r * n)
        .collect();
    let factor = cyclotomic_product(&extra);
    let out = MahlerEquation::new_homogeneous_allowed(eq.d(), a, &b * &factor, eq.c() * &factor)?;
    restore_homogeneous_flag(out, eq)
}

fn restore_homogeneous_flag(out: MahlerEquation, like: &MahlerEquation) -> Result<MahlerEquation> {
    if like.allows_homogeneous() || out.c().is_zero() {
        Ok(out)
    } else {
        MahlerEquation::new(out.d(), out.a().clone(), out.b().clone(), out.c().clone())
    }
}

/// Indices `n` with `Φ_n` dividing both `A` and `B`.
pub fn common_cyclotomic_indices(eq: &MahlerEquation) -> Vec<u64> {
    let deg = eq.a().deg_or_zero().min(eq.b().deg_or_zero()) as u64;
    if deg == 0 {
        return Vec::new();
    }
    super::cyclotomic::cyclotomic_candidates(deg)
        .into_iter()
        .filter(|&n| {
            let phi = cyclotomic_poly(n);
            phi.divides(eq.a()).unwrap_or(false) && phi.divides(eq.b()).unwrap_or(false)
        })
        .collect()
}
