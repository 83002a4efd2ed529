//! Sufficient conditions for the successor numerators to become coprime to
//! the non-cyclotomic part `Bm` of `B`.
//!
//! (a) `Bm` coprime to `A(z^{d^t})` for every `t >= 0`, (b) every irreducible
//! factor of `Bm` has a root outside the unit circle, (c) `deg C > dK + deg A`,
//! (d) a series built from such a root does not vanish.

use num_complex::Complex64;
use serde::Serialize;

use super::factor::irreducible_factors;
use super::roots::{complex_roots, log_eval};
use crate::algebra::{poly_gcd, Degree, Polynomial};
use crate::error::Result;
use crate::series::MahlerEquation;

/// Beyond this many powers `t` the exact tests in (a) and (d) give up.
pub const MAX_POWER_STEPS: u32 = 16;

/// Roots closer than this to the unit circle count as on it.
const UNIT_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Satisfied,
    Violated,
    Inconclusive,
    Vacuous,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Outcome {
    pub status: Status,
    pub detail: String,
}

impl Outcome {
    fn new(status: Status, detail: impl Into<String>) -> Self {
        Outcome {
            status,
            detail: detail.into(),
        }
    }

    pub fn holds(&self) -> bool {
        matches!(self.status, Status::Satisfied | Status::Vacuous)
    }
}

/// Numeric evidence gathered for one irreducible factor of `Bm`.
#[derive(Clone, Debug, Serialize)]
pub struct FactorEvidence {
    pub factor: Polynomial,
    pub multiplicity: u32,
    pub max_root_modulus: f64,
    /// Least `u` used for the series in (d).
    pub series_start: Option<u32>,
    /// Partial sum `[re, im]` and the tail bound after the last term.
    pub series_sum: Option<[f64; 2]>,
    pub tail_bound: Option<f64>,
    pub terms: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RootConditionsReport {
    pub a: Outcome,
    pub b: Outcome,
    pub c: Outcome,
    pub d: Outcome,
    pub factors: Vec<FactorEvidence>,
}

impl RootConditionsReport {
    pub fn all_hold(&self) -> bool {
        [&self.a, &self.b, &self.c, &self.d]
            .iter()
            .all(|o| o.holds())
    }

    fn vacuous(detail: &str) -> Self {
        let v = Outcome::new(Status::Vacuous, detail);
        RootConditionsReport {
            a: v.clone(),
            b: v.clone(),
            c: v.clone(),
            d: v,
            factors: Vec::new(),
        }
    }
}

/// Evaluates (a)-(d) for the equation whose solution has degree `k`.
pub fn root_conditions_report(
    eq: &MahlerEquation,
    bm: &Polynomial,
    k: i64,
    digits: u32,
) -> Result<RootConditionsReport> {
    if bm.is_constant() {
        return Ok(RootConditionsReport::vacuous("no non-cyclotomic part"));
    }
    let tolerance = 10f64.powi(-(digits.min(12) as i32));
    let factors = irreducible_factors(bm)?;
    let mut evidence: Vec<FactorEvidence> = factors
        .iter()
        .map(|(f, m)| {
            let roots = complex_roots(f);
            FactorEvidence {
                factor: f.clone(),
                multiplicity: *m,
                max_root_modulus: roots.iter().map(|z| z.norm()).fold(0.0, f64::max),
                series_start: None,
                series_sum: None,
                tail_bound: None,
                terms: 0,
            }
        })
        .collect();
    let a = condition_a(eq, bm)?;
    let b = condition_b(&evidence);
    let c = condition_c(eq, k);
    let d = condition_d(eq, &mut evidence, tolerance)?;
    Ok(RootConditionsReport {
        a,
        b,
        c,
        d,
        factors: evidence,
    })
}

fn condition_a(eq: &MahlerEquation, bm: &Polynomial) -> Result<Outcome> {
    let a = eq.a();
    if a.is_constant() {
        return Ok(Outcome::new(Status::Satisfied, "A is constant"));
    }
    let d = eq.d() as f64;
    let a_moduli: Vec<f64> = complex_roots(a)
        .into_iter()
        .map(|z| z.norm())
        .filter(|&r| r > 1e-300)
        .collect();
    let (mut needed, mut bounded) = (0u32, true);
    if !a_moduli.is_empty() {
        let a_lo = a_moduli.iter().cloned().fold(f64::INFINITY, f64::min);
        let a_hi = a_moduli.iter().cloned().fold(0.0, f64::max);
        let a_on_circle = a_moduli.iter().any(|r| (r - 1.0).abs() < UNIT_MARGIN);
        let reach = a_lo.ln().abs().max(a_hi.ln().abs()) + UNIT_MARGIN;
        for z in complex_roots(bm) {
            let l = z.norm().ln().abs();
            if l < UNIT_MARGIN {
                if a_on_circle {
                    bounded = false;
                }
                continue;
            }
            // Powers z^{d^t} leave the annulus of A's roots once d^t |ln|z|| > reach.
            let mut t = 0u32;
            while l * d.powi(t as i32) <= reach && t <= MAX_POWER_STEPS {
                t += 1;
            }
            if t > MAX_POWER_STEPS {
                bounded = false;
            }
            needed = needed.max(t);
        }
    }
    let last = if bounded { needed } else { MAX_POWER_STEPS };
    let mut zpow = Polynomial::z().rem(bm)?;
    for t in 0..=last {
        if t > 0 {
            zpow = pow_mod(&zpow, eq.d(), bm)?;
        }
        let composed = eval_mod(a, &zpow, bm)?;
        let g = poly_gcd(&composed, bm).unwrap_or_else(|_| bm.monic());
        if !g.is_constant() {
            return Ok(Outcome::new(
                Status::Violated,
                format!("gcd(Bm, A(z^(d^{t}))) = {g}"),
            ));
        }
    }
    Ok(if bounded {
        Outcome::new(
            Status::Satisfied,
            format!("coprime for t <= {last}; larger t excluded by root moduli"),
        )
    } else {
        Outcome::new(
            Status::Inconclusive,
            format!("coprime for t <= {last}; unit-modulus roots leave larger t open"),
        )
    })
}

fn condition_b(evidence: &[FactorEvidence]) -> Outcome {
    let mut notes = Vec::new();
    let mut status = Status::Satisfied;
    for e in evidence {
        notes.push(format!(
            "max |root| of {} = {:.12}",
            e.factor, e.max_root_modulus
        ));
        if e.max_root_modulus < 1.0 - UNIT_MARGIN {
            status = Status::Violated;
        } else if e.max_root_modulus <= 1.0 + UNIT_MARGIN && status == Status::Satisfied {
            status = Status::Inconclusive;
        }
    }
    Outcome::new(status, notes.join("; "))
}

fn condition_c(eq: &MahlerEquation, k: i64) -> Outcome {
    let bound = eq.d() as i64 * k + eq.r_a();
    match eq.r_c() {
        Degree::Finite(rc) if rc > bound => Outcome::new(
            Status::Satisfied,
            format!("deg C = {rc} > dK + deg A = {bound}"),
        ),
        Degree::Finite(rc) => Outcome::new(
            Status::Violated,
            format!("deg C = {rc} <= dK + deg A = {bound}"),
        ),
        Degree::MinusInfinity => Outcome::new(Status::Violated, "C = 0"),
    }
}

fn condition_d(
    eq: &MahlerEquation,
    evidence: &mut [FactorEvidence],
    tolerance: f64,
) -> Result<Outcome> {
    if eq.c().is_zero() {
        return Ok(Outcome::new(Status::Violated, "C = 0"));
    }
    let mut status = Status::Satisfied;
    let mut notes = Vec::new();
    for e in evidence.iter_mut() {
        let roots = complex_roots(&e.factor);
        let Some(z0) = roots
            .iter()
            .cloned()
            .max_by(|x, y| {
                x.norm()
                    .partial_cmp(&y.norm())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .filter(|z| z.norm() > 1.0 + UNIT_MARGIN)
        else {
            notes.push(format!("{}: no root outside the unit circle", e.factor));
            status = Status::Inconclusive;
            continue;
        };
        let Some(u) = series_start(eq, &e.factor, z0)? else {
            notes.push(format!("{}: could not bound the vanishing terms", e.factor));
            status = Status::Inconclusive;
            continue;
        };
        e.series_start = Some(u);
        let sum = sum_series(eq, z0, u);
        e.terms = sum.terms;
        e.series_sum = Some([sum.value.re, sum.value.im]);
        e.tail_bound = sum.tail;
        let Some(tail) = sum.tail else {
            notes.push(format!(
                "{}: terms did not settle into a shrinking tail",
                e.factor
            ));
            status = Status::Inconclusive;
            continue;
        };
        if sum.positive {
            notes.push(format!("{}: monotone sum of positive terms", e.factor));
        } else if sum.value.norm() > tail + tolerance * sum.abs_total {
            notes.push(format!(
                "{}: |sum| = {:.6e} exceeds tail bound {:.3e}",
                e.factor,
                sum.value.norm(),
                tail
            ));
        } else {
            notes.push(format!(
                "{}: zero not excluded at working precision",
                e.factor
            ));
            status = Status::Inconclusive;
        }
    }
    Ok(Outcome::new(status, notes.join("; ")))
}

/// Least `u` such that `B(z0^{d^{t+1}}) C(z0^{d^t}) != 0` for all `t >= u`,
/// decided exactly through divisibility by the irreducible factor.
fn series_start(eq: &MahlerEquation, factor: &Polynomial, z0: Complex64) -> Result<Option<u32>> {
    let reach = root_bound(eq.b()).max(root_bound(eq.c())).ln() + UNIT_MARGIN;
    let l = z0.norm().ln();
    let d = eq.d() as f64;
    let mut window = 0u32;
    while l * d.powi(window as i32) <= reach {
        window += 1;
        if window > MAX_POWER_STEPS {
            return Ok(None);
        }
    }
    let mut start = 0u32;
    let mut zpow = Polynomial::z().rem(factor)?;
    let mut powers = vec![zpow.clone()];
    for _ in 0..=window + 1 {
        zpow = pow_mod(&zpow, eq.d(), factor)?;
        powers.push(zpow.clone());
    }
    for t in 0..=window {
        let b_zero = eval_mod(eq.b(), &powers[t as usize + 1], factor)?.is_zero();
        let c_zero = eval_mod(eq.c(), &powers[t as usize], factor)?.is_zero();
        if b_zero || c_zero {
            start = t + 1;
        }
    }
    Ok(Some(start))
}

/// Cauchy bound on the root moduli, at least one.
fn root_bound(p: &Polynomial) -> f64 {
    let Some(lc) = p.leading_coeff() else {
        return 1.0;
    };
    let lc = crate::algebra::to_f64(lc).abs();
    let n = p.deg_or_zero();
    1.0 + p.coeffs()[..n]
        .iter()
        .map(|c| crate::algebra::to_f64(c).abs() / lc)
        .fold(0.0, f64::max)
}

struct SeriesSum {
    value: Complex64,
    abs_total: f64,
    tail: Option<f64>,
    positive: bool,
    terms: usize,
}

/// `sum_{k >= u} prod_{t=u}^{k-1} C(w_{t+1}) A(w_t) / (C(w_t) B(w_{t+1}))`
/// with `w_t = z0^{d^t}`, evaluated in the log domain.
fn sum_series(eq: &MahlerEquation, z0: Complex64, u: u32) -> SeriesSum {
    let d = eq.d() as f64;
    let log_z0 = z0.ln();
    let log_w = |t: u32| log_z0 * d.powi(t as i32);
    let mut log_term = Complex64::new(0.0, 0.0);
    let mut value = Complex64::new(1.0, 0.0);
    let mut abs_total = 1.0;
    let mut positive = z0.im.abs() <= UNIT_MARGIN * z0.norm();
    let mut terms = 1;
    let mut tail = None;
    for t in u..u + 200 {
        let parts = [
            log_eval(eq.c(), log_w(t + 1)),
            log_eval(eq.a(), log_w(t)),
            log_eval(eq.c(), log_w(t)),
            log_eval(eq.b(), log_w(t + 1)),
        ];
        let [Some(c1), Some(a0), Some(c0), Some(b1)] = parts else {
            break;
        };
        let log_ratio = c1 + a0 - c0 - b1;
        log_term += log_ratio;
        if log_term.re < -700.0 {
            tail = Some(0.0);
            break;
        }
        let term = log_term.exp();
        if term.re <= 0.0 || term.im.abs() > 1e-9 * term.norm() {
            positive = false;
        }
        value += term;
        abs_total += term.norm();
        terms += 1;
        let ratio = log_ratio.re.exp();
        if ratio < 0.5 && term.norm() < 1e-18 * abs_total {
            tail = Some(term.norm() * ratio / (1.0 - ratio));
            break;
        }
    }
    SeriesSum {
        value,
        abs_total,
        tail,
        positive: positive && tail.is_some(),
        terms,
    }
}

fn pow_mod(base: &Polynomial, e: usize, m: &Polynomial) -> Result<Polynomial> {
    let mut result = Polynomial::one().rem(m)?;
    let mut b = base.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            result = (&result * &b).rem(m)?;
        }
        b = (&b * &b).rem(m)?;
        e >>= 1;
    }
    Ok(result)
}

/// `p(x) mod m` by Horner's rule.
fn eval_mod(p: &Polynomial, x: &Polynomial, m: &Polynomial) -> Result<Polynomial> {
    let mut acc = Polynomial::zero();
    for c in p.coeffs().iter().rev() {
        acc = (&(&acc * x) + &Polynomial::constant(c.clone())).rem(m)?;
    }
    Ok(acc)
}
