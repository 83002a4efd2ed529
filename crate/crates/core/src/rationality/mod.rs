//! Tools for deciding when the irrationality exponent is rational: the
//! factor split of `B`, two transforms that keep the exponent unchanged,
//! cyclotomic combinatorics, the λ-reduction search and the condition report.

pub mod conditions;
pub mod cyclotomic;
pub mod factor;
pub mod lambda;
pub mod roots;
pub mod transforms;

use std::sync::Arc;

use num_integer::Integer;
use serde::Serialize;

use crate::algebra::{poly_gcd, Polynomial, Rational};
use crate::cfrac::{cf_expand, CfConfig};
use crate::error::Result;
use crate::gaps::{classify, enumerate_gaps, iterate_primitive};
use crate::series::{expand_shared, LaurentSeries, MahlerEquation, Seeds};

pub use conditions::{root_conditions_report, Outcome, RootConditionsReport, Status};
pub use cyclotomic::{
    cyclotomic_chain_witness, cyclotomic_poly, divisors, phi_compose_factorization, r_s_split, rad,
    sigma_multiplicity, totient,
};
pub use lambda::{lambda_identity_holds, lambda_reduction_search};
pub use transforms::{common_cyclotomic_indices, strip_common_cyclotomic, strip_z_powers};

/// `B = scalar * b0 * bm * bc` with `b0` a power of `z`, `bc` a product of
/// cyclotomic polynomials and `bm` the rest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorSplit {
    pub b0: Polynomial,
    pub bm: Polynomial,
    pub bc: Polynomial,
    #[serde(with = "crate::algebra::serde_text")]
    pub scalar: Rational,
    /// `(n, multiplicity)` for each `Φ_n` in `bc`.
    pub cyclotomic: Vec<(u64, u32)>,
}

impl FactorSplit {
    pub fn product(&self) -> Polynomial {
        (&(&self.b0 * &self.bm) * &self.bc).scale(&self.scalar)
    }
}

pub fn split_factors(b: &Polynomial) -> Result<FactorSplit> {
    let v = b.valuation().ok_or(crate::Error::ZeroPolynomial)?;
    let b0 = Polynomial::monomial(Rational::from_integer(1.into()), v);
    let mut rest = b.shift_down(v);
    let mut bc = Polynomial::one();
    let mut cyclotomic = Vec::new();
    for n in cyclotomic::cyclotomic_candidates(rest.deg_or_zero() as u64) {
        if rest.is_constant() {
            break;
        }
        let phi = cyclotomic_poly(n);
        if phi.deg_or_zero() > rest.deg_or_zero() {
            continue;
        }
        let m = sigma_multiplicity(&phi, &rest)?;
        if m > 0 {
            let power = phi.pow(m);
            rest = rest.div_exact(&power)?;
            bc = &bc * &power;
            cyclotomic.push((n, m));
        }
    }
    let bm = rest.clear_denominators()?;
    let scalar = rest.leading_coeff().expect("nonzero") / bm.leading_coeff().expect("nonzero");
    Ok(FactorSplit {
        b0,
        bm,
        bc,
        scalar,
        cyclotomic,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CertifiedRational,
    ConditionsMet,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Transform {
    /// `g = z^k f`.
    ZPowers { k: i64 },
    /// `g = Φ_n f`.
    Cyclotomic { n: u64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct LambdaPair {
    /// Which equation the pair solves: "original" or "transformed".
    pub equation: &'static str,
    pub lambda1: Polynomial,
    pub lambda2: Polynomial,
}

/// Observed coprimality of `A p(z^d) + C q(z^d)` with `Bc` along the
/// primitive sequences of the transformed equation.
#[derive(Clone, Debug, Serialize)]
pub struct CoprimalityCheck {
    pub outcome: Outcome,
    pub sequences: usize,
    pub steps_checked: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RationalityReport {
    pub transforms: Vec<Transform>,
    pub transformed: TransformedEquation,
    pub split: FactorSplit,
    pub lambda: Option<LambdaPair>,
    pub root_conditions: RootConditionsReport,
    pub coprimality: CoprimalityCheck,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransformedEquation {
    pub d: usize,
    pub a: Polynomial,
    pub b: Polynomial,
    pub c: Polynomial,
    pub degree: i64,
}

#[derive(Clone, Copy, Debug)]
pub struct RationalityConfig {
    pub lambda_degree_bound: usize,
    pub max_cyclotomic_strips: usize,
    pub digits: u32,
    /// Primitive gaps with `u` up to this value feed the coprimality check.
    pub coprimality_horizon: i64,
    pub coprimality_steps: usize,
    pub coprimality_max_degree: i64,
    pub max_sequences: usize,
}

impl Default for RationalityConfig {
    fn default() -> Self {
        RationalityConfig {
            lambda_degree_bound: 4,
            max_cyclotomic_strips: 8,
            digits: 30,
            coprimality_horizon: 24,
            coprimality_steps: 8,
            coprimality_max_degree: 20_000,
            max_sequences: 4,
        }
    }
}

/// `p(z) f(z)` as a truncated series, exact as far as `f` is known.
pub fn multiply_series(series: &LaurentSeries, p: &Polynomial) -> LaurentSeries {
    let e = p.deg_or_zero();
    let f = series.coeffs();
    let coeffs = (0..f.len())
        .map(|j| {
            (0..=e.min(j))
                .map(|s| p.coeff(e - s) * &f[j - s])
                .fold(Rational::from_integer(0.into()), |acc, x| acc + x)
        })
        .collect();
    LaurentSeries::truncated(series.degree() + e as i64, coeffs)
}

/// Expands the solution of `eq` whose leading coefficients agree with
/// `target`, seeding every known head coefficient.
pub fn reexpand(eq: &MahlerEquation, target: &LaurentSeries, n: usize) -> Result<LaurentSeries> {
    let k = target.degree();
    let seeds: Seeds = target
        .coeffs()
        .iter()
        .take(48)
        .enumerate()
        .map(|(j, c)| (j as i64 - k, c.clone()))
        .collect();
    expand_shared(Arc::new(eq.clone()), k, n, &seeds)
}

/// Runs the transforms, the factor split, the λ search, the condition
/// report and the cyclotomic coprimality check, then decides a verdict.
pub fn rationality_verdict(
    eq: &MahlerEquation,
    series: &LaurentSeries,
    config: &RationalityConfig,
) -> Result<RationalityReport> {
    let mut notes = Vec::new();
    let mut transforms = Vec::new();
    let (mut current, shift) = strip_z_powers(eq)?;
    let mut multiplier = Polynomial::monomial(Rational::from_integer(1.into()), shift as usize);
    if shift > 0 {
        transforms.push(Transform::ZPowers { k: shift });
    }
    let mut stuck = false;
    let mut strips = 0;
    loop {
        let common = common_cyclotomic_indices(&current);
        if common.is_empty() {
            break;
        }
        let d = current.d() as u64;
        let Some(&n) = common.iter().find(|&&n| n.gcd(&d) == 1) else {
            notes.push(format!(
                "common cyclotomic factors {common:?} of A and B share a prime with d and cannot be stripped"
            ));
            stuck = true;
            break;
        };
        if strips >= config.max_cyclotomic_strips {
            notes.push("cyclotomic strip budget exhausted".into());
            stuck = true;
            break;
        }
        current = strip_common_cyclotomic(&current, n)?;
        multiplier = &multiplier * &cyclotomic_poly(n);
        transforms.push(Transform::Cyclotomic { n });
        strips += 1;
    }
    let degree = series.degree() + multiplier.deg_or_zero() as i64;
    let split = split_factors(current.b())?;

    let lambda = find_lambda(eq, &current, config.lambda_degree_bound, &mut notes);

    let root_conditions = match root_conditions_report(&current, &split.bm, degree, config.digits) {
        Ok(r) => r,
        Err(e) => {
            notes.push(format!("condition report failed: {e}"));
            let o = Outcome {
                status: Status::Inconclusive,
                detail: e.to_string(),
            };
            RootConditionsReport {
                a: o.clone(),
                b: o.clone(),
                c: o.clone(),
                d: o,
                factors: Vec::new(),
            }
        }
    };

    let coprimality = if split.bc.is_constant() {
        CoprimalityCheck {
            outcome: Outcome {
                status: Status::Vacuous,
                detail: "no cyclotomic part".into(),
            },
            sequences: 0,
            steps_checked: 0,
        }
    } else {
        check_coprimality(&current, series, &multiplier, &split.bc, config).unwrap_or_else(|e| {
            CoprimalityCheck {
                outcome: Outcome {
                    status: Status::Inconclusive,
                    detail: format!("could not follow the primitive sequences: {e}"),
                },
                sequences: 0,
                steps_checked: 0,
            }
        })
    };

    let verdict = if lambda.is_some() {
        Verdict::CertifiedRational
    } else if !stuck && root_conditions.all_hold() && coprimality.outcome.holds() {
        Verdict::ConditionsMet
    } else {
        Verdict::Inconclusive
    };
    Ok(RationalityReport {
        transforms,
        transformed: TransformedEquation {
            d: current.d(),
            a: current.a().clone(),
            b: current.b().clone(),
            c: current.c().clone(),
            degree,
        },
        split,
        lambda,
        root_conditions,
        coprimality,
        verdict,
        notes,
    })
}

fn find_lambda(
    original: &MahlerEquation,
    transformed: &MahlerEquation,
    bound: usize,
    notes: &mut Vec<String>,
) -> Option<LambdaPair> {
    for (label, eq) in [("original", original), ("transformed", transformed)] {
        match lambda_reduction_search(eq, bound) {
            Ok(Some((l1, l2))) if lambda_identity_holds(eq, &l1, &l2) => {
                return Some(LambdaPair {
                    equation: label,
                    lambda1: l1,
                    lambda2: l2,
                })
            }
            Ok(_) => {}
            Err(e) => notes.push(format!("λ search on the {label} equation failed: {e}")),
        }
    }
    None
}

fn check_coprimality(
    eq: &MahlerEquation,
    series: &LaurentSeries,
    multiplier: &Polynomial,
    bc: &Polynomial,
    config: &RationalityConfig,
) -> Result<CoprimalityCheck> {
    let mut g = if multiplier.is_one() && series.equation().is_some_and(|e| **e == *eq) {
        series.clone()
    } else {
        let product = multiply_series(series, multiplier);
        reexpand(eq, &product, product.known_count())?
    };
    let cf = cf_expand(&mut g, config.coprimality_horizon + 1, &CfConfig::default())?;
    let records = classify(enumerate_gaps(&cf, config.coprimality_horizon)?, eq)?;
    let d = eq.d();
    let mut sequences = 0;
    let mut checked = 0;
    for rec in records
        .iter()
        .filter(|r| r.primitive)
        .take(config.max_sequences)
    {
        sequences += 1;
        let seq = iterate_primitive(
            rec,
            eq,
            config.coprimality_steps,
            config.coprimality_max_degree,
        )?;
        for (n, step) in seq.steps.iter().enumerate() {
            let pd = step.convergent.p.compose_power(d).rem(bc)?;
            let qd = step.convergent.q.compose_power(d).rem(bc)?;
            let numer = &(eq.a() * &pd) + &(eq.c() * &qd);
            let common = poly_gcd(&numer, bc)?;
            checked += 1;
            if !common.is_constant() {
                return Ok(CoprimalityCheck {
                    outcome: Outcome {
                        status: Status::Violated,
                        detail: format!(
                            "successor numerator shares {common} with Bc at step {n} of the sequence from u = {}",
                            rec.gap.u
                        ),
                    },
                    sequences,
                    steps_checked: checked,
                });
            }
        }
    }
    let outcome = if checked == 0 {
        Outcome {
            status: Status::Inconclusive,
            detail: "no primitive sequence within the horizon".into(),
        }
    } else {
        Outcome {
            status: Status::Satisfied,
            detail: format!("coprime at all {checked} computed steps (evidence, not proof)"),
        }
    };
    Ok(CoprimalityCheck {
        outcome,
        sequences,
        steps_checked: checked,
    })
}
