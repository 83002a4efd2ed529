//! Assembly of `μ(f(b)) = 1 + sup limsup v_n / u_n` over the primitive gap
//! sequences that can contribute.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::algebra::{serde_text, Rational};
use crate::cfrac::{cf_expand, CfConfig};
use crate::error::{Error, Result};
use crate::gaps::{
    classify, contribution_bounds, enumerate_gaps, iterate_primitive, primitive_size_bound,
    search_horizon, Gap, GapRecord, PrimitiveSequence, DEFAULT_MAX_SEQUENCE_DEGREE,
};
use crate::rationality::{rationality_verdict, RationalityConfig, RationalityReport, Verdict};
use crate::series::{LaurentSeries, MahlerEquation};

/// Smallest `(n0, P)`, ordered by `n0` then `P`, with
/// `r[n0 + k] == r[n0 + k + P]` for every `k < window`.
pub fn detect_period(r_g: &[i64], window: usize) -> Option<(usize, usize)> {
    let window = window.max(1);
    let len = r_g.len();
    for n0 in 0..len {
        let mut p = 1;
        while n0 + window + p <= len {
            if (0..window).all(|k| r_g[n0 + k] == r_g[n0 + k + p]) {
                return Some((n0, p));
            }
            p += 1;
        }
    }
    None
}

/// True when the period holds for every known entry from `n0` on.
pub fn period_holds_on_tail(r_g: &[i64], n0: usize, p: usize) -> bool {
    (n0..r_g.len().saturating_sub(p)).all(|n| r_g[n] == r_g[n + p])
}

/// Limit of `v_n / u_n` along the superstep orbit starting at `(u0, v0)`,
/// where one superstep applies the `P` steps with the given `r_g` block.
pub fn periodic_limit(
    u0: i64,
    v0: i64,
    r_g_window: &[i64],
    eq: &MahlerEquation,
) -> Result<Rational> {
    periodic_limit_params(u0, v0, r_g_window, eq.d() as u64, eq.r_a(), eq.r_b())
}

/// [`periodic_limit`] with the equation reduced to `(d, r_a, r_b)`.
///
/// With `D = d^P` and `s = sum_k d^(P-1-k) r_g[k]` one superstep maps
/// `u -> D u + r_u` and `v -> D v - r_v`, where
/// `r_u = r_b (D-1)/(d-1) - s` and `r_v = r_a (D-1)/(d-1) - s`, so the
/// limit is `(v0 - r_v/(D-1)) / (u0 + r_u/(D-1))`.
pub fn periodic_limit_params(
    u0: i64,
    v0: i64,
    r_g_window: &[i64],
    d: u64,
    r_a: i64,
    r_b: i64,
) -> Result<Rational> {
    if r_g_window.is_empty() {
        return Err(Error::Precondition("empty period".into()));
    }
    if d < 2 {
        return Err(Error::Precondition("d must be at least 2".into()));
    }
    let d_big = BigInt::from(d);
    let p = r_g_window.len();
    let big_d = num_traits::pow(d_big.clone(), p);
    let geometric = (&big_d - 1u32) / (&d_big - 1u32);
    let s = r_g_window
        .iter()
        .fold(BigInt::zero(), |acc, &r| acc * &d_big + BigInt::from(r));
    let r_u = BigInt::from(r_b) * &geometric - &s;
    let r_v = BigInt::from(r_a) * &geometric - &s;
    let dm1 = &big_d - 1u32;
    let numer = BigInt::from(v0) * &dm1 - r_v;
    let denom = BigInt::from(u0) * &dm1 + r_u;
    if denom.is_zero() {
        return Err(Error::DegenerateOrbit);
    }
    Ok(Rational::new(numer, denom))
}

/// limsup of `v_n / u_n` for a sequence periodic from `n0` with period `p`:
/// the largest superstep limit over the `p` starting phases.
fn periodic_limsup(
    seq: &PrimitiveSequence,
    r_g: &[i64],
    n0: usize,
    p: usize,
    eq: &MahlerEquation,
) -> Result<Rational> {
    let mut best: Option<Rational> = None;
    for j in 0..p {
        let step = &seq.steps[n0 + j];
        let block: Vec<i64> = (0..p).map(|k| r_g[n0 + (j + k) % p]).collect();
        let limit = periodic_limit(step.u, step.v, &block, eq)?;
        if best.as_ref().is_none_or(|b| &limit > b) {
            best = Some(limit);
        }
    }
    Ok(best.expect("period is positive"))
}

/// Outcome of the test `A(b^{d^t}) B(b^{d^t}) != 0` for all `t >= 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Admissibility {
    pub admissible: bool,
    /// Largest `t` that needed an explicit test; beyond it `|b|^{d^t}`
    /// exceeds every root modulus of `A B`.
    pub tested_through: Option<u32>,
    pub failing_t: Option<u32>,
    #[serde(with = "serde_text")]
    pub root_bound: Rational,
}

pub fn check_b_admissible(eq: &MahlerEquation, b: &BigInt) -> Admissibility {
    let ab = eq.a() * eq.b();
    let lc = ab.leading_coeff().expect("A and B are nonzero").abs();
    let n = ab.deg_or_zero();
    let bound = Rational::one()
        + ab.coeffs()[..n]
            .iter()
            .map(|c| c.abs() / &lc)
            .max()
            .unwrap_or_else(Rational::zero);
    let d = eq.d();
    let mut tested_through = None;
    let mut x = b.clone();
    let mut t = 0u32;
    while Rational::from_integer(x.abs()) <= bound {
        tested_through = Some(t);
        if ab.eval_bigint(&x).is_zero() {
            return Admissibility {
                admissible: false,
                tested_through,
                failing_t: Some(t),
                root_bound: bound,
            };
        }
        x = num_traits::pow(x, d);
        t += 1;
    }
    Admissibility {
        admissible: true,
        tested_through,
        failing_t: None,
        root_bound: bound,
    }
}

#[derive(Clone, Debug)]
pub struct ExponentConfig {
    /// Denominator degree up to which a first big gap is searched for.
    pub horizon: i64,
    /// Successor steps per primitive sequence.
    pub steps: usize,
    /// Agreement length used by period detection.
    pub window: usize,
    pub max_sequence_degree: i64,
    pub cf: CfConfig,
    /// Run the rationality analysis that can upgrade a periodic result to exact.
    pub rationality: Option<RationalityConfig>,
}

impl Default for ExponentConfig {
    fn default() -> Self {
        ExponentConfig {
            horizon: 200,
            steps: 24,
            window: 8,
            max_sequence_degree: DEFAULT_MAX_SEQUENCE_DEGREE,
            cf: CfConfig::default(),
            rationality: Some(RationalityConfig::default()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentKind {
    Exact,
    Enclosure,
    Conjectural,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MuValue {
    Point(Rational),
    Interval { lo: Rational, hi: Rational },
}

impl Serialize for MuValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MuValue::Point(r) => s.serialize_str(&crate::algebra::format_rational(r)),
            MuValue::Interval { lo, hi } => {
                let mut m = s.serialize_map(Some(2))?;
                m.serialize_entry("lo", &crate::algebra::format_rational(lo))?;
                m.serialize_entry("hi", &crate::algebra::format_rational(hi))?;
                m.end()
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrailEntry {
    pub n: usize,
    pub u: i64,
    pub v: i64,
    pub r_g: Option<i64>,
    /// `r_g` came from the detected period rather than a computed successor;
    /// on entries past the computed ones `u` and `v` did too.
    pub extrapolated: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SequenceReport {
    pub start: Gap,
    pub trail: Vec<TrailEntry>,
    pub r_g: Vec<i64>,
    /// `(n0, P)` when detected and consistent with every computed value.
    pub period: Option<(usize, usize)>,
    #[serde(with = "serde_text::option")]
    pub limit: Option<Rational>,
    #[serde(with = "serde_text")]
    pub lower: Rational,
    #[serde(with = "serde_text::option")]
    pub upper: Option<Rational>,
    pub hit_degree_limit: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapSummary {
    pub u: i64,
    pub v: i64,
    pub big: bool,
    pub primitive: bool,
    pub successor_of: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub gaps: Vec<GapSummary>,
    pub horizon: i64,
    pub first_big: Option<Gap>,
    /// The big gap whose lower bound fixes the search range.
    pub anchor: Option<Gap>,
    pub u_max: Option<i64>,
    #[serde(with = "serde_text")]
    pub primitive_size_bound: Rational,
    pub sequences: Vec<SequenceReport>,
    pub admissibility: Admissibility,
    /// The rationality analysis certified the detected periods.
    pub periodicity_certified: bool,
    pub rationality: Option<RationalityReport>,
    pub assumptions: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExponentResult {
    pub kind: ExponentKind,
    pub mu: MuValue,
    pub certificate: Certificate,
}

fn summarize(records: &[GapRecord]) -> Vec<GapSummary> {
    records
        .iter()
        .map(|r| GapSummary {
            u: r.gap.u,
            v: r.gap.v,
            big: r.big,
            primitive: r.primitive,
            successor_of: r.successor_of,
        })
        .collect()
}

/// Upper end of the enclosure when no big gap exists up to `h`.
pub fn no_big_gap_bound(h: i64, eq: &MahlerEquation) -> Result<Rational> {
    let dm1 = eq.d() as i64 - 1;
    if h * dm1 <= eq.r_a() {
        return Err(Error::Precondition(format!(
            "horizon {h} too small: need H (d - 1) > deg A"
        )));
    }
    let ra = Rational::new(eq.r_a().into(), dm1.into());
    let rb = Rational::new(eq.r_b().into(), dm1.into());
    let h = Rational::from_integer(h.into());
    Ok(Rational::one() + (&h + primitive_size_bound(eq) + rb) / (h - ra))
}

pub fn compute_mu(
    eq: &MahlerEquation,
    series: &mut LaurentSeries,
    b: &BigInt,
    config: &ExponentConfig,
) -> Result<ExponentResult> {
    if b.abs() < BigInt::from(2) {
        return Err(Error::Precondition("|b| must be at least 2".into()));
    }
    let admissibility = check_b_admissible(eq, b);
    let mut warnings = Vec::new();
    if !admissibility.admissible {
        warnings.push(format!(
            "A(b^(d^t)) B(b^(d^t)) vanishes at t = {}: hypotheses unverified",
            admissibility.failing_t.unwrap_or(0)
        ));
    }
    let assumptions = vec!["f(b) is irrational".to_string()];
    let two = Rational::from_integer(2.into());
    let h = config.horizon;
    let cf = cf_expand(series, h + 1, &config.cf)?;
    if cf.terminated {
        return Err(Error::Inconsistent(
            "the continued fraction terminates, so f is rational".into(),
        ));
    }
    let growth = series.growth_estimate();
    if growth >= crate::algebra::to_f64(&Rational::from_integer(b.abs())) {
        warnings.push(format!(
            "coefficient growth {growth:.3} suggests b may lie outside the domain of convergence"
        ));
    }
    let mut records = classify(enumerate_gaps(&cf, h)?, eq)?;
    let size_bound = primitive_size_bound(eq);
    let mut certificate = Certificate {
        gaps: summarize(&records),
        horizon: h,
        first_big: None,
        anchor: None,
        u_max: None,
        primitive_size_bound: size_bound,
        sequences: Vec::new(),
        admissibility,
        periodicity_certified: false,
        rationality: None,
        assumptions,
        warnings,
    };
    let Some(first_big) = records.iter().find(|r| r.big).map(|r| r.gap) else {
        let hi = no_big_gap_bound(h, eq)?;
        return Ok(ExponentResult {
            kind: ExponentKind::Enclosure,
            mu: MuValue::Interval { lo: two, hi },
            certificate,
        });
    };
    certificate.first_big = Some(first_big);
    let anchor = records
        .iter()
        .filter(|r| r.big)
        .map(|r| r.gap)
        .find(|g| g.u != 0 || eq.r_b() != 0)
        .ok_or(Error::LowerBoundUndefined)?;
    certificate.anchor = Some(anchor);
    let u_max = search_horizon(anchor, eq)?.max(anchor.u);
    certificate.u_max = Some(u_max);
    if u_max > h {
        let cf = cf_expand(series, u_max + 1, &config.cf)?;
        records = classify(enumerate_gaps(&cf, u_max)?, eq)?;
        certificate.gaps = summarize(&records);
    }
    let mut contributors: Vec<&GapRecord> = records
        .iter()
        .filter(|r| r.gap.u <= u_max && (r.primitive || r.gap == first_big || r.gap == anchor))
        .collect();
    contributors.dedup_by_key(|r| r.gap);

    let mut all_periodic = true;
    for rec in contributors {
        let report = sequence_report(rec, eq, config)?;
        all_periodic &= report.limit.is_some();
        certificate.sequences.push(report);
    }

    if all_periodic {
        let best = certificate
            .sequences
            .iter()
            .filter_map(|s| s.limit.clone())
            .max()
            .expect("at least one contributing sequence");
        let mu = (Rational::one() + best).max(two);
        if let Some(rc) = &config.rationality {
            match rationality_verdict(eq, series, rc) {
                Ok(report) => {
                    certificate.periodicity_certified = matches!(
                        report.verdict,
                        Verdict::CertifiedRational | Verdict::ConditionsMet
                    );
                    certificate.rationality = Some(report);
                }
                Err(e) => certificate
                    .warnings
                    .push(format!("rationality analysis failed: {e}")),
            }
        }
        let kind = if certificate.periodicity_certified {
            ExponentKind::Exact
        } else {
            certificate
                .warnings
                .push("periods detected empirically; exponent not certified".into());
            ExponentKind::Conjectural
        };
        return Ok(ExponentResult {
            kind,
            mu: MuValue::Point(mu),
            certificate,
        });
    }

    let mut lo = two.clone();
    let mut hi = two.clone();
    for s in &certificate.sequences {
        let (l, u) = match &s.limit {
            Some(x) => (x.clone(), Some(x.clone())),
            None => (s.lower.clone(), s.upper.clone()),
        };
        let u = u.ok_or_else(|| {
            Error::PrecisionExhausted(format!(
                "no upper bound for the sequence starting at u = {}",
                s.start.u
            ))
        })?;
        lo = lo.max(Rational::one() + l);
        hi = hi.max(Rational::one() + u);
    }
    Ok(ExponentResult {
        kind: ExponentKind::Enclosure,
        mu: MuValue::Interval { lo, hi },
        certificate,
    })
}

fn sequence_report(
    rec: &GapRecord,
    eq: &MahlerEquation,
    config: &ExponentConfig,
) -> Result<SequenceReport> {
    let seq = iterate_primitive(rec, eq, config.steps, config.max_sequence_degree)?;
    let r_g = seq.r_g();
    let period =
        detect_period(&r_g, config.window).filter(|&(n0, p)| period_holds_on_tail(&r_g, n0, p));
    let limit = match period {
        Some((n0, p)) => Some(periodic_limsup(&seq, &r_g, n0, p, eq)?),
        None => None,
    };
    let mut lower: Option<Rational> = None;
    let mut upper: Option<Rational> = None;
    for step in &seq.steps {
        let Ok((l, u)) = contribution_bounds(Gap::new(step.u, step.v), eq) else {
            continue;
        };
        if lower.as_ref().is_none_or(|x| &l > x) {
            lower = Some(l);
        }
        if let Some(u) = u {
            if upper.as_ref().is_none_or(|x| &u < x) {
                upper = Some(u);
            }
        }
    }
    let mut trail: Vec<TrailEntry> = seq
        .steps
        .iter()
        .enumerate()
        .map(|(n, s)| TrailEntry {
            n,
            u: s.u,
            v: s.v,
            r_g: s.r_g,
            extrapolated: false,
        })
        .collect();
    if let Some((n0, p)) = period {
        extrapolate(&mut trail, &r_g, n0, p, eq, config.steps);
    }
    Ok(SequenceReport {
        start: rec.gap,
        trail,
        r_g,
        period,
        limit,
        lower: lower.unwrap_or_else(Rational::one),
        upper,
        hit_degree_limit: seq.hit_degree_limit,
    })
}

/// Continues the trail to `steps` entries with `r_g` repeating the period.
fn extrapolate(
    trail: &mut Vec<TrailEntry>,
    r_g: &[i64],
    n0: usize,
    p: usize,
    eq: &MahlerEquation,
    steps: usize,
) {
    let d = eq.d() as i64;
    let period_value = |n: usize| r_g[n0 + (n - n0) % p];
    while trail.len() <= steps {
        let last = trail.last_mut().expect("nonempty");
        let n = last.n;
        let g = period_value(n);
        if last.r_g.is_none() {
            last.r_g = Some(g);
            last.extrapolated = true;
        }
        let next_u = d
            .checked_mul(last.u)
            .and_then(|x| x.checked_add(eq.r_b() - g));
        let next_v = d
            .checked_mul(last.v)
            .and_then(|x| x.checked_add(g - eq.r_a()));
        let (Some(u), Some(v)) = (next_u, next_v) else {
            break;
        };
        trail.push(TrailEntry {
            n: n + 1,
            u,
            v,
            r_g: None,
            extrapolated: true,
        });
    }
}
