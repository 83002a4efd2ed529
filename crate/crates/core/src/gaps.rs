//! Gaps between consecutive convergent denominator degrees.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::algebra::{poly_gcd, Polynomial, Rational};
use crate::cfrac::{CFExpansion, Convergent};
use crate::error::{Error, Result};
use crate::series::MahlerEquation;

/// Consecutive elements `u < v` of the set of denominator degrees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Gap {
    pub u: i64,
    pub v: i64,
}

impl Gap {
    pub fn new(u: i64, v: i64) -> Self {
        Gap { u, v }
    }

    pub fn size(&self) -> i64 {
        self.v - self.u
    }

    /// `(v - u)(d - 1) > r_a + r_b`.
    pub fn is_big(&self, eq: &MahlerEquation) -> bool {
        self.size() * (eq.d() as i64 - 1) > eq.r_a() + eq.r_b()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GapRecord {
    pub gap: Gap,
    /// The convergent whose denominator has degree `u`.
    pub convergent: Convergent,
    pub big: bool,
    pub primitive: bool,
    /// Index of the earlier record whose direct successor this gap is.
    pub successor_of: Option<usize>,
}

/// Result of one successor step.
#[derive(Clone, Debug)]
pub struct Successor {
    pub convergent: Convergent,
    pub gap: Gap,
    pub r_g: i64,
}

/// Gaps `[d_k, d_{k+1}]` with `d_k <= up_to_u`, flags unset.
pub fn enumerate_gaps(cf: &CFExpansion, up_to_u: i64) -> Result<Vec<GapRecord>> {
    let covered = cf.terminated || cf.degrees.last().is_some_and(|&d| d > up_to_u);
    if !covered {
        return Err(Error::InsufficientExpansion(format!(
            "denominator degrees are certified only through {}, gaps requested up to u = {up_to_u}",
            cf.degrees.last().copied().unwrap_or(-1)
        )));
    }
    let mut out = Vec::new();
    for k in 0..cf.certified_count {
        let u = cf.degrees[k];
        if u > up_to_u {
            break;
        }
        let Some(&v) = cf.degrees.get(k + 1) else {
            break;
        };
        out.push(GapRecord {
            gap: Gap::new(u, v),
            convergent: cf.convergents[k].clone(),
            big: false,
            primitive: false,
            successor_of: None,
        });
    }
    Ok(out)
}

/// The simplified fraction `(A p(z^d) + C q(z^d)) / (B q(z^d))` and its gap.
pub fn direct_successor(conv: &Convergent, gap: Gap, eq: &MahlerEquation) -> Result<Successor> {
    let d = eq.d();
    let pd = conv.p.compose_power(d);
    let qd = conv.q.compose_power(d);
    let numer = &(eq.a() * &pd) + &(eq.c() * &qd);
    let denom = eq.b() * &qd;
    let g = successor_gcd(&numer, &qd, eq)?;
    let r_g = g.deg_or_zero() as i64;
    let (p, q) = if r_g == 0 {
        (numer, denom)
    } else {
        (numer.div_exact(&g)?, denom.div_exact(&g)?)
    };
    let next = Gap::new(
        d as i64 * gap.u + eq.r_b() - r_g,
        d as i64 * gap.v - eq.r_a() + r_g,
    );
    Ok(Successor {
        convergent: Convergent::new(None, p, q),
        gap: next,
        r_g,
    })
}

/// `gcd(N, B q(z^d))` via the small multiple `H = B gcd(A, q(z^d))` of it:
/// the gcd divides `gcd(N, B) gcd(N, q(z^d))`, and the second factor equals
/// `gcd(A, q(z^d))` because `p` and `q` are coprime.
fn successor_gcd(numer: &Polynomial, qd: &Polynomial, eq: &MahlerEquation) -> Result<Polynomial> {
    let a_part = if eq.a().is_constant() {
        Polynomial::one()
    } else {
        poly_gcd(eq.a(), &qd.rem(eq.a())?)?
    };
    let h = eq.b() * &a_part;
    if h.is_constant() {
        return Ok(Polynomial::one());
    }
    poly_gcd(&numer.rem(&h)?, &h)
}

/// Fills the big and primitive flags.
pub fn classify(mut records: Vec<GapRecord>, eq: &MahlerEquation) -> Result<Vec<GapRecord>> {
    for rec in records.iter_mut() {
        rec.big = rec.gap.is_big(eq);
        rec.primitive = false;
        rec.successor_of = None;
    }
    for i in 0..records.len() {
        if !records[i].big {
            continue;
        }
        let succ = direct_successor(&records[i].convergent, records[i].gap, eq)?;
        if let Some(j) = records
            .iter()
            .position(|r| r.gap == succ.gap && r.convergent.same_fraction(&succ.convergent))
        {
            if records[j].successor_of.is_none() {
                records[j].successor_of = Some(i);
            }
        }
    }
    for rec in records.iter_mut() {
        rec.primitive = rec.big && rec.successor_of.is_none();
    }
    Ok(records)
}

/// One state of a primitive gap sequence.
#[derive(Clone, Debug, Serialize)]
pub struct SequenceStep {
    pub u: i64,
    pub v: i64,
    /// Degree of the gcd removed when stepping to the next state, once known.
    pub r_g: Option<i64>,
    #[serde(skip)]
    pub convergent: Convergent,
}

#[derive(Clone, Debug, Serialize)]
pub struct PrimitiveSequence {
    pub steps: Vec<SequenceStep>,
    /// True when the denominator degree limit stopped the iteration early.
    pub hit_degree_limit: bool,
}

impl PrimitiveSequence {
    /// The known `r_{g,n}` prefix.
    pub fn r_g(&self) -> Vec<i64> {
        self.steps.iter().map_while(|s| s.r_g).collect()
    }

    pub fn gaps(&self) -> Vec<Gap> {
        self.steps.iter().map(|s| Gap::new(s.u, s.v)).collect()
    }
}

/// Default upper limit on successor denominator degrees.
pub const DEFAULT_MAX_SEQUENCE_DEGREE: i64 = 300_000;

/// Iterates direct successors from `rec` for `steps` steps, stopping early
/// once the next denominator would exceed `max_degree`.
pub fn iterate_primitive(
    rec: &GapRecord,
    eq: &MahlerEquation,
    steps: usize,
    max_degree: i64,
) -> Result<PrimitiveSequence> {
    let mut out = PrimitiveSequence {
        steps: vec![SequenceStep {
            u: rec.gap.u,
            v: rec.gap.v,
            r_g: None,
            convergent: rec.convergent.clone(),
        }],
        hit_degree_limit: false,
    };
    for _ in 0..steps {
        let last = out.steps.last_mut().expect("nonempty");
        if eq.d() as i64 * last.u + eq.r_b() > max_degree {
            out.hit_degree_limit = true;
            break;
        }
        let succ = direct_successor(&last.convergent, Gap::new(last.u, last.v), eq)?;
        last.r_g = Some(succ.r_g);
        out.steps.push(SequenceStep {
            u: succ.gap.u,
            v: succ.gap.v,
            r_g: None,
            convergent: succ.convergent,
        });
    }
    Ok(out)
}

fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Lower and (when defined) upper bound on the limsup of `v_n / u_n` along
/// the sequence starting at `gap`.
pub fn contribution_bounds(gap: Gap, eq: &MahlerEquation) -> Result<(Rational, Option<Rational>)> {
    if gap.u == 0 && eq.r_b() == 0 {
        return Err(Error::LowerBoundUndefined);
    }
    let dm1 = eq.d() as i64 - 1;
    let ra = ratio(eq.r_a(), dm1);
    let rb = ratio(eq.r_b(), dm1);
    let u = Rational::from_integer(gap.u.into());
    let v = Rational::from_integer(gap.v.into());
    let lower = (&v - &ra) / (&u + &rb);
    let upper = (gap.u * dm1 > eq.r_a()).then(|| (&v + &rb) / (&u - &ra));
    Ok((lower, upper))
}

/// Bound on the size of a primitive gap: `(2d - 1)(r_a + r_b)/(d - 1)`.
pub fn primitive_size_bound(eq: &MahlerEquation) -> Rational {
    let d = eq.d() as i64;
    ratio((2 * d - 1) * (eq.r_a() + eq.r_b()), d - 1)
}

/// Largest `u` at which a primitive gap could still beat the lower bound
/// coming from `first_big`.
pub fn search_horizon(first_big: Gap, eq: &MahlerEquation) -> Result<i64> {
    let (lower, _) = contribution_bounds(first_big, eq)?;
    Ok(horizon_for_lower_bound(&lower, eq))
}

/// Largest integer `u` with `(u + S + r_b')/(u - r_a') > lower`, where
/// `r' = r/(d-1)`; values of `u` not exceeding `r_a'` are always included.
pub fn horizon_for_lower_bound(lower: &Rational, eq: &MahlerEquation) -> i64 {
    let dm1 = eq.d() as i64 - 1;
    let ra = ratio(eq.r_a(), dm1);
    let rb = ratio(eq.r_b(), dm1);
    let s = primitive_size_bound(eq);
    let excess = lower - Rational::one();
    assert!(
        excess > Rational::zero(),
        "big gaps have lower bound above 1"
    );
    let x = (s + rb + lower * &ra) / excess;
    let u_max = x.ceil().to_integer() - num_bigint::BigInt::one();
    let u_max: i64 = u_max.try_into().unwrap_or(i64::MAX);
    u_max
        .max(ra.floor().to_integer().try_into().unwrap_or(0))
        .max(0)
}
