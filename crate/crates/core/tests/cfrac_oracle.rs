use mahler_core::algebra::{rat, rat_frac, Polynomial, Rational};
use mahler_core::cfrac::{
    cf_expand, cf_from_prefix, convergent_check, error_degree, CfConfig, Convergent,
};
use mahler_core::series::{expand, LaurentSeries, MahlerEquation, Seeds};
use mahler_core::Degree;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `sum c[i] z^(top - i)`, every listed coefficient known exactly.
#[derive(Clone, Debug)]
struct Known {
    top: i64,
    c: Vec<Rational>,
}

impl Known {
    fn strip(mut self) -> Option<Known> {
        let lead = self.c.iter().position(|x| !x.is_zero())?;
        self.c.drain(..lead);
        self.top -= lead as i64;
        Some(self)
    }

    fn inverse(&self) -> Known {
        let c0_inv = self.c[0].recip();
        let mut w = vec![c0_inv.clone()];
        for i in 1..self.c.len() {
            let s = (1..=i).fold(Rational::zero(), |acc, j| acc + &self.c[j] * &w[i - j]);
            w.push(-(&c0_inv * s));
        }
        Known {
            top: -self.top,
            c: w,
        }
    }
}

/// Partial quotients by repeated inversion of the fractional part, stopping
/// once the known coefficients no longer determine the next quotient.
fn naive_quotients(f: &LaurentSeries) -> Vec<Polynomial> {
    let mut x = Known {
        top: f.degree(),
        c: f.coeffs().to_vec(),
    };
    let mut out = Vec::new();
    loop {
        if x.top < 0 {
            out.push(Polynomial::zero());
        } else {
            let whole = (x.top + 1) as usize;
            if x.c.len() <= whole {
                return out;
            }
            let mut coeffs: Vec<Rational> = x.c[..whole].to_vec();
            coeffs.reverse();
            out.push(Polynomial::new(coeffs));
            x.c.drain(..whole);
            x.top = -1;
        }
        match x.strip() {
            Some(y) => x = y.inverse(),
            None => return out,
        }
    }
}

fn random_series(rng: &mut ChaCha8Rng, n: usize) -> LaurentSeries {
    let k = rng.gen_range(-2..=3);
    let mut coeffs: Vec<Rational> = (0..n)
        .map(|_| rat_frac(rng.gen_range(-5..=5), rng.gen_range(1..=2)))
        .collect();
    if coeffs[0].is_zero() {
        coeffs[0] = rat(1);
    }
    LaurentSeries::truncated(k, coeffs)
}

/// Highest power with a nonzero coefficient in `q f - p`, over the powers
/// the prefix determines.
fn known_error_degree(f: &LaurentSeries, c: &Convergent) -> Option<i64> {
    let k = f.degree();
    let n = f.known_count() as i64;
    let dq = c.q.deg_or_zero() as i64;
    let low = k - n + 1 + dq;
    let top = k + dq;
    (low..=top).rev().find(|&e| {
        let mut acc = if e >= 0 {
            c.p.coeff(e as usize) * rat(-1)
        } else {
            Rational::zero()
        };
        for (i, qi) in c.q.coeffs().iter().enumerate() {
            let j = k - (e - i as i64);
            if j >= 0 && j < n {
                acc += qi * &f.coeffs()[j as usize];
            }
        }
        !acc.is_zero()
    })
}

#[test]
fn random_series_match_naive_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xcf01);
    for _ in 0..50 {
        let f = random_series(&mut rng, 32);
        let cf = cf_from_prefix(&f);
        let naive = naive_quotients(&f);
        assert!(cf.certified_count >= 12);
        assert!(naive.len() >= cf.certified_count);
        assert_eq!(
            &cf.quotients[..cf.certified_count],
            &naive[..cf.certified_count]
        );
    }
}

#[test]
fn convergent_identities_on_random_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xcf02);
    for _ in 0..50 {
        let f = random_series(&mut rng, 32);
        let cf = cf_from_prefix(&f);
        let conv = &cf.convergents;
        for k in 0..12 {
            let (rp, rq) = cf.recurrence_pair(k);
            let (pm, qm) = if k == 0 {
                (Polynomial::one(), Polynomial::zero())
            } else {
                cf.recurrence_pair(k - 1)
            };
            let det = &(&rp * &qm) - &(&pm * &rq);
            let (pk, qk) = (&conv[k].p, &conv[k].q);
            assert!(conv[k].same_fraction(&Convergent::new(None, rp, rq)));
            let sign = if k % 2 == 0 { -1 } else { 1 };
            assert_eq!(det, Polynomial::from_i64s(&[sign]));
            let sum: usize = cf.quotients[1..=k].iter().map(|a| a.deg_or_zero()).sum();
            assert_eq!(qk.deg_or_zero(), sum);
            assert_eq!(cf.degrees[k], sum as i64);
            assert_eq!(known_error_degree(&f, &conv[k]), Some(-cf.degrees[k + 1]));
            let mut g = f.clone();
            assert!(convergent_check(pk, qk, &mut g, &CfConfig::default()).unwrap());
            let moved = pk + qk;
            assert!(!convergent_check(&moved, qk, &mut g, &CfConfig::default()).unwrap());
            let expected = Degree::Finite(-cf.degrees[k + 1]);
            assert_eq!(
                error_degree(&conv[k], &mut g, &CfConfig::default()).unwrap(),
                expected
            );
        }
    }
}

fn ternary() -> (MahlerEquation, LaurentSeries) {
    let p = Polynomial::from_i64s;
    let eq = MahlerEquation::new(3, p(&[1]), p(&[1, 1]), p(&[1, 1])).unwrap();
    let f = expand(&eq, 0, 32, &Seeds::new()).unwrap();
    (eq, f)
}

#[test]
fn ternary_degrees_and_errors() {
    let (_, mut f) = ternary();
    let cf = cf_expand(&mut f, 40, &CfConfig::default()).unwrap();
    assert_eq!(&cf.degrees[..5], &[0, 1, 3, 4, 9]);
    for k in 0..4 {
        let e = error_degree(&cf.convergents[k], &mut f, &CfConfig::default()).unwrap();
        assert_eq!(e, Degree::Finite(-cf.degrees[k + 1]));
    }
}

#[test]
fn convergents_pass_and_neighbours_fail() {
    let (_, mut f) = ternary();
    let cf = cf_expand(&mut f, 30, &CfConfig::default()).unwrap();
    for c in cf.convergents.iter().take(cf.certified_count) {
        assert!(convergent_check(&c.p, &c.q, &mut f, &CfConfig::default()).unwrap());
        let bumped = &c.p + &Polynomial::from_i64s(&[1]);
        assert!(!convergent_check(&bumped, &c.q, &mut f, &CfConfig::default()).unwrap());
    }
}

#[test]
fn polynomial_solution_terminates_exactly() {
    let p = Polynomial::from_i64s;
    // (z^2 + 1) f(z) = (z + 1) f(z^2) is solved by f = z + 1.
    let eq =
        MahlerEquation::new_homogeneous_allowed(2, p(&[1, 1]), p(&[1, 0, 1]), Polynomial::zero())
            .unwrap();
    let seeds: Seeds = [(-1, rat(1))].into_iter().collect();
    let mut f = expand(&eq, 1, 16, &seeds).unwrap();
    let cf = cf_expand(&mut f, 10, &CfConfig::default()).unwrap();
    assert!(cf.terminated);
    let last = cf.convergents.last().unwrap();
    assert_eq!(last.p, p(&[1, 1]));
    assert_eq!(last.q, p(&[1]));
    assert!(f.known_count() < 1000);
}

#[test]
fn rational_series_terminates() {
    // 1/(z - 1) = z^-1 + z^-2 + ...
    let f = LaurentSeries::exact(-1, vec![rat(1)]);
    let cf = cf_from_prefix(&f);
    assert!(cf.terminated);
    let mut geometric = LaurentSeries::truncated(-1, vec![rat(1); 40]);
    let cf = cf_expand(&mut geometric, 1, &CfConfig::default());
    assert!(cf.is_err() || cf.unwrap().terminated);
}
