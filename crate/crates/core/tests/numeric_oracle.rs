use mahler_core::algebra::{ln_abs_rational, rat, Polynomial, Rational};
use mahler_core::cfrac::{cf_expand, CfConfig};
use mahler_core::numeric::{
    approx_polynomials, approx_values, build_approx, eval_f, partial_sum_exact,
};
use mahler_core::series::{expand, MahlerEquation, Seeds};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

fn p(c: &[i64]) -> Polynomial {
    Polynomial::from_i64s(c)
}

fn ternary() -> MahlerEquation {
    MahlerEquation::new(3, p(&[1]), p(&[1, 1]), p(&[1, 1])).unwrap()
}

/// `f(b)` through `f(x) = (A(x) f(x^d) + C(x)) / B(x)` applied `levels`
/// times, with the innermost value taken from a partial sum at a huge point.
fn functional_oracle(eq: &MahlerEquation, b: i64, levels: usize, terms: usize) -> Rational {
    let f = expand(eq, 0, terms, &Seeds::new()).unwrap();
    let mut points = vec![BigInt::from(b)];
    for _ in 0..levels {
        let last = points.last().unwrap();
        points.push(num_traits::pow(last.clone(), eq.d()));
    }
    let mut value = partial_sum_exact(&f, points.last().unwrap(), terms);
    for x in points.iter().rev().skip(1) {
        value = (eq.a().eval_bigint(x) * value + eq.c().eval_bigint(x)) / eq.b().eval_bigint(x);
    }
    value
}

/// First `digits` decimals of `x` after the point, truncated.
fn decimal(x: &Rational, digits: usize) -> String {
    let scaled = (x * Rational::from_integer(num_traits::pow(BigInt::from(10), digits))).floor();
    scaled.to_integer().to_string()
}

#[test]
fn evaluation_matches_functional_equation() {
    let eq = ternary();
    // At 2^(3^4) the partial sum of 60 terms is exact far beyond 300 digits.
    let oracle = functional_oracle(&eq, 2, 4, 60);
    let mut f = expand(&eq, 0, 64, &Seeds::new()).unwrap();
    let e = eval_f(&mut f, &BigInt::from(2), 300).unwrap();
    let got = e.value.to_decimal(300);
    let want = decimal(&oracle, 300);
    let got_digits: String = got.chars().filter(char::is_ascii_digit).collect();
    assert_eq!(&got_digits[..290], &want[..290]);
}

#[test]
fn doubling_precision_keeps_digits() {
    let eq = ternary();
    let mut f = expand(&eq, 0, 64, &Seeds::new()).unwrap();
    for b in [2, -3, 5] {
        let lo = eval_f(&mut f, &BigInt::from(b), 200)
            .unwrap()
            .value
            .to_decimal(200);
        let hi = eval_f(&mut f, &BigInt::from(b), 400)
            .unwrap()
            .value
            .to_decimal(400);
        assert_eq!(&lo[..190], &hi[..190], "b = {b}");
    }
}

#[test]
fn closed_form_matches_recursive_polynomials() {
    let eq = ternary();
    let mut f = expand(&eq, 0, 64, &Seeds::new()).unwrap();
    let cf = cf_expand(&mut f, 10, &CfConfig::default()).unwrap();
    for c in cf.convergents.iter().take(4) {
        for m in 0..=5u32 {
            for b in [2i64, 3, -2] {
                let (pv, qv) = approx_values(c, &eq, &BigInt::from(b), m).unwrap();
                let (pp, qp) = approx_polynomials(c, &eq, m);
                let x = Rational::from_integer(BigInt::from(b));
                assert_eq!(pv, pp.eval(&x));
                assert_eq!(qv, qp.eval(&x));
                assert_eq!(
                    qp.deg_or_zero(),
                    3usize.pow(m) * c.q.deg_or_zero() + (3usize.pow(m) - 1) / 2
                );
            }
        }
    }
}

#[test]
fn approximation_errors_match_oracle() {
    let eq = ternary();
    let oracle = functional_oracle(&eq, 2, 4, 60);
    let mut f = expand(&eq, 0, 64, &Seeds::new()).unwrap();
    let e = eval_f(&mut f, &BigInt::from(2), 400).unwrap();
    let cf = cf_expand(&mut f, 10, &CfConfig::default()).unwrap();
    for m in 1..=3 {
        let rec = build_approx(&cf.convergents[1], &eq, &BigInt::from(2), m, &e).unwrap();
        let diff = &oracle - &rec.p_val / &rec.q_val;
        assert!(!diff.is_zero());
        let want = ln_abs_rational(&diff.abs());
        assert!(
            (rec.log_abs_err - want).abs() < 1e-9,
            "m = {m}: {} vs {want}",
            rec.log_abs_err
        );
        assert!((rec.log_abs_q - ln_abs_rational(&rec.q_val)).abs() < 1e-12);
    }
}

#[test]
fn finite_series_evaluates_exactly() {
    let f = mahler_core::series::LaurentSeries::exact(1, vec![rat(3), rat(0), rat(-1)]);
    // 3 b - 1/b at b = 4
    assert_eq!(
        partial_sum_exact(&f, &BigInt::from(4), 3),
        Rational::new(47.into(), 4.into())
    );
}
