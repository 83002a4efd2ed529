use mahler_core::algebra::Polynomial;
use mahler_core::cfrac::{cf_expand, convergent_check, error_degree, CfConfig};
use mahler_core::gaps::{classify, direct_successor, enumerate_gaps, iterate_primitive, Gap};
use mahler_core::series::{expand, infer_degree, LaurentSeries, MahlerEquation, Seeds};
use mahler_core::Degree;

fn p(c: &[i64]) -> Polynomial {
    Polynomial::from_i64s(c)
}

fn equations() -> Vec<MahlerEquation> {
    let mut out = Vec::new();
    for (a0, c1, c0) in [(1, 1, 1), (2, 1, -3), (1, 2, 1)] {
        out.push(MahlerEquation::new(3, p(&[a0]), p(&[1, 1]), p(&[c0, c1])).unwrap());
    }
    out.push(MahlerEquation::new(2, p(&[1]), p(&[1, 1]), p(&[0, 1])).unwrap());
    out.push(MahlerEquation::new(2, p(&[1]), p(&[-1, 0, 1]), p(&[1, 0, 1])).unwrap());
    out.push(MahlerEquation::new(3, p(&[1, 1]), p(&[2, 0, 1]), p(&[1, 1, 1])).unwrap());
    out
}

fn solution(eq: &MahlerEquation) -> Option<LaurentSeries> {
    infer_degree(eq)
        .into_iter()
        .find_map(|k| expand(eq, k, 64, &Seeds::new()).ok())
}

/// Every successor of a big gap must be a convergent whose gap matches the
/// degrees read off the continued fraction.
#[test]
fn successors_are_convergents_for_four_generations() {
    let cfg = CfConfig::default();
    let mut checked = 0;
    for eq in equations() {
        let Some(mut f) = solution(&eq) else { continue };
        let limit = 160;
        let Ok(cf) = cf_expand(&mut f, limit, &cfg) else {
            continue;
        };
        let records = classify(enumerate_gaps(&cf, limit).unwrap(), &eq).unwrap();
        for rec in records.iter().filter(|r| r.big && r.gap.v <= 30) {
            let mut conv = rec.convergent.clone();
            let mut gap = rec.gap;
            for _ in 0..4 {
                let succ = direct_successor(&conv, gap, &eq).unwrap();
                if succ.gap.v > limit {
                    break;
                }
                let d = eq.d() as i64;
                assert_eq!(succ.gap.u, d * gap.u + eq.r_b() - succ.r_g);
                assert_eq!(succ.gap.v, d * gap.v - eq.r_a() + succ.r_g);
                assert!(succ.gap.size() > gap.size());
                assert!(
                    convergent_check(&succ.convergent.p, &succ.convergent.q, &mut f, &cfg).unwrap()
                );
                assert_eq!(succ.convergent.q.deg_or_zero() as i64, succ.gap.u);
                let e = error_degree(&succ.convergent, &mut f, &cfg).unwrap();
                assert_eq!(e, Degree::Finite(-succ.gap.v));
                let pos = cf
                    .degrees
                    .iter()
                    .position(|&d| d == succ.gap.u)
                    .expect("u is a degree");
                assert_eq!(cf.degrees[pos + 1], succ.gap.v);
                checked += 1;
                conv = succ.convergent;
                gap = succ.gap;
            }
        }
    }
    assert!(checked >= 8, "only {checked} successors checked");
}

#[test]
fn ternary_sequence_and_flags() {
    let eq = &equations()[0];
    let mut f = solution(eq).unwrap();
    let cf = cf_expand(&mut f, 100, &CfConfig::default()).unwrap();
    let records = classify(enumerate_gaps(&cf, 90).unwrap(), eq).unwrap();
    assert!(records.iter().all(|r| r.big));
    assert!(records[0].primitive);
    for g in [
        Gap::new(1, 3),
        Gap::new(4, 9),
        Gap::new(13, 27),
        Gap::new(40, 81),
    ] {
        let r = records.iter().find(|r| r.gap == g).unwrap();
        assert!(!r.primitive && r.successor_of.is_some());
    }
    assert!(records
        .iter()
        .any(|r| r.gap == Gap::new(3, 4) && r.primitive));
    let seq = iterate_primitive(&records[0], eq, 6, 10_000).unwrap();
    let us: Vec<i64> = seq.steps.iter().map(|s| s.u).collect();
    let vs: Vec<i64> = seq.steps.iter().map(|s| s.v).collect();
    assert_eq!(us, vec![0, 1, 4, 13, 40, 121, 364]);
    assert_eq!(vs, vec![1, 3, 9, 27, 81, 243, 729]);
    assert!(seq.r_g().iter().all(|&r| r == 0));
}

#[test]
fn recurrence_holds_along_sequences() {
    for eq in equations() {
        let Some(mut f) = solution(&eq) else { continue };
        let Ok(cf) = cf_expand(&mut f, 40, &CfConfig::default()) else {
            continue;
        };
        let records = classify(enumerate_gaps(&cf, 30).unwrap(), &eq).unwrap();
        for rec in records.iter().filter(|r| r.primitive) {
            let seq = iterate_primitive(rec, &eq, 5, 20_000).unwrap();
            let d = eq.d() as i64;
            for w in seq.steps.windows(2) {
                let g = w[0].r_g.unwrap();
                assert!(g >= 0);
                assert_eq!(w[1].u, d * w[0].u + eq.r_b() - g);
                assert_eq!(w[1].v, d * w[0].v - eq.r_a() + g);
            }
        }
    }
}
