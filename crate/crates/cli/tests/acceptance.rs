//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails or overruns its time budget.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use clap::Parser;
use mahler_cli::commands::solve;
use mahler_cli::{run, Cli, EquationFile};
use mahler_core::algebra::{poly_gcd, to_f64, Polynomial, Rational};
use mahler_core::cfrac::{
    cf_expand, cf_from_prefix, convergent_check, error_degree, CFExpansion, CfConfig,
};
use mahler_core::exponent::periodic_limit_params;
use mahler_core::gaps::{classify, direct_successor, enumerate_gaps};
use mahler_core::numeric::{build_approx, empirical_exponent, eval_f};
use mahler_core::rationality::{
    cyclotomic_chain_witness, cyclotomic_poly, divisors, multiply_series,
    phi_compose_factorization, r_s_split, strip_common_cyclotomic, strip_z_powers,
};
use mahler_core::series::{expand, infer_degree, LaurentSeries, MahlerEquation, Seeds};
use mahler_core::{Degree, Error};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const PERIODIC_TOL: f64 = 1e-12;
const EXPONENT_TOL: f64 = 0.1;
const GROWTH_TOL: f64 = 0.05;
const ENCLOSURE_WIDTH: f64 = 0.1;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn corpus(name: &str) -> String {
    corpus_dir()
        .join(format!("{name}.json"))
        .to_string_lossy()
        .into_owned()
}

fn corpus_files() -> Vec<(String, EquationFile)> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            (name, EquationFile::read(p.to_str().unwrap()).unwrap())
        })
        .collect()
}

fn cli_json(args: &[&str]) -> Result<Value, String> {
    let cli = Cli::try_parse_from(std::iter::once("mahler").chain(args.iter().copied()))
        .map_err(|e| e.to_string())?;
    let out = run(&cli).map_err(|e| e.to_string())?;
    serde_json::from_str(&out.stdout).map_err(|e| e.to_string())
}

fn p(c: &[i64]) -> Polynomial {
    Polynomial::from_i64s(c)
}

fn random_poly(rng: &mut ChaCha8Rng, max_deg: usize) -> Polynomial {
    loop {
        let deg = rng.gen_range(0..=max_deg);
        let c: Vec<i64> = (0..=deg).map(|_| rng.gen_range(-3..=3)).collect();
        let poly = p(&c);
        if !poly.is_zero() && !poly.coeff(0).is_zero() {
            return poly;
        }
    }
}

fn solution(eq: &MahlerEquation, n: usize) -> Option<LaurentSeries> {
    infer_degree(eq)
        .into_iter()
        .find_map(|k| expand(eq, k, n, &Seeds::new()).ok())
}

fn c1_ternary() -> Outcome {
    for name in ["ternary", "ternary_a2", "ternary_c2"] {
        let v = cli_json(&["--b", "2", "mu", &corpus(name)])?;
        ensure(v["kind"] == "exact" && v["mu"] == "3", || {
            format!("{name}: {} {}", v["kind"], v["mu"])
        })?;
        let seq = &v["certificate"]["sequences"][0];
        ensure(seq["start"]["u"] == 0 && seq["start"]["v"] == 1, || {
            format!("{name}: start {}", seq["start"])
        })?;
        let trail = seq["trail"].as_array().ok_or("no trail")?;
        let mut computed = 0;
        for n in 0..=12u32 {
            let e = trail
                .get(n as usize)
                .ok_or_else(|| format!("{name}: trail ends before n = {n}"))?;
            let (u, v) = ((3i64.pow(n) - 1) / 2, 3i64.pow(n));
            ensure(e["u"] == u && e["v"] == v, || {
                format!("{name}: n = {n} gives [{}, {}]", e["u"], e["v"])
            })?;
            ensure(e["r_g"] == 0, || {
                format!("{name}: r_g at n = {n} is {}", e["r_g"])
            })?;
            if e["extrapolated"] == false {
                computed += 1;
            }
        }
        ensure(computed >= 12, || {
            format!("{name}: only {computed} computed steps")
        })?;
    }
    Ok("3 triples exact, trail n <= 12 matches (3^n-1)/2, 3^n with r_g = 0".into())
}

/// Random Mahler equations with an expandable, irrational solution, each
/// with at least 12 certified convergents.
fn random_expansions(count: usize) -> Vec<(LaurentSeries, CFExpansion)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc2);
    let mut out = Vec::new();
    while out.len() < count {
        let d = rng.gen_range(2..=3usize);
        let (a, b, c) = (
            random_poly(&mut rng, 2),
            random_poly(&mut rng, 2),
            random_poly(&mut rng, 2),
        );
        let Ok(eq) = MahlerEquation::new(d, a, b, c) else {
            continue;
        };
        let Some(mut f) = solution(&eq, 64) else {
            continue;
        };
        let mut target = 16;
        let cf = loop {
            match cf_expand(&mut f, target, &CfConfig::default()) {
                Ok(cf) if cf.certified_count >= 12 || cf.terminated => break Some(cf),
                Ok(_) => target *= 2,
                Err(_) => break None,
            }
        };
        if let Some(cf) = cf.filter(|cf| !cf.terminated) {
            out.push((f, cf));
        }
    }
    out
}

fn c2_cf_identities(data: &mut [(LaurentSeries, CFExpansion)]) -> Outcome {
    let cfg = CfConfig::default();
    for (i, (f, cf)) in data.iter_mut().enumerate() {
        for k in 0..12 {
            let (pk, qk) = cf.recurrence_pair(k);
            let (pm, qm) = if k == 0 {
                (Polynomial::one(), Polynomial::zero())
            } else {
                cf.recurrence_pair(k - 1)
            };
            let det = &(&pk * &qm) - &(&pm * &qk);
            let sign = if k % 2 == 0 { -1 } else { 1 };
            ensure(det == p(&[sign]), || {
                format!("series {i}, k = {k}: determinant {}", det.pretty())
            })?;
            if k > 0 {
                ensure(qk.deg() > qm.deg(), || {
                    format!("series {i}, k = {k}: deg q not increasing")
                })?;
            }
            let g = poly_gcd(&pk, &qk).map_err(|e| e.to_string())?;
            ensure(g.deg() == Some(0), || {
                format!("series {i}, k = {k}: gcd {}", g.pretty())
            })?;
            let e = error_degree(&cf.convergents[k], f, &cfg).map_err(|e| e.to_string())?;
            ensure(e == Degree::Finite(-cf.degrees[k + 1]), || {
                format!("series {i}, k = {k}: error degree {e:?}")
            })?;
        }
    }
    Ok(format!("{} equations x 12 convergents", data.len()))
}

fn c3_criterion(data: &mut [(LaurentSeries, CFExpansion)]) -> Outcome {
    let cfg = CfConfig::default();
    let (mut passed, mut perturbed) = (0, 0);
    for (i, (f, cf)) in data.iter_mut().enumerate() {
        for c in &cf.convergents[..cf.certified_count] {
            let ok = convergent_check(&c.p, &c.q, f, &cfg).map_err(|e| e.to_string())?;
            ensure(ok, || {
                format!("series {i}: convergent {:?} rejected", c.index)
            })?;
            passed += 1;
            if perturbed < 100 {
                let moved = &c.p + &c.q;
                let bad = convergent_check(&moved, &c.q, f, &cfg).map_err(|e| e.to_string())?;
                ensure(!bad, || {
                    format!("series {i}: perturbed {:?} accepted", c.index)
                })?;
                perturbed += 1;
            }
        }
    }
    ensure(perturbed == 100, || {
        format!("only {perturbed} perturbed fractions")
    })?;
    Ok(format!(
        "{passed} convergents accepted, {perturbed} perturbed rejected"
    ))
}

fn c4_successors() -> Outcome {
    let cfg = CfConfig::default();
    let (mut gaps, mut successors) = (0, 0);
    for (name, file) in corpus_files() {
        let eq = &file.equation;
        let Ok(mut f) = solve(&file, 64) else {
            continue;
        };
        let Ok(cf) = cf_expand(&mut f, 40, &cfg) else {
            continue;
        };
        if cf.terminated {
            continue;
        }
        let records = classify(enumerate_gaps(&cf, 30).map_err(|e| e.to_string())?, eq)
            .map_err(|e| e.to_string())?;
        let d = eq.d() as i64;
        for rec in records.iter().filter(|r| r.big && r.gap.v <= 30) {
            gaps += 1;
            let (mut conv, mut gap) = (rec.convergent.clone(), rec.gap);
            for generation in 1..=4 {
                let s = direct_successor(&conv, gap, eq).map_err(|e| e.to_string())?;
                let at = || {
                    format!(
                        "{name}, gap [{}, {}], generation {generation}",
                        rec.gap.u, rec.gap.v
                    )
                };
                ensure(s.gap.u == d * gap.u + eq.r_b() - s.r_g, || {
                    format!("{}: u = {}", at(), s.gap.u)
                })?;
                ensure(s.gap.v == d * gap.v - eq.r_a() + s.r_g, || {
                    format!("{}: v = {}", at(), s.gap.v)
                })?;
                ensure(s.gap.size() > gap.size(), at)?;
                ensure(s.convergent.d() == s.gap.u, at)?;
                let ok = convergent_check(&s.convergent.p, &s.convergent.q, &mut f, &cfg)
                    .map_err(|e| e.to_string())?;
                ensure(ok, || format!("{}: not a convergent", at()))?;
                let e = error_degree(&s.convergent, &mut f, &cfg).map_err(|e| e.to_string())?;
                ensure(e == Degree::Finite(-s.gap.v), || {
                    format!("{}: error degree {e:?}", at())
                })?;
                successors += 1;
                (conv, gap) = (s.convergent, s.gap);
            }
        }
    }
    ensure(gaps >= 10, || format!("only {gaps} big gaps in the corpus"))?;
    Ok(format!("{gaps} big gaps, {successors} successors verified"))
}

/// `v / u` after `supersteps` full periods of the gap recurrence.
fn iterate_ratio(
    u0: i64,
    v0: i64,
    r_g: &[i64],
    d: i64,
    r_a: i64,
    r_b: i64,
    supersteps: usize,
) -> Rational {
    let (mut u, mut v) = (BigInt::from(u0), BigInt::from(v0));
    for _ in 0..supersteps {
        for &g in r_g {
            u = u * d + r_b - g;
            v = v * d - r_a + g;
        }
    }
    Rational::new(v, u)
}

/// Every gap over two periods has `0 < u < v`.
fn valid_orbit(u0: i64, v0: i64, r_g: &[i64], d: i64, r_a: i64, r_b: i64) -> bool {
    let (mut u, mut v) = (u0, v0);
    for &g in r_g.iter().chain(r_g) {
        (u, v) = (d * u + r_b - g, d * v - r_a + g);
        if u <= 0 || v <= u {
            return false;
        }
    }
    true
}

fn c5_periodic_limit() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc5);
    let (mut tested, mut worst) = (0, 0f64);
    while tested < 1000 {
        let d = rng.gen_range(2..=5i64);
        let period = rng.gen_range(1..=3usize);
        let (r_a, r_b) = (rng.gen_range(0..=4i64), rng.gen_range(0..=4i64));
        let r_g: Vec<i64> = (0..period)
            .map(|_| rng.gen_range(0..=(r_a + r_b).min(3)))
            .collect();
        let u0 = rng.gen_range(0..=20i64);
        let v0 = u0 + rng.gen_range(1..=10i64);
        let Ok(limit) = periodic_limit_params(u0, v0, &r_g, d as u64, r_a, r_b) else {
            continue;
        };
        if !valid_orbit(u0, v0, &r_g, d, r_a, r_b) {
            continue;
        }
        let diff = to_f64(&(iterate_ratio(u0, v0, &r_g, d, r_a, r_b, 60) - &limit)).abs();
        ensure(diff < PERIODIC_TOL, || {
            format!("d={d} r_g={r_g:?} ({u0},{v0}): off by {diff:e}")
        })?;
        worst = worst.max(diff);
        if r_g.iter().all(|&g| g == r_g[0]) {
            let g = r_g[0];
            let exact = Rational::new(
                BigInt::from(v0 * (d - 1) - r_a + g),
                BigInt::from(u0 * (d - 1) + r_b - g),
            );
            ensure(limit == exact, || {
                format!("d={d} g={g} ({u0},{v0}): {limit} != {exact}")
            })?;
        }
        tested += 1;
    }
    Ok(format!("1000 tuples, max deviation {worst:.1e}"))
}

fn product(polys: impl IntoIterator<Item = Polynomial>) -> Polynomial {
    polys
        .into_iter()
        .fold(Polynomial::one(), |acc, x| &acc * &x)
}

fn c6_cyclotomic() -> Outcome {
    for n in 1..=20u64 {
        for d in 2..=6u64 {
            let direct = cyclotomic_poly(n).compose_power(d as usize);
            let split = product(
                phi_compose_factorization(n, d)
                    .into_iter()
                    .map(cyclotomic_poly),
            );
            ensure(direct == split, || format!("Phi_{n}(z^{d}) factorization"))?;
        }
    }
    ensure(cyclotomic_poly(12) == p(&[1, 0, -1, 0, 1]), || {
        "Phi_12".into()
    })?;
    for n in 1..=60u64 {
        let total: usize = divisors(n)
            .into_iter()
            .map(|k| cyclotomic_poly(k).deg_or_zero())
            .sum();
        ensure(total as u64 == n, || {
            format!("degree sum for n = {n} is {total}")
        })?;
    }
    let mut witnesses = 0;
    for d in [2u64, 3, 5] {
        for n in 1..=30u64 {
            let m = cyclotomic_chain_witness(n, d, 10)
                .ok_or_else(|| format!("no witness for n = {n}, d = {d}"))?;
            let (r, _) = r_s_split(n, d);
            let target = cyclotomic_poly(r).compose_power(d.pow(m) as usize);
            ensure(cyclotomic_poly(n).divides(&target).unwrap(), || {
                format!("witness {m} for n = {n}, d = {d}")
            })?;
            witnesses += 1;
        }
    }
    Ok(format!(
        "composition n <= 20, d <= 6; degree sums n <= 60; {witnesses} witnesses"
    ))
}

fn c7_empirical() -> Outcome {
    let b = BigInt::from(2);
    let mut finals = Vec::new();
    for name in ["ternary", "ternary_a2", "ternary_c2"] {
        let file = EquationFile::read(&corpus(name)).unwrap();
        let eq = &file.equation;
        let mut f = solve(&file, 64).map_err(|e| e.to_string())?;
        let value = eval_f(&mut f, &b, 5000).map_err(|e| e.to_string())?;
        let cf = cf_expand(&mut f, 4, &CfConfig::default()).map_err(|e| e.to_string())?;
        let records = classify(enumerate_gaps(&cf, 3).map_err(|e| e.to_string())?, eq)
            .map_err(|e| e.to_string())?;
        let rec = records
            .iter()
            .find(|r| r.gap.u == 1 && r.gap.v == 3)
            .ok_or_else(|| format!("{name}: no [1,3] gap"))?;
        let approx: Vec<_> = (1..=6)
            .map(|m| build_approx(&rec.convergent, eq, &b, m, &value))
            .collect::<Result<_, Error>>()
            .map_err(|e| format!("{name}: {e}"))?;
        let ratios: Vec<f64> = approx.iter().map(|r| r.ratio()).collect();
        ensure(ratios.windows(2).all(|w| w[1] > w[0]), || {
            format!("{name}: not monotone {ratios:?}")
        })?;
        ensure(ratios.iter().all(|&r| r < 3.0 + GROWTH_TOL), || {
            format!("{name}: overshoot {ratios:?}")
        })?;
        let e = empirical_exponent(&approx).ok_or("no exponent")?;
        ensure((e - 3.0).abs() < EXPONENT_TOL, || {
            format!("{name}: empirical exponent {e}")
        })?;
        let growth = approx[5].log_abs_q / approx[4].log_abs_q;
        ensure((growth - 3.0).abs() < GROWTH_TOL, || {
            format!("{name}: log q growth {growth}")
        })?;
        finals.push(format!("{e:.4}"));
    }
    Ok(format!("final exponents {}", finals.join(", ")))
}

fn enclosure_hi(horizon: i64) -> Result<(f64, Value), String> {
    let v = cli_json(&[
        "--horizon",
        &horizon.to_string(),
        "mu",
        &corpus("no_big_gap"),
    ])?;
    if v["kind"] != "enclosure" || v["mu"]["lo"] != "2" {
        return Err(format!("horizon {horizon}: {} {}", v["kind"], v["mu"]));
    }
    let hi = mahler_core::algebra::parse_rational(v["mu"]["hi"].as_str().unwrap_or(""))
        .map_err(|e| e.to_string())?;
    Ok((to_f64(&hi), v))
}

fn c8_enclosure() -> Outcome {
    let (hi200, v) = enclosure_hi(200)?;
    ensure(v["certificate"]["first_big"].is_null(), || {
        "a big gap exists below 200".into()
    })?;
    ensure(hi200 - 2.0 < ENCLOSURE_WIDTH, || {
        format!("hi = {hi200} at horizon 200")
    })?;
    let (hi400, _) = enclosure_hi(400)?;
    ensure(hi400 < hi200, || {
        format!("hi {hi400} at 400 vs {hi200} at 200")
    })?;
    Ok(format!(
        "hi - 2 = {:.5} at 200, {:.5} at 400",
        hi200 - 2.0,
        hi400 - 2.0
    ))
}

fn c9_truncation() -> Outcome {
    let (n0, n1) = (240usize, 300usize);
    let mut total = 0;
    for (name, file) in corpus_files() {
        let Ok(mut f) = solve(&file, n1) else {
            continue;
        };
        if f.is_extendable() {
            f.extend_to(n1).map_err(|e| e.to_string())?;
        }
        let short = cf_from_prefix(&f.truncate(n0));
        let long = cf_from_prefix(&f.truncate(n1));
        let k = short.certified_count;
        ensure(long.certified_count >= k, || {
            format!("{name}: fewer certified quotients")
        })?;
        let text = |cf: &CFExpansion| serde_json::to_string(&cf.quotients[..k]).unwrap();
        ensure(text(&short) == text(&long), || {
            format!("{name}: quotients changed")
        })?;
        let conv = |cf: &CFExpansion| serde_json::to_string(&cf.convergents[..k]).unwrap();
        ensure(conv(&short) == conv(&long), || {
            format!("{name}: convergents changed")
        })?;
        total += k;
    }
    Ok(format!(
        "{total} certified quotients unchanged from {n0} to {n1} coefficients"
    ))
}

/// Expansion of `eq` at the degree of `reference`, with free coefficients
/// copied from it.
fn expand_like(eq: &MahlerEquation, reference: &LaurentSeries, n: usize) -> LaurentSeries {
    let k = reference.degree();
    match expand(eq, k, n, &Seeds::new()) {
        Ok(g) => g,
        Err(Error::FreeParameters(free)) => {
            let seeds: Seeds = free
                .iter()
                .map(|&j| (j, reference.coeffs()[(j + k) as usize].clone()))
                .collect();
            expand(eq, k, n, &seeds).unwrap()
        }
        Err(e) => panic!("expansion failed: {e}"),
    }
}

fn c10_transforms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacca);
    let (mut z_cases, mut phi_cases) = (0, 0);
    while z_cases < 20 || phi_cases < 20 {
        let d = rng.gen_range(2..=3usize);
        let a0 = random_poly(&mut rng, 2);
        let b0 = random_poly(&mut rng, 2);
        let c = random_poly(&mut rng, 3);
        if z_cases < 20 {
            let j = rng.gen_range(1..=2usize);
            let eq = MahlerEquation::new(d, a0.shift_up(j), b0.clone(), c.clone()).unwrap();
            if let Some(f) = solution(&eq, 60) {
                let (t, k) = strip_z_powers(&eq).map_err(|e| e.to_string())?;
                let g = multiply_series(&f, &Polynomial::monomial(Rational::one(), k as usize));
                let h = expand_like(&t, &g, 50);
                ensure(
                    h.degree() == g.degree() && h.coeffs()[..50] == g.coeffs()[..50],
                    || format!("z^{k} case, d = {d}"),
                )?;
                z_cases += 1;
            }
        }
        if phi_cases < 20 {
            let n = [1u64, 2, 3, 4, 5, 6]
                .into_iter()
                .filter(|n| n % d as u64 != 0)
                .nth(rng.gen_range(0..3))
                .unwrap();
            let phi = cyclotomic_poly(n);
            let eq = MahlerEquation::new(d, &a0 * &phi, &b0 * &phi, c.clone()).unwrap();
            if let Some(f) = solution(&eq, 70) {
                let t = strip_common_cyclotomic(&eq, n).map_err(|e| e.to_string())?;
                let g = multiply_series(&f, &phi);
                let h = expand_like(&t, &g, 50);
                ensure(
                    h.degree() == g.degree() && h.coeffs()[..50] == g.coeffs()[..50],
                    || format!("Phi_{n} case, d = {d}"),
                )?;
                phi_cases += 1;
            }
        }
    }
    Ok("20 z-power and 20 cyclotomic instances, 50 coefficients each".into())
}

struct Report {
    failures: usize,
}

impl Report {
    fn check(&mut self, id: &str, title: &str, budget_secs: u64, body: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(msg)
        });
        let elapsed = start.elapsed();
        let budget = Duration::from_secs(budget_secs);
        let (status, detail) = match outcome {
            Ok(_) if elapsed > budget => ("FAIL", "over time budget".to_string()),
            Ok(d) => ("PASS", d),
            Err(e) => ("FAIL", e),
        };
        if status == "FAIL" {
            self.failures += 1;
        }
        println!(
            "{id:<4}{status}  {title}: {detail} [{:.2}s / {budget_secs}s]",
            elapsed.as_secs_f64()
        );
    }
}

fn main() {
    println!(
        "acceptance: periodic tol {PERIODIC_TOL:e}, exponent tol {EXPONENT_TOL}, growth tol {GROWTH_TOL}, enclosure width {ENCLOSURE_WIDTH}"
    );
    let mut report = Report { failures: 0 };
    report.check("C1", "ternary family", 10, c1_ternary);

    let start = Instant::now();
    let mut data = random_expansions(50);
    let setup = start.elapsed().as_secs_f64();
    report.check("C2", "continued fraction identities", 60, || {
        c2_cf_identities(&mut data).map(|s| format!("{s}, setup {setup:.2}s"))
    });
    report.check("C3", "convergent criterion", 10, || c3_criterion(&mut data));
    report.check("C4", "successor soundness", 30, c4_successors);
    report.check("C5", "periodic limit", 10, c5_periodic_limit);
    report.check("C6", "cyclotomic identities", 30, c6_cyclotomic);
    report.check("C7", "empirical exponent", 120, c7_empirical);
    report.check("C8", "enclosure mode", 60, c8_enclosure);
    report.check("C9", "truncation stability", 60, c9_truncation);
    report.check("C10", "transform preservation", 30, c10_transforms);

    if report.failures > 0 {
        println!("{} criteria failed", report.failures);
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
