//! Exact rationals and dense univariate polynomials over Q.

mod degree;
mod linear;
mod poly;
mod rational;

pub use degree::Degree;
pub use linear::{solve_linear, LinearSolution};
pub use poly::{
    clear_denominators, poly_compose_power, poly_deg, poly_divrem, poly_gcd, Polynomial,
};
pub use rational::{
    format_rational, ln_abs_bigint, ln_abs_rational, parse_rational, rat, rat_frac, serde_text,
    to_f64, Rational,
};
