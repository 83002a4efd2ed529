//! Irrationality exponents of Mahler numbers.
//!
//! A Mahler function is a Laurent series `f` solving
//! `B(z) f(z) = A(z) f(z^d) + C(z)`. The crate expands `f` exactly, computes
//! its continued fraction, studies the gaps between consecutive convergent
//! denominator degrees and turns them into the irrationality exponent of
//! `f(b)` for integers `b`.

pub mod algebra;
pub mod cfrac;
pub mod error;
pub mod exponent;
pub mod gaps;
pub mod numeric;
pub mod rationality;
pub mod series;

pub use algebra::{Degree, Polynomial, Rational};
pub use error::{Error, Result};
