use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use serde::{Serialize, Serializer};

/// Degree of a polynomial or Laurent series.
///
/// The zero element has degree [`Degree::MinusInfinity`], which compares
/// below every finite degree and absorbs addition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Degree {
    MinusInfinity,
    Finite(i64),
}

impl Degree {
    pub fn finite(self) -> Option<i64> {
        match self {
            Degree::Finite(d) => Some(d),
            Degree::MinusInfinity => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Degree::Finite(_))
    }
}

impl Ord for Degree {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Degree::MinusInfinity, Degree::MinusInfinity) => Ordering::Equal,
            (Degree::MinusInfinity, _) => Ordering::Less,
            (_, Degree::MinusInfinity) => Ordering::Greater,
            (Degree::Finite(a), Degree::Finite(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Degree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Degree {
    type Output = Degree;

    fn add(self, rhs: Degree) -> Degree {
        match (self, rhs) {
            (Degree::Finite(a), Degree::Finite(b)) => Degree::Finite(a + b),
            _ => Degree::MinusInfinity,
        }
    }
}

impl From<usize> for Degree {
    fn from(d: usize) -> Self {
        Degree::Finite(d as i64)
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::MinusInfinity => write!(f, "-inf"),
            Degree::Finite(d) => write!(f, "{d}"),
        }
    }
}

impl Serialize for Degree {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Degree::Finite(d) => serializer.serialize_i64(*d),
            Degree::MinusInfinity => serializer.serialize_str("-inf"),
        }
    }
}
