//! Equation files: `{"d": 3, "A": [...], "B": [...], "C": [...], "seeds": {...}}`.
//!
//! Coefficients are exact rationals written as strings (`"-3/2"`, `"7"`) or
//! JSON integers, lowest power first.

use std::collections::BTreeMap;
use std::fmt;

use mahler_core::algebra::{format_rational, parse_rational, Polynomial, Rational};
use mahler_core::series::{MahlerEquation, Seeds};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize};

/// One coefficient as read from the file.
#[derive(Clone, Debug, PartialEq)]
struct Coeff(Rational);

impl<'de> Deserialize<'de> for Coeff {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct CoeffVisitor;

        impl Visitor<'_> for CoeffVisitor {
            type Value = Coeff;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer or a rational string such as \"-3/2\"")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Coeff, E> {
                Ok(Coeff(Rational::from_integer(v.into())))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Coeff, E> {
                Ok(Coeff(Rational::from_integer(v.into())))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Coeff, E> {
                parse_rational(v).map(Coeff).map_err(E::custom)
            }
        }

        deserializer.deserialize_any(CoeffVisitor)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEquation {
    d: usize,
    #[serde(rename = "A")]
    a: Vec<Coeff>,
    #[serde(rename = "B")]
    b: Vec<Coeff>,
    #[serde(rename = "C")]
    c: Vec<Coeff>,
    #[serde(default)]
    seeds: BTreeMap<String, Coeff>,
    #[serde(default)]
    homogeneous: bool,
    #[serde(default, rename = "K")]
    k: Option<i64>,
}

/// A parsed equation file.
#[derive(Clone, Debug, PartialEq)]
pub struct EquationFile {
    pub equation: MahlerEquation,
    pub seeds: Seeds,
    /// Degree to use when several balance.
    pub degree: Option<i64>,
}

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

fn poly(c: Vec<Coeff>) -> Polynomial {
    Polynomial::new(c.into_iter().map(|x| x.0).collect())
}

impl EquationFile {
    /// Parses the JSON text; `origin` names the source in error messages.
    pub fn parse(text: &str, origin: &str) -> Result<Self, InputError> {
        let parse_err = |message: String| InputError::Parse {
            path: origin.to_string(),
            message,
        };
        let raw: RawEquation = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
        let (a, b, c) = (poly(raw.a), poly(raw.b), poly(raw.c));
        let equation = if raw.homogeneous {
            MahlerEquation::new_homogeneous_allowed(raw.d, a, b, c)
        } else {
            MahlerEquation::new(raw.d, a, b, c)
        }
        .map_err(|e| parse_err(e.to_string()))?;
        let mut seeds = Seeds::new();
        for (key, value) in raw.seeds {
            let k = key
                .trim()
                .replace('\u{2212}', "-")
                .parse::<i64>()
                .map_err(|_| parse_err(format!("seed key {key:?} is not an integer index")))?;
            seeds.insert(k, value.0);
        }
        Ok(EquationFile {
            equation,
            seeds,
            degree: raw.k,
        })
    }

    pub fn read(path: &str) -> Result<Self, InputError> {
        let text = std::fs::read_to_string(path).map_err(|source| InputError::Io {
            path: path.to_string(),
            source,
        })?;
        Self::parse(&text, path)
    }

    /// Applies `k=v` overrides from the command line.
    pub fn add_seeds(&mut self, specs: &[String]) -> Result<(), InputError> {
        for spec in specs {
            let (k, v) = spec.split_once('=').ok_or_else(|| {
                InputError::Invalid(format!("seed {spec:?} is not of the form k=v"))
            })?;
            let k = k
                .trim()
                .replace('\u{2212}', "-")
                .parse::<i64>()
                .map_err(|_| InputError::Invalid(format!("seed index {k:?} is not an integer")))?;
            let v = parse_rational(v)
                .map_err(|e| InputError::Invalid(format!("seed {spec:?}: {e}")))?;
            self.seeds.insert(k, v);
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(EquationJson::from(self)).expect("equation serializes")
    }
}

/// Serialized form; parsing it back yields the same equation.
#[derive(Serialize)]
pub struct EquationJson {
    pub d: usize,
    #[serde(rename = "A")]
    pub a: Polynomial,
    #[serde(rename = "B")]
    pub b: Polynomial,
    #[serde(rename = "C")]
    pub c: Polynomial,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub seeds: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub homogeneous: bool,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<i64>,
}

impl From<&EquationFile> for EquationJson {
    fn from(f: &EquationFile) -> Self {
        let eq = &f.equation;
        EquationJson {
            d: eq.d(),
            a: eq.a().clone(),
            b: eq.b().clone(),
            c: eq.c().clone(),
            seeds: f
                .seeds
                .iter()
                .map(|(k, v)| (k.to_string(), format_rational(v)))
                .collect(),
            homogeneous: eq.allows_homogeneous(),
            k: f.degree,
        }
    }
}
