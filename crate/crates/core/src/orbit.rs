//! Eventually periodic backward orbits `(x_0, x_1, x_2, …)` with
//! `f(x_{i+1}) = x_i`, i.e. points of the inverse limit `lim(I, f)` that admit
//! a finite description.
//!
//! Text form: `prefix: q_0 q_1 … ; period: r_0 r_1 …`. The orbit reads
//! `q_0, …, q_{L-1}, r_0, …, r_{p-1}, r_0, …`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ParseError;
use crate::plmap::PLMap;
use crate::rational::{format_rational, in_unit_interval, parse_rational, serde_rational_vec, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrbitError {
    #[error("the repeating block of an orbit cannot be empty")]
    EmptyPeriod,
    #[error("orbit entry {index} = {value} lies outside [0,1]")]
    OutOfRange { index: usize, value: Rational },
    #[error("f(x_{next}) = {image}, but x_{index} = {expected}")]
    Incompatible {
        index: usize,
        next: usize,
        image: Rational,
        expected: Rational,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawOrbit", into = "RawOrbit")]
pub struct BackwardOrbit {
    prefix: Vec<Rational>,
    period: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
struct RawOrbit {
    #[serde(with = "serde_rational_vec")]
    prefix: Vec<Rational>,
    #[serde(with = "serde_rational_vec")]
    period: Vec<Rational>,
}

impl TryFrom<RawOrbit> for BackwardOrbit {
    type Error = OrbitError;
    fn try_from(raw: RawOrbit) -> Result<Self, OrbitError> {
        BackwardOrbit::new(raw.prefix, raw.period)
    }
}

impl From<BackwardOrbit> for RawOrbit {
    fn from(o: BackwardOrbit) -> Self {
        RawOrbit { prefix: o.prefix, period: o.period }
    }
}

impl BackwardOrbit {
    pub fn new(prefix: Vec<Rational>, period: Vec<Rational>) -> Result<Self, OrbitError> {
        if period.is_empty() {
            return Err(OrbitError::EmptyPeriod);
        }
        for (index, value) in prefix.iter().chain(&period).enumerate() {
            if !in_unit_interval(value) {
                return Err(OrbitError::OutOfRange { index, value: value.clone() });
            }
        }
        Ok(BackwardOrbit { prefix, period })
    }

    /// The constant orbit `(q, q, q, …)`, valid when `q` is a fixed point.
    pub fn constant(q: Rational) -> Result<Self, OrbitError> {
        BackwardOrbit::new(Vec::new(), vec![q])
    }

    pub fn prefix(&self) -> &[Rational] {
        &self.prefix
    }

    pub fn period(&self) -> &[Rational] {
        &self.period
    }

    pub fn prefix_len(&self) -> usize {
        self.prefix.len()
    }

    pub fn period_len(&self) -> usize {
        self.period.len()
    }

    /// Coordinate `x_i`.
    pub fn get(&self, i: usize) -> &Rational {
        if i < self.prefix.len() {
            &self.prefix[i]
        } else {
            &self.period[(i - self.prefix.len()) % self.period.len()]
        }
    }

    /// Distinct coordinate values.
    pub fn values(&self) -> Vec<Rational> {
        let mut v: Vec<Rational> = self.prefix.iter().chain(&self.period).cloned().collect();
        v.sort();
        v.dedup();
        v
    }

    /// Checks `f(x_{i+1}) = x_i` across the prefix, the seam and the wrap-around.
    pub fn validate(&self, f: &PLMap) -> Result<(), OrbitError> {
        let span = self.prefix.len() + self.period.len();
        for index in 0..span {
            let next = index + 1;
            let image = f.at(self.get(next));
            if &image != self.get(index) {
                return Err(OrbitError::Incompatible {
                    index,
                    next,
                    image,
                    expected: self.get(index).clone(),
                });
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let body: String = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect::<Vec<_>>()
            .join(" ");
        let mut prefix = None;
        let mut period = None;
        for part in body.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, values) = part
                .split_once(':')
                .ok_or_else(|| ParseError::Orbit(format!("expected `key: values`, found `{part}`")))?;
            let values = values
                .split_whitespace()
                .map(parse_rational)
                .collect::<Result<Vec<_>, _>>()?;
            let slot = match key.trim() {
                "prefix" => &mut prefix,
                "period" => &mut period,
                other => return Err(ParseError::Orbit(format!("unknown section `{other}`"))),
            };
            if slot.replace(values).is_some() {
                return Err(ParseError::Orbit(format!("duplicate section `{}`", key.trim())));
            }
        }
        let period = period.ok_or_else(|| ParseError::Orbit("missing `period:` section".into()))?;
        BackwardOrbit::new(prefix.unwrap_or_default(), period).map_err(|e| ParseError::Orbit(e.to_string()))
    }

    /// Accepts `const:q` or the full text form.
    pub fn parse_spec(spec: &str) -> Result<Self, ParseError> {
        match spec.trim().strip_prefix("const:") {
            Some(q) => {
                let q = parse_rational(q)?;
                BackwardOrbit::constant(q).map_err(|e| ParseError::Orbit(e.to_string()))
            }
            None => BackwardOrbit::parse(spec),
        }
    }
}

impl fmt::Display for BackwardOrbit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |xs: &[Rational]| xs.iter().map(format_rational).collect::<Vec<_>>().join(" ");
        write!(f, "prefix: {} ; period: {}", join(&self.prefix), join(&self.period))
    }
}
