//! Piecewise-linear self-maps of the unit interval.
//!
//! A [`PLMap`] is stored as its breakpoint list `(x_0, y_0), …, (x_n, y_n)`
//! with `x_0 = 0`, `x_n = 1` and strictly increasing abscissae. The list is
//! kept normalized: no interior breakpoint is collinear with its neighbours,
//! so two maps are equal exactly when their breakpoint lists are equal.
//! Constant segments are rejected; every map is piecewise strictly monotone.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::error::ParseError;
use crate::rational::{format_rational, in_unit_interval, one, parse_rational, zero, Rational};

/// Default cap on the breakpoint count of any map produced by composition.
pub const DEFAULT_BREAKPOINT_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("a map needs at least two breakpoints")]
    TooFewPoints,
    #[error("domain must start at 0, found {0}")]
    DomainStart(Rational),
    #[error("domain must end at 1, found {0}")]
    DomainEnd(Rational),
    #[error("breakpoint {index}: x-coordinates must be strictly increasing")]
    NonIncreasing { index: usize },
    #[error("breakpoint {index}: value {value} outside [0,1]")]
    ValueOutOfRange { index: usize, value: Rational },
    #[error("segment {index} is constant; maps must be piecewise strictly monotone")]
    ConstantSegment { index: usize },
    #[error("point {0} outside [0,1]")]
    OutOfDomain(Rational),
    #[error("lap {0} is not an interior lap")]
    InvalidLap(usize),
    #[error("iterate count must be at least 1")]
    ZeroIterate,
    #[error("breakpoint budget exceeded: {needed} > {budget}")]
    BudgetExceeded { needed: usize, budget: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Breakpoint {
    pub x: Rational,
    pub y: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Increasing => Direction::Decreasing,
            Direction::Decreasing => Direction::Increasing,
        }
    }
}

/// A maximal interval on which the map is strictly monotone.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Lap {
    pub left: Rational,
    pub right: Rational,
    pub direction: Direction,
}

impl Lap {
    pub fn contains(&self, y: &Rational) -> bool {
        self.left <= *y && *y <= self.right
    }

    pub fn midpoint(&self) -> Rational {
        (&self.left + &self.right) / Rational::from_integer(2.into())
    }
}

/// A normalized piecewise-linear map `[0,1] → [0,1]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PLMap {
    points: Vec<Breakpoint>,
}

impl PLMap {
    /// Builds and normalizes a map from its vertex list.
    pub fn new<I>(points: I) -> Result<Self, MapError>
    where
        I: IntoIterator<Item = (Rational, Rational)>,
    {
        let points: Vec<Breakpoint> = points.into_iter().map(|(x, y)| Breakpoint { x, y }).collect();
        if points.len() < 2 {
            return Err(MapError::TooFewPoints);
        }
        if !points[0].x.is_zero() {
            return Err(MapError::DomainStart(points[0].x.clone()));
        }
        let last = &points[points.len() - 1];
        if !last.x.is_one() {
            return Err(MapError::DomainEnd(last.x.clone()));
        }
        for (index, p) in points.iter().enumerate() {
            if index > 0 && points[index - 1].x >= p.x {
                return Err(MapError::NonIncreasing { index });
            }
            if !in_unit_interval(&p.y) {
                return Err(MapError::ValueOutOfRange { index, value: p.y.clone() });
            }
        }
        for (index, w) in points.windows(2).enumerate() {
            if w[0].y == w[1].y {
                return Err(MapError::ConstantSegment { index });
            }
        }
        let before = points.len();
        let points = normalize(points);
        if points.len() < before {
            log::debug!("merged {} collinear breakpoint(s)", before - points.len());
        }
        Ok(PLMap { points })
    }

    /// Builds from vertices already known to satisfy the invariants
    /// (ordered, in range, no flat segments); only normalization is applied.
    pub(crate) fn from_valid(points: Vec<Breakpoint>) -> Self {
        debug_assert!(points.len() >= 2);
        debug_assert!(points.windows(2).all(|w| w[0].x < w[1].x && w[0].y != w[1].y));
        PLMap { points: normalize(points) }
    }

    pub fn identity() -> Self {
        PLMap {
            points: vec![
                Breakpoint { x: zero(), y: zero() },
                Breakpoint { x: one(), y: one() },
            ],
        }
    }

    pub fn breakpoints(&self) -> &[Breakpoint] {
        &self.points
    }

    pub fn pairs(&self) -> Vec<(Rational, Rational)> {
        self.points.iter().map(|p| (p.x.clone(), p.y.clone())).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Exact value at `x`.
    pub fn eval(&self, x: &Rational) -> Result<Rational, MapError> {
        if !in_unit_interval(x) {
            return Err(MapError::OutOfDomain(x.clone()));
        }
        Ok(self.at(x))
    }

    /// Evaluation without the domain check; `x` must lie in `[0,1]`.
    pub(crate) fn at(&self, x: &Rational) -> Rational {
        let i = self.points.partition_point(|p| p.x < *x);
        if i < self.points.len() && self.points[i].x == *x {
            return self.points[i].y.clone();
        }
        debug_assert!(i > 0 && i < self.points.len(), "{x} outside the domain");
        interpolate(&self.points[i - 1], &self.points[i], x)
    }

    fn segment_direction(&self, segment: usize) -> Direction {
        if self.points[segment + 1].y > self.points[segment].y {
            Direction::Increasing
        } else {
            Direction::Decreasing
        }
    }

    /// Interior turning points; with `include_endpoints`, also 0 and 1.
    pub fn critical_points(&self, include_endpoints: bool) -> Vec<Rational> {
        let mut out = Vec::new();
        if include_endpoints {
            out.push(zero());
        }
        for i in 1..self.points.len() - 1 {
            if self.segment_direction(i - 1) != self.segment_direction(i) {
                out.push(self.points[i].x.clone());
            }
        }
        if include_endpoints {
            out.push(one());
        }
        out
    }

    pub fn is_critical(&self, x: &Rational) -> bool {
        let i = self.points.partition_point(|p| p.x < *x);
        i > 0
            && i + 1 < self.points.len()
            && self.points[i].x == *x
            && self.segment_direction(i - 1) != self.segment_direction(i)
    }

    pub fn laps(&self) -> Vec<Lap> {
        let segments = self.points.len() - 1;
        let mut laps = Vec::new();
        let mut start = 0;
        for seg in 1..=segments {
            if seg == segments || self.segment_direction(seg) != self.segment_direction(start) {
                laps.push(Lap {
                    left: self.points[start].x.clone(),
                    right: self.points[seg].x.clone(),
                    direction: self.segment_direction(start),
                });
                start = seg;
            }
        }
        laps
    }

    /// Index of the lap whose interior or left end contains `x`; the last lap
    /// also owns `x = 1`.
    pub fn lap_index(&self, laps: &[Lap], x: &Rational) -> usize {
        let i = laps.partition_point(|l| l.right <= *x);
        i.min(laps.len() - 1)
    }

    /// All solutions of `f(x) = level`, ascending.
    pub fn level_crossings(&self, level: &Rational) -> Vec<Rational> {
        let mut out: Vec<Rational> = Vec::new();
        for w in self.points.windows(2) {
            let (p, q) = (&w[0], &w[1]);
            let (lo, hi) = if p.y < q.y { (&p.y, &q.y) } else { (&q.y, &p.y) };
            if level < lo || level > hi {
                continue;
            }
            let x = if *level == p.y {
                p.x.clone()
            } else if *level == q.y {
                q.x.clone()
            } else {
                &p.x + (level - &p.y) * (&q.x - &p.x) / (&q.y - &p.y)
            };
            if out.last() != Some(&x) {
                out.push(x);
            }
        }
        out
    }

    /// `f([lo, hi])` as a closed interval `(min, max)`.
    pub fn image(&self, lo: &Rational, hi: &Rational) -> (Rational, Rational) {
        debug_assert!(lo <= hi);
        let a = self.at(lo);
        let b = self.at(hi);
        let (mut min, mut max) = if a < b { (a, b) } else { (b, a) };
        let start = self.points.partition_point(|p| p.x <= *lo);
        for p in self.points[start..].iter().take_while(|p| p.x < *hi) {
            if p.y < min {
                min = p.y.clone();
            }
            if p.y > max {
                max = p.y.clone();
            }
        }
        (min, max)
    }

    pub fn min_value(&self) -> &Rational {
        self.points.iter().map(|p| &p.y).min().expect("nonempty")
    }

    pub fn max_value(&self) -> &Rational {
        self.points.iter().map(|p| &p.y).max().expect("nonempty")
    }

    pub fn is_onto(&self) -> bool {
        self.min_value().is_zero() && self.max_value().is_one()
    }

    /// Text form: one `x y` breakpoint per line.
    pub fn to_map_file(&self) -> String {
        let mut s = String::new();
        for p in &self.points {
            s.push_str(&format_rational(&p.x));
            s.push(' ');
            s.push_str(&format_rational(&p.y));
            s.push('\n');
        }
        s
    }

    pub fn from_map_file(text: &str) -> Result<Self, ParseError> {
        let mut pts = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(ParseError::Line {
                    line: n + 1,
                    message: format!("expected `x y`, found `{line}`"),
                });
            }
            let parse = |s: &str| {
                parse_rational(s).map_err(|e| ParseError::Line { line: n + 1, message: e.to_string() })
            };
            pts.push((parse(fields[0])?, parse(fields[1])?));
        }
        PLMap::new(pts).map_err(|e| ParseError::Map(e.to_string()))
    }
}

impl fmt::Display for PLMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, p) in self.points.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({}, {})", p.x, p.y)?;
        }
        f.write_str("]")
    }
}

impl Serialize for PLMap {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let raw: Vec<[String; 2]> = self
            .points
            .iter()
            .map(|p| [format_rational(&p.x), format_rational(&p.y)])
            .collect();
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PLMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = Vec::<[String; 2]>::deserialize(d)?;
        let mut pts = Vec::with_capacity(raw.len());
        for [x, y] in &raw {
            let x = parse_rational(x).map_err(serde::de::Error::custom)?;
            let y = parse_rational(y).map_err(serde::de::Error::custom)?;
            pts.push((x, y));
        }
        PLMap::new(pts).map_err(serde::de::Error::custom)
    }
}

fn interpolate(p: &Breakpoint, q: &Breakpoint, x: &Rational) -> Rational {
    &p.y + (&q.y - &p.y) * (x - &p.x) / (&q.x - &p.x)
}

fn collinear(p: &Breakpoint, q: &Breakpoint, r: &Breakpoint) -> bool {
    (&q.y - &p.y) * (&r.x - &q.x) == (&r.y - &q.y) * (&q.x - &p.x)
}

fn normalize(points: Vec<Breakpoint>) -> Vec<Breakpoint> {
    let mut out: Vec<Breakpoint> = Vec::with_capacity(points.len());
    for p in points {
        if let Some(last) = out.last() {
            if last.x == p.x {
                continue;
            }
        }
        while out.len() >= 2 && collinear(&out[out.len() - 2], &out[out.len() - 1], &p) {
            out.pop();
        }
        out.push(p);
    }
    out
}

/// `outer ∘ inner` with no breakpoint budget.
pub fn compose(outer: &PLMap, inner: &PLMap) -> PLMap {
    compose_with_budget(outer, inner, usize::MAX).expect("unbounded budget")
}

/// `outer ∘ inner`, failing once the raw breakpoint count exceeds `budget`.
///
/// Breakpoints of the composite are the breakpoints of `inner` together with
/// the preimages under `inner` of the breakpoint abscissae of `outer`.
pub fn compose_with_budget(outer: &PLMap, inner: &PLMap, budget: usize) -> Result<PLMap, MapError> {
    let op = &outer.points;
    let mut out: Vec<Breakpoint> = Vec::with_capacity(inner.points.len() * 2);
    let first = &inner.points[0];
    out.push(Breakpoint { x: first.x.clone(), y: outer.at(&first.y) });
    for w in inner.points.windows(2) {
        let (p, q) = (&w[0], &w[1]);
        let (lo, hi) = if p.y < q.y { (&p.y, &q.y) } else { (&q.y, &p.y) };
        let from = op.partition_point(|b| b.x <= *lo);
        let to = op.partition_point(|b| b.x < *hi);
        if from < to {
            let slope_inv = (&q.x - &p.x) / (&q.y - &p.y);
            let mut push = |b: &Breakpoint| {
                let x = &p.x + (&b.x - &p.y) * &slope_inv;
                out.push(Breakpoint { x, y: b.y.clone() });
            };
            if p.y < q.y {
                op[from..to].iter().for_each(&mut push);
            } else {
                op[from..to].iter().rev().for_each(&mut push);
            }
        }
        out.push(Breakpoint { x: q.x.clone(), y: outer.at(&q.y) });
        if out.len() > budget {
            return Err(MapError::BudgetExceeded { needed: out.len(), budget });
        }
    }
    Ok(PLMap { points: normalize(out) })
}

/// The `n`-fold iterate `f^n`, `n ≥ 1`.
pub fn iterate(f: &PLMap, n: usize) -> Result<PLMap, MapError> {
    iterate_with_budget(f, n, DEFAULT_BREAKPOINT_BUDGET)
}

pub fn iterate_with_budget(f: &PLMap, n: usize, budget: usize) -> Result<PLMap, MapError> {
    if n == 0 {
        return Err(MapError::ZeroIterate);
    }
    let mut acc = f.clone();
    for _ in 1..n {
        acc = compose_with_budget(&acc, f, budget)?;
    }
    Ok(acc)
}

/// Lazily computed iterates `f, f², f³, …` sharing one budget.
#[derive(Debug, Clone)]
pub struct Iterates {
    powers: Vec<PLMap>,
    budget: usize,
}

impl Iterates {
    pub fn new(f: &PLMap, budget: usize) -> Self {
        Iterates { powers: vec![f.clone()], budget }
    }

    pub fn base(&self) -> &PLMap {
        &self.powers[0]
    }

    /// `f^n`, extending the cache as needed.
    pub fn get(&mut self, n: usize) -> Result<&PLMap, MapError> {
        if n == 0 {
            return Err(MapError::ZeroIterate);
        }
        while self.powers.len() < n {
            let next = compose_with_budget(self.powers.last().unwrap(), &self.powers[0], self.budget)?;
            self.powers.push(next);
        }
        Ok(&self.powers[n - 1])
    }
}
