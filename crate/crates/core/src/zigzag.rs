//! The zigzag predicate and its companions.
//!
//! Let `c_1 < … < c_m` be the turning points of `f`. A point `y` lies inside a
//! zigzag of `f` when, for every interior lap `[c_k, c_{k+1}]` containing `y`,
//! there are `a < c_k < c_{k+1} < b` such that on `[a,b]` the map attains its
//! global minimum at `a` and global maximum at `b` (decreasing lap), or its
//! global maximum at `a` and minimum at `b` (increasing lap). Points of the
//! first and last laps, closed, are never inside a zigzag.
//!
//! Extremum attainment is strict by default: the extreme value is taken at the
//! named end only. [`Extremum::NonStrict`] allows ties.
//!
//! Witness search only looks at breakpoints for `a` and `b`. If `a` works and
//! sits inside a segment, the segment rises away from `a` towards `c_k` (in the
//! oriented sense), so its left end works too; the same holds for `b`.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::interval::Interval;
use crate::plmap::{compose, Direction, Lap, MapError, PLMap};
use crate::rational::{in_unit_interval, one, Rational};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Extremum {
    #[default]
    Strict,
    NonStrict,
}

impl Extremum {
    /// `lhs` beats `rhs` as a minimum.
    fn below(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Extremum::Strict => lhs < rhs,
            Extremum::NonStrict => lhs <= rhs,
        }
    }
}

/// Decision for one point together with the evidence behind it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZigzagVerdict {
    pub in_zigzag: bool,
    /// Interior laps `[c_k, c_{k+1}]` containing the point.
    pub applicable_laps: Vec<Interval>,
    /// One entry per applicable lap: the `(a, b)` pair, if any.
    pub witnesses: Vec<Option<Interval>>,
    /// First lap through the point without a witness; boundary laps
    /// `[0, c_1]` and `[c_m, 1]` always fail.
    pub failing_lap: Option<Interval>,
}

/// Per-map precomputation shared by repeated zigzag queries.
#[derive(Debug, Clone)]
pub struct ZigzagAnalyzer<'a> {
    map: &'a PLMap,
    laps: Vec<Lap>,
    /// Breakpoint index of each lap's left end, plus the final index.
    lap_starts: Vec<usize>,
    /// Breakpoint values as they are, and reflected through 1/2.
    values: Vec<Rational>,
    reflected: Vec<Rational>,
    mode: Extremum,
}

impl<'a> ZigzagAnalyzer<'a> {
    pub fn new(map: &'a PLMap) -> Self {
        Self::with_mode(map, Extremum::default())
    }

    pub fn with_mode(map: &'a PLMap, mode: Extremum) -> Self {
        let laps = map.laps();
        let pts = map.breakpoints();
        let mut lap_starts = Vec::with_capacity(laps.len() + 1);
        let mut i = 0;
        for lap in &laps {
            while pts[i].x != lap.left {
                i += 1;
            }
            lap_starts.push(i);
        }
        lap_starts.push(pts.len() - 1);
        let values = pts.iter().map(|p| p.y.clone()).collect();
        let reflected = pts.iter().map(|p| one() - &p.y).collect();
        ZigzagAnalyzer { map, laps, lap_starts, values, reflected, mode }
    }

    pub fn laps(&self) -> &[Lap] {
        &self.laps
    }

    pub fn is_interior_lap(&self, k: usize) -> bool {
        k > 0 && k + 1 < self.laps.len()
    }

    /// A witness `(a, b)` for interior lap `k`, or `None`.
    pub fn lap_witness(&self, k: usize) -> Option<Interval> {
        if !self.is_interior_lap(k) {
            return None;
        }
        let pts = self.map.breakpoints();
        // Orient so the requirement is always "minimum at a, maximum at b".
        let w = match self.laps[k].direction {
            Direction::Decreasing => &self.values,
            Direction::Increasing => &self.reflected,
        };
        let ck = self.lap_starts[k];
        let ck1 = self.lap_starts[k + 1];
        let mode = self.mode;

        // Right candidates j > ck1, recorded when w[j] beats every value in
        // (c_{k+1}, b); keep alongside the minimum over (c_{k+1}, b].
        let mut records: Vec<(usize, Rational)> = Vec::new();
        let mut run_max: Option<Rational> = None;
        let mut run_min: Option<Rational> = None;
        #[allow(clippy::needless_range_loop)]
        for j in ck1 + 1..w.len() {
            let is_record = run_max.as_ref().is_none_or(|m| mode.below(m, &w[j]));
            run_min = Some(match run_min {
                Some(m) if m <= w[j] => m,
                _ => w[j].clone(),
            });
            if is_record {
                records.push((j, run_min.clone().unwrap()));
            }
            if run_max.as_ref().is_none_or(|m| *m < w[j]) {
                run_max = Some(w[j].clone());
            }
        }
        if records.is_empty() {
            return None;
        }

        // Left candidates i < ck, scanning outward from c_k.
        let mut left_min = w[ck1].clone().min(w[ck].clone());
        let mut left_max = w[ck].clone().max(w[ck1].clone());
        for i in (0..ck).rev() {
            if left_max < w[i] {
                left_max = w[i].clone();
            }
            if mode.below(&w[i], &left_min) {
                // Smallest record b whose value beats max over [a, c_{k+1}].
                let pos = records.partition_point(|(j, _)| !mode.below(&left_max, &w[*j]));
                if let Some((j, right_min)) = records.get(pos) {
                    if mode.below(&w[i], right_min) {
                        return Some(Interval::new(pts[i].x.clone(), pts[*j].x.clone()));
                    }
                }
            }
            if w[i] < left_min {
                left_min = w[i].clone();
            }
        }
        None
    }

    pub fn verdict(&self, y: &Rational) -> Result<ZigzagVerdict, MapError> {
        if !in_unit_interval(y) {
            return Err(MapError::OutOfDomain(y.clone()));
        }
        let mut applicable_laps = Vec::new();
        let mut witnesses = Vec::new();
        let mut failing_lap = None;
        for (k, lap) in self.laps.iter().enumerate().filter(|(_, l)| l.contains(y)) {
            let span = Interval::new(lap.left.clone(), lap.right.clone());
            if !self.is_interior_lap(k) {
                failing_lap.get_or_insert(span);
                continue;
            }
            let witness = self.lap_witness(k);
            if witness.is_none() {
                failing_lap.get_or_insert(span.clone());
            }
            applicable_laps.push(span);
            witnesses.push(witness);
        }
        Ok(ZigzagVerdict {
            in_zigzag: failing_lap.is_none() && !applicable_laps.is_empty(),
            applicable_laps,
            witnesses,
            failing_lap,
        })
    }

    pub fn contains(&self, y: &Rational) -> Result<bool, MapError> {
        self.verdict(y).map(|v| v.in_zigzag)
    }

    /// The zigzag region as disjoint open intervals, ascending.
    ///
    /// The verdict is constant on each open lap; a turning point shared by two
    /// witnessed interior laps is inside as well, so such laps merge.
    pub fn zigzag_set(&self) -> Vec<Interval> {
        let mut out: Vec<Interval> = Vec::new();
        let mut prev_witnessed = false;
        for k in 0..self.laps.len() {
            let witnessed = self.lap_witness(k).is_some();
            if witnessed {
                let lap = &self.laps[k];
                match out.last_mut() {
                    Some(last) if prev_witnessed && last.hi == lap.left => last.hi = lap.right.clone(),
                    _ => out.push(Interval::new(lap.left.clone(), lap.right.clone())),
                }
            }
            prev_witnessed = witnessed;
        }
        out
    }
}

pub fn is_in_zigzag(f: &PLMap, y: &Rational) -> Result<ZigzagVerdict, MapError> {
    ZigzagAnalyzer::new(f).verdict(y)
}

pub fn zigzag_set(f: &PLMap) -> Vec<Interval> {
    ZigzagAnalyzer::new(f).zigzag_set()
}

/// Re-checks a stored witness by exact evaluation at the breakpoints of `[a,b]`.
pub fn check_lap_witness(f: &PLMap, lap: &Interval, witness: &Interval, mode: Extremum) -> bool {
    if !(witness.lo < lap.lo && lap.hi < witness.hi) {
        return false;
    }
    let decreasing = f.at(&lap.lo) > f.at(&lap.hi);
    let (min_at, max_at) = if decreasing {
        (&witness.lo, &witness.hi)
    } else {
        (&witness.hi, &witness.lo)
    };
    let (vmin, vmax) = (f.at(min_at), f.at(max_at));
    let inner = f
        .breakpoints()
        .iter()
        .filter(|p| witness.lo < p.x && p.x < witness.hi)
        .map(|p| (&p.x, p.y.clone()));
    inner
        .chain([(min_at, vmin.clone()), (max_at, vmax.clone())])
        .all(|(x, v)| (x == min_at || mode.below(&vmin, &v)) && (x == max_at || mode.below(&v, &vmax)))
}

/// `remark_no_zigzag`: an interior lap one of whose ends maps to 0 or 1
/// contains no zigzag point.
pub fn remark_no_zigzag(f: &PLMap, k: usize) -> Result<bool, MapError> {
    let laps = f.laps();
    if k == 0 || k + 1 >= laps.len() {
        return Err(MapError::InvalidLap(k));
    }
    let extreme = |x: &Rational| {
        let v = f.at(x);
        v.is_zero() || v.is_one()
    };
    Ok(extreme(&laps[k].left) || extreme(&laps[k].right))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LemmaCase {
    /// `f(a) ∈ {0,1}` and `f` is one-to-one on `[y, b]`.
    AnchoredLeft,
    /// `f(b) ∈ {0,1}` and `f` is one-to-one on `[a, y]`.
    AnchoredRight,
    Both,
}

/// A certificate that `y` is not inside a zigzag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaWitness {
    #[serde(with = "crate::rational::serde_rational")]
    pub a: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub b: Rational,
    pub case: LemmaCase,
}

/// Searches for `a < b` with `y ∈ [a,b]`, no value of `(a,b)` equal to `f(a)`
/// or `f(b)`, and an end mapped to 0 or 1 on the side where `f` stays
/// one-to-one up to `y`. `None` is inconclusive.
pub fn lemma_witness(f: &PLMap, y: &Rational) -> Result<Option<LemmaWitness>, MapError> {
    if !in_unit_interval(y) {
        return Err(MapError::OutOfDomain(y.clone()));
    }
    let turning = f.critical_points(false);
    // Extent of monotonicity around y on each side.
    let right_end = turning.iter().find(|c| *c > y).cloned().unwrap_or_else(one);
    let left_end = turning.iter().rev().find(|c| *c < y).cloned().unwrap_or_else(Rational::zero);

    let xs: Vec<&Rational> = f.breakpoints().iter().map(|p| &p.x).collect();
    let anchor = |x: &Rational| {
        let v = f.at(x);
        v.is_zero() || v.is_one()
    };
    let anchors: Vec<&Rational> = xs.iter().copied().filter(|x| anchor(x)).collect();

    let mut right_side: Vec<Rational> =
        xs.iter().filter(|x| ***x > *y && ***x <= right_end).map(|x| (*x).clone()).collect();
    right_side.reverse();
    right_side.push(y.clone());
    let mut left_side: Vec<Rational> =
        xs.iter().filter(|x| ***x < *y && ***x >= left_end).map(|x| (*x).clone()).collect();
    left_side.push(y.clone());

    let check = |a: &Rational, b: &Rational| -> Option<LemmaWitness> {
        if a >= b || !(a <= y && y <= b) {
            return None;
        }
        let (fa, fb) = (f.at(a), f.at(b));
        let clear = |v: &Rational| f.level_crossings(v).iter().all(|t| t <= a || t >= b);
        if !clear(&fa) || !clear(&fb) {
            return None;
        }
        let injective = |lo: &Rational, hi: &Rational| !turning.iter().any(|c| lo < c && c < hi);
        let left = (fa.is_zero() || fa.is_one()) && injective(y, b);
        let right = (fb.is_zero() || fb.is_one()) && injective(a, y);
        let case = match (left, right) {
            (true, true) => LemmaCase::Both,
            (true, false) => LemmaCase::AnchoredLeft,
            (false, true) => LemmaCase::AnchoredRight,
            (false, false) => return None,
        };
        Some(LemmaWitness { a: a.clone(), b: b.clone(), case })
    };

    for a in anchors.iter().rev().filter(|a| **a <= y) {
        for b in &right_side {
            if let Some(w) = check(a, b) {
                return Ok(Some(w));
            }
        }
    }
    for b in anchors.iter().filter(|b| **b >= y) {
        for a in &left_side {
            if let Some(w) = check(a, b) {
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

/// Samples `y` where `y` is inside a zigzag of `g∘f` although neither `y`
/// is inside one of `f` nor `f(y)` inside one of `g`.
pub fn composition_property_check(f: &PLMap, g: &PLMap, samples: &[Rational]) -> Vec<Rational> {
    let gf = compose(g, f);
    let zz_gf = ZigzagAnalyzer::new(&gf);
    let zz_f = ZigzagAnalyzer::new(f);
    let zz_g = ZigzagAnalyzer::new(g);
    samples
        .iter()
        .filter(|y| in_unit_interval(y))
        .filter(|y| {
            zz_gf.contains(y).unwrap_or(false)
                && !zz_f.contains(y).unwrap_or(false)
                && !zz_g.contains(&f.at(y)).unwrap_or(false)
        })
        .cloned()
        .collect()
}

/// Lap midpoints of `f`, the natural sample set for zigzag checks.
pub fn lap_midpoints(f: &PLMap) -> Vec<Rational> {
    f.laps().iter().map(Lap::midpoint).collect()
}
