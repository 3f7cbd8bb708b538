//! Branches, post-critical orbits, Markov partitions and the leo property.
//!
//! For `y ∈ [0,1]`, `J(f,y)` is the maximal interval around `y` on which `f`
//! is one-to-one and `B(f,y) = f(J(f,y))` is the f-branch of `y`. At a turning
//! point there are two candidates `J_1` (left) and `J_2` (right); `J_1` is
//! chosen when `f(J_1) ⊆ f(J_2)`, otherwise `J_2`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interval::Interval;
use crate::orbit::{BackwardOrbit, OrbitError};
use crate::plmap::{Iterates, MapError, PLMap, DEFAULT_BREAKPOINT_BUDGET};
use crate::rational::{in_unit_interval, one, rat, serde_rational, zero, Rational};

/// Default number of forward steps tried per critical point.
pub const DEFAULT_ORBIT_BUDGET: usize = 10_000;
/// Orbits whose denominators outgrow this many bits are reported as not
/// closed instead of being followed further.
pub const MAX_ORBIT_DENOM_BITS: u64 = 1024;
/// Default dyadic depth of the cover used when no Markov partition is known.
pub const DEFAULT_FALLBACK_DEPTH: usize = 6;
/// Default cap on iterates examined by [`leo_uniform_n`].
pub const DEFAULT_MAX_ITERATES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("invalid orbit: {0}")]
    Orbit(OrbitError),
    #[error("map is not onto")]
    NotOnto,
    #[error("map is not verifiably post-critically finite (orbit budget {0})")]
    NotPostCriticallyFinite(usize),
    #[error("map is not leo ({0:?})")]
    NotLeo(Decision),
    #[error("no iterate up to f^{0} maps every window onto [0,1]")]
    IterateLimit(usize),
    #[error("branches at orbit index {index} did not stabilize within {depth} iterates")]
    Unstable { index: usize, depth: usize },
    #[error("nesting violated at orbit index {index}, iterate {j}")]
    NestingViolated { index: usize, j: usize },
    #[error("stabilization data failed re-verification: {0}")]
    Verification(String),
}

// Not `#[from]`: the message already carries the cause.
impl From<OrbitError> for DynamicsError {
    fn from(e: OrbitError) -> Self {
        DynamicsError::Orbit(e)
    }
}

/// Three-valued answer of the semi-decision procedures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Yes,
    No,
    Indeterminate,
}

impl Decision {
    pub fn is_yes(self) -> bool {
        self == Decision::Yes
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchResult {
    /// `J(f,y)`.
    pub domain: Interval,
    /// `B(f,y) = f(J(f,y))`.
    pub image: Interval,
    pub at_critical: bool,
    /// Set when `y` is critical and both candidate images coincide.
    pub tie_rule_applied: bool,
}

fn lap_image(f: &PLMap, lo: &Rational, hi: &Rational) -> Interval {
    let (a, b) = (f.at(lo), f.at(hi));
    if a < b {
        Interval::new(a, b)
    } else {
        Interval::new(b, a)
    }
}

pub fn branch(f: &PLMap, y: &Rational) -> Result<BranchResult, MapError> {
    if !in_unit_interval(y) {
        return Err(MapError::OutOfDomain(y.clone()));
    }
    let laps = f.laps();
    let i = laps.partition_point(|l| l.right < *y);
    let lap = &laps[i];
    if lap.right == *y && i + 1 < laps.len() {
        let next = &laps[i + 1];
        let j1 = Interval::new(lap.left.clone(), lap.right.clone());
        let j2 = Interval::new(next.left.clone(), next.right.clone());
        let (b1, b2) = (lap_image(f, &j1.lo, &j1.hi), lap_image(f, &j2.lo, &j2.hi));
        let tie = b1 == b2;
        let (domain, image) = if b2.contains_interval(&b1) { (j1, b1) } else { (j2, b2) };
        return Ok(BranchResult { domain, image, at_critical: true, tie_rule_applied: tie });
    }
    Ok(BranchResult {
        image: lap_image(f, &lap.left, &lap.right),
        domain: Interval::new(lap.left.clone(), lap.right.clone()),
        at_critical: false,
        tie_rule_applied: false,
    })
}

/// Forward orbit of one critical point (endpoints 0 and 1 included).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalOrbit {
    #[serde(with = "serde_rational")]
    pub point: Rational,
    /// `c, f(c), …` up to, not including, the first repeated value; or the
    /// truncated orbit when the budget ran out.
    #[serde(with = "crate::rational::serde_rational_vec")]
    pub orbit: Vec<Rational>,
    /// `k`: index of the first periodic value.
    pub preperiod: Option<usize>,
    /// `j`: minimal period.
    pub period: Option<usize>,
}

impl CriticalOrbit {
    pub fn is_closed(&self) -> bool {
        self.period.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitTable {
    pub entries: Vec<CriticalOrbit>,
    pub budget: usize,
}

impl OrbitTable {
    pub fn all_closed(&self) -> bool {
        self.entries.iter().all(CriticalOrbit::is_closed)
    }
}

/// Hash key for a reduced rational. Hashing `Ratio` itself expands a
/// continued fraction, which dominates on long orbits.
fn key(x: &Rational) -> (BigInt, BigInt) {
    (x.numer().clone(), x.denom().clone())
}

fn critical_orbit(f: &PLMap, c: &Rational, budget: usize) -> CriticalOrbit {
    let mut seen: HashMap<(BigInt, BigInt), usize> = HashMap::new();
    let mut orbit = Vec::new();
    let mut x = c.clone();
    for step in 0..=budget {
        if let Some(&k) = seen.get(&key(&x)) {
            return CriticalOrbit {
                point: c.clone(),
                orbit,
                preperiod: Some(k),
                period: Some(step - k),
            };
        }
        if x.denom().bits() > MAX_ORBIT_DENOM_BITS {
            break;
        }
        seen.insert(key(&x), step);
        let next = f.at(&x);
        orbit.push(x);
        x = next;
    }
    CriticalOrbit { point: c.clone(), orbit, preperiod: None, period: None }
}

pub fn post_critical_orbits(f: &PLMap) -> OrbitTable {
    post_critical_orbits_with_budget(f, DEFAULT_ORBIT_BUDGET)
}

pub fn post_critical_orbits_with_budget(f: &PLMap, budget: usize) -> OrbitTable {
    let entries = f
        .critical_points(true)
        .par_iter()
        .map(|c| critical_orbit(f, c, budget))
        .collect();
    OrbitTable { entries, budget }
}

/// `No` is never returned: an orbit that has not closed yet may still close.
pub fn is_post_critically_finite(f: &PLMap) -> Decision {
    if post_critical_orbits(f).all_closed() {
        Decision::Yes
    } else {
        Decision::Indeterminate
    }
}

/// Critical set together with every post-critical point, sorted.
pub fn markov_partition(f: &PLMap) -> Option<Vec<Rational>> {
    markov_partition_from(&post_critical_orbits(f))
}

pub fn markov_partition_from(table: &OrbitTable) -> Option<Vec<Rational>> {
    if !table.all_closed() {
        return None;
    }
    let mut p: Vec<Rational> = table.entries.iter().flat_map(|e| e.orbit.iter().cloned()).collect();
    p.sort();
    p.dedup();
    Some(p)
}

/// `M[u][v]` is set when `f([p_u,p_{u+1}]) ⊇ [p_v,p_{v+1}]`.
pub fn transition_matrix(f: &PLMap, partition: &[Rational]) -> Vec<Vec<bool>> {
    let cells: Vec<Interval> =
        partition.windows(2).map(|w| Interval::new(w[0].clone(), w[1].clone())).collect();
    cells
        .iter()
        .map(|u| {
            let (lo, hi) = f.image(&u.lo, &u.hi);
            let img = Interval::new(lo, hi);
            cells.iter().map(|v| img.contains_interval(v)).collect()
        })
        .collect()
}

/// Whether `partition` is a Markov partition of `f`: it contains 0, 1 and the
/// turning points, is mapped into itself, and every cell is sent exactly onto
/// the union of the cells flagged in its matrix row.
pub fn is_markov(f: &PLMap, partition: &[Rational]) -> bool {
    let ok_shape = partition.len() >= 2
        && partition[0].is_zero()
        && partition[partition.len() - 1].is_one()
        && partition.windows(2).all(|w| w[0] < w[1]);
    if !ok_shape {
        return false;
    }
    let member = |x: &Rational| partition.binary_search(x).is_ok();
    if !f.critical_points(false).iter().all(member) || !partition.iter().all(|x| member(&f.at(x))) {
        return false;
    }
    let m = transition_matrix(f, partition);
    partition.windows(2).zip(&m).all(|(w, row)| {
        let (lo, hi) = f.image(&w[0], &w[1]);
        let first = row.iter().position(|&b| b);
        let last = row.iter().rposition(|&b| b);
        match (first, last) {
            (Some(s), Some(e)) => {
                row[s..=e].iter().all(|&b| b) && lo == partition[s] && hi == partition[e + 1]
            }
            _ => false,
        }
    })
}

fn bool_product(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).any(|k| a[i][k] && b[k][j])).collect())
        .collect()
}

/// Primitivity through the graph of `M`: strongly connected with period 1.
/// Linear in the number of entries, unlike [`primitivity_exponent`].
pub fn is_primitive(m: &[Vec<bool>]) -> bool {
    let n = m.len();
    if n == 0 {
        return false;
    }
    let bfs = |forward: bool| {
        let mut level = vec![usize::MAX; n];
        level[0] = 0;
        let mut queue = std::collections::VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                let edge = if forward { m[u][v] } else { m[v][u] };
                if edge && level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        level
    };
    let level = bfs(true);
    if level.contains(&usize::MAX) || bfs(false).contains(&usize::MAX) {
        return false;
    }
    // The period is the gcd of level[u] + 1 − level[v] over all edges u → v.
    let mut period = 0usize;
    for u in 0..n {
        for v in (0..n).filter(|&v| m[u][v]) {
            period = period.gcd(&(level[u] + 1).abs_diff(level[v]));
        }
    }
    period == 1
}

/// Least `k` with `M^k` strictly positive, searched up to the Wielandt bound
/// `n² − 2n + 2`; `None` if `M` is not primitive.
pub fn primitivity_exponent(m: &[Vec<bool>]) -> Option<usize> {
    let n = m.len();
    if n == 0 {
        return None;
    }
    let bound = n * n + 2 - 2 * n;
    let mut power = m.to_vec();
    for k in 1..=bound {
        if power.iter().all(|row| row.iter().all(|&b| b)) {
            return Some(k);
        }
        power = bool_product(&power, m);
    }
    None
}

/// Outcome of iterating the images of a dyadic cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverOutcome {
    /// Every cell reached `[0,1]` within the given number of steps.
    AllOnto { steps: usize },
    /// Some cell's images cycle without reaching `[0,1]`.
    Trapped,
    Unresolved,
}

/// Iterates exact images of the cells `[i/2^d, (i+1)/2^d]` of depth `d`.
///
/// A repeated image that is not `[0,1]` proves the map is not leo. All cells
/// reaching `[0,1]` is evidence at this resolution only.
pub fn cover_semi_decision(f: &PLMap, depth: usize, max_steps: usize) -> CoverOutcome {
    let cells = 1usize << depth.min(20);
    let width = rat(1, cells as i64);
    let mut worst = 0;
    for i in 0..cells {
        let lo = &width * Rational::from_integer((i as i64).into());
        let hi = &lo + &width;
        let mut cur = Interval::new(lo, hi);
        let mut seen = std::collections::HashSet::new();
        let mut reached = None;
        for step in 1..=max_steps {
            let (a, b) = f.image(&cur.lo, &cur.hi);
            cur = Interval::new(a, b);
            if cur.is_unit() {
                reached = Some(step);
                break;
            }
            if !seen.insert((key(&cur.lo), key(&cur.hi))) {
                return CoverOutcome::Trapped;
            }
        }
        match reached {
            Some(s) => worst = worst.max(s),
            None => return CoverOutcome::Unresolved,
        }
    }
    CoverOutcome::AllOnto { steps: worst }
}

/// Every segment of `g` has slope of absolute value above 1.
pub fn is_expanding(g: &PLMap) -> bool {
    g.breakpoints().windows(2).all(|w| {
        let dy = &w[1].y - &w[0].y;
        let dx = &w[1].x - &w[0].x;
        (if dy < zero() { -dy } else { dy }) > dx
    })
}

/// Iterates tried when looking for an expanding power.
const EXPANSION_PROBE: usize = 3;

/// Decides leo through a Markov partition when one is supplied and valid,
/// otherwise falls back to [`cover_semi_decision`] at `fallback_depth`.
///
/// A non-primitive matrix always means "not leo": some cell never covers
/// `[0,1]`. A primitive one means leo only for expanding maps (the trivial
/// partition of the identity is primitive), so primitivity is trusted when
/// one of the first few iterates is expanding and the cover check runs
/// otherwise.
pub fn is_leo(f: &PLMap, markov: Option<&[Rational]>, fallback_depth: usize) -> Decision {
    if !f.is_onto() {
        return Decision::No;
    }
    if let Some(p) = markov.filter(|p| is_markov(f, p)) {
        let m = transition_matrix(f, p);
        if !is_primitive(&m) {
            return Decision::No;
        }
        let mut it = Iterates::new(f, DEFAULT_BREAKPOINT_BUDGET);
        let expanding = (1..=EXPANSION_PROBE).any(|k| it.get(k).is_ok_and(is_expanding));
        if expanding {
            return Decision::Yes;
        }
    }
    match cover_semi_decision(f, fallback_depth, DEFAULT_ORBIT_BUDGET.min(256)) {
        CoverOutcome::AllOnto { .. } => Decision::Yes,
        CoverOutcome::Trapped => Decision::No,
        CoverOutcome::Unresolved => Decision::Indeterminate,
    }
}

/// [`is_leo`] with the partition computed from the post-critical orbits.
pub fn is_leo_auto(f: &PLMap) -> Decision {
    let p = markov_partition(f);
    is_leo(f, p.as_deref(), DEFAULT_FALLBACK_DEPTH)
}

/// Whether every closed window of length `eps` in `[0,1]` contains both a
/// zero and a one of `g`, i.e. `g(J) = [0,1]` whenever `diam J ≥ eps`.
pub fn windows_onto(g: &PLMap, eps: &Rational) -> bool {
    let eps = if *eps > one() { one() } else { eps.clone() };
    let covers = |pts: Vec<Rational>| {
        let (Some(first), Some(last)) = (pts.first(), pts.last()) else {
            return false;
        };
        *first <= eps
            && one() - last <= eps
            && pts.windows(2).all(|w| &w[1] - &w[0] <= eps)
    };
    covers(g.level_crossings(&zero())) && covers(g.level_crossings(&one()))
}

/// Least `N` with `f^N(J) = [0,1]` for every interval `J` of diameter `≥ eps`.
///
/// Computed exactly from the zeros and ones of the iterates. Once it holds
/// for `f^N` it holds for all later iterates, since `f` is onto.
pub fn leo_uniform_n(f: &PLMap, eps: &Rational) -> Result<usize, DynamicsError> {
    let mut it = Iterates::new(f, DEFAULT_BREAKPOINT_BUDGET);
    leo_uniform_n_with(&mut it, eps, DEFAULT_MAX_ITERATES)
}

pub fn leo_uniform_n_with(it: &mut Iterates, eps: &Rational, max_n: usize) -> Result<usize, DynamicsError> {
    if !it.base().is_onto() {
        return Err(DynamicsError::NotOnto);
    }
    assert!(*eps > zero(), "eps must be positive");
    for n in 1..=max_n {
        if windows_onto(it.get(n)?, eps) {
            return Ok(n);
        }
    }
    Err(DynamicsError::IterateLimit(max_n))
}

/// Which end of `[a,b]` the tracked coordinates keep away from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapSide {
    /// `[a, a+ε)` holds no coordinate.
    LeftGap,
    /// `(b−ε, b]` holds no coordinate.
    RightGap,
}

/// The data `(a, b, ε, n_i)` with `B(f^{n_i − n_{i−1}}, x_{n_i}) = [a,b]`.
///
/// Here `n_i = first + i·step`; every `x_{n_i}` is the same coordinate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizationData {
    #[serde(with = "serde_rational")]
    pub a: Rational,
    #[serde(with = "serde_rational")]
    pub b: Rational,
    #[serde(with = "serde_rational")]
    pub epsilon: Rational,
    pub side: GapSide,
    /// `n_0`.
    pub first: usize,
    /// `n_i − n_{i−1}`, a multiple of the orbit period.
    pub step: usize,
    /// Iterate depth from which `B(f^j, x_{n_0 + j})` is constant.
    pub depth: usize,
    /// Uniform leo exponent for windows of length `ε/2`.
    pub uniform_n: usize,
}

impl StabilizationData {
    pub fn n(&self, i: usize) -> usize {
        self.first + i * self.step
    }

    pub fn interval(&self) -> Interval {
        Interval::new(self.a.clone(), self.b.clone())
    }

    /// The window handed to the `β` search: `[a, a+ε)` or `(b−ε, b]`, as
    /// a closed interval whose open end is implied by `side`.
    pub fn window(&self) -> Interval {
        match self.side {
            GapSide::LeftGap => Interval::new(self.a.clone(), &self.a + &self.epsilon),
            GapSide::RightGap => Interval::new(&self.b - &self.epsilon, self.b.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StabilizationOptions {
    /// Largest iterate `j` examined for each `A_i`.
    pub max_depth: usize,
    pub orbit_budget: usize,
    pub breakpoint_budget: usize,
    pub fallback_depth: usize,
}

impl Default for StabilizationOptions {
    fn default() -> Self {
        StabilizationOptions {
            max_depth: 64,
            orbit_budget: DEFAULT_ORBIT_BUDGET,
            breakpoint_budget: DEFAULT_BREAKPOINT_BUDGET,
            fallback_depth: DEFAULT_FALLBACK_DEPTH,
        }
    }
}

/// `A_i = ⋂_j B(f^j, x_{i+j})` and the least `j` from which the sequence is
/// constant. Stability is declared after one orbit period of equal values.
pub fn stable_branch(
    it: &mut Iterates,
    orbit: &BackwardOrbit,
    i: usize,
    max_depth: usize,
) -> Result<(Interval, usize), DynamicsError> {
    let p = orbit.period_len();
    let mut prev: Option<Interval> = None;
    let mut run_start = 1;
    for j in 1..=max_depth {
        let b = branch(it.get(j)?, orbit.get(i + j))?.image;
        match &prev {
            Some(q) if *q == b => {
                if j - run_start >= p {
                    return Ok((b, run_start));
                }
            }
            Some(q) => {
                if !q.contains_interval(&b) {
                    return Err(DynamicsError::NestingViolated { index: i, j });
                }
                run_start = j;
            }
            None => {}
        }
        prev = Some(b);
    }
    Err(DynamicsError::Unstable { index: i, depth: max_depth })
}

pub fn branch_stabilization(
    f: &PLMap,
    orbit: &BackwardOrbit,
    opts: &StabilizationOptions,
) -> Result<StabilizationData, DynamicsError> {
    let mut it = Iterates::new(f, opts.breakpoint_budget);
    branch_stabilization_with(&mut it, orbit, opts)
}

pub fn branch_stabilization_with(
    it: &mut Iterates,
    orbit: &BackwardOrbit,
    opts: &StabilizationOptions,
) -> Result<StabilizationData, DynamicsError> {
    let f = it.base().clone();
    orbit.validate(&f)?;
    if !f.is_onto() {
        return Err(DynamicsError::NotOnto);
    }
    let table = post_critical_orbits_with_budget(&f, opts.orbit_budget);
    let partition =
        markov_partition_from(&table).ok_or(DynamicsError::NotPostCriticallyFinite(opts.orbit_budget))?;
    let leo = is_leo(&f, Some(&partition), opts.fallback_depth);
    if !leo.is_yes() {
        return Err(DynamicsError::NotLeo(leo));
    }

    // The first index of the periodic part whose branch leaves a gap.
    let first = orbit.prefix_len();
    let (ab, depth) = stable_branch(it, orbit, first, opts.max_depth)?;
    let y = orbit.get(first);
    let left = y - &ab.lo;
    let right = &ab.hi - y;
    let (side, gap) = if left > zero() { (GapSide::LeftGap, left) } else { (GapSide::RightGap, right) };
    let width = ab.length();
    let epsilon = (if gap < width { gap } else { width }) / rat(2, 1);
    let uniform_n = leo_uniform_n_with(it, &(&epsilon / rat(2, 1)), opts.max_depth)?;

    let p = orbit.period_len();
    let need = uniform_n.max(depth).max(1);
    let step = need.div_ceil(p) * p;

    let data = StabilizationData { a: ab.lo, b: ab.hi, epsilon, side, first, step, depth, uniform_n };
    verify_stabilization(it, orbit, &data, 2)?;
    Ok(data)
}

/// Re-checks the three conditions for `n_1, …, n_stages` exactly.
pub fn verify_stabilization(
    it: &mut Iterates,
    orbit: &BackwardOrbit,
    data: &StabilizationData,
    stages: usize,
) -> Result<(), DynamicsError> {
    let fail = |m: String| Err(DynamicsError::Verification(m));
    if !data.step.is_multiple_of(orbit.period_len()) || data.first < orbit.prefix_len() {
        return fail("n_i do not track a single periodic coordinate".into());
    }
    let target = data.interval();
    let window = data.window();
    let block = it.get(data.step)?.clone();
    for i in 0..=stages {
        let x = orbit.get(data.n(i));
        let in_gap = match data.side {
            GapSide::LeftGap => window.lo <= *x && *x < window.hi,
            GapSide::RightGap => window.lo < *x && *x <= window.hi,
        };
        if in_gap {
            return fail(format!("x_{} = {x} lies in the gap window {window}", data.n(i)));
        }
        if i >= 1 {
            let b = branch(&block, x)?.image;
            if b != target {
                return fail(format!("B(f^{}, x_{}) = {b}, expected {target}", data.step, data.n(i)));
            }
        }
    }
    if !windows_onto(&block, &(&data.epsilon / rat(2, 1))) {
        return fail(format!("f^{} does not map every ε/2-window onto [0,1]", data.step));
    }
    Ok(())
}
