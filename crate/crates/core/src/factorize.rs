//! Factorizations `f = t∘s` of a bonding map and the certification pipelines.
//!
//! Case 1, with `f(β) = 0` and some `α < β` with `f(α) = 1`:
//!
//! ```text
//! s(y) = β(1 − f(y))  on [0,β],   y     on [β,1]
//! t(y) = 1 − y/β      on [0,β],   f(y)  on [β,1]
//! ```
//!
//! Case 2, with `f(β) = 1` and some `γ > β` with `f(γ) = 0`:
//!
//! ```text
//! s(y) = y            on [0,β],   1 − (1−β)f(y)     on [β,1]
//! t(y) = f(y)         on [0,β],   (1 − y)/(1 − β)   on [β,1]
//! ```
//!
//! Consecutive pairs give the bonding maps `g_i = s_i∘t_{i+1}` of a new
//! inverse system, and the point `(x_0, x_1, …)` becomes `(s_1(x_{n_1}),
//! s_2(x_{n_2}), …)`. The certificate records whether each coordinate avoids
//! the zigzags of the preceding `g`.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certificate::{evaluate_stages, CertResult, Certificate, Pipeline, Stage};
use crate::dynamics::{branch_stabilization_with, DynamicsError, GapSide, StabilizationOptions};
use crate::interval::Interval;
use crate::orbit::{BackwardOrbit, OrbitError};
use crate::plmap::{compose_with_budget, iterate_with_budget, Breakpoint, Iterates, MapError, PLMap};
use crate::rational::{one, rat, Rational};
use crate::zigzag::ZigzagAnalyzer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    Case1,
    Case2,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::Case1 => "case1",
            Case::Case2 => "case2",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FactorError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("{case}: f({beta}) = {value}, expected {expected}")]
    BadBeta {
        case: Case,
        beta: Rational,
        value: Rational,
        expected: Rational,
    },
    #[error("{case}: no admissible partner crossing for beta = {beta}")]
    NoPartner { case: Case, beta: Rational },
    #[error("{case}: no crossing pair inside window {window}")]
    NoCrossingPair { case: Case, window: Interval },
    #[error("t∘s differs from the factored map")]
    NotCommutative,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorPair {
    pub s: PLMap,
    pub t: PLMap,
    pub case: Case,
    pub beta: Rational,
    pub base_map: PLMap,
}

impl FactorPair {
    pub fn check(&self) -> Result<(), FactorError> {
        if compose_with_budget(&self.t, &self.s, usize::MAX)? != self.base_map {
            return Err(FactorError::NotCommutative);
        }
        Ok(())
    }
}

/// The map with vertices (0,0), (1/3,1), (4/9,1/3), (5/9,2/3), (2/3,0), (1,1).
pub fn minc_map() -> PLMap {
    PLMap::new([(0, 1, 0, 1), (1, 3, 1, 1), (4, 9, 1, 3), (5, 9, 2, 3), (2, 3, 0, 1), (1, 1, 1, 1)].map(
        |(a, b, c, d)| (rat(a, b), rat(c, d)),
    ))
    .expect("valid map")
}

fn pt(x: Rational, y: Rational) -> Breakpoint {
    Breakpoint { x, y }
}

fn bad_beta(f: &PLMap, case: Case, beta: &Rational, expected: Rational) -> FactorError {
    FactorError::BadBeta { case, beta: beta.clone(), value: f.at(beta), expected }
}

pub fn split_case1(f: &PLMap, beta: &Rational) -> Result<FactorPair, FactorError> {
    let case = Case::Case1;
    if !(beta > &Rational::zero() && beta <= &one()) {
        return Err(FactorError::Map(MapError::OutOfDomain(beta.clone())));
    }
    if !f.at(beta).is_zero() {
        return Err(bad_beta(f, case, beta, Rational::zero()));
    }
    if !f.level_crossings(&one()).iter().any(|a| a < beta) {
        return Err(FactorError::NoPartner { case, beta: beta.clone() });
    }
    let pts = f.breakpoints();
    let split = pts.partition_point(|p| p.x < *beta);
    let mut s: Vec<Breakpoint> =
        pts[..split].iter().map(|p| pt(p.x.clone(), beta * (one() - &p.y))).collect();
    s.push(pt(beta.clone(), beta.clone()));
    if !beta.is_one() {
        s.push(pt(one(), one()));
    }
    let mut t = vec![pt(Rational::zero(), one()), pt(beta.clone(), Rational::zero())];
    t.extend(pts.iter().filter(|p| p.x > *beta).cloned());
    let pair = FactorPair {
        s: PLMap::from_valid(s),
        t: PLMap::from_valid(t),
        case,
        beta: beta.clone(),
        base_map: f.clone(),
    };
    Ok(pair)
}

pub fn split_case2(f: &PLMap, beta: &Rational) -> Result<FactorPair, FactorError> {
    let case = Case::Case2;
    if !(beta >= &Rational::zero() && beta < &one()) {
        return Err(FactorError::Map(MapError::OutOfDomain(beta.clone())));
    }
    if !f.at(beta).is_one() {
        return Err(bad_beta(f, case, beta, one()));
    }
    if !f.level_crossings(&Rational::zero()).iter().any(|g| g > beta) {
        return Err(FactorError::NoPartner { case, beta: beta.clone() });
    }
    let pts = f.breakpoints();
    let split = pts.partition_point(|p| p.x <= *beta);
    let rest = one() - beta;
    let mut s = Vec::new();
    if !beta.is_zero() {
        s.push(pt(Rational::zero(), Rational::zero()));
    }
    s.push(pt(beta.clone(), beta.clone()));
    s.extend(pts[split..].iter().map(|p| pt(p.x.clone(), one() - &rest * &p.y)));
    let mut t: Vec<Breakpoint> = pts[..split].iter().filter(|p| p.x < *beta).cloned().collect();
    t.push(pt(beta.clone(), one()));
    t.push(pt(one(), Rational::zero()));
    Ok(FactorPair {
        s: PLMap::from_valid(s),
        t: PLMap::from_valid(t),
        case,
        beta: beta.clone(),
        base_map: f.clone(),
    })
}

pub fn split(f: &PLMap, case: Case, beta: &Rational) -> Result<FactorPair, FactorError> {
    match case {
        Case::Case1 => split_case1(f, beta),
        Case::Case2 => split_case2(f, beta),
    }
}

/// `β` and its partner crossing: `α` with `f(α) = 1` in Case 1, `γ` with
/// `f(γ) = 0` in Case 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BetaChoice {
    pub beta: Rational,
    pub partner: Rational,
}

/// Searches `[lo, hi)` (Case 1) or `(lo, hi]` (Case 2) for a crossing pair.
///
/// Case 1 takes the first zero following a one, then the last one before it.
/// Case 2 takes the last zero preceded by a one, then the last one before it.
pub fn find_beta(f: &PLMap, window: &Interval, case: Case) -> Result<BetaChoice, FactorError> {
    let inside = |x: &Rational| match case {
        Case::Case1 => window.lo <= *x && *x < window.hi,
        Case::Case2 => window.lo < *x && *x <= window.hi,
    };
    let ones: Vec<Rational> = f.level_crossings(&one()).into_iter().filter(|x| inside(x)).collect();
    let zeros: Vec<Rational> = f.level_crossings(&Rational::zero()).into_iter().filter(|x| inside(x)).collect();
    let none = || FactorError::NoCrossingPair { case, window: window.clone() };
    let last_one_before = |x: &Rational| ones.iter().rev().find(|o| *o < x).cloned();
    match case {
        Case::Case1 => {
            let first_one = ones.first().ok_or_else(none)?;
            let beta = zeros.iter().find(|z| *z > first_one).cloned().ok_or_else(none)?;
            let alpha = last_one_before(&beta).ok_or_else(none)?;
            Ok(BetaChoice { beta, partner: alpha })
        }
        Case::Case2 => {
            let gamma = zeros
                .iter()
                .rev()
                .find(|z| ones.first().is_some_and(|o| o < *z))
                .cloned()
                .ok_or_else(none)?;
            let beta = last_one_before(&gamma).ok_or_else(none)?;
            Ok(BetaChoice { beta, partner: gamma })
        }
    }
}

/// Stage rule for the square of the Minc map: Case 2 on `[0, 7/18]`,
/// Case 1 on `(7/18, 1]`.
pub fn minc_stage_choice(x: &Rational) -> Case {
    if *x <= rat(7, 18) {
        Case::Case2
    } else {
        Case::Case1
    }
}

/// `β` used by the Minc pipeline for each case.
pub fn minc_beta(case: Case) -> Rational {
    match case {
        Case::Case1 => rat(7, 18),
        Case::Case2 => rat(11, 18),
    }
}

/// `g_i = s_i∘t_{i+1}`, after checking `t_i∘s_i = f_i` for every pair.
pub fn build_g_sequence(pairs: &[FactorPair]) -> Result<Vec<PLMap>, FactorError> {
    pairs.par_iter().try_for_each(FactorPair::check)?;
    Ok(pairs
        .windows(2)
        .map(|w| compose_with_budget(&w[0].s, &w[1].t, usize::MAX).expect("unbounded"))
        .collect())
}

/// The coordinates `s_i(x_{n_i})` of the certified point, checked against
/// `g_{i−1}(ξ_i) = ξ_{i−1}`.
pub fn transform_point(orbit: &BackwardOrbit, cert: &Certificate) -> Result<Vec<Rational>, PipelineError> {
    let mut out: Vec<Rational> = Vec::with_capacity(cert.stages.len());
    for (k, st) in cert.stages.iter().enumerate() {
        let s = cert.map_at(st.s).ok_or_else(|| PipelineError::Consistency(format!("stage {}: bad s index", st.index)))?;
        let xi = s.eval(orbit.get(st.n_i))?;
        if k > 0 {
            let g = cert.stages[k - 1]
                .g
                .and_then(|g| cert.map_at(g))
                .ok_or_else(|| PipelineError::Consistency(format!("stage {}: missing g", k)))?;
            if g.at(&xi) != out[k - 1] {
                return Err(PipelineError::Consistency(format!(
                    "g_{}(ξ_{}) ≠ ξ_{}",
                    k,
                    st.index,
                    k
                )));
            }
        }
        out.push(xi);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("invalid orbit: {0}")]
    Orbit(OrbitError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Factor(#[from] FactorError),
    #[error("consistency failure: {0}")]
    Consistency(String),
}

// Not `#[from]`: the message already carries the cause.
impl From<OrbitError> for PipelineError {
    fn from(e: OrbitError) -> Self {
        PipelineError::Orbit(e)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PipelineOptions {
    pub stabilization: StabilizationOptions,
}

/// Deduplicating store for the maps referenced by a certificate.
#[derive(Default)]
struct MapTable {
    maps: Vec<PLMap>,
    index: HashMap<PLMap, usize>,
}

impl MapTable {
    fn add(&mut self, m: &PLMap) -> usize {
        if let Some(&i) = self.index.get(m) {
            return i;
        }
        self.maps.push(m.clone());
        self.index.insert(m.clone(), self.maps.len() - 1);
        self.maps.len() - 1
    }
}

/// Per-stage inputs before zigzag verdicts are attached.
struct Draft {
    n_i: usize,
    block: usize,
    pair: FactorPair,
    partner: Rational,
    point: Rational,
}

fn assemble(
    pipeline: Pipeline,
    map: &PLMap,
    orbit: &BackwardOrbit,
    stabilization: Option<crate::dynamics::StabilizationData>,
    drafts: Vec<Draft>,
    repeat_period: usize,
    budget: usize,
) -> Result<Certificate, PipelineError> {
    // Distinct g maps, keyed by the (s, t) they come from.
    let mut g_cache: HashMap<(usize, usize), PLMap> = HashMap::new();
    let mut table = MapTable::default();
    let mut st_idx = Vec::with_capacity(drafts.len());
    for d in &drafts {
        st_idx.push((table.add(&d.pair.s), table.add(&d.pair.t)));
    }
    for k in 0..drafts.len().saturating_sub(1) {
        let key = (st_idx[k].0, st_idx[k + 1].1);
        if let Entry::Vacant(slot) = g_cache.entry(key) {
            slot.insert(compose_with_budget(&drafts[k].pair.s, &drafts[k + 1].pair.t, budget)?);
        }
    }
    let g_idx: Vec<Option<usize>> = (0..drafts.len())
        .map(|k| (k + 1 < drafts.len()).then(|| table.add(&g_cache[&(st_idx[k].0, st_idx[k + 1].1)])))
        .collect();

    let analyzers: HashMap<usize, ZigzagAnalyzer<'_>> = g_idx
        .iter()
        .flatten()
        .map(|&gi| (gi, ZigzagAnalyzer::new(&table.maps[gi])))
        .collect();
    let coordinates: Vec<Rational> = drafts.iter().map(|d| d.pair.s.at(&d.point)).collect();
    let verdicts = (0..drafts.len())
        .into_par_iter()
        .map(|k| match k {
            0 => Ok(None),
            _ => analyzers[&g_idx[k - 1].expect("g before last stage")].verdict(&coordinates[k]).map(Some),
        })
        .collect::<Result<Vec<_>, MapError>>()?;

    let stages: Vec<Stage> = drafts
        .into_iter()
        .zip(verdicts)
        .enumerate()
        .map(|(k, (d, zigzag_verdict))| Stage {
            index: k + 1,
            n_i: d.n_i,
            block: d.block,
            case: d.pair.case,
            beta: d.pair.beta,
            partner: d.partner,
            s: st_idx[k].0,
            t: st_idx[k].1,
            g: g_idx[k],
            point: d.point,
            coordinate: coordinates[k].clone(),
            zigzag_verdict,
        })
        .collect();

    let mut cert = Certificate {
        pipeline,
        map: map.clone(),
        orbit: orbit.clone(),
        stabilization,
        maps: table.maps,
        stages,
        repeat_index: None,
        repeat_period,
        result: CertResult::Pass,
    };
    cert.repeat_index = cert.find_repeat();
    cert.result = evaluate_stages(&cert);
    Ok(cert)
}

/// Runs the pipeline for the Minc map on the blocks `f_M²` (`n_i = 2i`).
pub fn certify_minc(orbit: &BackwardOrbit, stages: usize) -> Result<Certificate, PipelineError> {
    let f = minc_map();
    orbit.validate(&f)?;
    let f2 = iterate_with_budget(&f, 2, usize::MAX)?;
    let pairs: HashMap<Case, FactorPair> = [Case::Case1, Case::Case2]
        .into_iter()
        .map(|c| Ok((c, split(&f2, c, &minc_beta(c))?)))
        .collect::<Result<_, FactorError>>()?;
    for p in pairs.values() {
        p.check()?;
    }

    // Stage i reads x_{2i-2}, x_{2i}, x_{2i+2}; it repeats with period
    // q = p/gcd(p,2) once 2(i−1) reaches the prefix. The last stage has no g,
    // so one more is needed past R + q.
    let p = orbit.period_len();
    let q = p / p.gcd(&2);
    let periodic_from = (orbit.prefix_len().div_ceil(2) + 1).max(2);
    let count = stages.max(periodic_from + q + 1);

    let drafts: Vec<Draft> = (1..=count + 1)
        .map(|i| {
            let point = orbit.get(2 * i).clone();
            let case = minc_stage_choice(&point);
            let pair = pairs[&case].clone();
            let partner = match case {
                Case::Case1 => rat(1, 3),
                Case::Case2 => rat(2, 3),
            };
            Draft { n_i: 2 * i, block: 2, pair, partner, point }
        })
        .collect();
    let cert = assemble(Pipeline::Minc, &f, orbit, None, drafts, q, usize::MAX)?;
    Ok(drop_lookahead(cert))
}

pub fn certify_general(f: &PLMap, orbit: &BackwardOrbit, stages: usize) -> Result<Certificate, PipelineError> {
    certify_general_with(f, orbit, stages, &PipelineOptions::default())
}

/// The general pipeline for a post-critically finite leo map.
///
/// Every `x_{n_i}` is the same coordinate and every block is `f^{step}`, so
/// all stages share one factor pair and one `g`.
pub fn certify_general_with(
    f: &PLMap,
    orbit: &BackwardOrbit,
    stages: usize,
    opts: &PipelineOptions,
) -> Result<Certificate, PipelineError> {
    let budget = opts.stabilization.breakpoint_budget;
    let mut it = Iterates::new(f, budget);
    let data = branch_stabilization_with(&mut it, orbit, &opts.stabilization)?;
    let block = it.get(data.step)?.clone();
    let case = match data.side {
        GapSide::LeftGap => Case::Case1,
        GapSide::RightGap => Case::Case2,
    };
    let choice = find_beta(&block, &data.window(), case)?;
    let pair = split(&block, case, &choice.beta)?;
    pair.check()?;

    let count = stages.max(4);
    let drafts: Vec<Draft> = (1..=count + 1)
        .map(|i| Draft {
            n_i: data.n(i),
            block: data.step,
            pair: pair.clone(),
            partner: choice.partner.clone(),
            point: orbit.get(data.n(i)).clone(),
        })
        .collect();
    let cert = assemble(Pipeline::General, f, orbit, Some(data), drafts, 1, budget)?;
    Ok(drop_lookahead(cert))
}

/// Removes the extra stage that was built only so the last kept stage could
/// be checked against its successor's `g`.
fn drop_lookahead(mut cert: Certificate) -> Certificate {
    cert.stages.pop();
    if let Some(last) = cert.stages.last_mut() {
        last.g = None;
    }
    cert.prune_maps();
    cert.repeat_index = cert.find_repeat();
    cert.result = evaluate_stages(&cert);
    cert
}

/// Whether `s` is the identity on `[lo, hi]`.
pub fn is_identity_on(s: &PLMap, lo: &Rational, hi: &Rational) -> bool {
    s.at(lo) == *lo
        && s.at(hi) == *hi
        && s.breakpoints().iter().filter(|p| *lo < p.x && p.x < *hi).all(|p| p.x == p.y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plmap::{compose, iterate};
    use crate::zigzag::{is_in_zigzag, lap_midpoints};

    fn f2() -> PLMap {
        iterate(&minc_map(), 2).unwrap()
    }

    #[test]
    fn minc_values() {
        let f = minc_map();
        assert_eq!(f.eval(&rat(1, 3)).unwrap(), rat(1, 1));
        assert_eq!(f.eval(&rat(5, 9)).unwrap(), rat(2, 3));
        assert_eq!(f.eval(&rat(1, 2)).unwrap(), rat(1, 2));
        assert!(f.is_onto());
    }

    #[test]
    fn case1_split_of_minc_square() {
        let p = split_case1(&f2(), &rat(7, 18)).unwrap();
        assert_eq!(compose(&p.t, &p.s), f2());
        assert_eq!(p.s.eval(&rat(1, 2)).unwrap(), rat(1, 2));
        assert!(is_identity_on(&p.s, &rat(7, 18), &rat(1, 1)));
        assert_eq!(p.t.eval(&rat(7, 18)).unwrap(), rat(0, 1));
        assert_eq!(p.t.eval(&rat(0, 1)).unwrap(), rat(1, 1));
    }

    #[test]
    fn case2_split_of_minc_square() {
        let p = split_case2(&f2(), &rat(11, 18)).unwrap();
        assert_eq!(compose(&p.t, &p.s), f2());
        assert!(is_identity_on(&p.s, &rat(0, 1), &rat(11, 18)));
        assert_eq!(p.t.eval(&rat(11, 18)).unwrap(), rat(1, 1));
        for k in 0..=500 {
            let y = rat(k, 500);
            assert_eq!(p.t.at(&p.s.at(&y)), f2().at(&y));
        }
    }

    #[test]
    fn split_preconditions() {
        assert!(matches!(split_case1(&f2(), &rat(1, 2)), Err(FactorError::BadBeta { .. })));
        assert!(matches!(split_case2(&f2(), &rat(1, 2)), Err(FactorError::BadBeta { .. })));
        // identity: f(0) = 0 but no earlier one.
        assert!(split_case1(&PLMap::identity(), &rat(0, 1)).is_err());
        assert!(split_case2(&PLMap::identity(), &rat(1, 1)).is_err());
    }

    #[test]
    fn split_at_the_ends() {
        // Tent: f(1) = 0 with a one at 1/2, and f(0) = 0 ... use its reflection.
        let tent = PLMap::new([(rat(0, 1), rat(0, 1)), (rat(1, 2), rat(1, 1)), (rat(1, 1), rat(0, 1))]).unwrap();
        let p = split_case1(&tent, &rat(1, 1)).unwrap();
        p.check().unwrap();
        let flip = PLMap::new([(rat(0, 1), rat(1, 1)), (rat(1, 2), rat(0, 1)), (rat(1, 1), rat(1, 1))]).unwrap();
        let p = split_case2(&flip, &rat(0, 1)).unwrap();
        p.check().unwrap();
    }

    #[test]
    fn find_beta_examples() {
        let w1 = Interval::new(rat(1, 3), rat(1, 3) + rat(1, 9));
        let c = find_beta(&f2(), &w1, Case::Case1).unwrap();
        assert_eq!((c.partner, c.beta), (rat(1, 3), rat(7, 18)));
        let w2 = Interval::new(rat(2, 3) - rat(1, 9), rat(2, 3));
        let c = find_beta(&f2(), &w2, Case::Case2).unwrap();
        assert_eq!((c.beta, c.partner), (rat(11, 18), rat(2, 3)));
        let mono = Interval::new(rat(0, 1), rat(1, 10));
        assert!(find_beta(&PLMap::identity(), &mono, Case::Case1).is_err());
        // Half-open ends are respected.
        let w3 = Interval::new(rat(1, 3), rat(7, 18));
        assert!(find_beta(&f2(), &w3, Case::Case1).is_err());
    }

    #[test]
    fn stage_choice() {
        assert_eq!(minc_stage_choice(&rat(1, 2)), Case::Case1);
        assert_eq!(minc_stage_choice(&rat(0, 1)), Case::Case2);
        assert_eq!(minc_stage_choice(&rat(7, 18)), Case::Case2);
    }

    #[test]
    fn g_sequences() {
        let a = split_case1(&f2(), &rat(7, 18)).unwrap();
        let b = split_case2(&f2(), &rat(11, 18)).unwrap();
        assert!(build_g_sequence(std::slice::from_ref(&a)).unwrap().is_empty());
        let gs = build_g_sequence(&[a.clone(), a.clone(), a.clone()]).unwrap();
        assert_eq!(gs.len(), 2);
        assert_eq!(gs[0], gs[1]);
        assert_eq!(gs[0], compose(&a.s, &a.t));
        let alt = build_g_sequence(&[a.clone(), b.clone(), a.clone(), b.clone()]).unwrap();
        assert_eq!(alt[0], compose(&a.s, &b.t));
        assert_eq!(alt[1], compose(&b.s, &a.t));
        assert_eq!(alt[0], alt[2]);
        let mut broken = a.clone();
        broken.base_map = minc_map();
        assert_eq!(build_g_sequence(&[broken]), Err(FactorError::NotCommutative));
    }

    #[test]
    fn minc_lemma_on_lap_midpoints() {
        let a = split_case1(&f2(), &rat(7, 18)).unwrap();
        let b = split_case2(&f2(), &rat(11, 18)).unwrap();
        for (p, q) in [(&a, &a), (&a, &b), (&b, &a), (&b, &b)] {
            let g = compose(&p.s, &q.t);
            for y in lap_midpoints(&g) {
                if is_in_zigzag(&g, &y).unwrap().in_zigzag {
                    assert!(is_in_zigzag(&p.s, &q.t.at(&y)).unwrap().in_zigzag, "y = {y}");
                }
            }
        }
    }

    #[test]
    fn minc_pipeline_half() {
        let orbit = BackwardOrbit::constant(rat(1, 2)).unwrap();
        let cert = certify_minc(&orbit, 10).unwrap();
        assert_eq!(cert.result, CertResult::Pass);
        assert_eq!(cert.stages.len(), 10);
        let g0 = cert.stages[0].g;
        assert!(cert.stages[..9].iter().all(|s| s.g == g0 && s.case == Case::Case1));
        assert_eq!(cert.stages[9].g, None);
        assert!(cert.stages[1..].iter().all(|s| !s.zigzag_verdict.as_ref().unwrap().in_zigzag));
        assert_eq!(transform_point(&orbit, &cert).unwrap(), vec![rat(1, 2); 10]);
        assert!(cert.repeat_index.is_some());
    }

    #[test]
    fn minc_pipeline_zero_and_invalid() {
        let zero = BackwardOrbit::constant(rat(0, 1)).unwrap();
        let cert = certify_minc(&zero, 4).unwrap();
        assert_eq!(cert.result, CertResult::Pass);
        assert_eq!(transform_point(&zero, &cert).unwrap(), vec![rat(0, 1); 4]);
        let bad = BackwardOrbit::constant(rat(1, 3)).unwrap();
        assert!(matches!(certify_minc(&bad, 4), Err(PipelineError::Orbit(_))));
    }

    #[test]
    fn general_pipeline_rejects_identity() {
        let orbit = BackwardOrbit::constant(rat(1, 3)).unwrap();
        let err = certify_general(&PLMap::identity(), &orbit, 3).unwrap_err();
        assert!(matches!(err, PipelineError::Dynamics(DynamicsError::NotLeo(_))));
    }
}
