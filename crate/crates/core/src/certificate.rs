//! Accessibility certificates and their independent re-verification.
//!
//! Maps are stored once in `maps` and referenced by index from the stages,
//! since long pipelines reuse the same `s`, `t` and `g` at every stage.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{verify_stabilization, StabilizationData};
use crate::factorize::{split, Case};
use crate::orbit::BackwardOrbit;
use crate::plmap::{compose_with_budget, Iterates, PLMap};
use crate::rational::{one, serde_rational, Rational};
use crate::zigzag::{ZigzagAnalyzer, ZigzagVerdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pipeline {
    Minc,
    General,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum CertResult {
    Pass,
    Fail { stage: usize, reason: String },
}

impl CertResult {
    pub fn passed(&self) -> bool {
        matches!(self, CertResult::Pass)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    /// `i`, starting at 1.
    pub index: usize,
    pub n_i: usize,
    /// `n_i − n_{i−1}`; the stage factors `f^block`.
    pub block: usize,
    pub case: Case,
    #[serde(with = "serde_rational")]
    pub beta: Rational,
    /// `α` (Case 1) or `γ` (Case 2).
    #[serde(with = "serde_rational")]
    pub partner: Rational,
    /// Indices into [`Certificate::maps`].
    pub s: usize,
    pub t: usize,
    /// `g_i = s_i∘t_{i+1}`; absent on the last stage.
    pub g: Option<usize>,
    /// `x_{n_i}`.
    #[serde(with = "serde_rational")]
    pub point: Rational,
    /// `ξ_i = s_i(x_{n_i})`.
    #[serde(with = "serde_rational")]
    pub coordinate: Rational,
    /// Verdict for `ξ_i` under `g_{i−1}`; absent on the first stage.
    pub zigzag_verdict: Option<ZigzagVerdict>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub pipeline: Pipeline,
    pub map: PLMap,
    pub orbit: BackwardOrbit,
    pub stabilization: Option<StabilizationData>,
    pub maps: Vec<PLMap>,
    pub stages: Vec<Stage>,
    /// First stage `R` whose data equals that of stage `R + repeat_period`.
    pub repeat_index: Option<usize>,
    pub repeat_period: usize,
    pub result: CertResult,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("stage {stage}: {reason}")]
pub struct VerifyError {
    pub stage: usize,
    pub reason: String,
}

fn err<T>(stage: usize, reason: impl Into<String>) -> Result<T, VerifyError> {
    Err(VerifyError { stage, reason: reason.into() })
}

impl Certificate {
    pub fn map_at(&self, i: usize) -> Option<&PLMap> {
        self.maps.get(i)
    }

    pub fn passed(&self) -> bool {
        self.result.passed()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Stage data with the position-dependent fields dropped.
    fn stage_key(&self, st: &Stage) -> impl PartialEq + '_ {
        (
            st.block,
            st.case,
            st.beta.clone(),
            st.partner.clone(),
            (st.s, st.t, st.g),
            st.point.clone(),
            st.coordinate.clone(),
            st.zigzag_verdict.clone(),
        )
    }

    /// Least stage index `R ≥ 2` with stage `R` equal to stage `R + q`,
    /// among stages whose inputs already lie in the orbit's periodic part.
    pub(crate) fn find_repeat(&self) -> Option<usize> {
        let q = self.repeat_period;
        let settled = |st: &Stage| st.n_i >= st.block + self.orbit.prefix_len();
        (1..self.stages.len())
            .filter(|&k| k + q < self.stages.len() && settled(&self.stages[k]))
            .find(|&k| self.stage_key(&self.stages[k]) == self.stage_key(&self.stages[k + q]))
            .map(|k| self.stages[k].index)
    }

    /// Drops maps no stage refers to and renumbers the references.
    pub(crate) fn prune_maps(&mut self) {
        let mut remap: HashMap<usize, usize> = HashMap::new();
        let mut kept = Vec::new();
        let mut take = |i: usize, kept: &mut Vec<PLMap>| {
            *remap.entry(i).or_insert_with(|| {
                kept.push(self.maps[i].clone());
                kept.len() - 1
            })
        };
        for st in &mut self.stages {
            st.s = take(st.s, &mut kept);
            st.t = take(st.t, &mut kept);
            st.g = st.g.map(|g| take(g, &mut kept));
        }
        self.maps = kept;
    }

    /// Recomputes every claim from the map, the orbit and the stored stage
    /// data, using exact arithmetic only.
    pub fn verify(&self) -> Result<(), VerifyError> {
        self.orbit.validate(&self.map).or_else(|e| err(0, e.to_string()))?;
        if self.stages.is_empty() {
            return err(0, "no stages");
        }
        for (k, m) in self.maps.iter().enumerate() {
            if PLMap::new(m.pairs()).as_ref() != Ok(m) {
                return err(0, format!("map {k} is not normalized"));
            }
        }
        let get = |stage: usize, i: usize| -> Result<&PLMap, VerifyError> {
            self.maps.get(i).map_or_else(|| err(stage, format!("map index {i} out of range")), Ok)
        };
        let mut powers = Iterates::new(&self.map, usize::MAX);
        let mut prev_n = None;
        for (k, st) in self.stages.iter().enumerate() {
            let i = st.index;
            if i != k + 1 {
                return err(i, "stage indices must run 1, 2, …");
            }
            let start = st.n_i.checked_sub(st.block).map_or_else(|| err(i, "n_i < block"), Ok)?;
            if prev_n.is_some_and(|p| p != start) || st.block == 0 {
                return err(i, "n_i − n_{i−1} differs from block");
            }
            prev_n = Some(st.n_i);

            let block = powers.get(st.block).or_else(|e| err(i, e.to_string()))?.clone();
            let pair = split(&block, st.case, &st.beta).or_else(|e| err(i, e.to_string()))?;
            let (s, t) = (get(i, st.s)?, get(i, st.t)?);
            if &pair.s != s || &pair.t != t {
                return err(i, "s or t differs from the factor formulas");
            }
            if compose_with_budget(t, s, usize::MAX).ok().as_ref() != Some(&block) {
                return err(i, "t∘s differs from the block map");
            }
            let partner_ok = match st.case {
                Case::Case1 => st.partner < st.beta && block.at(&st.partner) == one(),
                Case::Case2 => st.partner > st.beta && block.at(&st.partner) == Rational::from_integer(0.into()),
            };
            if !partner_ok {
                return err(i, "partner crossing is wrong");
            }
            if &st.point != self.orbit.get(st.n_i) {
                return err(i, "point differs from x_{n_i}");
            }
            if s.at(&st.point) != st.coordinate {
                return err(i, "coordinate differs from s_i(x_{n_i})");
            }
            match (st.g, self.stages.get(k + 1)) {
                (Some(g), Some(next)) => {
                    let want = compose_with_budget(s, get(i, next.t)?, usize::MAX).or_else(|e| err(i, e.to_string()))?;
                    if get(i, g)? != &want {
                        return err(i, "g_i differs from s_i∘t_{i+1}");
                    }
                }
                (None, None) => {}
                _ => return err(i, "g present exactly on non-final stages"),
            }
            let want_verdict = match k {
                0 => None,
                _ => {
                    let g = get(i, self.stages[k - 1].g.expect("checked above"))?;
                    Some(ZigzagAnalyzer::new(g).verdict(&st.coordinate).or_else(|e| err(i, e.to_string()))?)
                }
            };
            if want_verdict != st.zigzag_verdict {
                return err(i, "stored zigzag verdict differs from recomputation");
            }
        }

        if let Some(data) = &self.stabilization {
            let mut it = Iterates::new(&self.map, usize::MAX);
            verify_stabilization(&mut it, &self.orbit, data, self.stages.len())
                .or_else(|e| err(0, e.to_string()))?;
            if self.stages.iter().any(|st| st.block != data.step || st.n_i != data.n(st.index)) {
                return err(0, "stages do not follow the stabilization sequence");
            }
        }

        if self.find_repeat() != self.repeat_index {
            return err(0, "repeat index differs from recomputation");
        }
        if let Some(r) = self.repeat_index {
            // Stage i is a function of x_{n_{i−1}}, x_{n_i}, x_{n_{i+1}} and the
            // common block, so it repeats for good once those coordinates do.
            let st = &self.stages[r - 1];
            let blocks_equal = self.stages.windows(2).all(|w| w[0].block == w[1].block);
            let shift = st.block * self.repeat_period;
            let p = self.orbit.period_len();
            if !blocks_equal || !shift.is_multiple_of(p) || st.n_i - st.block < self.orbit.prefix_len() {
                return err(r, "repeat does not follow from the orbit's period");
            }
        }
        if evaluate_stages(self) != self.result {
            return err(0, "stored result differs from recomputation");
        }
        Ok(())
    }
}

/// Pass iff every stage fixes its tracked point, every `ξ_i` with `i ≥ 2`
/// avoids the zigzags of `g_{i−1}` and maps to `ξ_{i−1}`, and a repeat
/// extends the finite check to all stages.
pub fn evaluate_stages(cert: &Certificate) -> CertResult {
    let fail = |stage: usize, reason: &str| CertResult::Fail { stage, reason: reason.to_string() };
    for (k, st) in cert.stages.iter().enumerate() {
        if st.coordinate != st.point {
            return fail(st.index, "s_i does not fix x_{n_i}");
        }
        if k == 0 {
            continue;
        }
        let prev = &cert.stages[k - 1];
        let Some(g) = prev.g.and_then(|g| cert.map_at(g)) else {
            return fail(st.index, "missing g_{i-1}");
        };
        if g.at(&st.coordinate) != prev.coordinate {
            return fail(st.index, "g_{i-1}(ξ_i) ≠ ξ_{i-1}");
        }
        match &st.zigzag_verdict {
            Some(v) if !v.in_zigzag => {}
            Some(_) => return fail(st.index, "ξ_i is inside a zigzag of g_{i-1}"),
            None => return fail(st.index, "missing zigzag verdict"),
        }
    }
    if cert.repeat_index.is_none() {
        return fail(cert.stages.len(), "no repeating block within the emitted stages");
    }
    CertResult::Pass
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorize::{certify_minc, minc_map};
    use crate::rational::rat;

    fn half_cert() -> Certificate {
        certify_minc(&BackwardOrbit::constant(rat(1, 2)).unwrap(), 4).unwrap()
    }

    #[test]
    fn json_round_trip_is_exact() {
        let c = half_cert();
        let text = c.to_json();
        let back = Certificate::from_json(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_json(), text);
        assert!(text.contains("\"7/18\""));
    }

    #[test]
    fn verification_accepts_pipeline_output() {
        half_cert().verify().unwrap();
        let orbit = BackwardOrbit::new(vec![rat(1, 1)], vec![rat(1, 1)]).unwrap();
        certify_minc(&orbit, 5).unwrap().verify().unwrap();
    }

    #[test]
    fn verification_catches_tampering() {
        let mut c = half_cert();
        c.stages[1].coordinate = rat(1, 3);
        assert!(c.verify().is_err());

        let mut c = half_cert();
        c.result = CertResult::Fail { stage: 2, reason: "x".into() };
        assert!(c.verify().is_err());

        let mut c = half_cert();
        c.stages[2].beta = rat(11, 18);
        assert!(c.verify().is_err());

        let mut c = half_cert();
        c.map = minc_map();
        c.maps[0] = PLMap::identity();
        assert!(c.verify().is_err());

        let mut c = half_cert();
        c.repeat_index = None;
        assert!(c.verify().is_err());
    }
}
