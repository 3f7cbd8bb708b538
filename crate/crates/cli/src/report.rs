//! The `analyze` report.

use anyhow::Result;
use serde::Serialize;

use plzig::dynamics::{
    is_leo, is_markov, is_primitive, leo_uniform_n, markov_partition_from, post_critical_orbits, transition_matrix,
    OrbitTable, DEFAULT_FALLBACK_DEPTH,
};
use plzig::rational::{format_rational, serde_rational};
use plzig::zigzag::ZigzagAnalyzer;
use plzig::{Decision, Extremum, Interval, PLMap, Rational, ZigzagVerdict};

#[derive(Debug, Serialize)]
pub struct PointReport {
    #[serde(with = "serde_rational")]
    pub point: Rational,
    #[serde(flatten)]
    pub verdict: ZigzagVerdict,
}

#[derive(Debug, Serialize)]
pub struct UniformN {
    #[serde(with = "serde_rational")]
    pub epsilon: Rational,
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub breakpoints: usize,
    pub laps: usize,
    pub onto: bool,
    pub critical_points: Vec<String>,
    pub zigzag_mode: Extremum,
    pub zigzag_set: Vec<Interval>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<PointReport>,
    pub post_critical: OrbitTable,
    pub pcf: Decision,
    pub markov_partition: Option<Vec<String>>,
    /// Rows of the transition matrix as `0`/`1` strings, on request.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transition_matrix: Option<Vec<String>>,
    pub primitive: Option<bool>,
    pub leo: Decision,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniform_n: Option<UniformN>,
}

pub struct AnalyzeOptions {
    pub mode: Extremum,
    pub points: Vec<Rational>,
    pub epsilon: Option<Rational>,
    pub matrix: bool,
}

pub fn analyze(f: &PLMap, opts: &AnalyzeOptions) -> Result<Report> {
    let zz = ZigzagAnalyzer::with_mode(f, opts.mode);
    let points = opts
        .points
        .iter()
        .map(|y| Ok(PointReport { point: y.clone(), verdict: zz.verdict(y)? }))
        .collect::<Result<Vec<_>>>()?;
    let table = post_critical_orbits(f);
    let partition = markov_partition_from(&table).filter(|p| is_markov(f, p));
    let matrix = partition.as_ref().map(|p| transition_matrix(f, p));
    let leo = is_leo(f, partition.as_deref(), DEFAULT_FALLBACK_DEPTH);
    let uniform_n = match (&opts.epsilon, leo) {
        (Some(eps), Decision::Yes) => Some(match leo_uniform_n(f, eps) {
            Ok(n) => UniformN { epsilon: eps.clone(), n: Some(n), error: None },
            Err(e) => UniformN { epsilon: eps.clone(), n: None, error: Some(e.to_string()) },
        }),
        (Some(eps), _) => {
            Some(UniformN { epsilon: eps.clone(), n: None, error: Some("map is not known to be leo".into()) })
        }
        (None, _) => None,
    };
    Ok(Report {
        breakpoints: f.len(),
        laps: zz.laps().len(),
        onto: f.is_onto(),
        critical_points: f.critical_points(false).iter().map(format_rational).collect(),
        zigzag_mode: opts.mode,
        zigzag_set: zz.zigzag_set(),
        points,
        pcf: if table.all_closed() { Decision::Yes } else { Decision::Indeterminate },
        post_critical: table,
        markov_partition: partition.as_ref().map(|p| p.iter().map(format_rational).collect()),
        transition_matrix: matrix.as_ref().filter(|_| opts.matrix).map(|m| {
            m.iter().map(|row| row.iter().map(|&b| if b { '1' } else { '0' }).collect()).collect()
        }),
        primitive: matrix.as_deref().map(is_primitive),
        leo,
        uniform_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use plzig::minc_map;
    use plzig::rational::rat;

    fn opts() -> AnalyzeOptions {
        AnalyzeOptions { mode: Extremum::Strict, points: vec![rat(1, 2)], epsilon: Some(rat(1, 6)), matrix: true }
    }

    #[test]
    fn minc_report() {
        let r = analyze(&minc_map(), &opts()).unwrap();
        assert_eq!(r.zigzag_set, vec![Interval::new(rat(4, 9), rat(5, 9))]);
        assert_eq!((r.pcf, r.leo, r.primitive), (Decision::Yes, Decision::Yes, Some(true)));
        assert_eq!(r.markov_partition.unwrap(), ["0", "1/3", "4/9", "5/9", "2/3", "1"]);
        assert_eq!(r.transition_matrix.unwrap()[2], "01110");
        assert_eq!(r.uniform_n.unwrap().n, Some(3));
        assert!(r.points[0].verdict.in_zigzag);
    }

    #[test]
    fn identity_report() {
        let r = analyze(&PLMap::identity(), &opts()).unwrap();
        assert!(r.zigzag_set.is_empty());
        assert_eq!(r.leo, Decision::No);
        assert!(r.uniform_n.unwrap().n.is_none());
    }
}
