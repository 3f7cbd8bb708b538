mod common;

use proptest::prelude::*;

use plzig::certificate::Certificate;
use plzig::dynamics::{
    branch, cover_semi_decision, is_leo, is_markov, markov_partition, post_critical_orbits, transition_matrix,
    CoverOutcome, Decision,
};
use plzig::factorize::{certify_minc, minc_map, transform_point};
use plzig::plmap::{compose, iterate, Iterates};
use plzig::rational::{parse_rational, rat};
use plzig::{certify_general, BackwardOrbit, CertResult, PLMap, Rational};

use common::rng;
use rand::Rng;

fn arb_map() -> impl Strategy<Value = PLMap> {
    (
        prop::collection::btree_set(1i64..64, 0..6),
        prop::collection::vec((0i64..=64, 1i64..=64), 8),
    )
        .prop_filter_map("constant segment", |(xs, ys)| {
            let mut pts = vec![rat(0, 1)];
            pts.extend(xs.iter().map(|&x| rat(x, 64)));
            pts.push(rat(1, 1));
            let ys: Vec<Rational> = ys.iter().take(pts.len()).map(|&(p, q)| rat(p.min(q), q)).collect();
            PLMap::new(pts.into_iter().zip(ys)).ok()
        })
}

fn arb_point() -> impl Strategy<Value = Rational> {
    (0i64..=97, 1i64..=97).prop_map(|(p, q)| rat(p.min(q), q))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn normalization_is_idempotent(f in arb_map()) {
        let again = PLMap::new(f.pairs()).unwrap();
        prop_assert_eq!(&again, &f);
        let text = f.to_map_file();
        prop_assert_eq!(PLMap::from_map_file(&text).unwrap(), f);
    }

    #[test]
    fn composition_agrees_with_evaluation(f in arb_map(), g in arb_map(), x in arb_point()) {
        let gf = compose(&g, &f);
        prop_assert_eq!(gf.eval(&x).unwrap(), g.eval(&f.eval(&x).unwrap()).unwrap());
    }

    #[test]
    fn composition_is_associative(f in arb_map(), g in arb_map(), h in arb_map()) {
        prop_assert_eq!(compose(&h, &compose(&g, &f)), compose(&compose(&h, &g), &f));
    }

    #[test]
    fn iterates_add(f in arb_map(), m in 1usize..3, n in 1usize..3) {
        let lhs = iterate(&f, m + n).unwrap();
        let rhs = compose(&iterate(&f, m).unwrap(), &iterate(&f, n).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn images_contain_values(f in arb_map(), a in arb_point(), b in arb_point(), t in arb_point()) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let x = &lo + (&hi - &lo) * &t;
        let (min, max) = f.image(&lo, &hi);
        let v = f.eval(&x).unwrap();
        prop_assert!(min <= v && v <= max);
    }

    #[test]
    fn branch_is_a_monotone_piece(f in arb_map(), y in arb_point()) {
        let b = branch(&f, &y).unwrap();
        prop_assert!(b.domain.contains(&y));
        prop_assert!(!f.critical_points(false).iter().any(|c| b.domain.contains_open(c)));
        let (lo, hi) = f.image(&b.domain.lo, &b.domain.hi);
        prop_assert_eq!((lo, hi), (b.image.lo.clone(), b.image.hi.clone()));
    }
}

/// Points of period dividing `p`: solutions of `f^p(x) = x`.
fn periodic_points(f: &PLMap, p: usize) -> Vec<Rational> {
    let fp = iterate(f, p).unwrap();
    let mut out = Vec::new();
    for w in fp.breakpoints().windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (da, db) = (&a.y - &a.x, &b.y - &b.x);
        if da == rat(0, 1) {
            out.push(a.x.clone());
        } else if (da < rat(0, 1)) != (db < rat(0, 1)) && db != rat(0, 1) {
            out.push(&a.x - &da * (&b.x - &a.x) / (&db - &da));
        }
    }
    if fp.breakpoints().last().unwrap().y == rat(1, 1) {
        out.push(rat(1, 1));
    }
    out.sort();
    out.dedup();
    out
}

/// The periodic backward orbit through `x`, a point of period `p`.
fn periodic_orbit(f: &PLMap, x: &Rational, p: usize) -> BackwardOrbit {
    let mut block = vec![x.clone()];
    let mut images = vec![x.clone()];
    for _ in 1..p {
        let next = f.eval(images.last().unwrap()).unwrap();
        images.push(next);
    }
    // block[k] = f^{p-k}(x)
    for k in 1..p {
        block.push(images[p - k].clone());
    }
    BackwardOrbit::new(Vec::new(), block).unwrap()
}

#[test]
fn minc_pipeline_passes_on_periodic_orbits() {
    let f = minc_map();
    let mut runs = 0;
    for p in 1..=3 {
        for x in periodic_points(&f, p) {
            let orbit = periodic_orbit(&f, &x, p);
            orbit.validate(&f).unwrap();
            let cert = certify_minc(&orbit, 6).unwrap();
            assert_eq!(cert.result, CertResult::Pass, "orbit {orbit}");
            cert.verify().unwrap();
            let coords = transform_point(&orbit, &cert).unwrap();
            for (st, c) in cert.stages.iter().zip(&coords) {
                assert_eq!(c, orbit.get(st.n_i));
            }
            let back = Certificate::from_json(&cert.to_json()).unwrap();
            assert_eq!(back, cert);
            runs += 1;
        }
    }
    assert!(runs >= 10, "only {runs} periodic orbits");
}

#[test]
fn minc_pipeline_with_prefix_detects_the_repeat() {
    let f = minc_map();
    let x = periodic_points(&f, 3).into_iter().find(|x| f.eval(x).unwrap() != *x).unwrap();
    let cycle = periodic_orbit(&f, &x, 3);
    // Same orbit with the first two coordinates written as a prefix.
    let prefix = vec![cycle.get(0).clone(), cycle.get(1).clone()];
    let block = vec![cycle.get(2).clone(), cycle.get(3).clone(), cycle.get(4).clone()];
    let orbit = BackwardOrbit::new(prefix, block).unwrap();
    orbit.validate(&f).unwrap();
    let cert = certify_minc(&orbit, 4).unwrap();
    assert_eq!(cert.repeat_period, 3);
    let r = cert.repeat_index.unwrap();
    assert!(cert.stages[r - 1].n_i - 2 >= orbit.prefix_len());
    assert!(cert.stages.len() >= r + 3);
    cert.verify().unwrap();
}

#[test]
fn certificate_json_uses_fraction_strings() {
    let orbit = BackwardOrbit::parse("period: 3/7").unwrap();
    let cert = certify_minc(&orbit, 3).unwrap();
    let json = cert.to_json();
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(value["orbit"]["period"][0], "3/7");
    assert_eq!(value["stages"][0]["beta"], "7/18");
    assert_eq!(value["result"]["status"], "pass");
    for s in value["maps"][0].as_array().unwrap() {
        let pair = s.as_array().unwrap();
        assert!(parse_rational(pair[0].as_str().unwrap()).is_ok());
    }
}

/// A map with a vertex at every point of `(1/n)ℤ` and values there, so the
/// grid is forward invariant and every critical orbit closes. Hits 0 and 1.
fn grid_map<R: Rng>(r: &mut R) -> PLMap {
    let n = r.gen_range(2..=8i64);
    loop {
        let mut ys: Vec<i64> = (0..=n).map(|_| r.gen_range(0..=n)).collect();
        let (a, b) = (r.gen_range(0..=n) as usize, r.gen_range(0..=n) as usize);
        ys[a] = 0;
        if a != b {
            ys[b] = n;
        }
        if let Ok(f) = PLMap::new((0..=n).map(|k| (rat(k, n), rat(ys[k as usize], n)))) {
            return f;
        }
    }
}

#[test]
fn markov_soundness_and_leo_consistency() {
    let mut r = rng(0x5eed_00aa);
    let (mut markov, mut agree) = (0, 0);
    let mut maps = vec![minc_map(), PLMap::identity()];
    maps.extend((0..300).map(|_| grid_map(&mut r)));
    for f in &maps {
        let Some(p) = markov_partition(f) else { continue };
        assert!(p.iter().all(|x| p.binary_search(&f.eval(x).unwrap()).is_ok()));
        if !f.is_onto() {
            continue;
        }
        markov += 1;
        assert!(is_markov(f, &p), "{f}");
        // Each cell maps exactly onto the union of its flagged cells.
        let m = transition_matrix(f, &p);
        for (u, row) in m.iter().enumerate() {
            let (lo, hi) = f.image(&p[u], &p[u + 1]);
            let covered: Vec<usize> = (0..row.len()).filter(|&v| row[v]).collect();
            assert_eq!(lo, p[covered[0]]);
            assert_eq!(hi, p[covered[covered.len() - 1] + 1]);
        }
        let decided = is_leo(f, Some(&p), 6);
        match cover_semi_decision(f, 6, 256) {
            CoverOutcome::AllOnto { .. } if decided != Decision::Indeterminate => {
                assert_eq!(decided, Decision::Yes, "{f}");
                agree += 1;
            }
            CoverOutcome::Trapped => {
                assert_eq!(decided, Decision::No, "{f}");
                agree += 1;
            }
            _ => {}
        }
    }
    assert!(markov >= 3 && agree >= 3, "markov {markov}, agree {agree}");
}

#[test]
fn branch_endpoints_lie_in_the_post_critical_set() {
    let f = minc_map();
    let post: Vec<Rational> = {
        let mut v: Vec<Rational> = post_critical_orbits(&f).entries.iter().flat_map(|e| e.orbit.clone()).collect();
        v.sort();
        v
    };
    let mut it = Iterates::new(&f, usize::MAX);
    let mut r = rng(7);
    for n in 1..=4 {
        let fnn = it.get(n).unwrap().clone();
        for _ in 0..50 {
            let x = common::random_backward_orbit(&mut r, &f, 0)[0].clone();
            let b = branch(&fnn, &x).unwrap().image;
            assert!(post.binary_search(&b.lo).is_ok() && post.binary_search(&b.hi).is_ok(), "{b}");
        }
    }
}

#[test]
fn general_pipeline_on_other_maps() {
    let tent = PLMap::new([(rat(0, 1), rat(0, 1)), (rat(1, 2), rat(1, 1)), (rat(1, 1), rat(0, 1))]).unwrap();
    let cert = certify_general(&tent, &BackwardOrbit::constant(rat(2, 3)).unwrap(), 4).unwrap();
    cert.verify().unwrap();
    assert!(cert.passed());

    let f = minc_map();
    for q in [rat(0, 1), rat(3, 7), rat(4, 7), rat(1, 1)] {
        let orbit = BackwardOrbit::constant(q.clone()).unwrap();
        let cert = certify_general(&f, &orbit, 4).unwrap();
        cert.verify().unwrap();
        assert!(cert.passed(), "{q}: {:?}", cert.result);
        assert_eq!(transform_point(&orbit, &cert).unwrap(), vec![q.clone(); 4]);
    }
}
