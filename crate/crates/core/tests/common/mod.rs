//! Seeded corpora and independent oracles shared by the integration tests.

#![allow(dead_code)]

use num_rational::Ratio;
use plzig::rational::{from_f64, rat};
use plzig::{PLMap, Rational};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_value<R: Rng>(r: &mut R, max_denom: i64) -> Rational {
    let q = r.gen_range(1..=max_denom);
    rat(r.gen_range(0..=q), q)
}

/// Interior abscissae: distinct rationals in (0,1) with denominators ≤ 64.
fn random_xs<R: Rng>(r: &mut R, count: usize, dyadic: bool) -> Vec<Rational> {
    let mut xs: Vec<Rational> = Vec::new();
    while xs.len() < count {
        let x = if dyadic {
            rat(r.gen_range(1..64), 64)
        } else {
            let q = r.gen_range(2..=64);
            rat(r.gen_range(1..q), q)
        };
        if !xs.contains(&x) {
            xs.push(x);
        }
    }
    xs.sort();
    xs
}

fn build<R: Rng>(r: &mut R, xs: Vec<Rational>) -> PLMap {
    let mut ys: Vec<Rational> = Vec::with_capacity(xs.len() + 2);
    for _ in 0..xs.len() + 2 {
        loop {
            let y = random_value(r, 64);
            if ys.last() != Some(&y) {
                ys.push(y);
                break;
            }
        }
    }
    let mut pts = vec![rat(0, 1)];
    pts.extend(xs);
    pts.push(rat(1, 1));
    PLMap::new(pts.into_iter().zip(ys)).expect("generated map is valid")
}

/// A map with at most `max_points` vertices, all coordinates with
/// denominators ≤ 64 and no constant segment.
pub fn random_map<R: Rng>(r: &mut R, max_points: usize) -> PLMap {
    let interior = r.gen_range(0..=max_points - 2);
    let xs = random_xs(r, interior, false);
    build(r, xs)
}

/// Like [`random_map`] with abscissae in `(1/64)ℤ`, so every vertex lies on
/// the 1/1024 grid.
pub fn dyadic_map<R: Rng>(r: &mut R, max_points: usize) -> PLMap {
    let interior = r.gen_range(0..=max_points - 2);
    let xs = random_xs(r, interior, true);
    build(r, xs)
}

/// `x_0, …, x_len` with `f(x_{i+1}) = x_i`, each preimage picked at random.
pub fn random_backward_orbit<R: Rng>(r: &mut R, f: &PLMap, len: usize) -> Vec<Rational> {
    let mut xs = vec![random_value(r, 64)];
    for _ in 0..len {
        let pre = f.level_crossings(xs.last().unwrap());
        xs.push(pre.choose(r).expect("onto map has preimages").clone());
    }
    xs
}

/// `(x, y)` pairs of the stored curve, converted exactly from their decimal
/// float form.
pub fn load_curve(text: &str) -> Vec<(f64, f64, Rational)> {
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let mut it = l.split_whitespace().map(|v| v.parse::<f64>().unwrap());
            let (x, y) = (it.next().unwrap(), it.next().unwrap());
            (x, y, from_f64(x).unwrap())
        })
        .collect()
}

pub type Small = Ratio<i128>;

fn small(x: &Rational) -> Small {
    use num_traits::ToPrimitive;
    Small::new(x.numer().to_i128().unwrap(), x.denom().to_i128().unwrap())
}

/// Brute-force zigzag lap test on the grid `k/1024`.
///
/// Returns, for each lap of `f`, whether some grid pair `a < c_k`,
/// `b > c_{k+1}` has the required extreme values strictly (or weakly) at the
/// ends. Values are compared through their rank among all grid values, so
/// the search itself runs on integers.
pub struct GridOracle {
    ranks: Vec<u32>,
    /// Grid index of every lap end.
    lap_ends: Vec<usize>,
    decreasing: Vec<bool>,
}

pub const GRID: usize = 1024;

impl GridOracle {
    pub fn new(f: &PLMap) -> Self {
        let pts: Vec<(Small, Small)> = f.breakpoints().iter().map(|p| (small(&p.x), small(&p.y))).collect();
        let mut seg = 0;
        let values: Vec<Small> = (0..=GRID)
            .map(|k| {
                let x = Small::new(k as i128, GRID as i128);
                while pts[seg + 1].0 < x {
                    seg += 1;
                }
                let (x0, y0) = &pts[seg];
                let (x1, y1) = &pts[seg + 1];
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            })
            .collect();
        let mut sorted = values.clone();
        sorted.sort();
        sorted.dedup();
        let ranks = values.iter().map(|v| sorted.binary_search(v).unwrap() as u32).collect();

        // Lap ends from sign changes of the grid differences.
        let grid_index = |x: &Small| (x * Small::from_integer(GRID as i128)).to_integer() as usize;
        let mut lap_ends = vec![0];
        let mut decreasing = Vec::new();
        let dir = |i: usize| pts[i + 1].1 < pts[i].1;
        let mut cur = dir(0);
        #[allow(clippy::needless_range_loop)]
        for i in 1..pts.len() - 1 {
            if dir(i) != cur {
                lap_ends.push(grid_index(&pts[i].0));
                decreasing.push(cur);
                cur = dir(i);
            }
        }
        lap_ends.push(GRID);
        decreasing.push(cur);
        GridOracle { ranks, lap_ends, decreasing }
    }

    pub fn lap_count(&self) -> usize {
        self.decreasing.len()
    }

    pub fn has_witness(&self, k: usize, strict: bool) -> bool {
        if k == 0 || k + 1 >= self.lap_count() {
            return false;
        }
        let (ck, ck1) = (self.lap_ends[k], self.lap_ends[k + 1]);
        // Orient to "minimum at a, maximum at b".
        let w: Vec<i64> = self
            .ranks
            .iter()
            .map(|&r| if self.decreasing[k] { r as i64 } else { -(r as i64) })
            .collect();
        let lt = |a: i64, b: i64| if strict { a < b } else { a <= b };
        for a in (0..ck).rev() {
            let inner_min = w[a + 1..=ck1].iter().copied().min().unwrap();
            if !lt(w[a], inner_min) {
                continue;
            }
            let mut max_before = w[a..=ck1].iter().copied().max().unwrap();
            let mut min_after = i64::MAX;
            for b in ck1 + 1..=GRID {
                min_after = min_after.min(w[b]);
                if lt(max_before, w[b]) && lt(w[a], min_after) {
                    return true;
                }
                max_before = max_before.max(w[b]);
            }
        }
        false
    }
}
