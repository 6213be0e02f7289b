//! Sampled double points of a simplicial map and the sign map of a lift.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::rational::{to_f64, Rational};
use crate::simplicial::{barycentric_grid, SimplicialMap};

use super::function::LiftFunction;

/// A pair `x ≠ y` with `f(x) = f(y)`, stored with `x > y` lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct DoublePair {
    pub x: Point,
    pub y: Point,
    /// Source simplices containing `x` and `y`.
    pub sources: (usize, usize),
    /// Barycentric coordinates of `x` (resp. `y`) in its source simplex.
    pub lambda_x: Vec<Rational>,
    pub lambda_y: Vec<Rational>,
    pub cluster: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DoublePointSample {
    pub resolution: usize,
    pub pairs: Vec<DoublePair>,
    pub clusters: usize,
}

impl DoublePointSample {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut a: usize) -> usize {
        while self.0[a] != a {
            self.0[a] = self.0[self.0[a]];
            a = self.0[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

/// Grid samples of `Δ_f` with barycentric denominator `resolution` on every pair
/// of distinct source simplices with a common image.
///
/// Clusters are the classes of simplex pairs linked through shared samples.
pub fn sample_double_points(f: &SimplicialMap, resolution: usize) -> Result<DoublePointSample> {
    f.require_nondegenerate()?;
    if resolution == 0 {
        return Err(Error::OutOfRange("resolution must be positive".into()));
    }
    let k = &f.source;
    let mut seen: BTreeMap<(Point, Point), usize> = BTreeMap::new();
    let mut pairs: Vec<DoublePair> = Vec::new();
    let mut owner: Vec<usize> = Vec::new();
    let mut uf = UnionFind(Vec::new());
    let mut grids: BTreeMap<usize, Vec<Vec<Rational>>> = BTreeMap::new();

    for (target, sources) in f.preimages() {
        if sources.len() < 2 {
            continue;
        }
        let tv = f.target.simplex(target).clone();
        let grid = grids.entry(tv.len()).or_insert_with(|| barycentric_grid(tv.len(), resolution));
        for a in 0..sources.len() {
            for b in a + 1..sources.len() {
                let (s, t) = (sources[a], sources[b]);
                let over_s: Vec<usize> = tv.iter().map(|&w| f.vertex_over(s, w).unwrap()).collect();
                let over_t: Vec<usize> = tv.iter().map(|&w| f.vertex_over(t, w).unwrap()).collect();
                let pos_s: Vec<usize> = over_s.iter().map(|v| k.simplex(s).binary_search(v).unwrap()).collect();
                let pos_t: Vec<usize> = over_t.iter().map(|v| k.simplex(t).binary_search(v).unwrap()).collect();
                let id = uf.0.len();
                uf.0.push(id);
                for lam in grid.iter() {
                    if lam.iter().zip(over_s.iter().zip(&over_t)).all(|(l, (u, v))| l.is_zero() || u == v) {
                        continue;
                    }
                    let x = Point::combination(k.ambient_dim(), lam.iter().zip(over_s.iter().map(|&v| k.vertex(v))));
                    let y = Point::combination(k.ambient_dim(), lam.iter().zip(over_t.iter().map(|&v| k.vertex(v))));
                    let mut lx = alloc::vec![Rational::zero(); pos_s.len()];
                    let mut ly = alloc::vec![Rational::zero(); pos_t.len()];
                    for (j, l) in lam.iter().enumerate() {
                        lx[pos_s[j]] = l.clone();
                        ly[pos_t[j]] = l.clone();
                    }
                    let (x, y, sources, lx, ly) = if x > y { (x, y, (s, t), lx, ly) } else { (y, x, (t, s), ly, lx) };
                    match seen.get(&(x.clone(), y.clone())) {
                        Some(&i) => uf.union(owner[i], id),
                        None => {
                            seen.insert((x.clone(), y.clone()), pairs.len());
                            owner.push(id);
                            pairs.push(DoublePair { x, y, sources, lambda_x: lx, lambda_y: ly, cluster: 0 });
                        }
                    }
                }
            }
        }
    }
    let mut labels: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, p) in pairs.iter_mut().enumerate() {
        let root = uf.find(owner[i]);
        let next = labels.len();
        p.cluster = *labels.entry(root).or_insert(next);
    }
    Ok(DoublePointSample { resolution, pairs, clusters: labels.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClusterSigns {
    pub cluster: usize,
    pub positive: usize,
    pub negative: usize,
}

/// `g̃(x, y) = (g(y) − g(x)) / |g(y) − g(x)|` on each sampled pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SignMap {
    pub codim: usize,
    pub directions: Vec<Vec<f64>>,
    /// Exact signs when `k = 1`.
    pub signs: Option<Vec<i8>>,
    pub clusters: Vec<ClusterSigns>,
}

impl SignMap {
    /// Every cluster carries a single sign (only meaningful for `k = 1`).
    pub fn constant_per_cluster(&self) -> bool {
        self.clusters.iter().all(|c| c.positive == 0 || c.negative == 0)
    }
}

pub fn sign_map(g: &LiftFunction, delta: &DoublePointSample) -> Result<SignMap> {
    let k = g.codim();
    let mut directions = Vec::with_capacity(delta.len());
    let mut signs = Vec::with_capacity(delta.len());
    let mut clusters = alloc::vec![ClusterSigns::default(); delta.clusters];
    for (i, c) in clusters.iter_mut().enumerate() {
        c.cluster = i;
    }
    for p in &delta.pairs {
        let gx = g.value(&p.x)?;
        let gy = g.value(&p.y)?;
        let d: Vec<Rational> = gy.iter().zip(&gx).map(|(a, b)| a - b).collect();
        if d.iter().all(Zero::is_zero) {
            return Err(Error::NotEmbedded { x: p.x.to_f64(), y: p.y.to_f64() });
        }
        let df: Vec<f64> = d.iter().map(to_f64).collect();
        let norm = libm::sqrt(df.iter().map(|v| v * v).sum::<f64>());
        directions.push(df.iter().map(|v| v / norm).collect());
        if k == 1 {
            let s = if d[0].is_positive() { 1 } else { -1 };
            signs.push(s);
            if s > 0 {
                clusters[p.cluster].positive += 1;
            } else {
                clusters[p.cluster].negative += 1;
            }
        }
    }
    Ok(SignMap {
        codim: k,
        directions,
        signs: (k == 1).then_some(signs),
        clusters: if k == 1 { clusters } else { Vec::new() },
    })
}
