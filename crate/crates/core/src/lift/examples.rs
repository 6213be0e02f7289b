//! Built-in instances: the folded interval with its oscillating lift, a double
//! cover of a square boundary, and seeded random folds.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{hull_disjoint, HullRelation, Point, PointSet};
use crate::rational::{int, rat, Rational};
use crate::simplicial::{compatible_derived_pair, Centroid, Complex, Simplex, SimplicialMap};

use super::function::{ClosedForm, LiftFunction, TrigTerm};
use super::pipeline::{certify, CertificateEntry, CertificateFailure};

fn line(coords: &[Rational]) -> Vec<Point> {
    coords.iter().map(|c| Point::new(vec![c.clone()])).collect()
}

/// `f(x) = |x|` from `{−1, 0, 1}` onto `{0, 1}`, and the sign-corrected oscillating `g`.
pub fn example_absval() -> (SimplicialMap, LiftFunction) {
    (absval_map(), LiftFunction::absval_example())
}

/// The same fold with the negative branch taken as `x(1 + cos(2π/x))`.
pub fn example_absval_literal() -> (SimplicialMap, LiftFunction) {
    (absval_map(), LiftFunction::ClosedForm(ClosedForm::AbsvalLiteral))
}

pub fn absval_map() -> SimplicialMap {
    let k = Complex::from_facets(line(&[int(-1), int(0), int(1)]), &[vec![0, 1], vec![1, 2]]);
    let l = Complex::from_facets(line(&[int(0), int(1)]), &[vec![0, 1]]);
    SimplicialMap::new(k, l, vec![1, 0, 1]).expect("the fold is simplicial")
}

/// Consecutive members `2/(k+1) < 2/k` of `1, 1/1.5, 1/2, …` inside `[ε/2, ε]`
/// and an intersection point of `conv g([ε/2, ε])` and `conv g([−ε, −ε/2])`.
#[derive(Debug, Clone, PartialEq)]
pub struct BarycentricFailure {
    pub eps: Rational,
    pub k: u64,
    pub pair: (Rational, Rational),
    /// The member of the pair at which the positive branch vanishes.
    pub positive_zero: Rational,
    /// The member `m` of the pair with `g(−m) = 0`.
    pub negative_zero: Rational,
    pub samples: usize,
    pub relation: HullRelation,
}

impl BarycentricFailure {
    pub fn certified(&self, g: &LiftFunction) -> Result<bool> {
        let HullRelation::Intersect(w) = &self.relation else { return Ok(false) };
        let (a, b) = failure_samples(g, &self.eps, &self.pair, self.samples)?;
        Ok(w.verify(&a, &b))
    }
}

/// Values of `g` on `samples` even points of `[ε/2, ε]` plus the pair, and on their negatives.
fn failure_samples(g: &LiftFunction, eps: &Rational, pair: &(Rational, Rational), samples: usize) -> Result<(PointSet, PointSet)> {
    let half = eps / int(2);
    let n = samples.max(2);
    let mut xs: Vec<Rational> = (0..n).map(|i| &half + (eps - &half) * rat(i as i64, (n - 1) as i64)).collect();
    xs.push(pair.0.clone());
    xs.push(pair.1.clone());
    let value = |x: Rational| g.value(&Point::new(vec![x])).map(Point::new);
    let a: Vec<Point> = xs.iter().map(|x| value(x.clone())).collect::<Result<_>>()?;
    let b: Vec<Point> = xs.iter().map(|x| value(-x.clone())).collect::<Result<_>>()?;
    Ok((PointSet::new(a)?, PointSet::new(b)?))
}

pub fn barycentric_failure(eps: &Rational, samples: usize) -> Result<BarycentricFailure> {
    if !eps.is_positive() || eps > &Rational::one() {
        return Err(Error::OutOfRange(format!("eps must lie in (0, 1], got {eps}")));
    }
    let k: BigInt = (int(2) / eps).floor().to_integer() + 1;
    let k_u = k.to_u64().ok_or_else(|| Error::OutOfRange("eps too small".into()))?;
    let lo = Rational::new(2.into(), &k + 1);
    let hi = Rational::new(2.into(), k.clone());
    // 2/m is 1/(m/2) for even m and −(2/m) is a zero of the negative branch for odd m.
    let (positive_zero, negative_zero) = if k.is_even() { (hi.clone(), lo.clone()) } else { (lo.clone(), hi.clone()) };
    let pair = (lo, hi);
    let (a, b) = failure_samples(&LiftFunction::absval_example(), eps, &pair, samples)?;
    let relation = hull_disjoint(&a, &b)?;
    Ok(BarycentricFailure { eps: eps.clone(), k: k_u, pair, positive_zero, negative_zero, samples, relation })
}

/// Certificate attempt on `depth` rounds of plain barycentric subdivision.
pub fn coarse_barycentric(
    f: &SimplicialMap,
    g: &LiftFunction,
    depth: usize,
    res: usize,
) -> Result<(Vec<CertificateEntry>, Vec<CertificateFailure>)> {
    let mut map = f.clone();
    for _ in 0..depth {
        map = compatible_derived_pair(&map, &mut Centroid)?.2;
    }
    let (kd, _, _) = compatible_derived_pair(&map, &mut Centroid)?;
    certify(&map, &kd, g, res)
}

/// The boundary of the square `|x| + |y| = 1` folded onto a path of two edges,
/// lifted by `g(x, y) = y`.
pub fn example_square_cover() -> (SimplicialMap, LiftFunction) {
    let p = |x: i64, y: i64| Point::new(vec![int(x), int(y)]);
    let k = Complex::from_facets(vec![p(-1, 0), p(0, 1), p(1, 0), p(0, -1)], &[vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]]);
    let l = Complex::from_facets(line(&[int(0), int(1), int(2)]), &[vec![0, 1], vec![1, 2]]);
    let f = SimplicialMap::new(k, l, vec![0, 1, 2, 1]).expect("the cover is simplicial");
    let g = LiftFunction::trig_poly(2, vec![vec![TrigTerm::monomial(1.0, vec![0, 1])]]);
    (f, g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InstanceKind {
    /// A fold of `[−1, 1]` with random breakpoints, `k = 1`.
    Zigzag,
    /// `(x, y) ↦ (|x|, y)` on a triangulated rectangle, `k = 1`.
    Fold,
    /// The same fold with a lift into the plane, `k = 2`.
    FoldPlanar,
}

impl InstanceKind {
    pub const ALL: [InstanceKind; 3] = [InstanceKind::Zigzag, InstanceKind::Fold, InstanceKind::FoldPlanar];

    pub fn name(self) -> &'static str {
        match self {
            InstanceKind::Zigzag => "zigzag",
            InstanceKind::Fold => "fold",
            InstanceKind::FoldPlanar => "fold_planar",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub f: SimplicialMap,
    pub g: LiftFunction,
}

fn dyadic(rng: &mut ChaCha8Rng, lo: i64, hi: i64, den: i64) -> Rational {
    rat(rng.gen_range(lo..=hi), den)
}

/// A seeded fold together with a lift that separates every pair of sheets.
pub fn random_instance(kind: InstanceKind, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amp = rng.gen_range(0.1..0.8);
    let freq = rng.gen_range(1.0..6.0);
    let phase = rng.gen_range(0.0..core::f64::consts::TAU);
    let (f, g) = match kind {
        InstanceKind::Zigzag => {
            let a = dyadic(&mut rng, 8, 24, 32);
            let b = dyadic(&mut rng, 8, 24, 32);
            let q = dyadic(&mut rng, 8, 24, 32);
            let k = Complex::from_facets(
                line(&[int(-1), -a, int(0), b, int(1)]),
                &[vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 4]],
            );
            let l = Complex::from_facets(line(&[int(0), q, int(1)]), &[vec![0, 1], vec![1, 2]]);
            let f = SimplicialMap::new(k, l, vec![2, 1, 0, 1, 2]).expect("zigzag fold is simplicial");
            // x(1 + a cos(bx + c)) keeps the sign of x.
            let g = LiftFunction::trig_poly(
                1,
                vec![vec![TrigTerm::monomial(1.0, vec![1]), TrigTerm::trig(amp, vec![1], vec![freq], phase)]],
            );
            (f, g)
        }
        InstanceKind::Fold | InstanceKind::FoldPlanar => {
            let ys = [int(-1), dyadic(&mut rng, -8, 8, 32), int(1)];
            let f = rectangle_fold(&ys);
            let g = if kind == InstanceKind::Fold {
                // x(1 + a cos(by + c)) + e y².
                let e = rng.gen_range(-1.0..1.0);
                LiftFunction::trig_poly(
                    2,
                    vec![vec![
                        TrigTerm::monomial(1.0, vec![1, 0]),
                        TrigTerm::trig(amp, vec![1, 0], vec![0.0, freq], phase),
                        TrigTerm::monomial(e, vec![0, 2]),
                    ]],
                )
            } else {
                // x(cos θ, sin θ) with θ = by + c.
                let half_pi = core::f64::consts::FRAC_PI_2;
                LiftFunction::trig_poly(
                    2,
                    vec![
                        vec![TrigTerm::trig(1.0, vec![1, 0], vec![0.0, freq], phase)],
                        vec![TrigTerm::trig(1.0, vec![1, 0], vec![0.0, freq], phase - half_pi)],
                    ],
                )
            };
            (f, g)
        }
    };
    Instance { name: format!("{}-{seed}", kind.name()), f, g }
}

/// `(x, y) ↦ (|x|, y)` on `[−1, 1] × [y₀, y_m]` with rows at `ys`.
pub fn rectangle_fold(ys: &[Rational]) -> SimplicialMap {
    let xs = [int(-1), int(0), int(1)];
    let idx = |i: usize, j: usize| j * 3 + i;
    let mut verts = Vec::new();
    for y in ys {
        for x in &xs {
            verts.push(Point::new(vec![x.clone(), y.clone()]));
        }
    }
    let mut facets: Vec<Simplex> = Vec::new();
    for j in 0..ys.len() - 1 {
        for outer in [0usize, 2] {
            facets.push(vec![idx(1, j), idx(outer, j), idx(outer, j + 1)]);
            facets.push(vec![idx(1, j), idx(1, j + 1), idx(outer, j + 1)]);
        }
    }
    let k = Complex::from_facets(verts, &facets);
    let mut lverts = Vec::new();
    for y in ys {
        for x in [int(0), int(1)] {
            lverts.push(Point::new(vec![x, y.clone()]));
        }
    }
    let lidx = |i: usize, j: usize| j * 2 + i;
    let mut lfacets: Vec<Simplex> = Vec::new();
    for j in 0..ys.len() - 1 {
        lfacets.push(vec![lidx(0, j), lidx(1, j), lidx(1, j + 1)]);
        lfacets.push(vec![lidx(0, j), lidx(0, j + 1), lidx(1, j + 1)]);
    }
    let l = Complex::from_facets(lverts, &lfacets);
    let vmap: Vec<usize> = (0..k.num_vertices()).map(|v| lidx(if v % 3 == 1 { 0 } else { 1 }, v / 3)).collect();
    SimplicialMap::new(k, l, vmap).expect("the rectangle fold is simplicial")
}
