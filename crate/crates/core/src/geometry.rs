//! Exact affine geometry over the rationals: points, hull separation,
//! certified hull distances and diameters.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lp::{feasible_point, Feasibility};
use crate::rational::{from_f64_exact, min_max, snap, sqrt_lower, sqrt_upper, to_f64, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub coords: Vec<Rational>,
}

impl Point {
    pub fn new(coords: Vec<Rational>) -> Self {
        Point { coords }
    }

    pub fn origin(dim: usize) -> Self {
        Point { coords: vec![Rational::zero(); dim] }
    }

    pub fn from_f64(values: &[f64]) -> Option<Self> {
        values
            .iter()
            .map(|&v| from_f64_exact(v))
            .collect::<Option<Vec<_>>>()
            .map(Point::new)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(to_f64).collect()
    }

    pub fn sub(&self, other: &Point) -> Vec<Rational> {
        self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect()
    }

    pub fn squared_distance(&self, other: &Point) -> Rational {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| {
                let d = a - b;
                &d * &d
            })
            .sum()
    }

    /// `Σ wᵢ pᵢ` for weights that are expected (not checked) to sum to one.
    pub fn combination<'a, I>(dim: usize, terms: I) -> Point
    where
        I: IntoIterator<Item = (&'a Rational, &'a Point)>,
    {
        let mut out = vec![Rational::zero(); dim];
        for (w, p) in terms {
            if w.is_zero() {
                continue;
            }
            for (o, c) in out.iter_mut().zip(&p.coords) {
                *o += w * c;
            }
        }
        Point::new(out)
    }

    pub fn lerp(&self, other: &Point, t: &Rational) -> Point {
        let s = Rational::one() - t;
        Point::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| &s * a + t * b)
                .collect(),
        )
    }

    pub fn centroid(points: &[&Point]) -> Point {
        let dim = points[0].dim();
        let w = Rational::new(1.into(), (points.len() as i64).into());
        let mut out = vec![Rational::zero(); dim];
        for p in points {
            for (o, c) in out.iter_mut().zip(&p.coords) {
                *o += c;
            }
        }
        for o in &mut out {
            *o *= &w;
        }
        Point::new(out)
    }
}

/// A nonempty finite set of points sharing one ambient dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<Point>,
}

impl PointSet {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyPointSet)?;
        let dim = first.dim();
        if let Some(bad) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.dim() });
        }
        Ok(PointSet { points })
    }

    /// Builds a set from float samples, taking their exact dyadic values.
    pub fn from_f64_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let pts = rows
            .iter()
            .map(|r| Point::from_f64(r).ok_or_else(|| Error::OutOfRange("non-finite sample".into())))
            .collect::<Result<Vec<_>>>()?;
        PointSet::new(pts)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }
}

/// `φ(x) = weights·x + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFunctional {
    pub weights: Vec<Rational>,
    pub offset: Rational,
}

impl AffineFunctional {
    pub fn eval(&self, p: &Point) -> Rational {
        let s: Rational = self.weights.iter().zip(&p.coords).map(|(w, c)| w * c).sum();
        s + &self.offset
    }

    pub fn negated(&self) -> Self {
        AffineFunctional {
            weights: self.weights.iter().map(|w| -w.clone()).collect(),
            offset: -self.offset.clone(),
        }
    }

    /// Exact check that `φ < 0` on `a` and `φ > 0` on `b`.
    pub fn separates(&self, a: &PointSet, b: &PointSet) -> bool {
        self.weights.len() == a.dim()
            && a.points().iter().all(|p| self.eval(p).is_negative())
            && b.points().iter().all(|p| self.eval(p).is_positive())
    }
}

/// A point lying in both hulls with its convex coefficients on each side.
#[derive(Debug, Clone, PartialEq)]
pub struct HullWitness {
    pub point: Point,
    pub coeffs_a: Vec<Rational>,
    pub coeffs_b: Vec<Rational>,
}

impl HullWitness {
    pub fn verify(&self, a: &PointSet, b: &PointSet) -> bool {
        fn ok(coeffs: &[Rational], set: &PointSet, target: &Point) -> bool {
            if coeffs.len() != set.len() || coeffs.iter().any(Signed::is_negative) {
                return false;
            }
            let sum: Rational = coeffs.iter().sum();
            sum.is_one() && Point::combination(set.dim(), coeffs.iter().zip(set.points())) == *target
        }
        ok(&self.coeffs_a, a, &self.point) && ok(&self.coeffs_b, b, &self.point)
    }

    fn swapped(self) -> Self {
        HullWitness { point: self.point, coeffs_a: self.coeffs_b, coeffs_b: self.coeffs_a }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HullRelation {
    Disjoint(AffineFunctional),
    Intersect(HullWitness),
}

impl HullRelation {
    pub fn is_disjoint(&self) -> bool {
        matches!(self, HullRelation::Disjoint(_))
    }
}

fn check_dims(a: &PointSet, b: &PointSet) -> Result<usize> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    if a.dim() == 0 {
        return Err(Error::OutOfRange("ambient dimension must be at least 1".into()));
    }
    Ok(a.dim())
}

/// Decides whether `conv A` and `conv B` are disjoint.
///
/// The answer is symmetric: swapping the arguments negates the functional and
/// swaps the witness coefficients.
pub fn hull_disjoint(a: &PointSet, b: &PointSet) -> Result<HullRelation> {
    let dim = check_dims(a, b)?;
    if canonical_order(a, b) == Ordering::Greater {
        return Ok(match hull_disjoint_ordered(b, a, dim) {
            HullRelation::Disjoint(phi) => HullRelation::Disjoint(phi.negated()),
            HullRelation::Intersect(w) => HullRelation::Intersect(w.swapped()),
        });
    }
    Ok(hull_disjoint_ordered(a, b, dim))
}

fn canonical_order(a: &PointSet, b: &PointSet) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.points().cmp(b.points()))
}

fn hull_disjoint_ordered(a: &PointSet, b: &PointSet, dim: usize) -> HullRelation {
    if dim == 1 {
        return intervals(a, b);
    }
    if let Some(phi) = guided_separator(a, b) {
        return HullRelation::Disjoint(phi);
    }
    let (na, nb) = (a.len(), b.len());
    let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(dim + 2);
    for d in 0..dim {
        let mut row = Vec::with_capacity(na + nb);
        row.extend(a.points().iter().map(|p| p.coords[d].clone()));
        row.extend(b.points().iter().map(|p| -p.coords[d].clone()));
        rows.push(row);
    }
    let mut ones_a = vec![Rational::zero(); na + nb];
    let mut ones_b = vec![Rational::zero(); na + nb];
    ones_a[..na].iter_mut().for_each(|v| *v = Rational::one());
    ones_b[na..].iter_mut().for_each(|v| *v = Rational::one());
    rows.push(ones_a);
    rows.push(ones_b);
    let mut rhs = vec![Rational::zero(); dim];
    rhs.push(Rational::one());
    rhs.push(Rational::one());

    match feasible_point(&rows, &rhs) {
        Feasibility::Feasible(z) => {
            let coeffs_a = z[..na].to_vec();
            let coeffs_b = z[na..].to_vec();
            let point = Point::combination(dim, coeffs_a.iter().zip(a.points()));
            HullRelation::Intersect(HullWitness { point, coeffs_a, coeffs_b })
        }
        Feasibility::Infeasible(y) => {
            // y = (w, α, β):  w·a + α >= 0,  -w·b + β >= 0,  α + β < 0.
            let w = &y[..dim];
            let (alpha, beta) = (&y[dim], &y[dim + 1]);
            let mid = (beta - alpha) / Rational::from_integer(2.into());
            let phi = AffineFunctional { weights: w.iter().map(|v| -v.clone()).collect(), offset: mid };
            debug_assert!(phi.separates(a, b));
            HullRelation::Disjoint(phi)
        }
    }
}

/// Separator along the float closest-pair direction, kept only if it separates exactly.
fn guided_separator(a: &PointSet, b: &PointSet) -> Option<AffineFunctional> {
    let af: Vec<Vec<f64>> = a.points().iter().map(Point::to_f64).collect();
    let bf: Vec<Vec<f64>> = b.points().iter().map(Point::to_f64).collect();
    let (dir, norm) = min_norm_difference(&af, &bf);
    if !(norm > 0.0 && norm.is_finite()) {
        return None;
    }
    let z: Vec<Rational> = dir.iter().map(|v| snap(v / norm, 32)).collect();
    let dot = |p: &Point| -> Rational { z.iter().zip(&p.coords).map(|(u, v)| u * v).sum() };
    let (amin, _) = min_max(a.points().iter().map(dot).collect::<Vec<_>>().iter())?;
    let (_, bmax) = min_max(b.points().iter().map(dot).collect::<Vec<_>>().iter())?;
    if amin <= bmax {
        return None;
    }
    let offset = (amin + bmax) / Rational::from_integer(2.into());
    Some(AffineFunctional { weights: z.iter().map(|v| -v.clone()).collect(), offset })
}

fn intervals(a: &PointSet, b: &PointSet) -> HullRelation {
    let (amin, amax) = min_max(a.points().iter().map(|p| &p.coords[0])).unwrap();
    let (bmin, bmax) = min_max(b.points().iter().map(|p| &p.coords[0])).unwrap();
    let two = Rational::from_integer(2.into());
    if amax < bmin {
        let offset = -(&amax + &bmin) / &two;
        return HullRelation::Disjoint(AffineFunctional { weights: vec![Rational::one()], offset });
    }
    if bmax < amin {
        let offset = (&bmax + &amin) / &two;
        return HullRelation::Disjoint(AffineFunctional { weights: vec![-Rational::one()], offset });
    }
    let x = if amin > bmin { amin.clone() } else { bmin.clone() };
    let coeffs = |set: &PointSet, lo: &Rational, hi: &Rational| {
        let mut c = vec![Rational::zero(); set.len()];
        let ilo = set.points().iter().position(|p| &p.coords[0] == lo).unwrap();
        let ihi = set.points().iter().position(|p| &p.coords[0] == hi).unwrap();
        if lo == hi {
            c[ilo] = Rational::one();
        } else {
            let s = (&x - lo) / (hi - lo);
            c[ilo] += Rational::one() - &s;
            c[ihi] += s;
        }
        c
    };
    let coeffs_a = coeffs(a, &amin, &amax);
    let coeffs_b = coeffs(b, &bmin, &bmax);
    HullRelation::Intersect(HullWitness { point: Point::new(vec![x]), coeffs_a, coeffs_b })
}

/// Certified bracket on the Euclidean distance between two hulls.
#[derive(Debug, Clone, PartialEq)]
pub struct HullDistance {
    /// Exact lower bound on the squared distance.
    pub lower_squared: Rational,
    /// Float with `lower * lower <= lower_squared`.
    pub lower: f64,
    /// Distance between two explicit hull points found by the iteration.
    pub upper: f64,
}

impl HullDistance {
    fn zero() -> Self {
        HullDistance { lower_squared: Rational::zero(), lower: 0.0, upper: 0.0 }
    }
}

/// Lower bound on `dist(conv A, conv B)`; zero exactly when the hulls meet.
pub fn hull_distance(a: &PointSet, b: &PointSet) -> Result<HullDistance> {
    check_dims(a, b)?;
    match hull_disjoint(a, b)? {
        HullRelation::Intersect(_) => Ok(HullDistance::zero()),
        HullRelation::Disjoint(phi) => Ok(separated_distance(a, b, &phi)),
    }
}

/// Distance bracket for hulls already known to be separated by `separator`
/// (negative on `a`, positive on `b`).
pub fn separated_distance(a: &PointSet, b: &PointSet, separator: &AffineFunctional) -> HullDistance {
    let af: Vec<Vec<f64>> = a.points().iter().map(Point::to_f64).collect();
    let bf: Vec<Vec<f64>> = b.points().iter().map(Point::to_f64).collect();
    let (dir, upper) = min_norm_difference(&af, &bf);

    let mut best = direction_bound(a, b, &separator.weights.iter().map(|w| -w.clone()).collect::<Vec<_>>());
    if let Some(z) = dir.iter().map(|&v| from_f64_exact(v)).collect::<Option<Vec<_>>>() {
        if let Some(q) = direction_bound(a, b, &z) {
            if best.as_ref().is_none_or(|bq| &q > bq) {
                best = Some(q);
            }
        }
    }
    let lower_squared = best.unwrap_or_else(Rational::zero);
    let lower = sqrt_lower(&lower_squared);
    HullDistance { lower, upper: upper.max(lower), lower_squared }
}

/// `(min_a z·a − max_b z·b)² / |z|²` when the gap is positive.
fn direction_bound(a: &PointSet, b: &PointSet, z: &[Rational]) -> Option<Rational> {
    let norm2: Rational = z.iter().map(|v| v * v).sum();
    if norm2.is_zero() {
        return None;
    }
    let dot = |p: &Point| -> Rational { z.iter().zip(&p.coords).map(|(u, v)| u * v).sum() };
    let (amin, _) = min_max(a.points().iter().map(dot).collect::<Vec<_>>().iter())?;
    let (_, bmax) = min_max(b.points().iter().map(dot).collect::<Vec<_>>().iter())?;
    let gap = amin - bmax;
    if gap.is_positive() {
        Some(&gap * &gap / norm2)
    } else {
        None
    }
}

/// Gilbert's iteration on the Minkowski difference `A − B` in floating point.
///
/// Returns the last iterate `z ∈ conv(A − B)` and its norm.
pub fn min_norm_difference(a: &[Vec<f64>], b: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let dim = a[0].len();
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(x, y)| x * y).sum::<f64>();
    let mut z: Vec<f64> = (0..dim).map(|d| a[0][d] - b[0][d]).collect();
    for _ in 0..2000 {
        let zz = dot(&z, &z);
        if zz == 0.0 {
            break;
        }
        let sa = a
            .iter()
            .min_by(|p, q| dot(p, &z).partial_cmp(&dot(q, &z)).unwrap_or(Ordering::Equal))
            .unwrap();
        let sb = b
            .iter()
            .max_by(|p, q| dot(p, &z).partial_cmp(&dot(q, &z)).unwrap_or(Ordering::Equal))
            .unwrap();
        let s: Vec<f64> = (0..dim).map(|d| sa[d] - sb[d]).collect();
        let gap = zz - dot(&z, &s);
        if gap <= 1e-15 * zz {
            break;
        }
        let diff: Vec<f64> = (0..dim).map(|d| s[d] - z[d]).collect();
        let dd = dot(&diff, &diff);
        if dd == 0.0 {
            break;
        }
        let lambda = (gap / dd).clamp(0.0, 1.0);
        for d in 0..dim {
            z[d] += lambda * diff[d];
        }
    }
    let n = libm::sqrt(dot(&z, &z));
    (z, n)
}

/// Exact squared diameter with a float upper bound on the diameter itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Diameter {
    pub squared: Rational,
    pub value: f64,
}

pub fn diameter(a: &PointSet) -> Diameter {
    diameter_of(a.points().iter())
}

pub fn diameter_of<'a, I>(points: I) -> Diameter
where
    I: IntoIterator<Item = &'a Point>,
{
    let pts: Vec<&Point> = points.into_iter().collect();
    let mut best = Rational::zero();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = pts[i].squared_distance(pts[j]);
            if d > best {
                best = d;
            }
        }
    }
    let value = sqrt_upper(&best);
    Diameter { squared: best, value }
}

/// Barycentric coordinates of `p` relative to affinely independent `verts`.
///
/// Returns `None` when `p` is not in the affine hull.
pub fn barycentric(verts: &[&Point], p: &Point) -> Option<Vec<Rational>> {
    let k = verts.len();
    if k == 1 {
        return (verts[0] == p).then(|| vec![Rational::one()]);
    }
    let dim = p.dim();
    // Solve Σ_{i>=1} λ_i (v_i − v_0) = p − v_0 by Gaussian elimination.
    let cols = k - 1;
    let mut m: Vec<Vec<Rational>> = (0..dim)
        .map(|d| {
            let mut row: Vec<Rational> = (1..k).map(|i| &verts[i].coords[d] - &verts[0].coords[d]).collect();
            row.push(&p.coords[d] - &verts[0].coords[d]);
            row
        })
        .collect();
    let sol = solve_least(&mut m, cols)?;
    let rest: Rational = sol.iter().sum();
    let mut out = Vec::with_capacity(k);
    out.push(Rational::one() - rest);
    out.extend(sol);
    Some(out)
}

/// Solves an overdetermined but consistent augmented system; `None` if inconsistent
/// or the columns are dependent.
pub fn solve_least(m: &mut [Vec<Rational>], cols: usize) -> Option<Vec<Rational>> {
    let rows = m.len();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            return None;
        };
        m.swap(r, p);
        let inv = Rational::one() / &m[r][c];
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        let prow = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for j in c..=cols {
                    row[j] -= &f * &prow[j];
                }
            }
        }
        r += 1;
    }
    if m[r..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    Some((0..cols).map(|i| m[i][cols].clone()).collect())
}

/// Rank of a set of exact vectors.
pub fn rank(vectors: &[Vec<Rational>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let mut m: Vec<Vec<Rational>> = vectors.to_vec();
    let cols = m[0].len();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let prow = m[r].clone();
        for row in m.iter_mut().skip(r + 1) {
            if !row[c].is_zero() {
                let f = &row[c] / &prow[c];
                for j in c..cols {
                    row[j] -= &f * &prow[j];
                }
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

pub fn affinely_independent(points: &[&Point]) -> bool {
    if points.len() <= 1 {
        return true;
    }
    let diffs: Vec<Vec<Rational>> = points[1..].iter().map(|p| p.sub(points[0])).collect();
    rank(&diffs) == diffs.len()
}
