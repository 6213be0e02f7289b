//! The cube homotopy `h_t`, `t ∈ [0,1]ⁿ`, between the PL-ification (`t = 0`)
//! and `g` (`t = 1`), and the straight-line homotopy between same-sign lifts.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::geometry::{hull_disjoint, Point, PointSet};
use crate::rational::{int, min_max, rat, Rational};
use crate::simplicial::{barycentric_grid, DerivedSubdivision};

use super::double::DoublePointSample;
use super::function::LiftFunction;
use super::pipeline::{vertex_values, LiftTriangulation};

pub struct CubeHomotopy<'a> {
    kd: &'a DerivedSubdivision,
    g: &'a LiftFunction,
    g_values: Vec<Vec<Rational>>,
    coface: Vec<usize>,
}

/// `h_t(x)` together with the point `x(s̄)` at which `g` was sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct HomotopyValue {
    pub value: Vec<Rational>,
    pub sampled_at: Point,
}

impl<'a> CubeHomotopy<'a> {
    pub fn new(t: &'a LiftTriangulation, g: &'a LiftFunction) -> Result<Self> {
        let values = vertex_values(&t.k_derived, g)?;
        Self::with_vertex_values(&t.k_derived, g, values)
    }

    /// Uses `values` at the vertices of `K'` for the PL end instead of `g`.
    pub fn with_vertex_values(kd: &'a DerivedSubdivision, g: &'a LiftFunction, values: Vec<Vec<Rational>>) -> Result<Self> {
        if values.len() != kd.result.num_vertices() {
            return Err(Error::NotLinearOnComplex);
        }
        let kp = &kd.result;
        let mut coface = vec![usize::MAX; kp.len()];
        for fct in kp.facets() {
            coface[fct] = fct;
        }
        // Simplices are ordered by dimension, so walk downward from the facets.
        let up = kp.cofaces();
        for i in (0..kp.len()).rev() {
            if coface[i] == usize::MAX {
                coface[i] = up[i].iter().map(|&c| coface[c]).find(|&c| c != usize::MAX).unwrap_or(i);
            }
        }
        Ok(CubeHomotopy { kd, g, g_values: values, coface })
    }

    /// Dimension `n` of the parameter cube.
    pub fn cube_dim(&self) -> usize {
        self.kd.parent.dim()
    }

    pub fn vertex_values(&self) -> &[Vec<Rational>] {
        &self.g_values
    }

    fn check_t(&self, t: &[Rational]) -> Result<()> {
        if t.len() != self.cube_dim() {
            return Err(Error::DimensionMismatch { expected: self.cube_dim(), found: t.len() });
        }
        if t.iter().any(|v| v.is_negative() || v > &Rational::one()) {
            return Err(Error::OutOfRange("t must lie in [0, 1]^n".into()));
        }
        Ok(())
    }

    /// `h_t` at barycentric coordinates `lambda` of the full flag `facet`.
    pub fn eval_in(&self, t: &[Rational], facet: usize, lambda: &[Rational]) -> Result<HomotopyValue> {
        self.check_t(t)?;
        let kp = &self.kd.result;
        let chain = kp.simplex(facet);
        let k = chain.len() - 1;
        let mut tail = vec![Rational::zero(); k + 2];
        for i in (0..=k).rev() {
            tail[i] = &tail[i + 1] + &lambda[i];
        }
        let ratio = |num: &Rational, den: &Rational| if den.is_zero() { Rational::zero() } else { num / den };
        let s: Vec<Rational> = (0..=k).map(|i| if i == 0 { Rational::zero() } else { ratio(&tail[i], &tail[i - 1]) }).collect();
        let sp: Vec<Rational> =
            (0..=k).map(|i| if i == 0 { Rational::zero() } else { s[i].clone().max(t[i - 1].clone()) }).collect();
        let sb: Vec<Rational> = (0..=k).map(|i| ratio(&s[i], &sp[i])).collect();

        let dim = kp.ambient_dim();
        let mut x = kp.vertex(chain[k]).clone();
        for i in (1..=k).rev() {
            let keep = Rational::one() - &sb[i];
            x = Point::combination(dim, [(&keep, kp.vertex(chain[i - 1])), (&sb[i], &x)]);
        }
        let mut y = self.g.value(&x)?;
        for i in (1..=k).rev() {
            let w = self.nested_values(chain, i - 1, &sb);
            let keep = Rational::one() - &sp[i];
            y = w.iter().zip(&y).map(|(a, b)| &keep * a + &sp[i] * b).collect();
        }
        Ok(HomotopyValue { value: y, sampled_at: x })
    }

    /// `g_n(v_j(s̄))`: the PL end evaluated on the face spanned by the first `j + 1` flag vertices.
    fn nested_values(&self, chain: &[usize], j: usize, sb: &[Rational]) -> Vec<Rational> {
        let mut w = self.g_values[chain[j]].clone();
        for i in (1..=j).rev() {
            let keep = Rational::one() - &sb[i];
            w = self.g_values[chain[i - 1]].iter().zip(&w).map(|(a, b)| &keep * a + &sb[i] * b).collect();
        }
        w
    }

    /// `h_t` at a point given by barycentric coordinates in any simplex of `K'`.
    pub fn eval_on(&self, t: &[Rational], simplex: usize, lambda: &[Rational]) -> Result<HomotopyValue> {
        let kp = &self.kd.result;
        let facet = self.coface[simplex];
        let mut full = vec![Rational::zero(); kp.simplex(facet).len()];
        for (v, l) in kp.simplex(simplex).iter().zip(lambda) {
            let pos = kp.simplex(facet).binary_search(v).map_err(|_| Error::OutsideComplex)?;
            full[pos] = l.clone();
        }
        self.eval_in(t, facet, &full)
    }

    pub fn eval(&self, t: &[Rational], x: &Point) -> Result<Vec<Rational>> {
        let (i, lambda) = self.kd.result.locate(x).ok_or(Error::OutsideComplex)?;
        Ok(self.eval_on(t, i, &lambda)?.value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomotopyReport {
    pub t: Vec<Rational>,
    pub containment_checked: usize,
    pub containment_violations: usize,
    pub injectivity_checked: usize,
    pub injectivity_violations: usize,
    pub first_violation: Option<(Point, Point)>,
}

impl HomotopyReport {
    pub fn passed(&self) -> bool {
        self.containment_violations == 0 && self.injectivity_violations == 0
    }
}

fn in_hull(p: &[Rational], set: &[Vec<Rational>]) -> Result<bool> {
    if p.len() == 1 {
        let (lo, hi) = min_max(set.iter().map(|v| &v[0])).ok_or(Error::EmptyPointSet)?;
        return Ok(lo <= p[0] && p[0] <= hi);
    }
    let a = PointSet::new(vec![Point::new(p.to_vec())])?;
    let b = PointSet::new(set.iter().map(|v| Point::new(v.clone())).collect())?;
    Ok(!hull_disjoint(&a, &b)?.is_disjoint())
}

/// Checks `h_t(σ) ⊂ conv g(σ)` on grid samples of every flag `σ` of `K'`, and
/// `h_t(x) ≠ h_t(y)` on the sampled double points of `f: K' → L'`.
pub fn homotopy_certificate(
    h: &CubeHomotopy<'_>,
    t: &[Rational],
    delta: &DoublePointSample,
    resolution: usize,
) -> Result<HomotopyReport> {
    let kp = &h.kd.result;
    let mut report = HomotopyReport {
        t: t.to_vec(),
        containment_checked: 0,
        containment_violations: 0,
        injectivity_checked: 0,
        injectivity_violations: 0,
        first_violation: None,
    };
    let mut truth: Vec<Option<Vec<Rational>>> = vec![None; kp.num_vertices()];
    for fct in kp.facets() {
        let chain = kp.simplex(fct).clone();
        let grid = barycentric_grid(chain.len(), resolution);
        let mut corners: Vec<Vec<Rational>> = Vec::with_capacity(chain.len() + 1);
        for &v in &chain {
            if truth[v].is_none() {
                truth[v] = Some(h.g.value(kp.vertex(v))?);
            }
            corners.push(truth[v].clone().unwrap());
        }
        for lam in &grid {
            let hv = h.eval_in(t, fct, lam)?;
            let mut set = corners.clone();
            set.push(h.g.value(&hv.sampled_at)?);
            report.containment_checked += 1;
            if !in_hull(&hv.value, &set)? {
                report.containment_violations += 1;
                if report.first_violation.is_none() {
                    let p = kp.point_at(fct, lam);
                    report.first_violation = Some((p.clone(), p));
                }
            }
        }
    }
    for pair in &delta.pairs {
        let hx = h.eval_on(t, pair.sources.0, &pair.lambda_x)?;
        let hy = h.eval_on(t, pair.sources.1, &pair.lambda_y)?;
        report.injectivity_checked += 1;
        if hx.value == hy.value {
            report.injectivity_violations += 1;
            if report.first_violation.is_none() {
                report.first_violation = Some((pair.x.clone(), pair.y.clone()));
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearHomotopyReport {
    pub pairs: usize,
    pub t_values: usize,
    /// Pairs on which the two sign maps disagree.
    pub mismatched_pairs: usize,
    pub first_mismatch: Option<usize>,
    /// Pairs identified by `(1 − t) g + t g'` for some sampled `t`.
    pub failing_pairs: usize,
}

impl LinearHomotopyReport {
    pub fn signs_match(&self) -> bool {
        self.mismatched_pairs == 0
    }

    pub fn passed(&self) -> bool {
        self.signs_match() && self.failing_pairs == 0
    }
}

/// `d' = c d` with `c > 0`, decided exactly.
fn same_direction(d: &[Rational], e: &[Rational]) -> bool {
    let dot: Rational = d.iter().zip(e).map(|(a, b)| a * b).sum();
    if !dot.is_positive() {
        return false;
    }
    (0..d.len()).all(|i| (i + 1..d.len()).all(|j| &d[i] * &e[j] == &d[j] * &e[i]))
}

/// Compares the sign maps of `g` and `g2` on `delta`, then checks injectivity of
/// `g_t = (1 − t) g + t g2` at `t = 0, 1/steps, …, 1`.
pub fn linear_lift_homotopy_check(
    g: &LiftFunction,
    g2: &LiftFunction,
    delta: &DoublePointSample,
    steps: usize,
) -> Result<LinearHomotopyReport> {
    if g.codim() != g2.codim() {
        return Err(Error::DimensionMismatch { expected: g.codim(), found: g2.codim() });
    }
    if steps == 0 {
        return Err(Error::OutOfRange(format!("steps must be positive, got {steps}")));
    }
    let ts: Vec<Rational> = (0..=steps).map(|i| rat(i as i64, steps as i64)).collect();
    let mut report =
        LinearHomotopyReport { pairs: delta.len(), t_values: ts.len(), mismatched_pairs: 0, first_mismatch: None, failing_pairs: 0 };
    for (idx, pair) in delta.pairs.iter().enumerate() {
        let diff = |h: &LiftFunction| -> Result<Vec<Rational>> {
            let a = h.value(&pair.y)?;
            let b = h.value(&pair.x)?;
            Ok(a.iter().zip(&b).map(|(u, v)| u - v).collect())
        };
        let d = diff(g)?;
        let e = diff(g2)?;
        if !same_direction(&d, &e) {
            report.mismatched_pairs += 1;
            report.first_mismatch.get_or_insert(idx);
        }
        let one = int(1);
        let fails = ts.iter().any(|t| {
            let s = &one - t;
            d.iter().zip(&e).all(|(a, b)| (&s * a + t * b).is_zero())
        });
        if fails {
            report.failing_pairs += 1;
        }
    }
    Ok(report)
}
