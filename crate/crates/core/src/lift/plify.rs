//! PL-ification `g★` and the exact injectivity test for `f × h` with `h` PL.

use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::geometry::{hull_disjoint, HullRelation, Point, PointSet};
use crate::rational::Rational;
use crate::simplicial::SimplicialMap;

use super::function::{LiftFunction, PlTable};
use super::pipeline::{vertex_values, LiftTriangulation};

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVerdict {
    pub injective: bool,
    /// Lexicographically smallest colliding pair `(p, q)`, `p < q`.
    pub witness: Option<(Point, Point)>,
    pub pairs_checked: usize,
    pub colliding_pairs: usize,
}

/// Decides whether `f × h` is injective for simplicial `f: K → L` and `h`
/// linear on the simplices of `K`.
///
/// Two points with equal image lie in disjoint simplices `σ, τ` over a common
/// simplex `S = [s₀ … s_d]`; with `aⱼ, bⱼ` the vertices over `sⱼ` a collision
/// exists exactly when `0 ∈ conv{h(aⱼ) − h(bⱼ)}`.
pub fn verify_embedding_exact(f: &SimplicialMap, h: &PlTable) -> Result<EmbeddingVerdict> {
    if h.complex.vertices() != f.source.vertices() || h.complex.simplices() != f.source.simplices() {
        return Err(Error::NotLinearOnComplex);
    }
    f.require_nondegenerate()?;
    let k = &f.source;
    let mut witness: Option<(Point, Point)> = None;
    let mut checked = 0;
    let mut colliding = 0;
    for (target, sources) in f.preimages() {
        let tv = f.target.simplex(target);
        for a in 0..sources.len() {
            for b in a + 1..sources.len() {
                let (s, t) = (sources[a], sources[b]);
                if k.simplex(s).iter().any(|v| k.simplex(t).binary_search(v).is_ok()) {
                    continue;
                }
                checked += 1;
                let over_s: Vec<usize> = tv.iter().map(|&w| f.vertex_over(s, w).unwrap()).collect();
                let over_t: Vec<usize> = tv.iter().map(|&w| f.vertex_over(t, w).unwrap()).collect();
                let diffs: Vec<Vec<Rational>> = over_s
                    .iter()
                    .zip(&over_t)
                    .map(|(&u, &v)| h.values[u].iter().zip(&h.values[v]).map(|(x, y)| x - y).collect())
                    .collect();
                let Some(mu) = zero_in_hull(&diffs)? else { continue };
                colliding += 1;
                let p = Point::combination(k.ambient_dim(), mu.iter().zip(over_s.iter().map(|&v| k.vertex(v))));
                let q = Point::combination(k.ambient_dim(), mu.iter().zip(over_t.iter().map(|&v| k.vertex(v))));
                let pair = if p < q { (p, q) } else { (q, p) };
                if witness.as_ref().is_none_or(|w| pair < *w) {
                    witness = Some(pair);
                }
            }
        }
    }
    Ok(EmbeddingVerdict { injective: witness.is_none(), witness, pairs_checked: checked, colliding_pairs: colliding })
}

/// Convex weights `μ` with `Σ μⱼ dⱼ = 0`, if any.
fn zero_in_hull(d: &[Vec<Rational>]) -> Result<Option<Vec<Rational>>> {
    let n = d.len();
    if let Some(j) = d.iter().position(|v| v.iter().all(Zero::is_zero)) {
        let mut mu = alloc::vec![Rational::zero(); n];
        mu[j] = Rational::from_integer(1.into());
        return Ok(Some(mu));
    }
    if d[0].len() == 1 {
        let pos = d.iter().position(|v| v[0].is_positive());
        let neg = d.iter().position(|v| v[0].is_negative());
        let (Some(p), Some(q)) = (pos, neg) else { return Ok(None) };
        let (dp, dq) = (&d[p][0], &d[q][0]);
        let mut mu = alloc::vec![Rational::zero(); n];
        mu[p] = -dq / (dp - dq);
        mu[q] = dp / (dp - dq);
        return Ok(Some(mu));
    }
    let zero = PointSet::new(alloc::vec![Point::origin(d[0].len())])?;
    let set = PointSet::new(d.iter().map(|v| Point::new(v.clone())).collect())?;
    Ok(match hull_disjoint(&zero, &set)? {
        HullRelation::Disjoint(_) => None,
        HullRelation::Intersect(w) => Some(w.coeffs_b),
    })
}

/// `g★`: the values of `g` at the vertices of `K'`, extended linearly, verified exactly.
pub fn plify(t: &LiftTriangulation, g: &LiftFunction) -> Result<PlTable> {
    let table = PlTable::new(t.k_derived.result.clone(), vertex_values(&t.k_derived, g)?)?;
    let verdict = verify_embedding_exact(&t.derived_map, &table)?;
    match verdict.witness {
        None => Ok(table),
        Some((p, q)) => Err(Error::NotEmbedded { x: p.to_f64(), y: q.to_f64() }),
    }
}
