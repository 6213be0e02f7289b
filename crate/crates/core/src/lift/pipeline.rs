//! Staged refinement of a lift and its hull-disjointness certificate.
//!
//! For every level `j = 0..=n` the stars of level-`j` vertices (restricted to
//! simplices whose vertices all have level `≥ j`) are refined until `g` stays
//! within a fraction of the distance to the nearest partner value. The final
//! derived subdivision biases each barycenter toward the face spanned by the
//! highest-level vertices, which keeps their dual cells small. Disjointness of
//! the sampled cell hulls is then decided exactly for every pair of vertices
//! with equal image; on failure the run restarts with tighter constants.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{hull_disjoint, separated_distance, AffineFunctional, HullDistance, HullRelation, HullWitness, Point, PointSet};
use crate::rational::{from_f64_exact, Rational};
use crate::simplicial::{
    barycentric_grid, compatible_derived_pair, compose_carriers, derived_near, faces, integer_grid, validate_complex,
    Centroid, Complex, DerivedSubdivision, SimplicialMap,
};

use super::function::LiftFunction;

#[derive(Debug, Clone, PartialEq)]
pub struct LiftConfig {
    /// Stars must stay within `D / (2·safety)` of the vertex value.
    pub safety: f64,
    /// Grid denominator for `f64` oscillation samples.
    pub osc_resolution: usize,
    /// Grid denominator for the exact cell samples of the certificate.
    pub cert_resolution: usize,
    /// Upper bound on the barycenter bias weight.
    pub eta: f64,
    pub max_rounds: usize,
    pub max_retries: usize,
}

impl Default for LiftConfig {
    fn default() -> Self {
        LiftConfig { safety: 2.0, osc_resolution: 4, cert_resolution: 3, eta: 0.5, max_rounds: 60, max_retries: 4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateEntry {
    pub u: usize,
    pub v: usize,
    /// Negative on the sampled image of `|u*|`, positive on that of `|v*|`.
    pub separator: AffineFunctional,
    pub distance: HullDistance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateFailure {
    pub u: usize,
    pub v: usize,
    pub witness: HullWitness,
}

/// Constants actually used, per level.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Audit {
    /// Smallest partner distance among level-`i` vertices.
    pub d: Vec<Option<f64>>,
    /// Smallest diameter among refined star pieces at level `i`.
    pub r: Vec<Option<f64>>,
    pub rounds: Vec<usize>,
    pub attempts: usize,
    pub safety: f64,
    pub eta_min: f64,
    pub k_vertices: usize,
    pub k_prime_simplices: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftTriangulation {
    /// The input map `f: P → Q`.
    pub base: SimplicialMap,
    /// `f: K → L`, with carriers into `P` and `Q`.
    pub map: SimplicialMap,
    pub k_derived: DerivedSubdivision,
    pub l_derived: DerivedSubdivision,
    /// `f: K' → L'`.
    pub derived_map: SimplicialMap,
    pub certificate: Vec<CertificateEntry>,
    pub audit: Audit,
}

impl LiftTriangulation {
    /// Dimension of the carrier in `P` of vertex `v` of `K`.
    pub fn vertex_level(&self, v: usize) -> usize {
        level_of(&self.base, &self.map, v)
    }

    pub fn min_certified_distance(&self) -> Option<f64> {
        self.certificate.iter().map(|e| e.distance.lower).reduce(f64::min)
    }
}

fn level_of(base: &SimplicialMap, map: &SimplicialMap, v: usize) -> usize {
    base.source.simplex_dim(map.source.carrier(v).expect("carriers into P"))
}

fn f64_grid(n: usize, res: usize) -> Vec<Vec<f64>> {
    integer_grid(n, res).into_iter().map(|c| c.into_iter().map(|v| v as f64 / res as f64).collect()).collect()
}

fn norm(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

struct Stage<'a> {
    base: &'a SimplicialMap,
    g: &'a LiftFunction,
    cfg: &'a LiftConfig,
    safety: f64,
    map: SimplicialMap,
    values: Vec<Vec<f64>>,
}

impl<'a> Stage<'a> {
    fn new(base: &'a SimplicialMap, g: &'a LiftFunction, cfg: &'a LiftConfig, safety: f64) -> Result<Self> {
        let k = base.source.clone();
        let ids: Vec<usize> = (0..k.len()).collect();
        let mut map = base.clone();
        map.source = k.clone();
        map.source.set_carriers(ids)?;
        let lids: Vec<usize> = (0..map.target.len()).collect();
        map.target.set_carriers(lids)?;
        let mut s = Stage { base, g, cfg, safety, map, values: Vec::new() };
        s.refresh_values()?;
        Ok(s)
    }

    fn refresh_values(&mut self) -> Result<()> {
        let k = &self.map.source;
        for v in self.values.len()..k.num_vertices() {
            self.values.push(self.g.eval_f64(&k.vertex(v).to_f64())?);
        }
        Ok(())
    }

    fn level(&self, v: usize) -> usize {
        level_of(self.base, &self.map, v)
    }

    /// Minimal `‖g(u) − g(v)‖` over partners `v` of each vertex.
    fn partner_distances(&self) -> Result<Vec<Option<f64>>> {
        let k = &self.map.source;
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..k.num_vertices() {
            groups.entry(self.map.vertex_map[v]).or_default().push(v);
        }
        let mut out = vec![None; k.num_vertices()];
        for members in groups.values() {
            for &u in members {
                for &v in members {
                    if u == v {
                        continue;
                    }
                    let d = norm(&self.values[u], &self.values[v]);
                    if d == 0.0 {
                        return Err(Error::NotEmbedded { x: k.vertex(u).to_f64(), y: k.vertex(v).to_f64() });
                    }
                    out[u] = Some(out[u].map_or(d, |o: f64| o.min(d)));
                }
            }
        }
        Ok(out)
    }

    /// Largest `‖g(x) − g(u)‖` over grid points of the given vertex sets.
    fn deviation(&self, u: usize, pieces: &[Vec<usize>], grids: &mut BTreeMap<usize, Vec<Vec<f64>>>) -> Result<f64> {
        let k = &self.map.source;
        let gu = &self.values[u];
        let mut worst: f64 = 0.0;
        for piece in pieces {
            if piece.len() < 2 {
                continue;
            }
            let grid = grids.entry(piece.len()).or_insert_with(|| f64_grid(piece.len(), self.cfg.osc_resolution));
            let pts: Vec<Vec<f64>> = piece.iter().map(|&v| k.vertex(v).to_f64()).collect();
            for lam in grid.iter() {
                let x: Vec<f64> = (0..k.ambient_dim()).map(|d| lam.iter().zip(&pts).map(|(l, p)| l * p[d]).sum()).collect();
                worst = worst.max(norm(&self.g.eval_f64(&x)?, gu));
            }
        }
        Ok(worst)
    }

    /// Refines until every level-`j` vertex with a partner has a small enough star.
    fn run_level(&mut self, j: usize) -> Result<(Option<f64>, Option<f64>, usize)> {
        let mut grids = BTreeMap::new();
        for round in 0..=self.cfg.max_rounds {
            let dists = self.partner_distances()?;
            let k = &self.map.source;
            let levels: Vec<usize> = (0..k.num_vertices()).map(|v| self.level(v)).collect();
            let mut star: Vec<Vec<usize>> = vec![Vec::new(); k.num_vertices()];
            for fct in k.facets() {
                for &v in k.simplex(fct) {
                    star[v].push(fct);
                }
            }
            let mut marked: BTreeSet<usize> = BTreeSet::new();
            let mut d_min: Option<f64> = None;
            let mut r_min: Option<f64> = None;
            for u in 0..k.num_vertices() {
                let (true, Some(du)) = (levels[u] == j, dists[u]) else { continue };
                d_min = Some(d_min.map_or(du, |d| d.min(du)));
                let pieces: Vec<Vec<usize>> = star[u]
                    .iter()
                    .map(|&fct| k.simplex(fct).iter().copied().filter(|&w| levels[w] >= j).collect())
                    .collect();
                for p in &pieces {
                    if p.len() > 1 {
                        let i = k.index_of(p).unwrap();
                        let diam = libm::sqrt(crate::rational::to_f64(&k.diameter_squared(i)));
                        r_min = Some(r_min.map_or(diam, |r| r.min(diam)));
                    }
                }
                let limit = 0.75 * du / (2.0 * self.safety);
                if self.deviation(u, &pieces, &mut grids)? >= limit {
                    for p in &pieces {
                        if p.len() > 1 {
                            marked.insert(self.map.image_index(k.index_of(p).unwrap()));
                        }
                    }
                }
            }
            if marked.is_empty() {
                return Ok((d_min, r_min, round));
            }
            if round == self.cfg.max_rounds {
                break;
            }
            self.refine(&marked)?;
        }
        Err(Error::OutOfRange(format!(
            "level {j} refinement did not settle within {} rounds",
            self.cfg.max_rounds
        )))
    }

    fn refine(&mut self, marked: &BTreeSet<usize>) -> Result<()> {
        let l = &self.map.target;
        let mut z: BTreeSet<usize> = BTreeSet::new();
        for &s in marked {
            for f in faces(l.simplex(s)) {
                z.insert(l.index_of(&f).unwrap());
            }
        }
        let z: Vec<usize> = z.into_iter().collect();
        let l_next = derived_near(l, &z, &mut Centroid)?;
        let l_carriers = compose_carriers(&l_next, l).unwrap();
        let mut next = crate::simplicial::pullback(&self.map, &l_next)?;
        let k_carriers = compose_carriers(&next.source, &self.map.source).unwrap();
        next.source.set_carriers(k_carriers)?;
        next.target.set_carriers(l_carriers)?;
        self.map = next;
        self.refresh_values()
    }

    /// Barycenters of `L` biased toward the highest-level face.
    fn biased_centers(&self, eta_cap: f64) -> Result<(Vec<Point>, f64)> {
        let l = &self.map.target;
        let k = &self.map.source;
        let dists = self.partner_distances()?;
        let klevels: Vec<usize> = (0..k.num_vertices()).map(|v| self.level(v)).collect();
        let pre = self.map.preimages();
        let res = self.cfg.osc_resolution.max(2);

        // Candidate weight per simplex.
        let mut cand = vec![eta_cap; l.len()];
        for i in 0..l.len() {
            let Some(sources) = pre.get(&i) else { continue };
            let s0 = &k.simplex(sources[0]).clone();
            let top = s0.iter().map(|&v| klevels[v]).max().unwrap();
            if s0.iter().all(|&v| klevels[v] == top) {
                continue;
            }
            let mut eta = eta_cap;
            'shrink: for _ in 0..48 {
                let mut ok = true;
                for &s in sources {
                    let verts = k.simplex(s);
                    let hi: Vec<usize> = verts.iter().copied().filter(|&v| klevels[v] == top).collect();
                    let lo: Vec<usize> = verts.iter().copied().filter(|&v| klevels[v] != top).collect();
                    let limit = hi.iter().filter_map(|&u| dists[u]).map(|d| d / (2.0 * self.safety)).reduce(f64::min);
                    let Some(limit) = limit else { continue };
                    let strip = strip_samples(k, &hi, &lo, eta, res);
                    for x in &strip {
                        let gx = self.g.eval_f64(x)?;
                        if hi.iter().any(|&u| dists[u].is_some() && norm(&gx, &self.values[u]) >= limit) {
                            ok = false;
                            break;
                        }
                    }
                    if !ok {
                        break;
                    }
                }
                if ok {
                    break 'shrink;
                }
                eta *= 0.5;
            }
            cand[i] = eta;
        }
        // A face may not use a larger weight than any simplex containing it.
        let mut eta_of = cand.clone();
        for (i, s) in l.simplices().iter().enumerate() {
            for f in faces(s) {
                let fi = l.index_of(&f).unwrap();
                if cand[i] < eta_of[fi] {
                    eta_of[fi] = cand[i];
                }
            }
        }
        let llevels: Vec<usize> =
            (0..l.num_vertices()).map(|w| self.base.target.simplex_dim(l.carrier(w).unwrap())).collect();
        let mut centers = Vec::with_capacity(l.len());
        let mut eta_min = eta_cap;
        for (i, s) in l.simplices().iter().enumerate() {
            let top = s.iter().map(|&w| llevels[w]).max().unwrap();
            let hi: Vec<usize> = s.iter().copied().filter(|&w| llevels[w] == top).collect();
            if hi.len() == s.len() {
                centers.push(l.centroid(i));
                continue;
            }
            eta_min = eta_min.min(eta_of[i]);
            let eta = from_f64_exact(eta_of[i]).unwrap();
            let c_hi = Point::centroid(&hi.iter().map(|&w| l.vertex(w)).collect::<Vec<_>>());
            let c_all = l.centroid(i);
            centers.push(c_hi.lerp(&c_all, &eta));
        }
        Ok((centers, eta_min))
    }
}

/// Points `(1 − s) y + s z`, `y` on a grid of `hi`, `z` on a grid of `lo`, `s ∈ {0, η}`.
fn strip_samples(k: &Complex, hi: &[usize], lo: &[usize], eta: f64, res: usize) -> Vec<Vec<f64>> {
    let dim = k.ambient_dim();
    let combos = |verts: &[usize]| -> Vec<Vec<f64>> {
        let pts: Vec<Vec<f64>> = verts.iter().map(|&v| k.vertex(v).to_f64()).collect();
        f64_grid(verts.len(), res)
            .into_iter()
            .map(|lam| (0..dim).map(|d| lam.iter().zip(&pts).map(|(l, p)| l * p[d]).sum()).collect())
            .collect()
    };
    let ys = combos(hi);
    let zs = combos(lo);
    let mut out = ys.clone();
    for y in &ys {
        for z in &zs {
            out.push((0..dim).map(|d| (1.0 - eta) * y[d] + eta * z[d]).collect());
        }
    }
    out
}

/// Exact sampled images of the dual cells `|u*|` of every vertex of `K`.
pub fn cell_images(kd: &DerivedSubdivision, g: &LiftFunction, res: usize) -> Result<Vec<Vec<Vec<Rational>>>> {
    let k = &kd.parent;
    let kp = &kd.result;
    let mut cells: Vec<BTreeSet<Vec<Rational>>> = vec![BTreeSet::new(); k.num_vertices()];
    let mut cache: BTreeMap<Point, Vec<Rational>> = BTreeMap::new();
    let mut grids: BTreeMap<usize, Vec<Vec<Rational>>> = BTreeMap::new();
    for fct in kp.facets() {
        let chain = kp.simplex(fct);
        let u = k.simplex(chain[0])[0];
        debug_assert_eq!(k.simplex(chain[0]).len(), 1);
        let grid = grids.entry(chain.len()).or_insert_with(|| barycentric_grid(chain.len(), res));
        for lam in grid.iter() {
            let p = kp.point_at(fct, lam);
            let v = match cache.get(&p) {
                Some(v) => v.clone(),
                None => {
                    let v = g.value(&p)?;
                    cache.insert(p, v.clone());
                    v
                }
            };
            cells[u].insert(v);
        }
    }
    Ok(cells.into_iter().map(|s| s.into_iter().collect()).collect())
}

fn partner_pairs(map: &SimplicialMap) -> Vec<(usize, usize)> {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (v, &w) in map.vertex_map.iter().enumerate() {
        groups.entry(w).or_default().push(v);
    }
    let mut out = Vec::new();
    for members in groups.values() {
        for a in 0..members.len() {
            for b in a + 1..members.len() {
                out.push((members[a], members[b]));
            }
        }
    }
    out
}

fn point_set(values: &[Vec<Rational>]) -> Result<PointSet> {
    PointSet::new(values.iter().map(|v| Point::new(v.clone())).collect())
}

/// Decides hull disjointness for every vertex pair of `K` with equal image.
pub fn certify(
    map: &SimplicialMap,
    kd: &DerivedSubdivision,
    g: &LiftFunction,
    res: usize,
) -> Result<(Vec<CertificateEntry>, Vec<CertificateFailure>)> {
    let cells = cell_images(kd, g, res)?;
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for (u, v) in partner_pairs(map) {
        let a = point_set(&cells[u])?;
        let b = point_set(&cells[v])?;
        match hull_disjoint(&a, &b)? {
            HullRelation::Disjoint(phi) => {
                let distance = separated_distance(&a, &b, &phi);
                entries.push(CertificateEntry { u, v, separator: phi, distance });
            }
            HullRelation::Intersect(witness) => failures.push(CertificateFailure { u, v, witness }),
        }
    }
    Ok((entries, failures))
}

/// Re-samples the cells and checks every stored separator exactly.
/// Returns the pairs whose separator no longer separates.
pub fn verify_certificate(t: &LiftTriangulation, g: &LiftFunction, res: usize) -> Result<Vec<(usize, usize)>> {
    let cells = cell_images(&t.k_derived, g, res)?;
    let mut bad = Vec::new();
    for e in &t.certificate {
        let a = point_set(&cells[e.u])?;
        let b = point_set(&cells[e.v])?;
        if !e.separator.separates(&a, &b) {
            bad.push((e.u, e.v));
        }
    }
    let expected = partner_pairs(&t.map).len();
    if expected != t.certificate.len() {
        return Err(Error::Inconsistent(format!(
            "certificate has {} entries for {expected} vertex pairs",
            t.certificate.len()
        )));
    }
    Ok(bad)
}

/// Builds `K, L, K', L'` and the hull certificate for an embedded lift `g` of `f`.
pub fn triangulate_lift(f: &SimplicialMap, g: &LiftFunction, cfg: &LiftConfig) -> Result<LiftTriangulation> {
    f.require_nondegenerate()?;
    for c in [&f.source, &f.target] {
        let report = validate_complex(c);
        if !report.is_valid() {
            return Err(Error::InvalidComplex(format!("{}", report.violations[0])));
        }
    }
    if let Some(d) = g.input_dim() {
        if d != f.source.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: f.source.ambient_dim(), found: d });
        }
    }
    let n = f.source.dim();
    let mut tightest = (0, 0);
    for attempt in 0..=cfg.max_retries {
        let scale = (1u64 << attempt) as f64;
        let safety = cfg.safety * scale;
        let mut stage = Stage::new(f, g, cfg, safety)?;
        let mut audit = Audit { attempts: attempt + 1, safety, ..Audit::default() };
        for j in 0..=n {
            let (d, r, rounds) = stage.run_level(j)?;
            audit.d.push(d);
            audit.r.push(r);
            audit.rounds.push(rounds);
        }
        let (centers, eta_min) = stage.biased_centers(cfg.eta / scale)?;
        audit.eta_min = eta_min;
        let mut rule = |_: &Complex, i: usize| centers[i].clone();
        let (k_derived, l_derived, derived_map) = compatible_derived_pair(&stage.map, &mut rule)?;
        let (certificate, failures) = certify(&stage.map, &k_derived, g, cfg.cert_resolution)?;
        audit.k_vertices = stage.map.source.num_vertices();
        audit.k_prime_simplices = k_derived.result.len();
        if let Some(first) = failures.first() {
            tightest = (first.u, first.v);
            continue;
        }
        return Ok(LiftTriangulation { base: f.clone(), map: stage.map, k_derived, l_derived, derived_map, certificate, audit });
    }
    Err(Error::RetryBudgetExhausted { attempts: cfg.max_retries + 1, tightest_pair: tightest })
}

/// Vertex values of a lift on `K'`, the data of its PL-ification.
pub fn vertex_values(kd: &DerivedSubdivision, g: &LiftFunction) -> Result<Vec<Vec<Rational>>> {
    kd.result.vertices().iter().map(|p| g.value(p)).collect()
}
