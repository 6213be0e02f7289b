//! Geometric simplicial complexes, simplicial maps between them, and the
//! subdivision machinery used by the lift pipeline.
//!
//! Simplices are sorted vertex-index tuples. Every [`Complex`] keeps its
//! simplices ordered by `(dimension, lexicographic)`, so in a valid complex the
//! 0-simplex `[v]` has index `v`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use alloc::format;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::geometry::{affinely_independent, barycentric, Point};
use crate::rational::Rational;

pub type Simplex = Vec<usize>;

fn simplex_order(a: &Simplex, b: &Simplex) -> core::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

/// All nonempty faces of a sorted simplex, itself included.
pub fn faces(s: &[usize]) -> Vec<Simplex> {
    let k = s.len();
    let mut out = Vec::with_capacity((1usize << k) - 1);
    for mask in 1u32..(1u32 << k) {
        out.push((0..k).filter(|i| mask & (1 << i) != 0).map(|i| s[i]).collect());
    }
    out
}

pub fn is_face(face: &[usize], of: &[usize]) -> bool {
    face.iter().all(|v| of.binary_search(v).is_ok())
}

/// Barycentric coordinates `c / res` for all compositions `c` of `res` into
/// `n` nonnegative parts, in lexicographic order of `c`.
pub fn barycentric_grid(n: usize, res: usize) -> Vec<Vec<Rational>> {
    let denom = Rational::from_integer((res as i64).into());
    integer_grid(n, res)
        .into_iter()
        .map(|c| c.into_iter().map(|v| Rational::from_integer((v as i64).into()) / &denom).collect())
        .collect()
}

pub fn integer_grid(n: usize, res: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for v in 0..=left {
            cur.push(v);
            rec(n - 1, left - v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, res, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

#[derive(Debug, Clone)]
pub struct Complex {
    vertices: Vec<Point>,
    simplices: Vec<Simplex>,
    index: BTreeMap<Simplex, usize>,
    /// Carrier of each simplex in the complex this one subdivides.
    carriers: Option<Vec<usize>>,
}

impl PartialEq for Complex {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.simplices == other.simplices
    }
}

impl Complex {
    /// Takes the simplices as given (sorted and deduplicated, not face-closed).
    pub fn new(vertices: Vec<Point>, simplices: Vec<Simplex>) -> Self {
        let mut simplices: Vec<Simplex> = simplices
            .into_iter()
            .map(|mut s| {
                s.sort_unstable();
                s.dedup();
                s
            })
            .collect();
        simplices.sort_by(simplex_order);
        simplices.dedup();
        let index = simplices.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Complex { vertices, simplices, index, carriers: None }
    }

    /// Closes the given facets under taking faces.
    pub fn from_facets(vertices: Vec<Point>, facets: &[Simplex]) -> Self {
        let mut all = BTreeSet::new();
        for f in facets {
            let mut f = f.clone();
            f.sort_unstable();
            f.dedup();
            for face in faces(&f) {
                all.insert(face);
            }
        }
        Complex::new(vertices, all.into_iter().collect())
    }

    pub(crate) fn with_carriers(mut self, carriers: Vec<usize>) -> Self {
        debug_assert_eq!(carriers.len(), self.simplices.len());
        self.carriers = Some(carriers);
        self
    }

    /// Attaches parent carriers read from an interchange file.
    pub fn set_carriers(&mut self, carriers: Vec<usize>) -> Result<()> {
        if carriers.len() != self.simplices.len() {
            return Err(Error::InvalidComplex(format!(
                "{} carriers for {} simplices",
                carriers.len(),
                self.simplices.len()
            )));
        }
        self.carriers = Some(carriers);
        Ok(())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &Point {
        &self.vertices[v]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn simplex(&self, i: usize) -> &Simplex {
        &self.simplices[i]
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn carriers(&self) -> Option<&[usize]> {
        self.carriers.as_deref()
    }

    pub fn carrier(&self, i: usize) -> Option<usize> {
        self.carriers.as_ref().map(|c| c[i])
    }

    pub fn index_of(&self, s: &[usize]) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn contains(&self, s: &[usize]) -> bool {
        self.index.contains_key(s)
    }

    pub fn dim(&self) -> usize {
        self.simplices.last().map_or(0, |s| s.len() - 1)
    }

    pub fn simplex_dim(&self, i: usize) -> usize {
        self.simplices[i].len() - 1
    }

    pub fn ambient_dim(&self) -> usize {
        self.vertices.first().map_or(0, Point::dim)
    }

    pub fn points(&self, i: usize) -> Vec<&Point> {
        self.simplices[i].iter().map(|&v| &self.vertices[v]).collect()
    }

    pub fn centroid(&self, i: usize) -> Point {
        Point::centroid(&self.points(i))
    }

    pub fn diameter_squared(&self, i: usize) -> Rational {
        let pts = self.points(i);
        let mut best = Rational::zero();
        for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                let d = pts[a].squared_distance(pts[b]);
                if d > best {
                    best = d;
                }
            }
        }
        best
    }

    /// Indices of all simplices of dimension at most `i` (the skeleton `K^(i)`).
    pub fn skeleton(&self, i: usize) -> Vec<usize> {
        (0..self.simplices.len()).filter(|&s| self.simplices[s].len() <= i + 1).collect()
    }

    /// Maximal simplices.
    pub fn facets(&self) -> Vec<usize> {
        let mut covered = vec![false; self.simplices.len()];
        for s in &self.simplices {
            if s.len() < 2 {
                continue;
            }
            for skip in 0..s.len() {
                let f: Simplex = s.iter().enumerate().filter(|&(j, _)| j != skip).map(|(_, &v)| v).collect();
                if let Some(fi) = self.index_of(&f) {
                    covered[fi] = true;
                }
            }
        }
        (0..self.simplices.len()).filter(|&i| !covered[i]).collect()
    }

    /// For every simplex, the simplices that properly contain it.
    pub fn cofaces(&self) -> Vec<Vec<usize>> {
        let mut up = vec![Vec::new(); self.simplices.len()];
        for (i, s) in self.simplices.iter().enumerate() {
            for f in faces(s) {
                if f.len() < s.len() {
                    if let Some(fi) = self.index_of(&f) {
                        up[fi].push(i);
                    }
                }
            }
        }
        up
    }

    /// Barycentric coordinates of `p` in simplex `i`, if `p` lies in its affine hull.
    pub fn barycentric(&self, i: usize, p: &Point) -> Option<Vec<Rational>> {
        barycentric(&self.points(i), p)
    }

    pub fn point_at(&self, i: usize, bary: &[Rational]) -> Point {
        Point::combination(self.ambient_dim(), bary.iter().zip(self.points(i)))
    }

    /// A simplex whose closed realisation contains `p` (searching facets).
    pub fn locate(&self, p: &Point) -> Option<(usize, Vec<Rational>)> {
        for i in self.facets() {
            if let Some(l) = self.barycentric(i, p) {
                if l.iter().all(|v| !v.is_negative()) {
                    return Some((i, l));
                }
            }
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    VertexOutOfRange { simplex: Simplex },
    AmbientDimension { vertex: usize },
    /// A face of `simplex` is missing.
    NotFaceClosed { simplex: Simplex, missing: Simplex },
    AffinelyDependent { simplex: Simplex },
    IsolatedVertex { vertex: usize },
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Violation::VertexOutOfRange { simplex } => write!(f, "vertex index out of range in {simplex:?}"),
            Violation::AmbientDimension { vertex } => write!(f, "vertex {vertex} has the wrong ambient dimension"),
            Violation::NotFaceClosed { simplex, missing } => {
                write!(f, "not face-closed: {simplex:?} lacks face {missing:?}")
            }
            Violation::AffinelyDependent { simplex } => write!(f, "affinely dependent: {simplex:?}"),
            Violation::IsolatedVertex { vertex } => write!(f, "vertex {vertex} is not a 0-simplex"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn messages(&self) -> Vec<String> {
        self.violations.iter().map(|v| format!("{v}")).collect()
    }
}

/// Checks face-closure, vertex ranges, dimensions and affine independence.
pub fn validate_complex(c: &Complex) -> ValidationReport {
    let mut violations = Vec::new();
    let dim = c.ambient_dim();
    for (v, p) in c.vertices().iter().enumerate() {
        if p.dim() != dim {
            violations.push(Violation::AmbientDimension { vertex: v });
        }
    }
    for s in c.simplices() {
        if s.iter().any(|&v| v >= c.num_vertices()) {
            violations.push(Violation::VertexOutOfRange { simplex: s.clone() });
            continue;
        }
        for f in faces(s) {
            if !c.contains(&f) {
                violations.push(Violation::NotFaceClosed { simplex: s.clone(), missing: f });
                break;
            }
        }
        let pts: Vec<&Point> = s.iter().map(|&v| c.vertex(v)).collect();
        if !affinely_independent(&pts) {
            violations.push(Violation::AffinelyDependent { simplex: s.clone() });
        }
    }
    for v in 0..c.num_vertices() {
        if !c.contains(&[v]) {
            violations.push(Violation::IsolatedVertex { vertex: v });
        }
    }
    ValidationReport { violations }
}

/// Vertex assignment between two complexes, affine on each simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialMap {
    pub source: Complex,
    pub target: Complex,
    pub vertex_map: Vec<usize>,
    image_index: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Nondegeneracy {
    Nondegenerate,
    /// The map is not injective on this source simplex.
    Collapses(Simplex),
}

impl SimplicialMap {
    pub fn new(source: Complex, target: Complex, vertex_map: Vec<usize>) -> Result<Self> {
        if vertex_map.len() != source.num_vertices() {
            return Err(Error::DimensionMismatch { expected: source.num_vertices(), found: vertex_map.len() });
        }
        let mut image_index = Vec::with_capacity(source.len());
        for s in source.simplices() {
            let img = image_of(&vertex_map, s);
            match target.index_of(&img) {
                Some(i) => image_index.push(i),
                None => return Err(Error::NotSimplicial { simplex: s.clone() }),
            }
        }
        Ok(SimplicialMap { source, target, vertex_map, image_index })
    }

    pub fn image(&self, s: &[usize]) -> Simplex {
        image_of(&self.vertex_map, s)
    }

    /// Target index of the image of source simplex `i`.
    pub fn image_index(&self, i: usize) -> usize {
        self.image_index[i]
    }

    pub fn nondegeneracy(&self) -> Nondegeneracy {
        for s in self.source.simplices() {
            if self.image(s).len() < s.len() {
                return Nondegeneracy::Collapses(s.clone());
            }
        }
        Nondegeneracy::Nondegenerate
    }

    pub fn require_nondegenerate(&self) -> Result<()> {
        match self.nondegeneracy() {
            Nondegeneracy::Nondegenerate => Ok(()),
            Nondegeneracy::Collapses(simplex) => Err(Error::Degenerate { simplex }),
        }
    }

    /// Image of the point with barycentric coordinates `bary` in source simplex `i`.
    pub fn eval(&self, i: usize, bary: &[Rational]) -> Point {
        let s = self.source.simplex(i);
        Point::combination(
            self.target.ambient_dim(),
            bary.iter().zip(s.iter().map(|&v| self.target.vertex(self.vertex_map[v]))),
        )
    }

    /// Target simplex index -> source simplices mapping onto it.
    pub fn preimages(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &t) in self.image_index.iter().enumerate() {
            out.entry(t).or_default().push(i);
        }
        out
    }

    /// For a nondegenerate map: the source vertex of simplex `i` sent to target vertex `w`.
    pub fn vertex_over(&self, i: usize, w: usize) -> Option<usize> {
        self.source.simplex(i).iter().copied().find(|&v| self.vertex_map[v] == w)
    }
}

fn image_of(vertex_map: &[usize], s: &[usize]) -> Simplex {
    let mut img: Simplex = s.iter().map(|&v| vertex_map[v]).collect();
    img.sort_unstable();
    img.dedup();
    img
}

/// Decides non-degeneracy, returning a collapsed simplex as witness.
pub fn is_nondegenerate(f: &SimplicialMap) -> Result<Nondegeneracy> {
    for s in f.source.simplices() {
        if !f.target.contains(&f.image(s)) {
            return Err(Error::NotSimplicial { simplex: s.clone() });
        }
    }
    Ok(f.nondegeneracy())
}

/// Picks the weighted barycenter of a simplex.
pub trait BarycenterRule {
    fn choose(&mut self, complex: &Complex, simplex: usize) -> Point;
}

/// The plain centroid; yields the barycentric subdivision.
#[derive(Debug, Clone, Copy, Default)]
pub struct Centroid;

impl BarycenterRule for Centroid {
    fn choose(&mut self, complex: &Complex, simplex: usize) -> Point {
        complex.centroid(simplex)
    }
}

impl<F> BarycenterRule for F
where
    F: FnMut(&Complex, usize) -> Point,
{
    fn choose(&mut self, complex: &Complex, simplex: usize) -> Point {
        self(complex, simplex)
    }
}

fn choose_interior(rule: &mut dyn BarycenterRule, k: &Complex, i: usize) -> Result<Point> {
    if k.simplex(i).len() == 1 {
        return Ok(k.vertex(k.simplex(i)[0]).clone());
    }
    let p = rule.choose(k, i);
    match k.barycentric(i, &p) {
        Some(l) if l.iter().all(Signed::is_positive) => Ok(p),
        _ => Err(Error::BarycenterNotInterior { simplex: k.simplex(i).clone() }),
    }
}

/// A derived subdivision together with its parent.
///
/// Result vertex `i` is the weighted barycenter of parent simplex `i`, and each
/// result simplex *is* its chain `σ₀ ⊊ σ₁ ⊊ …` written as parent-simplex indices.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedSubdivision {
    pub parent: Complex,
    pub result: Complex,
}

impl DerivedSubdivision {
    pub fn barycenter(&self, parent_simplex: usize) -> &Point {
        self.result.vertex(parent_simplex)
    }

    pub fn chain(&self, result_simplex: usize) -> &[usize] {
        self.result.simplex(result_simplex)
    }
}

/// Stars every simplex of `k` at the point chosen by `rule`.
pub fn derived_subdivision(k: &Complex, rule: &mut dyn BarycenterRule) -> Result<DerivedSubdivision> {
    let mut centers = Vec::with_capacity(k.len());
    for i in 0..k.len() {
        centers.push(choose_interior(rule, k, i)?);
    }
    let up = k.cofaces();
    let mut chains: Vec<Simplex> = Vec::new();
    let mut stack: Vec<Simplex> = (0..k.len()).map(|i| vec![i]).collect();
    while let Some(chain) = stack.pop() {
        let last = *chain.last().unwrap();
        for &next in &up[last] {
            let mut c = chain.clone();
            c.push(next);
            stack.push(c);
        }
        chains.push(chain);
    }
    let result = Complex::new(centers, chains);
    let carriers = result.simplices().iter().map(|c| *c.last().unwrap()).collect();
    let result = result.with_carriers(carriers);
    Ok(DerivedSubdivision { parent: k.clone(), result })
}

/// The dual cone `σ*` in a derived subdivision and its derived link `∂σ*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualCone {
    pub simplex: usize,
    /// Result vertex sitting at the weighted barycenter of `σ`.
    pub center: usize,
    pub cone: Vec<usize>,
    pub link: Vec<usize>,
}

pub fn dual_cone(d: &DerivedSubdivision, simplex: usize) -> Result<DualCone> {
    if simplex >= d.parent.len() {
        return Err(Error::UnknownSimplex { simplex: vec![simplex] });
    }
    let sigma = d.parent.simplex(simplex);
    let mut cone = Vec::new();
    let mut link = Vec::new();
    for (i, chain) in d.result.simplices().iter().enumerate() {
        let bottom = d.parent.simplex(chain[0]);
        if is_face(sigma, bottom) {
            cone.push(i);
            if bottom.len() > sigma.len() {
                link.push(i);
            }
        }
    }
    Ok(DualCone { simplex, center: simplex, cone, link })
}

/// Cones of every parent vertex at once: `cones[v]` lists result simplices of `v*`.
pub fn vertex_dual_cones(d: &DerivedSubdivision) -> Vec<Vec<usize>> {
    let mut cones = vec![Vec::new(); d.parent.num_vertices()];
    for (i, chain) in d.result.simplices().iter().enumerate() {
        for &v in d.parent.simplex(chain[0]) {
            cones[v].push(i);
        }
    }
    cones
}

/// The maximal simplices of `σ*`: saturated chains from `σ` up to a facet of the parent.
pub fn dual_cone_facets(d: &DerivedSubdivision, cone: &DualCone, parent_facets: &BTreeSet<usize>) -> Vec<usize> {
    cone.cone
        .iter()
        .copied()
        .filter(|&i| {
            let chain = d.chain(i);
            chain[0] == cone.simplex
                && parent_facets.contains(chain.last().unwrap())
                && chain.windows(2).all(|w| d.parent.simplex(w[1]).len() == d.parent.simplex(w[0]).len() + 1)
        })
        .collect()
}

/// Simplicial complex under a sequence of stellar moves.
struct Stellar {
    vertices: Vec<Point>,
    simplices: BTreeSet<Simplex>,
    star: Vec<BTreeSet<Simplex>>,
}

impl Stellar {
    fn new(k: &Complex) -> Self {
        let mut star = vec![BTreeSet::new(); k.num_vertices()];
        for s in k.simplices() {
            for &v in s {
                star[v].insert(s.clone());
            }
        }
        Stellar {
            vertices: k.vertices().to_vec(),
            simplices: k.simplices().iter().cloned().collect(),
            star,
        }
    }

    fn remove(&mut self, s: &Simplex) {
        self.simplices.remove(s);
        for &v in s {
            self.star[v].remove(s);
        }
    }

    fn insert(&mut self, s: Simplex) {
        for &v in &s {
            self.star[v].insert(s.clone());
        }
        self.simplices.insert(s);
    }

    /// Stars the simplex `sigma` at `p`; returns the new vertex.
    fn star_at(&mut self, sigma: &Simplex, p: Point) -> usize {
        let w = self.vertices.len();
        self.vertices.push(p);
        self.star.push(BTreeSet::new());
        let containing: Vec<Simplex> =
            self.star[sigma[0]].iter().filter(|s| is_face(sigma, s)).cloned().collect();
        let proper: Vec<Simplex> = {
            let mut f: Vec<Simplex> = faces(sigma).into_iter().filter(|f| f.len() < sigma.len()).collect();
            f.push(Vec::new());
            f
        };
        for s in &containing {
            self.remove(s);
        }
        for s in &containing {
            let link: Vec<usize> = s.iter().copied().filter(|v| sigma.binary_search(v).is_err()).collect();
            for phi in &proper {
                let mut n: Simplex = Vec::with_capacity(1 + phi.len() + link.len());
                n.push(w);
                n.extend_from_slice(phi);
                n.extend_from_slice(&link);
                n.sort_unstable();
                self.insert(n);
            }
        }
        w
    }
}

/// Derived subdivision of `k` near the subcomplex `region` (simplex indices):
/// only simplices of `region` are starred, in order of decreasing dimension.
///
/// The returned complex carries carriers into `k`; new vertices lie only in `|region|`.
pub fn derived_near(k: &Complex, region: &[usize], rule: &mut dyn BarycenterRule) -> Result<Complex> {
    let mut order: Vec<usize> = region.iter().copied().filter(|&i| k.simplex(i).len() > 1).collect();
    order.sort_by(|&a, &b| k.simplex(b).len().cmp(&k.simplex(a).len()).then(a.cmp(&b)));
    order.dedup();
    let mut work = Stellar::new(k);
    let mut vertex_carrier: Vec<usize> = (0..k.num_vertices())
        .map(|v| k.index_of(&[v]).ok_or_else(|| Error::InvalidComplex(format!("vertex {v} is not a 0-simplex"))))
        .collect::<Result<_>>()?;
    for i in order {
        let p = choose_interior(rule, k, i)?;
        work.star_at(&k.simplex(i).clone(), p);
        vertex_carrier.push(i);
    }
    let complex = Complex::new(work.vertices, work.simplices.into_iter().collect());
    let carriers = complex
        .simplices()
        .iter()
        .map(|s| carrier_from_vertices(k, s.iter().map(|&v| vertex_carrier[v])))
        .collect::<Result<Vec<_>>>()?;
    Ok(complex.with_carriers(carriers))
}

fn carrier_from_vertices<I: Iterator<Item = usize>>(k: &Complex, carriers: I) -> Result<usize> {
    let mut verts: BTreeSet<usize> = BTreeSet::new();
    for c in carriers {
        verts.extend(k.simplex(c).iter().copied());
    }
    let s: Simplex = verts.into_iter().collect();
    k.index_of(&s).ok_or(Error::UnknownSimplex { simplex: s })
}

/// Composes carrier links: `inner` subdivides `mid`, which subdivides some base.
pub fn compose_carriers(inner: &Complex, mid: &Complex) -> Option<Vec<usize>> {
    let ci = inner.carriers()?;
    let cm = mid.carriers()?;
    Some(ci.iter().map(|&c| cm[c]).collect())
}

/// Refines `k` with new vertices only inside `|x|` until every simplex lying in
/// `|x|` has diameter below `mesh`. Carriers of the output point into `k`.
pub fn subdivide_relative(k: &Complex, x: &[usize], mesh: &Rational) -> Result<Complex> {
    if !mesh.is_positive() {
        return Err(Error::NonPositiveMesh);
    }
    let mesh_sq = mesh * mesh;
    let region: BTreeSet<usize> = x.iter().copied().collect();
    let mut current = k.clone().with_carriers((0..k.len()).collect());
    for _ in 0..64 {
        let base = current.carriers().unwrap().to_vec();
        let inside: Vec<usize> = (0..current.len()).filter(|&i| region.contains(&base[i])).collect();
        if inside.iter().all(|&i| current.diameter_squared(i) < mesh_sq) {
            return Ok(current);
        }
        let next = derived_near(&current, &inside, &mut Centroid)?;
        let carriers = compose_carriers(&next, &current).unwrap();
        current = next.with_carriers(carriers);
    }
    Err(Error::OutOfRange("relative subdivision did not reach the requested mesh".into()))
}

/// Pulls a subdivision of the target back along a nondegenerate simplicial map.
///
/// `l_new` must carry carriers into `f.target`. The returned map goes from the
/// induced subdivision of `f.source` (with carriers into `f.source`) to `l_new`.
/// Original source vertices keep their indices.
pub fn pullback(f: &SimplicialMap, l_new: &Complex) -> Result<SimplicialMap> {
    f.require_nondegenerate()?;
    let lc = l_new
        .carriers()
        .ok_or_else(|| Error::InvalidComplex("pullback needs carriers on the target subdivision".into()))?;
    let k = &f.source;
    let pre = f.preimages();

    // Barycentric coordinates of each new target vertex in its carrier.
    let mut vertex_bary: Vec<Vec<Rational>> = Vec::with_capacity(l_new.num_vertices());
    let mut vertex_carrier: Vec<usize> = Vec::with_capacity(l_new.num_vertices());
    for w in 0..l_new.num_vertices() {
        let wi = l_new.index_of(&[w]).ok_or_else(|| Error::InvalidComplex(format!("vertex {w} missing")))?;
        let tau = lc[wi];
        let bary = f.target.barycentric(tau, l_new.vertex(w)).ok_or(Error::OutsideComplex)?;
        vertex_bary.push(bary);
        vertex_carrier.push(tau);
    }

    let old_vertex: BTreeMap<usize, usize> = (0..l_new.num_vertices())
        .filter(|&w| f.target.simplex(vertex_carrier[w]).len() == 1)
        .map(|w| (vertex_carrier[w], w))
        .collect();
    let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut points: Vec<Point> = k.vertices().to_vec();
    let mut vmap: Vec<usize> = vec![usize::MAX; k.num_vertices()];
    for v in 0..k.num_vertices() {
        let vi = k.index_of(&[v]).ok_or_else(|| Error::InvalidComplex(format!("vertex {v} missing")))?;
        let w = *old_vertex.get(&f.image_index(vi)).ok_or(Error::OutsideComplex)?;
        ids.insert((vi, w), v);
        vmap[v] = w;
    }
    let mut id_for = |sigma_face: usize, w: usize, points: &mut Vec<Point>, vmap: &mut Vec<usize>| -> usize {
        *ids.entry((sigma_face, w)).or_insert_with(|| {
            let s = k.simplex(sigma_face);
            let tau = f.target.simplex(vertex_carrier[w]);
            let coords: Vec<(&Rational, &Point)> = tau
                .iter()
                .zip(&vertex_bary[w])
                .map(|(&tv, b)| {
                    let sv = s.iter().copied().find(|&sv| f.vertex_map[sv] == tv).unwrap();
                    (b, k.vertex(sv))
                })
                .collect();
            let p = Point::combination(k.ambient_dim(), coords);
            points.push(p);
            vmap.push(w);
            points.len() - 1
        })
    };

    let mut simplices: BTreeSet<Simplex> = BTreeSet::new();
    let mut carrier_of: BTreeMap<Simplex, usize> = BTreeMap::new();
    for (si, s) in l_new.simplices().iter().enumerate() {
        let tau = lc[si];
        let Some(sources) = pre.get(&tau) else { continue };
        for &sigma in sources {
            let mut out: Simplex = Vec::with_capacity(s.len());
            for &w in s {
                let face_verts: Simplex = k
                    .simplex(sigma)
                    .iter()
                    .copied()
                    .filter(|&sv| f.target.simplex(vertex_carrier[w]).contains(&f.vertex_map[sv]))
                    .collect();
                let face = k.index_of(&face_verts).ok_or(Error::UnknownSimplex { simplex: face_verts })?;
                out.push(id_for(face, w, &mut points, &mut vmap));
            }
            out.sort_unstable();
            carrier_of.insert(out.clone(), sigma);
            simplices.insert(out);
        }
    }
    let source = Complex::new(points, simplices.into_iter().collect());
    let carriers = source.simplices().iter().map(|s| carrier_of[s]).collect();
    let source = source.with_carriers(carriers);
    SimplicialMap::new(source, l_new.clone(), vmap)
}

/// `L' = derived(L)` by `rule`, and `K'` the derived subdivision of `K` whose
/// barycenters are the unique preimages of those of `L'`, so `f: K' → L'` is simplicial.
pub fn compatible_derived_pair(
    f: &SimplicialMap,
    l_rule: &mut dyn BarycenterRule,
) -> Result<(DerivedSubdivision, DerivedSubdivision, SimplicialMap)> {
    f.require_nondegenerate()?;
    let l_prime = derived_subdivision(&f.target, l_rule)?;
    let mut k_rule = |k: &Complex, i: usize| -> Point {
        let target = f.image_index(i);
        let hat = l_prime.barycenter(target);
        let bary = f.target.barycentric(target, hat).expect("barycenter lies in its simplex");
        let tau = f.target.simplex(target);
        let s = k.simplex(i);
        let terms: Vec<(&Rational, &Point)> = tau
            .iter()
            .zip(&bary)
            .map(|(&tv, b)| {
                let sv = s.iter().copied().find(|&sv| f.vertex_map[sv] == tv).unwrap();
                (b, k.vertex(sv))
            })
            .collect();
        Point::combination(k.ambient_dim(), terms)
    };
    let k_prime = derived_subdivision(&f.source, &mut k_rule)?;
    let vertex_map = (0..f.source.len()).map(|i| f.image_index(i)).collect();
    let map = SimplicialMap::new(k_prime.result.clone(), l_prime.result.clone(), vertex_map)?;
    Ok((k_prime, l_prime, map))
}

/// `|det|` of a simplex written in the barycentric coordinates of its carrier;
/// the values over a subdivision of that carrier sum to one.
pub fn relative_volume(parent: &Complex, carrier: usize, pts: &[&Point]) -> Option<Rational> {
    let d = parent.simplex(carrier).len() - 1;
    if pts.len() != d + 1 {
        return None;
    }
    let coords: Vec<Vec<Rational>> = pts
        .iter()
        .map(|p| parent.barycentric(carrier, p).map(|b| b[1..].to_vec()))
        .collect::<Option<_>>()?;
    let mut m: Vec<Vec<Rational>> = (1..=d).map(|i| (0..d).map(|j| &coords[i][j] - &coords[0][j]).collect()).collect();
    Some(determinant(&mut m).abs())
}

fn determinant(m: &mut [Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= &m[c][c];
        let prow = m[c].clone();
        for row in m.iter_mut().skip(c + 1) {
            if !row[c].is_zero() {
                let f = &row[c] / &prow[c];
                for j in c..n {
                    row[j] -= &f * &prow[j];
                }
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn line(xs: &[Rational]) -> Vec<Point> {
        xs.iter().map(|x| Point::new(vec![x.clone()])).collect()
    }

    fn absval() -> SimplicialMap {
        let p = Complex::from_facets(line(&[int(-1), int(0), int(1)]), &[vec![0, 1], vec![1, 2]]);
        let q = Complex::from_facets(line(&[int(0), int(1)]), &[vec![0, 1]]);
        SimplicialMap::new(p, q, vec![1, 0, 1]).unwrap()
    }

    #[test]
    fn grids() {
        assert_eq!(integer_grid(2, 2), vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(barycentric_grid(3, 4).len(), 15);
        assert_eq!(barycentric_grid(1, 7), vec![vec![int(1)]]);
    }

    #[test]
    fn validate_examples() {
        let seg = Complex::from_facets(line(&[int(-1), int(0), int(1)]), &[vec![0, 1], vec![1, 2]]);
        assert!(validate_complex(&seg).is_valid());

        let bad = Complex::new(line(&[int(0), int(1)]), vec![vec![0], vec![0, 1]]);
        let report = validate_complex(&bad);
        assert!(report.violations.iter().any(|v| matches!(v, Violation::NotFaceClosed { .. })));
        assert!(report.messages()[0].contains("not face-closed"));

        let tri = Complex::from_facets(
            vec![
                Point::new(vec![int(0), int(0)]),
                Point::new(vec![int(1), int(1)]),
                Point::new(vec![int(2), int(2)]),
            ],
            &[vec![0, 1, 2]],
        );
        let report = validate_complex(&tri);
        assert!(report.violations.iter().any(|v| matches!(v, Violation::AffinelyDependent { .. })));
        assert!(report.messages().iter().any(|m| m.contains("affinely dependent")));
    }

    #[test]
    fn nondegeneracy() {
        assert_eq!(is_nondegenerate(&absval()).unwrap(), Nondegeneracy::Nondegenerate);

        let edge = Complex::from_facets(line(&[int(0), int(1)]), &[vec![0, 1]]);
        let point = Complex::from_facets(line(&[int(0)]), &[vec![0]]);
        let constant = SimplicialMap::new(edge.clone(), point, vec![0, 0]).unwrap();
        assert_eq!(is_nondegenerate(&constant).unwrap(), Nondegeneracy::Collapses(vec![0, 1]));

        let id = SimplicialMap::new(edge.clone(), edge.clone(), vec![0, 1]).unwrap();
        assert_eq!(is_nondegenerate(&id).unwrap(), Nondegeneracy::Nondegenerate);

        // Vertices of an edge sent to two unjoined points.
        let two = Complex::new(line(&[int(0), int(1)]), vec![vec![0], vec![1]]);
        assert!(matches!(SimplicialMap::new(edge, two, vec![0, 1]), Err(Error::NotSimplicial { .. })));
    }

    #[test]
    fn derived_of_segment_with_custom_barycenter() {
        let seg = Complex::from_facets(line(&[int(0), int(1)]), &[vec![0, 1]]);
        let mut third = |_: &Complex, _: usize| Point::new(vec![rat(1, 3)]);
        let d = derived_subdivision(&seg, &mut third).unwrap();
        let xs: Vec<Rational> = d.result.vertices().iter().map(|p| p.coords[0].clone()).collect();
        assert_eq!(xs, vec![int(0), int(1), rat(1, 3)]);
        assert_eq!(d.result.facets().len(), 2);

        let mut outside = |_: &Complex, _: usize| Point::new(vec![int(2)]);
        assert!(matches!(derived_subdivision(&seg, &mut outside), Err(Error::BarycenterNotInterior { .. })));
    }

    #[test]
    fn derived_of_vertex_is_itself() {
        let v = Complex::from_facets(line(&[int(5)]), &[vec![0]]);
        let d = derived_subdivision(&v, &mut Centroid).unwrap();
        assert_eq!(d.result, v);
    }

    #[test]
    fn compatible_pair_for_absval() {
        let (kp, lp, map) = compatible_derived_pair(&absval(), &mut Centroid).unwrap();
        let mut xs: Vec<Rational> = kp.result.vertices().iter().map(|p| p.coords[0].clone()).collect();
        xs.sort();
        assert_eq!(xs, vec![int(-1), rat(-1, 2), int(0), rat(1, 2), int(1)]);
        assert_eq!(lp.result.num_vertices(), 3);
        assert_eq!(is_nondegenerate(&map).unwrap(), Nondegeneracy::Nondegenerate);
    }

    #[test]
    fn dual_cone_of_path_vertex() {
        let path = Complex::from_facets(line(&[int(0), int(2), int(4)]), &[vec![0, 1], vec![1, 2]]);
        let d = derived_subdivision(&path, &mut Centroid).unwrap();
        let cone = dual_cone(&d, 1).unwrap();
        let mut pts: BTreeSet<Rational> = BTreeSet::new();
        for &s in &cone.cone {
            for &v in d.result.simplex(s) {
                pts.insert(d.result.vertex(v).coords[0].clone());
            }
        }
        let expected: BTreeSet<Rational> = [int(1), int(2), int(3)].into_iter().collect();
        assert_eq!(pts, expected);
        // The link is the two edge midpoints.
        assert_eq!(cone.link.len(), 2);

        let top = path.index_of(&[0, 1]).unwrap();
        let cone = dual_cone(&d, top).unwrap();
        assert_eq!(cone.cone.len(), 1);
        assert_eq!(d.result.simplex(cone.cone[0]), &vec![top]);

        assert!(dual_cone(&d, 99).is_err());
    }

    #[test]
    fn relative_subdivision_of_segment() {
        let seg = Complex::from_facets(line(&[int(0), int(1)]), &[vec![0, 1]]);
        let all: Vec<usize> = (0..seg.len()).collect();
        let out = subdivide_relative(&seg, &all, &rat(3, 10)).unwrap();
        let edges = out.facets();
        assert!(edges.len() >= 4);
        assert!(edges.iter().all(|&e| out.diameter_squared(e) < rat(9, 100)));
        assert!(subdivide_relative(&seg, &all, &int(0)).is_err());
        assert_eq!(subdivide_relative(&seg, &[], &rat(1, 10)).unwrap(), seg);
    }
}
