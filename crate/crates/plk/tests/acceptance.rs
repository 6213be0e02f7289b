//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use plk_core::geometry::{hull_disjoint, HullRelation, Point, PointSet};
use plk_core::lift::examples::{absval_map, barycentric_failure, example_absval, random_instance, InstanceKind};
use plk_core::lift::pipeline::cell_images;
use plk_core::lift::{
    homotopy_certificate, linear_lift_homotopy_check, perturbation_stability, plify, sample_double_points, sign_map,
    stability_radius, triangulate_lift, verify_certificate, verify_embedding_exact, CubeHomotopy, LiftConfig,
    LiftFunction, LiftTriangulation, PlTable, TrigTerm,
};
use plk_core::morin::classify::{chebyshev_double_points, cluster_signs, gamma};
use plk_core::morin::forms::random_payload;
use plk_core::morin::{
    chebyshev, classify_lift_sign, connect_to_tau, delta_product_forward, delta_product_inverse, delta_solve_fr,
    lift_isotopy_check, mr_membership, tau, DoublePoint, MapContext, MorinSpec, MrPolynomial, Poly, Sign,
};
use plk_core::rational::{from_f64_exact, int, rat, to_f64, Rational};
use plk_core::simplicial::SimplicialMap;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    if elapsed > limit {
        return Err(format!("{what} took {elapsed:.2?}, limit {limit:?}"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Shared fixtures

/// The absval example and three seeded random folds.
fn instances() -> Vec<(String, SimplicialMap, LiftFunction)> {
    let (f, g) = example_absval();
    let mut out = vec![("absval".to_string(), f, g)];
    for (kind, seed) in [(InstanceKind::Zigzag, 11), (InstanceKind::Fold, 12), (InstanceKind::FoldPlanar, 13)] {
        let inst = random_instance(kind, seed);
        out.push((inst.name, inst.f, inst.g));
    }
    out
}

struct Triangulated {
    name: String,
    g: LiftFunction,
    t: LiftTriangulation,
    elapsed: Duration,
}

fn triangulate_all() -> Result<Vec<Triangulated>, String> {
    instances()
        .into_iter()
        .map(|(name, f, g)| {
            let start = Instant::now();
            let t = triangulate_lift(&f, &g, &LiftConfig::default()).map_err(|e| format!("{name}: {e}"))?;
            Ok(Triangulated { name, g, t, elapsed: start.elapsed() })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// 1. Chebyshev and τ

/// `T_n` by the three-term recurrence over `i128`.
fn chebyshev_oracle(n: usize) -> Vec<i128> {
    let (mut a, mut b) = (vec![1i128], vec![0i128, 1]);
    if n == 0 {
        return a;
    }
    for _ in 1..n {
        let mut c = vec![0i128; b.len() + 1];
        for (i, v) in b.iter().enumerate() {
            c[i + 1] += 2 * v;
        }
        for (i, v) in a.iter().enumerate() {
            c[i] -= v;
        }
        a = b;
        b = c;
    }
    b
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    ensure!(chebyshev(3) == Poly::from_i64(&[0, -3, 0, 4]), "T_3 != 4x^3 - 3x");
    let want = Poly::new(vec![int(0), rat(-3, 4), int(0), int(1)]);
    ensure!(tau(2).map_err(|e| e.to_string())?.to_poly() == want, "tau_2 != x^3 - 3x/4");
    for r in 1..=8 {
        let t = tau(r).map_err(|e| e.to_string())?.to_poly();
        ensure!(mr_membership(&t, r), "tau_{r} not in M_r");
        // τ_r = (T_{r+1} − T_{r+1}(0)) / 2^r.
        let oracle = chebyshev_oracle(r + 1);
        let lead = oracle[r + 1];
        for (i, c) in oracle.iter().enumerate() {
            let v = if i == 0 { 0 } else { *c };
            let expect = Rational::new(v.into(), lead.into());
            ensure!(t.coeff(i) == expect, "tau_{r} coefficient {i}: {} vs {expect}", t.coeff(i));
        }
    }
    within(start.elapsed(), Duration::from_secs(1), "criterion 1")?;
    Ok(format!("T_3, tau_2 exact; tau_1..tau_8 in M_r; {:.2?}", start.elapsed()))
}

// ---------------------------------------------------------------------------
// 2. The absval example

/// Bisection on a function with a sign change in `[a, b]`.
fn bisect(h: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut ha = h(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let hm = h(m);
        if hm == 0.0 {
            return m;
        }
        if (hm < 0.0) == (ha < 0.0) {
            a = m;
            ha = hm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let g = LiftFunction::absval_example();
    let eval = |x: f64| g.eval_f64(&[x]).map(|v| v[0]).map_err(|e| e.to_string());

    // (x, −x) share f = |x|; g(−x) − g(x) = 2x.
    let n = 1_000_000;
    for i in 1..=n {
        let x = i as f64 / n as f64;
        let (a, b) = (eval(x)?, eval(-x)?);
        ensure!(a != b, "g(x) = g(-x) at x = {x}");
        ensure!((b - a - 2.0 * x).abs() <= 1e-12, "g(-x) - g(x) != 2x at x = {x}");
    }

    // g = −2x sin²(π/x) for x > 0 and 2|x| cos²(π/x) for x < 0, so the zeros are
    // the simple zeros of sin(π/x) and cos(π/x).
    let pi = std::f64::consts::PI;
    let mut zeros = 0;
    for k in 2..=400u32 {
        let kf = k as f64;
        let z = bisect(|x| (pi / x).sin(), 1.0 / (kf + 0.5), 1.0 / (kf - 0.5));
        ensure!((z - 1.0 / kf).abs() <= 1e-12, "positive zero near 1/{k} found at {z}");
        ensure!(eval(1.0 / kf)?.abs() <= 1e-12, "g(1/{k}) = {}", eval(1.0 / kf)?);
        zeros += 1;
    }
    for j in 1..=400u32 {
        let want = -2.0 / (2 * j + 1) as f64;
        let (lo, hi) = (-2.0 / (2.0 * j as f64 + 0.5), -2.0 / (2.0 * j as f64 + 1.5));
        let z = bisect(|x| (pi / x).cos(), lo, hi);
        ensure!((z - want).abs() <= 1e-12, "negative zero near {want} found at {z}");
        ensure!(eval(want)?.abs() <= 1e-12, "g({want}) = {}", eval(want)?);
        zeros += 1;
    }

    // Plain barycentric cells fail at every scale.
    let mut certified = 0;
    for i in 0..100 {
        let e = 10f64.powf(-4.0 * i as f64 / 99.0);
        let eps = from_f64_exact(e).ok_or("eps")?;
        let bf = barycentric_failure(&eps, 64).map_err(|e| e.to_string())?;
        // Consecutive members 2/(k+1) < 2/k of the sequence inside [ε/2, ε].
        let k = Rational::from_integer((int(2) / &eps).floor().to_integer() + 1);
        ensure!(bf.pair == (int(2) / (&k + int(1)), int(2) / &k), "eps = {e}: pair {:?}", bf.pair);
        ensure!(&eps / int(2) <= bf.pair.0 && bf.pair.1 <= eps, "eps = {e}: pair outside [eps/2, eps]");
        ensure!(bf.positive_zero != bf.negative_zero, "eps = {e}: zeros coincide");
        for (z, s) in [(&bf.positive_zero, 1.0), (&bf.negative_zero, -1.0)] {
            ensure!(eval(s * to_f64(z))?.abs() <= 1e-12, "eps = {e}: g does not vanish at {s} * {z}");
        }
        ensure!(matches!(bf.relation, HullRelation::Intersect(_)), "eps = {e}: hulls are disjoint");
        ensure!(bf.certified(&g).map_err(|e| e.to_string())?, "eps = {e}: witness does not verify");
        certified += 1;
    }
    within(start.elapsed(), Duration::from_secs(30), "criterion 2")?;
    Ok(format!("1e6 diagonal pairs separated; {zeros} zeros within 1e-12; {certified}/100 eps certified; {:.2?}", start.elapsed()))
}

// ---------------------------------------------------------------------------
// 3. Triangulation certificates

fn separates(values_a: &[Rational], values_b: &[Rational]) -> bool {
    let max = |v: &[Rational]| v.iter().max().cloned();
    let min = |v: &[Rational]| v.iter().min().cloned();
    match (max(values_a), min(values_a), max(values_b), min(values_b)) {
        (Some(amax), Some(amin), Some(bmax), Some(bmin)) => amax < bmin || bmax < amin,
        _ => false,
    }
}

fn criterion_3(tris: &[Triangulated]) -> Outcome {
    let mut details = Vec::new();
    for tr in tris {
        let t = &tr.t;
        within(tr.elapsed, Duration::from_secs(300), &tr.name)?;
        // Vertices of K with a common image in L.
        let mut by_image: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (v, &w) in t.map.vertex_map.iter().enumerate() {
            by_image.entry(w).or_default().push(v);
        }
        let mut partners = BTreeSet::new();
        for group in by_image.values() {
            for (i, &u) in group.iter().enumerate() {
                for &v in &group[i + 1..] {
                    partners.insert((u, v));
                }
            }
        }
        let certified: BTreeSet<(usize, usize)> = t.certificate.iter().map(|e| (e.u.min(e.v), e.u.max(e.v))).collect();
        ensure!(certified.len() == t.certificate.len(), "{}: duplicate certificate entries", tr.name);
        ensure!(certified == partners, "{}: certificate covers {} of {} partner pairs", tr.name, certified.len(), partners.len());

        let res = LiftConfig::default().cert_resolution;
        let cells = cell_images(&t.k_derived, &tr.g, res).map_err(|e| e.to_string())?;
        for e in &t.certificate {
            let set = |c: &Vec<Vec<Rational>>| PointSet::new(c.iter().map(|v| Point::new(v.clone())).collect());
            let (a, b) = (set(&cells[e.u]).map_err(|e| e.to_string())?, set(&cells[e.v]).map_err(|e| e.to_string())?);
            let va: Vec<Rational> = a.points().iter().map(|p| e.separator.eval(p)).collect();
            let vb: Vec<Rational> = b.points().iter().map(|p| e.separator.eval(p)).collect();
            ensure!(separates(&va, &vb), "{}: separator of ({}, {}) fails", tr.name, e.u, e.v);
            ensure!(e.distance.lower_squared.is_positive(), "{}: zero certified distance", tr.name);
            ensure!(
                matches!(hull_disjoint(&a, &b).map_err(|e| e.to_string())?, HullRelation::Disjoint(_)),
                "{}: hulls of ({}, {}) intersect",
                tr.name,
                e.u,
                e.v
            );
        }
        let bad = verify_certificate(t, &tr.g, res).map_err(|e| e.to_string())?;
        ensure!(bad.is_empty(), "{}: {} entries fail re-verification", tr.name, bad.len());
        details.push(format!("{} {} pairs {:.1?}", tr.name, partners.len(), tr.elapsed));
    }
    Ok(details.join(", "))
}

// ---------------------------------------------------------------------------
// 4. Exact embedding verdict against a grid oracle

/// `0 ∈ conv(points)` for at most three points in `R¹` or `R²`.
fn zero_in_small_hull(p: &[Vec<Rational>]) -> bool {
    if p.iter().any(|v| v.iter().all(Zero::is_zero)) {
        return true;
    }
    match p[0].len() {
        1 => p.iter().any(|v| v[0].is_positive()) && p.iter().any(|v| v[0].is_negative()),
        2 => {
            let cross = |a: &[Rational], b: &[Rational]| &a[0] * &b[1] - &a[1] * &b[0];
            let dot = |a: &[Rational], b: &[Rational]| &a[0] * &b[0] + &a[1] * &b[1];
            let on_segment = |a: &[Rational], b: &[Rational]| cross(a, b).is_zero() && !dot(a, b).is_positive();
            let segments = (0..p.len()).any(|i| (i + 1..p.len()).any(|j| on_segment(&p[i], &p[j])));
            if segments || p.len() < 3 {
                return segments;
            }
            let signs: Vec<Rational> = (0..3).map(|i| cross(&p[i], &p[(i + 1) % 3])).collect();
            signs.iter().all(|s| s.is_positive()) || signs.iter().all(|s| s.is_negative())
        }
        k => panic!("oracle handles codimension 1 and 2, got {k}"),
    }
}

/// Barycentric cells of the standard subdivision of a `d`-simplex, `d <= 2`,
/// as integer coordinates over `n`.
fn grid_cells(d: usize, n: usize) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    match d {
        0 => (vec![vec![n]], vec![vec![0]]),
        1 => ((0..=n).map(|i| vec![n - i, i]).collect(), (0..n).map(|i| vec![i, i + 1]).collect()),
        2 => {
            let mut pts = Vec::new();
            let mut index = BTreeMap::new();
            for i in 0..=n {
                for j in 0..=n - i {
                    index.insert((i, j), pts.len());
                    pts.push(vec![n - i - j, i, j]);
                }
            }
            let mut cells = Vec::new();
            for i in 0..n {
                for j in 0..n - i {
                    cells.push(vec![index[&(i, j)], index[&(i + 1, j)], index[&(i, j + 1)]]);
                    if i + j + 2 <= n {
                        cells.push(vec![index[&(i + 1, j)], index[&(i, j + 1)], index[&(i + 1, j + 1)]]);
                    }
                }
            }
            (pts, cells)
        }
        _ => panic!("oracle handles simplices of dimension at most 2"),
    }
}

struct OracleCount {
    simplex_pairs: usize,
    colliding: usize,
    point_pairs: usize,
}

/// Subdivides each common image simplex into `n^d` cells; on each cell the
/// difference `h(x) − h(y)` of corresponding points is affine, so a collision
/// exists in the cell exactly when 0 lies in the hull of its corner values.
fn grid_oracle(f: &SimplicialMap, h: &PlTable, n: usize) -> OracleCount {
    let k = &f.source;
    let mut over: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (i, s) in k.simplices().iter().enumerate() {
        let mut image: Vec<usize> = s.iter().map(|&v| f.vertex_map[v]).collect();
        image.sort_unstable();
        image.dedup();
        assert_eq!(image.len(), s.len(), "degenerate simplex");
        over.entry(image).or_default().push(i);
    }
    let mut count = OracleCount { simplex_pairs: 0, colliding: 0, point_pairs: 0 };
    for (image, sources) in &over {
        let (pts, cells) = grid_cells(image.len() - 1, n);
        for (ai, &s) in sources.iter().enumerate() {
            for &t in &sources[ai + 1..] {
                let (sv, tv) = (k.simplex(s), k.simplex(t));
                if sv.iter().any(|v| tv.contains(v)) {
                    continue;
                }
                count.simplex_pairs += 1;
                let vertex_over = |simplex: &[usize], w: usize| *simplex.iter().find(|&&v| f.vertex_map[v] == w).unwrap();
                let a: Vec<usize> = image.iter().map(|&w| vertex_over(sv, w)).collect();
                let b: Vec<usize> = image.iter().map(|&w| vertex_over(tv, w)).collect();
                let diff: Vec<Vec<Rational>> = pts
                    .iter()
                    .map(|lam| {
                        let mut d = vec![Rational::zero(); h.codim()];
                        for (j, &l) in lam.iter().enumerate() {
                            let w = rat(l as i64, n as i64);
                            for (c, (x, y)) in d.iter_mut().zip(h.values[a[j]].iter().zip(&h.values[b[j]])) {
                                *c += &w * (x - y);
                            }
                        }
                        d
                    })
                    .collect();
                count.point_pairs += pts.len();
                let hit = cells.iter().any(|cell| {
                    let corners: Vec<Vec<Rational>> = cell.iter().map(|&i| diff[i].clone()).collect();
                    zero_in_small_hull(&corners)
                });
                count.colliding += usize::from(hit);
            }
        }
    }
    count
}

fn compare(name: &str, f: &SimplicialMap, h: &PlTable, min_points: usize, expect_injective: Option<bool>) -> Result<usize, String> {
    let verdict = verify_embedding_exact(f, h).map_err(|e| e.to_string())?;
    if let Some(want) = expect_injective {
        ensure!(verdict.injective == want, "{name}: injective = {}", verdict.injective);
    }
    let mut n = 2;
    let mut oracle = grid_oracle(f, h, n);
    while oracle.point_pairs < min_points && n < 4096 {
        n *= 2;
        oracle = grid_oracle(f, h, n);
    }
    ensure!(oracle.simplex_pairs == verdict.pairs_checked, "{name}: {} vs {} simplex pairs", oracle.simplex_pairs, verdict.pairs_checked);
    ensure!(
        oracle.colliding == verdict.colliding_pairs,
        "{name}: oracle finds {} colliding pairs, verifier {}",
        oracle.colliding,
        verdict.colliding_pairs
    );
    ensure!((oracle.colliding == 0) == verdict.injective, "{name}: verdicts disagree");
    Ok(oracle.point_pairs)
}

fn criterion_4(tris: &[Triangulated]) -> Outcome {
    let mut points = 0;
    let mut controls = 0;
    for tr in tris {
        let t = &tr.t;
        let table = plify(t, &tr.g).map_err(|e| format!("{}: {e}", tr.name))?;
        let f = &t.derived_map;
        points += compare(&tr.name, f, &table, 30_000, Some(true))?;

        // Image-only lift: every disjoint pair over a common simplex collides.
        let phi: Vec<Vec<Rational>> = f
            .vertex_map
            .iter()
            .map(|&w| f.target.vertex(w).coords.iter().take(table.codim()).cloned().chain(std::iter::repeat(int(0))).take(table.codim()).collect())
            .collect();
        let flat = PlTable::new(table.complex.clone(), phi).map_err(|e| e.to_string())?;
        compare(&format!("{} image-only", tr.name), f, &flat, 0, Some(false))?;

        // One partner value copied onto another vertex.
        let (u, v) = (0..f.vertex_map.len())
            .flat_map(|u| (u + 1..f.vertex_map.len()).map(move |v| (u, v)))
            .find(|&(u, v)| f.vertex_map[u] == f.vertex_map[v])
            .ok_or("no partner vertices")?;
        let mut values = table.values.clone();
        values[v] = values[u].clone();
        let copied = PlTable::new(table.complex.clone(), values).map_err(|e| e.to_string())?;
        compare(&format!("{} copied", tr.name), f, &copied, 0, Some(false))?;
        controls += 2;
    }
    ensure!(points >= 100_000, "only {points} grid pairs sampled");
    Ok(format!("{} PL-ifications injective; {points} grid pairs, 0 disagreements; {controls} negative controls agree", tris.len()))
}

// ---------------------------------------------------------------------------
// 5. Cube homotopy

/// `Σ_{j<i} λ_j g(v_j) + (Σ_{j≥i} λ_j) g(Σ_{j≥i} λ_j v_j / Σ_{j≥i} λ_j)`.
fn conical_oracle(g: &LiftFunction, verts: &[Point], lambda: &[Rational], i: usize) -> Result<Vec<Rational>, String> {
    let codim = g.codim();
    let mut out = vec![Rational::zero(); codim];
    for j in 0..i.min(verts.len()) {
        let gv = g.value(&verts[j]).map_err(|e| e.to_string())?;
        for (o, v) in out.iter_mut().zip(&gv) {
            *o += &lambda[j] * v;
        }
    }
    let tail: Rational = lambda[i..].iter().cloned().sum();
    if tail.is_zero() {
        return Ok(out);
    }
    let dim = verts[0].dim();
    let mut x = vec![Rational::zero(); dim];
    for j in i..verts.len() {
        for (c, v) in x.iter_mut().zip(&verts[j].coords) {
            *c += &lambda[j] * v / &tail;
        }
    }
    let gx = g.value(&Point::new(x)).map_err(|e| e.to_string())?;
    for (o, v) in out.iter_mut().zip(&gx) {
        *o += &tail * v;
    }
    Ok(out)
}

fn barycentric_grid(len: usize, res: usize) -> Vec<Vec<Rational>> {
    fn rec(len: usize, left: usize, res: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<Rational>>) {
        if cur.len() + 1 == len {
            cur.push(left);
            out.push(cur.iter().map(|&c| rat(c as i64, res as i64)).collect());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(len, left - c, res, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(len, res, res, &mut Vec::new(), &mut out);
    out
}

fn staircase_check(tr: &Triangulated) -> Result<usize, String> {
    let h = CubeHomotopy::new(&tr.t, &tr.g).map_err(|e| e.to_string())?;
    let kp = &tr.t.k_derived.result;
    let n = h.cube_dim();
    let mut checked = 0;
    for zeros in 0..=n {
        let t: Vec<Rational> = (0..n).map(|j| if j < zeros { int(0) } else { int(1) }).collect();
        for facet in kp.facets() {
            let verts: Vec<Point> = kp.simplex(facet).iter().map(|&v| kp.vertex(v).clone()).collect();
            for lam in barycentric_grid(verts.len(), 3) {
                let got = h.eval_in(&t, facet, &lam).map_err(|e| e.to_string())?.value;
                let want = conical_oracle(&tr.g, &verts, &lam, zeros)?;
                ensure!(got == want, "{}: staircase with {zeros} zeros differs from g_{zeros} in facet {facet}", tr.name);
                checked += 1;
            }
        }
    }
    Ok(checked)
}

fn criterion_5(tris: &[Triangulated]) -> Outcome {
    let tr = &tris[0];
    let h = CubeHomotopy::new(&tr.t, &tr.g).map_err(|e| e.to_string())?;
    let n = h.cube_dim();
    let ones = vec![int(1); n];
    let zeros = vec![int(0); n];
    for i in 0..1000 {
        let x = rat(2 * i + 1 - 1000, 1000);
        let got = h.eval(&ones, &Point::new(vec![x.clone()])).map_err(|e| e.to_string())?;
        let want = tr.g.eval_f64(&[to_f64(&x)]).map_err(|e| e.to_string())?;
        ensure!((to_f64(&got[0]) - want[0]).abs() <= 1e-12, "h_1({x}) = {} vs g = {}", to_f64(&got[0]), want[0]);
    }
    let table = plify(&tr.t, &tr.g).map_err(|e| e.to_string())?;
    let kp = &tr.t.k_derived.result;
    for v in 0..kp.num_vertices() {
        let got = h.eval(&zeros, kp.vertex(v)).map_err(|e| e.to_string())?;
        ensure!(got == table.values[v], "h_0 differs from the PL-ification at vertex {v}");
    }
    let mut staircase = 0;
    for tr in tris.iter().filter(|t| t.name == "absval" || t.name.starts_with("fold-")) {
        staircase += staircase_check(tr)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let delta = sample_double_points(&tr.t.derived_map, 2).map_err(|e| e.to_string())?;
    for _ in 0..10 {
        let t: Vec<Rational> = (0..n).map(|_| rat(rng.gen_range(0..=1000), 1000)).collect();
        let rep = homotopy_certificate(&h, &t, &delta, 2).map_err(|e| e.to_string())?;
        ensure!(rep.passed(), "violations at t = {:?}: {rep:?}", t.iter().map(to_f64).collect::<Vec<_>>());
    }
    Ok(format!("h_1 = g on 1000 points; h_0 = PL at {} vertices; {staircase} staircase samples exact; 10 random t clean", kp.num_vertices()))
}

// ---------------------------------------------------------------------------
// 6. Linear homotopy between same-sign lifts

/// `c g + a cos(ωx) + b x²`; the added terms are even.
fn even_perturbation(c: Rational, a: f64, w: f64, b: f64) -> LiftFunction {
    let even = LiftFunction::trig_poly(1, vec![vec![TrigTerm::trig(a, vec![0], vec![w], 0.0), TrigTerm::monomial(b, vec![2])]]);
    LiftFunction::Composite(vec![(c, LiftFunction::absval_example()), (Rational::one(), even)])
}

fn criterion_6() -> Outcome {
    let f = absval_map();
    let delta = sample_double_points(&f, 64).map_err(|e| e.to_string())?;
    ensure!(!delta.is_empty(), "no double points sampled");
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut draw = || {
        let c = rat(rng.gen_range(1..=64), 16);
        even_perturbation(c, rng.gen_range(-1.0..1.0), rng.gen_range(0.5..8.0), rng.gen_range(-1.0..1.0))
    };
    for i in 0..20 {
        let (g, g2) = (draw(), draw());
        let (s1, s2) = (sign_map(&g, &delta).map_err(|e| e.to_string())?, sign_map(&g2, &delta).map_err(|e| e.to_string())?);
        ensure!(s1.signs.is_some() && s1.signs == s2.signs, "pair {i}: sign maps differ");
        let rep = linear_lift_homotopy_check(&g, &g2, &delta, 10).map_err(|e| e.to_string())?;
        ensure!(rep.t_values == 11, "pair {i}: {} t values", rep.t_values);
        ensure!(rep.passed(), "pair {i}: {rep:?}");
    }
    let g = LiftFunction::absval_example();
    let minus = LiftFunction::Composite(vec![(int(-1), g.clone())]);
    let rep = linear_lift_homotopy_check(&g, &minus, &delta, 10).map_err(|e| e.to_string())?;
    ensure!(rep.mismatched_pairs == rep.pairs && rep.failing_pairs == rep.pairs, "antipodal control: {rep:?}");
    Ok(format!("20 same-sign pairs clean on {} double points x 11 t; antipodal control fails on all {}", delta.len(), rep.pairs))
}

// ---------------------------------------------------------------------------
// 7. Product coordinates

/// `F_r(t, x) = (t, t_1 x + … + t_{r−1} x^{r−1} + x^{r+1}, z_1, …)` with
/// `z_i = t_{ir} x + … + t_{ir+r−1} x^r`.
fn morin_oracle(r: usize, n: usize, m: usize, p: &[Rational]) -> Vec<Rational> {
    let x = &p[n - 1];
    let t = |k: usize| p[k - 1].clone();
    let pow = |e: usize| (0..e).fold(int(1), |acc, _| acc * x);
    let mut out: Vec<Rational> = p[..n - 1].to_vec();
    out.push((1..r).map(|k| t(k) * pow(k)).sum::<Rational>() + pow(r + 1));
    for i in 1..=m - n {
        out.push((0..r).map(|j| t(i * r + j) * pow(j + 1)).sum());
    }
    out
}

fn criterion_7() -> Outcome {
    for (r, n, m) in [(2, 4, 5), (3, 6, 7)] {
        let spec = MorinSpec::new(r, n, m).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(7 + r as u64);
        for i in 0..100 {
            let payload = random_payload(&spec, &mut rng).map_err(|e| e.to_string())?;
            let dp = delta_product_forward(&spec, &payload).map_err(|e| e.to_string())?;
            ensure!(dp.first != dp.second, "({r},{n},{m}) #{i}: equal points");
            ensure!(
                morin_oracle(r, n, m, &dp.first.coords) == morin_oracle(r, n, m, &dp.second.coords),
                "({r},{n},{m}) #{i}: not a double point"
            );
            let back = delta_product_inverse(&spec, &dp).map_err(|e| e.to_string())?;
            ensure!(back == payload, "({r},{n},{m}) #{i}: inverse differs");
            ensure!(delta_product_forward(&spec, &back).map_err(|e| e.to_string())? == dp, "({r},{n},{m}) #{i}: forward differs");
        }
    }
    let spec = MorinSpec::new(2, 4, 5).map_err(|e| e.to_string())?;
    let a: Vec<Rational> = [-1, 0, 2, 1].iter().map(|&v| int(v)).collect();
    let b: Vec<Rational> = [-1, 0, 2, -1].iter().map(|&v| int(v)).collect();
    ensure!(morin_oracle(2, 4, 5, &a) == morin_oracle(2, 4, 5, &b), "F_2 oracle separates the pair");
    let dp = DoublePoint { first: Point::new(a), second: Point::new(b), context: MapContext::Morin(spec) };
    ensure!(dp.verify().map_err(|e| e.to_string())?, "F_2 double point rejected");
    let back = delta_product_inverse(&spec, &dp).map_err(|e| e.to_string())?;
    ensure!(delta_product_forward(&spec, &back).map_err(|e| e.to_string())? == dp, "F_2 pair does not round-trip");
    Ok("200 payloads round-trip exactly; F_2 pair verifies".into())
}

// ---------------------------------------------------------------------------
// 8. Paths to τ_r

fn eval_f64(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

fn criterion_8() -> Outcome {
    let tol = 1e-10;
    let mut samples = 0;
    for r in 2..=3usize {
        let tau_c: Vec<f64> = tau(r).map_err(|e| e.to_string())?.to_poly().coeffs().iter().map(to_f64).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(80 + r as u64);
        for i in 0..10 {
            let (x1, x2) = loop {
                let a = rat(rng.gen_range(-48..=48), 16);
                let b = rat(rng.gen_range(-48..=48), 16);
                if a != b {
                    break (a, b);
                }
            };
            let free: Vec<Rational> = (0..r - 2).map(|_| rat(rng.gen_range(-32..=32), 8)).collect();
            let dp = delta_solve_fr(r, &x1, &x2, &free).map_err(|e| e.to_string())?;
            let p = MrPolynomial::new(r, dp.first.coords[..r - 1].to_vec()).map_err(|e| e.to_string())?;
            let path = connect_to_tau(&p, &x1, &x2, 32).map_err(|e| e.to_string())?;
            for s in path.samples() {
                let c = &s.poly.coeffs;
                let member = match &s.exact {
                    Some(e) => mr_membership(e, r),
                    None => c.len() == r + 2 && c[0].abs() <= tol && c[r].abs() <= tol && (c[r + 1] - 1.0).abs() <= tol,
                };
                ensure!(member, "r = {r} #{i}: sample at t = {} leaves M_r", s.t);
                let (a, b) = s.pair;
                ensure!(a != b, "r = {r} #{i}: carried pair collapsed");
                let residual = (eval_f64(c, a) - eval_f64(c, b)).abs();
                ensure!(residual < tol, "r = {r} #{i}: residual {residual:e} at t = {}", s.t);
                samples += 1;
            }
            let end = path.end();
            ensure!(end.poly.coeffs.len() == tau_c.len(), "r = {r} #{i}: wrong end degree");
            for (u, v) in end.poly.coeffs.iter().zip(&tau_c) {
                ensure!((u - v).abs() <= tol, "r = {r} #{i}: path ends at {:?}", end.poly.coeffs);
            }
            let (a, b) = end.pair;
            ensure!(a != b && (eval_f64(&tau_c, a) - eval_f64(&tau_c, b)).abs() < tol, "r = {r} #{i}: end pair off Delta_tau");
            if r == 2 {
                ensure!((a * a + a * b + b * b - 0.75).abs() <= tol, "r = 2 #{i}: end pair ({a}, {b}) off the ellipse");
            }
        }
    }
    Ok(format!("20 paths, {samples} samples in M_r with residual < 1e-10; endpoints on Delta_tau"))
}

// ---------------------------------------------------------------------------
// 9. Lift classification

fn criterion_9() -> Outcome {
    let start = Instant::now();
    for r in 1..=6 {
        for eps in [Sign::Plus, Sign::Minus] {
            let got = classify_lift_sign(r, &gamma(eps)).map_err(|e| e.to_string())?.epsilon;
            ensure!(got == eps, "Gamma_{r}^{eps} classified as {got}");
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..20 {
        let r = rng.gen_range(2..=6);
        let eps = if rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus };
        let w = rng.gen_range(0.5..6.0);
        // aω < 1 keeps the perturbation strictly monotone.
        let a = rng.gen_range(0.0..0.95) / w;
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        let g = move |x: f64| eps.value() * x + a * (w * x + phase).sin();
        let pairs = chebyshev_double_points(r, 64).map_err(|e| e.to_string())?;
        let signs = cluster_signs(&pairs, &g);
        ensure!(signs.values().all(|s| s.constant() == Some(eps)), "lift #{i} (r = {r}): sign map not constant {eps}");
        ensure!(classify_lift_sign(r, &g).map_err(|e| e.to_string())?.epsilon == eps, "lift #{i}: misclassified");
    }
    let mut controls = 0;
    for (r, n, m) in [(1, 2, 2), (2, 2, 2), (2, 4, 5), (3, 3, 3), (3, 6, 7)] {
        let spec = MorinSpec::new(r, n, m).map_err(|e| e.to_string())?;
        for eps in [Sign::Plus, Sign::Minus] {
            let psi = |s: Sign, a: f64, b: f64| move |p: &[f64]| s.value() * (p[n - 1] + a * p[n - 1].atan()) + b * p[0];
            let matched = lift_isotopy_check(&spec, &psi(eps, 0.5, 0.3), eps, 40, 3).map_err(|e| e.to_string())?;
            ensure!(matched.passed(), "({r},{n},{m}) {eps}: matched lift has {} violations", matched.violations);
            let mismatched = lift_isotopy_check(&spec, &psi(eps.negate(), 0.5, 0.3), eps, 40, 3).map_err(|e| e.to_string())?;
            ensure!(!mismatched.passed() && mismatched.witness.is_some(), "({r},{n},{m}) {eps}: mismatch has no witness");
            controls += 1;
        }
    }
    within(start.elapsed(), Duration::from_secs(60), "criterion 9")?;
    Ok(format!("Gamma_r classified for r = 1..6; 20 perturbed lifts constant; {controls} mismatches witnessed; {:.2?}", start.elapsed()))
}

// ---------------------------------------------------------------------------
// 10. Stability

fn criterion_10(tris: &[Triangulated]) -> Outcome {
    let tr = &tris[0];
    let gstar = plify(&tr.t, &tr.g).map_err(|e| e.to_string())?;
    // Independent minimum over the stored exact lower bounds.
    let min_sq = tr.t.certificate.iter().map(|e| e.distance.lower_squared.clone()).min().ok_or("empty certificate")?;
    let bound = tr.t.min_certified_distance().ok_or("empty certificate")? / 2.0;
    ensure!((4.0 * bound * bound - to_f64(&min_sq)).abs() <= 1e-9, "certified distance mismatch");
    let delta = from_f64_exact(bound).ok_or("bound")?;
    let rep = perturbation_stability(&tr.t.derived_map, &gstar, &delta, 50, 10).map_err(|e| e.to_string())?;
    ensure!(rep.passed == 50, "{}/50 perturbations stay embedded", rep.passed);
    let rad = stability_radius(&tr.t.derived_map, &gstar, bound, 50, 10, 6).map_err(|e| e.to_string())?;
    let ratio = rad.radius / bound;
    ensure!((0.25..=4.0).contains(&ratio), "radius {} vs bound {bound}: ratio {ratio}", rad.radius);
    Ok(format!("50/50 at delta = {bound:.4}; radius {:.4}, ratio {ratio:.2}", rad.radius))
}

// ---------------------------------------------------------------------------

fn run(n: usize, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
    });
    match outcome {
        Ok(detail) => {
            println!("PASS criterion {n}: {detail} [{:.2?}]", start.elapsed());
            true
        }
        Err(why) => {
            println!("FAIL criterion {n}: {why} [{:.2?}]", start.elapsed());
            false
        }
    }
}

fn main() -> ExitCode {
    let mut ok = true;
    ok &= run(1, criterion_1);
    ok &= run(2, criterion_2);
    let tris = match catch_unwind(triangulate_all) {
        Ok(Ok(t)) => Some(t),
        Ok(Err(e)) => {
            println!("triangulation failed: {e}");
            None
        }
        Err(_) => None,
    };
    match &tris {
        Some(t) => {
            ok &= run(3, || criterion_3(t));
            ok &= run(4, || criterion_4(t));
            ok &= run(5, || criterion_5(t));
        }
        None => {
            for n in 3..=5 {
                ok &= run(n, || Err("no triangulations".into()));
            }
        }
    }
    ok &= run(6, criterion_6);
    ok &= run(7, criterion_7);
    ok &= run(8, criterion_8);
    ok &= run(9, criterion_9);
    match &tris {
        Some(t) => ok &= run(10, || criterion_10(t)),
        None => ok &= run(10, || Err("no triangulations".into())),
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
