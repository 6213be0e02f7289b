use std::collections::BTreeSet;

use num_traits::{One, Signed};
use plk_core::geometry::Point;
use plk_core::rational::{int, rat, Rational};
use plk_core::simplicial::*;
use proptest::prelude::*;

fn standard_simplex(n: usize) -> Complex {
    let mut verts = vec![Point::origin(n)];
    for i in 0..n {
        let mut c = vec![int(0); n];
        c[i] = int(1);
        verts.push(Point::new(c));
    }
    Complex::from_facets(verts, &[(0..=n).collect()])
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Independent count of full flags by enumerating vertex orderings.
fn count_flags(n: usize) -> usize {
    fn rec(remaining: &mut Vec<usize>) -> usize {
        if remaining.is_empty() {
            return 1;
        }
        let mut total = 0;
        for i in 0..remaining.len() {
            let v = remaining.remove(i);
            total += rec(remaining);
            remaining.insert(i, v);
        }
        total
    }
    rec(&mut (0..=n).collect())
}

#[test]
fn barycentric_subdivision_of_simplex_counts() {
    for n in 0..=4 {
        let d = derived_subdivision(&standard_simplex(n), &mut Centroid).unwrap();
        let top: Vec<usize> = d.result.facets();
        assert_eq!(top.len(), count_flags(n));
        assert_eq!(top.len(), factorial(n + 1));
        assert!(top.iter().all(|&t| d.result.simplex_dim(t) == n));
        assert!(validate_complex(&d.result).is_valid());
    }
}

fn grid_triangulation(w: usize, h: usize, jitter: &[i64]) -> Complex {
    let mut verts = Vec::new();
    for j in 0..=h {
        for i in 0..=w {
            let k = j * (w + 1) + i;
            let interior = i > 0 && i < w && j > 0 && j < h;
            let dx = if interior { rat(jitter[k % jitter.len()], 10) } else { int(0) };
            verts.push(Point::new(vec![int(i as i64) + dx, int(j as i64)]));
        }
    }
    let id = |i: usize, j: usize| j * (w + 1) + i;
    let mut facets = Vec::new();
    for j in 0..h {
        for i in 0..w {
            facets.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            facets.push(vec![id(i, j), id(i, j + 1), id(i + 1, j + 1)]);
        }
    }
    Complex::from_facets(verts, &facets)
}

fn volume_accounting(parent: &Complex, sub: &Complex) {
    let carriers = sub.carriers().expect("carriers");
    for p in 0..parent.len() {
        let d = parent.simplex_dim(p);
        let mut total = Rational::from_integer(0.into());
        for (s, &c) in carriers.iter().enumerate() {
            if c == p && sub.simplex_dim(s) == d {
                total += relative_volume(parent, p, &sub.points(s)).unwrap();
            }
        }
        assert_eq!(total, Rational::one(), "parent simplex {p}");
    }
}

fn point_sets(c: &Complex) -> BTreeSet<Vec<Point>> {
    c.simplices()
        .iter()
        .map(|s| {
            let mut v: Vec<Point> = s.iter().map(|&i| c.vertex(i).clone()).collect();
            v.sort();
            v
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn derived_is_a_subdivision(w in 1usize..3, h in 1usize..3, jitter in prop::collection::vec(-3i64..=3, 1..5)) {
        let k = grid_triangulation(w, h, &jitter);
        prop_assert!(validate_complex(&k).is_valid());
        let d = derived_subdivision(&k, &mut Centroid).unwrap();
        prop_assert!(validate_complex(&d.result).is_valid());
        volume_accounting(&k, &d.result);
    }

    #[test]
    fn stellar_derived_matches_chain_derived(w in 1usize..3, h in 1usize..3, jitter in prop::collection::vec(-3i64..=3, 1..5)) {
        let k = grid_triangulation(w, h, &jitter);
        let all: Vec<usize> = (0..k.len()).collect();
        let near = derived_near(&k, &all, &mut Centroid).unwrap();
        let full = derived_subdivision(&k, &mut Centroid).unwrap();
        prop_assert_eq!(point_sets(&near), point_sets(&full.result));
    }

    #[test]
    fn partial_derived_stays_near_region(w in 1usize..4, pick in 0usize..100) {
        let k = grid_triangulation(w, 1, &[0]);
        // A single closed edge of the bottom row and its vertices.
        let i = pick % w;
        let edge = k.index_of(&[i, i + 1]).unwrap();
        let region = vec![k.index_of(&[i]).unwrap(), k.index_of(&[i + 1]).unwrap(), edge];
        let sub = derived_near(&k, &region, &mut Centroid).unwrap();
        prop_assert!(validate_complex(&sub).is_valid());
        volume_accounting(&k, &sub);
        prop_assert_eq!(sub.num_vertices(), k.num_vertices() + 1);
        let carriers = sub.carriers().unwrap();
        let new_vertex = sub.index_of(&[k.num_vertices()]).unwrap();
        prop_assert_eq!(carriers[new_vertex], edge);
    }

    #[test]
    fn dual_cones_are_contravariant(w in 1usize..3, h in 1usize..3) {
        let k = grid_triangulation(w, h, &[0]);
        let d = derived_subdivision(&k, &mut Centroid).unwrap();
        for (i, s) in k.simplices().iter().enumerate() {
            let ci: BTreeSet<usize> = dual_cone(&d, i).unwrap().cone.into_iter().collect();
            for f in faces(s) {
                let fi = k.index_of(&f).unwrap();
                let cf: BTreeSet<usize> = dual_cone(&d, fi).unwrap().cone.into_iter().collect();
                prop_assert!(ci.is_subset(&cf));
            }
        }
        let cones = vertex_dual_cones(&d);
        for v in 0..k.num_vertices() {
            prop_assert_eq!(&cones[v], &dual_cone(&d, v).unwrap().cone);
        }
    }

    #[test]
    fn pullback_of_a_fold(n in 1usize..4, depth in 1usize..3) {
        // Path on [-n, n] folded onto [0, n] by |x|.
        let xs: Vec<Point> = (-(n as i64)..=(n as i64)).map(|x| Point::new(vec![int(x)])).collect();
        let facets: Vec<Vec<usize>> = (0..2 * n).map(|i| vec![i, i + 1]).collect();
        let k = Complex::from_facets(xs, &facets);
        let ys: Vec<Point> = (0..=n as i64).map(|x| Point::new(vec![int(x)])).collect();
        let l = Complex::from_facets(ys, &(0..n).map(|i| vec![i, i + 1]).collect::<Vec<_>>());
        let vmap: Vec<usize> = (0..=2 * n).map(|i| (i as i64 - n as i64).unsigned_abs() as usize).collect();
        let f = SimplicialMap::new(k.clone(), l.clone(), vmap).unwrap();

        let all: Vec<usize> = (0..l.len()).collect();
        let mesh = rat(1, 1 << depth);
        let l_new = subdivide_relative(&l, &all, &mesh).unwrap();
        let g = pullback(&f, &l_new).unwrap();
        prop_assert_eq!(is_nondegenerate(&g).unwrap(), Nondegeneracy::Nondegenerate);
        prop_assert!(validate_complex(&g.source).is_valid());
        volume_accounting(&k, &g.source);
        for v in 0..g.source.num_vertices() {
            let x = &g.source.vertex(v).coords[0];
            let y = &g.target.vertex(g.vertex_map[v]).coords[0];
            prop_assert_eq!(&x.abs(), y);
        }
    }
}

#[test]
fn compatible_pair_is_simplicial_for_a_two_dimensional_fold() {
    // Square [-1,1]x[0,1] folded by (x, y) -> (|x|, y).
    let pts = |v: &[(i64, i64)]| v.iter().map(|&(x, y)| Point::new(vec![int(x), int(y)])).collect::<Vec<_>>();
    let k = Complex::from_facets(
        pts(&[(-1, 0), (0, 0), (1, 0), (-1, 1), (0, 1), (1, 1)]),
        &[vec![0, 1, 4], vec![0, 3, 4], vec![1, 2, 4], vec![2, 4, 5]],
    );
    let l = Complex::from_facets(pts(&[(0, 0), (1, 0), (0, 1), (1, 1)]), &[vec![0, 1, 2], vec![1, 2, 3]]);
    let f = SimplicialMap::new(k, l, vec![1, 0, 1, 3, 2, 3]).unwrap();
    let (kp, lp, map) = compatible_derived_pair(&f, &mut Centroid).unwrap();
    assert_eq!(kp.result.facets().len(), 24);
    assert_eq!(lp.result.facets().len(), 12);
    assert_eq!(is_nondegenerate(&map).unwrap(), Nondegeneracy::Nondegenerate);
    volume_accounting(&kp.parent, &kp.result);
}
