//! Lifts of Chebyshev polynomials and of Morin maps: which of the two isotopy
//! classes a lift belongs to.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rational::to_f64;

use super::forms::{delta_product_forward, morin_eval_f64, random_payload, MorinSpec, Sign};
use super::poly::{chebyshev, tau, PolyF};
use super::roots::{newton, real_roots};

/// Tolerance on `|T_r| = 1` at critical points.
const EXTREMUM_TOL: f64 = 1e-12;
/// Grid on the homotopy parameter used by [`lift_isotopy_check`].
pub const ISOTOPY_STEPS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoints {
    /// Points with `T_r = 1`, ascending.
    pub maxima: Vec<f64>,
    /// Points with `T_r = −1`, ascending.
    pub minima: Vec<f64>,
}

/// Roots of `T_r'` split by the value of `T_r`.
pub fn critical_points(r: usize) -> Result<CriticalPoints> {
    if r < 2 {
        return Err(Error::OutOfRange(format!("T_{r} has no critical points")));
    }
    let t = chebyshev(r).to_f64();
    let dt = t.derivative();
    let xs = real_roots(&dt, 1e-9)?;
    if xs.len() != r - 1 {
        return Err(Error::RootFinding(format!("T_{r}' gave {} real roots", xs.len())));
    }
    let mut out = CriticalPoints { maxima: Vec::new(), minima: Vec::new() };
    for x in xs {
        let x = newton(&dt, x, 8);
        let v = t.eval(x);
        if (v - 1.0).abs() <= EXTREMUM_TOL {
            out.maxima.push(x);
        } else if (v + 1.0).abs() <= EXTREMUM_TOL {
            out.minima.push(x);
        } else {
            return Err(Error::Inconsistent(format!("T_{r}({x}) = {v} at a critical point")));
        }
    }
    Ok(out)
}

/// A sampled double point `(x_i, x_j)`, `x_i < x_j`, of `T_r` at level `c`.
/// `cluster = (i, j)` is the rank pair among the roots of `T_r − c`; for
/// `c ∈ (−1, 1)` the roots stay simple, so each rank pair traces a connected arc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChebyshevPair {
    pub cluster: (usize, usize),
    pub level: f64,
    pub x: (f64, f64),
}

/// Double points of `T_r` over `levels` evenly spaced levels in `(−1, 1)`.
pub fn chebyshev_double_points(r: usize, levels: usize) -> Result<Vec<ChebyshevPair>> {
    if levels == 0 {
        return Err(Error::OutOfRange("levels must be positive".into()));
    }
    let t = chebyshev(r).to_f64();
    let mut out = Vec::new();
    for k in 0..levels {
        let c = -1.0 + 2.0 * (k as f64 + 0.5) / levels as f64;
        let mut shifted = t.clone();
        shifted.coeffs[0] -= c;
        let xs: Vec<f64> = real_roots(&shifted, 1e-9)?.into_iter().map(|x| newton(&shifted, x, 8)).collect();
        if xs.len() != r {
            return Err(Error::RootFinding(format!("T_{r} − {c} gave {} real roots", xs.len())));
        }
        for i in 0..r {
            for j in i + 1..r {
                out.push(ChebyshevPair { cluster: (i, j), level: c, x: (xs[i], xs[j]) });
            }
        }
    }
    Ok(out)
}

/// Counts of `sign(g(x_j) − g(x_i))` over one cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClusterSigns {
    pub plus: usize,
    pub minus: usize,
    pub zero: usize,
}

impl ClusterSigns {
    pub fn constant(&self) -> Option<Sign> {
        match (self.plus, self.minus, self.zero) {
            (p, 0, 0) if p > 0 => Some(Sign::Plus),
            (0, m, 0) if m > 0 => Some(Sign::Minus),
            _ => None,
        }
    }
}

/// Sign of `g(x_j) − g(x_i)` tallied per rank-pair cluster.
pub fn cluster_signs(pairs: &[ChebyshevPair], g: &dyn Fn(f64) -> f64) -> BTreeMap<(usize, usize), ClusterSigns> {
    let mut out: BTreeMap<(usize, usize), ClusterSigns> = BTreeMap::new();
    for p in pairs {
        let e = out.entry(p.cluster).or_default();
        let d = g(p.x.1) - g(p.x.0);
        if d > 0.0 {
            e.plus += 1;
        } else if d < 0.0 {
            e.minus += 1;
        } else {
            e.zero += 1;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyReport {
    pub r: usize,
    pub epsilon: Sign,
    pub pairs_checked: usize,
    pub clusters: BTreeMap<(usize, usize), ClusterSigns>,
    /// Direction of `g` along the ascending maxima, when there are at least two.
    pub maxima_order: Option<Sign>,
    pub minima_order: Option<Sign>,
}

/// Default number of levels sampled by [`classify_lift_sign`].
pub const CLASSIFY_LEVELS: usize = 64;

fn order_of(g: &dyn Fn(f64) -> f64, xs: &[f64]) -> Result<Option<Sign>> {
    if xs.len() < 2 {
        return Ok(None);
    }
    let mut seen: Option<Sign> = None;
    for w in xs.windows(2) {
        let s = Sign::of(g(w[1]) - g(w[0]))
            .ok_or_else(|| Error::NotEmbedded { x: vec![w[0]], y: vec![w[1]] })?;
        match seen {
            None => seen = Some(s),
            Some(prev) if prev != s => {
                return Err(Error::Inconsistent("g is not monotone along the extrema".into()));
            }
            _ => {}
        }
    }
    Ok(seen)
}

/// The `ε` such that `T_r × g` lies with `Γ_r^ε(x) = (T_r(x), εx)`.
pub fn classify_lift_sign(r: usize, g: &dyn Fn(f64) -> f64) -> Result<ClassifyReport> {
    classify_lift_sign_with(r, g, CLASSIFY_LEVELS)
}

pub fn classify_lift_sign_with(r: usize, g: &dyn Fn(f64) -> f64, levels: usize) -> Result<ClassifyReport> {
    if r == 0 {
        return Err(Error::OutOfRange("r must be positive".into()));
    }
    if r == 1 {
        // T_1 is injective; only the orientation of g is left.
        let epsilon = Sign::of(g(1.0) - g(-1.0)).ok_or_else(|| Error::NotEmbedded { x: vec![-1.0], y: vec![1.0] })?;
        return Ok(ClassifyReport {
            r,
            epsilon,
            pairs_checked: 0,
            clusters: BTreeMap::new(),
            maxima_order: None,
            minima_order: None,
        });
    }
    let pairs = chebyshev_double_points(r, levels)?;
    for p in &pairs {
        if g(p.x.1) == g(p.x.0) {
            return Err(Error::NotEmbedded { x: vec![p.x.0], y: vec![p.x.1] });
        }
    }
    let clusters = cluster_signs(&pairs, g);
    let mut epsilon = None;
    for signs in clusters.values() {
        let s = signs.constant().ok_or_else(|| Error::Inconsistent("sign map varies inside a cluster".into()))?;
        if epsilon.is_some_and(|e| e != s) {
            return Err(Error::Inconsistent("sign map differs between clusters".into()));
        }
        epsilon = Some(s);
    }
    let epsilon = epsilon.ok_or_else(|| Error::Inconsistent("no double points sampled".into()))?;
    let (mut maxima_order, mut minima_order) = (None, None);
    if r >= 3 {
        let cp = critical_points(r)?;
        maxima_order = order_of(g, &cp.maxima)?;
        minima_order = order_of(g, &cp.minima)?;
        for o in [maxima_order, minima_order].into_iter().flatten() {
            if o != epsilon {
                return Err(Error::Inconsistent("extrema ordering disagrees with the sign map".into()));
            }
        }
    }
    Ok(ClassifyReport { r, epsilon, pairs_checked: pairs.len(), clusters, maxima_order, minima_order })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsotopyWitness {
    pub t: f64,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsotopyReport {
    /// Class of `Ψ` read off its restriction over `λ`.
    pub classified: Sign,
    pub requested: Sign,
    pub pairs: usize,
    pub t_values: usize,
    pub violations: usize,
    pub witness: Option<IsotopyWitness>,
}

impl IsotopyReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// `λ(x) = (a_1, …, a_{r−1}, 0, …, 0, x)` with `a` the coefficients of `τ_r`.
pub fn lambda_line(spec: &MorinSpec, x: f64) -> Result<Vec<f64>> {
    let mut p = vec![0.0; spec.n()];
    if spec.r() >= 1 {
        for (k, a) in tau(spec.r())?.a().iter().enumerate() {
            p[k] = to_f64(a);
        }
    }
    p[spec.n() - 1] = x;
    Ok(p)
}

/// For a lift `(F_r, ψ)`: classifies `ψ` over `λ(R)` (where `F_r` restricts to
/// `τ_r`, an increasing affine image of `T_{r+1}`), then checks that
/// `(1 − t)ψ + t·εx` separates sampled double points of `F_r` for `t` on a grid.
pub fn lift_isotopy_check(
    spec: &MorinSpec,
    psi: &dyn Fn(&[f64]) -> f64,
    eps: Sign,
    samples: usize,
    seed: u64,
) -> Result<IsotopyReport> {
    let r = spec.r();
    if r == 0 {
        return Err(Error::OutOfRange("the r = 0 map has no double points".into()));
    }
    if samples == 0 {
        return Err(Error::OutOfRange("samples must be positive".into()));
    }
    let restricted = |x: f64| lambda_line(spec, x).map(|p| psi(&p)).unwrap_or(f64::NAN);
    let classified = classify_lift_sign(r + 1, &restricted)?.epsilon;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = IsotopyReport {
        classified,
        requested: eps,
        pairs: samples,
        t_values: ISOTOPY_STEPS + 1,
        violations: 0,
        witness: None,
    };
    for _ in 0..samples {
        let dp = delta_product_forward(spec, &random_payload(spec, &mut rng)?)?;
        let a: Vec<f64> = dp.first.coords.iter().map(to_f64).collect();
        let b: Vec<f64> = dp.second.coords.iter().map(to_f64).collect();
        debug_assert!(morin_eval_f64(spec, &a).is_ok());
        let (pa, pb) = (psi(&a), psi(&b));
        let (xa, xb) = (eps.value() * a[spec.n() - 1], eps.value() * b[spec.n() - 1]);
        let mut start: Option<Sign> = None;
        for k in 0..=ISOTOPY_STEPS {
            let t = k as f64 / ISOTOPY_STEPS as f64;
            let d = ((1.0 - t) * pa + t * xa) - ((1.0 - t) * pb + t * xb);
            let s = Sign::of(d);
            // A zero, or a sign change between grid points, forces a collision.
            let bad = match (s, start) {
                (None, _) => true,
                (Some(s), Some(s0)) => s != s0,
                (Some(s), None) => {
                    start = Some(s);
                    false
                }
            };
            if bad {
                report.violations += 1;
                if report.witness.is_none() {
                    report.witness = Some(IsotopyWitness { t, first: a.clone(), second: b.clone() });
                }
                break;
            }
        }
    }
    Ok(report)
}

/// `Γ_r^ε` as a lift function.
pub fn gamma(eps: Sign) -> impl Fn(f64) -> f64 {
    move |x| eps.value() * x
}

/// `T_r` in floating point.
pub fn chebyshev_f64(r: usize) -> PolyF {
    chebyshev(r).to_f64()
}
