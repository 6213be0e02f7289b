//! The normal form `F_r: Rⁿ → Rᵐ`, its lifts `Φ_r^±`, and the product structure
//! of its double-point set over that of `f_r`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::rational::{rat, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn negate(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn of(v: f64) -> Option<Sign> {
        if v > 0.0 {
            Some(Sign::Plus)
        } else if v < 0.0 {
            Some(Sign::Minus)
        } else {
            None
        }
    }

    pub fn parse(s: &str) -> Option<Sign> {
        match s {
            "+" | "plus" | "+1" => Some(Sign::Plus),
            "-" | "minus" | "-1" => Some(Sign::Minus),
            _ => None,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// Index data of `F_r: Rⁿ → Rᵐ`. Points of `Rⁿ` are `(t_1, …, t_{n−1}, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MorinSpec {
    r: usize,
    n: usize,
    m: usize,
}

impl MorinSpec {
    pub fn new(r: usize, n: usize, m: usize) -> Result<Self> {
        if n == 0 || n > m {
            return Err(Error::OutOfRange(format!("need 1 <= n <= m, got n={n}, m={m}")));
        }
        if (m - n + 1) * r > n {
            return Err(Error::OutOfRange(format!("need (m-n+1)r <= n, got r={r}, n={n}, m={m}")));
        }
        Ok(MorinSpec { r, n, m })
    }

    /// `f_r = F_r` with `m = n = r`.
    pub fn small(r: usize) -> Result<Self> {
        MorinSpec::new(r, r.max(1), r.max(1))
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of `Q_i` components, `m − n`.
    pub fn q_count(&self) -> usize {
        self.m - self.n
    }

    /// 1-based `t` indices of `Q_i`, `i = 1..=m−n`.
    pub fn q_indices(&self, i: usize) -> Range<usize> {
        i * self.r..i * self.r + self.r
    }

    /// 1-based `t` indices used by neither `P` nor any `Q_i`.
    pub fn unused_indices(&self) -> Range<usize> {
        ((self.q_count() + 1) * self.r).max(1)..self.n
    }

    /// `2n − m − r`, the dimension of the extra factor of the double-point set.
    pub fn extra_dim(&self) -> usize {
        self.q_count() * self.r.saturating_sub(1) + self.unused_indices().len()
    }

    fn check(&self, p: usize) -> Result<()> {
        if p != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: p });
        }
        Ok(())
    }
}

/// `F_r(p)`, exact.
pub fn morin_eval(spec: &MorinSpec, p: &[Rational]) -> Result<Vec<Rational>> {
    spec.check(p.len())?;
    let (t, x) = p.split_at(spec.n - 1);
    let x = &x[0];
    let mut out: Vec<Rational> = t.to_vec();
    if spec.r == 0 {
        out.push(x.clone());
        out.resize(spec.m, Rational::zero());
        return Ok(out);
    }
    let t_at = |k: usize| t[k - 1].clone();
    // y = t_1 x + … + t_{r−1} x^{r−1} + x^{r+1}
    let mut y = Rational::zero();
    let mut xp = x.clone();
    for k in 1..spec.r {
        y += t_at(k) * &xp;
        xp *= x;
    }
    y += &xp * x;
    out.push(y);
    for i in 1..=spec.q_count() {
        let mut z = Rational::zero();
        let mut xp = x.clone();
        for k in spec.q_indices(i) {
            z += t_at(k) * &xp;
            xp *= x;
        }
        out.push(z);
    }
    Ok(out)
}

/// `F_r(p)` in floating point.
pub fn morin_eval_f64(spec: &MorinSpec, p: &[f64]) -> Result<Vec<f64>> {
    spec.check(p.len())?;
    let (t, x) = p.split_at(spec.n - 1);
    let x = x[0];
    let mut out: Vec<f64> = t.to_vec();
    if spec.r == 0 {
        out.push(x);
        out.resize(spec.m, 0.0);
        return Ok(out);
    }
    let mut y = 0.0;
    let mut xp = x;
    for k in 1..spec.r {
        y += t[k - 1] * xp;
        xp *= x;
    }
    out.push(y + xp * x);
    for i in 1..=spec.q_count() {
        let mut z = 0.0;
        let mut xp = x;
        for k in spec.q_indices(i) {
            z += t[k - 1] * xp;
            xp *= x;
        }
        out.push(z);
    }
    Ok(out)
}

/// `Φ_r^±(p) = (F_r(p), ±x)`; for `r = 0` this is `F_0`.
pub fn morin_lift_eval(spec: &MorinSpec, sign: Sign, p: &[Rational]) -> Result<Vec<Rational>> {
    let mut out = morin_eval(spec, p)?;
    if spec.r > 0 {
        let x = p[spec.n - 1].clone();
        out.push(if sign == Sign::Plus { x } else { -x });
    }
    Ok(out)
}

pub fn morin_lift_eval_f64(spec: &MorinSpec, sign: Sign, p: &[f64]) -> Result<Vec<f64>> {
    let mut out = morin_eval_f64(spec, p)?;
    if spec.r > 0 {
        out.push(sign.value() * p[spec.n - 1]);
    }
    Ok(out)
}

/// Which map a [`DoublePoint`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MapContext {
    /// `F_r` for the given spec (`f_r` when `m = n = r`).
    Morin(MorinSpec),
    /// `T_r: R → R`.
    Chebyshev(usize),
    /// `τ_r: R → R`.
    Tau(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoublePoint {
    pub first: Point,
    pub second: Point,
    pub context: MapContext,
}

impl DoublePoint {
    /// Exact check that the points differ and have equal image.
    pub fn verify(&self) -> Result<bool> {
        if self.first == self.second {
            return Ok(false);
        }
        match self.context {
            MapContext::Morin(spec) => Ok(morin_eval(&spec, &self.first.coords)? == morin_eval(&spec, &self.second.coords)?),
            MapContext::Chebyshev(r) => {
                let p = super::poly::chebyshev(r);
                Ok(p.eval(&self.first.coords[0]) == p.eval(&self.second.coords[0]))
            }
            MapContext::Tau(r) => {
                let p = super::poly::tau(r)?.to_poly();
                Ok(p.eval(&self.first.coords[0]) == p.eval(&self.second.coords[0]))
            }
        }
    }
}

/// `h_k(a, b) = Σ_{i+j=k} aⁱ bʲ` for `k = 0..=n`.
fn complete_homogeneous(a: &Rational, b: &Rational, n: usize) -> Vec<Rational> {
    let mut h = vec![Rational::one()];
    let mut bk = Rational::one();
    for _ in 0..n {
        bk *= b;
        let next = a * h.last().unwrap() + &bk;
        h.push(next);
    }
    h
}

/// The double point `((t, x₁), (t, x₂))` of `f_r`, where `t_1` is solved from
/// `(P(x₁) − P(x₂)) / (x₁ − x₂) = 0` and `free = (t_2, …, t_{r−1})`.
pub fn delta_solve_fr(r: usize, x1: &Rational, x2: &Rational, free: &[Rational]) -> Result<DoublePoint> {
    let spec = MorinSpec::small(r)?;
    if r == 0 {
        return Err(Error::NotADoublePoint);
    }
    if x1 == x2 {
        return Err(Error::NotADoublePoint);
    }
    if free.len() != r.saturating_sub(2) {
        return Err(Error::DimensionMismatch { expected: r.saturating_sub(2), found: free.len() });
    }
    let h = complete_homogeneous(x1, x2, r);
    if r == 1 {
        // f_1 = x² identifies x with −x only.
        if !h[1].is_zero() {
            return Err(Error::NotADoublePoint);
        }
        let first = Point::new(vec![x1.clone()]);
        let second = Point::new(vec![x2.clone()]);
        return Ok(DoublePoint { first, second, context: MapContext::Morin(spec) });
    }
    // Σ_{j=1}^{r−1} t_j h_{j−1} + h_r = 0 with h_0 = 1.
    let mut t1 = -h[r].clone();
    for (j, tj) in free.iter().enumerate() {
        t1 -= tj * &h[j + 1];
    }
    let mut t = vec![t1];
    t.extend_from_slice(free);
    let mut a = t.clone();
    a.push(x1.clone());
    let mut b = t;
    b.push(x2.clone());
    Ok(DoublePoint { first: Point::new(a), second: Point::new(b), context: MapContext::Morin(spec) })
}

/// Random exact double points of `f_r` with dyadic coordinates in `[−2, 2]`.
pub fn delta_sample_fr(r: usize, count: usize, seed: u64) -> Result<Vec<DoublePoint>> {
    if count == 0 {
        return Err(Error::OutOfRange("count must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x1 = rat(rng.gen_range(-64..=64), 32);
        let x2 = if r == 1 { -x1.clone() } else { rat(rng.gen_range(-64..=64), 32) };
        if x1 == x2 {
            continue;
        }
        let free: Vec<Rational> = (0..r.saturating_sub(2)).map(|_| rat(rng.gen_range(-64..=64), 32)).collect();
        out.push(delta_solve_fr(r, &x1, &x2, &free)?);
    }
    Ok(out)
}

/// Coordinates of a point of `Δ_{F_r}` in `Δ_{f_r} × R^{2n−m−r}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductPayload {
    /// `(t_1, …, t_{r−1})`.
    pub t: Vec<Rational>,
    pub x1: Rational,
    pub x2: Rational,
    /// `c[i−1] = (c_{i0}, …, c_{i,r−2})` for `i = 1..=m−n`.
    pub c: Vec<Vec<Rational>>,
    /// `t` at [`MorinSpec::unused_indices`].
    pub unused: Vec<Rational>,
}

/// Coefficients of `x¹ … x^r` in `c_0 x(x − s) + (c_1 x + … + c_{r−2} x^{r−2})(x² − s x + p)`.
fn q_coefficients(c: &[Rational], s: &Rational, p: &Rational, r: usize) -> Vec<Rational> {
    let mut q = vec![Rational::zero(); r + 1];
    if let Some(c0) = c.first() {
        q[2] += c0;
        q[1] -= c0 * s;
    }
    for (j, cj) in c.iter().enumerate().skip(1) {
        q[j + 2] += cj;
        q[j + 1] -= cj * s;
        q[j] += cj * p;
    }
    q.remove(0);
    q
}

fn payload_shape(spec: &MorinSpec, payload: &ProductPayload) -> Result<()> {
    let r = spec.r;
    let want_t = r.saturating_sub(1);
    if payload.t.len() != want_t {
        return Err(Error::DimensionMismatch { expected: want_t, found: payload.t.len() });
    }
    if payload.c.len() != spec.q_count() {
        return Err(Error::DimensionMismatch { expected: spec.q_count(), found: payload.c.len() });
    }
    for row in &payload.c {
        if row.len() != r.saturating_sub(1) {
            return Err(Error::DimensionMismatch { expected: r.saturating_sub(1), found: row.len() });
        }
    }
    if payload.unused.len() != spec.unused_indices().len() {
        return Err(Error::DimensionMismatch { expected: spec.unused_indices().len(), found: payload.unused.len() });
    }
    Ok(())
}

/// `Δ_{f_r} × R^{2n−m−r} → Δ_{F_r}`.
pub fn delta_product_forward(spec: &MorinSpec, payload: &ProductPayload) -> Result<DoublePoint> {
    if spec.r == 0 {
        return Err(Error::NotADoublePoint);
    }
    payload_shape(spec, payload)?;
    let small = MorinSpec::small(spec.r)?;
    let mut a: Vec<Rational> = payload.t.clone();
    a.push(payload.x1.clone());
    let mut b: Vec<Rational> = payload.t.clone();
    b.push(payload.x2.clone());
    if a == b || morin_eval(&small, &a)? != morin_eval(&small, &b)? {
        return Err(Error::NotADoublePoint);
    }
    let s = &payload.x1 + &payload.x2;
    let p = &payload.x1 * &payload.x2;
    let mut t = vec![Rational::zero(); spec.n - 1];
    t[..payload.t.len()].clone_from_slice(&payload.t);
    for i in 1..=spec.q_count() {
        let q = q_coefficients(&payload.c[i - 1], &s, &p, spec.r);
        for (k, v) in spec.q_indices(i).zip(q) {
            t[k - 1] = v;
        }
    }
    for (k, v) in spec.unused_indices().zip(&payload.unused) {
        t[k - 1] = v.clone();
    }
    let mut first = t.clone();
    first.push(payload.x1.clone());
    let mut second = t;
    second.push(payload.x2.clone());
    Ok(DoublePoint { first: Point::new(first), second: Point::new(second), context: MapContext::Morin(*spec) })
}

/// `Δ_{F_r} → Δ_{f_r} × R^{2n−m−r}`, recovering each `c_{ij}` from the top coefficient down.
pub fn delta_product_inverse(spec: &MorinSpec, dp: &DoublePoint) -> Result<ProductPayload> {
    if spec.r == 0 {
        return Err(Error::NotADoublePoint);
    }
    spec.check(dp.first.dim())?;
    spec.check(dp.second.dim())?;
    let n = spec.n;
    let (ta, xa) = dp.first.coords.split_at(n - 1);
    let (tb, xb) = dp.second.coords.split_at(n - 1);
    let (x1, x2) = (xa[0].clone(), xb[0].clone());
    if ta != tb || x1 == x2 {
        return Err(Error::NotADoublePoint);
    }
    let r = spec.r;
    let small_t = ta[..r - 1].to_vec();
    let small = MorinSpec::small(r)?;
    let mut a = small_t.clone();
    a.push(x1.clone());
    let mut b = small_t.clone();
    b.push(x2.clone());
    if morin_eval(&small, &a)? != morin_eval(&small, &b)? {
        return Err(Error::NotADoublePoint);
    }
    let s = &x1 + &x2;
    let p = &x1 * &x2;
    let mut c = Vec::with_capacity(spec.q_count());
    for i in 1..=spec.q_count() {
        // q[k] is the coefficient of x^{k+1}.
        let q: Vec<Rational> = spec.q_indices(i).map(|k| ta[k - 1].clone()).collect();
        let len = r - 1;
        let mut ci = vec![Rational::zero(); len];
        // x^k coefficient = c_{k−2} − s c_{k−1} + p c_k (the last term only for k ≥ 1, c_k with k ≥ 1).
        for k in (2..=r).rev() {
            let mut v = q[k - 1].clone();
            if k - 1 < len {
                v += &s * &ci[k - 1];
            }
            if k < len {
                v -= &p * &ci[k];
            }
            ci[k - 2] = v;
        }
        let q1 = q_coefficients(&ci, &s, &p, r);
        if q1 != q {
            return Err(Error::NotADoublePoint);
        }
        c.push(ci);
    }
    let unused = spec.unused_indices().map(|k| ta[k - 1].clone()).collect();
    Ok(ProductPayload { t: small_t, x1, x2, c, unused })
}

/// A random payload whose `f_r` part is a valid double point.
pub fn random_payload(spec: &MorinSpec, rng: &mut ChaCha8Rng) -> Result<ProductPayload> {
    let r = spec.r;
    let draw = |rng: &mut ChaCha8Rng| rat(rng.gen_range(-96..=96), rng.gen_range(1..=24));
    let dp = loop {
        let x1 = draw(rng);
        let x2 = if r == 1 { -x1.clone() } else { draw(rng) };
        if x1 == x2 {
            continue;
        }
        let free: Vec<Rational> = (0..r.saturating_sub(2)).map(|_| draw(rng)).collect();
        break delta_solve_fr(r, &x1, &x2, &free)?;
    };
    let k = dp.first.dim();
    let c = (0..spec.q_count()).map(|_| (0..r - 1).map(|_| draw(rng)).collect()).collect();
    let unused = spec.unused_indices().map(|_| draw(rng)).collect();
    Ok(ProductPayload {
        t: dp.first.coords[..k - 1].to_vec(),
        x1: dp.first.coords[k - 1].clone(),
        x2: dp.second.coords[k - 1].clone(),
        c,
        unused,
    })
}
