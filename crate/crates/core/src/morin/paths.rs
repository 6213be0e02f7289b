//! Paths in `M_r` from a polynomial with a marked double point to `τ_r`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::{rat, to_f64, Rational};

use super::poly::{mr_membership, mr_membership_f64, tau, MrPolynomial, Poly, PolyF};
use super::roots::{cluster, roots};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StageKind {
    /// The start already is `τ_r` (or `r = 1`).
    Constant,
    /// `r = 2`: `x³ − a_t x` with the pair rescaled by `√(a_t / a)`.
    Rescale,
    /// `P_t = t c x(x − x₁ − x₂) + P⁺`, `t` from 1 to 0.
    DropCone,
    /// `((x − a)² + t²b²) R(x)`, `t` from 1 to 0.
    CollapsePair,
    /// Straight-line motion of the real roots onto those of `τ_r`.
    Interpolate,
}

impl StageKind {
    pub fn name(self) -> &'static str {
        match self {
            StageKind::Constant => "constant",
            StageKind::Rescale => "rescale",
            StageKind::DropCone => "drop_cone",
            StageKind::CollapsePair => "collapse_pair",
            StageKind::Interpolate => "interpolate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    /// Stage parameter in `[0, 1]`.
    pub t: f64,
    pub poly: PolyF,
    /// Exact polynomial when the sample is rational.
    pub exact: Option<Poly>,
    pub pair: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathStage {
    pub kind: StageKind,
    pub samples: Vec<PathSample>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MrPath {
    pub r: usize,
    pub stages: Vec<PathStage>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathCheck {
    pub samples: usize,
    pub membership_failures: usize,
    /// Largest `|P_t(x₁(t)) − P_t(x₂(t))|`.
    pub max_residual: f64,
    /// Largest coefficient difference between the endpoint and `τ_r`.
    pub end_error: f64,
    pub end_pair: (f64, f64),
    /// The endpoint pair is a double point of `τ_r` within tolerance.
    pub end_in_delta: bool,
}

impl PathCheck {
    pub fn passed(&self, tol: f64) -> bool {
        self.membership_failures == 0 && self.max_residual < tol && self.end_error < tol && self.end_in_delta
    }
}

impl MrPath {
    pub fn samples(&self) -> impl Iterator<Item = &PathSample> {
        self.stages.iter().flat_map(|s| s.samples.iter())
    }

    pub fn start(&self) -> &PathSample {
        &self.stages[0].samples[0]
    }

    pub fn end(&self) -> &PathSample {
        self.stages.last().and_then(|s| s.samples.last()).expect("a path has samples")
    }

    pub fn check(&self, tol: f64) -> Result<PathCheck> {
        let target = tau(self.r)?.to_poly().to_f64();
        let mut membership_failures = 0;
        let mut max_residual: f64 = 0.0;
        let mut count = 0;
        for s in self.samples() {
            count += 1;
            let ok = match &s.exact {
                Some(p) => mr_membership(p, self.r),
                None => mr_membership_f64(&s.poly, self.r, tol),
            };
            if !ok {
                membership_failures += 1;
            }
            let res = (s.poly.eval(s.pair.0) - s.poly.eval(s.pair.1)).abs();
            max_residual = max_residual.max(if res.is_finite() { res } else { f64::INFINITY });
        }
        let end = self.end();
        let end_error = (0..target.coeffs.len().max(end.poly.coeffs.len()))
            .map(|i| (target.coeffs.get(i).unwrap_or(&0.0) - end.poly.coeffs.get(i).unwrap_or(&0.0)).abs())
            .fold(0.0, f64::max);
        let (a, b) = end.pair;
        let end_in_delta = (a - b).abs() > tol && (target.eval(a) - target.eval(b)).abs() < tol;
        Ok(PathCheck { samples: count, membership_failures, max_residual, end_error, end_pair: end.pair, end_in_delta })
    }
}

fn exact_sample(t: f64, p: Poly, pair: (f64, f64)) -> PathSample {
    PathSample { t, poly: p.to_f64(), exact: Some(p), pair }
}

/// Roots of `τ_r` as a multiset: clusters averaged, the zero root set to exactly 0.
pub fn tau_roots(r: usize) -> Result<Vec<f64>> {
    let p = tau(r)?.to_poly().to_f64();
    let z = roots(&p)?;
    let re: Vec<f64> = z.iter().map(|v| v.re).collect();
    let mut out = Vec::with_capacity(re.len());
    for (mean, mult) in cluster(&re, 1e-6) {
        let v = if mean.abs() < 1e-12 { 0.0 } else { mean };
        out.extend(core::iter::repeat_n(v, mult));
    }
    Ok(out)
}

/// Builds the path. `steps` is the number of intervals per stage.
pub fn connect_to_tau(p: &MrPolynomial, x1: &Rational, x2: &Rational, steps: usize) -> Result<MrPath> {
    let r = p.r();
    let poly = p.to_poly();
    if x1 == x2 || poly.eval(x1) != poly.eval(x2) {
        return Err(Error::NotADoublePoint);
    }
    if steps == 0 {
        return Err(Error::OutOfRange("steps must be positive".into()));
    }
    let pair = (to_f64(x1), to_f64(x2));
    let target = tau(r)?;
    if r == 1 || *p == target {
        let s = exact_sample(0.0, poly.clone(), pair);
        let e = PathSample { t: 1.0, ..s.clone() };
        return Ok(MrPath { r, stages: vec![PathStage { kind: StageKind::Constant, samples: vec![s, e] }] });
    }
    if r == 2 {
        return Ok(MrPath { r, stages: vec![rescale(p, x1, x2, steps)] });
    }

    let mut stages = Vec::new();
    // Stage 1: P = c x(x − s) + (x − x₁)(x − x₂) x Q̃(x).
    let b = poly.eval(x1);
    let shifted = &poly - &Poly::new(vec![b]);
    let quad = Poly::new(vec![x1 * x2, -(x1 + x2), Rational::from_integer(1.into())]);
    let (rq, rem) = shifted.div_rem(&quad);
    if !rem.is_zero() {
        return Err(Error::Inconsistent("double point does not divide P − P(x₁)".into()));
    }
    let c = rq.coeff(0);
    let cone = Poly::new(vec![Rational::zero(), -(x1 + x2) * &c, c.clone()]);
    let plus = &poly - &cone;
    let mut samples = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = rat((steps - k) as i64, steps as i64);
        let pt = &plus + &cone.scale(&t);
        samples.push(exact_sample(1.0 - to_f64(&t), pt, pair));
    }
    stages.push(PathStage { kind: StageKind::DropCone, samples });

    // Q̃ = (R − R(0)) / x.
    let q_tilde = Poly::new(rq.coeffs().iter().skip(1).cloned().collect());
    let mut rest: Vec<Complex64> = if q_tilde.degree().unwrap_or(0) == 0 { Vec::new() } else { roots(&q_tilde.to_f64())? };
    // Σ roots(Q̃) is known exactly from its second coefficient; remove the drift.
    if !rest.is_empty() {
        let want = -to_f64(&q_tilde.coeff(rest.len() - 1));
        let have: f64 = rest.iter().map(|z| z.re).sum();
        let shift = (want - have) / rest.len() as f64;
        for z in &mut rest {
            z.re += shift;
        }
    }
    let fixed = [Complex64::new(pair.0, 0.0), Complex64::new(pair.1, 0.0), Complex64::new(0.0, 0.0)];

    // Stage 2: collapse conjugate pairs one at a time.
    let pairs: Vec<usize> = (0..rest.len()).filter(|&i| rest[i].im > 0.0).collect();
    for &i in &pairs {
        let j = (0..rest.len())
            .filter(|&j| rest[j].im < 0.0)
            .min_by(|&a, &b| (rest[a] - rest[i].conj()).norm().total_cmp(&(rest[b] - rest[i].conj()).norm()))
            .ok_or_else(|| Error::RootFinding("unpaired complex root".into()))?;
        let (a, bim) = (rest[i].re, rest[i].im);
        let mut samples = Vec::with_capacity(steps + 1);
        for k in 0..=steps {
            let t = (steps - k) as f64 / steps as f64;
            rest[i] = Complex64::new(a, t * bim);
            rest[j] = Complex64::new(a, -t * bim);
            let all: Vec<Complex64> = fixed.iter().chain(rest.iter()).copied().collect();
            samples.push(PathSample { t: 1.0 - t, poly: PolyF::from_roots(&all), exact: None, pair });
        }
        rest[i] = Complex64::new(a, 0.0);
        rest[j] = Complex64::new(a, 0.0);
        stages.push(PathStage { kind: StageKind::CollapsePair, samples });
    }
    let rest: Vec<f64> = rest.iter().map(|z| z.re).collect();

    // Stage 3: slots x₁, x₂, 0, rest; targets from the roots of τ_r.
    let mut a = tau_roots(r)?;
    let zero = a.iter().position(|v| *v == 0.0).ok_or_else(|| Error::Inconsistent("τ_r lost its zero root".into()))?;
    a.remove(zero);
    a.sort_by(f64::total_cmp);
    let lo = a[0];
    let hi_pos = a.iter().position(|v| *v > lo).ok_or_else(|| Error::Inconsistent("τ_r has one distinct root".into()))?;
    let hi = a.remove(hi_pos);
    a.remove(0);
    let (a1, a2) = if pair.0 < pair.1 { (lo, hi) } else { (hi, lo) };
    let mut order: Vec<usize> = (0..rest.len()).collect();
    order.sort_by(|&i, &j| rest[i].total_cmp(&rest[j]));
    let mut target_rest = vec![0.0; rest.len()];
    for (rank, &i) in order.iter().enumerate() {
        target_rest[i] = a[rank];
    }
    let mut samples = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = k as f64 / steps as f64;
        let mv = |x: f64, y: f64| (1.0 - t) * x + t * y;
        let p1 = mv(pair.0, a1);
        let p2 = mv(pair.1, a2);
        let mut all = vec![p1, p2, 0.0];
        all.extend(rest.iter().zip(&target_rest).map(|(&x, &y)| mv(x, y)));
        samples.push(PathSample { t, poly: PolyF::from_real_roots(&all), exact: None, pair: (p1, p2) });
    }
    stages.push(PathStage { kind: StageKind::Interpolate, samples });
    Ok(MrPath { r, stages })
}

fn rescale(p: &MrPolynomial, x1: &Rational, x2: &Rational, steps: usize) -> PathStage {
    // P = x³ + a_1 x with −a_1 = x₁² + x₁x₂ + x₂² > 0.
    let a = -to_f64(&p.a()[0]);
    let (y1, y2) = (to_f64(x1), to_f64(x2));
    let mut samples = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = k as f64 / steps as f64;
        let at = (1.0 - t) * a + t * 0.75;
        let scale = libm::sqrt(at / a);
        let poly = PolyF::new(vec![0.0, -at, 0.0, 1.0]);
        let tr = rat(k as i64, steps as i64);
        let exact = (&Poly::new(vec![Rational::zero(), p.a()[0].clone(), Rational::zero(), Rational::from_integer(1.into())])
            .scale(&(Rational::from_integer(1.into()) - &tr)))
            + &Poly::new(vec![Rational::zero(), rat(-3, 4) * &tr, Rational::zero(), tr.clone()]);
        samples.push(PathSample { t, poly, exact: Some(exact), pair: (scale * y1, scale * y2) });
    }
    PathStage { kind: StageKind::Rescale, samples }
}
