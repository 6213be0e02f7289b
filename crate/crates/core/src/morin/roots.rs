//! Polynomial roots: companion-matrix eigenvalues polished by Aberth iteration.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

use super::poly::PolyF;

/// Residual target for the polishing step, relative to the coefficient scale.
pub const RESIDUAL_TOL: f64 = 1e-12;

/// All complex roots of `p` with multiplicity, sorted by `(re, |im|, im)`.
pub fn roots(p: &PolyF) -> Result<Vec<Complex64>> {
    let mut c = p.coeffs.clone();
    while c.last() == Some(&0.0) {
        c.pop();
    }
    if c.is_empty() {
        return Err(Error::RootFinding("zero polynomial".into()));
    }
    let n = c.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = c[n];
    let monic: Vec<f64> = c.iter().map(|v| v / lead).collect();
    let mut companion = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        companion[(i, n - 1)] = -monic[i];
    }
    let mut z: Vec<Complex64> = match Schur::try_new(companion, f64::EPSILON, SCHUR_ITERATIONS) {
        Some(schur) => schur.complex_eigenvalues().iter().copied().collect(),
        None => circle_start(&monic),
    };
    if z.len() != n || z.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::RootFinding(format!("eigenvalue solver returned {} values for degree {n}", z.len())));
    }
    aberth(&PolyF::new(monic.clone()), &mut z, 64, true);
    if z.iter().any(|v| monic_residual(&monic, *v) > 1e-6) || reconstruction_error(&monic, &z) > 1e-8 {
        // Schur may stall on symmetric companion matrices; restart from a circle.
        z = circle_start(&monic);
        aberth(&PolyF::new(monic.clone()), &mut z, 512, false);
        aberth(&PolyF::new(monic.clone()), &mut z, 64, true);
    }
    let scale = monic.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let q = PolyF::new(monic);
    for r in &z {
        let res = q.eval_complex(*r).norm();
        let bound = scale * libm::pow(1.0 + r.norm(), n as f64);
        if res > 1e-6 * bound {
            return Err(Error::RootFinding(format!("root {r} left residual {res:e}")));
        }
    }
    symmetrize(&mut z);
    z.sort_by(cmp_roots);
    Ok(z)
}

const SCHUR_ITERATIONS: usize = 10_000;

fn monic_residual(monic: &[f64], z: Complex64) -> f64 {
    let n = monic.len() - 1;
    let scale = monic.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    PolyF::new(monic.to_vec()).eval_complex(z).norm() / (scale * libm::pow(1.0 + z.norm(), n as f64))
}

/// Largest coefficient gap between `∏ (x − zᵢ)` and `monic`, relative to its scale.
/// Catches root sets that are individually accurate but miss a root.
fn reconstruction_error(monic: &[f64], z: &[Complex64]) -> f64 {
    let back = PolyF::from_roots(z);
    let scale = monic.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    monic.iter().zip(&back.coeffs).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale
}

/// Starting points on a circle of Cauchy-bound radius, rotated off the axes.
fn circle_start(monic: &[f64]) -> Vec<Complex64> {
    let n = monic.len() - 1;
    let radius = 1.0 + monic[..n].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (0..n)
        .map(|k| {
            let a = 2.0 * core::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex64::new(radius * libm::cos(a), radius * libm::sin(a))
        })
        .collect()
}

fn cmp_roots(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.abs().total_cmp(&b.im.abs())).then(a.im.total_cmp(&b.im))
}

/// Simultaneous Newton with Aberth corrections. With `monotone`, a step is kept
/// only if it lowers that root's residual.
fn aberth(p: &PolyF, z: &mut [Complex64], rounds: usize, monotone: bool) {
    let dp = p.derivative();
    let scale = p.max_abs_coeff().max(1.0);
    for _ in 0..rounds {
        let mut moved = false;
        for k in 0..z.len() {
            let pk = p.eval_complex(z[k]);
            if pk.norm() <= RESIDUAL_TOL * scale * 1e-4 {
                continue;
            }
            let dk = dp.eval_complex(z[k]);
            if dk.norm() == 0.0 {
                continue;
            }
            let w = pk / dk;
            let mut s = Complex64::new(0.0, 0.0);
            for (j, zj) in z.iter().enumerate() {
                if j != k && (z[k] - zj).norm() > 0.0 {
                    s += 1.0 / (z[k] - zj);
                }
            }
            let denom = Complex64::new(1.0, 0.0) - w * s;
            let step = if denom.norm() > 0.0 { w / denom } else { w };
            let cand = z[k] - step;
            if cand.re.is_finite() && cand.im.is_finite() && (!monotone || p.eval_complex(cand).norm() < pk.norm()) {
                moved |= step.norm() > 1e-17 * (1.0 + z[k].norm());
                z[k] = cand;
            }
        }
        if !moved {
            break;
        }
    }
}

/// Forces exact conjugate pairs. Roots with negligible imaginary part become
/// real; each remaining root in the upper half-plane is matched with the nearest
/// unused root near its conjugate, and both are replaced by their mean pair.
fn symmetrize(z: &mut [Complex64]) {
    const REAL_TOL: f64 = 1e-9;
    const PAIR_TOL: f64 = 1e-6;
    for v in z.iter_mut() {
        if v.im.abs() <= REAL_TOL * (1.0 + v.re.abs()) {
            v.im = 0.0;
        }
    }
    let n = z.len();
    let mut used = alloc::vec![false; n];
    for i in 0..n {
        if used[i] || z[i].im <= 0.0 {
            continue;
        }
        let target = z[i].conj();
        let best = (0..n)
            .filter(|&j| !used[j] && j != i && z[j].im < 0.0)
            .min_by(|&a, &b| (z[a] - target).norm().total_cmp(&(z[b] - target).norm()))
            .filter(|&j| (z[j] - target).norm() <= PAIR_TOL * (1.0 + target.norm()));
        if let Some(j) = best {
            let re = 0.5 * (z[i].re + z[j].re);
            let im = 0.5 * (z[i].im - z[j].im);
            z[i] = Complex64::new(re, im);
            z[j] = Complex64::new(re, -im);
            used[i] = true;
            used[j] = true;
        }
    }
}

/// Roots with `|im| ≤ tol·(1 + |re|)`, as reals, ascending.
pub fn real_roots(p: &PolyF, tol: f64) -> Result<Vec<f64>> {
    let mut out: Vec<f64> =
        roots(p)?.into_iter().filter(|z| z.im.abs() <= tol * (1.0 + z.re.abs())).map(|z| z.re).collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Groups nearly equal values (within `tol`) as `(mean, multiplicity)`, ascending.
pub fn cluster(values: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=v.len() {
        if i == v.len() || v[i] - v[i - 1] > tol {
            if start < i {
                let mean = v[start..i].iter().sum::<f64>() / (i - start) as f64;
                out.push((mean, i - start));
            }
            start = i;
        }
    }
    out
}

/// Newton polish of a simple real root.
pub fn newton(p: &PolyF, mut x: f64, iters: usize) -> f64 {
    let dp = p.derivative();
    for _ in 0..iters {
        let d = dp.eval(x);
        if d == 0.0 {
            break;
        }
        let step = p.eval(x) / d;
        x -= step;
        if step.abs() <= 1e-17 * (1.0 + x.abs()) {
            break;
        }
    }
    x
}
