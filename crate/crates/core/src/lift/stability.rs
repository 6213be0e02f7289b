//! Empirical stability of `f × g★` under PL perturbations on `K'`.

use alloc::vec::Vec;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::rational::{from_f64_exact, rat, Rational};
use crate::simplicial::SimplicialMap;

use super::function::PlTable;
use super::plify::verify_embedding_exact;

const NOISE_STEPS: i64 = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct TrialFailure {
    pub trial: usize,
    pub witness: (Point, Point),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub delta: Rational,
    pub trials: usize,
    pub passed: usize,
    pub failures: Vec<TrialFailure>,
}

impl StabilityReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.trials
    }

    pub fn pass_rate(&self) -> f64 {
        if self.trials == 0 {
            1.0
        } else {
            self.passed as f64 / self.trials as f64
        }
    }
}

/// `g★ + e` with every entry of `e` uniform on a grid of `[−δ, δ]`.
pub fn perturb(gstar: &PlTable, delta: &Rational, rng: &mut ChaCha8Rng) -> PlTable {
    let step = delta * rat(1, NOISE_STEPS);
    let values = gstar
        .values
        .iter()
        .map(|v| v.iter().map(|y| y + &step * Rational::from_integer(rng.gen_range(-NOISE_STEPS..=NOISE_STEPS).into())).collect())
        .collect();
    PlTable { complex: gstar.complex.clone(), values }
}

/// Runs the exact verifier on `trials` random PL maps within `δ` of `g★` in sup norm.
pub fn perturbation_stability(
    f: &SimplicialMap,
    gstar: &PlTable,
    delta: &Rational,
    trials: usize,
    seed: u64,
) -> Result<StabilityReport> {
    if delta.is_negative() {
        return Err(Error::OutOfRange("delta must be non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = StabilityReport { delta: delta.clone(), trials, passed: 0, failures: Vec::new() };
    for trial in 0..trials {
        let phi = if delta.is_zero() { gstar.clone() } else { perturb(gstar, delta, &mut rng) };
        let verdict = verify_embedding_exact(f, &phi)?;
        match verdict.witness {
            None => report.passed += 1,
            Some(witness) => report.failures.push(TrialFailure { trial, witness }),
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiusReport {
    /// Largest `δ` at which every trial passed.
    pub radius: f64,
    /// Smallest `δ` seen to fail, if any.
    pub failing: Option<f64>,
    pub evaluations: usize,
}

/// Doubles `δ` from `start` until a trial fails, then bisects geometrically
/// `steps` times. Every level reuses `seed`.
pub fn stability_radius(
    f: &SimplicialMap,
    gstar: &PlTable,
    start: f64,
    trials: usize,
    seed: u64,
    steps: usize,
) -> Result<RadiusReport> {
    if !(start > 0.0 && start.is_finite()) {
        return Err(Error::OutOfRange("start must be positive".into()));
    }
    let mut evaluations = 0;
    let mut passes = |d: f64| -> Result<bool> {
        evaluations += 1;
        let delta = from_f64_exact(d).ok_or_else(|| Error::OutOfRange("delta is not finite".into()))?;
        Ok(perturbation_stability(f, gstar, &delta, trials, seed)?.all_passed())
    };
    let (mut lo, mut hi) = (0.0, start);
    let mut failed = false;
    for _ in 0..64 {
        if !passes(hi)? {
            failed = true;
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    if !failed {
        return Ok(RadiusReport { radius: lo, failing: None, evaluations });
    }
    if lo == 0.0 {
        let mut d = hi / 2.0;
        loop {
            if d < start * 1e-12 {
                return Ok(RadiusReport { radius: 0.0, failing: Some(hi), evaluations });
            }
            if passes(d)? {
                lo = d;
                break;
            }
            hi = d;
            d /= 2.0;
        }
    }
    for _ in 0..steps {
        let mid = libm::sqrt(lo * hi);
        if passes(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(RadiusReport { radius: lo, failing: Some(hi), evaluations })
}
