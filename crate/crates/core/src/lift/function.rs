//! Lift functions `g: |P| → Rᵏ`: named closed forms, PL tables and scaled sums.
//!
//! [`LiftFunction::value`] is the single source of exact values: PL tables and
//! trig-free closed forms are evaluated exactly, everything else is evaluated
//! in `f64` and snapped to a dyadic grid. Certificates and PL-ifications built
//! from the same function therefore see identical vertex values.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::rational::{from_f64_exact, snap, to_f64, Rational, DEFAULT_SNAP_BITS};
use crate::simplicial::Complex;

/// `coef · Π x_d^{p_d} · cos(Σ ω_d x_d + φ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigTerm {
    pub coef: f64,
    pub powers: Vec<u32>,
    pub freq: Vec<f64>,
    pub phase: f64,
}

impl TrigTerm {
    pub fn monomial(coef: f64, powers: Vec<u32>) -> Self {
        let freq = vec![0.0; powers.len()];
        TrigTerm { coef, powers, freq, phase: 0.0 }
    }

    pub fn trig(coef: f64, powers: Vec<u32>, freq: Vec<f64>, phase: f64) -> Self {
        TrigTerm { coef, powers, freq, phase }
    }

    pub fn is_algebraic(&self) -> bool {
        self.phase == 0.0 && self.freq.iter().all(|&w| w == 0.0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut m = self.coef;
        for (xi, &p) in x.iter().zip(&self.powers) {
            m *= libm::pow(*xi, p as f64);
        }
        if self.is_algebraic() {
            return m;
        }
        let arg: f64 = self.freq.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + self.phase;
        m * libm::cos(arg)
    }

    fn eval_exact(&self, x: &[Rational]) -> Option<Rational> {
        if !self.is_algebraic() {
            return None;
        }
        let mut m = from_f64_exact(self.coef)?;
        for (xi, &p) in x.iter().zip(&self.powers) {
            for _ in 0..p {
                m *= xi;
            }
        }
        Some(m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClosedForm {
    /// `g(0) = 0`, `x(cos(2π/x) − 1)` for `x > 0` and `−x(1 + cos(2π/x))` for `x < 0`.
    /// Together with `f(x) = |x|` this is an embedding of `[−1, 1]`.
    AbsvalExample,
    /// Same positive branch, but `x(1 + cos(2π/x))` for `x < 0`. Both branches
    /// are then `≤ 0`, and `f × g` identifies `±1/k` for every `k`.
    AbsvalLiteral,
    /// One sum of [`TrigTerm`]s per output coordinate.
    TrigPoly { input_dim: usize, outputs: Vec<Vec<TrigTerm>> },
}

impl ClosedForm {
    pub fn name(&self) -> &'static str {
        match self {
            ClosedForm::AbsvalExample => "absval_example",
            ClosedForm::AbsvalLiteral => "absval_literal",
            ClosedForm::TrigPoly { .. } => "trig_poly",
        }
    }

    pub fn codim(&self) -> usize {
        match self {
            ClosedForm::AbsvalExample | ClosedForm::AbsvalLiteral => 1,
            ClosedForm::TrigPoly { outputs, .. } => outputs.len(),
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            ClosedForm::AbsvalExample | ClosedForm::AbsvalLiteral => 1,
            ClosedForm::TrigPoly { input_dim, .. } => *input_dim,
        }
    }

    pub fn eval_f64(&self, x: &[f64]) -> Vec<f64> {
        match self {
            ClosedForm::AbsvalExample | ClosedForm::AbsvalLiteral => {
                let x = x[0];
                if x == 0.0 {
                    return vec![0.0];
                }
                let c = libm::cos(2.0 * PI / x);
                let v = if x > 0.0 {
                    x * (c - 1.0)
                } else if matches!(self, ClosedForm::AbsvalExample) {
                    -x * (1.0 + c)
                } else {
                    x * (1.0 + c)
                };
                vec![v]
            }
            ClosedForm::TrigPoly { outputs, .. } => {
                outputs.iter().map(|terms| terms.iter().map(|t| t.eval(x)).sum()).collect()
            }
        }
    }

    /// Exact value where one is available without rounding.
    pub fn eval_exact(&self, x: &[Rational]) -> Option<Vec<Rational>> {
        match self {
            ClosedForm::AbsvalExample | ClosedForm::AbsvalLiteral => {
                let x = &x[0];
                if x.is_zero() {
                    return Some(vec![Rational::zero()]);
                }
                // cos(2π/x) = ±1 exactly when 2/x is an integer.
                let two_over = Rational::from_integer(BigInt::from(2)) / x;
                if !two_over.is_integer() {
                    return None;
                }
                let c = if two_over.numer().is_even() { Rational::one() } else { -Rational::one() };
                let v = if x.is_positive() {
                    x * (c - Rational::one())
                } else if matches!(self, ClosedForm::AbsvalExample) {
                    -x * (Rational::one() + c)
                } else {
                    x * (Rational::one() + c)
                };
                Some(vec![v])
            }
            ClosedForm::TrigPoly { outputs, .. } => outputs
                .iter()
                .map(|terms| terms.iter().map(|t| t.eval_exact(x)).sum::<Option<Rational>>())
                .collect(),
        }
    }
}

/// Values at the vertices of a complex, extended linearly over each simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct PlTable {
    pub complex: Complex,
    pub values: Vec<Vec<Rational>>,
}

impl PlTable {
    pub fn new(complex: Complex, values: Vec<Vec<Rational>>) -> Result<Self> {
        if values.len() != complex.num_vertices() {
            return Err(Error::NotLinearOnComplex);
        }
        let k = values.first().map_or(0, Vec::len);
        if k == 0 || values.iter().any(|v| v.len() != k) {
            return Err(Error::NotLinearOnComplex);
        }
        Ok(PlTable { complex, values })
    }

    pub fn codim(&self) -> usize {
        self.values[0].len()
    }

    /// Value at the point with barycentric coordinates `bary` in simplex `i`.
    pub fn eval_in(&self, i: usize, bary: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.codim()];
        for (&v, b) in self.complex.simplex(i).iter().zip(bary) {
            if b.is_zero() {
                continue;
            }
            for (o, y) in out.iter_mut().zip(&self.values[v]) {
                *o += b * y;
            }
        }
        out
    }

    pub fn eval(&self, p: &Point) -> Result<Vec<Rational>> {
        let (i, bary) = self.complex.locate(p).ok_or(Error::OutsideComplex)?;
        Ok(self.eval_in(i, &bary))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LiftFunction {
    ClosedForm(ClosedForm),
    PlTable(PlTable),
    /// `Σ cᵢ gᵢ` over terms of equal codimension.
    Composite(Vec<(Rational, LiftFunction)>),
}

impl LiftFunction {
    pub fn absval_example() -> Self {
        LiftFunction::ClosedForm(ClosedForm::AbsvalExample)
    }

    pub fn trig_poly(input_dim: usize, outputs: Vec<Vec<TrigTerm>>) -> Self {
        LiftFunction::ClosedForm(ClosedForm::TrigPoly { input_dim, outputs })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LiftFunction::ClosedForm(_) => "closed_form",
            LiftFunction::PlTable(_) => "pl_table",
            LiftFunction::Composite(_) => "composite",
        }
    }

    /// Target dimension `k`.
    pub fn codim(&self) -> usize {
        match self {
            LiftFunction::ClosedForm(c) => c.codim(),
            LiftFunction::PlTable(t) => t.codim(),
            LiftFunction::Composite(terms) => terms.first().map_or(0, |(_, g)| g.codim()),
        }
    }

    pub fn input_dim(&self) -> Option<usize> {
        match self {
            LiftFunction::ClosedForm(c) => Some(c.input_dim()),
            LiftFunction::PlTable(t) => Some(t.complex.ambient_dim()),
            LiftFunction::Composite(terms) => terms.first().and_then(|(_, g)| g.input_dim()),
        }
    }

    pub fn eval_f64(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            LiftFunction::ClosedForm(c) => Ok(c.eval_f64(x)),
            LiftFunction::PlTable(t) => {
                let p = Point::from_f64(x).ok_or(Error::OutsideComplex)?;
                Ok(t.eval(&p)?.iter().map(to_f64).collect())
            }
            LiftFunction::Composite(terms) => {
                let mut out = vec![0.0; self.codim()];
                for (c, g) in terms {
                    let c = to_f64(c);
                    for (o, v) in out.iter_mut().zip(g.eval_f64(x)?) {
                        *o += c * v;
                    }
                }
                Ok(out)
            }
        }
    }

    /// Exact value when available, otherwise the `f64` value snapped to `2^-64`.
    pub fn value(&self, p: &Point) -> Result<Vec<Rational>> {
        self.value_with(p, DEFAULT_SNAP_BITS)
    }

    pub fn value_with(&self, p: &Point, bits: u32) -> Result<Vec<Rational>> {
        if let Some(d) = self.input_dim() {
            if d != p.dim() {
                return Err(Error::DimensionMismatch { expected: d, found: p.dim() });
            }
        }
        match self {
            LiftFunction::ClosedForm(c) => Ok(match c.eval_exact(&p.coords) {
                Some(v) => v,
                None => c.eval_f64(&p.to_f64()).into_iter().map(|v| snap(v, bits)).collect(),
            }),
            LiftFunction::PlTable(t) => t.eval(p),
            LiftFunction::Composite(terms) => {
                let mut out = vec![Rational::zero(); self.codim()];
                for (c, g) in terms {
                    for (o, v) in out.iter_mut().zip(g.value_with(p, bits)?) {
                        *o += c * v;
                    }
                }
                Ok(out)
            }
        }
    }

    /// True when every value is exact (no snapping involved).
    pub fn is_exact(&self) -> bool {
        match self {
            LiftFunction::ClosedForm(ClosedForm::TrigPoly { outputs, .. }) => {
                outputs.iter().flatten().all(TrigTerm::is_algebraic)
            }
            LiftFunction::ClosedForm(_) => false,
            LiftFunction::PlTable(_) => true,
            LiftFunction::Composite(terms) => terms.iter().all(|(_, g)| g.is_exact()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn absval_branches() {
        let g = LiftFunction::absval_example();
        // Exact at zeros of the cosine factor.
        assert_eq!(g.value(&Point::new(vec![rat(1, 2)])).unwrap(), vec![int(0)]);
        assert_eq!(g.value(&Point::new(vec![rat(-2, 3)])).unwrap(), vec![int(0)]);
        assert_eq!(g.value(&Point::new(vec![rat(-1, 2)])).unwrap(), vec![int(1)]);
        assert_eq!(g.value(&Point::new(vec![int(0)])).unwrap(), vec![int(0)]);
        let v = g.eval_f64(&[0.3]).unwrap()[0];
        assert!(v <= 0.0);
        let w = g.eval_f64(&[-0.3]).unwrap()[0];
        assert!((w - v - 0.6).abs() < 1e-12);

        let lit = LiftFunction::ClosedForm(ClosedForm::AbsvalLiteral);
        assert_eq!(lit.value(&Point::new(vec![rat(-1, 2)])).unwrap(), vec![int(-1)]);
    }

    #[test]
    fn trig_poly_and_composite() {
        // x² + 3 cos(y)
        let g = LiftFunction::trig_poly(
            2,
            vec![vec![TrigTerm::monomial(1.0, vec![2, 0]), TrigTerm::trig(3.0, vec![0, 0], vec![0.0, 1.0], 0.0)]],
        );
        let v = g.eval_f64(&[2.0, 0.0]).unwrap();
        assert_eq!(v, vec![7.0]);
        let poly = LiftFunction::trig_poly(1, vec![vec![TrigTerm::monomial(0.5, vec![3])]]);
        assert!(poly.is_exact());
        assert_eq!(poly.value(&Point::new(vec![rat(1, 3)])).unwrap(), vec![rat(1, 54)]);
        let sum = LiftFunction::Composite(vec![(int(2), poly.clone()), (int(-1), poly)]);
        assert_eq!(sum.value(&Point::new(vec![int(2)])).unwrap(), vec![int(4)]);
        assert!(matches!(
            sum.value(&Point::new(vec![int(1), int(1)])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn pl_table_interpolates() {
        let c = Complex::from_facets(
            vec![Point::new(vec![int(0)]), Point::new(vec![int(2)])],
            &[vec![0, 1]],
        );
        let t = PlTable::new(c, vec![vec![int(1)], vec![int(5)]]).unwrap();
        assert_eq!(t.eval(&Point::new(vec![rat(1, 2)])).unwrap(), vec![int(2)]);
        assert!(matches!(t.eval(&Point::new(vec![int(3)])), Err(Error::OutsideComplex)));
    }
}
