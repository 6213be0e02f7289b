//! Univariate polynomials, Chebyshev polynomials and the family `M_r`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{int, to_f64, Rational};

/// Exact polynomial, coefficients listed from the constant term up, with no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| int(c)).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn monomial(c: Rational, k: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); k + 1];
        coeffs[k] = c;
        Poly::new(coeffs)
    }

    pub fn x() -> Self {
        Poly::monomial(Rational::one(), 1)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        Poly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * int(i as i64)).collect())
    }

    /// Every nonzero coefficient sits at an index of the given parity.
    pub fn has_parity(&self, parity: usize) -> bool {
        self.coeffs.iter().enumerate().all(|(i, c)| c.is_zero() || i % 2 == parity % 2)
    }

    /// Quotient and remainder by a nonzero divisor.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead = d.leading().unwrap().clone();
        let mut rem = self.coeffs.clone();
        let Some(n) = self.degree().filter(|&n| n >= dd) else { return (Poly::zero(), self.clone()) };
        let mut q = vec![Rational::zero(); n - dd + 1];
        for k in (0..=n - dd).rev() {
            let c = &rem[k + dd] / &lead;
            for (j, dj) in d.coeffs.iter().enumerate() {
                rem[k + j] -= &c * dj;
            }
            q[k] = c;
        }
        (Poly::new(q), Poly::new(rem))
    }

    pub fn to_f64(&self) -> PolyF {
        PolyF::new(self.coeffs.iter().map(to_f64).collect())
    }
}

impl Add for &Poly {
    type Output = Poly;

    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;

    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;

    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;

    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

/// Floating-point polynomial, constant term first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolyF {
    pub coeffs: Vec<f64>,
}

impl PolyF {
    pub fn new(coeffs: Vec<f64>) -> Self {
        PolyF { coeffs }
    }

    /// `∏ (x − zᵢ)`; conjugate roots must come in pairs, imaginary parts are dropped.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for z in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (i, a) in c.iter().enumerate() {
                next[i + 1] += a;
                next[i] -= a * z;
            }
            c = next;
        }
        PolyF::new(c.into_iter().map(|z| z.re).collect())
    }

    pub fn from_real_roots(roots: &[f64]) -> Self {
        let z: Vec<Complex64> = roots.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        PolyF::from_roots(&z)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> PolyF {
        PolyF::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// `(P(a) − P(b)) / (a − b)` evaluated by complete homogeneous sums, stable near `a = b`.
    pub fn divided_difference(&self, a: f64, b: f64) -> f64 {
        let mut total = 0.0;
        // h_{k} = Σ_{i+j=k} aⁱ bʲ, built incrementally: h_k = a·h_{k−1} + b^k.
        let mut h = 1.0;
        let mut bk = 1.0;
        for c in self.coeffs.iter().skip(1) {
            total += c * h;
            bk *= b;
            h = a * h + bk;
        }
        total
    }
}

/// `T_r` from `T_{r+1} = 2x T_r − T_{r−1}`.
pub fn chebyshev(r: usize) -> Poly {
    let mut prev = Poly::from_i64(&[1]);
    if r == 0 {
        return prev;
    }
    let mut cur = Poly::x();
    let two_x = Poly::from_i64(&[0, 2]);
    for _ in 1..r {
        let next = &(&two_x * &cur) - &prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `x^{r+1} + a_{r−1} x^{r−1} + … + a_1 x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MrPolynomial {
    r: usize,
    a: Vec<Rational>,
}

impl MrPolynomial {
    /// `a = [a_1, …, a_{r−1}]`.
    pub fn new(r: usize, a: Vec<Rational>) -> Result<Self> {
        if r == 0 {
            return Err(Error::OutOfRange("M_r needs r >= 1".into()));
        }
        if a.len() != r - 1 {
            return Err(Error::DimensionMismatch { expected: r - 1, found: a.len() });
        }
        Ok(MrPolynomial { r, a })
    }

    pub fn from_poly(p: &Poly, r: usize) -> Option<Self> {
        mr_membership(p, r).then(|| MrPolynomial { r, a: (1..r).map(|i| p.coeff(i)).collect() })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn a(&self) -> &[Rational] {
        &self.a
    }

    pub fn to_poly(&self) -> Poly {
        let mut c = vec![Rational::zero(); self.r + 2];
        for (i, a) in self.a.iter().enumerate() {
            c[i + 1] = a.clone();
        }
        c[self.r + 1] = Rational::one();
        Poly::new(c)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.to_poly().eval(x)
    }
}

/// `τ_r = (T_{r+1} − c_0) / c_{r+1}`.
pub fn tau(r: usize) -> Result<MrPolynomial> {
    let t = chebyshev(r + 1);
    let lead = t.leading().cloned().expect("T_{r+1} is nonzero");
    let shifted = &t - &Poly::new(vec![t.coeff(0)]);
    let p = shifted.scale(&(Rational::one() / lead));
    MrPolynomial::from_poly(&p, r).ok_or_else(|| Error::Inconsistent("normalized Chebyshev polynomial left M_r".into()))
}

/// Monic of degree `r + 1` with zero constant and zero `x^r` coefficient.
pub fn mr_membership(p: &Poly, r: usize) -> bool {
    r >= 1 && p.degree() == Some(r + 1) && p.leading().is_some_and(One::is_one) && p.coeff(0).is_zero() && p.coeff(r).is_zero()
}

/// Float version of [`mr_membership`] with absolute tolerance on the three constrained coefficients.
pub fn mr_membership_f64(p: &PolyF, r: usize, tol: f64) -> bool {
    r >= 1
        && p.coeffs.len() == r + 2
        && (p.coeffs[r + 1] - 1.0).abs() <= tol
        && p.coeffs[0].abs() <= tol
        && p.coeffs[r].abs() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn small_chebyshev() {
        assert_eq!(chebyshev(0), Poly::from_i64(&[1]));
        assert_eq!(chebyshev(1), Poly::x());
        assert_eq!(chebyshev(3), Poly::from_i64(&[0, -3, 0, 4]));
    }

    #[test]
    fn tau_two() {
        let t = tau(2).unwrap();
        assert_eq!(t.a(), &[rat(-3, 4)]);
        assert_eq!(tau(1).unwrap().to_poly(), Poly::from_i64(&[0, 0, 1]));
    }

    #[test]
    fn membership() {
        assert!(mr_membership(&Poly::from_i64(&[0, -1, 0, 1]), 2));
        assert!(!mr_membership(&Poly::from_i64(&[0, 0, 1, 1]), 2));
        assert!(!mr_membership(&Poly::from_i64(&[1, -1, 0, 1]), 2));
    }

    #[test]
    fn divided_difference_matches_quotient() {
        let p = PolyF::new(vec![0.0, -0.75, 0.0, 1.0]);
        let (a, b) = (0.3, -1.1);
        let q = (p.eval(a) - p.eval(b)) / (a - b);
        assert!((p.divided_difference(a, b) - q).abs() < 1e-14);
    }
}
