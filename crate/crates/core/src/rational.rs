//! Exact rational scalars and the conversions the rest of the crate leans on.

use alloc::format;
use alloc::string::String;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision fraction, always in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Default number of binary digits kept when snapping floats onto the rational grid.
pub const DEFAULT_SNAP_BITS: u32 = 64;

#[inline]
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

#[inline]
pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRationalError {
    pub input: String,
}

impl fmt::Display for ParseRationalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "malformed rational {:?} (expected \"num/den\")", self.input)
    }
}

/// Parses `"num/den"` or a bare integer `"num"`.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError { input: String::from(s) };
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| err())?;
    let den: BigInt = den.parse().map_err(|_| err())?;
    if den.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(num, den))
}

/// Canonical `"num/den"` rendering; the denominator is written even when it is 1.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// The exact dyadic value of a finite float.
pub fn from_f64_exact(v: f64) -> Option<Rational> {
    if !v.is_finite() {
        return None;
    }
    Rational::from_f64(v)
}

/// Rounds `v` to the nearest multiple of `2^-bits`.
pub fn snap(v: f64, bits: u32) -> Rational {
    let exact = from_f64_exact(v).expect("snap of a non-finite value");
    let scale = Rational::from_integer(BigInt::one() << bits as usize);
    (exact * &scale).round() / scale
}

/// Nearest rational with denominator `den`.
pub fn snap_to_denominator(v: &Rational, den: i64) -> Rational {
    let d = int(den);
    (v * &d).round() / d
}

/// Exact floor of the square root of a nonnegative rational, as a float lower bound.
///
/// The returned value `s` always satisfies `s*s <= r` exactly.
pub fn sqrt_lower(r: &Rational) -> f64 {
    if !r.is_positive() {
        return 0.0;
    }
    let mut s = libm::sqrt(to_f64(r));
    loop {
        match from_f64_exact(s) {
            Some(q) if &(&q * &q) <= r => return s,
            _ => s = next_down(s),
        }
        if s <= 0.0 {
            return 0.0;
        }
    }
}

/// Float upper bound on the square root: `s*s >= r` exactly.
pub fn sqrt_upper(r: &Rational) -> f64 {
    if !r.is_positive() {
        return 0.0;
    }
    let mut s = libm::sqrt(to_f64(r));
    loop {
        let q = from_f64_exact(s).expect("finite sqrt");
        if &(&q * &q) >= r {
            return s;
        }
        s = next_up(s);
    }
}

fn next_up(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        return x;
    }
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let bits = x.to_bits();
    if x > 0.0 {
        f64::from_bits(bits + 1)
    } else {
        f64::from_bits(bits - 1)
    }
}

fn next_down(x: f64) -> f64 {
    -next_up(-x)
}

pub fn min_max<'a, I: IntoIterator<Item = &'a Rational>>(iter: I) -> Option<(Rational, Rational)> {
    let mut it = iter.into_iter();
    let first = it.next()?;
    let (mut lo, mut hi) = (first.clone(), first.clone());
    for v in it {
        if v < &lo {
            lo = v.clone();
        }
        if v > &hi {
            hi = v.clone();
        }
    }
    Some((lo, hi))
}
