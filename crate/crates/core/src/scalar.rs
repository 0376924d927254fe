//! Complex scalar abstraction shared by every algorithm in the crate.
//!
//! Three backends are provided: `Complex<f64>`, Gaussian rationals
//! `Complex<BigRational>` and the arbitrary precision [`MpComplex`].

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rug::Float;

use crate::poly::Poly;

/// Default working precision (bits) for [`MpComplex`].
pub const DEFAULT_PRECISION: u32 = 256;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Construction context (precision for the multi-precision backend).
    type Ctx: Copy + Debug + PartialEq + Send + Sync + 'static;
    /// True when arithmetic is exact and all comparisons are equalities.
    const EXACT: bool;

    fn ctx(&self) -> Self::Ctx;
    fn from_i64(ctx: Self::Ctx, v: i64) -> Self;
    fn from_f64(ctx: Self::Ctx, re: f64, im: f64) -> Self;
    fn is_zero(&self) -> bool;
    fn to_c64(&self) -> Complex<f64>;
    fn conj(&self) -> Self;
    /// Relative tolerance used for "same point" and "vanishes" decisions.
    /// Zero for exact backends.
    fn tol(ctx: Self::Ctx) -> f64;
    fn to_strings(&self) -> (String, String);
    fn parse(ctx: Self::Ctx, re: &str, im: &str) -> Result<Self, String>;

    /// Remove common factors of a numerator/denominator pair.
    fn cancel_common(num: Poly<Self>, den: Poly<Self>) -> (Poly<Self>, Poly<Self>);

    fn zero(ctx: Self::Ctx) -> Self {
        Self::from_i64(ctx, 0)
    }

    fn one(ctx: Self::Ctx) -> Self {
        Self::from_i64(ctx, 1)
    }

    fn from_ratio(ctx: Self::Ctx, num: i64, den: i64) -> Self {
        Self::from_i64(ctx, num) / Self::from_i64(ctx, den)
    }

    fn from_c64(ctx: Self::Ctx, z: Complex<f64>) -> Self {
        Self::from_f64(ctx, z.re, z.im)
    }

    fn abs(&self) -> f64 {
        self.to_c64().norm()
    }

    /// `|self| <= tol`, or exact zero test for exact backends.
    fn near_zero(&self, tol: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.abs() <= tol
        }
    }

    fn powu(&self, n: u32) -> Self {
        let mut acc = Self::one(self.ctx());
        for _ in 0..n {
            acc = acc * self.clone();
        }
        acc
    }

    fn recip(&self) -> Self {
        Self::one(self.ctx()) / self.clone()
    }
}

/// Backends with rounding, for which root finding makes sense.
pub trait FloatScalar: Scalar {
    /// Mantissa bits.
    fn precision(ctx: Self::Ctx) -> u32;

    /// Unit roundoff `2^-precision`.
    fn unit_roundoff(ctx: Self::Ctx) -> f64 {
        (-(Self::precision(ctx) as f64)).exp2()
    }
}

/// Equality up to `tol * (1 + max(|a|, |b|))`, exact for exact backends.
pub fn approx_eq<S: Scalar>(a: &S, b: &S, tol: f64) -> bool {
    if S::EXACT {
        return a == b;
    }
    let scale = 1.0 + a.abs().max(b.abs());
    (a.clone() - b.clone()).abs() <= tol * scale
}

// ---------------------------------------------------------------- f64

impl Scalar for Complex<f64> {
    type Ctx = ();
    const EXACT: bool = false;

    fn ctx(&self) {}

    fn from_i64(_: (), v: i64) -> Self {
        Complex::new(v as f64, 0.0)
    }

    fn from_f64(_: (), re: f64, im: f64) -> Self {
        Complex::new(re, im)
    }

    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    fn to_c64(&self) -> Complex<f64> {
        *self
    }

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn tol(_: ()) -> f64 {
        1e-8
    }

    fn to_strings(&self) -> (String, String) {
        (format!("{:e}", self.re), format!("{:e}", self.im))
    }

    fn parse(_: (), re: &str, im: &str) -> Result<Self, String> {
        Ok(Complex::new(parse_f64(re)?, parse_f64(im)?))
    }

    fn cancel_common(num: Poly<Self>, den: Poly<Self>) -> (Poly<Self>, Poly<Self>) {
        crate::roots::cancel_common_roots(num, den)
    }
}

impl FloatScalar for Complex<f64> {
    fn precision(_: ()) -> u32 {
        53
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let s = s.trim();
    if s.contains('/') {
        return parse_rational(s).map(|q| q.to_f64().unwrap_or(f64::NAN));
    }
    s.parse::<f64>().map_err(|e| format!("bad number {s:?}: {e}"))
}

// ---------------------------------------------------------------- exact

impl Scalar for Complex<BigRational> {
    type Ctx = ();
    const EXACT: bool = true;

    fn ctx(&self) {}

    fn from_i64(_: (), v: i64) -> Self {
        Complex::new(BigRational::from_integer(BigInt::from(v)), BigRational::zero())
    }

    fn from_f64(_: (), re: f64, im: f64) -> Self {
        let cv = |x: f64| BigRational::from_float(x).unwrap_or_else(BigRational::zero);
        Complex::new(cv(re), cv(im))
    }

    fn from_ratio(_: (), num: i64, den: i64) -> Self {
        Complex::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn to_c64(&self) -> Complex<f64> {
        Complex::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }

    fn tol(_: ()) -> f64 {
        0.0
    }

    fn to_strings(&self) -> (String, String) {
        (rational_string(&self.re), rational_string(&self.im))
    }

    fn parse(_: (), re: &str, im: &str) -> Result<Self, String> {
        Ok(Complex::new(parse_rational(re)?, parse_rational(im)?))
    }

    fn cancel_common(num: Poly<Self>, den: Poly<Self>) -> (Poly<Self>, Poly<Self>) {
        let g = num.gcd(&den);
        if g.degree().unwrap_or(0) == 0 {
            return (num, den);
        }
        (num.div_rem(&g).0, den.div_rem(&g).0)
    }
}

fn rational_string(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `p/q`, integers and decimal notation (`-1.25e-3`) exactly.
pub fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    let bad = || format!("bad rational {s:?}");
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    let digits = format!("{int}{frac}");
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let mut n: BigInt = digits.parse().map_err(|_| bad())?;
    if neg {
        n = -n;
    }
    let e = exp - frac.len() as i64;
    let ten = BigInt::from(10);
    let p = num_traits::pow(ten, e.unsigned_abs() as usize);
    Ok(if e >= 0 {
        BigRational::from_integer(n * p)
    } else {
        BigRational::new(n, p)
    })
}

// ---------------------------------------------------------------- multi precision

/// Arbitrary precision complex number. Every value carries its own precision.
#[derive(Clone, Debug, PartialEq)]
pub struct MpComplex(pub rug::Complex);

impl MpComplex {
    pub fn with_prec(prec: u32, re: f64, im: f64) -> Self {
        MpComplex(rug::Complex::with_val(prec, (re, im)))
    }

    pub fn prec(&self) -> u32 {
        self.0.prec().0
    }
}

impl Add for MpComplex {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        MpComplex(self.0 + rhs.0)
    }
}

impl Sub for MpComplex {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        MpComplex(self.0 - rhs.0)
    }
}

impl Mul for MpComplex {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        MpComplex(self.0 * rhs.0)
    }
}

impl Div for MpComplex {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        MpComplex(self.0 / rhs.0)
    }
}

impl Neg for MpComplex {
    type Output = Self;
    fn neg(self) -> Self {
        MpComplex(-self.0)
    }
}

impl Scalar for MpComplex {
    type Ctx = u32;
    const EXACT: bool = false;

    fn ctx(&self) -> u32 {
        self.prec()
    }

    fn from_i64(prec: u32, v: i64) -> Self {
        MpComplex(rug::Complex::with_val(prec, v))
    }

    fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        MpComplex::with_prec(prec, re, im)
    }

    fn from_ratio(prec: u32, num: i64, den: i64) -> Self {
        let q = rug::Rational::from((num, den));
        MpComplex(rug::Complex::with_val(prec, q))
    }

    fn is_zero(&self) -> bool {
        self.0.real().is_zero() && self.0.imag().is_zero()
    }

    fn to_c64(&self) -> Complex<f64> {
        Complex::new(self.0.real().to_f64(), self.0.imag().to_f64())
    }

    fn abs(&self) -> f64 {
        Float::with_val(64, self.0.abs_ref()).to_f64()
    }

    fn conj(&self) -> Self {
        MpComplex(self.0.clone().conj())
    }

    fn tol(prec: u32) -> f64 {
        (-(prec as f64) / 2.0).exp2()
    }

    fn to_strings(&self) -> (String, String) {
        let digits = (self.prec() as f64 * std::f64::consts::LOG10_2).ceil() as usize + 1;
        (
            self.0.real().to_string_radix(10, Some(digits)),
            self.0.imag().to_string_radix(10, Some(digits)),
        )
    }

    fn parse(prec: u32, re: &str, im: &str) -> Result<Self, String> {
        let one = |s: &str| -> Result<Float, String> {
            let s = s.trim();
            if s.contains('/') {
                let q = parse_rational(s)?;
                let q = rug::Rational::from((
                    rug::Integer::from_str_radix(&q.numer().to_string(), 10).unwrap(),
                    rug::Integer::from_str_radix(&q.denom().to_string(), 10).unwrap(),
                ));
                return Ok(Float::with_val(prec, q));
            }
            let p = Float::parse(s).map_err(|e| format!("bad number {s:?}: {e}"))?;
            Ok(Float::with_val(prec, p))
        };
        Ok(MpComplex(rug::Complex::with_val(prec, (one(re)?, one(im)?))))
    }

    fn cancel_common(num: Poly<Self>, den: Poly<Self>) -> (Poly<Self>, Poly<Self>) {
        crate::roots::cancel_common_roots(num, den)
    }
}

impl FloatScalar for MpComplex {
    fn precision(prec: u32) -> u32 {
        prec
    }
}

/// Exact value of a Gaussian rational as a multi-precision number.
pub fn exact_to_mp(z: &Complex<BigRational>, prec: u32) -> MpComplex {
    let cv = |q: &BigRational| {
        rug::Rational::from((
            rug::Integer::from_str_radix(&q.numer().to_string(), 10).unwrap(),
            rug::Integer::from_str_radix(&q.denom().to_string(), 10).unwrap(),
        ))
    };
    MpComplex(rug::Complex::with_val(prec, (cv(&z.re), cv(&z.im))))
}
