//! Arithmetic modes shared by every formula in the crate.
//!
//! All evaluators are generic over [`Scalar`], implemented for
//! [`Rational`] (exact, arbitrary precision) and `f64` (binary float with
//! Neumaier-compensated accumulation). Alternating subset sums cancel badly,
//! so exact mode is the correctness anchor and float mode the scale path.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number, always stored in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Running sum used by [`Scalar::sum`].
pub trait Accumulator<S>: Default {
    fn add(&mut self, value: S);
    fn total(&self) -> S;
}

/// A number in one of the two supported arithmetic modes.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    type Acc: Accumulator<Self>;

    /// `true` for the exact rational mode.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_bigint(v: &BigInt) -> Self;
    fn from_rational(v: &Rational) -> Self;
    fn to_f64(&self) -> f64;

    /// Integer power with `0^0 = 1`.
    fn powi(&self, exp: u32) -> Self;

    fn abs(&self) -> Self;

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&Rational::new(num.into(), den.into()))
    }

    /// Equality in exact mode, `|a - b| <= tol * max(1, |a|, |b|)` in float mode.
    fn close_to(&self, other: &Self, tol: f64) -> bool;

    /// Exact text form: `p/q` for rationals, shortest round-trip for floats.
    fn render(&self) -> String;

    fn sum<I: IntoIterator<Item = Self>>(iter: I) -> Self {
        let mut acc = Self::Acc::default();
        for v in iter {
            acc.add(v);
        }
        acc.total()
    }
}

#[derive(Default)]
pub struct ExactSum(Rational);

impl Accumulator<Rational> for ExactSum {
    fn add(&mut self, value: Rational) {
        self.0 += value;
    }

    fn total(&self) -> Rational {
        self.0.clone()
    }
}

/// Kahan-Babuska-Neumaier compensated summation.
#[derive(Default, Clone, Copy, Debug)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl Accumulator<f64> for NeumaierSum {
    #[inline]
    fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp += (self.sum - t) + value;
        } else {
            self.comp += (value - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.value()
    }
}

impl Scalar for Rational {
    type Acc = ExactSum;
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        One::one()
    }

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(v.into())
    }

    fn from_bigint(v: &BigInt) -> Self {
        Rational::from_integer(v.clone())
    }

    fn from_rational(v: &Rational) -> Self {
        v.clone()
    }

    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }

    fn powi(&self, exp: u32) -> Self {
        num_traits::pow::Pow::pow(self, exp)
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn close_to(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }

    fn render(&self) -> String {
        if self.is_integer() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

impl Scalar for f64 {
    type Acc = NeumaierSum;
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_bigint(v: &BigInt) -> Self {
        v.to_f64().unwrap_or(f64::NAN)
    }

    fn from_rational(v: &Rational) -> Self {
        ratio_to_f64(v)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn powi(&self, exp: u32) -> Self {
        if exp <= i32::MAX as u32 {
            f64::powi(*self, exp as i32)
        } else {
            f64::powf(*self, exp as f64)
        }
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn close_to(&self, other: &Self, tol: f64) -> bool {
        let scale = 1f64.max(f64::abs(*self)).max(f64::abs(*other));
        (self - other).abs() <= tol * scale
    }

    fn render(&self) -> String {
        format_float(*self)
    }
}

/// Shortest round-trip representation (at most 17 significant digits).
pub fn format_float(v: f64) -> String {
    format!("{v:?}")
}

/// Nearest-double conversion that survives numerators and denominators beyond `f64` range.
pub fn ratio_to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Shift both sides down to ~64 significant bits before dividing.
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift_n = (nb - 64).max(0);
    let shift_d = (db - 64).max(0);
    let n = (r.numer() >> shift_n as usize).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> shift_d as usize).to_f64().unwrap_or(1.0);
    ldexp(n / d, shift_n - shift_d)
}

/// `m * 2^e` without intermediate overflow or underflow of the power.
pub(crate) fn ldexp(mut m: f64, mut e: i64) -> f64 {
    while e > 1000 {
        m *= 2f64.powi(1000);
        e -= 1000;
        if m.is_infinite() {
            return m;
        }
    }
    while e < -1000 {
        m *= 2f64.powi(-1000);
        e += 1000;
        if m == 0.0 {
            return m;
        }
    }
    m * 2f64.powi(e as i32)
}

/// Parses `"p/q"`, integers and decimals (optionally with an exponent) exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(num, den));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(digits.parse::<BigInt>().map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow::Pow::pow(&ten, scale as u32);
    } else {
        value /= num_traits::pow::Pow::pow(&ten, scale.unsigned_abs());
    }
    Ok(if negative { -value } else { value })
}
