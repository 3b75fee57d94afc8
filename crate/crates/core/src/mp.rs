//! Multiprecision real and complex scalars.
//!
//! Thin wrappers over [`astro_float::BigFloat`]. Every value remembers its own
//! binary precision; binary operators round to the larger precision of the two
//! operands, so mixing precisions never silently truncates the wider one.

use alloc::format;
use alloc::string::String;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use astro_float::{BigFloat, Consts, RoundingMode, Sign};

use crate::error::{Error, Result};

const RM: RoundingMode = RoundingMode::ToEven;

/// Guard bits added on top of the requested decimal digits.
const GUARD_BITS: usize = 32;

/// Working precision, specified in decimal digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Precision {
    digits: u32,
}

impl Precision {
    pub const MIN_DIGITS: u32 = 30;
    pub const DEFAULT_DIGITS: u32 = 120;

    pub fn new(digits: u32) -> Result<Self> {
        if digits < Self::MIN_DIGITS {
            return Err(Error::PrecisionTooLow(digits));
        }
        Ok(Self { digits })
    }

    pub fn digits(self) -> u32 {
        self.digits
    }

    /// Mantissa bits: `ceil(digits * log2 10)` plus guard bits.
    pub fn bits(self) -> usize {
        let b = libm::ceil(self.digits as f64 * core::f64::consts::LOG2_10) as usize;
        b + GUARD_BITS
    }

    /// `10^(-digits + slack)`, the natural tolerance scale at this precision.
    pub fn tolerance(self, slack: i32) -> MpReal {
        MpReal::pow10(slack - self.digits as i32, self)
    }
}

impl Default for Precision {
    fn default() -> Self {
        Self { digits: Self::DEFAULT_DIGITS }
    }
}

/// Cache for the constants (π, ln 2, …) used by transcendental functions.
///
/// Creating one is not free; hot loops should keep a context around instead of
/// using the convenience methods on [`MpReal`].
pub struct MathCtx {
    cc: Consts,
}

impl MathCtx {
    pub fn new() -> Self {
        Self { cc: Consts::new().expect("allocating constant cache") }
    }

    pub fn pi(&mut self, prec: Precision) -> MpReal {
        MpReal(self.cc.pi(prec.bits(), RM))
    }

    pub fn sin(&mut self, x: &MpReal) -> MpReal {
        MpReal(x.0.sin(x.bits(), RM, &mut self.cc))
    }

    pub fn cos(&mut self, x: &MpReal) -> MpReal {
        MpReal(x.0.cos(x.bits(), RM, &mut self.cc))
    }

    pub fn exp(&mut self, x: &MpReal) -> MpReal {
        MpReal(x.0.exp(x.bits(), RM, &mut self.cc))
    }

    pub fn ln(&mut self, x: &MpReal) -> MpReal {
        MpReal(x.0.ln(x.bits(), RM, &mut self.cc))
    }

    pub fn log10(&mut self, x: &MpReal) -> MpReal {
        MpReal(x.0.log10(x.bits(), RM, &mut self.cc))
    }

    /// `e^{iθ}` for real θ.
    pub fn cis(&mut self, theta: &MpReal) -> MpComplex {
        MpComplex::new(self.cos(theta), self.sin(theta))
    }
}

impl Default for MathCtx {
    fn default() -> Self {
        Self::new()
    }
}

/// A multiprecision real number.
#[derive(Clone)]
pub struct MpReal(BigFloat);

impl MpReal {
    pub fn zero(prec: Precision) -> Self {
        Self(BigFloat::from_u8(0, prec.bits()))
    }

    pub fn one(prec: Precision) -> Self {
        Self(BigFloat::from_u8(1, prec.bits()))
    }

    /// Exact conversion of a finite `f64`.
    pub fn from_f64(x: f64, prec: Precision) -> Self {
        Self(BigFloat::from_f64(x, prec.bits()))
    }

    pub fn from_i64(n: i64, prec: Precision) -> Self {
        Self(BigFloat::from_i64(n, prec.bits()))
    }

    /// `num / den` rounded to `prec`.
    pub fn ratio(num: i64, den: i64, prec: Precision) -> Self {
        let p = prec.bits();
        Self(BigFloat::from_i64(num, p).div(&BigFloat::from_i64(den, p), p, RM))
    }

    /// `10^k`, exact for `k >= 0` within the mantissa width.
    pub fn pow10(k: i32, prec: Precision) -> Self {
        let p = prec.bits();
        let ten = BigFloat::from_u8(10, p);
        let m = ten.powi(k.unsigned_abs() as usize, p, RM);
        if k >= 0 {
            Self(m)
        } else {
            Self(m.reciprocal(p, RM))
        }
    }

    pub fn pi(prec: Precision) -> Self {
        MathCtx::new().pi(prec)
    }

    /// Parses a decimal literal such as `"1.5e-3"`.
    pub fn parse(s: &str, prec: Precision) -> Result<Self> {
        let mut cc = Consts::new().expect("allocating constant cache");
        let v = BigFloat::parse(s, astro_float::Radix::Dec, prec.bits(), RM, &mut cc);
        if v.is_nan() || v.is_inf() {
            return Err(Error::InvalidArgument(format!("not a finite number: {s:?}")));
        }
        Ok(Self(v))
    }

    /// Mantissa width in bits.
    pub fn bits(&self) -> usize {
        self.0.mantissa_max_bit_len().filter(|&b| b > 0).unwrap_or(64)
    }

    /// Returns the value rounded to a different precision.
    pub fn with_precision(&self, prec: Precision) -> Self {
        let mut v = self.0.clone();
        // Only fails for NaN/Inf, which are still representable afterwards.
        let _ = v.set_precision(prec.bits(), RM);
        Self(v)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !self.0.is_nan() && !self.0.is_inf()
    }

    pub fn is_negative(&self) -> bool {
        !self.0.is_zero() && self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Self(self.0.abs())
    }

    pub fn sqrt(&self) -> Self {
        Self(self.0.sqrt(self.bits(), RM))
    }

    pub fn recip(&self) -> Self {
        Self(self.0.reciprocal(self.bits(), RM))
    }

    pub fn powi(&self, n: usize) -> Self {
        Self(self.0.powi(n, self.bits(), RM))
    }

    pub fn sin(&self) -> Self {
        MathCtx::new().sin(self)
    }

    pub fn cos(&self) -> Self {
        MathCtx::new().cos(self)
    }

    pub fn exp(&self) -> Self {
        MathCtx::new().exp(self)
    }

    pub fn ln(&self) -> Self {
        MathCtx::new().ln(self)
    }

    pub fn log10(&self) -> Self {
        MathCtx::new().log10(self)
    }

    pub fn mul_i64(&self, n: i64) -> Self {
        let p = self.bits();
        Self(self.0.mul(&BigFloat::from_i64(n, p), p, RM))
    }

    pub fn div_i64(&self, n: i64) -> Self {
        let p = self.bits();
        Self(self.0.div(&BigFloat::from_i64(n, p), p, RM))
    }

    pub fn max(&self, other: &Self) -> Self {
        if other > self {
            other.clone()
        } else {
            self.clone()
        }
    }

    pub fn min(&self, other: &Self) -> Self {
        if other < self {
            other.clone()
        } else {
            self.clone()
        }
    }

    /// Nearest `f64`; underflows to zero and overflows to infinity like a cast.
    pub fn to_f64(&self) -> f64 {
        if self.0.is_nan() {
            return f64::NAN;
        }
        if self.0.is_inf() {
            return if self.0.is_inf_pos() { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        let Some((words, _, sign, e, _)) = self.0.as_raw_parts() else {
            return f64::NAN;
        };
        if self.0.is_zero() || words.is_empty() {
            return 0.0;
        }
        // value = 0.m × 2^e with the most significant word last.
        let n = words.len();
        let hi = words[n - 1] as f64;
        let lo = if n >= 2 { words[n - 2] as f64 } else { 0.0 };
        let mant = (hi + lo * libm::ldexp(1.0, -64)) * libm::ldexp(1.0, -64);
        let v = libm::ldexp(mant, e);
        match sign {
            Sign::Neg => -v,
            Sign::Pos => v,
        }
    }

    /// `log10 |x|` as an `f64`, valid far outside the `f64` exponent range.
    ///
    /// Returns `-inf` for zero.
    pub fn log10_abs_f64(&self) -> f64 {
        if self.0.is_zero() {
            return f64::NEG_INFINITY;
        }
        let Some((words, _, _, e, _)) = self.0.as_raw_parts() else {
            return f64::NAN;
        };
        let n = words.len();
        let hi = words[n - 1] as f64;
        let lo = if n >= 2 { words[n - 2] as f64 } else { 0.0 };
        let mant = (hi + lo * libm::ldexp(1.0, -64)) * libm::ldexp(1.0, -64);
        libm::log10(mant) + e as f64 * core::f64::consts::LOG10_2
    }

    /// Scientific notation with `sig` significant digits, e.g. `-1.2500e-61`.
    pub fn to_sci(&self, sig: usize) -> String {
        let sig = sig.max(1);
        if self.0.is_zero() {
            return format!("{:.*}e0", sig - 1, 0.0);
        }
        if !self.is_finite() {
            return format!("{}", self.to_f64());
        }
        let l = self.log10_abs_f64();
        let mut d = libm::floor(l) as i32;
        let prec = Precision { digits: (sig as u32 + 10).max(Precision::MIN_DIGITS) };
        let x = self.with_precision(prec);
        let mut m = (&x * &MpReal::pow10(-d, prec)).to_f64();
        // Rounding to `sig` digits can carry into the next decade.
        let scale = libm::pow(10.0, (sig - 1) as f64);
        let rounded = libm::round(m.abs() * scale) / scale;
        if rounded >= 10.0 {
            d += 1;
            m /= 10.0;
        } else if rounded < 1.0 {
            d -= 1;
            m *= 10.0;
        }
        format!("{:.*}e{}", sig - 1, m, d)
    }
}

impl fmt::Debug for MpReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci(20))
    }
}

impl fmt::Display for MpReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sig = f.precision().map(|p| p + 1).unwrap_or(17);
        f.pad(&self.to_sci(sig))
    }
}

impl PartialEq for MpReal {
    fn eq(&self, other: &Self) -> bool {
        self.0.cmp(&other.0) == Some(0)
    }
}

impl PartialOrd for MpReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.cmp(&other.0).map(|c| c.cmp(&0))
    }
}

macro_rules! real_binop {
    ($tr:ident, $m:ident, $op:ident) => {
        impl $tr<&MpReal> for &MpReal {
            type Output = MpReal;
            fn $m(self, rhs: &MpReal) -> MpReal {
                let p = self.bits().max(rhs.bits());
                MpReal(self.0.$op(&rhs.0, p, RM))
            }
        }
        impl $tr<MpReal> for MpReal {
            type Output = MpReal;
            fn $m(self, rhs: MpReal) -> MpReal {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&MpReal> for MpReal {
            type Output = MpReal;
            fn $m(self, rhs: &MpReal) -> MpReal {
                (&self).$m(rhs)
            }
        }
        impl $tr<MpReal> for &MpReal {
            type Output = MpReal;
            fn $m(self, rhs: MpReal) -> MpReal {
                self.$m(&rhs)
            }
        }
    };
}

real_binop!(Add, add, add);
real_binop!(Sub, sub, sub);
real_binop!(Mul, mul, mul);
real_binop!(Div, div, div);

impl AddAssign<&MpReal> for MpReal {
    fn add_assign(&mut self, rhs: &MpReal) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&MpReal> for MpReal {
    fn sub_assign(&mut self, rhs: &MpReal) {
        *self = &*self - rhs;
    }
}

impl MulAssign<&MpReal> for MpReal {
    fn mul_assign(&mut self, rhs: &MpReal) {
        *self = &*self * rhs;
    }
}

impl Neg for MpReal {
    type Output = MpReal;
    fn neg(self) -> MpReal {
        MpReal(BigFloat::neg(&self.0))
    }
}

impl Neg for &MpReal {
    type Output = MpReal;
    fn neg(self) -> MpReal {
        MpReal(BigFloat::neg(&self.0))
    }
}

/// A multiprecision complex number in Cartesian form.
#[derive(Clone, PartialEq)]
pub struct MpComplex {
    pub re: MpReal,
    pub im: MpReal,
}

impl MpComplex {
    pub fn new(re: MpReal, im: MpReal) -> Self {
        Self { re, im }
    }

    pub fn zero(prec: Precision) -> Self {
        Self::new(MpReal::zero(prec), MpReal::zero(prec))
    }

    pub fn one(prec: Precision) -> Self {
        Self::new(MpReal::one(prec), MpReal::zero(prec))
    }

    pub fn i(prec: Precision) -> Self {
        Self::new(MpReal::zero(prec), MpReal::one(prec))
    }

    pub fn from_real(re: MpReal) -> Self {
        let im = MpReal(BigFloat::from_u8(0, re.bits()));
        Self { re, im }
    }

    pub fn from_f64(re: f64, im: f64, prec: Precision) -> Self {
        Self::new(MpReal::from_f64(re, prec), MpReal::from_f64(im, prec))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -&self.im)
    }

    pub fn norm_sqr(&self) -> MpReal {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }

    pub fn abs(&self) -> MpReal {
        if self.im.is_zero() {
            return self.re.abs();
        }
        if self.re.is_zero() {
            return self.im.abs();
        }
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, k: &MpReal) -> Self {
        Self::new(&self.re * k, &self.im * k)
    }

    /// Multiplication by `i`.
    pub fn mul_i(&self) -> Self {
        Self::new(-&self.im, self.re.clone())
    }

    pub fn div_real(&self, k: &MpReal) -> Self {
        Self::new(&self.re / k, &self.im / k)
    }

    pub fn recip(&self) -> Self {
        let n = self.norm_sqr();
        Self::new(&self.re / &n, -(&self.im / &n))
    }
}

impl fmt::Debug for MpComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?} + {:?}i)", self.re, self.im)
    }
}

impl fmt::Display for MpComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i)", self.re, self.im)
    }
}

impl Add<&MpComplex> for &MpComplex {
    type Output = MpComplex;
    fn add(self, rhs: &MpComplex) -> MpComplex {
        MpComplex::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub<&MpComplex> for &MpComplex {
    type Output = MpComplex;
    fn sub(self, rhs: &MpComplex) -> MpComplex {
        MpComplex::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul<&MpComplex> for &MpComplex {
    type Output = MpComplex;
    fn mul(self, rhs: &MpComplex) -> MpComplex {
        // Pulse and Pauli matrices are full of exact zeros and reals.
        if self.im.is_zero() && rhs.im.is_zero() {
            return MpComplex::from_real(&self.re * &rhs.re);
        }
        let re = &(&self.re * &rhs.re) - &(&self.im * &rhs.im);
        let im = &(&self.re * &rhs.im) + &(&self.im * &rhs.re);
        MpComplex::new(re, im)
    }
}

impl Div<&MpComplex> for &MpComplex {
    type Output = MpComplex;
    fn div(self, rhs: &MpComplex) -> MpComplex {
        self * &rhs.recip()
    }
}

impl Add for MpComplex {
    type Output = MpComplex;
    fn add(self, rhs: MpComplex) -> MpComplex {
        &self + &rhs
    }
}

impl Sub for MpComplex {
    type Output = MpComplex;
    fn sub(self, rhs: MpComplex) -> MpComplex {
        &self - &rhs
    }
}

impl Mul for MpComplex {
    type Output = MpComplex;
    fn mul(self, rhs: MpComplex) -> MpComplex {
        &self * &rhs
    }
}

impl AddAssign<&MpComplex> for MpComplex {
    fn add_assign(&mut self, rhs: &MpComplex) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&MpComplex> for MpComplex {
    fn sub_assign(&mut self, rhs: &MpComplex) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl Neg for &MpComplex {
    type Output = MpComplex;
    fn neg(self) -> MpComplex {
        MpComplex::new(-&self.re, -&self.im)
    }
}

impl Neg for MpComplex {
    type Output = MpComplex;
    fn neg(self) -> MpComplex {
        -&self
    }
}
