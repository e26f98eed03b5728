//! Exact scalars over the tower `Q ⊂ Q(i) ⊂ Q(i)(√3)`.
//!
//! A [`Scalar`] is `(a + b·i) + (c + d·i)·√3` with `a, b, c, d` arbitrary
//! precision rationals. Since `√3 ∉ Q(i)` the four coordinates are unique,
//! so equality is component-wise and the sign of a real element is decided
//! by comparing rationals.
//!
//! Text form: `"1/4 + 0/1 i + 1/4 s3 + 0/1 i*s3"`. Zero components may be
//! omitted when parsing; printing omits them and prints `0/1` for zero.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Builds the rational `numer / denom`. Panics if `denom == 0`.
pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// `2^-exp` as an exact rational.
pub fn pow2_neg(exp: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << exp as usize)
}

/// `2^exp` for a possibly negative exponent.
pub fn pow2(exp: i64) -> Rational {
    if exp >= 0 {
        Rational::from_integer(BigInt::one() << exp as usize)
    } else {
        pow2_neg((-exp) as u32)
    }
}

/// Canonical `p/q` text of a rational; the denominator is always printed.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let parsed = match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| Error::Parse(s.to_string()))?;
            let d: BigInt = d.trim().parse().map_err(|_| Error::Parse(s.to_string()))?;
            if d.is_zero() {
                return Err(Error::DivisionByZero);
            }
            Rational::new(n, d)
        }
        None => Rational::from_integer(s.parse().map_err(|_| Error::Parse(s.to_string()))?),
    };
    Ok(parsed)
}

/// Correctly scaled `log2` of a positive rational, robust to values far
/// outside the `f64` exponent range.
pub fn log2_rational(r: &Rational) -> f64 {
    debug_assert!(r.is_positive());
    log2_bigint(r.numer()) - log2_bigint(r.denom())
}

fn log2_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().map(f64::log2).unwrap_or(f64::NAN);
    }
    let shift = bits - 64;
    let top = (n >> shift as usize).to_f64().unwrap_or(f64::NAN);
    top.log2() + shift as f64
}

/// Sign of a real scalar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of(r: &Rational) -> Self {
        if r.is_zero() {
            Sign::Zero
        } else if r.is_positive() {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }
}

/// Element `re + im·i` of `Q(i)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
struct Gaussian {
    re: Rational,
    im: Rational,
}

impl Gaussian {
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn add(&self, o: &Self) -> Self {
        Gaussian { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    fn sub(&self, o: &Self) -> Self {
        Gaussian { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    fn neg(&self) -> Self {
        Gaussian { re: -&self.re, im: -&self.im }
    }

    fn conj(&self) -> Self {
        Gaussian { re: self.re.clone(), im: -&self.im }
    }

    fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Gaussian::default();
        }
        Gaussian {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    fn scale(&self, r: &Rational) -> Self {
        Gaussian { re: &self.re * r, im: &self.im * r }
    }

    fn inv(&self) -> Option<Self> {
        let norm = &self.re * &self.re + &self.im * &self.im;
        if norm.is_zero() {
            return None;
        }
        Some(Gaussian { re: &self.re / &norm, im: -&self.im / &norm })
    }
}

/// Exact element of `Q(i)(√3)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Scalar {
    rat: Gaussian,
    s3: Gaussian,
}

impl Scalar {
    pub fn new(re_rat: Rational, im_rat: Rational, re_s3: Rational, im_s3: Rational) -> Self {
        Scalar {
            rat: Gaussian { re: re_rat, im: im_rat },
            s3: Gaussian { re: re_s3, im: im_s3 },
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    pub fn i() -> Self {
        Self::complex(Rational::zero(), Rational::one())
    }

    pub fn sqrt3() -> Self {
        Self::new(Rational::zero(), Rational::zero(), Rational::one(), Rational::zero())
    }

    pub fn from_rational(r: Rational) -> Self {
        Self::new(r, Rational::zero(), Rational::zero(), Rational::zero())
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(Rational::from_integer(n.into()))
    }

    pub fn from_ratio(numer: i64, denom: i64) -> Self {
        Self::from_rational(ratio(numer, denom))
    }

    /// `re + im·i`.
    pub fn complex(re: Rational, im: Rational) -> Self {
        Self::new(re, im, Rational::zero(), Rational::zero())
    }

    pub fn re_rat(&self) -> &Rational {
        &self.rat.re
    }

    pub fn im_rat(&self) -> &Rational {
        &self.rat.im
    }

    pub fn re_s3(&self) -> &Rational {
        &self.s3.re
    }

    pub fn im_s3(&self) -> &Rational {
        &self.s3.im
    }

    pub fn is_zero(&self) -> bool {
        self.rat.is_zero() && self.s3.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.rat.re.is_one() && self.rat.im.is_zero() && self.s3.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.rat.im.is_zero() && self.s3.im.is_zero()
    }

    /// Membership in `C_q = { x + yi : x, y ∈ Q }`.
    pub fn is_complex_rational(&self) -> bool {
        self.s3.is_zero()
    }

    /// The rational value, if this scalar lies in `Q`.
    pub fn as_rational(&self) -> Option<&Rational> {
        (self.is_real() && self.s3.re.is_zero()).then_some(&self.rat.re)
    }

    pub fn conj(&self) -> Self {
        Scalar { rat: self.rat.conj(), s3: self.s3.conj() }
    }

    pub fn real_part(&self) -> Self {
        Self::new(self.rat.re.clone(), Rational::zero(), self.s3.re.clone(), Rational::zero())
    }

    /// Imaginary part as a real scalar.
    pub fn imag_part(&self) -> Self {
        Self::new(self.rat.im.clone(), Rational::zero(), self.s3.im.clone(), Rational::zero())
    }

    /// `|z|² = z·z̄`, a real scalar.
    pub fn abs_sq(&self) -> Self {
        self * &self.conj()
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Scalar { rat: self.rat.scale(r), s3: self.s3.scale(r) }
    }

    pub fn inv(&self) -> Result<Self> {
        // (p + q√3)^-1 = (p - q√3) / (p² - 3q²); the norm is nonzero for x ≠ 0.
        let three = Rational::from_integer(3.into());
        let norm = self.rat.mul(&self.rat).sub(&self.s3.mul(&self.s3).scale(&three));
        let norm_inv = norm.inv().ok_or(Error::DivisionByZero)?;
        Ok(Scalar { rat: self.rat.mul(&norm_inv), s3: self.s3.neg().mul(&norm_inv) })
    }

    pub fn try_div(&self, other: &Scalar) -> Result<Self> {
        Ok(self * &other.inv()?)
    }

    /// Exact sign of a real scalar `a + b√3`.
    pub fn sign_of_real(&self) -> Result<Sign> {
        if !self.is_real() {
            return Err(Error::NotReal(self.to_string()));
        }
        let a = Sign::of(&self.rat.re);
        let b = Sign::of(&self.s3.re);
        Ok(match (a, b) {
            (_, Sign::Zero) => a,
            (Sign::Zero, _) => b,
            _ if a == b => a,
            _ => {
                // Opposite signs: the larger magnitude wins; a² = 3b² is impossible.
                let a_sq = &self.rat.re * &self.rat.re;
                let b_sq3 = &self.s3.re * &self.s3.re * Rational::from_integer(3.into());
                if a_sq > b_sq3 {
                    a
                } else {
                    b
                }
            }
        })
    }

    /// Compares two real scalars.
    pub fn cmp_real(&self, other: &Scalar) -> Result<std::cmp::Ordering> {
        use std::cmp::Ordering;
        Ok(match (self - other).sign_of_real()? {
            Sign::Negative => Ordering::Less,
            Sign::Zero => Ordering::Equal,
            Sign::Positive => Ordering::Greater,
        })
    }

    pub fn is_nonnegative(&self) -> Result<bool> {
        Ok(self.sign_of_real()? != Sign::Negative)
    }

    pub fn to_f64(&self) -> Result<f64> {
        if !self.is_real() {
            return Err(Error::NotReal(self.to_string()));
        }
        Ok(rational_to_f64(&self.rat.re) + rational_to_f64(&self.s3.re) * 3f64.sqrt())
    }

    /// Floating-point `(re, im)`.
    pub fn to_complex_f64(&self) -> (f64, f64) {
        let s3 = 3f64.sqrt();
        (
            rational_to_f64(&self.rat.re) + rational_to_f64(&self.s3.re) * s3,
            rational_to_f64(&self.rat.im) + rational_to_f64(&self.s3.im) * s3,
        )
    }

    fn components(&self) -> [(&Rational, &'static str); 4] {
        [(&self.rat.re, ""), (&self.rat.im, " i"), (&self.s3.re, " s3"), (&self.s3.im, " i*s3")]
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    r.to_f64().unwrap_or_else(|| {
        let mag = log2_rational(&r.abs()).exp2();
        if r.is_negative() {
            -mag
        } else {
            mag
        }
    })
}

impl From<Rational> for Scalar {
    fn from(r: Rational) -> Self {
        Scalar::from_rational(r)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        Scalar { rat: self.rat.add(&o.rat), s3: self.s3.add(&o.s3) }
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        Scalar { rat: self.rat.sub(&o.rat), s3: self.s3.sub(&o.s3) }
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        let three = Rational::from_integer(3.into());
        let rat = self.rat.mul(&o.rat).add(&self.s3.mul(&o.s3).scale(&three));
        let s3 = self.rat.mul(&o.s3).add(&self.s3.mul(&o.rat));
        Scalar { rat, s3 }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { rat: self.rat.neg(), s3: self.s3.neg() }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

macro_rules! forward_owned_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: &Scalar) -> Scalar {
                (&self).$m(o)
            }
        }
        impl<'a> $tr<Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar {
                self.$m(&o)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, o: &Scalar) {
        *self = &*self + o;
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, o: &Scalar) {
        *self = &*self - o;
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (value, suffix) in self.components() {
            if value.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            write!(f, "{}{}", format_rational(value), suffix)?;
            first = false;
        }
        if first {
            f.write_str("0/1")?;
        }
        Ok(())
    }
}

impl FromStr for Scalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut slots: [Option<Rational>; 4] = Default::default();
        for term in s.split('+') {
            let term = term.trim();
            if term.is_empty() {
                return Err(Error::Parse(format!("empty term in {s:?}")));
            }
            let (number, slot) = if let Some(n) = term.strip_suffix("i*s3") {
                (n, 3)
            } else if let Some(n) = term.strip_suffix("s3") {
                (n, 2)
            } else if let Some(n) = term.strip_suffix('i') {
                (n, 1)
            } else {
                (term, 0)
            };
            if slots[slot].is_some() {
                return Err(Error::Parse(format!("repeated component in {s:?}")));
            }
            slots[slot] = Some(parse_rational(number)?);
        }
        let [a, b, c, d] = slots.map(Option::unwrap_or_default);
        Ok(Scalar::new(a, b, c, d))
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for rationals in `p/q` text form.
pub mod rational_text {
    use super::{format_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}
