//! Arbitrary-precision rational scalars and binomial coefficients.
//!
//! Every closed-form quantity in this crate (rates, eigenvalues, eigenvector
//! components, equilibrium probabilities) is an exact rational. Floating
//! point enters only where `exp(lambda t)` is evaluated (see
//! [`crate::dynamics`]) and inside the Monte Carlo simulator.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::Error;

/// An exact rational number in canonical form: positive denominator,
/// `gcd(|numer|, denom) = 1`, zero represented as `0/1`.
///
/// Canonicalization is maintained by the underlying big-rational arithmetic
/// after every operation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    /// Canonicalizes `numer/denom`. Fails on a zero denominator.
    pub fn new(numer: i64, denom: i64) -> Result<Self, Error> {
        if denom == 0 {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self(BigRational::new(
            BigInt::from(numer),
            BigInt::from(denom),
        )))
    }

    /// Canonicalizes a big-integer pair. Fails on a zero denominator.
    pub fn from_bigints(numer: BigInt, denom: BigInt) -> Result<Self, Error> {
        if denom.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self(BigRational::new(numer, denom)))
    }

    pub fn from_int(value: i64) -> Self {
        Self(BigRational::from_integer(BigInt::from(value)))
    }

    pub fn from_bigint(value: BigInt) -> Self {
        Self(BigRational::from_integer(value))
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn one() -> Self {
        Self(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Self(self.0.abs())
    }

    /// Integer power with the convention `x^0 = 1` for every `x`, including
    /// zero. Negative exponents invert; a negative exponent of zero panics.
    pub fn pow(&self, exp: i64) -> Self {
        if exp == 0 {
            return Self::one();
        }
        if self.is_zero() && exp < 0 {
            panic!("negative power of zero");
        }
        let exp = i32::try_from(exp).expect("exponent out of range");
        Self(self.0.clone().pow(exp))
    }

    /// Multiplicative inverse. Panics on zero; callers check first.
    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        Self(self.0.recip())
    }

    /// Nearest `f64`. The single point where exactness is given up.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// The exact rational value of a finite `f64` (every finite float is a
    /// dyadic rational). Fails on NaN and infinities.
    pub fn from_f64_exact(value: f64) -> Result<Self, Error> {
        BigRational::from_float(value)
            .map(Self)
            .ok_or_else(|| Error::ParseRational(value.to_string()))
    }

    /// Canonical `"numer/denom"` form, denominator always present.
    /// This is the wire format used by every JSON schema in the crate.
    pub fn canonical_string(&self) -> String {
        format!("{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

/// Accepts `"num/den"`, plain integers, and exact base-10 decimal strings
/// (optionally with an `e` exponent): `"7/3"`, `"-4"`, `"0.25"`, `"2.5e-3"`.
/// Base-2 float syntax is deliberately not supported; decimal conversion is
/// exact by construction.
impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let bad = || Error::ParseRational(s.to_string());
        if s.is_empty() {
            return Err(bad());
        }
        if let Some((num, den)) = s.split_once('/') {
            let numer = BigInt::from_str(num.trim()).map_err(|_| bad())?;
            let denom = BigInt::from_str(den.trim()).map_err(|_| bad())?;
            return Self::from_bigints(numer, denom);
        }
        // Decimal form: [sign] digits [. digits] [e [sign] digits]
        let (mantissa, exp10) = match s.split_once(['e', 'E']) {
            Some((m, e)) => (m, i64::from_str(e).map_err(|_| bad())?),
            None => (s, 0),
        };
        let (int_part, frac_part) = match mantissa.split_once('.') {
            Some((i, f)) => (i, f),
            None => (mantissa, ""),
        };
        if frac_part.contains(['+', '-']) {
            return Err(bad());
        }
        let digits = format!("{int_part}{frac_part}");
        if digits.is_empty() || digits == "+" || digits == "-" {
            return Err(bad());
        }
        let numer = BigInt::from_str(&digits).map_err(|_| bad())?;
        let shift = exp10 - frac_part.len() as i64;
        let ten = BigInt::from(10);
        if shift >= 0 {
            Ok(Self::from_bigint(numer * ten.pow(shift as u32)))
        } else {
            Self::from_bigints(numer, ten.pow((-shift) as u32))
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.canonical_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($Op:ident, $op:ident, $OpAssign:ident, $op_assign:ident) => {
        impl $Op for Rational {
            type Output = Rational;
            fn $op(self, rhs: Rational) -> Rational {
                Rational((self.0).$op(rhs.0))
            }
        }

        impl $Op<&Rational> for Rational {
            type Output = Rational;
            fn $op(self, rhs: &Rational) -> Rational {
                Rational((self.0).$op(&rhs.0))
            }
        }

        impl $Op<Rational> for &Rational {
            type Output = Rational;
            fn $op(self, rhs: Rational) -> Rational {
                Rational((&self.0).$op(rhs.0))
            }
        }

        impl $Op<&Rational> for &Rational {
            type Output = Rational;
            fn $op(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$op(&rhs.0))
            }
        }

        impl $OpAssign for Rational {
            fn $op_assign(&mut self, rhs: Rational) {
                (self.0).$op_assign(rhs.0);
            }
        }

        impl $OpAssign<&Rational> for Rational {
            fn $op_assign(&mut self, rhs: &Rational) {
                (self.0).$op_assign(&rhs.0);
            }
        }
    };
}

forward_binop!(Add, add, AddAssign, add_assign);
forward_binop!(Sub, sub, SubAssign, sub_assign);
forward_binop!(Mul, mul, MulAssign, mul_assign);
forward_binop!(Div, div, DivAssign, div_assign);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl From<i64> for Rational {
    fn from(value: i64) -> Self {
        Self::from_int(value)
    }
}

impl PartialOrd<i64> for Rational {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        self.0
            .partial_cmp(&BigRational::from_integer(BigInt::from(*other)))
    }
}

impl PartialEq<i64> for Rational {
    fn eq(&self, other: &i64) -> bool {
        self.0 == BigRational::from_integer(BigInt::from(*other))
    }
}

/// Binomial coefficient `C(n, k)` with the vanishing convention: any lower
/// index outside `0..=n` yields zero. Summation bounds throughout the
/// eigenvector formulas rely on out-of-range terms silently dropping out.
pub fn binom(n: u64, k: i64) -> BigInt {
    if k < 0 || k as u64 > n {
        return BigInt::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigInt::one();
    for i in 1..=k {
        acc = acc * BigInt::from(n - k + i) / BigInt::from(i);
    }
    acc
}

/// `binom` lifted to an exact scalar.
pub fn binom_rational(n: u64, k: i64) -> Rational {
    Rational::from_bigint(binom(n, k))
}
