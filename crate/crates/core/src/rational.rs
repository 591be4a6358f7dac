//! Exact rational arithmetic with `"p/q"` string serialization.
//!
//! Every quantity in this crate is an exact rational; there is no floating
//! point anywhere on a decision path. Values serialize canonically as `"p"`
//! when the denominator is one and `"p/q"` otherwise, so serialized artifacts
//! round-trip bit-exactly.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

/// Arbitrary-precision rational, stored reduced with positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rat(BigRational);

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RatParseError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid integer in rational literal: {0}")]
    BadInteger(String),
    #[error("zero denominator in rational literal")]
    ZeroDenominator,
}

impl Rat {
    /// Exact rational `numer/denom`. Panics if `denom == 0`.
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rat(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn int(n: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn from_bigints(numer: BigInt, denom: BigInt) -> Result<Self, RatParseError> {
        if denom.is_zero() {
            return Err(RatParseError::ZeroDenominator);
        }
        Ok(Rat(BigRational::new(numer, denom)))
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

    pub fn abs(&self) -> Rat {
        Rat(self.0.abs())
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn recip(&self) -> Rat {
        assert!(!self.is_zero(), "reciprocal of zero");
        Rat(self.0.recip())
    }

    /// `1 / 2^k`.
    pub fn pow2_neg(k: u32) -> Rat {
        Rat(BigRational::new(BigInt::one(), BigInt::one() << k))
    }

    /// `self^k` for small non-negative exponents.
    pub fn pow(&self, k: u32) -> Rat {
        let mut acc = Rat::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Decimal approximation with `sig` significant digits (half-up),
    /// trailing zeros trimmed. Exact shorter decimals print exactly.
    pub fn decimal(&self, sig: usize) -> String {
        assert!(sig > 0);
        if self.is_zero() {
            return "0".to_string();
        }
        let neg = self.is_negative();
        let n = self.numer().abs();
        let d = self.denom().clone();

        // exponent e with 10^e <= n/d < 10^(e+1)
        let digit_gap = n.to_string().len() as i64 - d.to_string().len() as i64;
        let mut e = digit_gap;
        let cmp_pow10 = |e: i64| -> Ordering {
            // compare n/d with 10^e
            if e >= 0 {
                n.cmp(&(&d * BigInt::from(10u32).pow(e as u32)))
            } else {
                (&n * BigInt::from(10u32).pow((-e) as u32)).cmp(&d)
            }
        };
        while cmp_pow10(e) == Ordering::Less {
            e -= 1;
        }
        while cmp_pow10(e + 1) != Ordering::Less {
            e += 1;
        }

        let shift = sig as i64 - 1 - e;
        let (num_scaled, den_scaled) = if shift >= 0 {
            (&n * BigInt::from(10u32).pow(shift as u32), d)
        } else {
            (n.clone(), &d * BigInt::from(10u32).pow((-shift) as u32))
        };
        // round half-up
        let q = (num_scaled * 2u32 + &den_scaled) / (den_scaled * 2u32);
        let mut digits = q.to_string();
        let mut int_len = e + 1;
        if digits.len() > sig {
            // rounding carried into one more digit (e.g. 999.. -> 1000..)
            digits.truncate(sig);
            int_len += 1;
        }

        let mut out = String::new();
        if neg {
            out.push('-');
        }
        if int_len >= digits.len() as i64 {
            out.push_str(&digits);
            for _ in 0..(int_len - digits.len() as i64) {
                out.push('0');
            }
        } else if int_len >= 1 {
            out.push_str(&digits[..int_len as usize]);
            out.push('.');
            out.push_str(&digits[int_len as usize..]);
        } else {
            out.push_str("0.");
            for _ in 0..(-int_len) {
                out.push('0');
            }
            out.push_str(&digits);
        }
        if out.contains('.') {
            while out.ends_with('0') {
                out.pop();
            }
            if out.ends_with('.') {
                out.pop();
            }
        }
        out
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl FromStr for Rat {
    type Err = RatParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(RatParseError::Empty);
        }
        let (np, dp) = match s.split_once('/') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (s, "1"),
        };
        let n = BigInt::from_str(np).map_err(|_| RatParseError::BadInteger(np.to_string()))?;
        let d = BigInt::from_str(dp).map_err(|_| RatParseError::BadInteger(dp.to_string()))?;
        Rat::from_bigints(n, d)
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

macro_rules! rat_binop {
    ($tr:ident, $m:ident) => {
        impl $tr for Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat {
                Rat((self.0).$m(rhs.0))
            }
        }
        impl<'a> $tr<&'a Rat> for Rat {
            type Output = Rat;
            fn $m(self, rhs: &'a Rat) -> Rat {
                Rat((self.0).$m(&rhs.0))
            }
        }
        impl<'a> $tr<Rat> for &'a Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat {
                Rat((&self.0).$m(rhs.0))
            }
        }
        impl<'a, 'b> $tr<&'b Rat> for &'a Rat {
            type Output = Rat;
            fn $m(self, rhs: &'b Rat) -> Rat {
                Rat((&self.0).$m(&rhs.0))
            }
        }
    };
}

rat_binop!(Add, add);
rat_binop!(Sub, sub);
rat_binop!(Mul, mul);
rat_binop!(Div, div);

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

/// Shorthand used throughout tests: parse a rational literal.
pub fn rat(s: &str) -> Rat {
    s.parse().expect("rational literal")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_and_display_are_canonical() {
        assert_eq!(rat("2/4").to_string(), "1/2");
        assert_eq!(rat("-2/-4").to_string(), "1/2");
        assert_eq!(rat("3/-6").to_string(), "-1/2");
        assert_eq!(rat("7").to_string(), "7");
        assert_eq!(rat("0/5").to_string(), "0");
    }

    #[test]
    fn parse_rejects_zero_denominator() {
        assert_eq!("1/0".parse::<Rat>(), Err(RatParseError::ZeroDenominator));
    }

    #[test]
    fn arithmetic_is_exact() {
        let a = rat("1/3");
        let b = rat("1/6");
        assert_eq!(&a + &b, rat("1/2"));
        assert_eq!(&a - &b, rat("1/6"));
        assert_eq!(&a * &b, rat("1/18"));
        assert_eq!(&a / &b, rat("2"));
    }

    #[test]
    fn decimal_rounding() {
        assert_eq!(rat("1/3").decimal(12), "0.333333333333");
        assert_eq!(rat("2/3").decimal(12), "0.666666666667");
        assert_eq!(rat("1/128").decimal(12), "0.0078125");
        assert_eq!(rat("3").decimal(12), "3");
        assert_eq!(rat("-5/4").decimal(12), "-1.25");
        assert_eq!(rat("999999999999999/1000000000000000").decimal(12), "1");
        assert_eq!(rat("0").decimal(12), "0");
        assert_eq!(rat("10").decimal(3), "10");
    }

    #[test]
    fn pow2_neg_values() {
        assert_eq!(Rat::pow2_neg(0), rat("1"));
        assert_eq!(Rat::pow2_neg(3), rat("1/8"));
    }

    proptest! {
        #[test]
        fn string_round_trip(n in -1000i64..1000, d in 1i64..1000) {
            let r = Rat(BigRational::new(BigInt::from(n), BigInt::from(d)));
            let s = r.to_string();
            prop_assert_eq!(s.parse::<Rat>().unwrap(), r);
        }

        #[test]
        fn add_commutes(a in -100i64..100, b in 1i64..100, c in -100i64..100, d in 1i64..100) {
            let x = Rat::new(a, b);
            let y = Rat::new(c, d);
            prop_assert_eq!(&x + &y, &y + &x);
        }
    }
}
