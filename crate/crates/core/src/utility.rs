use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Exact rational utility. Always in canonical form.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Utility(BigRational);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("malformed utility literal `{0}`")]
pub struct UtilityParseError(pub String);

impl Utility {
    pub fn from_int(n: i64) -> Self {
        Utility(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num/den`; panics when `den` is zero.
    pub fn ratio(num: i64, den: i64) -> Self {
        Utility(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn zero() -> Self {
        Utility(BigRational::zero())
    }

    pub fn one() -> Self {
        Utility(BigRational::one())
    }

    /// `2^e`, exact for negative exponents too.
    pub fn pow2(e: i64) -> Self {
        let mag = BigInt::one() << e.unsigned_abs();
        if e >= 0 {
            Utility(BigRational::from_integer(mag))
        } else {
            Utility(BigRational::new(BigInt::one(), mag))
        }
    }

    pub fn from_rational(r: BigRational) -> Self {
        Utility(r)
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
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

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn abs(&self) -> Utility {
        Utility(self.0.abs())
    }

    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl Add for &Utility {
    type Output = Utility;
    fn add(self, rhs: &Utility) -> Utility {
        Utility(&self.0 + &rhs.0)
    }
}

impl Sub for &Utility {
    type Output = Utility;
    fn sub(self, rhs: &Utility) -> Utility {
        Utility(&self.0 - &rhs.0)
    }
}

impl Mul for &Utility {
    type Output = Utility;
    fn mul(self, rhs: &Utility) -> Utility {
        Utility(&self.0 * &rhs.0)
    }
}

impl Neg for &Utility {
    type Output = Utility;
    fn neg(self) -> Utility {
        Utility(-&self.0)
    }
}

impl From<i64> for Utility {
    fn from(n: i64) -> Self {
        Utility::from_int(n)
    }
}

/// Integers print bare, everything else as `p/q`.
impl fmt::Display for Utility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

/// Accepts `-12`, `0.5`, `-3.25`, `7/3`.
impl FromStr for Utility {
    type Err = UtilityParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || UtilityParseError(s.to_string());
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
        let value = if let Some((n, d)) = body.split_once('/') {
            if !digits(n) || !digits(d) {
                return Err(bad());
            }
            let d: BigInt = d.parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            BigRational::new(n.parse().map_err(|_| bad())?, d)
        } else if let Some((i, frac)) = body.split_once('.') {
            if !digits(i) || !digits(frac) {
                return Err(bad());
            }
            let scale = BigInt::from(10u32).pow(frac.len() as u32);
            let whole: BigInt = format!("{i}{frac}").parse().map_err(|_| bad())?;
            BigRational::new(whole, scale)
        } else {
            if !digits(body) {
                return Err(bad());
            }
            BigRational::from_integer(body.parse().map_err(|_| bad())?)
        };
        Ok(Utility(if neg { -value } else { value }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimal_and_fraction_exactly() {
        assert_eq!("0.5".parse::<Utility>().unwrap(), Utility::ratio(1, 2));
        assert_eq!("-3.25".parse::<Utility>().unwrap(), Utility::ratio(-13, 4));
        assert_eq!("6/4".parse::<Utility>().unwrap(), Utility::ratio(3, 2));
        assert_eq!("100".parse::<Utility>().unwrap(), Utility::from_int(100));
        for bad in ["", "-", "1/0", "1.", ".5", "a", "1/-2", "--1", "1e3"] {
            assert!(bad.parse::<Utility>().is_err(), "{bad}");
        }
    }

    #[test]
    fn display_is_canonical() {
        assert_eq!(Utility::ratio(2, 4).to_string(), "1/2");
        assert_eq!(Utility::ratio(-6, 3).to_string(), "-2");
        assert_eq!(Utility::pow2(6).to_string(), "64");
        assert_eq!(Utility::pow2(-2).to_string(), "1/4");
    }

    #[test]
    fn comparisons_are_exact() {
        let a = Utility::ratio(1, 3);
        let b: Utility = "0.3333333333333333".parse().unwrap();
        assert!(a > b);
        assert!(a >= a.clone() && a <= a.clone());
    }
}
