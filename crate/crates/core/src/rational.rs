//! Exact rationals and their canonical `"p/q"` string form.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Exact rational number with normalized `"p/q"` serialization.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Q(pub BigRational);

impl Q {
    pub fn zero() -> Self {
        Q(BigRational::zero())
    }

    pub fn one() -> Self {
        Q(BigRational::one())
    }

    pub fn int(n: i64) -> Self {
        Q(BigRational::from_integer(BigInt::from(n)))
    }

    /// Panics if `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        Q(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    /// Smallest integer `>= self`, if it fits in an `i64`.
    pub fn ceil_i64(&self) -> Option<i64> {
        self.0.ceil().to_integer().to_i64()
    }

    /// Largest integer `<= self`, if it fits in an `i64`.
    pub fn floor_i64(&self) -> Option<i64> {
        self.0.floor().to_integer().to_i64()
    }

    pub fn to_i64(&self) -> Option<i64> {
        if self.is_integer() {
            self.0.to_integer().to_i64()
        } else {
            None
        }
    }

    pub fn abs(&self) -> Q {
        Q(self.0.abs())
    }
}

impl From<i64> for Q {
    fn from(n: i64) -> Self {
        Q::int(n)
    }
}

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed rational {0:?}")]
pub struct ParseQError(pub String);

impl FromStr for Q {
    type Err = ParseQError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseQError(s.to_string());
        let t = s.trim();
        match t.split_once('/') {
            None => t.parse::<BigInt>().map(|n| Q(BigRational::from_integer(n))).map_err(|_| bad()),
            Some((p, q)) => {
                let p: BigInt = p.trim().parse().map_err(|_| bad())?;
                let q: BigInt = q.trim().parse().map_err(|_| bad())?;
                if q.is_zero() {
                    return Err(bad());
                }
                Ok(Q(BigRational::new(p, q)))
            }
        }
    }
}

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident) => {
        impl std::ops::$tr for Q {
            type Output = Q;
            fn $m(self, rhs: Q) -> Q {
                Q(std::ops::$tr::$m(self.0, rhs.0))
            }
        }
        impl<'a> std::ops::$tr<&'a Q> for &'a Q {
            type Output = Q;
            fn $m(self, rhs: &'a Q) -> Q {
                Q(std::ops::$tr::$m(&self.0, &rhs.0))
            }
        }
        impl<'a> std::ops::$tr<&'a Q> for Q {
            type Output = Q;
            fn $m(self, rhs: &'a Q) -> Q {
                Q(std::ops::$tr::$m(self.0, &rhs.0))
            }
        }
        impl std::ops::$atr for Q {
            fn $am(&mut self, rhs: Q) {
                std::ops::$atr::$am(&mut self.0, rhs.0)
            }
        }
        impl<'a> std::ops::$atr<&'a Q> for Q {
            fn $am(&mut self, rhs: &'a Q) {
                std::ops::$atr::$am(&mut self.0, &rhs.0)
            }
        }
    };
}

forward_binop!(Add, add, AddAssign, add_assign);
forward_binop!(Sub, sub, SubAssign, sub_assign);
forward_binop!(Mul, mul, MulAssign, mul_assign);
forward_binop!(Div, div, DivAssign, div_assign);

impl std::ops::Neg for Q {
    type Output = Q;
    fn neg(self) -> Q {
        Q(-self.0)
    }
}

impl<'a> std::ops::Neg for &'a Q {
    type Output = Q;
    fn neg(self) -> Q {
        Q(-&self.0)
    }
}

impl std::iter::Sum for Q {
    fn sum<I: Iterator<Item = Q>>(iter: I) -> Q {
        iter.fold(Q::zero(), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_is_normalized() {
        assert_eq!(Q::new(2, 4).to_string(), "1/2");
        assert_eq!(Q::new(-3, 6).to_string(), "-1/2");
        assert_eq!(Q::new(4, -2).to_string(), "-2");
        assert_eq!(Q::zero().to_string(), "0");
    }

    #[test]
    fn parse_round_trip() {
        for s in ["0", "-1", "7/3", "-5/12"] {
            assert_eq!(s.parse::<Q>().unwrap().to_string(), s);
        }
        assert_eq!("6/4".parse::<Q>().unwrap(), Q::new(3, 2));
        assert!("1/0".parse::<Q>().is_err());
        assert!("x".parse::<Q>().is_err());
    }

    #[test]
    fn floor_ceil() {
        assert_eq!(Q::new(-1, 2).ceil_i64(), Some(0));
        assert_eq!(Q::new(-1, 2).floor_i64(), Some(-1));
        assert_eq!(Q::int(3).ceil_i64(), Some(3));
    }
}
