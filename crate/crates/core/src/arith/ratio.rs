use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Non-negative rational in lowest terms with a positive denominator.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactRatio(Ratio<BigUint>);

impl ExactRatio {
    /// Panics on a zero denominator.
    pub fn new(numerator: impl Into<BigUint>, denominator: impl Into<BigUint>) -> Self {
        ExactRatio(Ratio::new(numerator.into(), denominator.into()))
    }

    pub fn from_integer(value: impl Into<BigUint>) -> Self {
        ExactRatio(Ratio::from_integer(value.into()))
    }

    pub fn one() -> Self {
        ExactRatio(Ratio::one())
    }

    pub fn numerator(&self) -> &BigUint {
        self.0.numer()
    }

    pub fn denominator(&self) -> &BigUint {
        self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// The integer value when the denominator is 1.
    pub fn to_integer(&self) -> Option<BigUint> {
        self.is_integer().then(|| self.0.numer().clone())
    }

    pub fn pow(&self, exponent: u32) -> Self {
        ExactRatio(Ratio::new_raw(
            num_traits::Pow::pow(self.0.numer(), exponent),
            num_traits::Pow::pow(self.0.denom(), exponent),
        ))
    }

    /// `1 - self`, for values in [0, 1].
    pub fn complement(&self) -> Option<Self> {
        if self.0 > Ratio::one() {
            return None;
        }
        Some(ExactRatio(Ratio::one() - self.0.clone()))
    }

    /// Strictly between 0 and 1.
    pub fn is_proper_fraction(&self) -> bool {
        !self.0.is_zero() && self.0 < Ratio::one()
    }

    /// Nearest `f64`, for display only.
    pub fn approx(&self) -> f64 {
        use num_traits::ToPrimitive;
        let scale = 1u64 << 52;
        let scaled: BigUint = self.0.numer() * scale / self.0.denom();
        scaled.to_f64().unwrap_or(f64::INFINITY) / scale as f64
    }
}

impl Mul for &ExactRatio {
    type Output = ExactRatio;

    fn mul(self, rhs: &ExactRatio) -> ExactRatio {
        ExactRatio(&self.0 * &rhs.0)
    }
}

impl Mul for ExactRatio {
    type Output = ExactRatio;

    fn mul(self, rhs: ExactRatio) -> ExactRatio {
        ExactRatio(self.0 * rhs.0)
    }
}

impl fmt::Display for ExactRatio {
    /// Always `numerator/denominator`, including `5/1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl FromStr for ExactRatio {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::PreconditionViolated(format!("not a ratio: {s:?}"));
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let num: BigUint = num.parse().map_err(|_| bad())?;
        let den: BigUint = den.parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        Ok(ExactRatio::new(num, den))
    }
}

impl Serialize for ExactRatio {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_and_orders() {
        let r = ExactRatio::new(28u32, 12u32);
        assert_eq!(r.to_string(), "7/3");
        assert!(ExactRatio::new(2u32, 1u32) < r);
        assert!(r < ExactRatio::from_integer(3u32));
        assert_eq!(ExactRatio::new(10u32, 2u32).to_integer(), Some(BigUint::from(5u32)));
    }

    #[test]
    fn arithmetic() {
        let a = ExactRatio::new(3u32, 2u32);
        assert_eq!(a.pow(5).to_string(), "243/32");
        assert_eq!((&a * &ExactRatio::new(2u32, 9u32)).to_string(), "1/3");
        assert_eq!("9/10".parse::<ExactRatio>().unwrap().complement().unwrap().to_string(), "1/10");
        assert!("3/0".parse::<ExactRatio>().is_err());
        assert!((ExactRatio::new(7u32, 3u32).approx() - 7.0 / 3.0).abs() < 1e-12);
    }
}
