//! Exact dyadic rationals: integers divided by a power of two.
//!
//! Every probability that appears when analysing boolean functions under the
//! uniform distribution on `{0,1}^n` has a power-of-two denominator, so this
//! one representation carries all statistics (influence, variance, error,
//! cost, score) without ever rounding.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

/// `numerator / 2^log2_denominator`, kept canonical: the numerator is odd or
/// zero, and zero always has exponent 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    numerator: BigInt,
    log2_denominator: u32,
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

impl std::str::FromStr for Dyadic {
    type Err = String;

    /// Parses the `Display` form: `<int>` or `<int>/2^<exp>`.
    fn from_str(s: &str) -> Result<Self, String> {
        let (num, exp) = match s.split_once("/2^") {
            Some((n, e)) => (n, e.parse::<u32>().map_err(|e| e.to_string())?),
            None => (s, 0),
        };
        let numerator = num.parse::<BigInt>().map_err(|e| e.to_string())?;
        Ok(Dyadic::new(numerator, exp))
    }
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic {
            numerator: BigInt::zero(),
            log2_denominator: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic {
            numerator: BigInt::one(),
            log2_denominator: 0,
        }
    }

    pub fn from_int(n: i64) -> Self {
        Dyadic::new(BigInt::from(n), 0)
    }

    /// `numerator / 2^log2_denominator`, canonicalized.
    pub fn new(numerator: BigInt, log2_denominator: u32) -> Self {
        let mut d = Dyadic {
            numerator,
            log2_denominator,
        };
        d.canonicalize();
        d
    }

    /// Ratio of a (possibly signed) count out of `2^log2_denominator` outcomes.
    pub fn ratio(count: i64, log2_denominator: u32) -> Self {
        Dyadic::new(BigInt::from(count), log2_denominator)
    }

    fn canonicalize(&mut self) {
        if self.numerator.is_zero() {
            self.log2_denominator = 0;
            return;
        }
        if let Some(tz) = self.numerator.trailing_zeros() {
            let shift = (tz as u32).min(self.log2_denominator);
            if shift > 0 {
                self.numerator >>= shift;
                self.log2_denominator -= shift;
            }
        }
    }

    pub fn numerator(&self) -> &BigInt {
        &self.numerator
    }

    pub fn log2_denominator(&self) -> u32 {
        self.log2_denominator
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.numerator.is_negative()
    }

    /// Exact multiplication by 2^-k.
    pub fn div_pow2(&self, k: u32) -> Self {
        Dyadic::new(self.numerator.clone(), self.log2_denominator + k)
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            numerator: self.numerator.abs(),
            log2_denominator: self.log2_denominator,
        }
    }

    pub fn to_f64(&self) -> f64 {
        let num = self.numerator.to_f64().unwrap_or(f64::NAN);
        num / 2f64.powi(self.log2_denominator as i32)
    }

    /// Exact comparison against an arbitrary rational `p/q`, `q > 0`.
    pub fn cmp_ratio(&self, p: i64, q: u64) -> Ordering {
        let lhs = &self.numerator * BigInt::from(q);
        let rhs = BigInt::from(p) << self.log2_denominator;
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.log2_denominator == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/2^{}", self.numerator, self.log2_denominator)
        }
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        let k = self.log2_denominator.max(rhs.log2_denominator);
        let a = &self.numerator << (k - self.log2_denominator);
        let b = &rhs.numerator << (k - rhs.log2_denominator);
        Dyadic::new(a + b, k)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        let k = self.log2_denominator.max(rhs.log2_denominator);
        let a = &self.numerator << (k - self.log2_denominator);
        let b = &rhs.numerator << (k - rhs.log2_denominator);
        Dyadic::new(a - b, k)
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(
            &self.numerator * &rhs.numerator,
            self.log2_denominator + rhs.log2_denominator,
        )
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            numerator: -self.numerator.clone(),
            log2_denominator: self.log2_denominator,
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let k = self.log2_denominator.max(other.log2_denominator);
        let a = &self.numerator << (k - self.log2_denominator);
        let b = &other.numerator << (k - other.log2_denominator);
        a.cmp(&b)
    }
}
