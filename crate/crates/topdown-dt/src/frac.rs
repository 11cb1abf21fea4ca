//! A small exact non-negative rational, used for accuracy and confidence
//! parameters (`--eps 1/8` style).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frac {
    pub num: u64,
    pub den: u64,
}

impl Frac {
    pub fn new(num: u64, den: u64) -> Result<Self, Error> {
        if den == 0 {
            return Err(Error::InvalidParams("zero denominator".into()));
        }
        Ok(Frac { num, den })
    }

    pub fn zero() -> Self {
        Frac { num: 0, den: 1 }
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `d < self`, exactly.
    pub fn greater_than(&self, d: &Dyadic) -> bool {
        d.cmp_ratio(self.num as i64, self.den) == std::cmp::Ordering::Less
    }
}

impl fmt::Display for Frac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Frac {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let parse = |t: &str| {
            t.trim().parse::<u64>().map_err(|e| Error::Parse {
                at: format!("fraction {s:?}"),
                msg: e.to_string(),
            })
        };
        match s.split_once('/') {
            Some((a, b)) => Frac::new(parse(a)?, parse(b)?),
            None => Frac::new(parse(s)?, 1),
        }
    }
}
