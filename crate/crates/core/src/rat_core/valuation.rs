use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

use super::{is_prime, Rational};
use crate::error::{Error, Result};

/// The exponent of a prime in a rational number. `v_p(0)` is `Infinite`.
///
/// Ordering puts every finite value below `Infinite`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_zero(self) -> bool {
        self == Valuation::Finite(0)
    }

    /// Strictly positive and finite.
    pub fn is_positive_finite(self) -> bool {
        matches!(self, Valuation::Finite(v) if v > 0)
    }

    pub fn is_nonnegative(self) -> bool {
        self >= Valuation::Finite(0)
    }

    /// `v(xy) = v(x) + v(y)` with the obvious rule for infinity.
    pub fn plus(self, other: Valuation) -> Valuation {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Valuation::Finite(v) => s.serialize_i64(*v),
            Valuation::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Valuation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Valuation::Finite(v)),
            Raw::Text(t) if t == "inf" => Ok(Valuation::Infinite),
            Raw::Text(t) => t
                .parse()
                .map(Valuation::Finite)
                .map_err(|_| D::Error::custom(format!("invalid valuation {t:?}"))),
        }
    }
}

/// Exponent of `p` in the nonzero integer `n`; `Infinite` for zero.
pub fn valuation_of_integer(n: &BigInt, p: &BigInt) -> Valuation {
    if n.is_zero() {
        return Valuation::Infinite;
    }
    let mut count = 0i64;
    let mut m = n.clone();
    loop {
        let (quot, rem) = m.div_rem(p);
        if !rem.is_zero() {
            break;
        }
        m = quot;
        count += 1;
    }
    Valuation::Finite(count)
}

/// `v_p(x)` for a caller that already knows `p` is prime.
pub(crate) fn valuation_unchecked(x: &Rational, p: &BigInt) -> Valuation {
    if x.numer().is_zero() {
        return Valuation::Infinite;
    }
    if x.denom().is_one() {
        return valuation_of_integer(x.numer(), p);
    }
    let num = valuation_of_integer(x.numer(), p).finite().unwrap_or(0);
    let den = valuation_of_integer(x.denom(), p).finite().unwrap_or(0);
    Valuation::Finite(num - den)
}

/// The exact exponent of the prime `p` in `x`.
pub fn valuation(x: &Rational, p: &BigInt) -> Result<Valuation> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p.clone()));
    }
    Ok(valuation_unchecked(x, p))
}
