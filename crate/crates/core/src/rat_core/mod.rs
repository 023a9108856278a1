//! Exact arithmetic substrate: rationals, p-adic valuations, primality and
//! integer factorization.
//!
//! Rationals are `num_rational::BigRational`, which already keeps every value
//! in lowest terms with a positive denominator. On the wire they are decimal
//! strings, `"a/b"` or `"a"` when the denominator is one.

mod factor;
mod primality;
mod valuation;

pub use factor::{factor, CofactorStatus, FactorizationResult, FoundBy, PrimeFactor};
pub use primality::{is_prime, is_prime_u64};
pub use valuation::{valuation, valuation_of_integer, Valuation};

pub(crate) use factor::primes_up_to;
pub(crate) use valuation::valuation_unchecked;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::config::FactorConfig;
use crate::error::{Error, Result};

/// The universal scalar.
pub type Rational = BigRational;

pub fn rational_from_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"a"`, `"a/b"` (optionally with a leading `+` or `-`).
pub fn parse_rational(text: &str) -> Result<Rational> {
    let err = || Error::ParseRational(text.to_string());
    let trimmed = text.trim().replace('\u{2212}', "-");
    let (num, den) = match trimmed.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (trimmed.as_str(), "1"),
    };
    let num: BigInt = num.parse().map_err(|_| err())?;
    let den: BigInt = den.parse().map_err(|_| err())?;
    if den.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(num, den))
}

pub fn format_rational(x: &Rational) -> String {
    x.to_string()
}

/// Exact `k`-th root of an integer, if one exists. Negative inputs have a
/// root only for odd `k`.
pub fn exact_integer_root(n: &BigInt, k: u32) -> Option<BigInt> {
    assert!(k >= 1);
    if k == 1 {
        return Some(n.clone());
    }
    if n.is_negative() {
        if k.is_multiple_of(2) {
            return None;
        }
        return exact_integer_root(&-n, k).map(|r| -r);
    }
    let root = n.nth_root(k);
    (root.pow(k) == *n).then_some(root)
}

/// True iff `x = y^k` for some rational `y`.
pub fn is_perfect_power(x: &Rational, k: u32) -> bool {
    exact_integer_root(x.numer(), k).is_some() && exact_integer_root(x.denom(), k).is_some()
}

/// True iff `x = y^2` for some rational `y`.
pub fn is_square(x: &Rational) -> bool {
    is_perfect_power(x, 2)
}

/// Splits a nonzero integer as `n = core * root^2` with `core` squarefree
/// (sign carried by `core`). Needs a complete factorization of `n`.
pub fn squarefree_decomposition(n: &BigInt, config: &FactorConfig) -> Result<(BigInt, BigInt)> {
    if n.is_zero() {
        return Err(Error::InvalidArgument("squarefree part of 0".into()));
    }
    let fact = factor(n, config)?;
    if !fact.complete {
        return Err(Error::IncompleteFactorization(n.clone()));
    }
    let mut core = if n.is_negative() {
        -BigInt::one()
    } else {
        BigInt::one()
    };
    let mut root = BigInt::one();
    for pf in &fact.factors {
        if pf.exponent % 2 == 1 {
            core *= &pf.prime;
        }
        root *= pf.prime.pow(pf.exponent / 2);
    }
    Ok((core, root))
}

/// Serde adapters: rationals as decimal strings.
pub mod serde_rational {
    use super::{format_rational, parse_rational, Rational};
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(D::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(xs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(xs.len()))?;
            for x in xs {
                seq.serialize_element(&format_rational(x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            let texts = Vec::<String>::deserialize(d)?;
            texts
                .iter()
                .map(|t| parse_rational(t).map_err(D::Error::custom))
                .collect()
        }
    }
}

/// Serde adapters: big integers as decimal strings.
pub mod serde_bigint {
    use num_bigint::BigInt;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let text = String::deserialize(d)?;
        text.trim()
            .parse()
            .map_err(|_| D::Error::custom(format!("invalid integer {text:?}")))
    }
}

/// Serde adapters: lists of big integers as decimal strings.
pub mod serde_bigint_vec {
    use num_bigint::BigInt;
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(xs: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let texts: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
        texts.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|_| D::Error::custom(format!("invalid integer {t:?}")))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(q("-3/1"), rational_from_int(-3));
        assert_eq!(q(" 6/-4 "), q("-3/2"));
        assert_eq!(format_rational(&q("10/4")), "5/2");
        assert_eq!(format_rational(&q("-30")), "-30");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn square_examples() {
        assert!(is_square(&q("9/4")));
        assert!(!is_square(&q("33")));
        assert!(is_square(&q("0")));
        assert!(!is_square(&q("-4")));
        assert!(is_perfect_power(&q("-8/27"), 3));
        assert!(!is_perfect_power(&q("-4"), 4));
    }

    #[test]
    fn squarefree_decomposition_examples() {
        let cfg = FactorConfig::default();
        let (core, root) = squarefree_decomposition(&BigInt::from(-72), &cfg).unwrap();
        assert_eq!((core, root), (BigInt::from(-2), BigInt::from(6)));
        let (core, root) = squarefree_decomposition(&BigInt::from(33), &cfg).unwrap();
        assert_eq!((core, root), (BigInt::from(33), BigInt::from(1)));
    }

    proptest! {
        #[test]
        fn is_square_agrees_with_even_exponents(n in -5000i64..5000, d in 1i64..5000) {
            prop_assume!(n != 0);
            let x = Rational::new(BigInt::from(n), BigInt::from(d));
            let cfg = FactorConfig::default();
            let all_even = |m: &BigInt| {
                factor(m, &cfg).unwrap().factors.iter().all(|f| f.exponent % 2 == 0)
            };
            let expected = x.numer() > &BigInt::zero() && all_even(x.numer()) && all_even(x.denom());
            prop_assert_eq!(is_square(&x), expected);
        }

        #[test]
        fn squares_are_squares(n in -3000i64..3000, d in 1i64..3000) {
            let y = Rational::new(BigInt::from(n), BigInt::from(d));
            prop_assert!(is_square(&(&y * &y)));
        }
    }
}
