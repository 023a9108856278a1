//! Brute-force orders of `G_1` and `G_2` for `q = 2` by exact square-class
//! arithmetic in the rationals and in quadratic fields.
//!
//! `K_1 = Q(sqrt(beta - c))`, and `K_2` is obtained by adjoining the square
//! roots of `z - c` for both roots `z` of `f(x) - beta`. The layer
//! `Gal(K_2/K_1)` is elementary abelian of rank equal to the rank of the
//! subgroup of `K_1^* / K_1^{*2}` spanned by those two elements.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::config::FactorConfig;
use crate::dynamics::UnicriticalMap;
use crate::error::{Error, Result};
use crate::rat_core::{exact_integer_root, is_square, squarefree_decomposition, Rational};

/// `a + b sqrt(d)` with `d` a squarefree integer other than 0 and 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadElement {
    d: BigInt,
    a: Rational,
    b: Rational,
}

impl QuadElement {
    pub fn new(d: BigInt, a: Rational, b: Rational, config: &FactorConfig) -> Result<Self> {
        if d.is_zero() || d.is_one() {
            return Err(Error::InvalidArgument(format!("d = {d} does not define a quadratic field")));
        }
        let (core, _) = squarefree_decomposition(&d, config)?;
        if core != d {
            return Err(Error::InvalidArgument(format!("d = {d} is not squarefree")));
        }
        Ok(QuadElement { d, a, b })
    }

    pub fn d(&self) -> &BigInt {
        &self.d
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    fn d_rational(&self) -> Rational {
        Rational::from_integer(self.d.clone())
    }

    pub fn norm(&self) -> Rational {
        &self.a * &self.a - self.d_rational() * &self.b * &self.b
    }

    pub fn conjugate(&self) -> Self {
        QuadElement {
            d: self.d.clone(),
            a: self.a.clone(),
            b: -&self.b,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.d, other.d, "elements of different fields");
        QuadElement {
            d: self.d.clone(),
            a: &self.a * &other.a + self.d_rational() * &self.b * &other.b,
            b: &self.a * &other.b + &self.b * &other.a,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

impl fmt::Display for QuadElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        let sign = if self.b.is_negative() { "-" } else { "+" };
        write!(f, "{} {} {}*sqrt({})", self.a, sign, self.b.abs(), self.d)
    }
}

fn rational_sqrt(x: &Rational) -> Option<Rational> {
    let n = exact_integer_root(x.numer(), 2)?;
    let d = exact_integer_root(x.denom(), 2)?;
    Some(Rational::new(n, d))
}

/// Whether `x = (u + v sqrt(d))^2` for rationals `u`, `v`.
pub fn is_square_in_quadfield(x: &QuadElement) -> bool {
    if x.b.is_zero() {
        return is_square(&x.a) || is_square(&(&x.a / x.d_rational()));
    }
    let Some(t) = rational_sqrt(&x.norm()) else {
        return false;
    };
    let two = Rational::from_integer(BigInt::from(2));
    [&x.a + &t, &x.a - &t]
        .iter()
        .any(|s| !s.is_zero() && is_square(&(s / &two)))
}

/// A scalar in which square classes can be decided exactly.
pub trait SquareClass: Clone + fmt::Display {
    fn is_square_class_trivial(&self) -> bool;
    fn times(&self, other: &Self) -> Self;
}

impl SquareClass for Rational {
    fn is_square_class_trivial(&self) -> bool {
        is_square(self)
    }

    fn times(&self, other: &Self) -> Self {
        self * other
    }
}

impl SquareClass for QuadElement {
    fn is_square_class_trivial(&self) -> bool {
        is_square_in_quadfield(self)
    }

    fn times(&self, other: &Self) -> Self {
        self.mul(other)
    }
}

/// One recorded square test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquareTest {
    pub label: String,
    pub element: String,
    pub is_square: bool,
}

/// Rank over `F_2` of the span of two square classes, with the three tests
/// (each generator and their product) that decide it.
pub fn span_rank<T: SquareClass>(plus: &T, minus: &T) -> (u32, Vec<SquareTest>) {
    let product = plus.times(minus);
    let tests: Vec<SquareTest> = [("z+ - c", plus), ("z- - c", minus), ("product", &product)]
        .into_iter()
        .map(|(label, x)| SquareTest {
            label: label.to_string(),
            element: x.to_string(),
            is_square: x.is_square_class_trivial(),
        })
        .collect();
    let trivial = tests.iter().filter(|t| t.is_square).count();
    let rank = match trivial {
        0 => 2,
        1 => 1,
        _ => 0,
    };
    (rank, tests)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleResult {
    pub g1_order: u32,
    pub g2_order: u32,
    pub kummer_rank: u32,
    pub generators_tested: Vec<SquareTest>,
}

/// `|G_1|` and `|G_2|` for `f = x^2 + c` at `beta`.
pub fn oracle_level_2(f: &UnicriticalMap, beta: &Rational, config: &FactorConfig) -> Result<OracleResult> {
    if f.q() != 2 {
        return Err(Error::RequiresQuadratic(f.q()));
    }
    let c = f.c();
    let radicand = beta - c;
    if radicand.is_zero() {
        return Err(Error::Degenerate(format!("beta = c = {c}: f(x) - beta = x^2")));
    }
    if c * c == radicand {
        // a root z of f(x) = beta equals c, so beta = f(c) = f^2(0)
        return Err(Error::PostCritical {
            beta: beta.clone(),
            m: 2,
        });
    }
    let (g1_order, kummer_rank, generators_tested) = match rational_sqrt(&radicand) {
        Some(root) => {
            let plus = &root - c;
            let minus = -&root - c;
            let (rank, tests) = span_rank(&plus, &minus);
            (1, rank, tests)
        }
        None => {
            // radicand = n/m = (n m) / m^2 = core * (root / m)^2
            let (core, root) = squarefree_decomposition(&(radicand.numer() * radicand.denom()), config)?;
            let s = Rational::new(root, radicand.denom().clone());
            let plus = QuadElement::new(core, -c, s, config)?;
            let minus = plus.conjugate();
            let (rank, tests) = span_rank(&plus, &minus);
            (2, rank, tests)
        }
    };
    Ok(OracleResult {
        g1_order,
        g2_order: g1_order << kummer_rank,
        kummer_rank,
        generators_tested,
    })
}
