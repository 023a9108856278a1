//! Irreducibility of the iterate polynomials `f^n(x) - beta` over the
//! rationals.
//!
//! Certification tries cheap sufficient criteria first (Capelli's test at
//! the base level, the norm/square criterion for `q = 2`, factorization
//! patterns modulo small primes) and falls back to exact Zassenhaus
//! factorization at small degree.

mod modp;
mod poly;
mod zassenhaus;

pub use modp::{distinct_degree, equal_degree, factor_mod_p, factor_squarefree, ModPattern, ModPolynomial};
pub use poly::{squarefree_factorization, IntPolynomial};
pub use zassenhaus::{zassenhaus, Factorization, ZassenhausOutcome};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, Zero};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::dynamics::UnicriticalMap;
use crate::error::{Error, Result};
use crate::rat_core::{is_perfect_power, is_square, primes_up_to, rational_from_int, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ModPPattern,
    Zassenhaus,
    SquareCriterion,
    CapelliBase,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum IrreducibilityVerdict {
    Irreducible { method: Method },
    /// `witness` is a proper factor, checked by exact division.
    Reducible { witness: IntPolynomial },
    Unknown { tried: Vec<Method> },
}

impl IrreducibilityVerdict {
    pub fn is_irreducible(&self) -> bool {
        matches!(self, IrreducibilityVerdict::Irreducible { .. })
    }

    pub fn is_reducible(&self) -> bool {
        matches!(self, IrreducibilityVerdict::Reducible { .. })
    }
}

/// `f^k(x)` as an integer polynomial over a positive common denominator.
fn iterate_with_denominator(
    f: &UnicriticalMap,
    k: u32,
    degree_budget: u64,
) -> Result<(IntPolynomial, BigInt)> {
    let degree = (f.q() as u128).checked_pow(k).unwrap_or(u128::MAX);
    if degree > degree_budget as u128 {
        return Err(Error::DegreeBudget {
            degree: degree.min(u64::MAX as u128) as u64,
            budget: degree_budget,
        });
    }
    let a = f.c().numer();
    let b = f.c().denom();
    let mut num = IntPolynomial::x();
    let mut den = BigInt::one();
    for _ in 0..k {
        // (N/D)^q + a/b = (b N^q + a D^q) / (b D^q)
        let dq = Pow::pow(&den, f.q() as u32);
        let next = num.pow(f.q()).scale(b).add(&IntPolynomial::constant(a * &dq));
        let next_den = b * dq;
        let g = next.content().gcd(&next_den);
        num = IntPolynomial::new(next.coeffs().iter().map(|c| c / &g).collect());
        den = next_den / g;
    }
    Ok((num, den))
}

/// The primitive integer polynomial proportional to `f^n(x) - beta`.
pub fn iterate_minus(
    f: &UnicriticalMap,
    beta: &Rational,
    n: u32,
    degree_budget: u64,
) -> Result<IntPolynomial> {
    let (num, den) = iterate_with_denominator(f, n, degree_budget)?;
    // N/D - u/v = (v N - u D) / (v D)
    let shifted = num
        .scale(beta.denom())
        .sub(&IntPolynomial::constant(beta.numer() * den));
    Ok(shifted.primitive_part())
}

/// Capelli's criterion for `x^q - (beta - c)`: irreducible iff `beta - c` is
/// not a `p`-th power and, when `4 | q`, not of the form `-4 y^4`.
pub fn capelli_base_check(f: &UnicriticalMap, beta: &Rational) -> bool {
    let a = beta - f.c();
    if a.is_zero() {
        return false;
    }
    if is_perfect_power(&a, f.p() as u32) {
        return false;
    }
    if f.q().is_multiple_of(4) && is_perfect_power(&(-a / rational_from_int(4)), 4) {
        return false;
    }
    true
}

/// Square criterion for `q = 2`, levels `1..=depth`. Level `n` is certified
/// when `beta - c` and every `f^m(0) - beta` for `2 <= m <= n` are
/// non-squares: if `theta` is a root of `f^(m-1)(x) - beta`, the norm of
/// `theta - c` from `Q(theta)` is `f^m(0) - beta`.
pub fn square_criterion_tower(
    f: &UnicriticalMap,
    beta: &Rational,
    depth: u32,
) -> Result<Vec<IrreducibilityVerdict>> {
    if f.q() != 2 {
        return Err(Error::RequiresQuadratic(f.q()));
    }
    let mut out = Vec::with_capacity(depth as usize);
    let mut holding = !is_square(&(beta - f.c()));
    let mut x = f.c().clone();
    for m in 1..=depth {
        if m >= 2 {
            x = f.iterate(&x, 1)?;
            holding = holding && !is_square(&(&x - beta));
        }
        out.push(if holding {
            IrreducibilityVerdict::Irreducible {
                method: Method::SquareCriterion,
            }
        } else {
            IrreducibilityVerdict::Unknown {
                tried: vec![Method::SquareCriterion],
            }
        });
    }
    Ok(out)
}

fn verified_reducible(g: &IntPolynomial, witness: IntPolynomial) -> IrreducibilityVerdict {
    assert!(
        witness.degree() >= 1 && witness.degree() < g.degree() && g.div_exact(&witness).is_some(),
        "reducibility witness must divide"
    );
    IrreducibilityVerdict::Reducible { witness }
}

/// Certifies irreducibility of `g` over the rationals, or finds a factor.
pub fn certify_irreducible(g: &IntPolynomial, config: &RunConfig) -> IrreducibilityVerdict {
    let g = g.primitive_part();
    let deg = g.degree();
    assert!(deg >= 1, "certify_irreducible needs positive degree");
    if deg == 1 {
        return IrreducibilityVerdict::Irreducible {
            method: Method::ModPPattern,
        };
    }
    if g.coeff(0).is_zero() {
        return verified_reducible(&g, IntPolynomial::x());
    }

    let mut reach = vec![true; deg + 1];
    let mut usable = 0;
    let mut considered = 0;
    for p in primes_up_to(100_000).into_iter().skip(1).map(u64::from) {
        if considered >= config.mod_p_prime_count {
            break;
        }
        if (g.leading() % BigInt::from(p)).is_zero() {
            continue;
        }
        considered += 1;
        let pattern = factor_mod_p(&g, p).expect("p does not divide the leading coefficient");
        if pattern == ModPattern::Skip {
            continue;
        }
        if pattern.is_irreducible() {
            return IrreducibilityVerdict::Irreducible {
                method: Method::ModPPattern,
            };
        }
        usable += 1;
        for (r, s) in reach.iter_mut().zip(pattern.subset_degrees(deg)) {
            *r = *r && s;
        }
        let only_trivial = reach[1..deg].iter().all(|&r| !r);
        if only_trivial && usable >= 3 {
            return IrreducibilityVerdict::Irreducible {
                method: Method::ModPPattern,
            };
        }
    }

    if deg > config.zassenhaus_degree_bound {
        return IrreducibilityVerdict::Unknown {
            tried: vec![Method::ModPPattern],
        };
    }
    match zassenhaus(&g, config.rng_seed, config.recombination_budget) {
        ZassenhausOutcome::Factored(fact) => {
            if fact.factor_count() == 1 {
                IrreducibilityVerdict::Irreducible {
                    method: Method::Zassenhaus,
                }
            } else {
                verified_reducible(&g, fact.factors[0].0.clone())
            }
        }
        ZassenhausOutcome::BudgetExceeded => IrreducibilityVerdict::Unknown {
            tried: vec![Method::ModPPattern, Method::Zassenhaus],
        },
    }
}

/// Irreducibility of `f^n(x) - beta` for `n >= 1`, using every available
/// criterion. A reducible first level makes every level reducible; the
/// witness is the level-one factor composed with `f^(n-1)`.
pub fn certify_iterate(
    f: &UnicriticalMap,
    beta: &Rational,
    n: u32,
    config: &RunConfig,
) -> Result<IrreducibilityVerdict> {
    if n == 0 {
        return Err(Error::InvalidArgument("levels start at 1".into()));
    }
    if !capelli_base_check(f, beta) {
        let base = iterate_minus(f, beta, 1, config.degree_budget)?;
        let witness = match certify_irreducible(&base, config) {
            IrreducibilityVerdict::Reducible { witness } => witness,
            other => unreachable!("Capelli says reducible, factoring says {other:?}"),
        };
        if n == 1 {
            return Ok(verified_reducible(&base, witness));
        }
        let (num, den) = match iterate_with_denominator(f, n - 1, config.degree_budget) {
            Ok(v) => v,
            Err(Error::DegreeBudget { .. }) => {
                return Ok(IrreducibilityVerdict::Unknown {
                    tried: vec![Method::CapelliBase],
                })
            }
            Err(e) => return Err(e),
        };
        // witness(num / den) · den^deg
        let k = witness.degree();
        let lifted = witness
            .coeffs()
            .iter()
            .enumerate()
            .fold(IntPolynomial::default(), |acc, (i, c)| {
                let term = num.pow(i as u64).scale(&(c * Pow::pow(&den, (k - i) as u32)));
                acc.add(&term)
            })
            .primitive_part();
        let level = iterate_minus(f, beta, n, config.degree_budget)?;
        return Ok(verified_reducible(&level, lifted));
    }
    if n == 1 {
        return Ok(IrreducibilityVerdict::Irreducible {
            method: Method::CapelliBase,
        });
    }
    if f.q() == 2 {
        let tower = square_criterion_tower(f, beta, n)?;
        if tower[n as usize - 1].is_irreducible() {
            return Ok(tower[n as usize - 1].clone());
        }
    }
    match iterate_minus(f, beta, n, config.degree_budget) {
        Ok(g) => Ok(certify_irreducible(&g, config)),
        Err(Error::DegreeBudget { .. }) => Ok(IrreducibilityVerdict::Unknown {
            tried: vec![Method::CapelliBase],
        }),
        Err(e) => Err(e),
    }
}
