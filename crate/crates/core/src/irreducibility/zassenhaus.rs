//! Exact factorization over the integers: square-free decomposition, a
//! factorization modulo a small prime, quadratic Hensel lifting past the
//! Mignotte bound, and recombination by exact trial division.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::modp::{factor_squarefree, ModPolynomial};
use super::poly::{squarefree_factorization, IntPolynomial};
use crate::rat_core::primes_up_to;

/// `content · ∏ factor^multiplicity`, every factor primitive, irreducible,
/// with positive leading coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub content: BigInt,
    pub factors: Vec<(IntPolynomial, u32)>,
}

impl Factorization {
    pub fn reconstruct(&self) -> IntPolynomial {
        self.factors
            .iter()
            .fold(IntPolynomial::constant(self.content.clone()), |acc, (g, m)| {
                acc.mul(&g.pow(*m as u64))
            })
    }

    pub fn factor_count(&self) -> usize {
        self.factors.iter().map(|(_, m)| *m as usize).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ZassenhausOutcome {
    Factored(Factorization),
    /// Recombination needed more subsets than allowed.
    BudgetExceeded,
}

/// Arithmetic in `(Z / m)[x]`, coefficients kept in `[0, m)`.
struct Ring {
    m: BigInt,
}

impl Ring {
    fn reduce(&self, coeffs: &[BigInt]) -> Vec<BigInt> {
        let mut out: Vec<BigInt> = coeffs.iter().map(|c| c.mod_floor(&self.m)).collect();
        while out.last().is_some_and(|c| c.is_zero()) {
            out.pop();
        }
        out
    }

    fn add(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let n = a.len().max(b.len());
        let sum: Vec<BigInt> = (0..n)
            .map(|i| a.get(i).cloned().unwrap_or_default() + b.get(i).cloned().unwrap_or_default())
            .collect();
        self.reduce(&sum)
    }

    fn sub(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let n = a.len().max(b.len());
        let diff: Vec<BigInt> = (0..n)
            .map(|i| a.get(i).cloned().unwrap_or_default() - b.get(i).cloned().unwrap_or_default())
            .collect();
        self.reduce(&diff)
    }

    fn mul(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        self.reduce(&out)
    }

    /// Division by a monic polynomial.
    fn divrem_monic(&self, a: &[BigInt], b: &[BigInt]) -> (Vec<BigInt>, Vec<BigInt>) {
        let db = b.len() - 1;
        if a.len() <= db {
            return (Vec::new(), self.reduce(a));
        }
        let mut rem = a.to_vec();
        let mut quot = vec![BigInt::zero(); a.len() - db];
        for k in (0..quot.len()).rev() {
            let top = rem[k + db].mod_floor(&self.m);
            if top.is_zero() {
                continue;
            }
            for (j, c) in b.iter().enumerate() {
                rem[k + j] -= &top * c;
            }
            quot[k] = top;
        }
        (self.reduce(&quot), self.reduce(&rem))
    }
}

fn to_big(f: &ModPolynomial) -> Vec<BigInt> {
    f.coeffs().iter().map(|&c| BigInt::from(c)).collect()
}

/// Lifts `f ≡ g·h (mod p)`, `h` monic, to `f ≡ g*·h* (mod modulus)`;
/// returns `h*`. `modulus` is `p^(2^k)`.
fn hensel_lift(f: &IntPolynomial, g: &ModPolynomial, h: &ModPolynomial, modulus: &BigInt) -> Vec<BigInt> {
    let p = g.modulus();
    let (one, s, t) = g.xgcd(h);
    debug_assert_eq!(one.degree(), 0);
    let mut m = BigInt::from(p);
    let mut g = to_big(g);
    let mut h = to_big(h);
    let mut s = to_big(&s);
    let mut t = to_big(&t);
    let f = f.coeffs().to_vec();
    while &m < modulus {
        m = &m * &m;
        let ring = Ring { m: m.clone() };
        let e = ring.sub(&f, &ring.mul(&g, &h));
        let (q, r) = ring.divrem_monic(&ring.mul(&s, &e), &h);
        let g_new = ring.add(&g, &ring.add(&ring.mul(&t, &e), &ring.mul(&q, &g)));
        let h_new = ring.add(&h, &r);
        let b = ring.sub(&ring.add(&ring.mul(&s, &g_new), &ring.mul(&t, &h_new)), &[BigInt::one()]);
        let (c, d) = ring.divrem_monic(&ring.mul(&s, &b), &h_new);
        s = ring.sub(&s, &d);
        t = ring.sub(&t, &ring.add(&ring.mul(&t, &b), &ring.mul(&c, &g_new)));
        g = g_new;
        h = h_new;
    }
    h
}

fn symmetric(coeffs: &[BigInt], m: &BigInt) -> IntPolynomial {
    let half: BigInt = m >> 1;
    IntPolynomial::new(
        coeffs
            .iter()
            .map(|c| {
                let c = c.mod_floor(m);
                if c > half {
                    c - m
                } else {
                    c
                }
            })
            .collect(),
    )
}

/// Coefficient bound for `lc(f)·g` over all integer factors `g` of `f`.
fn mignotte_bound(f: &IntPolynomial) -> BigInt {
    let n = f.degree();
    let root = BigInt::from(n as u64 + 1).sqrt() + 1u32;
    root * (BigInt::one() << n) * f.max_norm() * f.leading().abs()
}

/// Chooses a prime with a square-free reduction and few modular factors.
fn choose_prime(f: &IntPolynomial, rng: &mut ChaCha8Rng) -> (u64, Vec<ModPolynomial>) {
    let mut best: Option<(u64, Vec<ModPolynomial>)> = None;
    let mut tried = 0;
    let mut limit = 1000;
    loop {
        for p in primes_up_to(limit).into_iter().skip(1).map(u64::from) {
            if (f.leading() % BigInt::from(p)).is_zero() {
                continue;
            }
            let reduced = ModPolynomial::reduce(f, p);
            if !reduced.is_squarefree() {
                continue;
            }
            let parts = factor_squarefree(&reduced.monic(), rng);
            let better = best.as_ref().is_none_or(|(_, b)| parts.len() < b.len());
            if better {
                best = Some((p, parts));
            }
            tried += 1;
            if tried >= 5 || best.as_ref().is_some_and(|(_, b)| b.len() == 1) {
                return best.expect("at least one prime tried");
            }
        }
        if let Some(found) = best {
            return found;
        }
        limit *= 10;
    }
}

/// Irreducible factors of a primitive square-free polynomial of positive
/// degree with positive leading coefficient.
fn factor_primitive_squarefree(
    f: &IntPolynomial,
    rng: &mut ChaCha8Rng,
    budget: &mut u64,
) -> Option<Vec<IntPolynomial>> {
    if f.degree() <= 1 {
        return Some(vec![f.clone()]);
    }
    let (p, modular) = choose_prime(f, rng);
    if modular.len() == 1 {
        return Some(vec![f.clone()]);
    }
    let bound = mignotte_bound(f);
    let pb = BigInt::from(p);
    let mut modulus = pb.clone();
    while modulus <= &bound * 2u32 {
        modulus = &modulus * &modulus;
    }
    let lc_mod = ModPolynomial::reduce(&IntPolynomial::constant(f.leading()), p);
    let lifted: Vec<Vec<BigInt>> = (0..modular.len())
        .map(|i| {
            let cofactor = modular
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .fold(lc_mod.clone(), |acc, (_, u)| acc.mul(u));
            hensel_lift(f, &cofactor, &modular[i], &modulus)
        })
        .collect();

    let ring = Ring { m: modulus.clone() };
    let mut remaining: Vec<usize> = (0..lifted.len()).collect();
    let mut rest = f.clone();
    let mut found = Vec::new();
    let mut size = 1;
    'sizes: while 2 * size <= remaining.len() {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            if *budget == 0 {
                return None;
            }
            *budget -= 1;
            let lc = vec![rest.leading()];
            let product = combo
                .iter()
                .fold(lc, |acc, &k| ring.mul(&acc, &lifted[remaining[k]]));
            let candidate = symmetric(&product, &modulus).primitive_part();
            if let Some(quotient) = rest.div_exact(&candidate) {
                found.push(candidate);
                rest = quotient.primitive_part();
                for &k in combo.iter().rev() {
                    remaining.remove(k);
                }
                continue 'sizes;
            }
            if !next_combination(&mut combo, remaining.len()) {
                break;
            }
        }
        size += 1;
    }
    found.push(rest);
    Some(found)
}

/// Advances a sorted index combination; false when exhausted.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    for i in (0..k).rev() {
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Complete factorization of `f` over the integers. `budget` caps the
/// number of recombination subsets examined across all square-free parts.
pub fn zassenhaus(f: &IntPolynomial, seed: u64, mut budget: u64) -> ZassenhausOutcome {
    assert!(!f.is_zero(), "cannot factor the zero polynomial");
    let mut content = f.content();
    if f.leading().is_negative() {
        content = -content;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut factors = Vec::new();
    for (part, mult) in squarefree_factorization(f) {
        match factor_primitive_squarefree(&part, &mut rng, &mut budget) {
            Some(irreducibles) => factors.extend(irreducibles.into_iter().map(|g| (g, mult))),
            None => return ZassenhausOutcome::BudgetExceeded,
        }
    }
    factors.sort_by(|(a, ma), (b, mb)| {
        (a.degree(), a.coeffs(), ma).cmp(&(b.degree(), b.coeffs(), mb))
    });
    ZassenhausOutcome::Factored(Factorization { content, factors })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> IntPolynomial {
        IntPolynomial::from_i64(c)
    }

    fn factored(f: &IntPolynomial) -> Factorization {
        match zassenhaus(f, 1, 1 << 16) {
            ZassenhausOutcome::Factored(fact) => fact,
            ZassenhausOutcome::BudgetExceeded => panic!("budget"),
        }
    }

    #[test]
    fn small_examples() {
        let f = p(&[33, 0, -12, 0, 1]);
        assert_eq!(factored(&f).factors, vec![(f.clone(), 1)]);

        let fact = factored(&p(&[-4, 0, 0, 0, 1]));
        assert_eq!(fact.factors, vec![(p(&[-2, 0, 1]), 1), (p(&[2, 0, 1]), 1)]);

        // x^4 + 4 = (x^2 - 2x + 2)(x^2 + 2x + 2)
        let fact = factored(&p(&[4, 0, 0, 0, 1]));
        assert_eq!(fact.factor_count(), 2);
        assert_eq!(fact.reconstruct(), p(&[4, 0, 0, 0, 1]));
    }

    #[test]
    fn swinnerton_dyer_style_recombination() {
        // x^4 - 10x^2 + 1 is irreducible but splits into quadratics or
        // linears modulo every prime
        let f = p(&[1, 0, -10, 0, 1]);
        assert_eq!(factored(&f).factors, vec![(f, 1)]);
    }

    #[test]
    fn non_monic_with_content_and_multiplicity() {
        // -6 (2x + 3)^2 (x^2 + 1)(3x - 1)
        let f = p(&[3, 2])
            .pow(2)
            .mul(&p(&[1, 0, 1]))
            .mul(&p(&[-1, 3]))
            .scale(&BigInt::from(-6));
        let fact = factored(&f);
        assert_eq!(fact.content, BigInt::from(-6));
        assert_eq!(fact.reconstruct(), f);
        assert_eq!(
            fact.factors,
            vec![(p(&[-1, 3]), 1), (p(&[3, 2]), 2), (p(&[1, 0, 1]), 1)]
        );
    }

    #[test]
    fn cyclotomic_product() {
        // x^12 - 1 has six cyclotomic factors
        let mut c = vec![0i64; 13];
        c[0] = -1;
        c[12] = 1;
        let f = p(&c);
        let fact = factored(&f);
        assert_eq!(fact.factors.len(), 6);
        assert_eq!(fact.reconstruct(), f);
    }

    #[test]
    fn combinations_enumerate_all() {
        let mut combo = vec![0, 1];
        let mut count = 1;
        while next_combination(&mut combo, 5) {
            count += 1;
        }
        assert_eq!(count, 10);
    }
}
