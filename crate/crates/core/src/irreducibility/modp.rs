//! Polynomials over a prime field `F_p` with `p < 2^63`.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

use super::poly::IntPolynomial;
use crate::error::{Error, Result};

/// Residues in `[0, modulus)`, low to high, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModPolynomial {
    modulus: u64,
    coeffs: Vec<u64>,
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    acc
}

pub(crate) fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod(a, p - 2, p)
}

impl ModPolynomial {
    pub fn new(modulus: u64, mut coeffs: Vec<u64>) -> Self {
        for c in coeffs.iter_mut() {
            *c %= modulus;
        }
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        ModPolynomial { modulus, coeffs }
    }

    pub fn reduce(g: &IntPolynomial, p: u64) -> Self {
        let pb = BigInt::from(p);
        let coeffs = g
            .coeffs()
            .iter()
            .map(|c| c.mod_floor(&pb).to_u64().expect("residue fits"))
            .collect();
        Self::new(p, coeffs)
    }

    fn zero(p: u64) -> Self {
        ModPolynomial {
            modulus: p,
            coeffs: Vec::new(),
        }
    }

    fn one(p: u64) -> Self {
        Self::new(p, vec![1])
    }

    fn x(p: u64) -> Self {
        Self::new(p, vec![0, 1])
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn leading(&self) -> u64 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    fn coeff(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = inv_mod(self.leading(), self.modulus);
        self.scale(inv)
    }

    pub fn scale(&self, k: u64) -> Self {
        let p = self.modulus;
        Self::new(p, self.coeffs.iter().map(|&c| mul_mod(c, k, p)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let p = self.modulus;
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new(p, (0..n).map(|i| (self.coeff(i) + other.coeff(i)) % p).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let p = self.modulus;
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new(p, (0..n).map(|i| (self.coeff(i) + p - other.coeff(i)) % p).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let p = self.modulus;
        if self.is_zero() || other.is_zero() {
            return Self::zero(p);
        }
        let mut out = vec![0u128; self.coeffs.len() + other.coeffs.len() - 1];
        let p128 = p as u128;
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = (out[i + j] + a as u128 * b as u128) % p128;
            }
        }
        Self::new(p, out.into_iter().map(|c| c as u64).collect())
    }

    pub fn divrem(&self, divisor: &Self) -> (Self, Self) {
        let p = self.modulus;
        assert!(!divisor.is_zero(), "division by zero polynomial");
        if self.degree() < divisor.degree() || self.is_zero() {
            return (Self::zero(p), self.clone());
        }
        let inv = inv_mod(divisor.leading(), p);
        let dd = divisor.degree();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0u64; self.degree() - dd + 1];
        for k in (0..quot.len()).rev() {
            let top = rem[k + dd];
            if top == 0 {
                continue;
            }
            let qk = mul_mod(top, inv, p);
            for (j, &dc) in divisor.coeffs.iter().enumerate() {
                rem[k + j] = (rem[k + j] + p - mul_mod(qk, dc, p)) % p;
            }
            quot[k] = qk;
        }
        (Self::new(p, quot), Self::new(p, rem))
    }

    pub fn rem(&self, divisor: &Self) -> Self {
        self.divrem(divisor).1
    }

    /// Monic gcd.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `(g, s, t)` with `s·self + t·other = g`, `g` monic.
    pub fn xgcd(&self, other: &Self) -> (Self, Self, Self) {
        let p = self.modulus;
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (Self::one(p), Self::zero(p));
        let (mut t0, mut t1) = (Self::zero(p), Self::one(p));
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            let s = s0.sub(&q.mul(&s1));
            let t = t0.sub(&q.mul(&t1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s);
            t0 = std::mem::replace(&mut t1, t);
        }
        let inv = inv_mod(r0.leading(), p);
        (r0.scale(inv), s0.scale(inv), t0.scale(inv))
    }

    pub fn derivative(&self) -> Self {
        let p = self.modulus;
        Self::new(
            p,
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| mul_mod(c, i as u64 % p, p))
                .collect(),
        )
    }

    /// `self^e mod m`.
    pub fn pow_mod(&self, e: &BigUint, m: &Self) -> Self {
        let mut acc = Self::one(self.modulus).rem(m);
        let base = self.rem(m);
        for i in (0..e.bits()).rev() {
            acc = acc.mul(&acc).rem(m);
            if e.bit(i) {
                acc = acc.mul(&base).rem(m);
            }
        }
        acc
    }

    pub fn is_squarefree(&self) -> bool {
        let d = self.derivative();
        !d.is_zero() && self.gcd(&d).degree() == 0
    }

    /// Lifts residues to `[0, p)` integers.
    pub fn to_int(&self) -> IntPolynomial {
        IntPolynomial::new(self.coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }
}

/// Distinct-degree factorization of a monic square-free polynomial:
/// `(d, product of all irreducible factors of degree d)`.
pub fn distinct_degree(f: &ModPolynomial) -> Vec<(usize, ModPolynomial)> {
    let p = f.modulus;
    let pb = BigUint::from(p);
    let mut rest = f.monic();
    let mut out = Vec::new();
    let mut h = ModPolynomial::x(p).rem(&rest);
    let mut d = 0;
    while rest.degree() >= 2 * (d + 1) {
        d += 1;
        h = h.pow_mod(&pb, &rest);
        let g = h.sub(&ModPolynomial::x(p)).gcd(&rest);
        if g.degree() > 0 {
            rest = rest.divrem(&g).0;
            h = h.rem(&rest);
            out.push((d, g));
        }
    }
    if rest.degree() > 0 {
        out.push((rest.degree(), rest));
    }
    out
}

/// Cantor-Zassenhaus splitting of a monic square-free product of
/// irreducibles of degree `d`. Needs an odd modulus.
pub fn equal_degree<R: Rng>(f: &ModPolynomial, d: usize, rng: &mut R) -> Vec<ModPolynomial> {
    let p = f.modulus;
    assert!(p % 2 == 1, "equal-degree splitting needs odd p");
    if f.degree() == d {
        return vec![f.monic()];
    }
    let exp = (BigUint::from(p).pow(d as u32) - 1u32) >> 1;
    loop {
        let a = ModPolynomial::new(p, (0..f.degree()).map(|_| rng.gen_range(0..p)).collect());
        if a.degree() == 0 {
            continue;
        }
        let g = a.gcd(f);
        let split = if g.degree() > 0 {
            g
        } else {
            a.pow_mod(&exp, f).sub(&ModPolynomial::one(p)).gcd(f)
        };
        if split.degree() > 0 && split.degree() < f.degree() {
            let other = f.divrem(&split).0;
            let mut out = equal_degree(&split, d, rng);
            out.extend(equal_degree(&other, d, rng));
            return out;
        }
    }
}

/// Complete factorization of a square-free polynomial into monic
/// irreducibles, sorted by degree then coefficients.
pub fn factor_squarefree<R: Rng>(f: &ModPolynomial, rng: &mut R) -> Vec<ModPolynomial> {
    let mut out = Vec::new();
    for (d, g) in distinct_degree(f) {
        out.extend(equal_degree(&g, d, rng));
    }
    out.sort_by(|a, b| (a.degree(), &a.coeffs).cmp(&(b.degree(), &b.coeffs)));
    out
}

/// Degree pattern of `g mod p`, or `Skip` when the reduction is not
/// square-free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModPattern {
    /// Factor degree -> number of irreducible factors of that degree.
    Pattern(BTreeMap<usize, usize>),
    Skip,
}

impl ModPattern {
    pub fn is_irreducible(&self) -> bool {
        matches!(self, ModPattern::Pattern(m) if m.len() == 1 && m.values().all(|&c| c == 1))
    }

    /// Degrees of all possible factors: subset sums of the pattern.
    pub fn subset_degrees(&self, total: usize) -> Vec<bool> {
        let mut reach = vec![false; total + 1];
        reach[0] = true;
        if let ModPattern::Pattern(m) = self {
            for (&d, &count) in m {
                for _ in 0..count {
                    for s in (d..=total).rev() {
                        if reach[s - d] {
                            reach[s] = true;
                        }
                    }
                }
            }
        }
        reach
    }
}

/// The factorization pattern of `g` modulo the prime `p`.
pub fn factor_mod_p(g: &IntPolynomial, p: u64) -> Result<ModPattern> {
    if (g.leading() % BigInt::from(p)).is_zero() {
        return Err(Error::PrimeDividesLeading { prime: p });
    }
    let reduced = ModPolynomial::reduce(g, p);
    if reduced.degree() == 0 {
        return Ok(ModPattern::Pattern(BTreeMap::new()));
    }
    if !reduced.is_squarefree() {
        return Ok(ModPattern::Skip);
    }
    let mut pattern = BTreeMap::new();
    for (d, prod) in distinct_degree(&reduced) {
        *pattern.entry(d).or_insert(0) += prod.degree() / d;
    }
    Ok(ModPattern::Pattern(pattern))
}
