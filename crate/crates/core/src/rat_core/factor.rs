//! Partial integer factorization: trial division, then Pollard rho with
//! Brent's cycle finding under a step budget.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{exact_integer_root, is_prime};
use crate::config::FactorConfig;
use crate::error::{Error, Result};

/// How a prime factor was discovered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoundBy {
    Trial,
    Rho,
    /// The whole cofactor left after trial division was itself prime.
    Cofactor,
}

impl FoundBy {
    pub fn as_str(self) -> &'static str {
        match self {
            FoundBy::Trial => "trial",
            FoundBy::Rho => "rho",
            FoundBy::Cofactor => "cofactor",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeFactor {
    pub prime: BigInt,
    pub exponent: u32,
    pub found_by: FoundBy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CofactorStatus {
    /// The cofactor is 1.
    One,
    /// A Miller-Rabin witness shows the cofactor is composite.
    ProvenComposite,
    /// The cofactor is too large for the configured primality bit limit.
    Unknown,
}

/// Primes found under budget plus whatever could not be split.
///
/// `∏ prime^exponent · cofactor = |n|` always holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorizationResult {
    pub factors: Vec<PrimeFactor>,
    pub cofactor: BigInt,
    pub cofactor_status: CofactorStatus,
    pub complete: bool,
}

impl FactorizationResult {
    pub fn primes(&self) -> impl Iterator<Item = &BigInt> {
        self.factors.iter().map(|f| &f.prime)
    }

    pub fn reconstruct(&self) -> BigInt {
        self.factors
            .iter()
            .fold(self.cofactor.clone(), |acc, f| acc * f.prime.pow(f.exponent))
    }
}

const CACHED_SIEVE_LIMIT: u64 = 1_000_000;

fn sieve(limit: u64) -> Vec<u32> {
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            primes.push(i as u32);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

fn cached_sieve() -> &'static [u32] {
    static CACHE: OnceLock<Vec<u32>> = OnceLock::new();
    CACHE.get_or_init(|| sieve(CACHED_SIEVE_LIMIT))
}

/// All primes up to `limit`. Limits up to 10^6 share a cached sieve.
pub(crate) fn primes_up_to(limit: u64) -> Vec<u32> {
    if limit <= CACHED_SIEVE_LIMIT {
        let all = cached_sieve();
        let end = all.partition_point(|&p| (p as u64) <= limit);
        all[..end].to_vec()
    } else {
        sieve(limit)
    }
}

fn for_each_trial_prime(limit: u64, mut visit: impl FnMut(u32) -> bool) {
    let owned;
    let primes: &[u32] = if limit <= CACHED_SIEVE_LIMIT {
        cached_sieve()
    } else {
        owned = sieve(limit);
        &owned
    };
    for &p in primes.iter().take_while(|&&p| (p as u64) <= limit) {
        if !visit(p) {
            return;
        }
    }
}

fn record(found: &mut BTreeMap<BigInt, (u32, FoundBy)>, p: BigInt, e: u32, by: FoundBy) {
    found.entry(p).or_insert((0, by)).0 += e;
}

struct Rho {
    rng: ChaCha8Rng,
    steps_left: u64,
}

impl Rho {
    /// One Brent rho attempt sequence on composite `n`; `None` once the step
    /// budget is spent.
    fn split(&mut self, n: &BigUint) -> Option<BigUint> {
        if n.is_even() {
            return Some(BigUint::from(2u32));
        }
        const BATCH: u64 = 128;
        let one = BigUint::one();
        while self.steps_left > 0 {
            let c = self.rng.gen_biguint_range(&one, n);
            let step = |y: &BigUint| (y * y + &c) % n;
            let mut y = self.rng.gen_biguint_below(n);
            let mut x = y.clone();
            let mut ys = y.clone();
            let mut q = BigUint::one();
            let mut g = BigUint::one();
            let mut r: u64 = 1;
            while g.is_one() {
                x = y.clone();
                for _ in 0..r {
                    y = step(&y);
                }
                self.steps_left = self.steps_left.saturating_sub(r);
                let mut k = 0;
                while k < r && g.is_one() {
                    ys = y.clone();
                    let batch = BATCH.min(r - k);
                    for _ in 0..batch {
                        y = step(&y);
                        let diff = if x > y { &x - &y } else { &y - &x };
                        q = (q * diff) % n;
                    }
                    self.steps_left = self.steps_left.saturating_sub(batch);
                    g = q.gcd(n);
                    k += batch;
                }
                r *= 2;
                if self.steps_left == 0 && g.is_one() {
                    return None;
                }
            }
            if &g == n {
                // batch overshot: replay one step at a time
                loop {
                    ys = step(&ys);
                    let diff = if x > ys { &x - &ys } else { &ys - &x };
                    g = diff.gcd(n);
                    if !g.is_one() {
                        break;
                    }
                }
            }
            if &g != n {
                return Some(g);
            }
        }
        None
    }
}

/// Factors `n` as far as the budget allows.
pub fn factor(n: &BigInt, config: &FactorConfig) -> Result<FactorizationResult> {
    if n.is_zero() {
        return Err(Error::InvalidArgument("cannot factor 0".into()));
    }
    let mut found: BTreeMap<BigInt, (u32, FoundBy)> = BTreeMap::new();

    let mut m = n.abs();
    let mut exhausted_trial = true;
    for_each_trial_prime(config.trial_division_bound, |p| {
        let pb = BigInt::from(p);
        if &pb * &pb > m {
            exhausted_trial = false;
            return false;
        }
        let mut e = 0;
        loop {
            let (quot, rem) = m.div_rem(&pb);
            if !rem.is_zero() {
                break;
            }
            m = quot;
            e += 1;
        }
        if e > 0 {
            record(&mut found, pb, e, FoundBy::Trial);
        }
        true
    });

    let mut leftover = BigInt::one();
    let mut status = CofactorStatus::One;
    if !m.is_one() {
        let bound = BigInt::from(config.trial_division_bound);
        if !exhausted_trial || m <= &bound * &bound {
            // every prime below sqrt(m) has been tried, so m is prime
            let by = if m <= bound {
                FoundBy::Trial
            } else {
                FoundBy::Cofactor
            };
            record(&mut found, m.clone(), 1, by);
        } else {
            let mut rho = Rho {
                rng: ChaCha8Rng::seed_from_u64(config.seed),
                steps_left: config.rho_step_budget,
            };
            let original = m.clone();
            let mut stack = vec![(m.clone(), 1u32)];
            while let Some((x, mult)) = stack.pop() {
                if x.bits() > config.primality_bit_limit {
                    leftover *= x.pow(mult);
                    status = CofactorStatus::Unknown;
                    continue;
                }
                if is_prime(&x) {
                    let by = if x == original {
                        FoundBy::Cofactor
                    } else {
                        FoundBy::Rho
                    };
                    record(&mut found, x, mult, by);
                    continue;
                }
                if let Some((root, k)) = perfect_power(&x) {
                    stack.push((root, mult * k));
                    continue;
                }
                match rho.split(x.magnitude()) {
                    Some(d) => {
                        let d = BigInt::from(d);
                        let rest = &x / &d;
                        stack.push((d, mult));
                        stack.push((rest, mult));
                    }
                    None => {
                        leftover *= x.pow(mult);
                        if status != CofactorStatus::Unknown {
                            status = CofactorStatus::ProvenComposite;
                        }
                    }
                }
            }
        }
    }

    let factors = found
        .into_iter()
        .map(|(prime, (exponent, found_by))| PrimeFactor {
            prime,
            exponent,
            found_by,
        })
        .collect();
    let complete = leftover.is_one();
    Ok(FactorizationResult {
        factors,
        cofactor: leftover,
        cofactor_status: status,
        complete,
    })
}

/// `x = root^k` with the largest such `k > 1`, if any.
fn perfect_power(x: &BigInt) -> Option<(BigInt, u32)> {
    let max_k = x.bits().to_u32().unwrap_or(u32::MAX);
    let mut best = None;
    let mut k = 2;
    while k <= max_k {
        if let Some(root) = exact_integer_root(x, k) {
            best = Some((root, k));
        }
        k += 1;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pairs(r: &FactorizationResult) -> Vec<(i64, u32)> {
        r.factors
            .iter()
            .map(|f| (f.prime.to_i64().unwrap(), f.exponent))
            .collect()
    }

    #[test]
    fn small_examples() {
        let cfg = FactorConfig::default();
        let r = factor(&BigInt::from(33), &cfg).unwrap();
        assert_eq!(pairs(&r), vec![(3, 1), (11, 1)]);
        assert!(r.complete);
        let r = factor(&BigInt::from(783), &cfg).unwrap();
        assert_eq!(pairs(&r), vec![(3, 3), (29, 1)]);
        let r = factor(&BigInt::from(-1), &cfg).unwrap();
        assert!(r.factors.is_empty());
        assert_eq!(r.cofactor, BigInt::one());
        assert!(r.complete);
        assert!(factor(&BigInt::zero(), &cfg).is_err());
    }

    #[test]
    fn rho_splits_beyond_trial_bound() {
        let cfg = FactorConfig {
            trial_division_bound: 100,
            ..FactorConfig::default()
        };
        // 1000003 * 1000033 * 999983^2
        let p1 = BigInt::from(1_000_003u64);
        let p2 = BigInt::from(1_000_033u64);
        let p3 = BigInt::from(999_983u64);
        let n = &p1 * &p2 * &p3 * &p3;
        let r = factor(&n, &cfg).unwrap();
        assert!(r.complete);
        assert_eq!(
            pairs(&r),
            vec![(999_983, 2), (1_000_003, 1), (1_000_033, 1)]
        );
        assert!(r.factors.iter().all(|f| f.found_by == FoundBy::Rho));
    }

    #[test]
    fn large_prime_cofactor_is_tagged() {
        let cfg = FactorConfig::default();
        let big = (BigInt::one() << 89) - 1;
        let r = factor(&(&big * 12), &cfg).unwrap();
        assert!(r.complete);
        let last = r.factors.last().unwrap();
        assert_eq!(last.prime, big);
        assert_eq!(last.found_by, FoundBy::Cofactor);
    }

    #[test]
    fn budget_exhaustion_reports_composite_cofactor() {
        let cfg = FactorConfig {
            trial_division_bound: 100,
            rho_step_budget: 50,
            ..FactorConfig::default()
        };
        let p = (BigInt::one() << 61) - 1;
        let q = (BigInt::one() << 89) - 1;
        let r = factor(&(&p * &q * 5), &cfg).unwrap();
        assert!(!r.complete);
        assert_eq!(r.cofactor, &p * &q);
        assert_eq!(r.cofactor_status, CofactorStatus::ProvenComposite);
        assert_eq!(r.reconstruct(), &p * &q * 5);
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let cfg = FactorConfig {
            trial_division_bound: 50,
            seed: 7,
            ..FactorConfig::default()
        };
        let n = BigInt::from(1_000_003u64) * BigInt::from(2_000_029u64);
        assert_eq!(factor(&n, &cfg).unwrap(), factor(&n, &cfg).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]
        #[test]
        fn reconstruction(n in 1u64..u64::MAX, neg in any::<bool>()) {
            let cfg = FactorConfig { trial_division_bound: 1000, ..FactorConfig::default() };
            let value = if neg { -BigInt::from(n) } else { BigInt::from(n) };
            let r = factor(&value, &cfg).unwrap();
            prop_assert_eq!(r.reconstruct(), value.abs());
            for f in &r.factors {
                prop_assert!(is_prime(&f.prime));
            }
            prop_assert_eq!(r.complete, r.cofactor.is_one());
        }
    }
}
