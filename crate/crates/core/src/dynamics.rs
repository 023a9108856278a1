//! The unicritical map `f(x) = x^q + c`, its orbits, and exact
//! classification of rational points as periodic, strictly preperiodic or
//! wandering.
//!
//! Classification is a total decision procedure over the rationals: an orbit
//! is declared wandering as soon as it enters a region from which it provably
//! escapes, either in absolute value or in some p-adic absolute value.
//! Outside both regions the orbit lives in a finite set, so it must repeat.

use std::collections::HashMap;
use std::fmt;
use std::sync::RwLock;

use num_bigint::BigInt;
use num_traits::{One, Pow, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::config::{FactorConfig, RunConfig};
use crate::error::{Error, Result};
use crate::rat_core::{factor, is_prime_u64, serde_rational, valuation_unchecked, Rational, Valuation};

/// `f(x) = x^q + c` with `q = p^r`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MapRepr", into = "MapRepr")]
pub struct UnicriticalMap {
    p: u64,
    r: u32,
    q: u64,
    c: Rational,
}

#[derive(Serialize, Deserialize)]
struct MapRepr {
    p: u64,
    r: u32,
    #[serde(with = "serde_rational")]
    c: Rational,
}

impl TryFrom<MapRepr> for UnicriticalMap {
    type Error = Error;
    fn try_from(repr: MapRepr) -> Result<Self> {
        UnicriticalMap::from_prime_power(repr.p, repr.r, repr.c)
    }
}

impl From<UnicriticalMap> for MapRepr {
    fn from(map: UnicriticalMap) -> Self {
        MapRepr {
            p: map.p,
            r: map.r,
            c: map.c,
        }
    }
}

impl UnicriticalMap {
    /// Builds the map from its degree, which must be a prime power.
    pub fn new(q: u64, c: Rational) -> Result<Self> {
        if q < 2 {
            return Err(Error::NotPrimePower(q));
        }
        let p = (2..=q)
            .find(|d| q.is_multiple_of(*d))
            .expect("q >= 2 has a smallest divisor");
        let mut rest = q;
        let mut r = 0;
        while rest.is_multiple_of(p) {
            rest /= p;
            r += 1;
        }
        if rest != 1 {
            return Err(Error::NotPrimePower(q));
        }
        Ok(UnicriticalMap { p, r, q, c })
    }

    pub fn from_prime_power(p: u64, r: u32, c: Rational) -> Result<Self> {
        if !is_prime_u64(p) || r == 0 {
            return Err(Error::InvalidArgument(format!("p = {p}, r = {r}")));
        }
        let q = p
            .checked_pow(r)
            .filter(|&q| q <= i32::MAX as u64)
            .ok_or_else(|| Error::InvalidArgument(format!("{p}^{r} is too large")))?;
        Ok(UnicriticalMap { p, r, q, c })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn c(&self) -> &Rational {
        &self.c
    }

    /// The hypothesis of the Jones-Levy eventual stability theorem: `c` is
    /// integral at `p`.
    pub fn jones_levy_applicable(&self) -> bool {
        valuation_unchecked(&self.c, &BigInt::from(self.p)).is_nonnegative()
    }

    pub fn evaluate(&self, x: &Rational) -> Rational {
        Pow::pow(x, self.q as i32) + &self.c
    }

    /// `f^n(x)` with the default height budget.
    pub fn iterate(&self, x: &Rational, n: u32) -> Result<Rational> {
        self.iterate_with_budget(x, n, RunConfig::default().height_budget_bits)
    }

    pub fn iterate_with_budget(&self, x: &Rational, n: u32, budget_bits: u64) -> Result<Rational> {
        let mut value = x.clone();
        for _ in 0..n {
            value = self.evaluate(&value);
            check_height(&value, budget_bits)?;
        }
        Ok(value)
    }

    fn escape_radius(&self) -> Rational {
        let two = Rational::from_integer(BigInt::from(2));
        let shifted = self.c.abs() + &two;
        if shifted > two {
            shifted
        } else {
            two
        }
    }

    /// Whether `x` lies in a region from which the orbit provably escapes.
    fn escape_witness(&self, x: &Rational, at_iterate: usize) -> Option<EscapeWitness> {
        if x.abs() >= self.escape_radius() {
            return Some(EscapeWitness::Archimedean {
                at_iterate,
                value: x.clone(),
            });
        }
        // some prime p has q v_p(x) < v_p(c)  <=>  den(x)^q does not divide den(c)
        if x.denom().is_one() {
            return None;
        }
        let den_power = Pow::pow(x.denom(), self.q as u32);
        if (self.c.denom() % &den_power).is_zero() {
            return None;
        }
        let config = FactorConfig {
            rho_step_budget: u64::MAX,
            ..FactorConfig::default()
        };
        let fact = factor(x.denom(), &config).expect("denominator is nonzero");
        let q = self.q as i64;
        let (prime, v) = fact
            .factors
            .iter()
            .map(|f| (f.prime.clone(), valuation_unchecked(x, &f.prime)))
            .find(|(p, v)| {
                let vx = v.finite().expect("x is nonzero");
                Valuation::Finite(q * vx) < valuation_unchecked(&self.c, p)
            })
            .expect("unbudgeted factorization of the denominator is complete");
        Some(EscapeWitness::NonArchimedean {
            at_iterate,
            value: x.clone(),
            prime,
            valuation: v.finite().expect("x is nonzero"),
        })
    }

    /// Exact orbit classification of `x`.
    pub fn classify(&self, x: &Rational) -> OrbitClassification {
        let mut seen: HashMap<Rational, usize> = HashMap::new();
        let mut orbit: Vec<Rational> = Vec::new();
        let mut current = x.clone();
        loop {
            if let Some(&first) = seen.get(&current) {
                let period = orbit.len() - first;
                orbit.push(current);
                let status = if first == 0 {
                    OrbitStatus::Periodic { period }
                } else {
                    OrbitStatus::StrictlyPreperiodic { tail: first, period }
                };
                return OrbitClassification {
                    status,
                    orbit_prefix: orbit,
                };
            }
            if let Some(witness) = self.escape_witness(&current, orbit.len()) {
                orbit.push(current);
                return OrbitClassification {
                    status: OrbitStatus::Wandering { witness },
                    orbit_prefix: orbit,
                };
            }
            seen.insert(current.clone(), orbit.len());
            let next = self.evaluate(&current);
            orbit.push(current);
            current = next;
        }
    }

    /// Whether 0, the only finite critical point, is preperiodic.
    pub fn is_pcf(&self) -> PcfStatus {
        match self.classify(&Rational::zero()).status {
            OrbitStatus::Wandering { witness } => PcfStatus::No(witness),
            _ => PcfStatus::Yes,
        }
    }
}

impl fmt::Display for UnicriticalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.c.is_negative() {
            write!(f, "x^{} - {}", self.q, -&self.c)
        } else {
            write!(f, "x^{} + {}", self.q, self.c)
        }
    }
}

fn check_height(x: &Rational, budget_bits: u64) -> Result<()> {
    let bits = x.numer().bits().max(x.denom().bits());
    if bits > budget_bits {
        return Err(Error::HeightBudget {
            bits,
            budget: budget_bits,
        });
    }
    Ok(())
}

/// Certificate that an orbit never repeats.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EscapeWitness {
    /// `|value| >= max(2, |c| + 2)`, so absolute values increase forever.
    Archimedean {
        at_iterate: usize,
        #[serde(with = "serde_rational")]
        value: Rational,
    },
    /// `v < 0` and `q v < v_prime(c)`, so `v_prime` decreases forever.
    NonArchimedean {
        at_iterate: usize,
        #[serde(with = "serde_rational")]
        value: Rational,
        #[serde(with = "crate::rat_core::serde_bigint")]
        prime: BigInt,
        valuation: i64,
    },
}

impl EscapeWitness {
    pub fn at_iterate(&self) -> usize {
        match self {
            EscapeWitness::Archimedean { at_iterate, .. }
            | EscapeWitness::NonArchimedean { at_iterate, .. } => *at_iterate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum OrbitStatus {
    Periodic { period: usize },
    StrictlyPreperiodic { tail: usize, period: usize },
    Wandering { witness: EscapeWitness },
}

impl OrbitStatus {
    pub fn is_preperiodic(&self) -> bool {
        !matches!(self, OrbitStatus::Wandering { .. })
    }

    pub fn is_strictly_preperiodic(&self) -> bool {
        matches!(self, OrbitStatus::StrictlyPreperiodic { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitClassification {
    #[serde(flatten)]
    pub status: OrbitStatus,
    /// Orbit from the start point. For preperiodic points the last entry is
    /// the first repeated value; for wandering points it is the escape point.
    #[serde(with = "serde_rational::vec")]
    pub orbit_prefix: Vec<Rational>,
}

impl OrbitClassification {
    /// The distinct values of the forward orbit `f^l(x), l >= 0`, when finite.
    pub fn finite_orbit(&self) -> Option<&[Rational]> {
        match self.status {
            OrbitStatus::Wandering { .. } => None,
            _ => Some(&self.orbit_prefix[..self.orbit_prefix.len() - 1]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PcfStatus {
    Yes,
    No(EscapeWitness),
    /// Neither a repeat nor an escape was observed within `depth` iterates.
    Undecided { depth: usize },
}

/// The critical orbit `0, f(0), f^2(0), ...`, extended on demand.
///
/// Extension takes a write lock, so concurrent readers always see a
/// consistent prefix.
#[derive(Debug)]
pub struct CriticalOrbit {
    map: UnicriticalMap,
    values: RwLock<Vec<Rational>>,
    height_budget_bits: u64,
}

impl CriticalOrbit {
    pub fn new(map: UnicriticalMap) -> Self {
        Self::with_budget(map, RunConfig::default().height_budget_bits)
    }

    pub fn with_budget(map: UnicriticalMap, height_budget_bits: u64) -> Self {
        CriticalOrbit {
            map,
            values: RwLock::new(vec![Rational::zero()]),
            height_budget_bits,
        }
    }

    pub fn map(&self) -> &UnicriticalMap {
        &self.map
    }

    fn ensure(&self, n: usize) -> Result<()> {
        if self.values.read().expect("lock poisoned").len() > n {
            return Ok(());
        }
        let mut values = self.values.write().expect("lock poisoned");
        while values.len() <= n {
            let next = self.map.evaluate(values.last().expect("non-empty"));
            check_height(&next, self.height_budget_bits)?;
            values.push(next);
        }
        Ok(())
    }

    /// `f^n(0)`.
    pub fn value(&self, n: usize) -> Result<Rational> {
        self.ensure(n)?;
        Ok(self.values.read().expect("lock poisoned")[n].clone())
    }

    /// `[f^0(0), ..., f^n(0)]`.
    pub fn prefix(&self, n: usize) -> Result<Vec<Rational>> {
        self.ensure(n)?;
        Ok(self.values.read().expect("lock poisoned")[..=n].to_vec())
    }

    pub fn pcf(&self) -> PcfStatus {
        self.map.is_pcf()
    }

    /// PCF status judged only from the first `depth` iterates of 0.
    pub fn pcf_within(&self, depth: usize) -> Result<PcfStatus> {
        let values = self.prefix(depth)?;
        for (i, x) in values.iter().enumerate() {
            if values[..i].contains(x) {
                return Ok(PcfStatus::Yes);
            }
            if let Some(w) = self.map.escape_witness(x, i) {
                return Ok(PcfStatus::No(w));
            }
        }
        Ok(PcfStatus::Undecided { depth })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat_core::{parse_rational, rational_from_int};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn quad(c: i64) -> UnicriticalMap {
        UnicriticalMap::new(2, rational_from_int(c)).unwrap()
    }

    #[test]
    fn construction() {
        let f = UnicriticalMap::new(8, q("1/2")).unwrap();
        assert_eq!((f.p(), f.r(), f.q()), (2, 3, 8));
        assert!(!f.jones_levy_applicable());
        assert!(UnicriticalMap::new(6, q("1")).is_err());
        assert!(UnicriticalMap::new(1, q("1")).is_err());
        assert!(UnicriticalMap::from_prime_power(4, 1, q("1")).is_err());
        assert!(quad(-6).jones_levy_applicable());
        assert_eq!(quad(-6).to_string(), "x^2 - 6");
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(quad(-6).evaluate(&q("0")), q("-6"));
        assert_eq!(quad(-6).evaluate(&q("-3")), q("3"));
        let cubic = UnicriticalMap::new(3, q("1/2")).unwrap();
        assert_eq!(cubic.evaluate(&q("1/2")), q("5/8"));
    }

    #[test]
    fn iterate_examples() {
        let f = quad(-6);
        assert_eq!(f.iterate(&q("0"), 3).unwrap(), q("894"));
        assert_eq!(f.iterate(&q("7/3"), 0).unwrap(), q("7/3"));
        assert_eq!(f.iterate(&q("3"), 7).unwrap(), q("3"));
        assert!(matches!(
            f.iterate_with_budget(&q("0"), 10, 64),
            Err(Error::HeightBudget { .. })
        ));
    }

    #[test]
    fn classify_examples() {
        let f = quad(-6);
        let c = f.classify(&q("-3"));
        assert_eq!(c.status, OrbitStatus::StrictlyPreperiodic { tail: 1, period: 1 });
        assert_eq!(c.orbit_prefix, vec![q("-3"), q("3"), q("3")]);
        assert_eq!(f.classify(&q("3")).status, OrbitStatus::Periodic { period: 1 });
        let c = f.classify(&q("0"));
        assert_eq!(
            c.status,
            OrbitStatus::Wandering {
                witness: EscapeWitness::Archimedean {
                    at_iterate: 2,
                    value: q("30")
                }
            }
        );
    }

    #[test]
    fn classification_json_shape() {
        let f = quad(-6);
        let json = serde_json::to_value(f.classify(&q("-3"))).unwrap();
        assert_eq!(json["status"], "strictly_preperiodic");
        assert_eq!(json["tail"], 1);
        assert_eq!(json["period"], 1);
        let json = serde_json::to_value(f.classify(&q("0"))).unwrap();
        assert_eq!(json["status"], "wandering");
        assert_eq!(json["witness"]["kind"], "archimedean");
        assert_eq!(json["witness"]["value"], "30");
    }

    #[test]
    fn non_archimedean_escape() {
        // c = -1/2: real orbit of 0 stays bounded, 2-adically it escapes
        let f = UnicriticalMap::new(2, q("-1/2")).unwrap();
        match f.classify(&q("0")).status {
            OrbitStatus::Wandering {
                witness: EscapeWitness::NonArchimedean { prime, valuation, at_iterate, .. },
            } => {
                assert_eq!(prime, BigInt::from(2));
                assert_eq!(valuation, -1);
                assert_eq!(at_iterate, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pcf_examples() {
        assert_eq!(quad(-2).is_pcf(), PcfStatus::Yes);
        assert!(matches!(quad(-6).is_pcf(), PcfStatus::No(_)));
        match quad(1).is_pcf() {
            PcfStatus::No(w) => {
                assert_eq!(w.at_iterate(), 3);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(quad(-1).is_pcf(), PcfStatus::Yes);
        assert_eq!(quad(0).is_pcf(), PcfStatus::Yes);
    }

    #[test]
    fn critical_orbit_memoizes() {
        let orbit = CriticalOrbit::new(quad(-6));
        assert_eq!(orbit.value(1).unwrap(), q("-6"));
        assert_eq!(orbit.value(3).unwrap(), q("894"));
        assert_eq!(orbit.prefix(2).unwrap(), vec![q("0"), q("-6"), q("30")]);
        assert_eq!(orbit.pcf_within(1).unwrap(), PcfStatus::Undecided { depth: 1 });
        assert!(matches!(orbit.pcf_within(2).unwrap(), PcfStatus::No(_)));
        assert_eq!(CriticalOrbit::new(quad(-2)).pcf_within(3).unwrap(), PcfStatus::Yes);
    }

    #[test]
    fn critical_orbit_concurrent_readers_agree() {
        let orbit = std::sync::Arc::new(CriticalOrbit::new(quad(-6)));
        let handles: Vec<_> = (0..4)
            .map(|k| {
                let orbit = orbit.clone();
                std::thread::spawn(move || orbit.prefix(4 + k % 2).unwrap())
            })
            .collect();
        let expected = quad(-6);
        for h in handles {
            let prefix = h.join().unwrap();
            for w in prefix.windows(2) {
                assert_eq!(expected.evaluate(&w[0]), w[1]);
            }
        }
    }

    #[test]
    fn classify_terminates_on_random_small_heights() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..10_000 {
            let qdeg = [2u64, 3, 4, 5][rng.gen_range(0..4)];
            let c = Rational::new(rng.gen_range(-12i64..=12).into(), rng.gen_range(1i64..=6).into());
            let x = Rational::new(rng.gen_range(-12i64..=12).into(), rng.gen_range(1i64..=6).into());
            let f = UnicriticalMap::new(qdeg, c).unwrap();
            let cls = f.classify(&x);
            let periodic = matches!(cls.status, OrbitStatus::Periodic { .. });
            let reappears = cls.orbit_prefix[1..].contains(&x);
            assert_eq!(periodic, reappears);
        }
    }

    fn rational() -> impl Strategy<Value = Rational> {
        (-400i64..400, 1i64..40).prop_map(|(n, d)| Rational::new(n.into(), d.into()))
    }

    proptest! {
        #[test]
        fn archimedean_escape_is_monotone(c in rational(), x in rational(), qdeg in 2u64..6) {
            prop_assume!(UnicriticalMap::new(qdeg, c.clone()).is_ok());
            let f = UnicriticalMap::new(qdeg, c).unwrap();
            if x.abs() >= f.escape_radius() {
                prop_assert!(f.evaluate(&x).abs() > x.abs());
            }
        }

        #[test]
        fn non_archimedean_escape_is_monotone(c in rational(), x in rational(), prime in prop::sample::select(vec![2i64, 3, 5, 7])) {
            let f = UnicriticalMap::new(2, c.clone()).unwrap();
            let p = BigInt::from(prime);
            let vx = valuation_unchecked(&x, &p);
            if let Valuation::Finite(v) = vx {
                if v < 0 && Valuation::Finite(2 * v) < valuation_unchecked(&c, &p) {
                    prop_assert_eq!(valuation_unchecked(&f.evaluate(&x), &p), Valuation::Finite(2 * v));
                }
            }
        }
    }
}
