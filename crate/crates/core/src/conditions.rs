//! Conditions R and U, the exclusion set S, and the search for a prime
//! satisfying Condition R at a given level.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::config::FactorConfig;
use crate::dynamics::{OrbitClassification, OrbitStatus, UnicriticalMap};
use crate::error::{Error, Result};
use crate::rat_core::{factor, is_prime, valuation_unchecked, FoundBy, Rational, Valuation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConditionKind {
    R,
    U,
}

/// One clause of a condition, with the valuation that decided it when there
/// is one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub label: char,
    pub holds: bool,
    /// For the orbit clause: every `i` with `v_p(f^i(0) - beta) != 0`.
    pub failing_indices: Vec<usize>,
    /// The deciding valuation; for the orbit clause, the first offending one.
    pub valuation: Option<Valuation>,
}

/// Exact evaluation of Condition R or U at one prime.
///
/// `orbit_valuations[i] = v_p(f^i(0) - beta)`; for R it covers `0 <= i < n`,
/// for U it covers `0 <= i <= n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionReport {
    pub kind: ConditionKind,
    pub prime: BigInt,
    pub beta: Rational,
    pub level: u32,
    /// Characteristic prime of `q`, needed by clause (c) of R.
    pub char_prime: u64,
    pub good_reduction: bool,
    pub orbit_valuations: Vec<Valuation>,
    /// `v_p(f^n(0) - beta)`, R only.
    pub top_valuation: Option<Valuation>,
    pub beta_valuation: Valuation,
    pub verdict: bool,
}

impl ConditionReport {
    fn assemble(
        kind: ConditionKind,
        prime: BigInt,
        beta: Rational,
        level: u32,
        char_prime: u64,
        good_reduction: bool,
        orbit_valuations: Vec<Valuation>,
        top_valuation: Option<Valuation>,
        beta_valuation: Valuation,
    ) -> Self {
        let mut report = ConditionReport {
            kind,
            prime,
            beta,
            level,
            char_prime,
            good_reduction,
            orbit_valuations,
            top_valuation,
            beta_valuation,
            verdict: false,
        };
        report.verdict = report.clauses().iter().all(|c| c.holds);
        report
    }

    /// Rebuilds a report from recorded valuations without recomputing them.
    pub fn from_recorded_r(
        map: &UnicriticalMap,
        prime: BigInt,
        beta: Rational,
        level: u32,
        good_reduction: bool,
        orbit_valuations: Vec<Valuation>,
        top_valuation: Valuation,
        beta_valuation: Valuation,
    ) -> Self {
        Self::assemble(
            ConditionKind::R,
            prime,
            beta,
            level,
            map.p(),
            good_reduction,
            orbit_valuations,
            Some(top_valuation),
            beta_valuation,
        )
    }

    fn orbit_clause(&self, label: char) -> Clause {
        let bad: Vec<usize> = (0..self.orbit_valuations.len())
            .filter(|&i| !self.orbit_valuations[i].is_zero())
            .collect();
        Clause {
            label,
            holds: bad.is_empty(),
            valuation: bad.first().map(|&i| self.orbit_valuations[i]),
            failing_indices: bad,
        }
    }

    fn unit_clause(&self, label: char, v: Valuation) -> Clause {
        Clause {
            label,
            holds: v.is_zero(),
            failing_indices: Vec::new(),
            valuation: Some(v),
        }
    }

    /// Clauses in order: R has (a)-(d), U has (a)-(c).
    pub fn clauses(&self) -> Vec<Clause> {
        let a = Clause {
            label: 'a',
            holds: self.good_reduction,
            failing_indices: Vec::new(),
            valuation: None,
        };
        match self.kind {
            ConditionKind::R => {
                let top = self.top_valuation.unwrap_or(Valuation::Infinite);
                let c = Clause {
                    label: 'c',
                    holds: matches!(top, Valuation::Finite(v)
                        if v > 0 && v % self.char_prime as i64 != 0),
                    failing_indices: Vec::new(),
                    valuation: Some(top),
                };
                vec![a, self.orbit_clause('b'), c, self.unit_clause('d', self.beta_valuation)]
            }
            ConditionKind::U => vec![a, self.orbit_clause('b'), self.unit_clause('c', self.beta_valuation)],
        }
    }

    pub fn clause(&self, label: char) -> Option<Clause> {
        self.clauses().into_iter().find(|c| c.label == label)
    }

    pub fn failing_clauses(&self) -> Vec<char> {
        self.clauses()
            .into_iter()
            .filter(|c| !c.holds)
            .map(|c| c.label)
            .collect()
    }
}

/// `v_p(c) >= 0` and `p` does not divide `q`.
pub fn good_separable_reduction(f: &UnicriticalMap, p: &BigInt) -> bool {
    valuation_unchecked(f.c(), p).is_nonnegative() && !(BigInt::from(f.q()) % p).is_zero()
}

/// `[f^0(0) - beta, ..., f^n(0) - beta]`.
pub fn critical_offsets(f: &UnicriticalMap, beta: &Rational, n: u32) -> Result<Vec<Rational>> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut x = Rational::zero();
    out.push(&x - beta);
    for _ in 0..n {
        x = f.iterate(&x, 1)?;
        out.push(&x - beta);
    }
    Ok(out)
}

fn require_prime(p: &BigInt) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p.clone()))
    }
}

fn report_r_from_offsets(
    f: &UnicriticalMap,
    beta: &Rational,
    offsets: &[Rational],
    p: &BigInt,
) -> ConditionReport {
    let n = offsets.len() - 1;
    ConditionReport::assemble(
        ConditionKind::R,
        p.clone(),
        beta.clone(),
        n as u32,
        f.p(),
        good_separable_reduction(f, p),
        offsets[..n].iter().map(|d| valuation_unchecked(d, p)).collect(),
        Some(valuation_unchecked(&offsets[n], p)),
        valuation_unchecked(beta, p),
    )
}

fn report_u_from_offsets(
    f: &UnicriticalMap,
    beta: &Rational,
    offsets: &[Rational],
    p: &BigInt,
) -> ConditionReport {
    ConditionReport::assemble(
        ConditionKind::U,
        p.clone(),
        beta.clone(),
        offsets.len() as u32 - 1,
        f.p(),
        good_separable_reduction(f, p),
        offsets.iter().map(|d| valuation_unchecked(d, p)).collect(),
        None,
        valuation_unchecked(beta, p),
    )
}

/// Condition R at `beta` for level `n >= 1` and prime `p`.
pub fn check_condition_r(
    f: &UnicriticalMap,
    beta: &Rational,
    n: u32,
    p: &BigInt,
) -> Result<ConditionReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("Condition R needs n >= 1".into()));
    }
    require_prime(p)?;
    let offsets = critical_offsets(f, beta, n)?;
    Ok(report_r_from_offsets(f, beta, &offsets, p))
}

/// Condition U at `beta` for level `n >= 0` and prime `p`.
pub fn check_condition_u(
    f: &UnicriticalMap,
    beta: &Rational,
    n: u32,
    p: &BigInt,
) -> Result<ConditionReport> {
    require_prime(p)?;
    let offsets = critical_offsets(f, beta, n)?;
    Ok(report_u_from_offsets(f, beta, &offsets, p))
}

/// Why a prime belongs to S.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum ExclusionReason {
    BadReduction,
    Inseparable,
    /// Divides the numerator or denominator of point `index`.
    ValuationOfPoint { index: usize },
    /// Divides the numerator of `f^steps(alpha_from) - alpha_to`.
    OrbitCollision { from: usize, to: usize, steps: u32 },
    /// Ramification in the splitting field over the base; empty over Q.
    BaseRamificationPlaceholder,
}

/// The finite set S of excluded primes, with provenance.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionSet {
    #[serde(with = "reasons_by_prime")]
    pub primes: BTreeMap<BigInt, BTreeSet<ExclusionReason>>,
    /// Clauses that contribute no primes over the rationals.
    pub placeholders: Vec<ExclusionReason>,
    /// Composite parts of exclusion numbers the factorizer could not split.
    /// Any prime dividing one of them is treated as excluded.
    #[serde(with = "crate::rat_core::serde_bigint_vec")]
    pub unfactored: Vec<BigInt>,
}

mod reasons_by_prime {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        primes: &BTreeMap<BigInt, BTreeSet<ExclusionReason>>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let as_text: BTreeMap<String, &BTreeSet<ExclusionReason>> =
            primes.iter().map(|(p, r)| (p.to_string(), r)).collect();
        as_text.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<BTreeMap<BigInt, BTreeSet<ExclusionReason>>, D::Error> {
        use serde::de::Error as _;
        let raw = BTreeMap::<String, BTreeSet<ExclusionReason>>::deserialize(d)?;
        raw.into_iter()
            .map(|(k, v)| {
                k.parse::<BigInt>()
                    .map(|p| (p, v))
                    .map_err(|_| D::Error::custom(format!("invalid prime {k:?}")))
            })
            .collect()
    }
}

impl ExclusionSet {
    pub fn contains(&self, p: &BigInt) -> bool {
        self.primes.contains_key(p) || self.unfactored.iter().any(|m| (m % p).is_zero())
    }

    pub fn prime_list(&self) -> Vec<BigInt> {
        self.primes.keys().cloned().collect()
    }

    fn add(&mut self, p: BigInt, reason: ExclusionReason) {
        self.primes.entry(p).or_default().insert(reason);
    }

    fn add_divisors(&mut self, n: &BigInt, reason: ExclusionReason, config: &FactorConfig) {
        if n.is_zero() {
            return;
        }
        let fact = factor(n, config).expect("nonzero");
        for p in fact.primes() {
            self.add(p.clone(), reason.clone());
        }
        if !fact.complete && !self.unfactored.contains(&fact.cofactor) {
            self.unfactored.push(fact.cofactor);
        }
    }
}

/// Classifies every point and checks the hypotheses shared by the S-set
/// construction and joint certification, in this order: distinct points,
/// no orbit collisions among preperiodic points, every point strictly
/// preperiodic.
pub fn check_points(f: &UnicriticalMap, points: &[Rational]) -> Result<Vec<OrbitClassification>> {
    for (i, a) in points.iter().enumerate() {
        if points[..i].contains(a) {
            return Err(Error::RepeatedPoint(a.clone()));
        }
    }
    let classes: Vec<OrbitClassification> = points.iter().map(|a| f.classify(a)).collect();
    for (i, ci) in classes.iter().enumerate() {
        let Some(orbit) = ci.finite_orbit() else { continue };
        for (l, w) in orbit.iter().enumerate().skip(1) {
            if let Some(j) = points.iter().position(|a| a == w) {
                if j != i {
                    return Err(Error::OrbitCollision {
                        from: points[i].clone(),
                        to: points[j].clone(),
                        steps: l as u32,
                    });
                }
            }
        }
    }
    for (a, class) in points.iter().zip(&classes) {
        match class.status {
            OrbitStatus::StrictlyPreperiodic { .. } => {}
            OrbitStatus::Periodic { .. } => return Err(Error::PeriodicPoint(a.clone())),
            OrbitStatus::Wandering { .. } => return Err(Error::WanderingPoint(a.clone())),
        }
    }
    Ok(classes)
}

/// Rejects `beta` lying on the critical orbit.
pub fn check_not_post_critical(f: &UnicriticalMap, beta: &Rational) -> Result<()> {
    let zero = f.classify(&Rational::zero());
    if let Some(orbit) = zero.finite_orbit() {
        if let Some(m) = orbit.iter().skip(1).position(|x| x == beta) {
            return Err(Error::PostCritical {
                beta: beta.clone(),
                m: m as u32 + 1,
            });
        }
    }
    // a wandering critical orbit never meets a preperiodic beta
    Ok(())
}

/// Builds S for the given strictly preperiodic points.
pub fn build_exclusion_set(
    f: &UnicriticalMap,
    points: &[Rational],
    config: &FactorConfig,
) -> Result<ExclusionSet> {
    let classes = check_points(f, points)?;
    let mut set = ExclusionSet::default();
    set.add_divisors(f.c().denom(), ExclusionReason::BadReduction, config);
    set.add(BigInt::from(f.p()), ExclusionReason::Inseparable);
    for (index, a) in points.iter().enumerate() {
        if !a.is_zero() {
            set.add_divisors(a.numer(), ExclusionReason::ValuationOfPoint { index }, config);
            set.add_divisors(a.denom(), ExclusionReason::ValuationOfPoint { index }, config);
        }
    }
    for (from, class) in classes.iter().enumerate() {
        let orbit = class.finite_orbit().expect("strictly preperiodic");
        for (to, target) in points.iter().enumerate() {
            for (steps, w) in orbit.iter().enumerate() {
                if from == to && steps == 0 {
                    continue;
                }
                let reason = ExclusionReason::OrbitCollision {
                    from,
                    to,
                    steps: steps as u32,
                };
                set.add_divisors((w - target).numer(), reason, config);
            }
        }
    }
    set.placeholders.push(ExclusionReason::BaseRamificationPlaceholder);
    Ok(set)
}

/// A prime satisfying Condition R, with the evidence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeCertificate {
    pub map: UnicriticalMap,
    pub beta: Rational,
    pub level: u32,
    pub prime: BigInt,
    pub report: ConditionReport,
    /// `v_prime(f^m(0) - beta) = 0` for all `m < level`.
    pub primitive: bool,
    pub found_by: FoundBy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NotFoundReason {
    /// Every prime divisor was examined and none qualifies.
    ExhaustedComplete,
    /// Some cofactor stayed unfactored; no claim either way.
    ExhaustedIncomplete,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(PrimeCertificate),
    NotFound(NotFoundReason),
}

impl SearchOutcome {
    pub fn certificate(&self) -> Option<&PrimeCertificate> {
        match self {
            SearchOutcome::Found(c) => Some(c),
            SearchOutcome::NotFound(_) => None,
        }
    }
}

/// Every prime outside `exclusions` dividing the numerator of
/// `f^n(0) - beta` that satisfies Condition R, in ascending order.
pub fn qualifying_r_primes(
    f: &UnicriticalMap,
    beta: &Rational,
    n: u32,
    exclusions: &ExclusionSet,
    config: &FactorConfig,
) -> Result<(Vec<PrimeCertificate>, bool)> {
    if n == 0 {
        return Err(Error::InvalidArgument("Condition R needs n >= 1".into()));
    }
    match f.classify(beta).status {
        OrbitStatus::StrictlyPreperiodic { .. } => {}
        OrbitStatus::Periodic { .. } => return Err(Error::PeriodicPoint(beta.clone())),
        OrbitStatus::Wandering { .. } => return Err(Error::WanderingPoint(beta.clone())),
    }
    check_not_post_critical(f, beta)?;
    let offsets = critical_offsets(f, beta, n)?;
    let top = &offsets[n as usize];
    let fact = factor(&top.numer().abs(), config)?;
    let mut candidates: Vec<_> = fact
        .factors
        .iter()
        .filter(|pf| !exclusions.contains(&pf.prime))
        .collect();
    candidates.sort_by(|a, b| a.prime.cmp(&b.prime));
    let certificates = candidates
        .into_iter()
        .filter_map(|pf| {
            let report = report_r_from_offsets(f, beta, &offsets, &pf.prime);
            report.verdict.then(|| PrimeCertificate {
                map: f.clone(),
                beta: beta.clone(),
                level: n,
                prime: pf.prime.clone(),
                primitive: report.clause('b').is_some_and(|c| c.holds),
                report,
                found_by: pf.found_by,
            })
        })
        .collect();
    Ok((certificates, fact.complete))
}

/// The smallest prime outside `exclusions` satisfying Condition R at level
/// `n`, among the prime divisors of `f^n(0) - beta` found under budget.
pub fn search_condition_r_prime(
    f: &UnicriticalMap,
    beta: &Rational,
    n: u32,
    exclusions: &ExclusionSet,
    config: &FactorConfig,
) -> Result<SearchOutcome> {
    let (mut found, complete) = qualifying_r_primes(f, beta, n, exclusions, config)?;
    if found.is_empty() {
        let reason = if complete {
            NotFoundReason::ExhaustedComplete
        } else {
            NotFoundReason::ExhaustedIncomplete
        };
        return Ok(SearchOutcome::NotFound(reason));
    }
    Ok(SearchOutcome::Found(found.swap_remove(0)))
}

/// Whether `v` is positive and prime to `p`.
pub fn positive_and_prime_to(v: Valuation, p: u64) -> bool {
    matches!(v, Valuation::Finite(k) if k > 0 && !k.is_multiple_of(&(p as i64)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat_core::{parse_rational, rational_from_int};
    use proptest::prelude::*;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn f6() -> UnicriticalMap {
        UnicriticalMap::new(2, rational_from_int(-6)).unwrap()
    }

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn good_reduction_examples() {
        assert!(good_separable_reduction(&f6(), &big(3)));
        assert!(!good_separable_reduction(&f6(), &big(2)));
        let g = UnicriticalMap::new(2, q("-3/4")).unwrap();
        assert!(!good_separable_reduction(&g, &big(2)));
    }

    #[test]
    fn condition_r_at_111() {
        let beta = q("111");
        let r = check_condition_r(&f6(), &beta, 1, &big(3)).unwrap();
        assert!(!r.verdict);
        let c = r.clause('c').unwrap();
        assert!(!c.holds);
        assert_eq!(c.valuation, Some(Valuation::Finite(2)));

        let r = check_condition_r(&f6(), &beta, 3, &big(3)).unwrap();
        assert!(!r.verdict);
        assert!(r.clause('c').unwrap().holds);
        assert_eq!(r.top_valuation, Some(Valuation::Finite(3)));
        let b = r.clause('b').unwrap();
        assert!(!b.holds);
        assert_eq!(b.failing_indices, vec![0, 1, 2]);
        assert_eq!(r.orbit_valuations[1], Valuation::Finite(2));
        assert_eq!(
            r.orbit_valuations,
            vec![Valuation::Finite(1), Valuation::Finite(2), Valuation::Finite(4)]
        );
    }

    #[test]
    fn condition_r_at_minus_three() {
        let r = check_condition_r(&f6(), &q("-3"), 2, &big(11)).unwrap();
        assert!(r.verdict);
        assert_eq!(r.orbit_valuations, vec![Valuation::Finite(0); 2]);
        assert_eq!(r.top_valuation, Some(Valuation::Finite(1)));
        assert!(r.failing_clauses().is_empty());
        assert!(check_condition_r(&f6(), &q("-3"), 2, &big(12)).is_err());
        assert!(check_condition_r(&f6(), &q("-3"), 0, &big(11)).is_err());
    }

    #[test]
    fn condition_u_examples() {
        assert!(check_condition_u(&f6(), &q("111"), 0, &big(7)).unwrap().verdict);
        let u = check_condition_u(&f6(), &q("111"), 1, &big(3)).unwrap();
        assert!(!u.verdict);
        assert_eq!(u.failing_clauses(), vec!['b', 'c']);
    }

    #[test]
    fn exclusion_set_single_point() {
        let s = build_exclusion_set(&f6(), &[q("-3")], &FactorConfig::default()).unwrap();
        assert_eq!(s.prime_list(), vec![big(2), big(3)]);
        let reasons = &s.primes[&big(3)];
        assert!(reasons.contains(&ExclusionReason::ValuationOfPoint { index: 0 }));
        assert!(reasons.contains(&ExclusionReason::OrbitCollision { from: 0, to: 0, steps: 1 }));
        assert!(s.primes[&big(2)].contains(&ExclusionReason::Inseparable));
        assert_eq!(s.placeholders, vec![ExclusionReason::BaseRamificationPlaceholder]);
    }

    #[test]
    fn exclusion_set_two_points() {
        let s = build_exclusion_set(&f6(), &[q("-3"), q("2")], &FactorConfig::default()).unwrap();
        // differences across the orbits {-3, 3} and {2, -2}: 5, 1, 1, 5, 6, 4
        assert_eq!(s.prime_list(), vec![big(2), big(3), big(5)]);
    }

    #[test]
    fn exclusion_set_rejections() {
        let cfg = FactorConfig::default();
        assert_eq!(
            build_exclusion_set(&f6(), &[q("-3"), q("3")], &cfg).unwrap_err(),
            Error::OrbitCollision { from: q("-3"), to: q("3"), steps: 1 }
        );
        assert_eq!(
            build_exclusion_set(&f6(), &[q("3")], &cfg).unwrap_err(),
            Error::PeriodicPoint(q("3"))
        );
        assert_eq!(
            build_exclusion_set(&f6(), &[q("0")], &cfg).unwrap_err(),
            Error::WanderingPoint(q("0"))
        );
        assert_eq!(
            build_exclusion_set(&f6(), &[q("-3"), q("-3")], &cfg).unwrap_err(),
            Error::RepeatedPoint(q("-3"))
        );
    }

    #[test]
    fn bad_reduction_primes_enter_s() {
        let g = UnicriticalMap::new(3, q("-7/12")).unwrap();
        // no rational preperiodic points needed to test the map-level clauses
        let s = build_exclusion_set(&g, &[], &FactorConfig::default()).unwrap();
        assert_eq!(s.prime_list(), vec![big(2), big(3)]);
        assert!(s.primes[&big(2)].contains(&ExclusionReason::BadReduction));
        assert!(s.primes[&big(3)].contains(&ExclusionReason::Inseparable));
    }

    #[test]
    fn search_examples() {
        let cfg = FactorConfig::default();
        let s = build_exclusion_set(&f6(), &[q("-3")], &cfg).unwrap();
        let cert = search_condition_r_prime(&f6(), &q("-3"), 2, &s, &cfg).unwrap();
        let cert = cert.certificate().unwrap();
        assert_eq!(cert.prime, big(11));
        assert!(cert.primitive);
        assert_eq!(cert.found_by, FoundBy::Trial);

        let cert = search_condition_r_prime(&f6(), &q("-3"), 3, &s, &cfg).unwrap();
        assert_eq!(cert.certificate().unwrap().prime, big(13));

        assert_eq!(
            search_condition_r_prime(&f6(), &q("-3"), 1, &s, &cfg).unwrap(),
            SearchOutcome::NotFound(NotFoundReason::ExhaustedComplete)
        );
        assert_eq!(
            search_condition_r_prime(&f6(), &q("3"), 2, &s, &cfg).unwrap_err(),
            Error::PeriodicPoint(q("3"))
        );
    }

    #[test]
    fn post_critical_beta_is_rejected() {
        // x^2 - 2: 0 -> -2 -> 2 -> 2, and -2 is strictly preperiodic
        let g = UnicriticalMap::new(2, q("-2")).unwrap();
        let cfg = FactorConfig::default();
        assert_eq!(
            search_condition_r_prime(&g, &q("-2"), 2, &ExclusionSet::default(), &cfg).unwrap_err(),
            Error::PostCritical { beta: q("-2"), m: 1 }
        );
    }

    #[test]
    fn certificates_are_primitive_up_to_level_six() {
        let cfg = FactorConfig::default();
        let beta = q("-3");
        let s = build_exclusion_set(&f6(), std::slice::from_ref(&beta), &cfg).unwrap();
        let offsets = critical_offsets(&f6(), &beta, 6).unwrap();
        for n in 2..=6 {
            let out = search_condition_r_prime(&f6(), &beta, n, &s, &cfg).unwrap();
            let cert = out.certificate().unwrap_or_else(|| panic!("level {n}"));
            for d in &offsets[..n as usize] {
                assert_eq!(valuation_unchecked(d, &cert.prime), Valuation::Finite(0));
            }
            let again = check_condition_r(&f6(), &beta, n, &cert.prime).unwrap();
            assert!(again.verdict);
        }
    }

    proptest! {
        #[test]
        fn r_implies_u_one_level_down(
            c in -30i64..30,
            beta in -40i64..40,
            n in 1u32..4,
            p in prop::sample::select(vec![2i64, 3, 5, 7, 11, 13, 17, 19, 23]),
            qdeg in prop::sample::select(vec![2u64, 3, 4]),
        ) {
            let f = UnicriticalMap::new(qdeg, rational_from_int(c)).unwrap();
            let beta = rational_from_int(beta);
            let r = check_condition_r(&f, &beta, n, &big(p)).unwrap();
            if r.verdict {
                prop_assert!(check_condition_u(&f, &beta, n - 1, &big(p)).unwrap().verdict);
            }
        }
    }
}
