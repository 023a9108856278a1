//! Several roots under one map: hypothesis checks, joint layer certificates
//! and the per-level pipeline shared by single trees (`s = 1`) and
//! multitrees.

use std::ops::RangeInclusive;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize, Serializer};

use crate::certificate::{verify_prime_into, ValuationField, VerifyReport};
use crate::conditions::{
    build_exclusion_set, check_condition_u, check_points, qualifying_r_primes, ConditionReport,
    ExclusionSet, NotFoundReason, PrimeCertificate,
};
use crate::config::RunConfig;
use crate::dynamics::{PcfStatus, UnicriticalMap};
use crate::error::{Error, Result};
use crate::irreducibility::{certify_iterate, IrreducibilityVerdict};
use crate::rat_core::{is_perfect_power, serde_bigint, serde_rational, FoundBy, Rational, Valuation};
use crate::wreath::{evaluate_index_criterion, IndexVerdict, LayerReport, LayerVerdict, WreathGroupSpec};

/// Largest `p^s` for which the level-one kernel is enumerated.
const KUMMER_ENUMERATION_LIMIT: u64 = 1 << 16;

/// A validated multitree: distinct strictly preperiodic roots, no root in
/// the forward orbit of another.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultitreeSpec {
    pub map: UnicriticalMap,
    #[serde(with = "serde_rational::vec")]
    pub roots: Vec<Rational>,
}

impl MultitreeSpec {
    pub fn trees(&self) -> u32 {
        self.roots.len() as u32
    }
}

pub fn check_hypotheses(map: &UnicriticalMap, roots: &[Rational]) -> Result<MultitreeSpec> {
    if roots.is_empty() {
        return Err(Error::InvalidArgument("at least one root is needed".into()));
    }
    check_points(map, roots)?;
    Ok(MultitreeSpec {
        map: map.clone(),
        roots: roots.to_vec(),
    })
}

/// Fails with [`Error::MapIsPcf`] when 0 is preperiodic.
pub fn require_non_pcf(map: &UnicriticalMap) -> Result<()> {
    match map.is_pcf() {
        PcfStatus::No(_) => Ok(()),
        _ => Err(Error::MapIsPcf),
    }
}

/// Condition U of root `j` at the prime of root `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossCheck {
    pub a: bool,
    pub b: Vec<Valuation>,
    pub c: ValuationField,
    pub holds: bool,
}

impl CrossCheck {
    fn from_report(report: &ConditionReport) -> Self {
        CrossCheck {
            a: report.good_reduction,
            b: report.orbit_valuations.clone(),
            c: ValuationField {
                v: report.beta_valuation,
            },
            holds: report.verdict,
        }
    }
}

/// One prime per root satisfying Condition R at that root, Condition U at
/// every other root, plus irreducibility of every `f^n(x) - alpha_i`.
///
/// `cross_checks[i][j]` is root `j` at the prime of root `i`; the diagonal
/// is `null`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointLayerCertificate {
    pub map: UnicriticalMap,
    #[serde(with = "serde_rational::vec")]
    pub roots: Vec<Rational>,
    pub level: u32,
    pub per_root: Vec<PrimeCertificate>,
    pub cross_checks: Vec<Vec<Option<CrossCheck>>>,
    pub irreducibility: Vec<IrreducibilityVerdict>,
}

impl JointLayerCertificate {
    pub fn primes(&self) -> Vec<BigInt> {
        self.per_root.iter().map(|c| c.prime.clone()).collect()
    }

    /// Recomputes every clause from scratch.
    pub fn verify(&self, config: &RunConfig) -> VerifyReport {
        let mut out = VerifyReport::default();
        let s = self.roots.len();
        let shape_ok = self.per_root.len() == s
            && self.irreducibility.len() == s
            && self.cross_checks.len() == s
            && self.cross_checks.iter().all(|row| row.len() == s)
            && s > 0;
        if !shape_ok {
            out.fail("", "shape", format!("{s} roots"), "mismatched lengths".into());
            return out.finish();
        }
        let exclusions = match build_exclusion_set(&self.map, &self.roots, &config.factor_config()) {
            Ok(set) => Some(set),
            Err(e) => {
                out.fail("", "hypotheses", "valid roots".into(), e.to_string());
                None
            }
        };
        for (i, cert) in self.per_root.iter().enumerate() {
            let loc = format!("per_root[{i}]");
            if cert.map != self.map || cert.beta != self.roots[i] || cert.level != self.level {
                out.fail(&loc, "shape", "same map, root and level".into(), "differs".into());
                continue;
            }
            verify_prime_into(cert, &loc, &mut out);
            if exclusions.as_ref().is_some_and(|set| set.contains(&cert.prime)) {
                out.fail(&loc, "exclusion", cert.prime.to_string(), "prime lies in S".into());
            }
            for other in &self.per_root[..i] {
                if other.prime == cert.prime {
                    out.fail(&loc, "distinct_primes", cert.prime.to_string(), "repeated".into());
                }
            }
        }
        for (i, row) in self.cross_checks.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                let loc = format!("cross_checks[{i}][{j}]");
                match (i == j, cell) {
                    (true, None) => {}
                    (true, Some(_)) => out.fail(&loc, "shape", "entry".into(), "null on the diagonal".into()),
                    (false, None) => out.fail(&loc, "shape", "null".into(), "entry required".into()),
                    (false, Some(recorded)) => {
                        let prime = &self.per_root[i].prime;
                        match check_condition_u(&self.map, &self.roots[j], self.level, prime) {
                            Ok(report) => {
                                let fresh = CrossCheck::from_report(&report);
                                if &fresh != recorded {
                                    out.fail(&loc, "cross_check", format!("{recorded:?}"), format!("{fresh:?}"));
                                } else if !fresh.holds {
                                    out.fail(&loc, "cross_check", "holds".into(), "fails".into());
                                }
                            }
                            Err(e) => out.fail(&loc, "cross_check", prime.to_string(), e.to_string()),
                        }
                    }
                }
            }
        }
        for (i, recorded) in self.irreducibility.iter().enumerate() {
            let loc = format!("irreducibility[{i}]");
            if !recorded.is_irreducible() {
                out.fail(&loc, "irreducibility", format!("{recorded:?}"), "irreducible required".into());
                continue;
            }
            match certify_iterate(&self.map, &self.roots[i], self.level, config) {
                Ok(v) if v.is_irreducible() => {}
                Ok(v) => out.fail(&loc, "irreducibility", "irreducible".into(), format!("{v:?}")),
                Err(e) => out.fail(&loc, "irreducibility", "irreducible".into(), e.to_string()),
            }
        }
        out.finish()
    }
}

/// Why no joint certificate exists at a level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum JointFailure {
    /// Irreducibility of `f^n(x) - alpha_root` is not certified.
    IrreducibilityUnknown { root: usize },
    Reducible { root: usize },
    NoQualifyingPrime { root: usize, search: NotFoundReason },
    /// Condition R primes exist, but each fails Condition U at another root.
    NoCompatiblePrime { root: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JointOutcome {
    Certified(Box<JointLayerCertificate>),
    NotFound(JointFailure),
}

impl JointOutcome {
    pub fn certificate(&self) -> Option<&JointLayerCertificate> {
        match self {
            JointOutcome::Certified(c) => Some(c),
            JointOutcome::NotFound(_) => None,
        }
    }
}

/// The Condition R search at one root, against the shared exclusion set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RootSearch {
    Found(PrimeCertificate),
    NotFound(NotFoundReason),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootLevel {
    pub root: Rational,
    pub irreducibility: IrreducibilityVerdict,
    pub search: RootSearch,
    /// The layer of this root's own tree.
    pub layer: LayerVerdict,
    qualifying: Vec<PrimeCertificate>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelResult {
    pub level: u32,
    pub roots: Vec<RootLevel>,
    pub joint: JointOutcome,
    /// The layer of the whole multitree.
    pub layer: LayerVerdict,
}

/// Level one by Kummer theory: with `a_i = alpha_i - c`, the layer is
/// `C_p^rank` where `rank` is the rank of `<a_i>` in `Q^*/Q^*p`.
///
/// Over `Q(zeta_p)` a rational is a `p`-th power only if it already is one
/// in `Q`, so the test is exact for `q = p` prime. Prime powers `q = p^r`
/// with `r > 1` are left Unknown.
pub fn kummer_base_layer(map: &UnicriticalMap, roots: &[Rational]) -> LayerVerdict {
    let p = map.p();
    let s = roots.len() as u32;
    if map.r() != 1 || s == 0 {
        return LayerVerdict::Unknown;
    }
    let values: Vec<Rational> = roots.iter().map(|a| a - map.c()).collect();
    if values.iter().any(Zero::is_zero) {
        return LayerVerdict::Unknown;
    }
    let total = match p.checked_pow(s) {
        Some(t) if t <= KUMMER_ENUMERATION_LIMIT => t,
        _ => return LayerVerdict::Unknown,
    };
    let mut kernel = 0u64;
    for code in 0..total {
        let mut rest = code;
        let mut product = Rational::one();
        for a in &values {
            let e = (rest % p) as u32;
            rest /= p;
            product *= num_traits::Pow::pow(a, e);
        }
        if is_perfect_power(&product, p as u32) {
            kernel += 1;
        }
    }
    let mut k = 0u32;
    while kernel > 1 {
        kernel /= p;
        k += 1;
    }
    let rank = s - k;
    if rank == s {
        LayerVerdict::Maximal
    } else {
        LayerVerdict::SubMaximal {
            order: BigUint::from(p).pow(rank),
        }
    }
}

fn root_search(qualifying: &[PrimeCertificate], complete: bool) -> RootSearch {
    match qualifying.first() {
        Some(c) => RootSearch::Found(c.clone()),
        None if complete => RootSearch::NotFound(NotFoundReason::ExhaustedComplete),
        None => RootSearch::NotFound(NotFoundReason::ExhaustedIncomplete),
    }
}

/// Evaluates one level: irreducibility and Condition R per root, then the
/// joint selection with the Condition U matrix.
pub fn evaluate_level(
    spec: &MultitreeSpec,
    exclusions: &ExclusionSet,
    n: u32,
    config: &RunConfig,
) -> Result<LevelResult> {
    if n == 0 {
        return Err(Error::InvalidArgument("levels start at 1".into()));
    }
    let factor_config = config.factor_config();
    let mut roots = Vec::with_capacity(spec.roots.len());
    for alpha in &spec.roots {
        let irreducibility = certify_iterate(&spec.map, alpha, n, config)?;
        let (qualifying, complete) = qualifying_r_primes(&spec.map, alpha, n, exclusions, &factor_config)?;
        let search = root_search(&qualifying, complete);
        let layer = if n == 1 {
            kummer_base_layer(&spec.map, std::slice::from_ref(alpha))
        } else if irreducibility.is_irreducible() && matches!(search, RootSearch::Found(_)) {
            LayerVerdict::Maximal
        } else {
            LayerVerdict::Unknown
        };
        roots.push(RootLevel {
            root: alpha.clone(),
            irreducibility,
            search,
            layer,
            qualifying,
        });
    }
    let joint = select_joint(spec, n, &roots)?;
    let layer = if n == 1 {
        kummer_base_layer(&spec.map, &spec.roots)
    } else if joint.certificate().is_some() {
        LayerVerdict::Maximal
    } else {
        LayerVerdict::Unknown
    };
    Ok(LevelResult {
        level: n,
        roots,
        joint,
        layer,
    })
}

fn select_joint(spec: &MultitreeSpec, n: u32, roots: &[RootLevel]) -> Result<JointOutcome> {
    for (i, r) in roots.iter().enumerate() {
        match &r.irreducibility {
            IrreducibilityVerdict::Irreducible { .. } => {}
            IrreducibilityVerdict::Reducible { .. } => {
                return Ok(JointOutcome::NotFound(JointFailure::Reducible { root: i }))
            }
            IrreducibilityVerdict::Unknown { .. } => {
                return Ok(JointOutcome::NotFound(JointFailure::IrreducibilityUnknown { root: i }))
            }
        }
    }
    let s = roots.len();
    let mut chosen: Vec<PrimeCertificate> = Vec::with_capacity(s);
    let mut matrix: Vec<Vec<Option<CrossCheck>>> = Vec::with_capacity(s);
    for (i, r) in roots.iter().enumerate() {
        if let RootSearch::NotFound(search) = r.search {
            return Ok(JointOutcome::NotFound(JointFailure::NoQualifyingPrime { root: i, search }));
        }
        let mut picked = None;
        'candidates: for cert in &r.qualifying {
            if chosen.iter().any(|c| c.prime == cert.prime) {
                continue;
            }
            let mut row = vec![None; s];
            for (j, alpha) in spec.roots.iter().enumerate() {
                if j == i {
                    continue;
                }
                let report = check_condition_u(&spec.map, alpha, n, &cert.prime)?;
                if !report.verdict {
                    continue 'candidates;
                }
                row[j] = Some(CrossCheck::from_report(&report));
            }
            picked = Some((cert.clone(), row));
            break;
        }
        match picked {
            Some((cert, row)) => {
                chosen.push(cert);
                matrix.push(row);
            }
            None => return Ok(JointOutcome::NotFound(JointFailure::NoCompatiblePrime { root: i })),
        }
    }
    Ok(JointOutcome::Certified(Box::new(JointLayerCertificate {
        map: spec.map.clone(),
        roots: spec.roots.clone(),
        level: n,
        per_root: chosen,
        cross_checks: matrix,
        irreducibility: roots.iter().map(|r| r.irreducibility.clone()).collect(),
    })))
}

/// Joint certification at one level, building the shared exclusion set.
pub fn certify_joint_layer(spec: &MultitreeSpec, n: u32, config: &RunConfig) -> Result<JointOutcome> {
    let exclusions = build_exclusion_set(&spec.map, &spec.roots, &config.factor_config())?;
    Ok(evaluate_level(spec, &exclusions, n, config)?.joint)
}

/// The conclusion that the root fields are jointly independent over the
/// base, witnessed at every level `2..=supported_up_to`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Disjointness {
    pub supported_up_to: u32,
    pub witnesses: Vec<LevelPrimes>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelPrimes {
    pub level: u32,
    #[serde(with = "crate::rat_core::serde_bigint_vec")]
    pub primes: Vec<BigInt>,
}

/// Layer and index bookkeeping for levels `1..=N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexReport {
    pub joint: LayerReport,
    pub joint_index: IndexVerdict,
    #[serde(serialize_with = "biguint_str")]
    pub joint_ambient_order: BigUint,
    pub per_root: Vec<LayerReport>,
    pub per_root_index: Vec<IndexVerdict>,
    /// Only for two or more roots.
    pub disjointness: Option<Disjointness>,
}

fn biguint_str<S: Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

pub fn index_report(spec: &MultitreeSpec, levels: &[LevelResult]) -> Result<IndexReport> {
    let q = spec.map.q();
    let s = spec.trees();
    for (k, l) in levels.iter().enumerate() {
        if l.level != k as u32 + 1 {
            return Err(Error::NonContiguousLevels {
                expected: k as u32 + 1,
                found: l.level,
            });
        }
    }
    let horizon = levels.len() as u32;
    let group = WreathGroupSpec::new(q, horizon);
    let joint = LayerReport::from_verdicts(q, s, levels.iter().map(|l| l.layer.clone()).collect())?;
    let joint_index = evaluate_index_criterion(&group, &joint)?;
    let mut per_root = Vec::new();
    let mut per_root_index = Vec::new();
    for i in 0..spec.roots.len() {
        let report = LayerReport::from_verdicts(q, 1, levels.iter().map(|l| l.roots[i].layer.clone()).collect())?;
        per_root_index.push(evaluate_index_criterion(&group, &report)?);
        per_root.push(report);
    }
    let disjointness = (s > 1).then(|| {
        let witnesses: Vec<LevelPrimes> = levels
            .iter()
            .skip(1)
            .map_while(|l| {
                l.joint.certificate().map(|c| LevelPrimes {
                    level: l.level,
                    primes: c.primes(),
                })
            })
            .collect();
        Disjointness {
            supported_up_to: witnesses.last().map_or(1, |w| w.level),
            witnesses,
        }
    });
    Ok(IndexReport {
        joint,
        joint_index,
        joint_ambient_order: group.order()?.pow(s),
        per_root,
        per_root_index,
        disjointness,
    })
}

/// Everything `certify` and `multitree` report for a range of levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeCertification {
    pub spec: MultitreeSpec,
    pub exclusions: ExclusionSet,
    pub requested: RangeInclusive<u32>,
    /// Levels `1..=end`, whatever the requested start.
    pub levels: Vec<LevelResult>,
    pub index: IndexReport,
}

impl TreeCertification {
    pub fn requested_levels(&self) -> impl Iterator<Item = &LevelResult> {
        self.levels.iter().filter(|l| self.requested.contains(&l.level))
    }

    /// Maximal runs inside the requested range, e.g. `"maximal for 2 ≤ n ≤ 6"`.
    pub fn summary(&self) -> String {
        let mut runs: Vec<(u32, u32)> = Vec::new();
        for l in self.requested_levels() {
            if l.layer != LayerVerdict::Maximal {
                continue;
            }
            match runs.last_mut() {
                Some((_, hi)) if *hi + 1 == l.level => *hi = l.level,
                _ => runs.push((l.level, l.level)),
            }
        }
        if runs.is_empty() {
            return "no level certified maximal".into();
        }
        let parts: Vec<String> = runs
            .iter()
            .map(|&(lo, hi)| if lo == hi { format!("n = {lo}") } else { format!("{lo} ≤ n ≤ {hi}") })
            .collect();
        format!("maximal for {}", parts.join(", "))
    }
}

/// Checks every hypothesis, then evaluates levels `1..=end` of `levels`.
pub fn certify_levels(
    map: &UnicriticalMap,
    roots: &[Rational],
    levels: RangeInclusive<u32>,
    config: &RunConfig,
) -> Result<TreeCertification> {
    let (lo, hi) = (*levels.start(), *levels.end());
    if lo == 0 || lo > hi {
        return Err(Error::InvalidArgument(format!("bad level range {lo}..{hi}")));
    }
    if hi > config.max_level {
        return Err(Error::InvalidArgument(format!(
            "level {hi} exceeds max_level {}",
            config.max_level
        )));
    }
    let spec = check_hypotheses(map, roots)?;
    require_non_pcf(map)?;
    let exclusions = build_exclusion_set(map, roots, &config.factor_config())?;
    let results = (1..=hi)
        .map(|n| evaluate_level(&spec, &exclusions, n, config))
        .collect::<Result<Vec<_>>>()?;
    let index = index_report(&spec, &results)?;
    Ok(TreeCertification {
        spec,
        exclusions,
        requested: levels,
        levels: results,
        index,
    })
}

#[derive(Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
enum RootSearchRepr<'a> {
    Found {
        #[serde(serialize_with = "serde_bigint::serialize")]
        prime: &'a BigInt,
        found_by: FoundBy,
    },
    NotFound {
        reason: NotFoundReason,
    },
}

impl Serialize for RootSearch {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RootSearch::Found(c) => RootSearchRepr::Found {
                prime: &c.prime,
                found_by: c.found_by,
            },
            RootSearch::NotFound(reason) => RootSearchRepr::NotFound { reason: *reason },
        }
        .serialize(s)
    }
}

#[derive(Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
enum JointRepr<'a> {
    Certified {
        #[serde(with = "crate::rat_core::serde_bigint_vec")]
        primes: Vec<BigInt>,
    },
    NotFound {
        #[serde(flatten)]
        failure: &'a JointFailure,
    },
}

impl Serialize for JointOutcome {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            JointOutcome::Certified(c) => JointRepr::Certified { primes: c.primes() },
            JointOutcome::NotFound(failure) => JointRepr::NotFound { failure },
        }
        .serialize(s)
    }
}

impl Serialize for RootLevel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            #[serde(serialize_with = "serde_rational::serialize")]
            root: &'a Rational,
            irreducibility: &'a IrreducibilityVerdict,
            search: &'a RootSearch,
            #[serde(flatten)]
            layer: &'a LayerVerdict,
        }
        Repr {
            root: &self.root,
            irreducibility: &self.irreducibility,
            search: &self.search,
            layer: &self.layer,
        }
        .serialize(s)
    }
}

impl Serialize for LevelResult {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            level: u32,
            roots: &'a [RootLevel],
            joint: &'a JointOutcome,
            #[serde(flatten)]
            layer: &'a LayerVerdict,
        }
        Repr {
            level: self.level,
            roots: &self.roots,
            joint: &self.joint,
            layer: &self.layer,
        }
        .serialize(s)
    }
}

impl Serialize for TreeCertification {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            spec: &'a MultitreeSpec,
            exclusions: &'a ExclusionSet,
            levels: Vec<&'a LevelResult>,
            index: &'a IndexReport,
            summary: String,
        }
        Repr {
            spec: &self.spec,
            exclusions: &self.exclusions,
            levels: self.requested_levels().collect(),
            index: &self.index,
            summary: self.summary(),
        }
        .serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificate::AnyCertificate;
    use crate::conditions::search_condition_r_prime;
    use crate::rat_core::parse_rational;
    use crate::wreath::group_order;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn roots(list: &[&str]) -> Vec<Rational> {
        list.iter().map(|s| q(s)).collect()
    }

    fn x2m6() -> UnicriticalMap {
        UnicriticalMap::new(2, q("-6")).unwrap()
    }

    #[test]
    fn hypotheses() {
        let f = x2m6();
        assert!(check_hypotheses(&f, &roots(&["-3", "2"])).is_ok());
        assert!(check_hypotheses(&f, &roots(&["-3"])).is_ok());
        match check_hypotheses(&f, &roots(&["-3", "3"])) {
            Err(Error::OrbitCollision { from, to, steps }) => {
                assert_eq!((from, to, steps), (q("-3"), q("3"), 1));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            check_hypotheses(&f, &roots(&["-3", "0"])),
            Err(Error::WanderingPoint(_))
        ));
        assert!(matches!(check_hypotheses(&f, &roots(&["3"])), Err(Error::PeriodicPoint(_))));
        assert!(check_hypotheses(&f, &[]).is_err());
    }

    #[test]
    fn joint_level_two() {
        let spec = check_hypotheses(&x2m6(), &roots(&["-3", "2"])).unwrap();
        let cert = certify_joint_layer(&spec, 2, &RunConfig::default())
            .unwrap()
            .certificate()
            .cloned()
            .unwrap();
        assert_eq!(cert.primes(), vec![BigInt::from(11), BigInt::from(7)]);
        assert!(cert.cross_checks[0][1].as_ref().unwrap().holds);
        assert!(cert.cross_checks[1][0].as_ref().unwrap().holds);
        assert_eq!(cert.cross_checks[0][1].as_ref().unwrap().b.len(), 3);
        assert!(cert.verify(&RunConfig::default()).ok);
    }

    #[test]
    fn joint_level_one_not_found() {
        let spec = check_hypotheses(&x2m6(), &roots(&["-3", "2"])).unwrap();
        let outcome = certify_joint_layer(&spec, 1, &RunConfig::default()).unwrap();
        assert_eq!(
            outcome,
            JointOutcome::NotFound(JointFailure::NoQualifyingPrime {
                root: 0,
                search: NotFoundReason::ExhaustedComplete
            })
        );
    }

    #[test]
    fn single_root_matches_search() {
        let f = x2m6();
        let config = RunConfig::default();
        for beta in ["-3", "2"] {
            let r = roots(&[beta]);
            let spec = check_hypotheses(&f, &r).unwrap();
            let excl = build_exclusion_set(&f, &r, &config.factor_config()).unwrap();
            for n in 2..=4 {
                let direct = search_condition_r_prime(&f, &r[0], n, &excl, &config.factor_config()).unwrap();
                let level = evaluate_level(&spec, &excl, n, &config).unwrap();
                let joint = level.joint.certificate().map(|c| c.per_root[0].clone());
                if level.roots[0].irreducibility.is_irreducible() {
                    assert_eq!(joint.as_ref(), direct.certificate(), "beta {beta} n {n}");
                }
            }
        }
    }

    #[test]
    fn kummer_level_one() {
        let f = x2m6();
        assert_eq!(kummer_base_layer(&f, &roots(&["-3"])), LayerVerdict::Maximal);
        // -2 - (-6) = 4 is a square
        assert_eq!(
            kummer_base_layer(&f, &roots(&["-2"])),
            LayerVerdict::SubMaximal { order: BigUint::one() }
        );
        // 3 and 8: 3·8 = 24, 3, 8 all non-squares
        assert_eq!(kummer_base_layer(&f, &roots(&["-3", "2"])), LayerVerdict::Maximal);
        // 3 and 12: the product 36 is a square
        assert_eq!(
            kummer_base_layer(&f, &roots(&["-3", "6"])),
            LayerVerdict::SubMaximal { order: BigUint::from(2u32) }
        );
        let cubic = UnicriticalMap::new(3, q("-1")).unwrap();
        // 7 + 1 = 8 is a cube
        assert_eq!(
            kummer_base_layer(&cubic, &roots(&["7"])),
            LayerVerdict::SubMaximal { order: BigUint::one() }
        );
        assert_eq!(kummer_base_layer(&cubic, &roots(&["1"])), LayerVerdict::Maximal);
        let quartic = UnicriticalMap::new(4, q("-6")).unwrap();
        assert_eq!(kummer_base_layer(&quartic, &roots(&["-3"])), LayerVerdict::Unknown);
    }

    #[test]
    fn pipeline_single_tree() {
        let config = RunConfig::default();
        let run = certify_levels(&x2m6(), &roots(&["-3"]), 1..=6, &config).unwrap();
        let l1 = &run.levels[0];
        assert!(matches!(
            l1.roots[0].search,
            RootSearch::NotFound(NotFoundReason::ExhaustedComplete)
        ));
        assert_eq!(l1.layer, LayerVerdict::Maximal);
        for l in &run.levels[1..] {
            assert!(l.joint.certificate().is_some(), "level {}", l.level);
            assert_eq!(l.layer, LayerVerdict::Maximal);
        }
        assert_eq!(run.summary(), "maximal for 1 ≤ n ≤ 6");
        assert!(matches!(run.index.joint_index, IndexVerdict::Finite { .. }));
        assert!(run.index.disjointness.is_none());
    }

    #[test]
    fn pipeline_two_roots() {
        let config = RunConfig::default();
        let run = certify_levels(&x2m6(), &roots(&["-3", "2"]), 2..=4, &config).unwrap();
        assert_eq!(run.requested_levels().count(), 3);
        for l in run.requested_levels() {
            let cert = l.joint.certificate().unwrap();
            let text = crate::certificate::to_canonical_json(cert);
            let back = AnyCertificate::parse(&text).unwrap();
            assert!(back.verify(&config).ok);
            let n = l.level;
            assert_eq!(
                run.index.joint.levels[n as usize - 1].layer_order_claimed,
                Some(BigUint::from(2u32).pow(2 * (1 << (n - 1))))
            );
        }
        assert_eq!(run.index.joint_ambient_order, group_order(2, 4).unwrap().pow(2));
        let disjoint = run.index.disjointness.as_ref().unwrap();
        assert_eq!(disjoint.supported_up_to, 4);
        assert_eq!(disjoint.witnesses[0].primes, vec![BigInt::from(11), BigInt::from(7)]);
        let json = serde_json::to_value(&run).unwrap();
        assert_eq!(json["summary"], "maximal for 2 ≤ n ≤ 4");
    }

    #[test]
    fn partial_evidence_keeps_per_root() {
        let spec = check_hypotheses(&x2m6(), &roots(&["-3", "2"])).unwrap();
        let config = RunConfig::default();
        let excl = build_exclusion_set(&spec.map, &spec.roots, &config.factor_config()).unwrap();
        let mut level = evaluate_level(&spec, &excl, 2, &config).unwrap();
        // drop root 1's candidates, as if its search came back empty
        level.roots[1].qualifying.clear();
        level.roots[1].search = RootSearch::NotFound(NotFoundReason::ExhaustedIncomplete);
        level.roots[1].layer = LayerVerdict::Unknown;
        level.joint = select_joint(&spec, 2, &level.roots).unwrap();
        level.layer = LayerVerdict::Unknown;
        assert!(level.joint.certificate().is_none());
        assert_eq!(level.roots[0].layer, LayerVerdict::Maximal);
        let mut levels = vec![evaluate_level(&spec, &excl, 1, &config).unwrap(), level];
        levels.push(evaluate_level(&spec, &excl, 3, &config).unwrap());
        let report = index_report(&spec, &levels).unwrap();
        assert_eq!(report.joint.levels[1].verdict, LayerVerdict::Unknown);
        assert_eq!(report.per_root[0].levels[1].verdict, LayerVerdict::Maximal);
        assert!(matches!(report.joint_index, IndexVerdict::Inconclusive { bounded_up_to: 1, .. }));
        assert_eq!(report.disjointness.unwrap().supported_up_to, 1);
    }

    #[test]
    fn pcf_and_periodic_rejected() {
        let config = RunConfig::default();
        let pcf = UnicriticalMap::new(2, q("-2")).unwrap();
        assert!(matches!(
            certify_levels(&pcf, &roots(&["1"]), 1..=3, &config),
            Err(Error::MapIsPcf)
        ));
        assert!(matches!(
            certify_levels(&x2m6(), &roots(&["3"]), 1..=3, &config),
            Err(Error::PeriodicPoint(_))
        ));
        assert!(certify_levels(&x2m6(), &roots(&["-3"]), 1..=7, &config).is_err());
    }

    #[test]
    fn tampered_joint_certificate() {
        let spec = check_hypotheses(&x2m6(), &roots(&["-3", "2"])).unwrap();
        let config = RunConfig::default();
        let cert = certify_joint_layer(&spec, 2, &config).unwrap().certificate().cloned().unwrap();
        let mut value = serde_json::to_value(&cert).unwrap();
        value["cross_checks"][0][1]["b"][2] = serde_json::json!(1);
        let tampered: JointLayerCertificate = serde_json::from_value(value).unwrap();
        let report = tampered.verify(&config);
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].location, "cross_checks[0][1]");

        let mut swapped = cert.clone();
        swapped.per_root[1].prime = BigInt::from(11);
        assert!(!swapped.verify(&config).ok);
    }
}
