//! JSON form of prime certificates and clause-by-clause re-verification.
//!
//! The wire format is fixed:
//!
//! ```json
//! {"map":{"p":2,"r":1,"c":"-6"},"beta":"-3","n":2,"prime":"11",
//!  "clauses":{"a":true,"b":[0,0],"c":{"v":1},"d":{"v":0}},
//!  "primitive":true,"found_by":"trial"}
//! ```
//!
//! Small integers (p, r, n, valuations) are JSON numbers, an infinite
//! valuation is the string `"inf"`, and every rational or big integer is a
//! decimal string. Objects are emitted with sorted keys.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::conditions::{check_condition_r, ConditionReport, PrimeCertificate};
use crate::dynamics::UnicriticalMap;
use crate::error::{Error, Result};
use crate::multitree::JointLayerCertificate;
use crate::rat_core::{serde_bigint, serde_rational, FoundBy, Rational, Valuation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValuationField {
    pub v: Valuation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClausesJson {
    pub a: bool,
    pub b: Vec<Valuation>,
    pub c: ValuationField,
    pub d: ValuationField,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CertificateJson {
    map: UnicriticalMap,
    #[serde(with = "serde_rational")]
    beta: Rational,
    n: u32,
    #[serde(with = "serde_bigint")]
    prime: BigInt,
    clauses: ClausesJson,
    primitive: bool,
    found_by: FoundBy,
}

impl ClausesJson {
    pub fn from_report(report: &ConditionReport) -> Self {
        ClausesJson {
            a: report.good_reduction,
            b: report.orbit_valuations.clone(),
            c: ValuationField {
                v: report.top_valuation.unwrap_or(Valuation::Infinite),
            },
            d: ValuationField {
                v: report.beta_valuation,
            },
        }
    }
}

impl Serialize for PrimeCertificate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CertificateJson {
            map: self.map.clone(),
            beta: self.beta.clone(),
            n: self.level,
            prime: self.prime.clone(),
            clauses: ClausesJson::from_report(&self.report),
            primitive: self.primitive,
            found_by: self.found_by,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PrimeCertificate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = CertificateJson::deserialize(d)?;
        let report = ConditionReport::from_recorded_r(
            &raw.map,
            raw.prime.clone(),
            raw.beta.clone(),
            raw.n,
            raw.clauses.a,
            raw.clauses.b,
            raw.clauses.c.v,
            raw.clauses.d.v,
        );
        Ok(PrimeCertificate {
            map: raw.map,
            beta: raw.beta,
            level: raw.n,
            prime: raw.prime,
            report,
            primitive: raw.primitive,
            found_by: raw.found_by,
        })
    }
}

/// Serializes any value as pretty JSON with recursively sorted keys.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    // serde_json::Value keeps object keys in a BTreeMap
    let tree = serde_json::to_value(value).expect("certificate types serialize");
    let mut text = serde_json::to_string_pretty(&tree).expect("values serialize");
    text.push('\n');
    text
}

/// A clause whose recorded value could not be reproduced, or that does not
/// hold on recomputation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyFailure {
    /// Where in the document, e.g. `""` or `"per_root[1]"`.
    pub location: String,
    /// `"a"`..`"d"`, `"prime"`, `"primitive"`, `"cross_check"`, ...
    pub clause: String,
    pub recorded: String,
    pub recomputed: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub failures: Vec<VerifyFailure>,
}

impl VerifyReport {
    pub(crate) fn fail(&mut self, location: &str, clause: &str, recorded: String, recomputed: String) {
        self.failures.push(VerifyFailure {
            location: location.to_string(),
            clause: clause.to_string(),
            recorded,
            recomputed,
        });
    }

    pub(crate) fn finish(mut self) -> Self {
        self.ok = self.failures.is_empty();
        self
    }
}

fn join(vals: &[Valuation]) -> String {
    let parts: Vec<String> = vals.iter().map(|v| v.to_string()).collect();
    format!("[{}]", parts.join(","))
}

/// Recomputes every clause of a prime certificate into `out`.
pub(crate) fn verify_prime_into(cert: &PrimeCertificate, location: &str, out: &mut VerifyReport) {
    let fresh = match check_condition_r(&cert.map, &cert.beta, cert.level, &cert.prime) {
        Ok(r) => r,
        Err(e) => {
            out.fail(location, "prime", cert.prime.to_string(), e.to_string());
            return;
        }
    };
    let recorded = ClausesJson::from_report(&cert.report);
    let recomputed = ClausesJson::from_report(&fresh);
    if recorded.a != recomputed.a {
        out.fail(location, "a", recorded.a.to_string(), recomputed.a.to_string());
    }
    if recorded.b != recomputed.b {
        out.fail(location, "b", join(&recorded.b), join(&recomputed.b));
    }
    if recorded.c != recomputed.c {
        out.fail(location, "c", recorded.c.v.to_string(), recomputed.c.v.to_string());
    }
    if recorded.d != recomputed.d {
        out.fail(location, "d", recorded.d.v.to_string(), recomputed.d.v.to_string());
    }
    let fresh_b = fresh.clause('b').is_some_and(|c| c.holds);
    if cert.primitive != fresh_b {
        out.fail(location, "primitive", cert.primitive.to_string(), fresh_b.to_string());
    }
    // valuations reproduce but the condition itself fails
    let already: Vec<String> = out
        .failures
        .iter()
        .filter(|f| f.location == location)
        .map(|f| f.clause.clone())
        .collect();
    for clause in fresh.failing_clauses() {
        let name = clause.to_string();
        if !already.contains(&name) {
            out.fail(location, &name, "holds".into(), "fails".into());
        }
    }
}

pub fn verify_prime_certificate(cert: &PrimeCertificate) -> VerifyReport {
    let mut report = VerifyReport::default();
    verify_prime_into(cert, "", &mut report);
    report.finish()
}

/// Either kind of certificate file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnyCertificate {
    Prime(PrimeCertificate),
    Joint(Box<JointLayerCertificate>),
}

impl AnyCertificate {
    pub fn parse(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("certificate is not JSON: {e}")))?;
        let parsed = if value.get("per_root").is_some() {
            serde_json::from_value(value).map(|j| AnyCertificate::Joint(Box::new(j)))
        } else {
            serde_json::from_value(value).map(AnyCertificate::Prime)
        };
        parsed.map_err(|e| Error::InvalidArgument(format!("malformed certificate: {e}")))
    }

    pub fn to_json(&self) -> String {
        match self {
            AnyCertificate::Prime(c) => to_canonical_json(c),
            AnyCertificate::Joint(j) => to_canonical_json(j),
        }
    }

    pub fn verify(&self, config: &crate::RunConfig) -> VerifyReport {
        match self {
            AnyCertificate::Prime(c) => verify_prime_certificate(c),
            AnyCertificate::Joint(j) => j.verify(config),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::{build_exclusion_set, search_condition_r_prime};
    use crate::config::FactorConfig;
    use crate::rat_core::parse_rational;

    fn certificate(beta: &str, n: u32) -> PrimeCertificate {
        let f = UnicriticalMap::new(2, parse_rational("-6").unwrap()).unwrap();
        let beta = parse_rational(beta).unwrap();
        let cfg = FactorConfig::default();
        let s = build_exclusion_set(&f, std::slice::from_ref(&beta), &cfg).unwrap();
        search_condition_r_prime(&f, &beta, n, &s, &cfg)
            .unwrap()
            .certificate()
            .unwrap()
            .clone()
    }

    #[test]
    fn wire_format() {
        let cert = certificate("-3", 2);
        let json: serde_json::Value = serde_json::from_str(&to_canonical_json(&cert)).unwrap();
        let expected = serde_json::json!({
            "map": {"p": 2, "r": 1, "c": "-6"},
            "beta": "-3",
            "n": 2,
            "prime": "11",
            "clauses": {"a": true, "b": [0, 0], "c": {"v": 1}, "d": {"v": 0}},
            "primitive": true,
            "found_by": "trial"
        });
        assert_eq!(json, expected);
        let text = to_canonical_json(&cert);
        let map_pos = text.find("\"map\"").unwrap();
        let beta_pos = text.find("\"beta\"").unwrap();
        assert!(beta_pos < map_pos, "keys are sorted");
    }

    #[test]
    fn round_trip_verifies() {
        for n in 2..=4 {
            let cert = certificate("-3", n);
            let text = to_canonical_json(&cert);
            let back = AnyCertificate::parse(&text).unwrap();
            assert_eq!(back, AnyCertificate::Prime(cert.clone()));
            assert_eq!(back.to_json(), text);
            assert!(back.verify(&Default::default()).ok);
        }
    }

    #[test]
    fn tampered_prime_names_clause_c() {
        let cert = certificate("-3", 2);
        let text = to_canonical_json(&cert).replace("\"11\"", "\"13\"");
        let tampered = AnyCertificate::parse(&text).unwrap();
        let report = tampered.verify(&Default::default());
        assert!(!report.ok);
        let clauses: Vec<&str> = report.failures.iter().map(|f| f.clause.as_str()).collect();
        assert_eq!(clauses, vec!["c"]);
        assert_eq!(report.failures[0].recomputed, "0");
    }

    #[test]
    fn tampered_valuation_is_caught() {
        let cert = certificate("-3", 3);
        let mut value = serde_json::to_value(&cert).unwrap();
        value["clauses"]["b"][1] = serde_json::json!(2);
        let tampered: PrimeCertificate = serde_json::from_value(value).unwrap();
        let report = verify_prime_certificate(&tampered);
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].clause, "b");
    }

    #[test]
    fn composite_prime_is_reported() {
        let cert = certificate("-3", 2);
        let text = to_canonical_json(&cert).replace("\"11\"", "\"33\"");
        let report = AnyCertificate::parse(&text).unwrap().verify(&Default::default());
        assert_eq!(report.failures[0].clause, "prime");
    }

    #[test]
    fn garbage_is_rejected() {
        assert!(AnyCertificate::parse("{not json").is_err());
        assert!(AnyCertificate::parse(r#"{"map": 3}"#).is_err());
    }
}
