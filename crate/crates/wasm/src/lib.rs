//! Three library operations for the static page in `www/`. Every entry point
//! takes decimal strings and returns a JSON document.

use arboreal::certificate::to_canonical_json;
use arboreal::dynamics::UnicriticalMap;
use arboreal::galois_oracle::oracle_level_2;
use arboreal::multitree::certify_levels;
use arboreal::rat_core::parse_rational;
use arboreal::RunConfig;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Levels above this are refused in the browser.
pub const MAX_DEMO_LEVEL: u32 = 6;

fn map(q: u32, c: &str) -> Result<UnicriticalMap, String> {
    let c = parse_rational(c).map_err(|e| e.to_string())?;
    UnicriticalMap::new(q as u64, c).map_err(|e| e.to_string())
}

pub fn classify_json(q: u32, c: &str, beta: &str) -> Result<String, String> {
    let f = map(q, c)?;
    let beta = parse_rational(beta).map_err(|e| e.to_string())?;
    let class = f.classify(&beta);
    Ok(to_canonical_json(&class))
}

pub fn certify_json(q: u32, c: &str, beta: &str, max_level: u32) -> Result<String, String> {
    if !(1..=MAX_DEMO_LEVEL).contains(&max_level) {
        return Err(format!("max_level must be between 1 and {MAX_DEMO_LEVEL}"));
    }
    let f = map(q, c)?;
    let beta = parse_rational(beta).map_err(|e| e.to_string())?;
    let run = certify_levels(&f, &[beta], 1..=max_level, &RunConfig::default()).map_err(|e| e.to_string())?;
    let certificates: Vec<_> = run
        .levels
        .iter()
        .filter_map(|l| l.joint.certificate())
        .map(|j| serde_json::to_value(&j.per_root[0]).expect("certificate serializes"))
        .collect();
    let mut value = serde_json::to_value(&run).expect("report serializes");
    value["certificates"] = certificates.into();
    Ok(to_canonical_json(&value))
}

pub fn oracle_json(c: &str, beta: &str) -> Result<String, String> {
    let f = map(2, c)?;
    let beta = parse_rational(beta).map_err(|e| e.to_string())?;
    let r = oracle_level_2(&f, &beta, &RunConfig::default().factor_config()).map_err(|e| e.to_string())?;
    Ok(to_canonical_json(&json!({
        "g1": r.g1_order,
        "g2": r.g2_order,
        "kummer_rank": r.kummer_rank,
    })))
}

#[wasm_bindgen]
pub fn classify_orbit(q: u32, c: &str, beta: &str) -> Result<String, JsValue> {
    classify_json(q, c, beta).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn certify_tree(q: u32, c: &str, beta: &str, max_level: u32) -> Result<String, JsValue> {
    certify_json(q, c, beta, max_level).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn oracle_level2(c: &str, beta: &str) -> Result<String, JsValue> {
    oracle_json(c, beta).map_err(|e| JsValue::from_str(&e))
}
