//! Browser bindings. Every function takes and returns JSON text; failures
//! come back as `{"error": "..."}`.

use meixner::classify::decouple;
use meixner::lie::check_ml;
use meixner::meixner1d::{build_triple, classify1d, lie_closure_1d, JacobiSpec, Preset};
use meixner::vectors2d::{SystemSpec, DEFAULT_TRUNCATION};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn respond(result: Result<Value, String>) -> String {
    let value = result.unwrap_or_else(|e| json!({ "error": e }));
    serde_json::to_string_pretty(&value).expect("values always serialize")
}

fn parse_system(text: &str) -> Result<(SystemSpec, usize), String> {
    let spec: SystemSpec = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let n = spec.truncation().unwrap_or(DEFAULT_TRUNCATION);
    Ok((spec, n))
}

/// Decouples a system spec and returns the certified report.
#[wasm_bindgen]
pub fn classify(spec_json: &str, degree: usize) -> String {
    respond((|| {
        let (spec, n) = parse_system(spec_json)?;
        let sys = spec.build(n).map_err(|e| e.to_string())?;
        let report = decouple(&sys, degree, 1e-8).map_err(|e| e.to_string())?;
        serde_json::to_value(report).map_err(|e| e.to_string())
    })())
}

/// Commutator table verdict for a system spec.
#[wasm_bindgen]
pub fn check(spec_json: &str) -> String {
    respond((|| {
        let (spec, n) = parse_system(spec_json)?;
        let sys = spec.build(n).map_err(|e| e.to_string())?;
        let verdict = check_ml(&sys).map_err(|e| e.to_string())?;
        serde_json::to_value(verdict).map_err(|e| e.to_string())
    })())
}

/// Class and closure fit of a one-dimensional chain, given as a preset name
/// or a JacobiSpec object.
#[wasm_bindgen]
pub fn chain(factor_json: &str) -> String {
    respond((|| {
        let spec: JacobiSpec = match serde_json::from_str::<Value>(factor_json) {
            Ok(Value::String(name)) => Preset::from_name(&name)
                .map(Preset::spec)
                .ok_or_else(|| format!("unknown preset `{name}`"))?,
            Ok(v) => serde_json::from_value(v).map_err(|e| e.to_string())?,
            Err(e) => return Err(e.to_string()),
        };
        let triple = build_triple(&spec, DEFAULT_TRUNCATION).map_err(|e| e.to_string())?;
        let closure = lie_closure_1d(&triple).map_err(|e| e.to_string())?;
        Ok(json!({
            "spec": spec,
            "class": classify1d(&spec).tag(),
            "closure": closure,
        }))
    })())
}

/// Names of the built-in one-dimensional families.
#[wasm_bindgen]
pub fn presets() -> String {
    respond(Ok(Preset::ALL.iter().map(|p| json!(p.name())).collect()))
}
