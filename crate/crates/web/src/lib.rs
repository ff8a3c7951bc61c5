//! Browser bindings. Every export takes plain strings and numbers and
//! returns a JSON document; failures come back as `{"error": "..."}`.

use qss_core::harness;
use qss_core::recon::{reconstruct_disclosures, Disclosures, ReconError};
use qss_core::render::{to_json, RunReport};
use qss_core::{Position, SecretBits, StateLabel};
use serde::Serialize;
use wasm_bindgen::prelude::wasm_bindgen;

fn parse<T: std::str::FromStr>(what: &str, s: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.trim().parse().map_err(|e| format!("{what}: {e}"))
}

/// `"random"` selects a seeded random value.
fn optional<T: std::str::FromStr>(what: &str, s: &str) -> Result<Option<T>, String>
where
    T::Err: std::fmt::Display,
{
    if s.trim().eq_ignore_ascii_case("random") {
        Ok(None)
    } else {
        parse(what, s).map(Some)
    }
}

fn respond(result: Result<String, String>) -> String {
    result.unwrap_or_else(|e| serde_json::json!({ "error": e }).to_string())
}

pub fn run_round_json(state: &str, secret: &str, position: &str, seed: u64) -> Result<String, String> {
    let label: Option<StateLabel> = optional("state", state)?;
    let bits: SecretBits = parse("secret", secret)?;
    let position: Option<Position> = optional("position", position)?;
    let report = RunReport::new(qss_core::run_protocol(label, bits, position, seed));
    Ok(to_json(&report))
}

/// The stages of reconstruction from a chosen set of announcements.
#[derive(Debug, Serialize)]
pub struct TraceView {
    pub measured: String,
    pub support_kept: String,
    pub support_discarded: String,
    pub attached: Option<String>,
    pub kept: Option<String>,
    pub discarded: Option<String>,
    pub honest_probability: f64,
    pub deduced: Option<String>,
    pub secret: Option<String>,
    pub tamper: Option<String>,
    pub error: Option<String>,
}

pub fn reconstruct_json(p2: &str, p3: &str, state: &str, p1: &str, position: &str) -> Result<String, String> {
    let d = Disclosures {
        p2: parse("P2 outcome", p2)?,
        p3: parse("P3 outcome", p3)?,
        state: parse("state", state)?,
        p1: parse("P1 outcome", p1)?,
        position: parse("position", position)?,
    };
    let t = reconstruct_disclosures(&d);
    let (deduced, secret, tamper, error) = match &t.outcome {
        Ok(r) => (
            Some(r.action.to_string()),
            Some(r.secret.to_string()),
            r.tamper.as_ref().map(|tr| {
                let q: Vec<String> = tr.flipped_qubits.iter().map(ToString::to_string).collect();
                format!("qubit {} gate {}", q.join(","), tr.hypothesized_gate)
            }),
            None,
        ),
        Err(ReconError::NoMatch { kept, .. }) => (None, None, None, Some(format!("no match ({kept} kept)"))),
        Err(e) => (None, None, None, Some(e.to_string())),
    };
    let view = TraceView {
        measured: t.measured.to_string(),
        support_kept: t.support.kept.to_string(),
        support_discarded: t.support.discarded.to_string(),
        attached: t.attached.as_ref().map(ToString::to_string),
        kept: t.untouched.as_ref().map(|u| u.kept.to_string()),
        discarded: t.untouched.as_ref().map(|u| u.discarded.to_string()),
        honest_probability: t.honest_probability,
        deduced,
        secret,
        tamper,
        error,
    };
    Ok(to_json(&view))
}

pub fn scenario_json(name: &str) -> Result<String, String> {
    harness::scenario(name).map(|r| to_json(&r)).ok_or_else(|| {
        format!(
            "unknown scenario {name:?}; expected one of {}",
            harness::SCENARIOS.join(", ")
        )
    })
}

/// Simulate one honest round. `state` and `position` accept `"random"`.
#[wasm_bindgen]
pub fn run_round(state: &str, secret: &str, position: &str, seed: u64) -> String {
    respond(run_round_json(state, secret, position, seed))
}

/// Reconstruct from announcements the caller picks, truthful or not.
#[wasm_bindgen]
pub fn reconstruct(p2: &str, p3: &str, state: &str, p1: &str, position: &str) -> String {
    respond(reconstruct_json(p2, p3, state, p1, position))
}

#[wasm_bindgen]
pub fn scenario(name: &str) -> String {
    respond(scenario_json(name))
}
