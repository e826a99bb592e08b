//! Browser bindings: each export takes automata in the text format and returns JSON.
//!
//! The plain functions in this module do the work and are what the tests call;
//! the `#[wasm_bindgen]` wrappers only translate errors.

use pdes_core::format::{parse_automaton, write_automaton};
use pdes_core::patterns::pattern_bits;
use pdes_core::{
    check_controllable, check_observable, inf_pco_detailed, presets, scaling_from_spec, supervisor_from_scaling, Pdes,
    Verdict,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
pub struct PropertyReport {
    pub holds: bool,
    pub witness: Option<String>,
}

#[derive(Serialize)]
pub struct CheckReport {
    pub controllable: PropertyReport,
    pub observable: PropertyReport,
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
pub struct ClassControl {
    pub class: String,
    /// Scaling factor per event, as exact rationals.
    pub factors: Vec<String>,
    /// `(pattern, probability)`; patterns print the last controllable event first.
    pub patterns: Vec<(String, String)>,
}

#[derive(Serialize)]
pub struct SynthesisReport {
    pub events: Vec<String>,
    pub classes: Vec<ClassControl>,
    /// `(from, event, to)` over the classes above.
    pub steps: Vec<(String, String, String)>,
}

#[derive(Serialize)]
pub struct InfimalReport {
    pub automaton: String,
    pub states: usize,
    pub infinitesimal_edges: usize,
}

#[derive(Serialize)]
pub struct Example {
    pub name: &'static str,
    pub plant: &'static str,
    pub spec: &'static str,
}

fn load(text: &str, observable: &str, warnings: &mut Vec<String>) -> Result<Pdes, String> {
    let (a, w) = parse_automaton(text).map_err(|e| e.to_string())?;
    warnings.extend(w);
    let obs: Vec<&str> = observable.split([',', ' ']).filter(|s| !s.is_empty()).collect();
    if observable.trim().is_empty() {
        Ok(a)
    } else {
        a.with_observable(&obs).map_err(|e| e.to_string())
    }
}

fn property(plant: &Pdes, v: Verdict) -> PropertyReport {
    PropertyReport { holds: v.holds(), witness: v.witness().map(|w| w.line(plant.alphabet())) }
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("reports serialize")
}

/// Both verdicts with witnesses. An empty `observable` keeps the files' own sets.
pub fn check_json(plant: &str, spec: &str, observable: &str) -> Result<String, String> {
    let mut warnings = Vec::new();
    let g = load(plant, observable, &mut warnings)?;
    let h = load(spec, observable, &mut warnings)?;
    let c = check_controllable(&g, &h).map_err(|e| e.to_string())?;
    let o = check_observable(&g, &h).map_err(|e| e.to_string())?;
    Ok(json(&CheckReport { controllable: property(&g, c), observable: property(&g, o), warnings }))
}

/// Scaling factors and the nested pattern distribution per observation class.
pub fn synthesize_json(plant: &str, spec: &str, observable: &str) -> Result<String, String> {
    let mut warnings = Vec::new();
    let g = load(plant, observable, &mut warnings)?;
    let h = load(spec, observable, &mut warnings)?;
    let k = scaling_from_spec(&g, &h).map_err(|e| e.to_string())?;
    let s = supervisor_from_scaling(&k).map_err(|e| e.to_string())?;
    let alphabet = g.alphabet();
    let m = alphabet.n_controllable();
    let classes = (0..k.classes().count)
        .map(|c| ClassControl {
            class: format!("t{c}"),
            factors: k.get(Some(c)).factors().iter().map(|f| f.to_string()).collect(),
            patterns: s.get(Some(c)).support().map(|(j, p)| (pattern_bits(j, m), p.to_string())).collect(),
        })
        .collect();
    let steps = k
        .classes()
        .step
        .iter()
        .map(|(&(c, e), &d)| (format!("t{c}"), alphabet.name(e).to_string(), format!("t{d}")))
        .collect();
    let events = alphabet.events().map(|e| alphabet.name(e).to_string()).collect();
    Ok(json(&SynthesisReport { events, classes, steps }))
}

/// The least achievable language above the spec, in the text format.
pub fn inf_pco_json(plant: &str, spec: &str, observable: &str, strip_eps: bool) -> Result<String, String> {
    let mut warnings = Vec::new();
    let g = load(plant, observable, &mut warnings)?;
    let h = load(spec, observable, &mut warnings)?;
    let r = inf_pco_detailed(&g, &h).map_err(|e| e.to_string())?;
    let full = r.readable();
    let infinitesimal_edges = full.transitions().filter(|(_, _, t)| t.prob.is_infinitesimal()).count();
    let a = if strip_eps { full.without_infinitesimal() } else { full };
    Ok(json(&InfimalReport { automaton: write_automaton(&a), states: a.num_states(), infinitesimal_edges }))
}

pub fn examples_json() -> String {
    json(&[
        Example { name: "robot", plant: presets::ROBOT_PLANT, spec: presets::ROBOT_SPEC },
        Example { name: "branch", plant: presets::BRANCH_PLANT, spec: presets::BRANCH_SPEC },
        Example { name: "loop", plant: presets::LOOP_PLANT, spec: presets::LOOP_SPEC },
    ])
}

#[wasm_bindgen]
pub fn check(plant: &str, spec: &str, observable: &str) -> Result<String, JsError> {
    check_json(plant, spec, observable).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn synthesize(plant: &str, spec: &str, observable: &str) -> Result<String, JsError> {
    synthesize_json(plant, spec, observable).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn inf_pco(plant: &str, spec: &str, observable: &str, strip_eps: bool) -> Result<String, JsError> {
    inf_pco_json(plant, spec, observable, strip_eps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn examples() -> String {
    examples_json()
}
