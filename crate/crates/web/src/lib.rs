//! Browser bindings for the demo page in `www/`.
//!
//! Each export has a plain Rust counterpart in [`demo`] so the numbers can be
//! tested natively; the wasm wrappers only convert to JS values.

use wasm_bindgen::prelude::*;

pub mod demo;

fn to_js<T: serde::Serialize>(r: Result<T, String>) -> Result<JsValue, JsError> {
    let value = r.map_err(|e| JsError::new(&e))?;
    serde_wasm_bindgen::to_value(&value).map_err(|e| JsError::new(&e.to_string()))
}

/// One-iteration success probability over the marked fraction.
#[wasm_bindgen(js_name = successCurve)]
pub fn success_curve(samples: u32) -> Result<JsValue, JsError> {
    to_js(demo::success_curve(samples as usize))
}

/// Marked/unmarked amplitudes and success for iterations `0..=iterations`.
#[wasm_bindgen(js_name = iterationTrace)]
pub fn iteration_trace(qubits: u32, marked: u32, iterations: u32) -> Result<JsValue, JsError> {
    to_js(demo::iteration_trace(qubits as usize, marked as u64, iterations as usize))
}

/// Four-qubit register decoded about a guessed preparation.
#[wasm_bindgen(js_name = decodeExplorer)]
pub fn decode_explorer(guess: &str, marked: &str) -> Result<JsValue, JsError> {
    to_js(demo::decode_explorer(guess, marked))
}
