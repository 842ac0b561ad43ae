//! wasm-bindgen entry points for the browser demo in `www/`.
//!
//! Each export builds the same parameter map the HTTP service would receive,
//! so the page gets the service's JSON without a server.

use confusion_core::api::{handle, Endpoint, Limits, Params};
use wasm_bindgen::prelude::*;

/// Smaller limits than the service: everything runs on the page's thread.
const LIMITS: Limits = Limits { max_grid: 40_401, max_total: 400, max_points: 200_000, max_steps: 2_001, max_draws: 0 };

fn params<'a>(pairs: impl IntoIterator<Item = (&'a str, String)>) -> Params {
    pairs.into_iter().filter(|(_, v)| !v.is_empty()).map(|(k, v)| (k.to_string(), v)).collect()
}

/// Runs a request; errors come back as the service's error body.
pub fn request(endpoint: Endpoint, params: &Params) -> Result<String, String> {
    handle(endpoint, params, &LIMITS).map(|r| r.to_json_string()).map_err(|e| e.body())
}

pub fn contours(metric: &str, levels: &str, pos: u32, neg: u32, steps: u32) -> Result<String, String> {
    let p = params([
        ("metric", metric.to_string()),
        ("levels", levels.to_string()),
        ("pos", pos.to_string()),
        ("neg", neg.to_string()),
        ("steps", steps.to_string()),
        ("window", "-0.5,1.5".to_string()),
    ]);
    request(Endpoint::Contours, &p)
}

/// Observed counts in the order tp, fp, fn, tn.
fn pmf_params(model: &str, counts: [u32; 4], pos: u32, neg: u32) -> Params {
    let [tp, fp, fn_, tn] = counts.map(|c| c.to_string());
    params([
        ("model", model.to_string()),
        ("tp", tp),
        ("fp", fp),
        ("fn", fn_),
        ("tn", tn),
        ("pos", pos.to_string()),
        ("neg", neg.to_string()),
    ])
}

pub fn joint_pmf(model: &str, counts: [u32; 4], pos: u32, neg: u32) -> Result<String, String> {
    request(Endpoint::JointPmf, &pmf_params(model, counts, pos, neg))
}

pub fn metric_pmf(model: &str, counts: [u32; 4], pos: u32, neg: u32, metric: &str, bins: u32) -> Result<String, String> {
    let mut p = pmf_params(model, counts, pos, neg);
    p.insert("metric".into(), metric.into());
    p.insert("bins".into(), bins.to_string());
    request(Endpoint::MetricPmf, &p)
}

#[wasm_bindgen]
pub fn contours_json(metric: &str, levels: &str, pos: u32, neg: u32, steps: u32) -> Result<String, JsError> {
    contours(metric, levels, pos, neg, steps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn joint_pmf_json(model: &str, tp: u32, fp: u32, fn_: u32, tn: u32, pos: u32, neg: u32) -> Result<String, JsError> {
    joint_pmf(model, [tp, fp, fn_, tn], pos, neg).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn metric_pmf_json(
    model: &str,
    tp: u32,
    fp: u32,
    fn_: u32,
    tn: u32,
    pos: u32,
    neg: u32,
    metric: &str,
    bins: u32,
) -> Result<String, JsError> {
    metric_pmf(model, [tp, fp, fn_, tn], pos, neg, metric, bins).map_err(|e| JsError::new(&e))
}
