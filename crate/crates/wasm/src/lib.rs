//! Browser bindings for three demo operations: fuzzy inference over the
//! airplane system, hierarchical pruning on the orange example, and score
//! fusion. Every entry point takes and returns JSON strings.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::json;
use symbolact::graph::{decompose, SubSystem, SymbolicSystem};
use symbolact::grounding::{
    ground_with_pruning, GroundingConfig, ImageGrounder, ProbabilitySource, ProbabilityTable, SymbolProbability,
    SymbolTree, TableValue,
};
use symbolact::inference::{evaluate_with, fuse_predictions, ActivityExplanation, FusionPolicy, ScoreVector};
use wasm_bindgen::prelude::*;

const AIRPLANE_SYSTEM: &str = include_str!("../../core/fixtures/airplane/system.json");
const ORANGE_SYSTEM: &str = include_str!("../../core/fixtures/orange/system.json");
const BUY_TREE: &str = include_str!("../../core/fixtures/orange/buy_tree.json");
const IMAGE_III: &str = include_str!("../../core/fixtures/orange/image_iii.json");
const IMAGE: &str = "image_iii";

fn only_subsystem(json: &str) -> Result<SubSystem, String> {
    let system = SymbolicSystem::from_json(json).map_err(|e| e.to_string())?;
    let conclusion = system.conclusions().next().ok_or("system has no conclusion")?.id;
    decompose(&system, conclusion).map_err(|e| e.to_string())
}

fn buy_subsystem() -> Result<SubSystem, String> {
    let system = SymbolicSystem::from_json(ORANGE_SYSTEM).map_err(|e| e.to_string())?;
    let id = system.find_symbol("buy an orange").ok_or("no buy conclusion")?;
    decompose(&system, id).map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

/// Conclusion, premise texts, and each rule's premises.
pub fn describe_airplane() -> Result<String, String> {
    let sub = only_subsystem(AIRPLANE_SYSTEM)?;
    let rules: Vec<Vec<&str>> =
        sub.rules.values().map(|r| r.premise_ids.iter().map(|id| sub.symbols[id].text.as_str()).collect()).collect();
    let premises: Vec<&str> = sub.premise_symbols().map(|s| s.text.as_str()).collect();
    to_json(&json!({ "conclusion": sub.conclusion().text, "premises": premises, "rules": rules }))
}

/// Max-of-min score of the airplane conclusion for `{text: probability}`;
/// unspecified premises count as 0.
pub fn infer_airplane(values: &str) -> Result<String, String> {
    let sub = only_subsystem(AIRPLANE_SYSTEM)?;
    let values: BTreeMap<String, f64> = serde_json::from_str(values).map_err(|e| e.to_string())?;
    if let Some((text, v)) = values.iter().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
        return Err(format!("{text:?}: {v} is not a probability"));
    }
    let score = evaluate_with(&sub, |id| Some(Some(values.get(&sub.symbols[&id].text).copied().unwrap_or(0.0))))
        .map_err(|e| e.to_string())?;
    to_json(&ActivityExplanation::new(&sub, &score))
}

/// The buy tree with image III's father and son values.
pub fn describe_orange() -> Result<String, String> {
    let tree = SymbolTree::from_json(BUY_TREE).map_err(|e| e.to_string())?;
    let table = ProbabilityTable::from_json(IMAGE_III).map_err(|e| e.to_string())?;
    let value = |text: &str| table.get(IMAGE, text).map(|e| e.value.probability());
    let fathers: Vec<_> = tree
        .fathers
        .iter()
        .map(|f| {
            let sons: Vec<_> = f.sons.iter().map(|s| json!({ "text": s, "value": value(s) })).collect();
            json!({ "text": f.text, "value": value(&f.text), "sons": sons })
        })
        .collect();
    to_json(&json!({ "theta": tree.theta, "fathers": fathers }))
}

#[derive(Serialize)]
struct SymbolRow {
    text: String,
    exact: f64,
    pruned: f64,
    source: ProbabilitySource,
}

/// Grounds the buy rules on image III with and without pruning at `theta`.
/// `fathers` overrides father values; sons are capped by their father.
pub fn prune_orange(theta: f64, fathers: &str) -> Result<String, String> {
    let overrides: BTreeMap<String, f64> = serde_json::from_str(fathers).map_err(|e| e.to_string())?;
    let mut tree = SymbolTree::from_json(BUY_TREE).map_err(|e| e.to_string())?;
    tree = SymbolTree::new(theta, std::mem::take(&mut tree.fathers)).map_err(|e| e.to_string())?;
    let base = ProbabilityTable::from_json(IMAGE_III).map_err(|e| e.to_string())?;
    let mut table = ProbabilityTable::new();
    for father in &tree.fathers {
        let original = base.get(IMAGE, &father.text).ok_or("father missing from table")?.value.probability();
        let p = overrides.get(&father.text).copied().unwrap_or(original);
        if !(0.0..=1.0).contains(&p) {
            return Err(format!("{:?}: {p} is not a probability", father.text));
        }
        table.insert(IMAGE, &father.text, TableValue::Direct { p }).map_err(|e| e.to_string())?;
        for son in &father.sons {
            let s = base.get(IMAGE, son).ok_or("son missing from table")?.value.probability();
            table.insert(IMAGE, son, TableValue::Direct { p: s.min(p) }).map_err(|e| e.to_string())?;
        }
    }

    let sub = buy_subsystem()?;
    let config = GroundingConfig::default();
    let mut plain = ImageGrounder::new(IMAGE, &table, config);
    let exact = plain.ground_symbols(&sub).map_err(|e| e.to_string())?;
    let pruned = ground_with_pruning(IMAGE, &sub, &tree, &table, &config).map_err(|e| e.to_string())?;
    let score = |probs: &BTreeMap<_, SymbolProbability>| {
        evaluate_with(&sub, |id| probs.get(&id).map(|p| Some(p.value))).map(|s| s.p_c)
    };
    let rows: Vec<SymbolRow> = sub
        .premise_symbols()
        .map(|s| SymbolRow {
            text: s.text.clone(),
            exact: exact[&s.id].value,
            pruned: pruned.probabilities[&s.id].value,
            source: pruned.probabilities[&s.id].source,
        })
        .collect();
    to_json(&json!({
        "naive_calls": plain.calls(),
        "pruned_calls": pruned.calls,
        "exact": score(&exact).map_err(|e| e.to_string())?,
        "pruned": score(&pruned.probabilities).map_err(|e| e.to_string())?,
        "symbols": rows,
    }))
}

/// Fused scores and the resulting ranking. `policy` is `maxnorm` or
/// `fixed`; the weights apply only to `fixed`.
pub fn fuse(sys1: &str, sys2: &str, policy: &str, alpha1: f64, alpha2: f64) -> Result<String, String> {
    let sys1: ScoreVector = serde_json::from_str(sys1).map_err(|e| format!("System 1: {e}"))?;
    let sys2: ScoreVector = serde_json::from_str(sys2).map_err(|e| format!("System 2: {e}"))?;
    let policy = match policy {
        "maxnorm" => FusionPolicy::MaxNorm,
        "fixed" => FusionPolicy::fixed(alpha1, alpha2).map_err(|e| e.to_string())?,
        other => return Err(format!("unknown policy {other:?}")),
    };
    let fused = fuse_predictions(&sys1, &sys2, &policy).map_err(|e| e.to_string())?;
    let mut ranking: Vec<(&String, &f64)> = fused.iter().collect();
    ranking.sort_by(|a, b| b.1.total_cmp(a.1).then(a.0.cmp(b.0)));
    let ranking: Vec<&String> = ranking.into_iter().map(|(k, _)| k).collect();
    to_json(&json!({ "fused": fused, "ranking": ranking }))
}

fn js<T>(result: Result<T, String>) -> Result<T, JsError> {
    result.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = describeAirplane)]
pub fn describe_airplane_js() -> Result<String, JsError> {
    js(describe_airplane())
}

#[wasm_bindgen(js_name = inferAirplane)]
pub fn infer_airplane_js(values: &str) -> Result<String, JsError> {
    js(infer_airplane(values))
}

#[wasm_bindgen(js_name = describeOrange)]
pub fn describe_orange_js() -> Result<String, JsError> {
    js(describe_orange())
}

#[wasm_bindgen(js_name = pruneOrange)]
pub fn prune_orange_js(theta: f64, fathers: &str) -> Result<String, JsError> {
    js(prune_orange(theta, fathers))
}

#[wasm_bindgen(js_name = fuse)]
pub fn fuse_js(sys1: &str, sys2: &str, policy: &str, alpha1: f64, alpha2: f64) -> Result<String, JsError> {
    js(fuse(sys1, sys2, policy, alpha1, alpha2))
}
