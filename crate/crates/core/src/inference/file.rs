use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ConclusionScore, InferenceError, ScoreVector};
use crate::graph::SubSystem;

/// Image → activity → score.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PredictionFile {
    pub images: BTreeMap<String, ScoreVector>,
}

impl PredictionFile {
    pub fn from_json(json: &str) -> Result<Self, InferenceError> {
        let file: Self = serde_json::from_str(json).map_err(|e| InferenceError::InvalidFile(e.to_string()))?;
        for (image, row) in &file.images {
            if let Some((activity, _)) = row.iter().find(|(_, v)| !v.is_finite()) {
                return Err(InferenceError::InvalidFile(format!("{image}/{activity}: score is not finite")));
            }
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self, InferenceError> {
        let json = std::fs::read_to_string(path)
            .map_err(|e| InferenceError::InvalidFile(format!("{}: {e}", path.display())))?;
        Self::from_json(&json)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("predictions serialize") + "\n"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleExplanation {
    pub rule: u32,
    pub premises: Vec<String>,
    pub minimum: f64,
    pub weakest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityExplanation {
    pub score: f64,
    pub winning_rule: Option<u32>,
    pub rules: Vec<RuleExplanation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub excluded_rules: Vec<u32>,
}

impl ActivityExplanation {
    pub fn new(sub: &SubSystem, score: &ConclusionScore) -> Self {
        let text = |id| sub.symbols.get(&id).map_or_else(String::new, |s| s.text.clone());
        Self {
            score: score.p_c,
            winning_rule: score.winning_rule_id.map(|r| r.0),
            rules: score
                .trace
                .iter()
                .map(|m| RuleExplanation {
                    rule: m.rule_id.0,
                    premises: sub.rules[&m.rule_id].premise_ids.iter().map(|id| text(*id)).collect(),
                    minimum: m.minimum,
                    weakest: text(m.argmin),
                })
                .collect(),
            excluded_rules: score.excluded_rules.iter().map(|r| r.0).collect(),
        }
    }
}

/// Image → activity → per-rule minima and the winning rule.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExplanationFile {
    pub images: BTreeMap<String, BTreeMap<String, ActivityExplanation>>,
}

impl ExplanationFile {
    pub fn from_json(json: &str) -> Result<Self, InferenceError> {
        serde_json::from_str(json).map_err(|e| InferenceError::InvalidFile(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("explanations serialize") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    proptest! {
        #[test]
        fn predictions_round_trip(rows in prop::collection::btree_map(
            "[a-z0-9_]{1,6}",
            prop::collection::btree_map("[a-z ]{1,10}", -5.0f64..5.0, 0..4),
            0..4,
        )) {
            let file = PredictionFile { images: rows };
            let json = file.to_json();
            let back = PredictionFile::from_json(&json).unwrap();
            prop_assert_eq!(&back, &file);
            prop_assert_eq!(back.to_json(), json);
        }
    }

    #[test]
    fn explanation_round_trip() {
        let json = r#"{"img": {"c": {"score": 0.4, "winning_rule": 1, "rules": [{"rule": 1, "premises": ["a", "d"], "minimum": 0.4, "weakest": "d"}], "excluded_rules": [0]}}}"#;
        let file = ExplanationFile::from_json(json).unwrap();
        assert_eq!(ExplanationFile::from_json(&file.to_json()).unwrap(), file);
    }
}
