//! Fuzzy-logic conclusion scoring: a rule fires to the degree of its weakest
//! premise, a conclusion to the degree of its strongest rule.

mod file;
mod fuse;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use file::{ActivityExplanation, ExplanationFile, PredictionFile, RuleExplanation};
pub use fuse::{fuse_files, fuse_predictions, FusionPolicy};

use crate::graph::{decompose, GraphError, RuleId, SubSystem, SymbolId, SymbolicSystem};
use crate::grounding::GroundingFile;
use crate::instantiate::ActivitySpec;
use crate::text::canonicalize_symbol_text;

/// Activity (canonical text) → score.
pub type ScoreVector = BTreeMap<String, f64>;

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error("no probability for symbol {symbol} used by rule {rule}")]
    MissingProbability { symbol: String, rule: RuleId },
    #[error("activity {0:?} is not a conclusion of the system")]
    UnresolvedActivity(String),
    #[error("score vectors have different keys: {0}")]
    KeyMismatch(String),
    #[error("invalid fusion weights: {0}")]
    InvalidWeights(String),
    #[error("image {0:?} has no grounding")]
    MissingImage(String),
    #[error("invalid prediction file: {0}")]
    InvalidFile(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Minimum of one rule's premises and the premise attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleMinimum {
    pub rule_id: RuleId,
    pub minimum: f64,
    pub argmin: SymbolId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConclusionScore {
    pub conclusion_id: SymbolId,
    pub p_c: f64,
    /// Lowest-id rule attaining `p_c`; `None` when no rule was evaluated.
    pub winning_rule_id: Option<RuleId>,
    /// One entry per evaluated rule, in rule-id order.
    pub trace: Vec<RuleMinimum>,
    /// Rules left out because a premise was dropped.
    pub excluded_rules: Vec<RuleId>,
}

/// Max over rules of the min over premises. `lookup` yields `None` for an
/// unknown symbol and `Some(None)` for a dropped one, whose rules are
/// excluded. Ties go to the lowest rule id and the lowest symbol id.
pub fn evaluate_with(
    sub: &SubSystem,
    lookup: impl Fn(SymbolId) -> Option<Option<f64>>,
) -> Result<ConclusionScore, InferenceError> {
    let mut score = ConclusionScore {
        conclusion_id: sub.conclusion_id,
        p_c: 0.0,
        winning_rule_id: None,
        trace: Vec::new(),
        excluded_rules: Vec::new(),
    };
    'rules: for rule in sub.rules.values() {
        let mut best: Option<(f64, SymbolId)> = None;
        for &premise in &rule.premise_ids {
            let value = match lookup(premise) {
                Some(Some(v)) => v,
                Some(None) => {
                    score.excluded_rules.push(rule.id);
                    continue 'rules;
                }
                None => {
                    let symbol = sub.symbols.get(&premise).map_or_else(|| premise.to_string(), |s| s.text.clone());
                    return Err(InferenceError::MissingProbability { symbol, rule: rule.id });
                }
            };
            if best.is_none_or(|(m, _)| value < m) {
                best = Some((value, premise));
            }
        }
        let Some((minimum, argmin)) = best else { continue };
        if score.winning_rule_id.is_none() || minimum > score.p_c {
            score.p_c = minimum;
            score.winning_rule_id = Some(rule.id);
        }
        score.trace.push(RuleMinimum { rule_id: rule.id, minimum, argmin });
    }
    Ok(score)
}

pub fn evaluate_conclusion(
    sub: &SubSystem,
    probabilities: &BTreeMap<SymbolId, f64>,
) -> Result<ConclusionScore, InferenceError> {
    evaluate_with(sub, |id| probabilities.get(&id).map(|p| Some(*p)))
}

/// Evaluation against one image's grounding, keyed by canonical text.
pub fn evaluate_grounded(
    sub: &SubSystem,
    row: &BTreeMap<String, Option<f64>>,
) -> Result<ConclusionScore, InferenceError> {
    evaluate_with(sub, |id| sub.symbols.get(&id).and_then(|s| row.get(&s.text)).copied())
}

/// Activities resolved to their sub-systems once, for reuse across images.
#[derive(Debug, Clone)]
pub struct ActivitySet {
    entries: Vec<(String, Option<String>, SubSystem)>,
}

impl ActivitySet {
    pub fn resolve(system: &SymbolicSystem, activities: &[ActivitySpec]) -> Result<Self, InferenceError> {
        let mut entries = Vec::with_capacity(activities.len());
        for activity in activities {
            let text = canonicalize_symbol_text(&activity.activity)
                .map_err(|_| InferenceError::UnresolvedActivity(activity.activity.clone()))?;
            let id = system
                .find_symbol(&text)
                .filter(|id| system.symbol(*id).is_some_and(|s| s.is_conclusion))
                .ok_or_else(|| InferenceError::UnresolvedActivity(activity.activity.clone()))?;
            let object = activity.object.as_deref().map(|o| canonicalize_symbol_text(o).unwrap_or_default());
            entries.push((text, object, decompose(system, id)?));
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn subsystems(&self) -> impl Iterator<Item = (&str, &SubSystem)> {
        self.entries.iter().map(|(t, _, s)| (t.as_str(), s))
    }

    /// Scores every activity on one image. With `known_objects`, an activity
    /// whose object is not among them scores 0 without evaluation.
    pub fn evaluate(
        &self,
        row: &BTreeMap<String, Option<f64>>,
        known_objects: Option<&BTreeSet<String>>,
    ) -> Result<(ScoreVector, BTreeMap<String, ConclusionScore>), InferenceError> {
        let mut scores = ScoreVector::new();
        let mut explanations = BTreeMap::new();
        for (text, object, sub) in &self.entries {
            let masked = match (known_objects, object) {
                (Some(known), Some(object)) => !known.contains(object),
                _ => false,
            };
            if masked {
                scores.insert(text.clone(), 0.0);
                continue;
            }
            let score = evaluate_grounded(sub, row)?;
            scores.insert(text.clone(), score.p_c);
            explanations.insert(text.clone(), score);
        }
        Ok((scores, explanations))
    }
}

/// Scores `activities` on one image's grounding.
pub fn evaluate_activity_set(
    system: &SymbolicSystem,
    row: &BTreeMap<String, Option<f64>>,
    activities: &[ActivitySpec],
    known_objects: Option<&BTreeSet<String>>,
) -> Result<ScoreVector, InferenceError> {
    Ok(ActivitySet::resolve(system, activities)?.evaluate(row, known_objects)?.0)
}

/// Predictions and explanations for every image of a grounding file.
pub fn infer_all(
    system: &SymbolicSystem,
    grounding: &GroundingFile,
    activities: &[ActivitySpec],
    objects: Option<&BTreeMap<String, BTreeSet<String>>>,
) -> Result<(PredictionFile, ExplanationFile), InferenceError> {
    let set = ActivitySet::resolve(system, activities)?;
    let mut predictions = PredictionFile::default();
    let mut explanations = ExplanationFile::default();
    for (image, row) in &grounding.images {
        let known = match objects {
            Some(map) => Some(map.get(image).ok_or_else(|| InferenceError::MissingImage(image.clone()))?),
            None => None,
        };
        let (scores, traces) = set.evaluate(row, known)?;
        predictions.images.insert(image.clone(), scores);
        let row_explanations = traces
            .iter()
            .map(|(activity, score)| {
                let sub = set
                    .subsystems()
                    .find(|(t, _)| t == activity)
                    .map(|(_, s)| s)
                    .expect("explained activity is in the set");
                (activity.clone(), ActivityExplanation::new(sub, score))
            })
            .collect();
        explanations.images.insert(image.clone(), row_explanations);
    }
    Ok((predictions, explanations))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::graph::Provenance;

    fn system(rules: &[&[&str]]) -> SymbolicSystem {
        let mut system = SymbolicSystem::new();
        for premises in rules {
            system.add_rule(premises, "c", None, Provenance::default()).unwrap();
        }
        system
    }

    fn probabilities(system: &SymbolicSystem, values: &[(&str, f64)]) -> BTreeMap<SymbolId, f64> {
        values.iter().map(|(t, p)| (system.find_symbol(t).unwrap(), *p)).collect()
    }

    fn sub(system: &SymbolicSystem) -> SubSystem {
        decompose(system, system.find_symbol("c").unwrap()).unwrap()
    }

    #[test]
    fn listed_examples() {
        let s = system(&[&["a", "b"]]);
        let score = evaluate_conclusion(&sub(&s), &probabilities(&s, &[("a", 1.0), ("b", 1.0)])).unwrap();
        assert_eq!(score.p_c, 1.0);

        let s = system(&[&["a", "b"], &["x", "y", "z"]]);
        let p = probabilities(&s, &[("a", 0.9), ("b", 0.8), ("x", 0.7), ("y", 0.95), ("z", 0.6)]);
        let score = evaluate_conclusion(&sub(&s), &p).unwrap();
        assert_eq!(score.p_c, 0.8);
        assert_eq!(score.winning_rule_id, Some(RuleId(0)));
        assert_eq!(score.trace[1].minimum, 0.6);
        assert_eq!(score.trace[1].argmin, s.find_symbol("z").unwrap());

        let zeros = probabilities(&s, &[("a", 0.0), ("b", 0.0), ("x", 0.0), ("y", 0.0), ("z", 0.0)]);
        let score = evaluate_conclusion(&sub(&s), &zeros).unwrap();
        assert_eq!((score.p_c, score.winning_rule_id), (0.0, Some(RuleId(0))));
    }

    #[test]
    fn missing_probability_names_symbol_and_rule() {
        let s = system(&[&["a", "b"]]);
        let err = evaluate_conclusion(&sub(&s), &probabilities(&s, &[("a", 0.5)])).unwrap_err();
        assert!(matches!(err, InferenceError::MissingProbability { ref symbol, rule: RuleId(0) } if symbol == "b"));
    }

    #[test]
    fn dropped_symbols_exclude_rules() {
        let s = system(&[&["a", "b"], &["a", "d"]]);
        let row: BTreeMap<String, Option<f64>> =
            [("a", Some(0.9)), ("b", None), ("d", Some(0.4))].map(|(t, v)| (t.to_string(), v)).into();
        let score = evaluate_grounded(&sub(&s), &row).unwrap();
        assert_eq!(score.p_c, 0.4);
        assert_eq!(score.excluded_rules, [RuleId(0)]);
        assert_eq!(score.winning_rule_id, Some(RuleId(1)));

        let all_dropped: BTreeMap<String, Option<f64>> = [("a", None)].map(|(t, v)| (t.to_string(), v)).into();
        let score = evaluate_grounded(&sub(&s), &all_dropped).unwrap();
        assert_eq!((score.p_c, score.winning_rule_id, score.trace.len()), (0.0, None, 0));
    }

    #[test]
    fn conditional_mask_and_resolution() {
        let mut s = SymbolicSystem::new();
        s.add_rule(&["hold a cup"], "drink with a cup", None, Provenance::default()).unwrap();
        s.add_rule(&["hold a cup"], "wash a cup", None, Provenance::default()).unwrap();
        let row: BTreeMap<String, Option<f64>> = [("hold a cup".to_string(), Some(0.7))].into();
        let activities =
            [ActivitySpec::new("drink with a cup", Some("cup")), ActivitySpec::new("wash a cup", Some("bottle"))];
        let known: BTreeSet<String> = ["cup".to_string()].into();
        let scores = evaluate_activity_set(&s, &row, &activities, Some(&known)).unwrap();
        assert_eq!(scores["drink with a cup"], 0.7);
        assert_eq!(scores["wash a cup"], 0.0);
        let unmasked = evaluate_activity_set(&s, &row, &activities, None).unwrap();
        assert_eq!(unmasked["wash a cup"], 0.7);
        assert!(matches!(
            evaluate_activity_set(&s, &row, &[ActivitySpec::new("hold a cup", None)], None),
            Err(InferenceError::UnresolvedActivity(_))
        ));
    }

    proptest! {
        #[test]
        fn bounded_and_monotone(
            rules in prop::collection::vec(prop::collection::btree_set(0u8..8, 1..5), 1..6),
            values in prop::collection::vec(0.0f64..=1.0, 8),
            bump in 0usize..8,
            delta in 0.0f64..0.5,
        ) {
            let texts: Vec<Vec<String>> = rules.iter().map(|r| r.iter().map(|i| format!("m{i}")).collect()).collect();
            let mut s = SymbolicSystem::new();
            for premises in &texts {
                let _ = s.add_rule(premises, "c", None, Provenance::default());
            }
            let sub = sub(&s);
            let p: BTreeMap<SymbolId, f64> = sub
                .premise_symbols()
                .map(|sym| (sym.id, values[sym.text[1..].parse::<usize>().unwrap()]))
                .collect();
            let score = evaluate_conclusion(&sub, &p).unwrap();
            let lo = p.values().cloned().fold(f64::INFINITY, f64::min);
            let hi = p.values().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo <= score.p_c && score.p_c <= hi);

            let mut raised = p.clone();
            if let Some(id) = sub.premise_symbols().nth(bump % p.len()).map(|s| s.id) {
                *raised.get_mut(&id).unwrap() = (raised[&id] + delta).min(1.0);
            }
            prop_assert!(evaluate_conclusion(&sub, &raised).unwrap().p_c >= score.p_c);
        }
    }
}
