use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::graph::SymbolicSystem;
use crate::grounding::{GroundingConfig, ImageGrounder, ScoringBackend, SymbolTree};
use crate::inference::ActivitySet;
use crate::instantiate::ActivitySpec;

/// Symbol evaluations needed per image to score a set of activities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperationCount {
    /// Sum of each activity's premise-symbol count.
    pub naive: u64,
    /// Distinct premise symbols across the activities.
    pub reuse: u64,
    /// Mean realized backend calls per image under pruning.
    pub hierarchical: Option<f64>,
    pub per_image: BTreeMap<String, u64>,
    /// Cost of a direct activity predictor, passed through when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<f64>,
}

impl OperationCount {
    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(baseline) = self.baseline {
            let _ = writeln!(out, "{:<14}  {:>8.2}", "direct", baseline);
        }
        let _ = writeln!(out, "{:<14}  {:>8}", "naive", self.naive);
        let _ = writeln!(out, "{:<14}  {:>8}", "reuse", self.reuse);
        if let Some(h) = self.hierarchical {
            let _ = writeln!(out, "{:<14}  {:>8.2}  (mean over {} images)", "hierarchical", h, self.per_image.len());
        }
        out
    }
}

/// Naive and reuse counts, plus realized pruned calls when a tree, backend,
/// and images are supplied.
pub fn operation_count(
    system: &SymbolicSystem,
    activities: &[ActivitySpec],
    pruning: Option<(&SymbolTree, &dyn ScoringBackend, &[String])>,
) -> Result<OperationCount, EvalError> {
    let set = ActivitySet::resolve(system, activities)?;
    let mut naive = 0u64;
    let mut pool = BTreeSet::new();
    for (_, sub) in set.subsystems() {
        let texts = sub.premise_texts();
        naive += texts.len() as u64;
        pool.extend(texts);
    }
    let mut count = OperationCount {
        naive,
        reuse: pool.len() as u64,
        hierarchical: None,
        per_image: BTreeMap::new(),
        baseline: None,
    };
    if let Some((tree, backend, images)) = pruning {
        for image in images {
            let mut grounder = ImageGrounder::new(image.clone(), backend, GroundingConfig::default());
            grounder.ground_pool_with_pruning(&pool, tree)?;
            count.per_image.insert(image.clone(), grounder.calls());
        }
        if !images.is_empty() {
            count.hierarchical = Some(count.per_image.values().sum::<u64>() as f64 / images.len() as f64);
        }
    }
    Ok(count)
}
