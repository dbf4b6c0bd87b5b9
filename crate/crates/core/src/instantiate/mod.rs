//! Building sub-systems with an oracle: symbol initialization, rule
//! extension, entailment gating, and query accounting.

mod candidate;
mod config;
mod engine;
mod ledger;

use std::collections::HashSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use candidate::{CandidateRule, CandidateStatus};
pub use config::LoopConfig;
pub use engine::{instantiate_subsystem, EntailmentScore, ExtensionOutcome, SubsystemLoop, SubsystemRun};
pub use ledger::{predicted_query_count, CostLedger, RoundStats};

use crate::graph::{merge_subsystems, SymbolicSystem};
use crate::oracle::{Oracle, OracleError};
use crate::text::{activity_gerund, canonicalize_symbol_text};

/// One entry of an activities file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivitySpec {
    /// Conclusion in base form, e.g. `board an airplane`.
    pub activity: String,
    #[serde(default)]
    pub object: Option<String>,
    /// Known conditions used as initial symbols instead of a symbol
    /// initialization query.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_symbols: Option<Vec<String>>,
}

impl ActivitySpec {
    pub fn new(activity: impl Into<String>, object: Option<&str>) -> Self {
        Self { activity: activity.into(), object: object.map(str::to_string), initial_symbols: None }
    }

    pub fn conclusion_text(&self) -> Result<String, InstantiateError> {
        canonicalize_symbol_text(&self.activity).map_err(|_| InstantiateError::EmptyConclusion)
    }

    /// Progressive form used inside prompts: `boarding an airplane`.
    pub fn prompt_activity(&self) -> String {
        let text = self.activity.trim();
        let lower = text.to_lowercase();
        let body =
            ["human ", "person "].iter().find_map(|p| lower.strip_prefix(p).map(|_| &text[p.len()..])).unwrap_or(text);
        activity_gerund(&body.to_lowercase())
    }

    pub fn list_from_json(json: &str) -> Result<Vec<Self>, InstantiateError> {
        serde_json::from_str(json).map_err(|e| InstantiateError::Config(format!("activities file: {e}")))
    }
}

#[derive(Debug, Error)]
pub enum InstantiateError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("conclusion text is empty")]
    EmptyConclusion,
    #[error("no conclusions given")]
    NoConclusions,
    #[error("conclusion {0:?} is listed more than once")]
    DuplicateConclusion(String),
    #[error("instantiation aborted: {source}")]
    Aborted { partial: Box<SubsystemRun>, source: OracleError },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConclusionFailure {
    pub activity: String,
    pub error: String,
}

/// Merged result over several conclusions. Ledgers follow input order and
/// include partial ledgers of failed conclusions.
#[derive(Debug, Clone)]
pub struct SystemRun {
    pub system: SymbolicSystem,
    pub ledgers: Vec<CostLedger>,
    pub failures: Vec<ConclusionFailure>,
}

/// Instantiates each conclusion independently (in parallel, up to
/// `workers` threads) and merges the successful sub-systems in input order.
pub fn instantiate_system(
    activities: &[ActivitySpec],
    oracle: &dyn Oracle,
    config: &LoopConfig,
    workers: usize,
) -> Result<SystemRun, InstantiateError> {
    config.validate()?;
    if activities.is_empty() {
        return Err(InstantiateError::NoConclusions);
    }
    let mut seen = HashSet::new();
    for activity in activities {
        let text = activity.conclusion_text()?;
        if !seen.insert(text.clone()) {
            return Err(InstantiateError::DuplicateConclusion(text));
        }
    }

    let results: Vec<Mutex<Option<Result<SubsystemRun, InstantiateError>>>> =
        activities.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers.clamp(1, activities.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(activity) = activities.get(i) else { break };
                let result = instantiate_subsystem(activity, oracle, config);
                *results[i].lock().expect("result slot") = Some(result);
            });
        }
    });

    let mut subsystems = Vec::new();
    let mut ledgers = Vec::new();
    let mut failures = Vec::new();
    for (activity, slot) in activities.iter().zip(results) {
        match slot.into_inner().expect("result slot").expect("every slot filled") {
            Ok(run) => {
                ledgers.push(run.ledger);
                subsystems.push(run.subsystem);
            }
            Err(InstantiateError::Aborted { partial, source }) => {
                ledgers.push(partial.ledger);
                failures.push(ConclusionFailure { activity: activity.activity.clone(), error: source.to_string() });
            }
            Err(other) => return Err(other),
        }
    }
    Ok(SystemRun { system: merge_subsystems(&subsystems), ledgers, failures })
}
