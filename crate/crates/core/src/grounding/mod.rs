//! Symbol grounding: turning premise symbols into probabilities for an
//! image, with paraphrase checking, per-image reuse, and hierarchical
//! pruning.

mod backend;
mod checker;
mod file;
mod grounder;
mod normalize;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use backend::{OracleScorer, ProbabilityTable, ScoringBackend, TableEntry, TableValue};
pub use checker::{check_symbol, mean_and_std, VariantSet, DEFAULT_STD_THRESHOLD, DEFAULT_VARIANT_COUNT};
pub use file::GroundingFile;
pub use grounder::{
    ground_symbols, ground_system, ground_with_pruning, premise_pool, GroundingConfig, ImageGrounder, Measurement,
    PrunedGrounding, SystemGrounding,
};
pub use normalize::{clamp_open, normalize_yes_no, ScorePair, PROBABILITY_MARGIN};
pub use tree::{synthesize_father, FatherNode, SymbolTree};

use crate::graph::SymbolId;
use crate::oracle::OracleError;
use crate::text::TextError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbabilitySource {
    Single,
    VariantMean,
    /// Assigned the prune threshold because an ancestor fell below it.
    Pruned,
}

/// A grounded symbol. `value` is the measured probability; the uncertain
/// policy is applied separately by [`UncertainPolicy::effective`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolProbability {
    pub symbol_id: SymbolId,
    pub value: f64,
    pub source: ProbabilitySource,
    pub uncertain: bool,
    pub variant_std: Option<f64>,
}

/// What inference sees for a symbol the checker flagged as uncertain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UncertainPolicy {
    /// Probability 0.5.
    #[default]
    Neutral,
    /// Probability 1, the identity of `min`, so the premise stops constraining
    /// its rules.
    DropPremise,
    /// Every rule mentioning the symbol is excluded.
    DropRule,
}

impl UncertainPolicy {
    pub const NEUTRAL_VALUE: f64 = 0.5;
    pub const DROPPED_PREMISE_VALUE: f64 = 1.0;

    /// Value handed to inference; `None` marks a symbol whose rules are
    /// excluded.
    pub fn effective(self, value: f64, uncertain: bool) -> Option<f64> {
        if !uncertain {
            return Some(value);
        }
        match self {
            UncertainPolicy::Neutral => Some(Self::NEUTRAL_VALUE),
            UncertainPolicy::DropPremise => Some(Self::DROPPED_PREMISE_VALUE),
            UncertainPolicy::DropRule => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            UncertainPolicy::Neutral => "neutral",
            UncertainPolicy::DropPremise => "drop-premise",
            UncertainPolicy::DropRule => "drop-rule",
        }
    }
}

impl fmt::Display for UncertainPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for UncertainPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "neutral" => Ok(UncertainPolicy::Neutral),
            "drop-premise" => Ok(UncertainPolicy::DropPremise),
            "drop-rule" => Ok(UncertainPolicy::DropRule),
            other => Err(format!("unknown uncertain policy {other:?}")),
        }
    }
}

#[derive(Debug, Error)]
pub enum GroundingError {
    #[error("no score for symbol {symbol:?} on image {image:?}")]
    Missing { image: String, symbol: String },
    #[error("need at least two variant probabilities, got {0}")]
    TooFewVariants(usize),
    #[error("invalid probability table: {0}")]
    InvalidTable(String),
    #[error("invalid symbol tree: {0}")]
    InvalidTree(String),
    #[error("tree does not match the grounded symbols: {0}")]
    TreeMismatch(String),
    #[error("invalid grounding file: {0}")]
    InvalidFile(String),
    #[error(transparent)]
    Text(#[from] TextError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}
