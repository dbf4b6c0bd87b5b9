//! JSON system file. Byte-stable: identical systems serialize identically.

use serde::{Deserialize, Serialize};

use super::{validate, GraphError, Provenance, Rule, RuleId, Symbol, SymbolId, SymbolicSystem};

pub const SYSTEM_FILE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolRecord {
    pub id: u32,
    pub text: String,
    pub raw_text: String,
    pub is_conclusion: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleRecord {
    pub id: u32,
    /// Sorted by id.
    pub premises: Vec<u32>,
    pub conclusion: u32,
    pub entailment_score: Option<f64>,
    #[serde(default)]
    pub round: u32,
    #[serde(default)]
    pub trace: Vec<u32>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub flagged_unknown: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub merged_scores: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemFile {
    pub version: u32,
    pub symbols: Vec<SymbolRecord>,
    pub rules: Vec<RuleRecord>,
}

impl SystemFile {
    pub fn from_system(system: &SymbolicSystem) -> Self {
        let symbols = system
            .symbols()
            .map(|s| SymbolRecord {
                id: s.id.0,
                text: s.text.clone(),
                raw_text: s.raw_text.clone(),
                is_conclusion: s.is_conclusion,
            })
            .collect();
        let rules = system
            .rules()
            .map(|r| RuleRecord {
                id: r.id.0,
                premises: r.premise_ids.iter().map(|p| p.0).collect(),
                conclusion: r.conclusion_id.0,
                entailment_score: r.entailment_score,
                round: r.provenance.round_index,
                trace: r.provenance.extension_trace.iter().map(|p| p.0).collect(),
                flagged_unknown: r.provenance.flagged_unknown,
                merged_scores: r.provenance.merged_scores.clone(),
            })
            .collect();
        Self { version: SYSTEM_FILE_VERSION, symbols, rules }
    }

    /// The system exactly as written, without invariant checks.
    pub fn to_system_unchecked(&self) -> SymbolicSystem {
        let symbols = self
            .symbols
            .iter()
            .map(|s| Symbol {
                id: SymbolId(s.id),
                text: s.text.clone(),
                raw_text: s.raw_text.clone(),
                is_conclusion: s.is_conclusion,
            })
            .collect();
        let rules = self
            .rules
            .iter()
            .map(|r| Rule {
                id: RuleId(r.id),
                premise_ids: r.premises.iter().map(|p| SymbolId(*p)).collect(),
                conclusion_id: SymbolId(r.conclusion),
                entailment_score: r.entailment_score,
                provenance: Provenance {
                    round_index: r.round,
                    extension_trace: r.trace.iter().map(|p| SymbolId(*p)).collect(),
                    flagged_unknown: r.flagged_unknown,
                    merged_scores: r.merged_scores.clone(),
                },
            })
            .collect();
        SymbolicSystem::from_parts(symbols, rules)
    }

    /// The system, rejected if any invariant is violated.
    pub fn to_system(&self) -> Result<SymbolicSystem, GraphError> {
        if self.version != SYSTEM_FILE_VERSION {
            return Err(GraphError::InvalidFile(format!("unsupported version {}", self.version)));
        }
        let system = self.to_system_unchecked();
        let findings = validate(&system);
        if let Some(first) = findings.first() {
            return Err(GraphError::InvalidFile(format!("{} finding(s), first: {first:?}", findings.len())));
        }
        Ok(system)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("system file serializes");
        out.push('\n');
        out
    }

    pub fn from_json(json: &str) -> Result<Self, GraphError> {
        serde_json::from_str(json).map_err(|e| GraphError::InvalidFile(e.to_string()))
    }
}

impl SymbolicSystem {
    pub fn to_json(&self) -> String {
        SystemFile::from_system(self).to_json()
    }

    /// Parses and validates a system file. HAKE-style rule sets use the same
    /// schema with null scores.
    pub fn from_json(json: &str) -> Result<Self, GraphError> {
        SystemFile::from_json(json)?.to_system()
    }
}
