//! The B-graph store: symbols are vertices, rules are B-arcs from a premise set
//! to a single conclusion.

mod decompose;
mod file;
mod merge;
mod similarity;
mod validate;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{canonicalize_symbol_text, TextError};

pub use decompose::decompose;
pub use file::{RuleRecord, SymbolRecord, SystemFile, SYSTEM_FILE_VERSION};
pub use merge::merge_subsystems;
pub use similarity::{graph_similarity, scaled_jaccard_similarity};
pub use validate::{validate, Finding};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SymbolId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RuleId(pub u32);

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Symbol {
    pub id: SymbolId,
    /// Canonical text; the symbol's identity within a system.
    pub text: String,
    pub raw_text: String,
    pub is_conclusion: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Provenance {
    /// Symbol-rule loop round that produced the rule (1-based).
    pub round_index: u32,
    /// Premises in the order they were generated.
    pub extension_trace: Vec<SymbolId>,
    /// At least one entailment sample answered "unknown".
    pub flagged_unknown: bool,
    /// Scores of identical rules collapsed into this one by a merge.
    pub merged_scores: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub id: RuleId,
    pub premise_ids: BTreeSet<SymbolId>,
    pub conclusion_id: SymbolId,
    /// Mean entailment score, `None` when unknown (e.g. imported rules).
    pub entailment_score: Option<f64>,
    pub provenance: Provenance,
}

impl Rule {
    pub fn premise_count(&self) -> usize {
        self.premise_ids.len()
    }
}

/// Rule identity: canonical premise texts and canonical conclusion text.
pub type RuleKey = (BTreeSet<String>, String);

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error(transparent)]
    Text(#[from] TextError),
    #[error("a rule needs at least one premise")]
    EmptyPremises,
    #[error("premise {0:?} is listed twice")]
    DuplicatePremise(String),
    #[error("conclusion {0:?} also appears among the premises")]
    ConclusionInPremises(String),
    #[error("rule duplicates existing rule {existing}")]
    DuplicateRule { existing: RuleId },
    #[error("unknown conclusion {0}")]
    UnknownConclusion(String),
    #[error("sub-systems conclude different activities: {0:?} vs {1:?}")]
    MismatchedConclusions(String, String),
    #[error("invalid system file: {0}")]
    InvalidFile(String),
}

/// Vertices and B-arcs. Symbols are keyed by canonical text; rules by their
/// (premise set, conclusion) pair.
#[derive(Debug, Clone, Default)]
pub struct SymbolicSystem {
    symbols: BTreeMap<SymbolId, Symbol>,
    rules: BTreeMap<RuleId, Rule>,
    by_text: HashMap<String, SymbolId>,
    rule_index: HashMap<RuleKey, RuleId>,
    next_symbol: u32,
    next_rule: u32,
}

impl SymbolicSystem {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a system from raw parts without checking invariants; use
    /// [`validate`] to inspect the result.
    pub fn from_parts(symbols: Vec<Symbol>, rules: Vec<Rule>) -> Self {
        let mut system = Self::new();
        for symbol in symbols {
            system.next_symbol = system.next_symbol.max(symbol.id.0 + 1);
            system.by_text.entry(symbol.text.clone()).or_insert(symbol.id);
            system.symbols.insert(symbol.id, symbol);
        }
        for rule in rules {
            system.next_rule = system.next_rule.max(rule.id.0 + 1);
            if let Some(key) = system.rule_key(&rule) {
                system.rule_index.entry(key).or_insert(rule.id);
            }
            system.rules.insert(rule.id, rule);
        }
        system
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.values()
    }

    pub fn rules(&self) -> impl Iterator<Item = &Rule> {
        self.rules.values()
    }

    pub fn symbol(&self, id: SymbolId) -> Option<&Symbol> {
        self.symbols.get(&id)
    }

    pub fn rule(&self, id: RuleId) -> Option<&Rule> {
        self.rules.get(&id)
    }

    pub fn symbol_count(&self) -> usize {
        self.symbols.len()
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty() && self.rules.is_empty()
    }

    /// Looks a symbol up by any spelling that canonicalizes to its text.
    pub fn find_symbol(&self, text: &str) -> Option<SymbolId> {
        let canonical = canonicalize_symbol_text(text).ok()?;
        self.by_text.get(&canonical).copied()
    }

    pub fn conclusions(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.values().filter(|s| s.is_conclusion)
    }

    /// Inserts a symbol or returns the existing one with the same canonical
    /// text. `is_conclusion` is sticky: once set it stays set.
    pub fn upsert_symbol(&mut self, raw: &str, is_conclusion: bool) -> Result<SymbolId, GraphError> {
        let text = canonicalize_symbol_text(raw)?;
        Ok(self.upsert_canonical(text, raw.trim(), is_conclusion))
    }

    pub(crate) fn upsert_canonical(&mut self, text: String, raw: &str, is_conclusion: bool) -> SymbolId {
        if let Some(&id) = self.by_text.get(&text) {
            if is_conclusion {
                if let Some(symbol) = self.symbols.get_mut(&id) {
                    symbol.is_conclusion = true;
                }
            }
            return id;
        }
        let id = SymbolId(self.next_symbol);
        self.next_symbol += 1;
        self.by_text.insert(text.clone(), id);
        self.symbols.insert(id, Symbol { id, text, raw_text: raw.to_string(), is_conclusion });
        id
    }

    /// Adds `premises ⊨ conclusion`. Premise order is kept only in the
    /// provenance trace; `[a, b] ⊨ c` and `[b, a] ⊨ c` are the same rule.
    pub fn add_rule<S: AsRef<str>>(
        &mut self,
        premise_texts: &[S],
        conclusion_text: &str,
        score: Option<f64>,
        provenance: Provenance,
    ) -> Result<RuleId, GraphError> {
        if premise_texts.is_empty() {
            return Err(GraphError::EmptyPremises);
        }
        let conclusion = canonicalize_symbol_text(conclusion_text)?;
        let mut premises = Vec::with_capacity(premise_texts.len());
        let mut seen = BTreeSet::new();
        for raw in premise_texts {
            let text = canonicalize_symbol_text(raw.as_ref())?;
            if text == conclusion {
                return Err(GraphError::ConclusionInPremises(text));
            }
            if !seen.insert(text.clone()) {
                return Err(GraphError::DuplicatePremise(text));
            }
            premises.push((raw.as_ref(), text));
        }
        let key = (seen, conclusion);
        if let Some(&existing) = self.rule_index.get(&key) {
            return Err(GraphError::DuplicateRule { existing });
        }

        let conclusion_id = self.upsert_symbol(conclusion_text, true)?;
        let mut trace = Vec::with_capacity(premises.len());
        for (raw, _) in &premises {
            trace.push(self.upsert_symbol(raw, false)?);
        }
        let id = RuleId(self.next_rule);
        self.next_rule += 1;
        self.rule_index.insert(key, id);
        self.rules.insert(
            id,
            Rule {
                id,
                premise_ids: trace.iter().copied().collect(),
                conclusion_id,
                entailment_score: score,
                provenance: Provenance { extension_trace: trace, ..provenance },
            },
        );
        Ok(id)
    }

    pub(crate) fn rule_mut(&mut self, id: RuleId) -> Option<&mut Rule> {
        self.rules.get_mut(&id)
    }

    /// Canonical identity of a rule, `None` if it references unknown symbols.
    pub fn rule_key(&self, rule: &Rule) -> Option<RuleKey> {
        let premises = rule
            .premise_ids
            .iter()
            .map(|id| self.symbols.get(id).map(|s| s.text.clone()))
            .collect::<Option<BTreeSet<_>>>()?;
        let conclusion = self.symbols.get(&rule.conclusion_id)?.text.clone();
        Some((premises, conclusion))
    }

    /// Symbol texts and rule keys, independent of id assignment.
    pub fn canonical_form(&self) -> (BTreeSet<String>, BTreeSet<RuleKey>) {
        let symbols = self.symbols.values().map(|s| s.text.clone()).collect();
        let rules = self.rules.values().filter_map(|r| self.rule_key(r)).collect();
        (symbols, rules)
    }
}

/// The slice of a system that concludes one activity: its rules, their
/// premises, and the conclusion itself.
#[derive(Debug, Clone, PartialEq)]
pub struct SubSystem {
    pub conclusion_id: SymbolId,
    pub symbols: BTreeMap<SymbolId, Symbol>,
    pub rules: BTreeMap<RuleId, Rule>,
}

impl SubSystem {
    pub fn conclusion(&self) -> &Symbol {
        &self.symbols[&self.conclusion_id]
    }

    /// Every symbol except the conclusion.
    pub fn premise_symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.values().filter(move |s| s.id != self.conclusion_id)
    }

    pub fn premise_texts(&self) -> BTreeSet<String> {
        self.premise_symbols().map(|s| s.text.clone()).collect()
    }

    pub fn rule_keys(&self) -> BTreeSet<RuleKey> {
        self.rules
            .values()
            .filter_map(|rule| {
                let premises = rule
                    .premise_ids
                    .iter()
                    .map(|id| self.symbols.get(id).map(|s| s.text.clone()))
                    .collect::<Option<BTreeSet<_>>>()?;
                Some((premises, self.conclusion().text.clone()))
            })
            .collect()
    }

    pub fn into_system(self) -> SymbolicSystem {
        merge_subsystems(&[self])
    }
}
