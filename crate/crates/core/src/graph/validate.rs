use std::collections::HashMap;

use super::{RuleId, SymbolId, SymbolicSystem};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Finding {
    DanglingReference { rule: RuleId, symbol: SymbolId },
    DuplicateRule { rule: RuleId, existing: RuleId },
    EmptyPremises { rule: RuleId },
    ConclusionInPremises { rule: RuleId },
    DuplicateSymbolText { symbol: SymbolId, existing: SymbolId },
    EmptySymbolText { symbol: SymbolId },
}

/// Every invariant violation in `system`; empty for a well-formed system.
pub fn validate(system: &SymbolicSystem) -> Vec<Finding> {
    let mut findings = Vec::new();

    let mut texts: HashMap<&str, SymbolId> = HashMap::new();
    for symbol in system.symbols() {
        if symbol.text.is_empty() {
            findings.push(Finding::EmptySymbolText { symbol: symbol.id });
        } else if let Some(&existing) = texts.get(symbol.text.as_str()) {
            findings.push(Finding::DuplicateSymbolText { symbol: symbol.id, existing });
        } else {
            texts.insert(&symbol.text, symbol.id);
        }
    }

    let mut keys = HashMap::new();
    for rule in system.rules() {
        if rule.premise_ids.is_empty() {
            findings.push(Finding::EmptyPremises { rule: rule.id });
        }
        if rule.premise_ids.contains(&rule.conclusion_id) {
            findings.push(Finding::ConclusionInPremises { rule: rule.id });
        }
        let mut dangling = false;
        for id in rule.premise_ids.iter().chain(std::iter::once(&rule.conclusion_id)) {
            if system.symbol(*id).is_none() {
                dangling = true;
                findings.push(Finding::DanglingReference { rule: rule.id, symbol: *id });
            }
        }
        if dangling {
            continue;
        }
        if let Some(key) = system.rule_key(rule) {
            match keys.get(&key) {
                Some(&existing) => findings.push(Finding::DuplicateRule { rule: rule.id, existing }),
                None => {
                    keys.insert(key, rule.id);
                }
            }
        }
    }
    findings
}
