use std::collections::BTreeMap;

use super::{GraphError, SubSystem, SymbolId, SymbolicSystem};

/// Slice of `system` for one conclusion: the rules concluding it and the
/// symbols those rules mention. Unrelated symbols and rules are dropped.
pub fn decompose(system: &SymbolicSystem, conclusion_id: SymbolId) -> Result<SubSystem, GraphError> {
    let conclusion = system
        .symbol(conclusion_id)
        .filter(|s| s.is_conclusion)
        .ok_or_else(|| GraphError::UnknownConclusion(conclusion_id.to_string()))?;

    let rules: BTreeMap<_, _> =
        system.rules().filter(|r| r.conclusion_id == conclusion_id).map(|r| (r.id, r.clone())).collect();

    let mut symbols = BTreeMap::new();
    symbols.insert(conclusion_id, conclusion.clone());
    for rule in rules.values() {
        for premise in &rule.premise_ids {
            if let Some(symbol) = system.symbol(*premise) {
                symbols.insert(*premise, symbol.clone());
            }
        }
    }

    Ok(SubSystem { conclusion_id, symbols, rules })
}
