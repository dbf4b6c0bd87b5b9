use super::{GraphError, Provenance, SubSystem, SymbolicSystem};

fn better(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => a > b,
        (Some(_), None) => true,
        _ => false,
    }
}

/// Union of sub-systems. Symbols merge by canonical text (ids are
/// reassigned in encounter order); identical rules collapse, keeping the
/// higher entailment score and recording the other one in provenance.
pub fn merge_subsystems(subsystems: &[SubSystem]) -> SymbolicSystem {
    let mut merged = SymbolicSystem::new();
    for sub in subsystems {
        for symbol in sub.symbols.values() {
            merged.upsert_canonical(symbol.text.clone(), &symbol.raw_text, symbol.is_conclusion);
        }
        for rule in sub.rules.values() {
            let Some(conclusion) = sub.symbols.get(&rule.conclusion_id) else {
                continue;
            };
            let trace: Option<Vec<&str>> = rule
                .provenance
                .extension_trace
                .iter()
                .chain(rule.premise_ids.iter())
                .map(|id| sub.symbols.get(id).map(|s| s.text.as_str()))
                .collect();
            let Some(trace) = trace else { continue };
            let mut premises: Vec<&str> = Vec::new();
            for text in trace {
                if !premises.contains(&text) {
                    premises.push(text);
                }
            }
            let provenance = Provenance {
                round_index: rule.provenance.round_index,
                extension_trace: Vec::new(),
                flagged_unknown: rule.provenance.flagged_unknown,
                merged_scores: rule.provenance.merged_scores.clone(),
            };
            match merged.add_rule(&premises, &conclusion.text, rule.entailment_score, provenance) {
                Ok(_) => {}
                Err(GraphError::DuplicateRule { existing }) => {
                    let Some(kept) = merged.rule_mut(existing) else { continue };
                    if better(rule.entailment_score, kept.entailment_score) {
                        let previous = kept.entailment_score;
                        kept.entailment_score = rule.entailment_score;
                        kept.provenance.merged_scores.push(previous);
                    } else {
                        kept.provenance.merged_scores.push(rule.entailment_score);
                    }
                    kept.provenance.flagged_unknown |= rule.provenance.flagged_unknown;
                }
                Err(_) => {}
            }
        }
    }
    merged
}
