use std::collections::BTreeSet;

use super::{GraphError, RuleKey, SubSystem};

fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Mean of the symbol and rule Jaccard indices, each rescaled to [-1, 1].
pub fn scaled_jaccard_similarity(
    symbols_a: &BTreeSet<String>,
    rules_a: &BTreeSet<RuleKey>,
    symbols_b: &BTreeSet<String>,
    rules_b: &BTreeSet<RuleKey>,
) -> f64 {
    let symbols = 2.0 * jaccard(symbols_a, symbols_b) - 1.0;
    let rules = 2.0 * jaccard(rules_a, rules_b) - 1.0;
    (symbols + rules) / 2.0
}

/// Similarity of two sub-systems for the same conclusion, in [-1, 1].
/// Symbol sets include the shared conclusion.
pub fn graph_similarity(a: &SubSystem, b: &SubSystem) -> Result<f64, GraphError> {
    let (ca, cb) = (&a.conclusion().text, &b.conclusion().text);
    if ca != cb {
        return Err(GraphError::MismatchedConclusions(ca.clone(), cb.clone()));
    }
    let symbols = |s: &SubSystem| s.symbols.values().map(|x| x.text.clone()).collect();
    Ok(scaled_jaccard_similarity(&symbols(a), &a.rule_keys(), &symbols(b), &b.rule_keys()))
}
