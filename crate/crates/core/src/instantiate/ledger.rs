use serde::{Deserialize, Serialize};

/// `1 + n_ent * Σ|M|` over the given premise counts.
pub fn predicted_query_count(n_ent: u32, premise_counts: &[u32]) -> u64 {
    1 + u64::from(n_ent) * premise_counts.iter().map(|&c| u64::from(c)).sum::<u64>()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundStats {
    pub round: u32,
    pub new_symbols: u32,
    pub new_rules: u32,
}

/// Oracle-query accounting for one conclusion. Every call lands in exactly
/// one bucket:
/// - `init_queries`: the well-formed symbol-initialization call;
/// - `entailment_queries`, `extension_queries`: well-formed calls made while
///   growing a candidate that became a new rule;
/// - `early_stop_queries`: well-formed calls spent on candidates that were
///   abandoned or duplicated an existing rule;
/// - `resample_queries`: calls whose response was malformed or degenerate
///   and therefore sampled again;
/// - `failed_queries`: calls that ended in a fatal oracle error.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CostLedger {
    pub conclusion: String,
    pub init_queries: u64,
    pub entailment_queries: u64,
    pub extension_queries: u64,
    pub early_stop_queries: u64,
    pub resample_queries: u64,
    pub failed_queries: u64,
    pub total: u64,
    /// `init_queries + n_ent * Σ|M|` over accepted rules.
    pub predicted_query_count: u64,
    /// The same formula over every candidate that was scored.
    pub candidate_formula_count: u64,
    pub rule_premise_counts: Vec<u32>,
    pub candidate_premise_counts: Vec<u32>,
    pub rounds: Vec<RoundStats>,
    pub duplicates_skipped: u32,
    pub orphan_symbols: u32,
    pub abandoned_drop: u32,
    pub abandoned_cap: u32,
    pub abandoned_invalid: u32,
    pub partial: bool,
}

impl CostLedger {
    pub fn new(conclusion: impl Into<String>) -> Self {
        Self { conclusion: conclusion.into(), ..Self::default() }
    }

    pub fn sum_of_parts(&self) -> u64 {
        self.init_queries
            + self.entailment_queries
            + self.extension_queries
            + self.early_stop_queries
            + self.resample_queries
            + self.failed_queries
    }

    /// Recomputes `total` and the formula fields from the counts.
    pub fn finalize(&mut self, n_ent: u32) {
        self.total = self.sum_of_parts();
        let n = u64::from(n_ent);
        let sum = |counts: &[u32]| counts.iter().map(|&c| u64::from(c)).sum::<u64>();
        self.predicted_query_count = self.init_queries + n * sum(&self.rule_premise_counts);
        self.candidate_formula_count = self.init_queries + n * sum(&self.candidate_premise_counts);
    }

    /// Queries the formula does not predict.
    pub fn unpredicted(&self) -> u64 {
        self.total - self.predicted_query_count
    }

    pub fn round_count(&self) -> u32 {
        self.rounds.len() as u32
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("ledger serializes");
        out.push('\n');
        out
    }
}
