use serde::{Deserialize, Serialize};

use super::{GroundingError, ProbabilitySource, SymbolProbability};
use crate::graph::SymbolId;

pub const DEFAULT_STD_THRESHOLD: f64 = 0.05;
pub const DEFAULT_VARIANT_COUNT: usize = 5;

/// Paraphrase variants of one symbol and their probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSet {
    pub base: SymbolId,
    pub statements: Vec<String>,
    pub probabilities: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation (divides by k).
    pub std: f64,
}

/// Mean and population standard deviation.
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k;
    (mean, variance.sqrt())
}

impl VariantSet {
    pub fn new(base: SymbolId, statements: Vec<String>, probabilities: Vec<f64>) -> Result<Self, GroundingError> {
        if probabilities.len() < 2 {
            return Err(GroundingError::TooFewVariants(probabilities.len()));
        }
        if !statements.is_empty() && statements.len() != probabilities.len() {
            return Err(GroundingError::TooFewVariants(statements.len()));
        }
        let (mean, std) = mean_and_std(&probabilities);
        Ok(Self { base, statements, probabilities, mean, std })
    }

    pub fn k(&self) -> usize {
        self.probabilities.len()
    }
}

/// Variant mean, flagged uncertain when the spread reaches the threshold.
pub fn check_symbol(variants: &VariantSet, std_threshold: f64) -> SymbolProbability {
    SymbolProbability {
        symbol_id: variants.base,
        value: variants.mean,
        source: ProbabilitySource::VariantMean,
        uncertain: variants.std >= std_threshold,
        variant_std: Some(variants.std),
    }
}
