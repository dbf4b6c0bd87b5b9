use serde::{Deserialize, Serialize};

use super::InstantiateError;
use crate::oracle::DecodeParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoopConfig {
    /// Entailment threshold; a rule is accepted when its mean score is >= e_h.
    pub e_h: f64,
    /// Entailment samples per candidate length.
    pub n_ent: u32,
    pub init_symbol_count: u32,
    /// Queue admissions per conclusion, initial symbols included.
    pub max_extension_symbols: u32,
    pub max_premises: u32,
    /// Candidates grown per popped symbol.
    pub branch_factor: u32,
    /// Consecutive score drops that abandon a candidate.
    pub drop_patience: u32,
    /// Extra oracle calls allowed after a malformed response.
    pub max_resamples: u32,
    pub decode: DecodeParams,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            e_h: 0.9,
            n_ent: 5,
            init_symbol_count: 5,
            max_extension_symbols: 15,
            max_premises: 6,
            branch_factor: 2,
            drop_patience: 2,
            max_resamples: 3,
            decode: DecodeParams::default(),
        }
    }
}

impl LoopConfig {
    pub fn validate(&self) -> Result<(), InstantiateError> {
        let fail = |msg: &str| Err(InstantiateError::Config(msg.to_string()));
        if !(self.e_h > 0.0 && self.e_h <= 1.0) {
            return fail("e_h must lie in (0, 1]");
        }
        if self.n_ent < 1 {
            return fail("n_ent must be at least 1");
        }
        if self.init_symbol_count < 1 {
            return fail("init_symbol_count must be at least 1");
        }
        if self.max_premises < 2 {
            return fail("max_premises must be at least 2");
        }
        if self.branch_factor < 1 {
            return fail("branch_factor must be at least 1");
        }
        if self.drop_patience < 1 {
            return fail("drop_patience must be at least 1");
        }
        if !self.decode.temperature.is_finite() || self.decode.temperature < 0.0 {
            return fail("temperature must be finite and non-negative");
        }
        Ok(())
    }

    pub fn from_json(json: &str) -> Result<Self, InstantiateError> {
        let config: Self = serde_json::from_str(json).map_err(|e| InstantiateError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }
}
