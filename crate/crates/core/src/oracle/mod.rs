//! Language-oracle gateway: prompt rendering, response parsing, and the
//! scripted, replay, and HTTP backends.

mod gateway;
#[cfg(feature = "http")]
mod http;
mod parse;
mod record;
mod render;
mod session;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use gateway::Gateway;
#[cfg(feature = "http")]
pub use http::{HttpConfig, HttpOracle};
pub use parse::{
    parse_condition, parse_entailment, parse_numbered_list, parse_response, parse_summary, parse_symbol_init,
    parse_yes_no, EntailmentChoice, Parsed, YesNoAnswer,
};
pub use record::{OracleRecord, RecordKey, ReplayCache, ReplayOracle, ScriptedTable};
pub use render::{
    render_entailment, render_hierarchy_summarize, render_paraphrase, render_rule_extension, render_symbol_init,
    render_symbol_init_n, render_yes_no, TEMPLATE_VERSION,
};
pub use session::{Attempted, OracleSession};

pub const ROLE_PREAMBLE: &str = "You are helping me understand human activities in a picture.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptKind {
    SymbolInit,
    RuleExtension,
    EntailmentCheck,
    Paraphrase,
    YesNoStatement,
    HierarchySummarize,
}

impl PromptKind {
    pub const ALL: [PromptKind; 6] = [
        PromptKind::SymbolInit,
        PromptKind::RuleExtension,
        PromptKind::EntailmentCheck,
        PromptKind::Paraphrase,
        PromptKind::YesNoStatement,
        PromptKind::HierarchySummarize,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PromptKind::SymbolInit => "symbol_init",
            PromptKind::RuleExtension => "rule_extension",
            PromptKind::EntailmentCheck => "entailment_check",
            PromptKind::Paraphrase => "paraphrase",
            PromptKind::YesNoStatement => "yes_no_statement",
            PromptKind::HierarchySummarize => "hierarchy_summarize",
        }
    }
}

impl fmt::Display for PromptKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodeParams {
    pub temperature: f64,
    pub max_tokens: u32,
}

impl Default for DecodeParams {
    fn default() -> Self {
        Self { temperature: 1.0, max_tokens: 256 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRequest {
    pub kind: PromptKind,
    pub rendered_prompt: String,
    pub role_preamble: String,
    /// Distinguishes repeated samples of one prompt.
    pub sample_index: u32,
    pub decode: DecodeParams,
}

impl OracleRequest {
    pub fn new(kind: PromptKind, rendered_prompt: impl Into<String>, sample_index: u32) -> Result<Self, OracleError> {
        let rendered_prompt = rendered_prompt.into();
        if rendered_prompt.trim().is_empty() {
            return Err(OracleError::EmptyPrompt);
        }
        Ok(Self {
            kind,
            rendered_prompt,
            role_preamble: ROLE_PREAMBLE.to_string(),
            sample_index,
            decode: DecodeParams::default(),
        })
    }

    pub fn with_decode(mut self, decode: DecodeParams) -> Self {
        self.decode = decode;
        self
    }

    pub fn digest(&self) -> String {
        prompt_digest(&self.rendered_prompt)
    }

    pub fn key(&self) -> RecordKey {
        RecordKey { kind: self.kind, digest: self.digest(), sample: self.sample_index }
    }
}

/// Hex SHA-256 of a rendered prompt.
pub fn prompt_digest(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum OracleError {
    #[error("rendered prompt is empty")]
    EmptyPrompt,
    #[error("malformed {kind} response ({reason}): {raw:?}")]
    Malformed { kind: PromptKind, raw: String, reason: String },
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("replay miss for {kind} {digest} sample {sample}")]
    ReplayMiss { kind: PromptKind, digest: String, sample: u32 },
    #[error("scripted table has no entry for {kind} {digest} sample {sample}")]
    ScriptedMiss { kind: PromptKind, digest: String, sample: u32 },
    #[error("replay cache already holds a different response for {0}")]
    CacheConflict(String),
    #[error("oracle record store: {0}")]
    Store(String),
}

impl OracleError {
    /// Malformed responses are worth resampling; everything else is fatal.
    pub fn is_retryable(&self) -> bool {
        matches!(self, OracleError::Malformed { .. })
    }

    pub(crate) fn malformed(kind: PromptKind, raw: &str, reason: impl Into<String>) -> Self {
        OracleError::Malformed { kind, raw: raw.to_string(), reason: reason.into() }
    }
}

/// A source of raw completions. Implementations must be safe to share across
/// threads.
pub trait Oracle: Send + Sync {
    fn complete(&self, request: &OracleRequest) -> Result<String, OracleError>;
}

impl<T: Oracle + ?Sized> Oracle for &T {
    fn complete(&self, request: &OracleRequest) -> Result<String, OracleError> {
        (**self).complete(request)
    }
}

impl<T: Oracle + ?Sized> Oracle for Box<T> {
    fn complete(&self, request: &OracleRequest) -> Result<String, OracleError> {
        (**self).complete(request)
    }
}

impl<T: Oracle + ?Sized> Oracle for Arc<T> {
    fn complete(&self, request: &OracleRequest) -> Result<String, OracleError> {
        (**self).complete(request)
    }
}

/// Wraps a closure as an oracle; handy for synthetic backends.
pub struct FnOracle<F>(pub F);

impl<F> Oracle for FnOracle<F>
where
    F: Fn(&OracleRequest) -> Result<String, OracleError> + Send + Sync,
{
    fn complete(&self, request: &OracleRequest) -> Result<String, OracleError> {
        (self.0)(request)
    }
}
