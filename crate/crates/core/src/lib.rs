//! Symbolic activity reasoning over B-graph rule systems.
//!
//! A rule system is built per activity by querying a language oracle
//! ([`instantiate`]), symbols are grounded to probabilities on images
//! ([`grounding`]), and activities are scored with min/max fuzzy logic
//! ([`inference`]). [`eval`] holds metrics and system-quality analyses.

pub mod eval;
pub mod graph;
pub mod grounding;
pub mod inference;
pub mod instantiate;
pub mod oracle;
pub mod text;
