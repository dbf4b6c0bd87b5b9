use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{clamp_open, normalize_yes_no, GroundingError, ScorePair};
use crate::oracle::{
    parse_numbered_list, parse_yes_no, render_paraphrase, render_yes_no, DecodeParams, Oracle, OracleError,
    OracleSession, PromptKind,
};
use crate::text::{canonicalize_symbol_text, statement_of};

/// Source of symbol probabilities for images. One call to either method is
/// one backend operation.
pub trait ScoringBackend: Send + Sync {
    /// Probability that the symbol holds in the image.
    fn score(&self, image: &str, text: &str) -> Result<f64, GroundingError>;

    /// Paraphrase statements of the symbol and their probabilities.
    fn score_variants(&self, image: &str, text: &str, k: usize) -> Result<(Vec<String>, Vec<f64>), GroundingError>;
}

impl<T: ScoringBackend + ?Sized> ScoringBackend for &T {
    fn score(&self, image: &str, text: &str) -> Result<f64, GroundingError> {
        (**self).score(image, text)
    }

    fn score_variants(&self, image: &str, text: &str, k: usize) -> Result<(Vec<String>, Vec<f64>), GroundingError> {
        (**self).score_variants(image, text, k)
    }
}

/// Raw yes/no scores (normalized by two-way softmax) or a probability used
/// as given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TableValue {
    Pair(ScorePair),
    Direct { p: f64 },
}

impl TableValue {
    pub fn probability(&self) -> f64 {
        match *self {
            TableValue::Pair(pair) => normalize_yes_no(pair),
            TableValue::Direct { p } => clamp_open(p),
        }
    }

    fn check(&self) -> Result<(), String> {
        match *self {
            TableValue::Pair(pair) if !pair.is_finite() => Err("yes/no scores must be finite".into()),
            TableValue::Direct { p } if !(0.0..=1.0).contains(&p) => Err(format!("probability {p} outside [0, 1]")),
            _ => Ok(()),
        }
    }
}

/// One table cell, optionally with paraphrase-variant evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    #[serde(flatten)]
    pub value: TableValue,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub variants: Vec<TableValue>,
}

impl From<TableValue> for TableEntry {
    fn from(value: TableValue) -> Self {
        Self { value, variants: Vec::new() }
    }
}

/// Deterministic backend keyed by image id and canonical symbol text.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProbabilityTable {
    images: BTreeMap<String, BTreeMap<String, TableEntry>>,
}

impl ProbabilityTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a cell; the key is canonicalized.
    pub fn insert(&mut self, image: &str, text: &str, entry: impl Into<TableEntry>) -> Result<(), GroundingError> {
        let entry = entry.into();
        for value in std::iter::once(&entry.value).chain(&entry.variants) {
            value.check().map_err(|e| GroundingError::InvalidTable(format!("{image}/{text}: {e}")))?;
        }
        let key = canonicalize_symbol_text(text)?;
        let row = self.images.entry(image.to_string()).or_default();
        if row.contains_key(&key) {
            return Err(GroundingError::InvalidTable(format!("{image}/{key}: listed twice")));
        }
        row.insert(key, entry);
        Ok(())
    }

    pub fn get(&self, image: &str, text: &str) -> Option<&TableEntry> {
        let row = self.images.get(image)?;
        row.get(text).or_else(|| row.get(&canonicalize_symbol_text(text).ok()?))
    }

    pub fn images(&self) -> impl Iterator<Item = &str> {
        self.images.keys().map(String::as_str)
    }

    pub fn row(&self, image: &str) -> Option<&BTreeMap<String, TableEntry>> {
        self.images.get(image)
    }

    pub fn from_json(json: &str) -> Result<Self, GroundingError> {
        let raw: BTreeMap<String, BTreeMap<String, TableEntry>> =
            serde_json::from_str(json).map_err(|e| GroundingError::InvalidTable(e.to_string()))?;
        let mut table = Self::new();
        for (image, row) in raw {
            table.images.entry(image.clone()).or_default();
            for (text, entry) in row {
                table.insert(&image, &text, entry)?;
            }
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self, GroundingError> {
        let json = std::fs::read_to_string(path)
            .map_err(|e| GroundingError::InvalidTable(format!("{}: {e}", path.display())))?;
        Self::from_json(&json)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes") + "\n"
    }

    fn entry(&self, image: &str, text: &str) -> Result<&TableEntry, GroundingError> {
        self.get(image, text)
            .ok_or_else(|| GroundingError::Missing { image: image.to_string(), symbol: text.to_string() })
    }
}

impl ScoringBackend for ProbabilityTable {
    fn score(&self, image: &str, text: &str) -> Result<f64, GroundingError> {
        Ok(self.entry(image, text)?.value.probability())
    }

    /// Listed variants, or `k` copies of the cell when none are listed.
    fn score_variants(&self, image: &str, text: &str, k: usize) -> Result<(Vec<String>, Vec<f64>), GroundingError> {
        let entry = self.entry(image, text)?;
        let probabilities = if entry.variants.is_empty() {
            vec![entry.value.probability(); k]
        } else {
            entry.variants.iter().map(TableValue::probability).collect()
        };
        Ok((Vec::new(), probabilities))
    }
}

/// Scores statements through an oracle that answers yes/no questions about
/// a tagged image, paraphrasing through the same oracle.
pub struct OracleScorer<'a> {
    oracle: &'a dyn Oracle,
    decode: DecodeParams,
}

impl<'a> OracleScorer<'a> {
    pub fn new(oracle: &'a dyn Oracle, decode: DecodeParams) -> Self {
        Self { oracle, decode }
    }

    fn ask(&self, session: &mut OracleSession<'_>, image: &str, statement: &str) -> Result<f64, GroundingError> {
        let prompt = format!("[image {image}] {}", render_yes_no(statement));
        let answer = session.query(PromptKind::YesNoStatement, &prompt, parse_yes_no).result?;
        Ok(normalize_yes_no(ScorePair::new(answer.yes, answer.no)))
    }
}

impl ScoringBackend for OracleScorer<'_> {
    fn score(&self, image: &str, text: &str) -> Result<f64, GroundingError> {
        let mut session = OracleSession::new(self.oracle, self.decode);
        self.ask(&mut session, image, &statement_of(text).declarative)
    }

    fn score_variants(&self, image: &str, text: &str, k: usize) -> Result<(Vec<String>, Vec<f64>), GroundingError> {
        let mut session = OracleSession::new(self.oracle, self.decode);
        let statement = statement_of(text).declarative;
        let variants = session
            .query(PromptKind::Paraphrase, &render_paraphrase(&statement, k), |raw| {
                let items = parse_numbered_list(raw);
                if items.len() < k {
                    return Err(OracleError::malformed(
                        PromptKind::Paraphrase,
                        raw,
                        format!("expected {k} variants, got {}", items.len()),
                    ));
                }
                Ok(items.into_iter().take(k).collect::<Vec<_>>())
            })
            .result?;
        let probabilities = variants.iter().map(|v| self.ask(&mut session, image, v)).collect::<Result<Vec<_>, _>>()?;
        Ok((variants, probabilities))
    }
}
