use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::grounding::{ProbabilityTable, TableEntry};
use crate::text::canonicalize_symbol_text;

/// One annotated image: its activities, the symbols that hold in it, and
/// optionally predicted symbol scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub image_id: String,
    pub gt_activities: BTreeSet<String>,
    pub gt_symbols: BTreeSet<String>,
    #[serde(default)]
    pub score_table: Option<BTreeMap<String, TableEntry>>,
}

impl DatasetRecord {
    pub fn new<A: AsRef<str>, S: AsRef<str>>(
        image_id: &str,
        activities: &[A],
        symbols: &[S],
    ) -> Result<Self, EvalError> {
        Ok(Self {
            image_id: image_id.to_string(),
            gt_activities: canonical_set(activities.iter().map(AsRef::as_ref))?,
            gt_symbols: canonical_set(symbols.iter().map(AsRef::as_ref))?,
            score_table: None,
        })
    }

    fn canonicalize(self) -> Result<Self, EvalError> {
        let score_table = match self.score_table {
            Some(table) => {
                let mut out = BTreeMap::new();
                for (text, entry) in table {
                    let key = canonicalize_symbol_text(&text)?;
                    if out.insert(key.clone(), entry).is_some() {
                        return Err(EvalError::InvalidDataset(format!("{}: {key:?} scored twice", self.image_id)));
                    }
                }
                Some(out)
            }
            None => None,
        };
        Ok(Self {
            gt_activities: canonical_set(self.gt_activities.iter().map(String::as_str))?,
            gt_symbols: canonical_set(self.gt_symbols.iter().map(String::as_str))?,
            score_table,
            image_id: self.image_id,
        })
    }
}

fn canonical_set<'a>(texts: impl Iterator<Item = &'a str>) -> Result<BTreeSet<String>, EvalError> {
    texts.map(|t| Ok(canonicalize_symbol_text(t)?)).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Dataset {
    pub records: Vec<DatasetRecord>,
}

impl Dataset {
    pub fn new(records: Vec<DatasetRecord>) -> Result<Self, EvalError> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(records.len());
        for record in records {
            if !seen.insert(record.image_id.clone()) {
                return Err(EvalError::InvalidDataset(format!("image {:?} listed twice", record.image_id)));
            }
            out.push(record.canonicalize()?);
        }
        Ok(Self { records: out })
    }

    pub fn from_json(json: &str) -> Result<Self, EvalError> {
        let records: Vec<DatasetRecord> =
            serde_json::from_str(json).map_err(|e| EvalError::InvalidDataset(e.to_string()))?;
        Self::new(records)
    }

    pub fn load(path: &Path) -> Result<Self, EvalError> {
        let json =
            std::fs::read_to_string(path).map_err(|e| EvalError::InvalidDataset(format!("{}: {e}", path.display())))?;
        Self::from_json(&json)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dataset serializes") + "\n"
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Every activity labelled on some image.
    pub fn classes(&self) -> BTreeSet<String> {
        self.records.iter().flat_map(|r| r.gt_activities.iter().cloned()).collect()
    }

    pub fn image_ids(&self) -> Vec<String> {
        self.records.iter().map(|r| r.image_id.clone()).collect()
    }

    /// Score tables of all records; images without one are absent.
    pub fn probability_table(&self) -> Result<ProbabilityTable, EvalError> {
        let mut table = ProbabilityTable::new();
        for record in &self.records {
            for (text, entry) in record.score_table.iter().flatten() {
                table.insert(&record.image_id, text, entry.clone())?;
            }
        }
        Ok(table)
    }
}
