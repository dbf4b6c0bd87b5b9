use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::GroundingError;
use crate::text::canonicalize_symbol_text;

/// Per-image symbol values handed to inference. `None` marks a symbol whose
/// rules are excluded.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroundingFile {
    pub images: BTreeMap<String, BTreeMap<String, Option<f64>>>,
}

impl GroundingFile {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn image(&self, image: &str) -> Option<&BTreeMap<String, Option<f64>>> {
        self.images.get(image)
    }

    /// Parses and canonicalizes symbol keys; values must lie in [0, 1].
    pub fn from_json(json: &str) -> Result<Self, GroundingError> {
        let raw: BTreeMap<String, BTreeMap<String, Option<f64>>> =
            serde_json::from_str(json).map_err(|e| GroundingError::InvalidFile(e.to_string()))?;
        let mut file = Self::new();
        for (image, row) in raw {
            let out = file.images.entry(image.clone()).or_default();
            for (text, value) in row {
                if let Some(v) = value {
                    if !(0.0..=1.0).contains(&v) {
                        return Err(GroundingError::InvalidFile(format!("{image}/{text}: {v} outside [0, 1]")));
                    }
                }
                let key = canonicalize_symbol_text(&text)?;
                if out.insert(key.clone(), value).is_some() {
                    return Err(GroundingError::InvalidFile(format!("{image}/{key}: listed twice")));
                }
            }
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self, GroundingError> {
        let json = std::fs::read_to_string(path)
            .map_err(|e| GroundingError::InvalidFile(format!("{}: {e}", path.display())))?;
        Self::from_json(&json)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("grounding serializes") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn null_marks_dropped_symbols() {
        let file = GroundingFile::from_json(r#"{"img": {"Hold a cup.": 0.25, "sit": null}}"#).unwrap();
        let row = file.image("img").unwrap();
        assert_eq!(row["hold a cup"], Some(0.25));
        assert_eq!(row["sit"], None);
        assert!(GroundingFile::from_json(r#"{"img": {"a": 1.5}}"#).is_err());
        assert!(GroundingFile::from_json(r#"{"img": {"a": 0.1, "A": 0.2}}"#).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(values in prop::collection::btree_map("[a-z]{1,8}", prop::option::of(0.0f64..=1.0), 0..6)) {
            let mut file = GroundingFile::new();
            file.images.insert("img-1".into(), values);
            let json = file.to_json();
            let back = GroundingFile::from_json(&json).unwrap();
            prop_assert_eq!(&back, &file);
            prop_assert_eq!(back.to_json(), json);
        }
    }
}
