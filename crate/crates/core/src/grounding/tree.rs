use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::GroundingError;
use crate::oracle::{parse_summary, render_hierarchy_summarize, DecodeParams, Oracle, OracleSession, PromptKind};
use crate::text::canonicalize_symbol_text;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FatherNode {
    pub text: String,
    pub sons: Vec<String>,
}

/// Forest of father symbols over premise symbols. A son may itself be a
/// father; every son has exactly one father. Texts are canonical.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolTree {
    pub theta: f64,
    pub fathers: Vec<FatherNode>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeFile {
    theta: f64,
    fathers: Vec<FatherNode>,
}

impl<'de> Deserialize<'de> for SymbolTree {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let file = TreeFile::deserialize(deserializer)?;
        SymbolTree::new(file.theta, file.fathers).map_err(serde::de::Error::custom)
    }
}

impl SymbolTree {
    pub fn new(theta: f64, fathers: Vec<FatherNode>) -> Result<Self, GroundingError> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(GroundingError::InvalidTree(format!("theta {theta} outside (0, 1)")));
        }
        let mut canonical = Vec::with_capacity(fathers.len());
        let mut index = HashMap::new();
        for father in fathers {
            let text = canonicalize_symbol_text(&father.text)?;
            if father.sons.is_empty() {
                return Err(GroundingError::InvalidTree(format!("father {text:?} has no sons")));
            }
            let sons = father.sons.iter().map(|s| canonicalize_symbol_text(s)).collect::<Result<Vec<_>, _>>()?;
            if index.insert(text.clone(), canonical.len()).is_some() {
                return Err(GroundingError::InvalidTree(format!("father {text:?} listed twice")));
            }
            canonical.push(FatherNode { text, sons });
        }
        let mut parent: HashMap<&str, &str> = HashMap::new();
        for father in &canonical {
            for son in &father.sons {
                if son == &father.text {
                    return Err(GroundingError::InvalidTree(format!("{son:?} is its own son")));
                }
                if let Some(other) = parent.insert(son, &father.text) {
                    return Err(GroundingError::InvalidTree(format!(
                        "{son:?} has two fathers: {other:?} and {:?}",
                        father.text
                    )));
                }
            }
        }
        // With single parents, a cycle is a walk up the parent chain that
        // returns to its start.
        for father in &canonical {
            let mut at = father.text.as_str();
            for _ in 0..=canonical.len() {
                match parent.get(at) {
                    Some(&up) if up == father.text => {
                        return Err(GroundingError::InvalidTree(format!("cycle through {up:?}")));
                    }
                    Some(&up) => at = up,
                    None => break,
                }
            }
        }
        Ok(Self { theta, fathers: canonical, index })
    }

    pub fn from_json(json: &str) -> Result<Self, GroundingError> {
        serde_json::from_str(json).map_err(|e| GroundingError::InvalidTree(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, GroundingError> {
        let json = std::fs::read_to_string(path)
            .map_err(|e| GroundingError::InvalidTree(format!("{}: {e}", path.display())))?;
        Self::from_json(&json)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serializes") + "\n"
    }

    pub fn is_father(&self, text: &str) -> bool {
        self.index.contains_key(text)
    }

    pub fn sons(&self, father: &str) -> &[String] {
        self.index.get(father).map_or(&[], |&i| &self.fathers[i].sons)
    }

    /// Fathers that are nobody's son, in file order.
    pub fn roots(&self) -> Vec<&str> {
        let sons: BTreeSet<&str> = self.fathers.iter().flat_map(|f| f.sons.iter().map(String::as_str)).collect();
        self.fathers.iter().map(|f| f.text.as_str()).filter(|t| !sons.contains(t)).collect()
    }

    /// Sons that are not fathers.
    pub fn leaves(&self) -> BTreeSet<&str> {
        self.fathers.iter().flat_map(|f| f.sons.iter()).map(String::as_str).filter(|s| !self.is_father(s)).collect()
    }

    /// Leaves below `father`, depth first in son order.
    pub fn leaves_under(&self, father: &str) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(father, &mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, node: &str, out: &mut Vec<&'a str>) {
        for son in self.sons(node) {
            if self.is_father(son) {
                self.collect_leaves(son, out);
            } else {
                out.push(son);
            }
        }
    }
}

/// Father text for a group of sons, summarized by an oracle.
pub fn synthesize_father(
    oracle: &dyn Oracle,
    decode: DecodeParams,
    sons: &[impl AsRef<str>],
) -> Result<String, GroundingError> {
    let mut session = OracleSession::new(oracle, decode);
    let summary =
        session.query(PromptKind::HierarchySummarize, &render_hierarchy_summarize(sons), parse_summary).result?;
    Ok(canonicalize_symbol_text(&summary)?)
}
