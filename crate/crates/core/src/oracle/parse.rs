//! Response parsing. Every parser either returns a payload or a malformed
//! error carrying the raw text; none of them falls back to a default.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{OracleError, PromptKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EntailmentChoice {
    A,
    B,
    C,
    D,
    E,
    Unknown,
}

impl EntailmentChoice {
    pub fn from_letter(letter: char) -> Option<Self> {
        match letter.to_ascii_lowercase() {
            'a' => Some(Self::A),
            'b' => Some(Self::B),
            'c' => Some(Self::C),
            'd' => Some(Self::D),
            'e' => Some(Self::E),
            'f' => Some(Self::Unknown),
            _ => None,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Self::A => 'a',
            Self::B => 'b',
            Self::C => 'c',
            Self::D => 'd',
            Self::E => 'e',
            Self::Unknown => 'f',
        }
    }

    /// Score in thousandths, `None` for unknown.
    pub fn thousandths(self) -> Option<u32> {
        match self {
            Self::A => Some(100),
            Self::B => Some(500),
            Self::C => Some(700),
            Self::D => Some(900),
            Self::E => Some(950),
            Self::Unknown => None,
        }
    }

    pub fn score(self) -> Option<f64> {
        self.thousandths().map(|t| f64::from(t) / 1000.0)
    }
}

/// Raw yes/no evidence for a statement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YesNoAnswer {
    pub yes: f64,
    pub no: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Parsed {
    Phrases(Vec<String>),
    Condition(String),
    Choice(EntailmentChoice),
    Summary(String),
    YesNo(YesNoAnswer),
}

fn regex(cell: &'static OnceLock<Regex>, pattern: &str) -> &'static Regex {
    cell.get_or_init(|| Regex::new(pattern).expect("static pattern"))
}

fn trim_phrase(text: &str) -> &str {
    text.trim()
        .trim_matches(|c: char| c.is_whitespace() || matches!(c, '.' | ',' | ';' | '"' | '\'' | '[' | ']' | '“' | '”'))
}

/// Items of a numbered list (`1. x 2. y` on one line or several), or of a
/// line-separated list when no numbering is present.
pub fn parse_numbered_list(raw: &str) -> Vec<String> {
    static MARKER: OnceLock<Regex> = OnceLock::new();
    let marker = regex(&MARKER, r"(?m)(?:^|\s)\d{1,2}[.)]\s+");
    let positions: Vec<(usize, usize)> = marker.find_iter(raw).map(|m| (m.start(), m.end())).collect();
    let items: Vec<&str> = if positions.is_empty() {
        raw.lines().collect()
    } else {
        positions
            .iter()
            .enumerate()
            .map(|(i, &(_, end))| {
                let stop = positions.get(i + 1).map_or(raw.len(), |next| next.0);
                &raw[end..stop]
            })
            .collect()
    };
    items
        .into_iter()
        .map(|item| trim_phrase(item.trim_start_matches(['-', '*', '•'])).to_string())
        .filter(|item| !item.is_empty())
        .collect()
}

fn strip_hands_scaffold(item: &str) -> String {
    static HANDS: OnceLock<Regex> = OnceLock::new();
    let hands = regex(&HANDS, r"(?i)^(?:(?:the person's|his|her|their)\s+)?hands?\s*(?:(?:are|is)\s+|:\s*)?");
    let stripped = hands.replace(item, "");
    if stripped.trim().is_empty() {
        item.to_string()
    } else {
        trim_phrase(&stripped).to_string()
    }
}

/// Exactly `count` hand-state phrases with the enumeration and `Hands`
/// subject removed: `1. Hands holding a boarding pass.` → `holding a boarding pass`.
pub fn parse_symbol_init(raw: &str, count: usize) -> Result<Vec<String>, OracleError> {
    let items = parse_numbered_list(raw);
    if items.len() != count {
        return Err(OracleError::malformed(
            PromptKind::SymbolInit,
            raw,
            format!("expected {count} phrases, found {}", items.len()),
        ));
    }
    Ok(items.iter().map(|i| strip_hands_scaffold(i)).collect())
}

fn parse_marked(raw: &str, kind: PromptKind, marker: &Regex) -> Result<String, OracleError> {
    let phrase = if let Some(caps) = marker.captures(raw) {
        let rest = caps.get(1).map_or("", |m| m.as_str());
        let line = rest.lines().next().unwrap_or("");
        match (line.find('['), line.find(']')) {
            (Some(open), Some(close)) if open < close => line[open + 1..close].to_string(),
            _ => trim_phrase(line).to_string(),
        }
    } else {
        let text = raw.trim();
        let bracketed = match (text.find('['), text.rfind(']')) {
            (Some(open), Some(close)) if open < close => Some(&text[open + 1..close]),
            _ => None,
        };
        let candidate = bracketed.unwrap_or(text);
        if candidate.lines().count() > 1 || candidate.split_whitespace().count() > 20 {
            return Err(OracleError::malformed(kind, raw, "no answer marker"));
        }
        candidate.to_string()
    };
    let phrase = trim_phrase(&phrase).to_string();
    if !phrase.chars().any(char::is_alphanumeric) || phrase.eq_ignore_ascii_case("xxx") {
        return Err(OracleError::malformed(kind, raw, "empty answer"));
    }
    Ok(phrase)
}

/// The condition phrase of `[condition] is: [xxx]`, tolerant of missing
/// brackets. A lone bracketed or single-line answer is accepted as is.
pub fn parse_condition(raw: &str) -> Result<String, OracleError> {
    static MARKER: OnceLock<Regex> = OnceLock::new();
    let marker = regex(&MARKER, r"(?i)\[?\s*condition\s*\]?\s*is\s*:?\s*(.*)");
    parse_marked(raw, PromptKind::RuleExtension, marker)
}

pub fn parse_summary(raw: &str) -> Result<String, OracleError> {
    static MARKER: OnceLock<Regex> = OnceLock::new();
    let marker = regex(&MARKER, r"(?i)\[?\s*summary\s*\]?\s*is\s*:?\s*(.*)");
    parse_marked(raw, PromptKind::HierarchySummarize, marker)
}

/// The first `(x)` choice, else the first standalone letter. Letters outside
/// a–f are malformed.
pub fn parse_entailment(raw: &str) -> Result<EntailmentChoice, OracleError> {
    static PAREN: OnceLock<Regex> = OnceLock::new();
    static LONE: OnceLock<Regex> = OnceLock::new();
    let paren = regex(&PAREN, r"\(([A-Za-z])\)");
    let lone = regex(&LONE, r"(?:^|[^A-Za-z0-9'’])([A-Za-z])(?:[^A-Za-z0-9'’]|$)");
    let letter = paren
        .captures(raw)
        .or_else(|| lone.captures(raw))
        .and_then(|c| c.get(1))
        .and_then(|m| m.as_str().chars().next());
    let Some(letter) = letter else {
        return Err(OracleError::malformed(PromptKind::EntailmentCheck, raw, "no choice letter"));
    };
    EntailmentChoice::from_letter(letter).ok_or_else(|| {
        OracleError::malformed(PromptKind::EntailmentCheck, raw, format!("letter {letter:?} is not a choice"))
    })
}

/// `{"yes": x, "no": y}`, `yes: x, no: y`, or a bare Yes/No word, which maps
/// to unit logits.
pub fn parse_yes_no(raw: &str) -> Result<YesNoAnswer, OracleError> {
    if let Ok(answer) = serde_json::from_str::<YesNoAnswer>(raw.trim()) {
        if answer.yes.is_finite() && answer.no.is_finite() {
            return Ok(answer);
        }
    }
    static PAIR: OnceLock<Regex> = OnceLock::new();
    let pair = regex(
        &PAIR,
        r"(?i)yes\s*[:=]\s*(-?[0-9]*\.?[0-9]+(?:e-?[0-9]+)?)\W+no\s*[:=]\s*(-?[0-9]*\.?[0-9]+(?:e-?[0-9]+)?)",
    );
    if let Some(caps) = pair.captures(raw) {
        let yes: f64 = caps[1].parse().unwrap_or(f64::NAN);
        let no: f64 = caps[2].parse().unwrap_or(f64::NAN);
        if yes.is_finite() && no.is_finite() {
            return Ok(YesNoAnswer { yes, no });
        }
    }
    let word = trim_phrase(raw).to_ascii_lowercase();
    match word.as_str() {
        "yes" => Ok(YesNoAnswer { yes: 1.0, no: 0.0 }),
        "no" => Ok(YesNoAnswer { yes: 0.0, no: 1.0 }),
        _ => Err(OracleError::malformed(PromptKind::YesNoStatement, raw, "not a yes/no answer")),
    }
}

/// Kind-directed parsing with the default phrase count for symbol
/// initialization. Paraphrase lists may have any non-zero length.
pub fn parse_response(kind: PromptKind, raw: &str) -> Result<Parsed, OracleError> {
    if raw.trim().is_empty() {
        return Err(OracleError::malformed(kind, raw, "empty response"));
    }
    match kind {
        PromptKind::SymbolInit => parse_symbol_init(raw, 5).map(Parsed::Phrases),
        PromptKind::RuleExtension => parse_condition(raw).map(Parsed::Condition),
        PromptKind::EntailmentCheck => parse_entailment(raw).map(Parsed::Choice),
        PromptKind::Paraphrase => {
            let items = parse_numbered_list(raw);
            if items.is_empty() {
                Err(OracleError::malformed(kind, raw, "no variants"))
            } else {
                Ok(Parsed::Phrases(items))
            }
        }
        PromptKind::HierarchySummarize => parse_summary(raw).map(Parsed::Summary),
        PromptKind::YesNoStatement => parse_yes_no(raw).map(Parsed::YesNo),
    }
}
