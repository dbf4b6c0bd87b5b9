//! Symbol text handling: canonical form, and the small morphology table used
//! to turn symbol phrases into declarative sentences and back.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TextError {
    #[error("symbol text {0:?} is empty after normalization")]
    Empty(String),
}

const ARTICLES: [&str; 3] = ["a ", "an ", "the "];

fn is_edge_punct(c: char) -> bool {
    matches!(c, '.' | ',' | '!' | '?' | ';' | ':' | '"' | '\'' | '[' | ']' | '(' | ')' | '“' | '”' | '‘' | '’')
}

/// Canonical form of a symbol phrase: lowercase, single spaces, no leading
/// article, no surrounding punctuation. Idempotent.
pub fn canonicalize_symbol_text(raw: &str) -> Result<String, TextError> {
    let mut text = raw.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
    loop {
        let before = text.len();
        text = text.trim_matches(|c: char| is_edge_punct(c) || c.is_whitespace()).to_string();
        for article in ARTICLES {
            if let Some(rest) = text.strip_prefix(article) {
                text = rest.trim_start().to_string();
                break;
            }
        }
        if text.len() == before {
            break;
        }
    }
    if text.is_empty() {
        Err(TextError::Empty(raw.to_string()))
    } else {
        Ok(text)
    }
}

// Base forms of the verbs that show up in activity symbols.
const VERBS: &[&str] = &[
    "adjust", "approach", "arrange", "ask", "attach", "bake", "bend", "bite", "blow", "board", "break", "bring",
    "brush", "buy", "carry", "catch", "check", "chew", "chop", "clean", "climb", "close", "collect", "compare",
    "control", "cook", "count", "cover", "cross", "cut", "dig", "dip", "drag", "drink", "drive", "drop", "dry", "eat",
    "enter", "examine", "exit", "extend", "face", "feed", "feel", "fill", "fix", "flip", "fly", "fold", "gaze", "get",
    "give", "glance", "go", "grab", "grasp", "greet", "grip", "guide", "hand", "handle", "hang", "hit", "hold", "hug",
    "inspect", "jump", "kick", "kneel", "lay", "lead", "lean", "lift", "look", "load", "lower", "make", "move", "nod",
    "observe", "offer", "open", "operate", "pack", "paddle", "paint", "park", "pass", "pat", "pay", "peel", "pet",
    "pick", "place", "play", "point", "pour", "press", "pull", "push", "put", "race", "raise", "reach", "read",
    "receive", "release", "repair", "rest", "ride", "rinse", "roll", "rotate", "rub", "run", "scan", "scrub", "select",
    "sell", "serve", "set", "shake", "show", "sign", "sit", "slice", "smell", "smile", "spin", "splash", "spray",
    "squat", "squeeze", "stand", "steer", "step", "stir", "stop", "stretch", "swing", "take", "talk", "tap", "taste",
    "throw", "tie", "tighten", "touch", "turn", "twist", "unbuckle", "unload", "use", "walk", "wash", "watch", "wave",
    "wear", "weigh", "wipe", "wrap", "write",
];

// Monosyllabic verbs whose final consonant doubles before -ing.
const DOUBLING: &[&str] = &[
    "chop", "cut", "dig", "dip", "drag", "drop", "flip", "get", "grab", "grip", "hit", "hug", "nod", "pat", "pet",
    "put", "rub", "run", "scan", "scrub", "set", "sit", "spin", "step", "stir", "stop", "swim", "tap", "wrap",
];

const BODY_PARTS: &[(&str, bool)] = &[
    ("hand", false),
    ("hands", true),
    ("arm", false),
    ("arms", true),
    ("hip", false),
    ("hips", true),
    ("leg", false),
    ("legs", true),
    ("foot", false),
    ("feet", true),
    ("head", false),
    ("eyes", true),
    ("shoulder", false),
    ("shoulders", true),
    ("knee", false),
    ("knees", true),
    ("mouth", false),
    ("fingers", true),
    ("back", false),
];

const ADJECTIVES: &[&str] = &[
    "visible", "open", "closed", "present", "nearby", "empty", "full", "ready", "attached", "seated", "raised",
    "lowered", "bent", "crossed",
];

// Words that end a noun phrase when scanning for an implicit verb.
const STOPWORDS: &[&str] = &[
    "a", "an", "the", "in", "on", "at", "with", "of", "to", "from", "for", "by", "over", "under", "into", "onto",
    "near", "beside", "behind", "and", "or", "his", "her", "their",
];

fn verb_set() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| VERBS.iter().copied().collect())
}

fn gerund_index() -> &'static HashMap<String, &'static str> {
    static MAP: OnceLock<HashMap<String, &'static str>> = OnceLock::new();
    MAP.get_or_init(|| VERBS.iter().map(|v| (gerund(v), *v)).collect())
}

pub fn is_base_verb(word: &str) -> bool {
    verb_set().contains(word)
}

/// Present participle of a base-form verb.
pub fn gerund(verb: &str) -> String {
    match verb {
        "be" => return "being".into(),
        "see" => return "seeing".into(),
        _ => {}
    }
    if let Some(stem) = verb.strip_suffix("ie") {
        return format!("{stem}ying");
    }
    if verb.ends_with("ee") || verb.ends_with("ye") || verb.ends_with("oe") {
        return format!("{verb}ing");
    }
    if verb.len() > 2 && verb.ends_with('e') {
        return format!("{}ing", &verb[..verb.len() - 1]);
    }
    if DOUBLING.contains(&verb) {
        let last = verb.chars().last().unwrap_or_default();
        return format!("{verb}{last}ing");
    }
    format!("{verb}ing")
}

/// Base form of a participle, if it belongs to a known verb.
pub fn base_of_gerund(word: &str) -> Option<&'static str> {
    gerund_index().get(word).copied()
}

fn body_part(word: &str) -> Option<bool> {
    BODY_PARTS.iter().find(|(part, _)| *part == word).map(|(_, plural)| *plural)
}

fn capitalize(text: &str) -> String {
    let mut chars = text.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn with_verb_as_gerund(words: &[&str]) -> String {
    match words.split_first() {
        Some((first, rest)) if is_base_verb(first) => {
            let mut out = vec![gerund(first)];
            out.extend(rest.iter().map(|w| w.to_string()));
            out.join(" ")
        }
        _ => words.join(" "),
    }
}

fn has_copula(words: &[&str]) -> bool {
    words.iter().any(|w| matches!(*w, "is" | "are" | "was" | "were"))
}

fn indefinite_article(word: &str) -> &'static str {
    match word.chars().next() {
        Some('a' | 'e' | 'i' | 'o' | 'u') => "an",
        _ => "a",
    }
}

/// Declarative sentence for a symbol phrase, e.g. `hold a boarding pass` →
/// `The person is holding a boarding pass.`
pub fn declarative_sentence(phrase: &str) -> String {
    let text = phrase.trim().trim_end_matches('.');
    let lower = text.to_lowercase();
    let words: Vec<&str> = lower.split_whitespace().collect();
    let Some(first) = words.first().copied() else {
        return String::new();
    };

    const SENTENCE_STARTS: [&str; 6] = ["the person", "he ", "she ", "there is", "there are", "his "];
    if SENTENCE_STARTS.iter().any(|s| lower.starts_with(s)) {
        return format!("{}.", capitalize(&lower));
    }

    if let Some(plural) = body_part(first) {
        let copula = if plural { "are" } else { "is" };
        return format!("The person's {first} {copula} {}.", with_verb_as_gerund(&words[1..]));
    }

    if is_base_verb(first) {
        return format!("The person is {}.", with_verb_as_gerund(&words));
    }

    if has_copula(&words) {
        return format!("The {lower}.");
    }

    for (i, word) in words.iter().enumerate().skip(1) {
        if STOPWORDS.contains(word) {
            break;
        }
        let implicit = if is_base_verb(word) {
            Some(gerund(word))
        } else if word.ends_with("ing") || word.ends_with("ed") || ADJECTIVES.contains(word) {
            Some(word.to_string())
        } else {
            None
        };
        if let Some(verb) = implicit {
            let subject = words[..i].join(" ");
            let rest = words[i + 1..].join(" ");
            let sentence = format!("The {subject} is {verb} {rest}");
            return format!("{}.", sentence.trim_end());
        }
    }

    format!("There is {} {lower}.", indefinite_article(first))
}

/// Statement plus yes/no question for grounding a symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub declarative: String,
    pub question: String,
}

pub fn statement_of(phrase: &str) -> Statement {
    let declarative = declarative_sentence(phrase);
    let question = format!("{declarative} Yes/No?");
    Statement { declarative, question }
}

const PERSON_SUBJECTS: &[&str] = &[
    "the person's hands are ",
    "the person's hand is ",
    "the person is ",
    "his hands are ",
    "her hands are ",
    "hands are ",
    "he is ",
    "she is ",
    "the person ",
    "hands ",
    "hand ",
];

/// Symbol phrase from an oracle answer: drops the person/hands subject and
/// turns a leading participle back into its base form.
/// `The person is walking towards the boarding gate` → `walk towards the boarding gate`.
pub fn phrase_from_answer(answer: &str) -> String {
    let text = answer
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .trim_matches(|c: char| is_edge_punct(c) || c.is_whitespace())
        .to_string();
    let lower = text.to_lowercase();

    let mut subject_removed = false;
    let mut body = lower.as_str();
    for subject in PERSON_SUBJECTS {
        if let Some(rest) = body.strip_prefix(subject) {
            body = rest;
            subject_removed = true;
            break;
        }
    }
    if !subject_removed {
        if let Some(rest) = body.strip_prefix("the person's ") {
            // keep a non-hand body part, drop the copula after it
            let words: Vec<&str> = rest.split_whitespace().collect();
            if words.len() > 2 && body_part(words[0]).is_some() && matches!(words[1], "is" | "are") {
                let mut out = vec![words[0]];
                out.extend(&words[2..]);
                return out.join(" ");
            }
            body = rest;
        }
    }

    let words: Vec<&str> = body.split_whitespace().collect();
    let convert = subject_removed || !has_copula(&words);
    match words.split_first() {
        Some((first, rest)) if convert => match base_of_gerund(first) {
            Some(base) => {
                let mut out = vec![base];
                out.extend(rest);
                out.join(" ")
            }
            None => words.join(" "),
        },
        _ => words.join(" "),
    }
}

/// `board an airplane` → `boarding an airplane`.
pub fn activity_gerund(conclusion: &str) -> String {
    let words: Vec<&str> = conclusion.split_whitespace().collect();
    with_verb_as_gerund(&words)
}

/// Activity phrase for prompts that have already introduced the object:
/// `boarding an airplane` with object `airplane` → `boarding the airplane`.
pub fn definite_activity(activity: &str, object: Option<&str>) -> String {
    let Some(object) = object else {
        return activity.to_string();
    };
    let object = object.trim().to_lowercase();
    for article in ["an", "a"] {
        let needle = format!(" {article} {object}");
        if let Some(pos) = activity.find(&needle) {
            return format!("{} the {object}{}", &activity[..pos], &activity[pos + needle.len()..]);
        }
    }
    activity.to_string()
}

/// `there is an airplane. `
pub fn object_context(object: Option<&str>) -> String {
    match object {
        Some(object) => {
            let object = object.trim();
            format!("there is {} {object}. ", indefinite_article(&object.to_lowercase()))
        }
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_forms() {
        assert_eq!(canonicalize_symbol_text("Hold a boarding pass.").unwrap(), "hold a boarding pass");
        assert_eq!(canonicalize_symbol_text("hold a boarding pass").unwrap(), "hold a boarding pass");
        assert_eq!(canonicalize_symbol_text("  HOLD   a Boarding Pass ").unwrap(), "hold a boarding pass");
        assert_eq!(canonicalize_symbol_text("The the cat").unwrap(), "cat");
        assert!(canonicalize_symbol_text(" ... ").is_err());
        assert!(canonicalize_symbol_text("").is_err());
    }

    #[test]
    fn gerunds() {
        assert_eq!(gerund("hold"), "holding");
        assert_eq!(gerund("place"), "placing");
        assert_eq!(gerund("grip"), "gripping");
        assert_eq!(gerund("tie"), "tying");
        assert_eq!(gerund("open"), "opening");
        assert_eq!(base_of_gerund("waving"), Some("wave"));
        assert_eq!(base_of_gerund("boarding"), Some("board"));
        assert_eq!(base_of_gerund("thing"), None);
    }

    #[test]
    fn sentences() {
        assert_eq!(declarative_sentence("hold a boarding pass"), "The person is holding a boarding pass.");
        assert_eq!(declarative_sentence("hip seated in a boat"), "The person's hip is seated in a boat.");
        assert_eq!(declarative_sentence("luggage visible beside him"), "The luggage is visible beside him.");
        assert_eq!(
            declarative_sentence("boarding pass is scanned by airport staff"),
            "The boarding pass is scanned by airport staff."
        );
        assert_eq!(
            declarative_sentence("airline staff checking the boarding pass"),
            "The airline staff is checking the boarding pass."
        );
        assert_eq!(declarative_sentence("seller hand over orange"), "The seller is handing over orange.");
        assert_eq!(declarative_sentence("hands hold the rope"), "The person's hands are holding the rope.");
        assert_eq!(declarative_sentence("orange in hand"), "There is an orange in hand.");
    }

    #[test]
    fn statement_question() {
        assert_eq!(statement_of("hip seated in a boat").question, "The person's hip is seated in a boat. Yes/No?");
        assert_eq!(statement_of("hold a boarding pass").question, "The person is holding a boarding pass. Yes/No?");
    }

    #[test]
    fn answers_to_phrases() {
        assert_eq!(
            phrase_from_answer("The person is walking towards the boarding gate"),
            "walk towards the boarding gate"
        );
        assert_eq!(phrase_from_answer("Hands holding a boarding pass."), "hold a boarding pass");
        assert_eq!(
            phrase_from_answer("The person's hands are reaching for the airplane door handle"),
            "reach for the airplane door handle"
        );
        assert_eq!(phrase_from_answer("The person's hip is seated in a boat"), "hip seated in a boat");
        assert_eq!(
            phrase_from_answer("The boarding pass is scanned by airport staff"),
            "the boarding pass is scanned by airport staff"
        );
        assert_eq!(phrase_from_answer("Holding a bag"), "hold a bag");
    }

    #[test]
    fn activity_forms() {
        assert_eq!(activity_gerund("board an airplane"), "boarding an airplane");
        assert_eq!(definite_activity("boarding an airplane", Some("airplane")), "boarding the airplane");
        assert_eq!(definite_activity("boarding an airplane", None), "boarding an airplane");
        assert_eq!(object_context(Some("airplane")), "there is an airplane. ");
        assert_eq!(object_context(Some("boat")), "there is a boat. ");
    }
}
