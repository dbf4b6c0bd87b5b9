//! Prompt rendering. Templates live in versioned resource files; rendering is
//! plain placeholder substitution and therefore a pure function.

use crate::text::{declarative_sentence, definite_activity, object_context};

pub const TEMPLATE_VERSION: &str = "v1";

const SYMBOL_INIT: &str = include_str!("../../templates/v1/symbol_init.txt");
const RULE_EXTENSION: &str = include_str!("../../templates/v1/rule_extension.txt");
const ENTAILMENT: &str = include_str!("../../templates/v1/entailment.txt");
const PARAPHRASE: &str = include_str!("../../templates/v1/paraphrase.txt");
const YES_NO: &str = include_str!("../../templates/v1/yes_no.txt");
const HIERARCHY_SUMMARIZE: &str = include_str!("../../templates/v1/hierarchy_summarize.txt");

fn fill(template: &str, slots: &[(&str, &str)]) -> String {
    let mut out = template.trim_end_matches(['\n', '\r']).to_string();
    for (name, value) in slots {
        out = out.replace(&format!("{{{name}}}"), value);
    }
    out
}

fn numbered_format(count: usize) -> String {
    (1..=count).map(|i| format!("{i}. xxx")).collect::<Vec<_>>().join(" ")
}

fn sentences(premises: &[impl AsRef<str>]) -> String {
    premises.iter().map(|p| declarative_sentence(p.as_ref())).collect::<Vec<_>>().join(" ")
}

fn lowercase_first(text: &str) -> String {
    let mut chars = text.chars();
    match chars.next() {
        Some(first) => first.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Symbol initialization asking for five hand-state phrases. `activity` is
/// the progressive form, e.g. `boarding an airplane`. The object hint does
/// not alter this template.
pub fn render_symbol_init(activity: &str, object_hint: Option<&str>) -> String {
    render_symbol_init_n(activity, object_hint, 5)
}

pub fn render_symbol_init_n(activity: &str, _object_hint: Option<&str>, count: usize) -> String {
    fill(
        SYMBOL_INIT,
        &[("activity", activity.trim()), ("count", &count.to_string()), ("format", &numbered_format(count))],
    )
}

/// Rule extension over the known premises, in trace order.
pub fn render_rule_extension(known_premises: &[impl AsRef<str>], activity: &str, object_hint: Option<&str>) -> String {
    let conclusion = format!("The person is {}.", definite_activity(activity.trim(), object_hint));
    fill(
        RULE_EXTENSION,
        &[
            ("context", &object_context(object_hint)),
            ("premises", &sentences(known_premises)),
            ("conclusion", &conclusion),
        ],
    )
}

/// Entailment check for a candidate rule written out as sentences.
pub fn render_entailment(premises: &[impl AsRef<str>], activity: &str, object_hint: Option<&str>) -> String {
    let context = object_context(object_hint);
    let mut body = sentences(premises);
    if context.is_empty() {
        body = lowercase_first(&body);
    }
    fill(
        ENTAILMENT,
        &[("context", &context), ("premises", &body), ("activity", &definite_activity(activity.trim(), object_hint))],
    )
}

pub fn render_paraphrase(statement: &str, count: usize) -> String {
    fill(
        PARAPHRASE,
        &[("count", &count.to_string()), ("statement", statement.trim()), ("format", &numbered_format(count))],
    )
}

pub fn render_yes_no(statement: &str) -> String {
    fill(YES_NO, &[("statement", statement.trim())])
}

pub fn render_hierarchy_summarize(sons: &[impl AsRef<str>]) -> String {
    let phrases = sons.iter().map(|s| format!("\"{}\"", s.as_ref().trim())).collect::<Vec<_>>().join(", ");
    fill(HIERARCHY_SUMMARIZE, &[("phrases", &phrases)])
}
