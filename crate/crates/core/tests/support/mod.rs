//! Shared helpers for integration tests and the acceptance harness.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::hash::{Hash, Hasher};
use std::path::PathBuf;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symbolact::graph::{decompose, Provenance, SubSystem, SymbolicSystem};
use symbolact::instantiate::LoopConfig;
use symbolact::oracle::{Oracle, OracleError, OracleRequest, PromptKind};
use symbolact::text::declarative_sentence;

pub fn fixture(path: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(path)
}

pub fn read_fixture(path: &str) -> String {
    std::fs::read_to_string(fixture(path)).unwrap_or_else(|e| panic!("{path}: {e}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Malformed,
    /// A rule-extension phrase repeating a premise already in the prompt.
    Echo,
    Good,
}

#[derive(Debug, Clone)]
pub struct CallRecord {
    pub kind: PromptKind,
    pub prompt: String,
    pub outcome: Outcome,
}

const VERBS: [&str; 8] = ["hold", "push", "grip", "touch", "lift", "open", "wipe", "carry"];
const NOUNS: [&str; 6] = ["cup", "rope", "bag", "door", "box", "lamp"];

/// Oracle answering from a hash of (seed, prompt, sample), with occasional
/// malformed answers, and logging every call it serves.
pub struct RandomOracle {
    seed: u64,
    pub malformed_rate: f64,
    log: Mutex<Vec<CallRecord>>,
}

impl RandomOracle {
    pub fn new(seed: u64) -> Self {
        Self { seed, malformed_rate: 0.05, log: Mutex::new(Vec::new()) }
    }

    fn rng(&self, request: &OracleRequest) -> ChaCha8Rng {
        let mut hasher = std::collections::hash_map::DefaultHasher::new();
        (self.seed, request.kind.as_str(), &request.rendered_prompt, request.sample_index).hash(&mut hasher);
        ChaCha8Rng::seed_from_u64(hasher.finish())
    }

    pub fn log(&self) -> Vec<CallRecord> {
        self.log.lock().unwrap().clone()
    }

    pub fn calls(&self) -> u64 {
        self.log.lock().unwrap().len() as u64
    }

    /// Calls the loop is expected to have sampled again: every malformed
    /// answer, and each echo immediately followed by the same extension
    /// prompt.
    pub fn resampled(&self) -> u64 {
        let log = self.log.lock().unwrap();
        let mut count = 0;
        for (i, call) in log.iter().enumerate() {
            match call.outcome {
                Outcome::Malformed => count += 1,
                Outcome::Echo => {
                    if log.get(i + 1).is_some_and(|next| next.kind == call.kind && next.prompt == call.prompt) {
                        count += 1;
                    }
                }
                Outcome::Good => {}
            }
        }
        count
    }

    pub fn count(&self, kind: PromptKind, outcome: Outcome) -> u64 {
        self.log.lock().unwrap().iter().filter(|c| c.kind == kind && c.outcome == outcome).count() as u64
    }
}

fn phrase(rng: &mut ChaCha8Rng) -> String {
    format!("{} the {}", VERBS[rng.gen_range(0..VERBS.len())], NOUNS[rng.gen_range(0..NOUNS.len())])
}

/// Sentences inside `IF [...]` of a rule-extension prompt.
fn known_sentences(prompt: &str) -> Vec<String> {
    let start = prompt.find("IF [").map_or(0, |i| i + 4);
    let end = prompt.find("] AND [condition]").unwrap_or(prompt.len());
    prompt[start..end].split_inclusive('.').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

impl Oracle for RandomOracle {
    fn complete(&self, request: &OracleRequest) -> Result<String, OracleError> {
        let mut rng = self.rng(request);
        let malformed = rng.gen_bool(self.malformed_rate);
        let (response, outcome) = if malformed {
            ("???".to_string(), Outcome::Malformed)
        } else {
            match request.kind {
                PromptKind::SymbolInit => {
                    let items: Vec<String> = (1..=5).map(|i| format!("{i}. Hands {}.", phrase(&mut rng))).collect();
                    (items.join(" "), Outcome::Good)
                }
                PromptKind::EntailmentCheck => {
                    let premises = request.rendered_prompt.matches("The person is").count().max(1);
                    let high = (0.15 * premises as f64).min(0.9);
                    let letter = if rng.gen_bool(high) {
                        ['d', 'e'][rng.gen_range(0..2)]
                    } else {
                        ['a', 'b', 'c', 'f'][rng.gen_range(0..4)]
                    };
                    (format!("({letter})"), Outcome::Good)
                }
                PromptKind::RuleExtension => {
                    let text = phrase(&mut rng);
                    let known = known_sentences(&request.rendered_prompt);
                    let sentence = declarative_sentence(&text);
                    let outcome = if known.contains(&sentence) { Outcome::Echo } else { Outcome::Good };
                    (format!("[condition] is: [{text}]."), outcome)
                }
                PromptKind::YesNoStatement => {
                    let (yes, no): (f64, f64) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
                    (format!("yes: {yes:.4}, no: {no:.4}"), Outcome::Good)
                }
                PromptKind::Paraphrase => {
                    let items: Vec<String> =
                        (1..=5).map(|i| format!("{i}. The person might {}.", phrase(&mut rng))).collect();
                    (items.join(" "), Outcome::Good)
                }
                PromptKind::HierarchySummarize => ("[summary] is: [Interact with objects].".to_string(), Outcome::Good),
            }
        };
        self.log.lock().unwrap().push(CallRecord {
            kind: request.kind,
            prompt: request.rendered_prompt.clone(),
            outcome,
        });
        Ok(response)
    }
}

pub fn random_config(rng: &mut impl Rng) -> LoopConfig {
    LoopConfig {
        e_h: [0.7, 0.8, 0.9][rng.gen_range(0..3)],
        n_ent: rng.gen_range(1..=5),
        init_symbol_count: 5,
        max_extension_symbols: rng.gen_range(3..=10),
        max_premises: rng.gen_range(2..=5),
        branch_factor: rng.gen_range(1..=3),
        drop_patience: rng.gen_range(1..=3),
        ..LoopConfig::default()
    }
}

/// Random single-conclusion system with up to `max_rules` rules of up to
/// `max_premises` premises drawn from `m0..m{pool}`.
pub fn random_subsystem(rng: &mut impl Rng, max_rules: usize, max_premises: usize, pool: usize) -> SubSystem {
    let mut system = SymbolicSystem::new();
    let rules = rng.gen_range(1..=max_rules);
    for _ in 0..rules {
        let n = rng.gen_range(1..=max_premises);
        let premises: BTreeSet<String> = (0..n).map(|_| format!("m{}", rng.gen_range(0..pool))).collect();
        let premises: Vec<String> = premises.into_iter().collect();
        let _ = system.add_rule(&premises, "c", None, Provenance::default());
    }
    let c = system.find_symbol("c").unwrap();
    decompose(&system, c).unwrap()
}

/// Premise probability lists per rule, by canonical text.
pub fn rule_premise_texts(sub: &SubSystem) -> Vec<Vec<String>> {
    sub.rules.values().map(|r| r.premise_ids.iter().map(|id| sub.symbols[id].text.clone()).collect()).collect()
}

/// OR of ANDs over crisp truth values.
pub fn brute_force_crisp(rules: &[Vec<String>], truth: &BTreeMap<String, bool>) -> bool {
    rules.iter().any(|r| r.iter().all(|p| truth[p]))
}

/// Max of mins, folded without shortcuts.
pub fn brute_force_fuzzy(rules: &[Vec<String>], values: &BTreeMap<String, f64>) -> f64 {
    let mut best = 0.0f64;
    for rule in rules {
        let mut low = 1.0f64;
        for premise in rule {
            low = low.min(values[premise]);
        }
        best = best.max(low);
    }
    best
}
