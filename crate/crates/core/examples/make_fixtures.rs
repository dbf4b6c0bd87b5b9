//! Regenerates the files under `fixtures/`.
//!
//! The airplane trace is authored as a list of candidate growth steps; the
//! scripted table is derived from the rendered prompts, then the loop is run
//! against it to produce the golden system and ledger.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symbolact::eval::{Dataset, DatasetRecord};
use symbolact::graph::{Provenance, SymbolicSystem};
use symbolact::grounding::{FatherNode, ProbabilityTable, SymbolTree, TableEntry, TableValue};
use symbolact::instantiate::{instantiate_subsystem, ActivitySpec, LoopConfig};
use symbolact::oracle::{render_entailment, render_rule_extension, render_symbol_init_n, PromptKind, ScriptedTable};

const AIRPLANE_INIT: &str = "1. Hands holding a boarding pass. 2. Hands placing luggage in overhead compartment. 3. Hands adjusting seatbelt. 4. Hands waving goodbye to loved ones. 5. Hands gripping a luggage handle.";

/// Canonical symbol text and the answer that introduces it.
const AIRPLANE_SYMBOLS: [(&str, &str); 17] = [
    ("hold a boarding pass", "[condition] is: [The person is holding a boarding pass]."),
    ("place luggage in overhead compartment", ""),
    ("adjust seatbelt", ""),
    ("wave goodbye to loved ones", ""),
    ("grip a luggage handle", ""),
    ("walk towards the boarding gate", "[condition] is: The person is walking towards the boarding gate"),
    ("luggage visible beside him", "[condition] is: [Luggage visible beside him]."),
    ("boarding pass is scanned by airport staff", "[The boarding pass is scanned by airport staff]"),
    ("stand on the jet bridge", "[condition] is: [The person is standing on the jet bridge]."),
    ("luggage is loaded onto the plane", "[condition] is: [The luggage is loaded onto the plane]."),
    (
        "reach for the airplane door handle",
        "[condition] is: [The person's hands are reaching for the airplane door handle].",
    ),
    ("stand in line with carry-on luggage", "[condition] is: [The person is standing in line with carry-on luggage]."),
    ("hold the carry-on luggage", "[condition] is: [The person's hands are holding the carry-on luggage]."),
    ("open the airplane door", "[condition] is: [The person's hands are opening the airplane door]."),
    ("move forward in the line", "[condition] is: [The person is moving forward in the line]."),
    ("move towards the airplane door", "[condition] is: [The person is moving towards the airplane door]."),
    ("airline staff checking the boarding pass", "[Airline staff checking the boarding pass]"),
];

/// Phrases proposed by abandoned candidates; they never enter the system.
const DISCARDED: [(&str, &str); 4] = [
    ("push a luggage trolley", "[condition] is: [The person is pushing a luggage trolley]."),
    ("look at the departure board", "[condition] is: [The person is looking at the departure board]."),
    ("wear a backpack", "[condition] is: [The person is wearing a backpack]."),
    ("read a magazine", "[condition] is: [The person is reading a magazine]."),
];

enum Step {
    Known(usize),
    Discarded(usize),
}

/// One candidate per popped symbol: growth steps after the seed and the
/// five entailment answers for each premise-set length.
fn airplane_candidates() -> Vec<(usize, Vec<Step>, Vec<&'static str>)> {
    use Step::{Discarded as D, Known as K};
    vec![
        (1, vec![K(6), K(7), K(8)], vec!["aabab", "ddcdd", "dedcd", "edeed"]),
        (2, vec![K(9)], vec!["bcbcc", "ddddd"]),
        (3, vec![K(9), K(10)], vec!["bbbbc", "cdcdc", "ddedd"]),
        (4, vec![K(10), K(6)], vec!["aabaa", "bcccb", "dedde"]),
        (5, vec![K(7)], vec!["cbccb", "edded"]),
        (6, vec![K(1), K(7), K(8)], vec!["bbccb", "cccdc", "dcdcd", "eeded"]),
        (7, vec![K(11), K(9)], vec!["abbab", "ccbcc", "ddede"]),
        (8, vec![K(12)], vec!["bcbcb", "eddde"]),
        (9, vec![K(13)], vec!["ccbbc", "deddd"]),
        (10, vec![D(0), D(1)], vec!["ccccc", "bcbcc", "bbbbb"]),
        (11, vec![K(14), K(9)], vec!["bcbbc", "cdccd", "eedde"]),
        (12, vec![K(15), K(8)], vec!["bbcbb", "ccdcc", "deded"]),
        (13, vec![K(16), K(7)], vec!["abbbb", "cccdd", "ddedd"]),
        (14, vec![D(2), D(3)], vec!["cdccc", "cbccc", "bcbbb"]),
        (15, vec![K(17), K(12)], vec!["bbbcb", "cdcdc", "ededd"]),
    ]
}

fn write(path: PathBuf, contents: &str) {
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(&path, contents).unwrap();
    println!("wrote {}", path.display());
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).unwrap() + "\n"
}

fn airplane(root: &Path) {
    let activity = ActivitySpec::new("board an airplane", Some("airplane"));
    let config = LoopConfig { branch_factor: 1, ..LoopConfig::default() };
    let object = activity.object.as_deref();
    let gerund = activity.prompt_activity();
    let mut table = ScriptedTable::new();
    let init_prompt = render_symbol_init_n(&gerund, object, 5);
    table.insert(PromptKind::SymbolInit, &init_prompt, 0, AIRPLANE_INIT).unwrap();

    for (seed, steps, answers) in airplane_candidates() {
        let mut premises = vec![AIRPLANE_SYMBOLS[seed - 1].0.to_string()];
        for (i, letters) in answers.iter().enumerate() {
            let prompt = render_entailment(&premises, &gerund, object);
            for (k, letter) in letters.chars().enumerate() {
                table.insert(PromptKind::EntailmentCheck, &prompt, k as u32, letter.to_string()).unwrap();
            }
            let Some(step) = steps.get(i) else { break };
            let (text, answer) = match *step {
                Step::Known(n) => AIRPLANE_SYMBOLS[n - 1],
                Step::Discarded(n) => DISCARDED[n],
            };
            let prompt = render_rule_extension(&premises, &gerund, object);
            table.insert(PromptKind::RuleExtension, &prompt, 0, answer).unwrap();
            premises.push(text.to_string());
        }
    }

    let run = instantiate_subsystem(&activity, &table, &config).expect("scripted trace runs");
    for symbol in run.subsystem.premise_symbols() {
        assert_eq!(AIRPLANE_SYMBOLS[symbol.id.0 as usize - 1].0, symbol.text);
    }
    let dir = root.join("airplane");
    write(dir.join("activities.json"), &json(&vec![activity]));
    write(dir.join("config.json"), &json(&config));
    write(dir.join("scripted.jsonl"), &table.to_jsonl());
    write(dir.join("system.json"), &run.subsystem.clone().into_system().to_json());
    write(dir.join("ledger.json"), &json(&vec![run.ledger]));
}

/// A single candidate whose ten-sample means run 0.28, 0.86, 0.87, 0.93.
fn trajectory(root: &Path) {
    let activity = ActivitySpec::new("board an airplane", Some("airplane"));
    let config = LoopConfig {
        n_ent: 10,
        init_symbol_count: 1,
        max_extension_symbols: 1,
        branch_factor: 1,
        ..LoopConfig::default()
    };
    let object = activity.object.as_deref();
    let gerund = activity.prompt_activity();
    let mut table = ScriptedTable::new();
    table
        .insert(
            PromptKind::SymbolInit,
            &render_symbol_init_n(&gerund, object, 1),
            0,
            "1. Hands holding a boarding pass.",
        )
        .unwrap();
    let answers = ["aaaaaaabcd", "ddddddddcc", "dddddddeeb", "eeeeeedddd"];
    let mut premises = vec![AIRPLANE_SYMBOLS[0].0.to_string()];
    for (i, letters) in answers.iter().enumerate() {
        let prompt = render_entailment(&premises, &gerund, object);
        for (k, letter) in letters.chars().enumerate() {
            table.insert(PromptKind::EntailmentCheck, &prompt, k as u32, letter.to_string()).unwrap();
        }
        if i + 1 < answers.len() {
            let (text, answer) = AIRPLANE_SYMBOLS[5 + i];
            let prompt = render_rule_extension(&premises, &gerund, object);
            table.insert(PromptKind::RuleExtension, &prompt, 0, answer).unwrap();
            premises.push(text.to_string());
        }
    }
    let run = instantiate_subsystem(&activity, &table, &config).expect("trajectory runs");
    assert_eq!(run.rule_count(), 1);
    let dir = root.join("trajectory");
    write(dir.join("activities.json"), &json(&vec![activity]));
    write(dir.join("config.json"), &json(&config));
    write(dir.join("scripted.jsonl"), &table.to_jsonl());
}

/// Orange symbols; index `i` is `m{i+1}`. The first ten are the buy rules.
const ORANGE_SYMBOLS: [&str; 31] = [
    "Talk with seller",
    "Reach for an orange",
    "Seller hand over orange",
    "Stand in front of fruit stand",
    "Place orange in a bag",
    "Pick orange from a basket",
    "Hold a bag of oranges",
    "Reach for a wallet",
    "Seller put the orange in bag",
    "Give money to seller",
    "Hold a knife",
    "Place orange on a cutting board",
    "Slice the orange",
    "Hold the orange steady",
    "Bring orange to mouth",
    "Chew orange segments",
    "Sit at a table",
    "Hold an orange slice",
    "Dig thumb into the peel",
    "Pull off the peel",
    "Drop peel on a plate",
    "Press orange on a juicer",
    "Hold a glass",
    "Juice drips into the glass",
    "Hold orange under running water",
    "Stand at a sink",
    "Rub the orange surface",
    "Look closely at the orange",
    "Turn the orange in hand",
    "Reach up to a tree branch",
    "Twist orange off the stem",
];

/// Rules per verb, as 1-based symbol numbers.
const ORANGE_RULES: [(&str, &[&[usize]]); 9] = [
    ("buy", &[&[1, 2], &[1, 3], &[4, 5, 6], &[4, 7, 8], &[4, 9, 10]]),
    ("cut", &[&[11, 13, 14], &[12, 13], &[18, 17], &[21, 29, 11]]),
    ("eat", &[&[15, 16], &[18, 15, 17], &[19, 20, 21], &[13, 16]]),
    ("hold", &[&[14, 29], &[7, 2], &[18, 28]]),
    ("inspect", &[&[28, 29], &[2, 28, 4], &[6, 14, 27]]),
    ("peel", &[&[19, 20], &[11, 12, 21], &[14, 17, 29]]),
    ("pick", &[&[30, 31], &[2, 6, 5], &[7, 28, 29]]),
    ("squeeze", &[&[22, 24], &[23, 13, 12], &[11, 14, 17]]),
    ("wash", &[&[25, 26], &[27, 29, 14], &[12, 28, 11]]),
];

/// The four buy fathers, then four covering the other verbs.
const ORANGE_FATHERS: [(&str, &[usize]); 8] = [
    ("Interact with a seller", &[1, 3, 10]),
    ("Interact with the oranges", &[2]),
    ("Interact with a container", &[5, 6, 7, 9]),
    ("Payment process", &[4, 8]),
    ("Use a knife", &[11, 12, 13, 14]),
    ("Eat the orange", &[15, 16, 17, 18]),
    ("Peel and juice the orange", &[19, 20, 21, 22, 23, 24]),
    ("Clean and examine the orange", &[25, 26, 27, 28, 29, 30, 31]),
];

/// Indices of fathers above the threshold, cycled over images. Their leaf
/// counts are 15, 13, 17, 11, 19, 15, so the mean over 38 images is 15.
const PASSING: [&[usize]; 6] = [&[4, 5, 7], &[6, 7], &[0, 2, 4, 6], &[1, 2, 3, 4], &[3, 5, 6, 7], &[0, 1, 5, 7]];

const THETA: f64 = 0.1;

fn symbol(n: usize) -> &'static str {
    ORANGE_SYMBOLS[n - 1]
}

fn tree(fathers: &[(&str, &[usize])]) -> SymbolTree {
    SymbolTree::new(
        THETA,
        fathers
            .iter()
            .map(|(text, sons)| FatherNode {
                text: text.to_string(),
                sons: sons.iter().map(|n| symbol(*n).to_string()).collect(),
            })
            .collect(),
    )
    .unwrap()
}

fn direct(p: f64) -> TableEntry {
    TableValue::Direct { p: (p * 1000.0).round() / 1000.0 }.into()
}

fn orange(root: &Path) {
    let dir = root.join("orange");
    let mut system = SymbolicSystem::new();
    let mut activities = Vec::new();
    for (verb, rules) in ORANGE_RULES {
        let conclusion = format!("{verb} an orange");
        for rule in rules {
            let premises: Vec<&str> = rule.iter().map(|n| symbol(*n)).collect();
            system.add_rule(&premises, &conclusion, None, Provenance { round_index: 1, ..Default::default() }).unwrap();
        }
        activities.push(ActivitySpec::new(conclusion, Some("orange")));
    }
    assert_eq!(system.symbol_count(), 31 + 9);

    let buy_tree = tree(&ORANGE_FATHERS[..4]);
    let full_tree = tree(&ORANGE_FATHERS);

    // Image III: only "interact with the oranges" clears the threshold.
    let mut image_iii = ProbabilityTable::new();
    let values = [0.05, 0.8, 0.04, 0.06];
    for (i, (father, sons)) in ORANGE_FATHERS[..4].iter().enumerate() {
        image_iii.insert("image_iii", father, direct(values[i])).unwrap();
        for (j, son) in sons.iter().enumerate() {
            let p = if *son == 2 { 0.7 } else { values[i] * (0.8 - 0.2 * j as f64) };
            image_iii.insert("image_iii", symbol(*son), direct(p)).unwrap();
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(38);
    let verbs: Vec<String> = ORANGE_RULES.iter().map(|(v, _)| format!("{v} an orange")).collect();
    let mut records = Vec::new();
    for k in 0..38 {
        let image = format!("orange_{:03}", k + 1);
        let passing = PASSING[if k < 36 { k % 6 } else { 0 }];
        let mut table = std::collections::BTreeMap::new();
        let mut happening = Vec::new();
        for (i, (father, sons)) in ORANGE_FATHERS.iter().enumerate() {
            let father_p: f64 = if passing.contains(&i) { rng.gen_range(0.4..0.95) } else { rng.gen_range(0.01..0.09) };
            let father_p = (father_p * 1000.0).round() / 1000.0;
            table.insert(father.to_string(), direct(father_p));
            for son in sons.iter() {
                let p = (father_p * rng.gen_range(0.3..1.0) * 1000.0).floor() / 1000.0;
                table.insert(symbol(*son).to_string(), direct(p.max(0.001)));
                if p > 0.5 {
                    happening.push(symbol(*son));
                }
            }
        }
        let gt = [&verbs[k % 9], &verbs[(k * 4 + 3) % 9]];
        let mut record = DatasetRecord::new(&image, &gt[..1 + k % 2], &happening).unwrap();
        record.score_table = Some(table);
        records.push(record);
    }
    let dataset = Dataset::new(records).unwrap();

    write(dir.join("system.json"), &system.to_json());
    write(dir.join("activities.json"), &json(&activities));
    write(dir.join("buy_tree.json"), &buy_tree.to_json());
    write(dir.join("tree.json"), &full_tree.to_json());
    write(dir.join("image_iii.json"), &image_iii.to_json());
    write(dir.join("dataset.json"), &dataset.to_json());
    write(dir.join("images.json"), &dataset.probability_table().unwrap().to_json());
}

/// Part-state rules in the style of an existing body-part annotation scheme.
fn hake(root: &Path) {
    let rules: [&[&str]; 5] = [
        &["head: talk to"],
        &["hand: reach for", "head: inspect"],
        &["hand: hold", "head: smell"],
        &["talk with seller", "reach for an orange"],
        &["hand: hold", "hand: reach for", "hand: squeeze", "head: drink with"],
    ];
    let mut system = SymbolicSystem::new();
    for premises in rules {
        system.add_rule(premises, "buy an orange", None, Provenance::default()).unwrap();
    }
    write(root.join("hake").join("system.json"), &system.to_json());
}

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    airplane(&root);
    trajectory(&root);
    orange(&root);
    hake(&root);
}
