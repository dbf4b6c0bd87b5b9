//! Acceptance checks, one line per criterion. Exits non-zero on any failure.

mod support;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{self, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::{
    brute_force_crisp, brute_force_fuzzy, fixture, random_config, random_subsystem, read_fixture, rule_premise_texts,
    Outcome, RandomOracle,
};
use symbolact::eval::{
    average_precision, bottleneck_grid, confusion_pairs, is_consistent, operation_count, Dataset, DatasetRecord,
};
use symbolact::graph::{decompose, Provenance, SubSystem, SymbolId, SymbolicSystem};
use symbolact::grounding::{
    check_symbol, ground_symbols, ground_system, ground_with_pruning, normalize_yes_no, FatherNode, GroundingConfig,
    GroundingFile, ImageGrounder, OracleScorer, ProbabilityTable, ScorePair, SymbolTree, TableEntry, TableValue,
    UncertainPolicy, VariantSet,
};
use symbolact::inference::{
    evaluate_conclusion, evaluate_with, fuse_predictions, infer_all, ExplanationFile, FusionPolicy, InferenceError,
    PredictionFile, ScoreVector,
};
use symbolact::instantiate::{
    instantiate_subsystem, instantiate_system, predicted_query_count, ActivitySpec, CandidateRule, CandidateStatus,
    CostLedger, LoopConfig, SubsystemLoop,
};
use symbolact::oracle::{
    FnOracle, Gateway, Oracle, OracleRequest, PromptKind, ReplayCache, ReplayOracle, ScriptedTable,
};

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn main() {
    let criteria: [(u32, &str, Option<Duration>, Check); 10] = [
        (1, "golden airplane trace", Some(Duration::from_secs(1)), golden_trace),
        (2, "entailment gating", None, entailment_gating),
        (3, "query-cost reconciliation", Some(Duration::from_secs(30)), query_reconciliation),
        (4, "fuzzy-logic oracle equivalence", None, fuzzy_equivalence),
        (5, "yes/no normalization properties", None, normalization_properties),
        (6, "paraphrase checker", None, checker),
        (7, "hierarchical pruning", Some(Duration::from_secs(10)), pruning),
        (8, "metrics and analyses", Some(Duration::from_secs(30)), metrics),
        (9, "determinism and round-trips", None, round_trips),
        (10, "fusion", None, fusion),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (n, name, limit, check) in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|payload| {
            let message = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(message)
        });
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(limit)) if elapsed > limit => Err(format!("took {elapsed:.2?}, limit {limit:.0?}")),
            (outcome, _) => outcome,
        };
        match outcome {
            Ok(detail) => println!("[PASS] {n:>2} {name}: {detail} ({elapsed:.2?})"),
            Err(reason) => {
                failed += 1;
                println!("[FAIL] {n:>2} {name}: {reason} ({elapsed:.2?})");
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn load_scripted(dir: &str) -> (ActivitySpec, LoopConfig, ScriptedTable) {
    let activities = ActivitySpec::list_from_json(&read_fixture(&format!("{dir}/activities.json"))).unwrap();
    let config = LoopConfig::from_json(&read_fixture(&format!("{dir}/config.json"))).unwrap();
    let table = ScriptedTable::load(fixture(&format!("{dir}/scripted.jsonl"))).unwrap();
    (activities[0].clone(), config, table)
}

fn golden_trace() -> Result<String, String> {
    let (activity, config, table) = load_scripted("airplane");
    let run = instantiate_subsystem(&activity, &table, &config).map_err(|e| e.to_string())?;
    let rounds: Vec<u32> = run.ledger.rounds.iter().map(|r| r.new_symbols).collect();
    ensure!(run.premise_symbol_count() == 17, "{} symbols", run.premise_symbol_count());
    ensure!(run.rule_count() == 12, "{} rules", run.rule_count());
    ensure!(run.ledger.round_count() == 5, "{} rounds", run.ledger.round_count());
    ensure!(rounds == [5, 5, 3, 3, 1], "per-round symbols {rounds:?}");
    let first = run.subsystem.into_system().to_json();
    let second =
        instantiate_subsystem(&activity, &table, &config).map_err(|e| e.to_string())?.subsystem.into_system().to_json();
    ensure!(first == second, "system file differs between runs");
    ensure!(first == read_fixture("airplane/system.json"), "system file differs from the golden file");
    Ok("17 symbols, 12 rules, rounds 5,5,3,3,1, byte-identical".into())
}

fn entailment_gating() -> Result<String, String> {
    let (activity, config, table) = load_scripted("trajectory");
    ensure!(config.e_h == 0.9, "trajectory fixture gate is {}", config.e_h);
    let mut engine = SubsystemLoop::new(&activity, &table, &config).map_err(|e| e.to_string())?;
    let seeds = engine.initialize_symbols().map_err(|e| e.to_string())?;
    let mut candidate = CandidateRule::new(seeds[0].0.clone());
    let mut raws = vec![seeds[0].1.clone()];
    let mut means = Vec::new();
    loop {
        let score = engine.score_entailment(&candidate.premises).map_err(|e| e.to_string())?;
        means.push(score.mean);
        if candidate.record_score(score.mean, &config) != CandidateStatus::Extending {
            break;
        }
        engine.extend_rule(&mut candidate, &mut raws).map_err(|e| e.to_string())?;
    }
    ensure!(means == [0.28, 0.86, 0.87, 0.93], "trajectory {means:?}");
    ensure!(candidate.status == CandidateStatus::Accepted, "status {:?}", candidate.status);
    ensure!(candidate.premises.len() == 4, "{} premises", candidate.premises.len());
    let run = instantiate_subsystem(&activity, &table, &config).map_err(|e| e.to_string())?;
    ensure!(run.rule_count() == 1, "{} rules from the trajectory", run.rule_count());

    // Every answer is (d) = 0.9, one step short of a 0.95 gate.
    let never = FnOracle(|r: &OracleRequest| {
        Ok(match r.kind {
            PromptKind::SymbolInit => {
                "1. Hands holding a cup. 2. Hands opening a door. 3. Hands lifting a bag. 4. Hands pushing a cart. 5. Hands wiping a table.".to_string()
            }
            PromptKind::EntailmentCheck => "(d)".to_string(),
            _ => format!("[condition] is: [grip thing {} {}]", r.rendered_prompt.len(), r.sample_index),
        })
    });
    let strict = LoopConfig { e_h: 0.95, ..LoopConfig::default() };
    let run = instantiate_subsystem(&ActivitySpec::new("board an airplane", Some("airplane")), &never, &strict)
        .map_err(|e| e.to_string())?;
    ensure!(run.rule_count() == 0, "{} rules from a never-passing oracle", run.rule_count());
    Ok("0.28, 0.86, 0.87, 0.93 accepts 4 premises; never-passing gives 0 rules".into())
}

fn query_reconciliation() -> Result<String, String> {
    let counts = [4, 2, 3, 3, 2, 4, 3, 2, 2, 3, 3, 3, 3, 3, 3];
    ensure!(predicted_query_count(5, &counts) == 216, "worked formula gives {}", predicted_query_count(5, &counts));
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let mut unpredicted = 0;
    for seed in 0..500u64 {
        let config = random_config(&mut rng);
        let oracle = RandomOracle::new(seed);
        let activity = ActivitySpec::new(["carry a parcel", "open a box", "ride a horse"][seed as usize % 3], None);
        let run = instantiate_subsystem(&activity, &oracle, &config).map_err(|e| format!("seed {seed}: {e}"))?;
        let ledger: &CostLedger = &run.ledger;
        let n = u64::from(config.n_ent);
        let accepted: u64 = ledger.rule_premise_counts.iter().map(|&m| u64::from(m)).sum();
        let extensions: u64 = ledger.rule_premise_counts.iter().map(|&m| u64::from(m) - 1).sum();
        let init = oracle.count(PromptKind::SymbolInit, Outcome::Good);
        let resampled = oracle.resampled();
        let early_stop = oracle.calls() - init - n * accepted - extensions - resampled;
        ensure!(ledger.total == oracle.calls(), "seed {seed}: total {} vs {} calls", ledger.total, oracle.calls());
        ensure!(ledger.predicted_query_count == init + n * accepted, "seed {seed}: prediction");
        ensure!(
            ledger.resample_queries == resampled,
            "seed {seed}: resampled {} vs {resampled}",
            ledger.resample_queries
        );
        ensure!(
            ledger.early_stop_queries == early_stop,
            "seed {seed}: early stop {} vs {early_stop}",
            ledger.early_stop_queries
        );
        ensure!(
            ledger.total - ledger.predicted_query_count == extensions + early_stop + resampled + ledger.failed_queries,
            "seed {seed}: unpredicted queries do not reconcile"
        );
        unpredicted += ledger.total - ledger.predicted_query_count;
    }
    Ok(format!("216 from the worked terms; 500 runs reconcile ({unpredicted} unpredicted calls accounted)"))
}

fn fuzzy_equivalence() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..1000 {
        let sub = random_subsystem(&mut rng, 8, 5, 10);
        let rules = rule_premise_texts(&sub);
        let truth: BTreeMap<String, bool> =
            sub.premise_symbols().map(|s| (s.text.clone(), rng.gen_bool(0.6))).collect();
        let crisp: BTreeMap<_, f64> =
            sub.premise_symbols().map(|s| (s.id, f64::from(u8::from(truth[&s.text])))).collect();
        let p = evaluate_conclusion(&sub, &crisp).map_err(|e| e.to_string())?.p_c;
        ensure!((p == 1.0) == brute_force_crisp(&rules, &truth), "case {case}: crisp mismatch");
        ensure!(p == 0.0 || p == 1.0, "case {case}: crisp value {p}");

        let values: BTreeMap<String, f64> = sub
            .premise_symbols()
            .map(|s| {
                let v = if rng.gen_bool(0.3) { f64::from(rng.gen_range(0..5u8)) / 4.0 } else { rng.gen() };
                (s.text.clone(), v)
            })
            .collect();
        let real: BTreeMap<_, f64> = sub.premise_symbols().map(|s| (s.id, values[&s.text])).collect();
        let p = evaluate_conclusion(&sub, &real).map_err(|e| e.to_string())?.p_c;
        let expected = brute_force_fuzzy(&rules, &values);
        ensure!(p == expected, "case {case}: fuzzy {p} vs {expected}");
    }
    Ok("1000 systems, crisp and real inputs, exact".into())
}

fn normalization_properties() -> Result<String, String> {
    let at = normalize_yes_no(ScorePair::new(1.0, 0.0));
    ensure!((at - 0.731_058_578_6).abs() <= 1e-9, "(1, 0) gives {at}");
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10_000 {
        let (yes, no) = (rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        let p = normalize_yes_no(ScorePair::new(yes, no));
        let q = normalize_yes_no(ScorePair::new(no, yes));
        ensure!(p > 0.0 && p < 1.0, "({yes}, {no}) gives {p}");
        ensure!((p + q - 1.0).abs() <= 1e-12, "({yes}, {no}) sums to {}", p + q);
        let step = rng.gen_range(1e-3..5.0);
        let higher = normalize_yes_no(ScorePair::new(yes + step, no));
        ensure!(higher > p, "not increasing at ({yes}, {no}) + {step}");
        // Only the difference matters.
        let shift = rng.gen_range(-50.0..50.0);
        let shifted = normalize_yes_no(ScorePair::new(yes + shift, no + shift));
        ensure!((shifted - p).abs() <= 1e-12, "shift changes the value");
    }
    Ok(format!("10000 pairs; (1, 0) -> {at:.10}"))
}

fn checker() -> Result<String, String> {
    let gate = |values: &[f64]| {
        let set = VariantSet::new(SymbolId(0), Vec::new(), values.to_vec()).unwrap();
        check_symbol(&set, 0.05)
    };
    let constant = gate(&[0.5; 5]);
    ensure!(constant.variant_std == Some(0.0) && !constant.uncertain && constant.value == 0.5, "constant {constant:?}");
    let spread = gate(&[0.1, 0.9, 0.5, 0.3, 0.7]);
    // Deviations 0.4, 0.4, 0, 0.2, 0.2: variance 0.4 / 5.
    let std = spread.variant_std.unwrap();
    ensure!((std - 0.08f64.sqrt()).abs() < 1e-12 && spread.uncertain, "spread {spread:?}");
    let tight = gate(&[0.50, 0.52, 0.48, 0.51, 0.49]);
    let std = tight.variant_std.unwrap();
    ensure!((std - 0.0002f64.sqrt()).abs() < 1e-12 && !tight.uncertain, "tight {tight:?}");

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut table = ProbabilityTable::new();
    let symbols = 2000;
    let mut engineered = 0;
    for i in 0..symbols {
        let base: f64 = rng.gen_range(0.3..0.7);
        let unstable = rng.gen_bool(0.05);
        engineered += usize::from(unstable);
        let spread = if unstable { rng.gen_range(0.12..0.3) } else { rng.gen_range(0.0..0.04) };
        let variants =
            (0..5).map(|j| TableValue::Direct { p: base + spread * [-1.0, -0.5, 0.0, 0.5, 1.0][j] }).collect();
        let entry = TableEntry { value: TableValue::Direct { p: base }, variants };
        table.insert("batch", &format!("symbol number {i}"), entry).map_err(|e| e.to_string())?;
    }
    let config = GroundingConfig { checker: true, ..GroundingConfig::default() };
    let mut grounder = ImageGrounder::new("batch", &table, config);
    let mut flagged = 0;
    for i in 0..symbols {
        flagged += usize::from(grounder.measure(&format!("symbol number {i}")).map_err(|e| e.to_string())?.uncertain);
    }
    let rate = flagged as f64 / symbols as f64;
    ensure!((rate - 0.05).abs() <= 0.02, "flagged {:.2}%", rate * 100.0);
    Ok(format!("three examples exact; {:.2}% flagged ({engineered} engineered of {symbols})", rate * 100.0))
}

fn orange_system() -> SymbolicSystem {
    SymbolicSystem::from_json(&read_fixture("orange/system.json")).unwrap()
}

fn conclusions(system: &SymbolicSystem) -> Vec<ActivitySpec> {
    system.conclusions().map(|s| ActivitySpec::new(s.text.clone(), None)).collect()
}

fn pruning() -> Result<String, String> {
    let system = orange_system();
    let tree = SymbolTree::from_json(&read_fixture("orange/tree.json")).map_err(|e| e.to_string())?;
    let table = ProbabilityTable::from_json(&read_fixture("orange/images.json")).map_err(|e| e.to_string())?;
    let images: Vec<String> = table.images().map(String::from).collect();
    let count =
        operation_count(&system, &conclusions(&system), Some((&tree, &table, &images))).map_err(|e| e.to_string())?;
    ensure!((count.naive, count.reuse) == (71, 31), "naive/reuse {}/{}", count.naive, count.reuse);
    ensure!(count.hierarchical == Some(23.0), "hierarchical {:?}", count.hierarchical);
    ensure!(count.per_image.values().all(|&c| c <= count.reuse), "an image exceeds the reuse count");

    let buy = decompose(&system, system.find_symbol("buy an orange").unwrap()).map_err(|e| e.to_string())?;
    let buy_tree = SymbolTree::from_json(&read_fixture("orange/buy_tree.json")).map_err(|e| e.to_string())?;
    let image_iii = ProbabilityTable::from_json(&read_fixture("orange/image_iii.json")).map_err(|e| e.to_string())?;
    let config = GroundingConfig::default();
    let pruned = ground_with_pruning("image_iii", &buy, &buy_tree, &image_iii, &config).map_err(|e| e.to_string())?;
    let mut plain = ImageGrounder::new("image_iii", &image_iii, config);
    plain.ground_symbols(&buy).map_err(|e| e.to_string())?;
    ensure!((pruned.calls, plain.calls()) == (5, 10), "image III calls {} vs {}", pruned.calls, plain.calls());

    for name in ["airplane/system.json", "hake/system.json"] {
        let other = SymbolicSystem::from_json(&read_fixture(name)).map_err(|e| e.to_string())?;
        let count = operation_count(&other, &conclusions(&other), None).map_err(|e| e.to_string())?;
        ensure!(count.reuse <= count.naive, "{name}: reuse {} > naive {}", count.reuse, count.naive);
    }

    let subs: Vec<SubSystem> = system.conclusions().map(|c| decompose(&system, c.id).unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..1000 {
        let (tree, table) = random_monotone_case(&mut rng, &tree);
        for sub in &subs {
            let exact = ground_symbols("img", sub, &table, &config).map_err(|e| e.to_string())?;
            let pruned = ground_with_pruning("img", sub, &tree, &table, &config).map_err(|e| e.to_string())?;
            let exact = evaluate_with(sub, |id| exact.get(&id).map(|p| Some(p.value))).unwrap().p_c;
            let pruned = evaluate_with(sub, |id| pruned.probabilities.get(&id).map(|p| Some(p.value))).unwrap().p_c;
            if exact > tree.theta {
                ensure!(pruned == exact, "case {case}: {pruned} vs exact {exact}");
            } else {
                ensure!(
                    exact <= pruned && pruned <= tree.theta,
                    "case {case}: {exact} <= {pruned} <= {} fails",
                    tree.theta
                );
            }
        }
    }
    Ok("71/31/23, image III 5 vs 10, 1000 monotone tables sound".into())
}

/// The orange tree at a random θ, sometimes under a grandfather, with a
/// table in which no son exceeds its father.
fn random_monotone_case(rng: &mut ChaCha8Rng, base: &SymbolTree) -> (SymbolTree, ProbabilityTable) {
    let mut fathers = base.fathers.clone();
    let grouped: Vec<String> = fathers.iter().filter(|_| rng.gen_bool(0.4)).map(|f| f.text.clone()).collect();
    if !grouped.is_empty() {
        fathers.push(FatherNode { text: "handle the fruit".into(), sons: grouped });
    }
    let tree = SymbolTree::new(rng.gen_range(0.05..0.6), fathers).unwrap();
    let mut table = ProbabilityTable::new();
    let mut stack: Vec<(String, f64)> = tree.roots().iter().map(|r| (r.to_string(), 1.0)).collect();
    while let Some((node, cap)) = stack.pop() {
        let p = if rng.gen_bool(0.3) { cap } else { cap * rng.gen::<f64>() };
        table.insert("img", &node, TableValue::Direct { p }).unwrap();
        stack.extend(tree.sons(&node).iter().map(|s| (s.clone(), p)));
    }
    (tree, table)
}

/// Precision at each positive, ranks from pairwise comparisons.
fn brute_force_ap(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let rank = |i: usize| {
        1 + (0..scores.len()).filter(|&j| scores[j] > scores[i] || (scores[j] == scores[i] && j < i)).count()
    };
    let positives: Vec<usize> = (0..scores.len()).filter(|&i| labels[i]).collect();
    if positives.is_empty() {
        return None;
    }
    let mut precisions: Vec<(usize, f64)> = positives
        .iter()
        .map(|&i| {
            let r = rank(i);
            (r, positives.iter().filter(|&&j| rank(j) <= r).count() as f64 / r as f64)
        })
        .collect();
    precisions.sort_by_key(|p| p.0);
    Some(precisions.iter().map(|p| p.1).sum::<f64>() / positives.len() as f64)
}

fn metrics() -> Result<String, String> {
    // Every label vector and every score vector over three levels, length ≤ 7,
    // then random length-8 instances.
    let mut instances = 0u64;
    for n in 1..=7u32 {
        for code in 0..3u64.pow(n) {
            let scores: Vec<f64> = (0..n).map(|i| ((code / 3u64.pow(i)) % 3) as f64 / 2.0).collect();
            for mask in 0..(1u32 << n) {
                let labels: Vec<bool> = (0..n).map(|i| mask & (1 << i) != 0).collect();
                let (got, want) = (average_precision(&scores, &labels), brute_force_ap(&scores, &labels));
                ensure!(got == want, "AP {got:?} vs {want:?} on {scores:?} {labels:?}");
                instances += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100_000 {
        let scores: Vec<f64> = (0..8).map(|_| f64::from(rng.gen_range(0..4u8)) / 3.0).collect();
        let labels: Vec<bool> = (0..8).map(|_| rng.gen_bool(0.4)).collect();
        ensure!(average_precision(&scores, &labels) == brute_force_ap(&scores, &labels), "AP mismatch at length 8");
        instances += 1;
    }

    let mut datasets = 0;
    for _ in 0..200 {
        let (dataset, system) = consistent_dataset(&mut rng);
        ensure!(is_consistent(&dataset, &system), "constructed dataset judged inconsistent");
        let grid = bottleneck_grid(&dataset, &system).map_err(|e| e.to_string())?;
        ensure!(
            grid.perfect_symbols_perfect_system == 100.0,
            "perfect/perfect {}",
            grid.perfect_symbols_perfect_system
        );
        ensure!(grid.cells().iter().all(|&c| c <= 100.0), "a cell exceeds the corner: {grid:?}");
        datasets += 1;
    }

    let (dataset, system) = confusion_fixture(&mut rng);
    let report = confusion_pairs(&dataset, &system).map_err(|e| e.to_string())?;
    let expected = brute_force_confusion(&dataset, &system);
    ensure!(report.items == 120, "{} items", report.items);
    ensure!(report.denominator == 7140, "denominator {}", report.denominator);
    ensure!(report.pairs == expected, "{} pairs vs {} by brute force", report.pairs.len(), expected.len());
    Ok(format!(
        "{instances} AP instances; {datasets} consistent grids at 100.00; {} confusion pairs of 7140",
        report.count
    ))
}

/// Rules over `s0..s{pool}` plus, per image, a marker symbol so that the
/// completion rule of one image never fires on another. Activities are
/// closed under the rules, which makes the dataset consistent by design.
fn consistent_dataset(rng: &mut ChaCha8Rng) -> (Dataset, SymbolicSystem) {
    let pool = 8;
    let activities = ["act alpha", "act beta", "act gamma", "act delta"];
    let mut system = SymbolicSystem::new();
    for activity in activities {
        for _ in 0..rng.gen_range(1..=3) {
            let premises: BTreeSet<String> =
                (0..rng.gen_range(1..=3)).map(|_| format!("s{}", rng.gen_range(0..pool))).collect();
            let premises: Vec<String> = premises.into_iter().collect();
            let _ = system.add_rule(&premises, activity, None, Provenance::default());
        }
    }
    let rules: Vec<(String, BTreeSet<String>)> = system
        .rules()
        .map(|r| {
            let text = |id| system.symbol(id).unwrap().text.clone();
            (text(r.conclusion_id), r.premise_ids.iter().map(|&p| text(p)).collect())
        })
        .collect();
    let images = 20;
    let mut vocabulary: Vec<String> = (0..pool).map(|i| format!("s{i}")).collect();
    vocabulary.extend((0..images).map(|i| format!("marker {i}")));
    let mut records = Vec::new();
    for i in 0..images {
        let mut symbols: BTreeSet<String> = (0..pool).filter(|_| rng.gen_bool(0.4)).map(|s| format!("s{s}")).collect();
        symbols.insert(format!("marker {i}"));
        let mut labels: BTreeSet<String> =
            rules.iter().filter(|(_, premises)| premises.is_subset(&symbols)).map(|(c, _)| c.clone()).collect();
        for activity in activities {
            if rng.gen_bool(0.2) {
                labels.insert(activity.to_string());
            }
        }
        let labels: Vec<String> = labels.into_iter().collect();
        let symbols: Vec<String> = symbols.into_iter().collect();
        let mut record = DatasetRecord::new(&format!("img{i:02}"), &labels, &symbols).unwrap();
        record.score_table = Some(
            vocabulary.iter().map(|v| (v.clone(), TableEntry::from(TableValue::Direct { p: rng.gen() }))).collect(),
        );
        records.push(record);
    }
    (Dataset::new(records).unwrap(), system)
}

/// 60 images with two activities each over a six-symbol vocabulary, so that
/// many happening sets coincide.
fn confusion_fixture(rng: &mut ChaCha8Rng) -> (Dataset, SymbolicSystem) {
    let activities = ["walk a dog", "ride a bike", "hold an umbrella", "read a book", "drink tea"];
    let mut system = SymbolicSystem::new();
    for activity in activities {
        for _ in 0..2 {
            let premises: BTreeSet<String> =
                (0..rng.gen_range(1..=3)).map(|_| format!("s{}", rng.gen_range(0..6))).collect();
            let premises: Vec<String> = premises.into_iter().collect();
            let _ = system.add_rule(&premises, activity, None, Provenance::default());
        }
    }
    let records = (0..60)
        .map(|i| {
            let labels: Vec<&str> = activities.choose_multiple(rng, 2).copied().collect();
            let symbols: Vec<String> = (0..6).filter(|_| rng.gen_bool(0.3)).map(|s| format!("s{s}")).collect();
            DatasetRecord::new(&format!("img{i:03}"), &labels, &symbols).unwrap()
        })
        .collect();
    (Dataset::new(records).unwrap(), system)
}

fn brute_force_confusion(dataset: &Dataset, system: &SymbolicSystem) -> Vec<(usize, usize)> {
    let vocabulary = |activity: &str| -> BTreeSet<String> {
        system
            .rules()
            .filter(|r| system.symbol(r.conclusion_id).unwrap().text == activity)
            .flat_map(|r| r.premise_ids.iter().map(|&p| system.symbol(p).unwrap().text.clone()))
            .collect()
    };
    let items: Vec<(String, BTreeSet<String>)> = dataset
        .records
        .iter()
        .flat_map(|r| {
            r.gt_activities
                .iter()
                .map(|a| (a.clone(), r.gt_symbols.intersection(&vocabulary(a)).cloned().collect()))
                .collect::<Vec<_>>()
        })
        .collect();
    let mut pairs = Vec::new();
    for i in 0..items.len() {
        for j in i + 1..items.len() {
            if items[i].0 != items[j].0 && items[i].1 == items[j].1 {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

struct Outputs {
    system: String,
    grounding: String,
    predictions: String,
    explanations: String,
}

fn pipeline(oracle: &dyn Oracle) -> Result<Outputs, String> {
    let activities =
        vec![ActivitySpec::new("carry a parcel", Some("parcel")), ActivitySpec::new("open a door", Some("door"))];
    let config = LoopConfig { n_ent: 3, ..LoopConfig::default() };
    let run = instantiate_system(&activities, oracle, &config, 2).map_err(|e| e.to_string())?;
    let scorer = OracleScorer::new(oracle, config.decode);
    let images: Vec<String> = ["img_a", "img_b"].map(String::from).to_vec();
    let grounding_config =
        GroundingConfig { checker: true, policy: UncertainPolicy::DropRule, ..GroundingConfig::default() };
    let grounding = ground_system(&run.system, &scorer, &images, None, &grounding_config).map_err(|e| e.to_string())?;
    let (predictions, explanations) =
        infer_all(&run.system, &grounding.file, &activities, None).map_err(|e| e.to_string())?;
    Ok(Outputs {
        system: run.system.to_json(),
        grounding: grounding.file.to_json(),
        predictions: predictions.to_json(),
        explanations: explanations.to_json(),
    })
}

fn round_trips() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("cache.jsonl");
    let recorded = {
        let cache = Arc::new(ReplayCache::open(&path).map_err(|e| e.to_string())?);
        pipeline(&Gateway::recording(RandomOracle::new(77), cache))?
    };
    let replayed = pipeline(&ReplayOracle(Arc::new(ReplayCache::open(&path).map_err(|e| e.to_string())?)))?;
    ensure!(recorded.system == replayed.system, "system file differs on replay");
    ensure!(recorded.grounding == replayed.grounding, "grounding file differs on replay");
    ensure!(recorded.predictions == replayed.predictions, "prediction file differs on replay");
    ensure!(recorded.explanations == replayed.explanations, "explanation file differs on replay");

    let mut formats = 0;
    let mut same = |name: &str, a: String, b: &str| -> Result<(), String> {
        formats += 1;
        ensure!(a == b, "{name} does not round-trip");
        Ok(())
    };
    let e = |e: &dyn std::fmt::Display| e.to_string();
    same("system", SymbolicSystem::from_json(&recorded.system).map_err(|x| e(&x))?.to_json(), &recorded.system)?;
    same(
        "grounding",
        GroundingFile::from_json(&recorded.grounding).map_err(|x| e(&x))?.to_json(),
        &recorded.grounding,
    )?;
    same(
        "predictions",
        PredictionFile::from_json(&recorded.predictions).map_err(|x| e(&x))?.to_json(),
        &recorded.predictions,
    )?;
    same(
        "explanations",
        ExplanationFile::from_json(&recorded.explanations).map_err(|x| e(&x))?.to_json(),
        &recorded.explanations,
    )?;
    let tree = read_fixture("orange/tree.json");
    same("tree", SymbolTree::from_json(&tree).map_err(|x| e(&x))?.to_json(), &tree)?;
    let table = read_fixture("orange/images.json");
    same("probability table", ProbabilityTable::from_json(&table).map_err(|x| e(&x))?.to_json(), &table)?;
    let dataset = read_fixture("orange/dataset.json");
    same("dataset", Dataset::from_json(&dataset).map_err(|x| e(&x))?.to_json(), &dataset)?;
    let scripted = read_fixture("airplane/scripted.jsonl");
    same("scripted table", ScriptedTable::from_jsonl(&scripted).map_err(|x| e(&x))?.to_jsonl(), &scripted)?;
    let cache = std::fs::read_to_string(&path).map_err(|x| e(&x))?;
    let reopened = ReplayCache::open(&path).map_err(|x| e(&x))?.to_scripted_table().to_jsonl();
    same("replay cache", ScriptedTable::from_jsonl(&cache).map_err(|x| e(&x))?.to_jsonl(), &reopened)?;
    let ledger = read_fixture("airplane/ledger.json");
    let parsed: Vec<CostLedger> = serde_json::from_str(&ledger).map_err(|x| e(&x))?;
    same("ledger", serde_json::to_string_pretty(&parsed).map_err(|x| e(&x))? + "\n", &ledger)?;
    let config = LoopConfig::from_json(&read_fixture("airplane/config.json")).map_err(|x| e(&x))?;
    let again = LoopConfig::from_json(&serde_json::to_string(&config).map_err(|x| e(&x))?).map_err(|x| e(&x))?;
    same("config", format!("{again:?}"), &format!("{config:?}"))?;
    Ok(format!("record/replay byte-identical; {formats} formats round-trip"))
}

fn fusion() -> Result<String, String> {
    let vector = |pairs: &[(&str, f64)]| -> ScoreVector { pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect() };
    let fused = fuse_predictions(
        &vector(&[("a", 2.0), ("b", 1.0)]),
        &vector(&[("a", 0.2), ("b", 0.8)]),
        &FusionPolicy::MaxNorm,
    )
    .map_err(|e| e.to_string())?;
    ensure!(fused == vector(&[("a", 1.25), ("b", 1.5)]), "worked example gives {fused:?}");

    let order = |v: &ScoreVector| {
        let mut keys: Vec<(&String, &f64)> = v.iter().collect();
        keys.sort_by(|a, b| b.1.total_cmp(a.1).then(a.0.cmp(b.0)));
        keys.into_iter().map(|(k, _)| k.clone()).collect::<Vec<_>>()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..1000 {
        let n = rng.gen_range(1..10);
        let sys1: ScoreVector = (0..n).map(|i| (format!("k{i}"), rng.gen_range(0.0..1.0))).collect();
        let zeros: ScoreVector = sys1.keys().map(|k| (k.clone(), 0.0)).collect();
        let policies = [FusionPolicy::MaxNorm, FusionPolicy::fixed(0.3, 0.7).unwrap()];
        for policy in &policies {
            let fused = fuse_predictions(&sys1, &zeros, policy).map_err(|e| e.to_string())?;
            ensure!(order(&fused) == order(&sys1), "zero vector changes ranks under {policy:?}");
            let fused = fuse_predictions(&sys1, &sys1, policy).map_err(|e| e.to_string())?;
            ensure!(order(&fused) == order(&sys1), "identical vectors change ranks under {policy:?}");
        }
    }
    let mismatch = fuse_predictions(&vector(&[("a", 1.0)]), &vector(&[("b", 1.0)]), &FusionPolicy::MaxNorm);
    ensure!(matches!(mismatch, Err(InferenceError::KeyMismatch(_))), "key mismatch accepted");
    Ok("worked example {a: 1.25, b: 1.5}; degenerate ranks kept; mismatch rejected".into())
}
