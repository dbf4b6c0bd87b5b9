use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{mean_average_precision, Dataset, EvalError};
use crate::graph::{decompose, Provenance, SymbolicSystem};
use crate::grounding::ProbabilityTable;
use crate::inference::evaluate_grounded;

/// Premise vocabulary of each conclusion in `system`; empty for unknown
/// activities.
fn vocabulary(system: &SymbolicSystem, activity: &str) -> Result<BTreeSet<String>, EvalError> {
    match system.find_symbol(activity) {
        Some(id) if system.symbol(id).is_some_and(|s| s.is_conclusion) => Ok(decompose(system, id)?.premise_texts()),
        _ => Ok(BTreeSet::new()),
    }
}

/// Happening symbols of one (image, activity) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCoverage {
    pub image_id: String,
    pub activity: String,
    pub happening: BTreeSet<String>,
}

impl PairCoverage {
    pub fn count(&self) -> usize {
        self.happening.len()
    }
}

/// Ground-truth symbols of each positive pair that lie in that activity's
/// sub-system, in dataset order.
pub fn happening_sets(dataset: &Dataset, system: &SymbolicSystem) -> Result<Vec<PairCoverage>, EvalError> {
    let mut vocabularies: HashMap<String, BTreeSet<String>> = HashMap::new();
    let mut pairs = Vec::new();
    for record in &dataset.records {
        for activity in &record.gt_activities {
            if !vocabularies.contains_key(activity) {
                vocabularies.insert(activity.clone(), vocabulary(system, activity)?);
            }
            let vocabulary = &vocabularies[activity];
            pairs.push(PairCoverage {
                image_id: record.image_id.clone(),
                activity: activity.clone(),
                happening: record.gt_symbols.intersection(vocabulary).cloned().collect(),
            });
        }
    }
    Ok(pairs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub pairs: Vec<PairCoverage>,
    pub mean: f64,
    /// Activities that are not conclusions of the system.
    pub unresolved: Vec<String>,
}

impl CoverageReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<16}  {:<32}  {:>5}", "image", "activity", "count");
        for pair in &self.pairs {
            let _ = writeln!(out, "{:<16}  {:<32}  {:>5}", pair.image_id, pair.activity, pair.count());
        }
        let _ = writeln!(out, "mean happening symbols per pair: {:.2}", self.mean);
        if !self.unresolved.is_empty() {
            let _ = writeln!(out, "not in system: {}", self.unresolved.join(", "));
        }
        out
    }
}

pub fn coverage_stats(dataset: &Dataset, system: &SymbolicSystem) -> Result<CoverageReport, EvalError> {
    let pairs = happening_sets(dataset, system)?;
    let mean = if pairs.is_empty() {
        0.0
    } else {
        pairs.iter().map(PairCoverage::count).sum::<usize>() as f64 / pairs.len() as f64
    };
    let unresolved = dataset
        .classes()
        .into_iter()
        .filter(|a| system.find_symbol(a).and_then(|id| system.symbol(id)).is_none_or(|s| !s.is_conclusion))
        .collect();
    Ok(CoverageReport { pairs, mean, unresolved })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionReport {
    pub items: usize,
    pub count: u64,
    /// Unordered pairs of items, C(n, 2).
    pub denominator: u64,
    /// Indices into the pair list of [`happening_sets`], `i < j`.
    pub pairs: Vec<(usize, usize)>,
}

impl ConfusionReport {
    pub fn render(&self) -> String {
        format!(
            "confusion pairs: {} of {} ({:.2}%) over {} items\n",
            self.count,
            self.denominator,
            if self.denominator == 0 { 0.0 } else { 100.0 * self.count as f64 / self.denominator as f64 },
            self.items
        )
    }
}

/// Pairs of items with different activities but identical happening sets.
pub fn confusion_pairs(dataset: &Dataset, system: &SymbolicSystem) -> Result<ConfusionReport, EvalError> {
    let items = happening_sets(dataset, system)?;
    let mut groups: BTreeMap<&BTreeSet<String>, Vec<usize>> = BTreeMap::new();
    for (i, item) in items.iter().enumerate() {
        groups.entry(&item.happening).or_default().push(i);
    }
    let mut pairs = Vec::new();
    for members in groups.values() {
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                if items[i].activity != items[j].activity {
                    pairs.push((i, j));
                }
            }
        }
    }
    pairs.sort_unstable();
    let n = items.len() as u64;
    Ok(ConfusionReport {
        items: items.len(),
        count: pairs.len() as u64,
        denominator: n * n.saturating_sub(1) / 2,
        pairs,
    })
}

/// mAP ×100 for each combination of symbol source and rule system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BottleneckGrid {
    pub perfect_symbols_perfect_system: f64,
    pub perfect_symbols_imperfect_system: f64,
    pub imperfect_symbols_perfect_system: f64,
    pub imperfect_symbols_imperfect_system: f64,
}

impl BottleneckGrid {
    pub fn cells(&self) -> [f64; 4] {
        [
            self.perfect_symbols_perfect_system,
            self.perfect_symbols_imperfect_system,
            self.imperfect_symbols_perfect_system,
            self.imperfect_symbols_imperfect_system,
        ]
    }

    pub fn render(&self) -> String {
        format!(
            "{:<20}  {:>10}  {:>10}\n{:<20}  {:>10.2}  {:>10.2}\n{:<20}  {:>10.2}  {:>10.2}\n",
            "symbols \\ system",
            "perfect",
            "imperfect",
            "perfect",
            self.perfect_symbols_perfect_system,
            self.perfect_symbols_imperfect_system,
            "imperfect",
            self.imperfect_symbols_perfect_system,
            self.imperfect_symbols_imperfect_system,
        )
    }
}

/// `system` plus, for each positive pair, a rule from the image's
/// ground-truth symbols to the activity.
pub fn coverage_completed(dataset: &Dataset, system: &SymbolicSystem) -> SymbolicSystem {
    let mut completed = system.clone();
    for record in &dataset.records {
        if record.gt_symbols.is_empty() {
            continue;
        }
        let premises: Vec<&str> = record.gt_symbols.iter().map(String::as_str).collect();
        for activity in &record.gt_activities {
            if record.gt_symbols.contains(activity) {
                continue;
            }
            // Duplicates of existing rules are fine to skip.
            let _ = completed.add_rule(&premises, activity, None, Provenance::default());
        }
    }
    completed
}

/// Whether the perfect/perfect cell can reach 100: every positive image has
/// ground-truth symbols, and no rule of the completed system is satisfied on
/// an image lacking its conclusion.
pub fn is_consistent(dataset: &Dataset, system: &SymbolicSystem) -> bool {
    let completed = coverage_completed(dataset, system);
    dataset.records.iter().all(|record| {
        (record.gt_activities.is_empty() || !record.gt_symbols.is_empty())
            && completed.rules().all(|rule| {
                let conclusion = &completed.symbol(rule.conclusion_id).expect("rule conclusion").text;
                record.gt_activities.contains(conclusion)
                    || !rule
                        .premise_ids
                        .iter()
                        .all(|p| record.gt_symbols.contains(&completed.symbol(*p).expect("premise").text))
            })
    })
}

fn grid_cell(
    dataset: &Dataset,
    system: &SymbolicSystem,
    classes: &BTreeSet<String>,
    table: Option<&ProbabilityTable>,
) -> Result<f64, EvalError> {
    let mut subsystems = BTreeMap::new();
    for class in classes {
        if let Some(id) = system.find_symbol(class).filter(|id| system.symbol(*id).is_some_and(|s| s.is_conclusion)) {
            subsystems.insert(class.clone(), decompose(system, id)?);
        }
    }
    let mut columns: BTreeMap<String, (Vec<f64>, Vec<bool>)> =
        classes.iter().map(|c| (c.clone(), (Vec::new(), Vec::new()))).collect();
    for record in &dataset.records {
        for (class, column) in columns.iter_mut() {
            let score = match subsystems.get(class) {
                Some(sub) => {
                    let mut row = BTreeMap::new();
                    for symbol in sub.premise_symbols() {
                        let value = match table {
                            None => f64::from(u8::from(record.gt_symbols.contains(&symbol.text))),
                            Some(table) => table
                                .get(&record.image_id, &symbol.text)
                                .ok_or_else(|| EvalError::MissingScore {
                                    image: record.image_id.clone(),
                                    symbol: symbol.text.clone(),
                                })?
                                .value
                                .probability(),
                        };
                        row.insert(symbol.text.clone(), Some(value));
                    }
                    evaluate_grounded(sub, &row)?.p_c
                }
                None => 0.0,
            };
            column.0.push(score);
            column.1.push(record.gt_activities.contains(class));
        }
    }
    Ok(mean_average_precision(&columns)?.map * 100.0)
}

/// The four symbol-source × rule-system mAPs. Imperfect symbols come from
/// each record's score table.
pub fn bottleneck_grid(dataset: &Dataset, system: &SymbolicSystem) -> Result<BottleneckGrid, EvalError> {
    if let Some(record) = dataset.records.iter().find(|r| r.score_table.is_none()) {
        return Err(EvalError::MissingScoreTable(record.image_id.clone()));
    }
    let table = dataset.probability_table()?;
    let completed = coverage_completed(dataset, system);
    let classes = dataset.classes();
    Ok(BottleneckGrid {
        perfect_symbols_perfect_system: grid_cell(dataset, &completed, &classes, None)?,
        perfect_symbols_imperfect_system: grid_cell(dataset, system, &classes, None)?,
        imperfect_symbols_perfect_system: grid_cell(dataset, &completed, &classes, Some(&table))?,
        imperfect_symbols_imperfect_system: grid_cell(dataset, system, &classes, Some(&table))?,
    })
}
