use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{
    clamp_open, mean_and_std, GroundingError, GroundingFile, ProbabilitySource, ScoringBackend, SymbolProbability,
    SymbolTree, UncertainPolicy, DEFAULT_STD_THRESHOLD, DEFAULT_VARIANT_COUNT,
};
use crate::graph::{SubSystem, SymbolId, SymbolicSystem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroundingConfig {
    /// Score paraphrase variants and flag high-variance symbols.
    pub checker: bool,
    pub variant_count: usize,
    pub std_threshold: f64,
    pub policy: UncertainPolicy,
}

impl Default for GroundingConfig {
    fn default() -> Self {
        Self {
            checker: false,
            variant_count: DEFAULT_VARIANT_COUNT,
            std_threshold: DEFAULT_STD_THRESHOLD,
            policy: UncertainPolicy::Neutral,
        }
    }
}

/// A grounded value keyed by text rather than symbol id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub value: f64,
    pub source: ProbabilitySource,
    pub uncertain: bool,
    pub variant_std: Option<f64>,
}

impl Measurement {
    pub fn pruned(theta: f64) -> Self {
        Self { value: theta, source: ProbabilitySource::Pruned, uncertain: false, variant_std: None }
    }

    pub fn with_id(&self, symbol_id: SymbolId) -> SymbolProbability {
        SymbolProbability {
            symbol_id,
            value: self.value,
            source: self.source,
            uncertain: self.uncertain,
            variant_std: self.variant_std,
        }
    }

    pub fn effective(&self, policy: UncertainPolicy) -> Option<f64> {
        policy.effective(self.value, self.uncertain)
    }
}

/// Grounding state for one image. Each canonical text reaches the backend at
/// most once; later requests, from any sub-system, hit the cache.
pub struct ImageGrounder<'a> {
    image: String,
    backend: &'a dyn ScoringBackend,
    config: GroundingConfig,
    cache: HashMap<String, Measurement>,
    trace: Vec<String>,
}

impl<'a> ImageGrounder<'a> {
    pub fn new(image: impl Into<String>, backend: &'a dyn ScoringBackend, config: GroundingConfig) -> Self {
        Self { image: image.into(), backend, config, cache: HashMap::new(), trace: Vec::new() }
    }

    pub fn image(&self) -> &str {
        &self.image
    }

    /// Backend calls made so far.
    pub fn calls(&self) -> u64 {
        self.trace.len() as u64
    }

    /// Texts sent to the backend, in call order.
    pub fn trace(&self) -> &[String] {
        &self.trace
    }

    pub fn measure(&mut self, text: &str) -> Result<Measurement, GroundingError> {
        if let Some(hit) = self.cache.get(text) {
            return Ok(hit.clone());
        }
        self.trace.push(text.to_string());
        let measurement = if self.config.checker {
            let (_, probabilities) = self.backend.score_variants(&self.image, text, self.config.variant_count)?;
            if probabilities.len() < 2 {
                return Err(GroundingError::TooFewVariants(probabilities.len()));
            }
            let (mean, std) = mean_and_std(&probabilities);
            Measurement {
                value: clamp_open(mean),
                source: ProbabilitySource::VariantMean,
                uncertain: std >= self.config.std_threshold,
                variant_std: Some(std),
            }
        } else {
            Measurement {
                value: self.backend.score(&self.image, text)?,
                source: ProbabilitySource::Single,
                uncertain: false,
                variant_std: None,
            }
        };
        self.cache.insert(text.to_string(), measurement.clone());
        Ok(measurement)
    }

    /// Every premise symbol of `sub`.
    pub fn ground_symbols(&mut self, sub: &SubSystem) -> Result<BTreeMap<SymbolId, SymbolProbability>, GroundingError> {
        sub.premise_symbols().map(|s| Ok((s.id, self.measure(&s.text)?.with_id(s.id)))).collect()
    }

    /// Premise symbols of `sub`, skipping the sons of any father below the
    /// tree's threshold.
    pub fn ground_with_pruning(
        &mut self,
        sub: &SubSystem,
        tree: &SymbolTree,
    ) -> Result<BTreeMap<SymbolId, SymbolProbability>, GroundingError> {
        let mut measured = self.ground_pool_with_pruning(&sub.premise_texts(), tree)?;
        Ok(sub
            .premise_symbols()
            .map(|s| (s.id, measured.remove(&s.text).expect("pool covers premises").with_id(s.id)))
            .collect())
    }

    /// Grounds a pool of canonical texts. Fathers are scored first, top
    /// down; a father below θ assigns exactly θ to everything beneath it.
    /// Branches without pool symbols are never scored.
    pub fn ground_pool_with_pruning(
        &mut self,
        pool: &BTreeSet<String>,
        tree: &SymbolTree,
    ) -> Result<BTreeMap<String, Measurement>, GroundingError> {
        if !tree.leaves().iter().any(|leaf| pool.contains(*leaf)) {
            return Err(GroundingError::TreeMismatch("no tree leaf is a premise symbol".into()));
        }
        let mut out = BTreeMap::new();
        for root in tree.roots() {
            if Self::reaches_pool(root, tree, pool) {
                self.visit(root, tree, pool, &mut out)?;
            }
        }
        for text in pool {
            if !out.contains_key(text) {
                out.insert(text.clone(), self.measure(text)?);
            }
        }
        Ok(out)
    }

    fn visit(
        &mut self,
        father: &str,
        tree: &SymbolTree,
        pool: &BTreeSet<String>,
        out: &mut BTreeMap<String, Measurement>,
    ) -> Result<(), GroundingError> {
        let measured = self.measure(father)?;
        let pruned = measured.value < tree.theta;
        if pool.contains(father) {
            out.insert(father.to_string(), measured);
        }
        if pruned {
            let mut stack = vec![father.to_string()];
            while let Some(node) = stack.pop() {
                for son in tree.sons(&node) {
                    if pool.contains(son) {
                        out.insert(son.clone(), Measurement::pruned(tree.theta));
                    }
                    stack.push(son.clone());
                }
            }
            return Ok(());
        }
        for son in tree.sons(father) {
            if tree.is_father(son) {
                if Self::reaches_pool(son, tree, pool) {
                    self.visit(son, tree, pool, out)?;
                }
            } else if pool.contains(son) {
                out.insert(son.clone(), self.measure(son)?);
            }
        }
        Ok(())
    }

    fn reaches_pool(node: &str, tree: &SymbolTree, pool: &BTreeSet<String>) -> bool {
        pool.contains(node) || tree.leaves_under(node).iter().any(|leaf| pool.contains(*leaf))
    }
}

/// Scores every premise symbol of `sub` on one image.
pub fn ground_symbols(
    image: &str,
    sub: &SubSystem,
    backend: &dyn ScoringBackend,
    config: &GroundingConfig,
) -> Result<BTreeMap<SymbolId, SymbolProbability>, GroundingError> {
    ImageGrounder::new(image, backend, *config).ground_symbols(sub)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrunedGrounding {
    pub probabilities: BTreeMap<SymbolId, SymbolProbability>,
    /// Realized backend calls, fathers included.
    pub calls: u64,
}

pub fn ground_with_pruning(
    image: &str,
    sub: &SubSystem,
    tree: &SymbolTree,
    backend: &dyn ScoringBackend,
    config: &GroundingConfig,
) -> Result<PrunedGrounding, GroundingError> {
    let mut grounder = ImageGrounder::new(image, backend, *config);
    let probabilities = grounder.ground_with_pruning(sub, tree)?;
    Ok(PrunedGrounding { probabilities, calls: grounder.calls() })
}

/// Grounding of every premise symbol of a system over several images.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemGrounding {
    pub file: GroundingFile,
    pub measurements: BTreeMap<String, BTreeMap<String, Measurement>>,
    /// Backend calls per image.
    pub calls: BTreeMap<String, u64>,
}

impl SystemGrounding {
    pub fn total_calls(&self) -> u64 {
        self.calls.values().sum()
    }

    pub fn uncertain_count(&self) -> usize {
        self.measurements.values().flat_map(|row| row.values()).filter(|m| m.uncertain).count()
    }
}

/// Canonical texts of symbols used as premises anywhere in `system`.
pub fn premise_pool(system: &SymbolicSystem) -> BTreeSet<String> {
    system
        .rules()
        .flat_map(|r| r.premise_ids.iter())
        .filter_map(|id| system.symbol(*id))
        .map(|s| s.text.clone())
        .collect()
}

/// One image's measurements and backend call count.
type ImageResult = Result<(BTreeMap<String, Measurement>, u64), GroundingError>;

/// Grounds the system's premise pool on each image; images run in parallel.
pub fn ground_system(
    system: &SymbolicSystem,
    backend: &dyn ScoringBackend,
    images: &[String],
    tree: Option<&SymbolTree>,
    config: &GroundingConfig,
) -> Result<SystemGrounding, GroundingError> {
    let pool = premise_pool(system);
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(images.len().max(1));
    let next = Mutex::new(0usize);
    let results: Mutex<Vec<(usize, ImageResult)>> = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = {
                    let mut next = next.lock().expect("index");
                    let i = *next;
                    *next += 1;
                    i
                };
                let Some(image) = images.get(i) else { break };
                let mut grounder = ImageGrounder::new(image.clone(), backend, *config);
                let row = match tree {
                    Some(tree) => grounder.ground_pool_with_pruning(&pool, tree),
                    None => pool
                        .iter()
                        .map(|t| Ok((t.clone(), grounder.measure(t)?)))
                        .collect::<Result<BTreeMap<_, _>, GroundingError>>(),
                };
                let calls = grounder.calls();
                results.lock().expect("results").push((i, row.map(|r| (r, calls))));
            });
        }
    });
    let mut results = results.into_inner().expect("results");
    results.sort_by_key(|(i, _)| *i);

    let mut grounding =
        SystemGrounding { file: GroundingFile::new(), measurements: BTreeMap::new(), calls: BTreeMap::new() };
    for (i, result) in results {
        let (row, calls) = result?;
        let image = images[i].clone();
        grounding
            .file
            .images
            .insert(image.clone(), row.iter().map(|(t, m)| (t.clone(), m.effective(config.policy))).collect());
        grounding.calls.insert(image.clone(), calls);
        grounding.measurements.insert(image, row);
    }
    Ok(grounding)
}
