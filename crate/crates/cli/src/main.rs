//! `symbolact`: instantiate rule systems, ground symbols, infer, fuse,
//! evaluate, and analyze from the command line.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use symbolact::eval::{
    bottleneck_grid, confusion_pairs, coverage_stats, is_consistent, map_of_predictions, operation_count,
    top1_of_predictions, Dataset,
};
use symbolact::graph::SymbolicSystem;
use symbolact::grounding::{
    ground_system, GroundingConfig, GroundingFile, ProbabilityTable, SymbolTree, UncertainPolicy,
};
use symbolact::inference::{fuse_files, infer_all, FusionPolicy, PredictionFile};
use symbolact::instantiate::{instantiate_system, ActivitySpec, LoopConfig};
use symbolact::oracle::{Gateway, HttpConfig, HttpOracle, Oracle, ReplayCache, ReplayOracle, ScriptedTable};
use symbolact::text::canonicalize_symbol_text;

#[derive(Parser)]
#[command(name = "symbolact", version, about = "Symbolic activity reasoning over language-built rule systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a rule system for each activity by querying an oracle.
    Instantiate(InstantiateArgs),
    /// Turn a system's premise symbols into probabilities per image.
    Ground(GroundArgs),
    /// Score activities on grounded images with min/max fuzzy logic.
    Infer(InferArgs),
    /// Combine two prediction files.
    Fuse(FuseArgs),
    /// Score a prediction file against a dataset.
    Eval(EvalArgs),
    /// Coverage, confusion, bottleneck, and cost reports for a system.
    Analyze(AnalyzeArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Backend {
    Http,
    Scripted,
    Replay,
}

#[derive(clap::Args)]
struct InstantiateArgs {
    /// JSON list of {"activity", "object"} entries.
    #[arg(long)]
    activities: PathBuf,
    #[arg(long, value_enum)]
    backend: Backend,
    /// Loop configuration; defaults apply to missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    ledger: Option<PathBuf>,
    /// Response cache. Appended to by the http and scripted backends and
    /// read by the replay backend.
    #[arg(long)]
    record: Option<PathBuf>,
    /// Scripted response table (JSON lines), for the scripted backend.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Chat-completion endpoint; falls back to SYMBOLACT_ORACLE_URL.
    #[arg(long)]
    url: Option<String>,
    #[arg(long)]
    model: Option<String>,
    /// Conclusions instantiated concurrently.
    #[arg(long, default_value_t = 4)]
    workers: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(clap::Args)]
struct GroundArgs {
    #[arg(long)]
    system: PathBuf,
    /// Probability table: image -> symbol text -> {"yes", "no"} or {"p"}.
    #[arg(long)]
    images: PathBuf,
    /// Symbol tree for hierarchical pruning, or `none`.
    #[arg(long, default_value = "none")]
    tree: String,
    #[arg(long, value_enum, default_value_t = Switch::Off)]
    checker: Switch,
    #[arg(long, default_value = "neutral", value_parser = parse_policy)]
    policy: UncertainPolicy,
    /// Paraphrase variants per symbol when the checker is on.
    #[arg(long, default_value_t = symbolact::grounding::DEFAULT_VARIANT_COUNT)]
    variants: usize,
    #[arg(long, default_value_t = symbolact::grounding::DEFAULT_STD_THRESHOLD)]
    std_threshold: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct InferArgs {
    #[arg(long)]
    system: PathBuf,
    #[arg(long)]
    grounding: PathBuf,
    #[arg(long)]
    activities: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Per-rule minima and winning rules.
    #[arg(long)]
    explain: Option<PathBuf>,
    /// Known objects per image, {"image": ["object", ...]}; activities about
    /// other objects score 0.
    #[arg(long)]
    objects: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FusePolicyArg {
    Maxnorm,
    Fixed,
}

#[derive(clap::Args)]
struct FuseArgs {
    #[arg(long)]
    sys1: PathBuf,
    #[arg(long)]
    sys2: PathBuf,
    #[arg(long, value_enum, default_value_t = FusePolicyArg::Maxnorm)]
    policy: FusePolicyArg,
    #[arg(long)]
    alpha1: Option<f64>,
    #[arg(long)]
    alpha2: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Metric {
    Map,
    Top1,
}

#[derive(clap::Args)]
struct EvalArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_enum, default_value_t = Metric::Map)]
    metric: Metric,
    /// Also write the report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Report {
    Coverage,
    Confusion,
    Bottleneck,
    Cost,
}

#[derive(clap::Args)]
struct AnalyzeArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    system: PathBuf,
    #[arg(long, value_enum)]
    report: Report,
    #[arg(long)]
    out: PathBuf,
    /// Symbol tree for the cost report; pruned calls are replayed against
    /// the dataset's score tables.
    #[arg(long)]
    tree: Option<PathBuf>,
    /// Activities for the cost report; defaults to every conclusion.
    #[arg(long)]
    activities: Option<PathBuf>,
}

fn parse_policy(s: &str) -> Result<UncertainPolicy, String> {
    s.parse::<UncertainPolicy>().map_err(|e| e.to_string())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn load_system(path: &Path) -> Result<SymbolicSystem> {
    SymbolicSystem::from_json(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_activities(path: &Path) -> Result<Vec<ActivitySpec>> {
    ActivitySpec::list_from_json(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Instantiate(args) => instantiate(args),
        Command::Ground(args) => ground(args),
        Command::Infer(args) => infer(args),
        Command::Fuse(args) => fuse(args),
        Command::Eval(args) => eval(args),
        Command::Analyze(args) => analyze(args),
    }
}

fn instantiate(args: InstantiateArgs) -> Result<()> {
    let activities = load_activities(&args.activities)?;
    let config = match &args.config {
        Some(path) => LoopConfig::from_json(&read(path)?).with_context(|| format!("parsing {}", path.display()))?,
        None => LoopConfig::default(),
    };
    let cache = match &args.record {
        Some(path) => Some(Arc::new(ReplayCache::open(path)?)),
        None => None,
    };
    let backend: Box<dyn Oracle> = match args.backend {
        Backend::Scripted => {
            let Some(table) = &args.table else { bail!("--backend scripted needs --table") };
            Box::new(ScriptedTable::load(table)?)
        }
        Backend::Replay => {
            let Some(cache) = &cache else { bail!("--backend replay needs --record <cache file>") };
            Box::new(ReplayOracle(cache.clone()))
        }
        Backend::Http => {
            let Some(model) = &args.model else { bail!("--backend http needs --model") };
            Box::new(HttpOracle::new(HttpConfig::from_env(args.url.clone(), model.clone())?))
        }
    };
    let oracle: Box<dyn Oracle> = match (&cache, args.backend) {
        (Some(cache), Backend::Http | Backend::Scripted) => Box::new(Gateway::recording(backend, cache.clone())),
        _ => backend,
    };
    let run = instantiate_system(&activities, oracle.as_ref(), &config, args.workers)?;
    write(&args.out, &run.system.to_json())?;
    if let Some(path) = &args.ledger {
        write_json(path, &run.ledgers)?;
    }
    for ledger in &run.ledgers {
        eprintln!(
            "{}: {} queries ({} predicted), {} rules",
            ledger.conclusion,
            ledger.total,
            ledger.predicted_query_count,
            ledger.rule_premise_counts.len()
        );
    }
    if !run.failures.is_empty() {
        for failure in &run.failures {
            eprintln!("failed: {}: {}", failure.activity, failure.error);
        }
        bail!("{} of {} activities failed", run.failures.len(), activities.len());
    }
    Ok(())
}

fn ground(args: GroundArgs) -> Result<()> {
    let system = load_system(&args.system)?;
    let table = ProbabilityTable::load(&args.images)?;
    let tree = match args.tree.as_str() {
        "none" => None,
        path => Some(SymbolTree::load(Path::new(path))?),
    };
    let config = GroundingConfig {
        checker: args.checker == Switch::On,
        variant_count: args.variants,
        std_threshold: args.std_threshold,
        policy: args.policy,
    };
    let images: Vec<String> = table.images().map(String::from).collect();
    let grounding = ground_system(&system, &table, &images, tree.as_ref(), &config)?;
    write(&args.out, &grounding.file.to_json())?;
    eprintln!(
        "{} images, {} backend calls, {} uncertain measurements",
        images.len(),
        grounding.total_calls(),
        grounding.uncertain_count()
    );
    Ok(())
}

fn infer(args: InferArgs) -> Result<()> {
    let system = load_system(&args.system)?;
    let grounding = GroundingFile::load(&args.grounding)?;
    let activities = load_activities(&args.activities)?;
    let objects = match &args.objects {
        Some(path) => {
            let raw: BTreeMap<String, Vec<String>> =
                serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
            let mut objects = BTreeMap::new();
            for (image, names) in raw {
                let names = names.iter().map(|n| canonicalize_symbol_text(n)).collect::<Result<BTreeSet<_>, _>>()?;
                objects.insert(image, names);
            }
            Some(objects)
        }
        None => None,
    };
    let (predictions, explanations) = infer_all(&system, &grounding, &activities, objects.as_ref())?;
    write(&args.out, &predictions.to_json())?;
    if let Some(path) = &args.explain {
        write(path, &explanations.to_json())?;
    }
    Ok(())
}

fn fuse(args: FuseArgs) -> Result<()> {
    let policy = match (args.policy, args.alpha1, args.alpha2) {
        (FusePolicyArg::Maxnorm, None, None) => FusionPolicy::MaxNorm,
        (FusePolicyArg::Maxnorm, _, _) => bail!("--alpha1/--alpha2 apply only to --policy fixed"),
        (FusePolicyArg::Fixed, Some(a1), Some(a2)) => FusionPolicy::fixed(a1, a2)?,
        (FusePolicyArg::Fixed, _, _) => bail!("--policy fixed needs --alpha1 and --alpha2"),
    };
    let sys1 = PredictionFile::load(&args.sys1)?;
    let sys2 = PredictionFile::load(&args.sys2)?;
    write(&args.out, &fuse_files(&sys1, &sys2, &policy)?.to_json())
}

fn eval(args: EvalArgs) -> Result<()> {
    let predictions = PredictionFile::load(&args.pred)?;
    let dataset = Dataset::load(&args.dataset)?;
    let mut report = map_of_predictions(&predictions, &dataset)?;
    if args.metric == Metric::Top1 {
        report.top1 = Some(top1_of_predictions(&predictions, &dataset)?);
    }
    print!("{}", report.render());
    if let Some(path) = &args.out {
        write_json(path, &report)?;
    }
    Ok(())
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let dataset = Dataset::load(&args.dataset)?;
    let system = load_system(&args.system)?;
    let rendered = match args.report {
        Report::Coverage => {
            let report = coverage_stats(&dataset, &system)?;
            write_json(&args.out, &report)?;
            report.render()
        }
        Report::Confusion => {
            let report = confusion_pairs(&dataset, &system)?;
            write_json(&args.out, &report)?;
            report.render()
        }
        Report::Bottleneck => {
            let report = bottleneck_grid(&dataset, &system)?;
            if !is_consistent(&dataset, &system) {
                eprintln!("note: labels contradict the completed rules, so perfect/perfect can stay below 100");
            }
            write_json(&args.out, &report)?;
            report.render()
        }
        Report::Cost => {
            let activities = match &args.activities {
                Some(path) => load_activities(path)?,
                None => system.conclusions().map(|s| ActivitySpec::new(s.text.clone(), None)).collect(),
            };
            let report = match &args.tree {
                Some(path) => {
                    let tree = SymbolTree::load(path)?;
                    let table = dataset.probability_table()?;
                    let images: Vec<String> = table.images().map(String::from).collect();
                    operation_count(&system, &activities, Some((&tree, &table, &images)))?
                }
                None => operation_count(&system, &activities, None)?,
            };
            write_json(&args.out, &report)?;
            report.render()
        }
    };
    print!("{rendered}");
    Ok(())
}
