use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use wic_forge::config::PipelineConfig;
use wic_forge::dict::{parse_dictionary, parse_dictionary_jsonl, write_dictionary_jsonl, ParseMode, SnippetMode};
use wic_forge::eval::{eval_wic, eval_wsd, eval_wsi, render_csv, render_table, EvalReport, Task};
use wic_forge::expansion::{
    ChatCompletionsBackend, Expander, GeneratedSentence, GenerationCache, GenerationStatus, LemmaMatcher, LlmBackend,
    MatchKind, OfflineBackend, DEDUP_NORMALIZATION,
};
use wic_forge::forge::{
    build_snippet_dataset, build_wic_pairs, build_wsd_dataset, cap_examples_per_sense, import_external_wsd, summarize,
    SenseExample, WicPair,
};
use wic_forge::jsonl::{read_jsonl, to_jsonl};
use wic_forge::pipeline::{
    expand_dictionary, meta_path, predict_wic, resolution_inputs, wsi_cases, InputHash, StageMeta, WicPrediction,
};
use wic_forge::resolver::{
    calibrate_threshold, resolve_batch, Aggregation, OracleScorer, OverlapScorer, RandomScorer, RemoteScorer,
    Resolution, ScorerBackend, SupportIndex, ThresholdConfig, NEW_SENSE,
};
use wic_forge::splits::{holdout_validation, split, SplitInputs, SplitManifest, SplitType};
use wic_forge::text::config_digest;

/// Dictionary-to-WiC dataset pipeline and WiC-based sense resolution.
#[derive(Parser)]
#[command(name = "wic-forge", version)]
struct Cli {
    /// Pipeline configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Lemma matching policy.
    #[arg(long, global = true)]
    policy: Option<MatchKind>,
    /// Scoring service root URL; selects the remote scorer.
    #[arg(long, global = true)]
    scorer_url: Option<String>,
    /// Per-sense score aggregation: max or mean.
    #[arg(long, global = true)]
    aggregation: Option<Aggregation>,
    /// Fixes the WSI threshold multiplier instead of searching the grid.
    #[arg(long, global = true)]
    threshold_multiplier: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a dictionary into entry JSONL.
    Parse(ParseArgs),
    /// Expand usage snippets into sentences through the generation cache.
    Expand(ExpandArgs),
    /// Build a sense-labeled sentence dataset.
    ForgeWsd(ForgeWsdArgs),
    /// Forge balanced WiC pairs from sentence datasets.
    ForgeWic(ForgeWicArgs),
    /// Split WiC pairs into train, validation and test.
    Split(SplitArgs),
    /// Disambiguate targets against support sentences.
    ResolveWsd(ResolveArgs),
    /// Disambiguate targets or flag them as new senses.
    ResolveWsi(ResolveArgs),
    /// Score a run.
    Eval(EvalArgs),
    /// Render evaluation reports as a table and CSV.
    Report(ReportArgs),
}

#[derive(Args)]
struct ParseArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Fail on the first malformed line instead of skipping it.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct ExpandArgs {
    /// Entry JSONL from `parse`.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Generation cache file; defaults to the configured cache path.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Never call the LLM; uncached generations fail.
    #[arg(long)]
    offline: bool,
    /// Only expand lemmas listed in this file (one per line).
    #[arg(long)]
    lemmas: Option<PathBuf>,
    #[arg(long, value_enum)]
    snippets: Option<SnippetArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SnippetArg {
    CoreOnly,
    CoreAndSpecial,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum WsdSource {
    /// Expansion output.
    Generations,
    /// Raw dictionary snippets from entry JSONL.
    Snippets,
    /// Sense-annotated corpus records.
    Corpus,
}

#[derive(Args)]
struct ForgeWsdArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "generations")]
    source: WsdSource,
    /// Inventory id; defaults to `sskj` for dictionary sources and `elexis` for corpora.
    #[arg(long)]
    inventory: Option<String>,
    /// Keep going when corpus records are rejected.
    #[arg(long)]
    allow_rejects: bool,
}

#[derive(Args)]
struct ForgeWicArgs {
    /// Sentence datasets (WSD JSONL); may repeat.
    #[arg(long = "in", required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    partners: Option<usize>,
    #[arg(long)]
    max_pairs_per_sense: Option<usize>,
    /// 0 disables the cap.
    #[arg(long)]
    max_examples_per_sense: Option<usize>,
}

#[derive(Args)]
struct SplitArgs {
    /// Pairs forged from dictionary sentences.
    #[arg(long)]
    sskj: PathBuf,
    /// Pairs forged from the annotated corpus.
    #[arg(long)]
    elexis: PathBuf,
    #[arg(long = "type")]
    split_type: SplitType,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    validation_fraction: Option<f64>,
    #[arg(long)]
    lemma_disjoint_validation: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ScorerKind {
    Oracle,
    Random,
    Overlap,
    Remote,
}

#[derive(Args)]
struct ResolveArgs {
    /// Sentences to resolve (WSD JSONL).
    #[arg(long)]
    targets: PathBuf,
    /// Sense-labeled sentences to compare against (WSD JSONL).
    #[arg(long)]
    support: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Split manifest; targets and support are then taken from its test and
    /// train pairs.
    #[arg(long, requires = "pairs")]
    manifest: Option<PathBuf>,
    /// WiC pair files the manifest refers to; may repeat.
    #[arg(long)]
    pairs: Vec<PathBuf>,
    /// Validation pairs for threshold calibration when no manifest is given.
    #[arg(long)]
    validation: Option<PathBuf>,
    #[arg(long, value_enum)]
    scorer: Option<ScorerKind>,
    /// Also disambiguate targets whose gold sense has no support sentence
    /// (such targets cannot be resolved correctly).
    #[arg(long)]
    include_unknown_senses: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, value_enum)]
    task: TaskArg,
    /// Gold data: WiC pairs for `wic`, WSD JSONL otherwise.
    #[arg(long)]
    gold: PathBuf,
    /// Resolutions, or WiC predictions with `id` and `label`.
    #[arg(long)]
    predictions: Option<PathBuf>,
    /// Training sentences (WSD JSONL) for the most-frequent-sense baseline.
    #[arg(long)]
    train: Option<PathBuf>,
    /// Restricts WiC gold pairs to the manifest's test ids.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Scores WiC pairs directly when no predictions are given.
    #[arg(long, value_enum)]
    scorer: Option<ScorerKind>,
    #[arg(long)]
    split_type: Option<SplitType>,
    /// Dataset description shown in reports.
    #[arg(long, default_value = "")]
    desc: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Wic,
    Wsd,
    Wsi,
}

#[derive(Args)]
struct ReportArgs {
    /// Evaluation reports (JSON); may repeat.
    #[arg(long = "in", required = true)]
    inputs: Vec<PathBuf>,
    /// CSV output.
    #[arg(long)]
    out: PathBuf,
    /// Also write the text table here.
    #[arg(long)]
    table: Option<PathBuf>,
}

/// Failure reported as JSON on stderr.
struct CliError {
    kind: &'static str,
    message: String,
    details: Value,
    exit: u8,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self {
            kind: "invalid_input",
            message: message.into(),
            details: Value::Null,
            exit: 2,
        }
    }

    fn runtime(kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
            details: Value::Null,
            exit: 1,
        }
    }

    fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }
}

impl<E: std::fmt::Display> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::input(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> CliResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::runtime("io", format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::runtime("io", format!("{}: {e}", path.display())))
}

fn hashes(paths: &[&Path]) -> CliResult<Vec<InputHash>> {
    paths
        .iter()
        .map(|p| InputHash::of_file(p).map_err(|e| CliError::input(format!("{}: {e}", p.display()))))
        .collect()
}

fn write_meta(out: &Path, command: &str, settings: &impl Serialize, inputs: &[&Path], stats: Value) -> CliResult {
    let settings = serde_json::to_value(settings).expect("settings serialize");
    let meta = StageMeta {
        command: command.to_string(),
        config_digest: config_digest(&settings),
        settings,
        inputs: hashes(inputs)?,
        stats,
    };
    write_text(&meta_path(out), &(serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n"))
}

struct Context {
    config: PipelineConfig,
    scorer_url: Option<String>,
    threshold_multiplier: Option<f64>,
}

impl Context {
    fn matcher(&self) -> LemmaMatcher {
        LemmaMatcher::from_policy(self.config.matching)
    }

    fn scorer(&self, kind: Option<ScorerKind>, gold: &[SenseExample]) -> CliResult<(ScorerKind, Box<dyn ScorerBackend>)> {
        let kind = kind.unwrap_or(ScorerKind::Remote);
        let scorer: Box<dyn ScorerBackend> = match kind {
            ScorerKind::Oracle => Box::new(OracleScorer::from_examples(gold)),
            ScorerKind::Random => Box::new(RandomScorer::new(self.config.seed)),
            ScorerKind::Overlap => Box::new(OverlapScorer),
            ScorerKind::Remote => {
                let mut cfg = self.config.scorer.clone();
                if let Some(url) = &self.scorer_url {
                    cfg.url = url.clone();
                }
                let remote = RemoteScorer::new(cfg);
                match remote.health() {
                    Ok(h) => log::info!("scorer status {:?}, model {:?}", h.status, h.model),
                    Err(e) => log::warn!("scorer health check failed: {e}"),
                }
                Box::new(remote)
            }
        };
        Ok((kind, scorer))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let body = json!({"error": e.kind, "message": e.message, "details": e.details});
            eprintln!("{body}");
            ExitCode::from(e.exit)
        }
    }
}

fn run(cli: Cli) -> CliResult {
    let mut config = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(kind) = cli.policy {
        config.matching.kind = kind;
    }
    if let Some(agg) = cli.aggregation {
        config.resolve.aggregation = agg;
    }
    let ctx = Context {
        config,
        scorer_url: cli.scorer_url,
        threshold_multiplier: cli.threshold_multiplier,
    };
    match cli.command {
        Command::Parse(a) => cmd_parse(&ctx, a),
        Command::Expand(a) => cmd_expand(&ctx, a),
        Command::ForgeWsd(a) => cmd_forge_wsd(&ctx, a),
        Command::ForgeWic(a) => cmd_forge_wic(&ctx, a),
        Command::Split(a) => cmd_split(&ctx, a),
        Command::ResolveWsd(a) => cmd_resolve(&ctx, a, false),
        Command::ResolveWsi(a) => cmd_resolve(&ctx, a, true),
        Command::Eval(a) => cmd_eval(&ctx, a),
        Command::Report(a) => cmd_report(a),
    }
}

fn cmd_parse(_ctx: &Context, a: ParseArgs) -> CliResult {
    let text = read_text(&a.input)?;
    let mode = if a.strict { ParseMode::Strict } else { ParseMode::Lenient };
    let is_jsonl = a.input.extension().is_some_and(|e| e == "jsonl");
    let parsed = if is_jsonl {
        parse_dictionary_jsonl(&text, mode)
    } else {
        parse_dictionary(&text, mode)
    }
    .map_err(|e| CliError::input(e.to_string()).with_details(serde_json::to_value(&e).unwrap_or(Value::Null)))?;
    write_text(&a.out, &write_dictionary_jsonl(&parsed.entries))?;
    let senses: usize = parsed.entries.iter().map(|e| e.senses.len()).sum();
    write_meta(
        &a.out,
        "parse",
        &json!({"strict": a.strict, "format": if is_jsonl { "jsonl" } else { "sskj-lite" }}),
        &[&a.input],
        json!({"entries": parsed.entries.len(), "senses": senses, "errors": parsed.errors}),
    )
}

fn cmd_expand(ctx: &Context, a: ExpandArgs) -> CliResult {
    let text = read_text(&a.input)?;
    let mut entries = parse_dictionary_jsonl(&text, ParseMode::Strict)?.entries;
    if let Some(list) = &a.lemmas {
        let allow: HashSet<String> = read_text(list)?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(String::from)
            .collect();
        entries = wic_forge::dict::restrict_to_lemmas(&entries, &allow);
    }
    let cache_path = a
        .cache
        .clone()
        .or_else(|| ctx.config.paths.cache.clone())
        .ok_or_else(|| CliError::input("no generation cache: pass --cache or set paths.cache"))?;
    let cache = GenerationCache::open(&cache_path).map_err(|e| CliError::runtime("io", format!("{}: {e}", cache_path.display())))?;
    let backend: Box<dyn LlmBackend> = if a.offline {
        Box::new(OfflineBackend)
    } else {
        Box::new(ChatCompletionsBackend::new(&ctx.config.endpoint))
    };
    let mode = match a.snippets {
        Some(SnippetArg::CoreOnly) => SnippetMode::CoreOnly,
        Some(SnippetArg::CoreAndSpecial) => SnippetMode::CoreAndSpecial,
        None => ctx.config.expansion.snippet_mode,
    };
    let settings = ctx.config.expansion.settings();
    let matcher = ctx.matcher();
    let expander = Expander::new(backend.as_ref(), &cache)
        .with_retry(ctx.config.retry.clone())
        .with_max_in_flight(ctx.config.expansion.max_in_flight);
    let generations = expand_dictionary(&entries, &settings, mode, &expander, &matcher);
    write_text(&a.out, &to_jsonl(&generations))?;

    let count = |s: GenerationStatus| generations.iter().filter(|g| g.status == s).count();
    let failed = generations.iter().filter(|g| g.error.is_some()).count();
    write_meta(
        &a.out,
        "expand",
        &json!({
            "expansion": settings,
            "snippet_mode": mode,
            "matching": matcher.policy(),
            "dedup_normalization": DEDUP_NORMALIZATION,
            "dedup_scope": "lemma+sense",
        }),
        &[&a.input],
        json!({
            "generations": generations.len(),
            "kept": count(GenerationStatus::Kept),
            "dropped_lemma_missing": count(GenerationStatus::DroppedLemmaMissing),
            "dropped_duplicate": count(GenerationStatus::DroppedDuplicate),
            "dropped_empty": count(GenerationStatus::DroppedEmpty),
            "failed": failed,
            "matcher_warning": matcher.warning(),
        }),
    )?;
    if failed > 0 && a.offline {
        log::warn!("{failed} generations were not cached");
    }
    Ok(())
}

fn cmd_forge_wsd(ctx: &Context, a: ForgeWsdArgs) -> CliResult {
    let text = read_text(&a.input)?;
    let matcher = ctx.matcher();
    let default_inventory = if a.source == WsdSource::Corpus { "elexis" } else { "sskj" };
    let inventory = a.inventory.clone().unwrap_or_else(|| default_inventory.to_string());
    let (examples, stats) = match a.source {
        WsdSource::Generations => {
            let generations: Vec<GeneratedSentence> = wic_forge::jsonl::parse_jsonl(&text, &a.input.display().to_string())?;
            let ds = build_wsd_dataset(&generations, &inventory, &matcher);
            let stats = json!({"examples": ds.examples.len(), "excluded": ds.excluded});
            (ds.examples, stats)
        }
        WsdSource::Snippets => {
            let entries = parse_dictionary_jsonl(&text, ParseMode::Strict)?.entries;
            let snippets = wic_forge::dict::extract_snippets(&entries, ctx.config.expansion.snippet_mode);
            let ds = build_snippet_dataset(&snippets, &inventory, &matcher);
            let stats = json!({"examples": ds.examples.len(), "excluded": ds.excluded});
            (ds.examples, stats)
        }
        WsdSource::Corpus => {
            let outcome = import_external_wsd(&text, &inventory, &matcher);
            if !outcome.rejected.is_empty() && !a.allow_rejects {
                return Err(CliError::input(format!("{} corpus records rejected", outcome.rejected.len()))
                    .with_details(serde_json::to_value(&outcome.rejected).unwrap_or(Value::Null)));
            }
            let stats = json!({"examples": outcome.examples.len(), "rejected": outcome.rejected});
            (outcome.examples, stats)
        }
    };
    write_text(&a.out, &to_jsonl(&examples))?;
    write_meta(
        &a.out,
        "forge-wsd",
        &json!({"source": a.source, "inventory": inventory, "matching": matcher.policy()}),
        &[&a.input],
        stats,
    )
}

fn read_examples(paths: &[&Path]) -> CliResult<Vec<SenseExample>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for p in paths {
        for e in read_jsonl::<SenseExample>(p)? {
            if seen.insert(e.id.clone()) {
                out.push(e);
            }
        }
    }
    Ok(out)
}

fn cmd_forge_wic(ctx: &Context, a: ForgeWicArgs) -> CliResult {
    let mut cfg = ctx.config.forge_config();
    if let Some(n) = a.partners {
        cfg.partners_per_anchor = n;
    }
    if let Some(n) = a.max_pairs_per_sense {
        cfg.max_pairs_per_sense = n;
    }
    if let Some(n) = a.max_examples_per_sense {
        cfg.max_examples_per_sense = n;
    }
    let inputs: Vec<&Path> = a.inputs.iter().map(PathBuf::as_path).collect();
    let mut examples = read_examples(&inputs)?;
    if cfg.max_examples_per_sense > 0 {
        examples = cap_examples_per_sense(&examples, cfg.max_examples_per_sense);
    }
    let out = build_wic_pairs(&examples, &cfg)?;
    write_text(&a.out, &to_jsonl(&out.pairs))?;
    write_meta(
        &a.out,
        "forge-wic",
        &cfg,
        &inputs,
        json!({"summary": summarize(&out.pairs), "skipped": out.skipped}),
    )
}

fn cmd_split(ctx: &Context, a: SplitArgs) -> CliResult {
    let sskj: Vec<WicPair> = read_jsonl(&a.sskj)?;
    let elexis: Vec<WicPair> = read_jsonl(&a.elexis)?;
    let inputs = SplitInputs::new(&sskj, &elexis);
    let seed = ctx.config.seed;
    let mut manifest = split(a.split_type, &inputs, seed)?;
    let mut holdout = ctx.config.holdout_config();
    if let Some(f) = a.validation_fraction {
        holdout.fraction = f;
    }
    holdout.lemma_disjoint |= a.lemma_disjoint_validation;
    if holdout.fraction > 0.0 {
        manifest = holdout_validation(&manifest, &inputs, &holdout)?;
    }
    write_text(&a.out, &(serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n"))?;
    write_meta(
        &a.out,
        "split",
        &json!({"type": a.split_type, "seed": seed, "holdout": holdout}),
        &[&a.sskj, &a.elexis],
        json!({
            "train": manifest.train.len(),
            "validation": manifest.validation.len(),
            "test": manifest.test.len(),
        }),
    )
}

fn cmd_resolve(ctx: &Context, a: ResolveArgs, induce: bool) -> CliResult {
    let targets_file = read_examples(&[&a.targets])?;
    let support_file = read_examples(&[&a.support])?;
    let mut inputs: Vec<&Path> = vec![&a.targets, &a.support];
    let aggregation = ctx.config.resolve.aggregation;

    let (targets, support, validation_pairs, validation_targets) = match &a.manifest {
        Some(manifest_path) => {
            let manifest: SplitManifest = serde_json::from_str(&read_text(manifest_path)?)?;
            let mut pairs = Vec::new();
            for p in &a.pairs {
                pairs.extend(read_jsonl::<WicPair>(p)?);
            }
            inputs.push(manifest_path);
            inputs.extend(a.pairs.iter().map(PathBuf::as_path));
            let all: Vec<SenseExample> = targets_file.iter().chain(&support_file).cloned().collect();
            let sel = resolution_inputs(&manifest, &pairs, &all)?;
            (sel.targets, sel.support, sel.validation_pairs, sel.validation_targets)
        }
        None => {
            let validation = match &a.validation {
                Some(p) => {
                    inputs.push(p);
                    read_jsonl::<WicPair>(p)?
                }
                None => Vec::new(),
            };
            (targets_file.clone(), support_file.clone(), validation, Vec::new())
        }
    };

    let gold: Vec<SenseExample> = targets
        .iter()
        .chain(&support)
        .chain(&validation_targets)
        .cloned()
        .collect();
    let (kind, scorer) = ctx.scorer(a.scorer.or(ctx.scorer_url.as_ref().map(|_| ScorerKind::Remote)), &gold)?;
    let index = SupportIndex::new(&support);
    let mut unknown_sense = Vec::new();
    let targets: Vec<SenseExample> = if induce || a.include_unknown_senses {
        targets
    } else {
        let (known, unknown): (Vec<_>, Vec<_>) = targets
            .into_iter()
            .partition(|t| index.senses(&t.lemma).any(|s| s == t.sense_id));
        unknown_sense = unknown.into_iter().map(|t| t.id).collect();
        known
    };

    let mut calibration = Value::Null;
    let threshold = if induce {
        let multiplier = ctx.threshold_multiplier.or(ctx.config.resolve.multiplier);
        let grid = match multiplier {
            Some(c) => vec![c],
            None => ctx.config.resolve.grid.clone(),
        };
        let cases = wsi_cases(&validation_targets, &index);
        let cal = calibrate_threshold(scorer.as_ref(), &validation_pairs, &grid, &cases, aggregation)
            .map_err(|e| CliError::input(e.to_string()))?;
        calibration = json!({
            "validation_pairs": validation_pairs.len(),
            "validation_targets": cases.len(),
            "validation_mean": cal.config.validation_mean,
            "multiplier": cal.config.multiplier,
            "threshold": cal.config.threshold(),
            "grid": cal.grid,
        });
        Some(cal.config)
    } else {
        None
    };

    let outcome = resolve_batch(&targets, &index, scorer.as_ref(), aggregation, threshold.as_ref())
        .map_err(|e| CliError::runtime("scorer", e.to_string()))?;
    let out_text = to_jsonl(&outcome.resolutions);
    write_text(&a.out, &out_text)?;
    let new_senses = outcome.resolutions.iter().filter(|r| r.predicted.is_new()).count();
    write_meta(
        &a.out,
        if induce { "resolve-wsi" } else { "resolve-wsd" },
        &json!({
            "scorer": kind,
            "seed": ctx.config.seed,
            "aggregation": aggregation,
            "threshold": threshold.map(|t: ThresholdConfig| t),
            "new_sense_rule": induce.then_some(format!("{NEW_SENSE} when the highest aggregated score is below multiplier * validation mean")),
        }),
        &inputs,
        json!({
            "targets": targets.len(),
            "support": support.len(),
            "resolved": outcome.resolutions.len(),
            "new_sense": new_senses,
            "skipped": outcome.skipped,
            "skipped_unknown_sense": unknown_sense,
            "calibration": calibration,
        }),
    )
}

fn upstream_digest(path: &Path) -> Option<String> {
    let meta: StageMeta = serde_json::from_str(&fs::read_to_string(meta_path(path)).ok()?).ok()?;
    Some(meta.config_digest)
}

fn cmd_eval(ctx: &Context, a: EvalArgs) -> CliResult {
    let task = match a.task {
        TaskArg::Wic => Task::Wic,
        TaskArg::Wsd => Task::Wsd,
        TaskArg::Wsi => Task::Wsi,
    };
    let mut inputs: Vec<&Path> = vec![&a.gold];
    let report = match task {
        Task::Wic => {
            let mut gold: Vec<WicPair> = read_jsonl(&a.gold)?;
            if let Some(m) = &a.manifest {
                let manifest: SplitManifest = serde_json::from_str(&read_text(m)?)?;
                let test: HashSet<&String> = manifest.test.iter().collect();
                gold.retain(|p| test.contains(&p.id));
                inputs.push(m);
            }
            let predictions: Vec<WicPrediction> = match &a.predictions {
                Some(p) => {
                    inputs.push(p);
                    read_jsonl(p)?
                }
                None => {
                    let (_, scorer) = ctx.scorer(a.scorer, &[])?;
                    predict_wic(&gold, scorer.as_ref(), 0.5).map_err(|e| CliError::runtime("scorer", e.to_string()))?
                }
            };
            let map: HashMap<String, u8> = predictions.into_iter().map(|p| (p.id, p.label)).collect();
            eval_wic(&map, &gold)?
        }
        Task::Wsd | Task::Wsi => {
            let gold: Vec<SenseExample> = read_jsonl(&a.gold)?;
            let pred_path = a
                .predictions
                .as_ref()
                .ok_or_else(|| CliError::input("--predictions is required for wsd and wsi"))?;
            inputs.push(pred_path);
            let resolutions: Vec<Resolution> = read_jsonl(pred_path)?;
            if task == Task::Wsd {
                let train_path = a
                    .train
                    .as_ref()
                    .ok_or_else(|| CliError::input("--train is required for wsd"))?;
                inputs.push(train_path);
                let train: Vec<SenseExample> = read_jsonl(train_path)?;
                eval_wsd(&resolutions, &gold, &train)?
            } else {
                eval_wsi(&resolutions, &gold)?
            }
        }
    };
    let upstream = a.predictions.as_deref().and_then(upstream_digest);
    let digest = config_digest(&json!({
        "task": task,
        "split_type": a.split_type,
        "seed": ctx.config.seed,
        "upstream": upstream,
    }));
    let report: EvalReport = report.with_context(a.split_type, &a.desc, &digest);
    write_text(&a.out, &(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"))?;
    write_meta(
        &a.out,
        "eval",
        &json!({"task": task, "split_type": a.split_type, "desc": a.desc, "upstream": upstream}),
        &inputs,
        json!({"accuracy": report.accuracy, "baseline": report.baseline_accuracy, "n": report.n_instances}),
    )
}

fn cmd_report(a: ReportArgs) -> CliResult {
    let mut reports = Vec::new();
    for p in &a.inputs {
        let r: EvalReport = serde_json::from_str(&read_text(p)?).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?;
        reports.push(r);
    }
    let table = render_table(&reports);
    write_text(&a.out, &render_csv(&reports))?;
    if let Some(t) = &a.table {
        write_text(t, &table)?;
    }
    print!("{table}");
    Ok(())
}
