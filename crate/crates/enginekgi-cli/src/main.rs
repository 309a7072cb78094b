//! Command-line front end: one subcommand per pipeline stage plus the
//! closed-loop `run`. Exit codes: 0 success, 1 usage error, 2 data error,
//! 3 numeric failure.

mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use enginekgi::{
    build_concept_signatures, build_graph, enumerate_paths, evaluate, explain, learn_rules,
    load_concept_pairs, load_embeddings, load_path_index, load_triples, mine_seed_rules,
    read_rules, render_explanation, render_metrics, run, save_embeddings, save_path_index, train,
    train_from, write_diagnostics, write_rules, write_snapshots, Error, IterationSnapshot,
    KnowledgeGraph, KnownTriples, PathIndex, RuleSet, Triple,
};

use crate::config::RunConfig;

#[derive(Parser)]
#[command(
    name = "enginekgi",
    version,
    about = "Closed-loop link prediction: learned closed-path rules and translational embeddings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate and score relation paths between linked entity pairs.
    ExtractPaths(Overrides),
    /// Mine the seed closed-path rules from the training graph.
    MineSeedRules(Overrides),
    /// Train embeddings against a fixed rule set.
    Train(Overrides),
    /// Propose new rules from trained embeddings and concept signatures.
    LearnRules(Overrides),
    /// Rank held-out triples and write the metrics report.
    Evaluate(Overrides),
    /// Run the full closed loop: train, validate, learn, merge, repeat.
    Run(Overrides),
}

/// Every config key as an optional flag; set flags override the config
/// file, which overrides defaults.
#[derive(Args, Debug, Default)]
struct Overrides {
    /// Config file with `key = value` lines and `#` comments.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Training triples (TSV: head, relation, tail).
    #[arg(long, value_name = "FILE")]
    train: Option<PathBuf>,
    /// Validation triples.
    #[arg(long, value_name = "FILE")]
    valid: Option<PathBuf>,
    /// Held-out test triples.
    #[arg(long, value_name = "FILE")]
    test: Option<PathBuf>,
    /// Entity-concept pairs (TSV: entity, concept).
    #[arg(long, value_name = "FILE")]
    concepts: Option<PathBuf>,
    /// Rule file from mine-seed-rules or learn-rules (mined when absent).
    #[arg(long, value_name = "FILE")]
    rules: Option<PathBuf>,
    /// Embedding file from train or run.
    #[arg(long, value_name = "FILE")]
    embeddings: Option<PathBuf>,
    /// Path index from extract-paths (computed when absent).
    #[arg(long, value_name = "FILE")]
    path_index: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Master random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses all cores, 1 forces deterministic mode.
    #[arg(long)]
    threads: Option<usize>,
    /// Embedding dimension.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Negative samples per positive.
    #[arg(long)]
    negatives: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Triple-loss margin.
    #[arg(long)]
    gamma1: Option<f64>,
    /// Path-loss margin.
    #[arg(long)]
    gamma2: Option<f64>,
    /// Relation-pair-loss margin.
    #[arg(long)]
    gamma3: Option<f64>,
    /// Path-loss weight; 0 disables path terms.
    #[arg(long)]
    alpha1: Option<f64>,
    /// Relation-pair-loss weight; 0 disables relation-pair terms.
    #[arg(long)]
    alpha2: Option<f64>,
    /// Energy norm order: 1 or 2.
    #[arg(long)]
    norm: Option<u32>,
    /// Co-occurrence weight in the coarse rule score.
    #[arg(long)]
    beta: Option<f64>,
    /// Coarse-score threshold for rule candidates.
    #[arg(long)]
    st: Option<f64>,
    /// Standard-confidence threshold for accepted rules.
    #[arg(long)]
    min_sc: Option<f64>,
    /// Head-coverage threshold for accepted rules.
    #[arg(long)]
    min_hc: Option<f64>,
    /// Minimum distinct supporting pairs for accepted rules.
    #[arg(long)]
    min_support: Option<u64>,
    /// Paths below this reliability are dropped from the index.
    #[arg(long)]
    min_reliability: Option<f64>,
    #[arg(long)]
    max_paths_per_pair: Option<usize>,
    /// Closed-loop iteration cap.
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Continue each iteration from the previous store.
    #[arg(long, value_name = "BOOL")]
    warm_start: Option<bool>,
    /// Validation queries scored per loop iteration.
    #[arg(long)]
    valid_subsample: Option<usize>,
    /// Run on-demand path scoring for top-K candidates at evaluation.
    #[arg(long, value_name = "BOOL")]
    on_demand_paths: Option<bool>,
    #[arg(long)]
    on_demand_top_k: Option<usize>,
    /// Explain one evaluation query (`head,relation,tail`); repeatable.
    #[arg(long, value_name = "H,R,T")]
    explain: Vec<String>,
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) {
        let files = [
            (&self.train, &mut cfg.train),
            (&self.valid, &mut cfg.valid),
            (&self.test, &mut cfg.test),
            (&self.concepts, &mut cfg.concepts),
            (&self.rules, &mut cfg.rules),
            (&self.embeddings, &mut cfg.embeddings),
            (&self.path_index, &mut cfg.path_index),
        ];
        for (flag, slot) in files {
            if let Some(p) = flag {
                *slot = Some(p.clone());
            }
        }
        if let Some(p) = &self.out {
            cfg.out = p.clone();
        }
        macro_rules! scalar {
            ($($field:ident),+ $(,)?) => {
                $(if let Some(v) = self.$field { cfg.$field = v; })+
            };
        }
        scalar!(
            seed, threads, d, batch_size, negatives, epochs, learning_rate, gamma1, gamma2,
            gamma3, alpha1, alpha2, norm, beta, st, min_sc, min_hc, min_support, min_reliability,
            max_paths_per_pair, max_iterations, warm_start, valid_subsample, on_demand_paths,
            on_demand_top_k,
        );
        cfg.explain.extend(self.explain.iter().cloned());
    }
}

enum CmdError {
    Usage(String),
    Engine(Error),
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        CmdError::Engine(e)
    }
}

type CmdResult<T> = std::result::Result<T, CmdError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match &cli.command {
        Command::ExtractPaths(o) => with_config(o, cmd_extract_paths),
        Command::MineSeedRules(o) => with_config(o, cmd_mine_seed_rules),
        Command::Train(o) => with_config(o, cmd_train),
        Command::LearnRules(o) => with_config(o, cmd_learn_rules),
        Command::Evaluate(o) => with_config(o, cmd_evaluate),
        Command::Run(o) => with_config(o, cmd_run),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CmdError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CmdError::Engine(e)) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            match e.root() {
                Error::NonFinite { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

/// Resolves the configuration, sets up threads and the output directory,
/// echoes the effective config, then runs the command body.
fn with_config(overrides: &Overrides, body: fn(&RunConfig) -> CmdResult<()>) -> CmdResult<()> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &overrides.config {
        cfg.apply_file(path)?;
    }
    overrides.apply(&mut cfg);
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    }
    fs::create_dir_all(&cfg.out).map_err(|e| Error::Io {
        path: cfg.out.clone(),
        source: e,
    })?;
    write_text(&cfg.out.join("config.txt"), &cfg.echo())?;
    body(&cfg)
}

fn write_text(path: &Path, text: &str) -> CmdResult<()> {
    fs::write(path, text).map_err(|e| {
        CmdError::Engine(Error::Io {
            path: path.into(),
            source: e,
        })
    })
}

fn require<'a>(value: &'a Option<PathBuf>, key: &str) -> CmdResult<&'a Path> {
    value.as_deref().ok_or_else(|| {
        CmdError::Usage(format!(
            "--{key} (or config key `{key}`) is required for this command",
            key = key.replace('_', "-")
        ))
    })
}

fn load_graph(cfg: &RunConfig) -> CmdResult<KnowledgeGraph> {
    let train = require(&cfg.train, "train")?;
    let triples = load_triples(train)?;
    let concepts = match &cfg.concepts {
        Some(path) => load_concept_pairs(path)?,
        None => Vec::new(),
    };
    Ok(build_graph(&triples, &concepts, true)?)
}

fn load_split(kg: &KnowledgeGraph, path: &Path) -> CmdResult<Vec<Triple>> {
    Ok(kg.resolve_triples(&load_triples(path)?)?)
}

fn obtain_paths(cfg: &RunConfig, kg: &KnowledgeGraph) -> CmdResult<PathIndex> {
    match &cfg.path_index {
        Some(path) => Ok(load_path_index(path, kg.vocab())?),
        None => Ok(enumerate_paths(kg, &cfg.path_config())),
    }
}

fn obtain_rules(cfg: &RunConfig, kg: &KnowledgeGraph) -> CmdResult<RuleSet> {
    match &cfg.rules {
        Some(path) => Ok(read_rules(path, kg.vocab())?),
        None => Ok(mine_seed_rules(kg, &cfg.rule_config())?),
    }
}

/// Known triples for filtered ranking: train plus whichever held-out
/// splits the config names.
fn known_triples(kg: &KnowledgeGraph, extra: &[&[Triple]]) -> CmdResult<KnownTriples> {
    let train: Vec<Triple> = kg.base_triples().copied().collect();
    let mut splits: Vec<&[Triple]> = vec![&train];
    splits.extend_from_slice(extra);
    Ok(KnownTriples::from_splits(&splits))
}

fn cmd_extract_paths(cfg: &RunConfig) -> CmdResult<()> {
    let kg = load_graph(cfg)?;
    let index = enumerate_paths(&kg, &cfg.path_config());
    let out = cfg.out.join("paths.tsv");
    save_path_index(&index, kg.vocab(), &out)?;
    println!(
        "indexed paths for {} linked pairs → {}",
        index.iter_sorted().count(),
        out.display()
    );
    Ok(())
}

fn cmd_mine_seed_rules(cfg: &RunConfig) -> CmdResult<()> {
    let kg = load_graph(cfg)?;
    let rules = mine_seed_rules(&kg, &cfg.rule_config())?;
    let out = cfg.out.join("rules.tsv");
    write_rules(&rules, kg.vocab(), &out)?;
    println!("mined {} seed rules → {}", rules.len(), out.display());
    Ok(())
}

fn cmd_train(cfg: &RunConfig) -> CmdResult<()> {
    let kg = load_graph(cfg)?;
    let paths = obtain_paths(cfg, &kg)?;
    let rules = obtain_rules(cfg, &kg)?;
    let train_config = cfg.train_config()?;
    let (emb, trace) = match &cfg.embeddings {
        Some(path) => {
            let start = load_embeddings(path, kg.vocab())?;
            train_from(start, &kg, &paths, &rules, &train_config)?
        }
        None => train(&kg, &paths, &rules, &train_config)?,
    };
    let out = cfg.out.join("embeddings.tsv");
    save_embeddings(&emb, kg.vocab(), &out)?;
    let mut loss = String::new();
    for (epoch, value) in trace.iter().enumerate() {
        writeln!(loss, "{}\t{value:.6}", epoch + 1).unwrap();
    }
    write_text(&cfg.out.join("loss.tsv"), &loss)?;
    println!(
        "trained {} epochs, mean loss {:.4} → {:.4}; embeddings → {}",
        trace.len(),
        trace.first().copied().unwrap_or(0.0),
        trace.last().copied().unwrap_or(0.0),
        out.display()
    );
    Ok(())
}

fn cmd_learn_rules(cfg: &RunConfig) -> CmdResult<()> {
    let kg = load_graph(cfg)?;
    let emb = load_embeddings(require(&cfg.embeddings, "embeddings")?, kg.vocab())?;
    let paths = obtain_paths(cfg, &kg)?;
    let mut rules = obtain_rules(cfg, &kg)?;
    let signatures = build_concept_signatures(&kg);
    let learned = learn_rules(&kg, &paths, &emb, &signatures, &rules, &cfg.learner_config()?)?;
    write_diagnostics(
        &learned.diagnostics,
        kg.vocab(),
        cfg.out.join("diagnostics.tsv"),
    )?;
    write_rules(
        &learned.rules,
        kg.vocab(),
        cfg.out.join("learned_rules.tsv"),
    )?;
    let new = rules.merge(learned.rules);
    let out = cfg.out.join("rules.tsv");
    write_rules(&rules, kg.vocab(), &out)?;
    println!(
        "learned {new} new rules ({} total) → {}",
        rules.len(),
        out.display()
    );
    Ok(())
}

fn cmd_evaluate(cfg: &RunConfig) -> CmdResult<()> {
    let kg = load_graph(cfg)?;
    let emb = load_embeddings(require(&cfg.embeddings, "embeddings")?, kg.vocab())?;
    let test = load_split(&kg, require(&cfg.test, "test")?)?;
    let valid = match &cfg.valid {
        Some(path) => load_split(&kg, path)?,
        None => Vec::new(),
    };
    let paths = obtain_paths(cfg, &kg)?;
    let rules = obtain_rules(cfg, &kg)?;
    let known = known_triples(&kg, &[&valid, &test])?;
    let eval_config = cfg.eval_config()?;
    let metrics = evaluate(&kg, &test, &emb, &rules, &paths, &known, &eval_config)?;
    let report = render_metrics(&metrics);
    write_text(&cfg.out.join("metrics.txt"), &report)?;
    print!("{report}");
    explain_queries(cfg, &kg, &emb, &rules, &paths)?;
    Ok(())
}

fn explain_queries(
    cfg: &RunConfig,
    kg: &KnowledgeGraph,
    emb: &enginekgi::EmbeddingStore,
    rules: &RuleSet,
    paths: &PathIndex,
) -> CmdResult<()> {
    if cfg.explain.is_empty() {
        return Ok(());
    }
    let eval_config = cfg.eval_config()?;
    let mut blocks = String::new();
    for query in &cfg.explain {
        let parts: Vec<&str> = query.split(',').collect();
        let [h, r, t] = parts.as_slice() else {
            return Err(CmdError::Usage(format!(
                "--explain expects `head,relation,tail`, got {query:?}"
            )));
        };
        let head = kg.vocab().require_entity(h.trim())?;
        let relation = kg.vocab().require_relation(r.trim())?;
        let tail = kg.vocab().require_entity(t.trim())?;
        let explanation = explain(emb, rules, paths, head, relation, tail, &eval_config);
        let block = render_explanation(&explanation, kg.vocab());
        print!("\n{block}");
        blocks.push_str(&block);
        blocks.push('\n');
    }
    write_text(&cfg.out.join("explanations.txt"), &blocks)?;
    Ok(())
}

fn cmd_run(cfg: &RunConfig) -> CmdResult<()> {
    let kg = load_graph(cfg)?;
    let valid = load_split(&kg, require(&cfg.valid, "valid")?)?;
    let seeds = obtain_rules(cfg, &kg)?;
    let loop_config = cfg.loop_config()?;
    let outcome = run(&kg, &valid, seeds, &loop_config)?;

    // Deterministic mode trades wall-clock timings for byte-identical
    // snapshot files across runs.
    let snapshots: Vec<IterationSnapshot> = if cfg.threads == 1 {
        outcome
            .snapshots
            .iter()
            .map(|s| IterationSnapshot {
                train_seconds: 0.0,
                learn_seconds: 0.0,
                ..s.clone()
            })
            .collect()
    } else {
        outcome.snapshots.clone()
    };
    write_snapshots(&snapshots, cfg.out.join("snapshots.tsv"))?;
    save_embeddings(&outcome.embeddings, kg.vocab(), cfg.out.join("embeddings.tsv"))?;
    write_rules(&outcome.rules, kg.vocab(), cfg.out.join("rules.tsv"))?;
    for s in &outcome.snapshots {
        println!(
            "iteration {}: {} rules ({} new), filtered MRR {:.4}, Hits@10 {:.4}",
            s.iteration, s.rules_total, s.rules_new, s.mrr, s.hits10
        );
    }
    println!(
        "{} after {} iterations",
        if outcome.converged {
            "converged"
        } else {
            "stopped at the iteration cap"
        },
        outcome.snapshots.len()
    );

    // Final report on the test split when present, otherwise on the
    // validation split.
    let test = match &cfg.test {
        Some(path) => Some(load_split(&kg, path)?),
        None => None,
    };
    let (report_split, label) = match &test {
        Some(t) => (t.as_slice(), "test"),
        None => (valid.as_slice(), "valid"),
    };
    let known = known_triples(&kg, &[&valid, test.as_deref().unwrap_or(&[])])?;
    let paths = obtain_paths(cfg, &kg)?;
    let eval_config = cfg.eval_config()?;
    let metrics = evaluate(
        &kg,
        report_split,
        &outcome.embeddings,
        &outcome.rules,
        &paths,
        &known,
        &eval_config,
    )?;
    let report = render_metrics(&metrics);
    write_text(&cfg.out.join("metrics.txt"), &report)?;
    println!("\nfinal metrics on the {label} split:");
    print!("{report}");
    explain_queries(cfg, &kg, &outcome.embeddings, &outcome.rules, &paths)?;
    Ok(())
}
