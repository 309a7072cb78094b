//! The closed loop: train embeddings with the current rules, learn new
//! rules from the trained embeddings, merge, repeat until no rule is new
//! or the iteration cap is hit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::embedding::{train, train_from, EmbeddingStore, TrainConfig};
use crate::error::{Error, Result};
use crate::eval::{evaluate, EvalConfig, KnownTriples};
use crate::kg::{KnowledgeGraph, Triple};
use crate::learner::{build_concept_signatures, learn_rules, LearnerConfig};
use crate::paths::{enumerate_paths, PathConfig};
use crate::rules::RuleSet;

/// Loop-level knobs plus the per-phase configurations.
#[derive(Debug, Clone)]
pub struct LoopConfig {
    pub max_iterations: usize,
    /// Keep the previous iteration's embeddings as the next starting
    /// point instead of re-initializing.
    pub warm_start: bool,
    /// With rule learning off the loop is a single training pass.
    pub rule_learning: bool,
    /// Cap on validation queries per snapshot (two per triple). The
    /// subsample is drawn once and reused so snapshots are comparable.
    pub valid_queries: usize,
    pub train: TrainConfig,
    pub paths: PathConfig,
    pub learner: LearnerConfig,
    pub eval: EvalConfig,
}

impl Default for LoopConfig {
    fn default() -> Self {
        LoopConfig {
            max_iterations: 10,
            warm_start: false,
            rule_learning: true,
            valid_queries: 2000,
            train: TrainConfig::default(),
            paths: PathConfig::default(),
            learner: LearnerConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

/// Per-iteration record: rule counts, filtered validation metrics on the
/// subsample, and phase timings.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationSnapshot {
    pub iteration: usize,
    pub rules_total: usize,
    pub rules_new: usize,
    pub mrr: f64,
    pub hits1: f64,
    pub hits3: f64,
    pub hits10: f64,
    pub mr: f64,
    pub train_seconds: f64,
    pub learn_seconds: f64,
}

/// Final state of a loop run.
#[derive(Debug)]
pub struct EngineOutcome {
    pub embeddings: EmbeddingStore,
    pub rules: RuleSet,
    pub snapshots: Vec<IterationSnapshot>,
    /// True when the loop stopped because an iteration learned nothing
    /// new, false when it ran into the iteration cap.
    pub converged: bool,
}

fn subsample(valid: &[Triple], max_triples: usize, seed: u64) -> Vec<Triple> {
    if valid.len() <= max_triples {
        return valid.to_vec();
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_add(0x2545_f491_4f6c_dd1d));
    let mut picked: Vec<usize> =
        rand::seq::index::sample(&mut rng, valid.len(), max_triples).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| valid[i]).collect()
}

/// Runs the loop from a seed rule set.
///
/// Iteration 0 is the seed set itself. Each iteration trains embeddings
/// against the current rules (from scratch unless `warm_start`), scores
/// the validation subsample, learns rules from the trained embeddings,
/// and merges them in. The loop stops after an iteration that adds
/// nothing, or at `max_iterations`. Rule counts never decrease: merging
/// is a union that keeps the higher-confidence rule on collisions.
pub fn run(
    kg: &KnowledgeGraph,
    valid: &[Triple],
    seeds: RuleSet,
    config: &LoopConfig,
) -> Result<EngineOutcome> {
    if config.max_iterations == 0 {
        return Err(Error::invalid("max_iterations must be at least 1"));
    }
    let paths = enumerate_paths(kg, &config.paths);
    let signatures = build_concept_signatures(kg);
    let train_triples: Vec<Triple> = kg.base_triples().copied().collect();
    let known = KnownTriples::from_splits(&[&train_triples, valid]);
    let valid_sub = subsample(valid, config.valid_queries.div_ceil(2), config.train.seed);

    let mut rules = seeds;
    let mut embeddings: Option<EmbeddingStore> = None;
    let mut snapshots = Vec::new();
    let mut converged = false;

    for iteration in 1..=config.max_iterations {
        let start = Instant::now();
        let previous = if config.warm_start { embeddings.take() } else { None };
        let (emb, _trace) = match previous {
            Some(store) => train_from(store, kg, &paths, &rules, &config.train),
            None => train(kg, &paths, &rules, &config.train),
        }
        .map_err(|e| Error::phase("train", iteration, e))?;
        let train_seconds = start.elapsed().as_secs_f64();

        let metrics = evaluate(kg, &valid_sub, &emb, &rules, &paths, &known, &config.eval)
            .map_err(|e| Error::phase("validate", iteration, e))?;

        let (rules_new, learn_seconds) = if config.rule_learning {
            let start = Instant::now();
            let learned = learn_rules(kg, &paths, &emb, &signatures, &rules, &config.learner)
                .map_err(|e| Error::phase("learn", iteration, e))?;
            (rules.merge(learned.rules), start.elapsed().as_secs_f64())
        } else {
            (0, 0.0)
        };

        snapshots.push(IterationSnapshot {
            iteration,
            rules_total: rules.len(),
            rules_new,
            mrr: metrics.filtered.mrr,
            hits1: metrics.filtered.hits1,
            hits3: metrics.filtered.hits3,
            hits10: metrics.filtered.hits10,
            mr: metrics.filtered.mr,
            train_seconds,
            learn_seconds,
        });
        embeddings = Some(emb);

        if rules_new == 0 {
            converged = true;
            break;
        }
    }

    Ok(EngineOutcome {
        embeddings: embeddings.expect("at least one iteration ran"),
        rules,
        snapshots,
        converged,
    })
}

/// One tab-separated line per iteration:
/// `iter rules_total rules_new MRR Hits1 Hits3 Hits10 MR train_s learn_s`.
pub fn write_snapshots(snapshots: &[IterationSnapshot], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for s in snapshots {
        writeln!(
            out,
            "{}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.3}\t{:.3}",
            s.iteration,
            s.rules_total,
            s.rules_new,
            s.mrr,
            s.hits1,
            s.hits3,
            s.hits10,
            s.mr,
            s.train_seconds,
            s.learn_seconds
        )
        .expect("writing to string cannot fail");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
