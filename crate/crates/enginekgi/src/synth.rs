//! Deterministic synthetic graphs with a planted composition.
//!
//! Entities come in three blocks. `r1` links block A to block B, `r2`
//! links B to C, and `r3` holds exactly for the composed A-to-C pairs, a
//! share of which is held out for validation and test. Filler relations
//! and uniform noise edges obscure the pattern without erasing it, so
//! the planted rule `r3 <= r1 & r2` stays minable but imperfect.

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

pub type TokenTriple = (String, String, String);

#[derive(Debug, Clone)]
pub struct SynthConfig {
    /// Entity counts for blocks A, B, C.
    pub block_entities: [usize; 3],
    /// Edge count for each of `r1` and `r2`.
    pub chain_edges: usize,
    /// Edge count for each filler relation `r4`..`r6`.
    pub filler_edges: usize,
    /// Per relation, this fraction of its clean edge count is added as
    /// uniform random edges.
    pub noise_fraction: f64,
    /// Composed `r3` pairs moved to the test split.
    pub held_out_test: usize,
    /// Composed `r3` pairs moved to the validation split.
    pub held_out_valid: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            block_entities: [34, 33, 33],
            chain_edges: 200,
            filler_edges: 80,
            noise_fraction: 0.2,
            held_out_test: 50,
            held_out_valid: 30,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SynthData {
    pub train: Vec<TokenTriple>,
    pub valid: Vec<TokenTriple>,
    pub test: Vec<TokenTriple>,
    pub concepts: Vec<(String, String)>,
}

impl SynthData {
    /// Writes `train.tsv`, `valid.tsv`, `test.tsv`, and `concepts.tsv`
    /// under `dir`.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        let write = |name: &str, lines: String| {
            let path = dir.join(name);
            fs::write(&path, lines).map_err(|e| Error::io(&path, e))
        };
        let triples = |set: &[TokenTriple]| {
            set.iter()
                .map(|(h, r, t)| format!("{h}\t{r}\t{t}\n"))
                .collect::<String>()
        };
        write("train.tsv", triples(&self.train))?;
        write("valid.tsv", triples(&self.valid))?;
        write("test.tsv", triples(&self.test))?;
        let concept_lines = self
            .concepts
            .iter()
            .map(|(e, c)| format!("{e}\t{c}\n"))
            .collect::<String>();
        write("concepts.tsv", concept_lines)
    }
}

fn sample_pairs(rng: &mut ChaCha12Rng, rows: usize, cols: usize, count: usize) -> Vec<(usize, usize)> {
    let total = rows * cols;
    let count = count.min(total);
    rand::seq::index::sample(rng, total, count)
        .into_iter()
        .map(|i| (i / cols, i % cols))
        .collect()
}

/// Generates the splits and concept map for one synthetic graph.
pub fn generate(config: &SynthConfig) -> SynthData {
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let [na, nb, nc] = config.block_entities;
    let total_entities = na + nb + nc;
    // Global entity indexing: block A is 0..na, B is na..na+nb, C is the
    // rest.
    let entity = move |idx: usize| {
        if idx < na {
            format!("a{idx}")
        } else if idx < na + nb {
            format!("b{}", idx - na)
        } else {
            format!("c{}", idx - na - nb)
        }
    };

    let mut concepts = Vec::with_capacity(total_entities);
    for idx in 0..total_entities {
        let block = if idx < na {
            "BlockA"
        } else if idx < na + nb {
            "BlockB"
        } else {
            "BlockC"
        };
        concepts.push((entity(idx), block.to_string()));
    }

    let mut edges: Vec<(&str, usize, usize)> = Vec::new();
    let r1: Vec<(usize, usize)> = sample_pairs(&mut rng, na, nb, config.chain_edges);
    for &(i, j) in &r1 {
        edges.push(("r1", i, na + j));
    }
    let r2: Vec<(usize, usize)> = sample_pairs(&mut rng, nb, nc, config.chain_edges);
    for &(j, k) in &r2 {
        edges.push(("r2", na + j, na + nb + k));
    }

    let mut b_succ: Vec<Vec<usize>> = vec![Vec::new(); nb];
    for &(j, k) in &r2 {
        b_succ[j].push(k);
    }
    let mut composed: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &(i, j) in &r1 {
        for &k in &b_succ[j] {
            composed.insert((i, na + nb + k));
        }
    }
    let mut composed: Vec<(usize, usize)> = composed.into_iter().collect();
    composed.shuffle(&mut rng);
    let held = config.held_out_test + config.held_out_valid;
    assert!(
        composed.len() > held,
        "composition produced {} pairs, need more than {held}",
        composed.len()
    );
    let test_pairs = &composed[..config.held_out_test];
    let valid_pairs = &composed[config.held_out_test..held];
    for &(i, k) in &composed[held..] {
        edges.push(("r3", i, k));
    }

    for filler in ["r4", "r5", "r6"] {
        for (h, t) in sample_pairs(&mut rng, total_entities, total_entities, config.filler_edges) {
            edges.push((filler, h, t));
        }
    }

    let mut seen: HashSet<(&str, usize, usize)> = edges.iter().copied().collect();
    let composed_set: HashSet<(usize, usize)> = composed.iter().copied().collect();
    let mut noise: Vec<(&str, usize, usize)> = Vec::new();
    for rel in ["r1", "r2", "r3", "r4", "r5", "r6"] {
        let clean = edges.iter().filter(|e| e.0 == rel).count();
        let wanted = (clean as f64 * config.noise_fraction).ceil() as usize;
        let mut added = 0;
        let mut attempts = 0;
        while added < wanted && attempts < wanted * 100 {
            attempts += 1;
            let h = rng.random_range(0..total_entities);
            let t = rng.random_range(0..total_entities);
            // Noise must not leak held-out pairs back into training.
            if rel == "r3" && composed_set.contains(&(h, t)) {
                continue;
            }
            if seen.insert((rel, h, t)) {
                noise.push((rel, h, t));
                added += 1;
            }
        }
    }
    edges.extend(noise);

    let to_triple = |(rel, h, t): (&str, usize, usize)| (entity(h), rel.to_string(), entity(t));
    SynthData {
        train: edges.into_iter().map(to_triple).collect(),
        valid: valid_pairs
            .iter()
            .map(|&(i, k)| (entity(i), "r3".to_string(), entity(k)))
            .collect(),
        test: test_pairs
            .iter()
            .map(|&(i, k)| (entity(i), "r3".to_string(), entity(k)))
            .collect(),
        concepts,
    }
}
