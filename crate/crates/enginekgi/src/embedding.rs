//! Translational embeddings with a joint loss over triples, rule-composed
//! relation paths, and rule-associated relation pairs.
//!
//! Entities and base relations live in the same d-dimensional space; an
//! inverse relation is represented by negating its base vector, never
//! stored. A fact (h, r, t) is scored by ‖h + r − t‖, a path by the
//! reliability-weighted sum of its per-path translation errors, and an
//! associated relation pair by ‖r1 − r2‖.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kg::{base_index, direction_sign, is_base, EntityId, KnowledgeGraph, RelationId, Triple, Vocab};
use crate::paths::{PathIndex, RelationPath};
use crate::rules::RuleSet;

/// Vector norm used by all energies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    L1,
    L2,
}

impl Norm {
    pub fn from_order(order: u32) -> Result<Norm> {
        match order {
            1 => Ok(Norm::L1),
            2 => Ok(Norm::L2),
            other => Err(Error::invalid(format!(
                "norm order must be 1 or 2, got {other}"
            ))),
        }
    }

    pub fn order(self) -> u32 {
        match self {
            Norm::L1 => 1,
            Norm::L2 => 2,
        }
    }

    pub fn eval(self, u: &[f64]) -> f64 {
        match self {
            Norm::L1 => u.iter().map(|x| x.abs()).sum(),
            Norm::L2 => u.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }

    /// Subgradient of ‖u‖ at u (zero where the norm is non-differentiable).
    pub fn subgrad(self, u: &[f64]) -> Vec<f64> {
        match self {
            Norm::L1 => u
                .iter()
                .map(|&x| {
                    if x > 0.0 {
                        1.0
                    } else if x < 0.0 {
                        -1.0
                    } else {
                        0.0
                    }
                })
                .collect(),
            Norm::L2 => {
                let n = self.eval(u);
                if n == 0.0 {
                    vec![0.0; u.len()]
                } else {
                    u.iter().map(|&x| x / n).collect()
                }
            }
        }
    }
}

/// Dense entity and base-relation vectors of a shared dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    entities: Vec<f64>,
    relations: Vec<f64>,
    dim: usize,
    num_entities: usize,
    num_base_relations: usize,
}

impl EmbeddingStore {
    pub fn zeros(num_entities: usize, num_base_relations: usize, dim: usize) -> Self {
        EmbeddingStore {
            entities: vec![0.0; num_entities * dim],
            relations: vec![0.0; num_base_relations * dim],
            dim,
            num_entities,
            num_base_relations,
        }
    }

    /// Samples every component uniformly from [−6/√d, 6/√d], then projects
    /// all rows onto the unit sphere.
    pub fn init(num_entities: usize, num_base_relations: usize, dim: usize, seed: u64) -> Self {
        let mut store = Self::zeros(num_entities, num_base_relations, dim);
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let bound = 6.0 / (dim as f64).sqrt();
        for x in store.entities.iter_mut().chain(store.relations.iter_mut()) {
            *x = rng.random_range(-bound..bound);
        }
        for i in 0..num_entities {
            normalize(&mut store.entities[i * dim..(i + 1) * dim]);
        }
        for i in 0..num_base_relations {
            normalize(&mut store.relations[i * dim..(i + 1) * dim]);
        }
        store
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_entities(&self) -> usize {
        self.num_entities
    }

    pub fn num_base_relations(&self) -> usize {
        self.num_base_relations
    }

    pub fn entity(&self, id: EntityId) -> &[f64] {
        let i = id as usize * self.dim;
        &self.entities[i..i + self.dim]
    }

    pub fn entity_mut(&mut self, id: EntityId) -> &mut [f64] {
        let i = id as usize * self.dim;
        &mut self.entities[i..i + self.dim]
    }

    /// Base-relation row by base index (relation id >> 1).
    pub fn relation(&self, base_idx: usize) -> &[f64] {
        let i = base_idx * self.dim;
        &self.relations[i..i + self.dim]
    }

    pub fn relation_mut(&mut self, base_idx: usize) -> &mut [f64] {
        let i = base_idx * self.dim;
        &mut self.relations[i..i + self.dim]
    }

    /// Vector of any relation id; inverse ids yield the negated base row.
    pub fn relation_vector(&self, rel: RelationId) -> Vec<f64> {
        let sign = direction_sign(rel);
        self.relation(base_index(rel)).iter().map(|&x| sign * x).collect()
    }

    /// ‖h + r − t‖ looked up by ids; inverse relation ids are negated.
    pub fn triple_energy(&self, h: EntityId, rel: RelationId, t: EntityId, norm: Norm) -> f64 {
        let u = self.displacement(h, &[(base_index(rel), direction_sign(rel))], t);
        norm.eval(&u)
    }

    /// h + Σ sign·relation − t for a signed relation combination.
    fn displacement(&self, h: EntityId, components: &[(usize, f64)], t: EntityId) -> Vec<f64> {
        let mut u: Vec<f64> = self.entity(h).to_vec();
        for &(idx, sign) in components {
            add_scaled(&mut u, self.relation(idx), sign);
        }
        let tv = self.entity(t);
        for (ui, ti) in u.iter_mut().zip(tv) {
            *ui -= ti;
        }
        u
    }
}

fn add_scaled(out: &mut [f64], v: &[f64], scale: f64) {
    for (o, x) in out.iter_mut().zip(v) {
        *o += scale * x;
    }
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}

/// ‖h + r − t‖ on raw vectors.
pub fn energy_triple(h: &[f64], r: &[f64], t: &[f64], norm: Norm) -> f64 {
    let u: Vec<f64> = h
        .iter()
        .zip(r)
        .zip(t)
        .map(|((&hi, &ri), &ti)| hi + ri - ti)
        .collect();
    norm.eval(&u)
}

/// ‖r1 − r2‖ on raw vectors.
pub fn energy_relpair(r1: &[f64], r2: &[f64], norm: Norm) -> f64 {
    let u: Vec<f64> = r1.iter().zip(r2).map(|(&a, &b)| a - b).collect();
    norm.eval(&u)
}

/// Replaces a two-hop path by the head of the best matching rule
/// (maximal sc, then smallest head id); anything else passes through.
pub fn compose_path(path: RelationPath, rules: &RuleSet) -> RelationPath {
    if let [r1, r2] = *path.rels() {
        if let Some(head) = rules.compose_head(r1, r2) {
            return RelationPath::single(head);
        }
    }
    path
}

/// Signed base-relation components of a path after rule composition.
pub fn path_components(path: &RelationPath, rules: &RuleSet) -> Vec<(usize, f64)> {
    compose_path(path.clone(), rules)
        .rels()
        .iter()
        .map(|&r| (base_index(r), direction_sign(r)))
        .collect()
}

/// Embedding of a path: rule composition first, then the sum of the
/// (sign-adjusted) relation vectors along what remains.
pub fn path_embedding(path: &RelationPath, emb: &EmbeddingStore, rules: &RuleSet) -> Vec<f64> {
    let mut v = vec![0.0; emb.dim()];
    for (idx, sign) in path_components(path, rules) {
        add_scaled(&mut v, emb.relation(idx), sign);
    }
    v
}

/// Reliability-weighted translation error of a path set between two
/// entities: Σ_i w_i ‖h + p_i − t‖ with w_i the normalized reliabilities.
pub fn energy_pathset(
    emb: &EmbeddingStore,
    rules: &RuleSet,
    h: EntityId,
    t: EntityId,
    paths: &[(RelationPath, f64)],
    norm: Norm,
) -> Result<f64> {
    let terms = path_terms(paths, rules)?;
    Ok(pathset_energy_from_terms(emb, h, t, &terms, norm))
}

/// A composed path with its normalized weight.
#[derive(Debug, Clone, PartialEq)]
pub struct PathTerm {
    pub components: Vec<(usize, f64)>,
    pub weight: f64,
}

/// Composes each path and normalizes reliabilities into weights.
pub fn path_terms(paths: &[(RelationPath, f64)], rules: &RuleSet) -> Result<Vec<PathTerm>> {
    if paths.is_empty() {
        return Err(Error::invalid("path set is empty".to_string()));
    }
    let total: f64 = paths.iter().map(|(_, r)| r).sum();
    if !(total > 0.0) {
        return Err(Error::invalid(format!(
            "path reliabilities must be positive, sum was {total}"
        )));
    }
    Ok(paths
        .iter()
        .map(|(p, r)| PathTerm {
            components: path_components(p, rules),
            weight: r / total,
        })
        .collect())
}

fn pathset_energy_from_terms(
    emb: &EmbeddingStore,
    h: EntityId,
    t: EntityId,
    terms: &[PathTerm],
    norm: Norm,
) -> f64 {
    terms
        .iter()
        .map(|term| term.weight * norm.eval(&emb.displacement(h, &term.components, t)))
        .sum()
}

/// Positive and negative relation pools per base relation, derived from
/// base-bodied length-1 rules.
#[derive(Debug, Clone, Default)]
pub struct RelationAssociation {
    positives: Vec<Vec<usize>>,
    negative_pool: Vec<Vec<usize>>,
}

impl RelationAssociation {
    pub fn from_rules(rules: &RuleSet, num_base_relations: usize) -> Self {
        let mut positives = vec![Vec::new(); num_base_relations];
        let mut negative_pool = vec![Vec::new(); num_base_relations];
        for (idx, (pos, pool)) in positives.iter_mut().zip(&mut negative_pool).enumerate() {
            let rel = (idx as RelationId) << 1;
            if let Some(assoc) = rules.associated(rel) {
                pos.extend(assoc.iter().map(|&r| base_index(r)));
                pool.extend((0..num_base_relations).filter(|i| *i != idx && !pos.contains(i)));
            }
        }
        RelationAssociation {
            positives,
            negative_pool,
        }
    }

    pub fn positives(&self, base_idx: usize) -> &[usize] {
        &self.positives[base_idx]
    }

    pub fn negative_pool(&self, base_idx: usize) -> &[usize] {
        &self.negative_pool[base_idx]
    }
}

/// Training hyperparameters.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub d: usize,
    pub batch_size: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub norm: Norm,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            d: 100,
            batch_size: 1024,
            negatives: 10,
            epochs: 1000,
            learning_rate: 0.01,
            gamma1: 1.0,
            gamma2: 1.0,
            gamma3: 1.0,
            alpha1: 1.0,
            alpha2: 1.0,
            norm: Norm::L1,
            seed: 42,
            parallel: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.batch_size == 0 || self.negatives == 0 || self.epochs == 0 {
            return Err(Error::invalid(
                "d, batch_size, negatives, and epochs must be positive".to_string(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning_rate must be positive".to_string()));
        }
        for (name, v) in [
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("gamma3", self.gamma3),
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be non-negative")));
            }
        }
        Ok(())
    }
}

const MAX_RESAMPLE: usize = 100;

/// Corrupts head or tail (fair coin) with a uniform entity, resampling
/// while the corrupted triple exists in the graph.
pub fn sample_negatives(
    triple: Triple,
    kg: &KnowledgeGraph,
    k: usize,
    rng: &mut impl Rng,
) -> Vec<Triple> {
    let n = kg.num_entities() as u32;
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let corrupt_head = rng.random_bool(0.5);
        let mut candidate = triple;
        for attempt in 0..=MAX_RESAMPLE {
            let e = if attempt < MAX_RESAMPLE {
                rng.random_range(0..n)
            } else {
                // Overwhelmingly-true corruption space: take the first
                // entity that yields an unseen triple, if one exists.
                match (0..n).find(|&e| {
                    let c = corrupted(triple, corrupt_head, e);
                    !kg.contains(c.head, c.relation, c.tail)
                }) {
                    Some(e) => e,
                    None => candidate.head,
                }
            };
            candidate = corrupted(triple, corrupt_head, e);
            if !kg.contains(candidate.head, candidate.relation, candidate.tail) {
                break;
            }
        }
        out.push(candidate);
    }
    out
}

fn corrupted(triple: Triple, corrupt_head: bool, e: EntityId) -> Triple {
    if corrupt_head {
        Triple {
            head: e,
            ..triple
        }
    } else {
        Triple {
            tail: e,
            ..triple
        }
    }
}

/// Everything needed to score one positive triple: its filtered negatives,
/// the composed path terms of its endpoint pair (empty when the pair has
/// no indexed paths), and associated-relation positives with sampled
/// negative relations.
#[derive(Debug, Clone)]
pub struct TrainingExample {
    pub positive: Triple,
    pub negatives: Vec<Triple>,
    pub paths: Vec<PathTerm>,
    pub rel_terms: Vec<(usize, Vec<usize>)>,
}

pub fn build_example(
    kg: &KnowledgeGraph,
    paths: &PathIndex,
    rules: &RuleSet,
    assoc: &RelationAssociation,
    positive: Triple,
    config: &TrainConfig,
    rng: &mut impl Rng,
) -> TrainingExample {
    let negatives = sample_negatives(positive, kg, config.negatives, rng);
    let path_set = if config.alpha1 > 0.0 {
        paths
            .get(positive.head, positive.tail)
            .map(|p| path_terms(p, rules).expect("indexed path sets are non-empty"))
            .unwrap_or_default()
    } else {
        Vec::new()
    };
    let mut rel_terms = Vec::new();
    if config.alpha2 > 0.0 {
        let r_idx = base_index(positive.relation);
        let pool = assoc.negative_pool(r_idx);
        for &s in assoc.positives(r_idx) {
            let amount = config.negatives.min(pool.len());
            if amount == 0 {
                continue;
            }
            let negs: Vec<usize> = rand::seq::index::sample(rng, pool.len(), amount)
                .into_iter()
                .map(|i| pool[i])
                .collect();
            rel_terms.push((s, negs));
        }
    }
    TrainingExample {
        positive,
        negatives,
        paths: path_set,
        rel_terms,
    }
}

/// Sparse parameter gradient, keyed by entity id and base-relation index.
#[derive(Debug, Clone, Default)]
pub struct SparseGrad {
    pub entities: BTreeMap<EntityId, Vec<f64>>,
    pub relations: BTreeMap<usize, Vec<f64>>,
}

impl SparseGrad {
    pub fn is_empty(&self) -> bool {
        self.entities.is_empty() && self.relations.is_empty()
    }

    fn add_entity(&mut self, id: EntityId, scale: f64, g: &[f64], dim: usize) {
        let row = self.entities.entry(id).or_insert_with(|| vec![0.0; dim]);
        add_scaled(row, g, scale);
    }

    fn add_relation(&mut self, idx: usize, scale: f64, g: &[f64], dim: usize) {
        let row = self.relations.entry(idx).or_insert_with(|| vec![0.0; dim]);
        add_scaled(row, g, scale);
    }

    fn merge(&mut self, other: SparseGrad) {
        for (id, g) in other.entities {
            match self.entities.get_mut(&id) {
                Some(row) => add_scaled(row, &g, 1.0),
                None => {
                    self.entities.insert(id, g);
                }
            }
        }
        for (idx, g) in other.relations {
            match self.relations.get_mut(&idx) {
                Some(row) => add_scaled(row, &g, 1.0),
                None => {
                    self.relations.insert(idx, g);
                }
            }
        }
    }
}

/// Loss of one example: the sum of hinge terms
/// [γ1 + E_triple(pos) − E_triple(neg)]₊ over negatives,
/// α1·[γ2 + E_path(pos pair) − E_path(corrupted pair)]₊ when paths exist,
/// and α2·[γ3 + ‖r − s‖ − ‖r − s′‖]₊ over associated relation pairs.
pub fn example_loss(emb: &EmbeddingStore, ex: &TrainingExample, config: &TrainConfig) -> f64 {
    example_loss_and_grad(emb, ex, config).0
}

pub fn example_loss_and_grad(
    emb: &EmbeddingStore,
    ex: &TrainingExample,
    config: &TrainConfig,
) -> (f64, SparseGrad) {
    let d = emb.dim();
    let norm = config.norm;
    let mut loss = 0.0;
    let mut grad = SparseGrad::default();

    let pos = ex.positive;
    let rel_comp = [(base_index(pos.relation), direction_sign(pos.relation))];
    let u_pos = emb.displacement(pos.head, &rel_comp, pos.tail);
    let e_pos = norm.eval(&u_pos);
    let g_pos = norm.subgrad(&u_pos);

    // A NaN margin (overflowed energies cancelling) must poison the loss
    // so divergence is reported, not read as an inactive hinge.
    let poison = |loss: &mut f64, margin: f64| {
        if margin.is_nan() {
            *loss = f64::NAN;
        }
    };

    for neg in &ex.negatives {
        let u_neg = emb.displacement(neg.head, &rel_comp, neg.tail);
        let margin = config.gamma1 + e_pos - norm.eval(&u_neg);
        poison(&mut loss, margin);
        if margin > 0.0 {
            loss += margin;
            let g_neg = norm.subgrad(&u_neg);
            accumulate_displacement(&mut grad, pos.head, &rel_comp, pos.tail, 1.0, &g_pos, d);
            accumulate_displacement(&mut grad, neg.head, &rel_comp, neg.tail, -1.0, &g_neg, d);
        }
    }

    if !ex.paths.is_empty() && config.alpha1 > 0.0 {
        let pos_terms: Vec<(Vec<f64>, f64)> = ex
            .paths
            .iter()
            .map(|term| {
                let u = emb.displacement(pos.head, &term.components, pos.tail);
                let e = norm.eval(&u);
                (u, e)
            })
            .collect();
        let ep_pos: f64 = ex
            .paths
            .iter()
            .zip(&pos_terms)
            .map(|(term, (_, e))| term.weight * e)
            .sum();
        for neg in &ex.negatives {
            let neg_terms: Vec<(Vec<f64>, f64)> = ex
                .paths
                .iter()
                .map(|term| {
                    let u = emb.displacement(neg.head, &term.components, neg.tail);
                    let e = norm.eval(&u);
                    (u, e)
                })
                .collect();
            let ep_neg: f64 = ex
                .paths
                .iter()
                .zip(&neg_terms)
                .map(|(term, (_, e))| term.weight * e)
                .sum();
            let margin = config.gamma2 + ep_pos - ep_neg;
            poison(&mut loss, margin);
            if margin > 0.0 {
                loss += config.alpha1 * margin;
                for (term, (u, _)) in ex.paths.iter().zip(&pos_terms) {
                    let g = norm.subgrad(u);
                    let scale = config.alpha1 * term.weight;
                    accumulate_displacement(
                        &mut grad,
                        pos.head,
                        &term.components,
                        pos.tail,
                        scale,
                        &g,
                        d,
                    );
                }
                for (term, (u, _)) in ex.paths.iter().zip(&neg_terms) {
                    let g = norm.subgrad(u);
                    let scale = -config.alpha1 * term.weight;
                    accumulate_displacement(
                        &mut grad,
                        neg.head,
                        &term.components,
                        neg.tail,
                        scale,
                        &g,
                        d,
                    );
                }
            }
        }
    }

    if config.alpha2 > 0.0 && !ex.rel_terms.is_empty() {
        let r_idx = base_index(pos.relation);
        let r_vec = emb.relation(r_idx);
        for (s_idx, neg_idxs) in &ex.rel_terms {
            let u_s: Vec<f64> = r_vec
                .iter()
                .zip(emb.relation(*s_idx))
                .map(|(&a, &b)| a - b)
                .collect();
            let e_s = norm.eval(&u_s);
            let g_s = norm.subgrad(&u_s);
            for &n_idx in neg_idxs {
                let u_n: Vec<f64> = r_vec
                    .iter()
                    .zip(emb.relation(n_idx))
                    .map(|(&a, &b)| a - b)
                    .collect();
                let margin = config.gamma3 + e_s - norm.eval(&u_n);
                poison(&mut loss, margin);
                if margin > 0.0 {
                    loss += config.alpha2 * margin;
                    let g_n = norm.subgrad(&u_n);
                    grad.add_relation(r_idx, config.alpha2, &g_s, d);
                    grad.add_relation(*s_idx, -config.alpha2, &g_s, d);
                    grad.add_relation(r_idx, -config.alpha2, &g_n, d);
                    grad.add_relation(n_idx, config.alpha2, &g_n, d);
                }
            }
        }
    }

    (loss, grad)
}

/// Adds `scale`·g to the gradient of every parameter of one displacement
/// h + Σ sign·r − t.
fn accumulate_displacement(
    grad: &mut SparseGrad,
    h: EntityId,
    components: &[(usize, f64)],
    t: EntityId,
    scale: f64,
    g: &[f64],
    dim: usize,
) {
    grad.add_entity(h, scale, g, dim);
    grad.add_entity(t, -scale, g, dim);
    for &(idx, sign) in components {
        grad.add_relation(idx, scale * sign, g, dim);
    }
}

/// Minibatch subgradient descent over all base triples. Returns the store
/// and the mean per-triple loss of each epoch.
///
/// With `parallel` set, per-example gradients are computed concurrently
/// against the batch-start parameters and folded in example order, so the
/// result matches the sequential mode exactly.
pub fn train(
    kg: &KnowledgeGraph,
    paths: &PathIndex,
    rules: &RuleSet,
    config: &TrainConfig,
) -> Result<(EmbeddingStore, Vec<f64>)> {
    config.validate()?;
    let emb = EmbeddingStore::init(
        kg.num_entities(),
        kg.num_base_relations(),
        config.d,
        config.seed,
    );
    train_from(emb, kg, paths, rules, config)
}

/// Continues training from an existing store instead of a fresh
/// initialization; the store must match the graph and `config.d`.
pub fn train_from(
    mut emb: EmbeddingStore,
    kg: &KnowledgeGraph,
    paths: &PathIndex,
    rules: &RuleSet,
    config: &TrainConfig,
) -> Result<(EmbeddingStore, Vec<f64>)> {
    config.validate()?;
    if emb.num_entities() != kg.num_entities()
        || emb.num_base_relations() != kg.num_base_relations()
        || emb.dim() != config.d
    {
        return Err(Error::invalid(format!(
            "store shape ({} entities, {} relations, d={}) does not match \
             graph ({}, {}) and d={}",
            emb.num_entities(),
            emb.num_base_relations(),
            emb.dim(),
            kg.num_entities(),
            kg.num_base_relations(),
            config.d
        )));
    }
    let assoc = RelationAssociation::from_rules(rules, kg.num_base_relations());
    let triples: Vec<Triple> = kg.base_triples().copied().collect();
    if triples.is_empty() {
        return Ok((emb, vec![0.0; config.epochs]));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    let mut order: Vec<usize> = (0..triples.len()).collect();
    let mut trace = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            let examples: Vec<TrainingExample> = batch
                .iter()
                .map(|&i| build_example(kg, paths, rules, &assoc, triples[i], config, &mut rng))
                .collect();
            let results: Vec<(f64, SparseGrad)> = if config.parallel {
                examples
                    .par_iter()
                    .map(|ex| example_loss_and_grad(&emb, ex, config))
                    .collect()
            } else {
                examples
                    .iter()
                    .map(|ex| example_loss_and_grad(&emb, ex, config))
                    .collect()
            };
            let mut batch_grad = SparseGrad::default();
            for (loss, grad) in results {
                if !loss.is_finite() {
                    return Err(Error::NonFinite {
                        epoch,
                        detail: format!("batch loss became {loss}"),
                    });
                }
                epoch_loss += loss;
                batch_grad.merge(grad);
            }
            apply_updates(&mut emb, &batch_grad, config.learning_rate);
        }
        trace.push(epoch_loss / triples.len() as f64);
    }
    Ok((emb, trace))
}

/// Descends along the gradient and re-projects every touched entity onto
/// the unit sphere. Relation rows are not re-normalized.
fn apply_updates(emb: &mut EmbeddingStore, grad: &SparseGrad, lr: f64) {
    for (&id, g) in &grad.entities {
        let row = emb.entity_mut(id);
        add_scaled(row, g, -lr);
        normalize(row);
    }
    for (&idx, g) in &grad.relations {
        let row = emb.relation_mut(idx);
        add_scaled(row, g, -lr);
    }
}

/// Writes `n_entities n_relations d`, then one `token v1 … vd` line per
/// entity and per base relation, with round-trip decimal precision.
pub fn save_embeddings(
    emb: &EmbeddingStore,
    vocab: &Vocab,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    writeln!(
        out,
        "{} {} {}",
        emb.num_entities(),
        emb.num_base_relations(),
        emb.dim()
    )
    .expect("writing to string cannot fail");
    for id in 0..emb.num_entities() as u32 {
        out.push_str(vocab.entity_token(id));
        for x in emb.entity(id) {
            write!(out, " {x}").expect("writing to string cannot fail");
        }
        out.push('\n');
    }
    for rel in vocab.base_relations() {
        out.push_str(vocab.relation_token(rel));
        for x in emb.relation(base_index(rel)) {
            write!(out, " {x}").expect("writing to string cannot fail");
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn load_embeddings(path: impl AsRef<Path>, vocab: &Vocab) -> Result<EmbeddingStore> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty embedding file"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::parse(path, 1, "bad header, expected `n_entities n_relations d`"))?;
    let &[n_entities, n_relations, d] = dims.as_slice() else {
        return Err(Error::parse(path, 1, "header must have three fields"));
    };
    if n_entities != vocab.num_entities() || n_relations != vocab.num_base_relations() {
        return Err(Error::invalid(format!(
            "embedding file covers {n_entities} entities and {n_relations} relations, \
             graph has {} and {}",
            vocab.num_entities(),
            vocab.num_base_relations()
        )));
    }
    if d == 0 {
        return Err(Error::parse(path, 1, "dimension must be positive"));
    }

    let mut emb = EmbeddingStore::zeros(n_entities, n_relations, d);
    let mut seen_entities = vec![false; n_entities];
    let mut seen_relations = vec![false; n_relations];
    for (lineno, line) in lines {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(' ').collect();
        if fields.len() < d + 1 {
            return Err(Error::parse(
                path,
                lineno + 1,
                format!("expected a token and {d} values, got {} fields", fields.len()),
            ));
        }
        let token = fields[..fields.len() - d].join(" ");
        let mut values = Vec::with_capacity(d);
        for raw in &fields[fields.len() - d..] {
            let x: f64 = raw
                .parse()
                .map_err(|_| Error::parse(path, lineno + 1, format!("bad value {raw:?}")))?;
            if !x.is_finite() {
                return Err(Error::parse(path, lineno + 1, "non-finite value"));
            }
            values.push(x);
        }
        if let Some(id) = vocab.entity_id(&token) {
            if seen_entities[id as usize] {
                return Err(Error::parse(path, lineno + 1, format!("duplicate entity {token:?}")));
            }
            seen_entities[id as usize] = true;
            emb.entity_mut(id).copy_from_slice(&values);
        } else if let Some(rel) = vocab.relation_id(&token) {
            if !is_base(rel) {
                return Err(Error::parse(
                    path,
                    lineno + 1,
                    "inverse relations are derived, not stored",
                ));
            }
            let idx = base_index(rel);
            if seen_relations[idx] {
                return Err(Error::parse(path, lineno + 1, format!("duplicate relation {token:?}")));
            }
            seen_relations[idx] = true;
            emb.relation_mut(idx).copy_from_slice(&values);
        } else {
            return Err(Error::parse(path, lineno + 1, format!("unknown token {token:?}")));
        }
    }
    if let Some(missing) = seen_entities.iter().position(|s| !s) {
        return Err(Error::invalid(format!(
            "embedding file is missing entity {:?}",
            vocab.entity_token(missing as u32)
        )));
    }
    if let Some(missing) = seen_relations.iter().position(|s| !s) {
        return Err(Error::invalid(format!(
            "embedding file is missing relation {:?}",
            vocab.relation_token((missing as u32) << 1)
        )));
    }
    Ok(emb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::{graph_from_tokens, inverse};
    use crate::paths::enumerate_paths;
    use crate::paths::PathConfig;
    use crate::rules::{CPRule, RuleConfig};

    #[test]
    fn norm_orders_round_trip_and_reject_others() {
        assert_eq!(Norm::from_order(1).unwrap(), Norm::L1);
        assert_eq!(Norm::from_order(2).unwrap(), Norm::L2);
        assert!(Norm::from_order(3).is_err());
        assert_eq!(Norm::L2.order(), 2);
    }

    #[test]
    fn triple_energy_hand_values() {
        let h = [0.0, 0.0];
        let r = [1.0, 0.0];
        let t = [0.0, 1.0];
        assert_eq!(energy_triple(&h, &r, &t, Norm::L1), 2.0);
        assert!((energy_triple(&h, &r, &t, Norm::L2) - 2f64.sqrt()).abs() < 1e-15);
        let exact = [1.0, 1.0];
        assert_eq!(energy_triple(&h, &r, &[1.0, 0.0], Norm::L1), 0.0);
        assert_eq!(energy_triple(&[0.0, 1.0], &r, &exact, Norm::L2), 0.0);
    }

    #[test]
    fn relpair_energy_hand_values() {
        assert!((energy_relpair(&[0.2], &[0.7], Norm::L1) - 0.5).abs() < 1e-15);
        assert_eq!(energy_relpair(&[0.3], &[0.3], Norm::L2), 0.0);
        let a = [0.1, -0.4];
        let b = [0.9, 0.2];
        assert_eq!(
            energy_relpair(&a, &b, Norm::L1),
            energy_relpair(&b, &a, Norm::L1)
        );
    }

    /// d=1 store over two entities (0.0 and 1.0) and two relations
    /// (1.0 and 0.5).
    fn tiny_store() -> (KnowledgeGraph, EmbeddingStore) {
        let kg = graph_from_tokens(&[("h", "r1", "t"), ("h", "r2", "t")], &[], true).unwrap();
        let mut emb = EmbeddingStore::zeros(2, 2, 1);
        let v = kg.vocab();
        emb.entity_mut(v.entity_id("h").unwrap())[0] = 0.0;
        emb.entity_mut(v.entity_id("t").unwrap())[0] = 1.0;
        emb.relation_mut(0)[0] = 1.0;
        emb.relation_mut(1)[0] = 0.5;
        (kg, emb)
    }

    #[test]
    fn pathset_energy_weighs_by_reliability() {
        let (kg, emb) = tiny_store();
        let v = kg.vocab();
        let h = v.entity_id("h").unwrap();
        let t = v.entity_id("t").unwrap();
        let r1 = v.relation_id("r1").unwrap();
        let r2 = v.relation_id("r2").unwrap();
        let rules = RuleSet::new();
        let paths = vec![
            (RelationPath::single(r1), 0.6),
            (RelationPath::single(r2), 0.2),
        ];
        let e = energy_pathset(&emb, &rules, h, t, &paths, Norm::L1).unwrap();
        assert!((e - 0.125).abs() < 1e-15);

        let single = vec![(RelationPath::single(r2), 0.3)];
        let e = energy_pathset(&emb, &rules, h, t, &single, Norm::L1).unwrap();
        assert!((e - 0.5).abs() < 1e-15);

        let exact = vec![(RelationPath::single(r1), 0.9)];
        assert_eq!(
            energy_pathset(&emb, &rules, h, t, &exact, Norm::L1).unwrap(),
            0.0
        );

        assert!(energy_pathset(&emb, &rules, h, t, &[], Norm::L1).is_err());
    }

    #[test]
    fn path_embedding_sums_and_negates_inverses() {
        let (kg, emb) = tiny_store();
        let v = kg.vocab();
        let r1 = v.relation_id("r1").unwrap();
        let r2 = v.relation_id("r2").unwrap();
        let rules = RuleSet::new();
        let two_hop = RelationPath::pair(r1, r2);
        assert_eq!(path_embedding(&two_hop, &emb, &rules), vec![1.5]);
        let inv = RelationPath::single(inverse(r1));
        assert_eq!(path_embedding(&inv, &emb, &rules), vec![-1.0]);
    }

    #[test]
    fn composition_rewrites_paths_with_rules() {
        let (kg, emb) = tiny_store();
        let v = kg.vocab();
        let r1 = v.relation_id("r1").unwrap();
        let r2 = v.relation_id("r2").unwrap();
        let mut rules = RuleSet::new();
        rules
            .insert(CPRule::new(r2, RelationPath::pair(r1, r1), 0.9, 0.5, 3).unwrap());
        let composed = compose_path(RelationPath::pair(r1, r1), &rules);
        assert_eq!(composed, RelationPath::single(r2));
        assert_eq!(
            path_embedding(&RelationPath::pair(r1, r1), &emb, &rules),
            vec![0.5]
        );
        // No matching rule: unchanged, summed.
        assert_eq!(
            compose_path(RelationPath::pair(r1, r2), &rules),
            RelationPath::pair(r1, r2)
        );
        assert_eq!(
            compose_path(RelationPath::single(r1), &rules),
            RelationPath::single(r1)
        );
    }

    #[test]
    fn inverse_triple_energy_matches_reversed_edge() {
        let kg = graph_from_tokens(&[("a", "r", "b")], &[], true).unwrap();
        let v = kg.vocab();
        let emb = EmbeddingStore::init(2, 1, 8, 7);
        let a = v.entity_id("a").unwrap();
        let b = v.entity_id("b").unwrap();
        let r = v.relation_id("r").unwrap();
        let forward = emb.triple_energy(a, r, b, Norm::L1);
        let backward = emb.triple_energy(b, inverse(r), a, Norm::L1);
        assert!((forward - backward).abs() < 1e-12);
    }

    #[test]
    fn initialization_is_normalized_and_seeded() {
        let a = EmbeddingStore::init(5, 3, 16, 42);
        let b = EmbeddingStore::init(5, 3, 16, 42);
        let c = EmbeddingStore::init(5, 3, 16, 43);
        assert_eq!(a, b);
        assert_ne!(a, c);
        for id in 0..5u32 {
            let n: f64 = a.entity(id).iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-12);
        }
        for idx in 0..3 {
            let n: f64 = a.relation(idx).iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }

    /// Corrupting (a,r,b) can only produce (a,r,c) or (c,r,b): every other
    /// candidate already exists.
    fn negative_forcing_graph() -> KnowledgeGraph {
        graph_from_tokens(
            &[
                ("a", "r", "b"),
                ("a", "r", "a"),
                ("b", "r", "b"),
                ("c", "r2", "c"),
            ],
            &[],
            true,
        )
        .unwrap()
    }

    #[test]
    fn negatives_are_absent_from_the_graph() {
        let kg = negative_forcing_graph();
        let v = kg.vocab();
        let pos = Triple {
            head: v.entity_id("a").unwrap(),
            relation: v.relation_id("r").unwrap(),
            tail: v.entity_id("b").unwrap(),
        };
        let c = v.entity_id("c").unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let negs = sample_negatives(pos, &kg, 10, &mut rng);
        assert_eq!(negs.len(), 10);
        for neg in negs {
            assert!(!kg.contains(neg.head, neg.relation, neg.tail));
            assert!(
                neg == Triple { tail: c, ..pos } || neg == Triple { head: c, ..pos },
                "unexpected negative {neg:?}"
            );
        }
    }

    #[test]
    fn negative_sampling_is_seed_deterministic() {
        let kg = negative_forcing_graph();
        let v = kg.vocab();
        let pos = Triple {
            head: v.entity_id("a").unwrap(),
            relation: v.relation_id("r").unwrap(),
            tail: v.entity_id("b").unwrap(),
        };
        let mut r1 = ChaCha12Rng::seed_from_u64(11);
        let mut r2 = ChaCha12Rng::seed_from_u64(11);
        assert_eq!(
            sample_negatives(pos, &kg, 10, &mut r1),
            sample_negatives(pos, &kg, 10, &mut r2)
        );
    }

    #[test]
    fn association_pools_partition_base_relations() {
        let mut rules = RuleSet::new();
        // Relations 0,2,4,6 are base ids; associate 0 ↔ 2.
        rules.insert(CPRule::new(0, RelationPath::single(2), 0.9, 0.5, 3).unwrap());
        let assoc = RelationAssociation::from_rules(&rules, 4);
        assert_eq!(assoc.positives(0), &[1]);
        assert_eq!(assoc.positives(1), &[0]);
        assert_eq!(assoc.negative_pool(0), &[2, 3]);
        assert_eq!(assoc.negative_pool(1), &[2, 3]);
        assert!(assoc.positives(2).is_empty());
        assert!(assoc.negative_pool(2).is_empty());
    }

    #[test]
    fn satisfied_constraints_at_zero_margin_produce_no_loss() {
        let (kg, emb) = tiny_store();
        let v = kg.vocab();
        let pos = Triple {
            head: v.entity_id("h").unwrap(),
            relation: v.relation_id("r1").unwrap(),
            tail: v.entity_id("t").unwrap(),
        };
        // Corrupting the tail to the head entity: energy |0+1-0| = 1 > 0.
        let neg = Triple {
            tail: pos.head,
            ..pos
        };
        let ex = TrainingExample {
            positive: pos,
            negatives: vec![neg],
            paths: vec![PathTerm {
                components: vec![(0, 1.0)],
                weight: 1.0,
            }],
            rel_terms: vec![],
        };
        let config = TrainConfig {
            d: 1,
            gamma1: 0.0,
            gamma2: 0.0,
            gamma3: 0.0,
            ..TrainConfig::default()
        };
        let (loss, grad) = example_loss_and_grad(&emb, &ex, &config);
        assert_eq!(loss, 0.0);
        assert!(grad.is_empty());
    }

    #[test]
    fn hinge_terms_match_hand_arithmetic() {
        let (kg, emb) = tiny_store();
        let v = kg.vocab();
        let pos = Triple {
            head: v.entity_id("h").unwrap(),
            relation: v.relation_id("r2").unwrap(),
            tail: v.entity_id("t").unwrap(),
        };
        let neg = Triple {
            tail: pos.head,
            ..pos
        };
        let ex = TrainingExample {
            positive: pos,
            negatives: vec![neg],
            paths: vec![],
            rel_terms: vec![(0, vec![0])],
        };
        let config = TrainConfig {
            d: 1,
            ..TrainConfig::default()
        };
        // Triple: E_pos = |0+0.5−1| = 0.5, E_neg = |0+0.5−0| = 0.5,
        // hinge = 1 + 0.5 − 0.5 = 1.
        // Relations: ‖r2−r1‖ = 0.5 as both positive and negative,
        // hinge = 1 + 0.5 − 0.5 = 1, weighted by α2 = 1.
        let loss = example_loss(&emb, &ex, &config);
        assert!((loss - 2.0).abs() < 1e-12);
    }

    fn planted_graph() -> KnowledgeGraph {
        let mut triples = Vec::new();
        for i in 0..6 {
            triples.push((format!("x{i}"), "r1".into(), format!("z{i}")));
            triples.push((format!("z{i}"), "r2".into(), format!("y{i}")));
            triples.push((format!("x{i}"), "r3".into(), format!("y{i}")));
        }
        crate::kg::build_graph(&triples, &[], true).unwrap()
    }

    fn quick_config() -> TrainConfig {
        TrainConfig {
            d: 16,
            batch_size: 8,
            negatives: 4,
            epochs: 30,
            learning_rate: 0.05,
            seed: 42,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn training_reduces_loss_and_keeps_entities_unit() {
        let kg = planted_graph();
        let paths = enumerate_paths(&kg, &PathConfig::default());
        let rules = crate::rules::mine_seed_rules(&kg, &RuleConfig::default()).unwrap();
        let (emb, trace) = train(&kg, &paths, &rules, &quick_config()).unwrap();
        assert_eq!(trace.len(), 30);
        assert!(trace[29] < trace[0], "trace: {trace:?}");
        for id in 0..kg.num_entities() as u32 {
            let n: f64 = emb.entity(id).iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn training_is_deterministic_and_thread_count_invariant() {
        let kg = planted_graph();
        let paths = enumerate_paths(&kg, &PathConfig::default());
        let rules = crate::rules::mine_seed_rules(&kg, &RuleConfig::default()).unwrap();
        let mut config = quick_config();
        config.epochs = 5;
        let (e1, t1) = train(&kg, &paths, &rules, &config).unwrap();
        let (e2, t2) = train(&kg, &paths, &rules, &config).unwrap();
        assert_eq!(e1, e2);
        assert_eq!(t1, t2);
        config.parallel = true;
        let (e3, t3) = train(&kg, &paths, &rules, &config).unwrap();
        assert_eq!(e1, e3);
        assert_eq!(t1, t3);
    }

    #[test]
    fn diverged_parameters_surface_as_a_non_finite_error() {
        let kg = planted_graph();
        let paths = enumerate_paths(&kg, &PathConfig::default());
        let rules = crate::rules::mine_seed_rules(&kg, &RuleConfig::default()).unwrap();
        let mut config = quick_config();
        // Squaring 1e300-scale relation entries overflows the energies;
        // the NaN margins must be reported, not dropped.
        config.learning_rate = 1e300;
        config.norm = Norm::L2;
        let err = train(&kg, &paths, &rules, &config).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }), "{err}");
    }

    #[test]
    fn trained_positives_score_below_corruptions() {
        let kg = planted_graph();
        let paths = enumerate_paths(&kg, &PathConfig::default());
        let rules = crate::rules::mine_seed_rules(&kg, &RuleConfig::default()).unwrap();
        let mut config = quick_config();
        config.epochs = 80;
        let (emb, _) = train(&kg, &paths, &rules, &config).unwrap();
        let mut pos_sum = 0.0;
        let mut neg_sum = 0.0;
        let mut count = 0;
        let n = kg.num_entities() as u32;
        for triple in kg.base_triples() {
            pos_sum += emb.triple_energy(triple.head, triple.relation, triple.tail, config.norm);
            let corrupt = (triple.tail + 1) % n;
            neg_sum += emb.triple_energy(triple.head, triple.relation, corrupt, config.norm);
            count += 1;
        }
        assert!(
            pos_sum / count as f64 + 0.1 < neg_sum / count as f64,
            "positive mean {} vs corrupted mean {}",
            pos_sum / count as f64,
            neg_sum / count as f64
        );
    }

    #[test]
    fn gradients_match_finite_differences() {
        let kg = planted_graph();
        let paths = enumerate_paths(&kg, &PathConfig::default());
        let mut rules = crate::rules::mine_seed_rules(&kg, &RuleConfig::default()).unwrap();
        // Associate two relations so the relation-pair loss is exercised.
        let v = kg.vocab();
        rules.insert(
            CPRule::new(
                v.relation_id("r1").unwrap(),
                RelationPath::single(v.relation_id("r2").unwrap()),
                0.9,
                0.5,
                2,
            )
            .unwrap(),
        );
        let assoc = RelationAssociation::from_rules(&rules, kg.num_base_relations());
        let triples: Vec<Triple> = kg.base_triples().copied().collect();
        for norm in [Norm::L1, Norm::L2] {
            let config = TrainConfig {
                d: 6,
                negatives: 3,
                norm,
                ..TrainConfig::default()
            };
            let mut rng = ChaCha12Rng::seed_from_u64(17);
            let mut checked = 0;
            'point: for round in 0..60 {
                let emb = EmbeddingStore::init(
                    kg.num_entities(),
                    kg.num_base_relations(),
                    config.d,
                    1000 + round,
                );
                let t = triples[rng.random_range(0..triples.len())];
                let ex = build_example(&kg, &paths, &rules, &assoc, t, &config, &mut rng);
                let (_, grad) = example_loss_and_grad(&emb, &ex, &config);
                let h = 1e-5;
                for (&id, g) in &grad.entities {
                    for i in 0..config.d {
                        let mut plus = emb.clone();
                        plus.entity_mut(id)[i] += h;
                        let mut minus = emb.clone();
                        minus.entity_mut(id)[i] -= h;
                        let fd = (example_loss(&plus, &ex, &config)
                            - example_loss(&minus, &ex, &config))
                            / (2.0 * h);
                        if !close(fd, g[i]) {
                            continue 'point;
                        }
                    }
                }
                for (&idx, g) in &grad.relations {
                    for i in 0..config.d {
                        let mut plus = emb.clone();
                        plus.relation_mut(idx)[i] += h;
                        let mut minus = emb.clone();
                        minus.relation_mut(idx)[i] -= h;
                        let fd = (example_loss(&plus, &ex, &config)
                            - example_loss(&minus, &ex, &config))
                            / (2.0 * h);
                        if !close(fd, g[i]) {
                            continue 'point;
                        }
                    }
                }
                checked += 1;
            }
            // Most random points sit away from hinge and |·| kinks.
            assert!(checked >= 30, "only {checked} kink-free points for {norm:?}");
        }
    }

    fn close(fd: f64, analytic: f64) -> bool {
        let scale = fd.abs().max(analytic.abs()).max(1.0);
        (fd - analytic).abs() / scale < 1e-4
    }

    #[test]
    fn embeddings_round_trip_through_files() {
        let kg = planted_graph();
        let emb = EmbeddingStore::init(kg.num_entities(), kg.num_base_relations(), 12, 3);
        let f = tempfile::NamedTempFile::new().unwrap();
        save_embeddings(&emb, kg.vocab(), f.path()).unwrap();
        let loaded = load_embeddings(f.path(), kg.vocab()).unwrap();
        for id in 0..kg.num_entities() as u32 {
            for (a, b) in emb.entity(id).iter().zip(loaded.entity(id)) {
                assert!((a - b).abs() <= 1e-9);
            }
        }
        let v = kg.vocab();
        let a = v.entity_id("x0").unwrap();
        let b = v.entity_id("y0").unwrap();
        let r = v.relation_id("r3").unwrap();
        let before = emb.triple_energy(a, r, b, Norm::L1);
        let after = loaded.triple_energy(a, r, b, Norm::L1);
        assert!((before - after).abs() <= 1e-7);
    }

    #[test]
    fn short_embedding_row_is_rejected() {
        let kg = graph_from_tokens(&[("a", "r", "b")], &[], true).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f.path(), "2 1 3\na 0.1 0.2 0.3\nb 0.1 0.2\nr 0.1 0.2 0.3\n").unwrap();
        let err = load_embeddings(f.path(), kg.vocab()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn embedding_header_must_match_vocabulary() {
        let kg = graph_from_tokens(&[("a", "r", "b")], &[], true).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f.path(), "3 1 2\n").unwrap();
        assert!(load_embeddings(f.path(), kg.vocab()).is_err());
    }
}
