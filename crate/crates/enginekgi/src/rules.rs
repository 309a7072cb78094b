//! Closed-path rules: grounding, exhaustive seed mining, merging,
//! and the rule-file format.
//!
//! A rule `head ⇐ b1 [∧ b2]` is scored against the graph by entity-pair
//! sets: support is the number of distinct pairs connected by both the body
//! and the head relation, standard confidence divides by the body pairs,
//! head coverage by the head pairs.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kg::{is_base, EntityId, KnowledgeGraph, RelationId, Vocab};
use crate::paths::{paths_between, RelationPath};

/// A closed-path rule with its grounding statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct CPRule {
    pub head: RelationId,
    pub body: RelationPath,
    pub sc: f64,
    pub hc: f64,
    pub support: u64,
}

impl CPRule {
    /// Validates the structural invariants: the head is a base relation and
    /// a length-1 body never repeats the head.
    pub fn new(
        head: RelationId,
        body: RelationPath,
        sc: f64,
        hc: f64,
        support: u64,
    ) -> Result<Self> {
        if !is_base(head) {
            return Err(Error::invalid(
                "an inverse relation cannot head a rule".to_string(),
            ));
        }
        if body.rels() == [head] {
            return Err(Error::invalid(
                "a rule body must differ from its head".to_string(),
            ));
        }
        if !(0.0..=1.0).contains(&sc) || !(0.0..=1.0).contains(&hc) {
            return Err(Error::invalid(format!(
                "sc and hc must lie in [0,1], got sc={sc} hc={hc}"
            )));
        }
        Ok(CPRule {
            head,
            body,
            sc,
            hc,
            support,
        })
    }

    pub fn key(&self) -> (RelationId, RelationPath) {
        (self.head, self.body.clone())
    }

    /// `head <= b1 [& b2]` in vocabulary tokens.
    pub fn display(&self, vocab: &Vocab) -> String {
        let body: Vec<&str> = self
            .body
            .rels()
            .iter()
            .map(|&r| vocab.relation_token(r))
            .collect();
        format!("{} <= {}", vocab.relation_token(self.head), body.join(" & "))
    }
}

/// Thresholds a rule must clear to be kept.
#[derive(Debug, Clone)]
pub struct RuleConfig {
    pub min_sc: f64,
    pub min_hc: f64,
    pub min_support: u64,
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig {
            min_sc: 0.7,
            min_hc: 0.1,
            min_support: 2,
        }
    }
}

/// Rules keyed by (head, body), plus two derived lookup structures:
/// a body-pair → head map for path composition and a symmetric relation
/// association map fed by base-bodied length-1 rules.
#[derive(Debug, Clone, Default)]
pub struct RuleSet {
    rules: BTreeMap<(RelationId, RelationPath), CPRule>,
    compose: HashMap<(RelationId, RelationId), (RelationId, f64)>,
    assoc: HashMap<RelationId, BTreeSet<RelationId>>,
}

impl RuleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn get(&self, head: RelationId, body: &RelationPath) -> Option<&CPRule> {
        self.rules.get(&(head, body.clone()))
    }

    pub fn contains(&self, head: RelationId, body: &RelationPath) -> bool {
        self.rules.contains_key(&(head, body.clone()))
    }

    /// Rules in ascending (head, body) order.
    pub fn iter(&self) -> impl Iterator<Item = &CPRule> {
        self.rules.values()
    }

    pub fn rules_for_head(&self, head: RelationId) -> impl Iterator<Item = &CPRule> {
        self.rules
            .range((head, RelationPath::single(0))..)
            .take_while(move |((h, _), _)| *h == head)
            .map(|(_, rule)| rule)
    }

    /// Inserts the rule; an existing rule under the same key survives unless
    /// the newcomer has strictly higher sc. Returns true if the key was new.
    pub fn insert(&mut self, rule: CPRule) -> bool {
        let key = rule.key();
        match self.rules.get(&key) {
            Some(existing) if existing.sc >= rule.sc => false,
            Some(_) => {
                self.index_rule(&rule);
                self.rules.insert(key, rule);
                false
            }
            None => {
                self.index_rule(&rule);
                self.rules.insert(key, rule);
                true
            }
        }
    }

    pub fn remove(&mut self, head: RelationId, body: &RelationPath) -> Option<CPRule> {
        let removed = self.rules.remove(&(head, body.clone()));
        if removed.is_some() {
            self.rebuild_indexes();
        }
        removed
    }

    pub fn retain(&mut self, mut keep: impl FnMut(&CPRule) -> bool) {
        let before = self.rules.len();
        self.rules.retain(|_, rule| keep(rule));
        if self.rules.len() != before {
            self.rebuild_indexes();
        }
    }

    /// Key union; on collision the higher-sc rule wins (ties keep `self`).
    /// Returns how many keys were new.
    pub fn merge(&mut self, other: RuleSet) -> usize {
        let mut added = 0;
        for (_, rule) in other.rules {
            if self.insert(rule) {
                added += 1;
            }
        }
        added
    }

    /// Head relation of the best rule with body `[r1, r2]`, if any
    /// (maximal sc, ties broken toward the smallest head id).
    pub fn compose_head(&self, r1: RelationId, r2: RelationId) -> Option<RelationId> {
        self.compose.get(&(r1, r2)).map(|&(head, _)| head)
    }

    /// Relations associated with `rel` through base-bodied length-1 rules.
    pub fn associated(&self, rel: RelationId) -> Option<&BTreeSet<RelationId>> {
        self.assoc.get(&rel)
    }

    fn index_rule(&mut self, rule: &CPRule) {
        match *rule.body.rels() {
            [b] => {
                if is_base(b) {
                    self.assoc.entry(rule.head).or_default().insert(b);
                    self.assoc.entry(b).or_default().insert(rule.head);
                }
            }
            [r1, r2] => {
                let entry = self
                    .compose
                    .entry((r1, r2))
                    .or_insert((rule.head, rule.sc));
                if rule.sc > entry.1 || (rule.sc == entry.1 && rule.head < entry.0) {
                    *entry = (rule.head, rule.sc);
                }
            }
            _ => unreachable!("path length is 1 or 2"),
        }
    }

    fn rebuild_indexes(&mut self) {
        self.compose.clear();
        self.assoc.clear();
        let rules: Vec<CPRule> = self.rules.values().cloned().collect();
        for rule in &rules {
            self.index_rule(rule);
        }
    }
}

/// Distinct (head, tail) pairs connected by the body, joining successor
/// lists for two-atom bodies.
pub fn body_pairs(kg: &KnowledgeGraph, body: &RelationPath) -> HashSet<(EntityId, EntityId)> {
    match *body.rels() {
        [b] => kg.pairs_of(b).iter().copied().collect(),
        [r1, r2] => {
            let mut pairs = HashSet::new();
            for &(x, z) in kg.pairs_of(r1) {
                for &y in kg.succ(z, r2) {
                    pairs.insert((x, y));
                }
            }
            pairs
        }
        _ => unreachable!("path length is 1 or 2"),
    }
}

/// Grounds the rule key against the graph and computes
/// (support, sc, hc) from the entity-pair sets.
pub fn ground_and_score(
    kg: &KnowledgeGraph,
    head: RelationId,
    body: &RelationPath,
) -> Result<CPRule> {
    let pairs = body_pairs(kg, body);
    score_with_body_pairs(kg, head, body, &pairs)
}

fn score_with_body_pairs(
    kg: &KnowledgeGraph,
    head: RelationId,
    body: &RelationPath,
    body_pairs: &HashSet<(EntityId, EntityId)>,
) -> Result<CPRule> {
    let head_pairs = kg.pairs_of(head);
    if body_pairs.is_empty() {
        return Err(Error::UndefinedScore(format!(
            "body {:?} has no groundings",
            body.rels()
        )));
    }
    if head_pairs.is_empty() {
        return Err(Error::UndefinedScore(format!(
            "head relation {head} has no triples"
        )));
    }
    let support = head_pairs
        .iter()
        .filter(|pair| body_pairs.contains(pair))
        .count() as u64;
    let sc = support as f64 / body_pairs.len() as f64;
    let hc = support as f64 / head_pairs.len() as f64;
    CPRule::new(head, body.clone(), sc, hc, support)
}

/// Exhaustively mines rules whose body (length ≤ 2, inverses allowed)
/// co-occurs with a base head relation on at least `min_support` entity
/// pairs, then keeps those passing all thresholds.
pub fn mine_seed_rules(kg: &KnowledgeGraph, config: &RuleConfig) -> Result<RuleSet> {
    let mut witnesses: BTreeMap<(RelationId, RelationPath), u64> = BTreeMap::new();
    let mut pair_heads: BTreeMap<(EntityId, EntityId), Vec<RelationId>> = BTreeMap::new();
    for triple in kg.base_triples() {
        pair_heads
            .entry((triple.head, triple.tail))
            .or_default()
            .push(triple.relation);
    }
    for ((h, t), heads) in &pair_heads {
        let bodies = paths_between(kg, *h, *t);
        for &head in heads {
            for body in &bodies {
                if body.rels() == [head] {
                    continue;
                }
                *witnesses.entry((head, body.clone())).or_insert(0) += 1;
            }
        }
    }

    let mut by_body: BTreeMap<RelationPath, Vec<RelationId>> = BTreeMap::new();
    for ((head, body), count) in witnesses {
        if count >= config.min_support {
            by_body.entry(body).or_default().push(head);
        }
    }

    let scored: Vec<Vec<CPRule>> = by_body
        .par_iter()
        .map(|(body, heads)| {
            let pairs = body_pairs(kg, body);
            let mut kept = Vec::new();
            for &head in heads {
                let rule = score_with_body_pairs(kg, head, body, &pairs)?;
                if rule.sc >= config.min_sc
                    && rule.hc >= config.min_hc
                    && rule.support >= config.min_support
                {
                    kept.push(rule);
                }
            }
            Ok(kept)
        })
        .collect::<Result<_>>()?;

    let mut rules = RuleSet::new();
    for rule in scored.into_iter().flatten() {
        rules.insert(rule);
    }
    Ok(rules)
}

/// Writes one `head <= body<TAB>sc<TAB>hc<TAB>support` line per rule in
/// (head, body) order.
pub fn write_rules(rules: &RuleSet, vocab: &Vocab, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for rule in rules.iter() {
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            rule.display(vocab),
            rule.sc,
            rule.hc,
            rule.support
        )
        .expect("writing to string cannot fail");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_rules(path: impl AsRef<Path>, vocab: &Vocab) -> Result<RuleSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rules = RuleSet::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let &[rule_text, sc, hc, support] = fields.as_slice() else {
            return Err(Error::parse(
                path,
                lineno + 1,
                "expected rule<TAB>sc<TAB>hc<TAB>support",
            ));
        };
        let Some((head_tok, body_text)) = rule_text.split_once(" <= ") else {
            return Err(Error::parse(path, lineno + 1, "missing `<=` arrow"));
        };
        let head = vocab.relation_id(head_tok.trim()).ok_or_else(|| {
            Error::parse(path, lineno + 1, format!("unknown relation {head_tok:?}"))
        })?;
        let mut body_ids = Vec::new();
        for tok in body_text.split(" & ") {
            let id = vocab.relation_id(tok.trim()).ok_or_else(|| {
                Error::parse(path, lineno + 1, format!("unknown relation {tok:?}"))
            })?;
            body_ids.push(id);
        }
        let body = RelationPath::from_slice(&body_ids)
            .map_err(|e| Error::parse(path, lineno + 1, e.to_string()))?;
        let sc: f64 = sc
            .parse()
            .map_err(|_| Error::parse(path, lineno + 1, "bad sc"))?;
        let hc: f64 = hc
            .parse()
            .map_err(|_| Error::parse(path, lineno + 1, "bad hc"))?;
        let support: u64 = support
            .parse()
            .map_err(|_| Error::parse(path, lineno + 1, "bad support"))?;
        let rule = CPRule::new(head, body, sc, hc, support)
            .map_err(|e| Error::parse(path, lineno + 1, e.to_string()))?;
        rules.insert(rule);
    }
    Ok(rules)
}
