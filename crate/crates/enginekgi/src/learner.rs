//! Coarse-to-fine rule learning from observed paths.
//!
//! Candidate rules are (head relation, path) pairs seen together on at
//! least one entity pair. A cheap coarse score — embedding distance between
//! head and body plus concept co-occurrence along the body's argument
//! chain — prunes the candidates; survivors are grounded exactly and kept
//! only when support, standard confidence, and head coverage all pass.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kg::{base_index, direction_sign, is_base, ConceptId, KnowledgeGraph, RelationId, Vocab};
use crate::embedding::{EmbeddingStore, Norm};
use crate::paths::{PathIndex, RelationPath};
use crate::rules::{ground_and_score, RuleSet};

/// Sparse concept distribution: weight 1/|C| on each member concept.
pub type ConceptVector = BTreeMap<ConceptId, f64>;

/// Per base relation, the averaged one-hot concept vectors of its head and
/// tail entities.
#[derive(Debug, Clone, Default)]
pub struct ConceptSignatures {
    heads: Vec<ConceptVector>,
    tails: Vec<ConceptVector>,
}

impl ConceptSignatures {
    pub fn is_empty(&self) -> bool {
        self.heads.iter().all(BTreeMap::is_empty) && self.tails.iter().all(BTreeMap::is_empty)
    }

    /// Head-argument signature of any relation id; an inverse relation
    /// swaps in the tail signature of its base.
    pub fn head_signature(&self, rel: RelationId) -> &ConceptVector {
        if is_base(rel) {
            &self.heads[base_index(rel)]
        } else {
            &self.tails[base_index(rel)]
        }
    }

    pub fn tail_signature(&self, rel: RelationId) -> &ConceptVector {
        if is_base(rel) {
            &self.tails[base_index(rel)]
        } else {
            &self.heads[base_index(rel)]
        }
    }
}

/// Builds both signatures of every base relation from the graph's concept
/// map: the distinct concepts of all head (resp. tail) entities of the
/// relation's triples, each weighted 1/|C|.
pub fn build_concept_signatures(kg: &KnowledgeGraph) -> ConceptSignatures {
    let n = kg.num_base_relations();
    let mut head_sets: Vec<BTreeSet<ConceptId>> = vec![BTreeSet::new(); n];
    let mut tail_sets: Vec<BTreeSet<ConceptId>> = vec![BTreeSet::new(); n];
    for triple in kg.base_triples() {
        let idx = base_index(triple.relation);
        head_sets[idx].extend(kg.concepts_of(triple.head).iter().copied());
        tail_sets[idx].extend(kg.concepts_of(triple.tail).iter().copied());
    }
    let average = |set: BTreeSet<ConceptId>| -> ConceptVector {
        let w = 1.0 / set.len().max(1) as f64;
        set.into_iter().map(|c| (c, w)).collect()
    };
    ConceptSignatures {
        heads: head_sets.into_iter().map(average).collect(),
        tails: tail_sets.into_iter().map(average).collect(),
    }
}

fn dot(p: &ConceptVector, q: &ConceptVector) -> f64 {
    if p.len() > q.len() {
        return dot(q, p);
    }
    p.iter().map(|(c, w)| w * q.get(c).copied().unwrap_or(0.0)).sum()
}

/// exp(−‖r − p‖) where p sums the body's relation vectors as written —
/// no rule composition, since the body is the object being judged.
pub fn score_semantic_relevance(
    head: RelationId,
    body: &RelationPath,
    emb: &EmbeddingStore,
    norm: Norm,
) -> f64 {
    let mut u: Vec<f64> = emb.relation(base_index(head)).to_vec();
    for &rel in body.rels() {
        let sign = direction_sign(rel);
        let row = emb.relation(base_index(rel));
        for (ui, x) in u.iter_mut().zip(row) {
            *ui -= sign * x;
        }
    }
    (-norm.eval(&u)).exp()
}

/// Concept agreement along the argument chain: head arguments, tail
/// arguments, and each adjacent pair of body atoms, each scored by the
/// dot product of the two concept vectors.
pub fn score_cooccurrence(
    head: RelationId,
    body: &RelationPath,
    signatures: &ConceptSignatures,
) -> f64 {
    let rels = body.rels();
    let first = rels[0];
    let last = rels[rels.len() - 1];
    let mut score = dot(signatures.head_signature(head), signatures.head_signature(first))
        + dot(signatures.tail_signature(head), signatures.tail_signature(last));
    for pair in rels.windows(2) {
        score += dot(
            signatures.tail_signature(pair[0]),
            signatures.head_signature(pair[1]),
        );
    }
    score
}

/// Combined coarse score: semantic relevance plus β times concept
/// co-occurrence.
pub fn coarse_score(
    head: RelationId,
    body: &RelationPath,
    emb: &EmbeddingStore,
    signatures: &ConceptSignatures,
    beta: f64,
    norm: Norm,
) -> f64 {
    score_semantic_relevance(head, body, emb, norm)
        + beta * score_cooccurrence(head, body, signatures)
}

/// Rule-learning thresholds and weights.
#[derive(Debug, Clone)]
pub struct LearnerConfig {
    /// Weight of the co-occurrence score in the coarse filter.
    pub beta: f64,
    /// Coarse-score threshold below which candidates are dropped unscored.
    pub st: f64,
    pub min_sc: f64,
    pub min_hc: f64,
    pub min_support: u64,
    pub norm: Norm,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            beta: 1.0,
            st: 1.0,
            min_sc: 0.7,
            min_hc: 0.1,
            min_support: 2,
            norm: Norm::L1,
        }
    }
}

/// One candidate's scoring trail: coarse components, exact statistics when
/// the candidate reached exact scoring, and the final verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleDiagnostic {
    pub head: RelationId,
    pub body: RelationPath,
    pub e_sr: f64,
    pub e_co: f64,
    pub e_cg: f64,
    pub sc: Option<f64>,
    pub hc: Option<f64>,
    pub accepted: bool,
}

/// Newly learned rules plus the per-candidate diagnostics behind them.
#[derive(Debug, Clone, Default)]
pub struct LearnedRules {
    pub rules: RuleSet,
    pub diagnostics: Vec<RuleDiagnostic>,
}

/// Coarse-to-fine rule learning over the indexed paths.
///
/// Candidates are (head, body) pairs where some indexed pair carries the
/// body as a path and the head as a direct base edge, minus existing keys
/// and self-bodies. Candidates below the coarse threshold are dropped;
/// the rest are grounded exactly and filtered by the rule thresholds.
pub fn learn_rules(
    kg: &KnowledgeGraph,
    paths: &PathIndex,
    emb: &EmbeddingStore,
    signatures: &ConceptSignatures,
    existing: &RuleSet,
    config: &LearnerConfig,
) -> Result<LearnedRules> {
    let mut candidates: BTreeSet<(RelationId, RelationPath)> = BTreeSet::new();
    for ((h, t), entry) in paths.iter_sorted() {
        for &head in kg.relations_between(h, t) {
            if !is_base(head) {
                continue;
            }
            for (body, _) in entry {
                if body.rels() == std::slice::from_ref(&head) || existing.contains(head, body) {
                    continue;
                }
                candidates.insert((head, body.clone()));
            }
        }
    }

    let scored: Vec<RuleDiagnostic> = candidates
        .into_iter()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(head, body)| {
            let e_sr = score_semantic_relevance(*head, body, emb, config.norm);
            let e_co = score_cooccurrence(*head, body, signatures);
            let e_cg = e_sr + config.beta * e_co;
            let mut diag = RuleDiagnostic {
                head: *head,
                body: body.clone(),
                e_sr,
                e_co,
                e_cg,
                sc: None,
                hc: None,
                accepted: false,
            };
            if e_cg < config.st {
                return Ok(diag);
            }
            match ground_and_score(kg, *head, body) {
                Ok(rule) => {
                    diag.sc = Some(rule.sc);
                    diag.hc = Some(rule.hc);
                    diag.accepted = rule.sc >= config.min_sc
                        && rule.hc >= config.min_hc
                        && rule.support >= config.min_support;
                }
                Err(Error::UndefinedScore(_)) => {}
                Err(e) => return Err(e),
            }
            Ok(diag)
        })
        .collect::<Result<_>>()?;

    let mut rules = RuleSet::new();
    for diag in &scored {
        if diag.accepted {
            let rule = ground_and_score(kg, diag.head, &diag.body)?;
            rules.insert(rule);
        }
    }
    Ok(LearnedRules {
        rules,
        diagnostics: scored,
    })
}

/// Writes one `head<TAB>body<TAB>E_sr<TAB>E_co<TAB>E_cg<TAB>sc<TAB>hc<TAB>accepted`
/// line per candidate; candidates pruned before exact scoring show `-`.
pub fn write_diagnostics(
    diagnostics: &[RuleDiagnostic],
    vocab: &Vocab,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for d in diagnostics {
        let body: Vec<&str> = d.body.rels().iter().map(|&r| vocab.relation_token(r)).collect();
        let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| x.to_string());
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            vocab.relation_token(d.head),
            body.join(" & "),
            d.e_sr,
            d.e_co,
            d.e_cg,
            opt(d.sc),
            opt(d.hc),
            d.accepted
        )
        .expect("writing to string cannot fail");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
