//! Indexed triple store: vocabularies, inverse-augmented triples, adjacency
//! indexes and the entity→concept map. Immutable after build; every other
//! module reads from it.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub type EntityId = u32;
pub type RelationId = u32;
pub type ConceptId = u32;

/// Token prefix marking the inverse direction of a base relation.
pub const INV_PREFIX: &str = "INV::";

/// Average-degree threshold separating the "1" and "N" sides of a relation
/// category.
pub const CATEGORY_THRESHOLD: f64 = 1.5;

/// Relation ids are allocated in pairs: base relations get even ids, their
/// inverses the following odd id.
#[inline]
pub fn inverse(rel: RelationId) -> RelationId {
    rel ^ 1
}

#[inline]
pub fn is_base(rel: RelationId) -> bool {
    rel & 1 == 0
}

/// Row of `rel` in a matrix indexed by base relations.
#[inline]
pub fn base_index(rel: RelationId) -> usize {
    (rel >> 1) as usize
}

/// Sign of `rel`'s embedding relative to its base relation's vector.
#[inline]
pub fn direction_sign(rel: RelationId) -> f64 {
    if is_base(rel) {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Default, Clone)]
struct Interner {
    tokens: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Interner {
    fn intern(&mut self, token: &str) -> u32 {
        if let Some(&id) = self.ids.get(token) {
            return id;
        }
        let id = self.tokens.len() as u32;
        self.tokens.push(token.to_string());
        self.ids.insert(token.to_string(), id);
        id
    }

    fn get(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    fn token(&self, id: u32) -> &str {
        &self.tokens[id as usize]
    }

    fn len(&self) -> usize {
        self.tokens.len()
    }
}

/// Token↔id bijections for entities, relations and concepts.
///
/// Ids are dense and start at 0. Relation ids are paired: interning a base
/// relation also interns its `INV::`-prefixed inverse at the next id, so
/// `inverse(inverse(r)) == r` for every relation.
#[derive(Debug, Default, Clone)]
pub struct Vocab {
    entities: Interner,
    relations: Interner,
    concepts: Interner,
}

impl Vocab {
    fn intern_entity(&mut self, token: &str) -> EntityId {
        self.entities.intern(token)
    }

    /// Interns a base relation together with its inverse; returns the base id.
    fn intern_base_relation(&mut self, token: &str) -> RelationId {
        if let Some(id) = self.relations.get(token) {
            return id;
        }
        let id = self.relations.intern(token);
        self.relations.intern(&format!("{INV_PREFIX}{token}"));
        debug_assert!(is_base(id));
        id
    }

    fn intern_concept(&mut self, token: &str) -> ConceptId {
        self.concepts.intern(token)
    }

    pub fn entity_id(&self, token: &str) -> Option<EntityId> {
        self.entities.get(token)
    }

    pub fn entity_token(&self, id: EntityId) -> &str {
        self.entities.token(id)
    }

    /// Looks up any relation token, `INV::`-prefixed ones included.
    pub fn relation_id(&self, token: &str) -> Option<RelationId> {
        self.relations.get(token)
    }

    pub fn relation_token(&self, id: RelationId) -> &str {
        self.relations.token(id)
    }

    pub fn concept_id(&self, token: &str) -> Option<ConceptId> {
        self.concepts.get(token)
    }

    pub fn concept_token(&self, id: ConceptId) -> &str {
        self.concepts.token(id)
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    /// Total relation count, inverses included (always even).
    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn num_base_relations(&self) -> usize {
        self.relations.len() / 2
    }

    pub fn num_concepts(&self) -> usize {
        self.concepts.len()
    }

    pub fn require_entity(&self, token: &str) -> Result<EntityId> {
        self.entity_id(token).ok_or_else(|| Error::UnknownToken {
            kind: "entity",
            token: token.to_string(),
        })
    }

    pub fn require_relation(&self, token: &str) -> Result<RelationId> {
        self.relation_id(token).ok_or_else(|| Error::UnknownToken {
            kind: "relation",
            token: token.to_string(),
        })
    }

    /// Base relation ids, in interning order.
    pub fn base_relations(&self) -> impl Iterator<Item = RelationId> + '_ {
        (0..self.relations.len() as u32).step_by(2)
    }
}

/// A single (head, relation, tail) fact over vocabulary ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub head: EntityId,
    pub relation: RelationId,
    pub tail: EntityId,
}

impl Triple {
    pub fn new(head: EntityId, relation: RelationId, tail: EntityId) -> Self {
        Triple {
            head,
            relation,
            tail,
        }
    }
}

/// Cardinality class of a relation, from average heads-per-tail and
/// tails-per-head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelationCategory {
    OneToOne,
    OneToMany,
    ManyToOne,
    ManyToMany,
}

impl RelationCategory {
    pub const ALL: [RelationCategory; 4] = [
        RelationCategory::OneToOne,
        RelationCategory::OneToMany,
        RelationCategory::ManyToOne,
        RelationCategory::ManyToMany,
    ];
}

impl fmt::Display for RelationCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RelationCategory::OneToOne => "1-1",
            RelationCategory::OneToMany => "1-N",
            RelationCategory::ManyToOne => "N-1",
            RelationCategory::ManyToMany => "N-N",
        };
        f.write_str(s)
    }
}

/// Immutable, fully indexed knowledge graph.
///
/// When built with inverse augmentation (the default for the pipeline),
/// every base triple `(h, r, t)` is stored together with `(t, INV::r, h)`,
/// so paths can traverse edges in both directions.
#[derive(Debug, Clone)]
pub struct KnowledgeGraph {
    vocab: Vocab,
    triples: Vec<Triple>,
    num_base_triples: usize,
    augmented: bool,
    /// (head, relation) → sorted tails.
    index_hr: HashMap<(EntityId, RelationId), Vec<EntityId>>,
    /// (tail, relation) → sorted heads.
    index_tr: HashMap<(EntityId, RelationId), Vec<EntityId>>,
    /// (head, tail) → sorted relations linking them.
    index_ht: HashMap<(EntityId, EntityId), Vec<RelationId>>,
    /// relation → sorted (head, tail) pairs.
    index_r: Vec<Vec<(EntityId, EntityId)>>,
    /// entity → sorted relations with at least one outgoing edge.
    out_rels: Vec<Vec<RelationId>>,
    /// entity → sorted concept ids (empty when no concept file was given).
    concepts: Vec<Vec<ConceptId>>,
    has_concepts: bool,
}

impl KnowledgeGraph {
    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    /// All stored triples, inverses included when augmentation is on.
    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn base_triples(&self) -> impl Iterator<Item = &Triple> + '_ {
        self.triples.iter().filter(|t| is_base(t.relation))
    }

    pub fn num_base_triples(&self) -> usize {
        self.num_base_triples
    }

    pub fn num_entities(&self) -> usize {
        self.vocab.num_entities()
    }

    pub fn num_base_relations(&self) -> usize {
        self.vocab.num_base_relations()
    }

    pub fn is_augmented(&self) -> bool {
        self.augmented
    }

    /// Tails reachable from `e` via `rel`, ascending. Empty when none.
    pub fn succ(&self, e: EntityId, rel: RelationId) -> &[EntityId] {
        self.index_hr.get(&(e, rel)).map_or(&[], Vec::as_slice)
    }

    /// Heads with an edge into `e` via `rel`, ascending.
    pub fn pred(&self, e: EntityId, rel: RelationId) -> &[EntityId] {
        self.index_tr.get(&(e, rel)).map_or(&[], Vec::as_slice)
    }

    pub fn contains(&self, head: EntityId, relation: RelationId, tail: EntityId) -> bool {
        self.succ(head, relation).binary_search(&tail).is_ok()
    }

    /// All relations (base and inverse) linking `head` to `tail`, ascending.
    pub fn relations_between(&self, head: EntityId, tail: EntityId) -> &[RelationId] {
        self.index_ht.get(&(head, tail)).map_or(&[], Vec::as_slice)
    }

    pub fn base_relations_between(
        &self,
        head: EntityId,
        tail: EntityId,
    ) -> impl Iterator<Item = RelationId> + '_ {
        self.relations_between(head, tail)
            .iter()
            .copied()
            .filter(|&r| is_base(r))
    }

    /// Sorted (head, tail) pairs of a relation.
    pub fn pairs_of(&self, rel: RelationId) -> &[(EntityId, EntityId)] {
        &self.index_r[rel as usize]
    }

    pub fn out_relations(&self, e: EntityId) -> &[RelationId] {
        &self.out_rels[e as usize]
    }

    pub fn concepts_of(&self, e: EntityId) -> &[ConceptId] {
        &self.concepts[e as usize]
    }

    /// Whether any entity carries a concept. When false, concept
    /// co-occurrence scoring is disabled.
    pub fn has_concepts(&self) -> bool {
        self.has_concepts
    }

    /// Classifies a base relation by its average tails-per-head and
    /// heads-per-tail over the stored triples.
    pub fn relation_category(&self, rel: RelationId) -> Result<RelationCategory> {
        if !is_base(rel) {
            return Err(Error::invalid(format!(
                "relation_category expects a base relation, got {}",
                self.vocab.relation_token(rel)
            )));
        }
        let pairs = self.pairs_of(rel);
        if pairs.is_empty() {
            return Err(Error::invalid(format!(
                "relation {} has no triples",
                self.vocab.relation_token(rel)
            )));
        }
        let mut heads = HashSet::new();
        let mut tails = HashSet::new();
        for &(h, t) in pairs {
            heads.insert(h);
            tails.insert(t);
        }
        let tph = pairs.len() as f64 / heads.len() as f64;
        let hpt = pairs.len() as f64 / tails.len() as f64;
        let many_heads = hpt > CATEGORY_THRESHOLD;
        let many_tails = tph > CATEGORY_THRESHOLD;
        Ok(match (many_heads, many_tails) {
            (false, false) => RelationCategory::OneToOne,
            (false, true) => RelationCategory::OneToMany,
            (true, false) => RelationCategory::ManyToOne,
            (true, true) => RelationCategory::ManyToMany,
        })
    }

    /// Maps token triples from an evaluation split onto ids. Entities or
    /// relations absent from the training vocabulary are an error: their
    /// embeddings would be untrained.
    pub fn resolve_triples(&self, triples: &[TokenTriple]) -> Result<Vec<Triple>> {
        triples
            .iter()
            .map(|(h, r, t)| {
                Ok(Triple::new(
                    self.vocab.require_entity(h)?,
                    self.vocab.require_relation(r)?,
                    self.vocab.require_entity(t)?,
                ))
            })
            .collect()
    }
}

pub type TokenTriple = (String, String, String);

/// Parses a triples file: one `head<TAB>relation<TAB>tail` per line, `#`
/// comment lines and blank lines skipped. Duplicates are preserved here;
/// deduplication happens at graph build.
pub fn load_triples(path: impl AsRef<Path>) -> Result<Vec<TokenTriple>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let (h, r, t) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
            (Some(h), Some(r), Some(t), None) => (h, r, t),
            _ => {
                return Err(Error::parse(
                    path,
                    lineno + 1,
                    "expected exactly 3 tab-separated fields",
                ))
            }
        };
        if h.is_empty() || r.is_empty() || t.is_empty() {
            return Err(Error::parse(path, lineno + 1, "empty field"));
        }
        out.push((h.to_string(), r.to_string(), t.to_string()));
    }
    Ok(out)
}

/// Parses a concepts file: one `entity<TAB>concept` per line; repeated
/// entities accumulate concepts.
pub fn load_concept_pairs(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let (e, c) = match (fields.next(), fields.next(), fields.next()) {
            (Some(e), Some(c), None) => (e, c),
            _ => {
                return Err(Error::parse(
                    path,
                    lineno + 1,
                    "expected exactly 2 tab-separated fields",
                ))
            }
        };
        if e.is_empty() || c.is_empty() {
            return Err(Error::parse(path, lineno + 1, "empty field"));
        }
        out.push((e.to_string(), c.to_string()));
    }
    Ok(out)
}

/// Builds the indexed graph from token triples and optional concept pairs.
///
/// Duplicate triples are dropped. With `augment_inverses` every base triple
/// `(h, r, t)` is also stored as `(t, INV::r, h)`. Concept pairs naming
/// entities that never appear in the triples are ignored.
pub fn build_graph(
    triples: &[TokenTriple],
    concept_pairs: &[(String, String)],
    augment_inverses: bool,
) -> Result<KnowledgeGraph> {
    let mut vocab = Vocab::default();
    let mut stored: Vec<Triple> = Vec::with_capacity(triples.len() * 2);
    let mut seen: HashSet<Triple> = HashSet::with_capacity(triples.len() * 2);
    let mut num_base = 0usize;

    for (h, r, t) in triples {
        if h.is_empty() || r.is_empty() || t.is_empty() {
            return Err(Error::invalid("empty token in triple"));
        }
        if r.starts_with(INV_PREFIX) {
            return Err(Error::invalid(format!(
                "relation token {r:?} uses the reserved {INV_PREFIX} prefix"
            )));
        }
        let head = vocab.intern_entity(h);
        let rel = vocab.intern_base_relation(r);
        let tail = vocab.intern_entity(t);
        let triple = Triple::new(head, rel, tail);
        if !seen.insert(triple) {
            continue;
        }
        num_base += 1;
        stored.push(triple);
        if augment_inverses {
            let inv = Triple::new(tail, inverse(rel), head);
            if seen.insert(inv) {
                stored.push(inv);
            }
        }
    }

    let n_entities = vocab.num_entities();
    let mut concepts: Vec<Vec<ConceptId>> = vec![Vec::new(); n_entities];
    let mut has_concepts = false;
    for (ent, con) in concept_pairs {
        let Some(e) = vocab.entity_id(ent) else {
            continue;
        };
        let c = vocab.intern_concept(con);
        let list = &mut concepts[e as usize];
        if !list.contains(&c) {
            list.push(c);
            has_concepts = true;
        }
    }
    for list in &mut concepts {
        list.sort_unstable();
    }

    let mut index_hr: HashMap<(EntityId, RelationId), Vec<EntityId>> = HashMap::new();
    let mut index_tr: HashMap<(EntityId, RelationId), Vec<EntityId>> = HashMap::new();
    let mut index_ht: HashMap<(EntityId, EntityId), Vec<RelationId>> = HashMap::new();
    let mut index_r: Vec<Vec<(EntityId, EntityId)>> = vec![Vec::new(); vocab.num_relations()];
    let mut out_rels: Vec<Vec<RelationId>> = vec![Vec::new(); n_entities];

    for tr in &stored {
        index_hr
            .entry((tr.head, tr.relation))
            .or_default()
            .push(tr.tail);
        index_tr
            .entry((tr.tail, tr.relation))
            .or_default()
            .push(tr.head);
        index_ht
            .entry((tr.head, tr.tail))
            .or_default()
            .push(tr.relation);
        index_r[tr.relation as usize].push((tr.head, tr.tail));
        let ors = &mut out_rels[tr.head as usize];
        if !ors.contains(&tr.relation) {
            ors.push(tr.relation);
        }
    }
    for v in index_hr.values_mut() {
        v.sort_unstable();
    }
    for v in index_tr.values_mut() {
        v.sort_unstable();
    }
    for v in index_ht.values_mut() {
        v.sort_unstable();
    }
    for v in &mut index_r {
        v.sort_unstable();
    }
    for v in &mut out_rels {
        v.sort_unstable();
    }

    Ok(KnowledgeGraph {
        vocab,
        triples: stored,
        num_base_triples: num_base,
        augmented: augment_inverses,
        index_hr,
        index_tr,
        index_ht,
        index_r,
        out_rels,
        concepts,
        has_concepts,
    })
}

/// Convenience builder used throughout the tests: token triples given as
/// `(&str, &str, &str)`.
pub fn graph_from_tokens(
    triples: &[(&str, &str, &str)],
    concept_pairs: &[(&str, &str)],
    augment_inverses: bool,
) -> Result<KnowledgeGraph> {
    let triples: Vec<TokenTriple> = triples
        .iter()
        .map(|(h, r, t)| (h.to_string(), r.to_string(), t.to_string()))
        .collect();
    let concepts: Vec<(String, String)> = concept_pairs
        .iter()
        .map(|(e, c)| (e.to_string(), c.to_string()))
        .collect();
    build_graph(&triples, &concepts, augment_inverses)
}
