//! Relation-path enumeration and path-constraint resource allocation.
//!
//! A unit resource placed on the head entity is split evenly across each
//! hop's successors; whatever arrives at a tail is that path's reliability
//! for the (head, tail) pair. Resource reaching a dead end is destroyed,
//! not renormalized, so reliability doubles as a reachability weight.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use arrayvec::ArrayVec;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kg::{is_base, EntityId, KnowledgeGraph, RelationId, Vocab};

/// Maximum number of hops in a path (and atoms in a rule body).
pub const MAX_PATH_LEN: usize = 2;

/// An ordered sequence of 1 or 2 relation ids (inverses allowed).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationPath {
    rels: ArrayVec<RelationId, MAX_PATH_LEN>,
}

impl RelationPath {
    pub fn single(rel: RelationId) -> Self {
        let mut rels = ArrayVec::new();
        rels.push(rel);
        RelationPath { rels }
    }

    pub fn pair(first: RelationId, second: RelationId) -> Self {
        let mut rels = ArrayVec::new();
        rels.push(first);
        rels.push(second);
        RelationPath { rels }
    }

    pub fn from_slice(rels: &[RelationId]) -> Result<Self> {
        match rels {
            [r] => Ok(Self::single(*r)),
            [r1, r2] => Ok(Self::pair(*r1, *r2)),
            _ => Err(Error::invalid(format!(
                "path length must be 1 or 2, got {}",
                rels.len()
            ))),
        }
    }

    pub fn rels(&self) -> &[RelationId] {
        &self.rels
    }

    pub fn len(&self) -> usize {
        self.rels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rels.is_empty()
    }

    /// Space-separated relation tokens, e.g. `"BornIn INV::LocatedIn"`.
    pub fn display(&self, vocab: &Vocab) -> String {
        let mut s = String::new();
        for (i, &r) in self.rels.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            s.push_str(vocab.relation_token(r));
        }
        s
    }
}

/// Knobs for path enumeration.
#[derive(Debug, Clone)]
pub struct PathConfig {
    /// Paths with reliability below this are dropped.
    pub min_reliability: f64,
    /// Per entity pair, only the highest-reliability paths are kept.
    pub max_paths_per_pair: usize,
}

impl Default for PathConfig {
    fn default() -> Self {
        PathConfig {
            min_reliability: 0.01,
            max_paths_per_pair: 200,
        }
    }
}

/// (head, tail) → paths with reliabilities, descending by reliability
/// (ties by relation-id sequence).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PathIndex {
    entries: HashMap<(EntityId, EntityId), Vec<(RelationPath, f64)>>,
}

impl PathIndex {
    pub fn get(&self, head: EntityId, tail: EntityId) -> Option<&[(RelationPath, f64)]> {
        self.entries.get(&(head, tail)).map(Vec::as_slice)
    }

    pub fn num_pairs(&self) -> usize {
        self.entries.len()
    }

    pub fn num_paths(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Pairs in ascending (head, tail) order.
    pub fn iter_sorted(
        &self,
    ) -> impl Iterator<Item = ((EntityId, EntityId), &[(RelationPath, f64)])> {
        let mut keys: Vec<_> = self.entries.keys().copied().collect();
        keys.sort_unstable();
        keys.into_iter().map(|k| (k, self.entries[&k].as_slice()))
    }

    fn insert(&mut self, pair: (EntityId, EntityId), paths: Vec<(RelationPath, f64)>) {
        if !paths.is_empty() {
            self.entries.insert(pair, paths);
        }
    }
}

/// Splits a unit resource from `head` along `path` and returns the amount
/// arriving at each reachable tail. Entities without a next-hop successor
/// lose their share.
pub fn pcra_flow(
    kg: &KnowledgeGraph,
    head: EntityId,
    path: &RelationPath,
) -> BTreeMap<EntityId, f64> {
    let mut frontier: BTreeMap<EntityId, f64> = BTreeMap::new();
    frontier.insert(head, 1.0);
    for &rel in path.rels() {
        let mut next: BTreeMap<EntityId, f64> = BTreeMap::new();
        for (&e, &resource) in &frontier {
            let succ = kg.succ(e, rel);
            if succ.is_empty() {
                continue;
            }
            let share = resource / succ.len() as f64;
            for &t in succ {
                *next.entry(t).or_insert(0.0) += share;
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    frontier
}

/// All distinct relation paths of length ≤ 2 from `head` to `tail` over the
/// stored edges (inverse relations included when the graph is augmented).
pub fn paths_between(
    kg: &KnowledgeGraph,
    head: EntityId,
    tail: EntityId,
) -> Vec<RelationPath> {
    let mut out: Vec<RelationPath> = kg
        .relations_between(head, tail)
        .iter()
        .map(|&r| RelationPath::single(r))
        .collect();
    for &r1 in kg.out_relations(head) {
        for &m in kg.succ(head, r1) {
            for &r2 in kg.relations_between(m, tail) {
                out.push(RelationPath::pair(r1, r2));
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Paths between one pair with their reliabilities, filtered and ordered
/// like `enumerate_paths` output. Used for on-demand lookup at evaluation.
pub fn scored_paths_between(
    kg: &KnowledgeGraph,
    head: EntityId,
    tail: EntityId,
    config: &PathConfig,
) -> Vec<(RelationPath, f64)> {
    let mut scored = Vec::new();
    for path in paths_between(kg, head, tail) {
        if let Some(&r) = pcra_flow(kg, head, &path).get(&tail) {
            if r >= config.min_reliability {
                scored.push((path, r));
            }
        }
    }
    order_and_truncate(&mut scored, config.max_paths_per_pair);
    scored
}

fn order_and_truncate(paths: &mut Vec<(RelationPath, f64)>, cap: usize) {
    paths.sort_unstable_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("reliabilities are finite")
            .then_with(|| a.0.cmp(&b.0))
    });
    paths.truncate(cap);
}

/// Enumerates paths for every ordered entity pair linked by at least one
/// direct base-relation triple, scoring each path by resource allocation.
///
/// Work is split across head entities; the merged result is deterministic.
pub fn enumerate_paths(kg: &KnowledgeGraph, config: &PathConfig) -> PathIndex {
    let heads: Vec<EntityId> = (0..kg.num_entities() as u32).collect();
    let per_head: Vec<Vec<(EntityId, Vec<(RelationPath, f64)>)>> = heads
        .par_iter()
        .map(|&h| enumerate_from_head(kg, h, config))
        .collect();

    let mut index = PathIndex::default();
    for (h, tails) in heads.iter().zip(per_head) {
        for (t, paths) in tails {
            index.insert((*h, t), paths);
        }
    }
    index
}

fn enumerate_from_head(
    kg: &KnowledgeGraph,
    head: EntityId,
    config: &PathConfig,
) -> Vec<(EntityId, Vec<(RelationPath, f64)>)> {
    // Pairs worth indexing: tails with a direct base-relation edge from head.
    let mut targets: HashSet<EntityId> = HashSet::new();
    for &rel in kg.out_relations(head) {
        if is_base(rel) {
            targets.extend(kg.succ(head, rel).iter().copied());
        }
    }
    if targets.is_empty() {
        return Vec::new();
    }

    let mut per_tail: BTreeMap<EntityId, Vec<(RelationPath, f64)>> = BTreeMap::new();
    for &r1 in kg.out_relations(head) {
        let frontier = kg.succ(head, r1);
        let share = 1.0 / frontier.len() as f64;
        for &t in frontier {
            if targets.contains(&t) {
                per_tail
                    .entry(t)
                    .or_default()
                    .push((RelationPath::single(r1), share));
            }
        }
        // Second hop: accumulate per (relation, tail) so merging entities
        // that converge on the same tail sum their resource.
        let mut acc: BTreeMap<(RelationId, EntityId), f64> = BTreeMap::new();
        for &m in frontier {
            for &r2 in kg.out_relations(m) {
                let succ = kg.succ(m, r2);
                let w = share / succ.len() as f64;
                for &t in succ {
                    if targets.contains(&t) {
                        *acc.entry((r2, t)).or_insert(0.0) += w;
                    }
                }
            }
        }
        for ((r2, t), reliability) in acc {
            per_tail
                .entry(t)
                .or_default()
                .push((RelationPath::pair(r1, r2), reliability));
        }
    }

    per_tail
        .into_iter()
        .filter_map(|(t, mut paths)| {
            paths.retain(|(_, r)| *r >= config.min_reliability);
            if paths.is_empty() {
                return None;
            }
            order_and_truncate(&mut paths, config.max_paths_per_pair);
            Some((t, paths))
        })
        .collect()
}

/// Writes the index as `head<TAB>tail<TAB>rel1[ rel2]<TAB>reliability` lines,
/// pairs ascending, paths in index order.
pub fn save_path_index(
    index: &PathIndex,
    vocab: &Vocab,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for ((h, t), paths) in index.iter_sorted() {
        for (p, reliability) in paths {
            writeln!(
                out,
                "{}\t{}\t{}\t{}",
                vocab.entity_token(h),
                vocab.entity_token(t),
                p.display(vocab),
                reliability
            )
            .expect("writing to string cannot fail");
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn load_path_index(path: impl AsRef<Path>, vocab: &Vocab) -> Result<PathIndex> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut entries: HashMap<(EntityId, EntityId), Vec<(RelationPath, f64)>> = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let &[h, t, rels, reliability] = fields.as_slice() else {
            return Err(Error::parse(
                path,
                lineno + 1,
                "expected head<TAB>tail<TAB>path<TAB>reliability",
            ));
        };
        let head = vocab
            .entity_id(h)
            .ok_or_else(|| Error::parse(path, lineno + 1, format!("unknown entity {h:?}")))?;
        let tail = vocab
            .entity_id(t)
            .ok_or_else(|| Error::parse(path, lineno + 1, format!("unknown entity {t:?}")))?;
        let mut ids: Vec<RelationId> = Vec::new();
        for tok in rels.split(' ') {
            let id = vocab.relation_id(tok).ok_or_else(|| {
                Error::parse(path, lineno + 1, format!("unknown relation {tok:?}"))
            })?;
            ids.push(id);
        }
        let rel_path = RelationPath::from_slice(&ids)
            .map_err(|e| Error::parse(path, lineno + 1, e.to_string()))?;
        let r: f64 = reliability
            .parse()
            .map_err(|_| Error::parse(path, lineno + 1, "bad reliability"))?;
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::parse(
                path,
                lineno + 1,
                format!("reliability {r} out of range (0,1]"),
            ));
        }
        let list = entries.entry((head, tail)).or_default();
        if list.iter().any(|(p, _)| p == &rel_path) {
            return Err(Error::parse(path, lineno + 1, "duplicate path for pair"));
        }
        list.push((rel_path, r));
    }
    Ok(PathIndex { entries })
}
