//! Link-prediction evaluation: energy-based ranking with raw and
//! filtered protocols, per-category breakdowns, and path-level
//! explanations for individual predictions.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::embedding::{path_embedding, EmbeddingStore, Norm};
use crate::error::Result;
use crate::kg::{EntityId, KnowledgeGraph, RelationCategory, RelationId, Triple, Vocab};
use crate::paths::{scored_paths_between, PathConfig, PathIndex, RelationPath};
use crate::rules::{CPRule, RuleSet};

/// Ranking-time weights and the optional on-demand path fallback.
#[derive(Debug, Clone)]
pub struct EvalConfig {
    /// Weight of the path energy in the candidate score.
    pub alpha1: f64,
    pub norm: Norm,
    /// When set, candidate pairs absent from the path index get their
    /// paths computed on the fly — but only for the `on_demand_top_k`
    /// candidates with the best triple energy.
    pub on_demand_paths: bool,
    pub on_demand_top_k: usize,
    pub path_config: PathConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            alpha1: 1.0,
            norm: Norm::L1,
            on_demand_paths: false,
            on_demand_top_k: 50,
            path_config: PathConfig::default(),
        }
    }
}

/// All triples an evaluation must treat as known when filtering
/// candidate corruptions: train, validation, and test splits together.
#[derive(Debug, Clone, Default)]
pub struct KnownTriples {
    set: HashSet<(EntityId, RelationId, EntityId)>,
}

impl KnownTriples {
    pub fn from_splits(splits: &[&[Triple]]) -> Self {
        let mut set = HashSet::new();
        for split in splits {
            for t in *split {
                set.insert((t.head, t.relation, t.tail));
            }
        }
        KnownTriples { set }
    }

    pub fn contains(&self, head: EntityId, relation: RelationId, tail: EntityId) -> bool {
        self.set.contains(&(head, relation, tail))
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }
}

/// Rank of `true_entity` among ascending `scores`, skipping excluded
/// candidates. Ties place the true entity at the ceiling of its tie
/// group's mean rank.
pub fn rank_from_scores<F>(scores: &[f64], true_entity: usize, excluded: F) -> usize
where
    F: Fn(usize) -> bool,
{
    let target = scores[true_entity];
    let mut smaller = 0usize;
    let mut ties = 0usize;
    for (e, &s) in scores.iter().enumerate() {
        if e != true_entity && excluded(e) {
            continue;
        }
        if s < target {
            smaller += 1;
        } else if s == target {
            ties += 1;
        }
    }
    smaller + (ties + 1).div_ceil(2)
}

fn weighted_path_energy(
    emb: &EmbeddingStore,
    rules: &RuleSet,
    table: &HashMap<RelationPath, Vec<f64>>,
    head: EntityId,
    tail: EntityId,
    entry: &[(RelationPath, f64)],
    norm: Norm,
) -> f64 {
    let total: f64 = entry.iter().map(|(_, r)| r).sum();
    let h = emb.entity(head);
    let t = emb.entity(tail);
    let mut energy = 0.0;
    let mut fresh;
    for (path, reliability) in entry {
        let p = match table.get(path) {
            Some(v) => v,
            None => {
                fresh = path_embedding(path, emb, rules);
                &fresh
            }
        };
        let u: Vec<f64> = h
            .iter()
            .zip(p)
            .zip(t)
            .map(|((hv, pv), tv)| hv + pv - tv)
            .collect();
        energy += reliability / total * norm.eval(&u);
    }
    energy
}

fn build_path_table(
    paths: &PathIndex,
    rules: &RuleSet,
    emb: &EmbeddingStore,
) -> HashMap<RelationPath, Vec<f64>> {
    let mut distinct: HashSet<&RelationPath> = HashSet::new();
    for (_, entry) in paths.iter_sorted() {
        for (path, _) in entry {
            distinct.insert(path);
        }
    }
    distinct
        .into_iter()
        .map(|p| (p.clone(), path_embedding(p, emb, rules)))
        .collect()
}

/// Candidate score for one triple: triple energy plus `alpha1` times the
/// reliability-weighted path energy over the pair's indexed paths. A pair
/// with no indexed paths contributes no path term.
pub fn score_candidate(
    emb: &EmbeddingStore,
    rules: &RuleSet,
    paths: &PathIndex,
    head: EntityId,
    relation: RelationId,
    tail: EntityId,
    config: &EvalConfig,
) -> f64 {
    let mut score = emb.triple_energy(head, relation, tail, config.norm);
    if config.alpha1 > 0.0 {
        if let Some(entry) = paths.get(head, tail) {
            let table = HashMap::new();
            score += config.alpha1
                * weighted_path_energy(emb, rules, &table, head, tail, entry, config.norm);
        }
    }
    score
}

/// Scores every entity as a replacement for one slot of the query triple.
pub(crate) fn query_scores(
    kg: &KnowledgeGraph,
    emb: &EmbeddingStore,
    rules: &RuleSet,
    paths: &PathIndex,
    table: &HashMap<RelationPath, Vec<f64>>,
    query: Triple,
    predict_head: bool,
    config: &EvalConfig,
) -> Vec<f64> {
    let n = kg.num_entities();
    let pair = |e: u32| {
        if predict_head {
            (e, query.tail)
        } else {
            (query.head, e)
        }
    };
    let mut scores: Vec<f64> = (0..n as u32)
        .map(|e| {
            let (h, t) = pair(e);
            emb.triple_energy(h, query.relation, t, config.norm)
        })
        .collect();
    if config.alpha1 == 0.0 {
        return scores;
    }
    let on_demand: HashSet<u32> = if config.on_demand_paths {
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_by(|&a, &b| {
            scores[a as usize]
                .partial_cmp(&scores[b as usize])
                .unwrap()
                .then(a.cmp(&b))
        });
        order.into_iter().take(config.on_demand_top_k).collect()
    } else {
        HashSet::new()
    };
    for e in 0..n as u32 {
        let (h, t) = pair(e);
        if let Some(entry) = paths.get(h, t) {
            scores[e as usize] += config.alpha1
                * weighted_path_energy(emb, rules, table, h, t, entry, config.norm);
        } else if on_demand.contains(&e) {
            let entry = scored_paths_between(kg, h, t, &config.path_config);
            if !entry.is_empty() {
                scores[e as usize] += config.alpha1
                    * weighted_path_energy(emb, rules, table, h, t, &entry, config.norm);
            }
        }
    }
    scores
}

/// Mean rank, mean reciprocal rank, and hits under one protocol.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricSet {
    pub mr: f64,
    pub mrr: f64,
    pub hits1: f64,
    pub hits3: f64,
    pub hits10: f64,
}

/// Filtered Hits@10 for one relation category and prediction side.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CategoryCell {
    pub queries: usize,
    pub hits10: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Metrics {
    pub num_queries: usize,
    pub raw: MetricSet,
    pub filtered: MetricSet,
    /// Rows follow [`RelationCategory::ALL`]; columns are predict-head,
    /// predict-tail.
    pub by_category: [[CategoryCell; 2]; 4],
}

struct QueryRecord {
    raw: usize,
    filtered: usize,
    category: RelationCategory,
    predict_head: bool,
}

fn category_index(c: RelationCategory) -> usize {
    RelationCategory::ALL.iter().position(|&x| x == c).unwrap()
}

fn aggregate(records: &[QueryRecord]) -> Metrics {
    let mut metrics = Metrics {
        num_queries: records.len(),
        ..Metrics::default()
    };
    if records.is_empty() {
        return metrics;
    }
    let n = records.len() as f64;
    let set = |pick: &dyn Fn(&QueryRecord) -> usize| {
        let mut m = MetricSet::default();
        for r in records {
            let rank = pick(r);
            m.mr += rank as f64;
            m.mrr += 1.0 / rank as f64;
            m.hits1 += (rank <= 1) as u8 as f64;
            m.hits3 += (rank <= 3) as u8 as f64;
            m.hits10 += (rank <= 10) as u8 as f64;
        }
        m.mr /= n;
        m.mrr /= n;
        m.hits1 /= n;
        m.hits3 /= n;
        m.hits10 /= n;
        m
    };
    metrics.raw = set(&|r| r.raw);
    metrics.filtered = set(&|r| r.filtered);
    let mut hit_counts = [[0usize; 2]; 4];
    for r in records {
        let row = category_index(r.category);
        let col = usize::from(!r.predict_head);
        let cell = &mut metrics.by_category[row][col];
        cell.queries += 1;
        hit_counts[row][col] += (r.filtered <= 10) as usize;
    }
    for row in 0..4 {
        for col in 0..2 {
            let cell = &mut metrics.by_category[row][col];
            if cell.queries > 0 {
                cell.hits10 = hit_counts[row][col] as f64 / cell.queries as f64;
            }
        }
    }
    metrics
}

/// Ranks every test triple in both directions against all entities.
///
/// For each triple the head and the tail are each replaced by every
/// entity; candidates scored by [`score_candidate`]'s formula, ranked
/// ascending. The filtered protocol drops candidates forming a known
/// triple other than the query's own. Queries are independent, so they
/// run in parallel; aggregation order is fixed by the test order.
pub fn evaluate(
    kg: &KnowledgeGraph,
    test: &[Triple],
    emb: &EmbeddingStore,
    rules: &RuleSet,
    paths: &PathIndex,
    known: &KnownTriples,
    config: &EvalConfig,
) -> Result<Metrics> {
    let table = build_path_table(paths, rules, emb);
    let categories: HashMap<RelationId, RelationCategory> = test
        .iter()
        .map(|t| t.relation)
        .collect::<HashSet<_>>()
        .into_iter()
        .map(|r| kg.relation_category(r).map(|c| (r, c)))
        .collect::<Result<_>>()?;
    let queries: Vec<(Triple, bool)> = test
        .iter()
        .flat_map(|&t| [(t, true), (t, false)])
        .collect();
    let records: Vec<QueryRecord> = queries
        .par_iter()
        .map(|&(triple, predict_head)| {
            let scores = query_scores(kg, emb, rules, paths, &table, triple, predict_head, config);
            let true_entity = if predict_head { triple.head } else { triple.tail };
            let raw = rank_from_scores(&scores, true_entity as usize, |_| false);
            let filtered = rank_from_scores(&scores, true_entity as usize, |e| {
                let e = e as u32;
                if predict_head {
                    known.contains(e, triple.relation, triple.tail)
                } else {
                    known.contains(triple.head, triple.relation, e)
                }
            });
            QueryRecord {
                raw,
                filtered,
                category: categories[&triple.relation],
                predict_head,
            }
        })
        .collect();
    Ok(aggregate(&records))
}

/// Renders a metrics report: `key: value` lines for the global numbers,
/// then a tab-separated per-category Hits@10 block.
pub fn render_metrics(metrics: &Metrics) -> String {
    let mut out = String::new();
    writeln!(out, "queries: {}", metrics.num_queries).unwrap();
    let mut protocol = |name: &str, m: &MetricSet| {
        writeln!(out, "{name}_mr: {:.4}", m.mr).unwrap();
        writeln!(out, "{name}_mrr: {:.4}", m.mrr).unwrap();
        writeln!(out, "{name}_hits1: {:.4}", m.hits1).unwrap();
        writeln!(out, "{name}_hits3: {:.4}", m.hits3).unwrap();
        writeln!(out, "{name}_hits10: {:.4}", m.hits10).unwrap();
    };
    protocol("raw", &metrics.raw);
    protocol("filtered", &metrics.filtered);
    out.push('\n');
    out.push_str("category\tpredict_head_hits10\tpredict_tail_hits10\n");
    for (row, category) in RelationCategory::ALL.iter().enumerate() {
        let cell = |col: usize| {
            let c = metrics.by_category[row][col];
            if c.queries == 0 {
                "-".to_string()
            } else {
                format!("{:.4}", c.hits10)
            }
        };
        writeln!(out, "{category}\t{}\t{}", cell(0), cell(1)).unwrap();
    }
    out
}

/// One path's contribution to a prediction's score.
#[derive(Debug, Clone, PartialEq)]
pub struct PathContribution {
    pub path: RelationPath,
    pub reliability: f64,
    /// Reliability normalized over the pair's path set.
    pub weight: f64,
    pub energy: f64,
    /// The rule that rewrote the path into its head relation, when one
    /// applied.
    pub rule: Option<CPRule>,
}

/// Score breakdown for a single candidate triple.
#[derive(Debug, Clone, PartialEq)]
pub struct Explanation {
    pub head: EntityId,
    pub relation: RelationId,
    pub tail: EntityId,
    pub triple_energy: f64,
    pub path_energy: Option<f64>,
    pub score: f64,
    pub paths: Vec<PathContribution>,
}

/// Breaks a candidate's score into its triple energy and the weighted
/// energy of every indexed path between the pair, with the rule behind
/// each composition.
pub fn explain(
    emb: &EmbeddingStore,
    rules: &RuleSet,
    paths: &PathIndex,
    head: EntityId,
    relation: RelationId,
    tail: EntityId,
    config: &EvalConfig,
) -> Explanation {
    let triple_energy = emb.triple_energy(head, relation, tail, config.norm);
    let entry = paths.get(head, tail).unwrap_or(&[]);
    let total: f64 = entry.iter().map(|(_, r)| r).sum();
    let h = emb.entity(head);
    let t = emb.entity(tail);
    let mut contributions = Vec::with_capacity(entry.len());
    for (path, reliability) in entry {
        let p = path_embedding(path, emb, rules);
        let u: Vec<f64> = h
            .iter()
            .zip(&p)
            .zip(t)
            .map(|((hv, pv), tv)| hv + pv - tv)
            .collect();
        let rule = match path.rels() {
            &[r1, r2] => rules
                .compose_head(r1, r2)
                .and_then(|head_rel| rules.get(head_rel, path))
                .cloned(),
            _ => None,
        };
        contributions.push(PathContribution {
            path: path.clone(),
            reliability: *reliability,
            weight: reliability / total,
            energy: config.norm.eval(&u),
            rule,
        });
    }
    let path_energy = if config.alpha1 > 0.0 && !contributions.is_empty() {
        Some(
            contributions
                .iter()
                .map(|c| c.weight * c.energy)
                .sum::<f64>(),
        )
    } else {
        None
    };
    let score = triple_energy + config.alpha1 * path_energy.unwrap_or(0.0);
    Explanation {
        head,
        relation,
        tail,
        triple_energy,
        path_energy,
        score,
        paths: contributions,
    }
}

/// Text rendering of an explanation, one line per path.
pub fn render_explanation(explanation: &Explanation, vocab: &Vocab) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{} -[{}]-> {}  score {:.4}",
        vocab.entity_token(explanation.head),
        vocab.relation_token(explanation.relation),
        vocab.entity_token(explanation.tail),
        explanation.score
    )
    .unwrap();
    match explanation.path_energy {
        Some(p) => writeln!(
            out,
            "  triple energy {:.4}, path energy {:.4}",
            explanation.triple_energy, p
        )
        .unwrap(),
        None => writeln!(
            out,
            "  triple energy {:.4}; no path term",
            explanation.triple_energy
        )
        .unwrap(),
    }
    if explanation.paths.is_empty() {
        out.push_str("  no indexed paths between this pair\n");
    }
    for c in &explanation.paths {
        write!(
            out,
            "  path {}  reliability {:.4}  weight {:.4}  energy {:.4}",
            c.path.display(vocab),
            c.reliability,
            c.weight,
            c.energy
        )
        .unwrap();
        match &c.rule {
            Some(rule) => writeln!(out, "  via {} (sc {:.2})", rule.display(vocab), rule.sc).unwrap(),
            None => out.push('\n'),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::graph_from_tokens;
    use crate::paths::load_path_index;
    use crate::rules::CPRule;

    fn write_index(lines: &str) -> tempfile::NamedTempFile {
        let f = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f.path(), lines).unwrap();
        f
    }

    #[test]
    fn rank_counts_smaller_scores() {
        // True candidate scores 0.5 against 0.3 and 0.9; the 0.3 entity
        // forms a known triple, so filtering removes it.
        let scores = [0.5, 0.3, 0.9];
        assert_eq!(rank_from_scores(&scores, 0, |_| false), 2);
        assert_eq!(rank_from_scores(&scores, 0, |e| e == 1), 1);
    }

    #[test]
    fn rank_places_ties_at_mean_rank_rounded_up() {
        let scores = [0.7; 5];
        for e in 0..5 {
            assert_eq!(rank_from_scores(&scores, e, |_| false), 3);
        }
        let scores = [0.7; 4];
        assert_eq!(rank_from_scores(&scores, 0, |_| false), 3);
        // Two smaller, then a tie group of three.
        let scores = [0.1, 0.2, 0.5, 0.5, 0.5];
        assert_eq!(rank_from_scores(&scores, 3, |_| false), 4);
    }

    #[test]
    fn rank_of_unique_minimum_is_one() {
        let scores = [0.9, 0.1, 0.5];
        assert_eq!(rank_from_scores(&scores, 1, |_| false), 1);
    }

    fn hand_store(kg: &KnowledgeGraph, entity_values: &[f64], relation_values: &[f64]) -> EmbeddingStore {
        let mut emb = EmbeddingStore::zeros(kg.num_entities(), kg.num_base_relations(), 1);
        for (i, &v) in entity_values.iter().enumerate() {
            emb.entity_mut(i as u32)[0] = v;
        }
        for (i, &v) in relation_values.iter().enumerate() {
            emb.relation_mut(i)[0] = v;
        }
        emb
    }

    #[test]
    fn candidate_score_adds_weighted_path_energy() {
        let kg = graph_from_tokens(
            &[("h", "r1", "t"), ("h", "r2", "t"), ("h", "rq", "t")],
            &[],
            true,
        )
        .unwrap();
        let v = kg.vocab();
        let emb = hand_store(&kg, &[0.0, 1.0], &[1.0, 0.5, 0.8]);
        let index_file = write_index("h\tt\tr1\t0.6\nh\tt\tr2\t0.2\n");
        let paths = load_path_index(index_file.path(), v).unwrap();
        let rq = v.relation_id("rq").unwrap();
        let config = EvalConfig::default();
        let score = score_candidate(&emb, &RuleSet::new(), &paths, 0, rq, 1, &config);
        assert!((score - 0.325).abs() < 1e-12);
        let triple_only = score_candidate(
            &emb,
            &RuleSet::new(),
            &paths,
            0,
            rq,
            1,
            &EvalConfig {
                alpha1: 0.0,
                ..EvalConfig::default()
            },
        );
        assert!((triple_only - 0.2).abs() < 1e-12);
    }

    #[test]
    fn missing_pair_contributes_no_path_term() {
        let kg = graph_from_tokens(&[("a", "r", "b")], &[], true).unwrap();
        let emb = hand_store(&kg, &[0.0, 1.0], &[1.0]);
        let score = score_candidate(
            &emb,
            &RuleSet::new(),
            &PathIndex::default(),
            0,
            0,
            1,
            &EvalConfig::default(),
        );
        assert_eq!(score, 0.0);
    }

    #[test]
    fn aggregate_averages_both_protocols() {
        let records = vec![
            QueryRecord {
                raw: 2,
                filtered: 1,
                category: RelationCategory::OneToOne,
                predict_head: true,
            },
            QueryRecord {
                raw: 4,
                filtered: 4,
                category: RelationCategory::OneToOne,
                predict_head: false,
            },
        ];
        let m = aggregate(&records);
        assert_eq!(m.num_queries, 2);
        assert_eq!(m.filtered.mr, 2.5);
        assert_eq!(m.filtered.mrr, 0.625);
        assert_eq!(m.filtered.hits1, 0.5);
        assert_eq!(m.filtered.hits3, 0.5);
        assert_eq!(m.filtered.hits10, 1.0);
        assert_eq!(m.raw.mr, 3.0);
        assert_eq!(m.by_category[0][0].queries, 1);
        assert_eq!(m.by_category[0][1].queries, 1);
        assert_eq!(m.by_category[1][0].queries, 0);
    }

    #[test]
    fn perfect_embedding_ranks_first_on_both_sides() {
        let kg = graph_from_tokens(&[("a", "r", "b"), ("c", "r", "d")], &[], true).unwrap();
        let emb = hand_store(&kg, &[0.0, 1.0, 5.0, 7.0], &[1.0]);
        let test = [Triple {
            head: 0,
            relation: 0,
            tail: 1,
        }];
        let known = KnownTriples::from_splits(&[&test]);
        let m = evaluate(
            &kg,
            &test,
            &emb,
            &RuleSet::new(),
            &PathIndex::default(),
            &known,
            &EvalConfig {
                alpha1: 0.0,
                ..EvalConfig::default()
            },
        )
        .unwrap();
        assert_eq!(m.num_queries, 2);
        assert_eq!(m.raw.mr, 1.0);
        assert_eq!(m.filtered.mrr, 1.0);
        assert_eq!(m.filtered.hits1, 1.0);
    }

    #[test]
    fn filtering_removes_known_corruptions_only() {
        // Tail query (h, r, ?): true tail scores 0.5, h itself 0.9, e2
        // scores 0.3 but (h, r, e2) is a training triple.
        let kg = graph_from_tokens(&[("h", "r", "true_t"), ("h", "r", "e2")], &[], true).unwrap();
        let v = kg.vocab();
        let h = v.entity_id("h").unwrap();
        let true_t = v.entity_id("true_t").unwrap();
        let e2 = v.entity_id("e2").unwrap();
        let mut emb = EmbeddingStore::zeros(kg.num_entities(), 1, 1);
        emb.entity_mut(h)[0] = 0.0;
        emb.entity_mut(true_t)[0] = 0.4;
        emb.entity_mut(e2)[0] = 0.6;
        emb.relation_mut(0)[0] = 0.9;
        let config = EvalConfig {
            alpha1: 0.0,
            ..EvalConfig::default()
        };
        let table = HashMap::new();
        let query = Triple {
            head: h,
            relation: 0,
            tail: true_t,
        };
        let scores = query_scores(
            &kg,
            &emb,
            &RuleSet::new(),
            &PathIndex::default(),
            &table,
            query,
            false,
            &config,
        );
        assert!((scores[true_t as usize] - 0.5).abs() < 1e-12);
        assert!((scores[e2 as usize] - 0.3).abs() < 1e-12);
        assert!((scores[h as usize] - 0.9).abs() < 1e-12);
        let train: Vec<Triple> = kg.base_triples().copied().collect();
        let known = KnownTriples::from_splits(&[&train]);
        let raw = rank_from_scores(&scores, true_t as usize, |_| false);
        let filtered = rank_from_scores(&scores, true_t as usize, |e| {
            known.contains(h, 0, e as u32)
        });
        assert_eq!((raw, filtered), (2, 1));
    }

    #[test]
    fn on_demand_paths_reach_unindexed_pairs() {
        // a --r1--> m --r2--> b, but no direct a-b edge, so the pair is
        // missing from any enumerated index.
        let kg = graph_from_tokens(
            &[("a", "r1", "m"), ("m", "r2", "b"), ("p", "rq", "q")],
            &[],
            true,
        )
        .unwrap();
        let v = kg.vocab();
        let a = v.entity_id("a").unwrap();
        let b = v.entity_id("b").unwrap();
        let emb = hand_store(&kg, &[0.0, 0.5, 1.0, 3.0, 4.0], &[0.3, 0.3, 0.7]);
        let rq = v.relation_id("rq").unwrap();
        let query = Triple {
            head: a,
            relation: rq,
            tail: b,
        };
        let table = HashMap::new();
        let off = query_scores(
            &kg,
            &emb,
            &RuleSet::new(),
            &PathIndex::default(),
            &table,
            query,
            false,
            &EvalConfig::default(),
        );
        let on = query_scores(
            &kg,
            &emb,
            &RuleSet::new(),
            &PathIndex::default(),
            &table,
            query,
            false,
            &EvalConfig {
                on_demand_paths: true,
                on_demand_top_k: kg.num_entities(),
                ..EvalConfig::default()
            },
        );
        // Path a -r1-> m -r2-> b sums to 0.6: energy |0 + 0.6 - 1| = 0.4.
        assert!((off[b as usize] - (0.7f64 - 1.0).abs()).abs() < 1e-12);
        assert!((on[b as usize] - off[b as usize] - 0.4).abs() < 1e-12);
        // Candidate m has a direct edge from a, still no length-1 path to
        // it under rq; its on-demand set is the [r1] path.
        assert!(on[1] > off[1]);
    }

    #[test]
    fn category_table_routes_queries_by_relation() {
        // r is 1-N: one head, two tails.
        let kg = graph_from_tokens(&[("a", "r", "b"), ("a", "r", "c")], &[], true).unwrap();
        let emb = hand_store(&kg, &[0.0, 1.0, 2.0], &[1.0]);
        let test = [Triple {
            head: 0,
            relation: 0,
            tail: 1,
        }];
        let known = KnownTriples::from_splits(&[&test]);
        let m = evaluate(
            &kg,
            &test,
            &emb,
            &RuleSet::new(),
            &PathIndex::default(),
            &known,
            &EvalConfig {
                alpha1: 0.0,
                ..EvalConfig::default()
            },
        )
        .unwrap();
        assert_eq!(m.by_category[1][0].queries, 1);
        assert_eq!(m.by_category[1][1].queries, 1);
        assert_eq!(m.by_category[0][0].queries, 0);
        assert_eq!(m.by_category[2][0].queries, 0);
        assert_eq!(m.by_category[3][0].queries, 0);
    }

    #[test]
    fn report_lists_global_and_category_metrics() {
        let records = vec![QueryRecord {
            raw: 1,
            filtered: 1,
            category: RelationCategory::ManyToMany,
            predict_head: false,
        }];
        let m = aggregate(&records);
        let report = render_metrics(&m);
        assert!(report.contains("queries: 1\n"));
        assert!(report.contains("filtered_mrr: 1.0000\n"));
        assert!(report.contains("raw_mr: 1.0000\n"));
        assert!(report.contains("category\tpredict_head_hits10\tpredict_tail_hits10\n"));
        assert!(report.contains("N-N\t-\t1.0000\n"));
        assert!(report.contains("1-1\t-\t-\n"));
    }

    #[test]
    fn explanation_surfaces_composing_rule() {
        let kg = graph_from_tokens(
            &[
                ("Jonathan", "BornIn", "Hull"),
                ("Hull", "CityIn", "York"),
                ("Jonathan", "LivesIn", "York"),
                ("Mary", "PersonBornInCity", "Leeds"),
            ],
            &[],
            true,
        )
        .unwrap();
        let v = kg.vocab();
        let born = v.relation_id("BornIn").unwrap();
        let city = v.relation_id("CityIn").unwrap();
        let head = v.relation_id("PersonBornInCity").unwrap();
        let mut rules = RuleSet::new();
        rules
            .insert(CPRule::new(head, RelationPath::pair(born, city), 0.9, 0.5, 3).unwrap());
        let paths = crate::paths::enumerate_paths(&kg, &PathConfig::default());
        let jonathan = v.entity_id("Jonathan").unwrap();
        let york = v.entity_id("York").unwrap();
        let emb = EmbeddingStore::init(kg.num_entities(), kg.num_base_relations(), 4, 7);
        let explanation = explain(
            &emb,
            &rules,
            &paths,
            jonathan,
            head,
            york,
            &EvalConfig::default(),
        );
        let composed = explanation
            .paths
            .iter()
            .find(|c| c.path == RelationPath::pair(born, city))
            .expect("two-hop path indexed");
        assert_eq!(composed.rule.as_ref().unwrap().head, head);
        assert!(explanation.paths.iter().any(|c| c.path == RelationPath::single(
            v.relation_id("LivesIn").unwrap()
        ) && c.rule.is_none()));
        let weight_sum: f64 = explanation.paths.iter().map(|c| c.weight).sum();
        assert!((weight_sum - 1.0).abs() < 1e-12);
        assert!(
            (explanation.score
                - (explanation.triple_energy + explanation.path_energy.unwrap()))
            .abs()
                < 1e-12
        );
        let text = render_explanation(&explanation, v);
        assert!(text.contains("Jonathan -[PersonBornInCity]-> York"));
        assert!(text.contains("via PersonBornInCity <= BornIn & CityIn (sc 0.90)"));
    }

    #[test]
    fn explanation_without_paths_says_so() {
        let kg = graph_from_tokens(&[("a", "r", "b")], &[], true).unwrap();
        let emb = hand_store(&kg, &[0.0, 1.0], &[1.0]);
        let explanation = explain(
            &emb,
            &RuleSet::new(),
            &PathIndex::default(),
            0,
            0,
            1,
            &EvalConfig::default(),
        );
        assert!(explanation.paths.is_empty());
        assert_eq!(explanation.path_energy, None);
        assert_eq!(explanation.score, explanation.triple_energy);
        let text = render_explanation(&explanation, kg.vocab());
        assert!(text.contains("no indexed paths"));
    }
}
