//! Closed-loop knowledge-graph inference: closed-path rules and
//! translational embeddings trained to reinforce each other.
//!
//! The crate is organized around one cycle. [`kg`] loads and indexes the
//! graph; [`paths`] enumerates relation paths between linked entity pairs
//! and scores them by resource allocation; [`rules`] grounds closed-path
//! rules and mines the seed set; [`embedding`] trains entity/relation
//! vectors under a joint loss over triples, rule-composed paths, and
//! rule-associated relation pairs; [`learner`] proposes new rules from
//! the trained vectors and concept signatures.

pub mod embedding;
pub mod engine;
pub mod error;
pub mod eval;
pub mod kg;
pub mod learner;
pub mod paths;
pub mod rules;
pub mod synth;

pub use embedding::{
    build_example, compose_path, energy_pathset, energy_relpair, energy_triple, example_loss,
    example_loss_and_grad, load_embeddings, path_embedding, sample_negatives, save_embeddings,
    train, train_from, EmbeddingStore, Norm, PathTerm, RelationAssociation, SparseGrad,
    TrainConfig, TrainingExample,
};
pub use engine::{run, write_snapshots, EngineOutcome, IterationSnapshot, LoopConfig};
pub use error::{Error, Result};
pub use eval::{
    evaluate, explain, rank_from_scores, render_explanation, render_metrics, score_candidate,
    CategoryCell, EvalConfig, Explanation, KnownTriples, MetricSet, Metrics, PathContribution,
};
pub use learner::{
    build_concept_signatures, coarse_score, learn_rules, score_cooccurrence,
    score_semantic_relevance, write_diagnostics, ConceptSignatures, ConceptVector, LearnedRules,
    LearnerConfig, RuleDiagnostic,
};
pub use kg::{
    base_index, build_graph, direction_sign, inverse, is_base, load_concept_pairs, load_triples,
    ConceptId, EntityId, KnowledgeGraph, RelationCategory, RelationId, Triple, Vocab,
};
pub use paths::{
    enumerate_paths, load_path_index, paths_between, pcra_flow, save_path_index,
    scored_paths_between, PathConfig, PathIndex, RelationPath,
};
pub use rules::{
    ground_and_score, mine_seed_rules, read_rules, write_rules, CPRule, RuleConfig, RuleSet,
};
