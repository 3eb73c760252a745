//! Question answering over RDF knowledge bases by intent-structure matching and
//! joint predicate ranking.

pub mod config;
pub mod entitylink;
pub mod evalkit;
pub mod focus;
pub mod intent;
pub mod kbstore;
pub mod lexsim;
pub mod pipeline;
pub mod traversal;

pub use config::{ClassMap, PrefixMap, Settings};
pub use entitylink::{detect_mentions, Gazetteer, MentionLink};
pub use evalkit::{run_dataset, score_question, EvalReport};
pub use focus::{extract_focus, type_score, Focus};
pub use intent::{extract_structure, parse_bracketed, IntentStructure};
pub use kbstore::{load_ntriples, Iri, KnowledgeBase, Term, Triple};
pub use lexsim::SimilarityLexicon;
pub use pipeline::{answer, AnswerTrace, Engine, PipelineConfig, QuestionInput};
pub use traversal::{build_subgraph, enumerate_and_rank, predicate_score, CandidatePath, RankerConfig};
