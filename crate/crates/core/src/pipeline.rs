//! Question understanding, graph traversal and focus constraint in one call.

use std::fmt::Write as _;

use serde::Serialize;

use crate::config::PrefixMap;
use crate::entitylink::{detect_mentions, Gazetteer, MentionLink, DEFAULT_LINK_THRESHOLD};
use crate::focus::{extract_focus, Focus};
use crate::intent::{extract_structure, parse_bracketed, IntentStructure, Shape};
use crate::kbstore::{KnowledgeBase, Term};
use crate::lexsim::SimilarityLexicon;
use crate::traversal::{
    build_subgraph_excluding, enumerate_and_rank, structure_seeds, CandidatePath, RankerConfig, StepDirection,
    TraversalError,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuestionInput {
    pub id: String,
    pub question: String,
    /// Bracketed constituent tree of `question`.
    pub tree: String,
    pub gold: Option<Vec<Term>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Stage {
    EntityLinking,
    StructureExtraction,
    PathRanking,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::EntityLinking => "entity linking",
            Stage::StructureExtraction => "structure extraction",
            Stage::PathRanking => "path ranking",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Status {
    Answered,
    Unprocessed { stage: Stage, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnswerTrace {
    pub id: String,
    pub question: String,
    pub mentions: Vec<MentionLink>,
    pub structure: Option<IntentStructure>,
    pub focus: Focus,
    /// Ranked best first.
    pub paths: Vec<CandidatePath>,
    /// Answers of the top path.
    pub answers: Vec<Term>,
    pub status: Status,
}

impl AnswerTrace {
    pub fn is_answered(&self) -> bool {
        self.status == Status::Answered
    }

    pub fn failed_stage(&self) -> Option<Stage> {
        match &self.status {
            Status::Answered => None,
            Status::Unprocessed { stage, .. } => Some(*stage),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub link_threshold: f64,
    pub ranker: RankerConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig { link_threshold: DEFAULT_LINK_THRESHOLD, ranker: RankerConfig::default() }
    }
}

/// Answers one question. Never fails: any stage failure becomes an `Unprocessed` trace.
pub fn answer(
    kb: &KnowledgeBase,
    gaz: &Gazetteer,
    lex: &SimilarityLexicon,
    cfg: &PipelineConfig,
    q: &QuestionInput,
) -> AnswerTrace {
    let mut trace = AnswerTrace {
        id: q.id.clone(),
        question: q.question.clone(),
        mentions: Vec::new(),
        structure: None,
        focus: Focus::default(),
        paths: Vec::new(),
        answers: Vec::new(),
        status: Status::Answered,
    };
    let fail = |mut trace: AnswerTrace, stage: Stage, reason: String| {
        trace.status = Status::Unprocessed { stage, reason };
        trace
    };

    trace.mentions = detect_mentions(&q.question, gaz, cfg.link_threshold);
    if trace.mentions.is_empty() {
        return fail(trace, Stage::EntityLinking, "no entity mention linked".into());
    }

    let tree = match parse_bracketed(&q.tree).and_then(|t| t.aligned(&q.question)) {
        Ok(t) => t,
        Err(e) => return fail(trace, Stage::StructureExtraction, e.to_string()),
    };
    trace.focus = extract_focus(&q.question, &tree);
    let structure = match extract_structure(&tree, &trace.mentions) {
        Ok(s) => s,
        Err(e) => return fail(trace, Stage::StructureExtraction, e.to_string()),
    };
    trace.structure = Some(structure.clone());

    let seeds = structure_seeds(&structure);
    let ranked = build_subgraph_excluding(kb, &seeds, structure.k, &cfg.ranker.excluded_predicates).and_then(|sub| {
        enumerate_and_rank(kb, &sub, &structure, &trace.focus, lex, &cfg.ranker)
    });
    match ranked {
        Ok(paths) => {
            trace.answers = paths[0].answers.clone();
            trace.paths = paths;
            trace
        }
        Err(e @ TraversalError::UnknownSeed(_)) => fail(trace, Stage::EntityLinking, e.to_string()),
        Err(e @ TraversalError::TooDeep { .. }) => fail(trace, Stage::StructureExtraction, e.to_string()),
        Err(e) => fail(trace, Stage::PathRanking, e.to_string()),
    }
}

/// Loaded resources plus configuration.
pub struct Engine {
    pub kb: KnowledgeBase,
    pub gazetteer: Gazetteer,
    pub lexicon: SimilarityLexicon,
    pub prefixes: PrefixMap,
    pub config: PipelineConfig,
}

impl Engine {
    pub fn answer(&self, q: &QuestionInput) -> AnswerTrace {
        answer(&self.kb, &self.gazetteer, &self.lexicon, &self.config, q)
    }
}

fn show_term(t: &Term, prefixes: &PrefixMap) -> String {
    match t {
        Term::Iri(i) => prefixes.compact(i.as_str()),
        lit => lit.to_string(),
    }
}

fn arrow(d: StepDirection) -> &'static str {
    match d {
        StepDirection::Undirected => "--",
        StepDirection::Forward => "->",
        StepDirection::Backward => "<-",
    }
}

/// Answers as a single space-separated line.
pub fn render_answers(trace: &AnswerTrace, prefixes: &PrefixMap) -> String {
    trace.answers.iter().map(|a| show_term(a, prefixes)).collect::<Vec<_>>().join(" ")
}

/// The ranked path table: one line per path with its score decomposition and step scores.
pub fn render_paths(trace: &AnswerTrace, prefixes: &PrefixMap, limit: usize) -> String {
    let mut out = String::new();
    for (rank, p) in trace.paths.iter().take(limit).enumerate() {
        let steps: Vec<String> = p
            .steps
            .iter()
            .map(|s| format!("{} {} {:.4}", arrow(s.direction), prefixes.compact(s.predicate.as_str()), s.score))
            .collect();
        let answers: Vec<String> = p.answers.iter().map(|a| show_term(a, prefixes)).collect();
        let _ = writeln!(
            out,
            "  #{:<3} total {:.4} = predicates {:.4} + type {:.4} | {} | {}",
            rank + 1,
            p.total,
            p.predicate_mean,
            p.type_score,
            steps.join(" ; "),
            answers.join(" ")
        );
    }
    out
}

/// Full explanation record of one question.
pub fn render_explain(trace: &AnswerTrace, prefixes: &PrefixMap) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "question {}: {}", trace.id, trace.question);
    out.push_str("mentions:\n");
    for m in &trace.mentions {
        let _ = writeln!(
            out,
            "  \"{}\" [{}..{}] -> {} ({})",
            m.surface,
            m.span.start,
            m.span.end,
            prefixes.compact(m.entity.as_str()),
            m.confidence
        );
    }
    if let Some(s) = &trace.structure {
        let shape = match s.shape {
            Shape::Single => "single",
            Shape::Chain => "chain",
            Shape::Triangle => "triangle",
        };
        let _ = writeln!(out, "structure: {shape}, K = {}", s.k);
        for (i, e) in s.edges.iter().enumerate() {
            let _ = writeln!(
                out,
                "  e{i}: {} --\"{}\"--> {} (pattern {}{})",
                s.describe_node(e.from),
                e.phrase,
                s.describe_node(e.to),
                e.pattern as u8,
                if e.empty_phrase { ", no content words" } else { "" }
            );
        }
    }
    let f = &trace.focus;
    let coarse: Vec<String> = f.coarse_types.iter().map(|c| format!("{c:?}").to_lowercase()).collect();
    let _ = writeln!(out, "focus: phrase \"{}\", headword \"{}\", types [{}]", f.phrase, f.headword, coarse.join(", "));
    if !trace.paths.is_empty() {
        out.push_str("paths: total = mean(step scores) + type score\n");
        out.push_str(&render_paths(trace, prefixes, usize::MAX));
    }
    match &trace.status {
        Status::Answered => {
            let _ = writeln!(out, "answers: {}", render_answers(trace, prefixes));
        }
        Status::Unprocessed { stage, reason } => {
            let _ = writeln!(out, "unprocessed: {stage}: {reason}");
        }
    }
    out
}
