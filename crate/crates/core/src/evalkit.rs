//! Per-question precision / recall / F1, macro averages and the report table.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::PrefixMap;
use crate::kbstore::{parse_term, Iri, Literal, LiteralKind, Term};
use crate::pipeline::{Engine, QuestionInput, Stage};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("question {0} has no gold answers")]
    MissingGold(String),
    #[error("gold answer set is empty")]
    EmptyGold,
    #[error("duplicate question id {0}")]
    DuplicateId(String),
    #[error("no questions")]
    NoQuestions,
    #[error("reading dataset {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("dataset line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Verdict {
    Right,
    Partial,
    Wrong,
    Unprocessed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuestionScore {
    pub id: String,
    pub scores: Scores,
    /// Stage that rejected the question, when it was not processed.
    pub failed_stage: Option<Stage>,
}

/// Comparison key of an answer: IRIs verbatim, literals by datatype-aware value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AnswerKey {
    Iri(String),
    Date(String),
    Number(String),
    Text(String),
}

const DATE_FORMATS: &[&str] = &["%Y-%m-%d", "%Y/%m/%d", "%d %B %Y", "%B %d, %Y"];

fn parse_date(s: &str) -> Option<NaiveDate> {
    DATE_FORMATS
        .iter()
        .find_map(|f| NaiveDate::parse_from_str(s, f).ok())
        .or_else(|| NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S").ok().map(|dt| dt.date()))
}

fn number_key(s: &str) -> Option<String> {
    let v: f64 = s.parse().ok()?;
    // -0 and 0 are the same answer
    v.is_finite().then(|| format!("{}", if v == 0.0 { 0.0 } else { v }))
}

fn literal_key(l: &Literal) -> AnswerKey {
    let text = l.lexical.trim();
    let untyped = matches!(l.kind(), LiteralKind::String);
    if matches!(l.kind(), LiteralKind::Date) || untyped {
        if let Some(d) = parse_date(text) {
            return AnswerKey::Date(d.format("%Y-%m-%d").to_string());
        }
    }
    if matches!(l.kind(), LiteralKind::Number) || untyped {
        if let Some(n) = number_key(text) {
            return AnswerKey::Number(n);
        }
    }
    AnswerKey::Text(text.to_string())
}

pub fn normalize_answer(t: &Term) -> AnswerKey {
    match t {
        Term::Iri(i) => AnswerKey::Iri(i.as_str().to_string()),
        Term::Literal(l) => literal_key(l),
    }
}

/// Precision, recall and F1 of `predicted` against `gold`.
pub fn score_question(gold: &[Term], predicted: &[Term]) -> Result<Scores, EvalError> {
    let gold: BTreeSet<AnswerKey> = gold.iter().map(normalize_answer).collect();
    if gold.is_empty() {
        return Err(EvalError::EmptyGold);
    }
    let predicted: BTreeSet<AnswerKey> = predicted.iter().map(normalize_answer).collect();
    if predicted.is_empty() {
        return Ok(Scores { precision: 0.0, recall: 0.0, f1: 0.0, verdict: Verdict::Unprocessed });
    }
    let hit = gold.intersection(&predicted).count() as f64;
    let precision = hit / predicted.len() as f64;
    let recall = hit / gold.len() as f64;
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    let verdict = if precision == 1.0 && recall == 1.0 {
        Verdict::Right
    } else if f1 > 0.0 {
        Verdict::Partial
    } else {
        Verdict::Wrong
    };
    Ok(Scores { precision, recall, f1, verdict })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Averages {
    fn of<'a>(scores: impl Iterator<Item = &'a Scores>) -> Averages {
        let (mut n, mut p, mut r, mut f) = (0usize, 0.0, 0.0, 0.0);
        for s in scores {
            n += 1;
            p += s.precision;
            r += s.recall;
            f += s.f1;
        }
        if n == 0 {
            return Averages::default();
        }
        let n = n as f64;
        Averages { precision: p / n, recall: r / n, f1: f / n }
    }

    /// Scales every average by `ratio`.
    pub fn scaled(&self, ratio: f64) -> Averages {
        Averages { precision: self.precision * ratio, recall: self.recall * ratio, f1: self.f1 * ratio }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    /// Sorted by id.
    pub per_question: Vec<QuestionScore>,
    pub total: usize,
    pub processed: usize,
    pub right: usize,
    pub partial: usize,
    pub wrong: usize,
    /// Macro averages over all questions, unprocessed ones counting as zero.
    pub all: Averages,
    /// Macro averages over processed questions only.
    pub processed_only: Averages,
    pub failures: BTreeMap<Stage, usize>,
}

impl EvalReport {
    pub fn from_scores(mut per_question: Vec<QuestionScore>) -> EvalReport {
        per_question.sort_by(|a, b| a.id.cmp(&b.id));
        let count = |v: Verdict| per_question.iter().filter(|q| q.scores.verdict == v).count();
        let mut failures = BTreeMap::new();
        for q in &per_question {
            if let Some(stage) = q.failed_stage {
                *failures.entry(stage).or_insert(0) += 1;
            }
        }
        EvalReport {
            total: per_question.len(),
            processed: per_question.len() - count(Verdict::Unprocessed),
            right: count(Verdict::Right),
            partial: count(Verdict::Partial),
            wrong: count(Verdict::Wrong),
            all: Averages::of(per_question.iter().map(|q| &q.scores)),
            processed_only: Averages::of(
                per_question.iter().map(|q| &q.scores).filter(|s| s.verdict != Verdict::Unprocessed),
            ),
            failures,
            per_question,
        }
    }

    /// Whole-set estimate from a subset's averages: each average times the subset ratio.
    pub fn project(&self, ratio: f64) -> Averages {
        self.all.scaled(ratio)
    }

    /// Fixed-layout report text.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("id\tverdict\tprecision\trecall\tf1\n");
        for q in &self.per_question {
            let verdict = match q.failed_stage {
                Some(stage) => format!("{:?} ({stage})", q.scores.verdict),
                None => format!("{:?}", q.scores.verdict),
            };
            let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}", q.id, verdict, q.scores.precision, q.scores.recall, q.scores.f1);
        }
        out.push('\n');
        let _ = writeln!(
            out,
            "{:<16} {:>6} {:>10} {:>6} {:>8} {:>11} {:>14} {:>10}",
            "", "Total", "Processed", "Right", "Partial", "Avg.Recall", "Avg.Precision", "Avg.F-1"
        );
        let row = |label: &str, a: &Averages| {
            format!(
                "{:<16} {:>6} {:>10} {:>6} {:>8} {:>11.4} {:>14.4} {:>10.4}\n",
                label, self.total, self.processed, self.right, self.partial, a.recall, a.precision, a.f1
            )
        };
        out.push_str(&row("all questions", &self.all));
        out.push_str(&row("processed only", &self.processed_only));
        for (label, a) in [("all", &self.all), ("processed", &self.processed_only)] {
            let _ = writeln!(out, "exact {label}: recall {} precision {} f1 {}", a.recall, a.precision, a.f1);
        }
        if !self.failures.is_empty() {
            out.push_str("\nunprocessed by stage:\n");
            for (stage, n) in &self.failures {
                let _ = writeln!(out, "  {stage}: {n}");
            }
        }
        out
    }
}

/// Answers and scores every question. `jobs = 0` uses all cores.
pub fn run_dataset(engine: &Engine, questions: &[QuestionInput], jobs: usize) -> Result<EvalReport, EvalError> {
    if questions.is_empty() {
        return Err(EvalError::NoQuestions);
    }
    let mut seen = BTreeSet::new();
    for q in questions {
        if !seen.insert(q.id.as_str()) {
            return Err(EvalError::DuplicateId(q.id.clone()));
        }
        if q.gold.as_ref().is_none_or(|g| g.is_empty()) {
            return Err(EvalError::MissingGold(q.id.clone()));
        }
    }
    let score = |q: &QuestionInput| -> Result<QuestionScore, EvalError> {
        let trace = engine.answer(q);
        let scores = score_question(q.gold.as_deref().unwrap_or_default(), &trace.answers)?;
        Ok(QuestionScore { id: q.id.clone(), scores, failed_stage: trace.failed_stage() })
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| EvalError::Pool(e.to_string()))?;
    let scores: Vec<QuestionScore> = pool.install(|| questions.par_iter().map(score).collect::<Result<_, _>>())?;
    Ok(EvalReport::from_scores(scores))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    id: String,
    question: String,
    tree: String,
    #[serde(default)]
    gold: Option<Vec<String>>,
}

/// Reads one gold answer: an N-Triples term, a prefixed name, a bare IRI, or plain text.
pub fn parse_answer(text: &str, prefixes: &PrefixMap) -> Result<Term, String> {
    let text = text.trim();
    if text.starts_with('<') || text.starts_with('"') {
        return parse_term(text);
    }
    let expanded = prefixes.expand(text);
    if expanded != text || text.starts_with("http://") || text.starts_with("https://") {
        return Iri::new(expanded).map(Term::Iri).ok_or_else(|| format!("`{text}` is not a valid IRI"));
    }
    Ok(Term::Literal(Literal::plain(text)))
}

/// Parses a JSON-lines dataset; blank lines are skipped.
pub fn parse_dataset(text: &str, prefixes: &PrefixMap) -> Result<Vec<QuestionInput>, EvalError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| EvalError::Malformed { line: idx + 1, message };
        let rec: Record = serde_json::from_str(raw).map_err(|e| malformed(e.to_string()))?;
        if rec.question.trim().is_empty() || rec.tree.trim().is_empty() {
            return Err(malformed("question and tree must be non-empty".into()));
        }
        let gold = match rec.gold {
            None => None,
            Some(g) => Some(g.iter().map(|a| parse_answer(a, prefixes)).collect::<Result<Vec<_>, _>>().map_err(malformed)?),
        };
        out.push(QuestionInput { id: rec.id, question: rec.question, tree: rec.tree, gold });
    }
    if out.is_empty() {
        return Err(EvalError::NoQuestions);
    }
    Ok(out)
}

pub fn load_dataset(path: &Path, prefixes: &PrefixMap) -> Result<Vec<QuestionInput>, EvalError> {
    let text = std::fs::read_to_string(path).map_err(|source| EvalError::Io { path: path.display().to_string(), source })?;
    parse_dataset(&text, prefixes)
}
