//! Gazetteer-driven mention detection and entity linking.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::config::PrefixMap;
use crate::kbstore::Iri;

/// Default minimum link confidence.
pub const DEFAULT_LINK_THRESHOLD: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum EntityKind {
    Resource,
    Class,
    Category,
}

impl std::str::FromStr for EntityKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "resource" => Ok(EntityKind::Resource),
            "class" => Ok(EntityKind::Class),
            "category" => Ok(EntityKind::Category),
            other => Err(format!("unknown entity kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub entity: Iri,
    pub prior: f64,
    pub kind: EntityKind,
}

#[derive(Debug, thiserror::Error)]
pub enum GazetteerError {
    #[error("reading gazetteer {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("gazetteer line {line}: {message}")]
    Malformed { line: usize, message: String },
}

/// Surface form → candidate entities, sorted by descending prior then IRI.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    entries: BTreeMap<String, Vec<Candidate>>,
    max_words: usize,
}

fn normalize_surface(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

impl Gazetteer {
    pub fn new() -> Self {
        Gazetteer::default()
    }

    pub fn insert(&mut self, surface: &str, candidate: Candidate) -> Result<(), String> {
        if !(0.0..=1.0).contains(&candidate.prior) {
            return Err(format!("prior {} outside [0, 1]", candidate.prior));
        }
        let key = normalize_surface(surface);
        if key.is_empty() {
            return Err("empty surface form".into());
        }
        self.max_words = self.max_words.max(key.split(' ').count());
        let list = self.entries.entry(key).or_default();
        list.retain(|c| c.entity != candidate.entity);
        list.push(candidate);
        list.sort_by(|a, b| b.prior.total_cmp(&a.prior).then_with(|| a.entity.cmp(&b.entity)));
        Ok(())
    }

    /// Parses `surface \t iri \t prior \t kind` lines; `#` lines are comments.
    pub fn parse(text: &str, prefixes: &PrefixMap) -> Result<Self, GazetteerError> {
        let mut gaz = Gazetteer::new();
        for (idx, raw) in text.lines().enumerate() {
            if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
                continue;
            }
            let malformed = |message: String| GazetteerError::Malformed { line: idx + 1, message };
            let cols: Vec<&str> = raw.split('\t').map(str::trim).collect();
            if cols.len() != 4 {
                return Err(malformed(format!("expected 4 tab-separated columns, found {}", cols.len())));
            }
            let entity = Iri::new(prefixes.expand(cols[1]))
                .ok_or_else(|| malformed(format!("`{}` is not a valid IRI", cols[1])))?;
            let prior: f64 =
                cols[2].parse().map_err(|_| malformed(format!("`{}` is not a number", cols[2])))?;
            let kind = cols[3].parse().map_err(malformed)?;
            gaz.insert(cols[0], Candidate { entity, prior, kind }).map_err(malformed)?;
        }
        Ok(gaz)
    }

    pub fn load(path: &Path, prefixes: &PrefixMap) -> Result<Self, GazetteerError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| GazetteerError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text, prefixes)
    }

    pub fn candidates(&self, surface: &str) -> &[Candidate] {
        self.entries.get(&normalize_surface(surface)).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Byte range into the question text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn contains(&self, other: Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: Span) -> bool {
        self.start < other.end && other.start < self.end
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MentionLink {
    pub span: Span,
    pub surface: String,
    pub entity: Iri,
    pub confidence: f64,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\'' || c == '-'
}

/// Word-like token spans of `text`.
fn word_spans(text: &str) -> Vec<Span> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (is_word_char(c), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                spans.push(Span::new(s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push(Span::new(s, text.len()));
    }
    spans
}

/// Finds non-overlapping mentions left to right, longest surface form first.
///
/// Segmentation only depends on which surface forms exist, so raising `threshold`
/// can remove links but never introduce new ones.
pub fn detect_mentions(question: &str, gaz: &Gazetteer, threshold: f64) -> Vec<MentionLink> {
    let words = word_spans(question);
    let mut links = Vec::new();
    let mut i = 0;
    while i < words.len() {
        let longest_end = (i..words.len().min(i + gaz.max_words.max(1)))
            .rev()
            .find(|&j| !gaz.candidates(&question[words[i].start..words[j].end]).is_empty());
        let Some(j) = longest_end else {
            i += 1;
            continue;
        };
        let span = Span::new(words[i].start, words[j].end);
        let surface = &question[span.start..span.end];
        let best = gaz
            .candidates(surface)
            .iter()
            .find(|c| c.kind == EntityKind::Resource && c.prior >= threshold);
        if let Some(c) = best {
            links.push(MentionLink {
                span,
                surface: surface.to_string(),
                entity: c.entity.clone(),
                confidence: c.prior,
            });
        }
        i = j + 1;
    }
    links
}
