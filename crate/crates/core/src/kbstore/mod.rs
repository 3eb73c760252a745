//! Immutable, indexed RDF triple store.

mod ntriples;
mod term;

use std::collections::{BTreeSet, HashMap};
use std::io::Read;

use serde::{Deserialize, Serialize};

pub use ntriples::{parse_document, parse_term, ParseError};
pub use term::{
    decamelize, Iri, Literal, LiteralKind, Term, Triple, DATE_CLASS, NUMBER_CLASS, RDFS_LABEL,
    RDF_LANG_STRING, RDF_TYPE, STRING_CLASS, XSD,
};

#[derive(Debug, thiserror::Error)]
pub enum KbError {
    #[error("reading knowledge base: {0}")]
    Io(#[from] std::io::Error),
    #[error("knowledge base is not valid UTF-8")]
    Utf8,
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Orientation of an edge relative to the node it was looked up from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// The node is the subject.
    Out,
    /// The node is the object.
    In,
}

impl Direction {
    pub fn reversed(self) -> Direction {
        match self {
            Direction::Out => Direction::In,
            Direction::In => Direction::Out,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Neighbor {
    pub predicate: Iri,
    pub other: Term,
    pub direction: Direction,
}

impl Neighbor {
    /// The KB triple this neighbor entry was derived from, given the node it was looked up from.
    pub fn triple_from(&self, node: &Term) -> Option<Triple> {
        match self.direction {
            Direction::Out => Some(Triple::new(
                node.as_iri()?.clone(),
                self.predicate.clone(),
                self.other.clone(),
            )),
            Direction::In => Some(Triple::new(
                self.other.as_iri()?.clone(),
                self.predicate.clone(),
                node.clone(),
            )),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    triples: BTreeSet<Triple>,
    out_index: HashMap<Iri, Vec<(Iri, Term)>>,
    in_index: HashMap<Term, Vec<(Iri, Iri)>>,
    label_index: HashMap<Iri, Vec<String>>,
    type_index: HashMap<Iri, Vec<Iri>>,
}

/// Reads an N-Triples document and builds all indexes.
pub fn load_ntriples(mut source: impl Read) -> Result<KnowledgeBase, KbError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let text = String::from_utf8(bytes).map_err(|_| KbError::Utf8)?;
    let triples = parse_document(&text)?;
    Ok(KnowledgeBase::from_triples(triples))
}

impl KnowledgeBase {
    pub fn from_triples(triples: impl IntoIterator<Item = Triple>) -> Self {
        let triples: BTreeSet<Triple> = triples.into_iter().collect();
        let mut out_index: HashMap<Iri, Vec<(Iri, Term)>> = HashMap::new();
        let mut in_index: HashMap<Term, Vec<(Iri, Iri)>> = HashMap::new();
        let mut explicit_labels: HashMap<Iri, Vec<String>> = HashMap::new();
        let mut type_index: HashMap<Iri, Vec<Iri>> = HashMap::new();
        let mut iris: BTreeSet<&Iri> = BTreeSet::new();

        for t in &triples {
            out_index
                .entry(t.subject.clone())
                .or_default()
                .push((t.predicate.clone(), t.object.clone()));
            in_index
                .entry(t.object.clone())
                .or_default()
                .push((t.predicate.clone(), t.subject.clone()));
            iris.insert(&t.subject);
            iris.insert(&t.predicate);
            if let Term::Iri(o) = &t.object {
                iris.insert(o);
            }
            match (t.predicate.as_str(), &t.object) {
                (RDFS_LABEL, Term::Literal(lit)) => {
                    explicit_labels.entry(t.subject.clone()).or_default().push(lit.lexical.clone())
                }
                (RDF_TYPE, Term::Iri(class)) => {
                    type_index.entry(t.subject.clone()).or_default().push(class.clone())
                }
                _ => {}
            }
        }

        let mut label_index = HashMap::with_capacity(iris.len());
        for iri in iris {
            let labels = match explicit_labels.remove(iri) {
                Some(mut labels) => {
                    labels.sort();
                    labels.dedup();
                    labels
                }
                None => vec![fallback_label(iri)],
            };
            label_index.insert(iri.clone(), labels);
        }
        for list in type_index.values_mut() {
            list.sort();
            list.dedup();
        }

        KnowledgeBase { triples, out_index, in_index, label_index, type_index }
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn triples(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn contains_triple(&self, t: &Triple) -> bool {
        self.triples.contains(t)
    }

    /// Whether `node` occurs in any triple (as subject, predicate or object).
    pub fn contains(&self, node: &Term) -> bool {
        match node {
            Term::Iri(iri) => {
                self.out_index.contains_key(iri)
                    || self.in_index.contains_key(node)
                    || self.label_index.contains_key(iri)
            }
            Term::Literal(_) => self.in_index.contains_key(node),
        }
    }

    pub fn out_edges(&self, subject: &Iri) -> &[(Iri, Term)] {
        self.out_index.get(subject).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn in_edges(&self, object: &Term) -> &[(Iri, Iri)] {
        self.in_index.get(object).map(Vec::as_slice).unwrap_or(&[])
    }

    /// All edges incident to `node`, sorted by predicate, then other endpoint, then direction.
    pub fn neighbors(&self, node: &Term) -> Vec<Neighbor> {
        let mut result = Vec::new();
        if let Term::Iri(iri) = node {
            for (p, o) in self.out_edges(iri) {
                result.push(Neighbor {
                    predicate: p.clone(),
                    other: o.clone(),
                    direction: Direction::Out,
                });
            }
        }
        for (p, s) in self.in_edges(node) {
            result.push(Neighbor {
                predicate: p.clone(),
                other: Term::Iri(s.clone()),
                direction: Direction::In,
            });
        }
        result.sort();
        result
    }

    /// `rdfs:label` values of `x`, or the decamelized local name when it has none.
    pub fn labels_of(&self, x: &Iri) -> Vec<String> {
        match self.label_index.get(x) {
            Some(labels) => labels.clone(),
            None => vec![fallback_label(x)],
        }
    }

    /// `rdf:type` classes of an IRI, or the datatype pseudo-class of a literal.
    pub fn types_of(&self, x: &Term) -> Vec<Iri> {
        match x {
            Term::Iri(iri) => self.type_index.get(iri).cloned().unwrap_or_default(),
            Term::Literal(lit) => vec![lit.pseudo_class()],
        }
    }

    /// Serializes the triple set in sorted order, one triple per line.
    pub fn to_ntriples(&self) -> String {
        let mut out = String::new();
        for t in &self.triples {
            out.push_str(&t.to_string());
            out.push('\n');
        }
        out
    }
}

fn fallback_label(iri: &Iri) -> String {
    let label = decamelize(iri.local_name());
    if label.is_empty() {
        iri.as_str().to_lowercase()
    } else {
        label
    }
}
