//! Random small knowledge bases with synthetic one- and two-edge structures.

use std::collections::BTreeSet;

use proptest::prelude::*;

use kgqa::config::ClassMap;
use kgqa::entitylink::{MentionLink, Span};
use kgqa::focus::{CoarseType, Focus};
use kgqa::intent::{ArgumentRole, IntentEdge, IntentNode, IntentStructure, Pattern};
use kgqa::kbstore::{Iri, KnowledgeBase, Literal, Term, Triple, RDFS_LABEL, RDF_TYPE};
use kgqa::lexsim::SimilarityLexicon;

// Small on purpose: labels and phrases must collide often for paths to survive tau.
pub const WORDS: &[&str] = &["leader", "mayor", "film", "movies", "directed", "director", "city", "of", "the"];

#[derive(Debug)]
pub struct Case {
    pub kb: KnowledgeBase,
    pub lex: SimilarityLexicon,
    pub classes: ClassMap,
    pub structure: IntentStructure,
    pub focus: Focus,
    pub tau: f64,
    pub respect_direction: bool,
}

fn iri(kind: &str, i: usize) -> Iri {
    Iri::new(format!("http://ex.org/{kind}{i}")).unwrap()
}

fn phrase(words: &[usize]) -> String {
    words.iter().map(|&w| WORDS[w]).collect::<Vec<_>>().join(" ")
}

fn words(max: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..WORDS.len(), 1..=max)
}

fn role() -> impl Strategy<Value = ArgumentRole> {
    prop_oneof![Just(ArgumentRole::Subject), Just(ArgumentRole::Object), Just(ArgumentRole::Unspecified)]
}

#[derive(Debug, Clone)]
struct EdgeDraft {
    phrase: Vec<usize>,
    role: ArgumentRole,
    flipped: bool,
}

fn edge_spec() -> impl Strategy<Value = EdgeDraft> {
    (words(2), role(), any::<bool>()).prop_map(|(phrase, role, flipped)| EdgeDraft { phrase, role, flipped })
}

fn mention(entity: Iri) -> MentionLink {
    MentionLink { span: Span::new(0, 1), surface: entity.local_name().to_string(), entity, confidence: 1.0 }
}

fn edge(d: &EdgeDraft, head: usize, argument: usize) -> IntentEdge {
    let (from, to) = if d.flipped { (argument, head) } else { (head, argument) };
    IntentEdge {
        from,
        phrase: phrase(&d.phrase),
        phrase_spans: Vec::new(),
        to,
        pattern: Pattern::NounPreposition,
        role: d.role,
        empty_phrase: false,
    }
}

pub fn case() -> impl Strategy<Value = Case> {
    let n_entities = 4usize..14;
    let n_predicates = 1usize..6;
    (n_entities, n_predicates)
        .prop_flat_map(|(ne, np)| {
            let triple = (0..ne, 0..np, prop_oneof![3 => (0..ne).prop_map(Some), 1 => Just(None)], 0usize..3);
            (
                Just((ne, np)),
                prop::collection::vec(triple, 20..150),
                prop::collection::vec(prop::collection::vec(words(3), 0..4), np),
                prop::collection::vec(prop::collection::vec(0usize..4, 0..3), ne),
                prop::collection::vec(words(2), 4),
                prop::collection::vec((0..WORDS.len(), 0..WORDS.len(), 1u32..10), 0..16),
                (0usize..3, any::<prop::sample::Index>(), any::<prop::sample::Index>()),
                (edge_spec(), edge_spec()),
                (0usize..4, words(2)),
                (prop::sample::select(vec![0.0, 0.1, 0.3, 0.3, 0.5]), any::<bool>()),
            )
        })
        .prop_map(
            |((_, _), triples, pred_labels, types, class_labels, lex_pairs, (shape, ia, ib), (ea, eb), (focus_kind, focus_words), (tau, respect))| {
                let mut all = Vec::new();
                for (s, p, o, lit) in triples {
                    let object = match o {
                        Some(o) => Term::Iri(iri("e", o)),
                        None => Term::Literal(Literal::plain(format!("v{lit}"))),
                    };
                    all.push(Triple::new(iri("e", s), iri("p", p), object));
                }
                let label = Iri::new(RDFS_LABEL).unwrap();
                for (p, labels) in pred_labels.iter().enumerate() {
                    for l in labels {
                        all.push(Triple::new(iri("p", p), label.clone(), Term::Literal(Literal::plain(phrase(l)))));
                    }
                }
                let ty = Iri::new(RDF_TYPE).unwrap();
                for (e, classes) in types.iter().enumerate() {
                    for &c in classes {
                        all.push(Triple::new(iri("e", e), ty.clone(), Term::Iri(iri("C", c))));
                    }
                }
                for (c, l) in class_labels.iter().enumerate() {
                    all.push(Triple::new(iri("C", c), label.clone(), Term::Literal(Literal::plain(phrase(l)))));
                }
                let kb = KnowledgeBase::from_triples(all);
                let lex = SimilarityLexicon::from_pairs(
                    lex_pairs.iter().filter(|(a, b, _)| a != b).map(|&(a, b, s)| (WORDS[a], WORDS[b], s as f64 / 10.0)),
                )
                .unwrap();

                // seeds are entities that occur as subjects
                let subjects: Vec<Iri> =
                    kb.triples().map(|t| t.subject.clone()).filter(|s| s.as_str().contains("/e")).collect::<BTreeSet<_>>().into_iter().collect();
                let sa = ia.get(&subjects).clone();
                let mut sb = ib.get(&subjects).clone();
                let shape = if shape == 2 && subjects.len() < 2 { 0 } else { shape };
                if shape == 2 && sb == sa {
                    sb = subjects.iter().find(|s| **s != sa).unwrap().clone();
                }
                let structure = match shape {
                    0 => IntentStructure::from_parts(
                        vec![IntentNode::Answer, IntentNode::Seed(mention(sa))],
                        vec![edge(&ea, 0, 1)],
                    ),
                    1 => IntentStructure::from_parts(
                        vec![IntentNode::Answer, IntentNode::Var(1), IntentNode::Seed(mention(sa))],
                        vec![edge(&eb, 1, 2), edge(&ea, 0, 1)],
                    ),
                    _ => IntentStructure::from_parts(
                        vec![IntentNode::Seed(mention(sa)), IntentNode::Answer, IntentNode::Seed(mention(sb))],
                        vec![edge(&ea, 1, 0), edge(&eb, 1, 2)],
                    ),
                }
                .unwrap();

                let mut classes = ClassMap::default();
                classes.set(CoarseType::Person, BTreeSet::from([iri("C", 0)]));
                classes.set(CoarseType::Organization, BTreeSet::from([iri("C", 1)]));
                classes.set(CoarseType::Place, BTreeSet::from([iri("C", 2)]));
                let focus = match focus_kind {
                    0 => Focus::default(),
                    1 => Focus { coarse_types: vec![CoarseType::Person, CoarseType::Organization], ..Focus::default() },
                    2 => Focus { coarse_types: vec![CoarseType::Place], ..Focus::default() },
                    _ => {
                        let p = phrase(&focus_words);
                        let head = WORDS[*focus_words.last().unwrap()].to_string();
                        Focus { phrase: p, headword: head, coarse_types: vec![] }
                    }
                };
                Case { kb, lex, classes, structure, focus, tau, respect_direction: respect }
            },
        )
}
