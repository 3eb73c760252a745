#![allow(dead_code)]

pub mod oracle;
pub mod random;

use std::path::PathBuf;

use kgqa::config::PrefixMap;
use kgqa::entitylink::Gazetteer;
use kgqa::evalkit::load_dataset;
use kgqa::kbstore::parse_document;
use kgqa::pipeline::{Engine, PipelineConfig, QuestionInput};
use kgqa::{KnowledgeBase, SimilarityLexicon};

pub const KB_FILES: &[&str] =
    &["berlin.nt", "pitt_ritchie.nt", "juan_carlos.nt", "orangina.nt", "cleese.nt", "canada.nt", "table1.nt"];

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn kb(files: &[&str]) -> KnowledgeBase {
    let mut triples = Vec::new();
    for f in files {
        let text = std::fs::read_to_string(fixture(f)).unwrap();
        triples.extend(parse_document(&text).unwrap());
    }
    KnowledgeBase::from_triples(triples)
}

pub fn lexicon() -> SimilarityLexicon {
    SimilarityLexicon::load(&fixture("lexicon.tsv")).unwrap()
}

pub fn gazetteer() -> Gazetteer {
    Gazetteer::load(&fixture("gazetteer.tsv"), &PrefixMap::default()).unwrap()
}

pub fn engine(files: &[&str], config: PipelineConfig) -> Engine {
    Engine { kb: kb(files), gazetteer: gazetteer(), lexicon: lexicon(), prefixes: PrefixMap::default(), config }
}

pub fn questions(dataset: &str) -> Vec<QuestionInput> {
    load_dataset(&fixture(dataset), &PrefixMap::default()).unwrap()
}

pub fn question(id: &str) -> QuestionInput {
    questions("golden.jsonl")
        .into_iter()
        .chain(questions("extra.jsonl"))
        .find(|q| q.id == id)
        .unwrap_or_else(|| panic!("no fixture question {id}"))
}

pub fn res(local: &str) -> kgqa::Term {
    kgqa::Term::iri(&format!("http://dbpedia.org/resource/{local}"))
}

pub struct MetricCase {
    pub name: &'static str,
    pub gold: Vec<kgqa::Term>,
    pub predicted: Vec<kgqa::Term>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub verdict: kgqa::evalkit::Verdict,
}

fn terms(xs: &[&str]) -> Vec<kgqa::Term> {
    xs.iter().map(|x| kgqa::evalkit::parse_answer(x, &PrefixMap::default()).unwrap()).collect()
}

/// Gold/predicted pairs with precision, recall and F1 worked out by hand.
pub fn metric_cases() -> Vec<MetricCase> {
    use kgqa::evalkit::Verdict::*;
    let case = |name, gold: &[&str], predicted: &[&str], precision, recall, f1, verdict| MetricCase {
        name,
        gold: terms(gold),
        predicted: terms(predicted),
        precision,
        recall,
        f1,
        verdict,
    };
    vec![
        case("exact", &["res:a", "res:b"], &["res:b", "res:a"], 1.0, 1.0, 1.0, Right),
        case("two parents among five", &["res:p1", "res:p2"], &["res:p1", "res:c1", "res:p2", "res:c2", "res:c3"], 0.4, 1.0, 4.0 / 7.0, Partial),
        case("empty prediction", &["res:a"], &[], 0.0, 0.0, 0.0, Unprocessed),
        case("disjoint", &["res:a"], &["res:b"], 0.0, 0.0, 0.0, Wrong),
        case("subset", &["res:a", "res:b", "res:c", "res:d"], &["res:a"], 1.0, 0.25, 0.4, Partial),
        case("superset of one", &["res:Ottawa"], &["res:Ottawa", "res:Kingston", "res:Montreal", "res:Quebec"], 0.25, 1.0, 0.4, Partial),
        case("half overlap", &["res:a", "res:b"], &["res:b", "res:c"], 0.5, 0.5, 0.5, Partial),
        case("uneven overlap", &["res:a", "res:b", "res:c"], &["res:a", "res:b", "res:d", "res:e"], 0.5, 2.0 / 3.0, 4.0 / 7.0, Partial),
        case("date forms", &["\"2009-06-25\"^^<http://www.w3.org/2001/XMLSchema#date>"], &["25 June 2009"], 1.0, 1.0, 1.0, Right),
        case("numbers by value", &["\"1.88\"^^<http://www.w3.org/2001/XMLSchema#double>"], &["\"1.880\"^^<http://www.w3.org/2001/XMLSchema#decimal>", "\"2\""], 0.5, 1.0, 2.0 / 3.0, Partial),
        case("duplicates collapse", &["res:a"], &["res:a", "res:a"], 1.0, 1.0, 1.0, Right),
    ]
}
