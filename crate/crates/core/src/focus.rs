//! Answer focus and answer-type compatibility.

use serde::{Deserialize, Serialize};

use crate::config::ClassMap;
use crate::intent::ParseTree;
use crate::kbstore::{KnowledgeBase, Term};
use crate::lexsim::{self, SimilarityLexicon};
use crate::traversal::label_score;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoarseType {
    Person,
    Organization,
    Place,
    Date,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Focus {
    pub phrase: String,
    pub headword: String,
    /// Expected coarse types derived from who/where/when; `who` yields two.
    pub coarse_types: Vec<CoarseType>,
}

impl Focus {
    pub fn is_empty(&self) -> bool {
        self.phrase.is_empty() && self.coarse_types.is_empty()
    }

    /// The phrase, when there is one, for augmenting the last predicate of a path.
    pub fn extra_phrase(&self) -> Option<&str> {
        (!self.phrase.is_empty()).then_some(self.phrase.as_str())
    }
}

const INTERROGATIVE_PARTS: &[&[&str]] = &[
    &["give", "me", "all"],
    &["give", "me"],
    &["show", "me", "all"],
    &["show", "me"],
    &["how", "many"],
    &["what"],
    &["which"],
    &["list"],
    &["name"],
];

fn is_noun_tag(tag: &str) -> bool {
    tag.starts_with("NN")
}

/// Extracts the focus of `question` from its tagged tree.
pub fn extract_focus(question: &str, tree: &ParseTree) -> Focus {
    let leaves: Vec<(&str, String)> = tree
        .leaves()
        .into_iter()
        .filter_map(|l| l.token.as_deref().map(|tok| (l.label.as_str(), tok)))
        .filter(|(_, tok)| tok.chars().any(char::is_alphanumeric))
        .map(|(tag, tok)| (tag, tok.to_string()))
        .collect();
    let lower: Vec<String> = leaves.iter().map(|(_, t)| t.to_lowercase()).collect();

    // A leading preposition ("In which city ...") is not part of the interrogative.
    let mut start = 0;
    while start < leaves.len() && matches!(leaves[start].0, "IN" | "TO") {
        start += 1;
    }
    // A tree whose leaves are all punctuation leaves no word to inspect; use the raw text.
    let first_word = lower.get(start).cloned().or_else(|| {
        question
            .split(|c: char| !c.is_alphanumeric())
            .find(|w| !w.is_empty())
            .map(str::to_lowercase)
    });

    let coarse = match first_word.as_deref() {
        Some("who" | "whom") => vec![CoarseType::Person, CoarseType::Organization],
        Some("where") => vec![CoarseType::Place],
        Some("when") => vec![CoarseType::Date],
        _ => Vec::new(),
    };
    if !coarse.is_empty() {
        return Focus { coarse_types: coarse, ..Focus::default() };
    }

    let Some(part) = INTERROGATIVE_PARTS
        .iter()
        .find(|p| lower.len() >= start + p.len() && lower[start..start + p.len()].iter().zip(p.iter()).all(|(a, b)| a == b))
    else {
        return Focus::default();
    };
    let after = start + part.len();
    let Some(first_noun) = (after..leaves.len()).find(|&i| is_noun_tag(leaves[i].0)) else {
        return Focus::default();
    };
    let end = (first_noun..leaves.len()).take_while(|&i| is_noun_tag(leaves[i].0)).last().unwrap_or(first_noun);
    let words: Vec<&str> = leaves[first_noun..=end].iter().map(|(_, t)| t.as_str()).collect();
    Focus {
        phrase: words.join(" "),
        headword: words.last().map(|w| w.to_string()).unwrap_or_default(),
        coarse_types: Vec::new(),
    }
}

/// Mean answer-type compatibility of `answers` with the focus, in [0, 1].
pub fn type_score(
    kb: &KnowledgeBase,
    answers: &[Term],
    focus: &Focus,
    lex: &SimilarityLexicon,
    classes: &ClassMap,
) -> f64 {
    if answers.is_empty() || focus.is_empty() {
        return 0.0;
    }
    let head_words = lexsim::tokenize(&focus.headword);
    if focus.coarse_types.is_empty() && head_words.is_empty() {
        return 0.0;
    }
    let total: f64 = answers
        .iter()
        .map(|a| {
            let types = kb.types_of(a);
            if !focus.coarse_types.is_empty() {
                let hit = focus
                    .coarse_types
                    .iter()
                    .any(|&c| classes.classes(c).any(|class| types.contains(class)));
                return if hit { 1.0 } else { 0.0 };
            }
            types
                .iter()
                .flat_map(|t| kb.labels_of(t))
                .map(|label| label_score(&label, &head_words, lex))
                .fold(0.0, f64::max)
        })
        .sum();
    total / answers.len() as f64
}
