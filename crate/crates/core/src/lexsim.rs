//! Word-level semantic similarity backed by a pair lexicon with a stemming fallback.
//!
//! Scoring order for two case-folded words: identical → 1.0, lexicon entry for the
//! pair (or for their stems) → stored score, identical stems → [`STEM_MATCH_SCORE`],
//! anything else → 0.0.

use std::collections::HashMap;
use std::path::Path;

use rust_stemmers::{Algorithm, Stemmer};

/// Score given to two distinct words that reduce to the same stem.
pub const STEM_MATCH_SCORE: f64 = 0.8;

// Articles, copulas and prepositions, sorted for binary search.
const STOP_WORDS: &[&str] = &[
    "a", "about", "above", "across", "after", "against", "along", "am", "among", "an", "are",
    "around", "as", "at", "be", "been", "before", "behind", "being", "below", "beneath",
    "beside", "between", "beyond", "by", "down", "during", "for", "from", "in", "inside",
    "into", "is", "near", "of", "off", "on", "onto", "out", "outside", "over", "per", "since",
    "than", "the", "through", "throughout", "till", "to", "toward", "towards", "under", "until",
    "up", "upon", "via", "was", "were", "with", "within", "without",
];

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("reading lexicon {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("lexicon line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("similarity is undefined for an empty word")]
    EmptyWord,
}

pub fn is_stop_word(word: &str) -> bool {
    STOP_WORDS.binary_search(&word).is_ok()
}

/// Case-folded alphanumeric tokens with stop-words removed, in original order.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty() && !is_stop_word(w))
        .map(str::to_string)
        .collect()
}

fn pair_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

pub struct SimilarityLexicon {
    pairs: HashMap<(String, String), f64>,
    stem_pairs: HashMap<(String, String), f64>,
    stemmer: Stemmer,
}

impl std::fmt::Debug for SimilarityLexicon {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SimilarityLexicon").field("pairs", &self.pairs.len()).finish()
    }
}

impl Default for SimilarityLexicon {
    fn default() -> Self {
        SimilarityLexicon::new()
    }
}

impl SimilarityLexicon {
    pub fn new() -> Self {
        SimilarityLexicon {
            pairs: HashMap::new(),
            stem_pairs: HashMap::new(),
            stemmer: Stemmer::create(Algorithm::English),
        }
    }

    /// Builds a lexicon from `(word, word, score)` entries. Scores must lie in [0, 1].
    pub fn from_pairs<'a>(
        entries: impl IntoIterator<Item = (&'a str, &'a str, f64)>,
    ) -> Result<Self, LexiconError> {
        let mut lex = SimilarityLexicon::new();
        for (i, (a, b, score)) in entries.into_iter().enumerate() {
            lex.insert(a, b, score).map_err(|message| LexiconError::Malformed { line: i + 1, message })?;
        }
        Ok(lex)
    }

    /// Parses the tab-separated `word1 \t word2 \t score` format; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut lex = SimilarityLexicon::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            };
            if line.trim().is_empty() {
                continue;
            }
            let malformed = |message: String| LexiconError::Malformed { line: idx + 1, message };
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(malformed(format!("expected 3 tab-separated columns, found {}", cols.len())));
            }
            let score: f64 = cols[2]
                .parse()
                .map_err(|_| malformed(format!("`{}` is not a number", cols[2])))?;
            lex.insert(cols[0], cols[1], score).map_err(malformed)?;
        }
        Ok(lex)
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| LexiconError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    fn insert(&mut self, a: &str, b: &str, score: f64) -> Result<(), String> {
        if !(0.0..=1.0).contains(&score) {
            return Err(format!("score {score} outside [0, 1]"));
        }
        let (a, b) = (a.trim().to_lowercase(), b.trim().to_lowercase());
        if a.is_empty() || b.is_empty() {
            return Err("empty word".into());
        }
        self.pairs.insert(pair_key(&a, &b), score);
        let stem_key = pair_key(&self.stem(&a), &self.stem(&b));
        let slot = self.stem_pairs.entry(stem_key).or_insert(score);
        *slot = slot.max(score);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn stem(&self, word: &str) -> String {
        self.stemmer.stem(word).into_owned()
    }

    /// Symmetric similarity in [0, 1]. Errors when either word is empty after trimming.
    pub fn word_similarity(&self, w1: &str, w2: &str) -> Result<f64, LexiconError> {
        let (a, b) = (w1.trim().to_lowercase(), w2.trim().to_lowercase());
        if a.is_empty() || b.is_empty() {
            return Err(LexiconError::EmptyWord);
        }
        if a == b {
            return Ok(1.0);
        }
        if let Some(&score) = self.pairs.get(&pair_key(&a, &b)) {
            return Ok(score);
        }
        let (sa, sb) = (self.stem(&a), self.stem(&b));
        if let Some(&score) = self.stem_pairs.get(&pair_key(&sa, &sb)) {
            return Ok(score);
        }
        if sa == sb {
            return Ok(STEM_MATCH_SCORE);
        }
        Ok(0.0)
    }
}
