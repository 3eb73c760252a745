//! Namespace prefixes, coarse-type class map and traversal exclusions, loadable from TOML.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Deserialize;

use crate::focus::CoarseType;
use crate::kbstore::{Iri, DATE_CLASS};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parsing config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("config: `{0}` is not a valid IRI")]
    BadIri(String),
}

/// Prefix → namespace map used for display and for expanding prefixed names in input files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixMap {
    entries: BTreeMap<String, String>,
}

impl Default for PrefixMap {
    fn default() -> Self {
        let entries = [
            ("res", "http://dbpedia.org/resource/"),
            ("dbo", "http://dbpedia.org/ontology/"),
            ("dbp", "http://dbpedia.org/property/"),
            ("rdfs", "http://www.w3.org/2000/01/rdf-schema#"),
            ("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"),
            ("foaf", "http://xmlns.com/foaf/0.1/"),
            ("xsd", "http://www.w3.org/2001/XMLSchema#"),
            ("dct", "http://purl.org/dc/terms/"),
        ];
        PrefixMap {
            entries: entries.iter().map(|(p, ns)| (p.to_string(), ns.to_string())).collect(),
        }
    }
}

impl PrefixMap {
    pub fn empty() -> Self {
        PrefixMap { entries: BTreeMap::new() }
    }

    pub fn insert(&mut self, prefix: impl Into<String>, namespace: impl Into<String>) {
        self.entries.insert(prefix.into(), namespace.into());
    }

    /// Expands `prefix:local` when the prefix is known; strips `<...>`; otherwise returns the text.
    pub fn expand(&self, text: &str) -> String {
        let text = text.trim();
        if let Some(inner) = text.strip_prefix('<').and_then(|t| t.strip_suffix('>')) {
            return inner.to_string();
        }
        if let Some((prefix, local)) = text.split_once(':') {
            if let Some(ns) = self.entries.get(prefix) {
                return format!("{ns}{local}");
            }
        }
        text.to_string()
    }

    /// Shortest `prefix:local` form for display; the full IRI when no namespace matches.
    pub fn compact(&self, iri: &str) -> String {
        let best = self
            .entries
            .iter()
            .filter(|(_, ns)| iri.starts_with(ns.as_str()) && iri.len() > ns.len())
            .max_by_key(|(p, ns)| (ns.len(), std::cmp::Reverse((*p).clone())));
        match best {
            Some((p, ns)) => format!("{p}:{}", &iri[ns.len()..]),
            None => iri.to_string(),
        }
    }
}

/// Canonical classes for each coarse answer type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassMap {
    classes: BTreeMap<CoarseType, BTreeSet<Iri>>,
}

impl Default for ClassMap {
    fn default() -> Self {
        let mut classes = BTreeMap::new();
        let one = |s: &str| BTreeSet::from([Iri::new(s).expect("static IRI")]);
        classes.insert(CoarseType::Person, one("http://xmlns.com/foaf/0.1/Person"));
        classes.insert(CoarseType::Organization, one("http://dbpedia.org/ontology/Organisation"));
        classes.insert(CoarseType::Place, one("http://dbpedia.org/ontology/Place"));
        classes.insert(CoarseType::Date, one(DATE_CLASS));
        ClassMap { classes }
    }
}

impl ClassMap {
    pub fn classes(&self, coarse: CoarseType) -> impl Iterator<Item = &Iri> {
        self.classes.get(&coarse).into_iter().flatten()
    }

    pub fn set(&mut self, coarse: CoarseType, classes: BTreeSet<Iri>) {
        self.classes.insert(coarse, classes);
    }
}

/// Everything a config file can override.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Settings {
    pub prefixes: PrefixMap,
    pub classes: ClassMap,
    pub excluded_predicates: BTreeSet<Iri>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSettings {
    #[serde(default)]
    prefixes: BTreeMap<String, String>,
    #[serde(default)]
    classes: BTreeMap<CoarseType, Vec<String>>,
    #[serde(default)]
    traversal: RawTraversal,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawTraversal {
    #[serde(default)]
    exclude_predicates: Vec<String>,
}

impl Settings {
    /// Parses a TOML document layered over the defaults.
    ///
    /// ```toml
    /// [prefixes]
    /// ex = "http://example.org/"
    ///
    /// [classes]
    /// place = ["dbo:Place", "dbo:Location"]
    ///
    /// [traversal]
    /// exclude_predicates = ["dct:subject"]
    /// ```
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let raw: RawSettings = toml::from_str(text)?;
        let mut settings = Settings::default();
        for (p, ns) in raw.prefixes {
            settings.prefixes.insert(p, ns);
        }
        let to_iri = |s: &str, prefixes: &PrefixMap| {
            let expanded = prefixes.expand(s);
            Iri::new(expanded).ok_or_else(|| ConfigError::BadIri(s.to_string()))
        };
        for (coarse, list) in raw.classes {
            let set = list
                .iter()
                .map(|s| to_iri(s, &settings.prefixes))
                .collect::<Result<BTreeSet<_>, _>>()?;
            settings.classes.set(coarse, set);
        }
        for p in &raw.traversal.exclude_predicates {
            let iri = to_iri(p, &settings.prefixes)?;
            settings.excluded_predicates.insert(iri);
        }
        Ok(settings)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text)
    }
}
